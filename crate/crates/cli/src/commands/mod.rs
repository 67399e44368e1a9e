pub mod calibrate;
pub mod daynight;
pub mod evaluate;
pub mod ingest;
pub mod simulate;
