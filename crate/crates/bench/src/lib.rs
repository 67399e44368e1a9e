//! Shared fixtures for the criterion benchmarks.

use streetlight_core::{Frame, SegMask, SplitMix64};

/// Random reduced mask of the given size.
pub fn random_mask(width: usize, height: usize, seed: u64) -> SegMask {
    let mut rng = SplitMix64::new(seed);
    let labels = (0..width * height).map(|_| rng.below(3) as u8).collect();
    SegMask::new(width, height, labels, 3).expect("labels below 3")
}

/// Random RGB frame.
pub fn random_frame(width: usize, height: usize, seed: u64) -> Frame {
    let mut rng = SplitMix64::new(seed);
    let pixels = (0..width * height * 3).map(|_| rng.below(256) as u8).collect();
    Frame::new(width, height, pixels, 0.0).expect("buffer sized to dimensions")
}
