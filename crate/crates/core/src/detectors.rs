//! Detection backends standing in for a trained segmentation network.
//!
//! All backends produce reduced three-class masks. Externally trained models
//! plug in through [`FileDetector`]: one `P5` class-index raster per frame,
//! named `<frame id>.pgm`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::{Category, SegMask};
use crate::metrics::ProbMap;
use crate::rng::SplitMix64;

pub const REDUCED_CLASSES: usize = Category::ALL.len();

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutput {
    pub mask: SegMask,
    pub probs: Option<ProbMap>,
    pub source_id: String,
}

pub trait Detector {
    fn detect(&self, frame_id: &str) -> Result<DetectorOutput>;
}

/// Read-only lookup of reduced masks by frame id.
pub trait MaskStore {
    fn mask(&self, frame_id: &str) -> Result<SegMask>;
}

#[derive(Debug, Clone, Default)]
pub struct MemoryMaskStore {
    masks: BTreeMap<String, SegMask>,
}

impl MemoryMaskStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, frame_id: impl Into<String>, mask: SegMask) {
        self.masks.insert(frame_id.into(), mask);
    }
}

impl MaskStore for MemoryMaskStore {
    fn mask(&self, frame_id: &str) -> Result<SegMask> {
        self.masks
            .get(frame_id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("no mask for frame {frame_id:?}")))
    }
}

/// Directory of `<frame id>.pgm` reduced masks.
#[derive(Debug, Clone)]
pub struct DirMaskStore {
    dir: PathBuf,
}

impl DirMaskStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, frame_id: &str) -> PathBuf {
        self.dir.join(format!("{frame_id}.pgm"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl MaskStore for DirMaskStore {
    fn mask(&self, frame_id: &str) -> Result<SegMask> {
        let path = self.path_for(frame_id);
        if !path.is_file() {
            return Err(Error::NotFound(format!("{}", path.display())));
        }
        SegMask::read_pgm(&path, REDUCED_CLASSES)
    }
}

fn check_reduced(mask: &SegMask) -> Result<()> {
    if mask.num_classes() != REDUCED_CLASSES {
        return Err(Error::format(format!(
            "expected a reduced {REDUCED_CLASSES}-class mask, got {} classes",
            mask.num_classes()
        )));
    }
    Ok(())
}

/// Returns ground truth unchanged, with one-hot probabilities.
#[derive(Debug, Clone)]
pub struct OracleDetector<S> {
    truth: S,
}

impl<S: MaskStore> OracleDetector<S> {
    pub fn new(truth: S) -> Self {
        Self { truth }
    }
}

impl<S: MaskStore> Detector for OracleDetector<S> {
    fn detect(&self, frame_id: &str) -> Result<DetectorOutput> {
        let mask = self.truth.mask(frame_id)?;
        check_reduced(&mask)?;
        Ok(DetectorOutput {
            probs: Some(ProbMap::one_hot(&mask)),
            mask,
            source_id: frame_id.to_owned(),
        })
    }
}

/// Serves masks exported by an external model.
#[derive(Debug, Clone)]
pub struct FileDetector {
    store: DirMaskStore,
}

impl FileDetector {
    pub fn new(pred_dir: impl Into<PathBuf>) -> Self {
        Self {
            store: DirMaskStore::new(pred_dir),
        }
    }
}

impl Detector for FileDetector {
    fn detect(&self, frame_id: &str) -> Result<DetectorOutput> {
        let mask = self.store.mask(frame_id)?;
        Ok(DetectorOutput {
            mask,
            probs: None,
            source_id: frame_id.to_owned(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub flip_rate: f64,
    pub seed: u64,
}

impl PerturbationParams {
    pub fn new(flip_rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_rate) {
            return Err(Error::invalid(format!("flip_rate {flip_rate} outside [0, 1]")));
        }
        Ok(Self { flip_rate, seed })
    }
}

/// I.i.d. label noise. Pixels are visited in row-major order; each takes one
/// Bernoulli draw against `flip_rate` and, when flipped, one
/// `below(K - 1)` draw choosing among the other classes in ascending order.
pub fn perturb(mask: &SegMask, params: &PerturbationParams) -> SegMask {
    let k = mask.num_classes();
    if k < 2 {
        return mask.clone();
    }
    let mut rng = SplitMix64::new(params.seed);
    let labels = mask
        .labels()
        .iter()
        .map(|&l| {
            if !rng.bernoulli(params.flip_rate) {
                return l;
            }
            let pick = rng.below(k as u64 - 1) as u8;
            if pick >= l {
                pick + 1
            } else {
                pick
            }
        })
        .collect();
    SegMask::new(mask.width(), mask.height(), labels, k).expect("labels stay below k")
}

/// Oracle output degraded by [`perturb`]. Each frame gets its own stream,
/// seeded by mixing the base seed with the frame id.
#[derive(Debug, Clone)]
pub struct PerturbedDetector<S> {
    truth: S,
    params: PerturbationParams,
}

impl<S: MaskStore> PerturbedDetector<S> {
    pub fn new(truth: S, params: PerturbationParams) -> Self {
        Self { truth, params }
    }
}

/// FNV-1a over the frame id, folded into the base seed.
pub fn frame_seed(base: u64, frame_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in frame_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    SplitMix64::new(base ^ h).next_u64()
}

impl<S: MaskStore> Detector for PerturbedDetector<S> {
    fn detect(&self, frame_id: &str) -> Result<DetectorOutput> {
        let truth = self.truth.mask(frame_id)?;
        check_reduced(&truth)?;
        let params = PerturbationParams {
            seed: frame_seed(self.params.seed, frame_id),
            ..self.params
        };
        Ok(DetectorOutput {
            mask: perturb(&truth, &params),
            probs: None,
            source_id: frame_id.to_owned(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{confusion, mean_iou};

    fn mixed() -> SegMask {
        SegMask::new(4, 2, vec![0, 1, 1, 2, 0, 0, 2, 1], 3).unwrap()
    }

    #[test]
    fn oracle_roundtrip() {
        let mut store = MemoryMaskStore::new();
        store.insert("a", SegMask::filled(3, 3, 0, 3).unwrap());
        store.insert("b", mixed());
        let det = OracleDetector::new(store);
        let a = det.detect("a").unwrap();
        assert!(a.mask.labels().iter().all(|&l| l == 0));
        let b = det.detect("b").unwrap();
        assert_eq!(b.probs.as_ref().unwrap().argmax(), b.mask.labels());
        let cm = confusion(&b.mask, &mixed()).unwrap();
        assert_eq!(mean_iou(&cm).unwrap(), 1.0);
        assert!(matches!(det.detect("zzz"), Err(Error::NotFound(_))));
    }

    #[test]
    fn file_detector_contract() {
        let dir = tempfile::tempdir().unwrap();
        mixed().write_pgm(&dir.path().join("f1.pgm")).unwrap();
        SegMask::new(2, 1, vec![0, 7], 8)
            .unwrap()
            .write_pgm(&dir.path().join("bad.pgm"))
            .unwrap();
        let det = FileDetector::new(dir.path());
        assert_eq!(det.detect("f1").unwrap().mask, mixed());
        assert!(matches!(det.detect("missing"), Err(Error::NotFound(_))));
        assert!(matches!(
            det.detect("bad"),
            Err(Error::File { ref source, .. }) if matches!(**source, Error::Format(_))
        ));
    }

    #[test]
    fn perturb_extremes() {
        let m = mixed();
        assert_eq!(perturb(&m, &PerturbationParams::new(0.0, 9).unwrap()), m);
        let all = perturb(&m, &PerturbationParams::new(1.0, 9).unwrap());
        assert!(all.labels().iter().zip(m.labels()).all(|(a, b)| a != b));
        assert!(PerturbationParams::new(1.5, 0).is_err());
    }

    #[test]
    fn perturb_is_seed_deterministic() {
        let m = SegMask::filled(16, 16, 1, 3).unwrap();
        let p = PerturbationParams::new(0.4, 77).unwrap();
        assert_eq!(perturb(&m, &p), perturb(&m, &p));
        let q = PerturbationParams::new(0.4, 78).unwrap();
        assert_ne!(perturb(&m, &p), perturb(&m, &q));
    }
}
