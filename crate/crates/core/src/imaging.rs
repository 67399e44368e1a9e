//! Frame preprocessing: temporal decimation, BT.601 luma, median denoise and
//! ambient brightness.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pnm::{self, Raster};

/// An RGB frame with a UTC timestamp in (possibly fractional) seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    pub timestamp: f64,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, timestamp: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "frame buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let pixels = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, pixels, 0.0)
    }

    pub fn from_raster(raster: Raster, timestamp: f64) -> Result<Self> {
        if raster.channels != 3 {
            return Err(Error::format("expected an RGB (P6) raster"));
        }
        Self::new(raster.width, raster.height, raster.data, timestamp)
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: 3,
            data: self.pixels.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn rgb_pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "gray buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Ambient brightness as a fraction of full scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BrightnessEstimate(f64);

impl BrightnessEstimate {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::invalid(format!("brightness {value} outside [0, 1]")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Keeps frames at indices `0, keep_every, 2 * keep_every, ...`.
pub fn decimate_frames<T: Clone>(frames: &[T], keep_every: usize) -> Result<Vec<T>> {
    if keep_every == 0 {
        return Err(Error::invalid("keep_every must be at least 1"));
    }
    Ok(frames.iter().step_by(keep_every).cloned().collect())
}

/// BT.601 luma of one pixel, rounded half-up in exact integer arithmetic.
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    let scaled = 299 * r + 587 * g + 114 * b;
    // weights sum to 1000, so the result never exceeds 255
    ((scaled + 500) / 1000) as u8
}

pub fn to_grayscale(frame: &Frame) -> GrayImage {
    GrayImage {
        width: frame.width,
        height: frame.height,
        pixels: frame.rgb_pixels().map(luma).collect(),
    }
}

/// Median over the `(2r+1)^2` window with replicate-padded borders.
pub fn median_denoise(image: &GrayImage, radius: usize) -> Result<GrayImage> {
    if radius == 0 {
        return Err(Error::invalid("median radius must be at least 1"));
    }
    if radius > image.width.min(image.height) {
        return Err(Error::invalid(format!(
            "median radius {radius} exceeds min(width, height) = {}",
            image.width.min(image.height)
        )));
    }
    // Sliding 256-bin histogram per row (Huang). `below` counts window
    // values strictly less than the running median `m`.
    let (w, h) = (image.width, image.height);
    let r = radius as isize;
    let clamp_to = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let rows_of = |y: usize| (-r..=r).map(move |d| clamp_to(y as isize + d, h));
    let half = ((2 * radius + 1) * (2 * radius + 1) / 2) as u32;
    let px = &image.pixels;
    let mut out = Vec::with_capacity(px.len());
    for y in 0..h {
        let mut hist = [0u32; 256];
        for yy in rows_of(y) {
            for dx in -r..=r {
                hist[px[yy * w + clamp_to(dx, w)] as usize] += 1;
            }
        }
        let (mut m, mut below) = (0usize, 0u32);
        for x in 0..w {
            if x > 0 {
                let (old, new) = (clamp_to(x as isize - r - 1, w), clamp_to(x as isize + r, w));
                for yy in rows_of(y) {
                    let (a, b) = (px[yy * w + old] as usize, px[yy * w + new] as usize);
                    hist[a] -= 1;
                    hist[b] += 1;
                    if a < m {
                        below -= 1;
                    }
                    if b < m {
                        below += 1;
                    }
                }
            }
            while below > half {
                m -= 1;
                below -= hist[m];
            }
            while below + hist[m] <= half {
                below += hist[m];
                m += 1;
            }
            out.push(m as u8);
        }
    }
    Ok(GrayImage {
        width: image.width,
        height: image.height,
        pixels: out,
    })
}

pub fn mean_brightness(image: &GrayImage) -> Result<BrightnessEstimate> {
    if image.pixels.is_empty() {
        return Err(Error::invalid("cannot estimate brightness of an empty image"));
    }
    let sum: u64 = image.pixels.iter().map(|&p| u64::from(p)).sum();
    let n = image.pixels.len() as u64;
    BrightnessEstimate::new(sum as f64 / (n * 255) as f64)
}

/// Grayscale, denoise, then average: the brightness path of the frame pipeline.
pub fn estimate_brightness(frame: &Frame, denoise_radius: usize) -> Result<BrightnessEstimate> {
    let gray = to_grayscale(frame);
    let radius = denoise_radius.min(gray.width.min(gray.height));
    if radius == 0 {
        return mean_brightness(&gray);
    }
    mean_brightness(&median_denoise(&gray, radius)?)
}

#[derive(Debug, Clone)]
pub struct NamedFrame {
    /// File stem, used as the frame identifier.
    pub id: String,
    pub path: PathBuf,
    pub frame: Frame,
}

/// Raster files (`.ppm`) in `dir`, in lexicographic order.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    list_with_extension(dir, "ppm")
}

pub(crate) fn list_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let path = entry?.path();
        let matches = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case(ext));
        if matches && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a frame directory. A file named `<integer-milliseconds>.ppm` takes
/// its timestamp from the name; otherwise the timestamp is
/// `index * frame_interval_s`.
pub fn load_frame_dir(dir: &Path, frame_interval_s: f64) -> Result<Vec<NamedFrame>> {
    list_frame_files(dir)?
        .into_iter()
        .enumerate()
        .map(|(index, path)| {
            let id = file_stem(&path);
            let timestamp = match id.parse::<u64>() {
                Ok(ms) => ms as f64 / 1000.0,
                Err(_) => index as f64 * frame_interval_s,
            };
            let frame = Frame::from_raster(pnm::read(&path)?, timestamp)
                .map_err(|e| e.in_file(&path))?;
            Ok(NamedFrame { id, path, frame })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn median_by_sorting(image: &GrayImage, radius: usize) -> Vec<u8> {
        let (w, h, r) = (image.width as isize, image.height as isize, radius as isize);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let mut win = Vec::new();
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (xx, yy) = ((x + dx).clamp(0, w - 1), (y + dy).clamp(0, h - 1));
                        win.push(image.pixels[(yy * w + xx) as usize]);
                    }
                }
                win.sort_unstable();
                out.push(win[win.len() / 2]);
            }
        }
        out
    }

    #[test]
    fn sliding_median_matches_sorting() {
        let mut rng = SplitMix64::new(99);
        for (w, h, radius) in [(1, 1, 1), (7, 3, 1), (13, 9, 2), (9, 12, 3), (5, 5, 5), (31, 17, 4)] {
            for levels in [2u64, 5, 256] {
                let px = (0..w * h).map(|_| rng.below(levels) as u8).collect();
                let img = GrayImage::new(w, h, px).unwrap();
                let fast = median_denoise(&img, radius).unwrap();
                assert_eq!(fast.pixels, median_by_sorting(&img, radius), "{w}x{h} r={radius}");
            }
        }
    }

    #[test]
    fn decimation_indices() {
        let frames: Vec<usize> = (0..10).collect();
        assert_eq!(decimate_frames(&frames, 1).unwrap(), frames);
        assert_eq!(decimate_frames(&frames, 3).unwrap(), vec![0, 3, 6, 9]);
        assert!(decimate_frames::<usize>(&[], 5).unwrap().is_empty());
        assert!(matches!(
            decimate_frames(&frames, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn luma_examples() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([0, 0, 0]), 0);
        assert_eq!(luma([255, 0, 0]), 76);
        // 149.685
        assert_eq!(luma([0, 255, 0]), 150);
        // 0.114 * 250 = 28.5 exactly, rounds up
        assert_eq!(luma([0, 0, 250]), 29);
    }

    #[test]
    fn luma_rounds_half_up() {
        // 1.495 -> 1, 0.57 -> 1, 0.886 -> 1, 0.413 -> 0
        assert_eq!(luma([5, 0, 0]), 1);
        assert_eq!(luma([0, 0, 5]), 1);
        assert_eq!(luma([1, 1, 0]), 1);
        assert_eq!(luma([1, 0, 1]), 0);
    }

    #[test]
    fn median_examples() {
        let flat = GrayImage::filled(5, 4, 7);
        assert_eq!(median_denoise(&flat, 1).unwrap(), flat);

        let mut px = vec![0u8; 9];
        px[4] = 255;
        let spike = GrayImage::new(3, 3, px).unwrap();
        assert_eq!(median_denoise(&spike, 1).unwrap().get(1, 1), 0);

        let one = GrayImage::filled(1, 1, 42);
        assert_eq!(median_denoise(&one, 1).unwrap().pixels(), &[42]);
    }

    #[test]
    fn median_radius_bounds() {
        let img = GrayImage::filled(4, 2, 1);
        assert!(median_denoise(&img, 2).is_ok());
        assert!(matches!(median_denoise(&img, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(median_denoise(&img, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn brightness_examples() {
        assert_eq!(mean_brightness(&GrayImage::filled(3, 3, 0)).unwrap().value(), 0.0);
        assert_eq!(mean_brightness(&GrayImage::filled(3, 3, 255)).unwrap().value(), 1.0);
        let two = GrayImage::new(2, 1, vec![51, 153]).unwrap();
        assert_eq!(mean_brightness(&two).unwrap().value(), 0.4);
        let empty = GrayImage::new(0, 0, vec![]).unwrap();
        assert!(matches!(mean_brightness(&empty), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn frame_invariants() {
        assert!(Frame::new(0, 1, vec![], 0.0).is_err());
        assert!(Frame::new(2, 1, vec![0; 5], 0.0).is_err());
        assert!(Frame::new(2, 1, vec![0; 6], 0.0).is_ok());
    }

    #[test]
    fn frame_dir_timestamps() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::filled(2, 2, [10, 20, 30]).unwrap();
        pnm::write(&dir.path().join("1500.ppm"), &f.to_raster()).unwrap();
        pnm::write(&dir.path().join("2500.ppm"), &f.to_raster()).unwrap();
        pnm::write(&dir.path().join("x_late.ppm"), &f.to_raster()).unwrap();
        fs::write(dir.path().join("notes.txt"), "skip").unwrap();
        let frames = load_frame_dir(dir.path(), 0.5).unwrap();
        let stamps: Vec<f64> = frames.iter().map(|f| f.frame.timestamp).collect();
        assert_eq!(stamps, vec![1.5, 2.5, 1.0]);
        assert_eq!(frames[2].id, "x_late");
    }
}
