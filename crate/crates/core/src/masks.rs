//! CamVid-style palette labels: class maps, decoding, reduction to the
//! background/vehicle/pedestrian label space, and presence verdicts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Frame;
use crate::pnm::{self, Raster};

/// Default minimum class area, as a fraction of frame pixels, for presence.
pub const DEFAULT_MIN_AREA_FRACTION: f64 = 0.001;

/// Category of a source class in the reduced three-class space. The
/// discriminant is the reduced label index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Background = 0,
    Vehicle = 1,
    Pedestrian = 2,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Background, Category::Vehicle, Category::Pedestrian];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Background => "background",
            Category::Vehicle => "vehicle",
            Category::Pedestrian => "pedestrian",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "background" => Ok(Category::Background),
            "vehicle" => Ok(Category::Vehicle),
            "pedestrian" => Ok(Category::Pedestrian),
            other => Err(Error::format(format!(
                "unknown category {other:?}; expected background, vehicle or pedestrian"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub color: [u8; 3],
    pub index: u8,
    pub name: String,
    pub category: Category,
}

/// Validated palette: unique colors, indices exactly `0..K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    /// Sorted by index, so `entries[i].index == i`.
    entries: Vec<ClassEntry>,
    by_color: HashMap<[u8; 3], u8>,
}

impl ClassMap {
    pub fn new(mut entries: Vec<ClassEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::format("class map has no entries"));
        }
        if entries.len() > 256 {
            return Err(Error::format("class map exceeds 256 classes"));
        }
        let mut by_color = HashMap::with_capacity(entries.len());
        for e in &entries {
            if let Some(prev) = by_color.insert(e.color, e.index) {
                let [r, g, b] = e.color;
                return Err(Error::format(format!(
                    "color ({r}, {g}, {b}) assigned to both class {prev} and class {}",
                    e.index
                )));
            }
        }
        entries.sort_by_key(|e| e.index);
        for (expected, e) in entries.iter().enumerate() {
            if usize::from(e.index) != expected {
                return Err(Error::format(format!(
                    "class indices must be exactly 0..{}; index {expected} is missing or duplicated",
                    entries.len()
                )));
            }
        }
        Ok(Self { entries, by_color })
    }

    /// Three classes whose indices coincide with their categories.
    pub fn reduced_identity() -> Self {
        let entries = vec![
            entry([0, 0, 0], 0, "background", Category::Background),
            entry([64, 0, 128], 1, "vehicle", Category::Vehicle),
            entry([64, 64, 0], 2, "pedestrian", Category::Pedestrian),
        ];
        Self::new(entries).expect("static map is valid")
    }

    pub fn num_classes(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn lookup(&self, color: [u8; 3]) -> Option<u8> {
        self.by_color.get(&color).copied()
    }

    pub fn category(&self, index: u8) -> Option<Category> {
        self.entries.get(usize::from(index)).map(|e| e.category)
    }

    /// Lowest-index class in the background category.
    pub fn background_index(&self) -> Option<u8> {
        self.entries
            .iter()
            .find(|e| e.category == Category::Background)
            .map(|e| e.index)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        load_class_map(&text).map_err(|e| e.in_file(path))
    }
}

fn entry(color: [u8; 3], index: u8, name: &str, category: Category) -> ClassEntry {
    ClassEntry {
        color,
        index,
        name: name.to_owned(),
        category,
    }
}

/// Parses `R G B index name category` lines; `#` starts a comment.
pub fn load_class_map(text: &str) -> Result<ClassMap> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::format(format!("line {}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [r, g, b, index, name, category] = fields[..] else {
            return Err(at(format!(
                "expected 6 fields `R G B index name category`, found {}",
                fields.len()
            )));
        };
        let channel = |s: &str| {
            s.parse::<u8>()
                .map_err(|_| at(format!("color channel {s:?} is not in 0..=255")))
        };
        let color = [channel(r)?, channel(g)?, channel(b)?];
        let index = index
            .parse::<u8>()
            .map_err(|_| at(format!("class index {index:?} is not in 0..=255")))?;
        let category = category.parse::<Category>().map_err(|e| at(e.to_string()))?;
        entries.push(entry(color, index, name, category));
    }
    ClassMap::new(entries)
}

/// Per-pixel class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
    num_classes: usize,
}

impl SegMask {
    pub fn new(width: usize, height: usize, labels: Vec<u8>, num_classes: usize) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::invalid(format!(
                "mask buffer holds {} labels, expected {}",
                labels.len(),
                width * height
            )));
        }
        if num_classes == 0 || num_classes > 256 {
            return Err(Error::invalid(format!("class count {num_classes} out of range")));
        }
        if let Some((i, &l)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| usize::from(l) >= num_classes)
        {
            return Err(Error::invalid(format!(
                "label {l} at pixel (x={}, y={}) is not below class count {num_classes}",
                i % width.max(1),
                i / width.max(1)
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            num_classes,
        })
    }

    pub fn filled(width: usize, height: usize, label: u8, num_classes: usize) -> Result<Self> {
        Self::new(width, height, vec![label; width * height], num_classes)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Reads a single-channel index raster (`P5`). Values at or above
    /// `num_classes` are a format error.
    pub fn read_pgm(path: &Path, num_classes: usize) -> Result<Self> {
        let raster = pnm::read(path)?;
        Self::from_raster(raster, num_classes).map_err(|e| e.in_file(path))
    }

    pub fn from_raster(raster: Raster, num_classes: usize) -> Result<Self> {
        if raster.channels != 1 {
            return Err(Error::format("class-index raster must be single channel (P5)"));
        }
        let Raster {
            width,
            height,
            data,
            ..
        } = raster;
        Self::new(width, height, data, num_classes).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Format(msg),
            other => other,
        })
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self.labels.clone(),
        }
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        pnm::write(path, &self.to_raster())
    }

    /// Pixel count per class.
    pub fn histogram(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_classes];
        for &l in &self.labels {
            counts[usize::from(l)] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedMask {
    pub mask: SegMask,
    /// Pixels whose color was absent from the map (always 0 in strict mode).
    pub unknown_pixels: u64,
}

/// Maps every pixel color to its class index. In non-strict mode unknown
/// colors fall back to the lowest-index background class and are counted.
pub fn decode_palette_mask(image: &Frame, cmap: &ClassMap, strict: bool) -> Result<DecodedMask> {
    let fallback = if strict {
        None
    } else {
        Some(cmap.background_index().ok_or_else(|| {
            Error::invalid("non-strict decoding needs a background class in the class map")
        })?)
    };
    let mut labels = Vec::with_capacity(image.width() * image.height());
    let mut unknown_pixels = 0;
    for (i, color) in image.rgb_pixels().enumerate() {
        let label = match (cmap.lookup(color), fallback) {
            (Some(l), _) => l,
            (None, Some(bg)) => {
                unknown_pixels += 1;
                bg
            }
            (None, None) => {
                let [r, g, b] = color;
                return Err(Error::UnknownColor {
                    r,
                    g,
                    b,
                    x: i % image.width(),
                    y: i / image.width(),
                });
            }
        };
        labels.push(label);
    }
    let mask = SegMask::new(image.width(), image.height(), labels, cmap.num_classes())?;
    Ok(DecodedMask {
        mask,
        unknown_pixels,
    })
}

/// Paints a mask back into palette colors.
pub fn encode_palette_mask(mask: &SegMask, cmap: &ClassMap) -> Result<Frame> {
    if mask.num_classes() != cmap.num_classes() {
        return Err(Error::invalid(format!(
            "mask has {} classes but the class map has {}",
            mask.num_classes(),
            cmap.num_classes()
        )));
    }
    let pixels = mask
        .labels()
        .iter()
        .flat_map(|&l| cmap.entries()[usize::from(l)].color)
        .collect();
    Frame::new(mask.width(), mask.height(), pixels, 0.0)
}

/// Collapses a source mask into `0 = background, 1 = vehicle, 2 = pedestrian`.
pub fn reduce_classes(mask: &SegMask, cmap: &ClassMap) -> Result<SegMask> {
    if mask.num_classes() != cmap.num_classes() {
        return Err(Error::invalid(format!(
            "mask has {} classes but the class map has {}",
            mask.num_classes(),
            cmap.num_classes()
        )));
    }
    let table: Vec<u8> = cmap.entries().iter().map(|e| e.category.index()).collect();
    let labels = mask
        .labels()
        .iter()
        .map(|&l| {
            table
                .get(usize::from(l))
                .copied()
                .ok_or_else(|| Error::invalid(format!("label {l} is not below {}", table.len())))
        })
        .collect::<Result<Vec<u8>>>()?;
    SegMask::new(mask.width(), mask.height(), labels, Category::ALL.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PresenceReport {
    pub vehicle_present: bool,
    pub pedestrian_present: bool,
    pub vehicle_fraction: f64,
    pub pedestrian_fraction: f64,
}

impl PresenceReport {
    pub fn any(&self) -> bool {
        self.vehicle_present || self.pedestrian_present
    }

    pub fn absent() -> Self {
        Self::default()
    }
}

pub fn presence(mask: &SegMask, min_area_fraction: f64) -> Result<PresenceReport> {
    if mask.num_classes() != Category::ALL.len() {
        return Err(Error::invalid(format!(
            "presence needs a reduced 3-class mask, got {} classes",
            mask.num_classes()
        )));
    }
    if !(0.0..=1.0).contains(&min_area_fraction) {
        return Err(Error::invalid(format!(
            "min_area_fraction {min_area_fraction} outside [0, 1]"
        )));
    }
    if mask.is_empty() {
        return Ok(PresenceReport::absent());
    }
    let hist = mask.histogram();
    let total = mask.len() as f64;
    let vehicle_fraction = hist[Category::Vehicle as usize] as f64 / total;
    let pedestrian_fraction = hist[Category::Pedestrian as usize] as f64 / total;
    Ok(PresenceReport {
        vehicle_present: hist[Category::Vehicle as usize] > 0
            && vehicle_fraction >= min_area_fraction,
        pedestrian_present: hist[Category::Pedestrian as usize] > 0
            && pedestrian_fraction >= min_area_fraction,
        vehicle_fraction,
        pedestrian_fraction,
    })
}

/// Pixel totals per category, summed over any number of reduced masks.
/// Index-mask files (`.pgm`) in `dir`, in lexicographic order.
pub fn list_mask_files(dir: &Path) -> Result<Vec<PathBuf>> {
    crate::imaging::list_with_extension(dir, "pgm")
}

pub fn category_pixel_counts<'a>(
    masks: impl IntoIterator<Item = &'a SegMask>,
) -> BTreeMap<Category, u64> {
    let mut totals: BTreeMap<Category, u64> = Category::ALL.iter().map(|&c| (c, 0)).collect();
    for mask in masks {
        for (c, n) in Category::ALL.iter().zip(mask.histogram()) {
            *totals.get_mut(c).expect("all categories seeded") += n;
        }
    }
    totals
}
