//! Per-pixel label rasters and their per-category pixel statistics.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat};

use crate::category::{FoodCategory, CATEGORY_COUNT};

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("mask dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("mask of {width}x{height} needs {expected} labels, got {actual}")]
    LengthMismatch {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("invalid category id {value} at row {row}, col {col}")]
    InvalidCategoryId { value: u8, row: u32, col: u32 },
    #[error("mask raster must be 8-bit single-channel, found {0}")]
    UnsupportedPixelFormat(String),
    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}

/// Row-major grid of category ids, one per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, labels: Vec<u8>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if labels.len() != expected {
            return Err(MaskError::LengthMismatch {
                width,
                height,
                expected,
                actual: labels.len(),
            });
        }
        if let Some(pos) = labels.iter().position(|&v| v as usize >= CATEGORY_COUNT) {
            return Err(MaskError::InvalidCategoryId {
                value: labels[pos],
                row: (pos / width as usize) as u32,
                col: (pos % width as usize) as u32,
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// A mask filled with one category.
    pub fn filled(width: u32, height: u32, category: FoodCategory) -> Result<Self, MaskError> {
        Self::new(
            width,
            height,
            vec![category.id(); width as usize * height as usize],
        )
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> FoodCategory,
    ) -> Result<Self, MaskError> {
        let mut labels = Vec::with_capacity(width as usize * height as usize);
        for row in 0..height {
            for col in 0..width {
                labels.push(f(row, col).id());
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, row: u32, col: u32) -> FoodCategory {
        let id = self.labels[row as usize * self.width as usize + col as usize];
        // Construction guarantees every id is valid.
        FoodCategory::from_id(id).expect("validated label")
    }

    pub fn set(&mut self, row: u32, col: u32, category: FoodCategory) {
        self.labels[row as usize * self.width as usize + col as usize] = category.id();
    }

    /// Decode a label mask from an 8-bit grayscale PNG.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self, MaskError> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
        let color = img.color();
        if color != image::ColorType::L8 {
            return Err(MaskError::UnsupportedPixelFormat(format!("{color:?}")));
        }
        let gray = img.into_luma8();
        let (w, h) = gray.dimensions();
        Self::new(w, h, gray.into_raw())
    }

    pub fn read_png(path: &Path) -> Result<Self, MaskError> {
        let bytes = std::fs::read(path).map_err(image::ImageError::IoError)?;
        Self::from_png_bytes(&bytes)
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>, MaskError> {
        let img = GrayImage::from_raw(self.width, self.height, self.labels.clone())
            .expect("buffer length matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn write_png(&self, path: &Path) -> Result<(), MaskError> {
        let bytes = self.to_png_bytes()?;
        std::fs::write(path, bytes).map_err(image::ImageError::IoError)?;
        Ok(())
    }
}

/// Pixel counts and centroids for every label of one mask.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryStats {
    width: u32,
    height: u32,
    counts: [u64; CATEGORY_COUNT],
    row_sums: [f64; CATEGORY_COUNT],
    col_sums: [f64; CATEGORY_COUNT],
}

impl CategoryStats {
    pub fn count(&self, category: FoodCategory) -> u64 {
        self.counts[category as usize]
    }

    pub fn counts(&self) -> &[u64; CATEGORY_COUNT] {
        &self.counts
    }

    /// Mean (row, col) of the category's pixels; `None` when it has none.
    pub fn centroid(&self, category: FoodCategory) -> Option<(f64, f64)> {
        let k = category as usize;
        let n = self.counts[k];
        (n > 0).then(|| (self.row_sums[k] / n as f64, self.col_sums[k] / n as f64))
    }

    /// Pixels of the container together with everything resting on it.
    pub fn plate_footprint(&self) -> u64 {
        self.counts[1..].iter().sum()
    }

    /// Centroid of the plate footprint.
    pub fn footprint_centroid(&self) -> Option<(f64, f64)> {
        let n = self.plate_footprint();
        (n > 0).then(|| {
            let r: f64 = self.row_sums[1..].iter().sum();
            let c: f64 = self.col_sums[1..].iter().sum();
            (r / n as f64, c / n as f64)
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Foods (ids 2..=17) with at least one pixel, in id order.
    pub fn present_foods(&self) -> impl Iterator<Item = FoodCategory> + '_ {
        FoodCategory::all()
            .iter()
            .copied()
            .filter(|c| c.is_food() && self.count(*c) > 0)
    }
}

/// Single pass over the raster accumulating counts and coordinate sums.
pub fn category_stats(mask: &LabelMask) -> CategoryStats {
    let mut counts = [0u64; CATEGORY_COUNT];
    // Integer accumulators keep the sums exact irrespective of scan order.
    let mut row_sums = [0u64; CATEGORY_COUNT];
    let mut col_sums = [0u64; CATEGORY_COUNT];
    for (row, line) in mask.labels.chunks_exact(mask.width as usize).enumerate() {
        for (col, &id) in line.iter().enumerate() {
            let k = id as usize;
            counts[k] += 1;
            row_sums[k] += row as u64;
            col_sums[k] += col as u64;
        }
    }
    CategoryStats {
        width: mask.width,
        height: mask.height,
        counts,
        row_sums: row_sums.map(|v| v as f64),
        col_sums: col_sums.map(|v| v as f64),
    }
}
