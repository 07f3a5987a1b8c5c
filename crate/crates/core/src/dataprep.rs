//! Frame filtering ahead of feature extraction.
//!
//! Two passes run in order: frames whose container pixel count does not
//! exceed a threshold are dropped as redundant, then frames whose container
//! overlaps a border band by too many pixels are dropped as clipped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;
use crate::mask::LabelMask;
use crate::session::FrameRecord;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrepError {
    #[error("edge region is {region_w}x{region_h} but mask is {mask_w}x{mask_h}")]
    DimensionMismatch {
        region_w: u32,
        region_h: u32,
        mask_w: u32,
        mask_h: u32,
    },
    #[error("invalid prep config: {0}")]
    InvalidConfig(String),
}

/// A pixel quantity given either absolutely or relative to the frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Pixels(u64),
    /// For the container threshold: fraction of all frame pixels.
    /// For the band width: fraction of the shorter frame side.
    Fraction(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub np_threshold: Extent,
    pub edge_width: Extent,
    pub edge_overlap_threshold: u64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            np_threshold: Extent::Fraction(0.01),
            edge_width: Extent::Fraction(0.03),
            edge_overlap_threshold: 50,
        }
    }
}

/// Thresholds in pixels for one frame resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedPrep {
    pub np_threshold: u64,
    pub edge_width: u32,
    pub edge_overlap_threshold: u64,
}

impl PrepConfig {
    pub fn resolve(&self, width: u32, height: u32) -> Result<ResolvedPrep, PrepError> {
        let pixels = width as u64 * height as u64;
        let min_side = width.min(height);
        let np_threshold = match self.np_threshold {
            Extent::Pixels(n) => n,
            Extent::Fraction(f) if f.is_finite() && f >= 0.0 => (f * pixels as f64).round() as u64,
            Extent::Fraction(f) => {
                return Err(PrepError::InvalidConfig(format!(
                    "np_threshold fraction must be >= 0, got {f}"
                )))
            }
        };
        let edge_width = match self.edge_width {
            Extent::Pixels(n) => n.min(u32::MAX as u64) as u32,
            Extent::Fraction(f) if f.is_finite() && f > 0.0 => {
                ((f * min_side as f64).round() as u32).max(1)
            }
            Extent::Fraction(f) => {
                return Err(PrepError::InvalidConfig(format!(
                    "edge_width fraction must be > 0, got {f}"
                )))
            }
        };
        // 1 <= band < min(w, h) / 2
        if edge_width == 0 || 2 * edge_width as u64 >= min_side as u64 {
            return Err(PrepError::InvalidConfig(format!(
                "edge width {edge_width} px must satisfy 1 <= w < {min_side}/2 for a {width}x{height} frame"
            )));
        }
        Ok(ResolvedPrep {
            np_threshold,
            edge_width,
            edge_overlap_threshold: self.edge_overlap_threshold,
        })
    }
}

/// Border band of a frame: rows/cols within `band_width` of any edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRegion {
    pub width: u32,
    pub height: u32,
    pub band_width: u32,
}

impl EdgeRegion {
    pub fn new(width: u32, height: u32, band_width: u32) -> Self {
        Self {
            width,
            height,
            band_width,
        }
    }

    pub fn contains(&self, row: u32, col: u32) -> bool {
        let b = self.band_width;
        row < b
            || row >= self.height.saturating_sub(b)
            || col < b
            || col >= self.width.saturating_sub(b)
    }
}

/// Number of container pixels inside the border band.
pub fn edge_overlap(mask: &LabelMask, region: &EdgeRegion) -> Result<u64, PrepError> {
    if mask.width() != region.width || mask.height() != region.height {
        return Err(PrepError::DimensionMismatch {
            region_w: region.width,
            region_h: region.height,
            mask_w: mask.width(),
            mask_h: mask.height(),
        });
    }
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let b = (region.band_width as usize).min(w).min(h);
    let container = FoodCategory::Container.id();
    let labels = mask.labels();
    let mut count = 0u64;
    for row in 0..h {
        let line = &labels[row * w..(row + 1) * w];
        if row < b || row >= h - b || 2 * b >= w {
            count += line.iter().filter(|&&v| v == container).count() as u64;
        } else {
            let (left, right) = (&line[..b], &line[w - b..]);
            count += left.iter().chain(right).filter(|&&v| v == container).count() as u64;
        }
    }
    Ok(count)
}

fn container_pixels(mask: &LabelMask) -> u64 {
    let container = FoodCategory::Container.id();
    mask.labels().iter().filter(|&&v| v == container).count() as u64
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAudit {
    pub index: u32,
    pub container_pixels: u64,
    /// Only measured for frames that reached the second pass.
    pub edge_overlap: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepReport {
    pub kept: Vec<u32>,
    pub dropped_no_container: Vec<u32>,
    pub dropped_incomplete: Vec<u32>,
    pub frames: Vec<FrameAudit>,
}

impl PrepReport {
    pub fn is_kept(&self, index: u32) -> bool {
        self.kept.contains(&index)
    }
}

/// Keep frames whose container pixel count strictly exceeds the threshold.
pub fn filter_redundant(
    frames: &[FrameRecord],
    config: &PrepConfig,
) -> Result<PrepReport, PrepError> {
    let decisions: Vec<(u32, u64, bool)> = frames
        .par_iter()
        .map(|f| {
            let cfg = config.resolve(f.mask.width(), f.mask.height())?;
            let np = container_pixels(&f.mask);
            Ok((f.frame_index, np, np > cfg.np_threshold))
        })
        .collect::<Result<_, PrepError>>()?;
    let mut report = PrepReport::default();
    for (index, np, keep) in decisions {
        if keep {
            report.kept.push(index);
        } else {
            report.dropped_no_container.push(index);
        }
        report.frames.push(FrameAudit {
            index,
            container_pixels: np,
            edge_overlap: None,
        });
    }
    Ok(report)
}

/// Keep frames whose container/border overlap is strictly below the threshold.
///
/// Intended for frames that already passed [`filter_redundant`]; that is not
/// checked here.
pub fn filter_incomplete(
    frames: &[FrameRecord],
    config: &PrepConfig,
) -> Result<PrepReport, PrepError> {
    let decisions: Vec<(u32, u64, u64, bool)> = frames
        .par_iter()
        .map(|f| {
            let cfg = config.resolve(f.mask.width(), f.mask.height())?;
            let region = EdgeRegion::new(f.mask.width(), f.mask.height(), cfg.edge_width);
            let overlap = edge_overlap(&f.mask, &region)?;
            Ok((
                f.frame_index,
                container_pixels(&f.mask),
                overlap,
                overlap < cfg.edge_overlap_threshold,
            ))
        })
        .collect::<Result<_, PrepError>>()?;
    let mut report = PrepReport::default();
    for (index, np, overlap, keep) in decisions {
        if keep {
            report.kept.push(index);
        } else {
            report.dropped_incomplete.push(index);
        }
        report.frames.push(FrameAudit {
            index,
            container_pixels: np,
            edge_overlap: Some(overlap),
        });
    }
    Ok(report)
}

/// Redundant-frame removal followed by clipped-container removal.
pub fn prepare(frames: &[FrameRecord], config: &PrepConfig) -> Result<PrepReport, PrepError> {
    let first = filter_redundant(frames, config)?;
    let survivors: Vec<FrameRecord> = frames
        .iter()
        .filter(|f| first.kept.contains(&f.frame_index))
        .cloned()
        .collect();
    let second = filter_incomplete(&survivors, config)?;

    let mut frames_audit = first.frames;
    for audit in &mut frames_audit {
        if let Some(s) = second.frames.iter().find(|a| a.index == audit.index) {
            audit.edge_overlap = s.edge_overlap;
        }
    }
    Ok(PrepReport {
        kept: second.kept,
        dropped_no_container: first.dropped_no_container,
        dropped_incomplete: second.dropped_incomplete,
        frames: frames_audit,
    })
}

/// Frames listed as kept in `report`, in input order.
pub fn kept_frames<'a>(frames: &'a [FrameRecord], report: &PrepReport) -> Vec<&'a FrameRecord> {
    frames
        .iter()
        .filter(|f| report.kept.contains(&f.frame_index))
        .collect()
}
