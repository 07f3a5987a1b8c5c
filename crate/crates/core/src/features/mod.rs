//! Handcrafted per-food features.
//!
//! Canonical layout of a [`FeatureVector`]:
//!
//! | index  | feature                                   |
//! |--------|-------------------------------------------|
//! | 0..15  | one-hot food type                         |
//! | 15     | food region ratio (food px / plate px)    |
//! | 16     | plate pixels / frame pixels               |
//! | 17     | area-to-weight ratio of the food, g/cm²   |
//! | 18     | relative distance bit (1 = rear)          |
//! | 19     | plate aspect ratio σ₁/σ₂                  |

mod awr;
mod geometry;
pub mod table;

use serde::{Deserialize, Serialize};

pub use awr::{calibrate_awr, AwrProvenance, AwrSample, AwrTable};
pub use geometry::{geometry_from_points, plate_aspect_ratio, PlateGeometry};

use crate::category::{FoodCategory, FOOD_COUNT};
use crate::mask::{category_stats, CategoryStats};
use crate::session::{FrameRecord, MealSession};

pub const FEATURE_COUNT: usize = 20;
pub const FRR: usize = 15;
pub const NP: usize = 16;
pub const AWR: usize = 17;
pub const RD: usize = 18;
pub const PAR: usize = 19;

/// Default real plate diameter used to turn pixels into cm².
pub const DEFAULT_PLATE_DIAMETER_CM: f64 = 26.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("frame has no container pixels")]
    NoContainer,
    #[error("{0} has no pixels in the frame")]
    FoodAbsent(FoodCategory),
    #[error("no area-to-weight ratio configured for {0}")]
    MissingAwr(FoodCategory),
    #[error("{0} is not one of the fifteen encoded foods")]
    NotEncodable(FoodCategory),
    #[error("plate geometry is degenerate ({pixels} pixels or collinear)")]
    DegeneratePlate { pixels: u64 },
    #[error("need at least two samples with nonzero area for {0}")]
    InsufficientSamples(FoodCategory),
    #[error("area-to-weight ratio for {food} must be positive, got {value}")]
    NonPositiveAwr { food: FoodCategory, value: f64 },
    #[error("awr table: {0}")]
    AwrFormat(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector([f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn new(
        food: FoodCategory,
        frr: f64,
        np_norm: f64,
        awr: f64,
        rd: bool,
        par: f64,
    ) -> Result<Self, FeatureError> {
        let idx = food.food_index().ok_or(FeatureError::NotEncodable(food))?;
        let mut v = [0.0; FEATURE_COUNT];
        v[idx] = 1.0;
        v[FRR] = frr;
        v[NP] = np_norm;
        v[AWR] = awr;
        v[RD] = rd as u8 as f64;
        v[PAR] = par;
        Ok(Self(v))
    }

    pub fn from_array(values: [f64; FEATURE_COUNT]) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_array(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }

    pub fn ft(&self) -> &[f64] {
        &self.0[..FOOD_COUNT]
    }

    /// Decodes the one-hot block; `None` unless exactly one slot is 1.
    pub fn food(&self) -> Option<FoodCategory> {
        let mut hot = self.ft().iter().enumerate().filter(|(_, &x)| x != 0.0);
        match (hot.next(), hot.next()) {
            (Some((i, &x)), None) if x == 1.0 => FoodCategory::from_food_index(i),
            _ => None,
        }
    }

    pub fn frr(&self) -> f64 {
        self.0[FRR]
    }

    pub fn np_norm(&self) -> f64 {
        self.0[NP]
    }

    pub fn awr(&self) -> f64 {
        self.0[AWR]
    }

    pub fn rd(&self) -> bool {
        self.0[RD] != 0.0
    }

    pub fn par(&self) -> f64 {
        self.0[PAR]
    }

    /// Range checks on every component.
    pub fn is_valid(&self) -> bool {
        self.food().is_some()
            && self.frr() >= 0.0
            && (0.0..=1.0).contains(&self.np_norm())
            && self.awr() > 0.0
            && (self.0[RD] == 0.0 || self.0[RD] == 1.0)
            && self.par() >= 1.0
            && self.0.iter().all(|x| x.is_finite())
    }
}

/// Food pixels over plate pixels.
pub fn food_region_ratio(food_pixels: u64, plate_pixels: u64) -> Result<f64, FeatureError> {
    if plate_pixels == 0 {
        return Err(FeatureError::NoContainer);
    }
    Ok(food_pixels as f64 / plate_pixels as f64)
}

/// 1 when the food sits above the plate centre in the image (farther from
/// the camera), 0 otherwise; equal rows count as front.
pub fn relative_distance(food_centroid: (f64, f64), plate_centroid: (f64, f64)) -> bool {
    food_centroid.0 < plate_centroid.0
}

/// Features of one food item together with the raw pixel counts behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct FoodObservation {
    pub food: FoodCategory,
    pub features: FeatureVector,
    pub food_pixels: u64,
    pub plate_pixels: u64,
    pub geometry: PlateGeometry,
}

/// Per-frame quantities shared by every food in it.
struct FrameContext {
    stats: CategoryStats,
    geometry: PlateGeometry,
    plate_pixels: u64,
    plate_centroid: (f64, f64),
    np_norm: f64,
}

fn frame_context(frame: &FrameRecord) -> Result<FrameContext, FeatureError> {
    let stats = category_stats(&frame.mask);
    if stats.count(FoodCategory::Container) == 0 {
        return Err(FeatureError::NoContainer);
    }
    let geometry = plate_aspect_ratio(&frame.mask)?;
    let plate_pixels = stats.plate_footprint();
    let plate_centroid = stats.footprint_centroid().ok_or(FeatureError::NoContainer)?;
    Ok(FrameContext {
        np_norm: plate_pixels as f64 / frame.mask.pixel_count() as f64,
        stats,
        geometry,
        plate_pixels,
        plate_centroid,
    })
}

fn observe(
    ctx: &FrameContext,
    food: FoodCategory,
    awr_table: &AwrTable,
) -> Result<FoodObservation, FeatureError> {
    food.food_index().ok_or(FeatureError::NotEncodable(food))?;
    let food_pixels = ctx.stats.count(food);
    let centroid = ctx.stats.centroid(food).ok_or(FeatureError::FoodAbsent(food))?;
    let awr = awr_table.require(food)?;
    let frr = food_region_ratio(food_pixels, ctx.plate_pixels)?;
    let rd = relative_distance(centroid, ctx.plate_centroid);
    let features = FeatureVector::new(food, frr, ctx.np_norm, awr, rd, ctx.geometry.par())?;
    Ok(FoodObservation {
        food,
        features,
        food_pixels,
        plate_pixels: ctx.plate_pixels,
        geometry: ctx.geometry,
    })
}

/// Feature vector of one food in one frame.
pub fn extract(
    frame: &FrameRecord,
    food: FoodCategory,
    awr_table: &AwrTable,
) -> Result<FeatureVector, FeatureError> {
    extract_observation(frame, food, awr_table).map(|o| o.features)
}

pub fn extract_observation(
    frame: &FrameRecord,
    food: FoodCategory,
    awr_table: &AwrTable,
) -> Result<FoodObservation, FeatureError> {
    observe(&frame_context(frame)?, food, awr_table)
}

/// Observations for every encodable food present in the frame, in id order.
pub fn extract_frame(
    frame: &FrameRecord,
    awr_table: &AwrTable,
) -> Result<Vec<FoodObservation>, FeatureError> {
    let ctx = frame_context(frame)?;
    ctx.stats
        .present_foods()
        .filter(|f| f.food_index().is_some())
        .map(|food| observe(&ctx, food, awr_table))
        .collect()
}

/// Physical area in cm² of `food_pixels` pixels, scaled by the plate.
pub fn food_area_cm2(food_pixels: u64, geometry: &PlateGeometry, plate_diameter_cm: f64) -> f64 {
    food_pixels as f64 * geometry.pixel_area_cm2(plate_diameter_cm)
}

/// Calibration observations from the given frames of a session: every food
/// seen in a frame whose phase has a positive weighed amount. Frames without
/// a usable plate are skipped.
pub fn awr_samples(
    session: &MealSession,
    frames: &[&FrameRecord],
    plate_diameter_cm: f64,
) -> Vec<AwrSample> {
    let mut out = Vec::new();
    for frame in frames {
        let stats = category_stats(&frame.mask);
        if stats.count(FoodCategory::Container) == 0 {
            continue;
        }
        let geometry = match plate_aspect_ratio(&frame.mask) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("session {}: frame {} skipped for calibration: {e}", session.session_id, frame.frame_index);
                continue;
            }
        };
        for food in stats.present_foods().filter(|f| f.food_index().is_some()) {
            if let Some(w) = session.ground_truth(food, frame.phase).filter(|&w| w > 0.0) {
                out.push(AwrSample {
                    food,
                    area_cm2: food_area_cm2(stats.count(food), &geometry, plate_diameter_cm),
                    weight_g: w,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::LabelMask;
    use crate::session::{Device, Phase};
    use std::collections::BTreeMap;

    fn awr_table() -> AwrTable {
        let mut v = BTreeMap::new();
        v.insert(FoodCategory::Yam, 3.5);
        v.insert(FoodCategory::Ugali, 2.1);
        AwrTable::configured(v).unwrap()
    }

    fn frame(mask: LabelMask) -> FrameRecord {
        FrameRecord { frame_index: 0, mask, phase: Phase::Before, device: Device::Synthetic }
    }

    /// 400x250 image (100,000 px); 100x100 plate (10,000 px) with a Yam block
    /// of 50x50 (25%) either in the lower or upper half of the plate.
    fn square_scene(yam_on_top: bool) -> FrameRecord {
        let (r0, c0) = (75u32, 150u32);
        let yam_rows = if yam_on_top { r0 + 10..r0 + 60 } else { r0 + 45..r0 + 95 };
        frame(
            LabelMask::from_fn(400, 250, |r, c| {
                let on_plate = (r0..r0 + 100).contains(&r) && (c0..c0 + 100).contains(&c);
                if !on_plate {
                    FoodCategory::Background
                } else if yam_rows.contains(&r) && (c0 + 25..c0 + 75).contains(&c) {
                    FoodCategory::Yam
                } else {
                    FoodCategory::Container
                }
            })
            .unwrap(),
        )
    }

    #[test]
    fn region_ratio_examples() {
        assert_eq!(food_region_ratio(0, 1000).unwrap(), 0.0);
        assert_eq!(food_region_ratio(250, 1000).unwrap(), 0.25);
        assert_eq!(food_region_ratio(3, 0), Err(FeatureError::NoContainer));
    }

    #[test]
    fn relative_distance_examples() {
        assert!(relative_distance((10.0, 0.0), (50.0, 0.0)));
        assert!(!relative_distance((90.0, 0.0), (50.0, 0.0)));
        assert!(!relative_distance((50.0, 3.0), (50.0, 9.0)));
    }

    #[test]
    fn extract_known_scene() {
        let v = extract(&square_scene(false), FoodCategory::Yam, &awr_table()).unwrap();
        assert_eq!(v.food(), Some(FoodCategory::Yam));
        assert_eq!(v.ft().iter().sum::<f64>(), 1.0);
        assert_eq!(v.frr(), 0.25);
        assert_eq!(v.np_norm(), 0.1);
        assert_eq!(v.awr(), 3.5);
        assert!(!v.rd());
        assert!((v.par() - 1.0).abs() < 1e-9);
        assert!(v.is_valid());
    }

    #[test]
    fn moving_food_up_only_flips_rd() {
        let table = awr_table();
        let front = extract(&square_scene(false), FoodCategory::Yam, &table).unwrap();
        let rear = extract(&square_scene(true), FoodCategory::Yam, &table).unwrap();
        let mut expected = *front.as_array();
        expected[RD] = 1.0;
        assert_eq!(rear.as_array(), &expected);
    }

    #[test]
    fn extraction_errors() {
        let table = awr_table();
        let scene = square_scene(false);
        assert_eq!(
            extract(&scene, FoodCategory::Ugali, &table),
            Err(FeatureError::FoodAbsent(FoodCategory::Ugali))
        );
        let empty = frame(LabelMask::filled(20, 20, FoodCategory::Background).unwrap());
        assert_eq!(extract(&empty, FoodCategory::Yam, &table), Err(FeatureError::NoContainer));
        let no_awr = AwrTable::configured(BTreeMap::new()).unwrap();
        assert_eq!(
            extract(&scene, FoodCategory::Yam, &no_awr),
            Err(FeatureError::MissingAwr(FoodCategory::Yam))
        );
        assert_eq!(
            extract(&scene, FoodCategory::OtherFood, &table),
            Err(FeatureError::NotEncodable(FoodCategory::OtherFood))
        );
    }

    #[test]
    fn clipped_container_inflates_region_ratio() {
        let full = square_scene(false);
        // Border cuts off the 20 container-only columns on the plate's left.
        let clipped = frame(
            LabelMask::from_fn(400, 250, |r, c| {
                if c < 170 { FoodCategory::Background } else { full.mask.get(r, c) }
            })
            .unwrap(),
        );
        let t = awr_table();
        let a = extract(&full, FoodCategory::Yam, &t).unwrap().frr();
        let b = extract(&clipped, FoodCategory::Yam, &t).unwrap().frr();
        assert!(b > a, "clipped {b} vs full {a}");
    }

    #[test]
    fn extraction_is_bitwise_deterministic() {
        let t = awr_table();
        let s = square_scene(true);
        let a = extract_frame(&s, &t).unwrap();
        let b = extract_frame(&s, &t).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(
            a[0].features.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b[0].features.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn one_hot_decodes() {
        for &food in FoodCategory::foods() {
            let v = FeatureVector::new(food, 0.1, 0.1, 1.0, false, 1.0).unwrap();
            assert_eq!(v.food(), Some(food));
            assert_eq!(v.ft().iter().filter(|&&x| x == 1.0).count(), 1);
        }
    }
}
