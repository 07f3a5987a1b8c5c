//! Synthetic meal scenes with known geometry and weights.
//!
//! A round plate of real diameter D is seen under a camera tilt θ: its
//! image is an ellipse with horizontal semi-axis `a` and vertical semi-axis
//! `a·cos θ`, the far side of the plate at the top of the frame. Foods are
//! circular sectors of the inner disk of radius [`FOOD_DISK`]·a on the
//! physical plate, projected the same way; a sector covering a fraction f
//! of the plate spans an angle of 2π·f / FOOD_DISK². The remaining ring
//! keeps some container visible around the whole rim.
//!
//! Weights follow weight = awr · area_cm² · (1 + σ·z), where area_cm² is the
//! rendered food pixel count times the physical area of one pixel, known
//! from D, `a` and θ. With σ = 0 the weight is a fixed function of the mask.
//!
//! Random scenes draw D and a camera scale (pixels per cm) separately, so
//! the plate's pixel count is an informative but imperfect cue to its size.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;
use crate::features::{extract_frame, AwrTable, FeatureError, DEFAULT_PLATE_DIAMETER_CM};
use crate::mask::LabelMask;
use crate::regression::{Dataset, WeightSample};
use crate::rng::{rng_from, sub_rng};
use crate::session::{write_session, Device, FrameRecord, MealSession, Phase, SessionError};

/// Radius of the food-bearing disk relative to the plate radius.
pub const FOOD_DISK: f64 = 0.8;

/// Largest total food fraction that fits in the food disk.
pub const FOOD_CAPACITY: f64 = FOOD_DISK * FOOD_DISK;

pub const MAX_TILT_DEG: f64 = 80.0;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("foods do not fit on the plate: {0}")]
    UnplaceableFood(String),
    #[error("invalid scene config: {0}")]
    InvalidConfig(String),
    #[error("feature extraction failed on a defect-free scene {scene}: {source}")]
    Extraction { scene: usize, source: FeatureError },
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Defect {
    None,
    NoContainer,
    ClippedContainer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoodPlacement {
    pub food: FoodCategory,
    /// Share of the plate area covered by the food, in (0, FOOD_CAPACITY].
    pub area_fraction: f64,
    /// Start of the sector, counter-clockwise from the image's right, with
    /// 90° pointing to the far side of the plate.
    pub sector_start_deg: f64,
}

impl FoodPlacement {
    pub fn span_deg(&self) -> f64 {
        360.0 * self.area_fraction / FOOD_CAPACITY
    }

    /// Whether the sector's centre lies on the far half of the plate.
    pub fn is_rear(&self) -> bool {
        (self.sector_start_deg + self.span_deg() / 2.0).to_radians().sin() > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub width: u32,
    pub height: u32,
    /// Plate centre (row, col) before any clipping shift.
    pub plate_center: (f64, f64),
    /// Horizontal (unforeshortened) plate diameter in pixels.
    pub plate_major_px: f64,
    pub tilt_deg: f64,
    pub plate_diameter_cm: f64,
    pub foods: Vec<FoodPlacement>,
    pub true_awr: BTreeMap<FoodCategory, f64>,
    pub defect: Defect,
    /// For clipped plates: share of the plate pushed out of the frame, and
    /// whether it leaves on the right.
    pub clip_fraction: f64,
    pub clip_right: bool,
    /// Relative weight noise σ.
    pub noise: f64,
    pub seed: u64,
    pub frame_index: u32,
    pub phase: Phase,
    pub device: Device,
}

impl SceneConfig {
    /// Top-down 26 cm plate in the middle of a 480 x 360 frame, no foods.
    pub fn centered(tilt_deg: f64) -> Self {
        Self {
            width: 480,
            height: 360,
            plate_center: (180.0, 240.0),
            plate_major_px: 280.0,
            tilt_deg,
            plate_diameter_cm: DEFAULT_PLATE_DIAMETER_CM,
            foods: Vec::new(),
            true_awr: reference_awr(),
            defect: Defect::None,
            clip_fraction: 0.25,
            clip_right: true,
            noise: 0.0,
            seed: 0,
            frame_index: 0,
            phase: Phase::Before,
            device: Device::Synthetic,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        if self.width == 0 || self.height == 0 {
            return bad("empty image".into());
        }
        if !(0.0..=MAX_TILT_DEG).contains(&self.tilt_deg) {
            return bad(format!("tilt {}° outside [0, {MAX_TILT_DEG}]", self.tilt_deg));
        }
        if !(self.plate_major_px.is_finite() && self.plate_major_px >= 4.0) {
            return bad(format!("plate major axis {} px", self.plate_major_px));
        }
        if !(self.plate_diameter_cm.is_finite() && self.plate_diameter_cm > 0.0) {
            return bad("plate diameter must be positive".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise must be non-negative".into());
        }
        if self.defect == Defect::ClippedContainer && !(0.1..0.5).contains(&self.clip_fraction) {
            return bad(format!("clip fraction {} outside [0.1, 0.5)", self.clip_fraction));
        }
        for f in &self.foods {
            if !f.food.is_food() {
                return bad(format!("{} is not a food", f.food));
            }
            if !(f.area_fraction > 0.0 && f.area_fraction.is_finite()) {
                return bad(format!("{}: area fraction {}", f.food, f.area_fraction));
            }
            match self.true_awr.get(&f.food) {
                Some(&k) if k > 0.0 && k.is_finite() => {}
                _ => return bad(format!("no positive true awr for {}", f.food)),
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(f) = self.foods.iter().find(|f| !seen.insert(f.food)) {
            return bad(format!("{} placed twice", f.food));
        }
        let total: f64 = self.foods.iter().map(|f| f.area_fraction).sum();
        if total > FOOD_CAPACITY + 1e-12 {
            return Err(SynthError::UnplaceableFood(format!(
                "total fraction {total:.3} exceeds capacity {FOOD_CAPACITY:.2}"
            )));
        }
        for (i, x) in self.foods.iter().enumerate() {
            for y in &self.foods[i + 1..] {
                if sectors_overlap(x, y) {
                    return Err(SynthError::UnplaceableFood(format!("{} and {} overlap", x.food, y.food)));
                }
            }
        }
        Ok(())
    }

    fn cos_tilt(&self) -> f64 {
        self.tilt_deg.to_radians().cos()
    }

    /// Physical area of one pixel on the plate, in cm².
    pub fn pixel_area_cm2(&self) -> f64 {
        let cm_per_px = self.plate_diameter_cm / self.plate_major_px;
        cm_per_px * cm_per_px / self.cos_tilt()
    }
}

fn sectors_overlap(a: &FoodPlacement, b: &FoodPlacement) -> bool {
    let d = (b.sector_start_deg - a.sector_start_deg).rem_euclid(360.0);
    // b starts inside a, or a starts inside b.
    d < a.span_deg() - 1e-9 || (360.0 - d) % 360.0 < b.span_deg() - 1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoodTruth {
    pub food: FoodCategory,
    pub weight_g: f64,
    pub area_cm2: f64,
    /// Rendered pixels, counting any part pushed out of the frame.
    pub area_px: u64,
    pub rd: bool,
    pub frr: f64,
    pub awr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub frame_index: u32,
    pub phase: Phase,
    pub device: Device,
    pub defect: Defect,
    pub tilt_deg: f64,
    pub par_expected: f64,
    /// Plate footprint (container plus foods) inside the frame.
    pub plate_px: u64,
    pub foods: Vec<FoodTruth>,
}

/// Fraction of an ellipse's area beyond the chord at `t` (in units of the
/// semi-axis, -1..1).
fn area_beyond(t: f64) -> f64 {
    (t.acos() - t * (1.0 - t * t).sqrt()) / PI
}

/// Chord position leaving `q` of the area outside.
fn chord_for_fraction(q: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if area_beyond(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn generate_scene(config: &SceneConfig) -> Result<(FrameRecord, SyntheticTruth), SynthError> {
    config.validate()?;
    let (w, h) = (config.width as i64, config.height as i64);
    let a = config.plate_major_px / 2.0;
    let cos_t = config.cos_tilt();
    let b = a * cos_t;
    let (cy, mut cx) = config.plate_center;
    if config.defect == Defect::ClippedContainer {
        let t = chord_for_fraction(config.clip_fraction);
        cx = if config.clip_right { w as f64 - 0.5 - t * a } else { t * a - 0.5 };
    }
    let sectors: Vec<(u8, f64, f64)> = config
        .foods
        .iter()
        .map(|f| (f.food.id(), f.sector_start_deg.to_radians().rem_euclid(2.0 * PI), f.span_deg().to_radians()))
        .collect();

    let mut labels = vec![FoodCategory::Background.id(); (w * h) as usize];
    let mut food_px = vec![0u64; config.foods.len()];
    let mut plate_px = 0u64;
    let food_r2 = (FOOD_DISK * a).powi(2);
    let (r0, r1) = ((cy - b).floor() as i64 - 1, (cy + b).ceil() as i64 + 1);
    let (c0, c1) = ((cx - a).floor() as i64 - 1, (cx + a).ceil() as i64 + 1);
    for r in r0..=r1 {
        let v = (cy - r as f64) / cos_t;
        for c in c0..=c1 {
            let u = c as f64 - cx;
            let d2 = u * u + v * v;
            if d2 > a * a {
                continue;
            }
            let mut label = FoodCategory::Container.id();
            if d2 <= food_r2 && !sectors.is_empty() {
                let phi = v.atan2(u).rem_euclid(2.0 * PI);
                if let Some(k) = sectors.iter().position(|&(_, s, span)| (phi - s).rem_euclid(2.0 * PI) < span) {
                    label = sectors[k].0;
                    food_px[k] += 1;
                }
            }
            let inside = (0..h).contains(&r) && (0..w).contains(&c);
            if !inside {
                continue;
            }
            if config.defect == Defect::NoContainer && label == FoodCategory::Container.id() {
                continue;
            }
            labels[(r * w + c) as usize] = label;
            if config.defect != Defect::NoContainer {
                plate_px += 1;
            }
        }
    }
    let mask = LabelMask::new(config.width, config.height, labels).expect("valid labels by construction");

    let mut rng = rng_from(config.seed);
    let pixel_area = config.pixel_area_cm2();
    let foods = config
        .foods
        .iter()
        .zip(&food_px)
        .map(|(f, &px)| {
            let awr = config.true_awr[&f.food];
            let area_cm2 = px as f64 * pixel_area;
            let z: f64 = StandardNormal.sample(&mut rng);
            FoodTruth {
                food: f.food,
                weight_g: (awr * area_cm2 * (1.0 + config.noise * z)).max(0.0),
                area_cm2,
                area_px: px,
                rd: f.is_rear(),
                frr: f.area_fraction,
                awr,
            }
        })
        .collect();
    let truth = SyntheticTruth {
        frame_index: config.frame_index,
        phase: config.phase,
        device: config.device,
        defect: config.defect,
        tilt_deg: config.tilt_deg,
        par_expected: 1.0 / cos_t,
        plate_px,
        foods,
    };
    let frame = FrameRecord { frame_index: config.frame_index, mask, phase: config.phase, device: config.device };
    Ok((frame, truth))
}

/// Invented per-food area-to-weight ratios (g/cm²) used as ground truth.
pub fn reference_awr() -> BTreeMap<FoodCategory, f64> {
    use FoodCategory::*;
    [
        (OnionsTomatoSalad, 1.8),
        (TilapiaFish, 2.9),
        (Ugali, 3.3),
        (Yam, 3.5),
        (ChickenDrumstick, 2.7),
        (SpinachStew, 2.1),
        (Avocado, 2.0),
        (Banku, 3.6),
        (TomatoSoup, 1.9),
        (RoastedBeef, 2.6),
        (Chapati, 2.2),
        (Onions, 1.85),
        (FriedRice, 3.0),
        (SaltedFish, 2.4),
        (BeefStew, 2.3),
    ]
    .into_iter()
    .collect()
}

/// Parameter ranges for random scenes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneRanges {
    pub width: u32,
    pub height: u32,
    /// Camera scale on the plate plane; with the physical diameter this
    /// sets the plate's size in pixels.
    pub pixels_per_cm: (f64, f64),
    pub aim_tilt_deg: (f64, f64),
    pub ebutton_tilt_deg: (f64, f64),
    pub foods_per_scene: (usize, usize),
    pub food_fraction: (f64, f64),
    /// Physical plate diameter.
    pub plate_diameter_cm: (f64, f64),
    /// Clear gap between the plate and the frame border, beyond the edge band.
    pub margin_px: f64,
    pub clip_fraction: (f64, f64),
    pub true_awr: BTreeMap<FoodCategory, f64>,
}

impl Default for SceneRanges {
    fn default() -> Self {
        Self {
            width: 480,
            height: 360,
            pixels_per_cm: (9.75, 10.25),
            aim_tilt_deg: (5.0, 25.0),
            ebutton_tilt_deg: (45.0, 65.0),
            foods_per_scene: (1, 3),
            food_fraction: (0.02, 0.45),
            plate_diameter_cm: (20.0, 32.0),
            margin_px: 14.0,
            clip_fraction: (0.15, 0.35),
            true_awr: reference_awr(),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

impl SceneRanges {
    fn tilt_for(&self, device: Device, rng: &mut ChaCha8Rng) -> f64 {
        match device {
            Device::EButton => uniform(rng, self.ebutton_tilt_deg),
            _ => uniform(rng, self.aim_tilt_deg),
        }
    }

    /// Physical diameter, pixel radius and centre of a plate that fits in
    /// the frame with the margin. Plates too large for the frame are shrunk
    /// in pixels (the camera is taken to be farther away).
    fn place_plate(&self, tilt_deg: f64, rng: &mut ChaCha8Rng) -> (f64, f64, (f64, f64)) {
        let (w, h, m) = (self.width as f64, self.height as f64, self.margin_px);
        let cos_t = tilt_deg.to_radians().cos();
        let max_a = ((w - 2.0 * m) / 2.0).min((h - 2.0 * m) / (2.0 * cos_t)) - 1.0;
        let diameter = uniform(rng, self.plate_diameter_cm);
        let a = (diameter / 2.0 * uniform(rng, self.pixels_per_cm)).min(max_a);
        let b = a * cos_t;
        let cx = uniform(rng, (a + m + 1.0, w - a - m - 1.0));
        let cy = uniform(rng, (b + m + 1.0, h - b - m - 1.0));
        (diameter, a, (cy, cx))
    }

    /// Distinct random foods with fractions that fit, laid out as
    /// consecutive sectors from a random start with random gaps.
    fn place_foods(&self, rng: &mut ChaCha8Rng) -> Vec<FoodPlacement> {
        let (kmin, kmax) = self.foods_per_scene;
        let k = rng.random_range(kmin.max(1)..=kmax.max(kmin).max(1));
        let mut pool: Vec<FoodCategory> = FoodCategory::foods().to_vec();
        let (fmin, fmax) = self.food_fraction;
        let mut placements = Vec::with_capacity(k);
        let mut remaining = FOOD_CAPACITY;
        for i in 0..k {
            let reserve = fmin * (k - i - 1) as f64;
            let hi = fmax.min(remaining - reserve);
            if hi < fmin {
                break;
            }
            let food = pool.swap_remove(rng.random_range(0..pool.len()));
            let f = uniform(rng, (fmin, hi));
            remaining -= f;
            placements.push(FoodPlacement { food, area_fraction: f, sector_start_deg: 0.0 });
        }
        let used: f64 = placements.iter().map(|p| p.span_deg()).sum();
        let mut angle: f64 = rng.random_range(0.0..360.0);
        let free = (360.0 - used).max(0.0);
        for p in &mut placements {
            p.sector_start_deg = angle.rem_euclid(360.0);
            angle += p.span_deg() + free / k as f64 * rng.random::<f64>();
        }
        placements
    }

    pub fn random_scene(&self, defect: Defect, device: Device, seed: u64) -> SceneConfig {
        let mut rng = rng_from(seed);
        let tilt = self.tilt_for(device, &mut rng);
        let (diameter, a, center) = self.place_plate(tilt, &mut rng);
        let foods = self.place_foods(&mut rng);
        SceneConfig {
            width: self.width,
            height: self.height,
            plate_center: center,
            plate_major_px: 2.0 * a,
            tilt_deg: tilt,
            plate_diameter_cm: diameter,
            foods,
            true_awr: self.true_awr.clone(),
            defect,
            clip_fraction: uniform(&mut rng, self.clip_fraction),
            clip_right: rng.random_bool(0.5),
            noise: 0.0,
            seed: rng.random(),
            frame_index: 0,
            phase: Phase::Before,
            device,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Number of food samples (scenes carry one to three foods each).
    pub n_samples: usize,
    pub noise: f64,
    pub seed: u64,
    pub ranges: SceneRanges,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { n_samples: 2000, noise: 0.05, seed: 0, ranges: SceneRanges::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// One entry per scene; samples come from scenes in order.
    pub truths: Vec<SyntheticTruth>,
}

/// Defect-free scenes split evenly between the two tilt regimes, with
/// features from the real extractor and the true AWR table.
pub fn generate_dataset(config: &DatasetConfig) -> Result<SyntheticDataset, SynthError> {
    if config.n_samples == 0 {
        return Err(SynthError::InvalidConfig("n_samples must be at least 1".into()));
    }
    let awr = AwrTable::configured(config.ranges.true_awr.clone())
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let mut scenes = Vec::new();
    let mut count = 0;
    while count < config.n_samples {
        let i = scenes.len();
        let device = if sub_rng(config.seed, &[i as u64, 0]).random_bool(0.5) { Device::EButton } else { Device::Aim };
        let mut sc = config.ranges.random_scene(Defect::None, device, crate::rng::derive_seed(config.seed, &[i as u64, 1]));
        sc.noise = config.noise;
        sc.frame_index = i as u32;
        let take = sc.foods.len().min(config.n_samples - count);
        sc.foods.truncate(take);
        count += take;
        scenes.push(sc);
    }
    let rendered: Vec<(Vec<WeightSample>, SyntheticTruth)> = scenes
        .par_iter()
        .enumerate()
        .map(|(i, sc)| {
            let (frame, truth) = generate_scene(sc)?;
            let obs = extract_frame(&frame, &awr).map_err(|source| SynthError::Extraction { scene: i, source })?;
            let samples = truth
                .foods
                .iter()
                .map(|t| {
                    let o = obs.iter().find(|o| o.food == t.food).ok_or(SynthError::Extraction {
                        scene: i,
                        source: FeatureError::FoodAbsent(t.food),
                    })?;
                    Ok(WeightSample {
                        features: o.features,
                        weight_g: t.weight_g,
                        food: t.food,
                        session_id: format!("scene{i:05}"),
                        phase: Some(Phase::Before),
                    })
                })
                .collect::<Result<Vec<_>, SynthError>>()?;
            Ok((samples, truth))
        })
        .collect::<Result<_, SynthError>>()?;
    let mut samples = Vec::with_capacity(config.n_samples);
    let mut truths = Vec::with_capacity(rendered.len());
    for (s, t) in rendered {
        samples.extend(s);
        truths.push(t);
    }
    let dataset = Dataset::new(samples).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    Ok(SyntheticDataset { dataset, truths })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub n_sessions: usize,
    pub frames_per_phase: usize,
    /// Probability that a session gets one clipped and one container-less frame.
    pub defect_rate: f64,
    /// Before-meal food fraction range.
    pub initial_fraction: (f64, f64),
    /// Probability a food is finished completely.
    pub finish_probability: f64,
    /// Leftover share of the initial amount when not finished.
    pub leftover_share: (f64, f64),
    /// Frame-to-frame camera jitter: centre shift (px) and tilt (deg).
    pub jitter_px: f64,
    pub jitter_tilt_deg: f64,
    pub seed: u64,
    pub ranges: SceneRanges,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            n_sessions: 20,
            frames_per_phase: 4,
            defect_rate: 0.5,
            initial_fraction: (0.15, 0.3),
            finish_probability: 0.25,
            leftover_share: (0.15, 0.5),
            jitter_px: 4.0,
            jitter_tilt_deg: 2.0,
            seed: 0,
            // Calibration from sessions assumes the nominal plate diameter.
            ranges: SceneRanges {
                foods_per_scene: (1, 2),
                plate_diameter_cm: (DEFAULT_PLATE_DIAMETER_CM, DEFAULT_PLATE_DIAMETER_CM),
                ..SceneRanges::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsumedTruth {
    pub food: FoodCategory,
    pub before_g: f64,
    pub after_g: f64,
    pub consumed_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub session_id: String,
    pub device: Device,
    pub foods: Vec<ConsumedTruth>,
    pub frames: Vec<SyntheticTruth>,
}

/// Meal sessions: the same plate seen in several before and after frames,
/// foods shrinking (or vanishing) between the phases. Ground-truth grams
/// are awr · fraction · plate area.
pub fn generate_sessions(config: &SessionConfig) -> Result<Vec<(MealSession, SessionTruth)>, SynthError> {
    (0..config.n_sessions)
        .into_par_iter()
        .map(|s| generate_session(config, s))
        .collect()
}

fn generate_session(config: &SessionConfig, s: usize) -> Result<(MealSession, SessionTruth), SynthError> {
    let ranges = &config.ranges;
    let mut rng = sub_rng(config.seed, &[s as u64]);
    let device = if s % 2 == 0 { Device::Aim } else { Device::EButton };
    let session_id = format!("session{s:03}");
    let tilt0 = ranges.tilt_for(device, &mut rng);
    let (diameter, a, center) = ranges.place_plate(tilt0, &mut rng);
    let (kmin, kmax) = ranges.foods_per_scene;
    let k = rng.random_range(kmin.max(1)..=kmax.max(kmin).max(1));
    let mut pool: Vec<FoodCategory> = FoodCategory::foods().to_vec();
    let mut before = Vec::new();
    let mut angle: f64 = rng.random_range(0.0..360.0);
    for _ in 0..k {
        let food = pool.swap_remove(rng.random_range(0..pool.len()));
        let f = uniform(&mut rng, config.initial_fraction);
        let p = FoodPlacement { food, area_fraction: f, sector_start_deg: angle };
        angle = (angle + p.span_deg() + 10.0).rem_euclid(360.0);
        before.push(p);
    }
    let after: Vec<FoodPlacement> = before
        .iter()
        .map(|p| {
            let share = if rng.random_bool(config.finish_probability) { 0.0 } else { uniform(&mut rng, config.leftover_share) };
            FoodPlacement { area_fraction: p.area_fraction * share, ..p.clone() }
        })
        .collect();

    let plate_area_cm2 = PI * (diameter / 2.0).powi(2);
    let foods: Vec<ConsumedTruth> = before
        .iter()
        .zip(&after)
        .map(|(b, a)| {
            let k = ranges.true_awr[&b.food];
            let before_g = k * b.area_fraction * plate_area_cm2;
            let after_g = k * a.area_fraction * plate_area_cm2;
            ConsumedTruth { food: b.food, before_g, after_g, consumed_g: before_g - after_g }
        })
        .collect();

    // Frame plan: before frames, after frames, then optional defects.
    let mut plan: Vec<(Phase, Defect)> = Vec::new();
    plan.extend(std::iter::repeat_n((Phase::Before, Defect::None), config.frames_per_phase));
    plan.extend(std::iter::repeat_n((Phase::After, Defect::None), config.frames_per_phase));
    if rng.random_bool(config.defect_rate) {
        let phase = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { Phase::Before } else { Phase::After };
        let p1 = phase(&mut rng);
        let p2 = phase(&mut rng);
        plan.insert(rng.random_range(0..=plan.len()), (p1, Defect::ClippedContainer));
        plan.insert(rng.random_range(0..=plan.len()), (p2, Defect::NoContainer));
    }

    let mut frames = Vec::with_capacity(plan.len());
    let mut truths = Vec::with_capacity(plan.len());
    for (i, (phase, defect)) in plan.into_iter().enumerate() {
        let tilt = (tilt0 + uniform(&mut rng, (-config.jitter_tilt_deg, config.jitter_tilt_deg))).clamp(0.0, MAX_TILT_DEG);
        let cos_t = tilt.to_radians().cos();
        let (w, h, m) = (ranges.width as f64, ranges.height as f64, ranges.margin_px);
        let cx = (center.1 + uniform(&mut rng, (-config.jitter_px, config.jitter_px))).clamp(a + m + 1.0, w - a - m - 1.0);
        let cy = (center.0 + uniform(&mut rng, (-config.jitter_px, config.jitter_px)))
            .clamp(a * cos_t + m + 1.0, h - a * cos_t - m - 1.0);
        let placements = match phase {
            Phase::Before => before.clone(),
            Phase::After => after.iter().filter(|p| p.area_fraction > 0.0).cloned().collect(),
        };
        let sc = SceneConfig {
            width: ranges.width,
            height: ranges.height,
            plate_center: (cy, cx),
            plate_major_px: 2.0 * a,
            tilt_deg: tilt,
            plate_diameter_cm: diameter,
            foods: placements,
            true_awr: ranges.true_awr.clone(),
            defect,
            clip_fraction: uniform(&mut rng, ranges.clip_fraction),
            clip_right: rng.random_bool(0.5),
            noise: 0.0,
            seed: rng.random(),
            frame_index: i as u32,
            phase,
            device,
        };
        let (frame, truth) = generate_scene(&sc)?;
        frames.push(frame);
        truths.push(truth);
    }

    let mut ground_truth = BTreeMap::new();
    for f in &foods {
        ground_truth.insert((f.food, Phase::Before), f.before_g);
        ground_truth.insert((f.food, Phase::After), f.after_g);
    }
    let session = MealSession { session_id: session_id.clone(), frames, ground_truth };
    Ok((session, SessionTruth { session_id, device, foods, frames: truths }))
}

/// Writes each session under `dir/<session_id>/` as a manifest, masks and
/// a `truth.json` sidecar. Returns the manifest paths.
pub fn write_sessions(sessions: &[(MealSession, SessionTruth)], dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
    let mut out = Vec::with_capacity(sessions.len());
    for (session, truth) in sessions {
        let sdir = dir.join(&session.session_id);
        let manifest = write_session(session, &sdir)?;
        let path = sdir.join("truth.json");
        let json = serde_json::to_string_pretty(truth).expect("truth serializes") + "\n";
        std::fs::write(&path, json).map_err(|source| SynthError::Io { path, source })?;
        out.push(manifest);
    }
    Ok(out)
}

/// Plate aspect ratios measured on rendered plates from the two camera
/// regimes (half AIM around `aim_tilt_deg`, half eButton).
pub fn generate_view_angle_data(
    n: usize,
    aim_tilt_deg: (f64, f64),
    ebutton_tilt_deg: (f64, f64),
    seed: u64,
) -> Result<Vec<(f64, Device)>, SynthError> {
    let ranges = SceneRanges { aim_tilt_deg, ebutton_tilt_deg, ..SceneRanges::default() };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let device = if i % 2 == 0 { Device::Aim } else { Device::EButton };
            let sc = ranges.random_scene(Defect::None, device, crate::rng::derive_seed(seed, &[i as u64]));
            let (frame, _) = generate_scene(&sc)?;
            let g = crate::features::plate_aspect_ratio(&frame.mask)
                .map_err(|source| SynthError::Extraction { scene: i, source })?;
            Ok((g.par(), device))
        })
        .collect()
}
