//! Consumed weight per food: median estimate over kept before-meal frames
//! minus the same over after-meal frames, clamped at zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::category::FoodCategory;
use crate::dataprep::{kept_frames, prepare, PrepConfig};
use crate::features::{extract_frame, AwrTable, FeatureError};
use crate::regression::{median, TrainedModel};
use crate::session::{Device, MealSession, Phase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsumedWeight {
    pub session_id: String,
    pub device: Device,
    pub food: FoodCategory,
    pub initial_estimate_g: f64,
    pub final_estimate_g: f64,
    pub consumed_g: f64,
    pub ground_truth_consumed_g: Option<f64>,
    /// |consumed − truth| / truth · 100, only when the truth is positive.
    pub relative_error_pct: Option<f64>,
}

impl ConsumedWeight {
    pub fn new(
        session_id: &str,
        device: Device,
        food: FoodCategory,
        initial: f64,
        final_: f64,
        truth: Option<f64>,
    ) -> Self {
        let consumed_g = (initial - final_).max(0.0);
        Self {
            session_id: session_id.to_string(),
            device,
            food,
            initial_estimate_g: initial,
            final_estimate_g: final_,
            consumed_g,
            ground_truth_consumed_g: truth,
            relative_error_pct: relative_error_pct(consumed_g, truth),
        }
    }
}

pub fn relative_error_pct(estimate: f64, truth: Option<f64>) -> Option<f64> {
    truth.filter(|&t| t > 0.0).map(|t| 100.0 * (estimate - t).abs() / t)
}

/// Per-frame estimates for each food, over the kept frames of one phase.
fn phase_estimates(
    session: &MealSession,
    frames: &[&crate::session::FrameRecord],
    phase: Phase,
    model: &TrainedModel,
    awr: &AwrTable,
) -> Result<BTreeMap<FoodCategory, Vec<f64>>, EvalError> {
    let mut out: BTreeMap<FoodCategory, Vec<f64>> = BTreeMap::new();
    let mut used = 0;
    for frame in frames.iter().filter(|f| f.phase == phase) {
        let observations = match extract_frame(frame, awr) {
            Ok(o) => o,
            Err(e @ (FeatureError::DegeneratePlate { .. } | FeatureError::NoContainer)) => {
                log::warn!("session {}: skipping frame {}: {e}", session.session_id, frame.frame_index);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        used += 1;
        for o in observations {
            out.entry(o.food).or_default().push(model.predict(&o.features)?);
        }
    }
    if used == 0 {
        return Err(EvalError::NoUsableFrames(phase));
    }
    Ok(out)
}

pub fn consumed_weight(
    session: &MealSession,
    model: &TrainedModel,
    prep: &PrepConfig,
    awr: &AwrTable,
) -> Result<Vec<ConsumedWeight>, EvalError> {
    let report = prepare(&session.frames, prep)?;
    let kept = kept_frames(&session.frames, &report);
    let before = phase_estimates(session, &kept, Phase::Before, model, awr)?;
    let after = phase_estimates(session, &kept, Phase::After, model, awr)?;
    let device = session.dominant_device();

    let foods: BTreeSet<FoodCategory> = before
        .keys()
        .chain(after.keys())
        .copied()
        .chain(session.ground_truth_foods().into_iter().filter(|f| f.food_index().is_some()))
        .collect();
    let phase_value = |m: &BTreeMap<FoodCategory, Vec<f64>>, f| m.get(&f).and_then(|v| median(v)).unwrap_or(0.0);
    Ok(foods
        .into_iter()
        .map(|food| {
            ConsumedWeight::new(
                &session.session_id,
                device,
                food,
                phase_value(&before, food),
                phase_value(&after, food),
                session.consumed_ground_truth(food),
            )
        })
        .collect())
}
