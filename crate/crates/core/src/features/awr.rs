//! Per-food area-to-weight ratios (g/cm²).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;

use super::FeatureError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AwrProvenance {
    Calibrated,
    Configured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AwrTable {
    pub provenance: AwrProvenance,
    pub values: BTreeMap<FoodCategory, f64>,
}

impl AwrTable {
    pub fn configured(values: BTreeMap<FoodCategory, f64>) -> Result<Self, FeatureError> {
        for (&food, &v) in &values {
            if !(v.is_finite() && v > 0.0) {
                return Err(FeatureError::NonPositiveAwr { food, value: v });
            }
        }
        Ok(Self {
            provenance: AwrProvenance::Configured,
            values,
        })
    }

    pub fn get(&self, food: FoodCategory) -> Option<f64> {
        self.values.get(&food).copied()
    }

    pub fn require(&self, food: FoodCategory) -> Result<f64, FeatureError> {
        self.get(food).ok_or(FeatureError::MissingAwr(food))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("awr table serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let table: AwrTable =
            serde_json::from_str(text).map_err(|e| FeatureError::AwrFormat(e.to_string()))?;
        for (&food, &v) in &table.values {
            if !(v.is_finite() && v > 0.0) {
                return Err(FeatureError::NonPositiveAwr { food, value: v });
            }
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FeatureError::AwrFormat(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// One calibration observation: visible area and weighed mass of a food.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwrSample {
    pub food: FoodCategory,
    pub area_cm2: f64,
    pub weight_g: f64,
}

/// Least-squares slope through the origin per food: Σ(a·w) / Σ(a²).
///
/// Samples with zero area carry no information and are skipped; every food
/// needs at least two informative samples.
pub fn calibrate_awr(samples: &[AwrSample]) -> Result<AwrTable, FeatureError> {
    let mut acc: BTreeMap<FoodCategory, (usize, f64, f64)> = BTreeMap::new();
    for s in samples {
        let entry = acc.entry(s.food).or_insert((0, 0.0, 0.0));
        if s.area_cm2 > 0.0 {
            entry.0 += 1;
            entry.1 += s.area_cm2 * s.weight_g;
            entry.2 += s.area_cm2 * s.area_cm2;
        }
    }
    let mut values = BTreeMap::new();
    for (food, (n, aw, aa)) in acc {
        if n < 2 {
            return Err(FeatureError::InsufficientSamples(food));
        }
        let slope = aw / aa;
        if !(slope.is_finite() && slope > 0.0) {
            return Err(FeatureError::NonPositiveAwr { food, value: slope });
        }
        values.insert(food, slope);
    }
    Ok(AwrTable {
        provenance: AwrProvenance::Calibrated,
        values,
    })
}
