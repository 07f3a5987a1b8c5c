use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;

/// Median training weight per food; ignores every feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianBaseline {
    pub(crate) per_food: BTreeMap<FoodCategory, f64>,
    pub(crate) global: f64,
}

/// Median with the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

pub fn fit_baseline(y: &[f64], food: &[FoodCategory]) -> MedianBaseline {
    let mut groups: BTreeMap<FoodCategory, Vec<f64>> = BTreeMap::new();
    for (&w, &f) in y.iter().zip(food) {
        groups.entry(f).or_default().push(w);
    }
    MedianBaseline {
        per_food: groups.into_iter().map(|(f, w)| (f, median(&w).expect("nonempty group"))).collect(),
        global: median(y).expect("nonempty training set"),
    }
}

impl MedianBaseline {
    /// Falls back to the global median, with a warning, for unseen foods.
    pub fn predict(&self, food: FoodCategory) -> f64 {
        match self.per_food.get(&food) {
            Some(&m) => m,
            None => {
                log::warn!("no training samples for {food}; using the global median weight");
                self.global
            }
        }
    }

    pub fn food_median(&self, food: FoodCategory) -> Option<f64> {
        self.per_food.get(&food).copied()
    }
}
