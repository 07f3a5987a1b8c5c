//! Dietary intake estimation from per-frame food segmentation masks.
//!
//! The pipeline filters unusable frames, extracts a 20-dimensional
//! handcrafted feature vector per food item, fits regressors that map the
//! features to grams, and reports consumed weight along with the usual
//! regression metrics. `synthgen` produces labelled meal scenes with known
//! geometry for testing every stage.

pub mod category;
pub mod dataprep;
pub mod evaluation;
pub mod features;
pub mod regression;
pub mod rng;
pub mod mask;
pub mod session;
pub mod synthgen;

pub use category::FoodCategory;
pub use mask::{category_stats, CategoryStats, LabelMask};
pub use session::{load_session, Device, FrameRecord, MealSession, Phase};
