//! Meal sessions: ordered frames with masks plus optional weighed food records.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::category::FoodCategory;
use crate::mask::{LabelMask, MaskError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Before,
    After,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Before => "before",
            Phase::After => "after",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Phase::Before => Phase::After,
            Phase::After => Phase::Before,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Device {
    #[serde(rename = "aim")]
    Aim,
    #[serde(rename = "ebutton")]
    EButton,
    #[serde(rename = "synthetic")]
    Synthetic,
}

impl Device {
    pub fn as_str(self) -> &'static str {
        match self {
            Device::Aim => "aim",
            Device::EButton => "ebutton",
            Device::Synthetic => "synthetic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aim" => Some(Device::Aim),
            "ebutton" => Some(Device::EButton),
            "synthetic" => Some(Device::Synthetic),
            _ => None,
        }
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u32,
    pub mask: LabelMask,
    pub phase: Phase,
    pub device: Device,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MealSession {
    pub session_id: String,
    pub frames: Vec<FrameRecord>,
    pub ground_truth: BTreeMap<(FoodCategory, Phase), f64>,
}

impl MealSession {
    pub fn ground_truth(&self, food: FoodCategory, phase: Phase) -> Option<f64> {
        self.ground_truth.get(&(food, phase)).copied()
    }

    /// Weighed consumption (before − after); needs both records.
    pub fn consumed_ground_truth(&self, food: FoodCategory) -> Option<f64> {
        Some(self.ground_truth(food, Phase::Before)? - self.ground_truth(food, Phase::After)?)
    }

    pub fn ground_truth_foods(&self) -> BTreeSet<FoodCategory> {
        self.ground_truth.keys().map(|(f, _)| *f).collect()
    }

    /// The device that recorded most frames; ties go to the lower variant.
    pub fn dominant_device(&self) -> Device {
        let mut counts: BTreeMap<Device, usize> = BTreeMap::new();
        for f in &self.frames {
            *counts.entry(f.device).or_default() += 1;
        }
        let mut best = (Device::Synthetic, 0);
        for (d, n) in counts {
            if n > best.1 {
                best = (d, n);
            }
        }
        best.0
    }
}

// ---------------------------------------------------------------------------
// Manifest schema

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub session_id: String,
    pub frames: Vec<FrameEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<GroundTruthEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub index: u32,
    pub mask: PathBuf,
    pub phase: Phase,
    pub device: Device,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthEntry {
    pub food: String,
    pub phase: Phase,
    pub grams: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("frame {frame}: invalid category id {value}")]
    InvalidCategoryId { frame: u32, value: u8 },
    #[error("frame {frame}: {source}")]
    Mask { frame: u32, source: MaskError },
}

impl SessionManifest {
    pub fn read(path: &Path) -> Result<Self, SessionError> {
        let text = read_existing(path)?;
        serde_json::from_str(&text)
            .map_err(|e| SessionError::SchemaViolation(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), SessionError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|source| SessionError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn validate(&self) -> Result<BTreeMap<(FoodCategory, Phase), f64>, SessionError> {
        if self.session_id.trim().is_empty() {
            return Err(SessionError::SchemaViolation(
                "session_id: must be non-empty".into(),
            ));
        }
        if self.frames.is_empty() {
            return Err(SessionError::SchemaViolation(
                "frames: must contain at least one frame".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for f in &self.frames {
            if !seen.insert(f.index) {
                return Err(SessionError::SchemaViolation(format!(
                    "frames[].index: duplicate frame index {}",
                    f.index
                )));
            }
        }
        let mut truth = BTreeMap::new();
        for (i, g) in self.ground_truth.iter().flatten().enumerate() {
            let food = FoodCategory::from_name(&g.food).ok_or_else(|| {
                SessionError::SchemaViolation(format!(
                    "ground_truth[{i}].food: unknown food `{}`",
                    g.food
                ))
            })?;
            if !food.is_food() {
                return Err(SessionError::SchemaViolation(format!(
                    "ground_truth[{i}].food: `{}` is not a food",
                    g.food
                )));
            }
            if !g.grams.is_finite() || g.grams < 0.0 {
                return Err(SessionError::SchemaViolation(format!(
                    "ground_truth[{i}].grams: must be a finite value >= 0, got {}",
                    g.grams
                )));
            }
            if truth.insert((food, g.phase), g.grams).is_some() {
                return Err(SessionError::SchemaViolation(format!(
                    "ground_truth[{i}]: duplicate entry for {food}/{}",
                    g.phase
                )));
            }
        }
        Ok(truth)
    }
}

fn read_existing(path: &Path) -> Result<String, SessionError> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            SessionError::MissingFile(path.to_path_buf())
        } else {
            SessionError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

/// Resolve a manifest-relative path.
pub fn resolve_relative(manifest_path: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(rel)
    }
}

/// Read and fully validate a session manifest and every mask it references.
pub fn load_session(manifest_path: &Path) -> Result<MealSession, SessionError> {
    let manifest = SessionManifest::read(manifest_path)?;
    let ground_truth = manifest.validate()?;

    let mut frames = Vec::with_capacity(manifest.frames.len());
    for entry in &manifest.frames {
        let path = resolve_relative(manifest_path, &entry.mask);
        if !path.is_file() {
            return Err(SessionError::MissingFile(path));
        }
        let mask = LabelMask::read_png(&path).map_err(|e| match e {
            MaskError::InvalidCategoryId { value, .. } => SessionError::InvalidCategoryId {
                frame: entry.index,
                value,
            },
            other => SessionError::Mask {
                frame: entry.index,
                source: other,
            },
        })?;
        frames.push(FrameRecord {
            frame_index: entry.index,
            mask,
            phase: entry.phase,
            device: entry.device,
        });
    }
    frames.sort_by_key(|f| f.frame_index);

    Ok(MealSession {
        session_id: manifest.session_id,
        frames,
        ground_truth,
    })
}

/// Write a session as `manifest.json` plus one PNG per frame under `dir`.
pub fn write_session(session: &MealSession, dir: &Path) -> Result<PathBuf, SessionError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SessionError::Io { path, source }
    };
    let mask_dir = dir.join("masks");
    std::fs::create_dir_all(&mask_dir).map_err(io_err(&mask_dir))?;
    let mut entries = Vec::with_capacity(session.frames.len());
    for frame in &session.frames {
        let rel = PathBuf::from("masks").join(format!("frame_{:04}.png", frame.frame_index));
        let path = dir.join(&rel);
        frame
            .mask
            .write_png(&path)
            .map_err(|source| SessionError::Mask {
                frame: frame.frame_index,
                source,
            })?;
        entries.push(FrameEntry {
            index: frame.frame_index,
            mask: rel,
            phase: frame.phase,
            device: frame.device,
        });
    }
    let ground_truth = (!session.ground_truth.is_empty()).then(|| {
        session
            .ground_truth
            .iter()
            .map(|(&(food, phase), &grams)| GroundTruthEntry {
                food: food.name().to_string(),
                phase,
                grams,
            })
            .collect()
    });
    let manifest = SessionManifest {
        session_id: session.session_id.clone(),
        frames: entries,
        ground_truth,
    };
    let path = dir.join("manifest.json");
    manifest.write(&path)?;
    Ok(path)
}
