//! Feature table CSV: `session,frame,food,ft_0..ft_14,frr,np_norm,awr,rd,par[,weight_g]`.

use std::io::{Read, Write};

use crate::category::{FoodCategory, FOOD_COUNT};

use super::{FeatureVector, FEATURE_COUNT};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub session: String,
    pub frame: u32,
    pub food: FoodCategory,
    pub features: FeatureVector,
    pub weight_g: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub fn header(with_weight: bool) -> Vec<String> {
    let mut h = vec!["session".to_string(), "frame".into(), "food".into()];
    h.extend((0..FOOD_COUNT).map(|i| format!("ft_{i}")));
    h.extend(["frr", "np_norm", "awr", "rd", "par"].map(String::from));
    if with_weight {
        h.push("weight_g".into());
    }
    h
}

/// Writes all rows; the weight column is emitted when every row has one.
pub fn write_csv<W: Write>(out: W, rows: &[FeatureRow]) -> Result<(), TableError> {
    let with_weight = !rows.is_empty() && rows.iter().all(|r| r.weight_g.is_some());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(with_weight))?;
    for r in rows {
        let mut rec = vec![r.session.clone(), r.frame.to_string(), r.food.name().to_string()];
        rec.extend(r.features.as_slice().iter().map(|x| x.to_string()));
        if with_weight {
            rec.push(r.weight_g.expect("checked above").to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, TableError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(input);
    let headers: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let with_weight = if headers == header(true) {
        true
    } else if headers == header(false) {
        false
    } else {
        return Err(TableError::Malformed {
            line: 1,
            message: format!("unexpected header: {}", headers.join(",")),
        });
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| TableError::Malformed { line, message };
        if rec.len() != headers.len() {
            return Err(bad(format!("expected {} fields, got {}", headers.len(), rec.len())));
        }
        let num = |i: usize| -> Result<f64, TableError> {
            let s = rec[i].trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("column {}: not a number: `{s}`", headers[i])))
        };
        let frame = rec[1]
            .trim()
            .parse::<u32>()
            .map_err(|_| bad(format!("column frame: not an integer: `{}`", &rec[1])))?;
        let food = FoodCategory::from_name(&rec[2])
            .ok_or_else(|| bad(format!("column food: unknown food `{}`", &rec[2])))?;
        let mut values = [0.0; FEATURE_COUNT];
        for (k, v) in values.iter_mut().enumerate() {
            *v = num(3 + k)?;
        }
        let features = FeatureVector::from_array(values);
        if !features.is_valid() || features.food() != Some(food) {
            return Err(bad("feature values violate range or one-hot constraints".into()));
        }
        let weight_g = if with_weight {
            let w = num(3 + FEATURE_COUNT)?;
            if w < 0.0 {
                return Err(bad(format!("column weight_g: negative weight {w}")));
            }
            Some(w)
        } else {
            None
        };
        rows.push(FeatureRow {
            session: rec[0].to_string(),
            frame,
            food,
            features,
            weight_g,
        });
    }
    Ok(rows)
}
