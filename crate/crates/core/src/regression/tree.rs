//! CART regression trees with variance-reduction splits.
//!
//! Shared by the single tree, both forests and gradient boosting. Data is
//! held column-major; a node keeps the indices of its training rows (with
//! repeats for bootstrap samples).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LEAF: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Node {
    #[serde(rename = "f")]
    feature: u32,
    /// Split threshold, or the prediction at a leaf.
    #[serde(rename = "v")]
    value: f64,
    #[serde(rename = "l")]
    left: u32,
    #[serde(rename = "r")]
    right: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            let n = &self.nodes[i];
            if n.feature == LEAF {
                return n.value;
            }
            i = if x[n.feature as usize] <= n.value { n.left } else { n.right } as usize;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature == LEAF).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            let n = &t.nodes[i];
            if n.feature == LEAF {
                0
            } else {
                1 + go(t, n.left as usize).max(go(t, n.right as usize))
            }
        }
        go(self, 0)
    }

    /// Structural sanity for models read from disk.
    pub(crate) fn is_well_formed(&self, n_features: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| {
                if n.feature == LEAF {
                    n.value.is_finite()
                } else {
                    (n.feature as usize) < n_features
                        && !n.value.is_nan()
                        && (n.left as usize) > i
                        && (n.right as usize) > i
                        && (n.left as usize) < self.nodes.len()
                        && (n.right as usize) < self.nodes.len()
                }
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdRule {
    /// Best midpoint between consecutive distinct values.
    Best,
    /// One uniformly drawn threshold in (min, max) per candidate feature.
    Random,
}

#[derive(Clone, Copy, Debug)]
pub struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; values ≥ the column count mean all.
    pub max_features: usize,
    pub rule: ThresholdRule,
}

struct Grower<'a> {
    cols: &'a [Vec<f64>],
    y: &'a [f64],
    p: GrowParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
    buf: Vec<(f64, f64)>,
    order: Vec<usize>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Grows a tree on the rows listed in `rows` (repeats allowed).
///
/// `rng` is needed when features are subsampled or thresholds are random.
pub fn grow(
    cols: &[Vec<f64>],
    y: &[f64],
    rows: &mut [u32],
    params: GrowParams,
    rng: Option<&mut ChaCha8Rng>,
) -> Tree {
    assert!(!rows.is_empty(), "cannot grow a tree on zero rows");
    assert!(params.min_leaf >= 1);
    let needs_rng = params.rule == ThresholdRule::Random || params.max_features < cols.len();
    assert!(!needs_rng || rng.is_some(), "randomized tree without a generator");
    let mut g = Grower {
        cols,
        y,
        p: params,
        rng,
        nodes: Vec::new(),
        buf: Vec::with_capacity(rows.len()),
        order: (0..cols.len()).collect(),
    };
    g.build(rows, 0);
    Tree { nodes: g.nodes }
}

impl Grower<'_> {
    fn build(&mut self, rows: &mut [u32], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let (sum, lo, hi) = rows.iter().fold((0.0, f64::INFINITY, f64::NEG_INFINITY), |a, &r| {
            let v = self.y[r as usize];
            (a.0 + v, a.1.min(v), a.2.max(v))
        });
        let mean = sum / rows.len() as f64;
        self.nodes.push(Node { feature: LEAF, value: mean, left: 0, right: 0 });

        let splittable = hi > lo
            && rows.len() >= 2 * self.p.min_leaf
            && self.p.max_depth.is_none_or(|d| depth < d);
        if !splittable {
            return id;
        }
        let Some(split) = self.find_split(rows, sum) else {
            return id;
        };

        // Stable partition keeps the row order (and so the result) independent
        // of anything but the data.
        let col = &self.cols[split.feature];
        let (mut left, mut right): (Vec<u32>, Vec<u32>) =
            rows.iter().partition(|&&r| col[r as usize] <= split.threshold);
        let n_left = left.len();
        rows[..n_left].copy_from_slice(&left);
        rows[n_left..].copy_from_slice(&right);
        left.clear();
        right.clear();

        let (lrows, rrows) = rows.split_at_mut(n_left);
        let l = self.build(lrows, depth + 1);
        let r = self.build(rrows, depth + 1);
        self.nodes[id as usize] = Node {
            feature: split.feature as u32,
            value: split.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Candidate features for one node, in ascending index order.
    ///
    /// With subsampling, features are visited in random order until
    /// `max_features` non-constant ones are found (constant columns cannot
    /// split and do not use up the budget).
    fn candidates(&mut self, rows: &[u32]) -> Vec<usize> {
        let d = self.cols.len();
        let mut chosen = Vec::new();
        if self.p.max_features >= d {
            chosen.extend((0..d).filter(|&f| !self.constant(f, rows)));
        } else {
            let rng = self.rng.as_deref_mut().expect("checked in grow");
            self.order.sort_unstable();
            self.order.shuffle(rng);
            for k in 0..d {
                let f = self.order[k];
                if !self.constant(f, rows) {
                    chosen.push(f);
                    if chosen.len() == self.p.max_features {
                        break;
                    }
                }
            }
            chosen.sort_unstable();
        }
        chosen
    }

    fn constant(&self, f: usize, rows: &[u32]) -> bool {
        let col = &self.cols[f];
        let first = col[rows[0] as usize];
        rows.iter().all(|&r| col[r as usize] == first)
    }

    fn find_split(&mut self, rows: &[u32], total: f64) -> Option<Split> {
        let mut best: Option<Split> = None;
        for f in self.candidates(rows) {
            let cand = match self.p.rule {
                ThresholdRule::Best => self.best_threshold(f, rows, total),
                ThresholdRule::Random => self.random_threshold(f, rows, total),
            };
            if let Some(c) = cand {
                // Strictly better only: ties keep the lower feature index.
                if best.as_ref().is_none_or(|b| c.score > b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Maximizes sumL²/nL + sumR²/nR, which is the variance reduction up to
    /// a node constant. Ties keep the smallest threshold.
    fn best_threshold(&mut self, f: usize, rows: &[u32], total: f64) -> Option<Split> {
        let col = &self.cols[f];
        self.buf.clear();
        self.buf.extend(rows.iter().map(|&r| (col[r as usize], self.y[r as usize])));
        self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.buf.len();
        let min_leaf = self.p.min_leaf;
        let mut left_sum = 0.0;
        let mut best: Option<(usize, f64)> = None;
        for i in 1..n {
            left_sum += self.buf[i - 1].1;
            if i < min_leaf || n - i < min_leaf || self.buf[i - 1].0 == self.buf[i].0 {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / i as f64 + right_sum * right_sum / (n - i) as f64;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        best.map(|(i, score)| {
            let (a, b) = (self.buf[i - 1].0, self.buf[i].0);
            let mid = a + (b - a) / 2.0;
            Split { feature: f, threshold: if mid < b { mid } else { a }, score }
        })
    }

    fn random_threshold(&mut self, f: usize, rows: &[u32], _total: f64) -> Option<Split> {
        let col = &self.cols[f];
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &r| {
            let v = col[r as usize];
            (a.0.min(v), a.1.max(v))
        });
        if lo >= hi {
            return None;
        }
        let rng = self.rng.as_deref_mut().expect("checked in grow");
        let threshold = rng.random_range(lo..hi);
        let (mut nl, mut sl, mut sr) = (0usize, 0.0, 0.0);
        for &r in rows {
            let v = self.y[r as usize];
            if col[r as usize] <= threshold {
                nl += 1;
                sl += v;
            } else {
                sr += v;
            }
        }
        let nr = rows.len() - nl;
        if nl < self.p.min_leaf || nr < self.p.min_leaf {
            return None;
        }
        let score = sl * sl / nl as f64 + sr * sr / nr as f64;
        Some(Split { feature: f, threshold, score })
    }
}
