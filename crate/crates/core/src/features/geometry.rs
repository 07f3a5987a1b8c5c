//! Plate shape from the singular values of its centered pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::mask::LabelMask;

use super::FeatureError;

/// Leading singular values of the centered N x 2 plate coordinate matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateGeometry {
    pub sigma1: f64,
    pub sigma2: f64,
    pub pixels: u64,
    /// Mean (row, col) of the plate pixels.
    pub centroid: (f64, f64),
}

impl PlateGeometry {
    /// Plate aspect ratio, >= 1.
    pub fn par(&self) -> f64 {
        self.sigma1 / self.sigma2
    }

    /// Length in pixels of the plate's major axis, taking the footprint as a
    /// uniformly filled ellipse (variance along an axis = semi-axis² / 4).
    pub fn major_axis_px(&self) -> f64 {
        4.0 * self.sigma1 / (self.pixels as f64).sqrt()
    }

    /// Physical area covered by one plate pixel, in cm², given the real plate
    /// diameter. The major axis fixes the scale; the minor axis is
    /// foreshortened by the tilt, which the aspect ratio undoes.
    pub fn pixel_area_cm2(&self, plate_diameter_cm: f64) -> f64 {
        let cm_per_px = plate_diameter_cm / self.major_axis_px();
        cm_per_px * cm_per_px * self.par()
    }
}

/// Relative tolerance under which the second singular value counts as zero.
const COLLINEAR_TOL: f64 = 1e-9;

/// Singular values of the centered N x 2 matrix built from `points`.
///
/// One-sided Jacobi: a single plane rotation makes the two columns
/// orthogonal, after which their norms are the singular values.
pub fn geometry_from_points(
    points: impl IntoIterator<Item = (f64, f64)> + Clone,
) -> Result<PlateGeometry, FeatureError> {
    let mut n = 0u64;
    let (mut sr, mut sc) = (0.0, 0.0);
    for (r, c) in points.clone() {
        n += 1;
        sr += r;
        sc += c;
    }
    if n < 2 {
        return Err(FeatureError::DegeneratePlate { pixels: n });
    }
    let (mr, mc) = (sr / n as f64, sc / n as f64);

    // Column inner products of the centered matrix [rows | cols].
    let (mut a, mut b, mut g) = (0.0, 0.0, 0.0);
    for (r, c) in points {
        let (x, y) = (r - mr, c - mc);
        a += x * x;
        b += y * y;
        g += x * y;
    }

    // Rotation (cos, sin) zeroing the off-diagonal of the 2x2 Gram matrix.
    let (cs, sn) = if g == 0.0 {
        (1.0, 0.0)
    } else {
        let zeta = (b - a) / (2.0 * g);
        let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
        let t = if zeta == 0.0 { 1.0 } else { t };
        let cs = 1.0 / (1.0 + t * t).sqrt();
        (cs, cs * t)
    };
    // Squared norms of the rotated columns.
    let n1 = cs * cs * a - 2.0 * cs * sn * g + sn * sn * b;
    let n2 = sn * sn * a + 2.0 * cs * sn * g + cs * cs * b;
    let (s1, s2) = (n1.max(0.0).sqrt(), n2.max(0.0).sqrt());
    let (sigma1, sigma2) = if s1 >= s2 { (s1, s2) } else { (s2, s1) };

    if sigma1 == 0.0 || sigma2 <= COLLINEAR_TOL * sigma1 {
        return Err(FeatureError::DegeneratePlate { pixels: n });
    }
    Ok(PlateGeometry {
        sigma1,
        sigma2,
        pixels: n,
        centroid: (mr, mc),
    })
}

/// Geometry of the plate footprint: the container plus every food label
/// drawn on it (one label per pixel hides the container under the food).
pub fn plate_aspect_ratio(mask: &LabelMask) -> Result<PlateGeometry, FeatureError> {
    let w = mask.width() as usize;
    let pts = mask
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= 1)
        .map(move |(i, _)| ((i / w) as f64, (i % w) as f64));
    geometry_from_points(pts)
}
