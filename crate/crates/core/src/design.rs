//! Design-space description of the waterbomb sector: material pair, fixed
//! geometry, the five normalized design variables and their bounds, and the
//! angular layout of the crease/facet bands.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Names of the five design dimensions, in vector order.
pub const DIMENSION_NAMES: [&str; 5] = ["th1", "th2", "th3", "omega", "h_ratio"];

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("crease angles must satisfy th1 <= th2 <= th3, got ({th1}, {th2}, {th3})")]
    OrderingViolation { th1: f64, th2: f64, th3: f64 },
    #[error("{name} = {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        dimension: usize,
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("invalid bounds: lower[{0}] > upper[{0}]")]
    InvalidBounds(usize),
    #[error("frozen value for {name} = {value} outside [{lower}, {upper}]")]
    FrozenOutOfBounds {
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },
}

/// Linear elastic properties of the stiff face material and the soft crease
/// material. Units: moduli and elastic limits in MPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPair {
    pub face_modulus: f64,
    pub crease_modulus: f64,
    pub face_poisson: f64,
    pub crease_poisson: f64,
    pub face_yield: f64,
    pub crease_yield: f64,
}

impl Default for MaterialPair {
    /// PLA faces, TPU creases.
    fn default() -> Self {
        MaterialPair {
            face_modulus: 2600.0,
            crease_modulus: 120.0,
            face_poisson: 0.35,
            crease_poisson: 0.45,
            face_yield: 50.0,
            crease_yield: 50.0,
        }
    }
}

impl MaterialPair {
    pub fn validate(&self) -> Result<(), String> {
        let pos = [
            ("face_modulus", self.face_modulus),
            ("crease_modulus", self.crease_modulus),
            ("face_yield", self.face_yield),
            ("crease_yield", self.crease_yield),
        ];
        for (name, v) in pos {
            if !(v > 0.0) {
                return Err(format!("{name} must be strictly positive, got {v}"));
            }
        }
        for (name, v) in [
            ("face_poisson", self.face_poisson),
            ("crease_poisson", self.crease_poisson),
        ] {
            if !(v > 0.0 && v < 0.5) {
                return Err(format!("{name} must lie in (0, 0.5), got {v}"));
            }
        }
        Ok(())
    }
}

/// Fixed geometry of the modeled sector. Lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Cyclic symmetry count; the modeled sector spans 1/(2n) of the pattern.
    pub n: u32,
    /// Outer radius (mm).
    pub outer_radius: f64,
    /// Inner hole radius as a fraction of the outer radius.
    pub inner_radius_ratio: f64,
    /// Face thickness (mm).
    pub face_thickness: f64,
    /// Radial subdivision count of the sector mesh.
    pub resolution: u32,
    /// Narrowest crease the fabrication process can realize (mm); crease
    /// spans are widened to respect it before meshing.
    pub min_crease_width: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            n: 4,
            outer_radius: 50.0,
            inner_radius_ratio: 1.0 / 6.0,
            face_thickness: 1.0,
            resolution: 3,
            min_crease_width: 0.4,
        }
    }
}

impl GeometryParams {
    /// Sector half-pattern angle alpha = pi / n (rad).
    pub fn alpha(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius_ratio * self.outer_radius
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n < 3 {
            return Err(format!("n must be >= 3, got {}", self.n));
        }
        if !(self.inner_radius_ratio > 0.0 && self.inner_radius_ratio < 1.0) {
            return Err(format!(
                "inner_radius_ratio must lie in (0, 1), got {}",
                self.inner_radius_ratio
            ));
        }
        if !(self.face_thickness > 0.0) {
            return Err("face_thickness must be strictly positive".into());
        }
        if !(self.outer_radius > 0.0) {
            return Err("outer_radius must be strictly positive".into());
        }
        if self.resolution < 1 {
            return Err("resolution must be >= 1".into());
        }
        Ok(())
    }
}

/// The five normalized design variables
/// x = (th1, th2, th3, omega, h_ratio) with angles normalized by alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    pub th1: f64,
    pub th2: f64,
    pub th3: f64,
    pub omega: f64,
    pub h_ratio: f64,
}

impl DesignVector {
    pub fn as_array(&self) -> [f64; 5] {
        [self.th1, self.th2, self.th3, self.omega, self.h_ratio]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        DesignVector {
            th1: v[0],
            th2: v[1],
            th3: v[2],
            omega: v[3],
            h_ratio: v[4],
        }
    }

    /// The paper's Design I, also the optimization start point.
    pub fn design_i() -> Self {
        DesignVector::from_array([0.1, 0.5, 0.9, 1.0, 0.6])
    }

    pub fn design_ii() -> Self {
        DesignVector::from_array([0.5, 0.6, 0.7, 0.5, 0.704])
    }

    pub fn design_iii() -> Self {
        DesignVector::from_array([0.31, 0.46, 0.9, 1.5, 0.374])
    }
}

/// Box bounds on the five design variables, with optional frozen dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignBounds {
    pub lower: [f64; 5],
    pub upper: [f64; 5],
    /// Per-dimension fixed values; a frozen dimension is overwritten on
    /// validation and excluded from the optimization space.
    pub frozen: [Option<f64>; 5],
}

impl DesignBounds {
    pub fn new(lower: [f64; 5], upper: [f64; 5]) -> Result<Self, DesignError> {
        for i in 0..5 {
            if lower[i] > upper[i] {
                return Err(DesignError::InvalidBounds(i));
            }
        }
        Ok(DesignBounds {
            lower,
            upper,
            frozen: [None; 5],
        })
    }

    /// Manufacturing-limited bounds (scenarios a/b).
    pub fn default_bounds() -> Self {
        DesignBounds {
            lower: [0.1, 0.1, 0.1, 0.5, 0.3],
            upper: [0.9, 0.9, 0.9, 1.5, 0.9],
            frozen: [None; 5],
        }
    }

    /// Relaxed angular bounds (scenarios c/d/e).
    pub fn relaxed_bounds() -> Self {
        DesignBounds {
            lower: [0.02, 0.02, 0.02, 0.5, 0.3],
            upper: [0.98, 0.98, 0.98, 1.5, 0.9],
            frozen: [None; 5],
        }
    }

    pub fn freeze(mut self, dimension: usize, value: f64) -> Result<Self, DesignError> {
        if value < self.lower[dimension] || value > self.upper[dimension] {
            return Err(DesignError::FrozenOutOfBounds {
                name: DIMENSION_NAMES[dimension],
                value,
                lower: self.lower[dimension],
                upper: self.upper[dimension],
            });
        }
        self.frozen[dimension] = Some(value);
        Ok(self)
    }

    /// Indices of the dimensions left free by `frozen`.
    pub fn active_dimensions(&self) -> Vec<usize> {
        (0..5).filter(|&i| self.frozen[i].is_none()).collect()
    }
}

/// Checks a raw 5-vector against bounds and crease ordering, applying frozen
/// values first.
pub fn validate_design(raw: [f64; 5], bounds: &DesignBounds) -> Result<DesignVector, DesignError> {
    let mut v = raw;
    for i in 0..5 {
        if let Some(fixed) = bounds.frozen[i] {
            v[i] = fixed;
        }
    }
    for i in 0..5 {
        if v[i] < bounds.lower[i] || v[i] > bounds.upper[i] || !v[i].is_finite() {
            return Err(DesignError::OutOfBounds {
                dimension: i,
                name: DIMENSION_NAMES[i],
                value: v[i],
                lower: bounds.lower[i],
                upper: bounds.upper[i],
            });
        }
    }
    if !(v[0] <= v[1] && v[1] <= v[2]) {
        return Err(DesignError::OrderingViolation {
            th1: v[0],
            th2: v[1],
            th3: v[2],
        });
    }
    Ok(DesignVector::from_array(v))
}

/// Region tag shared by mesh elements and stress reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Face,
    Crease,
}

/// Angular partition of the sector [0, alpha]: mountain crease band, facet
/// band with an interior node ray, valley crease band. All angles in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorLayout {
    /// Mountain band [0, th1 * alpha].
    pub mountain: (f64, f64),
    /// Facet band [th1 * alpha, th3 * alpha].
    pub facet: (f64, f64),
    /// Valley band [th3 * alpha, alpha].
    pub valley: (f64, f64),
    /// Interior node ray at th2 * alpha.
    pub interior_ray: f64,
    pub alpha: f64,
}

impl SectorLayout {
    pub fn region_at(&self, angle: f64) -> Region {
        if angle < self.mountain.1 || angle > self.valley.0 {
            Region::Crease
        } else {
            Region::Face
        }
    }
}

/// Maps a valid design vector to the angular band partition of the sector.
pub fn build_layout(x: &DesignVector, g: &GeometryParams) -> SectorLayout {
    let alpha = g.alpha();
    let a1 = x.th1 * alpha;
    let a2 = x.th2 * alpha;
    let a3 = x.th3 * alpha;
    SectorLayout {
        mountain: (0.0, a1),
        facet: (a1, a3),
        valley: (a3, alpha),
        interior_ray: a2,
        alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn design_i_accepted_with_default_bounds() {
        let b = DesignBounds::default_bounds();
        let x = validate_design([0.1, 0.5, 0.9, 1.0, 0.6], &b).unwrap();
        assert_eq!(x, DesignVector::design_i());
    }

    #[test]
    fn descending_angles_rejected() {
        let b = DesignBounds::default_bounds();
        let err = validate_design([0.9, 0.5, 0.1, 1.0, 0.6], &b).unwrap_err();
        assert!(matches!(err, DesignError::OrderingViolation { .. }));
    }

    #[test]
    fn negative_thickness_ratio_rejected() {
        let b = DesignBounds::default_bounds();
        let err = validate_design([0.1, 0.5, 0.9, -1.0, 0.6], &b).unwrap_err();
        match err {
            DesignError::OutOfBounds { name, .. } => assert_eq!(name, "omega"),
            other => panic!("expected OutOfBounds, got {other:?}"),
        }
    }

    #[test]
    fn bound_value_is_inclusive() {
        let b = DesignBounds::default_bounds();
        assert!(validate_design([0.1, 0.1, 0.1, 0.5, 0.3], &b).is_ok());
        assert!(validate_design([0.9, 0.9, 0.9, 1.5, 0.9], &b).is_ok());
    }

    #[test]
    fn frozen_dimension_overwrites_input() {
        let b = DesignBounds::default_bounds().freeze(4, 0.6).unwrap();
        let x = validate_design([0.1, 0.5, 0.9, 1.0, 0.42], &b).unwrap();
        assert_eq!(x.h_ratio, 0.6);
        assert_eq!(b.active_dimensions(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn layout_design_i_bands() {
        let g = GeometryParams::default();
        let alpha = g.alpha();
        let x = DesignVector::design_i();
        let l = build_layout(&x, &g);
        assert_relative_eq!(l.mountain.1, 0.1 * alpha, max_relative = 1e-14);
        assert_relative_eq!(l.facet.0, 0.1 * alpha, max_relative = 1e-14);
        assert_relative_eq!(l.facet.1, 0.9 * alpha, max_relative = 1e-14);
        assert_relative_eq!(l.valley.0, 0.9 * alpha, max_relative = 1e-14);
        assert_relative_eq!(l.valley.1, alpha, max_relative = 1e-14);
        assert_relative_eq!(l.interior_ray, 0.5 * alpha, max_relative = 1e-14);
    }

    #[test]
    fn layout_degenerate_facet_band() {
        let g = GeometryParams::default();
        let x = DesignVector::from_array([0.5, 0.5, 0.5, 1.0, 0.6]);
        let l = build_layout(&x, &g);
        assert_eq!(l.facet.0, l.facet.1);
    }

    #[test]
    fn layout_xb_valley_band() {
        // x^b hits the th3 upper bound; valley band is [0.9 alpha, alpha].
        let g = GeometryParams::default();
        let alpha = g.alpha();
        let x = DesignVector::from_array([0.4366, 0.9, 0.9, 0.5, 0.6]);
        let l = build_layout(&x, &g);
        assert_relative_eq!(l.valley.0, 0.9 * alpha, max_relative = 1e-14);
        assert_relative_eq!(l.valley.1, alpha, max_relative = 1e-14);
    }

    #[test]
    fn partition_sums_to_alpha() {
        let g = GeometryParams::default();
        for x in [
            DesignVector::design_i(),
            DesignVector::design_ii(),
            DesignVector::design_iii(),
        ] {
            let l = build_layout(&x, &g);
            let total = (l.mountain.1 - l.mountain.0)
                + (l.facet.1 - l.facet.0)
                + (l.valley.1 - l.valley.0);
            assert_relative_eq!(total, g.alpha(), max_relative = 1e-12);
        }
    }
}
