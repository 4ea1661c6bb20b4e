//! Threshold bound states of `-∂² - λV` in one, two and three dimensions.
//!
//! For a chosen binding energy `ε` the bound-state equation is rewritten with
//! the free Green's function `G_ε` as `u = λ G_ε V u`. Normalizing `u` at a
//! reference point eliminates `λ`, and the resulting fixed-point map is
//! iterated until `u` stops changing; `λ` then follows from the normalization.
//! Sweeping `ε` gives the curve `λ(ε)`, whose small-`ε` behavior is compared
//! against the weak-coupling laws (`λ ∝ √ε` in 1D, `1/λ ∝ ln(1/ε)` in 2D, a
//! finite critical coupling in 3D).
//!
//! Modules:
//! - [`potentials`]: radial potential profiles and their moments `∫V dⁿx`.
//! - [`special`]: modified Bessel functions `I0`, `K0`.
//! - [`kernels`]: free and reduced radial Green's functions, heat-kernel occupation.
//! - [`quadrature`]: composite Simpson grids, adaptive Simpson.
//! - [`solver`]: the normalized fixed-point iteration for `λ(ε)`.
//! - [`sweep`]: `λ(ε)` tables, inversion to `ε(λ)`, threshold laws, 3D critical coupling.
//! - [`oracle`]: finite-difference Sturm-bisection eigensolver and exact square-well roots.
//! - [`randomwalk`]: lattice random-walk occupation times.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interp;
pub mod kernels;
pub mod oracle;
pub mod potentials;
pub mod quadrature;
pub mod randomwalk;
pub mod solver;
pub mod special;
pub mod sweep;

pub use error::{Error, Result};

use serde::{Serialize, Serializer};

/// Spatial dimension of the problem. Only 1, 2 and 3 are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            _ => Err(error::invalid("dimension", format!("must be 1, 2 or 3, got {n}"))),
        }
    }

    pub fn get(self) -> u32 {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Three => 3,
        }
    }

    /// Area of the unit sphere `S^{n-1}` (2, 2π, 4π).
    pub fn surface_area(self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::One => 2.0,
            Self::Two => 2.0 * PI,
            Self::Three => 4.0 * PI,
        }
    }

    /// `r^{n-1}`, the radial part of the volume element.
    pub fn radial_measure(self, r: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => r,
            Self::Three => r * r,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.get())
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.get())
    }
}
