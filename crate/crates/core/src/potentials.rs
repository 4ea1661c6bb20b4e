//! Radially symmetric attractive potential profiles `V(r)`.
//!
//! The Hamiltonian is `-Δ - λV` with `λ > 0`, so a positive `V` attracts. Every
//! profile is hard-truncated at its support radius, beyond which `evaluate`
//! returns exactly zero. In one dimension `r = |x|`.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::build_grid;
use crate::Dimension;

/// Gaussian support in units of the width: `exp(-r²/a²) = 1e-28` there.
pub const GAUSSIAN_SUPPORT: f64 = 8.029_469_634_031_459; // sqrt(28 ln 10)
/// Exponential support in units of the width: `exp(-r/a) = 1e-12` there.
pub const EXPONENTIAL_SUPPORT: f64 = 27.631_021_115_928_55; // 12 ln 10

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Square,
    Gaussian,
    Exponential,
    Tabulated,
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Self::Square),
            "gaussian" => Ok(Self::Gaussian),
            "exponential" => Ok(Self::Exponential),
            "tabulated" => Ok(Self::Tabulated),
            other => Err(invalid(
                "potential.kind",
                format!("unknown kind '{other}' (expected square, gaussian, exponential or tabulated)"),
            )),
        }
    }
}

impl std::fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Square => "square",
            Self::Gaussian => "gaussian",
            Self::Exponential => "exponential",
            Self::Tabulated => "tabulated",
        };
        f.write_str(s)
    }
}

/// Construction parameters for a [`Potential`].
///
/// `amplitude` is the dimensionless depth and `width` the length scale. For
/// tabulated profiles the table is in reduced units: `V(r) = amplitude ·
/// table(r / width)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub dimension: Dimension,
    pub amplitude: f64,
    pub width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, dimension: Dimension, amplitude: f64, width: f64) -> Self {
        Self {
            kind,
            dimension,
            amplitude,
            width,
            table: None,
        }
    }

    pub fn square(dimension: Dimension, amplitude: f64, width: f64) -> Self {
        Self::new(PotentialKind::Square, dimension, amplitude, width)
    }

    pub fn gaussian(dimension: Dimension, amplitude: f64, width: f64) -> Self {
        Self::new(PotentialKind::Gaussian, dimension, amplitude, width)
    }

    pub fn exponential(dimension: Dimension, amplitude: f64, width: f64) -> Self {
        Self::new(PotentialKind::Exponential, dimension, amplitude, width)
    }

    pub fn tabulated(dimension: Dimension, table: Vec<(f64, f64)>) -> Self {
        Self {
            kind: PotentialKind::Tabulated,
            dimension,
            amplitude: 1.0,
            width: 1.0,
            table: Some(table),
        }
    }

    /// The profile `s² V(s r)`: depth times `s²`, width divided by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            amplitude: self.amplitude * s * s,
            width: self.width / s,
            ..self.clone()
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    spec: PotentialSpec,
    support_radius: f64,
    moment: f64,
    profile: Option<MonotoneCubic>,
}

pub fn make_potential(spec: PotentialSpec) -> Result<Potential> {
    Potential::new(spec)
}

impl Potential {
    pub fn new(spec: PotentialSpec) -> Result<Self> {
        ensure_positive("potential.amplitude", spec.amplitude)?;
        ensure_positive("potential.width", spec.width)?;
        let n = spec.dimension;
        let (a, w) = (spec.amplitude, spec.width);
        let (support_radius, moment, profile) = match spec.kind {
            PotentialKind::Square => (w, a * ball_volume(n) * w.powi(n.get() as i32), None),
            PotentialKind::Gaussian => (
                w * GAUSSIAN_SUPPORT,
                a * PI.powf(0.5 * n.get() as f64) * w.powi(n.get() as i32),
                None,
            ),
            PotentialKind::Exponential => {
                let factorial = [1.0, 1.0, 2.0][n.get() as usize - 1];
                (
                    w * EXPONENTIAL_SUPPORT,
                    a * n.surface_area() * factorial * w.powi(n.get() as i32),
                    None,
                )
            }
            PotentialKind::Tabulated => {
                let table = spec
                    .table
                    .as_deref()
                    .ok_or_else(|| invalid("potential.table", "tabulated kind requires a table"))?;
                let profile = validate_table(table)?;
                let last = table[table.len() - 1].0;
                let moment = a * w.powi(n.get() as i32) * tabulated_moment(&profile, table, n);
                (w * last, moment, Some(profile))
            }
        };
        if !(moment > 0.0) {
            return Err(invalid(
                "potential",
                format!("moment ∫V dⁿx must be positive, got {moment:e}"),
            ));
        }
        Ok(Self {
            spec,
            support_radius,
            moment,
            profile,
        })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn dimension(&self) -> Dimension {
        self.spec.dimension
    }

    pub fn kind(&self) -> PotentialKind {
        self.spec.kind
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `∫ V dⁿx` over all space.
    pub fn moment(&self) -> f64 {
        self.moment
    }

    /// `V(r)`; zero for `r > support_radius`.
    pub fn evaluate(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.support_radius {
            return 0.0;
        }
        let (a, w) = (self.spec.amplitude, self.spec.width);
        match self.spec.kind {
            PotentialKind::Square => a,
            PotentialKind::Gaussian => {
                let t = r / w;
                a * (-t * t).exp()
            }
            PotentialKind::Exponential => a * (-r / w).exp(),
            PotentialKind::Tabulated => a * self.profile.as_ref().map_or(0.0, |p| p.eval(r / w)),
        }
    }

    /// Radius of a jump discontinuity in `V`, if any (the square-well edge).
    pub fn discontinuity(&self) -> Option<f64> {
        (self.spec.kind == PotentialKind::Square).then_some(self.support_radius)
    }

    pub fn summary(&self) -> String {
        format!(
            "{} n={} amplitude={} width={} moment={}",
            self.spec.kind, self.spec.dimension, self.spec.amplitude, self.spec.width, self.moment
        )
    }
}

fn ball_volume(n: Dimension) -> f64 {
    match n {
        Dimension::One => 2.0,
        Dimension::Two => PI,
        Dimension::Three => 4.0 * PI / 3.0,
    }
}

fn validate_table(table: &[(f64, f64)]) -> Result<MonotoneCubic> {
    if table.len() < 4 {
        return Err(invalid(
            "potential.table",
            format!("need at least 4 points, got {}", table.len()),
        ));
    }
    if table.iter().any(|(r, v)| !r.is_finite() || !v.is_finite()) {
        return Err(invalid("potential.table", "entries must be finite"));
    }
    if table[0].0 < 0.0 {
        return Err(invalid("potential.table", "first radius must be >= 0"));
    }
    let peak = table.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let tail = table[table.len() - 1].1.abs();
    if tail > 1e-6 * peak {
        return Err(invalid(
            "potential.table",
            format!("last value {tail:e} exceeds 1e-6 of the peak {peak:e}; the table must decay to zero"),
        ));
    }
    let (rs, vs): (Vec<f64>, Vec<f64>) = table.iter().copied().unzip();
    MonotoneCubic::new(&rs, &vs).map_err(|_| invalid("potential.table", "radii must be strictly increasing"))
}

/// `S_n ∫_0^R table(r) r^{n-1} dr` with Simpson on each table interval (the
/// interpolant is a cubic there, so 16 panels are exact to rounding).
fn tabulated_moment(profile: &MonotoneCubic, table: &[(f64, f64)], n: Dimension) -> f64 {
    let mut breaks = vec![0.0];
    breaks.extend(table.iter().map(|(r, _)| *r).filter(|&r| r > 0.0));
    let radial: f64 = breaks
        .windows(2)
        .map(|w| {
            build_grid(w[0], w[1], 17)
                .expect("table radii strictly increasing")
                .integrate_fn(|r| profile.eval(r) * n.radial_measure(r))
        })
        .sum();
    n.surface_area() * radial
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn radial_quadrature(p: &Potential) -> f64 {
        let g = build_grid(0.0, p.support_radius(), 20001).unwrap();
        let n = p.dimension();
        n.surface_area() * g.integrate_fn(|r| p.evaluate(r) * n.radial_measure(r))
    }

    #[test]
    fn builtin_moments() {
        let g = make_potential(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0)).unwrap();
        assert!((g.moment() - PI.sqrt()).abs() < 1e-15);
        let s = make_potential(PotentialSpec::square(Dimension::One, 1.0, 1.0)).unwrap();
        assert_eq!(s.moment(), 2.0);
        let s3 = make_potential(PotentialSpec::square(Dimension::Three, 1.0, 1.0)).unwrap();
        assert!((s3.moment() - 4.188_790_204_786_391).abs() < 1e-14);
    }

    #[test]
    fn evaluate_examples() {
        let s = make_potential(PotentialSpec::square(Dimension::One, 1.0, 1.0)).unwrap();
        assert_eq!(s.evaluate(0.5), 1.0);
        assert_eq!(s.evaluate(2.0), 0.0);
        let g = make_potential(PotentialSpec::gaussian(Dimension::One, 2.0, 1.0)).unwrap();
        assert!((g.evaluate(1.0) - 2.0 * (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(g.evaluate(g.support_radius() * 1.0001), 0.0);
    }

    #[test]
    fn quadrature_reproduces_moment() {
        for n in [Dimension::One, Dimension::Two, Dimension::Three] {
            for spec in [
                PotentialSpec::square(n, 1.3, 0.7),
                PotentialSpec::gaussian(n, 0.8, 1.9),
                PotentialSpec::exponential(n, 2.0, 0.4),
            ] {
                let p = make_potential(spec).unwrap();
                let q = radial_quadrature(&p);
                assert!((q / p.moment() - 1.0).abs() <= 1e-8, "{}: {q} vs {}", p.summary(), p.moment());
            }
        }
    }

    #[test]
    fn support_radius_per_kind() {
        let s = make_potential(PotentialSpec::square(Dimension::Two, 1.0, 2.0)).unwrap();
        assert_eq!(s.support_radius(), 2.0);
        let g = make_potential(PotentialSpec::gaussian(Dimension::Two, 1.0, 2.0)).unwrap();
        assert!((g.support_radius() - 2.0 * (28.0 * 10f64.ln()).sqrt()).abs() < 1e-12);
        let e = make_potential(PotentialSpec::exponential(Dimension::Two, 1.0, 1.0)).unwrap();
        assert!(e.evaluate(e.support_radius() * 0.999_999) < 1.01e-12);
    }

    #[test]
    fn tabulated_gaussian_matches_builtin_moment() {
        let table: Vec<(f64, f64)> = (0..=1600)
            .map(|i| {
                let r = i as f64 * 0.005;
                (r, (-r * r).exp())
            })
            .collect();
        for n in [Dimension::One, Dimension::Two, Dimension::Three] {
            let p = make_potential(PotentialSpec::tabulated(n, table.clone())).unwrap();
            let exact = PI.powf(0.5 * n.get() as f64);
            assert!((p.moment() / exact - 1.0).abs() < 1e-6, "n={n}: {}", p.moment());
            assert!((p.evaluate(0.73) - (-0.73_f64 * 0.73).exp()).abs() < 1e-6);
            assert_eq!(p.support_radius(), 8.0);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(Dimension::new(4).is_err());
        assert!(Dimension::new(0).is_err());
        assert!(make_potential(PotentialSpec::square(Dimension::One, 0.0, 1.0)).is_err());
        assert!(make_potential(PotentialSpec::square(Dimension::One, 1.0, -1.0)).is_err());
        let short = vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)];
        assert!(make_potential(PotentialSpec::tabulated(Dimension::One, short)).is_err());
        let no_decay = vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.2), (3.0, 0.1)];
        assert!(make_potential(PotentialSpec::tabulated(Dimension::One, no_decay)).is_err());
        let unsorted = vec![(0.0, 1.0), (2.0, 0.5), (1.0, 0.2), (3.0, 0.0)];
        assert!(make_potential(PotentialSpec::tabulated(Dimension::One, unsorted)).is_err());
        let repulsive = vec![(0.0, -1.0), (1.0, -0.5), (2.0, -0.2), (3.0, 0.0)];
        assert!(make_potential(PotentialSpec::tabulated(Dimension::One, repulsive)).is_err());
        let negative_radius = vec![(-1.0, 1.0), (1.0, 0.5), (2.0, 0.2), (3.0, 0.0)];
        assert!(make_potential(PotentialSpec::tabulated(Dimension::One, negative_radius)).is_err());
    }

    proptest! {
        #[test]
        fn amplitude_linearity(c in 1e-3..1e3f64, a in 0.1..10.0f64, w in 0.1..5.0f64, n in 1u32..=3, k in 0usize..3) {
            let n = Dimension::new(n).unwrap();
            let kind = [PotentialKind::Square, PotentialKind::Gaussian, PotentialKind::Exponential][k];
            let base = make_potential(PotentialSpec::new(kind, n, a, w)).unwrap();
            let scaled = make_potential(PotentialSpec::new(kind, n, c * a, w)).unwrap();
            prop_assert!((scaled.moment() / (c * base.moment()) - 1.0).abs() <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn nonnegative_and_truncated(r in 0.0..100.0f64, n in 1u32..=3, k in 0usize..3) {
            let n = Dimension::new(n).unwrap();
            let kind = [PotentialKind::Square, PotentialKind::Gaussian, PotentialKind::Exponential][k];
            let p = make_potential(PotentialSpec::new(kind, n, 1.5, 0.9)).unwrap();
            let v = p.evaluate(r);
            prop_assert!(v >= 0.0);
            if r > p.support_radius() {
                prop_assert_eq!(v, 0.0);
            }
        }
    }
}
