//! Normalized fixed-point iteration for the coupling `λ` at a given binding
//! energy `ε`.
//!
//! The bound state satisfies `u = λ K_ε [V μ u]`, with `K_ε` the reduced
//! Green's kernel and `μ` the radial measure. Fixing `u(x_ref) = 1` gives
//! `λ = 1 / (K_ε[V μ u])(x_ref)`, and substituting back removes `λ`:
//!
//! ```text
//! u_{k+1}(x) = (K_ε[V μ u_k])(x) / (K_ε[V μ u_k])(x_ref)
//! ```
//!
//! This is a power iteration on a positive operator, so from the nodeless
//! start `u_0 ≡ 1` it converges to the ground state, and `λ` comes out as the
//! smallest coupling that binds at energy `-ε`.
//!
//! In three dimensions the iteration runs on `w(r) = r u(r)` with the
//! Dirichlet kernel; the start is `w_0(r) = r`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kernels::{KernelSpec, ReducedKernel};
use crate::potentials::Potential;
use crate::quadrature::{build_grid, Grid};
use crate::Dimension;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Simpson points on the potential support (bumped to odd).
    pub points: usize,
    /// Grid extent as a multiple of the support radius (ignored for square wells,
    /// whose grid ends exactly at the well edge).
    pub padding: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Normalization node; `None` picks the node maximizing `V · u_0`.
    pub ref_index: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            points: 2001,
            padding: 1.05,
            tol: 1e-12,
            max_iter: 500,
            ref_index: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    potential: Potential,
    grid: Grid,
    ref_index: usize,
    tol: f64,
    max_iter: usize,
    /// `w_j V(x_j) μ(x_j)`: quadrature weight times potential times radial measure.
    source: Vec<f64>,
}

impl SolverConfig {
    pub fn new(potential: Potential) -> Result<Self> {
        Self::with_options(potential, &SolverOptions::default())
    }

    pub fn with_options(potential: Potential, options: &SolverOptions) -> Result<Self> {
        let grid = solver_grid(&potential, options.points, options.padding)?;
        let ref_index = match options.ref_index {
            Some(i) => i,
            None => default_ref_index(&potential, &grid),
        };
        Self::from_parts(potential, grid, ref_index, options.tol, options.max_iter)
    }

    pub fn from_parts(potential: Potential, grid: Grid, ref_index: usize, tol: f64, max_iter: usize) -> Result<Self> {
        if ref_index >= grid.len() {
            return Err(invalid(
                "solver.ref_index",
                format!("{ref_index} is outside the grid (0..{})", grid.len()),
            ));
        }
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(invalid("solver.tol", format!("must lie in (0, 1e-6], got {tol}")));
        }
        if max_iter < 10 {
            return Err(invalid("solver.max_iter", format!("must be at least 10, got {max_iter}")));
        }
        let n = potential.dimension();
        if n != Dimension::One && grid.domain().0 < 0.0 {
            return Err(invalid("grid", "radial grids must start at r >= 0"));
        }
        let source = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&x, &w)| {
                let measure = if n == Dimension::Two { x } else { 1.0 };
                w * potential.evaluate(x) * measure
            })
            .collect();
        Ok(Self {
            potential,
            grid,
            ref_index,
            tol,
            max_iter,
            source,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dimension(&self) -> Dimension {
        self.potential.dimension()
    }

    pub fn ref_index(&self) -> usize {
        self.ref_index
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// `u_0 ≡ 1` (or `w_0 = r` in 3D), normalized at the reference node.
    pub fn start_profile(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        match self.dimension() {
            Dimension::Three => {
                let r_ref = nodes[self.ref_index];
                let scale = if r_ref > 0.0 { 1.0 / r_ref } else { 1.0 };
                nodes.iter().map(|r| r * scale).collect()
            }
            _ => vec![1.0; nodes.len()],
        }
    }
}

/// Grid over the potential support: `[-R, R]` in 1D, `[0, R]` radially.
pub fn solver_grid(potential: &Potential, points: usize, padding: f64) -> Result<Grid> {
    if !(padding >= 1.0 && padding.is_finite()) {
        return Err(invalid("grid.padding", format!("must be >= 1, got {padding}")));
    }
    let extent = match potential.discontinuity() {
        Some(edge) => edge,
        None => padding * potential.support_radius(),
    };
    match potential.dimension() {
        Dimension::One => build_grid(-extent, extent, points),
        _ => build_grid(0.0, extent, points),
    }
}

/// Node maximizing `V(x) u_0(x)`, ties going to the node nearest the origin.
fn default_ref_index(potential: &Potential, grid: &Grid) -> usize {
    let weight = |x: f64| {
        let v = potential.evaluate(x);
        if potential.dimension() == Dimension::Three {
            v * x
        } else {
            v
        }
    };
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in grid.nodes().iter().enumerate() {
        let val = weight(x);
        if val > best_val || (val == best_val && x.abs() < grid.nodes()[best].abs()) {
            best = i;
            best_val = val;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationResult {
    pub epsilon: f64,
    pub lambda: f64,
    /// Profile on the grid (`w = r u` in 3D), equal to 1 at the reference node.
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// The normalized map `u ↦ K[Vμu] / K[Vμu](x_ref)` at one `ε`.
struct FixedPointMap<'a> {
    cfg: &'a SolverConfig,
    kernel: ReducedKernel,
    weighted: Vec<f64>,
}

impl<'a> FixedPointMap<'a> {
    fn new(cfg: &'a SolverConfig, epsilon: f64) -> Result<Self> {
        let spec = KernelSpec::new(cfg.dimension(), epsilon)?;
        let kernel = ReducedKernel::new(&spec, cfg.grid.nodes())?;
        Ok(Self {
            cfg,
            kernel,
            weighted: vec![0.0; cfg.grid.len()],
        })
    }

    /// Writes the normalized image of `u` into `out`; returns the unnormalized
    /// value at the reference node, `1/λ`.
    fn apply(&mut self, u: &[f64], out: &mut [f64]) -> Result<f64> {
        for ((dst, &s), &v) in self.weighted.iter_mut().zip(&self.cfg.source).zip(u) {
            *dst = s * v;
        }
        self.kernel.apply(&self.weighted, out);
        let r = self.cfg.ref_index;
        let n_ref = out[r];
        if n_ref == 0.0 || !n_ref.is_finite() {
            return Err(Error::ReferenceUnderflow { index: r });
        }
        let inv = 1.0 / n_ref;
        for v in out.iter_mut() {
            *v *= inv;
        }
        out[r] = 1.0;
        Ok(n_ref)
    }
}

fn check_profile(cfg: &SolverConfig, u: &[f64]) -> Result<()> {
    if u.len() != cfg.grid.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.grid.len(),
            got: u.len(),
        });
    }
    let at_ref = u[cfg.ref_index];
    if at_ref == 0.0 || !at_ref.is_finite() {
        return Err(invalid("u", "profile must be finite and nonzero at the reference node"));
    }
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One application of the normalized fixed-point map.
pub fn iterate_once(cfg: &SolverConfig, epsilon: f64, u_in: &[f64]) -> Result<Vec<f64>> {
    check_profile(cfg, u_in)?;
    let mut map = FixedPointMap::new(cfg, epsilon)?;
    let mut out = vec![0.0; u_in.len()];
    map.apply(u_in, &mut out)?;
    Ok(out)
}

/// Max-norm violation `max_i |u_i - T(u)_i|` of the normalized fixed-point
/// equation. `u` is expected to be normalized at the reference node.
pub fn residual(cfg: &SolverConfig, epsilon: f64, u: &[f64]) -> Result<f64> {
    let image = iterate_once(cfg, epsilon, u)?;
    Ok(max_abs_diff(u, &image))
}

/// Iterates from the nodeless start until both the profile (max-norm) and `λ`
/// (relative) change by at most `tol`, or `max_iter` is reached.
pub fn solve_lambda(cfg: &SolverConfig, epsilon: f64) -> Result<IterationResult> {
    let mut map = FixedPointMap::new(cfg, epsilon)?;
    let mut u = cfg.start_profile();
    let mut next = vec![0.0; u.len()];
    let mut lambda_prev = f64::NAN;
    let mut iterations = 0;
    let mut settled = false;
    while iterations < cfg.max_iter {
        iterations += 1;
        let lambda = 1.0 / map.apply(&u, &mut next)?;
        let change = max_abs_diff(&u, &next);
        std::mem::swap(&mut u, &mut next);
        if change <= cfg.tol && ((lambda - lambda_prev) / lambda).abs() <= cfg.tol {
            settled = true;
            break;
        }
        lambda_prev = lambda;
    }
    // λ and the residual are evaluated at the returned profile.
    let lambda = 1.0 / map.apply(&u, &mut next)?;
    let residual = max_abs_diff(&u, &next);
    Ok(IterationResult {
        epsilon,
        lambda,
        u,
        iterations,
        residual,
        converged: settled && residual <= cfg.tol && lambda > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_potential, PotentialSpec};

    fn config(spec: PotentialSpec, points: usize) -> SolverConfig {
        let opts = SolverOptions {
            points,
            ..Default::default()
        };
        SolverConfig::with_options(make_potential(spec).unwrap(), &opts).unwrap()
    }

    #[test]
    fn config_validation() {
        let p = make_potential(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0)).unwrap();
        let grid = solver_grid(&p, 101, 1.05).unwrap();
        assert!(SolverConfig::from_parts(p.clone(), grid.clone(), 101, 1e-12, 500).is_err());
        assert!(SolverConfig::from_parts(p.clone(), grid.clone(), 50, 1e-3, 500).is_err());
        assert!(SolverConfig::from_parts(p.clone(), grid.clone(), 50, 1e-12, 5).is_err());
        assert!(SolverConfig::from_parts(p.clone(), grid, 50, 1e-12, 10).is_ok());
        assert!(solver_grid(&p, 101, 0.5).is_err());
        let p3 = make_potential(PotentialSpec::gaussian(Dimension::Three, 1.0, 1.0)).unwrap();
        let bad = build_grid(-1.0, 1.0, 11).unwrap();
        assert!(SolverConfig::from_parts(p3, bad, 5, 1e-12, 100).is_err());
    }

    #[test]
    fn default_reference_nodes() {
        let c1 = config(PotentialSpec::square(Dimension::One, 1.0, 1.0), 201);
        assert_eq!(c1.grid().nodes()[c1.ref_index()], 0.0);
        let c2 = config(PotentialSpec::gaussian(Dimension::Two, 1.0, 1.0), 201);
        assert_eq!(c2.ref_index(), 0);
        let c3 = config(PotentialSpec::gaussian(Dimension::Three, 1.0, 1.0), 2001);
        let r = c3.grid().nodes()[c3.ref_index()];
        assert!((r - 0.5_f64.sqrt()).abs() < 0.01);
        let c3s = config(PotentialSpec::square(Dimension::Three, 1.0, 1.0), 201);
        assert_eq!(c3s.ref_index(), 200);
    }

    #[test]
    fn iterate_once_is_normalized_and_scale_free() {
        let cfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 401);
        let u: Vec<f64> = cfg.grid().nodes().iter().map(|x| 1.0 + 0.1 * x.cos()).collect();
        let a = iterate_once(&cfg, 0.5, &u).unwrap();
        let scaled: Vec<f64> = u.iter().map(|v| -3.5 * v).collect();
        let b = iterate_once(&cfg, 0.5, &scaled).unwrap();
        assert_eq!(a[cfg.ref_index()], 1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn near_threshold_profile_is_flat() {
        // |u - 1| ~ κ |x|, so the bound holds on supports up to about 1/(1000 κ) = 10
        for spec in [
            PotentialSpec::gaussian(Dimension::One, 1.0, 1.0),
            PotentialSpec::square(Dimension::One, 1.0, 1.0),
            PotentialSpec::exponential(Dimension::One, 1.0, 0.3),
        ] {
            let cfg = config(spec, 2001);
            let out = iterate_once(&cfg, 1e-8, &vec![1.0; cfg.grid().len()]).unwrap();
            let support = cfg.potential().support_radius();
            for (x, v) in cfg.grid().nodes().iter().zip(&out) {
                if x.abs() <= support {
                    assert!((v - 1.0).abs() <= 1e-3, "x={x} u={v}");
                }
            }
        }
    }

    #[test]
    fn input_errors() {
        let cfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 101);
        assert!(matches!(
            iterate_once(&cfg, 1.0, &[1.0; 10]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut u = vec![1.0; 101];
        u[cfg.ref_index()] = 0.0;
        assert!(iterate_once(&cfg, 1.0, &u).is_err());
        assert!(solve_lambda(&cfg, 0.0).is_err());
        assert!(solve_lambda(&cfg, -1.0).is_err());
    }

    #[test]
    fn reference_in_dead_region_underflows() {
        let p = make_potential(PotentialSpec::square(Dimension::Three, 1.0, 1.0)).unwrap();
        let grid = solver_grid(&p, 101, 1.0).unwrap();
        let cfg = SolverConfig::from_parts(p, grid, 0, 1e-12, 100).unwrap();
        assert_eq!(
            solve_lambda(&cfg, 0.1),
            Err(Error::ReferenceUnderflow { index: 0 })
        );
    }

    #[test]
    fn converged_results_satisfy_invariants() {
        for spec in [
            PotentialSpec::gaussian(Dimension::One, 1.0, 1.0),
            PotentialSpec::square(Dimension::Two, 1.0, 1.0),
            PotentialSpec::exponential(Dimension::Three, 3.0, 0.5),
        ] {
            let cfg = config(spec, 801);
            for eps in [1e-6, 1e-2, 1.0] {
                let res = solve_lambda(&cfg, eps).unwrap();
                assert!(res.converged, "{} eps={eps}: {res:?}", cfg.potential().summary());
                assert!(res.residual <= cfg.tol());
                assert!(res.lambda > 0.0);
                assert_eq!(res.u[cfg.ref_index()], 1.0);
                let start = if cfg.dimension() == Dimension::Three { 1 } else { 0 };
                assert!(res.u[start..].iter().all(|&v| v > 0.0));
                assert!((residual(&cfg, eps, &res.u).unwrap() - res.residual).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perturbed_fixed_point_is_detected() {
        let cfg = config(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0), 801);
        let res = solve_lambda(&cfg, 0.1).unwrap();
        let mut u = res.u.clone();
        u[cfg.ref_index() + 37] += 1e-6;
        assert!(residual(&cfg, 0.1, &u).unwrap() >= 1e-7);
        let image = iterate_once(&cfg, 0.1, &res.u).unwrap();
        assert!(max_abs_diff(&image, &res.u) <= cfg.tol());
    }

    #[test]
    fn iterates_stay_positive() {
        let cfg = config(PotentialSpec::gaussian(Dimension::Two, 2.0, 0.7), 401);
        let mut u = cfg.start_profile();
        for _ in 0..20 {
            u = iterate_once(&cfg, 0.3, &u).unwrap();
            assert!(u.iter().all(|&v| v > 0.0));
            assert_eq!(u[cfg.ref_index()], 1.0);
        }
    }

    #[test]
    fn amplitude_scaling() {
        for c in [0.1, 3.0] {
            let base = config(PotentialSpec::gaussian(Dimension::Two, 1.0, 1.0), 801);
            let scaled = config(PotentialSpec::gaussian(Dimension::Two, c, 1.0), 801);
            let a = solve_lambda(&base, 1e-3).unwrap().lambda;
            let b = solve_lambda(&scaled, 1e-3).unwrap().lambda;
            assert!((b * c / a - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = make_potential(PotentialSpec::gaussian(Dimension::One, 1.0, 1.0)).unwrap();
        let opts = SolverOptions {
            points: 401,
            max_iter: 10,
            tol: 1e-15,
            ..Default::default()
        };
        let cfg = SolverConfig::with_options(p, &opts).unwrap();
        let res = solve_lambda(&cfg, 50.0).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 10);
    }
}
