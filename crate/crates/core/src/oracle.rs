//! Reference eigenvalues computed without Green's functions.
//!
//! [`fd_lowest_eigenvalue`] discretizes `-Δ - λV` directly with second-order
//! finite differences in a Dirichlet box, producing a symmetric tridiagonal
//! matrix whose lowest eigenvalue is bracketed by Sturm-sequence counting.
//! [`square_well_exact`] solves the square-well matching conditions.

use serde::Serialize;

use crate::error::{ensure_positive, invalid, Result};
use crate::potentials::Potential;
use crate::Dimension;

/// Absolute bisection tolerance on the eigenvalue.
const BISECTION_TOL: f64 = 1e-10;

/// Box radius in units of `R_V + 1/√ε`.
const BOX_FACTOR: f64 = 6.0;

#[derive(Debug, Clone)]
pub struct FdProblem {
    potential: Potential,
    lambda: f64,
    mesh_points: usize,
    domain_radius: f64,
    /// Requested accuracy on `ε`; results whose estimated discretization
    /// error exceeds `1e3 × tolerance` are flagged.
    tolerance: f64,
}

impl FdProblem {
    pub fn new(potential: Potential, lambda: f64, mesh_points: usize, domain_radius: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        if mesh_points < 200 {
            return Err(invalid("mesh_points", format!("need at least 200, got {mesh_points}")));
        }
        if !(domain_radius > potential.support_radius() && domain_radius.is_finite()) {
            return Err(invalid(
                "domain_radius",
                format!(
                    "must exceed the support radius {}, got {domain_radius}",
                    potential.support_radius()
                ),
            ));
        }
        Ok(Self {
            potential,
            lambda,
            mesh_points,
            domain_radius,
            tolerance: 1e-7,
        })
    }

    /// Box radius `6 (R_V + 1/√ε_expected)`, twice the minimum for a resolved
    /// tail. At the minimum the wall shifts `ε` by roughly `e^{-2κ(R - R_V)}`
    /// relative, which can rival the discretization error being estimated.
    pub fn for_expected_epsilon(
        potential: Potential,
        lambda: f64,
        mesh_points: usize,
        epsilon_expected: f64,
    ) -> Result<Self> {
        ensure_positive("epsilon_expected", epsilon_expected)?;
        let radius = BOX_FACTOR * (potential.support_radius() + 1.0 / epsilon_expected.sqrt());
        Self::new(potential, lambda, mesh_points, radius)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        ensure_positive("tolerance", tolerance)?;
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn mesh_points(&self) -> usize {
        self.mesh_points
    }

    /// Mesh with nominal spacing `h`, shifted so a square-well edge lands on a node.
    fn mesh(&self, h_nominal: f64) -> Mesh {
        let n = self.potential.dimension();
        let r = self.domain_radius;
        let edge = self.potential.discontinuity();
        match n {
            Dimension::One => {
                // x_i = -R' + i h, i = 1..N, with R' a multiple of h
                let h = edge.map_or(h_nominal, |a| a / (a / h_nominal).round().max(1.0));
                let half = (r / h).ceil();
                let count = (2.0 * half) as usize - 1;
                let nodes = (1..=count).map(|i| (i as f64 - half) * h).collect();
                Mesh { nodes, h }
            }
            Dimension::Two => {
                // cell centers r_i = (i - 1/2) h; edge at a half-integer multiple of h
                let h = edge.map_or(h_nominal, |a| a / ((a / h_nominal + 0.5).round().max(1.0) - 0.5));
                let count = ((r / h - 0.5).ceil() as usize).max(2);
                let nodes = (1..=count).map(|i| (i as f64 - 0.5) * h).collect();
                Mesh { nodes, h }
            }
            Dimension::Three => {
                let h = edge.map_or(h_nominal, |a| a / (a / h_nominal).round().max(1.0));
                let count = ((r / h).ceil() as usize).saturating_sub(1).max(2);
                let nodes = (1..=count).map(|i| i as f64 * h).collect();
                Mesh { nodes, h }
            }
        }
    }

    fn nominal_spacing(&self) -> f64 {
        match self.potential.dimension() {
            Dimension::One => 2.0 * self.domain_radius / (self.mesh_points + 1) as f64,
            _ => self.domain_radius / (self.mesh_points + 1) as f64,
        }
    }

    /// Diagonal and off-diagonal of the symmetric finite-difference matrix.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        self.tridiagonal_on(&self.mesh(self.nominal_spacing()))
    }

    fn tridiagonal_on(&self, mesh: &Mesh) -> (Vec<f64>, Vec<f64>) {
        let h = mesh.h;
        let h2 = h * h;
        let lam = self.lambda;
        let v = |r: f64| self.node_potential(r, h);
        match self.potential.dimension() {
            Dimension::One | Dimension::Three => {
                let diag = mesh.nodes.iter().map(|&x| 2.0 / h2 - lam * v(x)).collect();
                let off = vec![-1.0 / h2; mesh.nodes.len() - 1];
                (diag, off)
            }
            Dimension::Two => {
                // -(1/r)(r u')' symmetrized by D^{1/2} with D = diag(r_i)
                let nodes = &mesh.nodes;
                let diag = nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| {
                        let inner = if i == 0 { 0.0 } else { r - 0.5 * h };
                        (inner + r + 0.5 * h) / (h2 * r) - lam * v(r)
                    })
                    .collect();
                let off = nodes
                    .windows(2)
                    .map(|w| -(w[0] + 0.5 * h) / (h2 * (w[0] * w[1]).sqrt()))
                    .collect();
                (diag, off)
            }
        }
    }

    /// A node within rounding of a jump takes the mean of both sides.
    fn node_potential(&self, r: f64, h: f64) -> f64 {
        match self.potential.discontinuity() {
            Some(edge) if (r.abs() - edge).abs() <= 1e-9 * h => 0.5 * self.potential.evaluate(edge),
            _ => self.potential.evaluate(r),
        }
    }
}

struct Mesh {
    nodes: Vec<f64>,
    h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdEigen {
    /// Binding energy `ε = -E_0` on the requested mesh, or `None` when the
    /// discretized operator has no negative eigenvalue.
    pub epsilon: Option<f64>,
    /// Same quantity on a mesh of twice the spacing.
    pub coarse_epsilon: Option<f64>,
    /// Richardson estimate `|ε_h - ε_2h| / 3` of the fine-mesh error.
    pub error_estimate: Option<f64>,
    /// `ε_h + (ε_h - ε_2h) / 3`.
    pub extrapolated: Option<f64>,
    pub mesh_spacing: f64,
    pub mesh_points: usize,
    pub domain_radius: f64,
    /// Estimated discretization error exceeds `1e3 ×` the requested tolerance.
    pub flagged: bool,
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `shift`.
pub fn sturm_count(diag: &[f64], off: &[f64], shift: f64) -> usize {
    const PIVOT_GUARD: f64 = 1e-300;
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = d - shift - coupling;
        if q == 0.0 {
            q = -PIVOT_GUARD;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvalue below zero, by bisection on the Sturm count.
fn lowest_negative_eigenvalue(diag: &[f64], off: &[f64]) -> Option<f64> {
    if sturm_count(diag, off, 0.0) == 0 {
        return None;
    }
    let mut lo = diag
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = off.get(i).map_or(0.0, |v| v.abs());
            d - left - right
        })
        .fold(f64::INFINITY, f64::min);
    let mut hi = 0.0;
    for _ in 0..200 {
        if hi - lo <= BISECTION_TOL.min(1e-14 * lo.abs().max(1e-300)).max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

pub fn fd_lowest_eigenvalue(problem: &FdProblem) -> Result<FdEigen> {
    let h = problem.nominal_spacing();
    let fine = problem.mesh(h);
    let coarse = problem.mesh(2.0 * h);
    let solve = |mesh: &Mesh| {
        let (d, e) = problem.tridiagonal_on(mesh);
        lowest_negative_eigenvalue(&d, &e).map(|e0| -e0)
    };
    let epsilon = solve(&fine);
    let coarse_epsilon = solve(&coarse);
    let (error_estimate, extrapolated) = match (epsilon, coarse_epsilon) {
        (Some(f), Some(c)) => (Some((f - c).abs() / 3.0), Some(f + (f - c) / 3.0)),
        (Some(f), None) => (Some(f), None),
        _ => (None, None),
    };
    let flagged = error_estimate.is_some_and(|e| e > problem.tolerance * 1e3);
    Ok(FdEigen {
        epsilon,
        coarse_epsilon,
        error_estimate,
        extrapolated,
        mesh_spacing: fine.h,
        mesh_points: fine.nodes.len(),
        domain_radius: problem.domain_radius,
        flagged,
    })
}

/// Runs [`fd_lowest_eigenvalue`] in a box grown until it is at least
/// `6 (R_V + 1/√ε)` for the computed `ε`.
pub fn fd_lowest_eigenvalue_auto(potential: &Potential, lambda: f64, mesh_points: usize) -> Result<FdEigen> {
    let mut radius = BOX_FACTOR * (potential.support_radius() + 1.0);
    let mut result = fd_lowest_eigenvalue(&FdProblem::new(potential.clone(), lambda, mesh_points, radius)?)?;
    for _ in 0..8 {
        let Some(eps) = result.epsilon else { break };
        let needed = BOX_FACTOR * (potential.support_radius() + 1.0 / eps.sqrt());
        if needed <= radius {
            break;
        }
        radius = needed;
        result = fd_lowest_eigenvalue(&FdProblem::new(potential.clone(), lambda, mesh_points, radius)?)?;
    }
    Ok(result)
}

/// Exact ground-state binding energy of the unit-depth square well
/// `V = 1` for `r < a` at coupling `λ`.
///
/// In 1D the even ground state solves `k tan(ka) = κ`, in 3D the s-wave solves
/// `k cot(ka) = -κ`, with `k² + κ² = λ`. The 1D well always binds; the 3D well
/// binds only for `λ a² > π²/4` (`None` otherwise).
pub fn square_well_exact(dimension: Dimension, lambda: f64, a: f64) -> Result<Option<f64>> {
    ensure_positive("lambda", lambda)?;
    ensure_positive("a", a)?;
    let root_lambda = lambda.sqrt();
    // k computed as sqrt((√λ - κ)(√λ + κ)) keeps precision when κ ≈ √λ
    let k_of = |kappa: f64| ((root_lambda - kappa) * (root_lambda + kappa)).max(0.0).sqrt();
    let half_pi = std::f64::consts::FRAC_PI_2 / a;
    let kappa = match dimension {
        Dimension::One => {
            let lo = (lambda - half_pi * half_pi).max(0.0).sqrt();
            bisect(|kappa| { let k = k_of(kappa); k * (k * a).tan() - kappa }, lo, root_lambda)
        }
        Dimension::Three => {
            if lambda * a * a <= half_pi * half_pi * a * a {
                return Ok(None);
            }
            let full_pi = 2.0 * half_pi;
            let lo = (lambda - full_pi * full_pi).max(0.0).sqrt();
            let hi = (lambda - half_pi * half_pi).sqrt();
            bisect(|kappa| { let k = k_of(kappa); k / (k * a).tan() + kappa }, lo, hi)
        }
        Dimension::Two => {
            return Err(invalid("dimension", "closed-form square-well roots are provided for n = 1 and n = 3"))
        }
    };
    Ok((kappa > 0.0).then_some(kappa * kappa))
}

/// Bisection for a sign change of `f` on `(lo, hi)`; endpoints may be singular.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f(0.5 * lo + 0.5 * (lo + (hi - lo) * 1e-12)).is_sign_positive();
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).is_sign_positive() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
