//! Minimal branch of the discretised radial problem.
//!
//! Unknowns are nodal values `u_0 … u_{N−2}` (the node at `r = 1` is fixed to
//! zero) and Newton works on `v = S u` with `S = diag(√V_i)`, where the
//! operator is the symmetric pentadiagonal `Ã`:
//!
//! ```text
//! F(v) = Ã v − λ S(1+u)^p,     J = Ã − λp diag((1+u)^{p−1}).
//! ```
//!
//! `J` is also the discrete linearised operator, so its smallest eigenvalue is
//! `μ₁(u_λ)` and a successful Cholesky factorisation certifies stability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, smallest_eigenpair, BandLu, SymBand};
use crate::params::{compute_pc, compute_k0, ProblemParams};
use crate::radial::{DiscreteOperator, PowerSum, RadialField, RadialGrid, ScaledFactor};

/// Newton stopping tolerance on `max|u − λA⁻¹(1+u)^p|`, relative to `1+λ`.
pub const NEWTON_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERS: usize = 40;
pub const EIGEN_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub solution: RadialField,
    /// `u_λ(0)` by extrapolation in `r²`.
    pub center_value: f64,
    pub mu1: f64,
    pub converged: bool,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    /// First λ step; `None` uses `0.02·λ₁/p`.
    pub initial_step: Option<f64>,
    pub grow: f64,
    pub shrink: f64,
    /// Stop once the step falls below `min_rel_step·λ`.
    pub min_rel_step: f64,
    pub max_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { initial_step: None, grow: 1.5, shrink: 0.5, min_rel_step: 1e-8, max_steps: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchResult {
    pub points: Vec<BranchPoint>,
    pub lambda_star_estimate: f64,
    pub fold_detected: bool,
    /// `μ₁` non-increasing along the whole run; `false` means grid noise.
    pub mu1_monotone: bool,
    pub nodes: usize,
    pub max_spacing: f64,
    pub lambda1: f64,
    /// The last rejected step, i.e. the width of the final bracket.
    pub final_step: f64,
    pub rejected_steps: usize,
}

struct Newton<'a> {
    op: &'a DiscreteOperator,
    fac: &'a ScaledFactor,
    p: f64,
}

struct NewtonOut {
    u: Vec<f64>,
    converged: bool,
    iters: usize,
}

impl Newton<'_> {
    fn source(&self, u: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(u.len());
        for &x in u {
            if !(1.0 + x > 0.0) {
                return None;
            }
            out.push(((1.0 + x).ln() * self.p).exp());
        }
        Some(out)
    }

    /// `G = u − λA⁻¹(1+u)^p`; computing `A G` from it avoids the cancellation
    /// between the large terms of `Au` and `λ(1+u)^p` near the origin.
    fn fixed_point(&self, lambda: f64, u: &[f64]) -> Option<Vec<f64>> {
        let g = self.source(u)?;
        let w = self.fac.solve(&g);
        let r: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - lambda * b).collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self, lambda: f64, u: &[f64]) -> SymBand {
        let shift: Vec<f64> =
            u.iter().map(|&x| lambda * self.p * ((1.0 + x).ln() * (self.p - 1.0)).exp()).collect();
        self.op.scaled().sub_diag(&shift)
    }

    /// `J⁻¹` applied in unscaled variables: solves `(A − λ g'(u)) x = b`.
    fn solve_jacobian(&self, j: &SymBand, b: &[f64]) -> Result<Vec<f64>> {
        let s = self.op.sqrt_volumes();
        let bs: Vec<f64> = b.iter().zip(s).map(|(a, s)| a * s).collect();
        let y = match j.cholesky() {
            Ok(c) => c.solve(&bs),
            Err(_) => BandLu::factor(j)?.solve(&bs),
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("singular Jacobian".into()));
        }
        Ok(y.iter().zip(s).map(|(a, s)| a / s).collect())
    }

    /// Damped Newton; the step solves `J du = −A G` and the line search
    /// monitors `max|G|`.
    fn run(&self, lambda: f64, init: &[f64]) -> NewtonOut {
        let tol = NEWTON_TOL * (1.0 + lambda);
        let mut u = init.to_vec();
        let Some(mut g) = self.fixed_point(lambda, &u) else {
            return NewtonOut { u, converged: false, iters: 0 };
        };
        let mut res = norm_inf(&g);
        for it in 0..MAX_NEWTON_ITERS {
            if res <= tol {
                return NewtonOut { u, converged: true, iters: it };
            }
            let rhs: Vec<f64> = self.op.apply(&g).iter().map(|v| -v).collect();
            let j = self.jacobian(lambda, &u);
            let Ok(du) = self.solve_jacobian(&j, &rhs) else { break };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = u.iter().zip(&du).map(|(a, d)| a + t * d).collect();
                if let Some(gt) = self.fixed_point(lambda, &trial) {
                    let rt = norm_inf(&gt);
                    if rt < res {
                        u = trial;
                        g = gt;
                        res = rt;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let converged = res <= tol;
        NewtonOut { u, converged, iters: MAX_NEWTON_ITERS }
    }
}

fn full_field(grid: &RadialGrid, u: &[f64]) -> Result<RadialField> {
    let mut v = u.to_vec();
    v.push(0.0);
    RadialField::new(grid.clone(), v)
}

fn check_grid(grid: &RadialGrid, params: &ProblemParams) -> Result<()> {
    if grid.n != params.n {
        return Err(Error::InvalidInput(format!("grid built for n = {}, problem has n = {}", grid.n, params.n)));
    }
    Ok(())
}

fn smallest_of(j: &SymBand) -> Result<f64> {
    Ok(smallest_eigenpair(j, EIGEN_REL_TOL)?.value)
}

/// Newton solve at fixed `λ` starting from `init`; non-convergence is
/// reported through `converged = false`.
pub fn solve_bvp(lambda: f64, init: &RadialField, params: &ProblemParams, grid: &RadialGrid) -> Result<BranchPoint> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be ≥ 0, got {lambda}")));
    }
    check_grid(grid, params)?;
    if init.grid.nodes() != grid.nodes() {
        return Err(Error::InvalidInput("initial guess lives on a different grid".into()));
    }
    let op = DiscreteOperator::new(grid)?;
    let fac = op.factor()?;
    let nw = Newton { op: &op, fac: &fac, p: params.p };
    let m = op.unknowns();
    let out = nw.run(lambda, &init.values[..m]);
    let mu1 = if out.converged { smallest_of(&nw.jacobian(lambda, &out.u))? } else { f64::NAN };
    let solution = full_field(grid, &out.u)?;
    Ok(BranchPoint {
        lambda,
        center_value: solution.center_value(),
        solution,
        mu1,
        converged: out.converged,
        newton_iters: out.iters,
    })
}

/// First eigenvalue of the discrete clamped bilaplacian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda1 {
    pub value: f64,
    pub eigenfunction: RadialField,
    /// `min φ / max φ` over the nodes; non-negative means one-signed.
    pub min_max_ratio: f64,
    pub one_signed: bool,
}

pub fn lambda1(n: u32, grid: &RadialGrid) -> Result<Lambda1> {
    if n < 5 {
        return Err(Error::InvalidInput(format!("n must be ≥ 5, got {n}")));
    }
    if grid.n != n {
        return Err(Error::InvalidInput(format!("grid built for n = {}", grid.n)));
    }
    let op = DiscreteOperator::new(grid)?;
    let e = smallest_eigenpair(op.scaled(), EIGEN_REL_TOL * 1e-3)?;
    let phi: Vec<f64> = e.vector.iter().zip(op.sqrt_volumes()).map(|(a, s)| a / s).collect();
    let mx = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = mn / mx;
    Ok(Lambda1 { value: e.value, eigenfunction: full_field(grid, &phi)?, min_max_ratio: ratio, one_signed: ratio >= 0.0 })
}

/// `μ₁` of the linearisation at a converged point.
pub fn mu1(point: &BranchPoint, params: &ProblemParams, grid: &RadialGrid) -> Result<f64> {
    if !point.converged {
        return Err(Error::InvalidInput("mu1 needs a converged branch point".into()));
    }
    check_grid(grid, params)?;
    let op = DiscreteOperator::new(grid)?;
    let fac = op.factor()?;
    let nw = Newton { op: &op, fac: &fac, p: params.p };
    smallest_of(&nw.jacobian(point.lambda, &point.solution.values[..op.unknowns()]))
}

/// λ-continuation from `u = 0` with a tangent predictor. A step is accepted
/// when Newton converges, `J` stays positive definite and the new iterate
/// dominates the previous one nodewise.
pub fn continue_branch(params: &ProblemParams, grid: &RadialGrid, policy: &StepPolicy) -> Result<BranchResult> {
    check_grid(grid, params)?;
    let op = DiscreteOperator::new(grid)?;
    let fac = op.factor()?;
    let nw = Newton { op: &op, fac: &fac, p: params.p };
    let m = op.unknowns();
    let l1 = smallest_eigenpair(op.scaled(), EIGEN_REL_TOL * 1e-3)?.value;

    let mut u = vec![0.0; m];
    let mut lambda = 0.0;
    let mut points = vec![BranchPoint {
        lambda: 0.0,
        solution: full_field(grid, &u)?,
        center_value: 0.0,
        mu1: l1,
        converged: true,
        newton_iters: 0,
    }];
    let mut step = policy.initial_step.unwrap_or(0.02 * l1 / params.p);
    let mut last_failed = step;
    let mut rejected = 0;
    let mut steps = 0;
    while steps < policy.max_steps {
        steps += 1;
        if lambda > 0.0 && step < policy.min_rel_step * lambda {
            break;
        }
        let j = nw.jacobian(lambda, &u);
        let g = nw.source(&u).ok_or_else(|| Error::NumericalFailure("branch left 1+u > 0".into()))?;
        let tangent = nw.solve_jacobian(&j, &g)?;
        let target = lambda + step;
        let guess: Vec<f64> = u.iter().zip(&tangent).map(|(a, t)| a + step * t).collect();
        let out = nw.run(target, &guess);
        let ok = out.converged
            && out.u.iter().zip(&u).all(|(a, b)| *a >= *b)
            && nw.jacobian(target, &out.u).cholesky().is_ok();
        if !ok {
            rejected += 1;
            last_failed = step;
            step *= policy.shrink;
            continue;
        }
        let mu = smallest_of(&nw.jacobian(target, &out.u))?;
        u = out.u;
        lambda = target;
        let solution = full_field(grid, &u)?;
        points.push(BranchPoint {
            lambda,
            center_value: solution.center_value(),
            solution,
            mu1: mu,
            converged: true,
            newton_iters: out.iters,
        });
        step *= policy.grow;
    }
    let mus: Vec<f64> = points.iter().map(|p| p.mu1).collect();
    let mu1_monotone = mus.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let tail = &mus[mus.len().saturating_sub(10)..];
    let fold_detected = rejected > 0
        && tail.len() >= 2
        && tail.windows(2).all(|w| w[1] < w[0])
        && *tail.last().unwrap() < 0.05 * l1;
    Ok(BranchResult {
        lambda_star_estimate: lambda + 0.5 * last_failed,
        points,
        fold_detected,
        mu1_monotone,
        nodes: grid.len(),
        max_spacing: grid.max_spacing(),
        lambda1: l1,
        final_step: last_failed,
        rejected_steps: rejected,
    })
}

/// Fold evidence gathered on a base grid and two successive doublings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldConfirmation {
    /// `(nodes, λ* estimate, fold detected)` per grid.
    pub runs: Vec<(usize, f64, bool)>,
    /// Relative change of `λ*` across the last refinement.
    pub last_relative_change: f64,
    pub confirmed: bool,
}

pub fn confirm_fold(params: &ProblemParams, base_nodes: usize, policy: &StepPolicy) -> Result<FoldConfirmation> {
    let mut runs = Vec::new();
    for k in 0..3 {
        let nodes = base_nodes << k;
        let grid = RadialGrid::default_for(nodes, params.n)?;
        let r = continue_branch(params, &grid, policy)?;
        runs.push((nodes, r.lambda_star_estimate, r.fold_detected));
    }
    let a = runs[1].1;
    let b = runs[2].1;
    let last_relative_change = ((b - a) / b).abs();
    let confirmed = runs.iter().all(|r| r.2);
    Ok(FoldConfirmation { runs, last_relative_change, confirmed })
}

/// Check of `u_λ ≤ r^{−α} − 1` over a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub n: u32,
    pub p: f64,
    /// `max(u − (r^{−α} − 1))` over all nodes and points; ≤ 0 means no violation.
    pub max_violation: f64,
    pub worst_lambda: f64,
    pub worst_r: f64,
    pub points_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

pub const UPPER_BOUND_TOL: f64 = 1e-9;

pub fn check_upper_bound(result: &BranchResult, params: &ProblemParams) -> Result<UpperBoundReport> {
    let pc = compute_pc(params.n)?;
    match pc {
        Some(pc) if params.p > pc => {}
        _ => {
            return Err(Error::Domain(format!(
                "upper bound needs n ≥ 13 and p > p_c(n); got n = {}, p = {}",
                params.n, params.p
            )))
        }
    }
    let alpha = params.alpha();
    let mut worst = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    let mut count = 0;
    for pt in result.points.iter().filter(|p| p.converged) {
        count += 1;
        for (&r, &u) in pt.solution.grid.nodes().iter().zip(&pt.solution.values) {
            // r^{−α} − 1 = expm1(−α ln r), exact at r = 1
            let v = u - (-alpha * r.ln()).exp_m1();
            if v > worst.0 {
                worst = (v, pt.lambda, r);
            }
        }
    }
    Ok(UpperBoundReport {
        n: params.n,
        p: params.p,
        max_violation: worst.0,
        worst_lambda: worst.1,
        worst_r: worst.2,
        points_checked: count,
        tolerance: UPPER_BOUND_TOL,
        passed: worst.0 <= UPPER_BOUND_TOL,
    })
}

/// Weak-form identity `∫ΔuΔφ = λ∫φ(1+u)^p` against `φ_j = (1−r²)²r^{2j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFormReport {
    /// Relative defect of the discrete identity `Σ V(Δ_h u)(Δ_h φ) = λ Σ Vφ(1+u)^p`.
    pub discrete: Vec<f64>,
    /// Relative defect with the exact `Δ²φ`, i.e. `Σ V u Δ²φ` on the left; `O(h²)`.
    pub continuum: Vec<f64>,
    pub max_discrete: f64,
    pub max_continuum: f64,
    pub passed: bool,
}

pub const WEAK_FORM_TOL: f64 = 1e-6;
pub const WEAK_FORM_TESTS: usize = 5;

pub fn test_function(j: usize) -> PowerSum {
    let e = 2.0 * j as f64;
    let terms = [(1.0, e), (-2.0, e + 2.0), (1.0, e + 4.0)];
    if j == 0 {
        PowerSum::new(terms[1..].iter().copied(), 1.0)
    } else {
        PowerSum::new(terms, 0.0)
    }
}

pub fn weak_form_check(point: &BranchPoint, params: &ProblemParams) -> Result<WeakFormReport> {
    let grid = &point.solution.grid;
    check_grid(grid, params)?;
    let op = DiscreteOperator::new(grid)?;
    let r = grid.nodes();
    let u = &point.solution.values;
    let vol = op.volumes();
    let m = op.unknowns();
    let mut discrete = Vec::new();
    let mut continuum = Vec::new();
    for j in 0..WEAK_FORM_TESTS {
        let phi = test_function(j);
        let bi = phi.bilaplacian(params.n);
        let pv: Vec<f64> = r.iter().map(|&x| phi.eval(x)).collect();
        let rhs: f64 = (0..m).map(|i| vol[i] * pv[i] * point.lambda * (params.p * (1.0 + u[i]).ln()).exp()).sum();
        let lhs = op.energy(u, &pv);
        let cont: f64 = (0..m).map(|i| vol[i] * u[i] * bi.eval(r[i])).sum();
        let scale = rhs.abs().max(f64::MIN_POSITIVE);
        discrete.push((lhs - rhs).abs() / scale);
        continuum.push((cont - rhs).abs() / scale);
    }
    let max_discrete = discrete.iter().cloned().fold(0.0, f64::max);
    let max_continuum = continuum.iter().cloned().fold(0.0, f64::max);
    Ok(WeakFormReport { discrete, continuum, max_discrete, max_continuum, passed: max_discrete <= WEAK_FORM_TOL })
}

/// `r^α u(r)` at the innermost node; a finite positive limit would indicate a
/// weakly singular profile. Reported only.
pub fn weak_singularity_diagnostic(point: &BranchPoint, params: &ProblemParams) -> f64 {
    let r0 = point.solution.grid.nodes()[0];
    r0.powf(params.alpha()) * point.solution.values[0]
}

/// `λ*` divided by `K0`.
pub fn lambda_star_over_k0(result: &BranchResult, params: &ProblemParams) -> Result<f64> {
    Ok(result.lambda_star_estimate / compute_k0(params.n, params.p)?)
}

/// Nodewise ordering `u_a ≤ u_b` up to `tol`.
pub fn dominated(a: &RadialField, b: &RadialField, tol: f64) -> bool {
    a.values.iter().zip(&b.values).all(|(x, y)| *x <= *y + tol)
}

/// Largest increase of `u` between consecutive nodes.
pub fn max_increase(u: &RadialField) -> f64 {
    u.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn sup_norm(u: &RadialField) -> f64 {
    norm_inf(&u.values)
}
