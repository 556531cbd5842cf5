//! Finite-volume radial bilaplacian with clamped boundary conditions.
//!
//! Cell `i` around node `r_i` spans `[f_{i−1}, f_i]` with midpoint faces and
//! `f_{−1} = 0`, `f_{N−1} = 1`, so cell volumes `V_i = (f_i^n − f_{i−1}^n)/n`
//! are exact. The discrete Laplacian `Δ_h = M⁻¹L` carries face fluxes
//! `c_j (u_{j+1} − u_j)` with `c_j = f_j^{n−1}/(r_{j+1} − r_j)`. The flux
//! through the origin vanishes with its `r^{n−1}` factor, which enforces
//! regularity, and the flux through `r = 1` is zero, which is `u'(1) = 0`.
//! Together with `u_{N−1} = 0` that gives the clamped operator
//!
//! ```text
//! A u = Δ_h(Δ_h u)   on unknowns u_0 … u_{N−2}
//! ```
//!
//! `A` is self-adjoint for `⟨u, v⟩ = Σ V_i u_i v_i`. The solver works with the
//! symmetric pentadiagonal `Ã = S A S⁻¹`, `S = diag(√V_i)`, assembled in the
//! log domain because `V_i` and `c_j` underflow quickly for large `n`.

use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, SymBand};
use crate::radial::grid::RadialGrid;

pub const MIN_NODES: usize = 50;

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: RadialGrid,
    ln_vol: Vec<f64>,
    ln_flux: Vec<f64>,
    sqrt_vol: Vec<f64>,
    scaled: SymBand,
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Assembles the clamped discrete bilaplacian on `grid`.
pub fn assemble_discrete_bilaplacian(grid: &RadialGrid) -> Result<DiscreteOperator> {
    DiscreteOperator::new(grid)
}

impl DiscreteOperator {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        let r = grid.nodes();
        let nn = r.len();
        if nn < MIN_NODES {
            return Err(Error::InvalidInput(format!("operator needs at least {MIN_NODES} nodes, got {nn}")));
        }
        let nd = grid.n as f64;
        let mut faces: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        faces.push(1.0);
        let mut ln_vol = Vec::with_capacity(nn);
        for i in 0..nn {
            let lf = faces[i].ln();
            let lv = if i == 0 {
                nd * lf - nd.ln()
            } else {
                let q = nd * (faces[i - 1] / faces[i]).ln();
                let frac = -q.exp_m1();
                if !(frac > 0.0) {
                    return Err(Error::NumericalFailure(format!("degenerate cell {i}")));
                }
                nd * lf + frac.ln() - nd.ln()
            };
            ln_vol.push(lv);
        }
        let mut ln_flux = Vec::with_capacity(nn - 1);
        for j in 0..nn - 1 {
            let h = r[j + 1] - r[j];
            if !(h > 0.0) {
                return Err(Error::NumericalFailure(format!("duplicate nodes at {j}")));
            }
            ln_flux.push((nd - 1.0) * faces[j].ln() - h.ln());
        }

        // C = M^{-1/2} L[:, 0..N−1] S^{-1}, stored per row k as (col, value)
        let m = nn - 1;
        let lv = |k: usize| ln_vol[k];
        let mut crow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn];
        for k in 0..nn {
            let ldiag = match (k > 0, k < nn - 1) {
                (true, true) => ln_add(ln_flux[k - 1], ln_flux[k]),
                (false, true) => ln_flux[k],
                (true, false) => ln_flux[k - 1],
                _ => unreachable!(),
            };
            if k > 0 {
                crow[k].push((k - 1, (ln_flux[k - 1] - 0.5 * (lv(k) + lv(k - 1))).exp()));
            }
            if k < m {
                crow[k].push((k, -(ldiag - lv(k)).exp()));
            }
            if k + 1 < m {
                crow[k].push((k + 1, (ln_flux[k] - 0.5 * (lv(k) + lv(k + 1))).exp()));
            }
        }
        let mut scaled = SymBand::zeros(m, 2);
        for row in &crow {
            for &(i, ci) in row {
                for &(j, cj) in row {
                    if j >= i {
                        let v = scaled.get(i, j) + ci * cj;
                        scaled.set(i, j, v);
                    }
                }
            }
        }
        let sqrt_vol = ln_vol[..m].iter().map(|l| (0.5 * l).exp()).collect();
        Ok(Self { grid: grid.clone(), ln_vol, ln_flux, sqrt_vol, scaled })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Number of unknowns (`N − 1`; the node at `r = 1` is fixed to zero).
    pub fn unknowns(&self) -> usize {
        self.sqrt_vol.len()
    }

    /// Cell volumes `V_i` of the unknowns.
    pub fn volumes(&self) -> Vec<f64> {
        self.ln_vol[..self.unknowns()].iter().map(|l| l.exp()).collect()
    }

    /// `√V_i` for the unknowns.
    pub fn sqrt_volumes(&self) -> &[f64] {
        &self.sqrt_vol
    }

    /// `Ã = S A S⁻¹`, symmetric pentadiagonal.
    pub fn scaled(&self) -> &SymBand {
        &self.scaled
    }

    /// `Δ_h u` for a full nodal vector (no boundary value imposed).
    pub fn laplacian_full(&self, u: &[f64]) -> Vec<f64> {
        let nn = self.grid.len();
        assert_eq!(u.len(), nn);
        (0..nn)
            .map(|k| {
                let mut s = 0.0;
                if k > 0 {
                    s += (self.ln_flux[k - 1] - self.ln_vol[k]).exp() * (u[k - 1] - u[k]);
                }
                if k + 1 < nn {
                    s += (self.ln_flux[k] - self.ln_vol[k]).exp() * (u[k + 1] - u[k]);
                }
                s
            })
            .collect()
    }

    /// `Δ_h Δ_h u` on all nodes. Rows away from `r = 1` approximate `Δ²u`
    /// for any smooth radial `u`; the last rows encode the clamped closure.
    pub fn apply_full(&self, u: &[f64]) -> Vec<f64> {
        self.laplacian_full(&self.laplacian_full(u))
    }

    /// `A u` for the unknowns, with `u(1) = 0`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = u.iter().zip(&self.sqrt_vol).map(|(a, s)| a * s).collect();
        self.scaled.matvec(&v).iter().zip(&self.sqrt_vol).map(|(a, s)| a / s).collect()
    }

    pub fn factor(&self) -> Result<ScaledFactor> {
        Ok(ScaledFactor { chol: self.scaled.cholesky()?, sqrt_vol: self.sqrt_vol.clone() })
    }

    /// Solves `A u = f` for the unknowns.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(f))
    }

    /// `⟨u, v⟩ = Σ V_i u_i v_i` over the unknowns.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.sqrt_vol).map(|((a, b), s)| a * b * s * s).sum()
    }

    /// Discrete bilinear form `Σ_k V_k (Δ_h u)_k (Δ_h φ)_k` over all cells
    /// for full nodal vectors.
    pub fn energy(&self, u: &[f64], phi: &[f64]) -> f64 {
        let lu = self.laplacian_full(u);
        let lp = self.laplacian_full(phi);
        lu.iter().zip(&lp).zip(&self.ln_vol).map(|((a, b), l)| a * b * l.exp()).sum()
    }
}

/// Cholesky factor of `Ã` with the scaling needed to solve `A u = f`.
#[derive(Debug, Clone)]
pub struct ScaledFactor {
    chol: BandCholesky,
    sqrt_vol: Vec<f64>,
}

impl ScaledFactor {
    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        let b: Vec<f64> = f.iter().zip(&self.sqrt_vol).map(|(a, s)| a * s).collect();
        self.chol.solve(&b).iter().zip(&self.sqrt_vol).map(|(a, s)| a / s).collect()
    }
}

/// Outcome of the discrete inverse-positivity check.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PositivityReport {
    pub nodes: usize,
    pub n: u32,
    /// Smallest entry of `A⁻¹`.
    pub min_entry: f64,
    /// Smallest `G_ij/√(G_ii G_jj)` of the symmetric Green matrix.
    pub min_normalized: f64,
    pub positive: bool,
}

pub const POSITIVITY_TOL: f64 = -1e-10;

/// Dense inversion of the clamped operator; feasible up to 400 nodes.
pub fn check_discrete_positivity(op: &DiscreteOperator) -> Result<PositivityReport> {
    let nodes = op.grid().len();
    if nodes > 400 {
        return Err(Error::InvalidInput(format!("dense inverse limited to 400 nodes, got {nodes}")));
    }
    let dense = op.scaled().to_dense();
    let inv = dense
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("scaled operator is not positive definite".into()))?
        .inverse();
    let s = op.sqrt_volumes();
    let m = op.unknowns();
    let mut min_entry = f64::INFINITY;
    let mut min_norm = f64::INFINITY;
    for i in 0..m {
        for j in 0..m {
            let g = inv[(i, j)];
            if !g.is_finite() {
                return Err(Error::NumericalFailure("non-finite inverse entry".into()));
            }
            // A⁻¹ = S⁻¹ Ã⁻¹ S
            min_entry = min_entry.min(g * s[j] / s[i]);
            min_norm = min_norm.min(g / (inv[(i, i)] * inv[(j, j)]).sqrt());
        }
    }
    Ok(PositivityReport {
        nodes,
        n: op.grid().n,
        min_entry,
        min_normalized: min_norm,
        positive: min_norm >= POSITIVITY_TOL && min_entry >= POSITIVITY_TOL,
    })
}
