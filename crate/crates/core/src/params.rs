//! Scalar constants of the problem.
//!
//! Every derived quantity is a pure function of `(n, p, m)`. The generic
//! `*_real` variants let the certifiers recompute a constant at the working
//! precision they are running in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::Real;

/// Dimension `n`, nonlinearity exponent `p` and auxiliary exponent `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub p: f64,
    pub m: f64,
}

impl ProblemParams {
    /// Validated constructor: `n ≥ 5`, `p > 1`, `m > 0`.
    pub fn new(n: u32, p: f64, m: f64) -> Result<Self> {
        if n < 5 {
            return Err(Error::InvalidInput(format!("dimension n = {n} must be at least 5")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidInput(format!("exponent p = {p} must be finite and > 1")));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidInput(format!("auxiliary exponent m = {m} must be > 0")));
        }
        Ok(Self { n, p, m })
    }

    /// `p > (n+4)/(n−4)`.
    pub fn supercritical(&self) -> bool {
        is_supercritical(self.n, self.p)
    }

    pub fn alpha(&self) -> f64 {
        4.0 / (self.p - 1.0)
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        DerivedConstants::compute(self)
    }
}

pub fn is_supercritical(n: u32, p: f64) -> bool {
    n > 4 && p > sobolev_exponent(n)
}

/// `(n+4)/(n−4)`.
pub fn sobolev_exponent(n: u32) -> f64 {
    let n = n as f64;
    (n + 4.0) / (n - 4.0)
}

/// All derived constants of one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub alpha: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "Hn")]
    pub hn: f64,
    pub pc: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: f64,
    pub a1: f64,
    pub a2: f64,
}

impl DerivedConstants {
    pub fn compute(params: &ProblemParams) -> Result<Self> {
        let (a1, a2) = compute_coeffs(params.m, params.p)?;
        Ok(Self {
            alpha: compute_alpha(params.p)?,
            k0: compute_k0(params.n, params.p)?,
            hn: compute_hn(params.n)?,
            pc: compute_pc(params.n)?,
            k1: compute_k1(params.m, params.n)?,
            a1,
            a2,
        })
    }
}

/// `alpha = 4/(p−1)`, the decay exponent of the singular profile.
pub fn compute_alpha(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("alpha needs p > 1, got {p}")));
    }
    Ok(4.0 / (p - 1.0))
}

/// Eigenvalue of the exact singular solution `r^{−alpha} − 1`:
/// `alpha(alpha+2)(n−2−alpha)(n−4−alpha)`.
pub fn compute_k0(n: u32, p: f64) -> Result<f64> {
    if n < 5 {
        return Err(Error::Domain(format!("K0 needs n ≥ 5, got {n}")));
    }
    if !is_supercritical(n, p) {
        return Err(Error::Domain(format!(
            "K0 needs p > (n+4)/(n-4) = {:.6}, got p = {p}",
            sobolev_exponent(n)
        )));
    }
    Ok(k0_real::<f64>(n, &p))
}

/// `K0` at any working precision. No domain checks.
pub fn k0_real<T: Real>(n: u32, p: &T) -> T {
    let one = T::from_f64(1.0);
    let a = T::from_f64(4.0) / (p.clone() - one);
    let nn = T::from_f64(n as f64);
    a.clone()
        * (a.clone() + T::from_f64(2.0))
        * (nn.clone() - T::from_f64(2.0) - a.clone())
        * (nn - T::from_f64(4.0) - a)
}

/// `(alpha+4)(alpha+2)(n−2−alpha)(n−4−alpha)`, which equals `p·K0`.
pub fn p_times_k0(n: u32, p: f64) -> f64 {
    let a = 4.0 / (p - 1.0);
    let n = n as f64;
    (a + 4.0) * (a + 2.0) * (n - 2.0 - a) * (n - 4.0 - a)
}

/// The literal printed form `8(p+1)/(p−1)·[n − 2(p+1)/(p−1)]·[n − 4p/(p−1)]`.
/// It is off from the true singular eigenvalue by a factor `p−1`; kept only
/// for reporting next to the corrected value.
pub fn k0_printed(n: u32, p: f64) -> f64 {
    let n = n as f64;
    8.0 * (p + 1.0) / (p - 1.0) * (n - 2.0 * (p + 1.0) / (p - 1.0)) * (n - 4.0 * p / (p - 1.0))
}

/// Optimal Hardy-Rellich constant `(n(n−4)/4)²`.
pub fn compute_hn(n: u32) -> Result<f64> {
    if n < 5 {
        return Err(Error::Domain(format!("Hn needs n ≥ 5, got {n}")));
    }
    let n = n as f64;
    let h = n * (n - 4.0) / 4.0;
    Ok(h * h)
}

/// Closed-form critical exponent, or `None` when its denominator is not
/// positive (every `n ≤ 12`).
pub fn compute_pc(n: u32) -> Result<Option<f64>> {
    let hn = compute_hn(n)?;
    let nf = n as f64;
    let s = (4.0 + nf * nf - 4.0 * (nf * nf + hn).sqrt()).sqrt();
    let den = nf - 6.0 - s;
    if !(den > 0.0) {
        return Ok(None);
    }
    Ok(Some((nf + 2.0 - s) / den))
}

/// `K1 = m(m−2)(m+n−2)(m+n−4)`, the coefficient in `Δ²r^m = K1 r^{m−4}`.
pub fn compute_k1(m: f64, n: u32) -> Result<f64> {
    if n < 5 {
        return Err(Error::Domain(format!("K1 needs n ≥ 5, got {n}")));
    }
    if !(m > 0.0) {
        return Err(Error::Domain(format!("K1 needs m > 0, got {m}")));
    }
    let n = n as f64;
    Ok(m * (m - 2.0) * (m + n - 2.0) * (m + n - 4.0))
}

/// `(a1, a2) = (m, alpha)/(m + alpha)`, chosen so that `ω(1) = ω'(1) = 0`.
pub fn compute_coeffs(m: f64, p: f64) -> Result<(f64, f64)> {
    let alpha = compute_alpha(p)?;
    if !(m > 0.0) {
        return Err(Error::Domain(format!("coefficients need m > 0, got {m}")));
    }
    let s = m + alpha;
    Ok((m / s, alpha / s))
}

/// `(a1, a2)` at any working precision.
pub fn coeffs_real<T: Real>(m: &T, p: &T) -> (T, T) {
    let alpha = T::from_f64(4.0) / (p.clone() - T::from_f64(1.0));
    let s = m.clone() + alpha.clone();
    (m.clone() / s.clone(), alpha / s)
}
