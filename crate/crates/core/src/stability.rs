//! Hardy-Rellich weights and the pointwise stability certificate.
//!
//! Stability of `ω` at `β = β_mult·K0` follows from
//! `pβ(1+ω)^{p−1} ≤ W(r)` on `(0,1)` together with `∫(Δφ)² ≥ ∫Wφ²`.
//! Everything is evaluated on the scale-free gap
//!
//! ```text
//! D(r) = r⁴W(r) − pβ r⁴(1+ω(r))^{p−1},
//! ```
//!
//! which is bounded at both ends for the classical weight and tends to `+∞`
//! at `r = 1` for the improved one.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{compute_hn, ProblemParams};
use crate::precision::{Ext128, Ext256, Precision, Real};
use crate::quadrature;
use crate::radial::PowerSum;
use crate::report::{CertificateReport, Method, Verdict};
use crate::subsolution::classify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// `Hn / r⁴`.
    Classical,
    /// The two-term weight with the `0.9` factor; `r⁴W → Hn` at the origin
    /// and `W → ∞` at the boundary.
    Improved,
}

impl std::str::FromStr for WeightKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classical" => Ok(WeightKind::Classical),
            "improved" => Ok(WeightKind::Improved),
            o => Err(format!("unknown weight `{o}` (expected classical|improved)")),
        }
    }
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightKind::Classical => "classical",
            WeightKind::Improved => "improved",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub n: u32,
}

impl WeightFunction {
    pub fn new(kind: WeightKind, n: u32) -> Result<Self> {
        if n < 5 {
            return Err(Error::InvalidInput(format!("weights need n ≥ 5, got {n}")));
        }
        Ok(Self { kind, n })
    }

    pub fn classical(n: u32) -> Result<Self> {
        Self::new(WeightKind::Classical, n)
    }

    pub fn improved(n: u32) -> Result<Self> {
        Self::new(WeightKind::Improved, n)
    }

    /// `((n−2)²(n−4)²/16, (n−1)(n−4)²/4)`; they sum to `Hn`.
    pub fn improved_coeffs(n: u32) -> (f64, f64) {
        let n = n as f64;
        let q = (n - 4.0) * (n - 4.0);
        ((n - 2.0) * (n - 2.0) * q / 16.0, (n - 1.0) * q / 4.0)
    }

    /// `r⁴W(r)`, evaluated with `1 − r^k = −expm1(k ln r)` so that the
    /// boundary blow-up is resolved to full relative accuracy.
    pub fn r4w<T: Real>(&self, r: &T) -> T {
        match self.kind {
            WeightKind::Classical => T::from_f64(compute_hn(self.n).unwrap_or(f64::NAN)),
            WeightKind::Improved => {
                let (a, b) = Self::improved_coeffs(self.n);
                let nh = self.n as f64 / 2.0;
                let lr = r.ln();
                let one = T::from_f64(1.0);
                let s1 = one.clone() - T::from_f64(0.9) * (T::from_f64(nh - 1.0) * lr.clone()).exp();
                let s2 = one_minus_exp(&(T::from_f64(nh - 2.0) * lr));
                T::from_f64(a) / (s1 * s2.clone()) + T::from_f64(b) / s2
            }
        }
    }

    /// `W(r)` for `r ∈ (0,1)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!("weight defined on (0,1), got r = {r}")));
        }
        Ok(self.r4w(&r) / r.powi(4))
    }
}

/// `1 − e^t` for `t ≤ 0`.
fn one_minus_exp<T: Real>(t: &T) -> T {
    if T::PRECISION == Precision::Double {
        T::from_f64(-t.to_f64().exp_m1())
    } else {
        T::from_f64(1.0) - t.exp()
    }
}

/// `W(r)`; free-function form of [`WeightFunction::eval`].
pub fn weight_eval(w: &WeightFunction, r: f64) -> Result<f64> {
    w.eval(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpec {
    pub params: ProblemParams,
    /// `β` in units of `K0`.
    pub beta_mult: f64,
    pub weight: WeightFunction,
}

impl StabilitySpec {
    pub fn new(params: ProblemParams, beta_mult: f64, kind: WeightKind) -> Result<Self> {
        if !(beta_mult.is_finite() && beta_mult >= 0.0) {
            return Err(Error::InvalidInput(format!("beta multiplier must be ≥ 0, got {beta_mult}")));
        }
        if !params.supercritical() {
            return Err(Error::Domain(format!(
                "stability certificate needs p > (n+4)/(n-4); got n = {}, p = {}",
                params.n, params.p
            )));
        }
        Ok(Self { params, beta_mult, weight: WeightFunction::new(kind, params.n)? })
    }
}

/// Gap `D(r)` at a working precision.
struct Gap<T: Real> {
    w: WeightFunction,
    omega: PowerSum,
    pbk: T,
    pm1: T,
}

impl<T: Real> Gap<T> {
    fn new(spec: &StabilitySpec, omega: &PowerSum) -> Self {
        let p = T::from_f64(spec.params.p);
        let k0 = crate::params::k0_real(spec.params.n, &p);
        Self {
            w: spec.weight,
            omega: omega.clone(),
            pbk: p.clone() * T::from_f64(spec.beta_mult) * k0,
            pm1: p - T::from_f64(1.0),
        }
    }

    /// `r⁴(1+ω)^{p−1}`.
    fn load(&self, r: &T) -> T {
        let one_plus = self.omega.eval_real(r) + T::from_f64(1.0);
        (self.pm1.clone() * one_plus.ln() + T::from_f64(4.0) * r.ln()).exp()
    }

    fn eval(&self, r: &T) -> T {
        self.w.r4w(r) - self.pbk.clone() * self.load(r)
    }
}

fn gap_at(spec: &StabilitySpec, omega: &PowerSum, r: f64, prec: Precision) -> f64 {
    match prec {
        Precision::Double => Gap::<f64>::new(spec, omega).eval(&r),
        Precision::Extended => Gap::<Ext128>::new(spec, omega).eval(&Ext128::from_f64(r)).to_f64(),
        Precision::High => Gap::<Ext256>::new(spec, omega).eval(&Ext256::from_f64(r)).to_f64(),
    }
}

/// Scan points: log-spaced toward both ends plus a uniform interior layer.
fn scan_points() -> Vec<f64> {
    let mut r = Vec::new();
    let k = 1024;
    for i in 0..k {
        let t = -14.0 + 13.0 * i as f64 / k as f64;
        r.push(10f64.powf(t));
        r.push(1.0 - 10f64.powf(t));
    }
    for i in 1..4096 {
        r.push(i as f64 / 4096.0);
    }
    r.retain(|x| *x > 0.0 && *x < 1.0);
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Certificate for `pβ(1+ω)^{p−1} ≤ W` on `(0,1)`.
pub fn certify_stability(spec: &StabilitySpec, omega: &PowerSum) -> Result<CertificateReport> {
    certify_stability_at(spec, omega, Precision::Double)
}

pub fn certify_stability_at(spec: &StabilitySpec, omega: &PowerSum, min_precision: Precision) -> Result<CertificateReport> {
    let p = spec.params.p;
    let hn = compute_hn(spec.params.n)?;
    let (lead_c, lead_e) = *omega
        .terms()
        .first()
        .ok_or_else(|| Error::InvalidInput("omega has no singular term".into()))?;
    if !(lead_c > 0.0) || ((lead_e * (p - 1.0)) + 4.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "omega must lead with c·r^(-4/(p-1)), found {lead_c}·r^{lead_e}"
        )));
    }
    if (omega.eval(1.0)).abs() > 1e-12 {
        return Err(Error::InvalidInput("omega must vanish at r = 1".into()));
    }
    let gap = Gap::<f64>::new(spec, omega);
    let pbk = gap.pbk;

    // (i) r → 0: r⁴W → Hn and r⁴(1+ω)^{p−1} → c^{p−1}
    let d0 = hn - pbk * ((p - 1.0) * lead_c.ln()).exp();
    // (iii) r → 1: classical stays finite, improved diverges to +∞
    let d1 = match spec.weight.kind {
        WeightKind::Classical => hn - pbk,
        WeightKind::Improved => f64::INFINITY,
    };

    // (ii) interior scan with local refinement around the smallest sample
    let pts = scan_points();
    let vals: Vec<f64> = pts.iter().map(|r| gap.eval(r)).collect();
    let i = (0..pts.len()).fold(0, |b, i| if vals[i] < vals[b] { i } else { b });
    let lo = if i == 0 { pts[0] * 0.5 } else { pts[i - 1] };
    let hi = if i + 1 == pts.len() { 0.5 * (1.0 + pts[i]) } else { pts[i + 1] };
    let (r_min, d_min) = golden_min(|r| gap.eval(&r), lo, hi);
    let (r_scan, d_scan) = if vals[i] < d_min { (pts[i], vals[i]) } else { (r_min, d_min) };

    // endpoint limits win ties with nearby scan samples
    let tie = 1e-10 * hn;
    let mut cands = vec![(d0, 0.0)];
    if d1.is_finite() {
        cands.push((d1, 1.0));
    }
    cands.push((d_scan, r_scan));
    let (worst, loc) = cands.into_iter().fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 - tie { b } else { a });

    let scale = hn + pbk * gap.load(&loc.clamp(1e-300, 1.0)).max(1.0);
    let needs_ext = p * lead_c.ln().abs() > crate::subsolution::LADDER_TRIGGER;
    let mut precision = min_precision;
    if needs_ext && precision < Precision::Extended {
        precision = Precision::Extended;
    }
    let eval_prec = |prec: Precision| -> f64 {
        if loc == 0.0 {
            d0
        } else if loc == 1.0 {
            d1
        } else {
            gap_at(spec, omega, loc, prec)
        }
    };
    let mut margin = worst;
    let mut error = 64.0 * f64::EPSILON * scale * (1.0 + p.ln());
    let mut verdict = classify(margin, error);
    loop {
        if precision > Precision::Double && loc > 0.0 && loc < 1.0 {
            let hv = eval_prec(precision);
            error = (hv - worst).abs() + 64.0 * precision.epsilon() * scale * (1.0 + p.ln());
            margin = hv;
            verdict = classify(margin, error);
        }
        match (verdict, precision.next()) {
            (Verdict::Inconclusive, Some(next)) if loc > 0.0 && loc < 1.0 => precision = next,
            _ => break,
        }
    }

    let mut details = BTreeMap::new();
    details.insert("limit_r0".into(), d0);
    if d1.is_finite() {
        details.insert("limit_r1".into(), d1);
    }
    details.insert("scan_min".into(), d_scan);
    details.insert("scan_min_r".into(), r_scan);
    details.insert("Hn".into(), hn);
    details.insert("p_beta_K0".into(), pbk);
    details.insert("relative_margin".into(), margin / hn);
    let mut notes = vec!["stability exponent p-1".to_string()];
    if spec.beta_mult == 0.0 {
        notes.push("beta = 0: left side vanishes".into());
    }
    Ok(CertificateReport {
        inequality: "stability".into(),
        verdict,
        worst_margin: margin,
        worst_location: loc,
        location_variable: "r".into(),
        margin_error: error,
        method: Method::LimitAndScan,
        precision,
        n: spec.params.n,
        p,
        m: spec.params.m,
        multiplier: spec.beta_mult,
        details,
        notes,
    })
}

/// Minimum Rayleigh ratio `∫(Δφ)² / ∫Wφ²` over random clamped test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrSample {
    pub weight: WeightKind,
    pub n: u32,
    pub trials: usize,
    pub seed: u64,
    pub min_ratio: f64,
    pub worst_trial: usize,
    /// Coefficients of `q` (ascending powers) for the worst trial.
    pub worst_q: Vec<f64>,
    /// Trials whose quadrature did not converge, with the reason.
    pub failures: Vec<(usize, String)>,
}

pub const HR_QUAD_TOL: f64 = 1e-10;

/// Polynomial coefficients (ascending) of `(1 − r)² q(r)`.
fn clamp_poly(q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; q.len() + 2];
    for (j, c) in q.iter().enumerate() {
        out[j] += c;
        out[j + 1] -= 2.0 * c;
        out[j + 2] += c;
    }
    out
}

fn poly_eval(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |a, &b| a * r + b)
}

/// `Δφ` for `φ = Σ c_j r^j`: `Σ c_j j(j+n−2) r^{j−2}`.
fn poly_laplacian(c: &[f64], n: u32, r: f64) -> f64 {
    let nf = n as f64;
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &cj)| {
            let j = j as f64;
            cj * j * (j + nf - 2.0) * r.powf(j - 2.0)
        })
        .sum()
}

/// `(∫(Δφ)² r^{n−1}, ∫ r⁴W φ² r^{n−5})` on `(0,1)` for a polynomial `φ`.
pub fn rayleigh_parts(w: &WeightFunction, phi: &[f64]) -> Result<(f64, f64)> {
    let n = w.n;
    let nf = n as f64;
    let num = quadrature::integrate(
        |r| {
            let l = poly_laplacian(phi, n, r);
            l * l * r.powf(nf - 1.0)
        },
        0.0,
        1.0,
        HR_QUAD_TOL,
        0.0,
    )?;
    let den = quadrature::integrate(
        |r| {
            let f = poly_eval(phi, r);
            w.r4w(&r) * f * f * r.powf(nf - 5.0)
        },
        0.0,
        1.0,
        HR_QUAD_TOL,
        0.0,
    )?;
    Ok((num.value, den.value))
}

/// Random clamped test functions `φ = (1−r)² q(r)`, `deg q ≤ 8`, with
/// per-trial ChaCha streams derived from `seed`.
pub fn sample_hardy_rellich(w: &WeightFunction, trials: usize, seed: u64) -> Result<HrSample> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    let results: Vec<(usize, Vec<f64>, Result<f64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let deg = rng.gen_range(0..=8usize);
            let q: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ratio = rayleigh_parts(w, &clamp_poly(&q)).map(|(a, b)| a / b);
            (t, q, ratio)
        })
        .collect();
    let mut min_ratio = f64::INFINITY;
    let mut worst_trial = 0;
    let mut worst_q = Vec::new();
    let mut failures = Vec::new();
    for (t, q, r) in results {
        match r {
            Ok(v) if v.is_finite() => {
                if v < min_ratio {
                    min_ratio = v;
                    worst_trial = t;
                    worst_q = q;
                }
            }
            Ok(v) => failures.push((t, format!("non-finite ratio {v}"))),
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    Ok(HrSample { weight: w.kind, n: w.n, trials, seed, min_ratio, worst_trial, worst_q, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsolution::{build_omega, SubsolutionSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn stab(n: u32, p: f64, m: f64, b: f64, k: WeightKind) -> (StabilitySpec, PowerSum) {
        let params = ProblemParams::new(n, p, m).unwrap();
        let s = StabilitySpec::new(params, b, k).unwrap();
        let w = build_omega(&SubsolutionSpec::new(params, 1.0).unwrap());
        (s, w)
    }

    #[test]
    fn weight_examples() {
        let c = WeightFunction::classical(13).unwrap();
        assert_relative_eq!(c.eval(0.5).unwrap(), 13689.0, max_relative = 1e-14);
        for n in [5u32, 13, 31] {
            let i = WeightFunction::improved(n).unwrap();
            let c = WeightFunction::classical(n).unwrap();
            assert!(i.eval(0.999).unwrap() > c.eval(0.999).unwrap());
            let (a, b) = WeightFunction::improved_coeffs(n);
            assert_relative_eq!(a + b, compute_hn(n).unwrap(), max_relative = 1e-14);
        }
        assert!(c.eval(0.0).is_err() && c.eval(1.0).is_err());
    }

    #[test]
    fn improved_small_r_limit() {
        for n in [13u32, 31] {
            let w = WeightFunction::improved(n).unwrap();
            let hn = compute_hn(n).unwrap();
            let f = |r: f64| w.r4w(&r);
            let (a, b, c) = (f(1e-3), f(1e-4), f(1e-5));
            // the correction decays like r^{n/2−2}; Richardson on the last pair
            let k = (n as f64) / 2.0 - 2.0;
            let rich = (c * 10f64.powf(k) - b) / (10f64.powf(k) - 1.0);
            assert!((a - hn).abs() >= (c - hn).abs());
            assert_relative_eq!(rich, hn, max_relative = 1e-12);
        }
    }

    #[test]
    fn weight_domination_near_origin() {
        for n in [13u32, 31] {
            let i = WeightFunction::improved(n).unwrap();
            let c = WeightFunction::classical(n).unwrap();
            for r in [1e-6, 1e-4, 1e-3, 5e-3, 1e-2] {
                assert!(i.eval(r).unwrap() / c.eval(r).unwrap() >= 0.99);
            }
        }
    }

    #[test]
    fn extended_weight_agrees() {
        let w = WeightFunction::improved(13).unwrap();
        for r in [1e-3, 0.5, 0.999999] {
            assert_relative_eq!(w.r4w(&Ext128::from_f64(r)).to_f64(), w.r4w(&r), max_relative = 1e-12);
        }
    }

    #[test]
    fn classical_m2_reproduces_dimension_threshold() {
        let b = std::f64::consts::E.powi(2) + 0.1;
        let (s, w) = stab(13, 500.0, 2.0, b, WeightKind::Classical);
        let r = certify_stability(&s, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        assert_eq!(r.worst_location, 1.0);
        for n in [33u32, 40] {
            let (s, w) = stab(n, 500.0, 2.0, b, WeightKind::Classical);
            assert_eq!(certify_stability(&s, &w).unwrap().verdict, Verdict::Certified, "n = {n}");
        }
    }

    #[test]
    fn classical_gap_at_boundary_matches_closed_form() {
        let (s, w) = stab(13, 500.0, 2.0, std::f64::consts::E.powi(2), WeightKind::Classical);
        let r = certify_stability(&s, &w).unwrap();
        let k0 = crate::params::compute_k0(13, 500.0).unwrap();
        assert_relative_eq!(r.worst_margin, 855.5625 - 500.0 * std::f64::consts::E.powi(2) * k0, max_relative = 1e-12);
    }

    #[test]
    fn zero_beta_certified() {
        for k in [WeightKind::Classical, WeightKind::Improved] {
            let (s, w) = stab(13, 30.0, 3.5, 0.0, k);
            assert_eq!(certify_stability(&s, &w).unwrap().verdict, Verdict::Certified);
        }
    }

    #[test]
    fn improved_table_rows() {
        // frozen outcomes of the improved-weight scan at m = 3.5
        let (s, w) = stab(13, 30.0, 3.5, 2.15, WeightKind::Improved);
        assert_eq!(certify_stability(&s, &w).unwrap().verdict, Verdict::Certified);
        let (s, w) = stab(20, 50.0, 3.5, 10.0, WeightKind::Improved);
        let r = certify_stability(&s, &w).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted);
        assert!(r.worst_location > 0.6 && r.worst_location < 0.95, "{}", r.worst_location);
        let (s, w) = stab(28, 100.0, 3.5, 10.0, WeightKind::Improved);
        assert_eq!(certify_stability(&s, &w).unwrap().verdict, Verdict::Certified);
    }

    #[test]
    fn omega_shape_validated() {
        let params = ProblemParams::new(13, 30.0, 3.5).unwrap();
        let s = StabilitySpec::new(params, 1.0, WeightKind::Classical).unwrap();
        let bad = PowerSum::new([(1.0, -1.0)], -1.0);
        assert!(certify_stability(&s, &bad).is_err());
    }

    #[test]
    fn plate_function_ratio_closed_form() {
        // φ = (1−r²)²: Δφ = −4n + 4(n+2)r², classical denominator Hn∫(1−r²)⁴r^{n−5}
        for n in [13u32, 31] {
            let nf = n as f64;
            let phi = [1.0, 0.0, -2.0, 0.0, 1.0];
            let w = WeightFunction::classical(n).unwrap();
            let (num, den) = rayleigh_parts(&w, &phi).unwrap();
            // exact: ∫(a + b r²)² r^{n−1} with a = −4n, b = 4(n+2)
            let (a, b) = (-4.0 * nf, 4.0 * (nf + 2.0));
            let num_exact = a * a / nf + 2.0 * a * b / (nf + 2.0) + b * b / (nf + 4.0);
            let binom = [1.0, -4.0, 6.0, -4.0, 1.0];
            let den_exact = compute_hn(n).unwrap()
                * binom.iter().enumerate().map(|(k, c)| c / (nf - 4.0 + 2.0 * k as f64)).sum::<f64>();
            assert_relative_eq!(num, num_exact, max_relative = 1e-10);
            assert_relative_eq!(den, den_exact, max_relative = 1e-10);
            assert!(num / den >= 1.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let w = WeightFunction::improved(13).unwrap();
        let a = sample_hardy_rellich(&w, 16, 7).unwrap();
        let b = sample_hardy_rellich(&w, 16, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert!(a.min_ratio >= 1.0 - 1e-6);
        assert!(sample_hardy_rellich(&w, 0, 7).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn certification_monotone_in_beta(n in 13u32..32, p in 30.0f64..1000.0, b in 0.5f64..12.0, db in 0.01f64..2.0) {
            prop_assume!(b - db > 0.0);
            for k in [WeightKind::Classical, WeightKind::Improved] {
                let (s, w) = stab(n, p, 3.5, b, k);
                let hi = certify_stability(&s, &w).unwrap();
                let (s2, _) = stab(n, p, 3.5, b - db, k);
                let lo = certify_stability(&s2, &w).unwrap();
                if hi.verdict == Verdict::Certified {
                    prop_assert_eq!(lo.verdict, Verdict::Certified);
                }
                prop_assert!(lo.worst_margin >= hi.worst_margin);
            }
        }
    }
}
