//! The two-term sub-solution `ω = a1 r^{−alpha} + a2 r^m − 1` and its
//! certificate.
//!
//! With `x = r^{m+alpha}` the residual factors as
//!
//! ```text
//! λ′K0(1+ω)^p − Δ²ω = K0 r^{−alpha·p} (a1 + a2 x)^p [λ′ − H(x)],
//! H(x) = (a1 + a2 x)^{−p} (a1 + a2 (K1/K0) x),
//! ```
//!
//! so the inequality holds on `(0,1)` exactly when `λ′ ≥ sup_{[0,1]} H`.
//! `H'` has the sign of an affine function of `x`, so `H` has at most one
//! interior critical point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{self, DerivedConstants, ProblemParams};
use crate::precision::{Ext128, Ext256, Precision, Real};
use crate::radial::{PowerSum, RadialField, RadialGrid};
use crate::report::{CertificateReport, Method, Verdict};

/// Scan resolution for `sup H`.
pub const SCAN_POINTS: usize = 8192;
/// Retry at extended precision above this value of `p·|ln a1|`.
pub const LADDER_TRIGGER: f64 = 30.0;
/// Required agreement of the two residual evaluations.
pub const TWO_PATH_TOL: f64 = 1e-9;
pub const RESIDUAL_GRID_NODES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSpec {
    pub params: ProblemParams,
    /// `λ′` in units of `K0`.
    pub lambda_mult: f64,
    pub derived: DerivedConstants,
}

impl SubsolutionSpec {
    pub fn new(params: ProblemParams, lambda_mult: f64) -> Result<Self> {
        if !params.supercritical() {
            return Err(Error::Domain(format!(
                "sub-solution needs p > (n+4)/(n-4); got n = {}, p = {}",
                params.n, params.p
            )));
        }
        if !(lambda_mult.is_finite() && lambda_mult >= 0.0) {
            return Err(Error::InvalidInput(format!("lambda multiplier must be ≥ 0, got {lambda_mult}")));
        }
        Ok(Self { params, lambda_mult, derived: params.derived()? })
    }

    pub fn with_lambda(&self, lambda_mult: f64) -> Result<Self> {
        Self::new(self.params, lambda_mult)
    }

    /// `a2 K1 / K0`, the slope of the bracket in `H`.
    pub fn slope(&self) -> f64 {
        self.derived.a2 * self.derived.k1 / self.derived.k0
    }

    /// `x = r^{m+alpha}`.
    pub fn x_of_r(&self, r: f64) -> f64 {
        r.powf(self.params.m + self.derived.alpha)
    }

    pub fn r_of_x(&self, x: f64) -> f64 {
        x.powf(1.0 / (self.params.m + self.derived.alpha))
    }
}

/// `ω_m` as a power sum.
pub fn build_omega(spec: &SubsolutionSpec) -> PowerSum {
    let d = &spec.derived;
    PowerSum::new([(d.a1, -d.alpha), (d.a2, spec.params.m)], -1.0)
}

/// `H` with its coefficients held at a working precision.
#[derive(Debug, Clone)]
pub struct HProfile<T: Real> {
    a1: T,
    a2: T,
    slope: T,
    p: T,
    /// `+1` for the corrected profile, `−1` for the printed `(a1+a2x)^{+p}` form.
    sign: f64,
}

impl<T: Real> HProfile<T> {
    pub fn new(spec: &SubsolutionSpec) -> Self {
        Self::build(spec, 1.0)
    }

    /// The literal printed profile `(a1+a2x)^{p}(a1 + a2(K1/K0)x)`.
    pub fn printed(spec: &SubsolutionSpec) -> Self {
        Self::build(spec, -1.0)
    }

    fn build(spec: &SubsolutionSpec, sign: f64) -> Self {
        let p = T::from_f64(spec.params.p);
        let m = T::from_f64(spec.params.m);
        let (a1, a2) = params::coeffs_real(&m, &p);
        let k0 = params::k0_real(spec.params.n, &p);
        let nn = T::from_f64(spec.params.n as f64);
        let two = T::from_f64(2.0);
        let four = T::from_f64(4.0);
        let k1 = m.clone() * (m.clone() - two.clone()) * (m.clone() + nn.clone() - two) * (m + nn - four);
        let slope = a2.clone() * k1 / k0;
        Self { a1, a2, slope, p, sign }
    }

    /// `ln(a1 + a2 x)`, accurate when `a2` is tiny.
    fn ln_base(&self, x: &T) -> T {
        (-(self.a2.clone() * (T::from_f64(1.0) - x.clone()))).ln_1p()
    }

    pub fn eval(&self, x: &T) -> T {
        let e = -(T::from_f64(self.sign) * self.p.clone() * self.ln_base(x));
        e.exp() * (self.a1.clone() + self.slope.clone() * x.clone())
    }

    /// `H'(x)`.
    pub fn derivative(&self, x: &T) -> T {
        let one = T::from_f64(1.0);
        let base = self.a1.clone() + self.a2.clone() * x.clone();
        let sp = T::from_f64(self.sign) * self.p.clone();
        let pref = (-((sp.clone() + one) * self.ln_base(x))).exp();
        let g = self.slope.clone() * base - sp * self.a2.clone() * (self.a1.clone() + self.slope.clone() * x.clone());
        pref * g
    }
}

/// `H(x)` in double precision.
pub fn h_profile(spec: &SubsolutionSpec, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("H is defined on [0,1], got x = {x}")));
    }
    Ok(HProfile::<f64>::new(spec).eval(&x))
}

/// Global maximum of `H` on `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupH {
    pub value: f64,
    pub argmax: f64,
    /// Width of the final bracket around `argmax` (zero at an endpoint).
    pub enclosure_width: f64,
    /// Bound on `|value − sup H|` from the bracket and the precision comparison.
    pub error: f64,
    pub precision: Precision,
}

fn eval_at(spec: &SubsolutionSpec, x: f64, prec: Precision, printed: bool) -> f64 {
    fn go<T: Real>(spec: &SubsolutionSpec, x: f64, printed: bool) -> f64 {
        let h = if printed { HProfile::<T>::printed(spec) } else { HProfile::<T>::new(spec) };
        h.eval(&T::from_f64(x)).to_f64()
    }
    match prec {
        Precision::Double => go::<f64>(spec, x, printed),
        Precision::Extended => go::<Ext128>(spec, x, printed),
        Precision::High => go::<Ext256>(spec, x, printed),
    }
}

/// Does the precision ladder require more than double precision?
pub fn needs_extended(spec: &SubsolutionSpec) -> bool {
    spec.params.p * spec.derived.a1.ln().abs() > LADDER_TRIGGER
}

/// `sup_{[0,1]} H` by a dense scan followed by bisection on the sign of `H'`.
pub fn sup_h(spec: &SubsolutionSpec) -> SupH {
    sup_h_at(spec, Precision::Double)
}

/// [`sup_h`] with a minimum working precision for the final evaluation.
pub fn sup_h_at(spec: &SubsolutionSpec, min_precision: Precision) -> SupH {
    sup_h_impl(spec, min_precision, false)
}

/// Maximum of the printed `+p` profile, reported next to the corrected one.
pub fn sup_h_printed(spec: &SubsolutionSpec) -> SupH {
    sup_h_impl(spec, Precision::Double, true)
}

fn sup_h_impl(spec: &SubsolutionSpec, min_precision: Precision, printed: bool) -> SupH {
    let h = if printed { HProfile::<f64>::printed(spec) } else { HProfile::<f64>::new(spec) };
    let k = SCAN_POINTS;
    let xs: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|x| h.eval(x)).collect();
    let best = (0..=k).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });

    let (argmax, width) = if best == 0 && h.derivative(&0.0) <= 0.0 {
        (0.0, 0.0)
    } else if best == k && h.derivative(&1.0) >= 0.0 {
        (1.0, 0.0)
    } else {
        // H' changes sign from + to − inside the bracket around the best sample
        let mut lo = xs[best.saturating_sub(1)];
        let mut hi = xs[(best + 1).min(k)];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h.derivative(&mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1e-300) {
                break;
            }
        }
        (0.5 * (lo + hi), hi - lo)
    };
    let mut value = h.eval(&argmax);
    let mut enclosure = 0.0;
    if width > 0.0 {
        let lo = (argmax - width / 2.0).max(0.0);
        let hi = (argmax + width / 2.0).min(1.0);
        enclosure = (h.derivative(&lo).abs() + h.derivative(&hi).abs()) * width;
        value = value.max(h.eval(&lo)).max(h.eval(&hi));
    }
    let mut precision = min_precision;
    if !printed && needs_extended(spec) && precision < Precision::Extended {
        precision = Precision::Extended;
    }
    // rounding in exp(−p ln(a1+a2x)) grows with the size of the exponent
    let mut error = enclosure + 4.0 * f64::EPSILON * value.abs() * (1.0 + spec.params.p.ln().max(0.0));
    if precision > Precision::Double {
        let hi_val = eval_at(spec, argmax, precision, printed);
        error = enclosure + (hi_val - value).abs() + 8.0 * precision.epsilon() * hi_val.abs();
        value = hi_val;
    }
    SupH { value, argmax, enclosure_width: width, error, precision }
}

/// Residual of the sub-solution inequality sampled on a grid.
#[derive(Debug, Clone)]
pub struct ResidualProfile {
    /// `λ′K0(1+ω)^p − Δ²ω` from the power sums.
    pub direct: RadialField,
    /// `K0 r^{−alpha p}(a1 + a2x)^p[λ′ − H(x)]`.
    pub factorized: RadialField,
    /// Largest `|direct − factorized|` relative to the size of the two terms
    /// being subtracted in the direct form.
    pub max_rel_disagreement: f64,
}

impl ResidualProfile {
    /// `(value, r)` of the smallest factorized residual.
    pub fn min(&self) -> (f64, f64) {
        let r = self.factorized.grid.nodes();
        self.factorized
            .values
            .iter()
            .zip(r)
            .fold((f64::INFINITY, f64::NAN), |acc, (v, x)| if *v < acc.0 { (*v, *x) } else { acc })
    }
}

/// Evaluates the residual both ways; disagreement beyond [`TWO_PATH_TOL`]
/// is reported as a numerical failure.
pub fn residual_grid(spec: &SubsolutionSpec, grid: &RadialGrid) -> Result<ResidualProfile> {
    let d = &spec.derived;
    let p = spec.params.p;
    let lam = spec.lambda_mult * d.k0;
    let omega = build_omega(spec);
    let bil = omega.bilaplacian(spec.params.n);
    let h = HProfile::<f64>::new(spec);
    let mut direct = Vec::with_capacity(grid.len());
    let mut fact = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for &r in grid.nodes() {
        let one_plus = omega.eval(r) + 1.0;
        let source = lam * one_plus.powf(p);
        let b = bil.eval(r);
        let dv = source - b;
        let x = spec.x_of_r(r);
        let base = d.a1 + d.a2 * x;
        let fv = d.k0 * (-d.alpha * p * r.ln() + p * base.ln()).exp() * (spec.lambda_mult - h.eval(&x));
        let scale = source.abs() + b.abs();
        if scale > 0.0 {
            worst = worst.max((dv - fv).abs() / scale);
        }
        direct.push(dv);
        fact.push(fv);
    }
    if !(worst <= TWO_PATH_TOL) {
        return Err(Error::NumericalFailure(format!(
            "direct and factorized residuals disagree: relative gap {worst:e}"
        )));
    }
    Ok(ResidualProfile {
        direct: RadialField::new(grid.clone(), direct)?,
        factorized: RadialField::new(grid.clone(), fact)?,
        max_rel_disagreement: worst,
    })
}

/// Certificate for `Δ²ω ≤ λ′K0(1+ω)^p` on `(0,1)`.
pub fn certify_subsolution(spec: &SubsolutionSpec) -> Result<CertificateReport> {
    certify_subsolution_at(spec, Precision::Double)
}

/// [`certify_subsolution`] starting the precision ladder at `min_precision`.
pub fn certify_subsolution_at(spec: &SubsolutionSpec, min_precision: Precision) -> Result<CertificateReport> {
    let mut prec = min_precision;
    let (sup, margin, verdict) = loop {
        let sup = sup_h_at(spec, prec);
        let margin = spec.lambda_mult - sup.value;
        let verdict = classify(margin, sup.error);
        match (verdict, sup.precision.next()) {
            (Verdict::Inconclusive, Some(next)) => prec = next,
            _ => break (sup, margin, verdict),
        }
    };

    let grid = RadialGrid::default_for(RESIDUAL_GRID_NODES, spec.params.n)?;
    let profile = residual_grid(spec, &grid)?;
    let (gmin, gmin_r) = profile.min();
    let mut notes = Vec::new();
    let mut verdict = verdict;
    if verdict == Verdict::Certified && gmin < 0.0 {
        notes.push(format!("grid residual negative ({gmin:e} at r = {gmin_r}) despite sup H margin"));
        verdict = Verdict::Inconclusive;
    }

    let h = HProfile::<f64>::new(spec);
    let mut details = BTreeMap::new();
    details.insert("sup_H".into(), sup.value);
    details.insert("argmax_x".into(), sup.argmax);
    details.insert("argmax_r".into(), spec.r_of_x(sup.argmax));
    details.insert("enclosure_width".into(), sup.enclosure_width);
    details.insert("H0".into(), h.eval(&0.0));
    details.insert("H1".into(), h.eval(&1.0));
    details.insert("K0".into(), spec.derived.k0);
    details.insert("lambda_eff".into(), spec.lambda_mult * spec.derived.k0);
    details.insert("grid_min_residual".into(), gmin);
    details.insert("grid_min_r".into(), gmin_r);
    details.insert("two_path_max_rel".into(), profile.max_rel_disagreement);

    Ok(CertificateReport {
        inequality: "subsolution".into(),
        verdict,
        worst_margin: margin,
        worst_location: sup.argmax,
        location_variable: "x".into(),
        margin_error: sup.error,
        method: Method::Both,
        precision: sup.precision,
        n: spec.params.n,
        p: spec.params.p,
        m: spec.params.m,
        multiplier: spec.lambda_mult,
        details,
        notes,
    })
}

pub(crate) fn classify(margin: f64, error: f64) -> Verdict {
    if !margin.is_finite() {
        Verdict::Inconclusive
    } else if margin > error {
        Verdict::Certified
    } else if margin < -error {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    }
}
