use serde::{Deserialize, Serialize};

use crate::precision::Real;

/// Radial Laplacian of a monomial: `Δ r^e = e(e+n−2) r^{e−2}`.
pub fn laplacian_power(e: f64, n: u32) -> (f64, f64) {
    (e * (e + n as f64 - 2.0), e - 2.0)
}

/// `Δ² r^e = e(e−2)(e+n−2)(e+n−4) r^{e−4}`.
pub fn bilaplacian_power(e: f64, n: u32) -> (f64, f64) {
    let (c1, e1) = laplacian_power(e, n);
    let (c2, e2) = laplacian_power(e1, n);
    (c1 * c2, e2)
}

/// Finite sum `offset + Σ c_i r^{e_i}` with pairwise distinct exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    terms: Vec<(f64, f64)>,
    pub constant_offset: f64,
}

impl PowerSum {
    /// Builds a sum, merging equal exponents, folding `r^0` into the offset
    /// and dropping zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (f64, f64)>, constant_offset: f64) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut offset = constant_offset;
        for (c, e) in terms {
            if e == 0.0 {
                offset += c;
                continue;
            }
            match out.iter_mut().find(|(_, x)| *x == e) {
                Some(t) => t.0 += c,
                None => out.push((c, e)),
            }
        }
        out.retain(|(c, _)| *c != 0.0);
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        Self { terms: out, constant_offset: offset }
    }

    pub fn zero() -> Self {
        Self::new([], 0.0)
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant_offset == 0.0
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(c, e)| c * r.powf(e)).sum::<f64>() + self.constant_offset
    }

    /// Evaluation at a working precision; coefficients are lifted from `f64`.
    pub fn eval_real<T: Real>(&self, r: &T) -> T {
        let mut acc = T::from_f64(self.constant_offset);
        for &(c, e) in &self.terms {
            acc = acc + T::from_f64(c) * r.powf(&T::from_f64(e));
        }
        acc
    }

    /// `d/dr`.
    pub fn derivative(&self) -> Self {
        Self::new(self.terms.iter().map(|&(c, e)| (c * e, e - 1.0)), 0.0)
    }

    pub fn laplacian(&self, n: u32) -> Self {
        Self::new(
            self.terms.iter().map(|&(c, e)| {
                let (k, e2) = laplacian_power(e, n);
                (c * k, e2)
            }),
            0.0,
        )
    }

    /// Term-wise bilaplacian; the constant offset is annihilated.
    pub fn bilaplacian(&self, n: u32) -> Self {
        Self::new(
            self.terms.iter().map(|&(c, e)| {
                let (k, e2) = bilaplacian_power(e, n);
                (c * k, e2)
            }),
            0.0,
        )
    }

    /// Coefficient of `r^e` (zero if absent).
    pub fn coefficient(&self, e: f64) -> f64 {
        if e == 0.0 {
            return self.constant_offset;
        }
        self.terms.iter().find(|t| t.1 == e).map_or(0.0, |t| t.0)
    }
}

/// Free-function form of [`PowerSum::bilaplacian`].
pub fn bilaplacian_powersum(f: &PowerSum, n: u32) -> PowerSum {
    f.bilaplacian(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{compute_k0, compute_k1};
    use approx::assert_relative_eq;

    #[test]
    fn laplacian_examples() {
        assert_eq!(laplacian_power(2.0, 13), (26.0, 0.0));
        assert_eq!(laplacian_power(0.0, 13), (0.0, -2.0));
        assert_eq!(laplacian_power(-2.0, 13), (-18.0, -4.0));
    }

    #[test]
    fn laplacian_of_r_minus_two_matches_finite_difference() {
        let n = 13.0;
        let f = |r: f64| r.powi(-2);
        let (r, h) = (0.5, 1e-4);
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
        let fd = d2 + (n - 1.0) / r * d1;
        let (c, e) = laplacian_power(-2.0, 13);
        assert_relative_eq!(fd, c * r.powf(e), max_relative = 1e-6);
    }

    #[test]
    fn bilaplacian_examples() {
        assert_eq!(bilaplacian_power(4.0, 5), (280.0, 0.0));
        for n in [5u32, 13, 31] {
            for m in [0.5, 2.0, 3.5, 7.0] {
                assert_relative_eq!(bilaplacian_power(m, n).0, compute_k1(m, n).unwrap(), max_relative = 1e-14);
            }
            for p in [30.0, 500.0] {
                let a = 4.0 / (p - 1.0);
                let (c, e) = bilaplacian_power(-a, n);
                assert_relative_eq!(c, compute_k0(n, p).unwrap(), max_relative = 1e-12);
                assert_relative_eq!(e, -a * p, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn plate_solution_has_constant_bilaplacian() {
        // (1−r²)² = 1 − 2r² + r⁴
        for n in [5u32, 13, 31] {
            let f = PowerSum::new([(-2.0, 2.0), (1.0, 4.0)], 1.0);
            let b = bilaplacian_powersum(&f, n);
            assert!(b.terms().is_empty());
            assert_relative_eq!(b.constant_offset, 8.0 * n as f64 * (n as f64 + 2.0));
        }
    }

    #[test]
    fn constants_are_annihilated() {
        assert!(PowerSum::new([], 3.5).bilaplacian(13).is_zero());
    }

    #[test]
    fn construction_merges_and_drops() {
        let s = PowerSum::new([(1.0, 2.0), (2.0, 2.0), (4.0, 0.0), (0.0, 5.0)], 1.0);
        assert_eq!(s.terms(), &[(3.0, 2.0)]);
        assert_eq!(s.constant_offset, 5.0);
        assert_eq!(s.coefficient(2.0), 3.0);
        assert_eq!(s.derivative().terms(), &[(6.0, 1.0)]);
    }

    #[test]
    fn extended_eval_agrees() {
        use crate::precision::Ext128;
        let s = PowerSum::new([(0.5, -2.0), (0.5, 2.0)], -1.0);
        assert_relative_eq!(s.eval_real(&Ext128::from_f64(0.5)).to_f64(), 1.125, max_relative = 1e-15);
        assert_relative_eq!(s.eval(0.5), 1.125, max_relative = 1e-15);
    }
}
