//! Banded linear algebra: symmetric band storage, Cholesky, band LU with
//! partial pivoting, Sylvester inertia counts and a bisection-seeded inverse
//! iteration for the smallest eigenpair.

use crate::error::{Error, Result};

/// Symmetric band matrix; `band[d][i] = A[i][i+d]` for `d = 0..=kd`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    size: usize,
    kd: usize,
    band: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn zeros(size: usize, kd: usize) -> Self {
        let band = (0..=kd).map(|d| vec![0.0; size.saturating_sub(d)]).collect();
        Self { size, kd, band }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let d = b - a;
        if d > self.kd {
            0.0
        } else {
            self.band[d][a]
        }
    }

    /// Sets `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let d = b - a;
        assert!(d <= self.kd, "entry ({i},{j}) outside band {}", self.kd);
        self.band[d][a] = v;
    }

    pub fn diag(&self) -> &[f64] {
        &self.band[0]
    }

    /// `A − diag(shift)`.
    pub fn sub_diag(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (a, s) in out.band[0].iter_mut().zip(shift) {
            *a -= s;
        }
        out
    }

    /// `A − σI`.
    pub fn shifted(&self, sigma: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.band[0] {
            *a -= sigma;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size;
        let mut y: Vec<f64> = (0..n).map(|i| self.band[0][i] * x[i]).collect();
        for d in 1..=self.kd {
            for i in 0..n.saturating_sub(d) {
                let a = self.band[d][i];
                y[i] += a * x[i + d];
                y[i + d] += a * x[i];
            }
        }
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.size {
            let lo_j = i.saturating_sub(self.kd);
            let hi_j = (i + self.kd).min(self.size - 1);
            let rad: f64 = (lo_j..=hi_j).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            lo = lo.min(self.band[0][i] - rad);
            hi = hi.max(self.band[0][i] + rad);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    /// Band Cholesky `A = LLᵀ`; fails unless `A` is numerically positive definite.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, kd) = (self.size, self.kd);
        // l[d][j] = L[j+d][j]
        let mut l: Vec<Vec<f64>> = self.band.clone();
        for j in 0..n {
            let mut s = l[0][j];
            for k in j.saturating_sub(kd)..j {
                let v = l[j - k][k];
                s -= v * v;
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::NumericalFailure(format!("Cholesky pivot {j} not positive ({s:e})")));
            }
            let djj = s.sqrt();
            l[0][j] = djj;
            for i in j + 1..=(j + kd).min(n - 1) {
                let mut s = l[i - j][j];
                for k in i.saturating_sub(kd)..j {
                    s -= l[i - k][k] * l[j - k][k];
                }
                l[i - j][j] = s / djj;
            }
        }
        Ok(BandCholesky { size: n, kd, l })
    }

    /// Number of eigenvalues below `sigma` (Sylvester inertia of an unpivoted
    /// `LDLᵀ` of `A − σI`). `None` on an exactly zero pivot.
    pub fn count_below(&self, sigma: f64) -> Option<usize> {
        let (n, kd) = (self.size, self.kd);
        let mut l: Vec<Vec<f64>> = self.band.clone();
        for v in &mut l[0] {
            *v -= sigma;
        }
        // l[0][j] holds D_j; l[d][j] holds L[j+d][j]
        let mut neg = 0;
        for j in 0..n {
            let mut dj = l[0][j];
            for k in j.saturating_sub(kd)..j {
                let v = l[j - k][k];
                dj -= v * v * l[0][k];
            }
            if dj == 0.0 || !dj.is_finite() {
                return None;
            }
            l[0][j] = dj;
            if dj < 0.0 {
                neg += 1;
            }
            for i in j + 1..=(j + kd).min(n - 1) {
                let mut s = l[i - j][j];
                for k in i.saturating_sub(kd)..j {
                    s -= l[i - k][k] * l[j - k][k] * l[0][k];
                }
                l[i - j][j] = s / dj;
            }
        }
        Some(neg)
    }
}

/// Lower band Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    size: usize,
    kd: usize,
    l: Vec<Vec<f64>>,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kd) = (self.size, self.kd);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i - k][k] * y[k];
            }
            y[i] = s / self.l[0][i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..=(i + kd).min(n - 1) {
                s -= self.l[k - i][i] * y[k];
            }
            y[i] = s / self.l[0][i];
        }
        y
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * self.l[0].iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// General band LU with partial pivoting, for matrices that may be indefinite.
#[derive(Debug, Clone)]
pub struct BandLu {
    size: usize,
    kl: usize,
    width: usize,
    // row i stores columns i−kl ..= i+ku+kl at offsets 0..width
    rows: Vec<Vec<f64>>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SymBand) -> Result<Self> {
        let n = a.size();
        let kl = a.bandwidth();
        let ku = kl;
        let width = 2 * kl + ku + 1;
        let mut rows = vec![vec![0.0; width]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                row[j + kl - i] = a.get(i, j);
            }
        }
        let mut lu = Self { size: n, kl, width, rows, piv: vec![0; n] };
        let scale = a.band[0].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let (mut p, mut best) = (k, lu.at(k, k).abs());
            for i in k + 1..=last {
                let v = lu.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-300 * scale) {
                return Err(Error::NumericalFailure(format!("band LU: singular pivot at column {k}")));
            }
            lu.piv[k] = p;
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    let t = lu.at(k, j);
                    lu.put(k, j, lu.at(p, j));
                    lu.put(p, j, t);
                }
            }
            let d = lu.at(k, k);
            for i in k + 1..=last {
                let f = lu.at(i, k) / d;
                lu.put(i, k, f);
                if f != 0.0 {
                    for j in k + 1..=cmax {
                        let v = lu.at(i, j) - f * lu.at(k, j);
                        lu.put(i, j, v);
                    }
                }
            }
        }
        Ok(lu)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        let off = j + self.kl;
        if off < i || off - i >= self.width {
            return 0.0;
        }
        self.rows[i][off - i]
    }

    fn put(&mut self, i: usize, j: usize, v: f64) {
        let off = j + self.kl - i;
        self.rows[i][off] = v;
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.size;
        let kl = self.kl;
        let ku = self.width - 2 * kl - 1;
        let mut y = b.to_vec();
        for k in 0..n {
            y.swap(k, self.piv[k]);
            for i in k + 1..=(k + kl).min(n - 1) {
                y[i] -= self.at(i, k) * y[k];
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.at(i, j) * y[j];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}

/// Smallest eigenpair of a symmetric band matrix.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit 2-norm, largest component positive.
    pub vector: Vec<f64>,
    /// `‖Ax − θx‖₂`.
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on inertia counts isolates the lowest eigenvalue; inverse
/// iteration with a shift just below it recovers the eigenvector, and the
/// Rayleigh quotient gives the value.
pub fn smallest_eigenpair(a: &SymBand, rel_tol: f64) -> Result<Eigenpair> {
    let n = a.size();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let (glo, ghi) = a.gershgorin();
    let span = (ghi - glo).max(f64::MIN_POSITIVE);
    let count = |s: f64| -> usize {
        let mut s = s;
        for _ in 0..8 {
            if let Some(c) = a.count_below(s) {
                return c;
            }
            s += 1e-14 * span;
        }
        a.count_below(s).unwrap_or(0)
    };
    let (mut lo, mut hi) = (glo - 1e-12 * span, ghi + 1e-12 * span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-3 * hi.abs().max(lo.abs()) || hi - lo <= 1e-15 * span {
            break;
        }
    }
    // lo < μ₁ ≤ hi; step slightly further below so A − σI is safely definite
    let sigma = lo - 0.5 * (hi - lo);
    let chol = a.shifted(sigma).cholesky()?;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919 % 101) as f64 / 101.0)).collect();
    normalize(&mut x);
    let mut theta = rayleigh(a, &x);
    let mut res = f64::INFINITY;
    let mut it = 0;
    while it < 500 {
        it += 1;
        let mut y = chol.solve(&x);
        normalize(&mut y);
        x = y;
        let ax = a.matvec(&x);
        let t = dot(&x, &ax);
        res = ax.iter().zip(&x).map(|(p, q)| (p - t * q).powi(2)).sum::<f64>().sqrt();
        let done = (t - theta).abs() <= 1e-3 * rel_tol * t.abs().max(f64::MIN_POSITIVE);
        theta = t;
        if done && it > 2 {
            break;
        }
    }
    if !(theta >= lo - 1e-8 * span && theta <= hi + 1e-8 * span) {
        return Err(Error::NumericalFailure(format!(
            "inverse iteration left the bracket [{lo:e}, {hi:e}]: θ = {theta:e}"
        )));
    }
    if x.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m }) < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(Eigenpair { value: theta, vector: x, residual: res, iterations: it })
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn normalize(x: &mut [f64]) {
    let s = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= s);
}

fn rayleigh(a: &SymBand, x: &[f64]) -> f64 {
    dot(x, &a.matvec(x)) / dot(x, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn laplace_1d_squared(n: usize) -> SymBand {
        // (tridiag(-1,2,-1))² is pentadiagonal SPD
        let mut a = SymBand::zeros(n, 2);
        for i in 0..n {
            a.set(i, i, if i == 0 || i == n - 1 { 5.0 } else { 6.0 });
            if i + 1 < n {
                a.set(i, i + 1, -4.0);
            }
            if i + 2 < n {
                a.set(i, i + 2, 1.0);
            }
        }
        a
    }

    fn random_band(n: usize, kd: usize, vals: &[f64]) -> SymBand {
        let mut a = SymBand::zeros(n, kd);
        let mut k = 0;
        for d in 0..=kd {
            for i in 0..n - d {
                a.set(i, i + d, vals[k % vals.len()]);
                k += 1;
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_against_dense() {
        let a = laplace_1d_squared(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let x = a.cholesky().unwrap().solve(&b);
        let xd = a.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b.clone()));
        for i in 0..40 {
            assert_relative_eq!(x[i], xd[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = laplace_1d_squared(10).shifted(5.0);
        assert!(a.cholesky().is_err());
    }

    #[test]
    fn smallest_eigen_matches_closed_form() {
        // eigenvalues of the squared Dirichlet Laplacian (without the corner
        // correction) are not closed-form, so compare to the dense solver
        let a = laplace_1d_squared(60);
        let e = smallest_eigenpair(&a, 1e-10).unwrap();
        let dense = nalgebra::SymmetricEigen::new(a.to_dense());
        let min = dense.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(e.value, min, max_relative = 1e-9);
        assert!(e.vector.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn smallest_eigen_of_indefinite_matrix() {
        let a = laplace_1d_squared(30).shifted(1.0);
        let e = smallest_eigenpair(&a, 1e-10).unwrap();
        let dense = nalgebra::SymmetricEigen::new(a.to_dense());
        let min = dense.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(e.value, min, max_relative = 1e-8, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn band_lu_matches_dense(vals in proptest::collection::vec(-1.0f64..1.0, 30..60), n in 5usize..30) {
            let mut a = random_band(n, 2, &vals);
            for i in 0..n {
                let d = a.get(i, i);
                a.set(i, i, d + if i % 2 == 0 { 3.0 } else { -3.0 });
            }
            let b: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
            let x = BandLu::factor(&a).unwrap().solve(&b);
            let r = a.matvec(&x);
            for i in 0..n {
                prop_assert!((r[i] - b[i]).abs() < 1e-9 * (1.0 + b[i].abs()));
            }
        }

        #[test]
        fn inertia_matches_dense(vals in proptest::collection::vec(-1.0f64..1.0, 30..60), n in 3usize..25, s in -2.0f64..2.0) {
            let a = random_band(n, 2, &vals);
            let ev = nalgebra::SymmetricEigen::new(a.to_dense()).eigenvalues;
            prop_assume!(ev.iter().all(|e| (e - s).abs() > 1e-6));
            if let Some(c) = a.count_below(s) {
                prop_assert_eq!(c, ev.iter().filter(|e| **e < s).count());
            }
        }
    }
}
