//! Small dense and banded complex linear algebra.
//!
//! Real systems are solved by embedding them in the complex field; the sizes
//! in this crate (16 unknowns for the Lyapunov solve, a few thousand banded
//! unknowns for the Fock oracle) make that overhead irrelevant.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{c, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision at pivot {index}")]
    Singular { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_real(n: usize, real: &[T]) -> Self {
        assert_eq!(real.len(), n * n);
        Self {
            n,
            data: real.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn factor(mut a: ComplexMatrix<T>) -> Result<Self, LinalgError> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = T::epsilon() * c::<T>(n as f64) * scale * c(1e-3);
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= tiny {
                return Err(LinalgError::Singular { index: k });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let m = a[(i, k)] / pivot;
                a[(i, k)] = m;
                if m.re == T::zero() && m.im == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = a.data[k * n + j];
                    a.data[i * n + j] = a.data[i * n + j] - m * u;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>, LinalgError> {
        let n = self.lu.n;
        if b.len() != n {
            return Err(LinalgError::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Ratio of smallest to largest pivot modulus; a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> T {
        let pivots: Vec<T> = (0..self.lu.n).map(|i| self.lu[(i, i)].norm()).collect();
        let max = pivots.iter().fold(T::zero(), |m, &p| m.max(p));
        let min = pivots.iter().fold(T::infinity(), |m, &p| m.min(p));
        min / max
    }
}

pub fn solve_dense<T: Real>(
    a: ComplexMatrix<T>,
    b: &[Complex<T>],
) -> Result<Vec<Complex<T>>, LinalgError> {
    Lu::factor(a)?.solve(b)
}

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals,
/// assembled row by row.
#[derive(Debug, Clone)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    /// Row i stores columns `starts[i] ..`.
    starts: Vec<usize>,
    rows: Vec<Vec<Complex<T>>>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn new(n: usize, lower: usize, upper: usize) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut starts = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let s = i.saturating_sub(lower);
            let e = (i + upper).min(n - 1);
            starts.push(s);
            rows.push(vec![zero; e + 1 - s]);
        }
        Self {
            n,
            lower,
            upper,
            starts,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    /// Adds `v` at (i, j). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex<T>) {
        let s = self.starts[i];
        assert!(
            j >= s && j - s < self.rows[i].len(),
            "entry ({i}, {j}) outside band"
        );
        self.rows[i][j - s] = self.rows[i][j - s] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let s = self.starts[i];
        if j < s || j - s >= self.rows[i].len() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.rows[i][j - s]
        }
    }

    /// Replaces row `i` by the unit row e_i.
    pub fn set_unit_row(&mut self, i: usize) {
        let zero = Complex::new(T::zero(), T::zero());
        for z in self.rows[i].iter_mut() {
            *z = zero;
        }
        let s = self.starts[i];
        self.rows[i][i - s] = Complex::new(T::one(), T::zero());
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                let s = self.starts[i];
                self.rows[i]
                    .iter()
                    .zip(&x[s..])
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                        acc + a * b
                    })
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting inside the band. Consumes
    /// the matrix; the right-hand side is transformed alongside.
    pub fn solve(mut self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>, LinalgError> {
        let n = self.n;
        if b.len() != n {
            return Err(LinalgError::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        let zero = Complex::new(T::zero(), T::zero());
        let mut rhs = b.to_vec();
        let scale = self
            .rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |m, z| m.max(z.norm()))
            .max(T::min_positive_value());
        let tiny = T::epsilon() * scale * c(1e-3);
        for k in 0..n {
            let last = (k + self.lower).min(n - 1);
            let mut p = k;
            let mut best = -T::one();
            for i in k..=last {
                let v = self.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(LinalgError::Singular { index: k });
            }
            if p != k {
                self.rows.swap(k, p);
                self.starts.swap(k, p);
                rhs.swap(k, p);
            }
            // Pivot row is normalized so U has a unit diagonal.
            let sk = self.starts[k];
            let pivot = self.rows[k][k - sk];
            let inv = pivot.inv();
            for z in self.rows[k][k - sk..].iter_mut() {
                *z = *z * inv;
            }
            rhs[k] = rhs[k] * inv;
            let pivot_end = sk + self.rows[k].len();
            let rk = rhs[k];
            for i in k + 1..=last {
                let m = self.get(i, k);
                if m.re == T::zero() && m.im == T::zero() {
                    continue;
                }
                // Grow row i so it covers the pivot row's extent.
                let si = self.starts[i];
                let need = pivot_end - si;
                if self.rows[i].len() < need {
                    self.rows[i].resize(need, zero);
                }
                let (head, tail) = self.rows.split_at_mut(i);
                let prow = &head[k][k - sk..];
                let irow = &mut tail[0][k - si..need];
                for (dst, &src) in irow.iter_mut().zip(prow) {
                    *dst = *dst - m * src;
                }
                irow[0] = zero;
                rhs[i] = rhs[i] - m * rk;
            }
        }
        let mut x = vec![zero; n];
        for k in (0..n).rev() {
            let sk = self.starts[k];
            let row = &self.rows[k];
            let mut s = rhs[k];
            for (j, a) in row.iter().enumerate().skip(k + 1 - sk) {
                s = s - *a * x[sk + j];
            }
            x[k] = s;
        }
        Ok(x)
    }
}

/// Positive semidefiniteness of a Hermitian matrix within `tol`, tested by a
/// Cholesky factorization of `m + tol·I`.
pub fn is_psd_hermitian<T: Real>(m: &ComplexMatrix<T>, tol: T) -> bool {
    let n = m.dim();
    let mut l = ComplexMatrix::<T>::zeros(n);
    for j in 0..n {
        let mut d = m[(j, j)].re + tol;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return false;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    true
}

/// All complex roots of `coeffs[0] xⁿ + … + coeffs[n]` by Aberth–Ehrlich
/// iteration.
pub fn poly_roots<T: Real>(coeffs: &[T]) -> Vec<Complex<T>> {
    let lead = coeffs[0];
    assert!(lead != T::zero(), "leading coefficient must be non-zero");
    let a: Vec<Complex<T>> = coeffs
        .iter()
        .map(|&x| Complex::new(x / lead, T::zero()))
        .collect();
    let n = a.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let eval = |z: Complex<T>| {
        let mut p = a[0];
        let mut dp = Complex::new(T::zero(), T::zero());
        for coef in &a[1..] {
            dp = dp * z + p;
            p = p * z + coef;
        }
        (p, dp)
    };
    // Cauchy bound for the initial circle.
    let radius = T::one() + a[1..].iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let theta = T::TAU() * c::<T>(k as f64) / c::<T>(n as f64) + c(0.4);
            Complex::from_polar(radius * c(0.5), theta)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = T::zero();
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != i {
                    sum = sum + (z[i] - z[j]).inv();
                }
            }
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * sum);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] = z[i] - step;
                max_step = max_step.max(step.norm() / z[i].norm().max(T::one()));
            }
        }
        if max_step < T::epsilon() * c(4.0) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cz(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn dense_solve_recovers_known_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let mut a = ComplexMatrix::<f64>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let x: Vec<_> = (0..n).map(|k| cz(k as f64, -(k as f64) * 0.5)).collect();
        let b: Vec<_> = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)] * x[j]).sum())
            .collect();
        let got = solve_dense(a, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-11);
        }
    }

    #[test]
    fn dense_singular_is_reported() {
        let a = ComplexMatrix::from_real(2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            solve_dense(a, &[cz(1.0, 0.0), cz(0.0, 0.0)]),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn banded_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, kl, ku) = (40, 3, 5);
        let mut band = BandedMatrix::<f64>::new(n, kl, ku);
        let mut dense = ComplexMatrix::<f64>::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // Weak diagonal forces pivoting.
                let v = if i == j {
                    cz(1e-3, 0.0)
                } else if rng.gen_bool(0.7) {
                    cz(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    cz(0.0, 0.0)
                };
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<_> = (0..n).map(|i| cz((i as f64).sin(), 1.0)).collect();
        let reference = solve_dense(dense, &b).unwrap();
        let got = band.clone().solve(&b).unwrap();
        for (g, e) in got.iter().zip(&reference) {
            assert!((g - e).norm() < 1e-9 * e.norm().max(1.0), "{g} vs {e}");
        }
        let back = band.mul_vec(&got);
        for (r, e) in back.iter().zip(&b) {
            assert!((r - e).norm() < 1e-10);
        }
    }

    #[test]
    fn psd_check() {
        let m = ComplexMatrix::from_real(2, &[1.0, 0.5, 0.5, 1.0]);
        assert!(is_psd_hermitian(&m, 0.0));
        let m = ComplexMatrix::from_real(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_psd_hermitian(&m, 1e-9));
        // Rank-one projector is PSD only with the tolerance shift.
        let mut p = ComplexMatrix::<f64>::zeros(2);
        p[(0, 0)] = cz(0.5, 0.0);
        p[(0, 1)] = cz(0.0, 0.5);
        p[(1, 0)] = cz(0.0, -0.5);
        p[(1, 1)] = cz(0.5, 0.0);
        assert!(is_psd_hermitian(&p, 1e-12));
    }

    #[test]
    fn quartic_roots_known() {
        // (x+1)(x+2)(x^2 + 2x + 5) -> roots -1, -2, -1 ± 2i
        let coeffs = [1.0, 5.0, 13.0, 19.0, 10.0];
        let mut roots = poly_roots(&coeffs);
        roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let expected = [cz(-2.0, 0.0), cz(-1.0, -2.0), cz(-1.0, 0.0), cz(-1.0, 2.0)];
        for (r, e) in roots.iter().zip(expected.iter()) {
            assert!((r - e).norm() < 1e-10, "{r} vs {e}");
        }
    }
}
