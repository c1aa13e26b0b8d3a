//! Brute-force steady state of the linearized master equation in a truncated
//! two-mode Fock space.
//!
//! Product states are indexed `s = n_b·d_a + n_a`. The density matrix is
//! vectorized as `((n_b·d_b + n_b')·d_a + n_a)·d_a + n_a'` for the element
//! `⟨n_a n_b|ρ|n_a' n_b'⟩`, which keeps every generator entry within a band
//! of half-width about `2·d_a²·d_b`.

use num_complex::Complex;
use thiserror::Error;

use crate::gaussian::Mat4;
use crate::linalg::{is_psd_hermitian, BandedMatrix, ComplexMatrix, LinalgError};
use crate::model::{CavityReservoir, EffectiveParams};
use crate::scalar::{c, i_unit, Real};

/// Largest product-space dimension accepted.
pub const MAX_PRODUCT_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("truncation {dim_cavity}x{dim_mech} rejected: each dimension must be >= 2 and the product <= {MAX_PRODUCT_DIM}")]
    Truncation { dim_cavity: usize, dim_mech: usize },
    #[error("steady state is not unique: {0}")]
    NotUnique(LinalgError),
    #[error("steady-state residual {residual:e} exceeds 1e-9")]
    Residual { residual: f64 },
    #[error("steady state is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("steady state is not positive semidefinite within 1e-9")]
    NotPositive,
    #[error("steady state has non-positive trace {trace:e}")]
    Trace { trace: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    dim_cavity: usize,
    dim_mech: usize,
}

impl TruncationSpec {
    pub fn new(dim_cavity: usize, dim_mech: usize) -> Result<Self, FockError> {
        if dim_cavity < 2 || dim_mech < 2 || dim_cavity * dim_mech > MAX_PRODUCT_DIM {
            return Err(FockError::Truncation {
                dim_cavity,
                dim_mech,
            });
        }
        Ok(Self {
            dim_cavity,
            dim_mech,
        })
    }

    pub fn dim_cavity(&self) -> usize {
        self.dim_cavity
    }

    pub fn dim_mech(&self) -> usize {
        self.dim_mech
    }

    /// Hilbert-space dimension d_a·d_b.
    pub fn product_dim(&self) -> usize {
        self.dim_cavity * self.dim_mech
    }

    fn state(&self, n_a: usize, n_b: usize) -> usize {
        n_b * self.dim_cavity + n_a
    }

    fn split(&self, s: usize) -> (usize, usize) {
        (s % self.dim_cavity, s / self.dim_cavity)
    }

    /// Position of ⟨s|ρ|s'⟩ in the vectorized density matrix.
    pub fn vec_index(&self, s: usize, s_prime: usize) -> usize {
        let (na, nb) = self.split(s);
        let (na2, nb2) = self.split(s_prime);
        ((nb * self.dim_mech + nb2) * self.dim_cavity + na) * self.dim_cavity + na2
    }
}

type Sparse<T> = Vec<(usize, usize, Complex<T>)>;

fn sparse<T: Real>(m: &ComplexMatrix<T>) -> Sparse<T> {
    let n = m.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if z.re != T::zero() || z.im != T::zero() {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// Ladder operators (a, b) on the product space.
fn ladders<T: Real>(tr: &TruncationSpec) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let n = tr.product_dim();
    let mut a = ComplexMatrix::zeros(n);
    let mut b = ComplexMatrix::zeros(n);
    for nb in 0..tr.dim_mech {
        for na in 0..tr.dim_cavity {
            let s = tr.state(na, nb);
            if na > 0 {
                a[(tr.state(na - 1, nb), s)] = Complex::new(c::<T>(na as f64).sqrt(), T::zero());
            }
            if nb > 0 {
                b[(tr.state(na, nb - 1), s)] = Complex::new(c::<T>(nb as f64).sqrt(), T::zero());
            }
        }
    }
    (a, b)
}

fn lin<T: Real>(terms: &[(Complex<T>, &ComplexMatrix<T>)], n: usize) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(n);
    for (w, m) in terms {
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = out[(i, j)] + *w * m[(i, j)];
            }
        }
    }
    out
}

/// Lindblad generator as a list of `(row, col, value)` entries, possibly
/// with repeats.
fn generator_entries<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
    tr: &TruncationSpec,
) -> Sparse<T> {
    let n = tr.product_dim();
    let re = |x: T| Complex::new(x, T::zero());
    let one = re(T::one());
    let half = re(c(0.5));
    let (a, b) = ladders::<T>(tr);
    let ad = a.adjoint();
    let bd = b.adjoint();
    let id = ComplexMatrix::identity(n);
    let ada = ad.matmul(&a);
    let bdb = bd.matmul(&b);
    let aa = a.matmul(&a);
    let adad = ad.matmul(&ad);
    let xa = lin(&[(one, &a), (one, &ad)], n);
    let xb = lin(&[(one, &b), (one, &bd)], n);
    // H = Δa†a + ω_b b†b + G(a + a†)(b + b†) + ξ*a² + ξa†².
    let h = lin(
        &[
            (re(eff.delta), &ada),
            (re(eff.omega_b), &bdb),
            (re(eff.g_lin), &xa.matmul(&xb)),
            (eff.xi.conj(), &aa),
            (eff.xi, &adad),
        ],
        n,
    );

    // Superoperator terms `w · A ρ B`.
    let mut terms: Vec<(Complex<T>, &ComplexMatrix<T>, &ComplexMatrix<T>)> =
        vec![(-i_unit::<T>(), &h, &id), (i_unit::<T>(), &id, &h)];
    let nn = reservoir.n();
    let m = reservoir.m();
    let kappa = eff.kappa;
    let k_down = kappa * (nn + T::one());
    let k_up = kappa * nn;
    let g_down = eff.gamma_b * (eff.n_th + T::one());
    let g_up = eff.gamma_b * eff.n_th;
    let (aad, bbd) = (a.matmul(&ad), b.matmul(&bd));
    for (rate, l, ld, ldl) in [
        (k_down, &a, &ad, &ada),
        (k_up, &ad, &a, &aad),
        (g_down, &b, &bd, &bdb),
        (g_up, &bd, &b, &bbd),
    ] {
        if rate == T::zero() {
            continue;
        }
        let r = re(rate);
        terms.push((r, l, ld));
        terms.push((-r * half, ldl, &id));
        terms.push((-r * half, &id, ldl));
    }
    // −κM(a†ρa† − ½{a†², ρ}) − κM*(aρa − ½{a², ρ}).
    if m.norm_sqr() > T::zero() {
        let km = m * kappa;
        terms.push((-km, &ad, &ad));
        terms.push((km * half, &adad, &id));
        terms.push((km * half, &id, &adad));
        let kmc = km.conj();
        terms.push((-kmc, &a, &a));
        terms.push((kmc * half, &aa, &id));
        terms.push((kmc * half, &id, &aa));
    }

    // (AρB)_{ij} = Σ A_ik ρ_kl B_lj.
    let mut out = Vec::new();
    for (w, lhs, rhs) in terms {
        let sl = sparse(lhs);
        let sr = sparse(rhs);
        for &(i, k, x) in &sl {
            for &(l, j, y) in &sr {
                out.push((tr.vec_index(i, j), tr.vec_index(k, l), w * x * y));
            }
        }
    }
    out
}

/// Lindblad generator of the linearized model in banded storage.
#[derive(Debug, Clone)]
pub struct Liouvillian<T> {
    trunc: TruncationSpec,
    matrix: BandedMatrix<T>,
}

impl<T: Real> Liouvillian<T> {
    pub fn truncation(&self) -> TruncationSpec {
        self.trunc
    }

    /// Vectorized dimension (d_a·d_b)².
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.matrix.get(row, col)
    }

    /// L(ρ) for a density matrix on the product space.
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let v = self.vectorize(rho);
        self.devectorize(&self.matrix.mul_vec(&v))
    }

    /// Dense copy; only sensible for small truncations.
    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.matrix.get(i, j);
            }
        }
        out
    }

    fn vectorize(&self, rho: &ComplexMatrix<T>) -> Vec<Complex<T>> {
        let n = self.trunc.product_dim();
        let mut v = vec![Complex::new(T::zero(), T::zero()); n * n];
        for s in 0..n {
            for t in 0..n {
                v[self.trunc.vec_index(s, t)] = rho[(s, t)];
            }
        }
        v
    }

    fn devectorize(&self, v: &[Complex<T>]) -> ComplexMatrix<T> {
        let n = self.trunc.product_dim();
        let mut rho = ComplexMatrix::zeros(n);
        for s in 0..n {
            for t in 0..n {
                rho[(s, t)] = v[self.trunc.vec_index(s, t)];
            }
        }
        rho
    }
}

/// Lindblad generator for the linearized Hamiltonian with a cavity port fed
/// by `reservoir` and a thermal mechanical bath.
pub fn liouvillian<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
    trunc: TruncationSpec,
) -> Liouvillian<T> {
    let entries = generator_entries(eff, reservoir, &trunc);
    let (mut lower, mut upper) = (0, 0);
    for &(i, j, _) in &entries {
        if i > j {
            lower = lower.max(i - j);
        } else {
            upper = upper.max(j - i);
        }
    }
    let n = trunc.product_dim();
    let mut matrix = BandedMatrix::new(n * n, lower, upper);
    for (i, j, v) in entries {
        matrix.add(i, j, v);
    }
    Liouvillian { trunc, matrix }
}

/// Steady density matrix with its truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    trunc: TruncationSpec,
    rho: ComplexMatrix<T>,
    residual: T,
}

impl<T: Real> DensityMatrix<T> {
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.rho
    }

    pub fn truncation(&self) -> TruncationSpec {
        self.trunc
    }

    /// ‖L(ρ)‖_max at the returned state.
    pub fn residual(&self) -> T {
        self.residual
    }

    /// Tr(ρ X).
    pub fn expect(&self, op: &ComplexMatrix<T>) -> Complex<T> {
        self.rho.matmul(op).trace()
    }

    pub fn population(&self, n_a: usize, n_b: usize) -> T {
        let s = self.trunc.state(n_a, n_b);
        self.rho[(s, s)].re
    }

    /// ⟨a†a⟩.
    pub fn cavity_occupation(&self) -> T {
        self.diagonal_sum(|na, _| na)
    }

    /// ⟨b†b⟩.
    pub fn phonon_number(&self) -> T {
        self.diagonal_sum(|_, nb| nb)
    }

    fn diagonal_sum(&self, weight: impl Fn(usize, usize) -> usize) -> T {
        (0..self.trunc.product_dim())
            .map(|s| {
                let (na, nb) = self.trunc.split(s);
                self.rho[(s, s)].re * c::<T>(weight(na, nb) as f64)
            })
            .sum()
    }

    /// Largest population sitting in the top Fock level of either mode.
    pub fn edge_population(&self) -> T {
        let (da, db) = (self.trunc.dim_cavity, self.trunc.dim_mech);
        (0..self.trunc.product_dim())
            .filter(|&s| {
                let (na, nb) = self.trunc.split(s);
                na == da - 1 || nb == db - 1
            })
            .map(|s| self.rho[(s, s)].re)
            .fold(T::zero(), T::max)
    }

    /// Symmetrized quadrature covariance in the `(x_a, p_a, x_b, p_b)`
    /// convention of the Gaussian layer.
    pub fn quadrature_covariance(&self) -> Mat4<T> {
        let n = self.trunc.product_dim();
        let (a, b) = ladders::<T>(&self.trunc);
        let s = c::<T>(0.5).sqrt();
        let one = Complex::new(s, T::zero());
        let mi = Complex::new(T::zero(), -s);
        let (ad, bd) = (a.adjoint(), b.adjoint());
        let quads = [
            lin(&[(one, &a), (one, &ad)], n),
            lin(&[(mi, &a), (-mi, &ad)], n),
            lin(&[(one, &b), (one, &bd)], n),
            lin(&[(mi, &b), (-mi, &bd)], n),
        ];
        let means: Vec<T> = quads.iter().map(|q| self.expect(q).re).collect();
        let mut v = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let sym = self.expect(&quads[i].matmul(&quads[j])).re
                    + self.expect(&quads[j].matmul(&quads[i])).re;
                v[i][j] = sym / c(2.0) - means[i] * means[j];
            }
        }
        v
    }
}

/// Solves L(ρ) = 0 with the equation for ⟨0,0|ρ|0,0⟩ replaced by
/// ⟨0,0|ρ|0,0⟩ = 1, then rescales to unit trace and checks residual,
/// hermiticity and positivity.
pub fn steady_density<T: Real>(l: &Liouvillian<T>) -> Result<DensityMatrix<T>, FockError> {
    let n = l.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut sys = l.matrix.clone();
    let pin = l.trunc.vec_index(0, 0);
    sys.set_unit_row(pin);
    let mut rhs = vec![zero; n];
    rhs[pin] = Complex::new(T::one(), T::zero());
    let x = sys.solve(&rhs).map_err(FockError::NotUnique)?;
    let mut rho = l.devectorize(&x);
    let tr = rho.trace();
    if !(tr.re > T::zero()) {
        return Err(FockError::Trace {
            trace: tr.re.as_f64(),
        });
    }
    let inv = tr.inv();
    let d = rho.dim();
    for s in 0..d {
        for t in 0..d {
            rho[(s, t)] = rho[(s, t)] * inv;
        }
    }
    let residual = l.apply(&rho).max_abs();
    if !(residual < c(1e-9)) {
        return Err(FockError::Residual {
            residual: residual.as_f64(),
        });
    }
    let mut deviation = T::zero();
    for s in 0..d {
        for t in 0..d {
            deviation = deviation.max((rho[(s, t)] - rho[(t, s)].conj()).norm());
        }
    }
    if !(deviation < c(1e-9)) {
        return Err(FockError::NotHermitian {
            deviation: deviation.as_f64(),
        });
    }
    let half = c::<T>(0.5);
    for s in 0..d {
        for t in s..d {
            let m = (rho[(s, t)] + rho[(t, s)].conj()) * half;
            rho[(s, t)] = m;
            rho[(t, s)] = m.conj();
        }
    }
    if !is_psd_hermitian(&rho, c(1e-9)) {
        return Err(FockError::NotPositive);
    }
    Ok(DensityMatrix {
        trunc: l.trunc,
        rho,
        residual,
    })
}

/// Builds the generator and solves for the steady state.
pub fn fock_steady<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
    trunc: TruncationSpec,
) -> Result<DensityMatrix<T>, FockError> {
    steady_density(&liouvillian(eff, reservoir, trunc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian;
    use crate::model::SqueezedBathParams;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weak(k4: f64, n_th: f64) -> EffectiveParams<f64> {
        let mut e = EffectiveParams::<f64>::at_optimal_detuning(k4, 0.0, 1e-2, n_th);
        e.g_lin = e.kappa / 100.0;
        e
    }

    #[test]
    fn truncation_guard() {
        assert!(TruncationSpec::new(8, 8).is_ok());
        assert!(TruncationSpec::new(2, 32).is_ok());
        for (a, b) in [(1, 8), (8, 1), (9, 8), (0, 0), (65, 1)] {
            let err = TruncationSpec::new(a, b).unwrap_err();
            assert!(err.to_string().contains("rejected"));
        }
    }

    #[test]
    fn vec_index_is_a_bijection() {
        let tr = TruncationSpec::new(3, 4).unwrap();
        let n = tr.product_dim();
        let mut seen = vec![false; n * n];
        for s in 0..n {
            for t in 0..n {
                let k = tr.vec_index(s, t);
                assert!(!seen[k]);
                seen[k] = true;
            }
        }
    }

    fn random_point(rng: &mut ChaCha8Rng) -> (EffectiveParams<f64>, CavityReservoir<f64>) {
        let e = EffectiveParams::<f64>::normalized(
            rng.gen_range(0.05..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..0.3),
            rng.gen_range(0.0..2.0),
        )
        .with_xi(Complex::new(
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ));
        let bath = SqueezedBathParams::<f64>::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.0))
            .unwrap();
        (e, CavityReservoir::Squeezed(bath))
    }

    #[test]
    fn trace_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tr = TruncationSpec::new(3, 3).unwrap();
        for _ in 0..5 {
            let (e, res) = random_point(&mut rng);
            let l = liouvillian(&e, &res, tr);
            let n = tr.product_dim();
            for col in 0..l.dim() {
                let s: Complex64 = (0..n).map(|d| l.entry(tr.vec_index(d, d), col)).sum();
                assert!(s.norm() < 1e-12, "column {col}: {s}");
            }
        }
    }

    #[test]
    fn hermiticity_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let tr = TruncationSpec::new(3, 4).unwrap();
        let n = tr.product_dim();
        for _ in 0..5 {
            let (e, res) = random_point(&mut rng);
            let l = liouvillian(&e, &res, tr);
            let mut x = ComplexMatrix::zeros(n);
            for s in 0..n {
                for t in s..n {
                    let z = Complex::new(
                        rng.gen_range(-1.0..1.0),
                        if s == t {
                            0.0
                        } else {
                            rng.gen_range(-1.0..1.0)
                        },
                    );
                    x[(s, t)] = z;
                    x[(t, s)] = z.conj();
                }
            }
            let y = l.apply(&x);
            let dev = (0..n)
                .flat_map(|s| (0..n).map(move |t| (s, t)))
                .fold(0.0f64, |m, (s, t)| {
                    m.max((y[(s, t)] - y[(t, s)].conj()).norm())
                });
            assert!(dev < 1e-12, "{dev}");
        }
    }

    #[test]
    fn dense_and_banded_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (e, res) = random_point(&mut rng);
        let tr = TruncationSpec::new(2, 3).unwrap();
        let l = liouvillian(&e, &res, tr);
        let dense = l.to_dense();
        let n = tr.product_dim();
        let mut x = ComplexMatrix::zeros(n);
        x[(1, 4)] = Complex::new(0.3, -0.2);
        x[(5, 0)] = Complex::new(1.0, 0.5);
        let y = l.apply(&x);
        let v = l.vectorize(&x);
        for r in 0..l.dim() {
            let s: Complex64 = (0..l.dim()).map(|k| dense[(r, k)] * v[k]).sum();
            assert!((s - l.vectorize(&y)[r]).norm() < 1e-14);
        }
    }

    #[test]
    fn vacuum_at_smallest_truncation() {
        let e = EffectiveParams::<f64>::normalized(0.25, 1.0, 0.0, 0.1, 0.0);
        let rho = fock_steady(
            &e,
            &CavityReservoir::vacuum(),
            TruncationSpec::new(2, 2).unwrap(),
        )
        .unwrap();
        let m = rho.matrix();
        for s in 0..4 {
            for t in 0..4 {
                let expected = if s == 0 && t == 0 { 1.0 } else { 0.0 };
                assert!((m[(s, t)] - Complex::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn decoupled_thermal_fixed_point() {
        let n_th = 0.01;
        let e = EffectiveParams::<f64>::normalized(0.25, 1.0, 0.0, 0.1, n_th);
        let rho = fock_steady(
            &e,
            &CavityReservoir::vacuum(),
            TruncationSpec::new(2, 8).unwrap(),
        )
        .unwrap();
        let q = n_th / (1.0 + n_th);
        for nb in 0..8 {
            let expected = (1.0 - q) * q.powi(nb as i32);
            assert!((rho.population(0, nb) - expected).abs() < 1e-6);
            assert!(rho.population(1, nb).abs() < 1e-12);
        }
        assert!((rho.phonon_number() - n_th).abs() < 1e-6);
    }

    #[test]
    fn moments_match_lyapunov_on_small_truncation() {
        let e = weak(0.1, 0.02);
        let res = CavityReservoir::vacuum();
        let rho = fock_steady(&e, &res, TruncationSpec::new(4, 6).unwrap()).unwrap();
        let cov = gaussian::exact_steady(&e, &res).unwrap();
        let n_exact = gaussian::exact_phonon(&cov).unwrap();
        assert!(rho.edge_population() < 1e-6);
        assert!((rho.phonon_number() - n_exact).abs() < 1e-3 * n_exact);
        let v = rho.quadrature_covariance();
        for i in 0..4 {
            for j in 0..4 {
                assert!((v[i][j] - cov.v[i][j]).abs() < 1e-3 * cov.v[i][i].max(cov.v[j][j]));
            }
        }
    }

    #[test]
    fn squeezed_reservoir_moments_match_lyapunov() {
        let mut e = weak(0.1, 0.05);
        e.g_lin = 0.02;
        let bath = SqueezedBathParams::<f64>::new(0.15, 0.7).unwrap();
        let res = CavityReservoir::Squeezed(bath);
        let rho = fock_steady(&e, &res, TruncationSpec::new(6, 6).unwrap()).unwrap();
        let cov = gaussian::exact_steady(&e, &res).unwrap();
        let v = rho.quadrature_covariance();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (v[i][j] - cov.v[i][j]).abs() < 2e-3 * cov.v[i][i].max(cov.v[j][j]),
                    "{i}{j}"
                );
            }
        }
    }
}
