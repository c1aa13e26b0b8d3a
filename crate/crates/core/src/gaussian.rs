//! Exact treatment of the linearized cavity–mechanics model as a Gaussian
//! open system.
//!
//! Quadratures are ordered `(x_a, p_a, x_b, p_b)` with `x = (a + a†)/√2`,
//! `p = (a − a†)/(i√2)`, so the vacuum has variance 1/2 per quadrature. The
//! covariance is symmetrized: `V_ij = ⟨{R_i, R_j}⟩/2 − ⟨R_i⟩⟨R_j⟩`. With
//! drift `A` and diffusion `D` the covariance obeys `dV/dt = AV + VAᵀ + D`.

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{is_psd_hermitian, poly_roots, ComplexMatrix, LinalgError, Lu};
use crate::model::{CavityReservoir, EffectiveParams};
use crate::scalar::{c, Real};

pub type Mat4<T> = [[T; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("no steady state: drift matrix is unstable (min Hurwitz determinant {margin:e})")]
    NoSteadyState { margin: f64 },
    #[error("Lyapunov system is ill-conditioned (pivot ratio {pivot_ratio:e})")]
    IllConditioned { pivot_ratio: f64 },
    #[error("Lyapunov residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error("unphysical covariance: {0}")]
    Unphysical(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn zeros<T: Real>() -> Mat4<T> {
    [[T::zero(); 4]; 4]
}

fn matmul<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose<T: Real>(a: &Mat4<T>) -> Mat4<T> {
    let mut out = zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn add<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = out[i][j] + b[i][j];
        }
    }
    out
}

fn scale<T: Real>(a: &Mat4<T>, s: T) -> Mat4<T> {
    let mut out = *a;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x = *x * s;
        }
    }
    out
}

/// Largest entry modulus.
pub fn max_norm<T: Real>(a: &Mat4<T>) -> T {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Linear generator of the quadrature means, from
/// `H = Δa†a + ω_b b†b + G(a + a†)(b + b†) + ξ*a² + ξa†²` plus damping.
pub fn drift_matrix<T: Real>(eff: &EffectiveParams<T>) -> Mat4<T> {
    let two = c::<T>(2.0);
    let half_k = eff.kappa / two;
    let half_g = eff.gamma_b / two;
    let (xr, xi) = (eff.xi.re, eff.xi.im);
    let g2 = two * eff.g_lin;
    let z = T::zero();
    [
        [-half_k + two * xi, eff.delta - two * xr, z, z],
        [-(eff.delta + two * xr), -half_k - two * xi, -g2, z],
        [z, z, -half_g, eff.omega_b],
        [-g2, z, -eff.omega_b, -half_g],
    ]
}

/// Symmetrized noise correlations of the cavity and mechanical inputs.
pub fn diffusion_matrix<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
) -> Mat4<T> {
    let half = c::<T>(0.5);
    let n = reservoir.n();
    let m = reservoir.m();
    let mut d = zeros();
    d[0][0] = eff.kappa * (half + n + m.re);
    d[1][1] = eff.kappa * (half + n - m.re);
    d[0][1] = eff.kappa * m.im;
    d[1][0] = d[0][1];
    let mech = eff.gamma_b * (eff.n_th + half);
    d[2][2] = mech;
    d[3][3] = mech;
    d
}

/// Monic characteristic polynomial `[1, c1, c2, c3, c4]` of a 4×4 matrix,
/// from the principal-minor sums.
pub fn characteristic_polynomial<T: Real>(a: &Mat4<T>) -> [T; 5] {
    let trace: T = (0..4).map(|i| a[i][i]).sum();
    let mut e2 = T::zero();
    for i in 0..4 {
        for j in i + 1..4 {
            e2 = e2 + a[i][i] * a[j][j] - a[i][j] * a[j][i];
        }
    }
    let det3 = |i: usize, j: usize, k: usize| {
        let m = |r: usize, s: usize| a[r][s];
        m(i, i) * (m(j, j) * m(k, k) - m(j, k) * m(k, j))
            - m(i, j) * (m(j, i) * m(k, k) - m(j, k) * m(k, i))
            + m(i, k) * (m(j, i) * m(k, j) - m(j, j) * m(k, i))
    };
    let e3 = det3(0, 1, 2) + det3(0, 1, 3) + det3(0, 2, 3) + det3(1, 2, 3);
    [T::one(), -trace, e2, -e3, determinant(a)]
}

fn determinant<T: Real>(a: &Mat4<T>) -> T {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let m = |r: usize, s: usize| a[r][cols[s]];
        m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1))
            - m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))
            + m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0))
    };
    (0..4).fold(T::zero(), |acc, j| {
        let term = a[0][j] * minor(j);
        if j % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// Routh–Hurwitz verdict for the drift matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability<T> {
    pub stable: bool,
    /// Smallest Hurwitz determinant; positive iff stable.
    pub margin: T,
    pub hurwitz: [T; 4],
}

/// Hurwitz determinants of `λ⁴ + c1λ³ + c2λ² + c3λ + c4`.
pub fn hurwitz_determinants<T: Real>(poly: &[T; 5]) -> [T; 4] {
    let [_, c1, c2, c3, c4] = *poly;
    let h1 = c1;
    let h2 = c1 * c2 - c3;
    let h3 = c3 * h2 - c1 * c1 * c4;
    let h4 = c4 * h3;
    [h1, h2, h3, h4]
}

pub fn is_stable<T: Real>(drift: &Mat4<T>) -> Stability<T> {
    let poly = characteristic_polynomial(drift);
    let hurwitz = hurwitz_determinants(&poly);
    let margin = hurwitz.iter().fold(T::infinity(), |m, &h| m.min(h));
    Stability {
        stable: margin > T::zero(),
        margin,
        hurwitz,
    }
}

/// Eigenvalues of the drift matrix as roots of its characteristic quartic.
pub fn drift_eigenvalues<T: Real>(drift: &Mat4<T>) -> Vec<Complex<T>> {
    poly_roots(&characteristic_polynomial(drift))
}

/// Largest real part among the drift eigenvalues.
pub fn spectral_abscissa<T: Real>(drift: &Mat4<T>) -> T {
    drift_eigenvalues(drift)
        .iter()
        .fold(T::neg_infinity(), |m, z| m.max(z.re))
}

/// Steady Gaussian state with the matrices that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState<T> {
    pub v: Mat4<T>,
    pub drift: Mat4<T>,
    pub diffusion: Mat4<T>,
}

impl<T: Real> CovarianceState<T> {
    /// ‖AV + VAᵀ + D‖_max.
    pub fn lyapunov_residual(&self) -> T {
        lyapunov_rhs(&self.drift, &self.diffusion, &self.v)
            .iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// V + iΩ/2 ⪰ 0 within `tol`.
    pub fn is_physical(&self, tol: T) -> bool {
        covariance_is_physical(&self.v, tol)
    }

    /// ⟨a†a⟩ = (V_11 + V_22 − 1)/2.
    pub fn cavity_occupation(&self) -> T {
        (self.v[0][0] + self.v[1][1] - T::one()) / c(2.0)
    }
}

/// Uncertainty-principle check `V + iΩ/2 ⪰ −tol` for a two-mode covariance.
pub fn covariance_is_physical<T: Real>(v: &Mat4<T>, tol: T) -> bool {
    let mut m = ComplexMatrix::<T>::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = Complex::new(v[i][j], T::zero());
        }
    }
    let half = c::<T>(0.5);
    for mode in 0..2 {
        let (x, p) = (2 * mode, 2 * mode + 1);
        m[(x, p)] = m[(x, p)] + Complex::new(T::zero(), half);
        m[(p, x)] = m[(p, x)] - Complex::new(T::zero(), half);
    }
    is_psd_hermitian(&m, tol)
}

fn lyapunov_rhs<T: Real>(a: &Mat4<T>, d: &Mat4<T>, v: &Mat4<T>) -> Mat4<T> {
    let av = matmul(a, v);
    add(&add(&av, &transpose(&av)), d)
}

/// Unique solution of `AV + VAᵀ + D = 0` by a direct 16×16 solve.
pub fn lyapunov_steady<T: Real>(
    drift: &Mat4<T>,
    diffusion: &Mat4<T>,
) -> Result<CovarianceState<T>, GaussianError> {
    let stab = is_stable(drift);
    if !stab.stable {
        return Err(GaussianError::NoSteadyState {
            margin: stab.margin.as_f64(),
        });
    }
    // Row-major vec: (AV + VAᵀ)_ij = Σ_k A_ik V_kj + V_ik A_jk.
    let mut sys = ComplexMatrix::<T>::zeros(16);
    for i in 0..4 {
        for j in 0..4 {
            let row = 4 * i + j;
            for k in 0..4 {
                sys[(row, 4 * k + j)] =
                    sys[(row, 4 * k + j)] + Complex::new(drift[i][k], T::zero());
                sys[(row, 4 * i + k)] =
                    sys[(row, 4 * i + k)] + Complex::new(drift[j][k], T::zero());
            }
        }
    }
    let rhs: Vec<Complex<T>> = diffusion
        .iter()
        .flat_map(|r| r.iter())
        .map(|&x| Complex::new(-x, T::zero()))
        .collect();
    let lu = Lu::factor(sys)?;
    let ratio = lu.pivot_ratio();
    if ratio < T::epsilon() * c(16.0) {
        return Err(GaussianError::IllConditioned {
            pivot_ratio: ratio.as_f64(),
        });
    }
    let x = lu.solve(&rhs)?;
    let mut v = zeros();
    for i in 0..4 {
        for j in 0..4 {
            v[i][j] = (x[4 * i + j].re + x[4 * j + i].re) / c(2.0);
        }
    }
    let state = CovarianceState {
        v,
        drift: *drift,
        diffusion: *diffusion,
    };
    // 1e-10 relative in double precision; loosened to a few hundred ulps in
    // lower precision.
    let rel = c::<T>(1e-10).max(T::epsilon() * c(256.0));
    let tol = rel * max_norm(diffusion).max(T::min_positive_value());
    let res = state.lyapunov_residual();
    if res > tol {
        return Err(GaussianError::Residual {
            residual: res.as_f64(),
        });
    }
    Ok(state)
}

/// Fixed-step fourth-order Runge–Kutta evolution of `dV/dt = AV + VAᵀ + D`.
pub fn evolve_covariance<T: Real>(
    drift: &Mat4<T>,
    diffusion: &Mat4<T>,
    v0: &Mat4<T>,
    duration: T,
    steps: usize,
) -> Mat4<T> {
    let h = duration / c(steps as f64);
    let half = h / c(2.0);
    let f = |v: &Mat4<T>| lyapunov_rhs(drift, diffusion, v);
    let mut v = *v0;
    for _ in 0..steps {
        let k1 = f(&v);
        let k2 = f(&add(&v, &scale(&k1, half)));
        let k3 = f(&add(&v, &scale(&k2, half)));
        let k4 = f(&add(&v, &scale(&k3, h)));
        let incr = add(
            &add(&k1, &scale(&k2, c(2.0))),
            &add(&scale(&k3, c(2.0)), &k4),
        );
        v = add(&v, &scale(&incr, h / c(6.0)));
    }
    v
}

/// Evolves from the vacuum-like `V = I/2` for `20 / min|Re λ|`, with a step
/// small against the fastest eigenvalue.
pub fn integrate_to_steady<T: Real>(
    drift: &Mat4<T>,
    diffusion: &Mat4<T>,
) -> Result<Mat4<T>, GaussianError> {
    let eig = drift_eigenvalues(drift);
    let slowest = eig.iter().fold(T::infinity(), |m, z| m.min(-z.re));
    if !(slowest > T::zero()) {
        return Err(GaussianError::NoSteadyState {
            margin: is_stable(drift).margin.as_f64(),
        });
    }
    let fastest = eig.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let duration = c::<T>(20.0) / slowest;
    let h = c::<T>(0.05) / fastest;
    let steps = (duration / h)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(100);
    let mut v0 = zeros();
    for (i, row) in v0.iter_mut().enumerate() {
        row[i] = c(0.5);
    }
    Ok(evolve_covariance(drift, diffusion, &v0, duration, steps))
}

/// Mechanical occupation `(V_33 + V_44 − 1)/2`.
pub fn exact_phonon<T: Real>(state: &CovarianceState<T>) -> Result<T, GaussianError> {
    let n = (state.v[2][2] + state.v[3][3] - T::one()) / c(2.0);
    if n < c(-1e-9) {
        return Err(GaussianError::Unphysical(format!(
            "negative phonon number {n:e}"
        )));
    }
    Ok(n)
}

/// Drift, diffusion and Lyapunov solve in one call.
pub fn exact_steady<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
) -> Result<CovarianceState<T>, GaussianError> {
    lyapunov_steady(&drift_matrix(eff), &diffusion_matrix(eff, reservoir))
}

/// Exact steady phonon number of the linearized model.
pub fn exact_phonon_number<T: Real>(
    eff: &EffectiveParams<T>,
    reservoir: &CavityReservoir<T>,
) -> Result<T, GaussianError> {
    exact_phonon(&exact_steady(eff, reservoir)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SqueezedBathParams;
    use crate::spectra;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base() -> EffectiveParams<f64> {
        EffectiveParams::<f64>::at_optimal_detuning(0.5, 0.0, 0.05, 2.0)
    }

    #[test]
    fn decoupled_drift_eigenvalues() {
        let e = base();
        let eig = drift_eigenvalues(&drift_matrix(&e));
        let mut re: Vec<f64> = eig.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + e.kappa / 2.0).abs() < 1e-10);
        assert!((re[1] + e.kappa / 2.0).abs() < 1e-10);
        assert!((re[2] + e.gamma_b / 2.0).abs() < 1e-10);
        assert!((re[3] + e.gamma_b / 2.0).abs() < 1e-10);
    }

    #[test]
    fn real_xi_cavity_block_eigenvalues() {
        // −κ/2 ± √(4ξ² − Δ²), here with 4ξ² > Δ² so both are real.
        let e = EffectiveParams::<f64>::normalized(0.5, 0.6, 0.0, 0.05, 0.0)
            .with_xi(Complex::new(0.4, 0.0));
        let disc: f64 = 4.0 * 0.16 - 0.36;
        let mut expected = [-1.0 - disc.sqrt(), -1.0 + disc.sqrt()];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut cav: Vec<f64> = drift_eigenvalues(&drift_matrix(&e))
            .iter()
            .filter(|z| z.im.abs() < 1e-9 && (z.re + 0.025).abs() > 1e-6)
            .map(|z| z.re)
            .collect();
        cav.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(cav.len(), 2);
        for (g, x) in cav.iter().zip(expected) {
            assert!((g - x).abs() < 1e-9);
        }
    }

    #[test]
    fn coupling_enters_only_momentum_equations() {
        let e = base().with_g(0.3);
        let a = drift_matrix(&e);
        assert_eq!(a[2][0], 0.0);
        assert_eq!(a[2][1], 0.0);
        assert_eq!(a[3][0], -0.6);
        assert_eq!(a[1][2], -0.6);
    }

    #[test]
    fn vacuum_diffusion() {
        let mut e = base();
        e.n_th = 0.0;
        let d = diffusion_matrix(&e, &CavityReservoir::vacuum());
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (0, 0) | (1, 1) => e.kappa / 2.0,
                    (2, 2) | (3, 3) => e.gamma_b / 2.0,
                    _ => 0.0,
                };
                assert!((d[i][j] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn squeezed_diffusion_entries() {
        let e = base();
        let r = 0.7;
        let bath = SqueezedBathParams::<f64>::new(r, 0.0).unwrap();
        let d = diffusion_matrix(&e, &CavityReservoir::Squeezed(bath));
        assert!((d[0][0] - e.kappa * (2.0 * r).exp() / 2.0).abs() < 1e-12);
        assert!((d[1][1] - e.kappa * (-2.0 * r).exp() / 2.0).abs() < 1e-12);
        for phi in [0.3, 1.7, 4.0] {
            let bath = SqueezedBathParams::<f64>::new(r, phi).unwrap();
            let d = diffusion_matrix(&e, &CavityReservoir::Squeezed(bath));
            let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
            assert!((det - e.kappa * e.kappa / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&drift_matrix(&base())).stable);
        let e = base();
        let thr = (e.delta * e.delta + e.kappa * e.kappa / 4.0).sqrt() / 2.0;
        let unstable = e.with_xi(Complex::new(thr * 1.01, 0.0));
        assert!(!is_stable(&drift_matrix(&unstable)).stable);
        let below = e.with_xi(Complex::new(thr * 0.99, 0.0));
        assert!(is_stable(&drift_matrix(&below)).stable);
        let ks = e.with_xi(Complex::new((e.delta - 1.0) / 2.0, -e.kappa / 4.0));
        assert!(is_stable(&drift_matrix(&ks)).stable);
    }

    #[test]
    fn thermal_mechanics_at_zero_coupling() {
        let e = base();
        let st = exact_steady(&e, &CavityReservoir::vacuum()).unwrap();
        assert!((st.v[2][2] - 2.5).abs() < 1e-12);
        assert!((st.v[3][3] - 2.5).abs() < 1e-12);
        assert!(st.v[2][3].abs() < 1e-12);
        assert!((exact_phonon(&st).unwrap() - 2.0).abs() < 1e-12);
        assert!(st.is_physical(1e-9));
    }

    #[test]
    fn squeezed_cavity_photon_number_at_zero_detuning() {
        let e = EffectiveParams::<f64>::normalized(0.5, 0.0, 0.0, 0.05, 0.0);
        let bath = SqueezedBathParams::<f64>::new(0.6, 0.9).unwrap();
        let st = exact_steady(&e, &CavityReservoir::Squeezed(bath)).unwrap();
        assert!((st.v[0][0] + st.v[1][1] - (1.0 + 2.0 * bath.n_s())).abs() < 1e-12);
    }

    #[test]
    fn unstable_drift_has_no_steady_state() {
        let e = base().with_xi(Complex::new(5.0, 0.0));
        let err = exact_steady(&e, &CavityReservoir::vacuum()).unwrap_err();
        assert!(err.to_string().contains("no steady state"));
    }

    #[test]
    fn ground_and_thermal_phonon_numbers() {
        let mut v = [[0.0; 4]; 4];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 0.5;
        }
        let st = CovarianceState {
            v,
            drift: v,
            diffusion: v,
        };
        assert_eq!(exact_phonon(&st).unwrap(), 0.0);
        let mut t = st;
        t.v[2][2] = 3.5;
        t.v[3][3] = 3.5;
        assert_eq!(exact_phonon(&t).unwrap(), 3.0);
        let mut bad = st;
        bad.v[2][2] = 0.1;
        bad.v[3][3] = 0.1;
        assert!(exact_phonon(&bad).is_err());
        assert!(!bad.is_physical(1e-9));
    }

    #[test]
    fn time_integration_reaches_lyapunov_solution() {
        let e = EffectiveParams::<f64>::at_optimal_detuning(0.5, 0.2, 0.4, 1.0)
            .with_xi(Complex::new(0.1, -0.2));
        let bath = SqueezedBathParams::<f64>::new(0.3, 0.5).unwrap();
        let res = CavityReservoir::Squeezed(bath);
        let st = exact_steady(&e, &res).unwrap();
        let integrated = integrate_to_steady(&st.drift, &st.diffusion).unwrap();
        let mut diff: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                diff = diff.max((integrated[i][j] - st.v[i][j]).abs());
            }
        }
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn routh_hurwitz_matches_root_abscissa() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..1000 {
            let e = EffectiveParams::<f64>::normalized(
                rng.gen_range(0.01..5.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.001..0.5),
                0.0,
            )
            .with_xi(Complex::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ));
            let a = drift_matrix(&e);
            let abscissa = spectral_abscissa(&a);
            if abscissa.abs() < 1e-7 {
                continue;
            }
            assert_eq!(is_stable(&a).stable, abscissa < 0.0, "{e:?}");
            checked += 1;
        }
        assert!(checked > 900);
    }

    #[test]
    fn weak_coupling_agrees_with_exact() {
        let e = EffectiveParams::<f64>::at_optimal_detuning(0.25, 0.01, 1e-4, 1.0);
        let weak = spectra::rates(&e, None).unwrap().n_b_full.unwrap();
        let exact = exact_phonon_number(&e, &CavityReservoir::vacuum()).unwrap();
        assert!(((weak - exact) / exact).abs() < 0.01, "{weak} vs {exact}");
    }
}
