//! Driven mean-field steady state of the full model and the adiabatic
//! elimination of the magnon.
//!
//! The mean-field equations in the drive frame are
//!
//! ```text
//! 0 = −(iΔ_a' + κ_a/2) a − iJ m − iε_d,      Δ_a' = δ_a + g_0 (b + b*)
//! 0 = −(i(δ_m − K|m|²) + κ_m/2) m − iJ a
//! 0 = −(iω_b + γ_b/2) b − i g_0 |a|²
//! ```
//!
//! The mechanical equation is solved for `b` in closed form, which makes the
//! cavity shift a linear function of `|a|²`. Eliminating `a` through the
//! magnon equation leaves one real polynomial equation in `|m|²`, bounded by
//! the energy balance `κ_a|a|² + κ_m|m|² ≤ 2ε_d|a|`. Every sign change of
//! that polynomial on a dense mixed linear/geometric grid is bracketed and
//! bisected to full precision, so every bistable branch is returned.

use num_complex::Complex;
use thiserror::Error;

use crate::model::{EffectiveParams, FullSystemParams};
use crate::scalar::{c, cplx, i_unit, Real};

/// Grid points per spacing family when bracketing roots.
const SCAN_POINTS: usize = 4000;
/// Residual target relative to max(1, ε_d).
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyError {
    #[error("steady-state solve did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },
    #[error("adiabatic elimination invalid at this root (denominator {denominator:e})")]
    EliminationInvalid { denominator: f64 },
}

/// One mean-field solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<T> {
    pub a_s: Complex<T>,
    pub m_s: Complex<T>,
    pub b_s: Complex<T>,
    /// Euclidean norm of the three equation residuals.
    pub residual: T,
}

/// Shifted parameters at a root, before the effective model is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticMap<T> {
    /// Δ_a = δ_a + g_0 (b_s + b_s*).
    pub delta_a_shift: T,
    /// Δ_m = δ_m − 2K|m_s|².
    pub delta_m_shift: T,
    /// K_m = K m_s².
    pub k_m: Complex<T>,
    /// η = J² / (Δ_m² + κ_m²/4 − |K_m|²).
    pub eta: T,
}

impl<T: Real> AdiabaticMap<T> {
    /// Assembles the map from already-shifted quantities.
    pub fn from_shifts(
        delta_a_shift: T,
        delta_m_shift: T,
        k_m: Complex<T>,
        j_coupling: T,
        kappa_m: T,
    ) -> Result<Self, SteadyError> {
        let denom = delta_m_shift * delta_m_shift + kappa_m * kappa_m / c(4.0) - k_m.norm_sqr();
        if !(denom > T::zero()) {
            return Err(SteadyError::EliminationInvalid {
                denominator: denom.as_f64(),
            });
        }
        Ok(Self {
            delta_a_shift,
            delta_m_shift,
            k_m,
            eta: j_coupling * j_coupling / denom,
        })
    }

    /// Δ = Δ_a − ηΔ_m.
    pub fn delta(&self) -> T {
        self.delta_a_shift - self.eta * self.delta_m_shift
    }

    /// κ = κ_a + ηκ_m.
    pub fn kappa(&self, kappa_a: T, kappa_m: T) -> T {
        kappa_a + self.eta * kappa_m
    }

    /// ξ = −ηK_m/2, in the magnon-drive frame (before the cavity rotation).
    pub fn xi_unrotated(&self) -> Complex<T> {
        self.k_m * (-self.eta / c(2.0))
    }
}

/// Residuals of the three mean-field equations.
pub fn steady_residuals<T: Real>(
    p: &FullSystemParams<T>,
    a: Complex<T>,
    m: Complex<T>,
    b: Complex<T>,
) -> [Complex<T>; 3] {
    let i = i_unit::<T>();
    let half = c::<T>(0.5);
    let delta_a = p.delta_a + p.g0 * (b.re + b.re);
    let r1 = -(i * delta_a + half * p.kappa_a) * a - i * p.j_coupling * m - i * p.drive_amp;
    let r2 =
        -(i * (p.delta_m - p.kerr * m.norm_sqr()) + half * p.kappa_m) * m - i * p.j_coupling * a;
    let r3 = -(i * p.omega_b + half * p.gamma_b) * b - i * p.g0 * a.norm_sqr();
    [r1, r2, r3]
}

fn residual_norm<T: Real>(r: &[Complex<T>; 3]) -> T {
    r.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Mechanical amplitude for a given cavity occupation.
fn mech_amplitude<T: Real>(p: &FullSystemParams<T>, n_a: T) -> Complex<T> {
    let i = i_unit::<T>();
    -i * p.g0 * n_a / (i * p.omega_b + c::<T>(0.5) * p.gamma_b)
}

/// Radiation-pressure shift of the cavity detuning per photon.
fn shift_per_photon<T: Real>(p: &FullSystemParams<T>) -> T {
    let denom = p.omega_b * p.omega_b + p.gamma_b * p.gamma_b / c(4.0);
    -c::<T>(2.0) * p.g0 * p.g0 * p.omega_b / denom
}

/// The scalar equation whose roots are the steady states, and the map from
/// a root back to the amplitudes.
struct Reduced<'a, T> {
    p: &'a FullSystemParams<T>,
}

impl<T: Real> Reduced<'_, T> {
    fn has_magnon(&self) -> bool {
        self.p.j_coupling != T::zero()
    }

    /// Upper bound on the scanned variable from the energy balance.
    fn upper_bound(&self) -> T {
        let p = self.p;
        let e2 = p.drive_amp * p.drive_amp;
        if self.has_magnon() {
            c::<T>(4.0) * e2 / (p.kappa_a * p.kappa_m)
        } else {
            c::<T>(4.0) * e2 / (p.kappa_a * p.kappa_a)
        }
    }

    /// With a magnon: variable is n_m, residual n_m |P|²/J² − ε².
    /// Without: variable is n_a, residual n_a |iΔ_a' + κ_a/2|² − ε².
    fn eval(&self, x: T) -> T {
        let p = self.p;
        let i = i_unit::<T>();
        let half = c::<T>(0.5);
        let e2 = p.drive_amp * p.drive_amp;
        let s = shift_per_photon(p);
        if self.has_magnon() {
            let dm = p.delta_m - p.kerr * x;
            let magnon = i * dm + half * p.kappa_m;
            let n_a = magnon.norm_sqr() * x / (p.j_coupling * p.j_coupling);
            let cavity = i * (p.delta_a + s * n_a) + half * p.kappa_a;
            let poly = cavity * magnon + p.j_coupling * p.j_coupling;
            x * poly.norm_sqr() / (p.j_coupling * p.j_coupling) - e2
        } else {
            let cavity = i * (p.delta_a + s * x) + half * p.kappa_a;
            x * cavity.norm_sqr() - e2
        }
    }

    fn state(&self, x: T) -> SteadyState<T> {
        let p = self.p;
        let i = i_unit::<T>();
        let half = c::<T>(0.5);
        let s = shift_per_photon(p);
        let (a, m) = if self.has_magnon() {
            let magnon = i * (p.delta_m - p.kerr * x) + half * p.kappa_m;
            let n_a = magnon.norm_sqr() * x / (p.j_coupling * p.j_coupling);
            let cavity = i * (p.delta_a + s * n_a) + half * p.kappa_a;
            let total = cavity + magnon.inv() * (p.j_coupling * p.j_coupling);
            let a = -i * p.drive_amp / total;
            let m = -i * p.j_coupling * a / magnon;
            (a, m)
        } else {
            let cavity = i * (p.delta_a + s * x) + half * p.kappa_a;
            (
                -i * p.drive_amp / cavity,
                Complex::new(T::zero(), T::zero()),
            )
        };
        let b = mech_amplitude(p, a.norm_sqr());
        let residual = residual_norm(&steady_residuals(p, a, m, b));
        SteadyState {
            a_s: a,
            m_s: m,
            b_s: b,
            residual,
        }
    }
}

/// Bisection to adjacent representable values.
fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, mut f_lo: T) -> T {
    for _ in 0..400 {
        let mid = lo + (hi - lo) * c(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm < T::zero()) == (f_lo < T::zero()) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * c(0.5)
}

fn scan_grid<T: Real>(upper: T) -> Vec<T> {
    let mut grid = Vec::with_capacity(2 * SCAN_POINTS + 1);
    grid.push(T::zero());
    let n = SCAN_POINTS as f64;
    for k in 1..=SCAN_POINTS {
        grid.push(upper * c(k as f64 / n));
        // Geometric family from upper·1e-14 to upper.
        grid.push(upper * c(10f64.powf(-14.0 * (1.0 - k as f64 / n))));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}

/// Every mean-field steady state, sorted by |m_s|² (then |a_s|²).
pub fn solve_steady<T: Real>(p: &FullSystemParams<T>) -> Result<Vec<SteadyState<T>>, SteadyError> {
    let zero = Complex::new(T::zero(), T::zero());
    if p.drive_amp == T::zero() {
        return Ok(vec![SteadyState {
            a_s: zero,
            m_s: zero,
            b_s: zero,
            residual: T::zero(),
        }]);
    }
    let reduced = Reduced { p };
    let upper = reduced.upper_bound() * c(1.000_001);
    let grid = scan_grid(upper);
    let f = |x: T| reduced.eval(x);
    let mut roots = Vec::new();
    let mut prev_x = grid[0];
    let mut prev_f = f(prev_x);
    for &x in &grid[1..] {
        let fx = f(x);
        if fx == T::zero() {
            roots.push(x);
        } else if (fx < T::zero()) != (prev_f < T::zero()) && prev_f != T::zero() {
            roots.push(bisect(f, prev_x, x, prev_f));
        }
        prev_x = x;
        prev_f = fx;
    }
    let tol = c::<T>(RESIDUAL_TOL) * T::one().max(p.drive_amp);
    let mut states = Vec::with_capacity(roots.len());
    let mut best = T::infinity();
    for x in roots {
        let st = reduced.state(x);
        best = best.min(st.residual);
        if st.residual <= tol {
            states.push(st);
        }
    }
    if states.is_empty() {
        return Err(SteadyError::NoConvergence {
            best_residual: best.as_f64(),
        });
    }
    states.sort_by(|u, v| {
        (u.m_s.norm_sqr(), u.a_s.norm_sqr())
            .partial_cmp(&(v.m_s.norm_sqr(), v.a_s.norm_sqr()))
            .expect("finite amplitudes")
    });
    Ok(states)
}

/// Adiabatic elimination of the magnon at a chosen root.
///
/// The cavity frame is rotated by the phase θ of `a_s` so that the
/// linearized coupling G = g_0|a_s| is real; the two-photon coefficient is
/// rotated along with it (ξ → ξ e^{−2iθ}). Squeezing phases used with the
/// returned parameters are understood in this rotated frame.
pub fn eliminate<T: Real>(
    p: &FullSystemParams<T>,
    root: &SteadyState<T>,
) -> Result<(AdiabaticMap<T>, EffectiveParams<T>), SteadyError> {
    let delta_a_shift = p.delta_a + p.g0 * (root.b_s.re + root.b_s.re);
    let delta_m_shift = p.delta_m - c::<T>(2.0) * p.kerr * root.m_s.norm_sqr();
    let k_m = root.m_s * root.m_s * p.kerr;
    let map =
        AdiabaticMap::from_shifts(delta_a_shift, delta_m_shift, k_m, p.j_coupling, p.kappa_m)?;
    let theta = if root.a_s.norm() > T::zero() {
        root.a_s.arg()
    } else {
        T::zero()
    };
    let xi = map.xi_unrotated() * Complex::from_polar(T::one(), -c::<T>(2.0) * theta);
    let eff = EffectiveParams {
        delta: map.delta(),
        kappa: map.kappa(p.kappa_a, p.kappa_m),
        g_lin: p.g0.abs() * root.a_s.norm(),
        xi: cplx(xi.re, xi.im),
        omega_b: p.omega_b,
        gamma_b: p.gamma_b,
        n_th: p.n_th,
    };
    Ok((map, eff))
}
