//! Weak-coupling radiation-pressure spectra and the cooling figures derived
//! from them.
//!
//! Spectra are normalized so that `V_SB(ω) = G² κ |χ(ω)|²`; the zero-point
//! prefactor is a common constant and drops out of every rate ratio and
//! phonon number.

use num_complex::Complex;
use thiserror::Error;

use crate::model::{CoolingReport, EffectiveParams, Scheme, SqueezedBathParams};
use crate::scalar::{c, i_unit, Real};

/// Modulus below which a spectral denominator is treated as zero.
const DIVERGENCE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("parametric divergence at omega = {omega}")]
    ParametricDivergence { omega: f64 },
    #[error("vanishing denominator {factor} at omega = {omega}")]
    VanishingDenominator { factor: &'static str, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint<T> {
    pub omega: T,
    pub value: T,
}

/// χ(ω) = 1 / (κ/2 − i(ω − Δ)).
pub fn susceptibility<T: Real>(omega: T, eff: &EffectiveParams<T>) -> Complex<T> {
    Complex::new(eff.kappa / c(2.0), -(omega - eff.delta)).inv()
}

/// Sideband-cooling spectrum G²κ|χ(ω)|².
pub fn v_sb<T: Real>(omega: T, eff: &EffectiveParams<T>) -> SpectrumPoint<T> {
    let chi = susceptibility(omega, eff);
    SpectrumPoint {
        omega,
        value: eff.g_lin * eff.g_lin * eff.kappa * chi.norm_sqr(),
    }
}

/// 1 − 4|ξ|²χ(ω)χ*(−ω).
fn parametric_denominator<T: Real>(omega: T, eff: &EffectiveParams<T>) -> Complex<T> {
    let chi_p = susceptibility(omega, eff);
    let chi_m = susceptibility(-omega, eff);
    Complex::new(T::one(), T::zero()) - chi_p * chi_m.conj() * (c::<T>(4.0) * eff.xi.norm_sqr())
}

/// Spectrum with the Kerr-induced two-photon term,
/// `V_SB(ω) |1 − 2iξχ(−ω)|² / |1 − 4|ξ|²χ(ω)χ*(−ω)|²`.
pub fn v_ks<T: Real>(
    omega: T,
    eff: &EffectiveParams<T>,
) -> Result<SpectrumPoint<T>, SpectrumError> {
    let sb = v_sb(omega, eff);
    if eff.xi.norm_sqr() == T::zero() {
        return Ok(sb);
    }
    let den = parametric_denominator(omega, eff);
    if den.norm() < c(DIVERGENCE_TOL) {
        return Err(SpectrumError::ParametricDivergence {
            omega: omega.as_f64(),
        });
    }
    let two_i = i_unit::<T>() * c::<T>(2.0);
    let num = Complex::new(T::one(), T::zero()) - two_i * eff.xi * susceptibility(-omega, eff);
    Ok(SpectrumPoint {
        omega,
        value: sb.value * num.norm_sqr() / den.norm_sqr(),
    })
}

/// A_0(ω) = χ(−ω)/χ*(ω).
pub fn a0_ratio<T: Real>(omega: T, eff: &EffectiveParams<T>) -> Complex<T> {
    susceptibility(-omega, eff) / susceptibility(omega, eff).conj()
}

/// A_ξ(ω) = A_0(ω) [1 + 2iξ*χ*(ω)] / [1 − 2iξχ(−ω)].
pub fn a_xi_ratio<T: Real>(
    omega: T,
    eff: &EffectiveParams<T>,
) -> Result<Complex<T>, SpectrumError> {
    let a0 = a0_ratio(omega, eff);
    if eff.xi.norm_sqr() == T::zero() {
        return Ok(a0);
    }
    let two_i = i_unit::<T>() * c::<T>(2.0);
    let one = Complex::new(T::one(), T::zero());
    let top = one + two_i * eff.xi.conj() * susceptibility(omega, eff).conj();
    let bottom = one - two_i * eff.xi * susceptibility(-omega, eff);
    if bottom.norm() < c(DIVERGENCE_TOL) {
        return Err(SpectrumError::VanishingDenominator {
            factor: "1 - 2i xi chi(-omega)",
            omega: omega.as_f64(),
        });
    }
    Ok(a0 * top / bottom)
}

/// Hybrid spectrum `V_KS(ω) |cosh r_s + A_ξ(ω) e^{−2iΦ_s} sinh r_s|²`.
///
/// With ξ = 0 this is the squeezed-bath (SS) spectrum; with r_s = 0 it is
/// `v_ks` exactly. Evaluated as
/// `V_SB |N cosh r_s + A_0 P e^{−2iΦ_s} sinh r_s|² / |D|²` with
/// N = 1 − 2iξχ(−ω), P = 1 + 2iξ*χ*(ω) and D the parametric denominator,
/// which stays finite where N vanishes (the KS heating null).
pub fn v_hs<T: Real>(
    omega: T,
    eff: &EffectiveParams<T>,
    bath: &SqueezedBathParams<T>,
) -> Result<SpectrumPoint<T>, SpectrumError> {
    let r = bath.r_s();
    if r == T::zero() {
        return v_ks(omega, eff);
    }
    let sb = v_sb(omega, eff);
    let one = Complex::new(T::one(), T::zero());
    let (num, top, den) = if eff.xi.norm_sqr() == T::zero() {
        (one, one, one)
    } else {
        let den = parametric_denominator(omega, eff);
        if den.norm() < c(DIVERGENCE_TOL) {
            return Err(SpectrumError::ParametricDivergence {
                omega: omega.as_f64(),
            });
        }
        let two_i = i_unit::<T>() * c::<T>(2.0);
        let num = one - two_i * eff.xi * susceptibility(-omega, eff);
        let top = one + two_i * eff.xi.conj() * susceptibility(omega, eff).conj();
        (num, top, den)
    };
    let factor = num * r.cosh() + a0_ratio(omega, eff) * top * bath.phase_factor() * r.sinh();
    Ok(SpectrumPoint {
        omega,
        value: sb.value * factor.norm_sqr() / den.norm_sqr(),
    })
}

/// Spectrum of whichever scheme `(ξ, bath)` selects.
pub fn spectrum<T: Real>(
    omega: T,
    eff: &EffectiveParams<T>,
    bath: Option<&SqueezedBathParams<T>>,
) -> Result<SpectrumPoint<T>, SpectrumError> {
    match bath {
        Some(b) => v_hs(omega, eff, b),
        None => v_ks(omega, eff),
    }
}

/// Cooling/heating rates and phonon limits at the operating point.
///
/// A report without net cooling (ΔΓ ≤ 0) is returned rather than rejected;
/// its weak-coupling phonon numbers are `None`.
pub fn rates<T: Real>(
    eff: &EffectiveParams<T>,
    bath: Option<&SqueezedBathParams<T>>,
) -> Result<CoolingReport<T>, SpectrumError> {
    let gamma_minus = spectrum(eff.omega_b, eff, bath)?.value;
    let gamma_plus = spectrum(-eff.omega_b, eff, bath)?.value;
    let net = gamma_minus - gamma_plus;
    let r_s = bath.map_or(T::zero(), |b| b.r_s());
    let (n_c, n_q, n_b) = if net > T::zero() {
        let n_c = eff.n_th * eff.gamma_b / net;
        let n_q = gamma_plus / net;
        (Some(n_c), Some(n_q), Some(n_c + n_q))
    } else {
        (None, None, None)
    };
    let full_den = eff.gamma_b + net;
    let n_b_full = (full_den > T::zero()).then(|| (eff.gamma_b * eff.n_th + gamma_plus) / full_den);
    Ok(CoolingReport {
        gamma_minus,
        gamma_plus,
        net_rate: net,
        n_c,
        n_q,
        n_b,
        n_b_full,
        scheme: Scheme::classify(eff.xi, r_s),
    })
}
