//! Parameter sets, scheme taxonomy and validation.
//!
//! All frequencies are angular. Callers working in "normalized mode" set
//! `omega_b = 1` and express every other rate in units of the mechanical
//! frequency.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{c, Real};

/// Reduced Planck constant in J·s, used only for the zero-point metadata check.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be {requirement} (got {value})")]
    Invalid {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("x_zpf = {x_zpf} inconsistent with sqrt(hbar/(2 m_eff omega_b)) = {expected}")]
    ZeroPointMismatch { x_zpf: f64, expected: f64 },
    #[error("unknown scheme tag {0:?} (expected SB, KS, SS or HS)")]
    UnknownScheme(String),
}

/// Checks the invariants of a parameter set and hands it back unchanged.
pub trait Validate: Sized {
    fn validate(self) -> Result<Self, ModelError>;
}

fn require<T: Real>(
    ok: bool,
    field: &'static str,
    requirement: &'static str,
    value: T,
) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::Invalid {
            field,
            requirement,
            value: value.as_f64(),
        })
    }
}

fn positive<T: Real>(field: &'static str, v: T) -> Result<(), ModelError> {
    require(v > T::zero(), field, "> 0", v)
}

fn non_negative<T: Real>(field: &'static str, v: T) -> Result<(), ModelError> {
    require(v >= T::zero(), field, ">= 0", v)
}

fn finite<T: Real>(field: &'static str, v: T) -> Result<(), ModelError> {
    require(v.is_finite(), field, "finite", v)
}

/// Driven cavity + Kerr magnon + mechanics, in the frame rotating at the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSystemParams<T> {
    /// Cavity–drive detuning δ_a.
    pub delta_a: T,
    pub omega_b: T,
    /// Single-photon optomechanical coupling g_0.
    pub g0: T,
    /// Magnon–drive detuning δ_m.
    pub delta_m: T,
    /// Signed Kerr coefficient K of `-(K/2) m†m†mm`.
    pub kerr: T,
    /// Photon–magnon coupling J.
    pub j_coupling: T,
    /// Drive amplitude ε_d.
    pub drive_amp: T,
    pub kappa_a: T,
    pub kappa_m: T,
    pub gamma_b: T,
    pub n_th: T,
    /// Zero-point amplitude (m). Metadata only.
    pub x_zpf: Option<T>,
    /// Effective mass (kg). Metadata only.
    pub m_eff: Option<T>,
}

impl<T: Real> FullSystemParams<T> {
    /// Reduces an absolute frequency to a detuning from the drive.
    pub fn detuning(omega: T, omega_drive: T) -> T {
        omega - omega_drive
    }

    /// Builds the parameter set from absolute cavity, magnon and drive
    /// frequencies; only the detunings are kept.
    #[allow(clippy::too_many_arguments)]
    pub fn from_absolute(
        omega_a: T,
        omega_m: T,
        omega_d: T,
        omega_b: T,
        g0: T,
        kerr: T,
        j_coupling: T,
        drive_amp: T,
        kappa_a: T,
        kappa_m: T,
        gamma_b: T,
        n_th: T,
    ) -> Self {
        Self {
            delta_a: Self::detuning(omega_a, omega_d),
            omega_b,
            g0,
            delta_m: Self::detuning(omega_m, omega_d),
            kerr,
            j_coupling,
            drive_amp,
            kappa_a,
            kappa_m,
            gamma_b,
            n_th,
            x_zpf: None,
            m_eff: None,
        }
    }
}

impl<T: Real> Validate for FullSystemParams<T> {
    fn validate(self) -> Result<Self, ModelError> {
        for (name, v) in [
            ("delta_a", self.delta_a),
            ("g0", self.g0),
            ("delta_m", self.delta_m),
            ("kerr", self.kerr),
            ("j_coupling", self.j_coupling),
        ] {
            finite(name, v)?;
        }
        positive("omega_b", self.omega_b)?;
        non_negative("drive_amp", self.drive_amp)?;
        positive("kappa_a", self.kappa_a)?;
        positive("kappa_m", self.kappa_m)?;
        positive("gamma_b", self.gamma_b)?;
        non_negative("n_th", self.n_th)?;
        finite("omega_b", self.omega_b)?;
        if let (Some(x), Some(m)) = (self.x_zpf, self.m_eff) {
            positive("m_eff", m)?;
            let expected = (HBAR / (2.0 * m.as_f64() * self.omega_b.as_f64())).sqrt();
            if ((x.as_f64() - expected) / expected).abs() > 1e-9 {
                return Err(ModelError::ZeroPointMismatch {
                    x_zpf: x.as_f64(),
                    expected,
                });
            }
        }
        Ok(self)
    }
}

/// Reduced cavity–mechanics model after the magnon has been eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams<T> {
    /// Effective detuning Δ.
    pub delta: T,
    /// Effective cavity decay κ.
    pub kappa: T,
    /// Linearized optomechanical coupling G, real and non-negative.
    pub g_lin: T,
    /// Two-photon coefficient ξ of `ξ* a² + ξ a†²`.
    pub xi: Complex<T>,
    pub omega_b: T,
    pub gamma_b: T,
    pub n_th: T,
}

impl<T: Real> EffectiveParams<T> {
    /// Normalized-mode constructor (ω_b = 1) parameterized by κ/4ω_b.
    pub fn normalized(kappa_over_4wb: T, delta: T, g_lin: T, gamma_b: T, n_th: T) -> Self {
        Self {
            delta,
            kappa: c::<T>(4.0) * kappa_over_4wb,
            g_lin,
            xi: Complex::new(T::zero(), T::zero()),
            omega_b: T::one(),
            gamma_b,
            n_th,
        }
    }

    /// Sideband-cooling optimal detuning √(κ²/4 + ω_b²).
    pub fn optimal_detuning(kappa: T, omega_b: T) -> T {
        (kappa * kappa / c(4.0) + omega_b * omega_b).sqrt()
    }

    /// Normalized mode at the optimal detuning, no two-photon term.
    pub fn at_optimal_detuning(kappa_over_4wb: T, g_lin: T, gamma_b: T, n_th: T) -> Self {
        let kappa = c::<T>(4.0) * kappa_over_4wb;
        let delta = Self::optimal_detuning(kappa, T::one());
        Self::normalized(kappa_over_4wb, delta, g_lin, gamma_b, n_th)
    }

    pub fn kappa_over_4wb(&self) -> T {
        self.kappa / (c::<T>(4.0) * self.omega_b)
    }

    pub fn with_xi(mut self, xi: Complex<T>) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_g(mut self, g_lin: T) -> Self {
        self.g_lin = g_lin;
        self
    }
}

impl<T: Real> Validate for EffectiveParams<T> {
    fn validate(self) -> Result<Self, ModelError> {
        finite("delta", self.delta)?;
        finite("xi", self.xi.re)?;
        finite("xi", self.xi.im)?;
        positive("kappa", self.kappa)?;
        finite("kappa", self.kappa)?;
        positive("omega_b", self.omega_b)?;
        non_negative("g_lin", self.g_lin)?;
        positive("gamma_b", self.gamma_b)?;
        non_negative("n_th", self.n_th)?;
        Ok(self)
    }
}

/// Broadband squeezed-vacuum reservoir feeding the cavity.
///
/// `n_s` and `m_s` are always recomputed from `(r_s, phi_s)`, so the
/// identity |M_s|² = N_s(N_s + 1) holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedBathParams<T> {
    r_s: T,
    phi_s: T,
    n_s: T,
    m_s: Complex<T>,
}

impl<T: Real> SqueezedBathParams<T> {
    /// Builds the bath, wrapping the phase into [0, 2π).
    pub fn new(r_s: T, phi_s: T) -> Result<Self, ModelError> {
        finite("r_s", r_s)?;
        finite("phi_s", phi_s)?;
        non_negative("r_s", r_s)?;
        let two_pi = T::TAU();
        let mut phi = phi_s % two_pi;
        if phi < T::zero() {
            phi = phi + two_pi;
        }
        if phi >= two_pi {
            phi = T::zero();
        }
        let (sh, ch) = (r_s.sinh(), r_s.cosh());
        let m_s = Complex::from_polar(sh * ch, -c::<T>(2.0) * phi);
        Ok(Self {
            r_s,
            phi_s: phi,
            n_s: sh * sh,
            m_s,
        })
    }

    pub fn vacuum() -> Self {
        Self {
            r_s: T::zero(),
            phi_s: T::zero(),
            n_s: T::zero(),
            m_s: Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn r_s(&self) -> T {
        self.r_s
    }

    pub fn phi_s(&self) -> T {
        self.phi_s
    }

    /// N_s = sinh² r_s.
    pub fn n_s(&self) -> T {
        self.n_s
    }

    /// M_s = e^{-2iΦ_s} sinh r_s cosh r_s.
    pub fn m_s(&self) -> Complex<T> {
        self.m_s
    }

    /// e^{-2iΦ_s}.
    pub fn phase_factor(&self) -> Complex<T> {
        Complex::from_polar(T::one(), -c::<T>(2.0) * self.phi_s)
    }
}

impl<T: Real> Validate for SqueezedBathParams<T> {
    fn validate(self) -> Result<Self, ModelError> {
        let rebuilt = Self::new(self.r_s, self.phi_s)?;
        let defect = (self.m_s.norm_sqr() - self.n_s * (self.n_s + T::one())).abs();
        let scale = T::one().max(self.n_s * (self.n_s + T::one()));
        require(
            defect <= c::<T>(1e-12) * scale
                && (rebuilt.n_s - self.n_s).abs() <= c::<T>(1e-12) * scale,
            "m_s",
            "consistent with |m_s|^2 = n_s (n_s + 1)",
            defect,
        )?;
        Ok(self)
    }
}

/// Noise entering the cavity port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityReservoir<T> {
    /// White thermal noise with occupation `n_a` (no anomalous correlations).
    Thermal { n_a: T },
    /// Broadband squeezed vacuum.
    Squeezed(SqueezedBathParams<T>),
}

impl<T: Real> CavityReservoir<T> {
    pub fn vacuum() -> Self {
        CavityReservoir::Thermal { n_a: T::zero() }
    }

    /// Normal correlator N (⟨a_in† a_in⟩ weight).
    pub fn n(&self) -> T {
        match self {
            CavityReservoir::Thermal { n_a } => *n_a,
            CavityReservoir::Squeezed(b) => b.n_s(),
        }
    }

    /// Anomalous correlator M (⟨a_in a_in⟩ weight).
    pub fn m(&self) -> Complex<T> {
        match self {
            CavityReservoir::Thermal { .. } => Complex::new(T::zero(), T::zero()),
            CavityReservoir::Squeezed(b) => b.m_s(),
        }
    }

    pub fn bath(&self) -> Option<&SqueezedBathParams<T>> {
        match self {
            CavityReservoir::Thermal { .. } => None,
            CavityReservoir::Squeezed(b) => Some(b),
        }
    }
}

/// The four cooling schemes, keyed by which resources are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Plain sideband cooling: no two-photon term, no squeezing.
    Sb,
    /// Kerr-magnon assisted: two-photon term only.
    Ks,
    /// Squeezed bath only.
    Ss,
    /// Hybrid: two-photon term and squeezed bath.
    Hs,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Sb, Scheme::Ks, Scheme::Ss, Scheme::Hs];

    /// Total classification of an operating point by (ξ, r_s).
    pub fn classify<T: Real>(xi: Complex<T>, r_s: T) -> Self {
        let kerr = xi.re != T::zero() || xi.im != T::zero();
        let squeezed = r_s > T::zero();
        match (kerr, squeezed) {
            (false, false) => Scheme::Sb,
            (true, false) => Scheme::Ks,
            (false, true) => Scheme::Ss,
            (true, true) => Scheme::Hs,
        }
    }

    pub fn uses_kerr(self) -> bool {
        matches!(self, Scheme::Ks | Scheme::Hs)
    }

    pub fn uses_squeezing(self) -> bool {
        matches!(self, Scheme::Ss | Scheme::Hs)
    }

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Sb => "SB",
            Scheme::Ks => "KS",
            Scheme::Ss => "SS",
            Scheme::Hs => "HS",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SB" => Ok(Scheme::Sb),
            "KS" => Ok(Scheme::Ks),
            "SS" => Ok(Scheme::Ss),
            "HS" => Ok(Scheme::Hs),
            _ => Err(ModelError::UnknownScheme(s.to_owned())),
        }
    }
}

/// Weak-coupling cooling figures of merit at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingReport<T> {
    /// Γ⁻ = V(ω_b).
    pub gamma_minus: T,
    /// Γ⁺ = V(−ω_b).
    pub gamma_plus: T,
    /// ΔΓ = Γ⁻ − Γ⁺.
    pub net_rate: T,
    /// n_th γ_b / ΔΓ; `None` without net cooling.
    pub n_c: Option<T>,
    /// Γ⁺ / ΔΓ; `None` without net cooling.
    pub n_q: Option<T>,
    /// n_c + n_q; `None` without net cooling.
    pub n_b: Option<T>,
    /// (γ_b n_th + Γ⁺)/(γ_b + ΔΓ); `None` when γ_b + ΔΓ ≤ 0.
    pub n_b_full: Option<T>,
    pub scheme: Scheme,
}

impl<T: Real> CoolingReport<T> {
    pub fn net_cooling(&self) -> bool {
        self.net_rate > T::zero()
    }
}
