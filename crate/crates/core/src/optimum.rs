//! Heating-null conditions and constrained maximization of the net cooling
//! rate over the complex two-photon coefficient ξ.

use num_complex::Complex;
use thiserror::Error;

use crate::gaussian::{drift_matrix, is_stable};
use crate::model::{EffectiveParams, ModelError, SqueezedBathParams};
use crate::scalar::{c, Real};
use crate::simplex;
use crate::spectra::{self, SpectrumError};

/// Heating must fall below this fraction of cooling for a point to count as
/// a heating null.
pub const NULL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimumError {
    #[error("squeezing condition infeasible: |A(omega_b)| = {modulus} >= 1")]
    Infeasible { modulus: f64 },
    #[error("no feasible point in the search region")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// ξ_KS = (Δ − ω_b)/2 − iκ/4, the unique root of 1 − 2iξχ(ω_b) = 0.
pub fn xi_ks<T: Real>(eff: &EffectiveParams<T>) -> Complex<T> {
    Complex::new((eff.delta - eff.omega_b) / c(2.0), -eff.kappa / c(4.0))
}

/// Squeezing that nulls V(−ω_b) for the given ξ:
/// tanh r_s e^{−2iΦ_s} = −A_ξ*(ω_b).
pub fn hs_condition<T: Real>(
    eff: &EffectiveParams<T>,
) -> Result<SqueezedBathParams<T>, OptimumError> {
    let a = spectra::a_xi_ratio(eff.omega_b, eff)?;
    let modulus = a.norm();
    if !(modulus < T::one()) {
        return Err(OptimumError::Infeasible {
            modulus: modulus.as_f64(),
        });
    }
    if modulus == T::zero() {
        return Ok(SqueezedBathParams::vacuum());
    }
    let r_s = modulus.atanh();
    let phi_s = -(-a.conj()).arg() / c(2.0);
    Ok(SqueezedBathParams::new(r_s, phi_s)?)
}

/// [`hs_condition`] with the two-photon term switched off.
pub fn ss_condition<T: Real>(
    eff: &EffectiveParams<T>,
) -> Result<SqueezedBathParams<T>, OptimumError> {
    hs_condition(&eff.with_xi(Complex::new(T::zero(), T::zero())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMode {
    /// Kerr only: the heating null is the single point ξ_KS.
    Ks,
    /// Kerr plus squeezing.
    Hs,
}

/// How the bath is chosen at each trial ξ in HS mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathHandling<T> {
    /// Re-solve the squeezing condition at every ξ.
    Resolve,
    /// Keep the given bath fixed.
    Fixed(SqueezedBathParams<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions<T> {
    pub re_range: (T, T),
    pub im_range: (T, T),
    /// Grid points along (re, im).
    pub grid: (usize, usize),
    pub polish_iterations: usize,
    pub rel_tol: T,
    /// G used for the stability gate; `None` uses the parameters' own G.
    pub stability_g: Option<T>,
    pub bath: BathHandling<T>,
    pub keep_surface: bool,
}

impl<T: Real> OptimizeOptions<T> {
    /// 41×41 grid on [−5, 5]²·ω_b·max(1, κ/4ω_b), simplex polish to 1e-10.
    pub fn for_params(eff: &EffectiveParams<T>) -> Self {
        let half = c::<T>(5.0) * eff.omega_b * T::one().max(eff.kappa_over_4wb());
        Self {
            re_range: (-half, half),
            im_range: (-half, half),
            grid: (41, 41),
            polish_iterations: 2000,
            rel_tol: c(1e-10),
            stability_g: None,
            bath: BathHandling::Resolve,
            keep_surface: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint<T> {
    pub xi_re: T,
    pub xi_im: T,
    /// Net rate; `None` where the point is infeasible or unstable.
    pub value: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumResult<T> {
    pub xi_opt: Complex<T>,
    pub r_s_opt: Option<T>,
    pub phi_s_opt: Option<T>,
    pub net_rate_opt: T,
    pub gamma_minus: T,
    pub gamma_plus: T,
    /// Heating below `NULL_TOLERANCE`·cooling at the optimum.
    pub feasible: bool,
    /// Routh–Hurwitz verdict at (ξ_opt, gate G).
    pub stability_ok: bool,
    /// Γ_KS⁻(ξ_opt)·cosh² r_s, the closed-form HS optimum quoted alongside
    /// the direct evaluation. Differs from `net_rate_opt` whenever r_s > 0.
    pub kerr_rate_cosh2: Option<T>,
    pub grid_best: T,
    pub polish_iterations: usize,
    pub surface: Option<Vec<SurfacePoint<T>>>,
}

/// One evaluation of the HS objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsEvaluation<T> {
    pub net_rate: T,
    pub gamma_minus: T,
    pub gamma_plus: T,
    pub bath: SqueezedBathParams<T>,
}

fn stable_at<T: Real>(eff: &EffectiveParams<T>, xi: Complex<T>, gate_g: T) -> bool {
    is_stable(&drift_matrix(&eff.with_xi(xi).with_g(gate_g))).stable
}

/// Net HS cooling rate at ξ, or `None` if the point is unstable, the
/// squeezing condition is infeasible, or a spectrum diverges.
pub fn hs_objective<T: Real>(
    eff: &EffectiveParams<T>,
    xi: Complex<T>,
    bath: &BathHandling<T>,
    gate_g: T,
) -> Option<HsEvaluation<T>> {
    if !stable_at(eff, xi, gate_g) {
        return None;
    }
    let e = eff.with_xi(xi);
    let bath = match bath {
        BathHandling::Resolve => hs_condition(&e).ok()?,
        BathHandling::Fixed(b) => *b,
    };
    let gm = spectra::v_hs(e.omega_b, &e, &bath).ok()?.value;
    let gp = spectra::v_hs(-e.omega_b, &e, &bath).ok()?.value;
    let net = gm - gp;
    net.is_finite().then_some(HsEvaluation {
        net_rate: net,
        gamma_minus: gm,
        gamma_plus: gp,
        bath,
    })
}

fn linspace<T: Real>((lo, hi): (T, T), n: usize) -> Vec<T> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * c::<T>(k as f64) / c::<T>((n - 1) as f64))
        .collect()
}

/// Maximizes the net cooling rate over ξ subject to stability and, in HS
/// mode, feasibility of the squeezing condition.
pub fn optimize_xi<T: Real>(
    eff: &EffectiveParams<T>,
    mode: OptimizeMode,
    opts: &OptimizeOptions<T>,
) -> Result<OptimumResult<T>, OptimumError> {
    let gate_g = opts.stability_g.unwrap_or(eff.g_lin);
    let res = linspace(opts.re_range, opts.grid.0);
    let ims = linspace(opts.im_range, opts.grid.1);
    let mut surface = opts.keep_surface.then(Vec::new);
    match mode {
        OptimizeMode::Ks => {
            if let Some(s) = surface.as_mut() {
                for &xr in &res {
                    for &xi in &ims {
                        let z = Complex::new(xr, xi);
                        let value = stable_at(eff, z, gate_g)
                            .then(|| spectra::rates(&eff.with_xi(z), None).ok())
                            .flatten()
                            .map(|r| r.net_rate);
                        s.push(SurfacePoint {
                            xi_re: xr,
                            xi_im: xi,
                            value,
                        });
                    }
                }
            }
            let xi = xi_ks(eff);
            let stability_ok = stable_at(eff, xi, gate_g);
            let rep = spectra::rates(&eff.with_xi(xi), None)?;
            let feasible =
                stability_ok && rep.gamma_plus < c::<T>(NULL_TOLERANCE) * rep.gamma_minus;
            Ok(OptimumResult {
                xi_opt: xi,
                r_s_opt: None,
                phi_s_opt: None,
                net_rate_opt: rep.net_rate,
                gamma_minus: rep.gamma_minus,
                gamma_plus: rep.gamma_plus,
                feasible,
                stability_ok,
                kerr_rate_cosh2: None,
                grid_best: rep.net_rate,
                polish_iterations: 0,
                surface,
            })
        }
        OptimizeMode::Hs => {
            let mut best: Option<(Complex<T>, HsEvaluation<T>)> = None;
            for &xr in &res {
                for &xi in &ims {
                    let z = Complex::new(xr, xi);
                    let ev = hs_objective(eff, z, &opts.bath, gate_g);
                    if let Some(s) = surface.as_mut() {
                        s.push(SurfacePoint {
                            xi_re: xr,
                            xi_im: xi,
                            value: ev.map(|e| e.net_rate),
                        });
                    }
                    if let Some(ev) = ev {
                        if best.is_none_or(|(_, b)| ev.net_rate > b.net_rate) {
                            best = Some((z, ev));
                        }
                    }
                }
            }
            let (mut xi_best, mut ev_best) = best.ok_or(OptimumError::EmptyFeasibleSet)?;
            let grid_best = ev_best.net_rate;
            let mut polish_iterations = 0;
            if opts.polish_iterations > 0 {
                let spacing = |(lo, hi): (T, T), n: usize| {
                    if n > 1 {
                        (hi - lo) / c::<T>((n - 1) as f64)
                    } else {
                        c::<T>(1e-3) * eff.omega_b
                    }
                };
                let step = [
                    spacing(opts.re_range, opts.grid.0),
                    spacing(opts.im_range, opts.grid.1),
                ];
                let obj = |x: &[T]| {
                    hs_objective(eff, Complex::new(x[0], x[1]), &opts.bath, gate_g)
                        .map_or(T::infinity(), |e| -e.net_rate)
                };
                let out = simplex::minimize(
                    obj,
                    &[xi_best.re, xi_best.im],
                    &step,
                    opts.rel_tol,
                    opts.polish_iterations,
                );
                polish_iterations = out.iterations;
                let z = Complex::new(out.x[0], out.x[1]);
                if let Some(ev) = hs_objective(eff, z, &opts.bath, gate_g) {
                    if ev.net_rate > ev_best.net_rate {
                        xi_best = z;
                        ev_best = ev;
                    }
                }
            }
            let e = eff.with_xi(xi_best);
            let ks_cool = spectra::v_ks(e.omega_b, &e)?.value;
            let r = ev_best.bath.r_s();
            let cosh2 = r.cosh() * r.cosh();
            Ok(OptimumResult {
                xi_opt: xi_best,
                r_s_opt: Some(r),
                phi_s_opt: Some(ev_best.bath.phi_s()),
                net_rate_opt: ev_best.net_rate,
                gamma_minus: ev_best.gamma_minus,
                gamma_plus: ev_best.gamma_plus,
                feasible: ev_best.gamma_plus < c::<T>(NULL_TOLERANCE) * ev_best.gamma_minus,
                stability_ok: true,
                kerr_rate_cosh2: Some(ks_cool * cosh2),
                grid_best,
                polish_iterations,
                surface,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian;

    fn at(k4: f64) -> EffectiveParams<f64> {
        EffectiveParams::<f64>::at_optimal_detuning(k4, 1.0, 1e-6, 0.0)
    }

    #[test]
    fn xi_ks_reference() {
        let xi = xi_ks(&at(10.0));
        assert!((xi.re - 9.512_492_197_250_39).abs() < 1e-12);
        assert_eq!(xi.im, -10.0);
    }

    #[test]
    fn xi_ks_resolved_limit() {
        let e = EffectiveParams::<f64>::normalized(1e-12, 1.0, 1.0, 1e-3, 0.0);
        assert!(xi_ks(&e).norm() < 1e-11);
    }

    #[test]
    fn ss_condition_reference() {
        let b = ss_condition(&at(10.0)).unwrap();
        assert!((b.r_s() - 0.951_249_219_725_039_3f64.atanh()).abs() < 1e-9);
        assert!((b.r_s() - 1.844_751_934_494_454).abs() < 1e-9);
    }

    #[test]
    fn ss_condition_infeasible_at_zero_detuning() {
        let e = EffectiveParams::<f64>::normalized(10.0, 0.0, 1.0, 1e-6, 0.0);
        let err = ss_condition(&e).unwrap_err();
        assert!(
            matches!(err, OptimumError::Infeasible { modulus } if (modulus - 1.0).abs() < 1e-12)
        );
    }

    #[test]
    fn ss_condition_nulls_heating() {
        let e = at(10.0);
        let b = ss_condition(&e).unwrap();
        let heat = spectra::v_hs(-1.0, &e, &b).unwrap().value;
        let cool = spectra::v_hs(1.0, &e, &b).unwrap().value;
        assert!(heat < 1e-12 * cool);
    }

    #[test]
    fn hs_condition_reduces_to_ss() {
        let e = at(3.0);
        assert_eq!(hs_condition(&e).unwrap(), ss_condition(&e).unwrap());
    }

    #[test]
    fn hs_condition_at_ks_optimum_needs_no_squeezing() {
        let e = at(10.0);
        let k = e.with_xi(xi_ks(&e));
        assert!(spectra::a_xi_ratio(1.0, &k).unwrap().norm() < 1e-14);
        assert!(hs_condition(&k).unwrap().r_s() < 1e-14);
    }

    #[test]
    fn hs_condition_nulls_heating_for_other_xi() {
        let e = at(10.0).with_xi(Complex::new(3.0, 2.0));
        let b = hs_condition(&e).unwrap();
        let heat = spectra::v_hs(-1.0, &e, &b).unwrap().value;
        let cool = spectra::v_hs(1.0, &e, &b).unwrap().value;
        assert!(heat < 1e-12 * cool, "{heat} {cool}");
    }

    #[test]
    fn ks_mode_matches_closed_form() {
        let e = at(10.0);
        let r = optimize_xi(&e, OptimizeMode::Ks, &OptimizeOptions::for_params(&e)).unwrap();
        assert!((r.xi_opt - xi_ks(&e)).norm() < 1e-6);
        let sb = spectra::v_sb(1.0, &e).value;
        assert!((r.net_rate_opt - sb).abs() < 1e-8 * sb);
        assert!(r.feasible && r.stability_ok);
        assert_eq!(
            r.stability_ok,
            gaussian::is_stable(&gaussian::drift_matrix(&e.with_xi(r.xi_opt))).stable
        );
    }

    #[test]
    fn degenerate_budget_returns_ss_point() {
        let e = at(10.0);
        let mut opts = OptimizeOptions::for_params(&e);
        opts.re_range = (0.0, 0.0);
        opts.im_range = (0.0, 0.0);
        opts.grid = (1, 1);
        opts.polish_iterations = 0;
        let r = optimize_xi(&e, OptimizeMode::Hs, &opts).unwrap();
        assert_eq!(r.xi_opt, Complex::new(0.0, 0.0));
        let ss = ss_condition(&e).unwrap();
        assert_eq!(r.r_s_opt, Some(ss.r_s()));
        let sb = spectra::rates(&e, None).unwrap().net_rate;
        assert!((r.net_rate_opt - sb).abs() < 1e-10 * sb);
    }

    #[test]
    fn hs_optimum_dominates_grid_and_nulls_heating() {
        let e = at(0.1);
        let mut opts = OptimizeOptions::for_params(&e);
        opts.stability_g = Some(0.0);
        opts.keep_surface = true;
        let r = optimize_xi(&e, OptimizeMode::Hs, &opts).unwrap();
        let surface = r.surface.as_ref().unwrap();
        assert_eq!(surface.len(), 41 * 41);
        for p in surface {
            if let Some(v) = p.value {
                assert!(r.net_rate_opt >= v);
            }
        }
        assert!(r.feasible);
        assert!(r.gamma_plus < NULL_TOLERANCE * r.gamma_minus);
        // Direct evaluation under the null equals the Kerr-only net rate.
        let ks = spectra::rates(&e.with_xi(r.xi_opt), None).unwrap().net_rate;
        assert!((r.net_rate_opt - ks).abs() < 1e-9 * ks);
    }

    #[test]
    fn refined_grid_does_not_lose_optimum() {
        let e = at(0.1);
        let mut opts = OptimizeOptions::for_params(&e);
        opts.stability_g = Some(0.0);
        let coarse = optimize_xi(&e, OptimizeMode::Hs, &opts).unwrap();
        opts.grid = (81, 81);
        let fine = optimize_xi(&e, OptimizeMode::Hs, &opts).unwrap();
        assert!(fine.net_rate_opt >= coarse.net_rate_opt * (1.0 - 1e-6));
    }

    #[test]
    fn fixed_bath_is_supported() {
        let e = at(1.0);
        let mut opts = OptimizeOptions::for_params(&e);
        opts.stability_g = Some(0.0);
        opts.bath = BathHandling::Fixed(SqueezedBathParams::<f64>::new(0.2, 0.1).unwrap());
        let r = optimize_xi(&e, OptimizeMode::Hs, &opts).unwrap();
        assert_eq!(r.r_s_opt, Some(0.2));
        assert!(r.net_rate_opt > 0.0);
    }

    #[test]
    fn empty_feasible_set() {
        // Region entirely above the parametric threshold.
        let e = at(0.1);
        let mut opts = OptimizeOptions::for_params(&e);
        opts.stability_g = Some(0.0);
        opts.re_range = (10.0, 12.0);
        opts.im_range = (10.0, 12.0);
        opts.grid = (5, 5);
        assert!(matches!(
            optimize_xi(&e, OptimizeMode::Hs, &opts),
            Err(OptimumError::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn enhancement_is_monotone_in_kappa() {
        let mut prev = 0.0;
        for k4 in [0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0] {
            let e = at(k4);
            let ks = spectra::rates(&e.with_xi(xi_ks(&e)), None)
                .unwrap()
                .net_rate;
            let sb = spectra::rates(&e, None).unwrap().net_rate;
            let ratio = ks / sb;
            assert!((ratio - (e.delta + 1.0) / 2.0).abs() < 1e-9 * ratio);
            assert!(ratio > prev);
            prev = ratio;
        }
    }
}
