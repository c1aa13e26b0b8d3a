//! Turns merged inputs into a concrete operating point for one scheme.

use kerr_cool::gaussian::{drift_matrix, is_stable};
use kerr_cool::optimum::{
    hs_condition, optimize_xi, ss_condition, xi_ks, BathHandling, OptimizeMode, OptimizeOptions,
    OptimumError,
};
use kerr_cool::steady::{eliminate, solve_steady};
use kerr_cool::{
    AdiabaticMapF64, CavityReservoirF64, Complex64, EffectiveParamsF64, OptimumResultF64, Scheme,
    SqueezedBathParamsF64, SteadyStateF64, Validate,
};

use crate::config::{BathSpec, DetuningSpec, Inputs, ModelInputs, XiSpec};
use crate::error::{config, CliError, CliResult};

/// Coupling used when none is given; rates then read in units of G²/ω_b.
pub const DEFAULT_G: f64 = 1.0;
/// γ_b/ω_b for γ_b/2π = 10 Hz at ω_b/2π = 10 MHz.
pub const DEFAULT_GAMMA_B: f64 = 1e-6;

/// Mean-field data behind a model-derived operating point.
#[derive(Debug, Clone)]
pub struct ModelResolution {
    pub inputs: ModelInputs,
    pub roots: Vec<SteadyStateF64>,
    /// Elimination at each root; `None` where it is invalid.
    pub maps: Vec<Option<(AdiabaticMapF64, EffectiveParamsF64)>>,
}

/// Effective parameters plus the still-unresolved ξ and bath choices.
#[derive(Debug, Clone)]
pub struct Base {
    pub eff: EffectiveParamsF64,
    pub n_th_given: bool,
    pub xi: Option<XiSpec>,
    pub bath: Option<BathSpec>,
    pub scheme: Option<Scheme>,
    pub model: Option<ModelResolution>,
    /// Inputs filled with a chosen default, with the value used.
    pub defaults: Vec<(&'static str, f64)>,
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

pub fn base(inputs: &Inputs) -> CliResult<Base> {
    match &inputs.model {
        Some(m) => {
            let e = &inputs.effective;
            if e.kappa.is_some()
                || e.detuning.is_some()
                || e.g.is_some()
                || e.xi.is_some()
                || e.gamma_b.is_some()
            {
                return Err(config(
                    "model and effective parameters both given; the model section already fixes kappa, detuning, G, gamma_b and xi",
                ));
            }
            base_from_model(inputs, m)
        }
        None => base_from_effective(inputs),
    }
}

fn base_from_effective(inputs: &Inputs) -> CliResult<Base> {
    let e = &inputs.effective;
    let kappa = e.kappa.ok_or_else(|| {
        config("kappa is required (effective.kappa_over_4wb, --kappa-over-4wb, or a model section)")
    })?;
    let mut defaults = Vec::new();
    let g = e.g.unwrap_or_else(|| {
        defaults.push(("g", DEFAULT_G));
        DEFAULT_G
    });
    let gamma_b = e.gamma_b.unwrap_or_else(|| {
        defaults.push(("gamma_b", DEFAULT_GAMMA_B));
        DEFAULT_GAMMA_B
    });
    let delta = match e.detuning.unwrap_or(DetuningSpec::Optimal) {
        DetuningSpec::Optimal => EffectiveParamsF64::optimal_detuning(kappa, 1.0),
        DetuningSpec::Value(d) => d,
    };
    let xi0 = match e.xi {
        Some(XiSpec::Value(x)) => x,
        _ => Complex64::new(0.0, 0.0),
    };
    let eff = EffectiveParamsF64 {
        delta,
        kappa,
        g_lin: g,
        xi: xi0,
        omega_b: 1.0,
        gamma_b,
        n_th: e.n_th.unwrap_or(0.0),
    }
    .validate()
    .map_err(|err| config(err.to_string()))?;
    Ok(Base {
        eff,
        n_th_given: e.n_th.is_some(),
        xi: e.xi,
        bath: inputs.bath,
        scheme: inputs.scheme,
        model: None,
        defaults,
    })
}

fn base_from_model(inputs: &Inputs, m: &ModelInputs) -> CliResult<Base> {
    let mut params = m.params;
    if let Some(n) = inputs.effective.n_th {
        params.n_th = n;
    }
    let roots = solve_steady(&params).map_err(numerical)?;
    let maps: Vec<_> = roots.iter().map(|r| eliminate(&params, r).ok()).collect();
    let Some(chosen) = maps.get(m.root) else {
        return Err(config(format!(
            "root index {} out of range ({} steady states)",
            m.root,
            roots.len()
        )));
    };
    let (_, eff) = chosen.ok_or_else(|| {
        CliError::Infeasible(format!(
            "magnon elimination is invalid at steady state {}",
            m.root
        ))
    })?;
    let eff = eff
        .validate()
        .map_err(|e| CliError::Infeasible(format!("eliminated parameters: {e}")))?;
    Ok(Base {
        eff,
        n_th_given: m.n_th_given || inputs.effective.n_th.is_some(),
        xi: Some(XiSpec::Value(eff.xi)),
        bath: inputs.bath,
        scheme: inputs.scheme,
        model: Some(ModelResolution {
            inputs: ModelInputs {
                params,
                ..m.clone()
            },
            roots,
            maps,
        }),
        defaults: Vec::new(),
    })
}

fn nonzero(x: Complex64) -> bool {
    x.re != 0.0 || x.im != 0.0
}

impl Base {
    /// The requested scheme, or the one implied by the ξ and bath inputs.
    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or_else(|| {
            let kerr = match self.xi {
                None => false,
                Some(XiSpec::Value(x)) => nonzero(x),
                Some(_) => true,
            };
            let squeezed = match self.bath {
                None | Some(BathSpec::None) => false,
                Some(BathSpec::Auto) => true,
                Some(BathSpec::Fixed { r_s, .. }) => r_s > 0.0,
            };
            match (kerr, squeezed) {
                (false, false) => Scheme::Sb,
                (true, false) => Scheme::Ks,
                (false, true) => Scheme::Ss,
                (true, true) => Scheme::Hs,
            }
        })
    }

    pub fn point(&self) -> CliResult<Point> {
        resolve(&self.eff, self.scheme(), self.xi, self.bath)
    }
}

/// A fully specified operating point.
#[derive(Debug, Clone)]
pub struct Point {
    pub scheme: Scheme,
    pub eff: EffectiveParamsF64,
    pub bath: Option<SqueezedBathParamsF64>,
    pub optimum: Option<OptimumResultF64>,
    pub xi_source: &'static str,
    pub bath_source: &'static str,
}

impl Point {
    pub fn reservoir(&self) -> CavityReservoirF64 {
        match self.bath {
            Some(b) => CavityReservoirF64::Squeezed(b),
            None => CavityReservoirF64::vacuum(),
        }
    }

    /// Routh–Hurwitz verdict for the full linearized system.
    pub fn stable(&self) -> bool {
        is_stable(&drift_matrix(&self.eff)).stable
    }
}

pub fn optimum_error(e: OptimumError) -> CliError {
    match e {
        OptimumError::Infeasible { .. } | OptimumError::EmptyFeasibleSet => {
            CliError::Infeasible(e.to_string())
        }
        OptimumError::Spectrum(_) => CliError::Numerical(e.to_string()),
        OptimumError::Model(_) => CliError::Config(e.to_string()),
    }
}

/// Options for `auto-opt`: default search box, stability gated on the
/// cavity block alone.
pub fn auto_opt_options(eff: &EffectiveParamsF64, bath: BathHandling<f64>) -> OptimizeOptions<f64> {
    let mut opts = OptimizeOptions::for_params(eff);
    opts.stability_g = Some(0.0);
    opts.bath = bath;
    opts
}

/// Fixes ξ and the bath for `scheme`, solving the heating-null condition
/// where the bath is `auto`.
pub fn resolve(
    eff: &EffectiveParamsF64,
    scheme: Scheme,
    xi: Option<XiSpec>,
    bath: Option<BathSpec>,
) -> CliResult<Point> {
    let tag = scheme.tag();
    let zero = Complex64::new(0.0, 0.0);
    let (xi, xi_source) = if scheme.uses_kerr() {
        match xi.unwrap_or(if scheme == Scheme::Hs {
            XiSpec::AutoOpt
        } else {
            XiSpec::AutoKs
        }) {
            XiSpec::Value(x) => (Some(x), "given"),
            XiSpec::AutoKs => (Some(xi_ks(eff)), "auto-ks"),
            // The KS optimum is the analytic heating null.
            XiSpec::AutoOpt if scheme == Scheme::Ks => (Some(xi_ks(eff)), "auto-opt"),
            XiSpec::AutoOpt => (None, "auto-opt"),
        }
    } else {
        match xi {
            None => (Some(zero), "none"),
            Some(XiSpec::Value(x)) if !nonzero(x) => (Some(zero), "none"),
            Some(_) => {
                return Err(config(format!(
                    "scheme {tag} has no two-photon term; drop xi or pick KS/HS"
                )))
            }
        }
    };
    let bath_spec = if scheme.uses_squeezing() {
        match bath.unwrap_or(BathSpec::Auto) {
            BathSpec::None => {
                return Err(config(format!(
                    "scheme {tag} needs a squeezed bath (auto or r_s/phi_s)"
                )))
            }
            b => Some(b),
        }
    } else {
        match bath {
            None | Some(BathSpec::None) => None,
            Some(BathSpec::Fixed { r_s: 0.0, .. }) => None,
            Some(_) => {
                return Err(config(format!(
                    "scheme {tag} uses vacuum input; drop the bath settings or pick SS/HS"
                )))
            }
        }
    };
    let fixed = |r_s: f64, phi_s: f64| {
        SqueezedBathParamsF64::new(r_s, phi_s).map_err(|e| config(format!("bath: {e}")))
    };
    match (xi, bath_spec) {
        (Some(x), None) => Ok(Point {
            scheme,
            eff: eff.with_xi(x),
            bath: None,
            optimum: None,
            xi_source,
            bath_source: "none",
        }),
        (Some(x), Some(bath_spec)) => {
            let e = eff.with_xi(x);
            let (b, source) = match bath_spec {
                BathSpec::Fixed { r_s, phi_s } => (fixed(r_s, phi_s)?, "given"),
                _ if scheme == Scheme::Ss => (ss_condition(&e).map_err(optimum_error)?, "auto"),
                _ => (hs_condition(&e).map_err(optimum_error)?, "auto"),
            };
            Ok(Point {
                scheme,
                eff: e,
                bath: Some(b),
                optimum: None,
                xi_source,
                bath_source: source,
            })
        }
        (None, bath_spec) => {
            let handling = match bath_spec {
                Some(BathSpec::Fixed { r_s, phi_s }) => BathHandling::Fixed(fixed(r_s, phi_s)?),
                _ => BathHandling::Resolve,
            };
            let opts = auto_opt_options(eff, handling);
            let res = optimize_xi(eff, OptimizeMode::Hs, &opts).map_err(optimum_error)?;
            let bath = match handling {
                BathHandling::Fixed(b) => b,
                BathHandling::Resolve => {
                    fixed(res.r_s_opt.unwrap_or(0.0), res.phi_s_opt.unwrap_or(0.0))?
                }
            };
            Ok(Point {
                scheme,
                eff: eff.with_xi(res.xi_opt),
                bath: Some(bath),
                optimum: Some(res),
                xi_source,
                bath_source: if matches!(handling, BathHandling::Resolve) {
                    "auto"
                } else {
                    "given"
                },
            })
        }
    }
}
