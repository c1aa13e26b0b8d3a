//! Single-point subcommands.

use kerr_cool::fock::{fock_steady, FockError, TruncationSpec};
use kerr_cool::gaussian::{drift_matrix, is_stable};
use kerr_cool::optimum::{optimize_xi, BathHandling, OptimizeMode, OptimizeOptions};
use kerr_cool::spectra::{self, v_sb};
use kerr_cool::{CoolingReportF64, SqueezedBathParamsF64};
use serde_json::json;

use crate::analysis::{self, exact_numbers, rel_diff};
use crate::config::{BathSpec, DetuningSpec, Inputs};
use crate::error::{config, CliError, CliResult};
use crate::meta::{Meta, Provenance};
use crate::output::{Cell, Heatmap, PlotOptions, Table, Writer};
use crate::resolve::{base, optimum_error, Base, Point};

pub const RATE_COLUMNS: [&str; 18] = [
    "scheme",
    "kappa_over_4wb",
    "delta_over_wb",
    "g_over_wb",
    "gamma_b_over_wb",
    "n_th",
    "xi_re",
    "xi_im",
    "r_s",
    "phi_s",
    "gamma_minus",
    "gamma_plus",
    "net_rate",
    "n_c",
    "n_q",
    "n_b",
    "n_b_full",
    "stable",
];

/// One row under [`RATE_COLUMNS`]. Thermal quantities are left empty when
/// n_th was not given.
pub fn rate_cells(p: &Point, r: &CoolingReportF64, n_th_given: bool) -> Vec<Cell> {
    let thermal = |x: Option<f64>| {
        if n_th_given {
            Cell::from(x)
        } else {
            Cell::Missing
        }
    };
    vec![
        p.scheme.tag().into(),
        p.eff.kappa_over_4wb().into(),
        p.eff.delta.into(),
        p.eff.g_lin.into(),
        p.eff.gamma_b.into(),
        thermal(Some(p.eff.n_th)),
        p.eff.xi.re.into(),
        p.eff.xi.im.into(),
        p.bath.map(|b| b.r_s()).into(),
        p.bath.map(|b| b.phi_s()).into(),
        r.gamma_minus.into(),
        r.gamma_plus.into(),
        r.net_rate.into(),
        thermal(r.n_c),
        r.n_q.into(),
        thermal(r.n_b),
        thermal(r.n_b_full),
        p.stable().into(),
    ]
}

fn user(inputs: &Inputs, key: &str) -> bool {
    inputs.origins.iter().any(|(k, _)| k == key)
}

/// Records the operating point and its provenance.
pub fn record_point(meta: &mut Meta, inputs: &Inputs, b: &Base, p: &Point) {
    use Provenance::*;
    let from_model = b.model.is_some();
    let origin = |key: &str| {
        if from_model {
            Derived
        } else if user(inputs, key) {
            User
        } else {
            Chosen
        }
    };
    meta.param(
        "scheme",
        p.scheme.tag(),
        if inputs.scheme.is_some() {
            User
        } else {
            Derived
        },
    );
    meta.param("kappa_over_4wb", p.eff.kappa_over_4wb(), origin("kappa"));
    let detuning_origin = match inputs.effective.detuning {
        _ if from_model => Derived,
        Some(DetuningSpec::Value(_)) => User,
        _ => Derived,
    };
    meta.param("delta_over_wb", p.eff.delta, detuning_origin);
    meta.param("g_over_wb", p.eff.g_lin, origin("g"));
    meta.param("gamma_b_over_wb", p.eff.gamma_b, origin("gamma_b"));
    if b.n_th_given {
        meta.param(
            "n_th",
            p.eff.n_th,
            if from_model && !user(inputs, "n_th") {
                User
            } else {
                origin("n_th")
            },
        );
    } else {
        meta.gap("n_th not given: thermal phonon numbers (n_c, n_b, exact n_b) are omitted");
    }
    let xi_origin = match p.xi_source {
        "given" if !from_model => User,
        "none" => Chosen,
        _ => Derived,
    };
    meta.param("xi_re", p.eff.xi.re, xi_origin);
    meta.param("xi_im", p.eff.xi.im, xi_origin);
    meta.note(format!("xi source: {}", p.xi_source));
    if let Some(bath) = p.bath {
        let o = if p.bath_source == "given" {
            User
        } else {
            Derived
        };
        meta.param("r_s", bath.r_s(), o);
        meta.param("phi_s", bath.phi_s(), o);
        meta.note(format!("bath source: {}", p.bath_source));
    }
    for (name, _) in &b.defaults {
        match *name {
            "g" => meta.note("G not given: rates are in units of G^2/omega_b with G = omega_b"),
            "gamma_b" => meta.note("gamma_b not given: gamma_b/omega_b = 1e-6 (10 Hz over 10 MHz)"),
            _ => meta,
        };
    }
    if p.xi_source == "auto-opt" && p.optimum.is_some() {
        meta.note("auto-opt: stability gated on the cavity block alone (G = 0)");
    }
}

fn finish(w: &mut Writer, stem: &str, meta: &Meta, results: serde_json::Value) -> CliResult<()> {
    let mut files = w.files().to_vec();
    files.push(format!("{stem}.json"));
    w.json(stem, &meta.finish(&files, results))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn spectrum(w: &mut Writer, inputs: Inputs, lo: f64, hi: f64, n: usize) -> CliResult<()> {
    if n < 2 || !(hi > lo) {
        return Err(config(
            "spectrum grid needs --points >= 2 and --omega-max > --omega-min",
        ));
    }
    let b = base(&inputs)?;
    let p = b.point()?;
    let sb = p.eff.with_xi(Default::default());
    let mut t = Table::new(&["omega_over_wb", "v_sb", "v"]);
    let mut divergent = 0usize;
    for omega in linspace(lo, hi, n) {
        let v = analysis::spectrum_value(&p, omega);
        divergent += usize::from(v.is_none());
        t.push(vec![omega.into(), v_sb(omega, &sb).value.into(), v.into()]);
    }
    w.csv("spectrum", &t)?;
    w.line_plot(
        "spectrum",
        &t,
        "omega_over_wb",
        &["v_sb", "v"],
        PlotOptions {
            title: format!("{} spectrum", p.scheme),
            x_label: "omega/omega_b".into(),
            y_label: "V(omega)".into(),
            ..Default::default()
        },
    )?;
    let mut meta = Meta::new("spectrum", inputs.seed);
    record_point(&mut meta, &inputs, &b, &p);
    if divergent > 0 {
        meta.note(format!(
            "{divergent} grid points sit on a parametric divergence and are left empty"
        ));
    }
    let results = json!({
        "v_at_plus_wb": analysis::spectrum_value(&p, 1.0),
        "v_at_minus_wb": analysis::spectrum_value(&p, -1.0),
    });
    finish(w, "spectrum", &meta, results)
}

pub fn rates(w: &mut Writer, inputs: Inputs) -> CliResult<()> {
    let b = base(&inputs)?;
    let p = b.point()?;
    let r = analysis::report(&p)?;
    let mut t = Table::new(&RATE_COLUMNS);
    t.push(rate_cells(&p, &r, b.n_th_given));
    w.csv("rates", &t)?;
    let mut meta = Meta::new("rates", inputs.seed);
    record_point(&mut meta, &inputs, &b, &p);
    if !r.net_cooling() {
        meta.note("no net cooling at this point (net_rate <= 0); phonon numbers are left empty");
    }
    if !p.stable() {
        meta.note(
            "the linearized system is unstable at this point; weak-coupling numbers are formal",
        );
    }
    let results = json!({"net_rate": r.net_rate, "n_q": r.n_q, "stable": p.stable()});
    finish(w, "rates", &meta, results)
}

pub fn steady(w: &mut Writer, inputs: Inputs) -> CliResult<()> {
    let b = base(&inputs)?;
    let m = b
        .model
        .as_ref()
        .ok_or_else(|| config("steady needs a model section in the config"))?;
    let mut t = Table::new(&[
        "root",
        "selected",
        "a_re",
        "a_im",
        "a_abs2",
        "m_re",
        "m_im",
        "m_abs2",
        "b_re",
        "b_im",
        "residual",
        "delta_a_shift",
        "delta_m_shift",
        "eta",
        "delta",
        "kappa",
        "g",
        "xi_re",
        "xi_im",
    ]);
    for (k, (r, map)) in m.roots.iter().zip(&m.maps).enumerate() {
        let mut row: Vec<Cell> = vec![
            (k as f64).into(),
            (k == m.inputs.root).into(),
            r.a_s.re.into(),
            r.a_s.im.into(),
            r.a_s.norm_sqr().into(),
            r.m_s.re.into(),
            r.m_s.im.into(),
            r.m_s.norm_sqr().into(),
            r.b_s.re.into(),
            r.b_s.im.into(),
            r.residual.into(),
        ];
        match map {
            Some((map, eff)) => row.extend(
                [
                    map.delta_a_shift,
                    map.delta_m_shift,
                    map.eta,
                    eff.delta,
                    eff.kappa,
                    eff.g_lin,
                    eff.xi.re,
                    eff.xi.im,
                ]
                .map(Cell::from),
            ),
            None => row.extend(std::iter::repeat_n(Cell::Missing, 8)),
        }
        t.push(row);
    }
    w.csv("steady", &t)?;
    let mut meta = Meta::new("steady", inputs.seed);
    meta.param(
        "root",
        m.inputs.root as u64,
        if m.inputs.root == 0 {
            Provenance::Chosen
        } else {
            Provenance::User
        },
    );
    meta.note("roots sorted by |m_s|^2; the default branch is the smallest");
    meta.note("xi is expressed in the cavity frame rotated by the phase of a_s");
    let results = json!({"roots": m.roots.len()});
    finish(w, "steady", &meta, results)
}

pub struct OptimizeArgs<'a> {
    pub mode: &'a str,
    pub grid: usize,
    pub polish: usize,
    pub half_width: Option<f64>,
    pub surface: bool,
    pub gate: &'a str,
}

pub fn optimize(w: &mut Writer, inputs: Inputs, a: OptimizeArgs) -> CliResult<()> {
    let mode = match a.mode.to_ascii_uppercase().as_str() {
        "KS" => OptimizeMode::Ks,
        "HS" => OptimizeMode::Hs,
        other => return Err(config(format!("--mode must be KS or HS (got {other})"))),
    };
    if a.grid < 2 {
        return Err(config("--grid must be at least 2"));
    }
    let b = base(&inputs)?;
    let eff = b.eff;
    let mut opts = OptimizeOptions::for_params(&eff);
    if let Some(h) = a.half_width {
        if !(h > 0.0 && h.is_finite()) {
            return Err(config("--half-width must be positive"));
        }
        opts.re_range = (-h, h);
        opts.im_range = (-h, h);
    }
    opts.grid = (a.grid, a.grid);
    opts.polish_iterations = a.polish;
    opts.keep_surface = a.surface;
    opts.stability_g = match a.gate {
        "cavity" => Some(0.0),
        "full" => None,
        other => {
            return Err(config(format!(
                "--gate must be cavity or full (got {other})"
            )))
        }
    };
    opts.bath = match b.bath {
        Some(BathSpec::Fixed { r_s, phi_s }) => BathHandling::Fixed(
            SqueezedBathParamsF64::new(r_s, phi_s).map_err(|e| config(format!("bath: {e}")))?,
        ),
        _ => BathHandling::Resolve,
    };
    let res = optimize_xi(&eff, mode, &opts).map_err(optimum_error)?;
    let sb = spectra::rates(&eff.with_xi(Default::default()), None)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut t = Table::new(&[
        "mode",
        "xi_re",
        "xi_im",
        "r_s",
        "phi_s",
        "net_rate",
        "gamma_minus",
        "gamma_plus",
        "feasible",
        "stability_ok",
        "kerr_rate_cosh2",
        "grid_best",
        "polish_iterations",
        "net_rate_sb",
        "enhancement_over_sb",
    ]);
    t.push(vec![
        a.mode.to_ascii_uppercase().as_str().into(),
        res.xi_opt.re.into(),
        res.xi_opt.im.into(),
        res.r_s_opt.into(),
        res.phi_s_opt.into(),
        res.net_rate_opt.into(),
        res.gamma_minus.into(),
        res.gamma_plus.into(),
        res.feasible.into(),
        res.stability_ok.into(),
        res.kerr_rate_cosh2.into(),
        res.grid_best.into(),
        (res.polish_iterations as f64).into(),
        sb.net_rate.into(),
        (res.net_rate_opt / sb.net_rate).into(),
    ]);
    w.csv("optimize", &t)?;
    if let Some(surface) = &res.surface {
        let mut s = Table::new(&["xi_re", "xi_im", "net_rate"]);
        for pt in surface {
            s.push(vec![pt.xi_re.into(), pt.xi_im.into(), pt.value.into()]);
        }
        w.csv("optimize_surface", &s)?;
        if w.svg_enabled() {
            w.heatmap(
                "optimize_surface",
                &surface_heatmap(surface, a.grid, a.grid),
                "net cooling rate over xi",
            )?;
        }
    }
    let mut meta = Meta::new("optimize", inputs.seed);
    let p = Point {
        scheme: b.scheme(),
        eff,
        bath: None,
        optimum: None,
        xi_source: "optimized",
        bath_source: "none",
    };
    record_point(&mut meta, &inputs, &b, &p);
    meta.param(
        "grid",
        a.grid as u64,
        if a.grid == 41 {
            Provenance::Chosen
        } else {
            Provenance::User
        },
    );
    meta.param(
        "search_half_width",
        opts.re_range.1,
        if a.half_width.is_some() {
            Provenance::User
        } else {
            Provenance::Chosen
        },
    );
    meta.note(format!("stability gate: {}", a.gate));
    if mode == OptimizeMode::Hs {
        meta.note(match opts.bath {
            BathHandling::Resolve => "bath re-solved from the heating-null condition at every xi",
            BathHandling::Fixed(_) => "bath held fixed during the search",
        });
        meta.note(
            "kerr_rate_cosh2 is Gamma_KS^-(xi_opt) cosh^2 r_s, quoted next to the direct net rate",
        );
    }
    let results = json!({
        "xi_opt": [res.xi_opt.re, res.xi_opt.im],
        "net_rate": res.net_rate_opt,
        "feasible": res.feasible,
    });
    finish(w, "optimize", &meta, results)
}

/// Surface points come out re-major: all im values for the first re, etc.
pub fn surface_heatmap(
    surface: &[kerr_cool::optimum::SurfacePoint<f64>],
    n_re: usize,
    n_im: usize,
) -> Heatmap {
    let xs: Vec<f64> = surface.iter().step_by(n_im).map(|p| p.xi_re).collect();
    let ys: Vec<f64> = surface.iter().take(n_im).map(|p| p.xi_im).collect();
    let values = surface
        .chunks(n_im)
        .take(n_re)
        .map(|c| c.iter().map(|p| p.value).collect())
        .collect();
    Heatmap {
        xs,
        ys,
        values,
        x_label: "xi_re/omega_b".into(),
        y_label: "xi_im/omega_b".into(),
    }
}

fn fock_error(e: FockError) -> CliError {
    match e {
        FockError::Truncation { .. } => CliError::Config(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

pub fn exact(w: &mut Writer, inputs: Inputs, dc: usize, dm: usize, no_fock: bool) -> CliResult<()> {
    let b = base(&inputs)?;
    if !b.n_th_given {
        return Err(config(
            "exact needs n_th (--n-th, --temperature-k, or effective.n_th)",
        ));
    }
    let p = b.point()?;
    if !is_stable(&drift_matrix(&p.eff)).stable {
        return Err(CliError::Infeasible(
            "linearized system is unstable at this point".into(),
        ));
    }
    let reservoir = p.reservoir();
    let (n_b, n_a) = exact_numbers(&p.eff, &reservoir)
        .ok_or_else(|| CliError::Numerical("Lyapunov solve failed".into()))?;
    let r = analysis::report(&p)?;
    let fock = if no_fock {
        None
    } else {
        let trunc = TruncationSpec::new(dc, dm).map_err(fock_error)?;
        Some(fock_steady(&p.eff, &reservoir, trunc).map_err(fock_error)?)
    };
    let mut t = Table::new(&[
        "n_b_weak",
        "n_b_weak_full",
        "n_b_lyapunov",
        "n_b_fock",
        "n_a_lyapunov",
        "n_a_fock",
        "fock_edge_population",
        "fock_residual",
        "rel_diff_weak_full_vs_lyapunov",
        "rel_diff_fock_vs_lyapunov",
    ]);
    t.push(vec![
        r.n_b.into(),
        r.n_b_full.into(),
        n_b.into(),
        fock.as_ref().map(|f| f.phonon_number()).into(),
        n_a.into(),
        fock.as_ref().map(|f| f.cavity_occupation()).into(),
        fock.as_ref().map(|f| f.edge_population()).into(),
        fock.as_ref().map(|f| f.residual()).into(),
        r.n_b_full.map(|x| rel_diff(x, n_b)).into(),
        fock.as_ref()
            .map(|f| rel_diff(f.phonon_number(), n_b))
            .into(),
    ]);
    w.csv("exact", &t)?;
    let mut meta = Meta::new("exact", inputs.seed);
    record_point(&mut meta, &inputs, &b, &p);
    if let Some(f) = &fock {
        meta.param("dim_cavity", dc as u64, Provenance::User);
        meta.param("dim_mech", dm as u64, Provenance::User);
        if f.edge_population() > 1e-3 {
            meta.note("Fock truncation edge carries more than 1e-3 of the population; enlarge the dimensions");
        }
    }
    let results =
        json!({"n_b_lyapunov": n_b, "n_b_fock": fock.as_ref().map(|f| f.phonon_number())});
    finish(w, "exact", &meta, results)
}
