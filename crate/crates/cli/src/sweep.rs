//! One-axis parameter sweeps, evaluated in parallel and written in grid order.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::json;

use crate::analysis::{self, exact_n_b, n_b_min};
use crate::commands::{rate_cells, record_point, RATE_COLUMNS};
use crate::config::{parse_scheme, BathSpec, DetuningSpec, Inputs, XiSpec};
use crate::error::{config, CliError, CliResult};
use crate::meta::{Meta, Provenance};
use crate::output::{Cell, PlotOptions, Table, Writer};
use crate::resolve::base;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Kappa,
    G,
    GHz,
    Delta,
    XiRe,
    XiIm,
    NTh,
    RS,
}

impl Axis {
    fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "kappa_over_4wb" => Axis::Kappa,
            "g_over_wb" => Axis::G,
            "g_over_2pi" => Axis::GHz,
            "delta_over_wb" => Axis::Delta,
            "xi_re" => Axis::XiRe,
            "xi_im" => Axis::XiIm,
            "n_th" => Axis::NTh,
            "r_s" => Axis::RS,
            _ => {
                return Err(config(format!(
                    "unknown sweep axis '{s}' (kappa_over_4wb, g_over_wb, g_over_2pi, delta_over_wb, xi_re, xi_im, n_th, r_s)"
                )))
            }
        })
    }

    fn name(self) -> &'static str {
        match self {
            Axis::Kappa => "kappa_over_4wb",
            Axis::G => "g_over_wb",
            Axis::GHz => "g_over_2pi",
            Axis::Delta => "delta_over_wb",
            Axis::XiRe => "xi_re",
            Axis::XiIm => "xi_im",
            Axis::NTh => "n_th",
            Axis::RS => "r_s",
        }
    }

    /// Inputs with this axis set to `v`.
    fn apply(self, inputs: &Inputs, v: f64) -> CliResult<Inputs> {
        let mut i = inputs.clone();
        let e = &mut i.effective;
        match self {
            Axis::Kappa => e.kappa = Some(4.0 * v),
            Axis::G => e.g = Some(v),
            Axis::GHz => {
                let wb = i
                    .omega_b_rad
                    .ok_or_else(|| config("axis g_over_2pi needs omega_b in absolute units"))?;
                e.g = Some(2.0 * PI * v / wb);
            }
            Axis::Delta => e.detuning = Some(DetuningSpec::Value(v)),
            Axis::XiRe | Axis::XiIm => {
                let mut x = match e.xi {
                    None => Default::default(),
                    Some(XiSpec::Value(x)) => x,
                    Some(_) => {
                        return Err(config(
                            "sweeping xi needs a numeric xi, not auto-ks/auto-opt",
                        ))
                    }
                };
                if self == Axis::XiRe {
                    x.re = v;
                } else {
                    x.im = v;
                }
                e.xi = Some(XiSpec::Value(x));
            }
            Axis::NTh => e.n_th = Some(v),
            Axis::RS => {
                let phi_s = match i.bath {
                    Some(BathSpec::Fixed { phi_s, .. }) => phi_s,
                    None | Some(BathSpec::None) => 0.0,
                    Some(BathSpec::Auto) => {
                        return Err(config("sweeping r_s conflicts with bath mode auto"))
                    }
                };
                i.bath = Some(BathSpec::Fixed { r_s: v, phi_s });
            }
        }
        Ok(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Rates,
    NB,
    NBMin,
    Spectra,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub log: bool,
    pub outputs: Vec<Quantity>,
}

/// `count` points from `start` to `stop`, endpoints exact.
pub fn grid(start: f64, stop: f64, count: usize, log: bool) -> CliResult<Vec<f64>> {
    if count < 2 {
        return Err(config("sweep count must be at least 2"));
    }
    if start == stop || !start.is_finite() || !stop.is_finite() {
        return Err(config("sweep needs finite start != stop"));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(config("log spacing needs positive endpoints"));
    }
    let n = (count - 1) as f64;
    let mut v: Vec<f64> = (0..count)
        .map(|k| {
            let f = k as f64 / n;
            if log {
                (start.ln() + (stop.ln() - start.ln()) * f).exp()
            } else {
                start + (stop - start) * f
            }
        })
        .collect();
    v[0] = start;
    v[count - 1] = stop;
    Ok(v)
}

impl SweepPlan {
    pub fn from_inputs(
        inputs: &Inputs,
        axis: &Option<String>,
        start: Option<f64>,
        stop: Option<f64>,
        count: Option<usize>,
        spacing: &Option<String>,
        outputs: &Option<String>,
    ) -> CliResult<Self> {
        let sec = inputs.sweep.as_ref();
        let axis = axis
            .clone()
            .or_else(|| sec.map(|s| s.axis.clone()))
            .ok_or_else(|| config("sweep needs an axis (--axis or sweep.axis)"))?;
        let start = start
            .or(sec.map(|s| s.start))
            .ok_or_else(|| config("sweep needs a start"))?;
        let stop = stop
            .or(sec.map(|s| s.stop))
            .ok_or_else(|| config("sweep needs a stop"))?;
        let count = count
            .or(sec.map(|s| s.count))
            .ok_or_else(|| config("sweep needs a count"))?;
        let spacing = spacing
            .clone()
            .or_else(|| sec.and_then(|s| s.spacing.clone()))
            .unwrap_or_else(|| "linear".into());
        let log = match spacing.as_str() {
            "linear" => false,
            "log" => true,
            other => {
                return Err(config(format!(
                    "spacing must be linear or log (got {other})"
                )))
            }
        };
        let outputs: Vec<String> = match outputs {
            Some(s) => s.split(',').map(|x| x.trim().to_string()).collect(),
            None => sec
                .and_then(|s| s.outputs.clone())
                .unwrap_or_else(|| vec!["rates".into()]),
        };
        let outputs = outputs
            .iter()
            .map(|o| match o.as_str() {
                "rates" => Ok(Quantity::Rates),
                "n_b" => Ok(Quantity::NB),
                "n_b_min" => Ok(Quantity::NBMin),
                "spectra" => Ok(Quantity::Spectra),
                other => Err(config(format!(
                    "unknown sweep output '{other}' (rates, n_b, n_b_min, spectra)"
                ))),
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Self {
            axis: Axis::parse(&axis)?,
            values: grid(start, stop, count, log)?,
            log,
            outputs,
        })
    }

    fn wants(&self, q: Quantity) -> bool {
        self.outputs.contains(&q)
    }
}

/// G window for n_b_min searches: 1e-3 ω_b up to 10 ω_b·max(1, κ/4ω_b).
pub fn g_window(kappa_over_4wb: f64) -> (f64, f64) {
    (1e-3, 10.0 * kappa_over_4wb.max(1.0))
}

pub const SPECTRUM_POINTS: usize = 201;

struct PointOutput {
    row: Vec<Cell>,
    spectrum: Vec<(f64, Option<f64>)>,
}

fn evaluate(inputs: &Inputs, plan: &SweepPlan, v: f64) -> CliResult<PointOutput> {
    let i = plan.axis.apply(inputs, v)?;
    let mut row = vec![Cell::Num(v)];
    let b = base(&i)?;
    let needs_nth = plan.wants(Quantity::NB) || plan.wants(Quantity::NBMin);
    if needs_nth && !b.n_th_given {
        return Err(config("sweep outputs n_b/n_b_min need n_th"));
    }
    let width = |plan: &SweepPlan| {
        (if plan.wants(Quantity::Rates) {
            RATE_COLUMNS.len()
        } else {
            0
        }) + usize::from(plan.wants(Quantity::NB))
            + 2 * usize::from(plan.wants(Quantity::NBMin))
    };
    let p = match b.point() {
        Ok(p) => p,
        Err(e @ (CliError::Infeasible(_) | CliError::Numerical(_))) => {
            row.push(Cell::Text(status(&e)));
            row.extend(std::iter::repeat_n(Cell::Missing, width(plan)));
            return Ok(PointOutput {
                row,
                spectrum: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    row.push("ok".into());
    if plan.wants(Quantity::Rates) {
        row.extend(rate_cells(&p, &analysis::report(&p)?, b.n_th_given));
    }
    let reservoir = p.reservoir();
    if plan.wants(Quantity::NB) {
        row.push(exact_n_b(&p.eff, &reservoir).into());
    }
    if plan.wants(Quantity::NBMin) {
        let (lo, hi) = g_window(p.eff.kappa_over_4wb());
        match n_b_min(&p.eff, &reservoir, lo, hi) {
            Some((n, g)) => row.extend([Cell::Num(n), Cell::Num(g)]),
            None => row.extend([Cell::Missing, Cell::Missing]),
        }
    }
    let spectrum = if plan.wants(Quantity::Spectra) {
        (0..SPECTRUM_POINTS)
            .map(|k| {
                let omega = -5.0 + 10.0 * k as f64 / (SPECTRUM_POINTS - 1) as f64;
                (omega, analysis::spectrum_value(&p, omega))
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(PointOutput { row, spectrum })
}

fn status(e: &CliError) -> String {
    match e {
        CliError::Infeasible(m) => format!("infeasible: {m}"),
        CliError::Numerical(m) => format!("numerical: {m}"),
        other => other.to_string(),
    }
}

pub fn run(w: &mut Writer, mut inputs: Inputs, plan: &SweepPlan) -> CliResult<()> {
    if let Some(s) = inputs.sweep.as_ref().and_then(|s| s.scheme.clone()) {
        if inputs.scheme.is_none() {
            inputs.scheme = Some(parse_scheme(&s)?);
        }
    }
    // Probe the first point so configuration problems surface before the
    // parallel section.
    let first = plan.axis.apply(&inputs, plan.values[0])?;
    let b0 = base(&first)?;
    let results: Vec<CliResult<PointOutput>> = plan
        .values
        .par_iter()
        .map(|&v| evaluate(&inputs, plan, v))
        .collect();
    let results = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let mut columns = vec![plan.axis.name(), "status"];
    if plan.wants(Quantity::Rates) {
        columns.extend(RATE_COLUMNS);
    }
    if plan.wants(Quantity::NB) {
        columns.push("n_b_exact");
    }
    if plan.wants(Quantity::NBMin) {
        columns.extend(["n_b_min", "g_opt_over_wb"]);
    }
    let mut t = Table::new(&columns);
    let mut spectra = Table::new(&[plan.axis.name(), "omega_over_wb", "v"]);
    for (v, r) in plan.values.iter().zip(&results) {
        t.push(r.row.clone());
        for &(omega, s) in &r.spectrum {
            spectra.push(vec![Cell::Num(*v), omega.into(), s.into()]);
        }
    }
    w.csv("sweep", &t)?;
    if plan.wants(Quantity::Spectra) {
        w.csv("sweep_spectra", &spectra)?;
    }
    let ys: Vec<&str> = ["net_rate", "n_b_exact", "n_b_min"]
        .into_iter()
        .filter(|c| columns.contains(c))
        .collect();
    w.line_plot(
        "sweep",
        &t,
        plan.axis.name(),
        &ys,
        PlotOptions {
            title: format!("sweep over {}", plan.axis.name()),
            x_label: plan.axis.name().into(),
            y_label: ys.join(", "),
            log_x: plan.log,
            log_y: false,
        },
    )?;
    let mut meta = Meta::new(format!("sweep {}", plan.axis.name()), inputs.seed);
    if let Ok(p) = b0.point() {
        record_point(&mut meta, &first, &b0, &p);
        meta.note(format!(
            "point parameters recorded at the first grid value {}",
            plan.values[0]
        ));
    }
    meta.param("axis", plan.axis.name(), Provenance::User);
    meta.param("count", plan.values.len() as u64, Provenance::User);
    if plan.wants(Quantity::NBMin) {
        meta.note("n_b_min: smallest exact (Lyapunov) phonon number over G in [1e-3, 10 max(1, kappa/4omega_b)] omega_b");
    }
    let failed = results
        .iter()
        .filter(|r| !matches!(r.row.get(1), Some(Cell::Text(s)) if s == "ok"))
        .count();
    let mut files = w.files().to_vec();
    files.push("sweep.json".into());
    w.json(
        "sweep",
        &meta.finish(
            &files,
            json!({"points": plan.values.len(), "failed_points": failed}),
        ),
    )
}
