//! Strict JSON configuration and command-line overrides.
//!
//! Frequencies carry their unit in the key suffix: `_hz` for ω/2π in hertz,
//! `_rad` for angular frequency in rad/s, `_over_wb` for multiples of ω_b.
//! Internally every frequency is expressed in units of ω_b.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use kerr_cool::{model::HBAR, Complex64, FullSystemParamsF64, Scheme, Validate};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::args::PointArgs;
use crate::error::{config, CliResult};

pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Bose–Einstein occupation of a mode at angular frequency `omega_rad` and
/// temperature `kelvin`.
pub fn n_th_from_temperature(kelvin: f64, omega_rad: f64) -> f64 {
    1.0 / (HBAR * omega_rad / (BOLTZMANN * kelvin)).exp_m1()
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    omega_b_hz: Option<f64>,
    omega_b_rad: Option<f64>,
    scheme: Option<String>,
    seed: Option<u64>,
    model: Option<Map<String, Value>>,
    effective: Option<Map<String, Value>>,
    bath: Option<Map<String, Value>>,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Option<String>,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub outputs: Option<Vec<String>>,
}

/// Where a resolved input came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Config,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningSpec {
    Optimal,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSpec {
    Value(Complex64),
    /// Kerr heating null ξ_KS.
    AutoKs,
    /// Numerical maximization of the hybrid net rate.
    AutoOpt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathSpec {
    None,
    /// Solve the heating-null condition for (r_s, Φ_s).
    Auto,
    Fixed {
        r_s: f64,
        phi_s: f64,
    },
}

#[derive(Debug, Clone, Default)]
pub struct EffectiveInputs {
    pub kappa: Option<f64>,
    pub detuning: Option<DetuningSpec>,
    pub g: Option<f64>,
    pub gamma_b: Option<f64>,
    pub n_th: Option<f64>,
    pub xi: Option<XiSpec>,
}

impl EffectiveInputs {
    fn is_empty(&self) -> bool {
        self.kappa.is_none() && self.detuning.is_none() && self.g.is_none() && self.xi.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub params: FullSystemParamsF64,
    pub n_th_given: bool,
    pub root: usize,
}

/// All inputs after merging the config file with command-line flags.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    /// ω_b in rad/s; `None` means purely normalized units.
    pub omega_b_rad: Option<f64>,
    pub scheme: Option<Scheme>,
    pub seed: Option<u64>,
    pub effective: EffectiveInputs,
    pub model: Option<ModelInputs>,
    pub bath: Option<BathSpec>,
    pub sweep: Option<SweepSection>,
    pub origins: Vec<(String, Origin)>,
}

impl Inputs {
    pub fn effective_given(&self) -> bool {
        !self.effective.is_empty()
    }

    fn note(&mut self, key: &str, origin: Origin) {
        self.origins.retain(|(k, _)| k != key);
        self.origins.push((key.to_string(), origin));
    }
}

/// Keys of one section, tracking which were consumed.
struct Section<'a> {
    name: &'static str,
    map: &'a Map<String, Value>,
    used: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(name: &'static str, map: &'a Map<String, Value>) -> Self {
        Self {
            name,
            map,
            used: BTreeSet::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.map.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    fn number(&mut self, key: &str) -> CliResult<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| config(format!("{}.{key} must be a finite number", self.name))),
        }
    }

    /// Frequency `base` given with one of the unit suffixes, in units of ω_b.
    fn frequency(&mut self, base: &str, omega_b_rad: Option<f64>) -> CliResult<Option<f64>> {
        let mut found = Vec::new();
        for (suffix, to_rad) in [("hz", 2.0 * PI), ("rad", 1.0), ("over_wb", f64::NAN)] {
            let key = format!("{base}_{suffix}");
            if let Some(x) = self.number(&key)? {
                found.push((key, x, to_rad));
            }
        }
        match found.as_slice() {
            [] => Ok(None),
            [(_, x, f)] if f.is_nan() => Ok(Some(*x)),
            [(key, x, f)] => {
                let wb = omega_b_rad.ok_or_else(|| {
                    config(format!(
                        "{}.{key} is absolute; set omega_b_hz or omega_b_rad, or use {base}_over_wb",
                        self.name
                    ))
                })?;
                Ok(Some(x * f / wb))
            }
            _ => Err(config(format!(
                "{}.{base} given more than once ({})",
                self.name,
                found
                    .iter()
                    .map(|(k, _, _)| k.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))),
        }
    }

    fn finish(self) -> CliResult<()> {
        let unknown: Vec<&str> = self
            .map
            .keys()
            .map(String::as_str)
            .filter(|k| !self.used.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(config(format!(
                "unknown key(s) in section '{}': {}",
                self.name,
                unknown.join(", ")
            )))
        }
    }
}

pub fn parse_scheme(s: &str) -> CliResult<Scheme> {
    s.parse::<Scheme>().map_err(|e| config(e.to_string()))
}

pub fn parse_xi(s: &str) -> CliResult<XiSpec> {
    match s {
        "auto-ks" => Ok(XiSpec::AutoKs),
        "auto-opt" => Ok(XiSpec::AutoOpt),
        _ => {
            let parts: Vec<&str> = s.split(',').collect();
            let parse = |p: &str| {
                p.trim().parse::<f64>().map_err(|_| {
                    config(format!("xi must be auto-ks, auto-opt or RE,IM (got '{s}')"))
                })
            };
            match parts.as_slice() {
                [re, im] => Ok(XiSpec::Value(Complex64::new(parse(re)?, parse(im)?))),
                _ => Err(config(format!(
                    "xi must be auto-ks, auto-opt or RE,IM (got '{s}')"
                ))),
            }
        }
    }
}

pub fn parse_detuning(s: &str) -> CliResult<DetuningSpec> {
    if s == "opt" {
        return Ok(DetuningSpec::Optimal);
    }
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(DetuningSpec::Value)
        .ok_or_else(|| {
            config(format!(
                "detuning must be 'opt' or a number in units of omega_b (got '{s}')"
            ))
        })
}

fn parse_effective(sec: &mut Section, wb: Option<f64>, out: &mut EffectiveInputs) -> CliResult<()> {
    let k4 = sec.number("kappa_over_4wb")?;
    let kappa = sec.frequency("kappa", wb)?;
    out.kappa = match (k4, kappa) {
        (Some(_), Some(_)) => {
            return Err(config(
                "effective: give either kappa_over_4wb or kappa_*, not both",
            ))
        }
        (Some(k), None) => Some(4.0 * k),
        (None, k) => k,
    };
    out.detuning = match sec.take("delta") {
        Some(Value::String(s)) => Some(parse_detuning(s)?),
        Some(_) => return Err(config("effective.delta must be the string \"opt\"; numeric detuning uses delta_hz/_rad/_over_wb")),
        None => sec.frequency("delta", wb)?.map(DetuningSpec::Value),
    };
    out.g = sec.frequency("g", wb)?;
    out.gamma_b = sec.frequency("gamma_b", wb)?;
    out.n_th = sec.number("n_th")?;
    let xi_str =
        match sec.take("xi") {
            Some(Value::String(s)) => Some(parse_xi(s)?),
            Some(_) => return Err(config(
                "effective.xi must be \"auto-ks\" or \"auto-opt\"; numeric xi uses xi_re_*/xi_im_*",
            )),
            None => None,
        };
    let re = sec.frequency("xi_re", wb)?;
    let im = sec.frequency("xi_im", wb)?;
    out.xi = match (xi_str, re, im) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(config(
                "effective: xi given both symbolically and numerically",
            ))
        }
        (Some(x), None, None) => Some(x),
        (None, None, None) => None,
        (None, re, im) => Some(XiSpec::Value(Complex64::new(
            re.unwrap_or(0.0),
            im.unwrap_or(0.0),
        ))),
    };
    Ok(())
}

fn required(sec: &mut Section, base: &str, wb: Option<f64>) -> CliResult<f64> {
    sec.frequency(base, wb)?
        .ok_or_else(|| config(format!("model.{base}_{{hz,rad,over_wb}} is required")))
}

fn parse_model(sec: &mut Section, wb: Option<f64>) -> CliResult<ModelInputs> {
    let n_th = sec.number("n_th")?;
    let root = match sec.number("root")? {
        None => 0,
        Some(x) if x >= 0.0 && x.fract() == 0.0 => x as usize,
        Some(x) => {
            return Err(config(format!(
                "model.root must be a non-negative integer (got {x})"
            )))
        }
    };
    let params = FullSystemParamsF64 {
        delta_a: required(sec, "delta_a", wb)?,
        omega_b: 1.0,
        g0: required(sec, "g0", wb)?,
        delta_m: required(sec, "delta_m", wb)?,
        kerr: required(sec, "kerr", wb)?,
        j_coupling: required(sec, "j", wb)?,
        drive_amp: required(sec, "drive", wb)?,
        kappa_a: required(sec, "kappa_a", wb)?,
        kappa_m: required(sec, "kappa_m", wb)?,
        gamma_b: required(sec, "gamma_b", wb)?,
        n_th: n_th.unwrap_or(0.0),
        x_zpf: None,
        m_eff: None,
    }
    .validate()
    .map_err(|e| config(format!("model: {e}")))?;
    Ok(ModelInputs {
        params,
        n_th_given: n_th.is_some(),
        root,
    })
}

fn parse_bath(sec: &mut Section) -> CliResult<BathSpec> {
    let mode = match sec.take("mode") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(config("bath.mode must be a string")),
    };
    let r = sec.number("r_s")?;
    let phi = sec.number("phi_s")?;
    match (mode.as_deref(), r, phi) {
        (Some("auto"), None, None) => Ok(BathSpec::Auto),
        (Some("none"), None, None) => Ok(BathSpec::None),
        (Some("fixed") | None, Some(r_s), phi) => Ok(BathSpec::Fixed {
            r_s,
            phi_s: phi.unwrap_or(0.0),
        }),
        (Some(m @ ("auto" | "none")), _, _) => {
            Err(config(format!("bath.mode = \"{m}\" takes no r_s/phi_s")))
        }
        (Some(m), _, _) if m != "fixed" => Err(config(format!(
            "bath.mode must be auto, none or fixed (got \"{m}\")"
        ))),
        _ => Err(config("bath: fixed squeezing needs r_s")),
    }
}

/// Reads and validates a config file.
pub fn load(path: &Path) -> CliResult<Inputs> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<Inputs> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| config(format!("invalid config: {e}")))?;
    let mut inputs = Inputs::default();
    inputs.omega_b_rad = match (file.omega_b_hz, file.omega_b_rad) {
        (Some(_), Some(_)) => {
            return Err(config("give either omega_b_hz or omega_b_rad, not both"))
        }
        (Some(hz), None) => Some(2.0 * PI * hz),
        (None, rad) => rad,
    };
    if let Some(w) = inputs.omega_b_rad {
        if !(w > 0.0 && w.is_finite()) {
            return Err(config(format!("omega_b must be positive (got {w} rad/s)")));
        }
    }
    let wb = inputs.omega_b_rad;
    inputs.scheme = file.scheme.as_deref().map(parse_scheme).transpose()?;
    inputs.seed = file.seed;
    if let Some(map) = &file.effective {
        let mut sec = Section::new("effective", map);
        parse_effective(&mut sec, wb, &mut inputs.effective)?;
        sec.finish()?;
    }
    if let Some(map) = &file.model {
        let mut sec = Section::new("model", map);
        inputs.model = Some(parse_model(&mut sec, wb)?);
        sec.finish()?;
    }
    if let Some(map) = &file.bath {
        let mut sec = Section::new("bath", map);
        inputs.bath = Some(parse_bath(&mut sec)?);
        sec.finish()?;
    }
    inputs.sweep = file.sweep;
    for key in ["kappa", "detuning", "g", "gamma_b", "n_th", "xi"] {
        let present = match key {
            "kappa" => inputs.effective.kappa.is_some(),
            "detuning" => inputs.effective.detuning.is_some(),
            "g" => inputs.effective.g.is_some(),
            "gamma_b" => inputs.effective.gamma_b.is_some(),
            "n_th" => inputs.effective.n_th.is_some(),
            _ => inputs.effective.xi.is_some(),
        };
        if present {
            inputs.note(key, Origin::Config);
        }
    }
    Ok(inputs)
}

/// Applies command-line overrides on top of the config.
pub fn merge_flags(mut inputs: Inputs, a: &PointArgs) -> CliResult<Inputs> {
    if let Some(hz) = a.omega_b_hz {
        if !(hz > 0.0 && hz.is_finite()) {
            return Err(config(format!("--omega-b-hz must be positive (got {hz})")));
        }
        inputs.omega_b_rad = Some(2.0 * PI * hz);
    }
    if let Some(s) = &a.scheme {
        inputs.scheme = Some(parse_scheme(s)?);
    }
    let e = &mut inputs.effective;
    let mut set = Vec::new();
    match (a.kappa_over_4wb, a.kappa_over_wb) {
        (Some(_), Some(_)) => {
            return Err(config("give either --kappa-over-4wb or --kappa-over-wb"))
        }
        (Some(k4), None) => {
            e.kappa = Some(4.0 * k4);
            set.push("kappa");
        }
        (None, Some(k)) => {
            e.kappa = Some(k);
            set.push("kappa");
        }
        (None, None) => {}
    }
    if let Some(d) = &a.detuning {
        e.detuning = Some(parse_detuning(d)?);
        set.push("detuning");
    }
    match (a.g_over_wb, a.g_hz) {
        (Some(_), Some(_)) => return Err(config("give either --g-over-wb or --g-hz")),
        (Some(g), None) => {
            e.g = Some(g);
            set.push("g");
        }
        (None, Some(hz)) => {
            let wb = inputs.omega_b_rad.ok_or_else(|| {
                config("--g-hz needs omega_b (--omega-b-hz or config omega_b_hz)")
            })?;
            e.g = Some(2.0 * PI * hz / wb);
            set.push("g");
        }
        (None, None) => {}
    }
    if let Some(gb) = a.gamma_b_over_wb {
        e.gamma_b = Some(gb);
        set.push("gamma_b");
    }
    match (a.n_th, a.temperature_k) {
        (Some(_), Some(_)) => return Err(config("give either --n-th or --temperature-k")),
        (Some(n), None) => {
            e.n_th = Some(n);
            set.push("n_th");
        }
        (None, Some(t)) => {
            let wb = inputs
                .omega_b_rad
                .ok_or_else(|| config("--temperature-k needs omega_b in absolute units"))?;
            e.n_th = Some(n_th_from_temperature(t, wb));
            set.push("n_th");
        }
        (None, None) => {}
    }
    if let Some(x) = &a.xi {
        e.xi = Some(parse_xi(x)?);
        set.push("xi");
    }
    match (a.bath.as_deref(), a.r_s) {
        (Some(_), Some(_)) => return Err(config("give either --bath or --r-s/--phi-s")),
        (Some("auto"), None) => inputs.bath = Some(BathSpec::Auto),
        (Some("none"), None) => inputs.bath = Some(BathSpec::None),
        (Some(other), None) => {
            return Err(config(format!("--bath must be auto or none (got {other})")))
        }
        (None, Some(r_s)) => {
            inputs.bath = Some(BathSpec::Fixed {
                r_s,
                phi_s: a.phi_s.unwrap_or(0.0),
            })
        }
        (None, None) if a.phi_s.is_some() => return Err(config("--phi-s needs --r-s")),
        (None, None) => {}
    }
    if let Some(root) = a.root {
        match inputs.model.as_mut() {
            Some(m) => m.root = root,
            None => return Err(config("--root needs a model section in the config")),
        }
    }
    for key in set {
        inputs.note(key, Origin::Flag);
    }
    Ok(inputs)
}
