//! Per-point quantities shared by commands, sweeps and figure presets.

use kerr_cool::gaussian::{drift_matrix, exact_phonon, exact_steady, is_stable};
use kerr_cool::spectra::{self, rates};
use kerr_cool::{CavityReservoirF64, CoolingReportF64, EffectiveParamsF64};

use crate::error::{CliError, CliResult};
use crate::resolve::Point;

pub fn report(p: &Point) -> CliResult<CoolingReportF64> {
    rates(&p.eff, p.bath.as_ref()).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Spectrum value, or `None` at a parametric divergence.
pub fn spectrum_value(p: &Point, omega: f64) -> Option<f64> {
    spectra::spectrum(omega, &p.eff, p.bath.as_ref())
        .ok()
        .map(|s| s.value)
}

/// Exact (Lyapunov) phonon and photon numbers; `None` when unstable.
pub fn exact_numbers(
    eff: &EffectiveParamsF64,
    reservoir: &CavityReservoirF64,
) -> Option<(f64, f64)> {
    if !is_stable(&drift_matrix(eff)).stable {
        return None;
    }
    let st = exact_steady(eff, reservoir).ok()?;
    Some((exact_phonon(&st).ok()?, st.cavity_occupation()))
}

pub fn exact_n_b(eff: &EffectiveParamsF64, reservoir: &CavityReservoirF64) -> Option<f64> {
    exact_numbers(eff, reservoir).map(|(n_b, _)| n_b)
}

const MIN_GRID: usize = 81;
const GOLDEN_STEPS: usize = 80;

/// Smallest exact phonon number over G in [g_lo, g_hi] and the G reaching
/// it. A log grid locates the basin; golden-section search in log G refines.
pub fn n_b_min(
    eff: &EffectiveParamsF64,
    reservoir: &CavityReservoirF64,
    g_lo: f64,
    g_hi: f64,
) -> Option<(f64, f64)> {
    let f = |lg: f64| exact_n_b(&eff.with_g(lg.exp()), reservoir).unwrap_or(f64::INFINITY);
    let (a, b) = (g_lo.ln(), g_hi.ln());
    let grid: Vec<f64> = (0..MIN_GRID)
        .map(|k| a + (b - a) * k as f64 / (MIN_GRID - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (k, &best) = values
        .iter()
        .enumerate()
        .min_by(|u, v| u.1.total_cmp(v.1))?;
    if !best.is_finite() {
        return None;
    }
    let (mut lo, mut hi) = (grid[k.saturating_sub(1)], grid[(k + 1).min(MIN_GRID - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let (x, v) = [(grid[k], best), (x1, f1), (x2, f2)]
        .into_iter()
        .min_by(|u, v| u.1.total_cmp(&v.1))
        .expect("three candidates");
    Some((v, x.exp()))
}

/// Relative difference |a − b| / |b|.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
