use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "kerr-cool",
    version,
    about = "Optomechanical cooling with Kerr magnons and squeezed vacuum",
    long_about = "Weak-coupling spectra and rates, heating-null conditions, optimization over the \
                  two-photon coefficient, exact Gaussian and truncated-Fock checks, sweeps and figure presets.\n\n\
                  Exit codes: 0 ok, 2 config error, 3 infeasible or unstable, 4 numerical failure."
)]
pub struct Cli {
    /// Strict JSON config (sections: model, effective, bath, sweep).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON/SVG files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Operating-point overrides; each takes precedence over the config.
/// Frequencies are in units of ω_b unless the flag says otherwise.
#[derive(Debug, Clone, Default, Args)]
pub struct PointArgs {
    /// SB, KS, SS or HS.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Cavity linewidth as κ/4ω_b.
    #[arg(long)]
    pub kappa_over_4wb: Option<f64>,
    /// Cavity linewidth as κ/ω_b.
    #[arg(long)]
    pub kappa_over_wb: Option<f64>,
    /// Cavity detuning Δ/ω_b, or "opt" for √(κ²/4 + ω_b²).
    #[arg(long, allow_hyphen_values = true)]
    pub detuning: Option<String>,
    /// Linearized coupling G/ω_b (default 1: rates in units of G²/ω_b).
    #[arg(long)]
    pub g_over_wb: Option<f64>,
    /// G/2π in Hz (needs ω_b in absolute units).
    #[arg(long)]
    pub g_hz: Option<f64>,
    /// Mechanical damping γ_b/ω_b (default 1e-6).
    #[arg(long)]
    pub gamma_b_over_wb: Option<f64>,
    /// ω_b/2π in Hz.
    #[arg(long)]
    pub omega_b_hz: Option<f64>,
    /// Thermal phonon occupation.
    #[arg(long)]
    pub n_th: Option<f64>,
    /// Bath temperature; converted to n_th with the Bose–Einstein formula.
    #[arg(long)]
    pub temperature_k: Option<f64>,
    /// auto-ks, auto-opt, or RE,IM in units of ω_b.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// auto (solve the heating-null condition) or none.
    #[arg(long)]
    pub bath: Option<String>,
    /// Squeezing parameter; fixes the bath instead of solving for it.
    #[arg(long)]
    pub r_s: Option<f64>,
    /// Squeezing phase Φ_s in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_s: Option<f64>,
    /// Steady-state branch index (sorted by |m_s|²).
    #[arg(long)]
    pub root: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radiation-pressure spectrum V(ω) over a frequency grid.
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
    },
    /// Cooling and heating rates with phonon-number limits.
    Rates {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Mean-field roots of the full model and the elimination map.
    Steady {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Maximize the net cooling rate over ξ.
    Optimize {
        #[command(flatten)]
        point: PointArgs,
        /// KS or HS.
        #[arg(long, default_value = "HS")]
        mode: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 41)]
        grid: usize,
        /// Simplex iterations after the grid search (0 disables).
        #[arg(long, default_value_t = 2000)]
        polish: usize,
        /// Half-width of the search square in units of ω_b; defaults to 5·max(1, κ/4ω_b).
        #[arg(long)]
        half_width: Option<f64>,
        /// Write the objective over the grid.
        #[arg(long)]
        surface: bool,
        /// Stability gate: "cavity" checks the cavity block alone, "full" uses the operating G.
        #[arg(long, default_value = "cavity")]
        gate: String,
    },
    /// Exact phonon number (Lyapunov and truncated Fock) against the weak-coupling result.
    Exact {
        #[command(flatten)]
        point: PointArgs,
        /// Cavity Fock dimension.
        #[arg(long, default_value_t = 8)]
        dim_cavity: usize,
        /// Mechanical Fock dimension.
        #[arg(long, default_value_t = 8)]
        dim_mech: usize,
        /// Skip the Fock-space solve.
        #[arg(long)]
        no_fock: bool,
    },
    /// One-axis parameter sweep.
    Sweep {
        #[command(flatten)]
        point: PointArgs,
        /// kappa_over_4wb, g_over_wb, g_over_2pi, delta_over_wb, xi_re, xi_im, n_th, r_s.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        /// Number of grid points, endpoints included.
        #[arg(long)]
        count: Option<usize>,
        /// linear or log.
        #[arg(long)]
        spacing: Option<String>,
        /// Comma-separated: rates, n_b, n_b_min, spectra.
        #[arg(long)]
        outputs: Option<String>,
    },
    /// Preset sweeps: fig2a..fig2d, fig3a..fig3d, fig4a..fig4d.
    Figure {
        name: String,
        /// Thermal phonon occupation (required by fig2c, fig2d, fig3c, fig3d, fig4d).
        #[arg(long)]
        n_th: Option<f64>,
        /// Converted to n_th at ω_b/2π = 10 MHz.
        #[arg(long)]
        temperature_k: Option<f64>,
        /// Override the number of grid points along the main axis.
        #[arg(long)]
        points: Option<usize>,
    },
}
