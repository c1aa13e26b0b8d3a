//! Command-line front end: config ingestion, single-point studies, sweeps
//! and figure presets, all written as CSV with JSON metadata.

pub mod analysis;
pub mod args;
mod commands;
pub mod config;
pub mod error;
mod figures;
pub mod meta;
pub mod output;
pub mod resolve;
mod sweep;

use std::path::PathBuf;

use args::{Cli, Command};
use error::CliResult;
use output::Writer;

/// Executes one command and returns the paths written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let mut w = Writer::new(&cli.out, cli.svg)?;
    let base_inputs = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::Inputs::default(),
    };
    match &cli.command {
        Command::Spectrum {
            point,
            omega_min,
            omega_max,
            points,
        } => commands::spectrum(
            &mut w,
            config::merge_flags(base_inputs, point)?,
            *omega_min,
            *omega_max,
            *points,
        )?,
        Command::Rates { point } => {
            commands::rates(&mut w, config::merge_flags(base_inputs, point)?)?
        }
        Command::Steady { point } => {
            commands::steady(&mut w, config::merge_flags(base_inputs, point)?)?
        }
        Command::Optimize {
            point,
            mode,
            grid,
            polish,
            half_width,
            surface,
            gate,
        } => commands::optimize(
            &mut w,
            config::merge_flags(base_inputs, point)?,
            commands::OptimizeArgs {
                mode,
                grid: *grid,
                polish: *polish,
                half_width: *half_width,
                surface: *surface,
                gate,
            },
        )?,
        Command::Exact {
            point,
            dim_cavity,
            dim_mech,
            no_fock,
        } => commands::exact(
            &mut w,
            config::merge_flags(base_inputs, point)?,
            *dim_cavity,
            *dim_mech,
            *no_fock,
        )?,
        Command::Sweep {
            point,
            axis,
            start,
            stop,
            count,
            spacing,
            outputs,
        } => {
            let inputs = config::merge_flags(base_inputs, point)?;
            let plan = sweep::SweepPlan::from_inputs(
                &inputs, axis, *start, *stop, *count, spacing, outputs,
            )?;
            sweep::run(&mut w, inputs, &plan)?
        }
        Command::Figure {
            name,
            n_th,
            temperature_k,
            points,
        } => figures::run(&mut w, &base_inputs, name, *n_th, *temperature_k, *points)?,
    }
    Ok(w.files().iter().map(|f| cli.out.join(f)).collect())
}
