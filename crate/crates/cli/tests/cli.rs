use std::path::Path;
use std::process::Command;

use clap::Parser;
use kerr_cool_cli::args::Cli;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kerr-cool"))
}

fn run_in(dir: &Path, args: &[&str]) -> Result<(), kerr_cool_cli::error::CliError> {
    let mut full = vec!["kerr-cool", "--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    kerr_cool_cli::run(&Cli::try_parse_from(full).unwrap()).map(|_| ())
}

fn exit_code(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = bin().arg("--out").arg(dir).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let mut r = csv::Reader::from_path(path).unwrap();
        let header = r.headers().unwrap().iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
            .collect();
        Self { header, rows }
    }

    fn col(&self, name: &str) -> Vec<Option<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k].parse().ok()).collect()
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fig2b_ratio_reaches_the_closed_form() {
    let d = tempfile::tempdir().unwrap();
    run_in(d.path(), &["figure", "fig2b"]).unwrap();
    let t = Csv::read(&d.path().join("fig2b.csv"));
    assert_eq!(
        t.header,
        ["kappa_over_4wb", "net_rate_SB", "net_rate_KS_opt", "ratio"]
    );
    let k4 = t.col("kappa_over_4wb");
    let ratio = t.col("ratio");
    assert_eq!(k4.last().unwrap().unwrap(), 100.0);
    let last = ratio.last().unwrap().unwrap();
    assert!((last - 100.50).abs() < 0.01, "{last}");
    // (Δ + ω_b)/2ω_b along the whole grid.
    for (k, r) in k4.iter().zip(&ratio) {
        let kappa = 4.0 * k.unwrap();
        let delta = (kappa * kappa / 4.0 + 1.0f64).sqrt();
        assert!((r.unwrap() - (delta + 1.0) / 2.0).abs() < 1e-9 * r.unwrap());
    }
}

#[test]
fn sideband_quantum_limit_at_kappa_over_4wb_10() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "rates",
            "--scheme",
            "SB",
            "--kappa-over-4wb",
            "10",
            "--detuning",
            "opt",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("rates.csv"));
    let n_q = t.col("n_q")[0].unwrap();
    assert!((n_q - 9.51250).abs() < 1e-5, "{n_q}");
    // n_th was not given, so thermal columns stay empty.
    assert_eq!(t.col("n_b")[0], None);
    let meta = json(&d.path().join("rates.json"));
    assert!(meta["gaps"]
        .as_array()
        .unwrap()
        .iter()
        .any(|g| g.as_str().unwrap().contains("n_th")));
}

#[test]
fn hybrid_spectrum_vanishes_at_the_heating_sideband() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "spectrum",
            "--scheme",
            "HS",
            "--xi",
            "auto-ks",
            "--kappa-over-4wb",
            "10",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("spectrum.csv"));
    let omega = t.col("omega_over_wb");
    let v = t.col("v");
    let at = |w: f64| {
        let k = omega.iter().position(|o| o.unwrap() == w).unwrap();
        v[k].unwrap()
    };
    assert!(at(-1.0) < 1e-12 * at(1.0), "{} vs {}", at(-1.0), at(1.0));
}

#[test]
fn hybrid_spectrum_with_fixed_xi_and_auto_bath() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "spectrum",
            "--scheme",
            "HS",
            "--xi",
            "0.4,-0.3",
            "--kappa-over-4wb",
            "0.5",
            "--points",
            "11",
            "--omega-min",
            "-1",
            "--omega-max",
            "1",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("spectrum.csv"));
    let v = t.col("v");
    assert!(v[0].unwrap() < 1e-12 * v[10].unwrap());
    let meta = json(&d.path().join("spectrum.json"));
    let r_s = meta["parameters"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "r_s")
        .unwrap();
    assert_eq!(r_s["origin"], "derived");
    assert!(r_s["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_config_keys_exit_with_code_2() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"effective": {"kappa_over_4wb": 1, "detunning": "opt"}}"#,
    )
    .unwrap();
    let (code, err) = exit_code(d.path(), &["--config", cfg.to_str().unwrap(), "rates"]);
    assert_eq!(code, 2);
    assert!(err.contains("detunning"), "{err}");
    std::fs::write(&cfg, r#"{"efective": {}}"#).unwrap();
    assert_eq!(
        exit_code(d.path(), &["--config", cfg.to_str().unwrap(), "rates"]).0,
        2
    );
}

#[test]
fn presets_needing_n_th_name_the_gap() {
    let d = tempfile::tempdir().unwrap();
    for fig in ["fig2c", "fig2d", "fig3c", "fig3d", "fig4d"] {
        let (code, err) = exit_code(d.path(), &["figure", fig]);
        assert_eq!(code, 2, "{fig}");
        assert!(err.contains("n_th") && err.contains("not stated"), "{err}");
    }
}

#[test]
fn infeasible_and_unstable_points_exit_with_code_3() {
    let d = tempfile::tempdir().unwrap();
    // |A_0(ω_b)| = 1 on resonance.
    let (code, err) = exit_code(
        d.path(),
        &[
            "rates",
            "--scheme",
            "SS",
            "--kappa-over-4wb",
            "1",
            "--detuning",
            "0",
        ],
    );
    assert_eq!(code, 3, "{err}");
    // Blue detuning with strong coupling.
    let (code, _) = exit_code(
        d.path(),
        &[
            "exact",
            "--kappa-over-4wb",
            "0.1",
            "--detuning",
            "-1",
            "--g-over-wb",
            "0.5",
            "--n-th",
            "0",
            "--no-fock",
        ],
    );
    assert_eq!(code, 3);
}

#[test]
fn bad_flags_exit_with_code_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(d.path(), &["rates"]).0, 2);
    assert_eq!(
        exit_code(
            d.path(),
            &["rates", "--kappa-over-4wb", "1", "--xi", "oops"]
        )
        .0,
        2
    );
    assert_eq!(exit_code(d.path(), &["figure", "fig9z"]).0, 2);
    assert_eq!(
        exit_code(
            d.path(),
            &[
                "rates",
                "--scheme",
                "SB",
                "--kappa-over-4wb",
                "1",
                "--xi",
                "auto-ks"
            ]
        )
        .0,
        2
    );
}

#[test]
fn identical_inputs_give_byte_identical_csv() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"seed": 7, "scheme": "HS",
            "effective": {"kappa_over_4wb": 1, "delta": "opt", "g_over_wb": 0.05, "n_th": 2},
            "sweep": {"axis": "kappa_over_4wb", "start": 0.1, "stop": 10, "count": 9, "spacing": "log",
                      "outputs": ["rates", "n_b"]}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = d.path().join(run);
        let (code, err) = exit_code(&out, &["--config", cfg.to_str().unwrap(), "sweep"]);
        assert_eq!(code, 0, "{err}");
        outputs.push(std::fs::read(out.join("sweep.csv")).unwrap());
        let (code, _) = exit_code(&out, &["figure", "fig4b", "--points", "5"]);
        assert_eq!(code, 0);
        outputs.push(std::fs::read(out.join("fig4b.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[1], outputs[3]);
    let meta = json(&d.path().join("a").join("sweep.json"));
    assert_eq!(meta["seed"], 7);
}

#[test]
fn flags_override_config_values() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(&cfg, r#"{"effective": {"kappa_over_4wb": 1, "n_th": 3}}"#).unwrap();
    run_in(
        d.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "rates",
            "--kappa-over-4wb",
            "10",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("rates.csv"));
    assert_eq!(t.col("kappa_over_4wb")[0], Some(10.0));
    assert_eq!(t.col("n_th")[0], Some(3.0));
    assert!(t.col("n_b")[0].is_some());
}

#[test]
fn sweep_rows_follow_the_grid() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "sweep",
            "--scheme",
            "KS",
            "--kappa-over-4wb",
            "1",
            "--n-th",
            "1",
            "--g-over-wb",
            "0.01",
            "--axis",
            "kappa_over_4wb",
            "--start",
            "0.1",
            "--stop",
            "100",
            "--count",
            "4",
            "--spacing",
            "log",
            "--outputs",
            "rates,n_b_min,spectra",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("sweep.csv"));
    let k = t.col("kappa_over_4wb");
    assert_eq!(k.iter().map(|x| x.unwrap()).collect::<Vec<_>>().len(), 4);
    assert!((k[1].unwrap() - 1.0).abs() < 1e-12 && k[3] == Some(100.0));
    for (row, n) in t.col("n_b_min").iter().enumerate() {
        assert!(n.unwrap() < 1.0, "row {row}");
    }
    let s = Csv::read(&d.path().join("sweep_spectra.csv"));
    assert_eq!(s.rows.len(), 4 * 201);
}

#[test]
fn sweep_marks_infeasible_points_instead_of_failing() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "sweep",
            "--scheme",
            "SS",
            "--kappa-over-4wb",
            "1",
            "--axis",
            "delta_over_wb",
            "--start",
            "0",
            "--stop",
            "2",
            "--count",
            "3",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("sweep.csv"));
    assert!(t.rows[0][1].starts_with("infeasible"));
    assert_eq!(t.rows[1][1], "ok");
}

#[test]
fn steady_reports_every_root() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"delta_a_over_wb": 0.5, "g0_over_wb": 0.001, "delta_m_over_wb": -3, "kerr_over_wb": -0.5,
            "j_over_wb": 0.5, "drive_over_wb": 4, "kappa_a_over_wb": 1, "kappa_m_over_wb": 0.2, "gamma_b_over_wb": 1e-5}}"#,
    )
    .unwrap();
    run_in(d.path(), &["--config", cfg.to_str().unwrap(), "steady"]).unwrap();
    let t = Csv::read(&d.path().join("steady.csv"));
    assert_eq!(t.rows.len(), 3);
    let m2 = t.col("m_abs2");
    assert!(m2.windows(2).all(|w| w[0].unwrap() <= w[1].unwrap()));
    assert!(t.col("residual").iter().all(|r| r.unwrap() < 1e-11));
    assert_eq!(t.rows[0][1], "true");
    // The selected root then drives rates.
    run_in(
        d.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "rates",
            "--root",
            "2",
            "--n-th",
            "0",
        ],
    )
    .unwrap();
    let r = Csv::read(&d.path().join("rates.csv"));
    let eta_kappa = t.col("kappa")[2].unwrap();
    assert!((r.col("kappa_over_4wb")[0].unwrap() - eta_kappa / 4.0).abs() < 1e-12 * eta_kappa);
}

#[test]
fn exact_command_agrees_with_weak_coupling_at_small_g() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "exact",
            "--kappa-over-4wb",
            "0.1",
            "--g-over-wb",
            "0.004",
            "--gamma-b-over-wb",
            "1e-4",
            "--n-th",
            "0.3",
            "--dim-cavity",
            "4",
            "--dim-mech",
            "8",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("exact.csv"));
    assert!(t.col("rel_diff_fock_vs_lyapunov")[0].unwrap() < 1e-3);
    assert!(t.col("rel_diff_weak_full_vs_lyapunov")[0].unwrap() < 1e-2);
}

#[test]
fn optimize_writes_surface_and_reports_the_null() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "--svg",
            "optimize",
            "--kappa-over-4wb",
            "0.1",
            "--grid",
            "21",
            "--surface",
        ],
    )
    .unwrap();
    let t = Csv::read(&d.path().join("optimize.csv"));
    assert_eq!(t.rows[0][8], "true");
    let xr = t.col("xi_re")[0].unwrap();
    let xi = t.col("xi_im")[0].unwrap();
    assert!((xr + 0.196).abs() < 0.0196 && xi.abs() < 0.02, "{xr} {xi}");
    assert_eq!(
        Csv::read(&d.path().join("optimize_surface.csv")).rows.len(),
        21 * 21
    );
    assert!(d.path().join("optimize_surface.svg").exists());
}

#[test]
fn every_preset_runs_and_records_provenance() {
    let d = tempfile::tempdir().unwrap();
    for fig in [
        "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b",
        "fig4c", "fig4d",
    ] {
        run_in(
            d.path(),
            &["--svg", "figure", fig, "--n-th", "1", "--points", "7"],
        )
        .unwrap_or_else(|e| panic!("{fig}: {e}"));
        let meta = json(&d.path().join(format!("{fig}.json")));
        let params = meta["parameters"].as_array().unwrap();
        assert!(params.iter().any(|p| p["origin"] == "stated"), "{fig}");
        assert!(
            params
                .iter()
                .any(|p| p["name"] == "n_th" && p["origin"] == "user"),
            "{fig}"
        );
        assert!(d.path().join(format!("{fig}.csv")).exists());
        assert!(d.path().join(format!("{fig}.svg")).exists());
    }
    let fig4 = json(&d.path().join("fig4b.json"));
    assert!(fig4["gaps"]
        .as_array()
        .unwrap()
        .iter()
        .any(|g| g.as_str().unwrap().contains("G")));
}

#[test]
fn temperature_converts_through_bose_einstein() {
    let d = tempfile::tempdir().unwrap();
    run_in(
        d.path(),
        &[
            "figure",
            "fig2c",
            "--temperature-k",
            "0.01",
            "--points",
            "3",
        ],
    )
    .unwrap();
    let meta = json(&d.path().join("fig2c.json"));
    let n = meta["parameters"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "n_th")
        .unwrap()["value"]
        .as_f64()
        .unwrap();
    // ħω/k_B T = 2π·1e7·ħ/(k_B·0.01).
    let x = 2.0 * std::f64::consts::PI * 1e7 * 1.054_571_817e-34 / (1.380_649e-23 * 0.01);
    assert!((n - 1.0 / x.exp_m1()).abs() < 1e-12 * n);
}
