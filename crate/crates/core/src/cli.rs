//! Command dispatch for the `fdkp` binary.

use std::path::{Path, PathBuf};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::harness::{
    dispersion_check, nondegeneracy_probe, run_sweep, zero_potential_eigenvalue, CheckStatus, EIGEN_TOL,
    FULL_TOL, REDUCED_TOL,
};
use crate::io::{self, Config, FieldSidecar};
use crate::lumps::{eval_zeta_star, kp_residual_exact, sample_lump, TauPolynomial};
use crate::reduction::Reducer;
use crate::spectral::Frame;
use crate::symbols::dispersion_speed;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "FDKP_OUT_DIR";

pub const COMMANDS: [&str; 7] = ["lump-check", "dispersion", "solve", "sweep", "probe", "estimates", "plot-data"];

#[derive(Debug, Parser)]
#[command(name = "fdkp", version, about = "FDKP-I solitary waves from KP-I lumps")]
pub struct Args {
    /// One of lump-check, dispersion, solve, sweep, probe, estimates, plot-data.
    pub command: Option<String>,
    /// Flat JSON configuration; absent keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding both the config and the environment.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Command name, used when no positional command is given.
    #[arg(long = "command", value_name = "NAME")]
    pub command_flag: Option<String>,
    /// Stored report read by `estimates`; defaults to `<out>/report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Fail = 1,
    Usage = 2,
}

#[derive(Serialize)]
struct Failure<'a> {
    command: &'a str,
    kind: &'a str,
    message: String,
}

fn usage() -> String {
    format!(
        "usage: fdkp [--config PATH] [--out DIR] [--report PATH] <COMMAND>\ncommands: {}",
        COMMANDS.join(", ")
    )
}

pub fn run(args: Args) -> Exit {
    let command = match args.command.clone().or(args.command_flag.clone()) {
        Some(c) if COMMANDS.contains(&c.as_str()) => c,
        Some(c) => {
            eprintln!("unknown command `{c}`\n{}", usage());
            return Exit::Usage;
        }
        None => {
            eprintln!("{}", usage());
            return Exit::Usage;
        }
    };
    let config = match &args.config {
        Some(p) => io::load_config(p),
        None => Ok(Config::default()),
    };
    let mut config = match config {
        Ok(c) => c,
        Err(e) => {
            report_failure(&command, "config", &e, None);
            return Exit::Usage;
        }
    };
    if let Some(out) = args.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)) {
        config.output_dir = out;
    }
    if let Err(e) = std::fs::create_dir_all(&config.output_dir) {
        report_failure(&command, "io", &e.into(), None);
        return Exit::Usage;
    }
    let result = match command.as_str() {
        "lump-check" => lump_check(&config),
        "dispersion" => dispersion(&config),
        "solve" => solve(&config),
        "sweep" => sweep(&config),
        "probe" => probe(&config),
        "estimates" => estimates(&config, args.report.as_deref()),
        _ => plot_data(&config),
    };
    match result {
        Ok(true) => Exit::Pass,
        Ok(false) => Exit::Fail,
        Err(e) => {
            report_failure(&command, "error", &e, Some(&config.output_dir));
            Exit::Fail
        }
    }
}

fn report_failure(command: &str, kind: &str, e: &Error, dir: Option<&Path>) {
    let record = Failure {
        command,
        kind,
        message: e.to_string(),
    };
    let text = serde_json::to_string(&record).unwrap_or_default();
    eprintln!("{text}");
    if let Some(d) = dir {
        let _ = std::fs::write(d.join("failure.json"), text);
    }
}

fn emit(config: &Config, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    std::fs::write(config.output_dir.join(name), text)?;
    Ok(())
}

fn lump_check(config: &Config) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1ab5);
    let mut worst = [0.0f64; 2];
    for (slot, k) in [1usize, 2].into_iter().enumerate() {
        for _ in 0..1000 {
            let (x, y) = (rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0));
            worst[slot] = worst[slot].max(kp_residual_exact(k, x, y)?.abs());
        }
    }
    let center = eval_zeta_star(1, 0.0, 0.0, 0, 0)?;
    let tau_centers = [TauPolynomial::tau(1)?.coefficient(0, 0), TauPolynomial::tau(2)?.coefficient(0, 0)];
    let even = TauPolynomial::tau(1)?.is_even() && TauPolynomial::tau(2)?.is_even();
    let pass = worst.iter().all(|&w| w <= 1e-10) && (center + 4.0).abs() <= 1e-12 && tau_centers == [3, 1875] && even;
    emit(
        config,
        "lump_check.json",
        &json!({
            "max_residual": {"k1": worst[0], "k2": worst[1]},
            "zeta1_center": center,
            "tau_centers": tau_centers,
            "even": even,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn dispersion(config: &Config) -> Result<bool> {
    let v = dispersion_check(&config.params(), config.k1_max, config.dispersion_samples)?;
    let pass = v.status != CheckStatus::Fail;
    emit(config, "dispersion.json", &serde_json::to_value(&v)?)?;
    Ok(pass)
}

fn solve(config: &Config) -> Result<bool> {
    let p = config.params();
    let grid = config.grid()?;
    let red = Reducer::new(grid, p, config.solver())?;
    let (seed, _) = sample_lump(grid, config.k_index, Frame::KpScaled, &p)?;
    let (zeta, diag) = red.newton_solve(&seed)?;
    let wave = red.assemble_solution(&zeta)?;
    let full = red.fdkp_residual(&wave.profile, wave.speed)?;
    let dir = &config.output_dir;
    let sidecar = FieldSidecar::new(&wave.profile, Some(config));
    io::write_field(&wave.profile, &dir.join("u.f64"), &sidecar)?;
    io::write_field(&wave.low, &dir.join("u1.f64"), &sidecar)?;
    io::write_field(&wave.high, &dir.join("u2.f64"), &sidecar)?;
    let steps: Vec<_> = diag
        .residuals
        .iter()
        .enumerate()
        .map(|(i, r)| json!({"step": i, "reduced_l2": r, "krylov_iterations": diag.krylov_iterations.get(i)}))
        .collect();
    io::write_json_lines(&steps, &dir.join("iterations.jsonl"))?;
    let pass = diag.final_residual() <= REDUCED_TOL && full.relative <= FULL_TOL;
    emit(
        config,
        "manifest.json",
        &json!({
            "schema_version": io::SCHEMA_VERSION,
            "git_describe": io::GIT_DESCRIBE,
            "config_hash": config.hash(),
            "config": config,
            "epsilon": p.epsilon,
            "k_index": config.k_index,
            "speed": wave.speed,
            "newton": diag,
            "full_residual": full,
            "fields": ["u.f64", "u1.f64", "u2.f64"],
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

fn sweep(config: &Config) -> Result<bool> {
    let report = run_sweep(
        config.k_index,
        &config.epsilons,
        config.grid()?,
        &config.params(),
        &config.solver(),
    )?;
    io::write_report(&report, &config.output_dir.join("report.json"), Some(config))?;
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(report.all_pass())
}

fn probe(config: &Config) -> Result<bool> {
    let p = config.params();
    let grids = config.probe_grids()?;
    let result = nondegeneracy_probe(config.k_index, &grids, &p)?;
    let control = zero_potential_eigenvalue(grids[0], &p)?;
    let pass = result.stable()
        && result.smallest_abs_eigenvalue >= 1e-2
        && result.eigenvector_asymmetry <= 1e-8
        && control == 1.0;
    emit(
        config,
        "probe.json",
        &json!({"probe": result, "zero_potential_eigenvalue": control, "eigen_tol": EIGEN_TOL, "pass": pass}),
    )?;
    Ok(pass)
}

fn estimates(config: &Config, report: Option<&Path>) -> Result<bool> {
    let path = report.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.join("report.json"));
    let env = io::read_report(&path)?;
    let mut verdicts = Vec::new();
    let mut pass = true;
    for v in io::reverify(&env.report) {
        let v = v?;
        pass &= v.pass;
        verdicts.push(v);
    }
    io::write_csv(&verdicts, &config.output_dir.join("estimates.csv"))?;
    emit(config, "estimates.json", &serde_json::to_value(&verdicts)?)?;
    Ok(pass)
}

fn plot_data(config: &Config) -> Result<bool> {
    let k = config.k_index;
    let rows = io::plot_grid(config.plot_half_width, config.plot_points, |x, y| {
        eval_zeta_star(k, x, y, 0, 0).unwrap_or(f64::NAN)
    });
    io::write_xyz(&rows, ["x", "y", "zeta"], &config.output_dir.join(format!("lump_k{k}.csv")))?;
    let p = config.params();
    let n = config.dispersion_samples;
    let curve: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let k1 = config.k1_max * i as f64 / (n - 1) as f64;
            [k1, dispersion_speed(k1, &p)]
        })
        .collect();
    let mut w = csv::Writer::from_path(config.output_dir.join("dispersion.csv"))
        .map_err(|e| Error::Config(e.to_string()))?;
    w.write_record(["k1", "c"]).map_err(|e| Error::Config(e.to_string()))?;
    for [a, b] in curve {
        w.write_record([format!("{a:e}"), format!("{b:e}")])
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    let extremum = rows.iter().min_by(|a, b| a[2].total_cmp(&b[2])).copied();
    emit(
        config,
        "plot_data.json",
        &json!({"lump_minimum": extremum, "files": [format!("lump_k{k}.csv"), "dispersion.csv"]}),
    )?;
    Ok(true)
}
