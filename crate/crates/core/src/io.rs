//! Configuration, field persistence and report emission.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{verify_estimate, Estimate, EstimateVerdict, SweepReport, DEFAULT_EPSILONS};
use crate::reduction::{JacobianMode, SolverConfig};
use crate::spectral::{Field, Frame, Grid};
use crate::symbols::SymbolParams;

/// Version of every JSON and CSV artifact layout.
pub const SCHEMA_VERSION: u32 = 1;

/// `git describe` of the build, or `"unknown"` outside a checkout.
pub const GIT_DESCRIBE: &str = env!("FDKP_GIT_DESCRIBE");

/// Flat run configuration; every key is optional in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub sobolev_s: f64,
    pub ball_m: f64,
    pub epsilon_max: f64,

    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_solver_tol: f64,
    pub linear_solver_max_iter: usize,
    pub jacobian_fd_step: f64,
    pub max_halvings: usize,
    pub gmres_restart: usize,
    pub jacobian: JacobianMode,

    pub half_width_x: f64,
    pub half_width_y: f64,
    pub points_x: usize,
    pub points_y: usize,
    /// Coarse level of the nondegeneracy probe; the fine level doubles it.
    pub probe_half_width: f64,
    pub probe_points: usize,

    pub epsilons: Vec<f64>,
    pub k_index: usize,
    pub output_dir: PathBuf,
    pub k1_max: f64,
    pub dispersion_samples: usize,
    /// Points per axis of the lump plot grid.
    pub plot_points: usize,
    pub plot_half_width: f64,
}

impl Default for Config {
    fn default() -> Self {
        let p = SymbolParams::default();
        let s = SolverConfig::default();
        Self {
            beta: p.beta,
            delta: p.delta,
            epsilon: p.epsilon,
            theta: p.theta,
            sobolev_s: p.sobolev_s,
            ball_m: p.ball_m,
            epsilon_max: p.epsilon_max,
            fixed_point_tol: s.fixed_point_tol,
            fixed_point_max_iter: s.fixed_point_max_iter,
            newton_tol: s.newton_tol,
            newton_max_iter: s.newton_max_iter,
            linear_solver_tol: s.linear_solver_tol,
            linear_solver_max_iter: s.linear_solver_max_iter,
            jacobian_fd_step: s.jacobian_fd_step,
            max_halvings: s.max_halvings,
            gmres_restart: s.gmres_restart,
            jacobian: s.jacobian,
            half_width_x: 100.0,
            half_width_y: 100.0,
            points_x: 512,
            points_y: 512,
            probe_half_width: 50.0,
            probe_points: 256,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            k_index: 1,
            output_dir: PathBuf::from("fdkp-out"),
            k1_max: 10.0,
            dispersion_samples: 1000,
            plot_points: 201,
            plot_half_width: 10.0,
        }
    }
}

impl Config {
    pub fn params(&self) -> SymbolParams {
        SymbolParams {
            beta: self.beta,
            delta: self.delta,
            epsilon: self.epsilon,
            theta: self.theta,
            sobolev_s: self.sobolev_s,
            ball_m: self.ball_m,
            epsilon_max: self.epsilon_max,
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            fixed_point_tol: self.fixed_point_tol,
            fixed_point_max_iter: self.fixed_point_max_iter,
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            linear_solver_tol: self.linear_solver_tol,
            linear_solver_max_iter: self.linear_solver_max_iter,
            jacobian_fd_step: self.jacobian_fd_step,
            max_halvings: self.max_halvings,
            gmres_restart: self.gmres_restart,
            jacobian: self.jacobian,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_width_x, self.half_width_y, self.points_x, self.points_y)
    }

    pub fn probe_grids(&self) -> Result<[Grid; 2]> {
        let g = Grid::new(self.probe_half_width, self.probe_half_width, self.probe_points, self.probe_points)?;
        Ok([g, g.refined()])
    }

    /// Checks every module invariant; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.solver().validate()?;
        self.grid()?;
        self.probe_grids()?;
        if !(1..=2).contains(&self.k_index) {
            return Err(Error::UnknownLump(self.k_index));
        }
        for w in self.epsilons.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::param("epsilons", "must be strictly decreasing"));
            }
        }
        if let Some(e) = self.epsilons.iter().find(|&&e| !(e > 0.0 && e < self.epsilon_max)) {
            return Err(Error::param("epsilons", format!("{e} outside (0, {})", self.epsilon_max)));
        }
        if !(self.k1_max > 0.0 && self.k1_max.is_finite()) {
            return Err(Error::param("k1_max", "must be positive"));
        }
        if self.dispersion_samples < 2 {
            return Err(Error::param("dispersion_samples", "need at least two samples"));
        }
        if self.plot_points < 2 || !(self.plot_half_width > 0.0) {
            return Err(Error::param("plot_points", "plot grid needs two points and a positive width"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex(&Sha256::digest(json))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a flat JSON object, applies defaults and validates.
pub fn parse_config(text: &str) -> Result<Config> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("top level must be a JSON object".into()))?;
    let known = serde_json::to_value(Config::default())?;
    let known = known.as_object().expect("config is an object");
    if let Some(k) = obj.keys().find(|k| !known.contains_key(*k)) {
        return Err(Error::UnknownKey(k.clone()));
    }
    if let Some((k, _)) = obj.iter().find(|(_, v)| v.is_object()) {
        return Err(Error::Config(format!("key `{k}`: nested objects are not allowed")));
    }
    let cfg: Config = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config> {
    parse_config(&fs::read_to_string(path)?)
}

/// Metadata written next to every field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub schema_version: u32,
    pub grid: Grid,
    pub frame: Frame,
    /// Layout of the binary payload.
    pub layout: String,
    pub epsilon: Option<f64>,
    pub k_index: Option<usize>,
    pub git_describe: String,
    pub config_hash: Option<String>,
    pub config: Option<Config>,
}

impl FieldSidecar {
    pub fn new(field: &Field, config: Option<&Config>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            grid: *field.grid(),
            frame: field.frame(),
            layout: "row-major f64 little-endian, index (ix, iy) at ix * points_y + iy".into(),
            epsilon: config.map(|c| c.epsilon),
            k_index: config.map(|c| c.k_index),
            git_describe: GIT_DESCRIBE.into(),
            config_hash: config.map(Config::hash),
            config: config.cloned(),
        }
    }
}

/// Path of the JSON sidecar belonging to a field file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the samples of `field` to `path` and its sidecar to `path.json`.
pub fn write_field(field: &Field, path: &Path, sidecar: &FieldSidecar) -> Result<()> {
    let samples = field.samples();
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for v in samples.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<(Field, FieldSidecar)> {
    let sidecar: FieldSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let g = sidecar.grid;
    let g = Grid::new(g.half_width_x, g.half_width_y, g.points_x, g.points_y)?;
    let bytes = fs::read(path)?;
    if bytes.len() != g.len() * 8 {
        return Err(Error::Shape {
            expected: g.shape(),
            found: (bytes.len() / 8, 1),
        });
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")))
        .collect();
    let samples = ndarray::Array2::from_shape_vec(g.shape(), values).map_err(|_| Error::Shape {
        expected: g.shape(),
        found: (bytes.len() / 8, 1),
    })?;
    Ok((Field::with_samples(g, sidecar.frame, samples)?, sidecar))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub git_describe: String,
    pub config_hash: Option<String>,
    pub config: Option<Config>,
    pub report: SweepReport,
}

/// One row of the per-criterion CSV table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionRow {
    pub criterion: String,
    pub epsilon: Option<f64>,
    pub ratio: Option<f64>,
    pub fitted_exponent: Option<f64>,
    pub pass: bool,
}

pub fn criterion_rows(report: &SweepReport) -> Vec<CriterionRow> {
    let mut rows = Vec::new();
    for v in &report.estimates {
        for r in &report.records {
            if let Some(&ratio) = r.estimate_ratios.get(v.name.key()) {
                rows.push(CriterionRow {
                    criterion: v.name.key().into(),
                    epsilon: Some(r.epsilon),
                    ratio: Some(ratio),
                    fitted_exponent: Some(v.fitted_exponent),
                    pass: v.pass,
                });
            }
        }
    }
    for c in &report.checks {
        rows.push(CriterionRow {
            criterion: c.name.clone(),
            epsilon: None,
            ratio: None,
            fitted_exponent: None,
            pass: c.pass,
        });
    }
    rows
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// Writes `path` (JSON envelope) and the same path with a `.csv` extension.
pub fn write_report(report: &SweepReport, path: &Path, config: Option<&Config>) -> Result<()> {
    let env = ReportEnvelope {
        schema_version: SCHEMA_VERSION,
        git_describe: GIT_DESCRIBE.into(),
        config_hash: config.map(Config::hash),
        config: config.cloned(),
        report: report.clone(),
    };
    fs::write(path, serde_json::to_vec_pretty(&env)?)?;
    write_csv(&criterion_rows(report), &path.with_extension("csv"))
}

pub fn read_report(path: &Path) -> Result<ReportEnvelope> {
    let env: ReportEnvelope = serde_json::from_slice(&fs::read(path)?)?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "report schema {} is not the supported {SCHEMA_VERSION}",
            env.schema_version
        )));
    }
    Ok(env)
}

/// Re-verifies every estimate of a stored report.
pub fn reverify(report: &SweepReport) -> Vec<Result<EstimateVerdict>> {
    Estimate::ALL.iter().map(|&e| verify_estimate(e, report)).collect()
}

/// `(x, y, value)` rows of `f` sampled on a square grid of `n` points per axis.
pub fn plot_grid(half_width: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Vec<[f64; 3]> {
    let h = 2.0 * half_width / (n - 1) as f64;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (-half_width + i as f64 * h, -half_width + j as f64 * h);
            rows.push([x, y, f(x, y)]);
        }
    }
    rows
}

pub fn write_xyz(rows: &[[f64; 3]], header: [&str; 3], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends one JSON object per line.
pub fn write_json_lines<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for it in items {
        serde_json::to_writer(&mut f, it)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(parse_config("{}").unwrap(), Config::default());
        let c = parse_config(r#"{"epsilons": [0.2, 0.1]}"#).unwrap();
        assert_eq!(c.epsilons, vec![0.2, 0.1]);
        assert!(matches!(
            parse_config(r#"{"beta": 0.2}"#),
            Err(Error::InvalidParameter { name: "beta", .. })
        ));
        assert!(matches!(parse_config(r#"{"betta": 2}"#), Err(Error::UnknownKey(k)) if k == "betta"));
        assert!(parse_config(r#"{"epsilons": [0.1, 0.2]}"#).is_err());
        assert!(parse_config("[1]").is_err());
        assert!(parse_config(r#"{"jacobian": "exact"}"#).is_ok());
    }

    #[test]
    fn hash_tracks_every_key() {
        let base = Config::default();
        let mut other = base.clone();
        other.gmres_restart += 1;
        assert_ne!(base.hash(), other.hash());
        assert_eq!(base.hash(), Config::default().hash());
        assert_eq!(base.hash().len(), 64);
    }
}
