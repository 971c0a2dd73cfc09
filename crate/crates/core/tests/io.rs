mod common;

use common::random_field;
use fdkp::harness::{run_sweep, DEFAULT_EPSILONS};
use fdkp::io::{self, Config, FieldSidecar};
use fdkp::reduction::SolverConfig;
use fdkp::{Frame, Grid, SymbolParams};
use proptest::prelude::*;
use serde_json::Value;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_round_trip_is_bit_exact(seed in any::<u64>(), scaled in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(12.5, 40.0, 32, 16).unwrap();
        let frame = if scaled { Frame::KpScaled } else { Frame::Physical };
        let f = random_field(g, frame, seed, 2.0);
        let path = dir.path().join("f.f64");
        let cfg = Config::default();
        io::write_field(&f, &path, &FieldSidecar::new(&f, Some(&cfg))).unwrap();
        let (back, side) = io::read_field(&path).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.frame(), frame);
        let bits = |a: &ndarray::Array2<f64>| a.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.samples()), bits(f.samples()));
        prop_assert_eq!(side.config_hash, Some(cfg.hash()));
        prop_assert_eq!(std::fs::metadata(&path).unwrap().len(), 8 * 32 * 16);
    }
}

fn perturb(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_u64() => Value::from(n.as_u64().unwrap() + 1),
        Value::Number(n) => Value::from(n.as_f64().unwrap() * 1.5 + 0.25),
        Value::String(s) if s == "finite_difference" => Value::from("exact"),
        Value::String(s) => Value::from(format!("{s}x")),
        Value::Array(a) => Value::Array(a.iter().take(a.len().saturating_sub(1)).cloned().collect()),
        other => other.clone(),
    }
}

#[test]
fn hash_changes_with_every_key() {
    let base = Config::default();
    let json = serde_json::to_value(&base).unwrap();
    let keys: Vec<String> = json.as_object().unwrap().keys().cloned().collect();
    assert!(keys.len() >= 25);
    for k in keys {
        let mut changed = json.clone();
        let old = changed[&k].clone();
        changed[&k] = perturb(&old);
        let cfg: Config = serde_json::from_value(changed).unwrap();
        assert_ne!(cfg.hash(), base.hash(), "key {k}");
    }
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    assert_eq!(io::load_config(&write("a.json", "{}")).unwrap(), Config::default());
    let err = io::load_config(&write("b.json", r#"{"beta": 0.2}"#)).unwrap_err();
    assert!(err.to_string().contains("beta"));
    let c = io::load_config(&write("c.json", r#"{"epsilons": [0.2, 0.1]}"#)).unwrap();
    assert_eq!(c.epsilons, vec![0.2, 0.1]);
    assert!(io::load_config(&write("d.json", r#"{"grid": {"points_x": 8}}"#)).is_err());
    assert!(io::load_config(&write("e.json", "{not json")).is_err());
    assert!(io::load_config(&dir.path().join("missing.json")).is_err());
    let err = io::load_config(&write("f.json", r#"{"points_x": 100}"#)).unwrap_err();
    assert!(err.to_string().contains("points_x"), "{err}");
}

#[test]
fn report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
    let report = run_sweep(1, &DEFAULT_EPSILONS, g, &SymbolParams::default(), &SolverConfig::default()).unwrap();
    let path = dir.path().join("report.json");
    let cfg = Config::default();
    io::write_report(&report, &path, Some(&cfg)).unwrap();
    let env = io::read_report(&path).unwrap();
    assert_eq!(env.schema_version, io::SCHEMA_VERSION);
    assert_eq!(env.config_hash, Some(cfg.hash()));
    assert_eq!(env.report.records.len(), report.records.len());
    for (a, b) in io::reverify(&env.report).into_iter().zip(&report.estimates) {
        assert_eq!(&a.unwrap(), b);
    }
    let csv = std::fs::read_to_string(path.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("criterion,epsilon,ratio,fitted_exponent,pass"));
    assert!(lines.any(|l| l.starts_with("R_eps_bound,0.025,")));

    let mut text: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    text["schema_version"] = Value::from(99);
    std::fs::write(&path, text.to_string()).unwrap();
    assert!(io::read_report(&path).is_err());
}

#[test]
fn plot_rows_cover_the_origin() {
    let rows = io::plot_grid(10.0, 201, |x, y| x - y);
    assert_eq!(rows.len(), 201 * 201);
    assert!(rows.iter().any(|r| r[0] == 0.0 && r[1] == 0.0));
}
