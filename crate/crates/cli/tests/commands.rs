use serde_json::Value;

use shocklab_cli::{execute, parse_config, Command, Outcome, RunConfig};
use shocklab_core::continuum::discriminant;

fn run(command: Command, json: &str) -> Outcome {
    execute(command, &parse_config(json).unwrap()).unwrap()
}

fn payload(o: &Outcome) -> &Value {
    &o.bundle.payload
}

fn column(o: &Outcome, table: usize, name: &str) -> Vec<String> {
    let t = &o.tables[table];
    let i = t.header.iter().position(|h| h == name).unwrap();
    t.rows.iter().map(|r| r[i].render()).collect()
}

#[test]
fn zero_couplings_give_the_diagonal() {
    let o = run(Command::Solve, r#"{"N": 50}"#);
    let xs = column(&o, 0, "x");
    let us = column(&o, 0, "u_lattice");
    let dev = column(&o, 0, "deviation");
    assert!(!xs.is_empty());
    for ((x, u), d) in xs.iter().zip(&us).zip(&dev) {
        assert_eq!(x, u);
        assert_eq!(d.parse::<f64>().unwrap(), 0.0);
    }
    assert!(column(&o, 0, "u_branch2").iter().all(String::is_empty));
}

#[test]
fn fig1a_overlaps_the_continuum() {
    let o = run(Command::Solve, r#"{"preset": "fig1a"}"#);
    let p = payload(&o);
    assert_eq!(p["oscillation"]["flag"], Value::Bool(false));
    assert!(p["smooth_max_deviation"].as_f64().unwrap() < 1e-3);
    assert_eq!(p["scale"], 200);
}

#[test]
fn bundles_reproduce_their_payload() {
    let cases = [
        (Command::Solve, r#"{"preset": "fig1b", "N": 100}"#),
        (Command::Reproduce, r#"{"preset": "fig3b", "N": 120}"#),
        (Command::Reproduce, r#"{"preset": "fig2b"}"#),
        (Command::Oracle, r#"{"couplings": {"t4": -0.02}, "oracle": {"n_max": 8}}"#),
        (Command::Phase, r#"{"couplings": {"T4": 0.1}, "phase": {"x_range": [0, 1], "t6_range": [-0.012, -0.004], "grid": [21, 21]}}"#),
        (Command::Flow, r#"{"N": 30, "window": {"len": 40}, "flow": {"snapshot_every": 50, "legs": [{"coupling": "t4", "target": -0.005}]}}"#),
    ];
    for (cmd, json) in cases {
        let first = run(cmd, json);
        let echo = serde_json::to_string(&first.bundle.config).unwrap();
        let second = execute(cmd, &parse_config(&echo).unwrap()).unwrap();
        assert_eq!(
            serde_json::to_string(&first.bundle.payload).unwrap(),
            serde_json::to_string(&second.bundle.payload).unwrap(),
            "{json}"
        );
        for (a, b) in first.tables.iter().zip(&second.tables) {
            assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        }
        assert_eq!(second.bundle.config, first.bundle.config);
    }
}

#[test]
fn gaussian_oracle_matches_closed_form() {
    let o = run(Command::Oracle, r#"{"oracle": {"n_max": 15}}"#);
    let p = payload(&o);
    for row in p["rows"].as_array().unwrap().iter().take(16) {
        let exact = row["log_tau_gaussian"].as_f64().unwrap();
        let s = row["log_tau_stieltjes"].as_f64().unwrap();
        // relative accuracy of tau is the absolute accuracy of ln tau
        assert!((s - exact).abs() < 1e-10, "n = {}", row["n"]);
        if let Some(b) = row["b_stieltjes"].as_f64() {
            let n = row["n"].as_f64().unwrap();
            assert!((b - n).abs() < 1e-10 * n);
        }
    }
}

#[test]
fn route_disagreement_is_flagged() {
    let o = run(Command::Oracle, r#"{"oracle": {"n_max": 6, "agreement_tol": 0.0}}"#);
    let flags = column(&o, 0, "flag");
    assert_eq!(flags[0], "");
    assert!(flags.iter().any(|f| f == "true"));
    let o = run(Command::Oracle, r#"{"oracle": {"n_max": 6, "agreement_tol": 1e-8}}"#);
    assert!(column(&o, 0, "flag").iter().all(|f| f != "true"));
}

#[test]
fn empty_schedule_echoes_the_start() {
    let o = run(Command::Flow, r#"{"N": 20, "window": {"len": 30}}"#);
    assert_eq!(column(&o, 0, "b_start"), column(&o, 0, "b_final"));
    assert_eq!(payload(&o)["steps"], 0);
}

#[test]
fn quartic_leg_matches_the_string_solution() {
    let o = run(
        Command::Flow,
        r#"{"N": 50, "window": {"len": 120}, "flow": {"legs": [{"coupling": "t4", "target": -0.01}]}}"#,
    );
    let dev = payload(&o)["interior_rel_deviation"].as_f64().unwrap();
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn matrix_legs_report_spectrum_drift() {
    let o = run(
        Command::Flow,
        r#"{"N": 40, "window": {"len": 30}, "flow": {"closure": "truncate", "compare": false, "snapshot_every": 10,
            "legs": [{"coupling": "t2", "target": 0.05, "mode": "matrix"}]}}"#,
    );
    let drift = payload(&o)["spectrum_drift"].as_f64().unwrap();
    assert!(drift < 1e-8, "{drift}");
}

fn contour(o: &Outcome) -> Vec<(f64, f64)> {
    payload(o)["critical_set"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|line| line["points"].as_array().unwrap().clone())
        .map(|pt| (pt[0].as_f64().unwrap(), pt[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn critical_set_passes_through_the_caption_point() {
    let o = run(Command::Reproduce, r#"{"preset": "fig2a"}"#);
    let pts = contour(&o);
    assert!(!pts.is_empty());
    let near = pts
        .iter()
        .map(|&(x, t)| (x - 5.0 / 18.0).abs().max((t + 0.008).abs() * 100.0))
        .fold(f64::INFINITY, f64::min);
    assert!(near < 1e-4, "{near}");
    for &(x, t) in &pts {
        let d = discriminant(x, 0.0, 0.1, t);
        assert!(d.value.abs() <= 1e-9 * d.scale, "({x}, {t})");
    }
}

#[test]
fn single_minimum_window_has_no_contour() {
    let o = run(
        Command::Phase,
        r#"{"couplings": {"T4": 0.1}, "phase": {"x_range": [0, 1], "t6_range": [-0.03, -0.01], "grid": [41, 41]}}"#,
    );
    assert!(contour(&o).is_empty());
    assert!(column(&o, 0, "phase").iter().all(|p| p == "single-minimum"));
}

#[test]
fn contour_is_stable_under_grid_refinement() {
    let cfg = |n: usize| {
        format!(
            r#"{{"couplings": {{"T4": 0.1}}, "phase": {{"x_range": [0, 1], "t6_range": [-0.012, -0.004], "grid": [{n}, {n}]}}}}"#
        )
    };
    let coarse = contour(&run(Command::Phase, &cfg(21)));
    let fine = contour(&run(Command::Phase, &cfg(41)));
    let mut matched = 0;
    for &(x, t) in &coarse {
        let nearest = fine
            .iter()
            .filter(|(_, ft)| (ft - t).abs() < 1e-14)
            .min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()));
        if let Some(&(fx, _)) = nearest {
            assert!((fx - x).abs() < 1e-10, "({x}, {t}) vs {fx}");
            matched += 1;
        }
    }
    assert!(matched >= coarse.len() / 3, "{matched} of {}", coarse.len());
}

#[test]
fn comparison_presets_summarize_roots() {
    let o = run(Command::Reproduce, r#"{"preset": "fig3d"}"#);
    let p = payload(&o);
    assert_eq!(p["preset"], "fig3d");
    assert_eq!(p["oscillation"]["flag"], Value::Bool(true));
    assert_eq!(p["roots"]["negative_minima"]["max"], 1);
    assert_eq!(p["roots"]["accessible_roots"]["max"], 1);
    assert_eq!(o.tables[0].name, "fig3d");

    let o = run(Command::Reproduce, r#"{"preset": "fig4a", "N": 100}"#);
    assert_eq!(o.tables[0].rows.len(), 100);
    assert_eq!(payload(&o)["roots"]["real_roots"]["max"], 3);
}

#[test]
fn reproduce_without_preset_is_a_config_error() {
    let err = execute(Command::Reproduce, &RunConfig::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
