//! The five subcommands. Each turns a validated configuration into a
//! deterministic JSON payload plus CSV tables.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use shocklab_core::continuum::{
    classify, critical_set, discriminant, discriminant_zeros_in_x, eos_coefficients, solve_eos, Phase,
    Stationarity,
};
use shocklab_core::flow::{integrate_flow, spectrum_drift, FlowMode, FlowSchedule, LaxMatrix};
use shocklab_core::lattice::{
    default_buffer, order_parameter, solve_string, solve_string_with_stats, window_len_for, LatticeWindow,
    RightClosure,
};
use shocklab_core::oracle::{gaussian_log_tau, hankel_log_tau, moments, tau_oracle, OracleMethod, WeightSpec};
use shocklab_core::shock::compare;
use shocklab_core::CouplingVector;

use crate::config::{FlowClosure, FlowStart, PhaseConfig, RunConfig, DEFAULT_X_MAX};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Outcome, ResultBundle, Table};
use crate::presets::{Preset, PresetJob};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Flow,
    Oracle,
    Phase,
    Reproduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Flow => "flow",
            Command::Oracle => "oracle",
            Command::Phase => "phase",
            Command::Reproduce => "reproduce",
        }
    }
}

type Job = (Value, Vec<Table>);

/// Validate, run and package one command.
pub fn execute(command: Command, cfg: &RunConfig) -> CliResult<Outcome> {
    cfg.validate()?;
    let resolved = cfg.resolved();
    let (payload, tables) = match command {
        Command::Solve => solve(&resolved, "solve")?,
        Command::Flow => flow(&resolved)?,
        Command::Oracle => oracle(&resolved)?,
        Command::Phase => {
            let pc = resolved.phase.clone().unwrap_or_else(default_phase);
            phase(&resolved, &pc)?
        }
        Command::Reproduce => reproduce(&resolved)?,
    };
    let bundle = ResultBundle::new(command.name(), resolved, payload, rayon::current_num_threads());
    Ok(Outcome { bundle, tables })
}

fn default_phase() -> PhaseConfig {
    match Preset::Fig2a.job() {
        PresetJob::CriticalSet(p) => p,
        _ => unreachable!("fig2a is a critical-set preset"),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload serializes")
}

fn x_max(cfg: &RunConfig) -> f64 {
    cfg.window.x_max.unwrap_or(DEFAULT_X_MAX)
}

fn window_len(cfg: &RunConfig, order: usize) -> usize {
    cfg.window
        .len
        .unwrap_or_else(|| window_len_for(x_max(cfg), cfg.scale_or_default(), order))
}

fn rescaled_map(c: &CouplingVector) -> Value {
    let m: serde_json::Map<String, Value> = (1..=c.order())
        .map(|k| (format!("T{}", 2 * k), json!(c.rescaled(k))))
        .collect();
    Value::Object(m)
}

fn solve(cfg: &RunConfig, table_name: &str) -> CliResult<Job> {
    let c = cfg.couplings()?;
    let scale = c.scale();
    let len = window_len(cfg, c.order());
    let (window, stats) = solve_string_with_stats(&c, len, &cfg.solver)?;
    let trace = order_parameter(&window, scale);
    let report = compare(&trace, &c, &cfg.oscillation)?;

    let mut table = Table::new(
        table_name,
        &["x", "u_lattice", "u_branch1", "u_branch2", "u_branch3", "deviation"],
    );
    for p in &report.points {
        let branch = |i: usize| Cell::from(p.branches.get(i).copied());
        table.push(vec![
            p.x.into(),
            p.u_lattice.into(),
            branch(0),
            branch(1),
            branch(2),
            p.deviation.into(),
        ]);
    }
    let xs: Vec<f64> = trace.xs().collect();
    let payload = json!({
        "scale": scale,
        "couplings": rescaled_map(&c),
        "window_len": len,
        "reported_len": window.reported_len(),
        "stats": to_value(&stats),
        "smooth_max_deviation": report.smooth_max_deviation,
        "oscillation": {
            "flag": report.oscillation.flag,
            "onset": report.oscillation.onset,
        },
        "envelope": to_value(&report.oscillation.envelope),
        "roots": root_census(&c, &xs)?,
        "points": to_value(&report.points),
    });
    Ok((payload, vec![table]))
}

/// Extreme counts of root types over the sample points, and where `Delta > 0`.
fn root_census(c: &CouplingVector, xs: &[f64]) -> CliResult<Value> {
    #[derive(Default, Serialize)]
    struct Range {
        min: usize,
        max: usize,
    }
    fn widen(r: &mut Option<Range>, v: usize) {
        match r {
            None => *r = Some(Range { min: v, max: v }),
            Some(r) => {
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
    }
    let (mut real, mut negative, mut negative_minima, mut accessible) = (None, None, None, None);
    let mut multivalued: Option<(f64, f64)> = None;
    let mut coexistence: Option<(f64, f64)> = None;
    let rescaled = c.rescaled_vec();
    for &x in xs.iter().filter(|&&x| x > 0.0) {
        let roots = solve_eos(&eos_coefficients(c, x))?;
        let neg = roots.roots.iter().filter(|r| !r.accessible);
        widen(&mut real, roots.distinct_count());
        widen(&mut negative, neg.clone().count());
        widen(
            &mut negative_minima,
            neg.filter(|r| r.kind == Stationarity::LocalMin).count(),
        );
        widen(&mut accessible, roots.accessible().count());
        if roots.distinct_count() > 1 {
            multivalued = Some(multivalued.map_or((x, x), |(a, _)| (a, x)));
        }
        if rescaled.len() <= 3 {
            let t = |k: usize| rescaled.get(k).copied().unwrap_or(0.0);
            if discriminant(x, t(0), t(1), t(2)).sign() > 0 {
                coexistence = Some(coexistence.map_or((x, x), |(a, _)| (a, x)));
            }
        }
    }
    let zeros: Vec<f64> = if rescaled.len() <= 3 {
        let t = |k: usize| rescaled.get(k).copied().unwrap_or(0.0);
        discriminant_zeros_in_x(t(0), t(1), t(2))
    } else {
        Vec::new()
    };
    Ok(json!({
        "real_roots": to_value(&real),
        "negative_roots": to_value(&negative),
        "negative_minima": to_value(&negative_minima),
        "accessible_roots": to_value(&accessible),
        "multivalued_window": multivalued.map(|(a, b)| [a, b]),
        "coexistence_window": coexistence.map(|(a, b)| [a, b]),
        "discriminant_zeros": zeros,
    }))
}

fn flow(cfg: &RunConfig) -> CliResult<Job> {
    let fc = cfg.flow.clone().unwrap_or_default();
    let c = cfg.couplings()?;
    let scale = c.scale();
    let legs = cfg.flow_legs()?;
    let order = legs.iter().map(|l| l.k).chain([c.order()]).max().unwrap_or(0);
    let len = window_len(cfg, order);
    let closure = match fc.closure {
        FlowClosure::Truncate => RightClosure::Truncate,
        FlowClosure::Linear => RightClosure::Linear,
        FlowClosure::Clamp => RightClosure::Clamp(c.clone()),
    };
    let start = match fc.start {
        FlowStart::Gaussian => LatticeWindow::gaussian(len, closure),
        FlowStart::String => solve_string(&c, len, &cfg.solver)?
            .with_buffer(0)
            .with_closure(closure),
    };
    let all_matrix = !legs.is_empty() && legs.iter().all(|l| l.mode == FlowMode::Matrix);
    let sched = FlowSchedule {
        origin: c.clone(),
        legs,
        snapshot_every: fc.snapshot_every,
    };
    let result = integrate_flow(&start, &sched)?;

    let reference = if fc.compare {
        Some(solve_string(&result.couplings, len, &cfg.solver)?)
    } else {
        None
    };
    let reported = len - default_buffer(len, order);
    let mut table = Table::new("flow", &["n", "x", "b_start", "b_final", "b_string", "rel_deviation"]);
    let mut max_rel: Option<f64> = None;
    let mut interior_rel: Option<f64> = None;
    for i in 0..len {
        let b_final = result.window.values()[i];
        let b_string = reference.as_ref().map(|w| w.values()[i]);
        let rel = b_string.map(|s| ((b_final - s) / s).abs());
        if i < reported {
            if let Some(r) = rel {
                max_rel = Some(max_rel.map_or(r, |m: f64| m.max(r)));
                if i < len / 3 {
                    interior_rel = Some(interior_rel.map_or(r, |m: f64| m.max(r)));
                }
            }
        }
        table.push(vec![
            (i + 1).into(),
            ((i + 1) as f64 / scale as f64).into(),
            start.values()[i].into(),
            b_final.into(),
            b_string.into(),
            rel.into(),
        ]);
    }
    let drift = if all_matrix {
        let mats = result
            .snapshots
            .iter()
            .map(|s| LaxMatrix::from_window(&LatticeWindow::new(s.values.clone(), RightClosure::Truncate)))
            .collect::<Result<Vec<_>, _>>()?;
        Some(spectrum_drift(&mats))
    } else {
        None
    };
    let endpoint: serde_json::Map<String, Value> = result
        .couplings
        .iter_raw()
        .map(|(k, t)| (format!("t{}", 2 * k), json!(t)))
        .collect();
    let payload = json!({
        "scale": scale,
        "window_len": len,
        "reported_len": reported,
        "steps": result.steps,
        "min_margin": result.min_margin,
        "endpoint": endpoint,
        "max_rel_deviation": max_rel,
        "interior_rel_deviation": interior_rel,
        "spectrum_drift": drift,
        "snapshot_times": result.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
        "b_final": result.window.values(),
    });
    Ok((payload, vec![table]))
}

fn oracle(cfg: &RunConfig) -> CliResult<Job> {
    let oc = cfg.oracle.clone().unwrap_or_default();
    let c = cfg.couplings()?;
    let gaussian = c.is_zero();
    let w = WeightSpec::new(c.clone())?;
    let n_max = oc.n_max;
    let st = tau_oracle(&w, n_max, OracleMethod::Stieltjes)?;
    let m = moments(&w, 2 * n_max + 2)?;
    let mut hankel = Vec::with_capacity(n_max + 2);
    let mut hankel_failure = None;
    for n in 0..=n_max + 1 {
        match hankel_log_tau(&m, n) {
            Ok(v) => hankel.push(v),
            Err(e) => {
                hankel_failure = Some(e.to_string());
                break;
            }
        }
    }
    let b_hankel = |n: usize| -> Option<f64> {
        (n + 1 < hankel.len()).then(|| (hankel[n + 1] + hankel[n - 1] - 2.0 * hankel[n]).exp())
    };

    let mut table = Table::new(
        "oracle",
        &[
            "n",
            "log_tau_stieltjes",
            "log_tau_hankel",
            "log_tau_gaussian",
            "b_stieltjes",
            "b_hankel",
            "rel_diff",
            "flag",
        ],
    );
    let mut max_rel: Option<f64> = None;
    let mut flagged = Vec::new();
    let mut rows = Vec::new();
    for n in 0..=n_max + 1 {
        let lt_h = hankel.get(n).copied();
        let lt_g = gaussian.then(|| gaussian_log_tau(n));
        let (b_s, b_h) = if (1..=n_max).contains(&n) {
            (Some(st.recurrence[n - 1]), b_hankel(n))
        } else {
            (None, None)
        };
        let rel = match (b_s, b_h) {
            (Some(s), Some(h)) => Some(((s - h) / s).abs()),
            _ => None,
        };
        let flag = rel.map(|r| !(r <= oc.agreement_tol));
        if let Some(r) = rel {
            max_rel = Some(max_rel.map_or(r, |m: f64| m.max(r)));
        }
        if flag == Some(true) {
            flagged.push(n);
        }
        table.push(vec![
            n.into(),
            st.log_tau[n].into(),
            lt_h.into(),
            lt_g.into(),
            b_s.into(),
            b_h.into(),
            rel.into(),
            flag.map_or(Cell::Empty, Cell::from),
        ]);
        rows.push(json!({
            "n": n,
            "log_tau_stieltjes": st.log_tau[n],
            "log_tau_hankel": lt_h,
            "log_tau_gaussian": lt_g,
            "b_stieltjes": b_s,
            "b_hankel": b_h,
            "rel_diff": rel,
        }));
    }
    let payload = json!({
        "n_max": n_max,
        "couplings": rescaled_map(&c),
        "agreement_tol": oc.agreement_tol,
        "max_rel_diff": max_rel,
        "flagged": flagged,
        "hankel_failure": hankel_failure,
        "precision": to_value(&st.precision),
        "moments": m.values.iter().map(|v| v * m.log_scale.exp()).collect::<Vec<_>>(),
        "rows": rows,
    });
    Ok((payload, vec![table]))
}

fn phase_name(p: Phase) -> String {
    to_value(&p).as_str().unwrap_or_default().to_string()
}

fn phase(cfg: &RunConfig, pc: &PhaseConfig) -> CliResult<Job> {
    let c = cfg.couplings()?;
    if c.order() > 3 {
        return Err(CliError::config("phase diagrams take couplings up to T6 only"));
    }
    let scale = c.scale();
    let (t2, t4) = (c.rescaled(1), c.rescaled(2));
    let [nx, ny] = pc.grid;
    let axis = |r: [f64; 2], n: usize| -> Vec<f64> {
        (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect()
    };
    let xs = axis(pc.x_range, nx);
    let ts = axis(pc.t6_range, ny);
    let points = xs
        .par_iter()
        .map(|&x| {
            ts.iter()
                .map(|&t6| {
                    let cv = CouplingVector::from_rescaled(scale, [(1, t2), (2, t4), (3, t6)])?;
                    classify(x, &cv)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let polylines = critical_set(
        t2,
        t4,
        (pc.x_range[0], pc.x_range[1]),
        (pc.t6_range[0], pc.t6_range[1]),
        (nx, ny),
    )?;

    let mut grid = Table::new(
        "phase_grid",
        &["x", "T6", "discriminant", "phase", "real_roots", "accessible_roots", "negative_minima"],
    );
    let mut counts = std::collections::BTreeMap::new();
    for p in points.iter().flatten() {
        let name = phase_name(p.phase);
        *counts.entry(name.clone()).or_insert(0usize) += 1;
        grid.push(vec![
            p.x.into(),
            p.t6.into(),
            p.discriminant.into(),
            name.as_str().into(),
            p.real_roots.into(),
            p.accessible_roots.into(),
            p.negative_minima.into(),
        ]);
    }
    let mut contour = Table::new("critical_set", &["polyline", "closed", "x", "T6"]);
    for (i, line) in polylines.iter().enumerate() {
        for &(x, t6) in &line.points {
            contour.push(vec![i.into(), line.closed.into(), x.into(), t6.into()]);
        }
    }
    let payload = json!({
        "T2": t2,
        "T4": t4,
        "x_range": pc.x_range,
        "t6_range": pc.t6_range,
        "grid": pc.grid,
        "phase_counts": counts,
        "discriminant": points.iter().map(|row| row.iter().map(|p| p.discriminant).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "critical_set": to_value(&polylines),
    });
    Ok((payload, vec![grid, contour]))
}

fn reproduce(cfg: &RunConfig) -> CliResult<Job> {
    let preset = cfg
        .preset()?
        .ok_or_else(|| CliError::config("reproduce needs a preset (--preset NAME)"))?;
    let name = preset.name();
    let (mut payload, tables) = match preset.job() {
        PresetJob::Comparison => solve(cfg, name)?,
        PresetJob::Roots => roots_table(cfg, name)?,
        PresetJob::CriticalSet(default) => {
            let pc = cfg.phase.clone().unwrap_or(default);
            phase(cfg, &pc)?
        }
        PresetJob::FreeEnergy { x, t6 } => free_energy_table(cfg, name, x, &t6)?,
    };
    if let Value::Object(m) = &mut payload {
        m.insert("preset".into(), json!(name));
    }
    Ok((payload, tables))
}

fn roots_table(cfg: &RunConfig, name: &str) -> CliResult<Job> {
    let c = cfg.couplings()?;
    let scale = c.scale();
    let count = (x_max(cfg) * scale as f64).round() as usize;
    let xs: Vec<f64> = (1..=count).map(|n| n as f64 / scale as f64).collect();
    let mut table = Table::new(
        name,
        &["x", "u_root1", "u_root2", "u_root3", "real_roots", "accessible_roots", "negative_minima"],
    );
    for &x in &xs {
        let roots = solve_eos(&eos_coefficients(&c, x))?;
        let r = |i: usize| Cell::from(roots.roots.get(i).map(|r| r.u));
        table.push(vec![
            x.into(),
            r(0),
            r(1),
            r(2),
            roots.distinct_count().into(),
            roots.accessible().count().into(),
            roots
                .roots
                .iter()
                .filter(|r| !r.accessible && r.kind == Stationarity::LocalMin)
                .count()
                .into(),
        ]);
    }
    let payload = json!({
        "scale": scale,
        "couplings": rescaled_map(&c),
        "roots": root_census(&c, &xs)?,
    });
    Ok((payload, vec![table]))
}

fn free_energy_table(cfg: &RunConfig, name: &str, x: f64, t6s: &[f64]) -> CliResult<Job> {
    let c = cfg.couplings()?;
    let scale = c.scale();
    let (t2, t4) = (c.rescaled(1), c.rescaled(2));
    let mut table = Table::new(name, &["T6", "u", "free_energy"]);
    let mut curves = Vec::new();
    for &t6 in t6s {
        let cv = CouplingVector::from_rescaled(scale, [(1, t2), (2, t4), (3, t6)])?;
        let eos = eos_coefficients(&cv, x);
        for i in 0..=300 {
            let u = 1.5 * i as f64 / 300.0;
            table.push(vec![t6.into(), u.into(), eos.free_energy(u).into()]);
        }
        let roots = solve_eos(&eos)?;
        curves.push(json!({
            "T6": t6,
            "stationary_points": to_value(&roots.roots),
            "equilibrium": roots.equilibrium(&eos),
            "accessible_minima": roots.accessible_minima().count(),
        }));
    }
    let payload = json!({
        "x": x,
        "T2": t2,
        "T4": t4,
        "curves": curves,
    });
    Ok((payload, vec![table]))
}
