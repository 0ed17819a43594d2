//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

use shocklab_cli::{execute, parse_config, Command};
use shocklab_core::continuum::{discriminant, discriminant_zeros_in_x, eos_coefficients, solve_eos};
use shocklab_core::flow::{integrate_flow, spectrum_drift, FlowLeg, FlowMode, FlowSchedule, LaxMatrix};
use shocklab_core::lattice::{
    solve_string, string_residual, v_explicit, v_general, ClosureKind, LatticeWindow,
    RightClosure, SolverOptions,
};
use shocklab_core::oracle::{stieltjes_recurrence, tau_oracle, OracleMethod, WeightSpec};
use shocklab_core::shock::convergence_study;
use shocklab_core::CouplingVector;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn critical_point() -> Verdict {
    let zeros = discriminant_zeros_in_x(0.0, 0.1, -0.008);
    let x_err = zeros
        .iter()
        .map(|z| (z - 5.0 / 18.0).abs())
        .fold(f64::INFINITY, f64::min);
    let d = discriminant(5.0 / 18.0, 0.0, 0.1, -0.008);
    let c = CouplingVector::from_rescaled(200, [(2, 0.1), (3, -0.008)]).unwrap();
    let roots = solve_eos(&eos_coefficients(&c, 5.0 / 18.0)).unwrap();
    let repeated = roots
        .roots
        .iter()
        .filter(|r| r.multiplicity >= 2)
        .map(|r| ((r.u - 5.0 / 6.0).abs(), r.multiplicity))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let (u_err, mult) = repeated.unwrap_or((f64::INFINITY, 0));
    verdict(
        x_err <= 1e-9 && u_err <= 1e-9,
        format!("|x0 - 5/18| = {x_err:.1e} (Delta = {:.1e}), repeated root |u - 5/6| = {u_err:.1e}, multiplicity {mult}", d.value),
    )
}

/// `ln[(2 pi)^{n/2} prod_{j=1}^{n} j! / n!]`.
fn gaussian_log_tau_closed(n: usize) -> f64 {
    let mut acc = 0.5 * n as f64 * (2.0 * PI).ln();
    let mut log_fact = 0.0;
    for j in 1..=n {
        log_fact += (j as f64).ln();
        acc += log_fact;
    }
    if n > 0 {
        acc -= log_fact;
    }
    acc
}

fn gaussian_exactness() -> Verdict {
    let c = CouplingVector::zero(500);
    let w = solve_string(&c, 500, &SolverOptions::default()).unwrap();
    let exact: Vec<f64> = (1..=500).map(|n| n as f64).collect();
    let b_err = max_abs_diff(w.values(), &exact);
    let residual = string_residual(&w, &c).iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let o = tau_oracle(&WeightSpec::new(c).unwrap(), 15, OracleMethod::Stieltjes).unwrap();
    let tau_err = (0..=15)
        .map(|n| (o.log_tau[n] - gaussian_log_tau_closed(n)).exp_m1().abs())
        .fold(0.0, f64::max);
    verdict(
        residual < 1e-13 && b_err == 0.0 && tau_err <= 1e-10,
        format!("M = 500 residual {residual:.1e}, max |B_n - n| = {b_err:.1e}; tau_n rel err (n <= 15) {tau_err:.1e}"),
    )
}

fn correctness_triangle() -> Verdict {
    let c = CouplingVector::from_raw(50, [(2, -0.01)]).unwrap();
    let newton = solve_string(&c, 80, &SolverOptions::default()).unwrap();
    let start = LatticeWindow::gaussian(80, RightClosure::Clamp(CouplingVector::zero(50)));
    let flow = integrate_flow(&start, &FlowSchedule::new(CouplingVector::zero(50)).leg(2, -0.01)).unwrap();
    let oracle = stieltjes_recurrence(&WeightSpec::new(c).unwrap(), 20).unwrap();
    let mut e = [0.0f64; 3];
    for n in 1..=20 {
        let (a, b, o) = (newton.site(n), flow.window.site(n), oracle.recurrence[n - 1]);
        e[0] = e[0].max(((a - b) / a).abs());
        e[1] = e[1].max(((a - o) / a).abs());
        e[2] = e[2].max(((b - o) / o).abs());
    }
    verdict(
        e.iter().all(|&v| v <= 1e-6),
        format!("n <= 20: newton/flow {:.1e}, newton/oracle {:.1e}, flow/oracle {:.1e}", e[0], e[1], e[2]),
    )
}

/// Unit background with a compact bump around the middle.
fn bump_profile(len: usize) -> Vec<f64> {
    let lo = len / 2 - 5;
    (0..len)
        .map(|i| {
            let d = i as f64 - lo as f64;
            if (0.0..10.0).contains(&d) {
                1.0 + 0.3 * (0.3 * d).sin()
            } else {
                1.0
            }
        })
        .collect()
}

fn conjecture_probe() -> Verdict {
    let scale = 50;
    let c0 = CouplingVector::from_raw(scale, [(2, -0.01)]).unwrap();
    let opts = SolverOptions {
        closure: ClosureKind::Linear,
        ..SolverOptions::default()
    };
    let base = solve_string(&c0, 120, &opts).unwrap().with_buffer(0).with_closure(RightClosure::Linear);
    let mut residuals = Vec::new();
    for k in 1..=6usize {
        let chi = shocklab_core::continuum::chi(k);
        let delta = -1e-3 / (2.0 * k as f64 * chi * 20f64.powi(k as i32 - 1));
        let sched = FlowSchedule::new(c0.clone()).leg(k, c0.raw(k) + delta);
        let r = match integrate_flow(&base, &sched) {
            Ok(f) => string_residual(&f.window, &f.couplings)[..40]
                .iter()
                .fold(0.0f64, |a, r| a.max(r.abs())),
            Err(_) => f64::INFINITY,
        };
        residuals.push(r);
    }

    // step halving on a quartic leg over a bounded profile
    let start = LatticeWindow::new(bump_profile(60), RightClosure::Truncate);
    let finals: Vec<Vec<f64>> = [10usize, 20, 40, 80]
        .iter()
        .map(|&steps| {
            let leg = FlowLeg {
                k: 2,
                target: 0.5,
                h: Some(0.5 / steps as f64),
                mode: FlowMode::Lattice,
            };
            integrate_flow(&start, &FlowSchedule::new(CouplingVector::zero(scale)).leg_with(leg))
                .map(|f| f.window.into_values())
                .unwrap_or_default()
        })
        .collect();
    let diffs: Vec<f64> = finals.windows(2).map(|w| max_abs_diff(&w[0], &w[1])).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);

    let pass = residuals[..5].iter().all(|&r| r < 1e-6) && residuals[5].is_finite() && order >= 3.5;
    let listed: Vec<String> = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| format!("k={}:{r:.1e}", i + 1))
        .collect();
    verdict(
        pass,
        format!("residuals {} (k=6 reported); integrator order {order:.2} from halvings {:?}", listed.join(" "), orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()),
    )
}

fn isospectrality() -> Verdict {
    let start = LatticeWindow::new(bump_profile(99), RightClosure::Truncate);
    let sched = FlowSchedule {
        origin: CouplingVector::zero(100),
        legs: vec![FlowLeg {
            k: 1,
            target: 1.0,
            h: Some(1e-3),
            mode: FlowMode::Matrix,
        }],
        snapshot_every: 50,
    };
    let f = integrate_flow(&start, &sched).unwrap();
    let mats: Vec<LaxMatrix> = f
        .snapshots
        .iter()
        .map(|s| LaxMatrix::from_window(&LatticeWindow::new(s.values.clone(), RightClosure::Truncate)).unwrap())
        .collect();
    let drift = spectrum_drift(&mats);
    verdict(
        drift < 1e-8,
        format!("matrix dim {}, {} steps, {} snapshots, drift {drift:.1e}", mats[0].dim(), f.steps, mats.len()),
    )
}

fn commutativity() -> Verdict {
    let origin = CouplingVector::zero(50);
    let start = LatticeWindow::gaussian(80, RightClosure::Linear);
    let a = integrate_flow(&start, &FlowSchedule::new(origin.clone()).leg(2, -1e-3).leg(3, -1e-5)).unwrap();
    let b = integrate_flow(&start, &FlowSchedule::new(origin).leg(3, -1e-5).leg(2, -1e-3)).unwrap();
    let interior = max_abs_diff(&a.window.values()[..40], &b.window.values()[..40]);
    let full = max_abs_diff(a.window.values(), b.window.values());
    verdict(
        interior < 5e-8,
        format!("t4 -1e-3 / t6 -1e-5: max-norm {interior:.1e} on sites 1..40 (whole window {full:.1e})"),
    )
}

fn preset_payload(name: &str) -> Value {
    let cfg = parse_config(&format!(r#"{{"preset": "{name}"}}"#)).unwrap();
    execute(Command::Reproduce, &cfg).unwrap().bundle.payload
}

fn phenomenology() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for name in ["fig1a", "fig4b"] {
        let p = preset_payload(name);
        let flag = p["oscillation"]["flag"].as_bool().unwrap();
        pass &= !flag;
        notes.push(format!("{name} flag={flag}"));
    }
    for name in ["fig1b", "fig3b", "fig3d"] {
        let p = preset_payload(name);
        let flag = p["oscillation"]["flag"].as_bool().unwrap();
        let onset = p["oscillation"]["onset"].as_f64();
        let roots = &p["roots"];
        let window = roots["multivalued_window"]
            .as_array()
            .or(roots["coexistence_window"].as_array())
            .map(|w| (w[0].as_f64().unwrap(), w[1].as_f64().unwrap()));
        let inside = match (onset, window) {
            (Some(x), Some((a, b))) => x >= a && x <= b,
            // a degenerate coexistence window: the tangency point itself
            (Some(x), None) => {
                let scale = 200.0;
                let w = 12.0;
                roots["discriminant_zeros"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .any(|z| (z.as_f64().unwrap() - x).abs() <= w / scale)
            }
            _ => false,
        };
        pass &= flag && inside;
        notes.push(format!("{name} flag={flag} onset={} inside={inside}", onset.map_or("none".into(), |x| format!("{x:.3}"))));
    }
    for name in ["fig3a", "fig3b", "fig3c", "fig3d"] {
        let p = preset_payload(name);
        let r = &p["roots"];
        let minima = r["negative_minima"]["max"].as_u64().unwrap();
        let accessible = (r["accessible_roots"]["min"].as_u64().unwrap(), r["accessible_roots"]["max"].as_u64().unwrap());
        let negative = r["negative_roots"]["max"].as_u64().unwrap();
        pass &= minima == 1 && accessible == (1, 1);
        notes.push(format!("{name} negative minima={minima} (negative roots {negative}) accessible={}", accessible.1));
    }
    verdict(pass, notes.join("; "))
}

fn convergence() -> Verdict {
    let c = CouplingVector::from_rescaled(100, [(2, 0.1), (3, -0.01)]).unwrap();
    let study = convergence_study(&c, &[100, 200, 400], 0.5, &SolverOptions::default()).unwrap();
    let devs: Vec<f64> = study.rows.iter().map(|r| r.deviation).collect();
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    let order = study.order.unwrap_or(f64::NAN);
    verdict(
        decreasing && order >= 1.5,
        format!(
            "x = 0.5, deviations {} at N = 100, 200, 400; fitted order {order:.2}",
            devs.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn v_coherence() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let len = rng.random_range(3..40);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..5.0)).collect();
        let w = LatticeWindow::new(values, RightClosure::Linear);
        for k in 1..=3 {
            for n in 1..=len as i64 {
                let a = v_explicit(&w, n, k).unwrap();
                let b = v_general(&w, n, k).unwrap();
                worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    let level = 1.3;
    let flat = LatticeWindow::new(vec![level; 60], RightClosure::Linear);
    let chis: Vec<f64> = (1..=4)
        .map(|j| v_general(&flat, 30, j).unwrap() / level.powi(j as i32))
        .collect();
    let chi_err = chis
        .iter()
        .zip([1.0, 3.0, 10.0, 35.0])
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    verdict(
        worst <= 1e-12 && chi_err <= 1e-12,
        format!("1000 windows, max rel diff {worst:.1e}; chi = {chis:.6?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict, Duration); 9] = [
        ("critical point regression", critical_point, Duration::from_secs(1)),
        ("gaussian exactness", gaussian_exactness, Duration::from_secs(5)),
        ("correctness triangle", correctness_triangle, Duration::from_secs(60)),
        ("conjecture probe", conjecture_probe, Duration::from_secs(300)),
        ("isospectrality", isospectrality, Duration::from_secs(60)),
        ("flow commutativity", commutativity, Duration::from_secs(120)),
        ("figure phenomenology", phenomenology, Duration::from_secs(300)),
        ("convergence", convergence, Duration::from_secs(300)),
        ("v-function coherence", v_coherence, Duration::from_secs(10)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = check();
        let elapsed = t0.elapsed();
        let ok = v.pass && elapsed <= *budget;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.2}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
