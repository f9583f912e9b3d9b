//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p nstorm-core --test acceptance`. Exits non-zero if
//! any criterion fails.

mod common;

use std::panic::{AssertUnwindSafe, catch_unwind};
use std::time::Instant;

use common::*;
use nstorm_core::estimators::{EstimatorConfig, Schedule};
use nstorm_core::harness::{
    RunnerOptions, SweepSpec, compare_methods, parse_config, run_single, run_sweep,
};
use nstorm_core::optimizers::{
    AdaNstormConfig, BaselineConfig, BeliefAux, Generator, GeneratorState, Method, NstormConfig,
    Optimizer, RunOptions, YInit, generator_update, run,
};
use nstorm_core::problems::ToyProblem;
use nstorm_core::{CompositionalOracle, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn opts() -> RunnerOptions {
    RunnerOptions::default()
}

fn schedule(m: f64) -> Schedule {
    Schedule::new(m, 1.0, 1.0).unwrap()
}

fn nstorm(gamma: f64, m: f64, radius: f64) -> Method {
    Method::Nstorm(NstormConfig {
        gamma,
        estimator: EstimatorConfig {
            schedule: schedule(m),
            jacobian_radius: radius,
            project_initial: false,
        },
        project_feasible: false,
    })
}

fn zero_noise_exactness() -> Outcome {
    let text = r#"
        iterations = 1000
        log_every = 1
        metrics = ["estimator_errors"]
        [problem]
        kind = "linquad"
        seed = 1
        noise = 0.0
        [method]
        kind = "nstorm"
        gamma = 0.1
    "#;
    let start = Instant::now();
    let out = run_single(&parse_config(text).unwrap(), opts()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let worst = ["err_u", "err_vprime", "err_vdprime", "err_w"]
        .iter()
        .map(|c| {
            let i = out.table.column(c).unwrap();
            out.table
                .rows
                .iter()
                .map(|r| r.values[i].unwrap())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    (
        worst <= 1e-9 && secs < 5.0 && out.table.rows.len() == 1000,
        format!(
            "worst relative estimator error {worst:.2e} over 1000 steps (limit 1e-9), {secs:.2}s (limit 5s)"
        ),
    )
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let errs = [
        ("toy", worst_gradient_error(&toy(0.0), &mut rng, 100)),
        (
            "linquad",
            worst_gradient_error(&linquad(0.0), &mut rng, 100),
        ),
        (
            "portfolio",
            worst_gradient_error(&portfolio(10), &mut rng, 100),
        ),
        (
            "policy_eval",
            worst_gradient_error(&policy(), &mut rng, 100),
        ),
        ("auc", worst_gradient_error(&auc(), &mut rng, 100)),
        (
            "linquad grad phi",
            worst_phi_gradient_error(&linquad(0.0), &mut rng, 100),
        ),
    ];
    let secs = start.elapsed().as_secs_f64();
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let detail: Vec<String> = errs.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    (
        worst <= 1e-5 && secs < 30.0,
        format!(
            "max relative error {} (limit 1e-5), {secs:.2}s (limit 30s)",
            detail.join(", ")
        ),
    )
}

/// Criteria 3 and 4 share one set of runs: final `‖∇Φ‖` at `T = 2·10⁵` and
/// the slope of the running average over `T ∈ [10³, 10⁵]`.
fn linquad_convergence() -> (Outcome, Outcome) {
    let lq = linquad(0.1);
    let method = nstorm(0.1, 8.0, 2.0 * lq.jacobian_frobenius());
    let t_max = 200_000u64;
    let grid: Vec<u64> = (0..=20)
        .map(|k| (1e3 * 10f64.powf(k as f64 / 10.0)).round() as u64)
        .collect();
    let start = Instant::now();
    let (mut finals, mut slopes) = (Vec::new(), Vec::new());
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut sum, mut last, mut points) = (0.0, 0.0, Vec::new());
        run(
            &lq,
            method,
            Vector::from_element(10, 1.0),
            &YInit::ExactYStar,
            RunOptions {
                iterations: t_max,
                record_every: t_max,
            },
            &mut rng,
            |o| {
                last = lq.grad_phi(o.x())?.norm();
                sum += last;
                let t = o.t();
                if grid.contains(&t) {
                    points.push(((t as f64).ln(), (sum / t as f64).ln()));
                }
                Ok(())
            },
        )
        .unwrap();
        finals.push(last);
        slopes.push(slope(&points));
    }
    let secs = start.elapsed().as_secs_f64();
    let med = median(&finals);
    let s = median(&slopes);
    (
        (
            med <= 0.05 && secs < 60.0,
            format!(
                "median final grad norm {med:.4} over 5 seeds (limit 0.05), {secs:.1}s for both criteria (limit 60s)"
            ),
        ),
        (
            s <= -0.25,
            format!(
                "median log-log slope of running-average grad norm {s:.3} (limit -0.25), per seed {slopes:.3?}"
            ),
        ),
    )
}

fn toy_trajectories() -> Outcome {
    let toy = ToyProblem::new(0.5, 0.5, 0.5).unwrap();
    let gamma = 0.025;
    let baseline = BaselineConfig {
        gamma,
        schedule: schedule(8.0),
        project_feasible: false,
    };
    let methods = [
        ("nstorm", nstorm(gamma, 8.0, 10.0)),
        ("scgda", Method::Scgda(baseline)),
        ("sgda", Method::Sgda(baseline)),
    ];
    let mut stats = Vec::new();
    for (name, method) in methods {
        let (mut path, mut dist) = (Vec::new(), Vec::new());
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let traj = run(
                &toy,
                method,
                Vector::from_element(1, 1.0),
                &YInit::Given { y: vec![0.0] },
                RunOptions {
                    iterations: 1000,
                    record_every: 1,
                },
                &mut rng,
                |_| Ok(()),
            )
            .unwrap();
            path.push(traj.path_length().unwrap());
            let p = traj.last().unwrap();
            dist.push(ToyProblem::distance_to_stationary(p.x[0], p.y[0]));
        }
        stats.push((name, median(&path), median(&dist)));
    }
    let (n, s, c) = (stats[0], stats[2], stats[1]);
    (
        n.1 < s.1 && n.2 <= s.2 && n.2 <= c.2,
        stats
            .iter()
            .map(|(m, p, d)| format!("{m}: median path {p:.2}, median distance {d:.4}"))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn estimator_mse_decay() -> Outcome {
    let toy = ToyProblem::new(0.5, 0.5, 0.5).unwrap();
    let (mut early, mut late) = (0.0, 0.0);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run(
            &toy,
            nstorm(0.025, 8.0, 10.0),
            Vector::from_element(1, 1.0),
            &YInit::Given { y: vec![0.0] },
            RunOptions {
                iterations: 5000,
                record_every: 5000,
            },
            &mut rng,
            |o| {
                let t = o.t();
                if t == 50 || t == 5000 {
                    let e = (o.estimates().u - toy.exact_inner(o.x())?.value).norm_squared();
                    if t == 50 { early += e } else { late += e }
                }
                Ok(())
            },
        )
        .unwrap();
    }
    let ratio = late / early;
    (
        ratio <= 0.2,
        format!(
            "mean squared inner error {:.2e} at t=50, {:.2e} at t=5000, ratio {ratio:.3} (limit 0.2)",
            early / 100.0,
            late / 100.0
        ),
    )
}

fn generator_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0usize;
    let updates = 10_000;
    for i in 0..updates {
        let rho = 10f64.powf(rng.random_range(-4.0..0.5));
        let tau = rng.random_range(0.01..=1.0);
        let low = rng.random_range(0.0..1.0);
        let high = low + rng.random_range(0.0..2.0);
        let generator = match i % 4 {
            0 => Generator::Adam,
            1 => Generator::AmsGrad,
            2 => Generator::AdaBelief,
            _ => Generator::AdaBound { low, high },
        };
        let mut state = GeneratorState::zeros(5, 4);
        for _ in 0..3 {
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let (v, w) = (gaussian(&mut rng, 5, scale), gaussian(&mut rng, 4, scale));
            let (ax, ay) = (gaussian(&mut rng, 5, scale), gaussian(&mut rng, 4, scale));
            let before = state.clone();
            let aux = BeliefAux { x: &ax, y: &ay };
            let (a, b) =
                generator_update(generator, &mut state, &v, &w, Some(aux), tau, rho).unwrap();
            let ok = a.iter().chain(b.iter()).all(|&d| d >= rho)
                && match generator {
                    Generator::AmsGrad => state
                        .a
                        .iter()
                        .chain(state.b.iter())
                        .zip(before.a.iter().chain(before.b.iter()))
                        .all(|(n, o)| n >= o),
                    Generator::AdaBound { .. } => state
                        .a
                        .iter()
                        .chain(state.b.iter())
                        .all(|&x| (low..=high).contains(&x)),
                    _ => true,
                };
            violations += usize::from(!ok);
        }
    }

    let lq = linquad(0.1);
    let trajectory = |method: Method| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut opt = Optimizer::new(
            &lq,
            method,
            Vector::from_element(10, 0.5),
            Vector::zeros(10),
            &mut rng,
        )
        .unwrap();
        (0..100)
            .map(|_| {
                opt.step(&mut rng).unwrap();
                (opt.x().clone(), opt.y().clone())
            })
            .collect::<Vec<_>>()
    };
    let reference = trajectory(nstorm(0.5, 8.0, 100.0));
    let mut gap: f64 = 0.0;
    for generator in [
        Generator::Adam,
        Generator::AmsGrad,
        Generator::AdaBelief,
        Generator::AdaBound {
            low: 0.0,
            high: 1.0,
        },
    ] {
        let ada = Method::AdaNstorm(AdaNstormConfig {
            gamma: 0.5,
            lambda: 1.0,
            tau: 1.0,
            rho: 1.0,
            generator,
            estimator: EstimatorConfig {
                schedule: schedule(8.0),
                jacobian_radius: 100.0,
                project_initial: false,
            },
            project_feasible: false,
        });
        for ((x, y), (rx, ry)) in trajectory(ada).iter().zip(&reference) {
            gap = gap.max((x - rx).amax()).max((y - ry).amax());
        }
    }
    (
        violations == 0 && gap <= 1e-12,
        format!(
            "{violations} invariant violations in {} randomized updates; identity ADA vs NSTORM max deviation {gap:.1e} over 100 steps (limit 1e-12)",
            3 * updates
        ),
    )
}

const SWEEP_BASE: &str = r#"
iterations = 20000
log_every = 20000
seeds = { base = 0, count = 5 }
metrics = ["grad_phi_norm"]
[problem]
kind = "linquad"
seed = 1
noise = 0.1
[method]
kind = "nstorm"
gamma = 0.1
m = 8
[init]
x = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]
"#;

fn ablation_shape() -> Outcome {
    let medians = |axis: &str| -> Vec<(String, f64)> {
        let spec = SweepSpec::parse(&format!("{SWEEP_BASE}[sweep]\n{axis}\n")).unwrap();
        run_sweep(&spec, opts())
            .unwrap()
            .points
            .iter()
            .map(|p| {
                (
                    p.labels[0].1.clone(),
                    p.output.summary.aggregate["grad_phi_norm"].median,
                )
            })
            .collect()
    };
    let m = medians("\"method.m\" = [50, 500, 5000]");
    let g = medians("\"method.gamma\" = [1.0, 0.9, 0.5]");
    let (lo, hi) = m.iter().fold((f64::INFINITY, 0.0f64), |(l, h), (_, v)| {
        (l.min(*v), h.max(*v))
    });
    let best = g.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let fmt = |v: &[(String, f64)]| {
        v.iter()
            .map(|(k, x)| format!("{k}:{x:.5}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    (
        hi / lo < 2.0 && best.0 != "1.0",
        format!(
            "m sweep {} (max/min {:.3}, limit 2); gamma sweep {} (best at gamma={})",
            fmt(&m),
            hi / lo,
            fmt(&g),
            best.0
        ),
    )
}

fn appendix_problems() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for problem in [
        "kind = \"portfolio\"\nassets = 10\nperiods = 500",
        "kind = \"policy_eval\"\nstates = 50\nfeatures = 10",
    ] {
        let cfgs: Vec<_> = ["nstorm", "ada_nstorm", "scgda"]
            .iter()
            .map(|m| {
                parse_config(&format!(
                    "name = \"{m}\"\niterations = 50000\nlog_every = 5000\nseeds = {{ base = 0, count = 5 }}\nmetrics = [\"objective_gap\"]\n[problem]\n{problem}\n[method]\nkind = \"{m}\"\ngamma = 0.5\n"
                ))
                .unwrap()
            })
            .collect();
        let cmp = compare_methods(&cfgs, opts()).unwrap();
        let norm = |i: usize| cmp.runs[i].summary.aggregate["gap_normalized"].median;
        let gap = &cmp.summary.winners["objective_gap"].values;
        let pass = norm(0) <= 0.1
            && norm(1) <= 0.1
            && gap["nstorm"] <= gap["scgda"]
            && cmp.summary.budget <= 100_000;
        ok &= pass;
        detail.push(format!(
            "{}: normalized gap nstorm {:.4}, ada_nstorm {:.4} (limit 0.1); final gap nstorm {:.3e} vs scgda {:.3e} at {} samples",
            cmp.runs[0].summary.problem,
            norm(0),
            norm(1),
            gap["nstorm"],
            gap["scgda"],
            cmp.summary.budget
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    (
        ok && secs < 300.0,
        format!("{}; {secs:.1}s (limit 300s)", detail.join("; ")),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        (false, format!("panicked: {msg}"))
    })
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "zero-noise exactness", guarded(zero_noise_exactness)));
    results.push((2, "oracle gradient checks", guarded(gradient_checks)));
    let (c3, c4) = catch_unwind(linquad_convergence).unwrap_or_else(|_| {
        let f = (false, "panicked".to_string());
        (f.clone(), f)
    });
    results.push((3, "convergence to stationarity", c3));
    results.push((4, "rate slope", c4));
    results.push((5, "toy trajectory comparison", guarded(toy_trajectories)));
    results.push((6, "estimator MSE decay", guarded(estimator_mse_decay)));
    results.push((7, "generator invariants", guarded(generator_invariants)));
    results.push((8, "ablation shape", guarded(ablation_shape)));
    results.push((
        9,
        "portfolio and policy evaluation",
        guarded(appendix_problems),
    ));

    let mut failed = 0;
    for (n, title, (pass, detail)) in &results {
        println!(
            "criterion {n:>2} {} {title}: {detail}",
            if *pass { "PASS" } else { "FAIL" }
        );
        failed += usize::from(!pass);
    }
    println!(
        "criterion 10 N/A  not reproducible at desk scale: deep-network AUC tables and curves on image benchmarks, \
         and portfolio results on the real return library; the linear AUC problem is covered only by the \
         gradient and determinism checks above"
    );
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
