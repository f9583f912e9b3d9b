mod common;

use common::*;
use nstorm_core::estimators::{EstimatorConfig, EstimatorState, Schedule};
use nstorm_core::optimizers::{
    AdaNstormConfig, BaselineConfig, Generator, GeneratorState, Method, NstormConfig, Optimizer,
    PlConfig, generator_update,
};
use nstorm_core::{CompositionalOracle, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn estimator(radius: f64) -> EstimatorConfig {
    EstimatorConfig {
        schedule: Schedule::new(8.0, 1.0, 1.0).unwrap(),
        jacobian_radius: radius,
        project_initial: false,
    }
}

fn nstorm(gamma: f64) -> Method {
    Method::Nstorm(NstormConfig {
        gamma,
        estimator: estimator(100.0),
        project_feasible: false,
    })
}

fn ada(gamma: f64, generator: Generator, tau: f64, rho: f64) -> Method {
    Method::AdaNstorm(AdaNstormConfig {
        gamma,
        lambda: 1.0,
        tau,
        rho,
        generator,
        estimator: estimator(100.0),
        project_feasible: false,
    })
}

const GENERATORS: [Generator; 4] = [
    Generator::Adam,
    Generator::AmsGrad,
    Generator::AdaBelief,
    Generator::AdaBound {
        low: 0.0,
        high: 1.0,
    },
];

fn all_methods() -> Vec<Method> {
    let baseline = BaselineConfig {
        gamma: 0.3,
        schedule: Schedule::new(8.0, 1.0, 1.0).unwrap(),
        project_feasible: false,
    };
    let mut methods = vec![
        nstorm(0.3),
        Method::NstormPl(PlConfig {
            gamma: 0.3,
            lambda: 0.5,
            estimator: estimator(100.0),
            project_feasible: false,
        }),
        Method::Scgda(baseline),
        Method::Sgda(baseline),
    ];
    methods.extend(GENERATORS.map(|g| ada(0.3, g, 0.9, 0.1)));
    methods
}

/// `(x, y)` after each of `steps` steps.
fn trajectory<O: CompositionalOracle>(
    oracle: &O,
    method: Method,
    seed: u64,
    steps: usize,
) -> Vec<(Vector, Vector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = oracle.dims();
    let mut opt = Optimizer::new(
        oracle,
        method,
        Vector::from_element(d.dx, 0.5),
        Vector::zeros(d.dy),
        &mut rng,
    )
    .unwrap();
    (0..steps)
        .map(|_| {
            opt.step(&mut rng).unwrap();
            (opt.x().clone(), opt.y().clone())
        })
        .collect()
}

#[test]
fn every_method_is_deterministic() {
    let lq = linquad(0.1);
    for method in all_methods() {
        assert_eq!(
            trajectory(&lq, method, 3, 200),
            trajectory(&lq, method, 3, 200),
            "{}",
            method.name()
        );
        assert_ne!(
            trajectory(&lq, method, 3, 20),
            trajectory(&lq, method, 4, 20),
            "{}",
            method.name()
        );
    }
}

#[test]
fn identity_matrices_reduce_ada_to_nstorm() {
    // τ = 1 freezes zero accumulators and ρ = 1 makes both diagonals all ones
    let lq = linquad(0.1);
    let reference = trajectory(&lq, nstorm(0.4), 9, 100);
    for g in GENERATORS {
        let got = trajectory(&lq, ada(0.4, g, 1.0, 1.0), 9, 100);
        for ((x, y), (rx, ry)) in got.iter().zip(&reference) {
            assert!(
                (x - rx).amax() <= 1e-12 && (y - ry).amax() <= 1e-12,
                "{}",
                g.name()
            );
        }
    }
}

#[test]
fn unit_lambda_reduces_pl_variant_to_nstorm_exactly() {
    let lq = linquad(0.1);
    let pl = Method::NstormPl(PlConfig {
        gamma: 0.4,
        lambda: 1.0,
        estimator: estimator(100.0),
        project_feasible: false,
    });
    assert_eq!(
        trajectory(&lq, pl, 2, 300),
        trajectory(&lq, nstorm(0.4), 2, 300)
    );
}

#[test]
fn primal_step_length_is_gamma_eta_v() {
    let lq = linquad(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gamma = 0.7;
    let mut opt = Optimizer::new(
        &lq,
        nstorm(gamma),
        Vector::zeros(10),
        Vector::zeros(10),
        &mut rng,
    )
    .unwrap();
    for _ in 0..500 {
        let (x, y, v, w, eta) = (
            opt.x().clone(),
            opt.y().clone(),
            opt.v().clone(),
            opt.w().clone(),
            opt.eta(),
        );
        opt.step(&mut rng).unwrap();
        let dx = (opt.x() - &x).norm();
        let dy = (opt.y() - &y).norm();
        assert!((dx - gamma * eta * v.norm()).abs() <= 1e-12 * (1.0 + dx));
        assert!((dy - eta * w.norm()).abs() <= 1e-12 * (1.0 + dy));
        assert!(dx / v.norm() <= dy / w.norm() * (1.0 + 1e-12));
    }
}

#[test]
fn noiseless_estimators_track_any_trajectory() {
    let lq = linquad(0.0);
    let cfg = estimator(2.0 * lq.jacobian_frobenius());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x = gaussian(&mut rng, 10, 1.0);
    let mut y = gaussian(&mut rng, 10, 1.0);
    let s = lq.draw_inner(&mut rng);
    let mut est = EstimatorState::init(&lq, &x, &y, &s, &cfg).unwrap();
    for _ in 0..1000 {
        x += gaussian(&mut rng, 10, 0.3);
        y += gaussian(&mut rng, 10, 0.3);
        let (s, o) = (lq.draw_inner(&mut rng), lq.draw_outer(&mut rng));
        est.advance(&lq, &x, &y, &s, &o, &cfg).unwrap();
        let inner = lq.exact_inner(&x).unwrap();
        let outer = lq.exact_outer(&inner.value, &y).unwrap();
        let rel = |e: f64, s: f64| e / s.max(1.0);
        assert!(rel((&est.u - &inner.value).norm(), inner.value.norm()) <= 1e-9);
        assert!(
            rel(
                (&est.v_prime - &inner.jacobian).norm(),
                inner.jacobian.norm()
            ) <= 1e-9
        );
        assert!(rel((&est.v_dprime - &outer.grad_g).norm(), outer.grad_g.norm()) <= 1e-9);
        assert!(rel((&est.w - &outer.grad_y).norm(), outer.grad_y.norm()) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_estimate_stays_in_ball(seed in any::<u64>(), radius in 0.05f64..5.0) {
        let lq = linquad(0.5);
        let cfg = estimator(radius);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = gaussian(&mut rng, 10, 1.0);
        let y = gaussian(&mut rng, 10, 1.0);
        let s = lq.draw_inner(&mut rng);
        let mut est = EstimatorState::init(&lq, &x, &y, &s, &cfg).unwrap();
        for _ in 0..50 {
            x += gaussian(&mut rng, 10, 0.5);
            let (s, o) = (lq.draw_inner(&mut rng), lq.draw_outer(&mut rng));
            est.advance(&lq, &x, &y, &s, &o, &cfg).unwrap();
            prop_assert!(est.v_prime.norm() <= radius * (1.0 + 1e-12));
        }
    }

    #[test]
    fn generator_invariants_hold(
        seed in any::<u64>(),
        tau in 0.01f64..=1.0,
        rho in 1e-4f64..2.0,
        low in 0.0f64..1.0,
        width in 0.0f64..3.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let high = low + width;
        for g in [Generator::Adam, Generator::AmsGrad, Generator::AdaBelief, Generator::AdaBound { low, high }] {
            let mut state = GeneratorState::zeros(4, 3);
            for _ in 0..20 {
                let previous = state.clone();
                let scale = 10f64.powf(rng.random_range(-3.0..3.0));
                let (v, w) = (gaussian(&mut rng, 4, scale), gaussian(&mut rng, 3, scale));
                let (ax, ay) = (gaussian(&mut rng, 4, scale), gaussian(&mut rng, 3, scale));
                let aux = nstorm_core::optimizers::BeliefAux { x: &ax, y: &ay };
                let (a, b) = generator_update(g, &mut state, &v, &w, Some(aux), tau, rho).unwrap();
                prop_assert!(a.iter().chain(b.iter()).all(|&d| d >= rho));
                match g {
                    Generator::AmsGrad => {
                        prop_assert!(state.a.iter().zip(previous.a.iter()).all(|(n, o)| n >= o));
                        prop_assert!(state.b.iter().zip(previous.b.iter()).all(|(n, o)| n >= o));
                    }
                    Generator::AdaBound { .. } => {
                        prop_assert!(state.a.iter().chain(state.b.iter()).all(|&x| (low..=high).contains(&x)));
                    }
                    _ => {}
                }
            }
        }
    }
}
