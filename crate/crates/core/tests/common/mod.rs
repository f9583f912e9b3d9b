#![allow(dead_code)]

use nstorm_core::problems::{
    LinQuadProblem, LinearAucProblem, NoiseScales, PolicyEvalProblem, PortfolioProblem, ToyProblem,
    make_imbalanced_gaussian, synthetic_returns,
};
use nstorm_core::{CompositionalOracle, Dims, Matrix, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub const FD_STEP: f64 = 1e-5;

/// `‖a − b‖ / max(‖a‖, ‖b‖, 1)`: relative for large values, absolute near zero.
pub fn rel_err(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

pub fn gaussian(rng: &mut impl Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Central difference gradient of a scalar function.
pub fn fd_gradient(f: impl Fn(&Vector) -> f64, x: &Vector) -> Vector {
    Vector::from_fn(x.len(), |j, _| {
        let mut up = x.clone();
        let mut down = x.clone();
        up[j] += FD_STEP;
        down[j] -= FD_STEP;
        (f(&up) - f(&down)) / (2.0 * FD_STEP)
    })
}

/// Central difference Jacobian (`outputs × inputs`) of a vector function.
pub fn fd_jacobian(f: impl Fn(&Vector) -> Vector, x: &Vector) -> Matrix {
    let m = f(x).len();
    let mut jac = Matrix::zeros(m, x.len());
    for j in 0..x.len() {
        let mut up = x.clone();
        let mut down = x.clone();
        up[j] += FD_STEP;
        down[j] -= FD_STEP;
        jac.set_column(j, &((f(&up) - f(&down)) / (2.0 * FD_STEP)));
    }
    jac
}

/// Worst relative error of the exact inner Jacobian and both exact outer
/// gradients against finite differences over `points` random points.
pub fn worst_gradient_error<O: CompositionalOracle>(
    oracle: &O,
    rng: &mut impl Rng,
    points: usize,
) -> f64 {
    let d = oracle.dims();
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x = oracle.project_x(&gaussian(rng, d.dx, 1.0));
        // a second inner value keeps u inside the range of g
        let u = oracle
            .exact_inner(&oracle.project_x(&gaussian(rng, d.dx, 1.0)))
            .unwrap()
            .value;
        let y = oracle.project_y(&gaussian(rng, d.dy, 1.0));
        let jac = oracle.exact_inner(&x).unwrap().jacobian;
        let fd = fd_jacobian(|x| oracle.exact_inner(x).unwrap().value, &x);
        worst = worst.max((&jac - &fd).norm() / jac.norm().max(fd.norm()).max(1.0));
        let outer = oracle.exact_outer(&u, &y).unwrap();
        worst = worst.max(rel_err(
            &outer.grad_g,
            &fd_gradient(|u| oracle.outer_value(u, &y).unwrap(), &u),
        ));
        worst = worst.max(rel_err(
            &outer.grad_y,
            &fd_gradient(|y| oracle.outer_value(&u, y).unwrap(), &y),
        ));
    }
    worst
}

/// Worst relative error of `∇Φ` against a finite difference of `Φ`.
pub fn worst_phi_gradient_error<O: CompositionalOracle>(
    oracle: &O,
    rng: &mut impl Rng,
    points: usize,
) -> f64 {
    let dx = oracle.dims().dx;
    (0..points)
        .map(|_| {
            let x = gaussian(rng, dx, 1.0);
            rel_err(
                &oracle.grad_phi(&x).unwrap(),
                &fd_gradient(|x| oracle.phi(x).unwrap(), &x),
            )
        })
        .fold(0.0, f64::max)
}

pub fn toy(sigma: f64) -> ToyProblem {
    ToyProblem::new(sigma, sigma, sigma).unwrap()
}

pub fn linquad(sigma: f64) -> LinQuadProblem {
    LinQuadProblem::random(
        Dims::new(10, 10, 10).unwrap(),
        1,
        NoiseScales::uniform(sigma),
    )
    .unwrap()
}

pub fn portfolio(batch: usize) -> PortfolioProblem {
    PortfolioProblem::new(synthetic_returns(500, 10, 0), 0.5, 1e-12, batch).unwrap()
}

pub fn policy() -> PolicyEvalProblem {
    PolicyEvalProblem::generate(50, 10, 0.9, 0.1, 0).unwrap()
}

pub fn auc() -> LinearAucProblem {
    let data = make_imbalanced_gaussian(400, 5, 0.2, 0).unwrap();
    let p = data.positive_fraction();
    LinearAucProblem::new(data, p, 0.1, 16, false).unwrap()
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
