//! Deterministic evaluation of `Φ` and a reference minimum `Φ*` for problems
//! that do not provide them in closed form.

use crate::oracle::CompositionalOracle;
use crate::{Result, Vector};

const ASCENT_STEPS: usize = 500;

/// The inner maximizer: exact when declared, else projected gradient
/// ascent on the exact outer gradient from the feasible center.
pub fn inner_maximizer<O: CompositionalOracle>(
    oracle: &O,
    u: &Vector,
    x: &Vector,
) -> Result<Vector> {
    if oracle.capabilities().has_y_star {
        return oracle.y_star(x);
    }
    let mut y = oracle.y_center();
    let dy = y.len();
    let h = 1e-4;
    let base = oracle.exact_outer(u, &y)?.grad_y;
    let moved = oracle
        .exact_outer(u, &(&y + Vector::from_element(dy, h / (dy as f64).sqrt())))?
        .grad_y;
    let lip = (moved - base).norm() / h;
    let step = if lip > 1e-12 { 1.0 / lip } else { 1.0 };
    for _ in 0..ASCENT_STEPS {
        let g = oracle.exact_outer(u, &y)?.grad_y;
        let next = oracle.project_y(&(&y + g * step));
        let done = (&next - &y).norm() <= 1e-15 * (1.0 + y.norm());
        y = next;
        if done {
            break;
        }
    }
    Ok(y)
}

/// `Φ(x)`, numerically when no closed form is declared.
pub fn phi_value<O: CompositionalOracle>(oracle: &O, x: &Vector) -> Result<f64> {
    if oracle.capabilities().has_phi {
        return oracle.phi(x);
    }
    let u = oracle.exact_inner(x)?.value;
    let y = inner_maximizer(oracle, &u, x)?;
    oracle.outer_value(&u, &y)
}

/// `∇Φ(x) = ∇g(x)ᵀ ∇_g f(g(x), y*(x))`, with a numerical maximizer when
/// needed.
pub fn phi_gradient<O: CompositionalOracle>(oracle: &O, x: &Vector) -> Result<Vector> {
    if oracle.capabilities().has_grad_phi {
        return oracle.grad_phi(x);
    }
    let inner = oracle.exact_inner(x)?;
    let y = inner_maximizer(oracle, &inner.value, x)?;
    Ok(inner
        .jacobian
        .tr_mul(&oracle.exact_outer(&inner.value, &y)?.grad_g))
}

/// Projected gradient descent on `Φ` with a backtracking step from `x0`.
/// Returns the best value found and its point.
pub fn reference_minimum<O: CompositionalOracle>(
    oracle: &O,
    x0: &Vector,
    max_iters: usize,
) -> Result<(f64, Vector)> {
    let mut x = oracle.project_x(x0);
    let mut fx = phi_value(oracle, &x)?;
    let mut step = 1.0;
    for _ in 0..max_iters {
        let g = phi_gradient(oracle, &x)?;
        let mut next = None;
        for _ in 0..60 {
            let cand = oracle.project_x(&(&x - &g * step));
            let d = &cand - &x;
            let fc = phi_value(oracle, &cand)?;
            if fc <= fx + g.dot(&d) + d.norm_squared() / (2.0 * step) {
                next = Some((cand, fc, d.norm()));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc, moved)) = next else { break };
        x = cand;
        fx = fc;
        step *= 2.0;
        if moved <= 1e-12 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok((fx, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dims;
    use crate::problems::{LinQuadProblem, NoiseScales, PortfolioProblem, synthetic_returns};

    #[test]
    fn finds_closed_form_minimum() {
        let lq = LinQuadProblem::random(Dims::new(4, 5, 3).unwrap(), 2, NoiseScales::uniform(0.0))
            .unwrap();
        let (v, _) = reference_minimum(&lq, &Vector::from_element(4, 3.0), 5000).unwrap();
        assert!(
            (v - lq.phi_star().unwrap()).abs() < 1e-9,
            "{v} vs {:?}",
            lq.phi_star()
        );
    }

    #[test]
    fn portfolio_dual_maximizer_is_uniform() {
        let p = PortfolioProblem::new(synthetic_returns(50, 4, 1), 0.5, 1e-12, 10).unwrap();
        let x = Vector::from_vec(vec![0.7, 0.1, 0.1, 0.1]);
        let u = p.exact_inner(&x).unwrap().value;
        let y = inner_maximizer(&p, &u, &x).unwrap();
        assert!((y - Vector::from_element(4, 0.25)).amax() < 1e-12);
    }

    #[test]
    fn portfolio_reference_beats_uniform() {
        let p = PortfolioProblem::new(synthetic_returns(100, 5, 3), 0.5, 1e-12, 10).unwrap();
        let x0 = Vector::from_element(5, 0.2);
        let (v, x) = reference_minimum(&p, &x0, 2000).unwrap();
        assert!(v < phi_value(&p, &x0).unwrap());
        assert!((x.sum() - 1.0).abs() < 1e-12 && x.iter().all(|&a| a >= 0.0));
    }
}
