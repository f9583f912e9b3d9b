//! Choice of the initial dual point `y_1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::oracle::CompositionalOracle;
use crate::{Error, Result, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum YInit {
    /// `y_1 = y*(x_1)`; needs the inner-maximizer capability.
    ExactYStar,
    Given {
        y: Vec<f64>,
    },
    /// Projected gradient ascent on `y ↦ f(g(x_1), y)` from the feasible
    /// center. Without a step size, `1/L` is estimated from a finite
    /// difference of `∇_y f`.
    InnerAscent {
        steps: usize,
        step_size: Option<f64>,
    },
}

impl YInit {
    /// Exact `y*` when the oracle provides it, else 100 ascent steps.
    pub fn default_for<O: CompositionalOracle>(oracle: &O) -> Self {
        if oracle.capabilities().has_y_star {
            YInit::ExactYStar
        } else {
            YInit::InnerAscent {
                steps: 100,
                step_size: None,
            }
        }
    }
}

/// Resolves `policy` at `x1`. The ascent uses exact oracles when declared,
/// otherwise fresh samples from `rng`.
pub fn initial_y<O, R>(oracle: &O, x1: &Vector, policy: &YInit, rng: &mut R) -> Result<Vector>
where
    O: CompositionalOracle,
    R: Rng + ?Sized,
{
    let dy = oracle.dims().dy;
    match policy {
        YInit::ExactYStar => {
            if !oracle.capabilities().has_y_star {
                return Err(Error::Config(
                    "y init `exact`: capability y_star missing".into(),
                ));
            }
            oracle.y_star(x1)
        }
        YInit::Given { y } => {
            if y.len() != dy {
                return Err(Error::Config(format!(
                    "initial y has length {}, expected {dy}",
                    y.len()
                )));
            }
            Ok(Vector::from_column_slice(y))
        }
        YInit::InnerAscent { steps, step_size } => {
            let caps = oracle.capabilities();
            let u = if caps.has_exact_inner {
                oracle.exact_inner(x1)?.value
            } else {
                oracle.eval_inner(x1, &oracle.draw_inner(rng))?.value
            };
            let grad_y = |y: &Vector, rng: &mut R| -> Result<Vector> {
                if caps.has_exact_outer {
                    Ok(oracle.exact_outer(&u, y)?.grad_y)
                } else {
                    Ok(oracle.eval_outer(&u, y, &oracle.draw_outer(rng))?.grad_y)
                }
            };
            let mut y = oracle.y_center();
            let step = match step_size {
                Some(s) if s.is_finite() && *s > 0.0 => *s,
                Some(s) => {
                    return Err(Error::Config(format!(
                        "ascent step must be positive, got {s}"
                    )));
                }
                None => {
                    let h = 1e-4;
                    let dir = Vector::from_element(dy, h / (dy as f64).sqrt());
                    let base = grad_y(&y, rng)?;
                    let moved = grad_y(&(&y + dir), rng)?;
                    let lip = (moved - base).norm() / h;
                    if lip > 1e-12 { 1.0 / lip } else { 1.0 }
                }
            };
            for _ in 0..*steps {
                let g = grad_y(&y, rng)?;
                y = oracle.project_y(&(&y + g * step));
            }
            Ok(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::linquad::LinQuadProblem;
    use crate::problems::noise::NoiseScales;
    use crate::problems::toy::ToyProblem;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_and_given() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            initial_y(&toy, &dvector![1.0], &YInit::ExactYStar, &mut rng).unwrap()[0],
            4.0
        );
        let given = YInit::Given { y: vec![0.5] };
        assert_eq!(
            initial_y(&toy, &dvector![1.0], &given, &mut rng).unwrap()[0],
            0.5
        );
        let wrong = YInit::Given { y: vec![0.5, 1.0] };
        assert!(initial_y(&toy, &dvector![1.0], &wrong, &mut rng).is_err());
    }

    #[test]
    fn ascent_reaches_maximizer_on_strongly_concave_problem() {
        let lq = LinQuadProblem::random(
            crate::Dims::new(3, 4, 2).unwrap(),
            5,
            NoiseScales::uniform(0.0),
        )
        .unwrap();
        let x = dvector![0.3, -0.2, 0.9];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let policy = YInit::InnerAscent {
            steps: 200,
            step_size: None,
        };
        let y = initial_y(&lq, &x, &policy, &mut rng).unwrap();
        assert!((y - lq.y_star(&x).unwrap()).norm() < 1e-8);
    }
}
