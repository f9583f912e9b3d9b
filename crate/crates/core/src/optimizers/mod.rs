//! NSTORM, its PL-condition variant, ADA-NSTORM and two biased baselines.
//!
//! Every method is driven through [`Optimizer`]. Construction draws one
//! inner sample and initializes the estimates at `(x_1, y_1)`. Each
//! [`Optimizer::step`] then moves the iterates with the current estimates
//! and step size `η_t`, draws one inner and one outer sample, and refreshes
//! the estimates at the new point. After `T − 1` steps the optimizer has
//! visited `x_1, …, x_T` and drawn `2T − 1` samples.

mod config;
mod generators;
mod init;
mod run;

use rand::Rng;

pub use config::{AdaNstormConfig, BaselineConfig, Method, NstormConfig, PlConfig};
pub use generators::{BeliefAux, Generator, GeneratorState, generator_update};
pub use init::{YInit, initial_y};
pub use run::{RunOptions, Trajectory, TrajectoryPoint, path_length, run};

use crate::estimators::EstimatorState;
use crate::oracle::CompositionalOracle;
use crate::{Error, Matrix, Result, Vector};

/// `x' = x − γη v`, `y' = y + η w`.
pub fn nstorm_update(
    x: &Vector,
    y: &Vector,
    v: &Vector,
    w: &Vector,
    gamma: f64,
    eta: f64,
) -> (Vector, Vector) {
    (x - v * (gamma * eta), y + w * eta)
}

/// `x̃ = x − γv`, `x' = x + η(x̃ − x)`; `ỹ = y + w`, `y' = y + λη(ỹ − y)`.
pub fn pl_update(
    x: &Vector,
    y: &Vector,
    v: &Vector,
    w: &Vector,
    gamma: f64,
    lambda: f64,
    eta: f64,
) -> (Vector, Vector) {
    // expanded so that λ = 1 reproduces `nstorm_update` bit for bit
    (x - v * (gamma * eta), y + w * (lambda * eta))
}

/// `x̃ = x − γ A⁻¹v`, `ỹ = y + λ B⁻¹w`, then move a fraction `η` toward them.
#[allow(clippy::too_many_arguments)]
pub fn ada_update(
    x: &Vector,
    y: &Vector,
    v: &Vector,
    w: &Vector,
    a_diag: &Vector,
    b_diag: &Vector,
    gamma: f64,
    lambda: f64,
    eta: f64,
) -> (Vector, Vector) {
    let x_tilde = x - v.component_div(a_diag) * gamma;
    let y_tilde = y + w.component_div(b_diag) * lambda;
    (x + (x_tilde - x) * eta, y + (y_tilde - y) * eta)
}

/// Borrowed view of a method's current estimates of `g(x_t)`, `∇g(x_t)`,
/// `∇_g f` and `∇_y f`.
#[derive(Clone, Copy, Debug)]
pub struct Estimates<'a> {
    pub u: &'a Vector,
    pub jacobian: &'a Matrix,
    pub grad_g: &'a Vector,
    pub grad_y: &'a Vector,
}

/// Plain sampled estimates kept by the baselines.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineState {
    pub u: Vector,
    pub jacobian: Matrix,
    pub grad_g: Vector,
    pub grad_y: Vector,
}

#[derive(Clone, Debug, PartialEq)]
enum State {
    Storm(EstimatorState),
    Ada {
        est: EstimatorState,
        gen_state: GeneratorState,
        diagonals: Option<(Vector, Vector)>,
    },
    Baseline(BaselineState),
}

#[derive(Clone, Debug)]
pub struct Optimizer<'a, O: CompositionalOracle> {
    oracle: &'a O,
    method: Method,
    x: Vector,
    y: Vector,
    v: Vector,
    w: Vector,
    t: u64,
    state: State,
}

fn finite_or(v: &Vector, name: &'static str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(name))
    }
}

impl<'a, O: CompositionalOracle> Optimizer<'a, O> {
    /// Validates `method`, draws the first inner sample and initializes the
    /// estimates at `(x1, y1)`. `t` starts at 1.
    pub fn new<R: Rng + ?Sized>(
        oracle: &'a O,
        method: Method,
        x1: Vector,
        y1: Vector,
        rng: &mut R,
    ) -> Result<Self> {
        method.validate()?;
        let dims = oracle.dims();
        if x1.len() != dims.dx || y1.len() != dims.dy {
            return Err(Error::Config(format!(
                "initial point has dimensions ({}, {}), problem expects ({}, {})",
                x1.len(),
                y1.len(),
                dims.dx,
                dims.dy
            )));
        }
        let inner = oracle.draw_inner(rng);
        let (state, v, w) = match &method {
            Method::Nstorm(NstormConfig { estimator, .. })
            | Method::NstormPl(PlConfig { estimator, .. })
            | Method::AdaNstorm(AdaNstormConfig { estimator, .. }) => {
                let est = EstimatorState::init(oracle, &x1, &y1, &inner, estimator)?;
                let v = est.composite_gradient();
                let w = est.w.clone();
                let state = if matches!(method, Method::AdaNstorm(_)) {
                    State::Ada {
                        est,
                        gen_state: GeneratorState::zeros(dims.dx, dims.dy),
                        diagonals: None,
                    }
                } else {
                    State::Storm(est)
                };
                (state, v, w)
            }
            Method::Scgda(_) | Method::Sgda(_) => {
                let g = oracle.eval_inner(&x1, &inner)?;
                let f = oracle.eval_outer(&g.value, &y1, &oracle.outer_of(&inner))?;
                let v = g.jacobian.tr_mul(&f.grad_g);
                let w = f.grad_y.clone();
                let state = State::Baseline(BaselineState {
                    u: g.value,
                    jacobian: g.jacobian,
                    grad_g: f.grad_g,
                    grad_y: f.grad_y,
                });
                (state, v, w)
            }
        };
        finite_or(&v, "v")?;
        finite_or(&w, "w")?;
        Ok(Optimizer {
            oracle,
            method,
            x: x1,
            y: y1,
            v,
            w,
            t: 1,
            state,
        })
    }

    pub fn method(&self) -> &Method {
        &self.method
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn y(&self) -> &Vector {
        &self.y
    }

    /// Composite gradient estimate at the current point.
    pub fn v(&self) -> &Vector {
        &self.v
    }

    /// `∇_y f` estimate at the current point.
    pub fn w(&self) -> &Vector {
        &self.w
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Step size used by the next update.
    pub fn eta(&self) -> f64 {
        self.method.schedule().eta(self.t)
    }

    pub fn estimates(&self) -> Estimates<'_> {
        match &self.state {
            State::Storm(e) | State::Ada { est: e, .. } => Estimates {
                u: &e.u,
                jacobian: &e.v_prime,
                grad_g: &e.v_dprime,
                grad_y: &e.w,
            },
            State::Baseline(b) => Estimates {
                u: &b.u,
                jacobian: &b.jacobian,
                grad_g: &b.grad_g,
                grad_y: &b.grad_y,
            },
        }
    }

    pub fn estimator_state(&self) -> Option<&EstimatorState> {
        match &self.state {
            State::Storm(e) | State::Ada { est: e, .. } => Some(e),
            State::Baseline(_) => None,
        }
    }

    pub fn generator_state(&self) -> Option<&GeneratorState> {
        match &self.state {
            State::Ada { gen_state, .. } => Some(gen_state),
            _ => None,
        }
    }

    /// Adaptive diagonals `(A, B)` used by the most recent ADA-NSTORM step.
    pub fn diagonals(&self) -> Option<(&Vector, &Vector)> {
        match &self.state {
            State::Ada {
                diagonals: Some((a, b)),
                ..
            } => Some((a, b)),
            _ => None,
        }
    }

    /// One iteration: update the iterates, then refresh the estimates there.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let eta = self.eta();
        let (x, y) = match (&self.method, &mut self.state) {
            (Method::Nstorm(c), _) => {
                nstorm_update(&self.x, &self.y, &self.v, &self.w, c.gamma, eta)
            }
            (Method::Scgda(c) | Method::Sgda(c), _) => {
                nstorm_update(&self.x, &self.y, &self.v, &self.w, c.gamma, eta)
            }
            (Method::NstormPl(c), _) => {
                pl_update(&self.x, &self.y, &self.v, &self.w, c.gamma, c.lambda, eta)
            }
            (
                Method::AdaNstorm(c),
                State::Ada {
                    est,
                    gen_state,
                    diagonals,
                },
            ) => {
                let aux_x;
                let aux = if matches!(c.generator, Generator::AdaBelief) {
                    aux_x = est.v_prime.tr_mul(&est.raw_grad_g);
                    Some(BeliefAux {
                        x: &aux_x,
                        y: &est.raw_grad_y,
                    })
                } else {
                    None
                };
                let (a, b) =
                    generator_update(c.generator, gen_state, &self.v, &self.w, aux, c.tau, c.rho)?;
                let next = ada_update(
                    &self.x, &self.y, &self.v, &self.w, &a, &b, c.gamma, c.lambda, eta,
                );
                *diagonals = Some((a, b));
                next
            }
            (Method::AdaNstorm(_), _) => unreachable!("ada_nstorm always carries generator state"),
        };
        let (x, y) = if self.method.project_feasible() {
            (self.oracle.project_x(&x), self.oracle.project_y(&y))
        } else {
            (x, y)
        };
        finite_or(&x, "x")?;
        finite_or(&y, "y")?;

        let inner = self.oracle.draw_inner(rng);
        let outer = self.oracle.draw_outer(rng);
        match (&self.method, &mut self.state) {
            (
                Method::Nstorm(NstormConfig { estimator, .. })
                | Method::NstormPl(PlConfig { estimator, .. })
                | Method::AdaNstorm(AdaNstormConfig { estimator, .. }),
                State::Storm(est) | State::Ada { est, .. },
            ) => {
                self.v = est.advance(self.oracle, &x, &y, &inner, &outer, estimator)?;
                self.w = est.w.clone();
            }
            (Method::Scgda(c) | Method::Sgda(c), State::Baseline(b)) => {
                let g = self.oracle.eval_inner(&x, &inner)?;
                b.u = if matches!(self.method, Method::Scgda(_)) {
                    let beta = c.schedule.beta(self.t + 1);
                    &b.u * (1.0 - beta) + g.value * beta
                } else {
                    g.value
                };
                finite_or(&b.u, "u")?;
                let f = self.oracle.eval_outer(&b.u, &y, &outer)?;
                b.jacobian = g.jacobian;
                b.grad_g = f.grad_g;
                b.grad_y = f.grad_y;
                self.v = b.jacobian.tr_mul(&b.grad_g);
                self.w = b.grad_y.clone();
                finite_or(&self.v, "v")?;
                finite_or(&self.w, "w")?;
            }
            _ => unreachable!("method and state always agree"),
        }
        self.x = x;
        self.y = y;
        self.t += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{EstimatorConfig, Schedule};
    use crate::problems::toy::ToyProblem;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn est_cfg() -> EstimatorConfig {
        EstimatorConfig {
            schedule: Schedule::new(8.0, 1.0, 1.0).unwrap(),
            jacobian_radius: 100.0,
            project_initial: false,
        }
    }

    fn nstorm(gamma: f64) -> Method {
        Method::Nstorm(NstormConfig {
            gamma,
            estimator: est_cfg(),
            project_feasible: false,
        })
    }

    #[test]
    fn update_arithmetic() {
        let (x, y) = nstorm_update(
            &dvector![1.0],
            &dvector![0.0],
            &dvector![2.0],
            &dvector![0.0],
            1.0,
            0.5,
        );
        assert_eq!((x[0], y[0]), (0.0, 0.0));
        let z = dvector![0.0];
        let (x, y) = nstorm_update(&dvector![3.0], &dvector![4.0], &z, &z, 0.7, 0.3);
        assert_eq!((x[0], y[0]), (3.0, 4.0));
    }

    #[test]
    fn pl_update_cases() {
        let (x, y) = pl_update(
            &dvector![0.0],
            &dvector![0.0],
            &dvector![1.0],
            &dvector![1.0],
            1.0,
            2.0,
            0.5,
        );
        assert_eq!(y[0], 1.0);
        assert_eq!(x[0], -0.5);
        let (_, y) = pl_update(
            &dvector![0.0],
            &dvector![0.3],
            &dvector![1.0],
            &dvector![0.0],
            1.0,
            2.0,
            0.5,
        );
        assert_eq!(y[0], 0.3);
    }

    #[test]
    fn ada_update_endpoint() {
        let (x, y) = (dvector![1.0, 2.0], dvector![0.5]);
        let (v, w) = (dvector![0.4, -0.2], dvector![1.0]);
        let (a, b) = (dvector![2.0, 4.0], dvector![0.5]);
        let (nx, ny) = ada_update(&x, &y, &v, &w, &a, &b, 0.5, 0.25, 1.0);
        assert_eq!(nx, dvector![1.0 - 0.5 * 0.2, 2.0 + 0.5 * 0.05]);
        assert_eq!(ny, dvector![0.5 + 0.25 * 2.0]);
    }

    #[test]
    fn stationary_toy_start_is_frozen() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut opt =
            Optimizer::new(&toy, nstorm(0.5), dvector![0.5], dvector![2.0], &mut rng).unwrap();
        assert_eq!(opt.v()[0], 0.0);
        assert_eq!(opt.w()[0], 0.0);
        for _ in 0..10 {
            opt.step(&mut rng).unwrap();
        }
        assert_eq!(opt.x()[0], 0.5);
        assert_eq!(opt.y()[0], 2.0);
        assert_eq!(opt.t(), 11);
    }

    #[test]
    fn noiseless_baselines_match_nstorm_direction() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let base = BaselineConfig {
            gamma: 0.5,
            schedule: est_cfg().schedule,
            project_feasible: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Optimizer::new(&toy, nstorm(0.5), dvector![1.0], dvector![0.0], &mut rng).unwrap();
        let b = Optimizer::new(
            &toy,
            Method::Sgda(base),
            dvector![1.0],
            dvector![0.0],
            &mut rng,
        )
        .unwrap();
        let c = Optimizer::new(
            &toy,
            Method::Scgda(base),
            dvector![1.0],
            dvector![0.0],
            &mut rng,
        )
        .unwrap();
        assert_eq!(a.v(), b.v());
        assert_eq!(a.v(), c.v());
        assert_eq!(a.v()[0], -16.0);
    }

    #[test]
    fn wrong_dimensions_rejected() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = Optimizer::new(
            &toy,
            nstorm(0.5),
            dvector![1.0, 2.0],
            dvector![0.0],
            &mut rng,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn divergence_reported_as_numerical_failure() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // γ = 1 makes the toy dynamics expand by roughly 1 + 15η per step
        let mut opt =
            Optimizer::new(&toy, nstorm(1.0), dvector![1e300], dvector![0.0], &mut rng).unwrap();
        let err = (0..50).find_map(|_| opt.step(&mut rng).err());
        assert!(matches!(err, Some(Error::NumericalFailure(_))));
    }
}
