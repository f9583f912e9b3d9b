//! Building problem instances from their specifications.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{InstanceSource, ProblemSpec, ReturnsSource, XInit};
use crate::oracle::CompositionalOracle;
use crate::problems::{
    Instance, LinQuadProblem, LinearAucProblem, PolicyEvalProblem, PortfolioProblem, ToyProblem,
    generate_features, generate_mdp, load_returns_csv, make_imbalanced_gaussian, synthetic_returns,
};
use crate::{Dims, Error, Result, Vector};

#[derive(Clone, Debug)]
pub enum ProblemInstance {
    Toy(ToyProblem),
    LinQuad(LinQuadProblem),
    Portfolio(PortfolioProblem),
    PolicyEval(PolicyEvalProblem),
    Auc(LinearAucProblem),
}

/// Evaluates `$body` with `$o` bound to the concrete oracle.
macro_rules! with_oracle {
    ($inst:expr, $o:ident => $body:expr) => {
        match $inst {
            $crate::harness::problem::ProblemInstance::Toy($o) => $body,
            $crate::harness::problem::ProblemInstance::LinQuad($o) => $body,
            $crate::harness::problem::ProblemInstance::Portfolio($o) => $body,
            $crate::harness::problem::ProblemInstance::PolicyEval($o) => $body,
            $crate::harness::problem::ProblemInstance::Auc($o) => $body,
        }
    };
}
pub(crate) use with_oracle;

impl ProblemSpec {
    pub fn build(&self) -> Result<ProblemInstance> {
        Ok(match self {
            ProblemSpec::Toy { noise } => ProblemInstance::Toy(ToyProblem::new(
                noise.value,
                noise.jacobian,
                noise.gradient,
            )?),
            ProblemSpec::LinQuad {
                dx,
                dg,
                dy,
                seed,
                noise,
            } => ProblemInstance::LinQuad(LinQuadProblem::random(
                Dims::new(*dx, *dg, *dy)?,
                *seed,
                *noise,
            )?),
            ProblemSpec::Portfolio {
                returns,
                lambda_risk,
                sqrt_floor,
                batch,
            } => {
                let r = match returns {
                    ReturnsSource::Csv(path) => load_returns_csv(path)?,
                    ReturnsSource::Synthetic {
                        periods,
                        assets,
                        seed,
                    } => synthetic_returns(*periods, *assets, *seed),
                };
                ProblemInstance::Portfolio(PortfolioProblem::new(
                    r,
                    *lambda_risk,
                    *sqrt_floor,
                    *batch,
                )?)
            }
            ProblemSpec::PolicyEval {
                source,
                discount,
                beta_reg,
            } => {
                let (p, r, z) = match source {
                    InstanceSource::Generated(g) => {
                        let (p, r) = generate_mdp(g.states, g.seed)?;
                        (
                            p,
                            r,
                            generate_features(g.states, g.features, g.seed.wrapping_add(1)),
                        )
                    }
                    InstanceSource::File(path) => match Instance::load(path)? {
                        Instance::Mdp {
                            transitions,
                            rewards,
                            features,
                            ..
                        } => (transitions, rewards, features),
                        Instance::Auc { .. } => {
                            return Err(Error::Construction(format!(
                                "{} holds an AUC data set, not an MDP",
                                path.display()
                            )));
                        }
                    },
                };
                ProblemInstance::PolicyEval(PolicyEvalProblem::new(p, r, z, *discount, *beta_reg)?)
            }
            ProblemSpec::Auc {
                source,
                alpha,
                batch,
                second_order,
            } => {
                let data = match source {
                    InstanceSource::Generated(g) => {
                        make_imbalanced_gaussian(g.samples, g.dim, g.imratio, g.seed)?
                    }
                    InstanceSource::File(path) => match Instance::load(path)? {
                        Instance::Auc { data, .. } => data,
                        Instance::Mdp { .. } => {
                            return Err(Error::Construction(format!(
                                "{} holds an MDP, not an AUC data set",
                                path.display()
                            )));
                        }
                    },
                };
                let p = data.positive_fraction();
                ProblemInstance::Auc(LinearAucProblem::new(
                    data,
                    p,
                    *alpha,
                    *batch,
                    *second_order,
                )?)
            }
        })
    }
}

impl ProblemInstance {
    pub fn dims(&self) -> Dims {
        with_oracle!(self, o => o.dims())
    }

    /// Resolves the initial primal point.
    pub fn initial_x(&self, init: &XInit) -> Result<Vector> {
        let dx = self.dims().dx;
        let x = match init {
            XInit::Origin => Vector::zeros(dx),
            XInit::Gaussian { scale, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Vector::from_fn(dx, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                })
            }
            XInit::Given(v) => {
                if v.len() != dx {
                    return Err(Error::Config(format!(
                        "init.x has length {}, problem expects {dx}",
                        v.len()
                    )));
                }
                Vector::from_column_slice(v)
            }
        };
        Ok(with_oracle!(self, o => o.project_x(&x)))
    }
}
