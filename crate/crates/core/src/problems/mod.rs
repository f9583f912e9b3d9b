//! Benchmark problems realizing [`CompositionalOracle`](crate::CompositionalOracle).

pub mod auc;
pub mod instance;
pub mod linquad;
pub(crate) mod noise;
pub mod policy;
pub mod portfolio;
pub mod simplex;
pub mod toy;

pub use auc::{Dataset, LinearAucProblem, make_imbalanced_gaussian};
pub use instance::Instance;
pub use linquad::LinQuadProblem;
pub use noise::{GaussianInnerSample, GaussianOuterSample, NoiseScales};
pub use policy::{PolicyEvalProblem, generate_features, generate_mdp};
pub use portfolio::{PortfolioProblem, load_returns_csv, parse_returns_csv, synthetic_returns};
pub use simplex::simplex_project;
pub use toy::ToyProblem;
