//! Distributionally robust policy evaluation with linear value functions.
//!
//! For an MDP with transition matrix `P`, rewards `R`, discount `r` and
//! fixed state features `z_s ∈ R^L`, the value estimate is `V_x(s) = z_sᵀx`.
//! The inner map stacks the temporal-difference residuals and `x` itself,
//!
//! ```text
//! g(x) = (δ_1(x), …, δ_S(x), x),   δ_s(x) = z_sᵀx − E_{s'}[R_{s,s'} + r z_{s'}ᵀx]
//! ```
//!
//! and the outer function is
//! `f(u, y) = (1/S) Σ_s y_s u_s² + Σ_l β u_{S+l}²/(1 + u_{S+l}²) − ‖y − 1/S‖²`
//! with `y` on the simplex. A token holds one sampled successor per state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::simplex::simplex_project;
use crate::oracle::{
    CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval, ensure_finite,
};
use crate::{Error, Matrix, Result, Vector};

/// Additive constant that keeps every transition probability positive.
pub const ERGODICITY_FLOOR: f64 = 1e-5;

/// One sampled successor state per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successors(pub Vec<usize>);

#[derive(Clone, Debug)]
pub struct PolicyEvalProblem {
    transitions: Matrix,
    rewards: Matrix,
    features: Matrix,
    discount: f64,
    beta_reg: f64,
    /// Row-wise cumulative transition probabilities for sampling.
    cumulative: Vec<Vec<f64>>,
    /// `E_{s'}[R_{s,s'}]` per state.
    expected_reward: Vector,
    /// `P z`, the expected successor features.
    expected_features: Matrix,
}

/// Random transition and reward matrices for `states` states. Transition
/// rows are uniform draws normalized to sum to one, shifted by
/// [`ERGODICITY_FLOOR`] and normalized again; rewards are uniform on `[0, 1]`.
pub fn generate_mdp(states: usize, seed: u64) -> Result<(Matrix, Matrix)> {
    if states < 2 {
        return Err(Error::Construction(format!(
            "MDP needs at least 2 states, got {states}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Matrix::from_fn(states, states, |_, _| rng.random::<f64>());
    let r = Matrix::from_fn(states, states, |_, _| rng.random::<f64>());
    for mut row in p.row_iter_mut() {
        let sum = row.sum();
        row /= sum;
        row.add_scalar_mut(ERGODICITY_FLOOR);
        let sum = row.sum();
        row /= sum;
    }
    Ok((p, r))
}

/// Standard Gaussian state features.
pub fn generate_features(states: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(states, dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

impl PolicyEvalProblem {
    pub fn new(
        transitions: Matrix,
        rewards: Matrix,
        features: Matrix,
        discount: f64,
        beta_reg: f64,
    ) -> Result<Self> {
        let s = transitions.nrows();
        if s < 2 || transitions.ncols() != s || rewards.shape() != (s, s) || features.nrows() != s {
            return Err(Error::Construction(
                "policy eval: inconsistent shapes".into(),
            ));
        }
        if features.ncols() == 0 {
            return Err(Error::Construction(
                "policy eval: empty feature dimension".into(),
            ));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Construction(format!(
                "discount must be in [0, 1), got {discount}"
            )));
        }
        if !(beta_reg.is_finite() && beta_reg >= 0.0) {
            return Err(Error::Construction(format!(
                "beta must be >= 0, got {beta_reg}"
            )));
        }
        for (i, row) in transitions.row_iter().enumerate() {
            if row.iter().any(|&p| !(p >= 0.0)) || (row.sum() - 1.0).abs() > 1e-12 {
                return Err(Error::Construction(format!(
                    "transition row {i} is not a probability distribution"
                )));
            }
        }
        let cumulative = transitions
            .row_iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        let expected_reward = transitions.component_mul(&rewards).column_sum();
        let expected_features = &transitions * &features;
        Ok(PolicyEvalProblem {
            transitions,
            rewards,
            features,
            discount,
            beta_reg,
            cumulative,
            expected_reward,
            expected_features,
        })
    }

    /// A generated instance: MDP from `seed`, features from `seed + 1`.
    pub fn generate(
        states: usize,
        feature_dim: usize,
        discount: f64,
        beta_reg: f64,
        seed: u64,
    ) -> Result<Self> {
        let (p, r) = generate_mdp(states, seed)?;
        let z = generate_features(states, feature_dim, seed.wrapping_add(1));
        Self::new(p, r, z, discount, beta_reg)
    }

    pub fn states(&self) -> usize {
        self.transitions.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn transitions(&self) -> &Matrix {
        &self.transitions
    }

    pub fn rewards(&self) -> &Matrix {
        &self.rewards
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    fn sample_successor<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let cdf = &self.cumulative[s];
        let u = rng.random::<f64>() * cdf[cdf.len() - 1];
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
    }

    fn y_star_from_u(&self, u: &Vector) -> Vector {
        let s = self.states() as f64;
        let target = Vector::from_fn(self.states(), |i, _| 1.0 / s + u[i] * u[i] / (2.0 * s));
        simplex_project(&target)
    }
}

impl CompositionalOracle for PolicyEvalProblem {
    type InnerSample = Successors;
    type OuterSample = ();

    fn dims(&self) -> Dims {
        let l = self.feature_dim();
        Dims {
            dx: l,
            dg: self.states() + l,
            dy: self.states(),
        }
    }

    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities::FULL
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> Successors {
        Successors(
            (0..self.states())
                .map(|s| self.sample_successor(s, rng))
                .collect(),
        )
    }

    fn draw_outer<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn outer_of(&self, _inner: &Successors) {}

    fn eval_inner(&self, x: &Vector, sample: &Successors) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        let (s_count, l) = (self.states(), self.feature_dim());
        let values = &self.features * x;
        let mut value = Vector::zeros(s_count + l);
        let mut jacobian = Matrix::zeros(s_count + l, l);
        for (s, &next) in sample.0.iter().enumerate() {
            value[s] = values[s] - (self.rewards[(s, next)] + self.discount * values[next]);
            for j in 0..l {
                jacobian[(s, j)] = self.features[(s, j)] - self.discount * self.features[(next, j)];
            }
        }
        for j in 0..l {
            value[s_count + j] = x[j];
            jacobian[(s_count + j, j)] = 1.0;
        }
        Ok(InnerEval { value, jacobian })
    }

    fn eval_outer(&self, u: &Vector, y: &Vector, _s: &()) -> Result<OuterEval> {
        self.exact_outer(u, y)
    }

    fn exact_inner(&self, x: &Vector) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        let (s_count, l) = (self.states(), self.feature_dim());
        let td_jacobian = &self.features - &self.expected_features * self.discount;
        let td = &td_jacobian * x - &self.expected_reward;
        let mut value = Vector::zeros(s_count + l);
        value.rows_mut(0, s_count).copy_from(&td);
        value.rows_mut(s_count, l).copy_from(x);
        let mut jacobian = Matrix::zeros(s_count + l, l);
        jacobian
            .view_mut((0, 0), (s_count, l))
            .copy_from(&td_jacobian);
        jacobian.view_mut((s_count, 0), (l, l)).fill_with_identity();
        Ok(InnerEval { value, jacobian })
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let s_count = self.states();
        let s = s_count as f64;
        let grad_g = Vector::from_fn(u.len(), |i, _| {
            if i < s_count {
                2.0 * y[i] * u[i] / s
            } else {
                let q = 1.0 + u[i] * u[i];
                2.0 * self.beta_reg * u[i] / (q * q)
            }
        });
        let grad_y = Vector::from_fn(s_count, |i, _| u[i] * u[i] / s - 2.0 * (y[i] - 1.0 / s));
        Ok(OuterEval { grad_g, grad_y })
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let s_count = self.states();
        let s = s_count as f64;
        let weighted: f64 = (0..s_count).map(|i| y[i] * u[i] * u[i]).sum::<f64>() / s;
        let reg: f64 = u
            .rows(s_count, u.len() - s_count)
            .iter()
            .map(|&v| self.beta_reg * v * v / (1.0 + v * v))
            .sum();
        let spread: f64 = y.iter().map(|&yi| (yi - 1.0 / s).powi(2)).sum();
        Ok(weighted + reg - spread)
    }

    /// `y*(x) = Π_simplex(1/S + δ(x)²/(2S))`: the outer function is a
    /// negative squared distance to that point plus terms constant in `y`.
    fn y_star(&self, x: &Vector) -> Result<Vector> {
        let u = self.exact_inner(x)?.value;
        Ok(self.y_star_from_u(&u))
    }

    fn phi(&self, x: &Vector) -> Result<f64> {
        let u = self.exact_inner(x)?.value;
        let y = self.y_star_from_u(&u);
        self.outer_value(&u, &y)
    }

    fn project_y(&self, y: &Vector) -> Vector {
        simplex_project(y)
    }
}
