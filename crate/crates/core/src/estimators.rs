//! Nested recursive-momentum estimators.
//!
//! Four STORM estimators track, respectively, the inner value `g(x_t)`, the
//! inner Jacobian `∇g(x_t)` (kept inside a Frobenius ball of radius `C_g`),
//! the outer gradient `∇_g f(u_t, y_t)` and the outer gradient
//! `∇_y f(u_t, y_t)`. Each one is updated as
//!
//! ```text
//! e_t = h(z_t; s_t) + (1 - mix_t) (e_{t-1} - h(z_{t-1}; s_t))
//! ```
//!
//! with a single sample `s_t` evaluated at the current and previous points.

use nalgebra::allocator::Allocator;
use nalgebra::{DefaultAllocator, Dim, OMatrix};
use serde::{Deserialize, Serialize};

use crate::oracle::CompositionalOracle;
use crate::{Error, Matrix, Result, Vector};

/// Step-size and mixing schedules `η_t = (m + t)^(-1/3)`,
/// `β_t = c1 η_{t-1}²`, `α_t = c2 η_{t-1}²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    m: f64,
    c1: f64,
    c2: f64,
}

impl Schedule {
    pub fn new(m: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(m.is_finite() && c1.is_finite() && c2.is_finite())
            || m <= 0.0
            || c1 <= 0.0
            || c2 <= 0.0
        {
            return Err(Error::Config(format!(
                "schedule constants must be positive and finite (m={m}, c1={c1}, c2={c2})"
            )));
        }
        if m <= c1.powi(3).max(c2.powi(3)) {
            return Err(Error::Config(format!(
                "schedule requires m > max(c1^3, c2^3), got m={m}, c1={c1}, c2={c2}"
            )));
        }
        let s = Schedule { m, c1, c2 };
        // Mixing weights decrease in t, so checking t = 1 covers every step.
        if s.beta(1) >= 1.0 || s.alpha(1) >= 1.0 {
            return Err(Error::Config(format!(
                "mixing weights must lie in (0, 1): beta_1={}, alpha_1={}",
                s.beta(1),
                s.alpha(1)
            )));
        }
        Ok(s)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `η_t`; `η_0 = m^(-1/3)`.
    pub fn eta(&self, t: u64) -> f64 {
        (self.m + t as f64).powf(-1.0 / 3.0)
    }

    /// Inner mixing weight for step `t ≥ 1`.
    pub fn beta(&self, t: u64) -> f64 {
        debug_assert!(t >= 1, "beta is defined for t >= 1");
        let e = self.eta(t.saturating_sub(1));
        self.c1 * e * e
    }

    /// Outer mixing weight for step `t ≥ 1`.
    pub fn alpha(&self, t: u64) -> f64 {
        debug_assert!(t >= 1, "alpha is defined for t >= 1");
        let e = self.eta(t.saturating_sub(1));
        self.c2 * e * e
    }
}

/// One recursive-momentum update: `h_curr + (1 - mix)(prev - h_prev)`.
///
/// This equals `(1 - mix) prev + mix h_curr + (1 - mix)(h_curr - h_prev)`.
///
/// # Panics
///
/// Panics when the shapes disagree or `mix` is outside `(0, 1]`.
pub fn storm_update<R: Dim, C: Dim>(
    prev: &OMatrix<f64, R, C>,
    h_curr: &OMatrix<f64, R, C>,
    h_prev: &OMatrix<f64, R, C>,
    mix: f64,
) -> OMatrix<f64, R, C>
where
    DefaultAllocator: Allocator<R, C>,
{
    assert_eq!(prev.shape(), h_curr.shape(), "storm_update: shape mismatch");
    assert_eq!(prev.shape(), h_prev.shape(), "storm_update: shape mismatch");
    assert!(
        mix > 0.0 && mix <= 1.0,
        "storm_update: mix {mix} outside (0, 1]"
    );
    let mut out = prev - h_prev;
    out *= 1.0 - mix;
    out += h_curr;
    out
}

/// Euclidean projection onto the Frobenius ball of the given radius.
pub fn ball_project<R: Dim, C: Dim>(m: OMatrix<f64, R, C>, radius: f64) -> OMatrix<f64, R, C>
where
    DefaultAllocator: Allocator<R, C>,
{
    assert!(radius > 0.0, "ball_project: radius must be positive");
    let norm = m.norm();
    if norm <= radius {
        m
    } else {
        m * (radius / norm)
    }
}

/// Settings shared by everything that advances an [`EstimatorState`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub schedule: Schedule,
    /// Radius `C_g` of the Jacobian-estimate ball.
    pub jacobian_radius: f64,
    /// Project `v'` at initialization too. Off by default.
    pub project_initial: bool,
}

/// The four STORM estimators plus the lagged points they need.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorState {
    pub u: Vector,
    pub v_prime: Matrix,
    pub v_dprime: Vector,
    pub w: Vector,
    pub prev_x: Vector,
    pub prev_u: Vector,
    pub prev_y: Vector,
    /// Raw sampled `∇_g f(u_t, y_t; ζ_t)` at the current point.
    pub raw_grad_g: Vector,
    /// Raw sampled `∇_y f(u_t, y_t; ζ_t)` at the current point.
    pub raw_grad_y: Vector,
    pub t: u64,
}

fn check(v: &Vector, name: &'static str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(name))
    }
}

fn check_mat(m: &Matrix, name: &'static str) -> Result<()> {
    if m.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(name))
    }
}

impl EstimatorState {
    /// All estimators from one sample at `(x1, y1)`; `t = 1`.
    pub fn init<O: CompositionalOracle>(
        oracle: &O,
        x1: &Vector,
        y1: &Vector,
        inner: &O::InnerSample,
        cfg: &EstimatorConfig,
    ) -> Result<Self> {
        let g = oracle.eval_inner(x1, inner)?;
        let outer = oracle.eval_outer(&g.value, y1, &oracle.outer_of(inner))?;
        let v_prime = if cfg.project_initial {
            ball_project(g.jacobian, cfg.jacobian_radius)
        } else {
            g.jacobian
        };
        let state = EstimatorState {
            u: g.value.clone(),
            v_prime,
            v_dprime: outer.grad_g.clone(),
            w: outer.grad_y.clone(),
            prev_x: x1.clone(),
            prev_u: g.value,
            prev_y: y1.clone(),
            raw_grad_g: outer.grad_g,
            raw_grad_y: outer.grad_y,
            t: 1,
        };
        state.check_all()?;
        Ok(state)
    }

    fn check_all(&self) -> Result<()> {
        check(&self.u, "u")?;
        check_mat(&self.v_prime, "v_prime")?;
        check(&self.v_dprime, "v_dprime")?;
        check(&self.w, "w")
    }

    /// Moves every estimator to the current iterates `(x, y)` using one
    /// inner and one outer sample, and returns the composite gradient
    /// estimate `v = v'ᵀ v''`.
    pub fn advance<O: CompositionalOracle>(
        &mut self,
        oracle: &O,
        x: &Vector,
        y: &Vector,
        inner: &O::InnerSample,
        outer: &O::OuterSample,
        cfg: &EstimatorConfig,
    ) -> Result<Vector> {
        let t = self.t + 1;
        let beta = cfg.schedule.beta(t);
        let alpha = cfg.schedule.alpha(t);

        let g_curr = oracle.eval_inner(x, inner)?;
        let g_prev = oracle.eval_inner(&self.prev_x, inner)?;

        let u = storm_update(&self.u, &g_curr.value, &g_prev.value, beta);
        check(&u, "u")?;
        let v_prime = ball_project(
            storm_update(&self.v_prime, &g_curr.jacobian, &g_prev.jacobian, beta),
            cfg.jacobian_radius,
        );
        check_mat(&v_prime, "v_prime")?;

        let f_curr = oracle.eval_outer(&u, y, outer)?;
        let f_prev = oracle.eval_outer(&self.prev_u, &self.prev_y, outer)?;
        let v_dprime = storm_update(&self.v_dprime, &f_curr.grad_g, &f_prev.grad_g, beta);
        check(&v_dprime, "v_dprime")?;
        let w = storm_update(&self.w, &f_curr.grad_y, &f_prev.grad_y, alpha);
        check(&w, "w")?;

        self.prev_x.copy_from(x);
        self.prev_u.copy_from(&u);
        self.prev_y.copy_from(y);
        self.u = u;
        self.v_prime = v_prime;
        self.v_dprime = v_dprime;
        self.w = w;
        self.raw_grad_g = f_curr.grad_g;
        self.raw_grad_y = f_curr.grad_y;
        self.t = t;
        Ok(self.composite_gradient())
    }

    /// `v = v'ᵀ v''`, the estimate of `∇_x f(g(x_t), y_t)`.
    pub fn composite_gradient(&self) -> Vector {
        self.v_prime.tr_mul(&self.v_dprime)
    }
}
