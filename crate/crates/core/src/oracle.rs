//! The compositional minimax problem abstraction.
//!
//! A problem exposes stochastic evaluations of the inner map `g(x; ξ)` with
//! its Jacobian and of the outer partial gradients `∇_g f(u, y; ζ)`,
//! `∇_y f(u, y; ζ)`. Samples are drawn as tokens that carry all of their
//! randomness, so the same realization can be evaluated at two different
//! points, which is what the recursive-momentum estimators need.

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::Serialize;

use crate::{Error, Matrix, Result, Vector};

/// Dimensions of `x`, `g(x)` and `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub dx: usize,
    pub dg: usize,
    pub dy: usize,
}

impl Dims {
    pub fn new(dx: usize, dg: usize, dy: usize) -> Result<Self> {
        if dx == 0 || dg == 0 || dy == 0 {
            return Err(Error::Construction(format!(
                "dimensions must be positive, got dx={dx} dg={dg} dy={dy}"
            )));
        }
        Ok(Dims { dx, dg, dy })
    }
}

/// Which exact (noise-free) queries a problem can answer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleCapabilities {
    pub has_exact_inner: bool,
    pub has_exact_outer: bool,
    pub has_y_star: bool,
    pub has_phi: bool,
    pub has_grad_phi: bool,
}

impl OracleCapabilities {
    /// Every exact query is available.
    pub const FULL: OracleCapabilities = OracleCapabilities {
        has_exact_inner: true,
        has_exact_outer: true,
        has_y_star: true,
        has_phi: true,
        has_grad_phi: true,
    };

    /// `∇Φ` needs the inner maximizer, so `has_grad_phi` implies `has_y_star`.
    pub fn is_consistent(&self) -> bool {
        !self.has_grad_phi || self.has_y_star
    }
}

/// Value and Jacobian (`dg × dx`) of the inner map.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerEval {
    pub value: Vector,
    pub jacobian: Matrix,
}

/// Partial gradients of the outer function.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterEval {
    pub grad_g: Vector,
    pub grad_y: Vector,
}

/// A two-level stochastic minimax problem `min_x max_y f(g(x), y)`.
///
/// Implementations must be deterministic given a token: evaluating the same
/// token at the same point twice yields bit-identical results.
pub trait CompositionalOracle: Send + Sync {
    type InnerSample: Clone + Debug + Send;
    type OuterSample: Clone + Debug + Send;

    fn dims(&self) -> Dims;

    fn capabilities(&self) -> OracleCapabilities;

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::InnerSample;

    fn draw_outer<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::OuterSample;

    /// The outer realization carried by an inner draw. The first iteration
    /// evaluates every estimator from a single sample.
    fn outer_of(&self, inner: &Self::InnerSample) -> Self::OuterSample;

    fn eval_inner(&self, x: &Vector, sample: &Self::InnerSample) -> Result<InnerEval>;

    fn eval_outer(&self, u: &Vector, y: &Vector, sample: &Self::OuterSample) -> Result<OuterEval>;

    fn exact_inner(&self, _x: &Vector) -> Result<InnerEval> {
        Err(Error::Unsupported("exact inner map"))
    }

    fn exact_outer(&self, _u: &Vector, _y: &Vector) -> Result<OuterEval> {
        Err(Error::Unsupported("exact outer gradients"))
    }

    /// Exact outer function value `f(u, y)`.
    fn outer_value(&self, _u: &Vector, _y: &Vector) -> Result<f64> {
        Err(Error::Unsupported("exact outer value"))
    }

    fn y_star(&self, _x: &Vector) -> Result<Vector> {
        Err(Error::Unsupported("inner maximizer y*"))
    }

    fn phi(&self, _x: &Vector) -> Result<f64> {
        Err(Error::Unsupported("primal function phi"))
    }

    /// `∇Φ(x) = ∇g(x)ᵀ ∇_g f(g(x), y*(x))`.
    fn grad_phi(&self, x: &Vector) -> Result<Vector> {
        if !self.capabilities().has_grad_phi {
            return Err(Error::Unsupported("gradient of phi"));
        }
        let inner = self.exact_inner(x)?;
        let y = self.y_star(x)?;
        let outer = self.exact_outer(&inner.value, &y)?;
        Ok(inner.jacobian.tr_mul(&outer.grad_g))
    }

    /// Minimum of `Φ` when it is known in closed form.
    fn phi_star(&self) -> Option<f64> {
        None
    }

    fn project_x(&self, x: &Vector) -> Vector {
        x.clone()
    }

    fn project_y(&self, y: &Vector) -> Vector {
        y.clone()
    }

    /// A canonical feasible starting point for `y`.
    fn y_center(&self) -> Vector {
        self.project_y(&Vector::zeros(self.dims().dy))
    }
}

pub(crate) fn ensure_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(what))
    }
}

/// Wraps an oracle and counts every drawn token.
#[derive(Debug)]
pub struct CountingOracle<'a, O> {
    inner: &'a O,
    inner_draws: AtomicU64,
    outer_draws: AtomicU64,
}

impl<'a, O> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOracle {
            inner,
            inner_draws: AtomicU64::new(0),
            outer_draws: AtomicU64::new(0),
        }
    }

    pub fn inner_draws(&self) -> u64 {
        self.inner_draws.load(Ordering::Relaxed)
    }

    pub fn outer_draws(&self) -> u64 {
        self.outer_draws.load(Ordering::Relaxed)
    }

    pub fn samples_used(&self) -> u64 {
        self.inner_draws() + self.outer_draws()
    }

    pub fn get_ref(&self) -> &O {
        self.inner
    }
}

impl<O: CompositionalOracle> CompositionalOracle for CountingOracle<'_, O> {
    type InnerSample = O::InnerSample;
    type OuterSample = O::OuterSample;

    fn dims(&self) -> Dims {
        self.inner.dims()
    }

    fn capabilities(&self) -> OracleCapabilities {
        self.inner.capabilities()
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::InnerSample {
        self.inner_draws.fetch_add(1, Ordering::Relaxed);
        self.inner.draw_inner(rng)
    }

    fn draw_outer<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::OuterSample {
        self.outer_draws.fetch_add(1, Ordering::Relaxed);
        self.inner.draw_outer(rng)
    }

    fn outer_of(&self, inner: &Self::InnerSample) -> Self::OuterSample {
        self.inner.outer_of(inner)
    }

    fn eval_inner(&self, x: &Vector, sample: &Self::InnerSample) -> Result<InnerEval> {
        self.inner.eval_inner(x, sample)
    }

    fn eval_outer(&self, u: &Vector, y: &Vector, sample: &Self::OuterSample) -> Result<OuterEval> {
        self.inner.eval_outer(u, y, sample)
    }

    fn exact_inner(&self, x: &Vector) -> Result<InnerEval> {
        self.inner.exact_inner(x)
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        self.inner.exact_outer(u, y)
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        self.inner.outer_value(u, y)
    }

    fn y_star(&self, x: &Vector) -> Result<Vector> {
        self.inner.y_star(x)
    }

    fn phi(&self, x: &Vector) -> Result<f64> {
        self.inner.phi(x)
    }

    fn grad_phi(&self, x: &Vector) -> Result<Vector> {
        self.inner.grad_phi(x)
    }

    fn phi_star(&self) -> Option<f64> {
        self.inner.phi_star()
    }

    fn project_x(&self, x: &Vector) -> Vector {
        self.inner.project_x(x)
    }

    fn project_y(&self, y: &Vector) -> Vector {
        self.inner.project_y(y)
    }

    fn y_center(&self) -> Vector {
        self.inner.y_center()
    }
}
