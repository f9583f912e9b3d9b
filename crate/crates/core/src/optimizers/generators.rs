//! Diagonal adaptive-matrix generators for ADA-NSTORM.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Generator {
    Adam,
    AmsGrad,
    AdaBelief,
    /// Accumulators clipped into `[low, high]`.
    AdaBound {
        low: f64,
        high: f64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Adam => "adam",
            Generator::AmsGrad => "amsgrad",
            Generator::AdaBelief => "adabelief",
            Generator::AdaBound { .. } => "adabound",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Generator::AdaBound { low, high } = *self
            && !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high)
        {
            return Err(Error::Config(format!(
                "adabound bounds need 0 <= low <= high, got [{low}, {high}]"
            )));
        }
        Ok(())
    }
}

/// Second-moment accumulators; `a` for `x`, `b` for `y`. The raw
/// accumulators are used by AMSGrad and AdaBound only.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorState {
    pub a: Vector,
    pub b: Vector,
    pub a_raw: Vector,
    pub b_raw: Vector,
}

impl GeneratorState {
    pub fn zeros(dx: usize, dy: usize) -> Self {
        GeneratorState {
            a: Vector::zeros(dx),
            b: Vector::zeros(dy),
            a_raw: Vector::zeros(dx),
            b_raw: Vector::zeros(dy),
        }
    }
}

/// Raw sampled gradients that AdaBelief compares against the estimates:
/// `v'ᵀ ∇_g f(u_t, y_t; ζ_t)` for `x` and `∇_y f(u_t, y_t; ζ_t)` for `y`.
#[derive(Clone, Copy, Debug)]
pub struct BeliefAux<'a> {
    pub x: &'a Vector,
    pub y: &'a Vector,
}

fn ema(acc: &mut Vector, tau: f64, sq: &Vector) {
    acc.zip_apply(sq, |a, s| *a = tau * *a + (1.0 - tau) * s);
}

fn diag(acc: &Vector, rho: f64) -> Vector {
    acc.map(|a| a.sqrt() + rho)
}

/// Updates the accumulators from the current estimates `v`, `w` and
/// returns the diagonals `(A, B)` with entries `√a + ρ`.
pub fn generator_update(
    kind: Generator,
    state: &mut GeneratorState,
    v: &Vector,
    w: &Vector,
    aux: Option<BeliefAux<'_>>,
    tau: f64,
    rho: f64,
) -> Result<(Vector, Vector)> {
    let v2 = v.component_mul(v);
    let w2 = w.component_mul(w);
    match kind {
        Generator::Adam => {
            ema(&mut state.a, tau, &v2);
            ema(&mut state.b, tau, &w2);
        }
        Generator::AmsGrad => {
            ema(&mut state.a_raw, tau, &v2);
            ema(&mut state.b_raw, tau, &w2);
            state.a.zip_apply(&state.a_raw, |a, r| *a = a.max(r));
            state.b.zip_apply(&state.b_raw, |b, r| *b = b.max(r));
        }
        Generator::AdaBelief => {
            let aux = aux
                .ok_or_else(|| Error::Config("adabelief needs the raw sampled gradients".into()))?;
            let dx = aux.x - v;
            let dy = aux.y - w;
            ema(&mut state.a, tau, &dx.component_mul(&dx));
            ema(&mut state.b, tau, &dy.component_mul(&dy));
        }
        Generator::AdaBound { low, high } => {
            ema(&mut state.a_raw, tau, &v2);
            ema(&mut state.b_raw, tau, &w2);
            state.a = state.a_raw.map(|r| r.clamp(low, high));
            state.b = state.b_raw.map(|r| r.clamp(low, high));
        }
    }
    Ok((diag(&state.a, rho), diag(&state.b, rho)))
}
