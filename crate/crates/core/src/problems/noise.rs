//! Additive isotropic Gaussian noise for the synthetic problems.
//!
//! Tokens store standard-normal draws; the problem scales them at
//! evaluation time. A zero scale draws nothing, so noise-free problems
//! consume no randomness.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

/// Separate scales for inner values, inner Jacobians and outer gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseScales {
    pub value: f64,
    pub jacobian: f64,
    pub gradient: f64,
}

impl NoiseScales {
    pub fn uniform(sigma: f64) -> Self {
        NoiseScales {
            value: sigma,
            jacobian: sigma,
            gradient: sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("value", self.value),
            ("jacobian", self.jacobian),
            ("gradient", self.gradient),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Construction(format!(
                    "noise scale `{name}` must be finite and non-negative, got {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianOuterSample {
    pub grad_g: Option<Vector>,
    pub grad_y: Option<Vector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianInnerSample {
    pub value: Option<Vector>,
    pub jacobian: Option<Matrix>,
    /// Outer realization drawn together with the inner one.
    pub outer: GaussianOuterSample,
}

fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub(crate) fn draw_outer<R: Rng + ?Sized>(
    rng: &mut R,
    scales: &NoiseScales,
    dg: usize,
    dy: usize,
) -> GaussianOuterSample {
    if scales.gradient > 0.0 {
        GaussianOuterSample {
            grad_g: Some(normals(rng, dg)),
            grad_y: Some(normals(rng, dy)),
        }
    } else {
        GaussianOuterSample {
            grad_g: None,
            grad_y: None,
        }
    }
}

pub(crate) fn draw_inner<R: Rng + ?Sized>(
    rng: &mut R,
    scales: &NoiseScales,
    dx: usize,
    dg: usize,
    dy: usize,
) -> GaussianInnerSample {
    let value = (scales.value > 0.0).then(|| normals(rng, dg));
    let jacobian = (scales.jacobian > 0.0).then(|| {
        Matrix::from_iterator(
            dg,
            dx,
            (0..dg * dx).map(|_| rng.sample::<f64, _>(StandardNormal)),
        )
    });
    let outer = draw_outer(rng, scales, dg, dy);
    GaussianInnerSample {
        value,
        jacobian,
        outer,
    }
}

pub(crate) fn add_scaled(target: &mut Vector, noise: &Option<Vector>, scale: f64) {
    if let Some(n) = noise {
        target.axpy(scale, n, 1.0);
    }
}

pub(crate) fn add_scaled_mat(target: &mut Matrix, noise: &Option<Matrix>, scale: f64) {
    if let Some(n) = noise {
        *target += n * scale;
    }
}
