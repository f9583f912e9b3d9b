//! One-dimensional toy problem `f(g, y) = -2g² + 2gy - y²/2` with `g(x) = 2x`.
//!
//! The inner maximizer is `y*(x) = 2g(x) = 4x` and `Φ(x) = 0` everywhere, so
//! every point of the line `y = 4x` is stationary.

use nalgebra::{dmatrix, dvector};
use rand::Rng;

use super::noise::{self, GaussianInnerSample, GaussianOuterSample, NoiseScales};
use crate::oracle::{
    CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval, ensure_finite,
};
use crate::{Result, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct ToyProblem {
    noise: NoiseScales,
}

impl ToyProblem {
    /// Noise scales for inner values, inner Jacobians and outer gradients.
    pub fn new(noise_value: f64, noise_jac: f64, noise_grad: f64) -> Result<Self> {
        let noise = NoiseScales {
            value: noise_value,
            jacobian: noise_jac,
            gradient: noise_grad,
        };
        noise.validate()?;
        Ok(ToyProblem { noise })
    }

    pub fn noise(&self) -> NoiseScales {
        self.noise
    }

    /// Euclidean distance from `(x, y)` to the stationary line `y = 4x`.
    pub fn distance_to_stationary(x: f64, y: f64) -> f64 {
        (y - 4.0 * x).abs() / 17f64.sqrt()
    }

    fn grads(u: f64, y: f64) -> (f64, f64) {
        (-4.0 * u + 2.0 * y, 2.0 * u - y)
    }
}

impl CompositionalOracle for ToyProblem {
    type InnerSample = GaussianInnerSample;
    type OuterSample = GaussianOuterSample;

    fn dims(&self) -> Dims {
        Dims {
            dx: 1,
            dg: 1,
            dy: 1,
        }
    }

    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities::FULL
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> GaussianInnerSample {
        noise::draw_inner(rng, &self.noise, 1, 1, 1)
    }

    fn draw_outer<R: Rng + ?Sized>(&self, rng: &mut R) -> GaussianOuterSample {
        noise::draw_outer(rng, &self.noise, 1, 1)
    }

    fn outer_of(&self, inner: &GaussianInnerSample) -> GaussianOuterSample {
        inner.outer.clone()
    }

    fn eval_inner(&self, x: &Vector, s: &GaussianInnerSample) -> Result<InnerEval> {
        let mut e = self.exact_inner(x)?;
        noise::add_scaled(&mut e.value, &s.value, self.noise.value);
        noise::add_scaled_mat(&mut e.jacobian, &s.jacobian, self.noise.jacobian);
        Ok(e)
    }

    fn eval_outer(&self, u: &Vector, y: &Vector, s: &GaussianOuterSample) -> Result<OuterEval> {
        let mut e = self.exact_outer(u, y)?;
        noise::add_scaled(&mut e.grad_g, &s.grad_g, self.noise.gradient);
        noise::add_scaled(&mut e.grad_y, &s.grad_y, self.noise.gradient);
        Ok(e)
    }

    fn exact_inner(&self, x: &Vector) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        Ok(InnerEval {
            value: dvector![2.0 * x[0]],
            jacobian: dmatrix![2.0],
        })
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let (gg, gy) = Self::grads(u[0], y[0]);
        Ok(OuterEval {
            grad_g: dvector![gg],
            grad_y: dvector![gy],
        })
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let (u, y) = (u[0], y[0]);
        Ok(-2.0 * u * u + 2.0 * u * y - 0.5 * y * y)
    }

    fn y_star(&self, x: &Vector) -> Result<Vector> {
        ensure_finite(x, "x")?;
        Ok(dvector![4.0 * x[0]])
    }

    fn phi(&self, x: &Vector) -> Result<f64> {
        ensure_finite(x, "x")?;
        Ok(0.0)
    }

    fn phi_star(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_values() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = toy.draw_inner(&mut rng);
        let e = toy.eval_inner(&dvector![1.0], &s).unwrap();
        assert_eq!(e.value[0], 2.0);
        assert_eq!(e.jacobian[(0, 0)], 2.0);
        let o = toy
            .eval_outer(&dvector![2.0], &dvector![0.0], &toy.outer_of(&s))
            .unwrap();
        assert_eq!(o.grad_g[0], -8.0);
        assert_eq!(o.grad_y[0], 4.0);
        // first-order condition at the inner maximizer y = 2g
        let o = toy
            .eval_outer(&dvector![1.5], &dvector![3.0], &toy.outer_of(&s))
            .unwrap();
        assert_eq!(o.grad_y[0], 0.0);
    }

    #[test]
    fn exact_quantities() {
        let toy = ToyProblem::new(0.1, 0.1, 0.1).unwrap();
        assert_eq!(toy.exact_inner(&dvector![1.0]).unwrap().value[0], 2.0);
        assert_eq!(toy.y_star(&dvector![1.0]).unwrap()[0], 4.0);
        assert_eq!(toy.phi(&dvector![1.0]).unwrap(), 0.0);
        // Φ(x) = f(g(x), y*(x)) = 0 for every x
        for x in [-2.0, 0.3, 1.0, 5.0] {
            let g = 2.0 * x;
            let v = toy.outer_value(&dvector![g], &dvector![4.0 * x]).unwrap();
            assert_eq!(v, 0.0);
        }
        assert_eq!(toy.grad_phi(&dvector![3.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn zero_noise_draw_consumes_nothing_and_matches_exact() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = toy.draw_inner(&mut rng);
        assert!(s.value.is_none() && s.jacobian.is_none());
        let x = dvector![0.7];
        assert_eq!(
            toy.eval_inner(&x, &s).unwrap(),
            toy.exact_inner(&x).unwrap()
        );
    }

    #[test]
    fn tokens_are_deterministic_and_fresh() {
        let toy = ToyProblem::new(0.5, 0.5, 0.5).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let s1 = toy.draw_inner(&mut a);
        assert_eq!(s1, toy.draw_inner(&mut b));
        let s2 = toy.draw_inner(&mut a);
        assert_ne!(s1, s2);
        let x = dvector![0.4];
        assert_eq!(
            toy.eval_inner(&x, &s1).unwrap(),
            toy.eval_inner(&x, &s1).unwrap()
        );
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        let toy = ToyProblem::new(0.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = toy.draw_inner(&mut rng);
        assert!(matches!(
            toy.eval_inner(&dvector![f64::NAN], &s),
            Err(crate::Error::Domain(_))
        ));
        assert!(matches!(
            toy.eval_outer(&dvector![1.0], &dvector![f64::INFINITY], &toy.outer_of(&s)),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn rejects_negative_noise() {
        assert!(ToyProblem::new(-0.1, 0.0, 0.0).is_err());
    }
}
