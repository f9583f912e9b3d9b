//! Linear inner map with a quadratic, strongly concave outer function.
//!
//! `g(x) = Ax + b` and `f(u, y) = ½uᵀPu + uᵀQy − (μ/2)‖y‖² + cᵀu`. Every
//! exact quantity is available in closed form:
//!
//! - `y*(x) = Qᵀu / μ` with `u = Ax + b`
//! - `Φ(x) = ½uᵀHu + cᵀu` with `H = P + QQᵀ/μ`
//! - `∇Φ(x) = Aᵀ(Hu + c)`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::noise::{self, GaussianInnerSample, GaussianOuterSample, NoiseScales};
use crate::oracle::{
    CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval, ensure_finite,
};
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Debug)]
pub struct LinQuadProblem {
    a: Matrix,
    b: Vector,
    p: Matrix,
    q: Matrix,
    c: Vector,
    mu: f64,
    noise: NoiseScales,
    dims: Dims,
    /// `P + QQᵀ/μ`
    h: Matrix,
    phi_star: Option<f64>,
    x_star: Option<Vector>,
}

pub(crate) fn spectral_norm(m: &Matrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        scale * rng.sample::<f64, _>(StandardNormal)
    })
}

fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

impl LinQuadProblem {
    pub fn new(
        a: Matrix,
        b: Vector,
        p: Matrix,
        q: Matrix,
        c: Vector,
        mu: f64,
        noise: NoiseScales,
    ) -> Result<Self> {
        noise.validate()?;
        let dims = Dims::new(a.ncols(), a.nrows(), q.ncols())?;
        let dg = dims.dg;
        if b.len() != dg || c.len() != dg || p.shape() != (dg, dg) || q.nrows() != dg {
            return Err(Error::Construction(
                "linquad: inconsistent matrix shapes".into(),
            ));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Construction(format!(
                "linquad: mu must be positive, got {mu}"
            )));
        }
        if (&p - p.transpose()).amax() > 1e-12 * (1.0 + p.amax()) {
            return Err(Error::Construction("linquad: P must be symmetric".into()));
        }
        let h = &p + &q * q.transpose() / mu;
        if h.clone().cholesky().is_none() {
            return Err(Error::Construction(
                "linquad: P + QQᵀ/μ is not positive definite".into(),
            ));
        }
        let mut problem = LinQuadProblem {
            a,
            b,
            p,
            q,
            c,
            mu,
            noise,
            dims,
            h,
            phi_star: None,
            x_star: None,
        };
        problem.solve_minimizer();
        Ok(problem)
    }

    /// A well-conditioned random instance determined by `seed`.
    pub fn random(dims: Dims, seed: u64, noise: NoiseScales) -> Result<Self> {
        let Dims { dx, dg, dy } = dims;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = gaussian_matrix(&mut rng, dg, dx, 0.3 / (dx as f64).sqrt());
        for i in 0..dg.min(dx) {
            a[(i, i)] += 1.0;
        }
        let b = gaussian_vector(&mut rng, dg, 0.5);
        let sym = gaussian_matrix(&mut rng, dg, dg, 1.0);
        let p = Matrix::identity(dg, dg) * 0.5
            + (&sym + sym.transpose()) * (0.1 / (2.0 * dg as f64).sqrt());
        let q = gaussian_matrix(&mut rng, dg, dy, 0.5 / (dy as f64).sqrt());
        let c = gaussian_vector(&mut rng, dg, 0.5);
        Self::new(a, b, p, q, c, 1.0, noise)
    }

    /// `A = I`, `b = 0`, `P = I`, `Q = 0`, `c = 0`, so `Φ(x) = ½‖x‖²`.
    pub fn identity(n: usize, noise: NoiseScales) -> Result<Self> {
        Self::new(
            Matrix::identity(n, n),
            Vector::zeros(n),
            Matrix::identity(n, n),
            Matrix::zeros(n, n),
            Vector::zeros(n),
            1.0,
            noise,
        )
    }

    fn solve_minimizer(&mut self) {
        // AᵀHA x = -Aᵀ(Hb + c)
        let lhs = self.a.transpose() * &self.h * &self.a;
        let rhs = -(self.a.transpose() * (&self.h * &self.b + &self.c));
        let x = match lhs.clone().cholesky() {
            Some(ch) => Some(ch.solve(&rhs)),
            None => lhs.svd(true, true).solve(&rhs, 1e-12).ok(),
        };
        if let Some(x) = x {
            self.phi_star = Some(self.phi_unchecked(&x));
            self.x_star = Some(x);
        }
    }

    fn phi_unchecked(&self, x: &Vector) -> f64 {
        let u = &self.a * x + &self.b;
        0.5 * u.dot(&(&self.h * &u)) + self.c.dot(&u)
    }

    pub fn noise(&self) -> NoiseScales {
        self.noise
    }

    pub fn with_noise(mut self, noise: NoiseScales) -> Result<Self> {
        noise.validate()?;
        self.noise = noise;
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// A minimizer of `Φ`.
    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    /// `‖A‖‖Q‖/μ`, a Lipschitz constant of `y*`.
    pub fn y_star_lipschitz(&self) -> f64 {
        spectral_norm(&self.a) * spectral_norm(&self.q) / self.mu
    }

    /// `‖Aᵀ(P + QQᵀ/μ)A‖`, the smoothness constant of `Φ`.
    pub fn grad_phi_lipschitz(&self) -> f64 {
        spectral_norm(&(self.a.transpose() * &self.h * &self.a))
    }

    /// Upper bound on `‖∇g‖_F`.
    pub fn jacobian_frobenius(&self) -> f64 {
        self.a.norm()
    }
}

impl CompositionalOracle for LinQuadProblem {
    type InnerSample = GaussianInnerSample;
    type OuterSample = GaussianOuterSample;

    fn dims(&self) -> Dims {
        self.dims
    }

    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities::FULL
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> GaussianInnerSample {
        noise::draw_inner(rng, &self.noise, self.dims.dx, self.dims.dg, self.dims.dy)
    }

    fn draw_outer<R: Rng + ?Sized>(&self, rng: &mut R) -> GaussianOuterSample {
        noise::draw_outer(rng, &self.noise, self.dims.dg, self.dims.dy)
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
            value: &self.a * x + &self.b,
            jacobian: self.a.clone(),
        })
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        Ok(OuterEval {
            grad_g: &self.p * u + &self.q * y + &self.c,
            grad_y: self.q.tr_mul(u) - y * self.mu,
        })
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        Ok(
            0.5 * u.dot(&(&self.p * u)) + u.dot(&(&self.q * y)) - 0.5 * self.mu * y.norm_squared()
                + self.c.dot(u),
        )
    }

    fn y_star(&self, x: &Vector) -> Result<Vector> {
        ensure_finite(x, "x")?;
        let u = &self.a * x + &self.b;
        Ok(self.q.tr_mul(&u) / self.mu)
    }

    fn phi(&self, x: &Vector) -> Result<f64> {
        ensure_finite(x, "x")?;
        Ok(self.phi_unchecked(x))
    }

    fn grad_phi(&self, x: &Vector) -> Result<Vector> {
        ensure_finite(x, "x")?;
        let u = &self.a * x + &self.b;
        Ok(self.a.tr_mul(&(&self.h * u + &self.c)))
    }

    fn phi_star(&self) -> Option<f64> {
        self.phi_star
    }
}
