//! Compositional AUC maximization with a linear scorer.
//!
//! The primal variable is `x̄ = (w, a, b)` with scorer `s(ω) = ωᵀw`. The
//! inner map takes one gradient step on the logistic loss,
//! `g(x̄) = (w − α∇L(w), a, b)`, and the outer function is the min-max
//! square-loss AUC surrogate averaged over examples,
//!
//! ```text
//! φ(u, y; ω, θ) = g1(u; ω, θ) + y·g2(u; ω, θ) − p(1−p)y²
//! g1 = (1−p)(s−a)²·[θ=1] + p(s−b)²·[θ=−1] + 2p s·[θ=1] − 2(1−p)s·[θ=−1]
//! g2 = 2(p s·[θ=−1] − (1−p)s·[θ=1])
//! ```
//!
//! Sampled Jacobians ignore the logistic Hessian (identity on the `w`
//! block) unless `second_order` is set; the exact oracle always includes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::oracle::{
    CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval, ensure_finite,
};
use crate::{Error, Matrix, Result, Vector};

/// Labelled examples; labels are `+1` or `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        if features.nrows() != labels.len() || labels.is_empty() {
            return Err(Error::Construction(
                "dataset: feature rows and labels disagree".into(),
            ));
        }
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::Construction(
                "dataset: labels must be +1 or -1".into(),
            ));
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positive_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l > 0.0).count() as f64 / self.len() as f64
    }
}

/// Two Gaussian classes with means `±0.5·1` and unit covariance; the first
/// `round(n·imratio)` rows are positives.
pub fn make_imbalanced_gaussian(n: usize, dim: usize, imratio: f64, seed: u64) -> Result<Dataset> {
    if !(imratio > 0.0 && imratio < 1.0) {
        return Err(Error::Construction(format!(
            "imratio must be in (0, 1), got {imratio}"
        )));
    }
    if dim == 0 {
        return Err(Error::Construction(
            "feature dimension must be positive".into(),
        ));
    }
    let positives = ((n as f64) * imratio).round() as usize;
    if positives == 0 || positives == n {
        return Err(Error::Construction(format!(
            "{n} samples at imratio {imratio} leave a class empty"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<f64> = (0..n)
        .map(|i| if i < positives { 1.0 } else { -1.0 })
        .collect();
    let features = Matrix::from_fn(n, dim, |i, _| {
        0.5 * labels[i] + rng.sample::<f64, _>(StandardNormal)
    });
    Dataset::new(features, labels)
}

/// Example indices; `None` is the full data set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleBatch(pub Option<Vec<usize>>);

#[derive(Clone, Debug)]
pub struct LinearAucProblem {
    data: Dataset,
    imratio: f64,
    alpha_inner: f64,
    batch: usize,
    second_order: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearAucProblem {
    pub fn new(
        data: Dataset,
        imratio: f64,
        alpha_inner: f64,
        batch: usize,
        second_order: bool,
    ) -> Result<Self> {
        if !(imratio > 0.0 && imratio < 1.0) {
            return Err(Error::Construction(format!(
                "imratio must be in (0, 1), got {imratio}"
            )));
        }
        if !(alpha_inner.is_finite() && alpha_inner > 0.0) {
            return Err(Error::Construction(format!(
                "alpha must be positive, got {alpha_inner}"
            )));
        }
        let pos = data.labels.iter().filter(|&&l| l > 0.0).count();
        if pos == 0 || pos == data.len() {
            return Err(Error::Construction(
                "AUC needs both classes in the data".into(),
            ));
        }
        if batch == 0 || batch > data.len() {
            return Err(Error::Construction(format!(
                "batch must be in 1..={}, got {batch}",
                data.len()
            )));
        }
        Ok(LinearAucProblem {
            data,
            imratio,
            alpha_inner,
            batch,
            second_order,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.data.features.ncols()
    }

    pub fn imratio(&self) -> f64 {
        self.imratio
    }

    fn draw_batch<R: Rng + ?Sized>(&self, rng: &mut R) -> ExampleBatch {
        if self.batch == self.data.len() {
            ExampleBatch(None)
        } else {
            ExampleBatch(Some(
                rand::seq::index::sample(rng, self.data.len(), self.batch).into_vec(),
            ))
        }
    }

    fn indices<'a>(&'a self, b: &'a ExampleBatch) -> Box<dyn Iterator<Item = usize> + 'a> {
        match &b.0 {
            None => Box::new(0..self.data.len()),
            Some(v) => Box::new(v.iter().copied()),
        }
    }

    fn batch_len(&self, b: &ExampleBatch) -> usize {
        b.0.as_ref().map_or(self.data.len(), Vec::len)
    }

    fn inner_on(&self, xbar: &Vector, b: &ExampleBatch, hessian: bool) -> InnerEval {
        let d = self.feature_dim();
        let w = xbar.rows(0, d);
        let n = self.batch_len(b) as f64;
        let mut grad = Vector::zeros(d);
        let mut hess = Matrix::zeros(d, d);
        for i in self.indices(b) {
            let omega = self.data.features.row(i).transpose();
            let theta = self.data.labels[i];
            let s = omega.dot(&w);
            grad.axpy(-theta * sigmoid(-theta * s) / n, &omega, 1.0);
            if hessian {
                let sg = sigmoid(s);
                hess.ger(sg * (1.0 - sg) / n, &omega, &omega, 1.0);
            }
        }
        let mut value = xbar.clone();
        value.rows_mut(0, d).axpy(-self.alpha_inner, &grad, 1.0);
        let mut jacobian = Matrix::identity(d + 2, d + 2);
        if hessian {
            let mut block = jacobian.view_mut((0, 0), (d, d));
            block -= hess * self.alpha_inner;
        }
        InnerEval { value, jacobian }
    }

    /// Per-example `(g1, g2)` at the scorer output `s`.
    fn parts(&self, s: f64, theta: f64, a: f64, b: f64) -> (f64, f64) {
        let p = self.imratio;
        if theta > 0.0 {
            (
                (1.0 - p) * (s - a).powi(2) + 2.0 * p * s,
                -2.0 * (1.0 - p) * s,
            )
        } else {
            (p * (s - b).powi(2) - 2.0 * (1.0 - p) * s, 2.0 * p * s)
        }
    }

    fn outer_on(&self, u: &Vector, y: &Vector, batch: &ExampleBatch) -> OuterEval {
        let d = self.feature_dim();
        let p = self.imratio;
        let (a, b, yv) = (u[d], u[d + 1], y[0]);
        let w = u.rows(0, d);
        let n = self.batch_len(batch) as f64;
        let mut grad_g = Vector::zeros(d + 2);
        let mut g2_mean = 0.0;
        for i in self.indices(batch) {
            let omega = self.data.features.row(i);
            let theta = self.data.labels[i];
            let s = omega.dot(&w.transpose());
            let (ds, da, db, g2) = if theta > 0.0 {
                (
                    2.0 * (1.0 - p) * (s - a) + 2.0 * p - 2.0 * (1.0 - p) * yv,
                    -2.0 * (1.0 - p) * (s - a),
                    0.0,
                    -2.0 * (1.0 - p) * s,
                )
            } else {
                (
                    2.0 * p * (s - b) - 2.0 * (1.0 - p) + 2.0 * p * yv,
                    0.0,
                    -2.0 * p * (s - b),
                    2.0 * p * s,
                )
            };
            grad_g.rows_mut(0, d).axpy(ds / n, &omega.transpose(), 1.0);
            grad_g[d] += da / n;
            grad_g[d + 1] += db / n;
            g2_mean += g2 / n;
        }
        let grad_y = Vector::from_element(1, g2_mean - 2.0 * p * (1.0 - p) * yv);
        OuterEval { grad_g, grad_y }
    }

    /// Full-data means of `g1` and `g2`.
    fn mean_parts(&self, u: &Vector) -> (f64, f64) {
        let d = self.feature_dim();
        let w = u.rows(0, d);
        let n = self.data.len() as f64;
        let (mut g1, mut g2) = (0.0, 0.0);
        for i in 0..self.data.len() {
            let s = self.data.features.row(i).dot(&w.transpose());
            let (a1, a2) = self.parts(s, self.data.labels[i], u[d], u[d + 1]);
            g1 += a1 / n;
            g2 += a2 / n;
        }
        (g1, g2)
    }
}

/// `g3(θ) = p(1−p)θ²`.
pub fn auc_g3(p: f64, theta: f64) -> f64 {
    p * (1.0 - p) * theta * theta
}

impl CompositionalOracle for LinearAucProblem {
    type InnerSample = ExampleBatch;
    type OuterSample = ExampleBatch;

    fn dims(&self) -> Dims {
        let d = self.feature_dim() + 2;
        Dims {
            dx: d,
            dg: d,
            dy: 1,
        }
    }

    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities::FULL
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> ExampleBatch {
        self.draw_batch(rng)
    }

    fn draw_outer<R: Rng + ?Sized>(&self, rng: &mut R) -> ExampleBatch {
        self.draw_batch(rng)
    }

    fn outer_of(&self, inner: &ExampleBatch) -> ExampleBatch {
        inner.clone()
    }

    fn eval_inner(&self, x: &Vector, s: &ExampleBatch) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        Ok(self.inner_on(x, s, self.second_order))
    }

    fn eval_outer(&self, u: &Vector, y: &Vector, s: &ExampleBatch) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        Ok(self.outer_on(u, y, s))
    }

    fn exact_inner(&self, x: &Vector) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        Ok(self.inner_on(x, &ExampleBatch(None), true))
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        Ok(self.outer_on(u, y, &ExampleBatch(None)))
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let (g1, g2) = self.mean_parts(u);
        Ok(g1 + y[0] * g2 - auc_g3(self.imratio, y[0]))
    }

    fn y_star(&self, x: &Vector) -> Result<Vector> {
        let u = self.exact_inner(x)?.value;
        let (_, g2) = self.mean_parts(&u);
        let p = self.imratio;
        Ok(Vector::from_element(1, g2 / (2.0 * p * (1.0 - p))))
    }

    fn phi(&self, x: &Vector) -> Result<f64> {
        let u = self.exact_inner(x)?.value;
        let (g1, g2) = self.mean_parts(&u);
        let p = self.imratio;
        Ok(g1 + g2 * g2 / (4.0 * p * (1.0 - p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn g3_value() {
        assert_eq!(auc_g3(0.5, 2.0), 1.0);
    }

    #[test]
    fn zero_scores_single_positive() {
        let data = Dataset::new(
            Matrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]),
            vec![1.0, -1.0],
        )
        .unwrap();
        let auc = LinearAucProblem::new(data, 0.5, 0.1, 2, false).unwrap();
        // x = 0, a = b = 0: every g1 term has a zero factor
        let (g1, g2) = auc.parts(0.0, 1.0, 0.0, 0.0);
        assert_eq!((g1, g2), (0.0, 0.0));
        // with y = 0 the objective is the mean of g1
        let u = dvector![0.3, -0.2, 0.1, 0.4];
        let (m1, _) = auc.mean_parts(&u);
        assert_eq!(auc.outer_value(&u, &dvector![0.0]).unwrap(), m1);
    }

    #[test]
    fn y_star_zeroes_dual_gradient() {
        let data = make_imbalanced_gaussian(200, 3, 0.2, 1).unwrap();
        let auc = LinearAucProblem::new(data, 0.2, 0.5, 32, false).unwrap();
        let x = dvector![0.2, -0.1, 0.3, 0.05, -0.02];
        let ys = auc.y_star(&x).unwrap();
        let u = auc.exact_inner(&x).unwrap().value;
        assert!(auc.exact_outer(&u, &ys).unwrap().grad_y[0].abs() < 1e-12);
        let phi = auc.phi(&x).unwrap();
        assert!((phi - auc.outer_value(&u, &ys).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sampled_jacobian_ignores_hessian_unless_requested() {
        let data = make_imbalanced_gaussian(50, 2, 0.3, 2).unwrap();
        let first = LinearAucProblem::new(data.clone(), 0.3, 0.5, 50, false).unwrap();
        let second = LinearAucProblem::new(data, 0.3, 0.5, 50, true).unwrap();
        let x = dvector![0.5, -0.5, 0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = first.draw_inner(&mut rng);
        assert_eq!(
            first.eval_inner(&x, &s).unwrap().jacobian,
            Matrix::identity(4, 4)
        );
        assert_eq!(
            second.eval_inner(&x, &s).unwrap(),
            second.exact_inner(&x).unwrap()
        );
    }

    #[test]
    fn dataset_generation() {
        let d = make_imbalanced_gaussian(100, 4, 0.1, 3).unwrap();
        assert_eq!(d.len(), 100);
        assert!((d.positive_fraction() - 0.1).abs() < 1e-12);
        assert!(make_imbalanced_gaussian(5, 2, 0.01, 0).is_err());
        assert!(make_imbalanced_gaussian(5, 2, 1.5, 0).is_err());
    }

    #[test]
    fn single_class_rejected() {
        let data = Dataset::new(Matrix::zeros(3, 2), vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            LinearAucProblem::new(data, 0.5, 0.1, 2, false),
            Err(Error::Construction(_))
        ));
    }
}
