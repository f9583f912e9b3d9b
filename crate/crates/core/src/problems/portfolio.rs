//! Mean-deviation risk-averse portfolio problem.
//!
//! With per-period payoffs `r_t ∈ R^D` the inner map collects the first two
//! moments of the portfolio return, `g(x) = E_t[(⟨r_t, x⟩, ⟨r_t, x⟩²)]`, and
//! the outer function is
//!
//! ```text
//! f(u, y) = (1/D) Σ_d y_d (−T u₁ + λ √max(u₂ − u₁², ε) − (y_d − 1/D)²)
//! ```
//!
//! so the linear term is the summed return over all `T` periods and the
//! risk term is the standard deviation. Both `x` and `y` live on the
//! simplex.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::simplex::simplex_project;
use crate::oracle::{
    CompositionalOracle, Dims, InnerEval, OracleCapabilities, OuterEval, ensure_finite,
};
use crate::{Error, Matrix, Result, Vector};

/// Minibatch of period indices; `None` means the full data set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodBatch(pub Option<Vec<usize>>);

#[derive(Clone, Debug)]
pub struct PortfolioProblem {
    returns: Matrix,
    lambda_risk: f64,
    sqrt_floor: f64,
    batch: usize,
}

impl PortfolioProblem {
    pub fn new(returns: Matrix, lambda_risk: f64, sqrt_floor: f64, batch: usize) -> Result<Self> {
        let (periods, assets) = returns.shape();
        if periods < 2 || assets < 2 {
            return Err(Error::Construction(format!(
                "portfolio needs at least 2 periods and 2 assets, got {periods}x{assets}"
            )));
        }
        if !returns.iter().all(|r| r.is_finite()) {
            return Err(Error::Construction(
                "portfolio returns must be finite".into(),
            ));
        }
        if !(lambda_risk.is_finite() && lambda_risk >= 0.0) {
            return Err(Error::Construction(format!(
                "lambda must be >= 0, got {lambda_risk}"
            )));
        }
        if !(sqrt_floor.is_finite() && sqrt_floor > 0.0) {
            return Err(Error::Construction(format!(
                "sqrt floor must be > 0, got {sqrt_floor}"
            )));
        }
        if batch == 0 || batch > periods {
            return Err(Error::Construction(format!(
                "batch must be in 1..={periods}, got {batch}"
            )));
        }
        Ok(PortfolioProblem {
            returns,
            lambda_risk,
            sqrt_floor,
            batch,
        })
    }

    pub fn periods(&self) -> usize {
        self.returns.nrows()
    }

    pub fn assets(&self) -> usize {
        self.returns.ncols()
    }

    pub fn returns(&self) -> &Matrix {
        &self.returns
    }

    fn moments(&self, x: &Vector, rows: impl ExactSizeIterator<Item = usize>) -> InnerEval {
        let n = rows.len() as f64;
        let d = self.assets();
        let mut value = Vector::zeros(2);
        let mut jacobian = Matrix::zeros(2, d);
        for t in rows {
            let r = self.returns.row(t);
            let ret = r.dot(&x.transpose());
            value[0] += ret;
            value[1] += ret * ret;
            for j in 0..d {
                jacobian[(0, j)] += r[j];
                jacobian[(1, j)] += 2.0 * ret * r[j];
            }
        }
        InnerEval {
            value: value / n,
            jacobian: jacobian / n,
        }
    }

    fn deviation(&self, u: &Vector) -> (f64, bool) {
        let var = u[1] - u[0] * u[0];
        if var > self.sqrt_floor {
            (var.sqrt(), true)
        } else {
            (self.sqrt_floor.sqrt(), false)
        }
    }

    /// Shared per-asset payoff `−T u₁ + λ·dev(u)`.
    fn payoff(&self, u: &Vector) -> f64 {
        -(self.periods() as f64) * u[0] + self.lambda_risk * self.deviation(u).0
    }
}

impl CompositionalOracle for PortfolioProblem {
    type InnerSample = PeriodBatch;
    type OuterSample = ();

    fn dims(&self) -> Dims {
        Dims {
            dx: self.assets(),
            dg: 2,
            dy: self.assets(),
        }
    }

    fn capabilities(&self) -> OracleCapabilities {
        OracleCapabilities {
            has_exact_inner: true,
            has_exact_outer: true,
            ..Default::default()
        }
    }

    fn draw_inner<R: Rng + ?Sized>(&self, rng: &mut R) -> PeriodBatch {
        if self.batch == self.periods() {
            PeriodBatch(None)
        } else {
            PeriodBatch(Some(
                rand::seq::index::sample(rng, self.periods(), self.batch).into_vec(),
            ))
        }
    }

    fn draw_outer<R: Rng + ?Sized>(&self, _rng: &mut R) {}

    fn outer_of(&self, _inner: &PeriodBatch) {}

    fn eval_inner(&self, x: &Vector, s: &PeriodBatch) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        Ok(match &s.0 {
            None => self.moments(x, 0..self.periods()),
            Some(idx) => self.moments(x, idx.iter().copied()),
        })
    }

    fn eval_outer(&self, u: &Vector, y: &Vector, _s: &()) -> Result<OuterEval> {
        self.exact_outer(u, y)
    }

    fn exact_inner(&self, x: &Vector) -> Result<InnerEval> {
        ensure_finite(x, "x")?;
        Ok(self.moments(x, 0..self.periods()))
    }

    fn exact_outer(&self, u: &Vector, y: &Vector) -> Result<OuterEval> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let d = self.assets() as f64;
        let mass = y.sum() / d;
        let (dev, active) = self.deviation(u);
        let (ddev_du1, ddev_du2) = if active {
            (-u[0] / dev, 0.5 / dev)
        } else {
            (0.0, 0.0)
        };
        let grad_g = Vector::from_vec(vec![
            mass * (-(self.periods() as f64) + self.lambda_risk * ddev_du1),
            mass * self.lambda_risk * ddev_du2,
        ]);
        let c = self.payoff(u);
        let grad_y = y.map(|yd| {
            let e = yd - 1.0 / d;
            (c - e * e - 2.0 * yd * e) / d
        });
        Ok(OuterEval { grad_g, grad_y })
    }

    fn outer_value(&self, u: &Vector, y: &Vector) -> Result<f64> {
        ensure_finite(u, "u")?;
        ensure_finite(y, "y")?;
        let d = self.assets() as f64;
        let c = self.payoff(u);
        Ok(y.iter()
            .map(|&yd| yd * (c - (yd - 1.0 / d).powi(2)))
            .sum::<f64>()
            / d)
    }

    fn project_x(&self, x: &Vector) -> Vector {
        simplex_project(x)
    }

    fn project_y(&self, y: &Vector) -> Vector {
        simplex_project(y)
    }
}

/// Reads a returns table: a header row, then one row per period whose first
/// column is a label and whose remaining columns are asset returns.
pub fn load_returns_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_returns_csv(&text)
}

/// Parses the returns format from memory. Row numbers in errors are 1-based
/// file lines (the header is line 1); columns are 1-based.
pub fn parse_returns_csv(text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_len = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            column: 0,
            message: e.to_string(),
        })?
        .len();
    if header_len < 2 {
        return Err(Error::Parse {
            row: 1,
            column: 0,
            message: "header needs a label column and at least one asset".into(),
        });
    }
    let assets = header_len - 1;
    let mut data = Vec::new();
    let mut periods = 0;
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() != header_len {
            return Err(Error::Parse {
                row,
                column: record.len(),
                message: format!("expected {header_len} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate().skip(1) {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: j + 1,
                message: format!("non-numeric cell `{cell}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("non-finite cell `{cell}`"),
                });
            }
            data.push(value);
        }
        periods += 1;
    }
    if periods == 0 {
        return Err(Error::Parse {
            row: 2,
            column: 0,
            message: "no data rows".into(),
        });
    }
    Ok(Matrix::from_row_slice(periods, assets, &data))
}

/// Synthetic i.i.d. Gaussian returns with per-asset means in `[-0.01, 0.02]`
/// and volatilities in `[0.02, 0.08]`.
pub fn synthetic_returns(periods: usize, assets: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..assets).map(|_| rng.random_range(-0.01..0.02)).collect();
    let vols: Vec<f64> = (0..assets).map(|_| rng.random_range(0.02..0.08)).collect();
    Matrix::from_fn(periods, assets, |_, j| {
        means[j] + vols[j] * rng.sample::<f64, _>(StandardNormal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn constant_returns_objective() {
        let r = dmatrix![1.0, 0.0; 1.0, 0.0];
        let p = PortfolioProblem::new(r, 0.0, 1e-12, 2).unwrap();
        let x = dvector![1.0, 0.0];
        let u = p.exact_inner(&x).unwrap().value;
        let v = p.outer_value(&u, &dvector![0.5, 0.5]).unwrap();
        assert!((v - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_portfolio() {
        let r = synthetic_returns(20, 3, 1);
        let p = PortfolioProblem::new(r, 0.7, 1e-12, 5).unwrap();
        let g = p.exact_inner(&Vector::zeros(3)).unwrap().value;
        assert_eq!(g, Vector::zeros(2));
        let y = dvector![0.2, 0.5, 0.3];
        let expected = -y
            .iter()
            .map(|&yd: &f64| yd * (yd - 1.0 / 3.0).powi(2))
            .sum::<f64>()
            / 3.0;
        // only the floored deviation remains in the payoff
        let floor_term = 0.7 * 1e-6 * y.sum() / 3.0;
        let v = p.outer_value(&g, &y).unwrap();
        assert!((v - (expected + floor_term)).abs() < 1e-15);
    }

    #[test]
    fn full_batch_sample_is_exact() {
        let r = synthetic_returns(30, 4, 2);
        let p = PortfolioProblem::new(r, 1.0, 1e-12, 30).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = p.draw_inner(&mut rng);
        let x = dvector![0.1, 0.2, 0.3, 0.4];
        assert_eq!(p.eval_inner(&x, &s).unwrap(), p.exact_inner(&x).unwrap());
    }

    #[test]
    fn permutation_invariance() {
        let r = synthetic_returns(40, 4, 3);
        let perm = [2usize, 0, 3, 1];
        let rp = Matrix::from_fn(40, 4, |i, j| r[(i, perm[j])]);
        let p = PortfolioProblem::new(r, 0.5, 1e-12, 10).unwrap();
        let pp = PortfolioProblem::new(rp, 0.5, 1e-12, 10).unwrap();
        let x = dvector![0.4, 0.1, 0.3, 0.2];
        let y = dvector![0.1, 0.2, 0.3, 0.4];
        let xp = Vector::from_fn(4, |j, _| x[perm[j]]);
        let yp = Vector::from_fn(4, |j, _| y[perm[j]]);
        let v = p
            .outer_value(&p.exact_inner(&x).unwrap().value, &y)
            .unwrap();
        let vp = pp
            .outer_value(&pp.exact_inner(&xp).unwrap().value, &yp)
            .unwrap();
        assert!((v - vp).abs() < 1e-12 * v.abs().max(1.0));
    }

    #[test]
    fn phi_is_unsupported() {
        let p = PortfolioProblem::new(synthetic_returns(5, 2, 0), 1.0, 1e-12, 2).unwrap();
        assert!(matches!(
            p.phi(&dvector![0.5, 0.5]),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            p.grad_phi(&dvector![0.5, 0.5]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn csv_parsing() {
        let m = parse_returns_csv("date,a,b\n1,1.0,0.0\n2,1.0,0.0").unwrap();
        assert_eq!(m, dmatrix![1.0, 0.0; 1.0, 0.0]);
        assert!(matches!(
            parse_returns_csv("date,a,b\n"),
            Err(Error::Parse { .. })
        ));
        match parse_returns_csv("date,a,b\n1,1.0,0.0\n2,1.0\n") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected ragged-row error, got {other:?}"),
        }
        match parse_returns_csv("date,a,b\n1,1.0,abc\n") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 3)),
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_returns_csv("/nonexistent/returns.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn construction_checks() {
        assert!(PortfolioProblem::new(Matrix::zeros(1, 3), 1.0, 1e-12, 1).is_err());
        assert!(PortfolioProblem::new(Matrix::zeros(3, 1), 1.0, 1e-12, 1).is_err());
        assert!(PortfolioProblem::new(Matrix::zeros(3, 3), 1.0, 1e-12, 4).is_err());
    }
}
