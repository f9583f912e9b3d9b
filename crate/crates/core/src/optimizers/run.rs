//! Full optimization runs and trajectory bookkeeping.

use rand::Rng;

use super::{Method, Optimizer, YInit, initial_y};
use crate::oracle::CompositionalOracle;
use crate::{Error, Result, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: u64,
    pub x: Vector,
    pub y: Vector,
}

/// Recorded iterates at `t = 1`, every multiple of the record interval, and
/// the final iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn path_length(&self) -> Result<f64> {
        path_length(&self.points)
    }
}

/// `Σ ‖(x_{k+1}, y_{k+1}) − (x_k, y_k)‖` over consecutive recorded points.
pub fn path_length(points: &[TrajectoryPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    Ok(points
        .windows(2)
        .map(|p| ((&p[1].x - &p[0].x).norm_squared() + (&p[1].y - &p[0].y).norm_squared()).sqrt())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Number of visited points `T`; `T − 1` updates are performed.
    pub iterations: u64,
    pub record_every: u64,
}

/// Runs `method` for `opts.iterations` points from `x1`. The observer sees
/// the optimizer after initialization and after every step.
pub fn run<O, R, F>(
    oracle: &O,
    method: Method,
    x1: Vector,
    y_init: &YInit,
    opts: RunOptions,
    rng: &mut R,
    mut observer: F,
) -> Result<Trajectory>
where
    O: CompositionalOracle,
    R: Rng + ?Sized,
    F: FnMut(&Optimizer<'_, O>) -> Result<()>,
{
    if opts.iterations == 0 || opts.record_every == 0 {
        return Err(Error::Config(
            "iterations and record interval must be positive".into(),
        ));
    }
    let y1 = initial_y(oracle, &x1, y_init, rng)?;
    let mut opt = Optimizer::new(oracle, method, x1, y1, rng)?;
    let mut traj = Trajectory::default();
    let mut record = |opt: &Optimizer<'_, O>| {
        let t = opt.t();
        if t == 1 || t.is_multiple_of(opts.record_every) || t == opts.iterations {
            traj.points.push(TrajectoryPoint {
                t,
                x: opt.x().clone(),
                y: opt.y().clone(),
            });
        }
    };
    observer(&opt)?;
    record(&opt);
    while opt.t() < opts.iterations {
        opt.step(rng)?;
        observer(&opt)?;
        record(&opt);
    }
    Ok(traj)
}
