//! Multi-seed execution, sweeps and method comparison.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{RunConfig, SweepSpec};
use super::metrics::{Metric, MetricsRow, MetricsTable, RowStatus, columns_for};
use super::problem::{ProblemInstance, with_oracle};
use super::reference::{phi_value, reference_minimum};
use crate::optimizers::{Optimizer, RunOptions, YInit, initial_y, run};
use crate::oracle::{CompositionalOracle, CountingOracle};
use crate::{Error, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct RunnerOptions {
    /// Worker threads; `0` uses one per core.
    pub workers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub median: f64,
    pub mean: f64,
    pub std: f64,
}

impl Stats {
    /// Median, mean and sample standard deviation; `None` for no values.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Stats {
            median: median(values),
            mean,
            std: var.sqrt(),
        })
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReference {
    /// `closed_form`, `reference_solver` or `best_observed`.
    pub kind: &'static str,
    pub phi_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub status: &'static str,
    pub error: Option<String>,
    pub final_t: u64,
    pub samples_used: u64,
    pub finals: BTreeMap<String, Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub run_id: String,
    pub method: &'static str,
    pub problem: &'static str,
    pub iterations: u64,
    pub log_every: u64,
    pub gap_reference: Option<GapReference>,
    pub survivors: usize,
    pub seeds: Vec<SeedSummary>,
    /// Across surviving seeds, per metric column.
    pub aggregate: BTreeMap<String, Stats>,
}

impl Summary {
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    /// Final values of one column over surviving seeds.
    pub fn finals(&self, column: &str) -> Vec<f64> {
        self.seeds
            .iter()
            .filter_map(|s| s.finals.get(column).copied().flatten())
            .collect()
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| Error::Config(format!("json encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub table: MetricsTable,
    pub summary: Summary,
}

impl RunOutput {
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.table.write_csv(dir.join("metrics.csv"))?;
        write_text(&dir.join("summary.json"), &self.summary.to_json()?)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn with_pool<T: Send>(opts: RunnerOptions, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

struct SeedRun {
    seed: u64,
    rows: Vec<MetricsRow>,
    failure: Option<String>,
}

fn relative(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

fn metric_values<O: CompositionalOracle>(
    oracle: &O,
    opt: &Optimizer<'_, CountingOracle<'_, O>>,
    columns: &[&str],
    path: f64,
) -> Result<Vec<Option<f64>>> {
    let x = opt.x();
    let y = opt.y();
    let exact = if columns.contains(&"err_u") {
        let inner = oracle.exact_inner(x)?;
        let outer = oracle.exact_outer(&inner.value, y)?;
        Some((inner, outer))
    } else {
        None
    };
    let est = opt.estimates();
    columns
        .iter()
        .map(|c| {
            Ok(match *c {
                "grad_phi_norm" => Some(oracle.grad_phi(x)?.norm()),
                "phi" => Some(phi_value(oracle, x)?),
                "objective_gap" | "gap_normalized" => None,
                "err_u" | "err_vprime" | "err_vdprime" | "err_w" => {
                    let (inner, outer) = exact.as_ref().expect("computed above");
                    Some(match *c {
                        "err_u" => relative((est.u - &inner.value).norm(), inner.value.norm()),
                        "err_vprime" => relative(
                            (est.jacobian - &inner.jacobian).norm(),
                            inner.jacobian.norm(),
                        ),
                        "err_vdprime" => {
                            relative((est.grad_g - &outer.grad_g).norm(), outer.grad_g.norm())
                        }
                        _ => relative((est.grad_y - &outer.grad_y).norm(), outer.grad_y.norm()),
                    })
                }
                "path_length" => Some(path),
                "v_norm" => Some(opt.v().norm()),
                "w_norm" => Some(opt.w().norm()),
                other => unreachable!("unknown column {other}"),
            })
        })
        .collect()
}

fn run_seed<O: CompositionalOracle>(
    oracle: &O,
    cfg: &RunConfig,
    run_id: &str,
    x1: &Vector,
    seed: u64,
) -> SeedRun {
    let columns = columns_for(&cfg.metrics);
    let counting = CountingOracle::new(oracle);
    let mut rows = Vec::new();
    let track_path = cfg.metrics.contains(&Metric::PathLength);
    let mut path = 0.0;
    let mut prev: Option<(Vector, Vector)> = None;
    let mut last_t = 0;
    let result = (|| {
        let policy = cfg
            .init
            .y
            .clone()
            .unwrap_or_else(|| YInit::default_for(oracle));
        let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
        init_rng.set_stream(1);
        let y1 = initial_y(oracle, x1, &policy, &mut init_rng)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = RunOptions {
            iterations: cfg.iterations,
            record_every: cfg.iterations,
        };
        let given = YInit::Given {
            y: y1.iter().copied().collect(),
        };
        run(
            &counting,
            cfg.method,
            x1.clone(),
            &given,
            opts,
            &mut rng,
            |opt| {
                let t = opt.t();
                last_t = t;
                if track_path {
                    if let Some((px, py)) = &prev {
                        path +=
                            ((opt.x() - px).norm_squared() + (opt.y() - py).norm_squared()).sqrt();
                    }
                    prev = Some((opt.x().clone(), opt.y().clone()));
                }
                if t == 1 || t % cfg.log_every == 0 || t == cfg.iterations {
                    rows.push(MetricsRow {
                        run_id: run_id.to_string(),
                        method: cfg.method.name().to_string(),
                        seed,
                        t,
                        samples_used: counting.samples_used(),
                        eta_t: opt.eta(),
                        status: RowStatus::Ok,
                        values: metric_values(oracle, opt, &columns, path)?,
                    });
                }
                Ok(())
            },
        )
    })();
    let failure = result.err().map(|e| {
        rows.push(MetricsRow {
            run_id: run_id.to_string(),
            method: cfg.method.name().to_string(),
            seed,
            t: last_t + 1,
            samples_used: counting.samples_used(),
            eta_t: cfg.method.schedule().eta(last_t + 1),
            status: RowStatus::Failed,
            values: vec![None; columns.len()],
        });
        e.to_string()
    });
    SeedRun {
        seed,
        rows,
        failure,
    }
}

fn gap_reference<O: CompositionalOracle>(
    oracle: &O,
    x1: &Vector,
    runs: &[SeedRun],
    phi_col: usize,
) -> Result<GapReference> {
    if let Some(phi_star) = oracle.phi_star() {
        return Ok(GapReference {
            kind: "closed_form",
            phi_star,
        });
    }
    let (solver, _) = reference_minimum(oracle, x1, 2000)?;
    let observed = runs
        .iter()
        .flat_map(|r| r.rows.iter())
        .filter_map(|row| row.values[phi_col])
        .fold(f64::INFINITY, f64::min);
    Ok(if observed < solver {
        GapReference {
            kind: "best_observed",
            phi_star: observed,
        }
    } else {
        GapReference {
            kind: "reference_solver",
            phi_star: solver,
        }
    })
}

/// Runs every seed of `cfg` and assembles rows and summary in seed order.
pub fn run_single(cfg: &RunConfig, opts: RunnerOptions) -> Result<RunOutput> {
    let instance = cfg.problem.build()?;
    run_on_instance(&instance, cfg, &cfg.name, opts)
}

struct Executed {
    x1: Vector,
    runs: Vec<SeedRun>,
}

fn execute(
    instance: &ProblemInstance,
    cfg: &RunConfig,
    run_id: &str,
    opts: RunnerOptions,
) -> Result<Executed> {
    cfg.method.validate()?;
    let x1 = instance.initial_x(&cfg.init.x)?;
    let mut runs: Vec<SeedRun> = with_pool(opts, || {
        cfg.seeds
            .par_iter()
            .map(|&seed| with_oracle!(instance, o => run_seed(o, cfg, run_id, &x1, seed)))
            .collect()
    })?;
    runs.sort_by_key(|r| r.seed);
    Ok(Executed { x1, runs })
}

/// `None` unless the objective gap was requested.
fn reference_for(
    instance: &ProblemInstance,
    cfg: &RunConfig,
    ex: &Executed,
) -> Result<Option<GapReference>> {
    match MetricsTable::new(&cfg.metrics).column("phi") {
        Some(phi) => with_oracle!(instance, o => gap_reference(o, &ex.x1, &ex.runs, phi)).map(Some),
        None => Ok(None),
    }
}

fn run_on_instance(
    instance: &ProblemInstance,
    cfg: &RunConfig,
    run_id: &str,
    opts: RunnerOptions,
) -> Result<RunOutput> {
    let ex = execute(instance, cfg, run_id, opts)?;
    let reference = reference_for(instance, cfg, &ex)?;
    Ok(assemble(cfg, run_id, ex.runs, reference))
}

fn assemble(
    cfg: &RunConfig,
    run_id: &str,
    mut runs: Vec<SeedRun>,
    gap_ref: Option<GapReference>,
) -> RunOutput {
    let mut table = MetricsTable::new(&cfg.metrics);
    if let (Some(reference), Some(phi), Some(gap), Some(norm)) = (
        &gap_ref,
        table.column("phi"),
        table.column("objective_gap"),
        table.column("gap_normalized"),
    ) {
        for r in &mut runs {
            let initial = r
                .rows
                .first()
                .and_then(|row| row.values[phi])
                .map(|p| p - reference.phi_star);
            for row in &mut r.rows {
                if let Some(p) = row.values[phi] {
                    let g = p - reference.phi_star;
                    row.values[gap] = Some(g);
                    row.values[norm] = initial.filter(|&i| i > 0.0).map(|i| g / i);
                }
            }
        }
    }

    let mut seeds = Vec::new();
    for r in &runs {
        let last = r.rows.iter().rev().find(|row| row.status == RowStatus::Ok);
        let finals = table
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    c.clone(),
                    if r.failure.is_none() {
                        last.and_then(|row| row.values[i])
                    } else {
                        None
                    },
                )
            })
            .collect();
        let tail = r.rows.last();
        seeds.push(SeedSummary {
            seed: r.seed,
            status: if r.failure.is_none() { "ok" } else { "failed" },
            error: r.failure.clone(),
            final_t: tail.map_or(0, |row| row.t),
            samples_used: tail.map_or(0, |row| row.samples_used),
            finals,
        });
    }
    let mut aggregate = BTreeMap::new();
    for c in &table.columns {
        let vals: Vec<f64> = seeds
            .iter()
            .filter_map(|s| s.finals.get(c).copied().flatten())
            .filter(|v| v.is_finite())
            .collect();
        if let Some(stats) = Stats::of(&vals) {
            aggregate.insert(c.clone(), stats);
        }
    }
    let summary = Summary {
        run_id: run_id.to_string(),
        method: cfg.method.name(),
        problem: cfg.problem.kind(),
        iterations: cfg.iterations,
        log_every: cfg.log_every,
        gap_reference: gap_ref,
        survivors: runs.iter().filter(|r| r.failure.is_none()).count(),
        seeds,
        aggregate,
    };
    table.rows = runs.into_iter().flat_map(|r| r.rows).collect();
    RunOutput { table, summary }
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub labels: Vec<(String, String)>,
    pub output: RunOutput,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub axes: Vec<String>,
    pub points: Vec<SweepPoint>,
}

/// Runs every Cartesian point of the sweep.
pub fn run_sweep(spec: &SweepSpec, opts: RunnerOptions) -> Result<SweepOutput> {
    let points = spec.points()?;
    let mut out = Vec::with_capacity(points.len());
    for (labels, cfg) in points {
        let run_id = if labels.is_empty() {
            cfg.name.clone()
        } else {
            let tag: Vec<String> = labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}[{}]", cfg.name, tag.join(","))
        };
        let instance = cfg.problem.build()?;
        let output = run_on_instance(&instance, &cfg, &run_id, opts)?;
        out.push(SweepPoint { labels, output });
    }
    Ok(SweepOutput {
        axes: spec.axes.iter().map(|(k, _)| k.clone()).collect(),
        points: out,
    })
}

impl SweepOutput {
    /// One row per point: axis values, survivor count and the median final
    /// value of every metric column.
    pub fn table_csv(&self) -> Result<String> {
        let columns = self
            .points
            .first()
            .map(|p| p.output.table.columns.clone())
            .unwrap_or_default();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
        let mut header = vec!["point".to_string()];
        header.extend(self.axes.iter().cloned());
        header.push("survivors".into());
        header.extend(columns.iter().map(|c| format!("{c}_median")));
        w.write_record(&header).map_err(csv_err)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(p.labels.iter().map(|(_, v)| v.clone()));
            rec.push(p.output.summary.survivors.to_string());
            for c in &columns {
                rec.push(
                    p.output
                        .summary
                        .aggregate
                        .get(c)
                        .map(|s| super::metrics::format_real(s.median))
                        .unwrap_or_default(),
                );
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut all = MetricsTable {
            columns: self
                .points
                .first()
                .map(|p| p.output.table.columns.clone())
                .unwrap_or_default(),
            rows: Vec::new(),
        };
        for p in &self.points {
            all.rows.extend(p.output.table.rows.iter().cloned());
        }
        all.write_csv(dir.join("metrics.csv"))?;
        let summaries: Vec<&Summary> = self.points.iter().map(|p| &p.output.summary).collect();
        write_text(&dir.join("summary.json"), &to_json(&summaries)?)?;
        write_text(&dir.join("sweep.csv"), &self.table_csv()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Winner {
    /// Label of the lowest final median, or `tie`.
    pub winner: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub methods: Vec<String>,
    /// Largest sample count reached by every method.
    pub budget: u64,
    pub winners: BTreeMap<String, Winner>,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub runs: Vec<RunOutput>,
    pub summary: ComparisonSummary,
}

fn unique_labels(cfgs: &[RunConfig]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for cfg in cfgs {
        let mut label = cfg.name.clone();
        let mut k = 2;
        while labels.contains(&label) {
            label = format!("{}#{k}", cfg.name);
            k += 1;
        }
        labels.push(label);
    }
    labels
}

/// Per-seed value of `col` at the last ok row with `samples_used ≤ budget`.
fn values_at(table: &MetricsTable, col: usize, budget: u64) -> Vec<f64> {
    let mut by_seed: BTreeMap<u64, f64> = BTreeMap::new();
    for row in &table.rows {
        if row.status == RowStatus::Ok
            && row.samples_used <= budget
            && let Some(v) = row.values[col]
        {
            by_seed.insert(row.seed, v);
        }
    }
    by_seed.into_values().collect()
}

/// Runs several methods on one problem and seed set.
pub fn compare_methods(cfgs: &[RunConfig], opts: RunnerOptions) -> Result<Comparison> {
    let first = cfgs
        .first()
        .ok_or_else(|| Error::Config("compare needs at least one config".into()))?;
    for (i, c) in cfgs.iter().enumerate().skip(1) {
        if c.problem != first.problem {
            return Err(Error::Config(format!(
                "config {} (`{}`) uses a different problem than `{}`",
                i + 1,
                c.name,
                first.name
            )));
        }
        if c.seeds != first.seeds {
            return Err(Error::Config(format!(
                "config {} (`{}`) uses different seeds than `{}`",
                i + 1,
                c.name,
                first.name
            )));
        }
    }
    let instance = first.problem.build()?;
    let labels = unique_labels(cfgs);
    let executed = cfgs
        .iter()
        .zip(&labels)
        .map(|(c, l)| execute(&instance, c, l, opts))
        .collect::<Result<Vec<_>>>()?;
    // one Φ* for every method so their gaps are comparable
    let references = cfgs
        .iter()
        .zip(&executed)
        .map(|(c, ex)| reference_for(&instance, c, ex))
        .collect::<Result<Vec<_>>>()?;
    let shared = references
        .iter()
        .flatten()
        .min_by(|a, b| a.phi_star.total_cmp(&b.phi_star))
        .cloned();
    let runs: Vec<RunOutput> = cfgs
        .iter()
        .zip(&labels)
        .zip(executed.into_iter().zip(&references))
        .map(|((c, l), (ex, r))| assemble(c, l, ex.runs, r.as_ref().and(shared.clone())))
        .collect();

    let budget = runs
        .iter()
        .map(|r| {
            r.table
                .rows
                .iter()
                .filter(|row| row.status == RowStatus::Ok)
                .map(|row| row.samples_used)
                .max()
                .unwrap_or(0)
        })
        .min()
        .unwrap_or(0);
    let mut winners = BTreeMap::new();
    let shared: Vec<String> = runs[0]
        .table
        .columns
        .iter()
        .filter(|c| runs.iter().all(|r| r.table.column(c).is_some()))
        .cloned()
        .collect();
    for c in &shared {
        let mut values = BTreeMap::new();
        for (r, l) in runs.iter().zip(&labels) {
            let vals = values_at(&r.table, r.table.column(c).expect("shared column"), budget);
            if !vals.is_empty() {
                values.insert(l.clone(), median(&vals));
            }
        }
        let best = values.values().copied().fold(f64::INFINITY, f64::min);
        let at_best: Vec<&String> = values
            .iter()
            .filter(|(_, v)| **v == best)
            .map(|(k, _)| k)
            .collect();
        let winner = match at_best.as_slice() {
            [one] if values.len() > 1 || labels.len() == 1 => (*one).clone(),
            [] => String::new(),
            _ => "tie".to_string(),
        };
        winners.insert(c.clone(), Winner { winner, values });
    }
    Ok(Comparison {
        summary: ComparisonSummary {
            methods: labels.clone(),
            budget,
            winners,
        },
        labels,
        runs,
    })
}

impl Comparison {
    /// Medians across seeds of every shared metric column, one row per
    /// sample count seen by any method.
    pub fn table_csv(&self) -> Result<String> {
        let columns: Vec<String> = self
            .runs
            .first()
            .map(|r| r.table.columns.clone())
            .unwrap_or_default()
            .into_iter()
            .filter(|c| self.runs.iter().all(|r| r.table.column(c).is_some()))
            .collect();
        let mut grid: BTreeMap<u64, BTreeMap<(usize, usize), Vec<f64>>> = BTreeMap::new();
        for (m, r) in self.runs.iter().enumerate() {
            for row in r
                .table
                .rows
                .iter()
                .filter(|row| row.status == RowStatus::Ok)
            {
                let cell = grid.entry(row.samples_used).or_default();
                for (k, c) in columns.iter().enumerate() {
                    if let Some(v) = row.values[r.table.column(c).expect("shared")] {
                        cell.entry((m, k)).or_default().push(v);
                    }
                }
            }
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
        let mut header = vec!["samples_used".to_string()];
        for l in &self.labels {
            header.extend(columns.iter().map(|c| format!("{l}/{c}")));
        }
        w.write_record(&header).map_err(csv_err)?;
        for (samples, cells) in &grid {
            let mut rec = vec![samples.to_string()];
            for m in 0..self.labels.len() {
                for k in 0..columns.len() {
                    rec.push(
                        cells
                            .get(&(m, k))
                            .map(|v| super::metrics::format_real(median(v)))
                            .unwrap_or_default(),
                    );
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join("comparison.csv"), &self.table_csv()?)?;
        write_text(&dir.join("comparison.json"), &to_json(&self.summary)?)?;
        let summaries: Vec<&Summary> = self.runs.iter().map(|r| &r.summary).collect();
        write_text(&dir.join("summary.json"), &to_json(&summaries)?)?;
        let mut all = MetricsTable {
            columns: self.runs[0].table.columns.clone(),
            rows: Vec::new(),
        };
        if self.runs.iter().all(|r| r.table.columns == all.columns) {
            for r in &self.runs {
                all.rows.extend(r.table.rows.iter().cloned());
            }
            all.write_csv(dir.join("metrics.csv"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_values() {
        let s = Stats::of(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 4.0);
        assert!((s.std - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Stats::of(&[5.0]).unwrap().std, 0.0);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn labels_are_unique() {
        let cfg = super::super::config::parse_config(
            "name = \"a\"\n[problem]\nkind = \"toy\"\n[method]\nkind = \"sgda\"\n",
        )
        .unwrap();
        assert_eq!(
            unique_labels(&[cfg.clone(), cfg.clone(), cfg]),
            vec!["a", "a#2", "a#3"]
        );
    }
}
