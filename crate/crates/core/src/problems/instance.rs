//! Flat-text dump of generated problem instances.
//!
//! Three header lines, then whitespace-separated numeric rows:
//!
//! ```text
//! dims <a> <b>
//! seed <k>
//! kind mdp|auc
//! ```
//!
//! An MDP with `S` states and `L` features (`dims S L`) stores `S` rows of
//! transitions, `S` rows of rewards, then `S` rows of features. An AUC data
//! set with `n` examples of dimension `d` (`dims n d`) stores `n` rows of
//! `label feature_1 … feature_d`. Numbers are written in shortest
//! round-trip form, so a load reproduces the generated values exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::auc::Dataset;
use crate::{Error, Matrix, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Mdp {
        seed: u64,
        transitions: Matrix,
        rewards: Matrix,
        features: Matrix,
    },
    Auc {
        seed: u64,
        data: Dataset,
    },
}

fn push_row<'a>(out: &mut String, values: impl Iterator<Item = &'a f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

fn push_matrix(out: &mut String, m: &Matrix) {
    for row in m.row_iter() {
        push_row(out, row.iter());
    }
}

fn parse_err(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, Vec<&'a str>)> {
    let (i, line) = line.ok_or_else(|| parse_err(0, 0, format!("missing `{key}` header line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(parse_err(i + 1, 1, format!("expected `{key}` header")));
    }
    Ok((i + 1, parts.collect()))
}

fn parse_usize(s: &str, row: usize, column: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(row, column, format!("`{s}` is not a non-negative integer")))
}

impl Instance {
    pub fn seed(&self) -> u64 {
        match self {
            Instance::Mdp { seed, .. } | Instance::Auc { seed, .. } => *seed,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Instance::Mdp {
                seed,
                transitions,
                rewards,
                features,
            } => {
                writeln!(out, "dims {} {}", transitions.nrows(), features.ncols()).unwrap();
                writeln!(out, "seed {seed}").unwrap();
                out.push_str("kind mdp\n");
                push_matrix(&mut out, transitions);
                push_matrix(&mut out, rewards);
                push_matrix(&mut out, features);
            }
            Instance::Auc { seed, data } => {
                writeln!(out, "dims {} {}", data.len(), data.features.ncols()).unwrap();
                writeln!(out, "seed {seed}").unwrap();
                out.push_str("kind auc\n");
                for (i, row) in data.features.row_iter().enumerate() {
                    push_row(&mut out, std::iter::once(&data.labels[i]).chain(row.iter()));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (row, dims) = header(lines.next(), "dims")?;
        if dims.len() != 2 {
            return Err(parse_err(row, 2, "dims needs two integers"));
        }
        let a = parse_usize(dims[0], row, 2)?;
        let b = parse_usize(dims[1], row, 3)?;
        let (row, seed) = header(lines.next(), "seed")?;
        let seed = match seed.as_slice() {
            [s] => s
                .parse::<u64>()
                .map_err(|_| parse_err(row, 2, format!("`{s}` is not a seed")))?,
            _ => return Err(parse_err(row, 2, "seed needs one integer")),
        };
        let (row, kind) = header(lines.next(), "kind")?;
        let kind = match kind.as_slice() {
            [k] => *k,
            _ => return Err(parse_err(row, 2, "kind needs one word")),
        };
        let (rows_needed, width) = match kind {
            "mdp" => (3 * a, [a, a, b]),
            "auc" => (a, [b + 1; 3]),
            other => return Err(parse_err(row, 2, format!("unknown kind `{other}`"))),
        };
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(rows_needed);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let expected = width[(values.len() / a.max(1)).min(2)];
            let parsed = line
                .split_whitespace()
                .enumerate()
                .map(|(j, tok)| {
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(i + 1, j + 1, format!("`{tok}` is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() == rows_needed {
                return Err(parse_err(i + 1, 1, "more rows than the header declares"));
            }
            if parsed.len() != expected {
                return Err(parse_err(
                    i + 1,
                    parsed.len().min(expected) + 1,
                    format!("expected {expected} values, found {}", parsed.len()),
                ));
            }
            values.push(parsed);
        }
        if values.len() != rows_needed {
            return Err(parse_err(
                text.lines().count() + 1,
                1,
                format!("expected {rows_needed} data rows, found {}", values.len()),
            ));
        }
        let block = |from: usize, n: usize, cols: usize, skip: usize| {
            Matrix::from_fn(n, cols, |i, j| values[from + i][skip + j])
        };
        match kind {
            "mdp" => Ok(Instance::Mdp {
                seed,
                transitions: block(0, a, a, 0),
                rewards: block(a, a, a, 0),
                features: block(2 * a, a, b, 0),
            }),
            _ => {
                let labels = values.iter().map(|r| r[0]).collect();
                let data = Dataset::new(block(0, a, b, 1), labels)?;
                Ok(Instance::Auc { seed, data })
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
