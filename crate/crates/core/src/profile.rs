//! Performance profiles.
//!
//! For solver `s` and problem `p` let `r_{p,s} = t_{p,s} / min_s t_{p,s}`,
//! with `r = +∞` when `s` did not converge on `p`. The curve of `s` is
//! `y(x) = |{p : r_{p,s} ≤ x}| / |P|`, a nondecreasing step function that
//! ends at the fraction of problems `s` solved.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::RunRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Iterations,
    Time,
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterations" | "iter" => Ok(Metric::Iterations),
            "time" => Ok(Metric::Time),
            other => Err(Error::InvalidConfig(format!("unknown metric '{other}' (expected iterations or time)"))),
        }
    }
}

impl Metric {
    /// Cost of a converged run. Zero costs are lifted to a floor so ratios
    /// stay defined.
    fn cost(self, r: &RunRecord) -> f64 {
        match self {
            Metric::Iterations => (r.iterations as f64).max(1.0),
            Metric::Time => r.wall_secs.max(1e-9),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub solver: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Problems solved / problems.
    pub solve_fraction: f64,
    /// Per-problem ratios, in problem order (`+∞` for unsolved).
    pub ratios: Vec<f64>,
}

impl Curve {
    /// `y(x)` of the step function.
    pub fn value_at(&self, x: f64) -> f64 {
        self.ratios.iter().filter(|&&r| r <= x).count() as f64 / self.ratios.len() as f64
    }

    /// Area under the step curve over `log₁₀ x` on the common grid.
    pub fn area(&self) -> f64 {
        self.x.windows(2).zip(&self.y).map(|(w, y)| y * (w[1].log10() - w[0].log10())).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub metric: Metric,
    pub problems: Vec<String>,
    pub curves: Vec<Curve>,
}

impl Profile {
    pub fn curve(&self, solver: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.solver == solver)
    }

    /// CSV with header `solver,x,y`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("solver,x,y\n");
        for c in &self.curves {
            for (x, y) in c.x.iter().zip(&c.y) {
                let _ = writeln!(s, "{},{},{}", c.solver, x, y);
            }
        }
        s
    }
}

/// Builds the profile of every solver in `records` on a grid of `points`
/// log-spaced values from 1 to the largest finite ratio, merged with the
/// ratios themselves so every step is represented exactly.
///
/// Each solver must have exactly one record per problem, and all solvers
/// must cover the same problems.
pub fn performance_profile(records: &[RunRecord], metric: Metric, points: usize) -> Result<Profile> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no run records".into()));
    }
    let mut table: BTreeMap<&str, BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        if table.entry(&r.solver).or_default().insert(&r.problem, r).is_some() {
            return Err(Error::InvalidConfig(format!("solver '{}' has two records for '{}'", r.solver, r.problem)));
        }
    }
    let all: BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    let mut missing = Vec::new();
    for (s, row) in &table {
        for p in &all {
            if !row.contains_key(p) {
                missing.push(format!("{s} lacks {p}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::InvalidConfig(format!("mismatched problem sets: {}", missing.join(", "))));
    }

    let problems: Vec<&str> = all.into_iter().collect();
    let cost = |s: &str, p: &str| {
        let r = table[s][p];
        if r.solved() {
            metric.cost(r)
        } else {
            f64::INFINITY
        }
    };
    let best: Vec<f64> = problems.iter().map(|p| table.keys().map(|s| cost(s, p)).fold(f64::INFINITY, f64::min)).collect();
    let ratios: BTreeMap<&str, Vec<f64>> = table
        .keys()
        .map(|&s| {
            let r = problems
                .iter()
                .zip(&best)
                .map(|(p, &b)| if b.is_finite() { cost(s, p) / b } else { f64::INFINITY })
                .collect();
            (s, r)
        })
        .collect();

    let max_ratio = ratios.values().flatten().copied().filter(|r| r.is_finite()).fold(1.0, f64::max);
    let mut grid: Vec<f64> = ratios.values().flatten().copied().filter(|r| r.is_finite()).collect();
    let points = points.max(2);
    grid.extend((0..points).map(|k| max_ratio.powf(k as f64 / (points - 1) as f64)));
    grid.push(1.0);
    grid.push(max_ratio);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let curves = ratios
        .into_iter()
        .map(|(s, r)| {
            let mut c = Curve {
                solver: s.to_string(),
                x: grid.clone(),
                y: Vec::new(),
                solve_fraction: r.iter().filter(|v| v.is_finite()).count() as f64 / r.len() as f64,
                ratios: r,
            };
            c.y = grid.iter().map(|&x| c.value_at(x)).collect();
            c
        })
        .collect();
    Ok(Profile { metric, problems: problems.into_iter().map(String::from).collect(), curves })
}
