//! Solver-matrix runs over a manifest of problems.
//!
//! A manifest is a JSON document:
//!
//! ```json
//! {
//!   "problems": [
//!     { "generate": "biq:20:7" },
//!     { "name": "be100.1", "biqmac": "data/be100.1.sparse" },
//!     { "problem": "saved.json" }
//!   ],
//!   "solvers": [{ "kind": "cadmm" }, { "kind": "dext", "tau": 1.618 }],
//!   "tol": 1e-6
//! }
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Every
//! (problem, solver) pair is solved independently, in parallel.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dnnsdp::{cadmm_solve, default_config, dext_solve, DnnSdpProblem, TuningPolicy, DEFAULT_DEXT_TAU};
use crate::engine::SolverConfig;
use crate::error::{Error, Result};
use crate::io::{read_problem, write_records, ConfigEcho, RunRecord};
use crate::problems::{
    build_biq, build_ext_biq, build_qap, build_theta_plus, read_biqmac, read_dimacs, read_qaplib, ExtBiqOptions,
    GenSpec,
};
use crate::profile::{performance_profile, Metric, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Cadmm,
    Dext,
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cadmm" => Ok(SolverKind::Cadmm),
            "dext" => Ok(SolverKind::Dext),
            other => Err(Error::InvalidConfig(format!("unknown solver '{other}' (expected cadmm or dext)"))),
        }
    }
}

/// A solver and its fixed step (directly extended method only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Label used in records and profiles; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        SolverSpec { kind, tau: None, name: None }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            match self.kind {
                SolverKind::Cadmm => "cadmm",
                SolverKind::Dext => "dext",
            }
            .to_string()
        })
    }
}

/// Where a problem comes from. Exactly one source field must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `FAMILY:SIZE:SEED`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<String>,
    /// A problem document written by [`crate::io::write_problem`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<PathBuf>,
    /// Biq Mac file, BIQ relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biqmac: Option<PathBuf>,
    /// Biq Mac file, extended BIQ relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biqmac_ext: Option<PathBuf>,
    /// QAPLIB file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qaplib: Option<PathBuf>,
    /// DIMACS graph, θ₊ relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimacs: Option<PathBuf>,
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

impl ProblemSource {
    pub fn generated(spec: GenSpec) -> Self {
        ProblemSource { generate: Some(spec.to_string()), ..Default::default() }
    }

    fn paths(&self) -> [Option<&PathBuf>; 5] {
        [
            self.problem.as_ref(),
            self.biqmac.as_ref(),
            self.biqmac_ext.as_ref(),
            self.qaplib.as_ref(),
            self.dimacs.as_ref(),
        ]
    }

    fn check(&self) -> Result<()> {
        let set = self.generate.is_some() as usize + self.paths().iter().flatten().count();
        if set != 1 {
            return Err(Error::InvalidConfig(format!("problem entry {self:?} must name exactly one source")));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        if let Some(g) = &self.generate {
            return g.clone();
        }
        self.paths().into_iter().flatten().next().map_or_else(String::new, |p| file_stem(p))
    }

    /// Loads or generates the problem; relative paths are taken from `base`.
    pub fn load(&self, base: &Path) -> Result<DnnSdpProblem> {
        self.check()?;
        let abs = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        if let Some(g) = &self.generate {
            return g.parse::<GenSpec>()?.generate();
        }
        if let Some(p) = &self.problem {
            return read_problem(abs(p));
        }
        if let Some(p) = &self.biqmac {
            return build_biq(&read_biqmac(abs(p))?);
        }
        if let Some(p) = &self.biqmac_ext {
            return build_ext_biq(&read_biqmac(abs(p))?, &ExtBiqOptions::default());
        }
        if let Some(p) = &self.qaplib {
            let (a, b) = read_qaplib(abs(p))?;
            return build_qap(&a, &b);
        }
        let p = self.dimacs.as_ref().expect("checked above");
        build_theta_plus(&read_dimacs(abs(p))?)
    }
}

/// Optional overrides of the default solver configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

impl ConfigOverrides {
    /// [`default_config`] for `prob` with the overrides applied.
    pub fn config_for(&self, prob: &DnnSdpProblem) -> SolverConfig {
        let mut c = default_config(prob);
        c.sigma = self.sigma.unwrap_or(c.sigma);
        c.alpha = self.alpha.unwrap_or(c.alpha);
        c.tau0 = self.tau0.unwrap_or(c.tau0);
        c.tau_bar = self.tau_bar.unwrap_or(c.tau_bar);
        c.eps = self.eps.unwrap_or(c.eps);
        c.tol = self.tol.unwrap_or(c.tol);
        c.max_iters = self.max_iters.unwrap_or(c.max_iters);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub problems: Vec<ProblemSource>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default, flatten)]
    pub config: ConfigOverrides,
    #[serde(default)]
    pub policy: TuningPolicy,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Solves one problem with one solver. Solver errors are captured as a
/// record with status `Error`.
pub fn run_one(
    problem: &str,
    prob: &DnnSdpProblem,
    solver: &SolverSpec,
    cfg: &SolverConfig,
    policy: &TuningPolicy,
) -> RunRecord {
    let tau = solver.tau.unwrap_or(DEFAULT_DEXT_TAU);
    let echo = ConfigEcho {
        solver: cfg.clone(),
        policy: policy.clone(),
        dext_tau: (solver.kind == SolverKind::Dext).then_some(tau),
    };
    let start = Instant::now();
    let res = match solver.kind {
        SolverKind::Cadmm => cadmm_solve(prob, cfg, policy),
        SolverKind::Dext => dext_solve(prob, cfg, policy, tau),
    };
    match res {
        Ok(r) => RunRecord::from_result(problem, &solver.label(), &r, Some(echo)),
        Err(e) => RunRecord::failed(problem, &solver.label(), &e, start.elapsed().as_secs_f64(), Some(echo)),
    }
}

/// Records in manifest order (problem-major) and both profiles.
#[derive(Clone, Debug)]
pub struct BenchOutput {
    pub records: Vec<RunRecord>,
    pub iterations: Profile,
    pub time: Profile,
}

pub const PROFILE_POINTS: usize = 50;

/// Runs every solver on every problem. Problems that fail to load abort the
/// run; solver failures become `Error` records.
pub fn run_bench(manifest: &Manifest, base: &Path) -> Result<BenchOutput> {
    if manifest.problems.is_empty() || manifest.solvers.is_empty() {
        return Err(Error::InvalidConfig("manifest needs at least one problem and one solver".into()));
    }
    let mut labels = BTreeMap::new();
    for s in &manifest.solvers {
        if labels.insert(s.label(), ()).is_some() {
            return Err(Error::InvalidConfig(format!("solver label '{}' used twice", s.label())));
        }
    }
    let loaded: Vec<(String, DnnSdpProblem)> = manifest
        .problems
        .par_iter()
        .map(|src| Ok((src.label(), src.load(base)?)))
        .collect::<Result<_>>()?;
    let mut names = BTreeMap::new();
    for (name, _) in &loaded {
        if names.insert(name.clone(), ()).is_some() {
            return Err(Error::InvalidConfig(format!("problem name '{name}' used twice")));
        }
    }
    let jobs: Vec<(&str, &DnnSdpProblem, &SolverSpec)> = loaded
        .iter()
        .flat_map(|(name, p)| manifest.solvers.iter().map(move |s| (name.as_str(), p, s)))
        .collect();
    let records: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(name, p, s)| {
            let r = run_one(name, p, s, &manifest.config.config_for(p), &manifest.policy);
            log::info!("{}", r.summary_line());
            r
        })
        .collect();
    Ok(BenchOutput {
        iterations: performance_profile(&records, Metric::Iterations, PROFILE_POINTS)?,
        time: performance_profile(&records, Metric::Time, PROFILE_POINTS)?,
        records,
    })
}

impl BenchOutput {
    /// Writes `records.json`, `profile_iterations.csv`, `profile_time.csv`
    /// and `summary.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_records(&self.records, dir.join("records.json"))?;
        std::fs::write(dir.join("profile_iterations.csv"), self.iterations.to_csv())?;
        std::fs::write(dir.join("profile_time.csv"), self.time.to_csv())?;
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }

    /// Per-run table followed by per-solver solve fractions and profile
    /// areas.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(RunRecord::summary_header());
        s.push('\n');
        for r in &self.records {
            s.push_str(&r.summary_line());
            s.push('\n');
        }
        s.push('\n');
        for c in &self.iterations.curves {
            let wins = c.ratios.iter().filter(|&&r| r == 1.0).count();
            s.push_str(&format!(
                "{:<8} solved {:>5.1}%  fewest iterations on {}/{}  iteration-profile area {:.4}  time-profile area {:.4}\n",
                c.solver,
                100.0 * c.solve_fraction,
                wins,
                c.ratios.len(),
                c.area(),
                self.time.curve(&c.solver).map_or(f64::NAN, |t| t.area()),
            ));
        }
        s
    }
}
