use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::{
    add_gaussian_noise, make_control_problem, make_deblur_problem, make_l2_problem, make_r3_problem,
    p57_control_problem, synthetic_phantom, BlurModel, Boundary, ControlProblem, InnerProduct, Problem, R3Case,
    SeqCase, DEFAULT_TRUNC_DIM,
};
use crate::solvers::{Algorithm, Contraction, Inertia, SolverConfig, StoppingRule};
use crate::space::Vector;
use crate::stepsize::{parse_real, split_call, SequenceSpec};

/// Which benchmark an experiment runs on, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    R3 { case: R3Case },
    L2 { case: SeqCase, trunc_dim: usize },
    /// The double-integrator control problem; `seed` draws uniform random
    /// initial controls in the box, `None` starts from zero.
    Control { mesh: usize, inner_product: InnerProduct, seed: Option<u64> },
    /// Synthetic phantom blurred by a Gaussian, optionally with seeded noise.
    Deblur { size: usize, kernel_size: usize, blur_sigma: f64, reg: f64, boundary: Boundary, noise: f64, seed: u64 },
}

/// A constructed problem plus what the harness needs to report on it.
pub struct BuiltProblem {
    pub problem: Problem,
    pub control: Option<ControlProblem>,
    /// Ground-truth image for SNR.
    pub reference: Option<Vector>,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::R3 { .. } => 3,
            ProblemSpec::L2 { trunc_dim, .. } => *trunc_dim,
            ProblemSpec::Control { mesh, .. } => *mesh,
            ProblemSpec::Deblur { size, .. } => size * size,
        }
    }

    pub fn build(&self) -> Result<BuiltProblem> {
        match self {
            ProblemSpec::R3 { case } => Ok(BuiltProblem { problem: make_r3_problem(*case), control: None, reference: None }),
            ProblemSpec::L2 { case, trunc_dim } => {
                Ok(BuiltProblem { problem: make_l2_problem(*case, *trunc_dim)?, control: None, reference: None })
            }
            ProblemSpec::Control { mesh, inner_product, seed } => {
                let mut spec = p57_control_problem(*mesh);
                spec.inner_product = *inner_product;
                let mut problem = make_control_problem(&spec)?;
                if let Some(seed) = seed {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let mut draw = || Vector::from_raw((0..*mesh).map(|_| rng.gen_range(-1.0..=1.0)).collect());
                    let (z0, z1) = (draw(), draw());
                    problem = problem.with_initials(z0, z1)?;
                }
                Ok(BuiltProblem { problem, control: Some(spec), reference: None })
            }
            ProblemSpec::Deblur { size, kernel_size, blur_sigma, reg, boundary, noise, seed } => {
                let model = BlurModel::gaussian(*kernel_size, *blur_sigma, *size, *size, *boundary)?;
                let truth = synthetic_phantom(*size, *size);
                let mut observed = Vector::from_raw(model.apply(&truth));
                if *noise > 0.0 {
                    observed = add_gaussian_noise(&observed, *noise, *seed)?;
                }
                let problem = make_deblur_problem(&model, &observed, *reg)?;
                Ok(BuiltProblem { problem, control: None, reference: Some(truth) })
            }
        }
    }
}

/// One configured solver run inside an experiment.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub label: String,
    pub config: SolverConfig,
}

/// A problem, the runs to compare on it, and where results go.
///
/// `tol`, `max_iter` and `stopping` are shared by every run so the report
/// rows are comparable.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: ProblemSpec,
    pub runs: Vec<RunSpec>,
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    pub out: Option<PathBuf>,
    /// Also write each run's full iterate sequence.
    pub trace: bool,
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, problem: ProblemSpec) -> Self {
        ExperimentSpec {
            name: name.into(),
            problem,
            runs: Vec::new(),
            tol: 1e-6,
            max_iter: 1000,
            stopping: StoppingRule::Residual,
            out: None,
            trace: false,
        }
    }

    pub fn push(&mut self, label: impl Into<String>, config: SolverConfig) {
        self.runs.push(RunSpec { label: label.into(), config });
    }

    /// Each run's config with the shared stopping settings applied.
    pub fn effective_config(&self, run: &RunSpec) -> SolverConfig {
        let mut cfg = run.config.clone();
        cfg.tol = self.tol;
        cfg.max_iter = self.max_iter;
        cfg.stopping = self.stopping;
        cfg.keep_iterates = cfg.keep_iterates || self.trace;
        cfg
    }

    /// Problem-independent validation of every run; all violations are
    /// collected, prefixed with the run label.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for run in &self.runs {
            if !seen.insert(run.label.as_str()) {
                violations.push(format!("duplicate run label {:?}", run.label));
            }
            let report = self.effective_config(run).validate();
            violations.extend(report.violations.into_iter().map(|v| format!("[{}] {v}", run.label)));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(violations))
        }
    }

    /// Keeps only runs whose label or algorithm name is in `names`.
    pub fn retain_runs(&mut self, names: &[String]) {
        self.runs.retain(|r| names.iter().any(|n| *n == r.label || *n == r.config.algorithm.name()));
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_at<T>(line: usize, key: &str, value: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    f(value).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => err(line, format!("{key}: {other}")),
    })
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::usage(format!("not a nonnegative integer: {s:?}")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::usage(format!("not a boolean: {other:?}"))),
    }
}

/// `[a, b, ...]`, `zero`, `fill(v)` or `geometric(first, ratio)`.
pub fn parse_vector(text: &str, dim: usize) -> Result<Vector> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        let v = inner.split(',').map(parse_real).collect::<Result<Vec<_>>>()?;
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: v.len() });
        }
        return Vector::new(v);
    }
    if text == "zero" {
        return Ok(Vector::zeros(dim));
    }
    let (name, args) = split_call(text).ok_or_else(|| Error::usage(format!("cannot read vector {text:?}")))?;
    let nums = args.into_iter().map(parse_real).collect::<Result<Vec<_>>>()?;
    match (name, nums.as_slice()) {
        ("fill", [v]) => Ok(Vector::filled(dim, *v)),
        ("geometric", [a, r]) => Ok(Vector::geometric(dim, *a, *r)),
        _ => Err(Error::usage(format!("unknown vector form {text:?}"))),
    }
}

fn parse_case<T: Copy>(text: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(text.trim()))
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::usage(format!("unknown case {text:?}")))
}

/// `(line, key, value)`
type Entry = (usize, String, String);

fn build_problem(kind: &str, keys: &[Entry]) -> Result<ProblemSpec> {
    let get = |k: &str| keys.iter().rev().find(|(_, key, _)| key == k);
    let real = |k: &str, default: f64| -> Result<f64> {
        get(k).map_or(Ok(default), |(line, key, v)| parse_at(*line, key, v, parse_real))
    };
    let int = |k: &str, default: usize| -> Result<usize> {
        get(k).map_or(Ok(default), |(line, key, v)| parse_at(*line, key, v, parse_usize))
    };
    let case = get("case");
    match kind {
        "r3" => {
            let case = case.map_or(Ok(R3Case::Ia), |(line, key, v)| {
                parse_at(*line, key, v, |s| parse_case(s, &[("Ia", R3Case::Ia), ("Ib", R3Case::Ib)]))
            })?;
            Ok(ProblemSpec::R3 { case })
        }
        "l2" => {
            let options = [("IIa", SeqCase::IIa), ("IIb", SeqCase::IIb), ("IIc", SeqCase::IIc), ("IId", SeqCase::IId)];
            let case =
                case.map_or(Ok(SeqCase::IIa), |(line, key, v)| parse_at(*line, key, v, |s| parse_case(s, &options)))?;
            Ok(ProblemSpec::L2 { case, trunc_dim: int("trunc_dim", DEFAULT_TRUNC_DIM)? })
        }
        "control" => {
            let inner_product = match get("inner_product") {
                None => InnerProduct::MeshWeighted,
                Some((line, key, v)) => parse_at(*line, key, v, |s| {
                    parse_case(s, &[("weighted", InnerProduct::MeshWeighted), ("euclidean", InnerProduct::Euclidean)])
                })?,
            };
            let seed = get("seed").map(|(line, key, v)| parse_at(*line, key, v, parse_usize)).transpose()?;
            Ok(ProblemSpec::Control { mesh: int("mesh", 100)?, inner_product, seed: seed.map(|s| s as u64) })
        }
        "deblur" => {
            let boundary = match get("boundary") {
                None => Boundary::ZeroPad,
                Some((line, key, v)) => parse_at(*line, key, v, |s| {
                    parse_case(s, &[("zero", Boundary::ZeroPad), ("replicate", Boundary::Replicate)])
                })?,
            };
            Ok(ProblemSpec::Deblur {
                size: int("size", 32)?,
                kernel_size: int("kernel_size", 9)?,
                blur_sigma: real("blur_sigma", 4.0)?,
                reg: real("reg", 1.0)?,
                boundary,
                noise: real("noise", 0.0)?,
                seed: int("seed", 0)? as u64,
            })
        }
        other => Err(Error::usage(format!("unknown problem {other:?}"))),
    }
}

fn apply_run_key(cfg: &mut SolverConfig, key: &str, value: &str, dim: usize, theta_bound: &mut Option<f64>) -> Result<()> {
    let seq = |v: &str| SequenceSpec::from_str(v);
    match key {
        "algorithm" => cfg.algorithm = value.parse()?,
        "r_bar" => cfg.r_bar = parse_real(value)?,
        "beta_bar" => cfg.beta_bar = parse_real(value)?,
        "delta0" => cfg.delta0 = parse_real(value)?,
        "delta1" => cfg.delta1 = parse_real(value)?,
        "sigma" => cfg.sigma = seq(value)?,
        "c" => cfg.c = seq(value)?,
        "anchor" => cfg.anchor = Some(parse_vector(value, dim)?),
        "theta" => {
            cfg.inertia = match seq(value)? {
                SequenceSpec::Constant(t) => Inertia::Constant(t),
                theta => Inertia::Variable { theta, bound: theta_bound.unwrap_or(f64::NAN) },
            }
        }
        "theta_bound" => *theta_bound = Some(parse_real(value)?),
        "contraction" => {
            let (name, args) = split_call(value).ok_or_else(|| Error::usage(format!("cannot read contraction {value:?}")))?;
            let nums = args.into_iter().map(parse_real).collect::<Result<Vec<_>>>()?;
            cfg.contraction = Some(match (name, nums.as_slice()) {
                ("scale", [k]) => Contraction::scaled(*k),
                ("toward", [k]) => {
                    let center = cfg.anchor.clone().ok_or_else(|| Error::usage("toward(k) needs an anchor set first"))?;
                    Contraction::toward(center, *k)
                }
                ("constant", []) => {
                    Contraction::constant(cfg.anchor.clone().ok_or_else(|| Error::usage("constant() needs an anchor set first"))?)
                }
                _ => return Err(Error::usage(format!("unknown contraction {value:?}"))),
            });
        }
        "fixed_delta" => cfg.fixed_delta = Some(parse_real(value)?),
        "lambda" => cfg.step_sequence = Some(seq(value)?),
        "gamma" => cfg.reflected_step = Some(parse_real(value)?),
        other => return Err(Error::usage(format!("unknown run key {other:?}"))),
    }
    Ok(())
}

/// Applies one run key of the spec format to `cfg`, expanding vector forms to
/// `dim` entries. A `theta_bound` must follow the `theta` sequence it bounds.
pub fn set_run_key(cfg: &mut SolverConfig, key: &str, value: &str, dim: usize) -> Result<()> {
    if key == "theta_bound" {
        let b = parse_real(value)?;
        return match &mut cfg.inertia {
            Inertia::Variable { bound, .. } => {
                *bound = b;
                Ok(())
            }
            Inertia::Constant(_) => Err(Error::usage("theta_bound needs a theta sequence set first")),
        };
    }
    apply_run_key(cfg, key, value, dim, &mut None)
}

impl FromStr for ExperimentSpec {
    type Err = Error;

    /// Flat `key = value` lines. Keys before the first `[label]` header
    /// describe the experiment; each header starts a run. `#` begins a comment.
    fn from_str(text: &str) -> Result<Self> {
        let mut header: Vec<Entry> = Vec::new();
        let mut sections: Vec<(usize, String, Vec<Entry>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(label) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
                let label = label.trim();
                if label.is_empty() {
                    return Err(err(line, "empty run label"));
                }
                sections.push((line, label.to_string(), Vec::new()));
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(line, format!("expected key = value, got {content:?}")))?;
            let entry = (line, key.trim().to_string(), value.trim().to_string());
            match sections.last_mut() {
                Some((_, _, keys)) => keys.push(entry),
                None => header.push(entry),
            }
        }

        let get = |k: &str| header.iter().rev().find(|(_, key, _)| key == k);
        let (pline, _, kind) = get("problem").ok_or_else(|| err(1, "missing problem key"))?;
        let problem = parse_at(*pline, "problem", kind, |k| build_problem(k, &header))?;
        let name = get("name").map_or_else(|| "experiment".to_string(), |(_, _, v)| v.clone());
        let mut spec = ExperimentSpec::new(name, problem);
        for (line, key, value) in &header {
            match key.as_str() {
                "tol" => spec.tol = parse_at(*line, key, value, parse_real)?,
                "max_iter" => spec.max_iter = parse_at(*line, key, value, parse_usize)?,
                "stopping" => spec.stopping = parse_at(*line, key, value, StoppingRule::from_str)?,
                "out" => spec.out = Some(PathBuf::from(value)),
                "trace" => spec.trace = parse_at(*line, key, value, parse_bool)?,
                "name" | "problem" | "case" | "trunc_dim" | "mesh" | "inner_product" | "seed" | "size" | "kernel_size"
                | "blur_sigma" | "reg" | "boundary" | "noise" => {}
                other => return Err(err(*line, format!("unknown key {other:?}"))),
            }
        }

        let dim = spec.problem.dim();
        for (line, label, keys) in sections {
            let alg = keys
                .iter()
                .find(|(_, k, _)| k == "algorithm")
                .ok_or_else(|| err(line, format!("run [{label}] has no algorithm")))?;
            let algorithm = parse_at(alg.0, "algorithm", &alg.2, Algorithm::from_str)?;
            let mut cfg = SolverConfig::new(algorithm);
            let mut theta_bound = None;
            // anchor first so contractions can refer to it
            let mut ordered: Vec<_> = keys.iter().collect();
            ordered.sort_by_key(|(_, k, _)| (k != "anchor", k == "theta"));
            for (kline, key, value) in ordered {
                parse_at(*kline, key, value, |v| apply_run_key(&mut cfg, key, v, dim, &mut theta_bound))?;
            }
            if let Inertia::Variable { bound, .. } = &mut cfg.inertia {
                *bound = theta_bound.ok_or_else(|| err(line, format!("run [{label}] has a theta sequence but no theta_bound")))?;
            }
            spec.push(label, cfg);
        }
        Ok(spec)
    }
}
