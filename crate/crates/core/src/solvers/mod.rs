//! The iteration schemes and the driver that runs them to a stopping rule.
//!
//! Every scheme advances an [`IterationState`] holding the last two
//! iterates together with their cached images under `T`, so the anchored
//! family costs one forward evaluation and one resolvent call per step.

mod config;
mod steps;

use std::cell::Cell;
use std::time::Instant;

pub use config::{Algorithm, Contraction, Inertia, SolverConfig, StoppingRule};
pub use steps::{
    frab_fixed_step, frab_inertial_step, frab_step, frbsm_baseline_step, inertial_viscosity_step, rfbsm_baseline_step,
    step, viscosity_step,
};

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::space::{MonotoneMap, ResolventOp, Vector};
use crate::stepsize::StepSizeState;

/// Forward/backward operators with call counters.
pub struct Operators<'a> {
    map: &'a MonotoneMap,
    resolvent: &'a ResolventOp,
    forward_evals: Cell<usize>,
    backward_calls: Cell<usize>,
}

impl<'a> Operators<'a> {
    pub fn new(map: &'a MonotoneMap, resolvent: &'a ResolventOp) -> Self {
        Operators { map, resolvent, forward_evals: Cell::new(0), backward_calls: Cell::new(0) }
    }

    pub fn forward(&self, w: &Vector) -> Vector {
        self.forward_evals.set(self.forward_evals.get() + 1);
        self.map.eval(w)
    }

    pub fn backward(&self, a: &Vector, delta: f64) -> Vector {
        self.backward_calls.set(self.backward_calls.get() + 1);
        self.resolvent.resolve(a, delta)
    }

    pub fn map(&self) -> &MonotoneMap {
        self.map
    }

    pub fn forward_evals(&self) -> usize {
        self.forward_evals.get()
    }

    pub fn backward_calls(&self) -> usize {
        self.backward_calls.get()
    }
}

/// `(wₙ₋₁, wₙ)` with cached `(Twₙ₋₁, Twₙ)` and the step-size pair in use.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub w_prev: Vector,
    pub w_curr: Vector,
    pub tw_prev: Vector,
    pub tw_curr: Vector,
    pub step: StepSizeState,
    pub n: usize,
}

impl IterationState {
    /// Evaluates `T` at both starting points. Costs two forward evaluations.
    pub fn start(w0: Vector, w1: Vector, cfg: &SolverConfig, ops: &Operators) -> Result<Self> {
        w0.check_dim(&w1)?;
        let tw_prev = ops.forward(&w0);
        let tw_curr = ops.forward(&w1);
        Ok(IterationState { w_prev: w0, w_curr: w1, tw_prev, tw_curr, step: cfg.initial_step()?, n: 1 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Tolerance,
    MaxIter,
    NumericalFailure { iteration: usize, detail: String },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIter => "max_iter",
            Termination::NumericalFailure { .. } => "numerical_failure",
        }
    }
}

/// Per-iteration trace of one solver run. Entry `k` of every list refers to
/// the iterate produced by iteration `k + 1`.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub iterates: Option<Vec<Vector>>,
    pub residuals: Vec<f64>,
    pub distances: Option<Vec<f64>>,
    pub deltas: Vec<f64>,
    pub elapsed: Vec<f64>,
    pub iterations: usize,
    pub terminated_by: Termination,
    pub wall_time: f64,
    pub operator_eval_count: usize,
    pub resolvent_call_count: usize,
    pub final_iterate: Vector,
}

impl RunRecord {
    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.distances.as_ref().and_then(|d| d.last().copied())
    }

    /// Turns a numerical-failure termination into an error.
    pub fn into_result(self) -> Result<RunRecord> {
        match &self.terminated_by {
            Termination::NumericalFailure { iteration, detail } => {
                Err(Error::NumericalFailure { iteration: *iteration, detail: detail.clone() })
            }
            _ => Ok(self),
        }
    }
}

/// `½‖w − J₁(w − Tw)‖²`.
pub fn residual(w: &Vector, map: &MonotoneMap, resolvent: &ResolventOp) -> f64 {
    residual_weighted(w, &map.eval(w), resolvent, 1.0)
}

pub(crate) fn residual_weighted(w: &Vector, tw: &Vector, resolvent: &ResolventOp, weight: f64) -> f64 {
    let fb = resolvent.resolve(&w.sub(tw), 1.0);
    let d = w.dist(&fb);
    0.5 * weight * d * d
}

/// Runs `cfg.algorithm` on `problem` until the stopping rule is met or
/// `cfg.max_iter` iterations have been taken.
///
/// Configuration errors are returned as `Err`. A NaN/Inf during the run
/// ends it with [`Termination::NumericalFailure`] and the partial trace.
pub fn run(problem: &Problem, cfg: &SolverConfig) -> Result<RunRecord> {
    cfg.validate_for(problem)?;
    let (w0, w1) = match &cfg.initials {
        Some((a, b)) => (a.clone(), b.clone()),
        None => problem.default_initials.clone(),
    };
    problem.check_dim(&w0)?;
    problem.check_dim(&w1)?;
    if cfg.stopping == StoppingRule::DistanceToSolution && problem.known_solution.is_none() {
        return Err(Error::usage(format!("problem {:?} has no known solution for distance stopping", problem.label)));
    }

    let ops = Operators::new(&problem.map, &problem.resolvent);
    let started = Instant::now();
    let mut state = IterationState::start(w0, w1, cfg, &ops)?;
    let track_dist = problem.known_solution.is_some();
    let mut record = RunRecord {
        algorithm: cfg.algorithm,
        iterates: cfg.keep_iterates.then(Vec::new),
        residuals: Vec::new(),
        distances: track_dist.then(Vec::new),
        deltas: Vec::new(),
        elapsed: Vec::new(),
        iterations: 0,
        terminated_by: Termination::MaxIter,
        wall_time: 0.0,
        operator_eval_count: 0,
        resolvent_call_count: 0,
        final_iterate: state.w_curr.clone(),
    };

    while record.iterations < cfg.max_iter {
        let delta_used = cfg.resolvent_step(&state);
        let next = match step(&state, cfg, &ops) {
            Ok(next) => next,
            Err(Error::NumericalFailure { iteration, detail }) => {
                record.terminated_by = Termination::NumericalFailure { iteration, detail };
                break;
            }
            Err(e) => return Err(e),
        };
        state = next;
        record.iterations += 1;

        let tol = residual_weighted(&state.w_curr, &state.tw_curr, &problem.resolvent, problem.metric_weight);
        let dist = problem.distance_to_solution(&state.w_curr);
        record.residuals.push(tol);
        record.deltas.push(delta_used);
        record.elapsed.push(started.elapsed().as_secs_f64());
        if let (Some(ds), Some(d)) = (record.distances.as_mut(), dist) {
            ds.push(d);
        }
        if let Some(its) = record.iterates.as_mut() {
            its.push(state.w_curr.clone());
        }

        let measure = match cfg.stopping {
            StoppingRule::Residual => tol,
            StoppingRule::DistanceToSolution => 0.5 * dist.unwrap_or(f64::INFINITY).powi(2),
        };
        if measure < cfg.tol {
            record.terminated_by = Termination::Tolerance;
            break;
        }
    }

    record.wall_time = started.elapsed().as_secs_f64();
    record.operator_eval_count = ops.forward_evals();
    record.resolvent_call_count = ops.backward_calls();
    record.final_iterate = state.w_curr;
    Ok(record)
}
