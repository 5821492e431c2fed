//! Benchmark problems: each one packages a monotone map `T`, the resolvent
//! of `S`, default starting points and, when known, a zero of `S + T`.

mod control;
mod deblur;
pub mod image;
mod r3;
mod seqspace;

pub use control::{make_control_problem, p57_control_problem, ControlProblem, ControlSolution, InnerProduct};
pub use deblur::{add_gaussian_noise, make_deblur_problem, snr, synthetic_phantom, BlurModel, Boundary};
pub use r3::{make_r3_problem, R3Case};
pub use seqspace::{l2_anchor, make_l2_problem, SeqCase, DEFAULT_TRUNC_DIM};

use crate::error::{Error, Result};
use crate::solvers::residual_weighted;
use crate::space::{MonotoneMap, ResolventOp, Vector};

#[derive(Debug, Clone)]
pub struct Problem {
    pub label: String,
    pub map: MonotoneMap,
    pub resolvent: ResolventOp,
    pub dim: usize,
    pub known_solution: Option<Vector>,
    pub default_initials: (Vector, Vector),
    /// Uniform weight on the inner product (`⟨a, b⟩_W = weight·Σ aᵢbᵢ`).
    pub metric_weight: f64,
}

impl Problem {
    pub fn new(label: impl Into<String>, map: MonotoneMap, resolvent: ResolventOp, initials: (Vector, Vector)) -> Result<Self> {
        initials.0.check_dim(&initials.1)?;
        Ok(Problem {
            label: label.into(),
            map,
            resolvent,
            dim: initials.0.dim(),
            known_solution: None,
            default_initials: initials,
            metric_weight: 1.0,
        })
    }

    pub fn with_solution(mut self, solution: Vector) -> Result<Self> {
        self.check_dim(&solution)?;
        self.known_solution = Some(solution);
        Ok(self)
    }

    pub fn with_initials(mut self, w0: Vector, w1: Vector) -> Result<Self> {
        self.check_dim(&w0)?;
        self.check_dim(&w1)?;
        self.default_initials = (w0, w1);
        Ok(self)
    }

    pub fn with_metric_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::usage(format!("metric weight must be positive, got {weight}")));
        }
        self.metric_weight = weight;
        Ok(self)
    }

    pub(crate) fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, actual: v.dim() })
        }
    }

    /// Natural residual `½‖w − J₁(w − Tw)‖²` in this problem's metric.
    pub fn residual(&self, w: &Vector) -> f64 {
        let tw = self.map.eval(w);
        residual_weighted(w, &tw, &self.resolvent, self.metric_weight)
    }

    /// `‖w − w*‖` in this problem's metric, when a solution is known.
    pub fn distance_to_solution(&self, w: &Vector) -> Option<f64> {
        self.known_solution.as_ref().map(|s| self.metric_weight.sqrt() * w.dist(s))
    }
}

/// Lipschitz constant of an affine map `T(w) = Gw + b`, by power iteration
/// on `w ↦ T(w) − T(0)`.
pub(crate) fn estimate_affine_lipschitz(map: &MonotoneMap, dim: usize) -> f64 {
    let origin = map.eval(&Vector::zeros(dim));
    let mut x = Vector::filled(dim, 1.0 / (dim as f64).sqrt());
    let mut l = 0.0;
    for _ in 0..50 {
        let y = map.eval(&x).sub(&origin);
        l = y.norm();
        if l == 0.0 || !l.is_finite() {
            break;
        }
        x = y.scale(1.0 / l);
    }
    l
}
