use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::space::Vector;
use crate::stepsize::update_step;

use super::{Algorithm, IterationState, Operators, SolverConfig};

fn numerical(n: usize, what: &str) -> Error {
    Error::NumericalFailure { iteration: n, detail: format!("non-finite {what}") }
}

/// `wₙ + θ(wₙ − wₙ₋₁)`, borrowed unchanged when `θ = 0`.
fn extrapolate(state: &IterationState, theta: f64) -> Cow<'_, Vector> {
    if theta == 0.0 {
        Cow::Borrowed(&state.w_curr)
    } else {
        Cow::Owned(state.w_curr.axpy(theta, &state.w_curr.sub(&state.w_prev)))
    }
}

/// Shared anchored update
///
/// ```text
/// arg   = σ·a + (1 − σ)·b − δₙ·Twₙ − δₙ₋₁·ρ·(Twₙ − Twₙ₋₁)
/// wₙ₊₁  = J_{δₙ}(arg)
/// ```
///
/// followed by one evaluation of `T` at `wₙ₊₁` and the step-size update
/// (adaptive) or a constant shift (fixed).
fn anchored_update(
    state: &IterationState,
    cfg: &SolverConfig,
    ops: &Operators,
    anchor: &Vector,
    base: &Vector,
    reflect: f64,
) -> Result<IterationState> {
    let n = state.n;
    let sigma = cfg.sigma.at(n);
    let dn = state.step.delta_curr;
    let dp = state.step.delta_prev;
    let dim = state.w_curr.dim();
    for v in [anchor, base] {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: v.dim() });
        }
    }

    let lag = dp * reflect;
    let arg: Vec<f64> = (0..dim)
        .map(|i| {
            sigma * anchor[i] + (1.0 - sigma) * base[i] - dn * state.tw_curr[i] - lag * (state.tw_curr[i] - state.tw_prev[i])
        })
        .collect();
    let arg = Vector::from_raw(arg);
    if !arg.is_finite() {
        return Err(numerical(n, "resolvent argument"));
    }
    let w_next = ops.backward(&arg, dn);
    if !w_next.is_finite() {
        return Err(numerical(n, "iterate"));
    }
    let tw_next = ops.forward(&w_next);

    let step = if cfg.algorithm.is_adaptive() {
        update_step(state.step, cfg.r_bar, cfg.c.at(n), &state.w_curr, &w_next, &state.tw_curr, &tw_next)?
    } else {
        state.step.advance(dn)
    };
    Ok(IterationState {
        w_prev: state.w_curr.clone(),
        w_curr: w_next,
        tw_prev: state.tw_curr.clone(),
        tw_curr: tw_next,
        step,
        n: n + 1,
    })
}

fn anchor_of(cfg: &SolverConfig) -> Result<&Vector> {
    cfg.anchor.as_ref().ok_or_else(|| Error::usage(format!("{} requires an anchor", cfg.algorithm)))
}

/// Anchored forward-reflected-backward step with the adaptive step size:
/// `wₙ₊₁ = J_{δₙ}(σₙv̂ + (1−σₙ)wₙ − δₙTwₙ − δₙ₋₁(1−σₙ)(Twₙ − Twₙ₋₁))`.
pub fn frab_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let sigma = cfg.sigma.at(state.n);
    anchored_update(state, cfg, ops, anchor_of(cfg)?, &state.w_curr, 1.0 - sigma)
}

/// Same recursion with `δₙ₋₁ = δₙ = δ̄`; the state's step pair is held
/// constant at `δ̄` by [`SolverConfig`]'s initial step.
pub fn frab_fixed_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    if ops.map().lipschitz().is_none() {
        return Err(Error::usage("frab-fixed needs a Lipschitz constant on the map"));
    }
    let sigma = cfg.sigma.at(state.n);
    anchored_update(state, cfg, ops, anchor_of(cfg)?, &state.w_curr, 1.0 - sigma)
}

/// Inertial variant: the base point becomes `wₙ + θₙ(wₙ − wₙ₋₁)` (constant
/// or nondecreasing `θₙ`).
pub fn frab_inertial_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let sigma = cfg.sigma.at(state.n);
    let base = extrapolate(state, cfg.inertia.at(state.n));
    anchored_update(state, cfg, ops, anchor_of(cfg)?, &base, 1.0 - sigma)
}

fn viscosity_terms(state: &IterationState, cfg: &SolverConfig) -> Result<(Vector, f64)> {
    let u = cfg
        .contraction
        .as_ref()
        .ok_or_else(|| Error::usage(format!("{} requires a contraction", cfg.algorithm)))?;
    let sigma = cfg.sigma.at(state.n);
    Ok((u.apply(&state.w_curr), 1.0 - sigma * (1.0 - 2.0 * u.kappa)))
}

/// Viscosity variant: anchor `U(wₙ)` and reflected weight `1 − σₙ(1 − 2κ̄)`.
pub fn viscosity_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let (anchor, reflect) = viscosity_terms(state, cfg)?;
    anchored_update(state, cfg, ops, &anchor, &state.w_curr, reflect)
}

pub fn inertial_viscosity_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let (anchor, reflect) = viscosity_terms(state, cfg)?;
    let base = extrapolate(state, cfg.inertia.at(state.n));
    anchored_update(state, cfg, ops, &anchor, &base, reflect)
}

/// `wₙ₊₁ = J_{λₙ}(wₙ − λₙTwₙ − λₙ₋₁(Twₙ − Twₙ₋₁))`.
pub fn frbsm_baseline_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let n = state.n;
    let lambda = cfg.step_sequence.as_ref().ok_or_else(|| Error::usage("frbsm requires lambda"))?;
    let ln = state.step.delta_curr;
    let lp = state.step.delta_prev;
    let arg: Vec<f64> = (0..state.w_curr.dim())
        .map(|i| state.w_curr[i] - ln * state.tw_curr[i] - lp * (state.tw_curr[i] - state.tw_prev[i]))
        .collect();
    let arg = Vector::from_raw(arg);
    if !arg.is_finite() {
        return Err(numerical(n, "resolvent argument"));
    }
    let w_next = ops.backward(&arg, ln);
    if !w_next.is_finite() {
        return Err(numerical(n, "iterate"));
    }
    let tw_next = ops.forward(&w_next);
    Ok(IterationState {
        w_prev: state.w_curr.clone(),
        w_curr: w_next,
        tw_prev: state.tw_curr.clone(),
        tw_curr: tw_next,
        step: state.step.advance(lambda.at(n + 1)),
        n: n + 1,
    })
}

/// `wₙ₊₁ = J_γ(wₙ − γ·T(2wₙ − wₙ₋₁))`. The state still caches `Twₙ₊₁`, so
/// this scheme spends a second evaluation per step on monitoring.
pub fn rfbsm_baseline_step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    let n = state.n;
    let gamma = cfg.reflected_step.ok_or_else(|| Error::usage("rfbsm requires gamma"))?;
    let reflected = state.w_curr.scale(2.0).axpy(-1.0, &state.w_prev);
    let t_ref = ops.forward(&reflected);
    let arg = state.w_curr.axpy(-gamma, &t_ref);
    if !arg.is_finite() {
        return Err(numerical(n, "resolvent argument"));
    }
    let w_next = ops.backward(&arg, gamma);
    if !w_next.is_finite() {
        return Err(numerical(n, "iterate"));
    }
    let tw_next = ops.forward(&w_next);
    Ok(IterationState {
        w_prev: state.w_curr.clone(),
        w_curr: w_next,
        tw_prev: state.tw_curr.clone(),
        tw_curr: tw_next,
        step: state.step.advance(gamma),
        n: n + 1,
    })
}

/// Dispatches on `cfg.algorithm`.
pub fn step(state: &IterationState, cfg: &SolverConfig, ops: &Operators) -> Result<IterationState> {
    match cfg.algorithm {
        Algorithm::FrabAdaptive => frab_step(state, cfg, ops),
        Algorithm::FrabFixed => frab_fixed_step(state, cfg, ops),
        Algorithm::FrabInertial | Algorithm::FrabInertialVariable => frab_inertial_step(state, cfg, ops),
        Algorithm::Viscosity => viscosity_step(state, cfg, ops),
        Algorithm::InertialViscosity => inertial_viscosity_step(state, cfg, ops),
        Algorithm::FrbsmBaseline => frbsm_baseline_step(state, cfg, ops),
        Algorithm::RfbsmBaseline => rfbsm_baseline_step(state, cfg, ops),
    }
}
