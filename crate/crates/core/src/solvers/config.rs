use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::space::Vector;
use crate::stepsize::{validate_parameters, SequenceSpec, StepSizeState, ValidationReport};

use super::IterationState;

/// Number of leading sequence terms inspected by validation.
const SEQUENCE_PROBE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Anchored forward-reflected-backward with the adaptive step.
    FrabAdaptive,
    /// Same recursion with a constant step `δ̄ < 1/(2L)`.
    FrabFixed,
    /// Adaptive scheme with constant inertia `θ̄`.
    FrabInertial,
    /// Adaptive scheme with nondecreasing inertia `θₙ ≤ θ̄`.
    FrabInertialVariable,
    /// Anchor replaced by a contraction `U(wₙ)`.
    Viscosity,
    InertialViscosity,
    /// Forward-reflected-backward with a step sequence `λₙ`.
    FrbsmBaseline,
    /// Reflected forward-backward with a constant step `γ`.
    RfbsmBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::FrabAdaptive,
        Algorithm::FrabFixed,
        Algorithm::FrabInertial,
        Algorithm::FrabInertialVariable,
        Algorithm::Viscosity,
        Algorithm::InertialViscosity,
        Algorithm::FrbsmBaseline,
        Algorithm::RfbsmBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FrabAdaptive => "frab-adaptive",
            Algorithm::FrabFixed => "frab-fixed",
            Algorithm::FrabInertial => "frab-inertial",
            Algorithm::FrabInertialVariable => "frab-inertial-variable",
            Algorithm::Viscosity => "viscosity",
            Algorithm::InertialViscosity => "inertial-viscosity",
            Algorithm::FrbsmBaseline => "frbsm",
            Algorithm::RfbsmBaseline => "rfbsm",
        }
    }

    /// Schemes that use the adaptive step-size recurrence.
    pub fn is_adaptive(self) -> bool {
        matches!(
            self,
            Algorithm::FrabAdaptive
                | Algorithm::FrabInertial
                | Algorithm::FrabInertialVariable
                | Algorithm::Viscosity
                | Algorithm::InertialViscosity
        )
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Algorithm::FrbsmBaseline | Algorithm::RfbsmBaseline)
    }

    fn uses_anchor(self) -> bool {
        matches!(
            self,
            Algorithm::FrabAdaptive | Algorithm::FrabFixed | Algorithm::FrabInertial | Algorithm::FrabInertialVariable
        )
    }

    fn uses_contraction(self) -> bool {
        matches!(self, Algorithm::Viscosity | Algorithm::InertialViscosity)
    }

    fn uses_inertia(self) -> bool {
        matches!(self, Algorithm::FrabInertial | Algorithm::FrabInertialVariable | Algorithm::InertialViscosity)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::usage(format!("unknown algorithm {s:?}")))
    }
}

/// Inertial extrapolation weight.
#[derive(Debug, Clone, PartialEq)]
pub enum Inertia {
    Constant(f64),
    /// `θₙ` nondecreasing with `θₙ ≤ bound`.
    Variable { theta: SequenceSpec, bound: f64 },
}

impl Inertia {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Inertia::Constant(t) => *t,
            Inertia::Variable { theta, .. } => theta.at(n),
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            Inertia::Constant(t) => *t,
            Inertia::Variable { bound, .. } => *bound,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Inertia::Constant(t) if *t == 0.0)
    }
}

type ContractionFn = dyn Fn(&Vector) -> Vector + Send + Sync;

/// A contraction `U` with constant `κ̄`, used in place of a fixed anchor.
#[derive(Clone)]
pub struct Contraction {
    map: Arc<ContractionFn>,
    pub kappa: f64,
    pub label: String,
}

impl Contraction {
    pub fn new(kappa: f64, label: impl Into<String>, map: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        Contraction { map: Arc::new(map), kappa, label: label.into() }
    }

    /// `U(w) = point`, a 0-contraction.
    pub fn constant(point: Vector) -> Self {
        Contraction::new(0.0, "constant", move |_| point.clone())
    }

    /// `U(w) = k·w`.
    pub fn scaled(k: f64) -> Self {
        Contraction::new(k.abs(), format!("scale({k})"), move |w| w.scale(k))
    }

    /// `U(w) = center + k·(w − center)`.
    pub fn toward(center: Vector, k: f64) -> Self {
        Contraction::new(k.abs(), format!("toward({k})"), move |w| center.axpy(k, &w.sub(&center)))
    }

    pub fn apply(&self, w: &Vector) -> Vector {
        (self.map)(w)
    }
}

impl fmt::Debug for Contraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contraction").field("kappa", &self.kappa).field("label", &self.label).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingRule {
    /// Natural residual `½‖w − J₁(w − Tw)‖² < tol`.
    Residual,
    /// `½‖w − w*‖² < tol`; needs a known solution.
    DistanceToSolution,
}

impl FromStr for StoppingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "residual" => Ok(StoppingRule::Residual),
            "distance" => Ok(StoppingRule::DistanceToSolution),
            other => Err(Error::usage(format!("unknown stopping rule {other:?}"))),
        }
    }
}

impl fmt::Display for StoppingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoppingRule::Residual => "residual",
            StoppingRule::DistanceToSolution => "distance",
        })
    }
}

/// Every tunable of every scheme. Fields a scheme does not use are ignored
/// by it; [`SolverConfig::validate`] checks only the selected scheme's set.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub r_bar: f64,
    pub beta_bar: f64,
    pub delta0: f64,
    pub delta1: f64,
    /// Anchoring coefficients `σₙ`.
    pub sigma: SequenceSpec,
    /// Step-size allowance `cₙ`.
    pub c: SequenceSpec,
    /// Anchor `v̂`.
    pub anchor: Option<Vector>,
    pub inertia: Inertia,
    pub contraction: Option<Contraction>,
    /// Constant step `δ̄` of the fixed-step scheme.
    pub fixed_delta: Option<f64>,
    /// FRBSM step sequence `λₙ`.
    pub step_sequence: Option<SequenceSpec>,
    /// RFBSM constant step `γ`.
    pub reflected_step: Option<f64>,
    /// Overrides the problem's default `(w₀, w₁)`.
    pub initials: Option<(Vector, Vector)>,
    pub max_iter: usize,
    pub tol: f64,
    pub stopping: StoppingRule,
    pub keep_iterates: bool,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            r_bar: 0.3,
            beta_bar: 0.1,
            delta0: 0.1,
            delta1: 0.3,
            sigma: SequenceSpec::Rational { a: 0.005, b: 3.0, c: 25000.0 },
            c: SequenceSpec::InverseQuadratic { a: 1.0, b: 1.0 },
            anchor: None,
            inertia: Inertia::Constant(0.0),
            contraction: None,
            fixed_delta: None,
            step_sequence: None,
            reflected_step: None,
            initials: None,
            max_iter: 1000,
            tol: 1e-6,
            stopping: StoppingRule::Residual,
            keep_iterates: false,
        }
    }

    /// Problem-independent checks for the selected scheme.
    pub fn validate(&self) -> ValidationReport {
        let alg = self.algorithm;
        let mut report = if alg.is_adaptive() {
            let theta_bar = if alg.uses_inertia() { self.inertia.bound() } else { 0.0 };
            let kappa_bar = self.contraction.as_ref().filter(|_| alg.uses_contraction()).map_or(0.0, |u| u.kappa);
            validate_parameters(self.r_bar, self.beta_bar, theta_bar, kappa_bar)
        } else {
            ValidationReport::default()
        };
        let v = &mut report.violations;

        if alg.is_adaptive() {
            if !(self.delta0 > 0.0 && self.delta1 > 0.0) {
                v.push(format!("delta0 = {}, delta1 = {} must be positive", self.delta0, self.delta1));
            }
            self.c.check_summable_nonneg("c", SEQUENCE_PROBE, v);
        }
        if !alg.is_baseline() {
            self.sigma.check_open_unit("sigma", SEQUENCE_PROBE, v);
        }
        if alg.uses_anchor() && self.anchor.is_none() {
            v.push(format!("{alg} requires an anchor"));
        }
        if alg.uses_contraction() && self.contraction.is_none() {
            v.push(format!("{alg} requires a contraction"));
        }
        if !alg.uses_inertia() && !self.inertia.is_zero() {
            v.push(format!("{alg} takes no inertia; set theta to 0"));
        }
        match (alg, &self.inertia) {
            (Algorithm::FrabInertial, Inertia::Variable { .. }) => {
                v.push("frab-inertial takes a constant theta; use frab-inertial-variable".into())
            }
            (Algorithm::FrabInertialVariable, Inertia::Constant(_)) => {
                v.push("frab-inertial-variable needs a theta sequence with a bound".into())
            }
            (_, Inertia::Variable { theta, bound }) if alg.uses_inertia() => {
                let mut prev = 0.0;
                for n in 1..=SEQUENCE_PROBE {
                    let t = theta.at(n);
                    if !(t >= prev && t <= *bound) {
                        v.push(format!("theta_{n} = {t} breaks 0 <= theta_(n-1) <= theta_n <= {bound}"));
                        break;
                    }
                    prev = t;
                }
            }
            _ => {}
        }
        match alg {
            Algorithm::FrabFixed => match self.fixed_delta {
                Some(d) if d > 0.0 && d.is_finite() => {}
                Some(d) => v.push(format!("fixed_delta = {d} must be positive")),
                None => v.push("frab-fixed requires fixed_delta".into()),
            },
            Algorithm::FrbsmBaseline => match &self.step_sequence {
                Some(seq) => seq.check_positive("lambda", SEQUENCE_PROBE, v),
                None => v.push("frbsm requires a step sequence lambda".into()),
            },
            Algorithm::RfbsmBaseline => match self.reflected_step {
                Some(g) if g > 0.0 && g.is_finite() => {}
                Some(g) => v.push(format!("gamma = {g} must be positive")),
                None => v.push("rfbsm requires gamma".into()),
            },
            _ => {}
        }
        if !(self.tol > 0.0) {
            v.push(format!("tol = {} must be positive", self.tol));
        }
        report
    }

    /// [`validate`](Self::validate) plus the checks that need the problem.
    pub fn validate_for(&self, problem: &Problem) -> Result<()> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidConfig(report.violations));
        }
        if self.algorithm.uses_anchor() {
            if let Some(a) = &self.anchor {
                problem.check_dim(a)?;
            }
        }
        if self.algorithm == Algorithm::FrabFixed {
            let l = problem
                .map
                .lipschitz()
                .ok_or_else(|| Error::usage("frab-fixed needs a Lipschitz constant on the problem's map"))?;
            let d = self.fixed_delta.unwrap_or_default();
            if l > 0.0 && d >= 1.0 / (2.0 * l) {
                return Err(Error::InvalidConfig(vec![format!(
                    "fixed_delta = {d} must be below 1/(2L) = {}",
                    1.0 / (2.0 * l)
                )]));
            }
        }
        Ok(())
    }

    pub(crate) fn initial_step(&self) -> Result<StepSizeState> {
        match self.algorithm {
            Algorithm::FrabFixed => {
                let d = self.fixed_delta.ok_or_else(|| Error::usage("frab-fixed requires fixed_delta"))?;
                StepSizeState::new(d, d)
            }
            Algorithm::FrbsmBaseline => {
                let seq = self.step_sequence.as_ref().ok_or_else(|| Error::usage("frbsm requires lambda"))?;
                StepSizeState::new(seq.at(0), seq.at(1))
            }
            Algorithm::RfbsmBaseline => {
                let g = self.reflected_step.ok_or_else(|| Error::usage("rfbsm requires gamma"))?;
                StepSizeState::new(g, g)
            }
            _ => StepSizeState::new(self.delta0, self.delta1),
        }
    }

    /// The resolvent parameter the next step from `state` will use.
    pub(crate) fn resolvent_step(&self, state: &IterationState) -> f64 {
        state.step.delta_curr
    }
}
