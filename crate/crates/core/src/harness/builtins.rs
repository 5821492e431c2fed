use crate::problems::{InnerProduct, R3Case, SeqCase, DEFAULT_TRUNC_DIM};
use crate::solvers::{Algorithm, Contraction, Inertia, SolverConfig, StoppingRule};
use crate::space::Vector;
use crate::stepsize::SequenceSpec;

use super::{ExperimentSpec, ProblemSpec};

pub const BUILTINS: [&str; 9] = [
    "ae1-case-ia",
    "ae1-case-ib",
    "ex2-case-iia",
    "ex2-case-iib",
    "ex2-case-iic",
    "ex2-case-iid",
    "ocp-p57",
    "deblur-32",
    "r3-all-variants",
];

/// Halpern weights shared by most benchmarks: `0.005/(3n + 25000)`.
fn slow_sigma() -> SequenceSpec {
    SequenceSpec::Rational { a: 0.005, b: 3.0, c: 25000.0 }
}

fn adaptive(alg: Algorithm, anchor: Vector, delta0: f64, delta1: f64, r_bar: f64, c: SequenceSpec) -> SolverConfig {
    let mut cfg = SolverConfig::new(alg);
    cfg.anchor = Some(anchor);
    cfg.delta0 = delta0;
    cfg.delta1 = delta1;
    cfg.r_bar = r_bar;
    cfg.sigma = slow_sigma();
    cfg.c = c;
    cfg
}

fn frbsm(lambda: SequenceSpec) -> SolverConfig {
    let mut cfg = SolverConfig::new(Algorithm::FrbsmBaseline);
    cfg.step_sequence = Some(lambda);
    cfg
}

fn rfbsm(gamma: f64) -> SolverConfig {
    let mut cfg = SolverConfig::new(Algorithm::RfbsmBaseline);
    cfg.reflected_step = Some(gamma);
    cfg
}

fn r3_anchor() -> Vector {
    Vector::from_raw(vec![2.0, 1.0, -6.0])
}

fn r3_adaptive(alg: Algorithm) -> SolverConfig {
    adaptive(alg, r3_anchor(), 0.1, 0.3, 0.3, SequenceSpec::InverseQuadratic { a: 1.0, b: 1.0 })
}

fn r3_experiment(name: &str, case: R3Case) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(name, ProblemSpec::R3 { case });
    spec.tol = 1e-10;
    spec.stopping = StoppingRule::DistanceToSolution;
    spec.push("alg3.2", r3_adaptive(Algorithm::FrabAdaptive));
    let mut inertial = r3_adaptive(Algorithm::FrabInertial);
    inertial.inertia = Inertia::Constant(0.04);
    spec.push("alg4.1", inertial);
    spec.push("frbsm", frbsm(SequenceSpec::Fractional { a: 1.0, b: 1.0, c: 15.0, d: 10.0 }));
    spec.push("rfbsm", rfbsm(0.075));
    spec
}

fn l2_experiment(name: &str, case: SeqCase) -> ExperimentSpec {
    let dim = DEFAULT_TRUNC_DIM;
    let mut spec = ExperimentSpec::new(name, ProblemSpec::L2 { case, trunc_dim: dim });
    spec.tol = 1e-8;
    spec.max_iter = 5000;
    let base = |alg| {
        adaptive(alg, Vector::geometric(dim, 1.5, -0.5), 1.0 / 101.0, 2.0 / 201.0, 0.15, SequenceSpec::InverseSquare {
            a: 10.0,
            b: 77.0,
        })
    };
    spec.push("alg3.2", base(Algorithm::FrabAdaptive));
    let mut inertial = base(Algorithm::FrabInertial);
    inertial.inertia = Inertia::Constant(0.04);
    spec.push("alg4.1", inertial);
    spec.push("frbsm", frbsm(SequenceSpec::Fractional { a: 1.0, b: 1.0, c: 100.0, d: 101.0 }));
    spec.push("rfbsm", rfbsm(2.0 / 201.0));
    spec
}

fn control_experiment() -> ExperimentSpec {
    let mesh = 100;
    let problem = ProblemSpec::Control { mesh, inner_product: InnerProduct::Euclidean, seed: Some(1) };
    let mut spec = ExperimentSpec::new("ocp-p57", problem);
    spec.tol = 1e-4;
    spec.max_iter = 20_000;
    let base = |alg| adaptive(alg, Vector::zeros(mesh), 0.1, 0.3, 0.3, SequenceSpec::InverseQuadratic { a: 1.0, b: 1.0 });
    spec.push("alg3.2", base(Algorithm::FrabAdaptive));
    let mut inertial = base(Algorithm::FrabInertial);
    inertial.inertia = Inertia::Constant(0.04);
    spec.push("alg4.1", inertial);
    spec.push("frbsm", frbsm(SequenceSpec::Fractional { a: 1.0, b: 1.0, c: 15.0, d: 10.0 }));
    spec.push("rfbsm", rfbsm(0.075));
    spec
}

fn deblur_experiment() -> ExperimentSpec {
    let size = 32;
    let problem = ProblemSpec::Deblur {
        size,
        kernel_size: 9,
        blur_sigma: 4.0,
        reg: 1.0,
        boundary: Default::default(),
        noise: 0.0,
        seed: 0,
    };
    let mut spec = ExperimentSpec::new("deblur-32", problem);
    // fixed budget: the tolerance is never reached
    spec.tol = 1e-300;
    spec.max_iter = 500;
    let mut alg = adaptive(
        Algorithm::FrabAdaptive,
        Vector::filled(size * size, 2.0),
        0.01,
        0.3,
        0.3,
        SequenceSpec::InverseSquare { a: 1.0, b: 100.0 },
    );
    alg.sigma = SequenceSpec::Rational { a: 1.0, b: 1.0, c: 250.0 };
    let mut inertial = alg.clone();
    inertial.algorithm = Algorithm::FrabInertial;
    inertial.inertia = Inertia::Constant(5e-7);
    spec.push("alg3.2", alg);
    spec.push("alg4.1", inertial);
    spec.push("frbsm", frbsm(SequenceSpec::Fractional { a: 2.0, b: 1.0, c: 111.0, d: 100.0 }));
    spec.push("rfbsm", rfbsm(0.01));
    spec
}

fn all_variants() -> ExperimentSpec {
    let mut spec = ExperimentSpec::new("r3-all-variants", ProblemSpec::R3 { case: R3Case::Ia });
    spec.tol = 1e-10;
    spec.max_iter = 2000;
    spec.push("frab-adaptive", r3_adaptive(Algorithm::FrabAdaptive));
    let mut fixed = r3_adaptive(Algorithm::FrabFixed);
    fixed.fixed_delta = Some(0.2);
    spec.push("frab-fixed", fixed);
    let mut inertial = r3_adaptive(Algorithm::FrabInertial);
    inertial.inertia = Inertia::Constant(0.04);
    spec.push("frab-inertial", inertial);
    let mut variable = r3_adaptive(Algorithm::FrabInertialVariable);
    variable.inertia =
        Inertia::Variable { theta: SequenceSpec::Fractional { a: 0.04, b: 0.0, c: 1.0, d: 1.0 }, bound: 0.04 };
    spec.push("frab-inertial-variable", variable);
    let mut visc = r3_adaptive(Algorithm::Viscosity);
    visc.contraction = Some(Contraction::toward(r3_anchor(), 0.4));
    spec.push("viscosity", visc);
    let mut ivisc = r3_adaptive(Algorithm::InertialViscosity);
    ivisc.contraction = Some(Contraction::scaled(0.3));
    ivisc.inertia = Inertia::Constant(0.04);
    spec.push("inertial-viscosity", ivisc);
    spec.push("frbsm", frbsm(SequenceSpec::Fractional { a: 1.0, b: 1.0, c: 15.0, d: 10.0 }));
    spec.push("rfbsm", rfbsm(0.075));
    spec
}

/// The named preset experiments.
pub fn builtin(name: &str) -> Option<ExperimentSpec> {
    Some(match name {
        "ae1-case-ia" => r3_experiment(name, R3Case::Ia),
        "ae1-case-ib" => r3_experiment(name, R3Case::Ib),
        "ex2-case-iia" => l2_experiment(name, SeqCase::IIa),
        "ex2-case-iib" => l2_experiment(name, SeqCase::IIb),
        "ex2-case-iic" => l2_experiment(name, SeqCase::IIc),
        "ex2-case-iid" => l2_experiment(name, SeqCase::IId),
        "ocp-p57" => control_experiment(),
        "deblur-32" => deblur_experiment(),
        "r3-all-variants" => all_variants(),
        _ => return None,
    })
}
