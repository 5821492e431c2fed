use proptest::prelude::*;

use frab::problems::{make_l2_problem, make_r3_problem, R3Case, SeqCase, DEFAULT_TRUNC_DIM};
use frab::solvers::{run, step, Algorithm, Contraction, Inertia, IterationState, Operators, SolverConfig};
use frab::space::{box_project, MonotoneMap, ResolventOp, Vector};
use frab::stepsize::{update_step, SequenceSpec, StepSizeState};

fn v(x: Vec<f64>) -> Vector {
    Vector::new(x).unwrap()
}

fn vec5() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 5)
}

fn l2_config(alg: Algorithm) -> SolverConfig {
    let mut cfg = SolverConfig::new(alg);
    cfg.anchor = Some(Vector::geometric(DEFAULT_TRUNC_DIM, 1.5, -0.5));
    cfg.delta0 = 1.0 / 101.0;
    cfg.delta1 = 2.0 / 201.0;
    cfg.r_bar = 0.15;
    cfg.c = SequenceSpec::InverseSquare { a: 10.0, b: 77.0 };
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn step_size_never_exceeds_cap(
        d in 0.01..2.0f64,
        c in 0.0..1.0f64,
        r in 0.11..0.39f64,
        w in vec5(), wn in vec5(), tw in vec5(), twn in vec5(),
    ) {
        let s = StepSizeState::new(0.5, d).unwrap();
        let next = update_step(s, r, c, &v(w), &v(wn), &v(tw), &v(twn)).unwrap();
        prop_assert!(next.delta_curr <= d + c);
        prop_assert!(next.delta_curr > 0.0);
        prop_assert_eq!(next.delta_prev, d);
    }

    /// With T L-Lipschitz, δₙ ≥ min{r̄/L, δ₁} is preserved by the update.
    #[test]
    fn step_size_lower_bound_is_preserved(
        lip in 0.1..4.0f64,
        r in 0.11..0.39f64,
        delta1 in 0.01..1.0f64,
        c in 0.0..0.1f64,
        w in vec5(), wn in vec5(),
    ) {
        let floor = (r / lip).min(delta1);
        let map = MonotoneMap::affine(lip, Vector::filled(5, 1.0));
        let (w, wn) = (v(w), v(wn));
        let s = StepSizeState::new(delta1, floor.max(delta1)).unwrap();
        let next = update_step(s, r, c, &w, &wn, &map.eval(&w), &map.eval(&wn)).unwrap();
        prop_assert!(next.delta_curr >= floor * (1.0 - 1e-12));
    }

    #[test]
    fn reduction_lattice_is_bit_exact(
        slope in 0.1..3.0f64,
        offset in vec5(), anchor in vec5(), w0 in vec5(), w1 in vec5(),
        weight in 0.1..2.0f64,
    ) {
        let map = MonotoneMap::affine(slope, v(offset));
        let res = ResolventOp::soft_threshold(weight);
        let ops = Operators::new(&map, &res);
        let anchor = v(anchor);
        let mut base = SolverConfig::new(Algorithm::FrabAdaptive);
        base.anchor = Some(anchor.clone());
        let mut state = IterationState::start(v(w0), v(w1), &base, &ops).unwrap();
        let mut inertial = base.clone();
        inertial.algorithm = Algorithm::FrabInertial;
        inertial.inertia = Inertia::Constant(0.0);
        let mut visc = base.clone();
        visc.algorithm = Algorithm::Viscosity;
        visc.contraction = Some(Contraction::constant(anchor));
        let mut ivisc = visc.clone();
        ivisc.algorithm = Algorithm::InertialViscosity;
        for _ in 0..5 {
            let next = step(&state, &base, &ops).unwrap();
            prop_assert_eq!(&step(&state, &inertial, &ops).unwrap(), &next);
            prop_assert_eq!(&step(&state, &visc, &ops).unwrap(), &next);
            prop_assert_eq!(&step(&state, &ivisc, &ops).unwrap(), &next);
            state = next;
        }
    }

    /// θ̄ = 0 in the inertial viscosity scheme agrees with the viscosity
    /// scheme for a genuine contraction.
    #[test]
    fn inertial_viscosity_without_inertia_is_viscosity(
        slope in 0.1..3.0f64, k in 0.0..0.49f64,
        offset in vec5(), w0 in vec5(), w1 in vec5(),
    ) {
        let map = MonotoneMap::affine(slope, v(offset));
        let res = ResolventOp::soft_threshold(1.0);
        let ops = Operators::new(&map, &res);
        let mut visc = SolverConfig::new(Algorithm::Viscosity);
        visc.contraction = Some(Contraction::scaled(k));
        let state = IterationState::start(v(w0), v(w1), &visc, &ops).unwrap();
        let mut ivisc = visc.clone();
        ivisc.algorithm = Algorithm::InertialViscosity;
        let a = step(&state, &visc, &ops).unwrap();
        let b = step(&state, &ivisc, &ops).unwrap();
        for i in 0..5 {
            prop_assert!((a.w_curr[i] - b.w_curr[i]).abs() <= 1e-14 * (1.0 + a.w_curr[i].abs()));
        }
    }

    #[test]
    fn caches_stay_coherent(w0 in vec5(), w1 in vec5(), theta in 0.0..0.04f64) {
        let map = MonotoneMap::affine(2.0, Vector::filled(5, -1.0));
        let res = ResolventOp::soft_threshold(1.0);
        let ops = Operators::new(&map, &res);
        let mut cfg = SolverConfig::new(Algorithm::FrabInertial);
        cfg.anchor = Some(Vector::zeros(5));
        cfg.inertia = Inertia::Constant(theta);
        let mut state = IterationState::start(v(w0), v(w1), &cfg, &ops).unwrap();
        for _ in 0..10 {
            state = step(&state, &cfg, &ops).unwrap();
            prop_assert_eq!(&state.tw_curr, &map.eval(&state.w_curr));
            prop_assert_eq!(&state.tw_prev, &map.eval(&state.w_prev));
        }
    }
}

#[test]
fn step_size_settles() {
    let problem = make_l2_problem(SeqCase::IIb, DEFAULT_TRUNC_DIM).unwrap();
    let mut cfg = l2_config(Algorithm::FrabAdaptive);
    cfg.tol = 1e-300;
    cfg.max_iter = 10_000;
    let rec = run(&problem, &cfg).unwrap();
    let d = &rec.deltas;
    let n = d.len() - 1;
    assert!((d[n] - d[n - 1]).abs() <= 1e-8 + cfg.c.at(n));
    // the limit lies in [min{r̄/L, δ₁}, δ₁ + Σcₙ]
    let sum_c: f64 = (1..=n).map(|k| cfg.c.at(k)).sum();
    assert!(d[n] >= cfg.r_bar.min(cfg.delta1) && d[n] <= cfg.delta1 + sum_c);
}

#[test]
fn anchored_limit_is_the_projection_of_the_anchor() {
    let (lo, hi) = (Vector::new(vec![0.0, -2.0]).unwrap(), Vector::new(vec![1.0, 2.0]).unwrap());
    let map = MonotoneMap::zero();
    let res = ResolventOp::box_projection(lo.clone(), hi.clone()).unwrap();
    let anchor = Vector::new(vec![3.0, -0.7]).unwrap();
    let mut cfg = SolverConfig::new(Algorithm::FrabAdaptive);
    cfg.anchor = Some(anchor.clone());
    cfg.sigma = SequenceSpec::Rational { a: 2.0, b: 1.0, c: 2.0 };
    let ops = Operators::new(&map, &res);
    let mut state =
        IterationState::start(Vector::new(vec![0.5, 2.0]).unwrap(), Vector::new(vec![0.0, -2.0]).unwrap(), &cfg, &ops)
            .unwrap();
    for _ in 0..10_000 {
        state = step(&state, &cfg, &ops).unwrap();
    }
    let target = box_project(&anchor, &lo, &hi).unwrap();
    for i in 0..2 {
        assert!((state.w_curr[i] - target[i]).abs() < 1e-6, "{:?} vs {:?}", state.w_curr, target);
    }
}

#[test]
fn doubling_truncation_leaves_trajectories_unchanged() {
    for case in SeqCase::ALL {
        let short = make_l2_problem(case, DEFAULT_TRUNC_DIM).unwrap();
        let long = make_l2_problem(case, 2 * DEFAULT_TRUNC_DIM).unwrap();
        for alg in [Algorithm::FrabAdaptive, Algorithm::FrabInertial] {
            let run_on = |p: &frab::problems::Problem, dim: usize| {
                let mut cfg = l2_config(alg);
                cfg.anchor = Some(Vector::geometric(dim, 1.5, -0.5));
                if alg == Algorithm::FrabInertial {
                    cfg.inertia = Inertia::Constant(0.04);
                }
                cfg.tol = 1e-300;
                cfg.max_iter = 200;
                cfg.keep_iterates = true;
                run(p, &cfg).unwrap().iterates.unwrap()
            };
            let a = run_on(&short, DEFAULT_TRUNC_DIM);
            let b = run_on(&long, 2 * DEFAULT_TRUNC_DIM);
            let worst = a
                .iter()
                .zip(&b)
                .flat_map(|(x, y)| {
                    let head = y.as_slice()[..DEFAULT_TRUNC_DIM].iter().zip(x.iter()).map(|(p, q)| (p - q).abs());
                    head.chain(y.as_slice()[DEFAULT_TRUNC_DIM..].iter().map(|p| p.abs())).collect::<Vec<_>>()
                })
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-8, "{case:?} {alg}: {worst:e}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let problem = make_r3_problem(R3Case::Ib);
    let mut cfg = SolverConfig::new(Algorithm::FrabInertial);
    cfg.anchor = Some(Vector::new(vec![2.0, 1.0, -6.0]).unwrap());
    cfg.inertia = Inertia::Constant(0.04);
    cfg.keep_iterates = true;
    cfg.tol = 1e-12;
    let a = run(&problem, &cfg).unwrap();
    let b = run(&problem, &cfg).unwrap();
    assert_eq!(a.iterates, b.iterates);
    assert_eq!(a.residuals, b.residuals);
    assert_eq!(a.deltas, b.deltas);
    assert_eq!(a.iterations, b.iterations);
}
