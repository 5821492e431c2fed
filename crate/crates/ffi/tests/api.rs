use std::ffi::{c_char, CString};
use std::ptr;

use frab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { frab_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&b| b as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn prox_helpers() {
    let x = [3.0, -0.5, -2.0];
    let mut out = [0.0; 3];
    assert_eq!(unsafe { frab_soft_threshold(x.as_ptr(), 3, 1.0, out.as_mut_ptr()) }, FrabStatus::Ok);
    assert_eq!(out, [2.0, 0.0, -1.0]);
    let (lo, hi) = ([0.0; 3], [1.0; 3]);
    assert_eq!(unsafe { frab_box_project(x.as_ptr(), lo.as_ptr(), hi.as_ptr(), 3, out.as_mut_ptr()) }, FrabStatus::Ok);
    assert_eq!(out, [1.0, 0.0, 0.0]);
    assert_eq!(unsafe { frab_soft_threshold(x.as_ptr(), 3, -1.0, out.as_mut_ptr()) }, FrabStatus::Usage);
    assert_eq!(unsafe { frab_soft_threshold(ptr::null(), 3, 1.0, out.as_mut_ptr()) }, FrabStatus::NullPointer);
    assert!(last_error().contains("null"));
}

#[test]
fn solve_custom_problem() {
    // 0 ∈ 2w + (−3, 1, −3) + ∂‖w‖₁ has solution (1, 0, 1)
    let offset = [-3.0, 1.0, -3.0];
    let (w0, w1) = ([1.0, 2.0, 3.0], [0.0; 3]);
    let mut p = ptr::null_mut();
    let mut cfg = ptr::null_mut();
    let mut rec = ptr::null_mut();
    unsafe {
        assert_eq!(frab_problem_affine_l1(2.0, offset.as_ptr(), 1.0, w0.as_ptr(), w1.as_ptr(), 3, &mut p), FrabStatus::Ok);
        assert_eq!(frab_config_new(c("frab-inertial").as_ptr(), &mut cfg), FrabStatus::Ok);
        for (k, v) in [("anchor", "[2, 1, -6]"), ("theta", "0.04"), ("tol", "1e-10"), ("max_iter", "20000")] {
            assert_eq!(frab_config_set(cfg, c(k).as_ptr(), c(v).as_ptr(), 3), FrabStatus::Ok, "{k}");
        }
        assert_eq!(frab_config_validate(cfg, p), FrabStatus::Ok);
        assert_eq!(frab_solve(p, cfg, ptr::null(), ptr::null(), 0, &mut rec), FrabStatus::Ok);

        let mut needed = 0;
        let mut w = [0.0; 3];
        assert_eq!(frab_record_final_iterate(rec, w.as_mut_ptr(), 3, &mut needed), FrabStatus::Ok);
        assert_eq!(needed, 3);
        for (a, b) in w.iter().zip([1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-4, "{w:?}");
        }
        let mut iters = 0;
        let mut term = FrabTermination::MaxIter;
        assert_eq!(frab_record_iterations(rec, &mut iters), FrabStatus::Ok);
        assert_eq!(frab_record_termination(rec, &mut term), FrabStatus::Ok);
        assert_eq!(term, FrabTermination::Tolerance);
        let mut n = 0;
        assert_eq!(frab_record_residuals(rec, ptr::null_mut(), 0, &mut n), FrabStatus::Ok);
        assert_eq!(n, iters);
        let mut res = vec![0.0; n];
        assert_eq!(frab_record_residuals(rec, res.as_mut_ptr(), n, &mut n), FrabStatus::Ok);
        assert!(res[n - 1] < 1e-10);

        let mut value = 1.0;
        let sol = [1.0, 0.0, 1.0];
        assert_eq!(frab_problem_residual(p, sol.as_ptr(), 3, &mut value), FrabStatus::Ok);
        assert_eq!(value, 0.0);
        assert_eq!(frab_problem_residual(p, sol.as_ptr(), 2, &mut value), FrabStatus::Usage);

        frab_record_free(rec);
        frab_config_free(cfg);
        frab_problem_free(p);
    }
}

#[test]
fn configuration_errors_carry_messages() {
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(frab_config_new(c("frab").as_ptr(), &mut cfg), FrabStatus::Usage);
        assert!(last_error().contains("unknown algorithm"));
        assert!(cfg.is_null());
        assert_eq!(frab_config_new(c("frab-adaptive").as_ptr(), &mut cfg), FrabStatus::Ok);
        assert_eq!(frab_config_set(cfg, c("r_bar").as_ptr(), c("0.35").as_ptr(), 3), FrabStatus::Ok);
        assert_eq!(frab_config_set(cfg, c("beta_bar").as_ptr(), c("0.2").as_ptr(), 3), FrabStatus::Ok);
        assert_eq!(frab_config_set(cfg, c("anchor").as_ptr(), c("zero").as_ptr(), 3), FrabStatus::Ok);
        assert_eq!(frab_config_set(cfg, c("bogus").as_ptr(), c("1").as_ptr(), 3), FrabStatus::Usage);
        assert_eq!(frab_config_set(cfg, c("max_iter").as_ptr(), c("-1").as_ptr(), 3), FrabStatus::Usage);

        let mut exp = ptr::null_mut();
        let mut p = ptr::null_mut();
        assert_eq!(frab_experiment_builtin(c("ae1-case-ia").as_ptr(), &mut exp), FrabStatus::Ok);
        assert_eq!(frab_experiment_problem(exp, &mut p), FrabStatus::Ok);
        assert_eq!(frab_config_validate(cfg, p), FrabStatus::Usage);
        assert!(last_error().contains("r_bar"), "{}", last_error());
        let mut rec = ptr::null_mut();
        assert_eq!(frab_solve(p, cfg, ptr::null(), ptr::null(), 0, &mut rec), FrabStatus::Usage);
        assert!(rec.is_null());
        frab_problem_free(p);
        frab_experiment_free(exp);
        frab_config_free(cfg);
    }
}

#[test]
fn numerical_failure_still_returns_record() {
    let text = c("problem = r3\nmax_iter = 5000\n[r]\nalgorithm = rfbsm\ngamma = 1e3\n");
    let mut exp = ptr::null_mut();
    let (mut p, mut cfg, mut rec) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(frab_experiment_parse(text.as_ptr(), &mut exp), FrabStatus::Ok);
        assert_eq!(frab_experiment_problem(exp, &mut p), FrabStatus::Ok);
        assert_eq!(frab_experiment_config(exp, 0, &mut cfg), FrabStatus::Ok);
        assert_eq!(frab_solve(p, cfg, ptr::null(), ptr::null(), 0, &mut rec), FrabStatus::Numerical);
        assert!(!rec.is_null());
        let mut term = FrabTermination::Tolerance;
        assert_eq!(frab_record_termination(rec, &mut term), FrabStatus::Ok);
        assert_eq!(term, FrabTermination::NumericalFailure);
        assert!(last_error().contains("numerical failure"));
        frab_record_free(rec);
        frab_config_free(cfg);
        frab_problem_free(p);
        frab_experiment_free(exp);
    }
}

#[test]
fn experiment_round_trip() {
    let mut exp = ptr::null_mut();
    let mut report = ptr::null_mut();
    let dir = tempfile::tempdir().unwrap();
    let out = c(dir.path().to_str().unwrap());
    unsafe {
        assert_eq!(frab_experiment_builtin(c("ae1-case-ib").as_ptr(), &mut exp), FrabStatus::Ok);
        let mut count = 0;
        assert_eq!(frab_experiment_run_count(exp, &mut count), FrabStatus::Ok);
        assert_eq!(count, 4);
        assert_eq!(frab_experiment_run(exp, out.as_ptr(), &mut report), FrabStatus::Ok);
        let mut len = 0;
        assert_eq!(frab_report_len(report, &mut len), FrabStatus::Ok);
        assert_eq!(len, 4);

        let mut needed = 0;
        assert_eq!(frab_report_label(report, 0, ptr::null_mut(), 0, &mut needed), FrabStatus::Ok);
        let mut buf = vec![0 as c_char; needed + 1];
        assert_eq!(frab_report_label(report, 0, buf.as_mut_ptr(), buf.len(), &mut needed), FrabStatus::Ok);
        let label: String = buf[..needed].iter().map(|&b| b as u8 as char).collect();
        assert_eq!(label, "alg3.2");
        // truncation keeps the terminator
        let mut short = [1 as c_char; 4];
        assert_eq!(frab_report_label(report, 0, short.as_mut_ptr(), 4, &mut needed), FrabStatus::Ok);
        assert_eq!(short[3], 0);

        let mut snr = 0.0;
        assert_eq!(frab_report_snr(report, 0, &mut snr), FrabStatus::Ok);
        assert!(snr.is_nan());
        let mut rec = ptr::null_mut();
        assert_eq!(frab_report_record(report, 3, &mut rec), FrabStatus::Ok);
        let mut iters = 0;
        assert_eq!(frab_record_iterations(rec, &mut iters), FrabStatus::Ok);
        assert!(iters > 0);
        assert_eq!(frab_report_record(report, 9, &mut rec), FrabStatus::Usage);
        frab_record_free(rec);
        frab_report_free(report);
        frab_experiment_free(exp);
    }
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn null_handles_are_rejected() {
    let mut n = 0;
    unsafe {
        assert_eq!(frab_problem_dim(ptr::null(), &mut n), FrabStatus::NullPointer);
        assert_eq!(frab_record_iterations(ptr::null(), &mut n), FrabStatus::NullPointer);
        assert_eq!(frab_experiment_parse(ptr::null(), ptr::null_mut()), FrabStatus::NullPointer);
        frab_problem_free(ptr::null_mut());
        frab_record_free(ptr::null_mut());
    }
}
