use std::fs;
use std::process::Command;

fn frab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frab"))
}

#[test]
fn list_prints_builtins() {
    let out = frab().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in frab::harness::BUILTINS {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn run_builtin_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = frab()
        .args(["run", "ae1-case-ia", "--tol", "1e-10", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("alg3.2"));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("algorithm,iterations,final_tol,final_dist,wall_s,snr\n"));
    let trace = fs::read_to_string(dir.path().join("alg3.2.trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("n,tol,delta,dist,elapsed_s"));
}

#[test]
fn reruns_match_except_timing() {
    let strip = |path: &std::path::Path| -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| {
                let mut cells: Vec<&str> = l.split(',').collect();
                cells.pop();
                cells.join(",")
            })
            .collect()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let st = frab().args(["run", "ex2-case-iib", "--algo", "alg3.2,frbsm", "--out"]).arg(d.path()).status().unwrap();
        assert!(st.success());
    }
    for f in ["alg3.2.trace.csv", "frbsm.trace.csv"] {
        assert_eq!(strip(&a.path().join(f)), strip(&b.path().join(f)));
    }
    assert!(!a.path().join("rfbsm.trace.csv").exists());
}

#[test]
fn validate_reports_violated_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.spec");
    fs::write(&path, "problem = r3\n[a]\nalgorithm = frab-adaptive\nanchor = zero\nbeta_bar = 0.2\nr_bar = 0.35\n").unwrap();
    let out = frab().arg("validate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("r_bar = 0.35"), "{err}");

    let good = dir.path().join("good.spec");
    fs::write(&good, "problem = l2\ncase = IIc\n[a]\nalgorithm = frab-adaptive\nanchor = geometric(1.5, -0.5)\n").unwrap();
    assert!(frab().arg("validate").arg(&good).status().unwrap().success());
}

#[test]
fn unknown_target_exits_1() {
    let out = frab().args(["run", "no-such-experiment"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blowup.spec");
    // RFBSM with a huge step diverges on the R3 problem
    fs::write(&path, "problem = r3\nmax_iter = 5000\n[r]\nalgorithm = rfbsm\ngamma = 1e3\n").unwrap();
    let out = frab().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn control_run_emits_tables() {
    let dir = tempfile::tempdir().unwrap();
    let st = frab().args(["run", "ocp-p57", "--algo", "alg3.2", "--out"]).arg(dir.path()).status().unwrap();
    assert!(st.success());
    let control = fs::read_to_string(dir.path().join("alg3.2.control.csv")).unwrap();
    let rows: Vec<&str> = control.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let z: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((-1.0..=1.0).contains(&z));
    }
    assert_eq!(fs::read_to_string(dir.path().join("alg3.2.state.csv")).unwrap().lines().count(), 102);
}
