//! Compiles a C client against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(manifest().join("include/frab.h")).unwrap();
    let src = std::fs::read_to_string(manifest().join("src/lib.rs")).unwrap();
    let names: Vec<&str> = src
        .lines()
        .filter_map(|l| l.strip_prefix("pub unsafe extern \"C\" fn "))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(names.len() > 20);
    for name in names {
        assert!(header.contains(&format!("{name}(")), "{name} missing from frab.h");
    }
    for tag in ["FRAB_STATUS_OK = 0", "FRAB_STATUS_NUMERICAL = 2", "typedef struct FrabProblem FrabProblem;"] {
        assert!(header.contains(tag), "{tag}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests/<exe> lives in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libfrab_ffi.a");
    lib.exists().then_some(lib)
}

fn compiler() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
}

#[test]
fn c_client_links_and_runs() {
    let (Some(cc), Some(lib)) = (compiler(), static_lib()) else {
        eprintln!("skipped: no C compiler or static library");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "compiling the C client failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], "3");
    assert!(fields[1].parse::<usize>().unwrap() > 0);
}
