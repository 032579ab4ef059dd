use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(manifest_dir().join("include/varactor.h")).unwrap();
    for name in [
        "va_last_error",
        "va_problem_new_periodic",
        "va_problem_new",
        "va_problem_free",
        "va_expansion_new",
        "va_expansion_coeff",
        "va_borel_new",
        "va_orbit_find",
        "typedef struct VaProblem VaProblem",
        "VA_STATUS_NO_ROOT = 6",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libvaractor_ffi.a");
    lib.exists().then_some(lib)
}

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "varactor.h"

int main(void) {
    VaProblem *p = NULL;
    if (va_problem_new_periodic(4.0, 0.5, 1.0, 0.05, &p) != VA_STATUS_OK) return 1;
    double c0 = 0.0;
    if (va_problem_c0(p, &c0) != VA_STATUS_OK || fabs(c0 - 2.0) > 1e-15) return 2;
    VaExpansion *e = NULL;
    if (va_expansion_new(p, VA_EXPANSION_KIND_RESUMMED, 10, &e) != VA_STATUS_OK) return 3;
    double x = 0.0, err = 0.0;
    if (va_expansion_evaluate(e, 1.0, 1.0, &x, &err) != VA_STATUS_OK) return 4;
    VaProblem *bad = NULL;
    if (va_problem_new_periodic(-1.0, 0.5, 1.0, 0.05, &bad) != VA_STATUS_INVALID_PROBLEM) return 5;
    if (va_last_error() == NULL) return 6;
    printf("%.17g\n", x);
    va_expansion_free(e);
    va_problem_free(p);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let lib = static_lib().expect("static library next to the test binary");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(Path::new(&bin)).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let x: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((x - 2.0).abs() < 0.1, "{x}");
}
