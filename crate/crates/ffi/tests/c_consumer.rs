//! Compiles a small C program against the generated header and the shared
//! library. Skipped when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "prolatoscope.h"

int main(void) {
    PsBasis *b = NULL;
    if (ps_basis_build(1.0, 8, 256, &b) != PS_STATUS_OK) return 1;
    double l0 = 0.0;
    if (ps_lambda(b, 0, &l0) != PS_STATUS_OK) return 2;
    if (fabs(l0 - 0.5725817806) > 1e-9) return 3;
    double v;
    if (ps_eval_phi(b, 0, 2.0, &v) != PS_STATUS_INVALID_ARGUMENT) return 4;
    if (ps_last_error_message() == NULL) return 5;
    ps_basis_free(b);
    printf("ok %s\n", ps_version());
    return 0;
}
"#;

fn compiler() -> Option<String> {
    ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(String::from)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libprolatoscope_ffi.so").exists() {
        eprintln!(
            "shared library not found in {}; skipping",
            lib_dir.display()
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lprolatoscope_ffi", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status.code()
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
