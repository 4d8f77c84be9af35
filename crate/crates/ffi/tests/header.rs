//! The generated header declares every exported symbol and compiles as C.

use std::path::{Path, PathBuf};
use std::process::Command;

const SYMBOLS: [&str; 19] = [
    "chifield_version",
    "chifield_last_error_message",
    "chifield_hermite",
    "chifield_inv_chi_constant",
    "chifield_maxima_density_sphere",
    "chifield_ec_sum_product",
    "chifield_estimate_dk",
    "chifield_expected_maxima",
    "chifield_expected_critical_points",
    "chifield_spectrum_new",
    "chifield_spectrum_parse",
    "chifield_spectrum_radius",
    "chifield_spectrum_hessian_model",
    "chifield_spectrum_free",
    "chifield_chi_field_new",
    "chifield_chi_field_value",
    "chifield_chi_field_count",
    "chifield_chi_field_free",
    "CHIFIELD_STATUS_NULL_POINTER",
];

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/chifield.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for s in SYMBOLS {
        assert!(h.contains(s), "{s} missing from chifield.h");
    }
    assert!(h.contains("typedef struct ChifieldSpectrum ChifieldSpectrum;"));
    assert!(h.contains("typedef struct ChifieldChiField ChifieldChiField;"));
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "chifield.h"

int main(void) {
    double x = 0.0;
    if (chifield_maxima_density_sphere(1.0, 2.0, CHIFIELD_SIGN_VARIANT_CORRECTED, &x) != CHIFIELD_STATUS_OK) return 1;
    if (fabs(x - 1.0826822658929016) > 1e-12) return 2;
    if (chifield_inv_chi_constant(2, 2, &x) != CHIFIELD_STATUS_INVALID_ARGUMENT) return 3;
    if (chifield_last_error_message() == NULL) return 4;
    unsigned l[1] = {3};
    double c[1] = {1.0};
    ChifieldSpectrum *s = NULL;
    if (chifield_spectrum_new(l, c, 1, &s) != CHIFIELD_STATUS_OK) return 5;
    ChifieldChiField *f = NULL;
    if (chifield_chi_field_new(s, 2, 1, 0, &f) != CHIFIELD_STATUS_OK) return 6;
    double p[3] = {0.0, 0.6, 0.8};
    if (chifield_chi_field_value(f, p, &x) != CHIFIELD_STATUS_OK || !(x > 0.0)) return 7;
    chifield_chi_field_free(f);
    chifield_spectrum_free(s);
    printf("%s\n", chifield_version());
    return 0;
}
"#;

/// Directory holding the built static library (`target/<profile>`).
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = lib_dir().join("libchifield_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping link check");
        return;
    }
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let inc = header();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(inc.parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
