//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "gexcursion.h"

int main(void) {
    GxModel *m = NULL;
    if (gx_model_new(1.0, 2.0, 2.0, 1.0, 0.0, 0.0, &m) != GX_STATUS_OK) return 1;
    GxPrediction p;
    if (gx_predict(m, 1.0, &p) != GX_STATUS_OK) return 2;
    if (fabs(p.prefactor - M_PI / 4.0) > 1e-10 || p.u_power != 2.0) return 3;
    GxRegime r;
    gx_classify_regime(m, &r);
    if (r != GX_REGIME_CLASSICAL) return 4;
    double v;
    if (gx_sigma(m, 5.0, 0.0, &v) != GX_STATUS_POINT_OUT_OF_DOMAIN) return 5;
    if (gx_last_error_message() == NULL) return 6;
    gx_model_free(m);
    printf("ok %s\n", gx_version());
    return 0;
}
"#;

#[test]
fn header_compiles_and_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libgexcursion_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
    let _ = std::fs::remove_dir_all(&dir);
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("gexcursion-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
