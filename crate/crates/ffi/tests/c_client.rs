//! Compiles a C program against the generated header and links it with the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "isafe.h"

int main(void) {
    double o[3] = {0.0, 1.0, 2.0};
    double p[3] = {2.1, 1.1, 0.1};
    IsafeProfile *profile = NULL;
    if (isafe_profile_new(o, p, 3, &profile) != ISAFE_STATUS_OK) return 10;
    IsafeMetricValue v;
    if (isafe_metric(profile, ISAFE_METRIC_KIND_WCM, NULL, 0, &v) != ISAFE_STATUS_OK) return 11;
    printf("%.12f\n", v.value);
    double bad[2] = {0.9, 0.1};
    if (isafe_metric(profile, ISAFE_METRIC_KIND_QBM, bad, 2, &v) != ISAFE_STATUS_VALIDATION) return 12;
    if (isafe_last_error() == NULL) return 13;
    isafe_profile_free(profile);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    // tests run from target/<profile>/deps; the static library sits one level up.
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target_dir.join("libisafe_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - (1.0 - (0.03f64 / 8.03).sqrt())).abs() < 1e-11);
}
