use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "fdkp.h"

int main(void) {
    double v = 0.0;
    FdkpParams p;
    if (fdkp_params_default(&p) != FDKP_STATUS_OK) return 1;
    if (fdkp_lump_eval(1, 0.0, 0.0, 0, 0, &v) != FDKP_STATUS_OK || v != -4.0) return 2;
    if (fdkp_lump_eval(5, 0.0, 0.0, 0, 0, &v) != FDKP_STATUS_INVALID_ARGUMENT) return 3;
    char msg[256];
    size_t need = 0;
    if (fdkp_last_error(msg, sizeof msg, &need) != FDKP_STATUS_OK) return 4;
    printf("%s|%s\n", fdkp_version(), msg);
    return 0;
}
"#;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(crate_dir().join("include/fdkp.h")).unwrap();
    for name in ["fdkp_solve", "fdkp_last_error", "FdkpStatus", "FDKP_STATUS_PANIC", "FdkpField", "fdkp_sweep_json"] {
        assert!(h.contains(name), "{name}");
    }
}

fn staticlib() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let profile = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile.join("libfdkp_ffi.a");
    if lib.exists() {
        return lib;
    }
    let target = profile.parent().unwrap().join("ffi-link");
    let status = Command::new(std::env::var("CARGO").unwrap_or_else(|_| "cargo".into()))
        .args(["build", "-p", "fdkp-ffi", "--lib", "--target-dir"])
        .arg(&target)
        .status()
        .unwrap();
    assert!(status.success());
    target.join("debug/libfdkp_ffi.a")
}

#[test]
fn c_program_links_against_staticlib() {
    let tmp = std::env::temp_dir().join(format!("fdkp-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = crate_dir().join("include");
    let syntax = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status();
    let Ok(status) = syntax else {
        eprintln!("no C compiler; header compile check skipped");
        return;
    };
    assert!(status.success());
    let lib = staticlib();
    let bin = tmp.join("main");
    let status = Command::new("cc")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("unknown lump family 5"));
    let _ = std::fs::remove_dir_all(&tmp);
}
