//! The generated header matches the exported symbols and compiles in C.

use std::path::{Path, PathBuf};
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/roamauth.h");

const SYMBOLS: [&str; 14] = [
    "ra_suite_new",
    "ra_suite_free",
    "ra_deployment_new",
    "ra_deployment_free",
    "ra_register",
    "ra_user_set_password",
    "ra_user_card_json",
    "ra_user_free",
    "ra_handshake",
    "ra_run_session",
    "ra_run_attack",
    "ra_string_free",
    "ra_last_error_message",
    "ra_version",
];

#[test]
fn header_declares_every_symbol() {
    let h = std::fs::read_to_string(HEADER).unwrap();
    for s in SYMBOLS {
        assert!(h.contains(&format!("{s}(")), "{s} missing from header");
    }
    assert!(h.contains("typedef struct RaSuite RaSuite;"));
    assert!(h.contains("RA_STATUS_PROTOCOL_ABORT = 3"));
}

/// target/<profile>, found from the test binary in target/<profile>/deps.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    // Under `cargo test` the archive stays in deps/; after `cargo build` it
    // is also copied up one level.
    let lib = ["deps/libroamauth_ffi.a", "libroamauth_ffi.a"]
        .iter()
        .map(|p| profile_dir().join(p))
        .find(|p| p.exists())
        .expect("libroamauth_ffi.a is built alongside the tests");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "roamauth.h"

int main(void) {
    RaSuite *s = NULL;
    RaDeployment *d = NULL;
    RaUser *u = NULL;
    char *json = NULL;
    const char *pw = "secret";
    if (ra_suite_new("p256", &s) != RA_STATUS_OK) return 10;
    if (ra_deployment_new(s, 1, &d) != RA_STATUS_OK) return 11;
    if (ra_register(d, "carol", (const uint8_t *)pw, strlen(pw), 2, &u) != RA_STATUS_OK) return 12;
    if (ra_handshake(d, u, "key-update:2", 3, &json) != RA_STATUS_OK) return 13;
    if (strstr(json, "\"rounds\":8") == NULL) return 14;
    ra_string_free(json);
    if (ra_suite_new("bogus", &s) != RA_STATUS_INVALID_ARGUMENT) return 15;
    printf("%s\n", ra_last_error_message());
    ra_user_free(u);
    ra_deployment_free(d);
    ra_suite_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let cc = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(Path::new(HEADER).parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("cc runs");
    assert!(cc.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("bogus"));
}
