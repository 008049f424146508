//! Byte-for-byte checks of committed CLI outputs. `elapsed_ms` is the
//! one nondeterministic envelope field, so it is pinned to 0 before
//! comparing; everything else (exact rationals, seeded simulation
//! summaries, certified decimals) must reproduce exactly.
//!
//! Regenerate after an intentional output change with
//! `UPDATE_GOLDEN=1 cargo test -p treepgf-cli --test golden`.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_treepgf"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Pins the envelope's elapsed_ms to 0 in place. Textual, not a JSON
/// round-trip: serde_json's default float parsing is best-effort, and a
/// re-encode could shift a printed f64 by an ulp, hiding the binary's
/// real bytes from the comparison.
fn pin_elapsed(s: &str) -> String {
    let key = "\"elapsed_ms\": ";
    let i = s.find(key).expect("envelope has elapsed_ms") + key.len();
    let j = i + s[i..]
        .find(|c: char| !c.is_ascii_digit())
        .expect("digits terminate");
    assert!(j > i, "elapsed_ms has a numeric value");
    format!("{}0{}", &s[..i], &s[j..])
}

fn normalized_stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.code() == Some(0),
        "`treepgf {}` exited with {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let s = String::from_utf8(out.stdout).expect("stdout is utf8");
    serde_json::from_str::<Value>(&s).expect("stdout is JSON");
    pin_elapsed(&s)
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

fn check(name: &str, args: &[&str]) {
    let got = normalized_stdout(args);
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &got).unwrap();
        return;
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|_| {
        panic!("missing golden file {}; seed it with UPDATE_GOLDEN=1", path.display())
    });
    assert_eq!(got, want, "output drifted from {}", path.display());
}

#[test]
fn bst_moments_successful() {
    check(
        "bst_moments_successful_n3",
        &["bst", "moments", "--search", "successful", "--n", "3"],
    );
}

#[test]
fn bst_pgf_unsuccessful() {
    check(
        "bst_pgf_unsuccessful_n4",
        &["bst", "pgf", "--search", "unsuccessful", "--n", "4"],
    );
}

#[test]
fn dst_pgf_finite_unsuccessful() {
    check(
        "dst_pgf_finite_unsuccessful_n4",
        &["dst", "pgf", "--search", "unsuccessful", "--keys", "finite", "--n", "4"],
    );
}

#[test]
fn dst_moments_path_length() {
    check(
        "dst_moments_pathlength_n4",
        &["dst", "moments", "--search", "pathlength", "--keys", "infinite", "--n", "4"],
    );
}

#[test]
fn dst_enumerate_with_width_check() {
    check(
        "dst_enumerate_successful_n3",
        &[
            "dst", "enumerate", "--n", "3", "--search", "successful", "--keys", "infinite",
            "--check-width",
        ],
    );
}

#[test]
fn cumulants_table() {
    check("cumulants_max8", &["cumulants", "--max-order", "8"]);
}

#[test]
fn constants_twelve_digits() {
    check("constants_p12", &["constants", "--precision", "12"]);
}

#[test]
fn asymptotics_report() {
    check(
        "asymptotics_bst_unsucc_mean",
        &["asymptotics", "--family", "bst-unsucc-mean", "--grid", "10,100"],
    );
}

#[test]
fn simulate_bst_seeded() {
    check(
        "simulate_bst_unsuccessful_n3",
        &[
            "simulate", "bst", "--n", "3", "--search", "unsuccessful", "--trials", "100000",
        ],
    );
}

#[test]
fn simulate_covariance_seeded() {
    check(
        "simulate_covariance_n4",
        &["simulate", "covariance", "--n", "4", "--trials", "100000"],
    );
}

#[test]
fn verify_fast_tier() {
    check("verify_fast", &["verify", "--fast"]);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bst", "pgf", "--search", "unsuccessful", "--n", "0"] as &[&str],
        &["dst", "enumerate", "--n", "7", "--search", "successful", "--keys", "infinite"],
        &["asymptotics", "--family", "nope", "--grid", "4,8"],
        &["cumulants", "--max-order", "1"],
        &["constants", "--precision", "99"],
        &["simulate", "covariance", "--n", "1", "--trials", "10"],
    ] {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "`treepgf {}` should be a usage error",
            args.join(" ")
        );
        assert!(
            !out.stderr.is_empty(),
            "usage error for `treepgf {}` should explain itself",
            args.join(" ")
        );
    }
}

#[test]
fn infeasible_enumeration_names_the_case_count() {
    let out = run(&["dst", "enumerate", "--n", "6", "--search", "unsuccessful", "--keys", "infinite"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(
        msg.contains("4398046511104"),
        "rejection should estimate the 2^42 case count, got: {msg}"
    );
}

#[test]
fn jobs_flag_is_accepted() {
    let out = run(&[
        "--jobs", "1", "dst", "enumerate", "--n", "3", "--search", "unsuccessful", "--keys",
        "infinite",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn early_closed_stdout_is_quiet() {
    use std::io::Read;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_treepgf"))
        .args(["cumulants", "--max-order", "8"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    // Hang up before the output lands, like `treepgf ... | head` does.
    drop(child.stdout.take());
    let status = child.wait().expect("child exits");
    let mut err = String::new();
    child
        .stderr
        .take()
        .unwrap()
        .read_to_string(&mut err)
        .unwrap();
    assert_eq!(status.code(), Some(0), "stderr: {err}");
    assert!(err.is_empty(), "expected silence on early close, got: {err}");
}

#[test]
fn table_format_flattens() {
    let out = run(&[
        "--format", "table", "bst", "moments", "--search", "successful", "--n", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("payload.mean") && text.contains("17/9"), "{text}");
}
