//! Acceptance suite: runs every pinned criterion at its stated tolerance
//! and prints one pass/fail line per criterion. Run with
//! `cargo test -p lindyn-cli --test acceptance -- --nocapture` or via
//! `lindyn selftest`.

use std::path::Path;
use std::process::Command;

use lindyn_cli::selftest::run_criterion;

fn binary() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_lindyn"))
}

fn check(id: usize) {
    let outcome = run_criterion(id, binary()).expect("criterion present");
    println!("{}", outcome.render());
    assert!(outcome.passed, "{}", outcome.render());
}

#[test]
fn criterion_01_poly_trunc_density() {
    check(1);
}

#[test]
fn criterion_02_rank_one_hc_grid() {
    check(2);
}

#[test]
fn criterion_03_rolewicz_criterion() {
    check(3);
}

#[test]
fn criterion_04_criterion_implies_transitivity() {
    check(4);
}

#[test]
fn criterion_05_closure_both_ways() {
    check(5);
}

#[test]
fn criterion_06_group_axioms() {
    check(6);
}

#[test]
fn criterion_07_annulus_witnesses() {
    check(7);
}

#[test]
fn criterion_08_direct_sum_projection() {
    check(8);
}

#[test]
fn criterion_09_similarity_transfer() {
    check(9);
}

#[test]
fn criterion_10_hc_grid_monotone_and_oracle() {
    check(10);
}

#[test]
fn criterion_11_cli_golden() {
    check(11);
}

/// The selftest subcommand runs the same criteria and must exit 0.
#[test]
fn criterion_11_selftest_exits_zero() {
    let output = Command::new(binary())
        .arg("selftest")
        .output()
        .expect("selftest runs");
    println!("{}", String::from_utf8_lossy(&output.stdout));
    assert_eq!(
        output.status.code(),
        Some(0),
        "selftest stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}
