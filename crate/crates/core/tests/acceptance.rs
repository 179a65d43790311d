//! Acceptance suite: runs every registered claim at its pinned tolerance and
//! trial count, printing one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use swivel_core::verify::{run_claim, ClaimConfig, VerificationReport};

fn check(claim_id: &str, trials: usize, seed: u64) -> VerificationReport {
    let cfg = ClaimConfig { trials, seed, ..ClaimConfig::default() };
    let report = run_claim(claim_id, &cfg).unwrap_or_else(|e| {
        panic!("claim {claim_id} failed to run: {e}");
    });
    let status = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {:<22} trials={:<3} worst_violation={:+.3e} tolerance={:.1e} wall={:.1}s",
        report.claim_id,
        report.trials,
        report.worst_violation,
        report.tolerance,
        report.wall_time_s
    );
    if !report.passed() {
        for note in &report.notes {
            println!("    note: {note}");
        }
    }
    report
}

#[test]
fn acceptance_01_thm_monotone() {
    assert!(check("thm-monotone", 50, 1).passed());
}

#[test]
fn acceptance_02_thm_monotone_tilde() {
    assert!(check("thm-monotone-tilde", 50, 2).passed());
}

#[test]
fn acceptance_03_reduction() {
    assert!(check("reduction", 50, 3).passed());
}

#[test]
fn acceptance_04_prop_lim_a_1() {
    assert!(check("prop-lim-a-1", 50, 4).passed());
}

#[test]
fn acceptance_05_non_negativity() {
    assert!(check("non-negativity", 50, 5).passed());
}

#[test]
fn acceptance_06_cor_recover() {
    assert!(check("cor-recover", 50, 6).passed());
}

#[test]
fn acceptance_07_thm_rel_ent_other() {
    assert!(check("thm-rel-ent-other", 50, 7).passed());
}

#[test]
fn acceptance_08_cmi_suite() {
    assert!(check("cmi-suite", 12, 8).passed());
}

#[test]
fn acceptance_09_prop_zhang() {
    assert!(check("prop-zhang", 50, 9).passed());
}

#[test]
fn acceptance_10_appendix_a() {
    assert!(check("appendix-a", 50, 10).passed());
}

#[test]
fn acceptance_11_appendix_c() {
    assert!(check("appendix-c", 50, 11).passed());
}

#[test]
fn acceptance_12_oracle_equivalence() {
    assert!(check("oracle-equivalence", 12, 12).passed());
}

#[test]
fn acceptance_13_combos() {
    assert!(check("combos", 20, 13).passed());
}
