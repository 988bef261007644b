//! Acceptance suite: every gate criterion as its own test, each printing
//! one pass/fail line per check. Tolerances and thresholds are pinned in
//! the suite implementations; this target asserts all of them.

use conelab_core::harness::config::RunConfig;
use conelab_core::harness::manifest::{ReportRow, RowStatus};
use conelab_core::harness::suites;

fn assert_rows(label: &str, rows: &[ReportRow]) {
    let mut failed = Vec::new();
    for r in rows {
        let tag = match r.status {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Info => "info",
        };
        println!("[{tag}] {label} :: {} = {:.6e} ({})", r.id, r.measured, r.target);
        if r.status == RowStatus::Fail {
            failed.push(format!("{} = {:.6e} (want {})", r.id, r.measured, r.target));
        }
    }
    assert!(failed.is_empty(), "{label} failed checks:\n{}", failed.join("\n"));
}

fn cfg() -> RunConfig {
    RunConfig::default()
}

#[test]
fn criterion_a_spectrum_scan() {
    let t0 = std::time::Instant::now();
    let rows = suites::suite_spectrum_scan(&cfg()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    println!("[info] A :: runtime = {secs:.2} s (target < 30)");
    assert_rows("A", &rows);
    assert!(secs < 30.0, "spectrum scan took {secs:.1} s, target < 30 s");
}

#[test]
fn criterion_b_eigenpair() {
    assert_rows("B", &suites::criterion_b_eigenpair(&cfg()).unwrap());
}

#[test]
fn criterion_c_wronskian_w0() {
    assert_rows("C", &suites::criterion_c_wronskian(&cfg()).unwrap());
}

#[test]
fn criterion_d_connection_formula() {
    assert_rows("D", &suites::criterion_d_connection(&cfg()).unwrap());
}

#[test]
fn criterion_e_phi0_representations() {
    assert_rows("E", &suites::criterion_e_phi0(&cfg()).unwrap());
}

#[test]
fn criterion_f_green_resolvent_equivalence() {
    assert_rows("F", &suites::criterion_f_green_resolvent(&cfg()).unwrap());
}

#[test]
fn criterion_g_semigroup_consistency() {
    assert_rows("G", &suites::criterion_g_consistency(&cfg()).unwrap());
}

#[test]
fn criterion_h_improved_energy_bound() {
    assert_rows("H", &suites::criterion_h_improved_energy(&cfg()).unwrap());
}

#[test]
fn criterion_i_kernel_bounds() {
    assert_rows("I", &suites::suite_kernel_bounds(&cfg()).unwrap());
}

#[test]
fn criterion_j_oscillatory_lemmas() {
    assert_rows("J", &suites::suite_osc_check(&cfg()).unwrap());
}

#[test]
fn criterion_k_nonlinear_stability() {
    let t0 = std::time::Instant::now();
    let (_, rows) = suites::stability_sweep_points(&cfg()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    println!("[info] K :: runtime = {secs:.2} s (target < 600)");
    assert_rows("K", &rows);
    assert!(secs < 600.0, "stability sweep took {secs:.1} s, target < 10 min");
}

#[test]
fn criterion_l_norm_machinery() {
    assert_rows("L", &suites::criterion_l_norm_machinery(&cfg()).unwrap());
}
