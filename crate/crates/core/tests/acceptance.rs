//! Acceptance criteria 1-10. Each test prints one PASS/FAIL line followed by
//! its check table; run with `--nocapture` to see them.

use warpspec::verify::{run_criterion, CriterionOutcome, Measured};

fn report(c: &CriterionOutcome) {
    println!("{}", c.summary_line());
    for check in &c.checks {
        let measured = match &check.measured {
            Measured::Value(v) => format!("{v:.6e}"),
            Measured::Count { passed, total } => format!("{passed}/{total}"),
            Measured::Flag(b) => b.to_string(),
            Measured::Error { error } => format!("error: {error}"),
        };
        println!(
            "    [{}] {:<48} measured {:<16} expected {}",
            if check.pass { "ok" } else { "!!" },
            check.label,
            measured,
            check.expected
        );
    }
}

fn criterion(id: u8) {
    let outcome = run_criterion(id).expect("known criterion");
    report(&outcome);
    assert!(outcome.pass, "{}", outcome.summary_line());
}

#[test]
fn criterion_01_equality_model_spectrum() {
    criterion(1);
}

#[test]
fn criterion_02_essential_spectrum_and_barrier() {
    criterion(2);
}

#[test]
fn criterion_03_tail_decay_exponent() {
    criterion(3);
}

#[test]
fn criterion_04_closed_form_volume() {
    criterion(4);
}

#[test]
fn criterion_05_gaussian_soliton_curvature() {
    criterion(5);
}

#[test]
fn criterion_06_euclidean_sanity() {
    criterion(6);
}

#[test]
fn criterion_07_oscillation_property_suite() {
    criterion(7);
}

#[test]
fn criterion_08_bound_compliance_sweep() {
    criterion(8);
}

#[test]
fn criterion_09_splitting_inequality() {
    criterion(9);
}

#[test]
fn criterion_10_curvature_bound_calculators() {
    criterion(10);
}
