//! Acceptance criteria at the default scale: 6+6 dimensions, 100 trials per
//! suite, seed 42. Every tolerance below is pinned; none is derived from the
//! run configuration.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use det2_core::cocycles::{
    b_via_connection_residual, coboundary_b, coboundary_relation_residual, omega_a, omega_g, LieElement,
};
use det2_core::grassmann::GrassmannPoint;
use det2_core::harness::{run_suites, Suite, SuiteConfig, SuiteReport};
use det2_core::numkernel::{c64, CMat};
use det2_core::polarized::Polarization;
use det2_core::stiefel::Frame;

struct Run {
    report: SuiteReport,
    elapsed: Duration,
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = SuiteConfig::default();
        assert_eq!((cfg.dim_plus, cfg.dim_minus, cfg.trials, cfg.seed), (6, 6, 100, 42));
        let start = Instant::now();
        let report = run_suites(&cfg).expect("default configuration is valid");
        Run { report, elapsed: start.elapsed() }
    })
}

/// Checks `(suite, check, pinned tolerance)`; prints one summary line.
fn criterion(label: &str, items: &[(Suite, &str, f64)]) {
    let report = &run().report;
    let mut ok = true;
    let mut details = Vec::new();
    for &(suite, name, tol) in items {
        let s = report.suite(suite).unwrap_or_else(|| panic!("suite {suite} missing"));
        let c = report.check(suite, name).unwrap_or_else(|| panic!("check {suite}/{name} missing"));
        let pass = s.errors.is_empty() && c.max_residual <= tol;
        ok &= pass;
        details.push(format!(
            "{suite}/{name} max {:.3e} (tol {tol:.0e}){}",
            c.max_residual,
            if pass { "" } else { " FAIL" }
        ));
        for e in &s.errors {
            details.push(format!("{suite} error: {e}"));
        }
    }
    println!("[{}] {label}: {}", if ok { "PASS" } else { "FAIL" }, details.join("; "));
    assert!(ok, "{label} not met");
}

/// Prints a check that is reported alongside a criterion without deciding it.
fn diagnostic(suite: Suite, name: &str, tol: f64) {
    let c = run().report.check(suite, name).expect("diagnostic check present");
    let verdict = if c.max_residual <= tol { "holds" } else { "does not hold" };
    println!("    diagnostic {suite}/{name}: max {:.3e}, {verdict} at {tol:.0e}", c.max_residual);
}

#[test]
fn holder_inequalities() {
    criterion(
        "Schatten-Hölder inequality",
        &[(Suite::Schatten, "holder_1_2_2", 1e-12), (Suite::Schatten, "holder_2_4_4", 1e-12)],
    );
}

#[test]
fn regularized_determinant_oracle() {
    criterion(
        "det2 closed form and det1 = det",
        &[(Suite::Regdet, "det2_closed_form", 1e-10), (Suite::Regdet, "det1_is_det", 0.0)],
    );
}

#[test]
fn multiplicative_anomaly() {
    criterion("det2 multiplicative anomaly", &[(Suite::Regdet, "anomaly", 1e-10)]);
}

#[test]
fn preline_cocycle_condition() {
    criterion("pre-line bundle cocycle condition", &[(Suite::Preline, "cocycle_condition", 1e-10)]);
}

#[test]
fn log_derivative_of_f() {
    criterion(
        "log-derivative of the transition function",
        &[(Suite::AppendixB, "dlogf", 1e-6), (Suite::AppendixB, "dlogf_fixed_gauge", 1e-6)],
    );
}

#[test]
fn connection_descends() {
    criterion(
        "descent of the connection",
        &[(Suite::Descent, "descent", 1e-6), (Suite::Descent, "descent_vertical", 1e-6)],
    );
}

#[test]
fn connection_curvature_and_closedness() {
    let report = &run().report;
    if report.check(Suite::Curvature, "dA_matches_curvature_form").is_some_and(|c| c.max_residual > 1e-5) {
        diagnostic(Suite::Curvature, "dA_matches_negated_curvature_form", 1e-5);
    }
    criterion(
        "curvature of the connection and closedness",
        &[(Suite::Curvature, "dA_matches_curvature_form", 1e-5), (Suite::Closedness, "curvature_closed", 1e-5)],
    );
}

#[test]
fn frame_curvature_lemma() {
    criterion("structure equation for the frame connection", &[(Suite::Connection, "structure_equation", 1e-5)]);
}

#[test]
fn cocycle_conditions() {
    criterion(
        "Lie algebra cocycle conditions",
        &[(Suite::Cocycle, "cocycle_omega_a", 1e-9), (Suite::Cocycle, "cocycle_omega_g", 1e-9)],
    );
}

#[test]
fn cocycle_rewrites() {
    criterion(
        "conditional-trace form and curvature form of the cocycles",
        &[(Suite::Cocycle, "conditional_trace_form", 1e-10), (Suite::Cocycle, "omega_g_is_minus_curvature", 1e-10)],
    );
}

#[test]
fn coboundary_relation_and_lift() {
    let report = &run().report;
    if report.check(Suite::Coboundary, "coboundary_relation").is_some_and(|c| c.max_residual > 1e-9) {
        diagnostic(Suite::Coboundary, "coboundary_relation_opposite_sign", 1e-9);
    }
    criterion(
        "coboundary relation and b as the connection on the lift",
        &[
            (Suite::Coboundary, "coboundary_relation", 1e-9),
            (Suite::Coboundary, "b_via_connection", 1e-8),
            (Suite::Coboundary, "hand_values", 1e-10),
            (Suite::Coboundary, "hand_relation", 1e-10),
            (Suite::Coboundary, "hand_b_via_connection", 1e-8),
        ],
    );
}

#[test]
fn two_by_two_hand_case() {
    let pol = Polarization::symmetric(1).unwrap();
    let (o, i) = (c64(0.0, 0.0), c64(1.0, 0.0));
    let f = GrassmannPoint::new(pol, CMat::from_row_slice(2, 2, &[o, i, i, o])).unwrap();
    let x = LieElement::new(CMat::from_row_slice(2, 2, &[i, o, o, o])).unwrap();
    let y = LieElement::new(CMat::from_row_slice(2, 2, &[o, i, o, o])).unwrap();
    let w = Frame::new(pol, CMat::from_row_slice(2, 1, &[i, i])).unwrap();
    let a = omega_a(&f, &x, &y).unwrap();
    let g = omega_g(&f, &x, &y).unwrap();
    let b = coboundary_b(&f, &x).unwrap();
    let rel = coboundary_relation_residual(&f, &x, &y).unwrap();
    let lift = b_via_connection_residual(&w, &x).unwrap();
    let ok = a.norm() <= 1e-10
        && (g - c64(-0.5, 0.0)).norm() <= 1e-10
        && (b - c64(-0.25, 0.0)).norm() <= 1e-10
        && rel <= 1e-10
        && lift <= 1e-8;
    println!(
        "[{}] 2x2 hand case: omega_A {a:.3e}, omega_G {g:.3e}, b(E11) {b:.3e}, relation {rel:.3e}, lift {lift:.3e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn involution_and_frame_identities() {
    criterion(
        "involution and frame identities",
        &[(Suite::AppendixA, "involution_identities", 1e-10), (Suite::AppendixA, "frame_identities", 1e-10)],
    );
}

#[test]
fn runtime_budget() {
    let elapsed = run().elapsed;
    let ok = elapsed <= Duration::from_secs(60);
    println!(
        "[{}] full run at default scale: {:.2}s (budget 60s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok);
}
