//! Acceptance suite: the release gate for the whole workbench.
//!
//! Each test covers one criterion, prints a single pass/fail line, and pins
//! its tolerance in code. The suite arrays are the hypercubes of diameter
//! 4, 5, 6, 8 and the doubled Odd graph of valency 3; the oracle graphs are
//! the 16- and 64-vertex hypercubes and the 20-vertex doubled Odd graph.

use std::time::Instant;

use terwilliger::arrays::IntersectionArray;
use terwilliger::config::{OracleConfig, SIGN_SAMPLES};
use terwilliger::modules::{blueprint_eta_sweep, g_top_vanishing, tilde_theta1, tilde_thetad};
use terwilliger::oracle::{
    adjacency_eigenvalue_agreement, build_doubled_odd, build_hypercube, local_spectrum,
    operator_set, verify_drg,
};
use terwilliger::pipeline::{verify_graph, GraphVerification};
use terwilliger::polyfams::{
    admissible_theta_samples, families, psi_family, verify_polynomial_identities,
    verify_sign_lemmas,
};
use terwilliger::scalar::rat_int;
use terwilliger::spectra::spectrum_exact;
use terwilliger::{Rat, Report};

fn suite_arrays() -> Vec<IntersectionArray> {
    vec![
        IntersectionArray::hypercube(4),
        IntersectionArray::hypercube(5),
        IntersectionArray::hypercube(6),
        IntersectionArray::hypercube(8),
        IntersectionArray::doubled_odd(3),
    ]
}

/// Wall-clock limit: the stated target under optimization, opened up for
/// unoptimized builds.
fn time_limit(target_secs: f64) -> f64 {
    if cfg!(debug_assertions) {
        target_secs * 30.0
    } else {
        target_secs
    }
}

fn report_line(criterion: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {criterion}: {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn require_exact(report: &Report, lines: &[&str]) {
    for name in lines {
        let line = report
            .lines
            .iter()
            .find(|l| l.name == *name)
            .unwrap_or_else(|| panic!("missing identity line {name} in {}", report.title));
        assert!(line.pass, "{line}");
        assert_eq!(line.residual, 0.0, "identity {name} not exact");
    }
}

#[test]
fn acceptance_01_polynomial_identity_suite() {
    let t0 = Instant::now();
    for arr in suite_arrays() {
        let fams = families(&arr);
        let psi = psi_family(&arr, &fams);
        let spec = spectrum_exact(&arr).expect("suite spectra are integral");
        let thetas = admissible_theta_samples(&arr, &spec);
        let report = verify_polynomial_identities(&arr, &fams, &psi, &spec, &thetas).unwrap();
        assert!(report.all_pass(), "{report}");
        let mut names = vec![
            "p-partial-sum-recurrence",
            "p-vanishing-interior",
            "p-orthogonality",
            "psi-product-reduction",
            "christoffel-darboux",
            "psi-orthogonality",
            "P-recurrence",
            "g-quadratic-shift",
            "g-three-term-recurrence",
            "g-orthogonality",
        ];
        if arr.d % 2 == 0 {
            names.push("g-top-vanishing");
        }
        require_exact(&report, &names);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report_line(
        "criterion 1 (polynomial identities, 5 arrays, exact)",
        elapsed < time_limit(1.0),
        &format!("all identities hold with residual 0; {elapsed:.3}s"),
    );
}

#[test]
fn acceptance_02_sign_lemma_suite() {
    let t0 = Instant::now();
    for arr in suite_arrays() {
        let fams = families(&arr);
        let spec = spectrum_exact(&arr).unwrap();
        let report = verify_sign_lemmas(&arr, &fams, &spec);
        assert!(report.all_pass(), "{report}");
        assert_eq!(report.max_residual(), 0.0, "sign checks must be exact");
        assert!(SIGN_SAMPLES >= 20);
        if arr.d % 2 == 0 {
            // P_D(0) = 0 exactly
            let at_zero = fams.big_p[arr.d].eval(&Rat::from(rat_int(0)));
            assert_eq!(at_zero, rat_int(0));
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report_line(
        "criterion 2 (sign patterns, >= 20 samples per regime)",
        elapsed < time_limit(1.0),
        &format!("all sign patterns hold exactly; {elapsed:.3}s"),
    );
}

#[test]
fn acceptance_03_spectrum_reproduction() {
    let expectations: Vec<(&str, Vec<i64>, Vec<i64>)> = vec![
        ("q4", vec![4, 2, 0, -2, -4], vec![1, 4, 6, 4, 1]),
        ("q6", vec![6, 4, 2, 0, -2, -4, -6], vec![1, 6, 15, 20, 15, 6, 1]),
        ("2o3", vec![3, 2, 1, -1, -2, -3], vec![1, 4, 5, 5, 4, 1]),
    ];
    let graphs = [build_hypercube(4), build_hypercube(6), build_doubled_odd(3)];
    for (g, (name, theta, mult)) in graphs.iter().zip(expectations) {
        let arr = verify_drg(g).unwrap();
        let spec = spectrum_exact(&arr).unwrap();
        let theta: Vec<Rat> = theta.into_iter().map(rat_int).collect();
        let mult: Vec<Rat> = mult.into_iter().map(rat_int).collect();
        assert_eq!(spec.theta, theta, "{name} eigenvalues");
        assert_eq!(spec.m, mult, "{name} multiplicities");

        let ops = operator_set(g, 0, &arr, &Default::default()).unwrap();
        let line = adjacency_eigenvalue_agreement(g, &ops, &Default::default());
        assert!(line.pass && line.residual <= 1e-10, "{name}: {line}");
    }
    report_line(
        "criterion 3 (spectrum reproduction, exact + oracle agreement 1e-10)",
        true,
        "q4/q6/doubled-odd spectra exact; dense eigenvalues agree",
    );
}

#[test]
fn acceptance_04_local_eigenvalue_reproduction() {
    let g = build_hypercube(4);
    let arr = verify_drg(&g).unwrap();
    let local = local_spectrum(&g, 0, &arr).unwrap();
    let tol = 1e-10;

    assert_eq!(local.ordered.len(), 6);
    assert!((local.p22_2 - 4.0).abs() <= tol, "shell valency");
    assert!((local.ordered[0] - 4.0).abs() <= tol);
    for i in 1..4 {
        assert!(local.ordered[i].abs() <= tol, "b_3 - 1 copies");
    }
    let spec = spectrum_exact(&arr).unwrap();
    let t1 = tilde_theta1(&arr, &spec).to_f64();
    let td = tilde_thetad(&arr, &spec).to_f64();
    assert_eq!((t1, td), (-2.0, 0.0));
    for i in 4..6 {
        let eta = local.ordered[i];
        assert!((eta + 2.0).abs() <= tol, "eta_{} = {eta}", i + 1);
        assert!(eta >= t1 - tol && eta <= td + tol, "bounds");
    }
    report_line(
        "criterion 4 (second-subconstituent spectrum of the 4-cube)",
        true,
        "{4, 0^3, -2^2} with valency and bound checks at 1e-10",
    );
}

fn assert_full_pipeline(result: &GraphVerification) {
    for section in &result.sections {
        assert!(section.all_pass(), "{section}");
    }
}

fn section<'a>(result: &'a GraphVerification, prefix: &str) -> &'a Report {
    result
        .sections
        .iter()
        .find(|s| s.title.starts_with(prefix))
        .unwrap_or_else(|| panic!("missing section {prefix}"))
}

#[test]
fn acceptance_05_end_to_end_hypercubes() {
    let t0 = Instant::now();
    for (d, expected_mu) in [(4usize, 2usize), (6, 9)] {
        let g = build_hypercube(d);
        let result = verify_graph(&g, 0, &OracleConfig::default()).unwrap();
        assert_full_pipeline(&result);

        let dec = result.decomposition.as_ref().unwrap();
        let k = d; // hypercube valency equals diameter
        assert_eq!(
            dec.modules
                .iter()
                .filter(|m| m.endpoint == 0 && m.dimension == d + 1)
                .count(),
            1,
            "endpoint-0 module"
        );
        assert_eq!(
            dec.modules
                .iter()
                .filter(|m| m.endpoint == 1 && m.dimension == d - 1)
                .count(),
            k - 1,
            "endpoint-1 copies"
        );
        let endpoint2: Vec<_> = dec.modules.iter().filter(|m| m.endpoint == 2).collect();
        assert_eq!(endpoint2.len(), expected_mu);
        assert!(endpoint2
            .iter()
            .all(|m| m.thin && m.dimension == d - 3 && m.case.as_deref() == Some("I")));
        assert_eq!(dec.phi.len(), 1);
        assert_eq!(dec.mult, vec![expected_mu]);
        assert_eq!(dec.mu, vec![expected_mu]);

        // blueprint sections exist and pass at 1e-8
        for prefix in [
            "endpoint 0 module vs blueprint",
            "endpoint 1 modules vs blueprint",
            "endpoint 2 case I modules vs blueprint",
            "multiplicity audit",
        ] {
            let s = section(&result, prefix);
            assert!(s.all_pass(), "{s}");
            assert!(s.max_residual() <= 1e-8, "{s}");
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report_line(
        "criterion 5 (end-to-end verification on the 4- and 6-cubes)",
        elapsed < time_limit(10.0),
        &format!("decomposition, blueprints, and audit all pass; {elapsed:.3}s"),
    );
}

#[test]
fn acceptance_06_endpoint2_formula_consistency() {
    for arr in suite_arrays() {
        let spec = spectrum_exact(&arr).unwrap();
        let report = blueprint_eta_sweep(&arr, &spec, 20).unwrap();
        assert!(report.all_pass(), "{report}");
        assert_eq!(
            report.max_residual(),
            0.0,
            "rational samples must verify exactly"
        );
        // the sweep covers 20 interior samples (pole included) and, for even
        // diameter, the boundary case
        let consistency_lines = report
            .lines
            .iter()
            .filter(|l| l.name.starts_with("norm-transition-consistency"))
            .count();
        let expected = if arr.d % 2 == 0 { 21 } else { 20 };
        assert_eq!(consistency_lines, expected, "{}", arr.display_name());
        assert!(report
            .lines
            .iter()
            .any(|l| l.name.contains("[eta = -1]")));
    }
    report_line(
        "criterion 6 (norm/transition consistency across sampled local eigenvalues)",
        true,
        "exact at 20 interior samples incl. the pole, plus the even-boundary case",
    );
}

#[test]
fn acceptance_07_even_boundary_degeneracy() {
    for arr in suite_arrays().into_iter().filter(|a| a.d % 2 == 0) {
        let fams = families(&arr);
        let spec = spectrum_exact(&arr).unwrap();
        let line = g_top_vanishing(&arr, &fams, &spec).unwrap();
        assert!(line.pass, "{line}");
        assert_eq!(line.residual, 0.0, "must vanish exactly");
    }
    report_line(
        "criterion 7 (top shell vector vanishes for even diameter, exactly)",
        true,
        "g_(D-2) is zero at every relevant eigenvalue for the even-D arrays",
    );
}

#[test]
fn acceptance_08_odd_diameter_branch() {
    let g = build_doubled_odd(3);
    let result = verify_graph(&g, 0, &OracleConfig::default()).unwrap();
    assert_full_pipeline(&result);

    let dec = result.decomposition.as_ref().unwrap();
    assert_eq!(dec.total_dimension, 20, "spans the whole standard module");
    let cases: Vec<Option<&str>> = dec
        .modules
        .iter()
        .filter(|m| m.endpoint == 2)
        .map(|m| m.case.as_deref())
        .collect();
    assert_eq!(cases.iter().filter(|c| **c == Some("I")).count(), 2);
    assert_eq!(cases.iter().filter(|c| **c == Some("II")).count(), 1);
    for prefix in [
        "endpoint 2 case I modules vs blueprint",
        "endpoint 2 case II modules vs blueprint",
    ] {
        let s = section(&result, prefix);
        assert!(s.all_pass() && s.max_residual() <= 1e-8, "{s}");
    }
    report_line(
        "criterion 8 (odd-diameter branch on the doubled Odd graph)",
        true,
        "cases I and II both realized and matched at 1e-8; 20/20 dimensions",
    );
}

#[test]
fn acceptance_09_determinism() {
    let g = build_hypercube(4);
    let cfg = OracleConfig::default();
    let a = verify_graph(&g, 0, &cfg).unwrap();
    let b = verify_graph(&g, 0, &cfg).unwrap();
    let ja = serde_json::to_string(&a.to_json()).unwrap();
    let jb = serde_json::to_string(&b.to_json()).unwrap();
    assert_eq!(ja, jb, "same seed must give byte-identical reports");
    report_line(
        "criterion 9 (determinism)",
        true,
        "two runs with the same seed produce byte-identical JSON",
    );
}
