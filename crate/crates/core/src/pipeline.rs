//! End-to-end verification: exact identity suites from an intersection
//! array, and the full blueprint-versus-oracle loop on a concrete graph.

use serde::Serialize;

use crate::arrays::{self, IntersectionArray};
use crate::config::{OracleConfig, SIGN_SAMPLES};
use crate::modules::{
    self, blueprint_endpoint0, blueprint_endpoint1, blueprint_endpoint2, classify_eta, CaseTag,
    ModuleBlueprint, ModuleError,
};
use crate::oracle::{
    self, adjacency_eigenvalue_agreement, decompose, graph_structure_report, local_spectrum,
    multiplicity_audit, operator_set, verify_blueprint, DecompositionSummary, GraphInstance,
    OracleError,
};
use crate::polyfams::{self, PolyError};
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::scalar::Rat;
use crate::spectra::{self, AnySpectrum, SpectraError, Spectrum};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

/// Exact-side verification of one intersection array.
pub struct ArrayVerification {
    pub array: IntersectionArray,
    pub sections: Vec<Report>,
    pub spectrum_exact: Option<Spectrum<Rat>>,
}

impl ArrayVerification {
    pub fn all_pass(&self) -> bool {
        self.sections.iter().all(Report::all_pass)
    }
}

/// Runs every array-level suite: validation, tensor checks, spectrum and its
/// facts, the polynomial identity suite, sign patterns, and the endpoint-2
/// formula sweep.
pub fn verify_array(arr: &IntersectionArray) -> Result<ArrayVerification, PipelineError> {
    let mut sections = Vec::new();

    let validation = arrays::validate(arr);
    let valid = validation.all_pass();
    sections.push(validation);
    if !valid {
        return Ok(ArrayVerification {
            array: arr.clone(),
            sections,
            spectrum_exact: None,
        });
    }

    let val = arrays::valencies(arr);
    let tensor = arrays::intersection_tensor(arr);
    sections.push(arrays::tensor_checks(arr, &tensor, &val));

    let fams = polyfams::families(arr);
    let psi = polyfams::psi_family(arr, &fams);

    let spectrum_exact = match spectra::spectrum(arr)? {
        AnySpectrum::Exact(spec) => {
            let mut lemmas = spectra::verify_spectral_lemmas(arr, &spec);
            lemmas.push(spectra::orthogonality_residual(arr, &spec));
            lemmas.push(modules::tilde_fixed_point_check(arr, &spec));
            sections.push(lemmas);

            let thetas = polyfams::admissible_theta_samples(arr, &spec);
            sections.push(polyfams::verify_polynomial_identities(
                arr, &fams, &psi, &spec, &thetas,
            )?);
            sections.push(polyfams::verify_sign_lemmas(arr, &fams, &spec));
            sections.push(modules::blueprint_eta_sweep(arr, &spec, SIGN_SAMPLES)?);
            Some(spec)
        }
        AnySpectrum::Approx(spec) => {
            let mut lemmas = spectra::verify_spectral_lemmas(arr, &spec);
            lemmas.push(spectra::orthogonality_residual(arr, &spec));
            sections.push(lemmas);

            let th1sq = spec.theta[1] * spec.theta[1];
            let sample = polyfams::theta_parameter(arr, &spec, th1sq + 1.0)?;
            sections.push(polyfams::verify_polynomial_identities(
                arr,
                &fams,
                &psi,
                &spec,
                &[sample],
            )?);
            sections.push(polyfams::verify_sign_lemmas(arr, &fams, &spec));
            None
        }
    };

    Ok(ArrayVerification {
        array: arr.clone(),
        sections,
        spectrum_exact,
    })
}

/// Full verification of one `(graph, base vertex)` pair.
pub struct GraphVerification {
    pub graph_name: String,
    pub base_vertex: usize,
    pub array: Option<IntersectionArray>,
    pub sections: Vec<Report>,
    pub decomposition: Option<DecompositionSummary>,
}

impl GraphVerification {
    pub fn all_pass(&self) -> bool {
        self.sections.iter().all(Report::all_pass)
    }

    pub fn to_json(&self) -> GraphVerificationJson {
        GraphVerificationJson {
            graph: self.graph_name.clone(),
            base_vertex: self.base_vertex,
            array: self.array.clone(),
            all_pass: self.all_pass(),
            sections: self.sections.clone(),
            decomposition: self.decomposition.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphVerificationJson {
    pub graph: String,
    pub base_vertex: usize,
    pub array: Option<IntersectionArray>,
    pub all_pass: bool,
    pub sections: Vec<Report>,
    pub decomposition: Option<DecompositionSummary>,
}

/// Merges per-module reports of the same shape into one section, keeping the
/// worst residual per line name.
fn merge_reports(title: String, reports: &[Report]) -> Report {
    let mut merged = Report::new(title);
    for report in reports {
        for line in &report.lines {
            match merged.lines.iter_mut().find(|l| l.name == line.name) {
                Some(existing) => {
                    if line.residual > existing.residual {
                        existing.residual = line.residual;
                    }
                    if !line.pass {
                        existing.pass = false;
                        if existing.detail.is_empty() {
                            existing.detail = line.detail.clone();
                        }
                    }
                }
                None => merged.push(line.clone()),
            }
        }
    }
    merged
}

/// Builds the blueprint matching a measured endpoint-2 module. Boundary
/// local eigenvalues are replaced by their exact values so the blueprint is
/// evaluated in rational arithmetic whenever the spectrum allows it.
fn endpoint2_blueprint_for(
    arr: &IntersectionArray,
    spec_exact: Option<&Spectrum<Rat>>,
    spec_f64: &Spectrum<f64>,
    eta: f64,
) -> Result<Option<ModuleBlueprint<f64>>, PipelineError> {
    let case_f64 = match classify_eta(eta, arr, spec_f64) {
        Ok(c) => c,
        Err(_) => return Ok(None),
    };
    if let Some(spec) = spec_exact {
        let eta_exact = match case_f64.tag {
            CaseTag::I => Some(modules::tilde_theta1(arr, spec)),
            CaseTag::II | CaseTag::III => Some(modules::tilde_thetad(arr, spec)),
            CaseTag::IV => None,
        };
        if let Some(eta_exact) = eta_exact {
            let case = classify_eta(eta_exact, arr, spec)?;
            return Ok(Some(blueprint_endpoint2(arr, spec, &case)?.to_f64()));
        }
    }
    Ok(Some(blueprint_endpoint2(arr, spec_f64, &case_f64)?))
}

/// Runs the complete loop on one graph: structure, exact suites, operator
/// construction, local spectrum, decomposition, every blueprint comparison,
/// and the multiplicity audit.
pub fn verify_graph(
    g: &GraphInstance,
    x: usize,
    cfg: &OracleConfig,
) -> Result<GraphVerification, PipelineError> {
    let (structure, arr) = graph_structure_report(g);
    let structure_pass = structure.all_pass();
    let mut sections = vec![structure];
    let arr = match arr {
        Ok(a) if structure_pass => a,
        Ok(a) => {
            return Ok(GraphVerification {
                graph_name: g.name.clone(),
                base_vertex: x,
                array: Some(a),
                sections,
                decomposition: None,
            })
        }
        Err(_) => {
            return Ok(GraphVerification {
                graph_name: g.name.clone(),
                base_vertex: x,
                array: None,
                sections,
                decomposition: None,
            })
        }
    };

    let array_verification = verify_array(&arr)?;
    sections.extend(array_verification.sections);
    let spec_exact = array_verification.spectrum_exact;
    let spec_f64 = match &spec_exact {
        Some(s) => s.to_f64(),
        None => spectra::spectrum_f64(&arr)?,
    };

    let ops = operator_set(g, x, &arr, &cfg.tol)?;
    let mut oracle_section = ops.build_report.clone();
    oracle_section.push(adjacency_eigenvalue_agreement(g, &ops, &cfg.tol));
    sections.push(oracle_section);

    // local eigenvalues and their admissible range
    let local = local_spectrum(g, x, &arr)?;
    {
        let mut section = Report::new(format!("local eigenvalues: {} at vertex {x}", g.name));
        let t1 = modules::tilde_theta1(&arr, &spec_f64);
        let td = modules::tilde_thetad(&arr, &spec_f64);
        let slack = cfg.tol.eigenvalue_agreement;
        section.push(CheckLine::from_residual(
            "shell-valency-eigenvalue",
            (local.ordered[0] - local.p22_2).abs(),
            slack,
        ));
        let k = arr.k() as usize;
        let mut b3line = ResidualAccumulator::new("endpoint1-eigenvalue-copies", slack);
        for i in 1..k {
            b3line.record((local.ordered[i] - local.b3_minus_1).abs(), || {
                format!("position {i}")
            });
        }
        section.push(b3line.finish());
        let mut bounds = ResidualAccumulator::new("local-eigenvalue-bounds", 0.0);
        for (i, &eta) in local.ordered.iter().enumerate().skip(k) {
            bounds.record_bool(eta >= t1 - slack && eta <= td + slack, || {
                format!("eta_{} = {eta:.8} outside [{t1:.8}, {td:.8}]", i + 1)
            });
        }
        section.push(bounds.finish());
        sections.push(section);
    }

    let dec = decompose(g, &ops, &arr, cfg)?;
    sections.push(dec.report.clone());

    // blueprint comparisons, grouped by endpoint and case
    {
        let mut groups: Vec<(String, Vec<Report>)> = Vec::new();
        let mut push_group = |key: String, report: Report| match groups
            .iter_mut()
            .find(|(k, _)| *k == key)
        {
            Some((_, list)) => list.push(report),
            None => groups.push((key, vec![report])),
        };
        let mut skipped_deep = 0usize;
        for rec in &dec.modules {
            match rec.endpoint {
                0 => {
                    let bp = match &spec_exact {
                        Some(spec) => blueprint_endpoint0(&arr, spec).to_f64(),
                        None => blueprint_endpoint0(&arr, &spec_f64),
                    };
                    push_group(
                        "endpoint 0 module vs blueprint".into(),
                        verify_blueprint(&ops, &arr, rec, &bp, &cfg.tol),
                    );
                }
                1 => {
                    let bp = match &spec_exact {
                        Some(spec) => blueprint_endpoint1(&arr, spec).to_f64(),
                        None => blueprint_endpoint1(&arr, &spec_f64),
                    };
                    push_group(
                        "endpoint 1 modules vs blueprint".into(),
                        verify_blueprint(&ops, &arr, rec, &bp, &cfg.tol),
                    );
                }
                2 if rec.thin && rec.local_eigenvalue.is_some() => {
                    let eta = rec.local_eigenvalue.unwrap();
                    match endpoint2_blueprint_for(&arr, spec_exact.as_ref(), &spec_f64, eta)? {
                        Some(bp) => {
                            let tag = bp.case.as_ref().map(|c| c.tag.as_str()).unwrap_or("?");
                            push_group(
                                format!("endpoint 2 case {tag} modules vs blueprint"),
                                verify_blueprint(&ops, &arr, rec, &bp, &cfg.tol),
                            );
                        }
                        None => {
                            let mut r = Report::new("endpoint 2 unclassified".to_string());
                            r.push(CheckLine::fail(
                                "local-eigenvalue-classification",
                                1.0,
                                format!("eta = {eta} out of range"),
                            ));
                            push_group("endpoint 2 unclassified".into(), r);
                        }
                    }
                }
                _ => skipped_deep += 1,
            }
        }
        for (title, reports) in groups {
            let count = reports.len();
            let mut merged = merge_reports(title, &reports);
            merged.title = format!("{} ({count} module(s))", merged.title);
            sections.push(merged);
        }
        if skipped_deep > 0 {
            let mut r = Report::new("deeper modules".to_string());
            r.push(CheckLine::pass(
                format!("{skipped_deep} module(s) of endpoint >= 3 counted, no blueprint applies"),
                0.0,
            ));
            sections.push(r);
        }
    }

    sections.push(multiplicity_audit(&ops, &dec, &cfg.tol)?);

    Ok(GraphVerification {
        graph_name: g.name.clone(),
        base_vertex: x,
        array: Some(arr),
        sections,
        decomposition: Some(dec.summary(g, x, cfg.seed)),
    })
}

/// Resolves a graph specifier: `builtin:hypercube:D`, `builtin:doubled_odd:K`,
/// or `edgelist:PATH`.
pub fn resolve_graph(spec: &str) -> Result<GraphInstance, String> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        let mut parts = rest.split(':');
        let family = parts.next().unwrap_or("");
        let param: usize = parts
            .next()
            .ok_or_else(|| format!("builtin graph needs a parameter: {spec}"))?
            .parse()
            .map_err(|e| format!("bad builtin parameter in {spec}: {e}"))?;
        match family {
            "hypercube" => {
                if !(4..=10).contains(&param) {
                    return Err(format!("hypercube parameter must be in 4..=10, got {param}"));
                }
                Ok(oracle::build_hypercube(param))
            }
            "doubled_odd" => {
                if !(3..=4).contains(&param) {
                    return Err(format!("doubled_odd parameter must be 3 or 4, got {param}"));
                }
                Ok(oracle::build_doubled_odd(param))
            }
            other => Err(format!("unknown builtin graph family: {other}")),
        }
    } else if let Some(path) = spec.strip_prefix("edgelist:") {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        oracle::parse_edge_list(&text).map_err(|e| e.to_string())
    } else {
        Err(format!(
            "graph spec must be builtin:<family>:<param> or edgelist:<path>, got {spec}"
        ))
    }
}

/// The builtin suite used by `verify --graph all`.
pub fn builtin_suite() -> Vec<GraphInstance> {
    vec![
        oracle::build_hypercube(4),
        oracle::build_hypercube(5),
        oracle::build_hypercube(6),
        oracle::build_doubled_odd(3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q4_full_pipeline_passes() {
        let g = oracle::build_hypercube(4);
        let result = verify_graph(&g, 0, &OracleConfig::default()).unwrap();
        for section in &result.sections {
            assert!(section.all_pass(), "{section}");
        }
        let dec = result.decomposition.unwrap();
        assert_eq!(dec.total_dimension, 16);
        assert_eq!(dec.mu, vec![2]);
        assert_eq!(dec.mult, vec![2]);
    }

    #[test]
    fn doubled_odd_full_pipeline_passes() {
        let g = oracle::build_doubled_odd(3);
        let result = verify_graph(&g, 0, &OracleConfig::default()).unwrap();
        for section in &result.sections {
            assert!(section.all_pass(), "{section}");
        }
    }

    #[test]
    fn array_only_pipeline_q5() {
        let arr = IntersectionArray::hypercube(5);
        let result = verify_array(&arr).unwrap();
        assert!(result.all_pass());
        assert!(result.spectrum_exact.is_some());
    }

    #[test]
    fn resolve_graph_specs() {
        assert_eq!(resolve_graph("builtin:hypercube:4").unwrap().n, 16);
        assert_eq!(resolve_graph("builtin:doubled_odd:3").unwrap().n, 20);
        assert!(resolve_graph("builtin:hypercube:3").is_err());
        assert!(resolve_graph("builtin:nope:4").is_err());
        assert!(resolve_graph("edgelist:/nonexistent/file").is_err());
        assert!(resolve_graph("garbage").is_err());
    }
}
