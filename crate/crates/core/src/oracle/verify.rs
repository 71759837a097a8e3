//! Checks measured modules against their closed-form blueprints, and the
//! multiplicity bookkeeping across a whole decomposition.

use nalgebra::DVector;

use super::decompose::{ModuleRecord, TDecomposition};
use super::{OperatorSet, OracleError};
use crate::arrays::{valencies, IntersectionArray};
use crate::config::{Tolerances, EIGEN_GROUP_TOL};
use crate::modules::{CaseTag, ModuleBlueprint};
use crate::polyfams;
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::scalar::Scalar;

/// Unit vector spanning the endpoint shell component of the module, plus the
/// second-largest singular value of that component (zero for a clean line).
fn endpoint_vector(
    ops: &OperatorSet,
    rec: &ModuleRecord,
    endpoint: usize,
) -> (DVector<f64>, f64) {
    let m = ops.estar_cols(endpoint, &rec.basis);
    let svd = m.clone().svd(true, false);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let u = svd.u.as_ref().expect("svd with u requested");
    let v: DVector<f64> = u.column(order[0]).into();
    let second = order
        .get(1)
        .map(|&i| svd.singular_values[i])
        .unwrap_or(0.0);
    (v.normalize(), second)
}

/// The two measured basis families generated by `v`: eigenprojections
/// `E_i v` for all `i`, and shell vectors `E*_{i+endpoint} A_i v` for
/// `0 <= i <= D - endpoint`.
fn measured_bases(
    ops: &OperatorSet,
    v: &DVector<f64>,
    endpoint: usize,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let e_vecs: Vec<DVector<f64>> = ops.e.iter().map(|ei| ei * v).collect();
    let astar_vecs: Vec<DVector<f64>> = (0..=ops.d - endpoint)
        .map(|i| ops.estar_apply(i + endpoint, &(&ops.a[i] * v)))
        .collect();
    (e_vecs, astar_vecs)
}

/// Vectors `p_0(A)v, ..., p_top(A)v` through the three-term recurrence.
fn p_action_vectors(
    ops: &OperatorSet,
    arr: &IntersectionArray,
    v: &DVector<f64>,
    top: usize,
) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(top + 1);
    out.push(v.clone());
    if top >= 1 {
        out.push(ops.adjacency() * v);
    }
    for i in 1..top {
        let b = arr.bb(i as isize + 1).to_f64();
        let c = arr.cc(i as isize + 1).to_f64();
        let next = (ops.adjacency() * &out[i] - &out[i - 1] * b) / c;
        out.push(next);
    }
    out
}

/// Checks one measured module against its blueprint: shell and
/// eigenprojection patterns, both families of square norms, the tridiagonal
/// action, the transition identity, and the case-specific vanishing claims.
pub fn verify_blueprint(
    ops: &OperatorSet,
    arr: &IntersectionArray,
    rec: &ModuleRecord,
    bp: &ModuleBlueprint<f64>,
    tol: &Tolerances,
) -> Report {
    let match_tol = tol.oracle_match_rel;
    let d = ops.d;
    let mut report = Report::new(format!(
        "blueprint vs oracle: endpoint {}{}",
        bp.endpoint,
        bp.case
            .as_ref()
            .map(|c| format!(", case {} (eta = {:.6})", c.tag.as_str(), c.eta))
            .unwrap_or_default()
    ));

    if rec.endpoint != bp.endpoint || rec.dimension != bp.dimension {
        report.push(CheckLine::fail(
            "endpoint-and-dimension",
            1.0,
            format!(
                "measured (endpoint {}, dim {}), blueprint (endpoint {}, dim {})",
                rec.endpoint, rec.dimension, bp.endpoint, bp.dimension
            ),
        ));
        return report;
    }
    report.push(CheckLine::pass("endpoint-and-dimension", 0.0));

    let (v, line_defect) = endpoint_vector(ops, rec, bp.endpoint);
    report.push(CheckLine::from_residual(
        "endpoint-shell-is-a-line",
        line_defect,
        match_tol,
    ));

    // shell pattern: rank of E*_i W per index
    {
        let mut acc = ResidualAccumulator::new("shell-pattern", 0.0);
        for i in 0..=d {
            let rank = super::decompose::shell_rank(ops, &rec.basis, i);
            acc.record_bool(rank == bp.estar_dims[i], || {
                format!("shell {i}: rank {rank} != {}", bp.estar_dims[i])
            });
        }
        report.push(acc.finish());
    }

    let (e_vecs, astar_vecs) = measured_bases(ops, &v, bp.endpoint);

    // eigenprojection pattern and norms
    {
        let mut pattern = ResidualAccumulator::new("eigenprojection-pattern", match_tol);
        let mut norms = ResidualAccumulator::new("eigenbasis-norms", match_tol);
        for i in 0..=d {
            let nm2 = e_vecs[i].norm_squared();
            match bp.e_index_set.iter().position(|&j| j == i) {
                Some(pos) => {
                    pattern.record_bool(nm2 > match_tol, || format!("E_{i} v unexpectedly zero"));
                    let expect = bp.e_norms[pos];
                    norms.record((nm2 - expect).abs() / expect.abs().max(1.0), || {
                        format!("i = {i}: measured {nm2:.12}, predicted {expect:.12}")
                    });
                }
                None => pattern.record(nm2.sqrt(), || format!("E_{i} v should vanish")),
            }
        }
        report.push(pattern.finish());
        report.push(norms.finish());
    }

    // second-basis norms, and vanishing above the declared rows
    {
        let mut norms = ResidualAccumulator::new("second-basis-norms", match_tol);
        for (row, &i) in bp.astar_rows.iter().enumerate() {
            let nm2 = astar_vecs[i].norm_squared();
            let expect = bp.astar_norms[row];
            norms.record((nm2 - expect).abs() / expect.abs().max(1.0), || {
                format!("i = {i}: measured {nm2:.12}, predicted {expect:.12}")
            });
        }
        report.push(norms.finish());

        let mut upper = ResidualAccumulator::new("upper-shell-vanishing", match_tol);
        let first_beyond = bp.astar_rows.last().map(|&r| r + 1).unwrap_or(0);
        for i in first_beyond..=d - bp.endpoint {
            upper.record(astar_vecs[i].norm(), || {
                format!("E*_{} A_{i} v should vanish", i + bp.endpoint)
            });
        }
        report.push(upper.finish());
    }

    // tridiagonal action: A u_j = t[j-1][j] u_{j-1} + t[j+1][j] u_{j+1}
    {
        let mut acc = ResidualAccumulator::new("tridiagonal-action", match_tol);
        let dim = bp.dimension;
        for (col, &j) in bp.astar_rows.iter().enumerate() {
            let au = ops.adjacency() * &astar_vecs[j];
            let mut expect: DVector<f64> = DVector::zeros(ops.n);
            if col > 0 {
                expect += &astar_vecs[bp.astar_rows[col - 1]] * bp.tridiag[(col - 1, col)];
            }
            if col + 1 < dim {
                expect += &astar_vecs[bp.astar_rows[col + 1]] * bp.tridiag[(col + 1, col)];
            }
            let residual = (au.clone() - expect).norm() / au.norm().max(1.0);
            acc.record(residual, || format!("column {j}"));
        }
        report.push(acc.finish());
    }

    // transition identity: u_i = sum_j t[i][j] E_j v
    {
        let mut acc = ResidualAccumulator::new("transition-identity", match_tol);
        for (row, &i) in bp.astar_rows.iter().enumerate() {
            let mut rhs: DVector<f64> = DVector::zeros(ops.n);
            for (col, &j) in bp.e_index_set.iter().enumerate() {
                rhs += &e_vecs[j] * bp.transition[(row, col)];
            }
            let lhs = &astar_vecs[i];
            let residual = (lhs - rhs).norm() / lhs.norm().max(1.0);
            acc.record(residual, || format!("row i = {i}"));
        }
        report.push(acc.finish());
    }

    // endpoint-1 modules: the second-shell component is an eigenvector of
    // the distance-2 action with eigenvalue b_3 - 1.
    if bp.endpoint == 1 {
        let (w, _) = endpoint_vector(ops, rec, 2);
        let image = ops.estar_apply(2, &(&ops.a[2] * &w));
        let eta = ModuleBlueprint::<f64>::endpoint1_local_eigenvalue(arr).to_f64();
        let residual = (image - &w * eta).norm() / eta.abs().max(1.0);
        report.push(CheckLine::from_residual(
            "endpoint1-local-eigenvalue",
            residual,
            match_tol,
        ));
    }

    // Case III: the first discarded vector of the shell-basis construction
    // vanishes identically, on the formula side as well as the matrix side.
    if bp.case.as_ref().map(|c| c.tag) == Some(CaseTag::III) {
        let fams = polyfams::families(arr);
        let val = valencies(arr);
        let top = d - 2;
        let pvecs = p_action_vectors(ops, arr, &v, top);
        let p_at0: Vec<f64> = fams
            .big_p
            .iter()
            .map(|p| p.to_scalar::<f64>().eval(&0.0))
            .collect();
        let mut formula_side: DVector<f64> = DVector::zeros(ops.n);
        let mut h = top as isize;
        while h >= 0 {
            let hu = h as usize;
            let ratio = (val.k[top].clone() * arr.bb(top as isize) * arr.bb(top as isize + 1))
                / (val.k[hu].clone() * arr.bb(h) * arr.bb(h + 1));
            let coeff = p_at0[hu] / p_at0[top] * ratio.to_f64();
            formula_side += &pvecs[hu] * coeff;
            h -= 2;
        }
        report.push(CheckLine::from_residual(
            "top-vector-vanishes",
            formula_side.norm(),
            match_tol,
        ));
    }

    report
}

/// Measured data used to compare modules with the same local eigenvalue:
/// eigenprojection norms by index and shell-basis norms by row.
fn measured_profile(ops: &OperatorSet, rec: &ModuleRecord) -> (Vec<f64>, Vec<f64>) {
    let (v, _) = endpoint_vector(ops, rec, rec.endpoint);
    let (e_vecs, astar_vecs) = measured_bases(ops, &v, rec.endpoint);
    (
        e_vecs.iter().map(|w| w.norm_squared()).collect(),
        astar_vecs.iter().map(|w| w.norm_squared()).collect(),
    )
}

/// Multiplicity bookkeeping over a decomposition:
///
/// * each local eigenvalue class holds at least as many dimensions as thin
///   modules were found (`mult >= mu`);
/// * equality for every class if and only if no endpoint-2 piece escaped the
///   thin harvest;
/// * modules in the same class are pairwise isomorphic: same dimensions,
///   same measured norms.
pub fn multiplicity_audit(
    ops: &OperatorSet,
    dec: &TDecomposition,
    tol: &Tolerances,
) -> Result<Report, OracleError> {
    let mut report = Report::new("multiplicity audit".to_string());

    let mut bound = ResidualAccumulator::new("multiplicity-lower-bound", 0.0);
    let mut all_equal = true;
    for (idx, &eta) in dec.local.phi.iter().enumerate() {
        let mult = dec.local.mult[idx];
        let mu = dec.mu[idx];
        bound.record_bool(mult >= mu, || {
            format!("eta = {eta:.6}: mult = {mult} < mu = {mu}")
        });
        if mult != mu {
            all_equal = false;
        }
    }
    report.push(bound.finish());

    let unaccounted_endpoint2 = dec.modules.iter().any(|m| {
        m.endpoint == 2 && (!m.thin || m.local_eigenvalue.is_none() || !m.certified_irreducible)
    });
    report.push(CheckLine::from_residual(
        "equality-iff-all-thin",
        if all_equal == !unaccounted_endpoint2 {
            0.0
        } else {
            1.0
        },
        0.0,
    ));

    let mut iso = ResidualAccumulator::new("same-eta-modules-isomorphic", tol.oracle_match_rel);
    for &eta in &dec.local.phi {
        let members: Vec<&ModuleRecord> = dec
            .modules
            .iter()
            .filter(|m| {
                m.endpoint == 2
                    && m.thin
                    && m.local_eigenvalue
                        .map(|e| (e - eta).abs() <= EIGEN_GROUP_TOL * eta.abs().max(1.0))
                        .unwrap_or(false)
            })
            .collect();
        if members.len() < 2 {
            continue;
        }
        let profiles: Vec<(Vec<f64>, Vec<f64>)> =
            members.iter().map(|m| measured_profile(ops, m)).collect();
        for w in 1..members.len() {
            iso.record_bool(members[w].dimension == members[0].dimension, || {
                format!("eta = {eta:.6}: dimensions differ")
            });
            for (a, b) in profiles[0].0.iter().zip(&profiles[w].0) {
                iso.record((a - b).abs() / a.abs().max(1.0), || {
                    format!("eta = {eta:.6}: eigenprojection norms differ")
                });
            }
            for (a, b) in profiles[0].1.iter().zip(&profiles[w].1) {
                iso.record((a - b).abs() / a.abs().max(1.0), || {
                    format!("eta = {eta:.6}: shell-basis norms differ")
                });
            }
        }
    }
    report.push(iso.finish());

    if let Some(line) = report.first_failure() {
        return Err(OracleError::AuditFailure(format!(
            "{}: {}",
            line.name, line.detail
        )));
    }
    Ok(report)
}
