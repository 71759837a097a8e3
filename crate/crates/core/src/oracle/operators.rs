//! Dense operators of the subconstituent algebra at a base vertex.

use nalgebra::{DMatrix, DVector};

use super::{GraphInstance, OracleError};
use crate::arrays::{valencies, IntersectionArray};
use crate::config::Tolerances;
use crate::polyfams;
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::scalar::Scalar;
use crate::spectra::{self, AnySpectrum};

/// Distance matrices, primitive idempotents, and dual idempotent supports for
/// one `(graph, base vertex)` pair.
pub struct OperatorSet {
    pub n: usize,
    pub d: usize,
    pub base: usize,
    /// `A_0..A_D`.
    pub a: Vec<DMatrix<f64>>,
    /// `E_0..E_D`, spectral projectors of `A_1`.
    pub e: Vec<DMatrix<f64>>,
    /// Vertices at distance `i` from the base; the support of the `i`-th dual
    /// idempotent.
    pub shells: Vec<Vec<usize>>,
    pub theta: Vec<f64>,
    pub mult: Vec<f64>,
    /// Residual lines recorded while the set was built.
    pub build_report: Report,
}

impl OperatorSet {
    /// Applies the dual idempotent: zeroes every coordinate off shell `i`.
    pub fn estar_apply(&self, i: usize, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for &y in &self.shells[i] {
            out[y] = v[y];
        }
        out
    }

    /// Dual idempotent applied to every column.
    pub fn estar_cols(&self, i: usize, m: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for &y in &self.shells[i] {
            for c in 0..m.ncols() {
                out[(y, c)] = m[(y, c)];
            }
        }
        out
    }

    /// Coordinate vector of the base vertex.
    pub fn xhat(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        v[self.base] = 1.0;
        v
    }

    /// Sum of coordinate vectors over shell `i`.
    pub fn shell_sum(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        for &y in &self.shells[i] {
            v[y] = 1.0;
        }
        v
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.a[1]
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Builds distance matrices and spectral projectors, checking the algebra
/// relations they must satisfy.
///
/// Idempotents come from the polynomial identity
/// `E_i = (m_i / |X|) sum_h f_h(theta_i) / k_h A_h`, with coefficients
/// evaluated exactly whenever the spectrum is rational; no float
/// eigendecomposition enters their construction.
pub fn operator_set(
    g: &GraphInstance,
    x: usize,
    arr: &IntersectionArray,
    tol: &Tolerances,
) -> Result<OperatorSet, OracleError> {
    let n = g.n;
    let d = arr.d;
    let a: Vec<DMatrix<f64>> = (0..=d).map(|i| g.distance_matrix(i)).collect();
    let shells: Vec<Vec<usize>> = (0..=d).map(|i| g.shell(x, i)).collect();
    let val = valencies(arr);
    let fams = polyfams::families(arr);

    // coeff[i][h] = m_i / |X| * f_h(theta_i) / k_h
    let (theta, mult, coeff) = match spectra::spectrum(arr)? {
        AnySpectrum::Exact(spec) => {
            let coeff: Vec<Vec<f64>> = (0..=d)
                .map(|i| {
                    (0..=d)
                        .map(|h| {
                            let c = &spec.m[i] / &spec.size * fams.f[h].eval(&spec.theta[i])
                                / &val.k[h];
                            c.to_f64()
                        })
                        .collect()
                })
                .collect();
            (
                spec.theta.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
                spec.m.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
                coeff,
            )
        }
        AnySpectrum::Approx(spec) => {
            let size = spec.size.to_f64();
            let coeff: Vec<Vec<f64>> = (0..=d)
                .map(|i| {
                    (0..=d)
                        .map(|h| {
                            spec.m[i] / size * fams.f[h].to_scalar::<f64>().eval(&spec.theta[i])
                                / val.k[h].to_f64()
                        })
                        .collect()
                })
                .collect();
            (spec.theta.clone(), spec.m.clone(), coeff)
        }
    };

    let e: Vec<DMatrix<f64>> = (0..=d)
        .map(|i| {
            let mut acc = DMatrix::zeros(n, n);
            for h in 0..=d {
                acc += &a[h] * coeff[i][h];
            }
            acc
        })
        .collect();

    let mut report = Report::new(format!("operator algebra: {} at vertex {x}", g.name));
    let bound = tol.operator_residual;

    // sum E_i = I
    {
        let mut sum = DMatrix::zeros(n, n);
        for ei in &e {
            sum += ei;
        }
        let residual = max_abs(&(sum - DMatrix::identity(n, n)));
        report.push(CheckLine::from_residual("idempotent-completeness", residual, bound));
    }

    // E_i E_j = delta_ij E_i
    {
        let mut acc = ResidualAccumulator::new("idempotent-orthogonality", bound);
        for i in 0..=d {
            for j in i..=d {
                let mut diff = &e[i] * &e[j];
                if i == j {
                    diff -= &e[i];
                }
                acc.record(max_abs(&diff), || format!("(i, j) = ({i}, {j})"));
            }
        }
        report.push(acc.finish());
    }

    // A E_i = theta_i E_i
    {
        let mut acc = ResidualAccumulator::new("eigenprojection-action", bound);
        for i in 0..=d {
            let residual = max_abs(&(&a[1] * &e[i] - &e[i] * theta[i]));
            acc.record(residual / theta[0].max(1.0), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // E_0 = J / |X|
    {
        let expect = DMatrix::from_element(n, n, 1.0 / n as f64);
        report.push(CheckLine::from_residual(
            "trivial-idempotent",
            max_abs(&(&e[0] - expect)),
            bound,
        ));
    }

    // E_D = (1/|X|) sum (-1)^i A_i
    {
        let mut alternating = DMatrix::zeros(n, n);
        for (i, ai) in a.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            alternating += ai * (sign / n as f64);
        }
        report.push(CheckLine::from_residual(
            "alternating-idempotent",
            max_abs(&(&e[d] - alternating)),
            bound,
        ));
    }

    // E*_i A E*_j = 0 for |i - j| > 1: no edges between non-adjacent shells.
    {
        let mut acc = ResidualAccumulator::new("shell-block-tridiagonality", 0.0);
        for (i, shell) in shells.iter().enumerate() {
            for &y in shell {
                for &z in &g.adj[y] {
                    let j = g.dist[x][z as usize] as usize;
                    acc.record_bool(i.abs_diff(j) <= 1, || format!("edge {y}-{z}"));
                }
            }
        }
        report.push(acc.finish());
    }

    // shell sizes match the valencies
    {
        let mut acc = ResidualAccumulator::new("shell-sizes-are-valencies", 0.0);
        for (i, shell) in shells.iter().enumerate() {
            acc.record_bool(
                crate::scalar::rat_int(shell.len() as i64) == val.k[i],
                || format!("i = {i}"),
            );
        }
        report.push(acc.finish());
    }

    if let Some(line) = report.first_failure() {
        return Err(OracleError::ProjectorResidual {
            what: line.name.clone(),
            residual: line.residual,
            bound,
        });
    }

    Ok(OperatorSet {
        n,
        d,
        base: x,
        a,
        e,
        shells,
        theta,
        mult,
        build_report: report,
    })
}

/// Multiset agreement between the exact spectrum (with multiplicities) and a
/// dense eigendecomposition of the adjacency matrix.
pub fn adjacency_eigenvalue_agreement(
    g: &GraphInstance,
    ops: &OperatorSet,
    tol: &Tolerances,
) -> CheckLine {
    let eig = nalgebra::SymmetricEigen::new(g.adjacency_matrix());
    let mut dense: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    dense.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut expected: Vec<f64> = Vec::with_capacity(g.n);
    for (i, &th) in ops.theta.iter().enumerate() {
        let m = ops.mult[i].round() as usize;
        expected.extend(std::iter::repeat(th).take(m));
    }
    if expected.len() != dense.len() {
        return CheckLine::fail(
            "adjacency-spectrum-agreement",
            1.0,
            format!("{} eigenvalues expected, {} found", expected.len(), dense.len()),
        );
    }
    let scale = ops.theta[0].max(1.0);
    let mut residual = 0.0_f64;
    for (a, b) in expected.iter().zip(&dense) {
        residual = residual.max((a - b).abs() / scale);
    }
    CheckLine::from_residual("adjacency-spectrum-agreement", residual, tol.eigenvalue_agreement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_hypercube, verify_drg};

    #[test]
    fn q4_operator_set() {
        let g = build_hypercube(4);
        let arr = verify_drg(&g).unwrap();
        let ops = operator_set(&g, 0, &arr, &Tolerances::default()).unwrap();
        assert!(ops.build_report.all_pass());
        assert_eq!(ops.shells[2].len(), 6);

        // ||E_i xhat||^2 = m_i / |X|
        let xh = ops.xhat();
        for i in 0..=4 {
            let norm_sq = (&ops.e[i] * &xh).norm_squared();
            let expect = ops.mult[i] / 16.0;
            assert!((norm_sq - expect).abs() < 1e-12, "i = {i}");
        }

        let line = adjacency_eigenvalue_agreement(&g, &ops, &Tolerances::default());
        assert!(line.pass, "{line}");
    }
}
