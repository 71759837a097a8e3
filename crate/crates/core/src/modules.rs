//! Closed-form blueprints of the irreducible modules of the subconstituent
//! algebra with endpoint 0, 1, or 2.
//!
//! A blueprint predicts, from the intersection array and spectrum alone:
//! the module dimension, which eigenprojections and distance shells it meets,
//! the square norms of its two standard orthogonal bases (as ratios to the
//! generating vector), the tridiagonal matrix representing the adjacency
//! action, and the transition matrix between the two bases.
//!
//! Endpoint-2 modules split into four cases by their local eigenvalue `eta`:
//! the boundary values of the admissible range give cases I-III (I at the
//! lower bound, II/III at the upper bound for odd/even diameter), and
//! interior values give case IV. The auxiliary parameter
//! `psi = b_2 (1 - b_3/(1 + eta))` converts an interior `eta` into an
//! admissible argument for the `g` family; `eta = -1` is the pole of that map
//! and gets its own formulas.

use num_traits::One;
use serde::Serialize;

use crate::arrays::{valencies, IntersectionArray};
use crate::mat::Mat;
use crate::poly::Poly;
use crate::polyfams::{families, g_family, omega_coeffs, theta_parameter, PolyError};
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::scalar::{scalar_json, Rat, Scalar};
use crate::spectra::Spectrum;

#[derive(Debug, thiserror::Error)]
pub enum ModuleError {
    #[error("eta = {eta} is outside the local-eigenvalue range [{lo}, {hi}]")]
    OutOfRangeEta { eta: String, lo: String, hi: String },
    #[error("case/parameter mismatch: {0}")]
    CaseParameterMismatch(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Real line extended with a single point at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum Extended<S> {
    Finite(S),
    Infinite,
}

/// The transform `z -> -1 - b_2 b_3 / (z^2 - b_2)`, with `z -> infinity` when
/// `z^2 = b_2` and `infinity -> -1`.
pub fn tilde<S: Scalar>(z: &Extended<S>, arr: &IntersectionArray) -> Extended<S> {
    let b2 = S::from_rat(&arr.bb(2));
    let b3 = S::from_rat(&arr.bb(3));
    match z {
        Extended::Infinite => Extended::Finite(-S::one()),
        Extended::Finite(z) => {
            let den = z.clone() * z.clone() - b2.clone();
            if den.is_zero() {
                Extended::Infinite
            } else {
                Extended::Finite(-S::one() - b2 * b3 / den)
            }
        }
    }
}

/// Lower bound of the local-eigenvalue range: the tilde image of `theta_1`.
pub fn tilde_theta1<S: Scalar>(arr: &IntersectionArray, spec: &Spectrum<S>) -> S {
    tilde_of(arr, &spec.theta[1])
}

/// Upper bound of the local-eigenvalue range: the tilde image of `theta_d`.
/// Equal to `b_3 - 1` when `D` is even.
pub fn tilde_thetad<S: Scalar>(arr: &IntersectionArray, spec: &Spectrum<S>) -> S {
    tilde_of(arr, &spec.theta[arr.half()])
}

fn tilde_of<S: Scalar>(arr: &IntersectionArray, z: &S) -> S {
    match tilde(&Extended::Finite(z.clone()), arr) {
        Extended::Finite(v) => v,
        // theta_1^2 and theta_d^2 never equal b_2 for a valid bipartite array.
        Extended::Infinite => {
            panic!("tilde pole at an eigenvalue; array is not bipartite-feasible")
        }
    }
}

/// The four structure cases for a thin endpoint-2 module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    I,
    II,
    III,
    IV,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::I => "I",
            CaseTag::II => "II",
            CaseTag::III => "III",
            CaseTag::IV => "IV",
        }
    }
}

/// A classified local eigenvalue.
#[derive(Clone, Debug)]
pub struct LocalEigenvalueCase<S> {
    pub eta: S,
    pub tag: CaseTag,
    /// `b_2 (1 - b_3/(1 + eta))`; `None` exactly at the pole `eta = -1`.
    pub psi: Option<S>,
    /// Dimension deficit: the module has dimension `D - 1 - dim_deficit`
    /// (2 in cases I/II, 1 in case III, 0 in case IV).
    pub dim_deficit: usize,
    /// For cases I/II: which boundary index `n` (1 or `d`) produced `eta`.
    pub n: Option<usize>,
}

fn is_minus_one<S: Scalar>(eta: &S, tol: f64) -> bool {
    if S::EXACT {
        eta == &(-S::one())
    } else {
        (eta.to_f64() + 1.0).abs() <= tol
    }
}

fn psi_of<S: Scalar>(arr: &IntersectionArray, eta: &S) -> S {
    let b2 = S::from_rat(&arr.bb(2));
    let b3 = S::from_rat(&arr.bb(3));
    b2 * (S::one() - b3 / (S::one() + eta.clone()))
}

/// Places `eta` within `[tilde(theta_1), tilde(theta_d)]` and assigns its case.
///
/// Comparisons are exact for exact scalars and use an absolute tolerance of
/// `1e-10` for floats, since the pole at `eta = -1` must be decided before
/// `psi` can be evaluated.
pub fn classify_eta<S: Scalar>(
    eta: S,
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
) -> Result<LocalEigenvalueCase<S>, ModuleError> {
    let tol = crate::config::ETA_CLASSIFY_TOL;
    let t1 = tilde_theta1(arr, spec);
    let td = tilde_thetad(arr, spec);
    let at = |bound: &S| {
        if S::EXACT {
            &eta == bound
        } else {
            (eta.to_f64() - bound.to_f64()).abs() <= tol
        }
    };

    let (tag, dim_deficit, n) = if at(&t1) {
        (CaseTag::I, 2, Some(1))
    } else if at(&td) {
        if arr.d % 2 == 1 {
            (CaseTag::II, 2, Some(arr.half()))
        } else {
            (CaseTag::III, 1, None)
        }
    } else if eta > t1 && eta < td {
        (CaseTag::IV, 0, None)
    } else {
        return Err(ModuleError::OutOfRangeEta {
            eta: format!("{eta}"),
            lo: format!("{t1}"),
            hi: format!("{td}"),
        });
    };

    let psi = if is_minus_one(&eta, tol) {
        None
    } else {
        Some(psi_of(arr, &eta))
    };
    Ok(LocalEigenvalueCase {
        eta,
        tag,
        psi,
        dim_deficit,
        n,
    })
}

/// Blueprint of one irreducible module: dimensions, index sets, basis square
/// norms (relative to the generating vector), the tridiagonal adjacency
/// matrix, and the basis transition matrix.
///
/// The two bases are `E_i v` for `i` in `e_index_set` and
/// `E*_{i+endpoint} A_i v` for `i` in `astar_rows`. Norms are ratios to
/// `|v|^2` because only ratios are well defined for an arbitrary generator.
#[derive(Clone, Debug)]
pub struct ModuleBlueprint<S: Scalar> {
    pub endpoint: usize,
    pub case: Option<LocalEigenvalueCase<S>>,
    pub dimension: usize,
    /// 0/1 per index `0..=D`: does the module meet the `i`-th shell?
    pub estar_dims: Vec<usize>,
    /// 0/1 per index `0..=D`: does the module meet the `i`-th eigenspace?
    pub e_dims: Vec<usize>,
    pub e_index_set: Vec<usize>,
    pub astar_rows: Vec<usize>,
    pub e_norms: Vec<S>,
    pub astar_norms: Vec<S>,
    pub tridiag: Mat<S>,
    pub transition: Mat<S>,
}

impl<S: Scalar> ModuleBlueprint<S> {
    pub fn transition_matrix(&self) -> &Mat<S> {
        &self.transition
    }

    /// Eigenvalue of the shell-2 distance-2 action on any endpoint-1 module.
    pub fn endpoint1_local_eigenvalue(arr: &IntersectionArray) -> Rat {
        arr.bb(3) - Rat::one()
    }

    pub fn to_json(&self) -> BlueprintJson {
        BlueprintJson {
            endpoint: self.endpoint,
            case: self.case.as_ref().map(|c| c.tag.as_str().to_string()),
            eta: self.case.as_ref().map(|c| scalar_json(&c.eta)),
            psi: self
                .case
                .as_ref()
                .and_then(|c| c.psi.as_ref())
                .map(scalar_json),
            dimension: self.dimension,
            estar_dims: self.estar_dims.clone(),
            e_dims: self.e_dims.clone(),
            e_index_set: self.e_index_set.clone(),
            astar_rows: self.astar_rows.clone(),
            e_norms: self.e_norms.iter().map(scalar_json).collect(),
            astar_norms: self.astar_norms.iter().map(scalar_json).collect(),
            tridiag: matrix_json(&self.tridiag),
            transition: matrix_json(&self.transition),
        }
    }
}

impl ModuleBlueprint<Rat> {
    pub fn to_f64(&self) -> ModuleBlueprint<f64> {
        ModuleBlueprint {
            endpoint: self.endpoint,
            case: self.case.as_ref().map(|c| LocalEigenvalueCase {
                eta: c.eta.to_f64(),
                tag: c.tag,
                psi: c.psi.as_ref().map(Scalar::to_f64),
                dim_deficit: c.dim_deficit,
                n: c.n,
            }),
            dimension: self.dimension,
            estar_dims: self.estar_dims.clone(),
            e_dims: self.e_dims.clone(),
            e_index_set: self.e_index_set.clone(),
            astar_rows: self.astar_rows.clone(),
            e_norms: self.e_norms.iter().map(Scalar::to_f64).collect(),
            astar_norms: self.astar_norms.iter().map(Scalar::to_f64).collect(),
            tridiag: self.tridiag.to_scalar::<f64>(),
            transition: self.transition.to_scalar::<f64>(),
        }
    }
}

fn matrix_json<S: Scalar>(m: &Mat<S>) -> Vec<Vec<serde_json::Value>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(scalar_json).collect())
        .collect()
}

/// JSON mirror with index-set annotations and row-major matrices.
#[derive(Clone, Debug, Serialize)]
pub struct BlueprintJson {
    pub endpoint: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<serde_json::Value>,
    pub dimension: usize,
    pub estar_dims: Vec<usize>,
    pub e_dims: Vec<usize>,
    pub e_index_set: Vec<usize>,
    pub astar_rows: Vec<usize>,
    pub e_norms: Vec<serde_json::Value>,
    pub astar_norms: Vec<serde_json::Value>,
    pub tridiag: Vec<Vec<serde_json::Value>>,
    pub transition: Vec<Vec<serde_json::Value>>,
}

fn dims_from_sets(d: usize, estar: &[usize], e: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut estar_dims = vec![0; d + 1];
    for &i in estar {
        estar_dims[i] = 1;
    }
    let mut e_dims = vec![0; d + 1];
    for &i in e {
        e_dims[i] = 1;
    }
    (estar_dims, e_dims)
}

/// Tridiagonal matrix with subdiagonal `c_1, c_2, ...` and the given
/// superdiagonal entries.
fn tridiag_matrix<S: Scalar>(arr: &IntersectionArray, dim: usize, superdiag: &[S]) -> Mat<S> {
    let mut m = Mat::zeros(dim, dim);
    for j in 0..dim.saturating_sub(1) {
        m[(j + 1, j)] = S::from_rat(&arr.cc(j as isize + 1));
        m[(j, j + 1)] = superdiag[j].clone();
    }
    m
}

/// The endpoint-0 module: dimension `D + 1`, eigenprojection norms
/// `m_i / |X|`, shell-sum norms `k_i`, adjacency in the shell basis
/// tridiagonal with superdiagonal `b_0..b_{D-1}`, and transition
/// coefficients `f_i(theta_h)`.
pub fn blueprint_endpoint0<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
) -> ModuleBlueprint<S> {
    let d = arr.d;
    let fams = families(arr);
    let val = valencies(arr);
    let size = spec.size_s();
    let e_index: Vec<usize> = (0..=d).collect();
    let astar_rows: Vec<usize> = (0..=d).collect();

    let e_norms: Vec<S> = (0..=d).map(|i| spec.m[i].clone() / size.clone()).collect();
    let astar_norms: Vec<S> = (0..=d).map(|i| S::from_rat(&val.k[i])).collect();
    let superdiag: Vec<S> = (0..d).map(|i| S::from_rat(&arr.bb(i as isize))).collect();
    let tridiag = tridiag_matrix(arr, d + 1, &superdiag);
    let transition = Mat::from_fn(d + 1, d + 1, |i, h| {
        fams.f[i].to_scalar::<S>().eval(&spec.theta[h])
    });

    let (estar_dims, e_dims) = dims_from_sets(d, &astar_rows, &e_index);
    ModuleBlueprint {
        endpoint: 0,
        case: None,
        dimension: d + 1,
        estar_dims,
        e_dims,
        e_index_set: e_index,
        astar_rows,
        e_norms,
        astar_norms,
        tridiag,
        transition,
    }
}

/// The endpoint-1 module: dimension `D - 1`, eigenprojection norms
/// `m_i (k^2 - theta_i^2) / (|X| k (k-1))`, second-basis norms
/// `(b_2...b_{i+1}) / (c_1...c_i)`, tridiagonal superdiagonal `b_2..b_{D-1}`,
/// transition coefficients `p_i(theta_h)`.
pub fn blueprint_endpoint1<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
) -> ModuleBlueprint<S> {
    let d = arr.d;
    let fams = families(arr);
    let size = spec.size_s();
    let k = S::from_rat(&arr.bb(0));
    let e_index: Vec<usize> = (1..=d - 1).collect();
    let astar_rows: Vec<usize> = (0..=d - 2).collect();

    let e_norms: Vec<S> = e_index
        .iter()
        .map(|&i| {
            let th = &spec.theta[i];
            spec.m[i].clone() * (k.clone() * k.clone() - th.clone() * th.clone())
                / (size.clone() * k.clone() * (k.clone() - S::one()))
        })
        .collect();
    let astar_norms: Vec<S> = astar_rows
        .iter()
        .map(|&i| {
            let num = (2..=i + 1).fold(Rat::one(), |acc, j| acc * arr.bb(j as isize));
            S::from_rat(&(num / arr.c_prefix(i)))
        })
        .collect();
    let superdiag: Vec<S> = (0..d - 2)
        .map(|j| S::from_rat(&arr.bb(j as isize + 2)))
        .collect();
    let tridiag = tridiag_matrix(arr, d - 1, &superdiag);
    let transition = Mat::from_fn(d - 1, d - 1, |i, col| {
        fams.p[i].to_scalar::<S>().eval(&spec.theta[e_index[col]])
    });

    let estar_set: Vec<usize> = (1..=d - 1).collect();
    let (estar_dims, e_dims) = dims_from_sets(d, &estar_set, &e_index);
    ModuleBlueprint {
        endpoint: 1,
        case: None,
        dimension: d - 1,
        estar_dims,
        e_dims,
        e_index_set: e_index,
        astar_rows,
        e_norms,
        astar_norms,
        tridiag,
        transition,
    }
}

/// Thin endpoint-2 blueprint for a classified local eigenvalue.
pub fn blueprint_endpoint2<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
    case: &LocalEigenvalueCase<S>,
) -> Result<ModuleBlueprint<S>, ModuleError> {
    match case.tag {
        CaseTag::I | CaseTag::II => blueprint_boundary(arr, spec, case),
        CaseTag::III => blueprint_even_top(arr, spec, case),
        CaseTag::IV => blueprint_interior(arr, spec, case),
    }
}

/// Cases I/II: `eta` at a boundary, dimension `D - 3`, everything expressed
/// through values `p_i(theta_n)` at the boundary eigenvalue itself.
fn blueprint_boundary<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
    case: &LocalEigenvalueCase<S>,
) -> Result<ModuleBlueprint<S>, ModuleError> {
    let d = arr.d;
    let n = case.n.ok_or_else(|| {
        ModuleError::CaseParameterMismatch("boundary case without its index n".into())
    })?;
    if n != 1 && !(n == arr.half() && d % 2 == 1) {
        return Err(ModuleError::CaseParameterMismatch(format!(
            "n = {n} requires n = 1, or n = d with D odd (D = {d})"
        )));
    }
    let fams = families(arr);
    let val = valencies(arr);
    let size = spec.size_s();
    let k = S::from_rat(&arr.bb(0));
    let b1 = S::from_rat(&arr.bb(1));
    let b2 = S::from_rat(&arr.bb(2));
    let theta_n = spec.theta[n].clone();
    let thn_sq = theta_n.clone() * theta_n.clone();

    // p_i(theta_n) != 0 for i <= D-2 by the sign patterns at the boundary.
    let pvals: Vec<S> = fams
        .p
        .iter()
        .map(|p| p.to_scalar::<S>().eval(&theta_n))
        .collect();
    for (i, v) in pvals.iter().enumerate().take(d - 1) {
        if v.is_zero() {
            return Err(ModuleError::CaseParameterMismatch(format!(
                "p_{i}(theta_n) = 0 at a boundary eigenvalue"
            )));
        }
    }

    let e_index: Vec<usize> = (1..=d - 1).filter(|&i| i != n && i != d - n).collect();
    let astar_rows: Vec<usize> = (0..=d - 4).collect();
    let denom = size.clone() * k.clone() * b1.clone() * (thn_sq.clone() - b2.clone());

    let e_norms: Vec<S> = e_index
        .iter()
        .map(|&i| {
            let th = &spec.theta[i];
            let thsq = th.clone() * th.clone();
            spec.m[i].clone() * (thsq.clone() - k.clone() * k.clone()) * (thsq - thn_sq.clone())
                / denom.clone()
        })
        .collect();

    let astar_norms: Vec<S> = astar_rows
        .iter()
        .map(|&i| {
            let front = S::from_rat(
                &(val.k[i].clone()
                    * arr.bb(i as isize)
                    * arr.bb(i as isize + 1)
                    * arr.cc(i as isize + 1)
                    * arr.cc(i as isize + 2)),
            );
            front / (k.clone() * b1.clone() * (thn_sq.clone() - b2.clone()))
                * pvals[i + 2].clone()
                / pvals[i].clone()
        })
        .collect();

    let dim = d - 3;
    let superdiag: Vec<S> = (1..dim)
        .map(|j| {
            S::from_rat(&(arr.bb(j as isize + 1) * arr.cc(j as isize + 2) / arr.cc(j as isize)))
                * pvals[j - 1].clone()
                * pvals[j + 2].clone()
                / (pvals[j].clone() * pvals[j + 1].clone())
        })
        .collect();
    let tridiag = tridiag_matrix(arr, dim, &superdiag);

    // gamma_i = sum over h = i, i-2, ... of
    //   p_h(theta_n)/p_i(theta_n) * k_i b_i b_{i+1} / (k_h b_h b_{h+1}) * p_h
    let gammas: Vec<Poly<S>> = astar_rows
        .iter()
        .map(|&i| {
            let mut acc = Poly::<S>::zero();
            let mut h = i as isize;
            while h >= 0 {
                let hu = h as usize;
                let ratio = (val.k[i].clone() * arr.bb(i as isize) * arr.bb(i as isize + 1))
                    / (val.k[hu].clone() * arr.bb(h) * arr.bb(h + 1));
                let coeff = pvals[hu].clone() / pvals[i].clone() * S::from_rat(&ratio);
                acc = acc.add(&fams.p[hu].to_scalar::<S>().scale(&coeff));
                h -= 2;
            }
            acc
        })
        .collect();
    let transition = Mat::from_fn(dim, e_index.len(), |i, col| {
        gammas[i].eval(&spec.theta[e_index[col]])
    });

    let estar_set: Vec<usize> = (2..=d - 2).collect();
    let (estar_dims, e_dims) = dims_from_sets(d, &estar_set, &e_index);
    Ok(ModuleBlueprint {
        endpoint: 2,
        case: Some(case.clone()),
        dimension: dim,
        estar_dims,
        e_dims,
        e_index_set: e_index,
        astar_rows,
        e_norms,
        astar_norms,
        tridiag,
        transition,
    })
}

/// Case III: even `D`, `eta` at the upper boundary, dimension `D - 2`;
/// the `g` family at parameter 0 carries the structure.
fn blueprint_even_top<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
    case: &LocalEigenvalueCase<S>,
) -> Result<ModuleBlueprint<S>, ModuleError> {
    let d = arr.d;
    if d % 2 != 0 {
        return Err(ModuleError::CaseParameterMismatch(
            "the even-boundary case requires even diameter".into(),
        ));
    }
    let half = arr.half();
    let fams = families(arr);
    let val = valencies(arr);
    let size = spec.size_s();
    let k = S::from_rat(&arr.bb(0));
    let b1b2 = S::from_rat(&(arr.bb(1) * arr.bb(2)));

    let theta0 = theta_parameter(arr, spec, S::zero())?;
    let g = g_family(arr, &fams, &theta0)?;
    let omega = omega_coeffs(arr, &fams, &theta0)?;
    let bp_at0: Vec<S> = fams
        .big_p
        .iter()
        .map(|p| p.to_scalar::<S>().eval(&S::zero()))
        .collect();

    let e_index: Vec<usize> = (1..=d - 1).filter(|&i| i != half).collect();
    let astar_rows: Vec<usize> = (0..=d - 3).collect();

    let e_norms: Vec<S> = e_index
        .iter()
        .map(|&i| {
            let th = &spec.theta[i];
            spec.m[i].clone()
                * (k.clone() - th.clone())
                * (k.clone() + th.clone())
                * th.clone()
                * th.clone()
                / (size.clone() * k.clone() * b1b2.clone())
        })
        .collect();

    let astar_norms: Vec<S> = astar_rows
        .iter()
        .map(|&i| {
            let front = S::from_rat(
                &(val.k[i].clone()
                    * arr.bb(i as isize)
                    * arr.bb(i as isize + 1)
                    * arr.cc(i as isize + 1)
                    * arr.cc(i as isize + 2)),
            );
            -(front / (k.clone() * b1b2.clone())) * bp_at0[i + 2].clone() / bp_at0[i].clone()
        })
        .collect();

    let dim = d - 2;
    let superdiag: Vec<S> = (1..dim).map(|j| omega[j].clone()).collect();
    let tridiag = tridiag_matrix(arr, dim, &superdiag);
    let transition = Mat::from_fn(dim, e_index.len(), |i, col| {
        g[i].eval(&spec.theta[e_index[col]])
    });

    let estar_set: Vec<usize> = (2..=d - 1).collect();
    let (estar_dims, e_dims) = dims_from_sets(d, &estar_set, &e_index);
    Ok(ModuleBlueprint {
        endpoint: 2,
        case: Some(case.clone()),
        dimension: dim,
        estar_dims,
        e_dims,
        e_index_set: e_index,
        astar_rows,
        e_norms,
        astar_norms,
        tridiag,
        transition,
    })
}

/// Case IV: interior `eta`, dimension `D - 1`. For `eta != -1` the `g`
/// family at `psi` drives everything; at the pole `eta = -1` the plain `p`
/// family takes over.
fn blueprint_interior<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
    case: &LocalEigenvalueCase<S>,
) -> Result<ModuleBlueprint<S>, ModuleError> {
    let d = arr.d;
    let fams = families(arr);
    let val = valencies(arr);
    let size = spec.size_s();
    let k = S::from_rat(&arr.bb(0));
    let b1 = S::from_rat(&arr.bb(1));
    let b2 = S::from_rat(&arr.bb(2));
    let e_index: Vec<usize> = (1..=d - 1).collect();
    let astar_rows: Vec<usize> = (0..=d - 2).collect();
    let dim = d - 1;

    let (e_norms, astar_norms, superdiag, transition_polys) = match &case.psi {
        Some(psi) => {
            let theta = theta_parameter(arr, spec, psi.clone())?;
            let g = g_family(arr, &fams, &theta)?;
            let omega = omega_coeffs(arr, &fams, &theta)?;
            let bp_vals: Vec<S> = fams
                .big_p
                .iter()
                .map(|p| p.to_scalar::<S>().eval(psi))
                .collect();
            let denom = size.clone() * k.clone() * b1.clone() * (psi.clone() - b2.clone());
            let e_norms: Vec<S> = e_index
                .iter()
                .map(|&i| {
                    let th = &spec.theta[i];
                    spec.m[i].clone()
                        * (th.clone() - k.clone())
                        * (th.clone() + k.clone())
                        * (th.clone() * th.clone() - psi.clone())
                        / denom.clone()
                })
                .collect();
            let astar_norms: Vec<S> = astar_rows
                .iter()
                .map(|&i| {
                    let front = S::from_rat(
                        &(val.k[i].clone()
                            * arr.bb(i as isize)
                            * arr.bb(i as isize + 1)
                            * arr.cc(i as isize + 1)
                            * arr.cc(i as isize + 2)),
                    );
                    front / (k.clone() * b1.clone() * (psi.clone() - b2.clone()))
                        * bp_vals[i + 2].clone()
                        / bp_vals[i].clone()
                })
                .collect();
            let superdiag: Vec<S> = (1..dim).map(|j| omega[j].clone()).collect();
            (e_norms, astar_norms, superdiag, g)
        }
        None => {
            let e_norms: Vec<S> = e_index
                .iter()
                .map(|&i| {
                    let th = &spec.theta[i];
                    spec.m[i].clone() * (k.clone() - th.clone()) * (k.clone() + th.clone())
                        / (size.clone() * k.clone() * b1.clone())
                })
                .collect();
            let astar_norms: Vec<S> = astar_rows
                .iter()
                .map(|&i| {
                    S::from_rat(&(val.k[i].clone() * arr.bb(i as isize) * arr.bb(i as isize + 1)))
                        / (k.clone() * b1.clone())
                })
                .collect();
            let superdiag: Vec<S> = (1..dim)
                .map(|j| S::from_rat(&arr.bb(j as isize + 1)))
                .collect();
            let p_polys: Vec<Poly<S>> = astar_rows
                .iter()
                .map(|&i| fams.p[i].to_scalar::<S>())
                .collect();
            (e_norms, astar_norms, superdiag, p_polys)
        }
    };

    let tridiag = tridiag_matrix(arr, dim, &superdiag);
    let transition = Mat::from_fn(dim, e_index.len(), |i, col| {
        transition_polys[i].eval(&spec.theta[e_index[col]])
    });

    let estar_set: Vec<usize> = (2..=d).collect();
    let (estar_dims, e_dims) = dims_from_sets(d, &estar_set, &e_index);
    Ok(ModuleBlueprint {
        endpoint: 2,
        case: Some(case.clone()),
        dimension: dim,
        estar_dims,
        e_dims,
        e_index_set: e_index,
        astar_rows,
        e_norms,
        astar_norms,
        tridiag,
        transition,
    })
}

/// Internal consistency of a blueprint, with no oracle involved:
///
/// * each second-basis norm equals the transition row pushed through the
///   eigenbasis norms (`sum_j t[i][j]^2 ||E_j v||^2 = ||E*_{i+e} A_i v||^2`);
/// * declared norms are strictly positive;
/// * the tridiagonal subdiagonal is `c_1, c_2, ...`.
pub fn blueprint_internal_checks<S: Scalar>(
    arr: &IntersectionArray,
    bp: &ModuleBlueprint<S>,
) -> Report {
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    let mut report = Report::new(format!(
        "blueprint consistency: endpoint {}{}",
        bp.endpoint,
        bp.case
            .as_ref()
            .map(|c| format!(", case {} (eta = {})", c.tag.as_str(), c.eta))
            .unwrap_or_default()
    ));

    let mut consistency = ResidualAccumulator::new("norm-transition-consistency", tol);
    for (row, &i) in bp.astar_rows.iter().enumerate() {
        let mut sum = S::zero();
        for (col, norm) in bp.e_norms.iter().enumerate() {
            let t = bp.transition[(row, col)].clone();
            sum = sum + t.clone() * t * norm.clone();
        }
        consistency.record(sum.rel_diff(&bp.astar_norms[row]), || format!("row i = {i}"));
    }
    report.push(consistency.finish());

    let mut positive = ResidualAccumulator::new("declared-norms-positive", 0.0);
    for (idx, v) in bp.e_norms.iter().enumerate() {
        positive.record_bool(*v > S::zero(), || {
            format!("E-norm at index {}", bp.e_index_set[idx])
        });
    }
    for (idx, v) in bp.astar_norms.iter().enumerate() {
        positive.record_bool(*v > S::zero(), || {
            format!("second-basis norm at row {}", bp.astar_rows[idx])
        });
    }
    report.push(positive.finish());

    let mut subdiag = ResidualAccumulator::new("tridiag-subdiagonal-is-c", 0.0);
    for j in 0..bp.dimension.saturating_sub(1) {
        let expect = S::from_rat(&arr.cc(j as isize + 1));
        subdiag.record(bp.tridiag[(j + 1, j)].rel_diff(&expect), || {
            format!("entry ({}, {})", j + 1, j)
        });
    }
    report.push(subdiag.finish());

    report
}

/// Sweeps the endpoint-2 formula layer with no graph involved: the case III
/// blueprint at parameter 0 (even `D`) and `n_samples` interior local
/// eigenvalues including the pole `eta = -1`, checking each blueprint's
/// internal consistency.
pub fn blueprint_eta_sweep(
    arr: &IntersectionArray,
    spec: &Spectrum<Rat>,
    n_samples: usize,
) -> Result<Report, ModuleError> {
    let mut report = Report::new(format!("endpoint-2 eta sweep: {}", arr.display_name()));
    let t1 = tilde_theta1(arr, spec);
    let td = tilde_thetad(arr, spec);

    let mut etas: Vec<Rat> = Vec::new();
    let n = n_samples as i64;
    for j in 1..=n {
        let eta = &t1 + (&td - &t1) * crate::scalar::rat(j, n + 1);
        etas.push(eta);
    }
    // Force the pole into the sample set, replacing the nearest point.
    let minus_one = -Rat::one();
    if !etas.contains(&minus_one) {
        let nearest = (0..etas.len())
            .min_by(|&a, &b| {
                let da = Scalar::abs(&(&etas[a] - &minus_one));
                let db = Scalar::abs(&(&etas[b] - &minus_one));
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        etas[nearest] = minus_one;
    }

    for eta in etas {
        let case = classify_eta(eta.clone(), arr, spec)?;
        if case.tag != CaseTag::IV {
            return Err(ModuleError::CaseParameterMismatch(format!(
                "sampled eta = {eta} did not land in the interior case"
            )));
        }
        let bp = blueprint_endpoint2(arr, spec, &case)?;
        let sub = blueprint_internal_checks(arr, &bp);
        for mut line in sub.lines {
            line.name = format!("{} [eta = {}]", line.name, eta);
            report.push(line);
        }
    }

    if arr.d % 2 == 0 {
        let case = classify_eta(td, arr, spec)?;
        let bp = blueprint_endpoint2(arr, spec, &case)?;
        let sub = blueprint_internal_checks(arr, &bp);
        for mut line in sub.lines {
            line.name = format!("{} [case III]", line.name);
            report.push(line);
        }
    }

    Ok(report)
}

/// `tilde(theta_d) = b_3 - 1` exactly, for even diameter.
pub fn tilde_fixed_point_check(arr: &IntersectionArray, spec: &Spectrum<Rat>) -> CheckLine {
    if arr.d % 2 != 0 {
        return CheckLine::pass("tilde-fixed-point (even D only)", 0.0);
    }
    let td = tilde_thetad(arr, spec);
    let expect = arr.bb(3) - Rat::one();
    if td == expect {
        CheckLine::pass("tilde-fixed-point", 0.0)
    } else {
        CheckLine::fail(
            "tilde-fixed-point",
            1.0,
            format!("tilde(theta_d) = {td}, b_3 - 1 = {expect}"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use crate::spectra::spectrum_exact;
    use num_traits::Zero;

    fn q4() -> (IntersectionArray, Spectrum<Rat>) {
        let arr = IntersectionArray::hypercube(4);
        let spec = spectrum_exact(&arr).unwrap();
        (arr, spec)
    }

    #[test]
    fn tilde_branches() {
        let (arr, spec) = q4();
        assert_eq!(
            tilde(&Extended::<Rat>::Infinite, &arr),
            Extended::Finite(rat_int(-1))
        );
        assert_eq!(tilde_theta1(&arr, &spec), rat_int(-2));
        assert_eq!(tilde_thetad(&arr, &spec), rat_int(0));
        assert!(tilde_fixed_point_check(&arr, &spec).pass);
    }

    #[test]
    fn tilde_pole_is_infinite() {
        // Q_6 has b_2 = 4, so z = 2 sits exactly on the pole.
        let arr = IntersectionArray::hypercube(6);
        assert_eq!(arr.bb(2), rat_int(4));
        assert_eq!(
            tilde(&Extended::Finite(rat_int(2)), &arr),
            Extended::Infinite
        );
        assert_eq!(
            tilde(&Extended::Finite(2.0_f64), &arr),
            Extended::Infinite
        );
    }

    #[test]
    fn classify_q4_cases() {
        let (arr, spec) = q4();
        let case = classify_eta(rat_int(-2), &arr, &spec).unwrap();
        assert_eq!(case.tag, CaseTag::I);
        assert_eq!(case.n, Some(1));

        let case = classify_eta(rat_int(0), &arr, &spec).unwrap();
        assert_eq!(case.tag, CaseTag::III);
        assert_eq!(case.dim_deficit, 1);

        let case = classify_eta(rat_int(-1), &arr, &spec).unwrap();
        assert_eq!(case.tag, CaseTag::IV);
        assert!(case.psi.is_none());

        assert!(classify_eta(rat_int(1), &arr, &spec).is_err());
        assert!(classify_eta(rat_int(-3), &arr, &spec).is_err());
    }

    #[test]
    fn classify_q6_interior() {
        let arr = IntersectionArray::hypercube(6);
        let spec = spectrum_exact(&arr).unwrap();
        // Bounds are -2 and 2; -1 is interior with psi undefined.
        let case = classify_eta(rat_int(-1), &arr, &spec).unwrap();
        assert_eq!(case.tag, CaseTag::IV);
        assert!(case.psi.is_none());
        // psi = b_2 (1 - b_3/(1+eta)) = 4 (1 - 3/(3/2)) = -4
        let case = classify_eta(rat(1, 2), &arr, &spec).unwrap();
        assert_eq!(case.psi, Some(rat_int(-4)));
    }

    #[test]
    fn endpoint0_blueprint_q4() {
        let (arr, spec) = q4();
        let bp = blueprint_endpoint0(&arr, &spec);
        assert_eq!(bp.dimension, 5);
        let expect: Vec<Rat> = [1, 4, 6, 4, 1].iter().map(|&m| rat(m, 16)).collect();
        assert_eq!(bp.e_norms, expect);
        assert_eq!(bp.astar_norms[0], Rat::one());
        // transition row i = 2 is f_2 over the spectrum: (6, 0, -2, 0, 6)
        let row: Vec<Rat> = (0..5).map(|h| bp.transition[(2, h)].clone()).collect();
        let expect: Vec<Rat> = [6, 0, -2, 0, 6].iter().map(|&x| rat_int(x)).collect();
        assert_eq!(row, expect);
        // superdiagonal b_0..b_3, subdiagonal c_1..c_4
        assert_eq!(bp.tridiag[(0, 1)], rat_int(4));
        assert_eq!(bp.tridiag[(1, 0)], rat_int(1));
        assert_eq!(bp.tridiag[(4, 3)], rat_int(4));
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn endpoint1_blueprint_q4() {
        let (arr, spec) = q4();
        let bp = blueprint_endpoint1(&arr, &spec);
        assert_eq!(bp.dimension, 3);
        assert_eq!(bp.e_norms[0], rat(1, 4));
        assert_eq!(bp.astar_norms[0], Rat::one());
        assert_eq!(bp.astar_norms[1], rat_int(2));
        assert_eq!(bp.astar_norms[2], rat_int(1));
        assert_eq!(
            ModuleBlueprint::<Rat>::endpoint1_local_eigenvalue(&arr),
            Rat::zero()
        );
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn case_i_blueprint_q4() {
        let (arr, spec) = q4();
        let case = classify_eta(rat_int(-2), &arr, &spec).unwrap();
        let bp = blueprint_endpoint2(&arr, &spec, &case).unwrap();
        assert_eq!(bp.dimension, 1);
        assert_eq!(bp.e_index_set, vec![2]);
        assert_eq!(bp.e_norms, vec![Rat::one()]);
        assert_eq!(bp.astar_norms, vec![Rat::one()]);
        assert_eq!(bp.transition[(0, 0)], Rat::one());
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn case_iii_blueprint_q4() {
        let (arr, spec) = q4();
        let case = classify_eta(Rat::zero(), &arr, &spec).unwrap();
        let bp = blueprint_endpoint2(&arr, &spec, &case).unwrap();
        assert_eq!(bp.dimension, 2);
        assert_eq!(bp.e_index_set, vec![1, 3]);
        assert_eq!(bp.e_norms, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(bp.astar_norms, vec![rat_int(1), rat_int(4)]);
        assert_eq!(bp.tridiag[(0, 1)], rat_int(4));
        assert_eq!(bp.tridiag[(1, 0)], rat_int(1));
        // transition rows: g_0 = 1 -> (1, 1); g_1 = x -> (2, -2)
        assert_eq!(bp.transition[(0, 0)], rat_int(1));
        assert_eq!(bp.transition[(0, 1)], rat_int(1));
        assert_eq!(bp.transition[(1, 0)], rat_int(2));
        assert_eq!(bp.transition[(1, 1)], rat_int(-2));
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn case_ii_blueprint_doubled_odd() {
        let arr = IntersectionArray::doubled_odd(3);
        let spec = spectrum_exact(&arr).unwrap();
        assert_eq!(tilde_theta1(&arr, &spec), rat_int(-2));
        assert_eq!(tilde_thetad(&arr, &spec), rat_int(1));
        let case = classify_eta(rat_int(1), &arr, &spec).unwrap();
        assert_eq!(case.tag, CaseTag::II);
        assert_eq!(case.n, Some(2));
        let bp = blueprint_endpoint2(&arr, &spec, &case).unwrap();
        assert_eq!(bp.dimension, 2);
        assert_eq!(bp.e_index_set, vec![1, 4]);
        assert_eq!(bp.e_norms, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(bp.astar_norms, vec![rat_int(1), rat_int(4)]);
        assert_eq!(bp.tridiag[(0, 1)], rat_int(4));
        assert_eq!(bp.transition[(1, 0)], rat_int(2));
        assert_eq!(bp.transition[(1, 1)], rat_int(-2));
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn case_iv_pole_superdiagonal() {
        let arr = IntersectionArray::hypercube(6);
        let spec = spectrum_exact(&arr).unwrap();
        let case = classify_eta(rat_int(-1), &arr, &spec).unwrap();
        let bp = blueprint_endpoint2(&arr, &spec, &case).unwrap();
        assert_eq!(bp.dimension, 5);
        // superdiagonal is (b_2, b_3, b_4, b_5) = (4, 3, 2, 1)
        for (j, expect) in [4, 3, 2, 1].iter().enumerate() {
            assert_eq!(bp.tridiag[(j, j + 1)], rat_int(*expect));
        }
        assert!(blueprint_internal_checks(&arr, &bp).all_pass());
    }

    #[test]
    fn eta_sweep_small() {
        for arr in [
            IntersectionArray::hypercube(4),
            IntersectionArray::doubled_odd(3),
        ] {
            let spec = spectrum_exact(&arr).unwrap();
            let report = blueprint_eta_sweep(&arr, &spec, 20).unwrap();
            assert!(report.all_pass(), "{report}");
            assert_eq!(report.max_residual(), 0.0);
        }
    }

    #[test]
    fn blueprint_json_is_deterministic() {
        let (arr, spec) = q4();
        let bp = blueprint_endpoint1(&arr, &spec);
        let a = serde_json::to_string(&bp.to_json()).unwrap();
        let b = serde_json::to_string(&blueprint_endpoint1(&arr, &spec).to_json()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"endpoint\":1"));
    }
}
