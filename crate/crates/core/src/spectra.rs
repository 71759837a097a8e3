//! Eigenvalues and multiplicities of an intersection array.
//!
//! The eigenvalues are the roots of the characteristic polynomial of the
//! tridiagonal quotient matrix. The distance polynomials give that
//! characteristic polynomial directly: `x f_D - b_{D-1} f_{D-1}` has degree
//! `D + 1`, annihilates the adjacency class, and its roots are the `D + 1`
//! distinct eigenvalues. Rational roots are recovered exactly; the rest are
//! isolated to certified intervals and returned as floats.
//!
//! Multiplicities are recovered from the orthogonality of the distance
//! polynomials: `m_h = |X| / sum_i f_i(theta_h)^2 / k_i`. That inversion is a
//! standard consequence of the displayed orthogonality relation rather than a
//! displayed formula itself.

use num_traits::One;
use serde::Serialize;

use crate::arrays::{valencies, IntersectionArray};
use crate::config::ROOT_INTERVAL_WIDTH;
use crate::polyfams;
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::roots::{isolate_real_roots, RootError};
pub use crate::roots::RootEstimate;
use crate::scalar::{rat_int, rat_str, scalar_json, Rat, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum SpectraError {
    #[error("eigenvalue separation failed: {0}")]
    RootSeparationFailure(RootError),
    #[error("non-positive multiplicity at eigenvalue index {index}")]
    NonPositiveMultiplicity { index: usize },
    #[error("spectrum is irrational; no exact representation")]
    IrrationalSpectrum,
    #[error("multiplicity sum {got} does not match vertex count {expected}")]
    MultiplicitySum { expected: String, got: String },
}

/// Eigenvalues `theta_0 > ... > theta_D` with multiplicities and `|X|`.
#[derive(Clone, Debug)]
pub struct Spectrum<S> {
    pub theta: Vec<S>,
    pub m: Vec<S>,
    pub size: Rat,
}

impl<S: Scalar> Spectrum<S> {
    pub fn diameter(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn size_s(&self) -> S {
        S::from_rat(&self.size)
    }

    pub fn k(&self) -> S {
        self.theta[0].clone()
    }

    pub fn to_json(&self) -> SpectrumJson {
        SpectrumJson {
            theta: self.theta.iter().map(scalar_json::<S>).collect(),
            m: self.m.iter().map(scalar_json::<S>).collect(),
            exact: S::EXACT,
        }
    }
}

impl Spectrum<Rat> {
    pub fn to_f64(&self) -> Spectrum<f64> {
        Spectrum {
            theta: self.theta.iter().map(Scalar::to_f64).collect(),
            m: self.m.iter().map(Scalar::to_f64).collect(),
            size: self.size.clone(),
        }
    }
}

/// Wire form: `{"theta": [...], "m": [...], "exact": bool}` with `num/den`
/// strings when exact.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumJson {
    pub theta: Vec<serde_json::Value>,
    pub m: Vec<serde_json::Value>,
    pub exact: bool,
}

/// Characteristic polynomial of the quotient matrix, monic up to the factor
/// `c_1 c_2 ... c_D`.
pub fn characteristic_polynomial(arr: &IntersectionArray) -> crate::RatPoly {
    let fams = polyfams::families(arr);
    let f_top = &fams.f[arr.d];
    let f_prev = &fams.f[arr.d - 1];
    f_top.mul_x().sub(&f_prev.scale(&arr.bb(arr.d as isize - 1)))
}

/// [`ROOT_INTERVAL_WIDTH`] as an exact rational.
fn root_width() -> Rat {
    let exp = (-ROOT_INTERVAL_WIDTH.log10()).round() as u32;
    Rat::new(num_bigint::BigInt::one(), num_bigint::BigInt::from(10).pow(exp))
}

/// All `D + 1` eigenvalues, sorted strictly decreasing.
pub fn eigenvalues(arr: &IntersectionArray) -> Result<Vec<RootEstimate>, SpectraError> {
    let chi = characteristic_polynomial(arr);
    let k = arr.k() as i64;
    let mut roots = isolate_real_roots(&chi, &rat_int(-k - 1), &rat_int(k + 1), &root_width())
        .map_err(SpectraError::RootSeparationFailure)?;
    if roots.len() != arr.d + 1 {
        return Err(SpectraError::RootSeparationFailure(RootError::CountMismatch {
            expected: arr.d + 1,
            found: roots.len(),
        }));
    }
    roots.reverse();
    Ok(roots)
}

/// Multiplicities from the distance-polynomial orthogonality inversion.
pub fn multiplicities<S: Scalar>(
    arr: &IntersectionArray,
    theta: &[S],
) -> Result<Vec<S>, SpectraError> {
    let fams = polyfams::families(arr);
    let val = valencies(arr);
    let size = S::from_rat(&val.total);
    let f_s: Vec<crate::poly::Poly<S>> = fams.f.iter().map(|p| p.to_scalar()).collect();
    let k_s: Vec<S> = val.k.iter().map(S::from_rat).collect();

    let mut m = Vec::with_capacity(theta.len());
    for (h, th) in theta.iter().enumerate() {
        let mut denom = S::zero();
        for (fi, ki) in f_s.iter().zip(&k_s) {
            let v = fi.eval(th);
            denom = denom + v.clone() * v / ki.clone();
        }
        if denom <= S::zero() {
            return Err(SpectraError::NonPositiveMultiplicity { index: h });
        }
        m.push(size.clone() / denom);
    }

    let total: S = m.iter().fold(S::zero(), |acc, x| acc + x.clone());
    if !total.close_to(&size, 1e-9) {
        return Err(SpectraError::MultiplicitySum {
            expected: format!("{size}"),
            got: format!("{total}"),
        });
    }
    Ok(m)
}

/// Exact spectrum; errors with [`SpectraError::IrrationalSpectrum`] if any
/// eigenvalue is irrational.
pub fn spectrum_exact(arr: &IntersectionArray) -> Result<Spectrum<Rat>, SpectraError> {
    let roots = eigenvalues(arr)?;
    let theta: Option<Vec<Rat>> = roots.iter().map(RootEstimate::to_rat).collect();
    let theta = theta.ok_or(SpectraError::IrrationalSpectrum)?;
    let m = multiplicities(arr, &theta)?;
    Ok(Spectrum {
        theta,
        m,
        size: valencies(arr).total,
    })
}

/// Float spectrum; always available for a valid array.
pub fn spectrum_f64(arr: &IntersectionArray) -> Result<Spectrum<f64>, SpectraError> {
    let roots = eigenvalues(arr)?;
    let theta: Vec<f64> = roots.iter().map(RootEstimate::to_f64).collect();
    let m = multiplicities(arr, &theta)?;
    Ok(Spectrum {
        theta,
        m,
        size: valencies(arr).total,
    })
}

/// Exact spectrum when the roots are rational, float fallback otherwise.
pub enum AnySpectrum {
    Exact(Spectrum<Rat>),
    Approx(Spectrum<f64>),
}

pub fn spectrum(arr: &IntersectionArray) -> Result<AnySpectrum, SpectraError> {
    match spectrum_exact(arr) {
        Ok(s) => Ok(AnySpectrum::Exact(s)),
        Err(SpectraError::IrrationalSpectrum) => Ok(AnySpectrum::Approx(spectrum_f64(arr)?)),
        Err(e) => Err(e),
    }
}

/// Eigenvalue facts for bipartite arrays: negation symmetry, the middle
/// eigenvalue, the `theta_1^2 > b_2 > theta_d^2` sandwich, and the bounds on
/// `theta_1` and `theta_D`.
pub fn verify_spectral_lemmas<S: Scalar>(arr: &IntersectionArray, spec: &Spectrum<S>) -> Report {
    let mut report = Report::new(format!("spectral lemmas: {}", arr.display_name()));
    let d = arr.d;
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    let k = S::from_rat(&arr.bb(0));

    report.push(CheckLine::from_residual(
        "theta_0 = k",
        spec.theta[0].rel_diff(&k),
        tol,
    ));
    report.push(CheckLine::from_residual(
        "m_0 = 1",
        spec.m[0].rel_diff(&S::one()),
        tol,
    ));

    let decreasing = spec.theta.windows(2).all(|w| w[0] > w[1]);
    report.push(CheckLine::from_residual(
        "theta strictly decreasing",
        if decreasing { 0.0 } else { 1.0 },
        0.0,
    ));

    let mut sym = ResidualAccumulator::new("theta_{D-h} = -theta_h", tol);
    for h in 0..=d {
        let r = spec.theta[d - h].rel_diff(&-spec.theta[h].clone());
        sym.record(r, || format!("h = {h}"));
    }
    report.push(sym.finish());

    let half = arr.half();
    if d % 2 == 0 {
        report.push(CheckLine::from_residual(
            "theta_d = 0 (D even)",
            spec.theta[half].abs().to_f64(),
            tol,
        ));
    } else {
        let pos = spec.theta[half] > S::zero();
        let mirror = spec.theta[half + 1].rel_diff(&-spec.theta[half].clone());
        report.push(CheckLine::from_residual(
            "theta_d > 0 and theta_{d+1} = -theta_d (D odd)",
            if pos { mirror } else { 1.0 },
            tol,
        ));
    }

    let th1sq = spec.theta[1].clone() * spec.theta[1].clone();
    let thdsq = spec.theta[half].clone() * spec.theta[half].clone();
    let b2 = S::from_rat(&arr.bb(2));
    report.push(CheckLine::from_residual(
        "theta_1^2 > b_2 > theta_d^2",
        if th1sq > b2 && b2 > thdsq { 0.0 } else { 1.0 },
        0.0,
    ));

    let minus_one = -S::one();
    report.push(CheckLine::from_residual(
        "-1 < theta_1 < k",
        if spec.theta[1] > minus_one && spec.theta[1] < k {
            0.0
        } else {
            1.0
        },
        0.0,
    ));
    report.push(CheckLine::from_residual(
        "-k <= theta_D < -1",
        if spec.theta[d] < minus_one && spec.theta[d] >= -k.clone() {
            0.0
        } else {
            1.0
        },
        0.0,
    ));

    let m_total: S = spec.m.iter().fold(S::zero(), |a, x| a + x.clone());
    report.push(CheckLine::from_residual(
        "sum m_h = |X|",
        m_total.rel_diff(&spec.size_s()),
        tol,
    ));
    let trace: S = spec
        .theta
        .iter()
        .zip(&spec.m)
        .fold(S::zero(), |a, (t, m)| a + t.clone() * m.clone());
    report.push(CheckLine::from_residual(
        "sum m_h theta_h = 0",
        trace.abs().to_f64() / spec.size.to_f64(),
        tol,
    ));

    report
}

/// Residual of the distance-polynomial orthogonality under the computed
/// multiplicities, for all pairs `(i, j)`.
pub fn orthogonality_residual<S: Scalar>(arr: &IntersectionArray, spec: &Spectrum<S>) -> CheckLine {
    let fams = polyfams::families(arr);
    let val = valencies(arr);
    let tol = if S::EXACT { 0.0 } else { 1e-8 };
    let f_s: Vec<crate::poly::Poly<S>> = fams.f.iter().map(|p| p.to_scalar()).collect();
    let size = spec.size_s();
    let mut acc = ResidualAccumulator::new("f-orthogonality", tol);
    for i in 0..=arr.d {
        for j in 0..=arr.d {
            let mut sum = S::zero();
            for (h, th) in spec.theta.iter().enumerate() {
                sum = sum + f_s[i].eval(th) * f_s[j].eval(th) * spec.m[h].clone();
            }
            let expect = if i == j {
                size.clone() * S::from_rat(&val.k[i])
            } else {
                S::zero()
            };
            acc.record(sum.rel_diff(&expect), || format!("(i, j) = ({i}, {j})"));
        }
    }
    acc.finish()
}

/// Pretty form of a spectrum entry for reports.
pub fn theta_label(root: &RootEstimate) -> String {
    match root {
        RootEstimate::Exact(r) => rat_str(r),
        RootEstimate::Interval { lo, hi } => {
            format!("[{:.13}, {:.13}]", lo.to_f64(), hi.to_f64())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q4_spectrum_exact() {
        let arr = IntersectionArray::hypercube(4);
        let spec = spectrum_exact(&arr).unwrap();
        let theta: Vec<Rat> = [4, 2, 0, -2, -4].iter().map(|&t| rat_int(t)).collect();
        let m: Vec<Rat> = [1, 4, 6, 4, 1].iter().map(|&t| rat_int(t)).collect();
        assert_eq!(spec.theta, theta);
        assert_eq!(spec.m, m);
        assert!(verify_spectral_lemmas(&arr, &spec).all_pass());
        assert!(orthogonality_residual(&arr, &spec).pass);
    }

    #[test]
    fn doubled_odd_spectrum_exact() {
        let arr = IntersectionArray::doubled_odd(3);
        let spec = spectrum_exact(&arr).unwrap();
        let theta: Vec<Rat> = [3, 2, 1, -1, -2, -3].iter().map(|&t| rat_int(t)).collect();
        let m: Vec<Rat> = [1, 4, 5, 5, 4, 1].iter().map(|&t| rat_int(t)).collect();
        assert_eq!(spec.theta, theta);
        assert_eq!(spec.m, m);
        assert!(verify_spectral_lemmas(&arr, &spec).all_pass());
    }

    #[test]
    fn q6_spectrum_exact() {
        let arr = IntersectionArray::hypercube(6);
        let spec = spectrum_exact(&arr).unwrap();
        let theta: Vec<Rat> = [6, 4, 2, 0, -2, -4, -6].iter().map(|&t| rat_int(t)).collect();
        let m: Vec<Rat> = [1, 6, 15, 20, 15, 6, 1].iter().map(|&t| rat_int(t)).collect();
        assert_eq!(spec.theta, theta);
        assert_eq!(spec.m, m);
    }

    #[test]
    fn float_path_matches_exact() {
        let arr = IntersectionArray::hypercube(5);
        let exact = spectrum_exact(&arr).unwrap();
        let float = spectrum_f64(&arr).unwrap();
        for (a, b) in exact.theta.iter().zip(&float.theta) {
            assert!((a.to_f64() - b).abs() < 1e-12);
        }
        assert!(verify_spectral_lemmas(&arr, &float).all_pass());
    }

    #[test]
    fn spectrum_json_shape() {
        let arr = IntersectionArray::hypercube(4);
        let spec = spectrum_exact(&arr).unwrap();
        let json = serde_json::to_value(spec.to_json()).unwrap();
        assert_eq!(json["exact"], serde_json::json!(true));
        assert_eq!(json["theta"][0], serde_json::json!("4"));
    }
}
