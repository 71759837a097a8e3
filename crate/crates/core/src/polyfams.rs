//! The polynomial families attached to a bipartite intersection array.
//!
//! Four univariate families and one bivariate family are in play:
//!
//! * `f_i` — distance polynomials: `f_0 = 1`, `x f_i = b_{i-1} f_{i-1} + c_{i+1} f_{i+1}`.
//! * `p_i` — alternating partial sums of the `f_i`; same-degree, same leading
//!   coefficient, and satisfying `x p_i = c_{i+1} p_{i+1} + b_{i+1} p_{i-1}`.
//! * `P_i` — the even/odd core of `p_i`: `p_i(x) = x^{s(i)} P_i(x^2)` where
//!   `s(i)` is the parity of `i`.
//! * `g_i` — a `theta`-dependent deformation of the `p_i` built from ratios
//!   `P_h(theta)/P_i(theta)`; three-term recurrence with coefficients
//!   `omega_i`.
//! * `Psi_i` — bivariate companions used by the quadratic identities.
//!
//! Families `f`, `p`, `P`, `Psi` live over exact rationals. The `g` family is
//! generic over the scalar so a sampled float `theta` works the same way as
//! an exact one.

use num_traits::{One, Zero};

use crate::arrays::{valencies, IntersectionArray};
use crate::config::{ENDPOINT_OFFSET_DEN, SIGN_SAMPLES};
use crate::poly::{BivarPoly, Poly};
use crate::report::{CheckLine, Report, ResidualAccumulator};
use crate::scalar::{rat, Rat, Scalar};
use crate::spectra::Spectrum;

#[derive(Debug, thiserror::Error)]
pub enum PolyError {
    #[error("theta = {value} is outside every admissible regime ({context})")]
    InadmissibleTheta { value: String, context: String },
    #[error("polynomial p_{index} has a nonzero coefficient of the wrong parity")]
    ParityViolation { index: usize },
}

/// `s(i)`: 0 for even `i`, 1 for odd `i`.
pub fn s(i: usize) -> usize {
    i % 2
}

/// The `f`, `p`, and `P` families, indices `0..=D`.
#[derive(Clone, Debug)]
pub struct PolyFamilies {
    pub f: Vec<Poly<Rat>>,
    pub p: Vec<Poly<Rat>>,
    pub big_p: Vec<Poly<Rat>>,
}

/// Distance polynomials `f_0..f_D` from the three-term recurrence.
pub fn f_family(arr: &IntersectionArray) -> Vec<Poly<Rat>> {
    let mut f: Vec<Poly<Rat>> = Vec::with_capacity(arr.d + 1);
    f.push(Poly::one());
    for i in 0..arr.d {
        let prev = if i == 0 { Poly::zero() } else { f[i - 1].clone() };
        let next = f[i]
            .mul_x()
            .sub(&prev.scale(&arr.bb(i as isize - 1)))
            .div_scalar(&arr.cc(i as isize + 1));
        f.push(next);
    }
    f
}

/// Partial-sum polynomials `p_0..p_D`: `p_i = f_i + f_{i-2} + f_{i-4} + ...`.
pub fn p_family(f: &[Poly<Rat>]) -> Vec<Poly<Rat>> {
    let mut p: Vec<Poly<Rat>> = Vec::with_capacity(f.len());
    for i in 0..f.len() {
        let base = if i >= 2 { p[i - 2].clone() } else { Poly::zero() };
        p.push(base.add(&f[i]));
    }
    p
}

/// Even/odd cores `P_0..P_D` with `p_i(x) = x^{s(i)} P_i(x^2)`.
pub fn p_substitution_family(p: &[Poly<Rat>]) -> Result<Vec<Poly<Rat>>, PolyError> {
    p.iter()
        .enumerate()
        .map(|(i, pi)| {
            pi.parity_compress(s(i))
                .map_err(|_| PolyError::ParityViolation { index: i })
        })
        .collect()
}

/// All three exact families at once.
pub fn families(arr: &IntersectionArray) -> PolyFamilies {
    let f = f_family(arr);
    let p = p_family(&f);
    // The recurrence alternates parity with i, so compression cannot fail for
    // positive intersection numbers; a failure here is an internal bug.
    let big_p =
        p_substitution_family(&p).expect("p_i parity is forced by the bipartite recurrence");
    PolyFamilies { f, p, big_p }
}

/// `k_i b_i b_{i+1} / (k_h b_h b_{h+1})` as an exact rational.
fn norm_ratio(arr: &IntersectionArray, ktab: &[Rat], i: usize, h: usize) -> Rat {
    (ktab[i].clone() * arr.bb(i as isize) * arr.bb(i as isize + 1))
        / (ktab[h].clone() * arr.bb(h as isize) * arr.bb(h as isize + 1))
}

/// Bivariate family `Psi_0..Psi_{D-2}`:
/// `Psi_i = sum_{h = i, i-2, ...} p_h(x) p_h(y) * k_i b_i b_{i+1} / (k_h b_h b_{h+1})`.
pub fn psi_family(arr: &IntersectionArray, fams: &PolyFamilies) -> Vec<BivarPoly<Rat>> {
    let ktab = valencies(arr).k;
    (0..=arr.d - 2)
        .map(|i| {
            let mut acc = BivarPoly::zero();
            let mut h = i as isize;
            while h >= 0 {
                let hu = h as usize;
                let term = BivarPoly::product(&fams.p[hu], &fams.p[hu])
                    .scale_by(&norm_ratio(arr, &ktab, i, hu));
                acc = acc.add(&term);
                h -= 2;
            }
            acc
        })
        .collect()
}

/// Admissible regimes for the `g`-family parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaRegime {
    /// `theta > theta_1^2` (any parity of `D`).
    AboveTheta1Sq,
    /// `theta < theta_d^2`, `D` odd.
    BelowThetaDSqOdd,
    /// `theta <= 0`, `D` even.
    NonpositiveEven,
}

/// A `g`-family parameter together with its admissibility certificate.
///
/// In every admissible regime `P_i(theta) != 0` for `0 <= i <= D-1`, which is
/// exactly what keeps the `g` construction well defined.
#[derive(Clone, Debug)]
pub struct ThetaParameter<S> {
    pub value: S,
    pub regime: ThetaRegime,
}

/// Classifies `value` into a regime or rejects it.
pub fn theta_parameter<S: Scalar>(
    arr: &IntersectionArray,
    spec: &Spectrum<S>,
    value: S,
) -> Result<ThetaParameter<S>, PolyError> {
    let th1sq = spec.theta[1].clone() * spec.theta[1].clone();
    let d = arr.half();
    let thdsq = spec.theta[d].clone() * spec.theta[d].clone();
    let regime = if value > th1sq {
        Some(ThetaRegime::AboveTheta1Sq)
    } else if arr.d % 2 == 1 && value < thdsq {
        Some(ThetaRegime::BelowThetaDSqOdd)
    } else if arr.d % 2 == 0 && value <= S::zero() {
        Some(ThetaRegime::NonpositiveEven)
    } else {
        None
    };
    match regime {
        Some(regime) => Ok(ThetaParameter { value, regime }),
        None => Err(PolyError::InadmissibleTheta {
            value: format!("{value}"),
            context: if arr.d % 2 == 1 {
                format!("D odd: need theta > theta_1^2 or theta < theta_d^2; theta_1^2 = {th1sq}, theta_d^2 = {thdsq}")
            } else {
                format!("D even: need theta > theta_1^2 or theta <= 0; theta_1^2 = {th1sq}")
            },
        }),
    }
}

/// Values `P_0(theta)..P_D(theta)`; the first `D` of them are nonzero.
fn big_p_values<S: Scalar>(
    fams: &PolyFamilies,
    theta: &ThetaParameter<S>,
) -> Result<Vec<S>, PolyError> {
    let vals: Vec<S> = fams
        .big_p
        .iter()
        .map(|p| p.to_scalar::<S>().eval(&theta.value))
        .collect();
    let d = fams.big_p.len() - 1;
    for (i, v) in vals.iter().enumerate().take(d) {
        if v.is_zero() {
            return Err(PolyError::InadmissibleTheta {
                value: format!("{}", theta.value),
                context: format!("P_{i}(theta) = 0 inside a declared admissible regime"),
            });
        }
    }
    Ok(vals)
}

/// `g_0..g_{D-2}` by the defining sums.
pub fn g_family<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    theta: &ThetaParameter<S>,
) -> Result<Vec<Poly<S>>, PolyError> {
    let pvals = big_p_values(fams, theta)?;
    let ktab = valencies(arr).k;
    let mut out = Vec::with_capacity(arr.d - 1);
    for i in 0..=arr.d - 2 {
        let mut acc = Poly::<S>::zero();
        let mut h = i as isize;
        while h >= 0 {
            let hu = h as usize;
            let coeff = pvals[hu].clone() / pvals[i].clone()
                * S::from_rat(&norm_ratio(arr, &ktab, i, hu));
            acc = acc.add(&fams.p[hu].to_scalar::<S>().scale(&coeff));
            h -= 2;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Recurrence coefficients `omega_0..omega_{D-2}` with `omega_0 = 0` and
/// `omega_i = (b_{i+1} c_{i+2} / c_i) * P_{i-1}(theta) P_{i+2}(theta) / (P_i(theta) P_{i+1}(theta))`.
///
/// `omega_{D-2}` involves `P_D(theta)` and is allowed to vanish; for even `D`
/// at `theta = 0` it always does.
pub fn omega_coeffs<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    theta: &ThetaParameter<S>,
) -> Result<Vec<S>, PolyError> {
    let pvals = big_p_values(fams, theta)?;
    let mut out = vec![S::zero()];
    for i in 1..=arr.d - 2 {
        let lead = S::from_rat(
            &(arr.bb(i as isize + 1) * arr.cc(i as isize + 2) / arr.cc(i as isize)),
        );
        let ratio = pvals[i - 1].clone() * pvals[i + 2].clone()
            / (pvals[i].clone() * pvals[i + 1].clone());
        out.push(lead * ratio);
    }
    Ok(out)
}

/// `g_0..g_{D-2}` regenerated through the three-term recurrence, as an
/// independent route to the same family.
pub fn g_family_recurrence<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    theta: &ThetaParameter<S>,
) -> Result<Vec<Poly<S>>, PolyError> {
    let omega = omega_coeffs(arr, fams, theta)?;
    let mut g: Vec<Poly<S>> = Vec::with_capacity(arr.d - 1);
    g.push(Poly::one());
    if arr.d >= 3 {
        g.push(fams.p[1].to_scalar::<S>());
    }
    for i in 1..=arr.d.saturating_sub(3) {
        let next = g[i]
            .mul_x()
            .sub(&g[i - 1].scale(&omega[i]))
            .div_scalar(&S::from_rat(&arr.cc(i as isize + 1)));
        g.push(next);
    }
    Ok(g)
}

/// Equispaced admissible parameters: [`SIGN_SAMPLES`] per regime, endpoints
/// pulled inward by `1/10^6`, spanning a window of width `k^2` (plus
/// `theta = 0` itself for even `D`).
pub fn admissible_theta_samples(
    arr: &IntersectionArray,
    spec: &Spectrum<Rat>,
) -> Vec<ThetaParameter<Rat>> {
    let eps = rat(1, ENDPOINT_OFFSET_DEN);
    let ksq = arr.bb(0) * arr.bb(0);
    let th1sq = &spec.theta[1] * &spec.theta[1];
    let d = arr.half();
    let thdsq = &spec.theta[d] * &spec.theta[d];
    let n = SIGN_SAMPLES as i64;

    let mut out = Vec::new();
    for j in 0..n {
        let step = &ksq * rat(j, n);
        let value = &th1sq + &eps + step;
        out.push(ThetaParameter {
            value,
            regime: ThetaRegime::AboveTheta1Sq,
        });
    }
    if arr.d % 2 == 1 {
        for j in 0..n {
            let step = &ksq * rat(j, n);
            let value = &thdsq - &eps - step;
            out.push(ThetaParameter {
                value,
                regime: ThetaRegime::BelowThetaDSqOdd,
            });
        }
    } else {
        out.push(ThetaParameter {
            value: Rat::zero(),
            regime: ThetaRegime::NonpositiveEven,
        });
        for j in 0..n - 1 {
            let step = &ksq * rat(j, n);
            let value = -&eps - step;
            out.push(ThetaParameter {
                value,
                regime: ThetaRegime::NonpositiveEven,
            });
        }
    }
    out
}

fn delta_factor(i: usize, j: usize) -> bool {
    i == j
}

/// Verifies every polynomial-level and spectrum-level identity of the `f`,
/// `p`, `P`, `Psi`, `g` families. Exact scalars make each line an equality
/// test; float scalars fall back to a relative tolerance.
pub fn verify_polynomial_identities<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    psi: &[BivarPoly<Rat>],
    spec: &Spectrum<S>,
    thetas: &[ThetaParameter<S>],
) -> Result<Report, PolyError> {
    let mut report = Report::new(format!("polynomial identities: {}", arr.display_name()));
    let tol = if S::EXACT { 0.0 } else { 1e-8 };
    let d = arr.d;
    let val = valencies(arr);
    let ktab = &val.k;
    let size = S::from_rat(&val.total);
    let k_s = S::from_rat(&arr.bb(0));

    // x f_i = b_{i-1} f_{i-1} + c_{i+1} f_{i+1}
    {
        let mut acc = ResidualAccumulator::new("f-three-term-recurrence", 0.0);
        for i in 0..d {
            let lhs = fams.f[i].mul_x();
            let prev = if i == 0 { Poly::zero() } else { fams.f[i - 1].clone() };
            let rhs = prev
                .scale(&arr.bb(i as isize - 1))
                .add(&fams.f[i + 1].scale(&arr.cc(i as isize + 1)));
            acc.record(lhs.rel_diff(&rhs), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // x p_i = c_{i+1} p_{i+1} + b_{i+1} p_{i-1}
    {
        let mut acc = ResidualAccumulator::new("p-partial-sum-recurrence", 0.0);
        for i in 0..d {
            let lhs = fams.p[i].mul_x();
            let prev = if i == 0 { Poly::zero() } else { fams.p[i - 1].clone() };
            let rhs = fams.p[i + 1]
                .scale(&arr.cc(i as isize + 1))
                .add(&prev.scale(&arr.bb(i as isize + 1)));
            acc.record(lhs.rel_diff(&rhs), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // degrees and leading coefficients
    {
        let mut acc = ResidualAccumulator::new("leading-coefficient-law", 0.0);
        for i in 0..=d {
            let lead = Rat::one() / arr.c_prefix(i);
            let f_ok = fams.f[i].degree() == Some(i) && fams.f[i].leading() == Some(&lead);
            let p_ok = fams.p[i].degree() == Some(i) && fams.p[i].leading() == Some(&lead);
            let bp_ok = fams.big_p[i].degree() == Some((i - s(i)) / 2);
            acc.record_bool(f_ok && p_ok && bp_ok, || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // p_i(x) = x^{s(i)} P_i(x^2)
    {
        let mut acc = ResidualAccumulator::new("p-substitution", 0.0);
        for i in 0..=d {
            let mut expanded = fams.big_p[i].compose_x_squared();
            if s(i) == 1 {
                expanded = expanded.mul_x();
            }
            acc.record(expanded.rel_diff(&fams.p[i]), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // x^{s(i)} P_i = c_{i+1} P_{i+1} + b_{i+1} P_{i-1}
    {
        let mut acc = ResidualAccumulator::new("P-recurrence", 0.0);
        for i in 0..d {
            let lhs = if s(i) == 1 {
                fams.big_p[i].mul_x()
            } else {
                fams.big_p[i].clone()
            };
            let prev = if i == 0 {
                Poly::zero()
            } else {
                fams.big_p[i - 1].clone()
            };
            let rhs = fams.big_p[i + 1]
                .scale(&arr.cc(i as isize + 1))
                .add(&prev.scale(&arr.bb(i as isize + 1)));
            acc.record(lhs.rel_diff(&rhs), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // p_D + p_{D-1} = sum f_i  and  p_D - p_{D-1} = sum (-1)^i f_i
    {
        let mut acc = ResidualAccumulator::new("distance-sum", 0.0);
        let mut plain = Poly::zero();
        let mut alternating = Poly::zero();
        for (i, fi) in fams.f.iter().enumerate() {
            plain = plain.add(fi);
            alternating = if i % 2 == 0 {
                alternating.add(fi)
            } else {
                alternating.sub(fi)
            };
        }
        let sum = fams.p[d].add(&fams.p[d - 1]);
        let diff = fams.p[d].sub(&fams.p[d - 1]);
        let alternating = if d % 2 == 1 { alternating.neg() } else { alternating };
        acc.record(sum.rel_diff(&plain), || "sum side".into());
        acc.record(diff.rel_diff(&alternating), || "alternating side".into());
        report.push(acc.finish());
    }

    // p_{D-1}(theta_h) = 0 and p_D(theta_h) = 0 for 1 <= h <= D-1
    {
        let mut acc = ResidualAccumulator::new("p-vanishing-interior", tol);
        let pd1 = fams.p[d - 1].to_scalar::<S>();
        let pd = fams.p[d].to_scalar::<S>();
        for h in 1..d {
            let th = &spec.theta[h];
            acc.record(pd1.eval(th).abs().to_f64(), || format!("p_(D-1) at h = {h}"));
            acc.record(pd.eval(th).abs().to_f64(), || format!("p_D at h = {h}"));
        }
        report.push(acc.finish());
    }

    // sum_h p_i p_j (k^2 - theta_h^2) m_h = delta_ij |X| k_i b_i b_{i+1}
    {
        let mut acc = ResidualAccumulator::new("p-orthogonality", tol);
        let p_s: Vec<Poly<S>> = fams.p.iter().map(|q| q.to_scalar::<S>()).collect();
        for i in 0..=d - 2 {
            for j in i..=d - 2 {
                let mut sum = S::zero();
                for (h, th) in spec.theta.iter().enumerate() {
                    let weight =
                        (k_s.clone() * k_s.clone() - th.clone() * th.clone()) * spec.m[h].clone();
                    sum = sum + p_s[i].eval(th) * p_s[j].eval(th) * weight;
                }
                let expect = if delta_factor(i, j) {
                    size.clone()
                        * S::from_rat(
                            &(ktab[i].clone() * arr.bb(i as isize) * arr.bb(i as isize + 1)),
                        )
                } else {
                    S::zero()
                };
                acc.record(sum.rel_diff(&expect), || format!("(i, j) = ({i}, {j})"));
            }
        }
        report.push(acc.finish());
    }

    // Psi_0 = 1, Psi_1 = xy, and symmetry of every Psi_i
    {
        let mut acc = ResidualAccumulator::new("psi-base-and-symmetry", 0.0);
        let one = BivarPoly::product(&Poly::<Rat>::one(), &Poly::one());
        let xy = BivarPoly::product(&Poly::<Rat>::x(), &Poly::x());
        acc.record(psi[0].rel_diff(&one), || "Psi_0".into());
        acc.record(psi[1].rel_diff(&xy), || "Psi_1".into());
        for (i, q) in psi.iter().enumerate() {
            acc.record_bool(q.is_symmetric(), || format!("Psi_{i} symmetry"));
        }
        report.push(acc.finish());
    }

    // p_i(x) p_i(y) = Psi_i - b_i b_{i+1} / (c_i c_{i-1}) Psi_{i-2}
    {
        let mut acc = ResidualAccumulator::new("psi-product-reduction", 0.0);
        for i in 2..=d - 2 {
            let lhs = BivarPoly::product(&fams.p[i], &fams.p[i]);
            let coeff = arr.bb(i as isize) * arr.bb(i as isize + 1)
                / (arr.cc(i as isize) * arr.cc(i as isize - 1));
            let rhs = psi[i].sub(&psi[i - 2].scale_by(&coeff));
            acc.record(lhs.rel_diff(&rhs), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // p_{i+1}(x) p_{i-1}(y) - p_{i-1}(x) p_{i+1}(y) = (x^2 - y^2) Psi_{i-1} / (c_i c_{i+1})
    {
        let mut acc = ResidualAccumulator::new("christoffel-darboux", 0.0);
        let x2: Poly<Rat> = Poly::monomial(Rat::one(), 2);
        let x2_minus_y2 =
            BivarPoly::product(&x2, &Poly::one()).sub(&BivarPoly::product(&Poly::one(), &x2));
        for i in 1..=d - 1 {
            let lhs = BivarPoly::product(&fams.p[i + 1], &fams.p[i - 1])
                .sub(&BivarPoly::product(&fams.p[i - 1], &fams.p[i + 1]));
            let coeff = Rat::one() / (arr.cc(i as isize) * arr.cc(i as isize + 1));
            let rhs = x2_minus_y2.mul(&psi[i - 1]).scale_by(&coeff);
            acc.record(lhs.rel_diff(&rhs), || format!("i = {i}"));
        }
        report.push(acc.finish());
    }

    // sum_h Psi_i(theta_h, y) Psi_j(theta_h, y) (k^2-theta_h^2)(y^2-theta_h^2) m_h
    //   = delta_ij |X| p_i(y) p_{i+2}(y) k_i b_i b_{i+1} c_{i+1} c_{i+2},  as polynomials in y
    {
        let mut acc = ResidualAccumulator::new("psi-orthogonality", tol);
        let psi_s: Vec<BivarPoly<S>> = psi.iter().map(|q| q.to_scalar::<S>()).collect();
        for i in 0..=d - 2 {
            for j in i..=d - 2 {
                let mut sum = Poly::<S>::zero();
                for (h, th) in spec.theta.iter().enumerate() {
                    let a = psi_s[i].eval_first(th);
                    let b = psi_s[j].eval_first(th);
                    let thsq = th.clone() * th.clone();
                    let quadratic =
                        Poly::from_coeffs(vec![-thsq.clone(), S::zero(), S::one()]);
                    let weight = (k_s.clone() * k_s.clone() - thsq) * spec.m[h].clone();
                    sum = sum.add(&a.mul(&b).mul(&quadratic).scale(&weight));
                }
                let expect = if delta_factor(i, j) {
                    let coeff = size.clone()
                        * S::from_rat(
                            &(ktab[i].clone()
                                * arr.bb(i as isize)
                                * arr.bb(i as isize + 1)
                                * arr.cc(i as isize + 1)
                                * arr.cc(i as isize + 2)),
                        );
                    fams.p[i]
                        .to_scalar::<S>()
                        .mul(&fams.p[i + 2].to_scalar::<S>())
                        .scale(&coeff)
                } else {
                    Poly::zero()
                };
                acc.record(sum.rel_diff(&expect), || format!("(i, j) = ({i}, {j})"));
            }
        }
        report.push(acc.finish());
    }

    // Per-theta identities for the g family.
    let mut def_vs_rec = ResidualAccumulator::new("g-definition-vs-recurrence", 0.0);
    let mut degree_law = ResidualAccumulator::new("g-degree-leading", 0.0);
    let mut recurrence = ResidualAccumulator::new("g-three-term-recurrence", 0.0);
    let mut quad_shift = ResidualAccumulator::new("g-quadratic-shift", 0.0);
    let mut orth = ResidualAccumulator::new("g-orthogonality", tol);
    for theta in thetas {
        let g = g_family(arr, fams, theta)?;
        let g_rec = g_family_recurrence(arr, fams, theta)?;
        let omega = omega_coeffs(arr, fams, theta)?;
        let pvals = big_p_values(fams, theta)?;
        let tv = &theta.value;

        for i in 0..=d - 2 {
            def_vs_rec.record(g[i].rel_diff(&g_rec[i]), || {
                format!("i = {i}, theta = {tv}")
            });
            let lead_ok = g[i].degree() == Some(i)
                && g[i]
                    .leading()
                    .map(|l| l.close_to(&S::from_rat(&(Rat::one() / arr.c_prefix(i))), 1e-12))
                    .unwrap_or(false);
            degree_law.record_bool(lead_ok, || format!("i = {i}, theta = {tv}"));
        }

        // x g_i = c_{i+1} g_{i+1} + omega_i g_{i-1}, with g_{D-1} = p_{D-1}
        for i in 0..=d - 2 {
            let lhs = g[i].mul_x();
            let next = if i + 1 <= d - 2 {
                g[i + 1].clone()
            } else {
                fams.p[d - 1].to_scalar::<S>()
            };
            let prev = if i == 0 { Poly::zero() } else { g[i - 1].clone() };
            let rhs = next
                .scale(&S::from_rat(&arr.cc(i as isize + 1)))
                .add(&prev.scale(&omega[i]));
            recurrence.record(lhs.rel_diff(&rhs), || format!("i = {i}, theta = {tv}"));
        }

        // (x^2 - theta) g_i / (c_{i+1} c_{i+2}) = p_{i+2} - P_{i+2}(theta)/P_i(theta) p_i
        for i in 0..=d - 2 {
            let quadratic = Poly::from_coeffs(vec![-tv.clone(), S::zero(), S::one()]);
            let inv = S::one()
                / S::from_rat(&(arr.cc(i as isize + 1) * arr.cc(i as isize + 2)));
            let lhs = quadratic.mul(&g[i]).scale(&inv);
            let ratio = pvals[i + 2].clone() / pvals[i].clone();
            let rhs = fams.p[i + 2]
                .to_scalar::<S>()
                .sub(&fams.p[i].to_scalar::<S>().scale(&ratio));
            quad_shift.record(lhs.rel_diff(&rhs), || format!("i = {i}, theta = {tv}"));
        }

        // sum_h g_i g_j (k^2 - theta_h^2)(theta - theta_h^2) m_h
        //   = delta_ij |X| k_i b_i b_{i+1} c_{i+1} c_{i+2} P_{i+2}(theta)/P_i(theta)
        for i in 0..=d - 2 {
            for j in i..=d - 2 {
                let mut sum = S::zero();
                for (h, th) in spec.theta.iter().enumerate() {
                    let thsq = th.clone() * th.clone();
                    let weight = (k_s.clone() * k_s.clone() - thsq.clone())
                        * (tv.clone() - thsq)
                        * spec.m[h].clone();
                    sum = sum + g[i].eval(th) * g[j].eval(th) * weight;
                }
                let expect = if delta_factor(i, j) {
                    size.clone()
                        * S::from_rat(
                            &(ktab[i].clone()
                                * arr.bb(i as isize)
                                * arr.bb(i as isize + 1)
                                * arr.cc(i as isize + 1)
                                * arr.cc(i as isize + 2)),
                        )
                        * pvals[i + 2].clone()
                        / pvals[i].clone()
                } else {
                    S::zero()
                };
                orth.record(sum.rel_diff(&expect), || {
                    format!("(i, j) = ({i}, {j}), theta = {tv}")
                });
            }
        }
    }
    report.push(def_vs_rec.finish());
    report.push(degree_law.finish());
    report.push(recurrence.finish());
    report.push(quad_shift.finish());
    report.push(orth.finish());

    // Even D, theta = 0: g_{D-2} vanishes at every interior eigenvalue except theta_d.
    if d % 2 == 0 {
        report.push(g_top_vanishing(arr, fams, spec)?);
    }

    Ok(report)
}

/// For even `D` at `theta = 0`: `g_{D-2}(theta_h) = 0` for
/// `1 <= h <= D-1`, `h != d`. This is what forces the top vector of the
/// boundary-case module construction to vanish.
pub fn g_top_vanishing<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    spec: &Spectrum<S>,
) -> Result<CheckLine, PolyError> {
    let tol = if S::EXACT { 0.0 } else { 1e-8 };
    let theta = theta_parameter(arr, spec, S::zero())?;
    let g = g_family(arr, fams, &theta)?;
    let mut acc = ResidualAccumulator::new("g-top-vanishing", tol);
    let half = arr.half();
    for h in 1..arr.d {
        if h == half {
            continue;
        }
        acc.record(g[arr.d - 2].eval(&spec.theta[h]).abs().to_f64(), || {
            format!("h = {h}")
        });
    }
    Ok(acc.finish())
}

/// Sign patterns of `p_i` and `P_i` over sampled admissible parameters.
pub fn verify_sign_lemmas<S: Scalar>(
    arr: &IntersectionArray,
    fams: &PolyFamilies,
    spec: &Spectrum<S>,
) -> Report {
    let mut report = Report::new(format!("sign patterns: {}", arr.display_name()));
    let d = arr.d;
    let half = arr.half();
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    let eps = S::from_rat(&rat(1, ENDPOINT_OFFSET_DEN));
    let k = S::from_rat(&arr.bb(0));
    let n = SIGN_SAMPLES;
    let p_s: Vec<Poly<S>> = fams.p.iter().map(|q| q.to_scalar::<S>()).collect();
    let bp_s: Vec<Poly<S>> = fams.big_p.iter().map(|q| q.to_scalar::<S>()).collect();
    let alt = |i: usize, v: S| if (i / 2) % 2 == 0 { v } else { -v };
    let grid = |lo: S, hi: S| -> Vec<S> {
        (0..n)
            .map(|j| {
                let t = S::from_rat(&rat(j as i64, n as i64));
                lo.clone() + (hi.clone() - lo.clone()) * t
            })
            .collect()
    };

    // at theta_1: p_i > 0 up to D-2, then two zeros
    {
        let mut acc = ResidualAccumulator::new("p-positive-at-theta1", tol);
        let th1 = &spec.theta[1];
        for (i, p) in p_s.iter().enumerate().take(d - 1) {
            acc.record_bool(p.eval(th1) > S::zero(), || format!("i = {i}"));
        }
        acc.record(p_s[d - 1].eval(th1).abs().to_f64(), || "p_(D-1)".into());
        acc.record(p_s[d].eval(th1).abs().to_f64(), || "p_D".into());
        report.push(acc.finish());
    }

    // above theta_1: all p_i > 0
    {
        let mut acc = ResidualAccumulator::new("p-positive-above-theta1", 0.0);
        let lo = spec.theta[1].clone() + eps.clone();
        let hi = spec.theta[1].clone() + k.clone();
        for theta in grid(lo, hi) {
            for (i, p) in p_s.iter().enumerate() {
                acc.record_bool(p.eval(&theta) > S::zero(), || {
                    format!("i = {i}, theta = {theta}")
                });
            }
        }
        report.push(acc.finish());
    }

    if d % 2 == 1 {
        // at theta_d: alternating signs up to D-2, then two zeros
        let mut acc = ResidualAccumulator::new("p-alternating-at-thetad", tol);
        let thd = &spec.theta[half];
        for (i, p) in p_s.iter().enumerate().take(d - 1) {
            acc.record_bool(alt(i, p.eval(thd)) > S::zero(), || format!("i = {i}"));
        }
        acc.record(p_s[d - 1].eval(thd).abs().to_f64(), || "p_(D-1)".into());
        acc.record(p_s[d].eval(thd).abs().to_f64(), || "p_D".into());
        report.push(acc.finish());

        // 0 < theta < theta_d: alternating signs for all i
        let mut acc = ResidualAccumulator::new("p-alternating-below-thetad", 0.0);
        let lo = eps.clone();
        let hi = spec.theta[half].clone() - eps.clone();
        for theta in grid(lo, hi) {
            for (i, p) in p_s.iter().enumerate() {
                acc.record_bool(alt(i, p.eval(&theta)) > S::zero(), || {
                    format!("i = {i}, theta = {theta}")
                });
            }
        }
        report.push(acc.finish());
    }

    // psi > theta_1^2: all P_i > 0
    {
        let mut acc = ResidualAccumulator::new("P-positive-above-theta1sq", 0.0);
        let th1sq = spec.theta[1].clone() * spec.theta[1].clone();
        let lo = th1sq.clone() + eps.clone();
        let hi = th1sq + k.clone() * k.clone();
        for psi in grid(lo, hi) {
            for (i, p) in bp_s.iter().enumerate() {
                acc.record_bool(p.eval(&psi) > S::zero(), || {
                    format!("i = {i}, psi = {psi}")
                });
            }
        }
        report.push(acc.finish());
    }

    if d % 2 == 1 {
        // psi < theta_d^2: alternating signs
        let mut acc = ResidualAccumulator::new("P-alternating-below-thetadsq", 0.0);
        let thdsq = spec.theta[half].clone() * spec.theta[half].clone();
        let lo = thdsq.clone() - k.clone() * k.clone();
        let hi = thdsq - eps.clone();
        for psi in grid(lo, hi) {
            for (i, p) in bp_s.iter().enumerate() {
                acc.record_bool(alt(i, p.eval(&psi)) > S::zero(), || {
                    format!("i = {i}, psi = {psi}")
                });
            }
        }
        report.push(acc.finish());
    } else {
        // psi < 0: alternating signs for all i; at psi = 0 the top one vanishes
        let mut acc = ResidualAccumulator::new("P-alternating-nonpositive", tol);
        let lo = -(k.clone() * k.clone());
        let hi = -eps.clone();
        for psi in grid(lo, hi) {
            for (i, p) in bp_s.iter().enumerate() {
                acc.record_bool(alt(i, p.eval(&psi)) > S::zero(), || {
                    format!("i = {i}, psi = {psi}")
                });
            }
        }
        for (i, p) in bp_s.iter().enumerate().take(d) {
            acc.record_bool(alt(i, p.eval(&S::zero())) > S::zero(), || {
                format!("i = {i}, psi = 0")
            });
        }
        acc.record(bp_s[d].eval(&S::zero()).abs().to_f64(), || {
            "P_D(0)".into()
        });
        report.push(acc.finish());
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use crate::spectra::spectrum_exact;

    fn q4() -> IntersectionArray {
        IntersectionArray::hypercube(4)
    }

    fn rp(cs: &[Rat]) -> Poly<Rat> {
        Poly::from_coeffs(cs.to_vec())
    }

    #[test]
    fn q4_f_family_values() {
        let fams = families(&q4());
        assert_eq!(fams.f[0], Poly::one());
        assert_eq!(fams.f[1], Poly::x());
        // f_2 = (x^2 - 4)/2
        assert_eq!(fams.f[2], rp(&[rat_int(-2), Rat::zero(), rat(1, 2)]));
        // f_i(k) = k_i
        let val = valencies(&q4());
        for i in 0..=4 {
            assert_eq!(fams.f[i].eval(&rat_int(4)), val.k[i]);
        }
    }

    #[test]
    fn q4_p_family_values() {
        let fams = families(&q4());
        // p_2 = (x^2 - 2)/2, p_3 = (x^3 - 4x)/6, p_4 = (x^4 - 4x^2)/24
        assert_eq!(fams.p[2], rp(&[rat_int(-1), Rat::zero(), rat(1, 2)]));
        assert_eq!(
            fams.p[3],
            rp(&[Rat::zero(), rat(-2, 3), Rat::zero(), rat(1, 6)])
        );
        assert_eq!(
            fams.p[4],
            rp(&[
                Rat::zero(),
                Rat::zero(),
                rat(-1, 6),
                Rat::zero(),
                rat(1, 24)
            ])
        );
        assert_eq!(fams.p[3].eval(&rat_int(2)), Rat::zero());
        assert_eq!(fams.p[4].eval(&rat_int(2)), Rat::zero());
        assert_eq!(fams.p[1], Poly::x());
    }

    #[test]
    fn q4_big_p_values() {
        let fams = families(&q4());
        // P_2 = (t-2)/2, P_3 = (t-4)/6, P_4 = (t^2-4t)/24
        assert_eq!(fams.big_p[0], Poly::one());
        assert_eq!(fams.big_p[1], Poly::one());
        assert_eq!(fams.big_p[2], rp(&[rat_int(-1), rat(1, 2)]));
        assert_eq!(fams.big_p[3], rp(&[rat(-2, 3), rat(1, 6)]));
        assert_eq!(
            fams.big_p[4],
            rp(&[Rat::zero(), rat(-1, 6), rat(1, 24)])
        );
        assert_eq!(fams.big_p[4].eval(&Rat::zero()), Rat::zero());
        // P_i(5) > 0, and signs at -1 are (+, +, -, -, +)
        let at5: Vec<Rat> = fams.big_p.iter().map(|p| p.eval(&rat_int(5))).collect();
        assert_eq!(at5, vec![rat_int(1), rat_int(1), rat(3, 2), rat(1, 6), rat(5, 24)]);
        let at_neg1: Vec<Rat> = fams.big_p.iter().map(|p| p.eval(&rat_int(-1))).collect();
        assert_eq!(
            at_neg1,
            vec![rat_int(1), rat_int(1), rat(-3, 2), rat(-5, 6), rat(5, 24)]
        );
    }

    #[test]
    fn q4_psi_family() {
        let arr = q4();
        let fams = families(&arr);
        let psi = psi_family(&arr, &fams);
        // Psi_2 = p_2(x) p_2(y) + 1
        let expect = BivarPoly::product(&fams.p[2], &fams.p[2])
            .add(&BivarPoly::product(&Poly::one(), &Poly::one()));
        assert_eq!(psi[2], expect);
    }

    #[test]
    fn q4_g_family_at_zero() {
        let arr = q4();
        let fams = families(&arr);
        let spec = spectrum_exact(&arr).unwrap();
        let theta = theta_parameter(&arr, &spec, Rat::zero()).unwrap();
        assert_eq!(theta.regime, ThetaRegime::NonpositiveEven);
        let g = g_family(&arr, &fams, &theta).unwrap();
        assert_eq!(g[0], Poly::one());
        assert_eq!(g[1], Poly::x());
        // g_2 = p_2 - 1 = (x^2 - 4)/2
        assert_eq!(g[2], rp(&[rat_int(-2), Rat::zero(), rat(1, 2)]));
        assert_eq!(g[2].eval(&rat_int(2)), Rat::zero());
        assert_eq!(g[2].eval(&rat_int(-2)), Rat::zero());

        let omega = omega_coeffs(&arr, &fams, &theta).unwrap();
        assert_eq!(omega, vec![Rat::zero(), rat_int(4), Rat::zero()]);
    }

    #[test]
    fn inadmissible_theta_rejected() {
        let arr = q4();
        let spec = spectrum_exact(&arr).unwrap();
        // D even: (0, theta_1^2] is outside both regimes; theta_1^2 = 4.
        assert!(theta_parameter(&arr, &spec, rat_int(2)).is_err());
        assert!(theta_parameter(&arr, &spec, rat_int(4)).is_err());
        assert!(theta_parameter(&arr, &spec, rat_int(5)).is_ok());
        assert!(theta_parameter(&arr, &spec, rat_int(0)).is_ok());

        let arr5 = IntersectionArray::hypercube(5);
        let spec5 = spectrum_exact(&arr5).unwrap();
        // D odd: theta_d = 1, so (1, 9] is inadmissible.
        assert!(theta_parameter(&arr5, &spec5, rat_int(5)).is_err());
        assert!(theta_parameter(&arr5, &spec5, rat(1, 2)).is_ok());
        assert!(theta_parameter(&arr5, &spec5, rat_int(-7)).is_ok());
        assert!(theta_parameter(&arr5, &spec5, rat_int(10)).is_ok());
    }

    #[test]
    fn identity_suite_q4_exact() {
        let arr = q4();
        let fams = families(&arr);
        let psi = psi_family(&arr, &fams);
        let spec = spectrum_exact(&arr).unwrap();
        let thetas = admissible_theta_samples(&arr, &spec);
        let report = verify_polynomial_identities(&arr, &fams, &psi, &spec, &thetas).unwrap();
        assert!(report.all_pass(), "{report}");
        assert_eq!(report.max_residual(), 0.0);
    }

    #[test]
    fn identity_suite_doubled_odd_exact() {
        let arr = IntersectionArray::doubled_odd(3);
        let fams = families(&arr);
        let psi = psi_family(&arr, &fams);
        let spec = spectrum_exact(&arr).unwrap();
        let thetas = admissible_theta_samples(&arr, &spec);
        let report = verify_polynomial_identities(&arr, &fams, &psi, &spec, &thetas).unwrap();
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn sign_suite_q4_and_q5() {
        for arr in [q4(), IntersectionArray::hypercube(5)] {
            let fams = families(&arr);
            let spec = spectrum_exact(&arr).unwrap();
            let report = verify_sign_lemmas(&arr, &fams, &spec);
            assert!(report.all_pass(), "{report}");
        }
    }
}
