//! Exact real-root isolation for rational polynomials.
//!
//! Sturm sequences over primitive integer polynomials isolate all real roots
//! into disjoint intervals; each interval is then refined by bisection, and a
//! simplest-rational probe inside the interval recovers rational roots
//! exactly. Irrational roots come back as certified enclosing intervals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;
use crate::scalar::Rat;

/// A real root: exact rational, or an interval `lo < root < hi` of certified
/// width.
#[derive(Clone, Debug, PartialEq)]
pub enum RootEstimate {
    Exact(Rat),
    Interval { lo: Rat, hi: Rat },
}

impl RootEstimate {
    pub fn to_rat(&self) -> Option<Rat> {
        match self {
            RootEstimate::Exact(r) => Some(r.clone()),
            RootEstimate::Interval { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RootEstimate::Exact(r) => num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN),
            RootEstimate::Interval { lo, hi } => {
                let mid = (lo + hi) / Rat::from_integer(BigInt::from(2));
                num_traits::ToPrimitive::to_f64(&mid).unwrap_or(f64::NAN)
            }
        }
    }

    /// Midpoint as an exact rational (equals the root itself when exact).
    pub fn midpoint(&self) -> Rat {
        match self {
            RootEstimate::Exact(r) => r.clone(),
            RootEstimate::Interval { lo, hi } => (lo + hi) / Rat::from_integer(BigInt::from(2)),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RootError {
    #[error("polynomial has a repeated root; roots cannot be separated")]
    NotSquarefree,
    #[error("root count mismatch: expected {expected}, isolated {found}")]
    CountMismatch { expected: usize, found: usize },
}

/// Primitive integer polynomial, ascending coefficients, trimmed.
#[derive(Clone, Debug)]
struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    fn from_rat_poly(p: &Poly<Rat>) -> Self {
        let mut lcm = BigInt::one();
        for c in p.coeffs() {
            lcm = lcm.lcm(c.denom());
        }
        let coeffs: Vec<BigInt> = p
            .coeffs()
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        IntPoly { coeffs }.primitive()
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
        self
    }

    fn primitive(self) -> Self {
        let trimmed = self.trimmed();
        if trimmed.is_zero() {
            return trimmed;
        }
        let mut g = BigInt::zero();
        for c in &trimmed.coeffs {
            g = g.gcd(c);
        }
        IntPoly {
            coeffs: trimmed.coeffs.iter().map(|c| c / &g).collect(),
        }
    }

    fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        IntPoly { coeffs }.trimmed()
    }

    /// Sign of the value at `x = p/q`, computed exactly as
    /// `sign(sum_i a_i p^i q^(n-i))`.
    fn sign_at(&self, x: &Rat) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let p = x.numer();
        let q = x.denom();
        let n = self.degree();
        let mut qpows = vec![BigInt::one(); n + 1];
        for i in (0..n).rev() {
            qpows[i] = &qpows[i + 1] * q;
        }
        let mut acc = BigInt::zero();
        let mut ppow = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc += c * &ppow * &qpows[i];
            ppow *= p;
        }
        match acc.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    /// Remainder of `self / g` up to a positive constant factor, negated.
    ///
    /// Uses pseudo-division and corrects for the sign of the implied scaling,
    /// so the result is a positive multiple of `-rem(self, g)`.
    fn neg_rem_signed(&self, g: &Self) -> Self {
        assert!(!g.is_zero());
        if self.degree() < g.degree() && self.coeffs.len() < g.coeffs.len() {
            return IntPoly {
                coeffs: self.coeffs.iter().map(|c| -c).collect(),
            };
        }
        let lc = g.coeffs.last().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut scale_steps = 0usize;
        while rem.len() >= g.coeffs.len() {
            let last = rem.last().unwrap().clone();
            if last.is_zero() {
                rem.pop();
                continue;
            }
            // rem <- lc * rem - last * x^(deg rem - deg g) * g
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            scale_steps += 1;
            let shift = rem.len() - g.coeffs.len();
            for (i, gc) in g.coeffs.iter().enumerate() {
                rem[shift + i] -= &last * gc;
            }
            while rem.last().map(|c| c.is_zero()).unwrap_or(false) {
                rem.pop();
            }
        }
        // rem = lc^scale_steps * rem(self, g); negate unless that factor
        // already flipped the sign.
        let factor_negative = lc.is_negative() && scale_steps % 2 == 1;
        let coeffs = if factor_negative {
            rem
        } else {
            rem.iter().map(|c| -c).collect()
        };
        IntPoly { coeffs }.primitive()
    }
}

fn sturm_chain(p: &IntPoly) -> Vec<IntPoly> {
    let mut chain = vec![p.clone().primitive(), p.derivative().primitive()];
    while !chain.last().unwrap().is_zero() {
        let n = chain.len();
        let next = chain[n - 2].neg_rem_signed(&chain[n - 1]);
        if next.is_zero() {
            break;
        }
        chain.push(next);
    }
    chain
}

fn sign_variations(chain: &[IntPoly], x: &Rat) -> usize {
    let mut count = 0;
    let mut prev: i8 = 0;
    for p in chain {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if prev != 0 && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Simplest rational (smallest denominator) in the closed interval `[lo, hi]`.
fn simplest_in(lo: &Rat, hi: &Rat) -> Rat {
    assert!(lo <= hi);
    if lo.is_negative() && !hi.is_negative() {
        return Rat::zero();
    }
    if hi.is_negative() {
        return -simplest_in(&-hi.clone(), &-lo.clone());
    }
    // 0 <= lo <= hi
    let lo_ceil = lo.ceil();
    if &lo_ceil <= hi {
        return lo_ceil;
    }
    let fl = lo.floor();
    let inv = simplest_in(
        &(Rat::one() / (hi - &fl)),
        &(Rat::one() / (lo - &fl)),
    );
    fl + Rat::one() / inv
}

/// Isolates all real roots of `poly` within `(lo_bound, hi_bound]`.
///
/// Every root must be simple. Rational roots are returned exactly; the rest
/// as intervals no wider than `width`. Roots come back in ascending order.
pub fn isolate_real_roots(
    poly: &Poly<Rat>,
    lo_bound: &Rat,
    hi_bound: &Rat,
    width: &Rat,
) -> Result<Vec<RootEstimate>, RootError> {
    let p = IntPoly::from_rat_poly(poly);
    let chain = sturm_chain(&p);
    if chain.last().map(IntPoly::degree).unwrap_or(0) > 0 {
        return Err(RootError::NotSquarefree);
    }

    let total = {
        let v_lo = sign_variations(&chain, lo_bound);
        let v_hi = sign_variations(&chain, hi_bound);
        v_lo - v_hi
    };

    // Split (lo, hi] until each piece holds exactly one root.
    let two = Rat::from_integer(BigInt::from(2));
    let mut stack = vec![(lo_bound.clone(), hi_bound.clone(), total)];
    let mut isolated: Vec<(Rat, Rat)> = Vec::new();
    while let Some((lo, hi, count)) = stack.pop() {
        match count {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) / &two;
                let v_lo = sign_variations(&chain, &lo);
                let v_mid = sign_variations(&chain, &mid);
                let left = v_lo - v_mid;
                stack.push((lo, mid.clone(), left));
                stack.push((mid, hi, count - left));
            }
        }
    }
    if isolated.len() != total {
        return Err(RootError::CountMismatch {
            expected: total,
            found: isolated.len(),
        });
    }
    isolated.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = Vec::with_capacity(isolated.len());
    for (mut lo, mut hi) in isolated {
        // The interval is (lo, hi]: the root may sit exactly at hi.
        if p.sign_at(&hi) == 0 {
            out.push(RootEstimate::Exact(hi));
            continue;
        }
        // Now the unique root is interior and signs at lo/hi differ.
        let mut s_lo = p.sign_at(&lo);
        if s_lo == 0 {
            // lo itself is a root of p but lies outside (lo, hi]; nudge right.
            let quarter = (&hi - &lo) / Rat::from_integer(BigInt::from(4));
            let nudged = &lo + &quarter;
            if p.sign_at(&nudged) == 0 {
                out.push(RootEstimate::Exact(nudged));
                continue;
            }
            lo = nudged;
            s_lo = p.sign_at(&lo);
        }
        let estimate = loop {
            let probe = simplest_in(&lo, &hi);
            if p.sign_at(&probe) == 0 {
                break RootEstimate::Exact(probe);
            }
            if (&hi - &lo) <= *width {
                break RootEstimate::Interval { lo, hi };
            }
            let mid = (&lo + &hi) / &two;
            let s_mid = p.sign_at(&mid);
            if s_mid == 0 {
                break RootEstimate::Exact(mid);
            }
            if s_mid == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        };
        out.push(estimate);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn poly(cs: &[i64]) -> Poly<Rat> {
        Poly::from_coeffs(cs.iter().map(|&c| rat_int(c)).collect())
    }

    #[test]
    fn integer_roots_found_exactly() {
        // (x-2)(x+2)(x)(x-4)(x+4) = x^5 - 20x^3 + 64x
        let p = poly(&[0, 64, 0, -20, 0, 1]);
        let roots = isolate_real_roots(&p, &rat_int(-5), &rat_int(5), &rat(1, 1_000_000_000_000))
            .unwrap();
        let expect: Vec<_> = [-4, -2, 0, 2, 4]
            .iter()
            .map(|&r| RootEstimate::Exact(rat_int(r)))
            .collect();
        assert_eq!(roots, expect);
    }

    #[test]
    fn rational_roots_found_exactly() {
        // (2x-1)(3x+2) = 6x^2 + x - 2
        let p = poly(&[-2, 1, 6]);
        let roots =
            isolate_real_roots(&p, &rat_int(-3), &rat_int(3), &rat(1, 1_000_000_000_000)).unwrap();
        assert_eq!(
            roots,
            vec![
                RootEstimate::Exact(rat(-2, 3)),
                RootEstimate::Exact(rat(1, 2))
            ]
        );
    }

    #[test]
    fn irrational_roots_get_tight_intervals() {
        // x^2 - 2
        let p = poly(&[-2, 0, 1]);
        let roots =
            isolate_real_roots(&p, &rat_int(-2), &rat_int(2), &rat(1, 1_000_000_000_000)).unwrap();
        assert_eq!(roots.len(), 2);
        for (root, expect) in roots.iter().zip([-std::f64::consts::SQRT_2, std::f64::consts::SQRT_2]) {
            match root {
                RootEstimate::Exact(_) => panic!("sqrt(2) reported rational"),
                RootEstimate::Interval { lo, hi } => {
                    assert!((hi - lo) <= rat(1, 1_000_000_000_000));
                    assert!((root.to_f64() - expect).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn repeated_roots_rejected() {
        // (x-1)^2
        let p = poly(&[1, -2, 1]);
        assert!(matches!(
            isolate_real_roots(&p, &rat_int(-2), &rat_int(2), &rat(1, 1000)),
            Err(RootError::NotSquarefree)
        ));
    }

    #[test]
    fn simplest_rational_probe() {
        assert_eq!(simplest_in(&rat(1, 3), &rat(2, 3)), rat(1, 2));
        assert_eq!(simplest_in(&rat(-1, 2), &rat(1, 5)), rat_int(0));
        assert_eq!(simplest_in(&rat(7, 2), &rat(15, 4)), rat(7, 2));
        assert_eq!(simplest_in(&rat(-15, 4), &rat(-7, 2)), rat(-7, 2));
        assert_eq!(simplest_in(&rat(499, 1000), &rat(501, 1000)), rat(1, 2));
    }
}
