//! Dense univariate and bivariate polynomials over a [`Scalar`].
//!
//! Degrees here never exceed the diameter of a graph (a few dozen), so dense
//! coefficient vectors with by-value arithmetic are the right trade.

use std::fmt;

use crate::scalar::{Rat, Scalar};

/// Dense polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly {
            coeffs: vec![S::one()],
        }
    }

    pub fn constant(c: S) -> Self {
        Poly { coeffs: vec![c] }.trimmed()
    }

    /// The monomial `c * x^n`.
    pub fn monomial(c: S, n: usize) -> Self {
        let mut coeffs = vec![S::zero(); n + 1];
        coeffs[n] = c;
        Poly { coeffs }.trimmed()
    }

    /// `x`
    pub fn x() -> Self {
        Self::monomial(S::one(), 1)
    }

    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        Poly { coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Poly { coeffs }.trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Poly { coeffs }.trimmed()
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly { coeffs }.trimmed()
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
        .trimmed()
    }

    pub fn div_scalar(&self, c: &S) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|a| a.clone() / c.clone()).collect(),
        }
        .trimmed()
    }

    /// Multiplication by `x`.
    pub fn mul_x(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(S::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * S::from_int(i as i64))
            .collect();
        Poly { coeffs }.trimmed()
    }

    /// Substitutes `x^2` for the variable: `q(x) = self(x^2)`.
    pub fn compose_x_squared(&self) -> Self {
        let mut coeffs = vec![S::zero(); 2 * self.coeffs.len().max(1) - 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[2 * i] = c.clone();
        }
        Poly { coeffs }.trimmed()
    }

    /// Inverse of [`Self::compose_x_squared`] with an optional leading `x` factor.
    ///
    /// Requires every coefficient of the opposite parity to vanish; returns the
    /// offending parity index otherwise. `parity` is 0 for even input, 1 for odd:
    /// `self(x) = x^parity * result(x^2)`.
    pub fn parity_compress(&self, parity: usize) -> Result<Self, usize> {
        let mut coeffs = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % 2 == parity % 2 {
                coeffs.push(c.clone());
            } else if !c.is_zero() {
                return Err(i);
            }
        }
        Ok(Poly { coeffs }.trimmed())
    }

    /// Maximum |coefficient| of `self - other`, relative to the larger side.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let diff = self.sub(other);
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .map(|c| c.abs().to_f64())
            .fold(1.0_f64, f64::max);
        diff.coeffs
            .iter()
            .map(|c| c.abs().to_f64())
            .fold(0.0_f64, f64::max)
            / scale
    }
}

impl Poly<Rat> {
    pub fn to_scalar<S: Scalar>(&self) -> Poly<S> {
        Poly {
            coeffs: self.coeffs.iter().map(S::from_rat).collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Dense bivariate polynomial; `coeffs[i][j]` multiplies `x^i y^j`.
#[derive(Clone, PartialEq, Eq)]
pub struct BivarPoly<S> {
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> BivarPoly<S> {
    pub fn zero() -> Self {
        BivarPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trimmed(mut self) -> Self {
        for row in &mut self.coeffs {
            while row.last().map(|c| c.is_zero()).unwrap_or(false) {
                row.pop();
            }
        }
        while self.coeffs.last().map(|r| r.is_empty()).unwrap_or(false) {
            self.coeffs.pop();
        }
        self
    }

    /// Outer product `p(x) * q(y)`.
    pub fn product(p: &Poly<S>, q: &Poly<S>) -> Self {
        let coeffs = p
            .coeffs()
            .iter()
            .map(|a| q.coeffs().iter().map(|b| a.clone() * b.clone()).collect())
            .collect();
        BivarPoly { coeffs }.trimmed()
    }

    pub fn coeff(&self, i: usize, j: usize) -> S {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let ni = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(ni);
        for i in 0..ni {
            let nj = self
                .coeffs
                .get(i)
                .map_or(0, Vec::len)
                .max(other.coeffs.get(i).map_or(0, Vec::len));
            coeffs.push((0..nj).map(|j| self.coeff(i, j) + other.coeff(i, j)).collect());
        }
        BivarPoly { coeffs }.trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_by(&-S::one()))
    }

    pub fn scale_by(&self, c: &S) -> Self {
        BivarPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().map(|a| a.clone() * c.clone()).collect())
                .collect(),
        }
        .trimmed()
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let ni = self.coeffs.len() + other.coeffs.len() - 1;
        let nj = self.coeffs.iter().map(Vec::len).max().unwrap_or(1)
            + other.coeffs.iter().map(Vec::len).max().unwrap_or(1);
        let mut coeffs = vec![vec![S::zero(); nj]; ni];
        for (i1, r1) in self.coeffs.iter().enumerate() {
            for (j1, a) in r1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (i2, r2) in other.coeffs.iter().enumerate() {
                    for (j2, b) in r2.iter().enumerate() {
                        coeffs[i1 + i2][j1 + j2] =
                            coeffs[i1 + i2][j1 + j2].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        BivarPoly { coeffs }.trimmed()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.coeffs.len().max(self.coeffs.iter().map(Vec::len).max().unwrap_or(0));
        for i in 0..n {
            for j in 0..i {
                if self.coeff(i, j) != self.coeff(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Partial evaluation in the first variable: `self(x0, y)` as a polynomial in `y`.
    pub fn eval_first(&self, x0: &S) -> Poly<S> {
        let mut acc = Poly::zero();
        for row in self.coeffs.iter().rev() {
            let row_poly = Poly::from_coeffs(row.clone());
            acc = acc.scale(x0).add(&row_poly);
        }
        acc
    }

    pub fn eval(&self, x0: &S, y0: &S) -> S {
        self.eval_first(x0).eval(y0)
    }

    pub fn rel_diff(&self, other: &Self) -> f64 {
        let diff = self.sub(other);
        let scale = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .flatten()
            .map(|c| c.abs().to_f64())
            .fold(1.0_f64, f64::max);
        diff.coeffs
            .iter()
            .flatten()
            .map(|c| c.abs().to_f64())
            .fold(0.0_f64, f64::max)
            / scale
    }
}

impl BivarPoly<Rat> {
    pub fn to_scalar<S: Scalar>(&self) -> BivarPoly<S> {
        BivarPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|r| r.iter().map(S::from_rat).collect())
                .collect(),
        }
    }
}

impl<S: Scalar> fmt::Debug for BivarPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BivarPoly[")?;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    write!(f, " ({c})x^{i}y^{j}")?;
                }
            }
        }
        write!(f, " ]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn p(cs: &[i64]) -> Poly<Rat> {
        Poly::from_coeffs(cs.iter().map(|&c| rat_int(c)).collect())
    }

    #[test]
    fn arithmetic_basics() {
        let a = p(&[1, 2]); // 1 + 2x
        let b = p(&[0, 0, 3]); // 3x^2
        assert_eq!(a.mul(&b), p(&[0, 0, 3, 6]));
        assert_eq!(a.add(&b).degree(), Some(2));
        assert_eq!(a.sub(&a), Poly::zero());
        assert_eq!(b.eval(&rat_int(2)), rat_int(12));
        assert_eq!(a.derivative(), p(&[2]));
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let a = p(&[1, 1]).sub(&p(&[0, 1]));
        assert_eq!(a.degree(), Some(0));
        let z = p(&[2]).sub(&p(&[2]));
        assert!(z.is_zero());
        assert_eq!(z.degree(), None);
    }

    #[test]
    fn parity_compress_round_trip() {
        let even = p(&[1, 0, -4, 0, 2]); // 1 - 4x^2 + 2x^4
        let compressed = even.parity_compress(0).unwrap();
        assert_eq!(compressed, p(&[1, -4, 2]));
        assert_eq!(compressed.compose_x_squared(), even);

        let odd = p(&[0, 3, 0, 5]);
        let compressed = odd.parity_compress(1).unwrap();
        assert_eq!(compressed, p(&[3, 5]));
        assert_eq!(compressed.compose_x_squared().mul_x(), odd);

        assert_eq!(p(&[1, 1]).parity_compress(0), Err(1));
    }

    #[test]
    fn bivariate_product_and_eval() {
        let a = p(&[0, 1]); // x
        let b = p(&[-2, 0, 1]); // y^2 - 2
        let prod = BivarPoly::product(&a, &b);
        assert_eq!(prod.coeff(1, 2), rat_int(1));
        assert_eq!(prod.coeff(1, 0), rat_int(-2));
        assert_eq!(prod.eval(&rat_int(3), &rat_int(2)), rat_int(6));
        assert!(!prod.is_symmetric());

        let sym = BivarPoly::product(&a, &a);
        assert!(sym.is_symmetric());
        let slice = prod.eval_first(&rat(1, 2));
        assert_eq!(slice, Poly::from_coeffs(vec![rat_int(-1), rat_int(0), rat(1, 2)]));
    }
}
