//! Bipartite distance-regular intersection arrays and the structure
//! constants they determine.
//!
//! Arithmetic in this module is exact rational throughout: valencies and
//! intersection numbers of a realizable array are integers, and exactness
//! makes integrality a testable signal rather than a rounding accident.

use serde::{Deserialize, Serialize};

use crate::mat::Mat;
use crate::report::{CheckLine, Report};
use crate::scalar::{rat_int, Rat};
use num_traits::{One, Signed, Zero};

/// The combinatorial seed: diameter `D`, branching numbers `b_0..b_{D-1}`,
/// and merging numbers `c_1..c_D`.
///
/// Conventions: `c_0 = 0`, `b_D = 0`, `c_1 = 1`, and (bipartite) `a_i = 0`
/// for all `i`, equivalently `c_i + b_i = k` with `k = b_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionArray {
    #[serde(rename = "D")]
    pub d: usize,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl IntersectionArray {
    pub fn new(b: Vec<u64>, c: Vec<u64>, name: impl Into<Option<String>>) -> Self {
        let d = b.len();
        IntersectionArray {
            d,
            b,
            c,
            name: name.into(),
        }
    }

    /// Hypercube array `b_i = D - i`, `c_i = i`.
    pub fn hypercube(d: usize) -> Self {
        IntersectionArray::new(
            (0..d).map(|i| (d - i) as u64).collect(),
            (1..=d).map(|i| i as u64).collect(),
            Some(format!("hypercube:{d}")),
        )
    }

    /// Doubled Odd graph array for `2.O_k`: diameter `2k - 1`,
    /// `b = (k, k-1, k-1, ..., 1, 1)`, `c = (1, 1, 2, 2, ..., k)`.
    pub fn doubled_odd(k: usize) -> Self {
        let d = 2 * k - 1;
        let b: Vec<u64> = (0..d).map(|i| (k - (i + 1) / 2) as u64).collect();
        let c: Vec<u64> = (1..=d).map(|i| ((i + 1) / 2) as u64).collect();
        IntersectionArray {
            d,
            b,
            c,
            name: Some(format!("doubled_odd:{k}")),
        }
    }

    /// Valency `k = b_0`.
    pub fn k(&self) -> u64 {
        self.b[0]
    }

    /// Half diameter `d = floor(D/2)`.
    pub fn half(&self) -> usize {
        self.d / 2
    }

    /// `b_i` with `b_i = 0` outside `0..=D-1`.
    pub fn bb(&self, i: isize) -> Rat {
        if i >= 0 && (i as usize) < self.d {
            rat_int(self.b[i as usize] as i64)
        } else {
            Rat::zero()
        }
    }

    /// `c_i` with `c_0 = 0` and `c_i = 0` outside `1..=D`.
    pub fn cc(&self, i: isize) -> Rat {
        if i >= 1 && (i as usize) <= self.d {
            rat_int(self.c[i as usize - 1] as i64)
        } else {
            Rat::zero()
        }
    }

    /// `c_1 c_2 ... c_i` (empty product = 1).
    pub fn c_prefix(&self, i: usize) -> Rat {
        (1..=i).fold(Rat::one(), |acc, j| acc * self.cc(j as isize))
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            format!("array(b={:?}, c={:?})", self.b, self.c)
        })
    }
}

/// Per-distance vertex counts `k_i` and the total `|X|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValencyVector {
    pub k: Vec<Rat>,
    pub total: Rat,
}

impl ValencyVector {
    pub fn ki(&self, i: isize) -> Rat {
        if i >= 0 && (i as usize) < self.k.len() {
            self.k[i as usize].clone()
        } else {
            Rat::zero()
        }
    }
}

/// All intersection numbers `p[h][i][j]` of the array.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionTensor {
    d: usize,
    p: Vec<Rat>,
}

impl IntersectionTensor {
    pub fn diameter(&self) -> usize {
        self.d
    }

    pub fn get(&self, h: usize, i: usize, j: usize) -> &Rat {
        let n = self.d + 1;
        &self.p[(h * n + i) * n + j]
    }
}

/// Checks the standing assumptions and feasibility filters, reporting every
/// violation with the first failed constraint named.
pub fn validate(arr: &IntersectionArray) -> Report {
    let mut report = Report::new(format!("array validation: {}", arr.display_name()));
    let d = arr.d;

    let lengths_ok = arr.b.len() == d && arr.c.len() == d;
    report.push(if lengths_ok {
        CheckLine::pass("lengths b_0..b_{D-1}, c_1..c_D", 0.0)
    } else {
        CheckLine::fail(
            "lengths b_0..b_{D-1}, c_1..c_D",
            1.0,
            format!("expected {} entries, got b: {}, c: {}", d, arr.b.len(), arr.c.len()),
        )
    });
    if !lengths_ok {
        return report;
    }

    report.push(if d >= 4 {
        CheckLine::pass("D >= 4", 0.0)
    } else {
        CheckLine::fail("D >= 4", 1.0, format!("D = {d}"))
    });

    let k = arr.b[0];
    report.push(if k >= 3 {
        CheckLine::pass("k = b_0 >= 3", 0.0)
    } else {
        CheckLine::fail("k = b_0 >= 3", 1.0, format!("k = {k}"))
    });

    report.push(if arr.c[0] == 1 {
        CheckLine::pass("c_1 = 1", 0.0)
    } else {
        CheckLine::fail("c_1 = 1", 1.0, format!("c_1 = {}", arr.c[0]))
    });

    let positive = arr.b.iter().all(|&x| x > 0) && arr.c.iter().all(|&x| x > 0);
    report.push(if positive {
        CheckLine::pass("b_i > 0 (i < D) and c_i > 0 (i >= 1)", 0.0)
    } else {
        CheckLine::fail("b_i > 0 (i < D) and c_i > 0 (i >= 1)", 1.0, "zero entry")
    });
    if !positive {
        return report;
    }

    // c_i + b_i = k for 0 <= i <= D, with c_0 = 0 and b_D = 0.
    for i in 0..=d {
        let ci = if i == 0 { 0 } else { arr.c[i - 1] };
        let bi = if i == d { 0 } else { arr.b[i] };
        if ci + bi != k {
            report.push(CheckLine::fail(
                format!("c_{i}+b_{i} = k"),
                1.0,
                format!("{ci} + {bi} != {k}"),
            ));
            return report;
        }
    }
    report.push(CheckLine::pass("c_i+b_i = k for 0 <= i <= D", 0.0));

    let c_monotone = arr.c.windows(2).all(|w| w[0] <= w[1]);
    report.push(if c_monotone {
        CheckLine::pass("c_i <= c_{i+1}", 0.0)
    } else {
        CheckLine::fail("c_i <= c_{i+1}", 1.0, "c not nondecreasing")
    });
    let b_monotone = arr.b.windows(2).all(|w| w[0] >= w[1]);
    report.push(if b_monotone {
        CheckLine::pass("b_i >= b_{i+1}", 0.0)
    } else {
        CheckLine::fail("b_i >= b_{i+1}", 1.0, "b not nonincreasing")
    });

    report
}

/// Valencies `k_i = (b_0 ... b_{i-1}) / (c_1 ... c_i)` and `|X|`.
pub fn valencies(arr: &IntersectionArray) -> ValencyVector {
    let mut k = Vec::with_capacity(arr.d + 1);
    let mut cur = Rat::one();
    k.push(cur.clone());
    for i in 0..arr.d {
        cur = cur * arr.bb(i as isize) / arr.cc(i as isize + 1);
        k.push(cur.clone());
    }
    let total = k.iter().fold(Rat::zero(), |acc, x| acc + x);
    ValencyVector { k, total }
}

/// Tridiagonal matrix of multiplication by the adjacency class in the basis
/// of distance classes: superdiagonal `b_0..b_{D-1}`, subdiagonal `c_1..c_D`.
pub fn quotient_matrix(arr: &IntersectionArray) -> Mat<Rat> {
    let n = arr.d + 1;
    let mut m = Mat::zeros(n, n);
    for i in 0..arr.d {
        m[(i, i + 1)] = arr.bb(i as isize);
        m[(i + 1, i)] = arr.cc(i as isize + 1);
    }
    m
}

/// Computes `p[h][i][j]` by expanding products of distance classes.
///
/// Each class is a polynomial in the quotient matrix: with `F_0 = I`,
/// `F_1 = B`, and `F_{i+1} = (B F_i - b_{i-1} F_{i-1}) / c_{i+1}`, the entry
/// `F_i[h][j]` is the coefficient of the `h`-th class in the product of the
/// `i`-th and `j`-th, i.e. `p_{ij}^h`.
pub fn intersection_tensor(arr: &IntersectionArray) -> IntersectionTensor {
    let n = arr.d + 1;
    let b_mat = quotient_matrix(arr);
    let mut fs: Vec<Mat<Rat>> = Vec::with_capacity(n);
    fs.push(Mat::identity(n));
    fs.push(b_mat.clone());
    for i in 1..arr.d {
        let prev = &fs[i - 1];
        let cur = &fs[i];
        let next = b_mat
            .mul(cur)
            .sub(&prev.scale(&arr.bb(i as isize - 1)))
            .scale(&(Rat::one() / arr.cc(i as isize + 1)));
        fs.push(next);
    }

    let mut p = vec![Rat::zero(); n * n * n];
    for h in 0..n {
        for i in 0..n {
            for j in 0..n {
                p[(h * n + i) * n + j] = fs[i][(h, j)].clone();
            }
        }
    }
    IntersectionTensor { d: arr.d, p }
}

/// Structural checks on a computed tensor: triangle/parity vanishing,
/// symmetry, round-trip of `b_i`/`c_i`, and the double-counting identity
/// `sum_h p_{ij}^h k_h = k_i k_j`.
pub fn tensor_checks(
    arr: &IntersectionArray,
    tensor: &IntersectionTensor,
    val: &ValencyVector,
) -> Report {
    let mut report = Report::new(format!("tensor checks: {}", arr.display_name()));
    let n = arr.d + 1;

    let mut triangle = true;
    let mut parity = true;
    let mut symmetric = true;
    let mut nonnegative = true;
    for h in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = tensor.get(h, i, j);
                if i == 1 && (h as isize - j as isize).abs() > 1 && !v.is_zero() {
                    triangle = false;
                }
                if (h + i + j) % 2 == 1 && !v.is_zero() {
                    parity = false;
                }
                if v != tensor.get(h, j, i) {
                    symmetric = false;
                }
                if v.is_negative() {
                    nonnegative = false;
                }
            }
        }
    }
    report.push(CheckLine::from_residual(
        "p_{1j}^h = 0 when |h-j| > 1",
        if triangle { 0.0 } else { 1.0 },
        0.0,
    ));
    report.push(CheckLine::from_residual(
        "p_{ij}^h = 0 when h+i+j odd",
        if parity { 0.0 } else { 1.0 },
        0.0,
    ));
    report.push(CheckLine::from_residual(
        "p_{ij}^h = p_{ji}^h",
        if symmetric { 0.0 } else { 1.0 },
        0.0,
    ));
    report.push(CheckLine::from_residual(
        "p_{ij}^h >= 0",
        if nonnegative { 0.0 } else { 1.0 },
        0.0,
    ));

    let mut round_trip = true;
    for i in 1..=arr.d {
        if tensor.get(i, 1, i - 1) != &arr.cc(i as isize) {
            round_trip = false;
        }
    }
    for i in 0..arr.d {
        if tensor.get(i, 1, i + 1) != &arr.bb(i as isize) {
            round_trip = false;
        }
    }
    report.push(CheckLine::from_residual(
        "p_{1,i-1}^i = c_i and p_{1,i+1}^i = b_i",
        if round_trip { 0.0 } else { 1.0 },
        0.0,
    ));

    let mut counting = true;
    for i in 0..n {
        for j in 0..n {
            let lhs: Rat = (0..n)
                .map(|h| tensor.get(h, i, j) * &val.k[h])
                .fold(Rat::zero(), |acc, x| acc + x);
            if lhs != &val.k[i] * &val.k[j] {
                counting = false;
            }
        }
    }
    report.push(CheckLine::from_residual(
        "sum_h p_{ij}^h k_h = k_i k_j",
        if counting { 0.0 } else { 1.0 },
        0.0,
    ));

    let mut delta = true;
    for h in 0..n {
        for i in 0..n {
            let expect = if h == i { Rat::one() } else { Rat::zero() };
            if tensor.get(h, i, 0) != &expect {
                delta = false;
            }
        }
    }
    report.push(CheckLine::from_residual(
        "p_{i0}^h = delta_{ih}",
        if delta { 0.0 } else { 1.0 },
        0.0,
    ));

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn q4() -> IntersectionArray {
        IntersectionArray::hypercube(4)
    }

    #[test]
    fn q4_validates() {
        let arr = q4();
        assert_eq!(arr.b, vec![4, 3, 2, 1]);
        assert_eq!(arr.c, vec![1, 2, 3, 4]);
        assert!(validate(&arr).all_pass());
    }

    #[test]
    fn broken_bipartite_condition_is_named() {
        // c = (1,2,2,4) first breaks the valency split at i = 3: c_3 + b_3 = 2 + 1 != 4.
        let arr = IntersectionArray::new(vec![4, 3, 2, 1], vec![1, 2, 2, 4], None);
        let report = validate(&arr);
        assert!(!report.all_pass());
        assert_eq!(report.first_failure().unwrap().name, "c_3+b_3 = k");

        let arr = IntersectionArray::new(vec![4, 3, 3, 1], vec![1, 2, 3, 4], None);
        let report = validate(&arr);
        assert_eq!(report.first_failure().unwrap().name, "c_2+b_2 = k");
    }

    #[test]
    fn small_diameter_rejected() {
        let arr = IntersectionArray::new(vec![3, 2, 1], vec![1, 2, 3], None);
        let report = validate(&arr);
        assert!(!report.all_pass());
        assert_eq!(report.first_failure().unwrap().name, "D >= 4");
    }

    #[test]
    fn q4_valencies() {
        let val = valencies(&q4());
        let expect: Vec<_> = [1, 4, 6, 4, 1].iter().map(|&x| rat_int(x)).collect();
        assert_eq!(val.k, expect);
        assert_eq!(val.total, rat_int(16));
    }

    #[test]
    fn doubled_odd_3_valencies() {
        let arr = IntersectionArray::doubled_odd(3);
        assert_eq!(arr.b, vec![3, 2, 2, 1, 1]);
        assert_eq!(arr.c, vec![1, 1, 2, 2, 3]);
        assert!(validate(&arr).all_pass());
        let val = valencies(&arr);
        let expect: Vec<_> = [1, 3, 6, 6, 3, 1].iter().map(|&x| rat_int(x)).collect();
        assert_eq!(val.k, expect);
        assert_eq!(val.total, rat_int(20));
    }

    #[test]
    fn q4_tensor_values() {
        let arr = q4();
        let tensor = intersection_tensor(&arr);
        assert_eq!(tensor.get(2, 2, 2), &rat_int(4));
        assert_eq!(tensor.get(3, 2, 2), &rat_int(0));
        assert_eq!(tensor.get(0, 3, 3), &rat_int(4)); // k_3
        let val = valencies(&arr);
        assert!(tensor_checks(&arr, &tensor, &val).all_pass());
    }

    #[test]
    fn doubled_odd_tensor_checks() {
        let arr = IntersectionArray::doubled_odd(3);
        let tensor = intersection_tensor(&arr);
        let val = valencies(&arr);
        assert!(tensor_checks(&arr, &tensor, &val).all_pass());
        assert_eq!(tensor.get(2, 2, 2), &rat_int(3)); // valency of the distance-2 graph on the second subconstituent
    }

    #[test]
    fn array_json_round_trip() {
        let arr = q4();
        let json = serde_json::to_string(&arr).unwrap();
        assert!(json.contains("\"D\":4"));
        let back: IntersectionArray = serde_json::from_str(&json).unwrap();
        assert_eq!(back, arr);
    }
}
