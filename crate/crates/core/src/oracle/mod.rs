//! Ground truth: concrete graphs, their subconstituent algebras as dense
//! matrices, and the decomposition of the standard module.
//!
//! Everything on this side is double-precision linear algebra. The suite
//! graphs have at most a few hundred vertices and integer spectra, so the
//! operators here are accurate to machine rounding and every closed-form
//! claim can be checked against them at `1e-8` relative or better.

mod decompose;
mod operators;
mod verify;

pub use decompose::{
    decompose, local_spectrum, DecompositionSummary, LocalSpectrum, ModuleRecord, TDecomposition,
};
pub use operators::{adjacency_eigenvalue_agreement, operator_set, OperatorSet};
pub use verify::{multiplicity_audit, verify_blueprint};

use crate::arrays::{self, IntersectionArray};
use crate::report::{CheckLine, Report};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("graph is not connected (vertex {0} unreachable from 0)")]
    NotConnected(usize),
    #[error("graph is not simple: {0}")]
    NotSimple(String),
    #[error("graph is not bipartite (odd closed walk through vertex {0})")]
    NotBipartite(usize),
    #[error("not distance-regular: vertices {x} and {y} at distance {h} disagree on a distance count")]
    NotDistanceRegular { x: usize, y: usize, h: usize },
    #[error("distance counts disagree with the intersection array tensor at (h, i, j) = ({h}, {i}, {j})")]
    TensorMismatch { h: usize, i: usize, j: usize },
    #[error("edge list parse error at line {line}: {reason}")]
    EdgeListParse { line: usize, reason: String },
    #[error("operator residual {residual:.3e} exceeds {bound:.1e} in {what}")]
    ProjectorResidual {
        what: String,
        residual: f64,
        bound: f64,
    },
    #[error("local eigenvalue ordering violated: {0}")]
    LocalOrderingViolation(String),
    #[error("decomposition residual: {0}")]
    DecompositionResidual(String),
    #[error("blueprint mismatch in {clause}: residual {residual:.3e}")]
    BlueprintMismatch { clause: String, residual: f64 },
    #[error("audit failure: {0}")]
    AuditFailure(String),
    #[error(transparent)]
    Spectra(#[from] crate::spectra::SpectraError),
}

/// A concrete graph with all pairwise distances precomputed.
#[derive(Clone, Debug)]
pub struct GraphInstance {
    pub name: String,
    pub n: usize,
    pub adj: Vec<Vec<u32>>,
    pub dist: Vec<Vec<u16>>,
    pub diameter: usize,
}

impl GraphInstance {
    /// Builds from adjacency lists; requires the graph to be connected,
    /// loop-free, and symmetric.
    pub fn from_adjacency_lists(
        name: impl Into<String>,
        mut adj: Vec<Vec<u32>>,
    ) -> Result<Self, OracleError> {
        let n = adj.len();
        for (u, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            nbrs.dedup();
            if nbrs.iter().any(|&v| v as usize == u) {
                return Err(OracleError::NotSimple(format!("loop at vertex {u}")));
            }
            if nbrs.iter().any(|&v| v as usize >= n) {
                return Err(OracleError::NotSimple(format!(
                    "edge endpoint out of range at vertex {u}"
                )));
            }
        }
        for u in 0..n {
            for &v in &adj[u] {
                if !adj[v as usize].contains(&(u as u32)) {
                    return Err(OracleError::NotSimple(format!(
                        "edge {u}-{v} has no reverse"
                    )));
                }
            }
        }

        let mut dist = vec![vec![u16::MAX; n]; n];
        let mut diameter = 0usize;
        for start in 0..n {
            let row = &mut dist[start];
            row[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    let v = v as usize;
                    if row[v] == u16::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for (v, &dv) in row.iter().enumerate() {
                if dv == u16::MAX {
                    return Err(OracleError::NotConnected(v));
                }
                diameter = diameter.max(dv as usize);
            }
        }
        Ok(GraphInstance {
            name: name.into(),
            n,
            adj,
            dist,
            diameter,
        })
    }

    /// Two-colorability check.
    pub fn bipartition(&self) -> Result<Vec<u8>, OracleError> {
        let mut color = vec![u8::MAX; self.n];
        color[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                let v = v as usize;
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    return Err(OracleError::NotBipartite(v));
                }
            }
        }
        Ok(color)
    }

    pub fn adjacency_matrix(&self) -> nalgebra::DMatrix<f64> {
        self.distance_matrix(1)
    }

    /// 0/1 matrix of pairs at distance exactly `i`.
    pub fn distance_matrix(&self, i: usize) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |r, c| {
            if self.dist[r][c] as usize == i {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Vertices at distance `i` from `x`, ascending.
    pub fn shell(&self, x: usize, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&y| self.dist[x][y] as usize == i)
            .collect()
    }
}

/// Hypercube on `2^d` vertices: bit strings adjacent when they differ in one
/// position.
pub fn build_hypercube(d: usize) -> GraphInstance {
    let n = 1usize << d;
    let adj = (0..n)
        .map(|u| (0..d).map(|b| (u ^ (1 << b)) as u32).collect())
        .collect();
    GraphInstance::from_adjacency_lists(format!("hypercube:{d}"), adj)
        .expect("hypercube construction is connected and simple")
}

/// Doubled Odd graph `2.O_k`: the `(k-1)`-subsets and `k`-subsets of a
/// `(2k-1)`-set, joined by inclusion. `k = 3` gives the 20-vertex double of
/// the Petersen graph.
pub fn build_doubled_odd(k: usize) -> GraphInstance {
    let ground = 2 * k - 1;
    let mut small: Vec<u32> = Vec::new();
    let mut large: Vec<u32> = Vec::new();
    for set in 0u32..(1 << ground) {
        match set.count_ones() as usize {
            c if c == k - 1 => small.push(set),
            c if c == k => large.push(set),
            _ => {}
        }
    }
    let n_small = small.len();
    let index_of_large: std::collections::BTreeMap<u32, usize> = large
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, n_small + i))
        .collect();

    let mut adj = vec![Vec::new(); n_small + large.len()];
    for (i, &s) in small.iter().enumerate() {
        for bit in 0..ground {
            let sup = s | (1 << bit);
            if sup != s {
                let j = index_of_large[&sup];
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
    }
    GraphInstance::from_adjacency_lists(format!("doubled_odd:{k}"), adj)
        .expect("doubled Odd construction is connected and simple")
}

/// Parses the edge-list format: one `u v` pair per line, 0-indexed,
/// whitespace-separated, `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<GraphInstance, OracleError> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut max_vertex = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize, OracleError> {
            tok.ok_or_else(|| OracleError::EdgeListParse {
                line: lineno + 1,
                reason: "expected two vertex indices".into(),
            })?
            .parse()
            .map_err(|e| OracleError::EdgeListParse {
                line: lineno + 1,
                reason: format!("{e}"),
            })
        };
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        if it.next().is_some() {
            return Err(OracleError::EdgeListParse {
                line: lineno + 1,
                reason: "more than two tokens".into(),
            });
        }
        max_vertex = max_vertex.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(OracleError::EdgeListParse {
            line: 0,
            reason: "no edges".into(),
        });
    }
    let mut adj = vec![Vec::new(); max_vertex + 1];
    for (u, v) in edges {
        adj[u].push(v as u32);
        adj[v].push(u as u32);
    }
    GraphInstance::from_adjacency_lists("edgelist", adj)
}

/// Checks distance-regularity by exhaustive triple counting and returns the
/// intersection array.
///
/// For every ordered pair `(x, y)` the joint distribution of
/// `(dist(x, z), dist(z, y))` over all `z` must depend only on `dist(x, y)`;
/// the first disagreeing pair is the returned witness. The resulting counts
/// are also compared entry-for-entry against the exact tensor derived from
/// the array.
pub fn verify_drg(g: &GraphInstance) -> Result<IntersectionArray, OracleError> {
    let n = g.n;
    let d = g.diameter;
    let classes = d + 1;
    let mut reference: Vec<Option<(usize, Vec<u64>)>> = vec![None; classes];

    let mut counts = vec![0u64; classes * classes];
    for x in 0..n {
        for y in 0..n {
            let h = g.dist[x][y] as usize;
            counts.iter_mut().for_each(|c| *c = 0);
            for z in 0..n {
                let i = g.dist[x][z] as usize;
                let j = g.dist[z][y] as usize;
                counts[i * classes + j] += 1;
            }
            match &reference[h] {
                None => reference[h] = Some((x, counts.clone())),
                Some((_, expected)) => {
                    if *expected != counts {
                        return Err(OracleError::NotDistanceRegular { x, y, h });
                    }
                }
            }
        }
    }

    let p = |h: usize, i: usize, j: usize| -> u64 {
        reference[h]
            .as_ref()
            .map(|(_, c)| c[i * classes + j])
            .unwrap_or(0)
    };
    let b: Vec<u64> = (0..d).map(|i| p(i, 1, i + 1)).collect();
    let c: Vec<u64> = (1..=d).map(|i| p(i, 1, i - 1)).collect();
    let arr = IntersectionArray::new(b, c, Some(g.name.clone()));

    // Counted intersection numbers must equal the tensor computed from the
    // array alone, exactly.
    if arrays::validate(&arr).all_pass() {
        let tensor = arrays::intersection_tensor(&arr);
        for h in 0..classes {
            for i in 0..classes {
                for j in 0..classes {
                    let counted = crate::scalar::rat_int(p(h, i, j) as i64);
                    if tensor.get(h, i, j) != &counted {
                        return Err(OracleError::TensorMismatch { h, i, j });
                    }
                }
            }
        }
    }

    Ok(arr)
}

/// Structural summary lines for a graph build: connectivity, bipartiteness,
/// distance-regularity, tensor agreement.
pub fn graph_structure_report(g: &GraphInstance) -> (Report, Result<IntersectionArray, OracleError>) {
    let mut report = Report::new(format!("graph structure: {}", g.name));
    report.push(CheckLine::pass("connected and simple", 0.0));
    match g.bipartition() {
        Ok(_) => report.push(CheckLine::pass("bipartite", 0.0)),
        Err(e) => report.push(CheckLine::fail("bipartite", 1.0, e.to_string())),
    }
    let arr = verify_drg(g);
    match &arr {
        Ok(a) => {
            report.push(CheckLine::pass("distance-regular", 0.0));
            report.push(CheckLine::pass(
                "triple counts match array tensor",
                0.0,
            ));
            let validation = arrays::validate(a);
            if validation.all_pass() {
                report.push(CheckLine::pass("array passes validation", 0.0));
            } else {
                let first = validation.first_failure().unwrap();
                report.push(CheckLine::fail(
                    "array passes validation",
                    1.0,
                    format!("{}: {}", first.name, first.detail),
                ));
            }
        }
        Err(e) => report.push(CheckLine::fail("distance-regular", 1.0, e.to_string())),
    }
    (report, arr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_4_structure() {
        let g = build_hypercube(4);
        assert_eq!(g.n, 16);
        assert_eq!(g.adj.iter().map(Vec::len).sum::<usize>(), 2 * 32);
        assert_eq!(g.diameter, 4);
        assert!(g.bipartition().is_ok());
        let arr = verify_drg(&g).unwrap();
        assert_eq!(arr.b, vec![4, 3, 2, 1]);
        assert_eq!(arr.c, vec![1, 2, 3, 4]);
    }

    #[test]
    fn doubled_odd_3_structure() {
        let g = build_doubled_odd(3);
        assert_eq!(g.n, 20);
        assert!(g.adj.iter().all(|nb| nb.len() == 3));
        assert_eq!(g.diameter, 5);
        let arr = verify_drg(&g).unwrap();
        assert_eq!(arr.b, vec![3, 2, 2, 1, 1]);
        assert_eq!(arr.c, vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn path_graph_is_not_drg() {
        let adj = vec![vec![1], vec![0, 2], vec![1, 3], vec![2, 4], vec![3]];
        let g = GraphInstance::from_adjacency_lists("path:5", adj).unwrap();
        assert!(matches!(
            verify_drg(&g),
            Err(OracleError::NotDistanceRegular { .. })
        ));
    }

    #[test]
    fn petersen_is_drg_but_not_bipartite() {
        // Kneser graph on 2-subsets of a 5-set, disjointness adjacency.
        let sets: Vec<u32> = (0u32..32).filter(|s| s.count_ones() == 2).collect();
        let adj: Vec<Vec<u32>> = sets
            .iter()
            .map(|&s| {
                sets.iter()
                    .enumerate()
                    .filter(|(_, &t)| s & t == 0)
                    .map(|(j, _)| j as u32)
                    .collect()
            })
            .collect();
        let g = GraphInstance::from_adjacency_lists("petersen", adj).unwrap();
        assert!(verify_drg(&g).is_ok());
        assert!(matches!(g.bipartition(), Err(OracleError::NotBipartite(_))));
        let arr = verify_drg(&g).unwrap();
        assert!(!arrays::validate(&arr).all_pass());
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# a 4-cycle\n0 1\n1 2\n2 3 # last edge\n3 0\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g.n, 4);
        assert_eq!(g.diameter, 2);
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("0 x\n").is_err());
        assert!(parse_edge_list("# nothing\n").is_err());
    }

    #[test]
    fn loops_and_disconnection_rejected() {
        assert!(matches!(
            GraphInstance::from_adjacency_lists("loop", vec![vec![0]]),
            Err(OracleError::NotSimple(_))
        ));
        assert!(matches!(
            GraphInstance::from_adjacency_lists("split", vec![vec![1], vec![0], vec![3], vec![2]]),
            Err(OracleError::NotConnected(_))
        ));
    }
}
