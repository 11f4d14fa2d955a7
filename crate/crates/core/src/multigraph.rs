//! q-multigraphs: symmetric adjacency over `F_q` with a zero diagonal.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fq::{Field, FieldError, FqMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("adjacency is not symmetric at ({u}, {v})")]
    Asymmetric { u: usize, v: usize },
    #[error("nonzero diagonal entry at vertex {0}")]
    NonzeroDiagonal(usize),
    #[error("entry {w} at ({u}, {v}) is not below the modulus {q}")]
    EntryOutOfRange { u: usize, v: usize, w: u32, q: u32 },
    #[error("expected {expected} adjacency entries, found {found}")]
    WrongEntryCount { expected: usize, found: usize },
    #[error("vertex {vertex} out of range for a graph of order {order}")]
    InvalidVertex { vertex: usize, order: usize },
    #[error("vertex sets overlap at {0}")]
    Overlap(usize),
    #[error("dealer {0} is isolated")]
    IsolatedDealer(usize),
    #[error("multiset has length {found}, graph has order {expected}")]
    MultisetLength { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse { line, message: message.into() }
}

/// A vertex-indexed vector over `F_q`; `mult[v]` is the multiplicity of `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiset {
    q: u32,
    mult: Vec<u32>,
}

impl Multiset {
    pub fn zero(q: u32, n: usize) -> Self {
        Multiset { q, mult: vec![0; n] }
    }

    /// Builds a multiset from arbitrary integers, reducing each mod `q`.
    pub fn from_values(q: u32, values: &[u32]) -> Self {
        Multiset { q, mult: values.iter().map(|v| v % q).collect() }
    }

    /// Multiplicity 1 on every listed vertex.
    pub fn indicator(q: u32, n: usize, vertices: &[usize]) -> Self {
        let mut m = Self::zero(q, n);
        for &v in vertices {
            m.mult[v] = 1 % q;
        }
        m
    }

    pub fn singleton(q: u32, n: usize, v: usize) -> Self {
        Self::indicator(q, n, &[v])
    }

    /// Scatters `values[i]` onto `vertices[i]` in a length-`n` multiset.
    pub fn scatter(q: u32, n: usize, vertices: &[usize], values: &[u32]) -> Self {
        let mut m = Self::zero(q, n);
        for (&v, &x) in vertices.iter().zip(values) {
            m.mult[v] = x % q;
        }
        m
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn get(&self, v: usize) -> u32 {
        self.mult[v]
    }

    pub fn set(&mut self, v: usize, value: u32) {
        self.mult[v] = value % self.q;
    }

    pub fn values(&self) -> &[u32] {
        &self.mult
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mult.len()).filter(|&v| self.mult[v] != 0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.mult.iter().filter(|&&m| m != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.mult.iter().all(|&m| m == 0)
    }

    pub fn scaled(&self, c: u32) -> Self {
        let f = Field::new(self.q).expect("multiset modulus is prime");
        Multiset { q: self.q, mult: self.mult.iter().map(|&m| f.mul(m, c % self.q)).collect() }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: u32, other: &Multiset, b: u32) -> Self {
        let f = Field::new(self.q).expect("multiset modulus is prime");
        let mult = self.mult.iter().zip(&other.mult).map(|(&x, &y)| f.add(f.mul(a, x), f.mul(b, y))).collect();
        Multiset { q: self.q, mult }
    }

    /// Values on the given vertices, in the given order.
    pub fn restrict(&self, vertices: &[usize]) -> Vec<u32> {
        vertices.iter().map(|&v| self.mult[v]).collect()
    }
}

/// Induced sub-multigraph `G[D]`, reindexed onto `sup(D)` in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: Multigraph,
    pub vertices: Vec<usize>,
    /// `Σ_{u<v} Γ'(u,v)` as an unreduced integer.
    pub edge_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Multigraph {
    field: Field,
    n: usize,
    gamma: Vec<u32>,
}

impl Multigraph {
    /// Validates a row-major `n×n` adjacency matrix.
    pub fn new(q: u32, n: usize, entries: Vec<u32>) -> Result<Self, GraphError> {
        let field = Field::new(q)?;
        if entries.len() != n * n {
            return Err(GraphError::WrongEntryCount { expected: n * n, found: entries.len() });
        }
        for u in 0..n {
            for v in 0..n {
                let w = entries[u * n + v];
                if w >= q {
                    return Err(GraphError::EntryOutOfRange { u, v, w, q });
                }
            }
        }
        for u in 0..n {
            if entries[u * n + u] != 0 {
                return Err(GraphError::NonzeroDiagonal(u));
            }
            for v in u + 1..n {
                if entries[u * n + v] != entries[v * n + u] {
                    return Err(GraphError::Asymmetric { u, v });
                }
            }
        }
        Ok(Multigraph { field, n, gamma: entries })
    }

    pub fn from_rows(q: u32, rows: &[Vec<u32>]) -> Result<Self, GraphError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(GraphError::WrongEntryCount { expected: n * n, found: n * r.len() });
            }
            entries.extend_from_slice(r);
        }
        Self::new(q, n, entries)
    }

    pub fn empty(q: u32, n: usize) -> Result<Self, GraphError> {
        Self::new(q, n, vec![0; n * n])
    }

    /// Builds a graph from `(u, v, w)` edges; unlisted pairs are zero.
    pub fn from_edges(q: u32, n: usize, edges: &[(usize, usize, u32)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(q, n)?;
        for &(u, v, w) in edges {
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            if u == v {
                return Err(GraphError::NonzeroDiagonal(u));
            }
            if w >= q {
                return Err(GraphError::EntryOutOfRange { u, v, w, q });
            }
            g.gamma[u * n + v] = w;
            g.gamma[v * n + u] = w;
        }
        Ok(g)
    }

    /// Each unordered pair gets an independent uniform weight in `F_q`.
    pub fn random(n: usize, q: u32, seed: u64) -> Result<Self, GraphError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, q, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, q: u32, rng: &mut R) -> Result<Self, GraphError> {
        let mut g = Self::empty(q, n)?;
        for u in 0..n {
            for v in u + 1..n {
                let w = rng.gen_range(0..q);
                g.gamma[u * n + v] = w;
                g.gamma[v * n + u] = w;
            }
        }
        Ok(g)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn q(&self) -> u32 {
        self.field.modulus()
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> u32 {
        self.gamma[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.gamma[u * self.n..(u + 1) * self.n]
    }

    pub fn adjacency(&self) -> FqMatrix {
        FqMatrix::from_vec(self.field, self.n, self.n, self.gamma.clone()).expect("adjacency is reduced")
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex { vertex: v, order: self.n })
        }
    }

    /// Number of distinct neighbours.
    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().filter(|&&w| w != 0).count()
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.degree(v) == 0
    }

    fn check_multiset(&self, d: &Multiset) -> Result<(), GraphError> {
        if d.len() != self.n {
            return Err(GraphError::MultisetLength { expected: self.n, found: d.len() });
        }
        if d.modulus() != self.q() {
            return Err(FieldError::ModulusMismatch { left: self.q(), right: d.modulus() }.into());
        }
        Ok(())
    }

    /// `Γ.D`: `(Γ.D)(v) = Σ_u Γ(u,v)·D(u)`.
    pub fn neighbors(&self, d: &Multiset) -> Result<Multiset, GraphError> {
        self.check_multiset(d)?;
        let q = u64::from(self.q());
        let mult = (0..self.n)
            .map(|v| {
                let acc = (0..self.n).fold(0u64, |acc, u| (acc + u64::from(self.weight(u, v)) * u64::from(d.get(u))) % q);
                acc as u32
            })
            .collect();
        Ok(Multiset { q: self.q(), mult })
    }

    /// `Σ_{u<v} x_u·Γ(u,v)·x_v` over the integers, each term reduced mod `q`.
    pub fn edge_count_of(&self, x: &[u32]) -> u64 {
        let f = self.field;
        let mut total = 0u64;
        for u in 0..self.n {
            if x[u] == 0 {
                continue;
            }
            for v in u + 1..self.n {
                let w = self.weight(u, v);
                if w != 0 && x[v] != 0 {
                    total += u64::from(f.mul(f.mul(x[u], w), x[v]));
                }
            }
        }
        total
    }

    pub fn induced(&self, d: &Multiset) -> Result<InducedSubgraph, GraphError> {
        self.check_multiset(d)?;
        let vertices = d.support();
        let m = vertices.len();
        let f = self.field;
        let mut entries = vec![0u32; m * m];
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate() {
                entries[i * m + j] = f.mul(f.mul(d.get(u), self.weight(u, v)), d.get(v));
            }
        }
        let graph = Multigraph { field: self.field, n: m, gamma: entries };
        let edge_count = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).map(|(i, j)| u64::from(graph.weight(i, j))).sum();
        Ok(InducedSubgraph { graph, vertices, edge_count })
    }

    /// Removes `d`; vertices above `d` shift down by one.
    pub fn delete_vertex(&self, d: usize) -> Result<Multigraph, GraphError> {
        self.check_vertex(d)?;
        let keep: Vec<usize> = (0..self.n).filter(|&v| v != d).collect();
        Ok(self.subgraph_on(&keep))
    }

    /// Plain induced subgraph on a vertex list, in the listed order.
    pub fn subgraph_on(&self, vertices: &[usize]) -> Multigraph {
        let m = vertices.len();
        let mut gamma = Vec::with_capacity(m * m);
        for &u in vertices {
            for &v in vertices {
                gamma.push(self.weight(u, v));
            }
        }
        Multigraph { field: self.field, n: m, gamma }
    }

    /// `Γ'(v,w) = Γ(v,w) + λ·Γ(v,u)·Γ(u,w)` for `v ≠ w`.
    pub fn local_complement(&self, u: usize, lambda: u32) -> Result<Multigraph, GraphError> {
        self.check_vertex(u)?;
        let f = self.field;
        let lambda = lambda % self.q();
        let mut gamma = self.gamma.clone();
        for v in 0..self.n {
            for w in 0..self.n {
                if v != w {
                    let delta = f.mul(lambda, f.mul(self.weight(v, u), self.weight(u, w)));
                    gamma[v * self.n + w] = f.add(gamma[v * self.n + w], delta);
                }
            }
        }
        Ok(Multigraph { field: self.field, n: self.n, gamma })
    }

    /// `Γ[A,B]`: rows indexed by `A`, columns by `B`.
    pub fn cut_matrix(&self, a: &[usize], b: &[usize]) -> Result<FqMatrix, GraphError> {
        for &v in a.iter().chain(b) {
            self.check_vertex(v)?;
        }
        let in_a: HashSet<usize> = a.iter().copied().collect();
        if let Some(&v) = b.iter().find(|v| in_a.contains(v)) {
            return Err(GraphError::Overlap(v));
        }
        Ok(FqMatrix::from_fn(self.field, a.len(), b.len(), |r, c| self.weight(a[r], b[c])))
    }

    /// Line-based text form: `q`, `n`, then one `e u v w` per nonzero pair.
    pub fn to_text(&self) -> String {
        let mut s = format!("q {}\nn {}\n", self.q(), self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                let w = self.weight(u, v);
                if w != 0 {
                    let _ = writeln!(s, "e {u} {v} {w}");
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Multigraph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut header = |key: &str| -> Result<u64, GraphError> {
            let (no, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{key}` header")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(parse_err(no, format!("expected `{key} <value>` header")));
            }
            let value = parts.next().and_then(|p| p.parse().ok()).ok_or_else(|| parse_err(no, format!("malformed `{key}` header")))?;
            if parts.next().is_some() {
                return Err(parse_err(no, format!("trailing tokens after `{key}` header")));
            }
            Ok(value)
        };
        let q = header("q")?;
        let q = u32::try_from(q).map_err(|_| parse_err(1, "modulus too large"))?;
        let n = header("n")? as usize;
        let mut g = Multigraph::empty(q, n)?;
        let mut seen = HashSet::new();
        for (no, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "e" {
                return Err(parse_err(no, "expected `e <u> <v> <w>`"));
            }
            let nums: Vec<u64> = parts[1..].iter().map(|p| p.parse::<u64>()).collect::<Result<_, _>>().map_err(|_| parse_err(no, "non-numeric edge field"))?;
            let (u, v, w) = (nums[0] as usize, nums[1] as usize, nums[2]);
            if u == v {
                return Err(parse_err(no, format!("self-loop at vertex {u}")));
            }
            if u > v {
                return Err(parse_err(no, "edge endpoints must satisfy u < v"));
            }
            if v >= n {
                return Err(parse_err(no, format!("vertex {v} out of range for order {n}")));
            }
            if w == 0 || w >= u64::from(q) {
                return Err(parse_err(no, format!("weight {w} outside 1..{q}")));
            }
            if !seen.insert((u, v)) {
                return Err(parse_err(no, format!("duplicate edge {u} {v}")));
            }
            g.gamma[u * n + v] = w as u32;
            g.gamma[v * n + u] = w as u32;
        }
        Ok(g)
    }
}

/// A multigraph with a distinguished, non-isolated dealer vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DealerGraph {
    pub graph: Multigraph,
    pub dealer: usize,
}

impl DealerGraph {
    pub fn new(graph: Multigraph, dealer: usize) -> Result<Self, GraphError> {
        graph.check_vertex(dealer)?;
        if graph.is_isolated(dealer) {
            return Err(GraphError::IsolatedDealer(dealer));
        }
        Ok(DealerGraph { graph, dealer })
    }

    pub fn players(&self) -> Vec<usize> {
        (0..self.graph.order()).filter(|&v| v != self.dealer).collect()
    }

    pub fn n_players(&self) -> usize {
        self.graph.order() - 1
    }
}

/// Order-8 Reed–Solomon sharing graph over `F_7` realising a 4-of-7 threshold.
///
/// Vertex 0 is the dealer; vertices 1..=7 are the players `v1..v7`.
pub fn rs747() -> DealerGraph {
    const EDGES: [(usize, usize, u32); 16] = [
        (0, 4, 6),
        (0, 5, 3),
        (0, 6, 4),
        (0, 7, 1),
        (4, 1, 6),
        (4, 2, 3),
        (4, 3, 4),
        (5, 1, 4),
        (5, 2, 1),
        (5, 3, 1),
        (6, 1, 1),
        (6, 2, 1),
        (6, 3, 4),
        (7, 1, 4),
        (7, 2, 3),
        (7, 3, 6),
    ];
    let graph = Multigraph::from_edges(7, 8, &EDGES).expect("fixture is well formed");
    DealerGraph::new(graph, 0).expect("dealer is connected")
}

/// Dealer 0 joined to two players with weight-1 edges, over `F_3`.
pub fn star3() -> DealerGraph {
    let graph = Multigraph::from_edges(3, 3, &[(0, 1, 1), (0, 2, 1)]).expect("fixture is well formed");
    DealerGraph::new(graph, 0).expect("dealer is connected")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE_ROWS: [[u32; 5]; 5] = [[0, 0, 1, 0, 1], [0, 0, 2, 0, 1], [1, 2, 0, 2, 0], [0, 0, 2, 0, 2], [1, 1, 0, 2, 0]];

    fn example(with_v1v2: bool) -> Multigraph {
        let mut rows: Vec<Vec<u32>> = EXAMPLE_ROWS.iter().map(|r| r.to_vec()).collect();
        if with_v1v2 {
            rows[0][1] = 1;
            rows[1][0] = 1;
        }
        Multigraph::from_rows(3, &rows).unwrap()
    }

    #[test]
    fn validation_errors_are_distinct() {
        assert!(Multigraph::from_rows(3, &EXAMPLE_ROWS.map(|r| r.to_vec())).is_ok());
        assert_eq!(Multigraph::new(3, 2, vec![1, 0, 0, 0]), Err(GraphError::NonzeroDiagonal(0)));
        assert_eq!(Multigraph::new(3, 2, vec![0, 1, 2, 0]), Err(GraphError::Asymmetric { u: 0, v: 1 }));
        assert_eq!(Multigraph::new(3, 2, vec![0, 3, 3, 0]), Err(GraphError::EntryOutOfRange { u: 0, v: 1, w: 3, q: 3 }));
        assert_eq!(Multigraph::new(4, 2, vec![0; 4]), Err(GraphError::Field(FieldError::NotPrime(4))));
    }

    #[test]
    fn neighbours_of_example_multiset() {
        let d = Multiset::from_values(3, &[2, 1, 0, 0, 0]);
        // column sums by hand: v3 gets 2·1 + 1·2 = 4 ≡ 1, v5 gets 2·1 + 1·1 = 3 ≡ 0
        assert_eq!(example(false).neighbors(&d).unwrap().values(), &[0, 0, 1, 0, 0]);
        // with the v1–v2 edge the result is {v1, v2, v2, v3}
        assert_eq!(example(true).neighbors(&d).unwrap().values(), &[1, 2, 1, 0, 0]);
        let a = Multiset::indicator(3, 5, &[0, 1]);
        assert_eq!(example(true).neighbors(&a).unwrap().values(), &[1, 1, 0, 0, 2]);
    }

    #[test]
    fn neighbours_basic() {
        let g = example(false);
        assert!(g.neighbors(&Multiset::zero(3, 5)).unwrap().is_zero());
        let s = star3();
        let n = s.graph.neighbors(&Multiset::singleton(3, 3, 1)).unwrap();
        assert_eq!(n.support(), vec![0]);
        assert!(g.neighbors(&Multiset::zero(3, 4)).is_err());
    }

    #[test]
    fn induced_subgraphs() {
        let g = example(true);
        let ones = Multiset::indicator(3, 5, &[0, 1, 2, 3, 4]);
        assert_eq!(g.induced(&ones).unwrap().graph, g);
        let d = Multiset::from_values(3, &[2, 1, 0, 0, 0]);
        let sub = g.induced(&d).unwrap();
        assert_eq!(sub.vertices, vec![0, 1]);
        assert_eq!(sub.graph.weight(0, 1), 2);
        assert_eq!(sub.edge_count, 2);
        // the printed matrix has no v1–v2 edge, so G[D] is edgeless there
        assert_eq!(example(false).induced(&d).unwrap().edge_count, 0);
        let single = g.induced(&Multiset::singleton(3, 5, 2)).unwrap();
        assert_eq!(single.graph.order(), 1);
        assert_eq!(single.edge_count, 0);
    }

    #[test]
    fn vertex_deletion() {
        let s = star3();
        let g = s.graph.delete_vertex(0).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.is_isolated(0) && g.is_isolated(1));
        assert!(g.delete_vertex(1).unwrap().delete_vertex(1).is_err());

        let rs = rs747();
        let h = rs.graph.delete_vertex(0).unwrap();
        for v in 4..=7 {
            assert_eq!(rs.graph.degree(v), 4);
            assert_eq!(h.degree(v - 1), 3);
        }
        for v in 1..=3 {
            assert_eq!(h.degree(v - 1), rs.graph.degree(v));
        }
    }

    #[test]
    fn local_complement_on_a_path() {
        let path = Multigraph::from_edges(3, 3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        assert_eq!(path.local_complement(1, 0).unwrap(), path);
        let lc = path.local_complement(1, 1).unwrap();
        assert_eq!(lc.weight(0, 2), 1);
        assert_eq!(lc.weight(0, 1), 1);
        assert_eq!(lc.local_complement(1, 2).unwrap(), path);
    }

    #[test]
    fn cut_matrices() {
        let s = star3();
        assert_eq!(s.graph.cut_matrix(&[], &[0, 1]).unwrap().rank(), 0);
        let m = s.graph.cut_matrix(&[1], &[0, 2]).unwrap();
        assert_eq!(m.row(0), &[1, 0]);
        assert_eq!(s.graph.cut_matrix(&[1], &[1, 2]), Err(GraphError::Overlap(1)));
        let rs = rs747();
        assert_eq!(rs.graph.cut_matrix(&[7], &[1, 2, 3]).unwrap().row(0), &[4, 3, 6]);
    }

    #[test]
    fn fixture_facts() {
        let rs = rs747();
        assert_eq!(rs.graph.order(), 8);
        assert_eq!(rs.graph.weight(0, 7), 1);
        assert_eq!(rs.graph.weight(1, 2), 0);
        for u in 4..=7 {
            for v in 4..=7 {
                assert_eq!(rs.graph.weight(u, v), 0);
            }
        }
    }

    #[test]
    fn random_graphs_are_seeded() {
        assert_eq!(Multigraph::random(6, 5, 42).unwrap(), Multigraph::random(6, 5, 42).unwrap());
        assert_ne!(Multigraph::random(6, 5, 42).unwrap(), Multigraph::random(6, 5, 43).unwrap());
        let g = Multigraph::random(5, 2, 1).unwrap();
        assert!((0..5).all(|u| (0..5).all(|v| g.weight(u, v) <= 1)));
    }

    #[test]
    fn single_pair_weight_is_uniform() {
        let q = 5u32;
        let draws = 10_000u64;
        let mut counts = vec![0u64; q as usize];
        for seed in 0..draws {
            counts[Multigraph::random(2, q, seed).unwrap().weight(0, 1) as usize] += 1;
        }
        let expected = draws as f64 / f64::from(q);
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square with 4 degrees of freedom: mean 4, sd sqrt(8)
        assert!(chi2 < 4.0 + 3.0 * 8f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn text_format() {
        let g = Multigraph::parse("q 3\nn 2\ne 0 1 1\n").unwrap();
        assert_eq!(g.weight(0, 1), 1);
        let rs = rs747();
        assert_eq!(Multigraph::parse(&rs.graph.to_text()).unwrap(), rs.graph);
        let commented = "# header\nq 3\n\nn 3\n# edges\ne 0 2 2\n";
        assert_eq!(Multigraph::parse(commented).unwrap().weight(2, 0), 2);
        for bad in [
            "q 3\nn 2\ne 0 0 1\n",
            "q 3\nn 2\ne 0 1 3\n",
            "q 3\nn 2\ne 0 1 0\n",
            "q 3\nn 2\ne 0 1 1\ne 0 1 2\n",
            "q 3\nn 2\ne 1 0 1\n",
            "q 3\nn 2\ne 0 2 1\n",
            "n 2\nq 3\n",
            "q x\nn 2\n",
            "q 4\nn 2\n",
            "q 3\nn 2\nf 0 1 1\n",
        ] {
            assert!(Multigraph::parse(bad).is_err(), "{bad:?} accepted");
        }
    }

    fn arb_graph(qs: Vec<u32>, max_n: usize) -> impl Strategy<Value = Multigraph> {
        (prop::sample::select(qs), 2..=max_n, any::<u64>()).prop_map(|(q, n, seed)| Multigraph::random(n, q, seed).unwrap())
    }

    proptest! {
        #[test]
        fn transformations_keep_invariants(g in arb_graph(vec![2, 3, 5, 7], 7), u in 0usize..7, lambda in 0u32..7) {
            let u = u % g.order();
            let lc = g.local_complement(u, lambda).unwrap();
            prop_assert!(Multigraph::new(g.q(), g.order(), lc.gamma.clone()).is_ok());
            let del = g.delete_vertex(u).unwrap();
            prop_assert!(Multigraph::new(g.q(), del.order(), del.gamma.clone()).is_ok());
            prop_assert_eq!(Multigraph::parse(&g.to_text()).unwrap(), g);
        }

        #[test]
        fn neighbours_are_linear(g in arb_graph(vec![2, 3, 5, 7], 6), seed in any::<u64>(), a in 0u32..7, b in 0u32..7) {
            let q = g.q();
            let n = g.order();
            let d1 = Multiset::from_values(q, &(0..n).map(|i| (seed >> (4 * i)) as u32).collect::<Vec<_>>());
            let d2 = Multiset::from_values(q, &(0..n).map(|i| (seed >> (4 * i + 32)) as u32).collect::<Vec<_>>());
            let lhs = g.neighbors(&d1.combine(a, &d2, b)).unwrap();
            let rhs = g.neighbors(&d1).unwrap().combine(a, &g.neighbors(&d2).unwrap(), b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn all_ones_induces_the_graph(g in arb_graph(vec![2, 3, 5], 6)) {
            let ones = Multiset::indicator(g.q(), g.order(), &(0..g.order()).collect::<Vec<_>>());
            prop_assert_eq!(g.induced(&ones).unwrap().graph, g);
        }
    }
}
