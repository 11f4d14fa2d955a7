//! Who can read the secret: cut-rank based classical and quantum access
//! verdicts, with multiset certificates for each answer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fq::{AffineSolution, Field, FqMatrix};
use crate::multigraph::{GraphError, Multigraph, Multiset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AccessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("dealer {0} must not belong to the player set")]
    DealerInSet(usize),
    #[error("witness is supported outside its domain at vertex {vertex}")]
    DomainMismatch { vertex: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("graphs above {max} vertices are not supported by the bitmask engine (order {order})")]
    TooLarge { order: usize, max: usize },
}

impl From<crate::fq::FieldError> for AccessError {
    fn from(e: crate::fq::FieldError) -> Self {
        AccessError::Graph(GraphError::Field(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassicalAccess {
    Accessible,
    NoInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantumAccess {
    Accessible,
    NoInfo,
    Partial,
}

impl QuantumAccess {
    pub fn from_derivative(derivative: i8) -> Self {
        match derivative {
            -1 => QuantumAccess::Accessible,
            1 => QuantumAccess::NoInfo,
            _ => QuantumAccess::Partial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessVerdict {
    pub classical: ClassicalAccess,
    pub quantum: QuantumAccess,
    pub pi: u8,
    pub derivative: i8,
    pub witness_d: Option<Multiset>,
    pub witness_c: Option<Multiset>,
}

/// Sorted, deduplicated copy of `b`; rejects bad indices and the dealer.
pub fn normalize_set(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<Vec<usize>, AccessError> {
    g.check_vertex(dealer)?;
    let mut out = b.to_vec();
    for &v in &out {
        g.check_vertex(v)?;
    }
    if out.contains(&dealer) {
        return Err(AccessError::DealerInSet(dealer));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Vertices of `g` not in `b` and not in `also_exclude`.
pub fn complement(g: &Multigraph, b: &[usize], also_exclude: &[usize]) -> Vec<usize> {
    (0..g.order()).filter(|v| !b.contains(v) && !also_exclude.contains(v)).collect()
}

fn with_vertex(b: &[usize], v: usize) -> Vec<usize> {
    let mut out = b.to_vec();
    if !out.contains(&v) {
        out.push(v);
        out.sort_unstable();
    }
    out
}

/// `rank Γ[B, V∖B]`.
pub fn cutrank(g: &Multigraph, b: &[usize]) -> Result<usize, AccessError> {
    let mut b = b.to_vec();
    for &v in &b {
        g.check_vertex(v)?;
    }
    b.sort_unstable();
    b.dedup();
    let rest = complement(g, &b, &[]);
    Ok(g.cut_matrix(&b, &rest)?.rank())
}

/// Cut rank of `B` in `G` minus cut rank of `B` in `G ∖ d`; always 0 or 1.
pub fn pi_classical(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<u8, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let with_dealer = cutrank(g, &b)?;
    let without = g.delete_vertex(dealer)?;
    let shifted: Vec<usize> = b.iter().map(|&v| if v > dealer { v - 1 } else { v }).collect();
    let without_dealer = cutrank(&without, &shifted)?;
    let pi = with_dealer - without_dealer;
    debug_assert!(pi <= 1);
    Ok(pi as u8)
}

/// `cutrk(B ∪ {d}) − cutrk(B)`.
pub fn quantum_derivative(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<i8, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let grown = cutrank(g, &with_vertex(&b, dealer))? as i64;
    let base = cutrank(g, &b)? as i64;
    let d = grown - base;
    debug_assert!((-1..=1).contains(&d));
    Ok(d as i8)
}

pub fn classify(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<AccessVerdict, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let pi = pi_classical(g, dealer, &b)?;
    let derivative = quantum_derivative(g, dealer, &b)?;
    if cfg!(debug_assertions) {
        let rest = complement(g, &b, &[dealer]);
        let dual = pi == 1 && pi_classical(g, dealer, &rest)? == 0;
        debug_assert_eq!(derivative == -1, dual, "dual characterization broken for B = {b:?}");
    }
    let (classical, witness_d, witness_c) = if pi == 1 {
        (ClassicalAccess::Accessible, witness_d(g, dealer, &b)?, None)
    } else {
        (ClassicalAccess::NoInfo, None, witness_c(g, dealer, &b)?)
    };
    Ok(AccessVerdict { classical, quantum: QuantumAccess::from_derivative(derivative), pi, derivative, witness_d, witness_c })
}

/// `D` on `B` whose neighbourhood outside `B` is exactly `{d}` with `(Γ.D)(d) = 1`.
pub fn witness_d(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<Option<Multiset>, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let rest = complement(g, &b, &[]);
    let m = g.cut_matrix(&rest, &b)?;
    let rhs: Vec<u32> = rest.iter().map(|&v| u32::from(v == dealer)).collect();
    Ok(match m.solve_affine(&rhs)? {
        AffineSolution::Solved { particular, .. } => Some(Multiset::scatter(g.q(), g.order(), &b, &particular)),
        AffineSolution::NoSolution => None,
    })
}

/// Solves for `C` on `domain` with `C(d) = 1` and `(Γ.C)(v) = 0` for every `v` in `zero_on`.
fn constrained_kernel(g: &Multigraph, dealer: usize, domain: &[usize], zero_on: &[usize]) -> Result<Option<Multiset>, AccessError> {
    let f = g.field();
    let pos = domain.iter().position(|&v| v == dealer).expect("domain contains the dealer");
    let cut = g.cut_matrix(zero_on, domain)?;
    let rows = zero_on.len() + 1;
    let m = FqMatrix::from_fn(f, rows, domain.len(), |r, c| if r < zero_on.len() { cut.get(r, c) } else { u32::from(c == pos) });
    let mut rhs = vec![0u32; rows];
    rhs[rows - 1] = 1;
    Ok(match m.solve_affine(&rhs)? {
        AffineSolution::Solved { particular, .. } => Some(Multiset::scatter(g.q(), g.order(), domain, &particular)),
        AffineSolution::NoSolution => None,
    })
}

/// `C` on `V∖B` with `C(d) = 1` and no neighbours inside `B`.
pub fn witness_c(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<Option<Multiset>, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let rest = complement(g, &b, &[]);
    constrained_kernel(g, dealer, &rest, &b)
}

/// `C` on `B ∪ {d}` with `C(d) = 1` and no neighbours outside `B ∪ {d}`.
///
/// Exists exactly when the complementary player set has no classical access.
pub fn complement_witness_c(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<Option<Multiset>, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let domain = with_vertex(&b, dealer);
    let outside = complement(g, &domain, &[]);
    constrained_kernel(g, dealer, &domain, &outside)
}

fn check_domain(m: &Multiset, domain: &[usize]) -> Result<(), AccessError> {
    match m.support().into_iter().find(|v| !domain.contains(v)) {
        Some(vertex) => Err(AccessError::DomainMismatch { vertex }),
        None => Ok(()),
    }
}

fn check_len(g: &Multigraph, m: &Multiset) -> Result<(), AccessError> {
    if m.len() != g.order() {
        return Err(GraphError::MultisetLength { expected: g.order(), found: m.len() }.into());
    }
    Ok(())
}

/// `sup(Γ[B, V∖B].D) = {d}`, with `D` supported on `B`.
pub fn verify_witness_d(g: &Multigraph, dealer: usize, b: &[usize], d: &Multiset) -> Result<bool, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    check_len(g, d)?;
    check_domain(d, &b)?;
    let nd = g.neighbors(d)?;
    Ok((0..g.order()).filter(|v| !b.contains(v)).all(|v| (nd.get(v) != 0) == (v == dealer)))
}

/// `C` on `V∖B` with `C(d) ≠ 0` and `Γ[V∖B, B].C = 0`.
pub fn verify_witness_c(g: &Multigraph, dealer: usize, b: &[usize], c: &Multiset) -> Result<bool, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    check_len(g, c)?;
    check_domain(c, &complement(g, &b, &[]))?;
    let nc = g.neighbors(c)?;
    Ok(c.get(dealer) != 0 && b.iter().all(|&v| nc.get(v) == 0))
}

/// `C` on `B ∪ {d}` with `C(d) = 1` and `Γ[B∪{d}, V∖(B∪{d})].C = 0`.
pub fn verify_complement_witness_c(g: &Multigraph, dealer: usize, b: &[usize], c: &Multiset) -> Result<bool, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    check_len(g, c)?;
    let domain = with_vertex(&b, dealer);
    check_domain(c, &domain)?;
    let nc = g.neighbors(c)?;
    Ok(c.get(dealer) == 1 && (0..g.order()).filter(|v| !domain.contains(v)).all(|v| nc.get(v) == 0))
}

/// Both certificates of quantum access: `D` on `B` and `C` on `B ∪ {d}`.
pub fn verify_witness_pair(g: &Multigraph, dealer: usize, b: &[usize], d: &Multiset, c: &Multiset) -> Result<bool, AccessError> {
    let d_ok = verify_witness_d(g, dealer, b, d)?;
    let c_ok = verify_complement_witness_c(g, dealer, b, c)?;
    Ok(d_ok && c_ok)
}

/// Whether `c` lies in `ker Γ[B∪{d}] ∖ ker Γ[B]`.
pub fn in_dealer_kernel(g: &Multigraph, dealer: usize, b: &[usize], c: &Multiset) -> Result<bool, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    check_len(g, c)?;
    let domain = with_vertex(&b, dealer);
    if c.support().iter().any(|v| !domain.contains(v)) {
        return Ok(false);
    }
    let nc = g.neighbors(c)?;
    let in_big = (0..g.order()).filter(|v| !domain.contains(v)).all(|v| nc.get(v) == 0);
    let in_small = c.get(dealer) == 0 && nc.get(dealer) == 0;
    Ok(in_big && !in_small)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelWitness {
    pub c: Multiset,
    pub support: usize,
    pub cutrank: usize,
    /// `|sup(C)| < q/(q+1) · cutrk(B)`.
    pub strict_bound_holds: bool,
    /// `|sup(C)| ≤ q/(q+1) · (cutrk(B) + 1)`.
    pub relaxed_bound_holds: bool,
}

/// Small-support element of the dealer kernel of `B`.
///
/// Takes a basis of `ker Γ[B∪{d}]` in reduced column echelon form, picks the
/// first two columns whose images under `C ↦ (C(d), (Γ.C)(d))` are independent,
/// and returns the combination `x·C1 + y·C2` of least support.
pub fn dealer_kernel_witness(g: &Multigraph, dealer: usize, b: &[usize]) -> Result<KernelWitness, AccessError> {
    let b = normalize_set(g, dealer, b)?;
    let derivative = quantum_derivative(g, dealer, &b)?;
    if derivative != -1 {
        return Err(AccessError::Precondition(format!("derivative is {derivative}, expected -1")));
    }
    let f = g.field();
    let q = g.q();
    let domain = with_vertex(&b, dealer);
    let outside = complement(g, &domain, &[]);
    let kernel = g.cut_matrix(&outside, &domain)?.kernel_basis();
    let basis = FqMatrix::from_fn(f, domain.len(), kernel.len(), |r, c| kernel[c][r]).reduced_column_echelon();
    let columns: Vec<Multiset> = (0..basis.cols())
        .map(|c| Multiset::scatter(q, g.order(), &domain, &basis.column(c)))
        .filter(|m| !m.is_zero())
        .collect();
    let image = |m: &Multiset| -> Result<(u32, u32), AccessError> { Ok((m.get(dealer), g.neighbors(m)?.get(dealer))) };
    let images: Vec<(u32, u32)> = columns.iter().map(image).collect::<Result<_, _>>()?;
    let first = images.iter().position(|&(a, b)| (a, b) != (0, 0)).ok_or_else(|| AccessError::Precondition("dealer kernel is empty".into()))?;
    let (a1, b1) = images[first];
    let second = (first + 1..images.len())
        .find(|&i| {
            let (a2, b2) = images[i];
            f.sub(f.mul(a1, b2), f.mul(a2, b1)) != 0
        })
        .ok_or_else(|| AccessError::Precondition("dealer kernel has dimension below 2".into()))?;

    let mut best: Option<Multiset> = None;
    for x in 0..q {
        for y in 0..q {
            if x == 0 && y == 0 {
                continue;
            }
            let cand = columns[first].combine(x, &columns[second], y);
            if best.as_ref().is_none_or(|b| cand.support_size() < b.support_size()) {
                best = Some(cand);
            }
        }
    }
    let c = best.expect("q^2 - 1 > 0 candidates");
    let support = c.support_size();
    let cut = cutrank(g, &b)?;
    let (q64, s64, k64) = (u64::from(q), support as u64, cut as u64);
    Ok(KernelWitness {
        c,
        support,
        cutrank: cut,
        strict_bound_holds: s64 * (q64 + 1) < q64 * k64,
        relaxed_bound_holds: s64 * (q64 + 1) <= q64 * (k64 + 1),
    })
}

/// Largest order handled by [`CutRankEngine`].
pub const MASK_LIMIT: usize = 64;

/// Cut ranks of vertex subsets given as bitmasks, reusing one scratch buffer.
#[derive(Debug, Clone)]
pub struct CutRankEngine {
    field: Field,
    n: usize,
    gamma: Vec<u32>,
    scratch: Vec<u32>,
}

impl CutRankEngine {
    pub fn new(g: &Multigraph) -> Result<Self, AccessError> {
        if g.order() > MASK_LIMIT {
            return Err(AccessError::TooLarge { order: g.order(), max: MASK_LIMIT });
        }
        let n = g.order();
        let gamma = (0..n * n).map(|i| g.weight(i / n, i % n)).collect();
        Ok(CutRankEngine { field: g.field(), n, gamma, scratch: Vec::with_capacity(n * n) })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// `rank Γ[A, B]` for disjoint masks.
    pub fn rank_between(&mut self, a: u64, b: u64) -> usize {
        let (rows, cols) = if a.count_ones() <= b.count_ones() { (a, b) } else { (b, a) };
        let r = rows.count_ones() as usize;
        let c = cols.count_ones() as usize;
        if r == 0 || c == 0 {
            return 0;
        }
        self.scratch.clear();
        let n = self.n;
        let mut rm = rows;
        while rm != 0 {
            let u = rm.trailing_zeros() as usize;
            rm &= rm - 1;
            let mut cm = cols;
            while cm != 0 {
                let v = cm.trailing_zeros() as usize;
                cm &= cm - 1;
                self.scratch.push(self.gamma[u * n + v]);
            }
        }
        eliminate(self.field, &mut self.scratch, r, c)
    }

    pub fn cut_rank(&mut self, b: u64) -> usize {
        let full = self.full_mask();
        self.rank_between(b & full, full & !b)
    }

    pub fn pi(&mut self, dealer: usize, b: u64) -> u8 {
        let full = self.full_mask();
        let outside = full & !b;
        (self.rank_between(b, outside) - self.rank_between(b, outside & !(1u64 << dealer))) as u8
    }

    pub fn derivative(&mut self, dealer: usize, b: u64) -> i8 {
        (self.cut_rank(b | 1u64 << dealer) as i64 - self.cut_rank(b) as i64) as i8
    }
}

/// Rank of a row-major `r×c` matrix, destroying it.
fn eliminate(f: Field, m: &mut [u32], r: usize, c: usize) -> usize {
    let mut rank = 0;
    for col in 0..c {
        if rank == r {
            break;
        }
        let Some(p) = (rank..r).find(|&i| m[i * c + col] != 0) else {
            continue;
        };
        if p != rank {
            for j in col..c {
                m.swap(p * c + j, rank * c + j);
            }
        }
        let inv = f.inv(m[rank * c + col]).expect("pivot is nonzero");
        for i in rank + 1..r {
            let factor = f.mul(m[i * c + col], inv);
            if factor == 0 {
                continue;
            }
            for j in col..c {
                m[i * c + j] = f.sub(m[i * c + j], f.mul(factor, m[rank * c + j]));
            }
        }
        rank += 1;
    }
    rank
}

pub fn mask_of(vertices: &[usize]) -> u64 {
    vertices.iter().fold(0u64, |m, &v| m | 1u64 << v)
}

pub fn vertices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|&v| mask >> v & 1 == 1).collect()
}
