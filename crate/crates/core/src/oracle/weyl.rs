//! Generalised Pauli operators `ω^p ⊗_v X^{a_v} Z^{b_v}` with exact phases.

use serde::{Deserialize, Serialize};

use crate::fq::Field;
use crate::multigraph::{Multigraph, Multiset};

/// `ω^phase · ⊗_v X^{x[v]} Z^{z[v]}`, with `Z` acting before `X` on each site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylOperator {
    q: u32,
    x: Vec<u32>,
    z: Vec<u32>,
    phase: u32,
}

impl WeylOperator {
    pub fn identity(q: u32, n: usize) -> Self {
        WeylOperator { q, x: vec![0; n], z: vec![0; n], phase: 0 }
    }

    pub fn new(q: u32, x: Vec<u32>, z: Vec<u32>, phase: u32) -> Self {
        assert_eq!(x.len(), z.len(), "x and z parts must have equal length");
        let x = x.into_iter().map(|v| v % q).collect();
        let z = z.into_iter().map(|v| v % q).collect();
        WeylOperator { q, x, z, phase: phase % q }
    }

    pub fn x_at(q: u32, n: usize, v: usize, power: u32) -> Self {
        let mut op = Self::identity(q, n);
        op.x[v] = power % q;
        op
    }

    pub fn z_at(q: u32, n: usize, v: usize, power: u32) -> Self {
        let mut op = Self::identity(q, n);
        op.z[v] = power % q;
        op
    }

    /// `Z_D = ⊗_v Z^{D(v)}`.
    pub fn z_multiset(d: &Multiset) -> Self {
        let q = d.modulus();
        WeylOperator { q, x: vec![0; d.len()], z: d.values().to_vec(), phase: 0 }
    }

    /// `K_u = X_u Z_{Γ.{u}}`.
    pub fn generator(g: &Multigraph, u: usize) -> Self {
        let q = g.q();
        let mut x = vec![0; g.order()];
        x[u] = 1;
        WeylOperator { q, x, z: g.row(u).to_vec(), phase: 0 }
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u32) -> Self {
        self.phase = phase % self.q;
        self
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&v| v == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.x.len()).filter(|&v| self.x[v] != 0 || self.z[v] != 0).collect()
    }

    fn field(&self) -> Field {
        Field::new(self.q).expect("operator modulus is prime")
    }

    /// Exact product `self · rhs`.
    pub fn mul(&self, rhs: &WeylOperator) -> WeylOperator {
        assert_eq!(self.q, rhs.q);
        assert_eq!(self.len(), rhs.len());
        let f = self.field();
        // Z^b X^a = ω^{ab} X^a Z^b moves rhs.x past self.z
        let cross = self.z.iter().zip(&rhs.x).fold(0u32, |acc, (&b, &a)| f.add(acc, f.mul(b, a)));
        WeylOperator {
            q: self.q,
            x: self.x.iter().zip(&rhs.x).map(|(&a, &b)| f.add(a, b)).collect(),
            z: self.z.iter().zip(&rhs.z).map(|(&a, &b)| f.add(a, b)).collect(),
            phase: f.add(f.add(self.phase, rhs.phase), cross),
        }
    }

    pub fn inverse(&self) -> WeylOperator {
        let f = self.field();
        let xz = self.x.iter().zip(&self.z).fold(0u32, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
        WeylOperator {
            q: self.q,
            x: self.x.iter().map(|&a| f.neg(a)).collect(),
            z: self.z.iter().map(|&b| f.neg(b)).collect(),
            phase: f.add(f.neg(self.phase), xz),
        }
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, exp: i64) -> WeylOperator {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = WeylOperator::identity(self.q, self.len());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// `W^q = ω^φ I`; returns `φ` (nonzero only for `q = 2`).
    pub fn order_phase(&self) -> u32 {
        let p = self.pow(i64::from(self.q));
        debug_assert!(p.is_identity_up_to_phase());
        p.phase
    }

    /// Sub-operator on the listed sites (phase kept).
    pub fn restrict(&self, sites: &[usize]) -> WeylOperator {
        WeylOperator {
            q: self.q,
            x: sites.iter().map(|&v| self.x[v]).collect(),
            z: sites.iter().map(|&v| self.z[v]).collect(),
            phase: self.phase,
        }
    }

    /// Embeds into `n` sites, placing site `i` of `self` at `sites[i]`.
    pub fn embed(&self, n: usize, sites: &[usize]) -> WeylOperator {
        let mut op = WeylOperator::identity(self.q, n);
        for (i, &v) in sites.iter().enumerate() {
            op.x[v] = self.x[i];
            op.z[v] = self.z[i];
        }
        op.phase = self.phase;
        op
    }

    /// Tensor product, `self` on the first sites.
    pub fn tensor(&self, rhs: &WeylOperator) -> WeylOperator {
        let f = self.field();
        let mut x = self.x.clone();
        x.extend_from_slice(&rhs.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&rhs.z);
        WeylOperator { q: self.q, x, z, phase: f.add(self.phase, rhs.phase) }
    }

    pub fn commutes_with(&self, rhs: &WeylOperator) -> bool {
        self.mul(rhs) == rhs.mul(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn commutation_phase() {
        let x = WeylOperator::x_at(3, 1, 0, 1);
        let z = WeylOperator::z_at(3, 1, 0, 1);
        assert_eq!(x.mul(&z), WeylOperator::new(3, vec![1], vec![1], 0));
        assert_eq!(z.mul(&x), WeylOperator::new(3, vec![1], vec![1], 1));
    }

    #[test]
    fn qubit_xz_squares_to_minus_one() {
        let xz = WeylOperator::new(2, vec![1], vec![1], 0);
        assert_eq!(xz.pow(2), WeylOperator::identity(2, 1).with_phase(1));
        assert_eq!(xz.order_phase(), 1);
        assert_eq!(WeylOperator::new(3, vec![1], vec![2], 0).order_phase(), 0);
    }

    fn arb_op() -> impl Strategy<Value = (WeylOperator, WeylOperator)> {
        (prop::sample::select(vec![2u32, 3, 5]), 1usize..4).prop_flat_map(|(q, n)| {
            let one = (prop::collection::vec(0..q, n), prop::collection::vec(0..q, n), 0..q).prop_map(move |(x, z, p)| WeylOperator::new(q, x, z, p));
            (one.clone(), one)
        })
    }

    proptest! {
        #[test]
        fn group_laws((a, b) in arb_op()) {
            let id = WeylOperator::identity(a.modulus(), a.len());
            prop_assert_eq!(a.mul(&a.inverse()), id.clone());
            prop_assert_eq!(a.inverse().mul(&a), id);
            prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
            prop_assert_eq!(a.pow(3), a.mul(&a).mul(&a));
            prop_assert_eq!(a.pow(-2), a.inverse().pow(2));
        }
    }
}
