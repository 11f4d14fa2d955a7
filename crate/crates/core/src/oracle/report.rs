use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Oracle, OracleError};
use crate::access::{classify, complement_witness_c, normalize_set, witness_d, AccessVerdict, ClassicalAccess, QuantumAccess};
use crate::multigraph::Multigraph;

/// First 16 hex digits of the SHA-256 of the graph's text form.
pub fn graph_hash(g: &Multigraph) -> String {
    let digest = Sha256::digest(g.to_text().as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictPair {
    pub classical: ClassicalAccess,
    pub quantum: QuantumAccess,
}

/// Rank-based prediction next to the state-vector measurement for one `(G, d, B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub graph_hash: String,
    pub dealer: usize,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    pub verdict_graph: VerdictPair,
    /// `None` in the classical slot means the reduced states were neither
    /// identical nor orthogonal.
    pub verdict_oracle: (Option<ClassicalAccess>, QuantumAccess),
    pub max_trace_distance: f64,
    /// Bell-decoder fidelity on a fixed test secret; with witnesses when they
    /// exist, otherwise the best of a few candidate multisets.
    pub decode_fidelity: f64,
}

impl OracleReport {
    pub fn agrees(&self) -> bool {
        let classical = self.verdict_oracle.0 == Some(self.verdict_graph.classical);
        let quantum = self.verdict_oracle.1 == self.verdict_graph.quantum;
        let decoded = self.decode_fidelity >= 1.0 - 1e-9;
        classical && quantum && decoded == (self.verdict_graph.quantum == QuantumAccess::Accessible)
    }
}

/// A fixed unbalanced secret with no special structure.
pub(crate) fn probe_secret(q: u32) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..q).map(|j| Complex64::from_polar(1.0 + f64::from(j) * 0.37, 0.9 * f64::from(j) + 0.2)).collect();
    let n = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / n).collect()
}

impl Oracle {
    /// Compares `classify` with leakage, decoupling and Bell decoding.
    pub fn verify(&self, g: &Multigraph, d: usize, b: &[usize]) -> Result<OracleReport, OracleError> {
        let b = normalize_set(g, d, b)?;
        let AccessVerdict { classical, quantum, .. } = classify(g, d, &b)?;
        let leak = self.info_leak(g, d, &b)?;
        let check = self.quantum_check(g, d, &b)?;
        let secret = probe_secret(g.q());
        let encoded = self.qq_encode(g, d, &secret)?;
        let decode_fidelity = match (witness_d(g, d, &b)?, complement_witness_c(g, d, &b)?) {
            (Some(dw), Some(cw)) => self.qq_decode_bell(g, d, &b, &dw, &cw, &encoded)?.fidelity(&secret),
            _ => self.best_candidate_fidelity(g, d, &b, &encoded, &secret)?,
        };
        Ok(OracleReport {
            graph_hash: graph_hash(g),
            dealer: d,
            b,
            verdict_graph: VerdictPair { classical, quantum },
            verdict_oracle: (leak.verdict(), check.verdict()),
            max_trace_distance: leak.max_trace_distance,
            decode_fidelity,
        })
    }

    /// Runs the Bell decoder with whatever partial witnesses exist plus a few
    /// seeded random multisets, and keeps the best fidelity.
    pub fn best_candidate_fidelity(&self, g: &Multigraph, d: usize, b: &[usize], encoded: &super::StateVector, secret: &[Complex64]) -> Result<f64, OracleError> {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        use crate::multigraph::Multiset;

        let q = g.q();
        let n = g.order();
        let mut with_d = b.to_vec();
        with_d.push(d);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (n as u64) << 8 ^ u64::from(q));
        let random_on = |rng: &mut ChaCha8Rng, set: &[usize]| -> Multiset {
            let vals: Vec<u32> = set.iter().map(|_| rng.gen_range(0..q)).collect();
            Multiset::scatter(q, n, set, &vals)
        };
        let mut candidates = Vec::new();
        let base_d = witness_d(g, d, b)?;
        let base_c = complement_witness_c(g, d, b)?;
        for _ in 0..8 {
            let dw = base_d.clone().unwrap_or_else(|| random_on(&mut rng, b));
            let mut cw = base_c.clone().unwrap_or_else(|| random_on(&mut rng, &with_d));
            cw.set(d, 1);
            candidates.push((dw, cw));
        }
        let mut best = 0.0f64;
        for (dw, cw) in candidates {
            if g.neighbors(&dw)?.get(d) == 0 {
                continue;
            }
            let out = self.qq_decode_bell_unchecked(g, d, b, &dw, &cw, encoded)?;
            best = best.max(out.fidelity(secret));
        }
        Ok(best)
    }
}
