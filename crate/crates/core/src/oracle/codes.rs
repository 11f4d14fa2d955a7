use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{omega_pow, StateVector};
use super::weyl::WeylOperator;
use super::{Oracle, OracleError};
use crate::access::{normalize_set, ClassicalAccess, QuantumAccess};
use crate::multigraph::Multigraph;

pub type DensityMatrix = DMatrix<Complex64>;

const ZERO_TOL: f64 = 1e-9;

/// Trace distance and fidelity across the `q` classical codewords seen by `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoLeak {
    pub max_trace_distance: f64,
    pub min_trace_distance: f64,
    pub max_fidelity: f64,
}

impl InfoLeak {
    /// `NoInfo` when all reduced states coincide, `Accessible` when they are
    /// pairwise orthogonal, `None` otherwise (never the case for graph states).
    pub fn verdict(&self) -> Option<ClassicalAccess> {
        if self.max_trace_distance <= ZERO_TOL {
            Some(ClassicalAccess::NoInfo)
        } else if self.max_fidelity < ZERO_TOL {
            Some(ClassicalAccess::Accessible)
        } else {
            None
        }
    }
}

/// Decoupling test with a reference qudit maximally entangled with the secret.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumCheck {
    /// `‖ρ_{R,E} − ρ_R ⊗ ρ_E‖_F` for the complement `E` of `B`.
    pub environment_correlation: f64,
    /// `‖ρ_{R,B} − ρ_R ⊗ ρ_B‖_F`.
    pub player_correlation: f64,
}

impl QuantumCheck {
    pub fn verdict(&self) -> QuantumAccess {
        if self.environment_correlation <= 1e-8 {
            QuantumAccess::Accessible
        } else if self.player_correlation <= 1e-8 {
            QuantumAccess::NoInfo
        } else {
            QuantumAccess::Partial
        }
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DensityMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|l| l.abs()).sum::<f64>()
}

fn psd_sqrt(m: &DensityMatrix) -> DensityMatrix {
    let eig = m.clone().symmetric_eigen();
    let roots = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * roots * eig.eigenvectors.adjoint()
}

/// `(tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    hermitian_eigenvalues(&inner).iter().map(|l| l.max(0.0).sqrt()).sum::<f64>().powi(2)
}

fn kron(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    a.kronecker(b)
}

/// Position of vertex `v` once the dealer `d` has been removed.
pub(crate) fn shifted(d: usize, v: usize) -> usize {
    if v > d {
        v - 1
    } else {
        v
    }
}

impl Oracle {
    /// `q^{−n/2} Σ_x ω^{|G[x]|} |x⟩`.
    pub fn graph_state(&self, g: &Multigraph) -> Result<StateVector, OracleError> {
        let q = g.q();
        let n = g.order();
        let dim = self.check(q, n)?;
        let scale = 1.0 / (dim as f64).sqrt();
        let roots: Vec<Complex64> = (0..q).map(|k| omega_pow(q, u64::from(k)) * scale).collect();
        let amps = (0..dim)
            .map(|i| {
                let x = super::state::decode_index(q, n, i);
                roots[(g.edge_count_of(&x) % u64::from(q)) as usize]
            })
            .collect();
        StateVector::from_amplitudes(q, n, amps)
    }

    /// Largest deviation `‖K_u|G⟩ − |G⟩‖` over all generators.
    pub fn stabilizer_defect(&self, g: &Multigraph) -> Result<f64, OracleError> {
        let state = self.graph_state(g)?;
        Ok((0..g.order())
            .map(|u| {
                let image = state.apply_weyl(&WeylOperator::generator(g, u));
                image.amplitudes().iter().zip(state.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max))
    }

    fn check_dealer(&self, g: &Multigraph, d: usize) -> Result<(), OracleError> {
        g.check_vertex(d)?;
        if g.is_isolated(d) {
            return Err(OracleError::IsolatedDealer(d));
        }
        Ok(())
    }

    /// `X̄ = Z_{Γ.{d}}` restricted to `V∖{d}`.
    pub(crate) fn logical_x(&self, g: &Multigraph, d: usize) -> WeylOperator {
        let z: Vec<u32> = (0..g.order()).filter(|&v| v != d).map(|v| g.weight(d, v)).collect();
        WeylOperator::new(g.q(), vec![0; z.len()], z, 0)
    }

    /// The classical codeword `|s_L⟩ = Z^s_{Γ.{d}} |G∖d⟩` on `V∖{d}`.
    pub fn cq_encode(&self, g: &Multigraph, d: usize, s: u32) -> Result<StateVector, OracleError> {
        self.check_dealer(g, d)?;
        let base = self.graph_state(&g.delete_vertex(d)?)?;
        Ok(base.apply_weyl(&self.logical_x(g, d).pow(i64::from(s % g.q()))))
    }

    /// `Σ_j s_j |j_L⟩`.
    pub fn qq_encode(&self, g: &Multigraph, d: usize, secret: &[Complex64]) -> Result<StateVector, OracleError> {
        check_secret(g.q(), secret)?;
        let mut acc: Option<StateVector> = None;
        for (j, s) in secret.iter().enumerate() {
            let term = self.cq_encode(g, d, j as u32)?.scaled(*s);
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
        Ok(acc.expect("secret has q >= 2 entries"))
    }

    /// Partial trace onto `sites` (positions in the state, first listed most significant).
    pub fn reduced_density(&self, state: &StateVector, sites: &[usize]) -> Result<DensityMatrix, OracleError> {
        let q = state.modulus();
        let k = sites.len();
        self.check(q, 2 * k)?;
        let rest: Vec<usize> = (0..state.qudits()).filter(|v| !sites.contains(v)).collect();
        let mut order = sites.to_vec();
        order.extend(&rest);
        let permuted = state.permute(&order);
        let rows = (q as usize).pow(k as u32);
        let cols = permuted.amplitudes().len() / rows;
        let m = DMatrix::from_row_slice(rows, cols, permuted.amplitudes());
        Ok(&m * m.adjoint())
    }

    /// Classical leakage of the codewords to `B` (vertices of `g`).
    pub fn info_leak(&self, g: &Multigraph, d: usize, b: &[usize]) -> Result<InfoLeak, OracleError> {
        let b = normalize_set(g, d, b)?;
        let sites: Vec<usize> = b.iter().map(|&v| shifted(d, v)).collect();
        let rhos = (0..g.q())
            .map(|s| {
                let state = self.cq_encode(g, d, s)?;
                self.reduced_density(&state, &sites)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut leak = InfoLeak { max_trace_distance: 0.0, min_trace_distance: f64::INFINITY, max_fidelity: 0.0 };
        for i in 0..rhos.len() {
            for j in i + 1..rhos.len() {
                let td = trace_distance(&rhos[i], &rhos[j]);
                leak.max_trace_distance = leak.max_trace_distance.max(td);
                leak.min_trace_distance = leak.min_trace_distance.min(td);
                leak.max_fidelity = leak.max_fidelity.max(uhlmann_fidelity(&rhos[i], &rhos[j]));
            }
        }
        Ok(leak)
    }

    /// Decoupling test for quantum secrets on the player set `B`.
    pub fn quantum_check(&self, g: &Multigraph, d: usize, b: &[usize]) -> Result<QuantumCheck, OracleError> {
        let b = normalize_set(g, d, b)?;
        let q = g.q();
        let w = g.order() - 1;
        self.check(q, w + 1)?;
        // |Ψ⟩ = q^{-1/2} Σ_j |j⟩_R |j_L⟩, reference first
        let mut psi: Option<StateVector> = None;
        for j in 0..q {
            let mut r = vec![Complex64::new(0.0, 0.0); q as usize];
            r[j as usize] = Complex64::new(1.0 / f64::from(q).sqrt(), 0.0);
            let term = StateVector::qudit(q, &r)?.tensor(&self.cq_encode(g, d, j)?, self.budget)?;
            psi = Some(match psi {
                Some(p) => p.add(&term),
                None => term,
            });
        }
        let psi = psi.expect("q >= 2");
        let player_sites: Vec<usize> = b.iter().map(|&v| shifted(d, v) + 1).collect();
        let env_sites: Vec<usize> = (1..=w).filter(|s| !player_sites.contains(s)).collect();
        let correlation = |sites: &[usize]| -> Result<f64, OracleError> {
            let mut joint_sites = vec![0];
            joint_sites.extend_from_slice(sites);
            let joint = self.reduced_density(&psi, &joint_sites)?;
            let r = self.reduced_density(&psi, &[0])?;
            let part = self.reduced_density(&psi, sites)?;
            Ok((joint - kron(&r, &part)).norm())
        };
        Ok(QuantumCheck { environment_correlation: correlation(&env_sites)?, player_correlation: correlation(&player_sites)? })
    }

    /// Schmidt rank of `|G⟩` across `(B, V∖B)`, from singular values above `1e-7`.
    pub fn schmidt_rank(&self, g: &Multigraph, b: &[usize]) -> Result<usize, OracleError> {
        let state = self.graph_state(g)?;
        let q = g.q() as usize;
        let rest: Vec<usize> = (0..g.order()).filter(|v| !b.contains(v)).collect();
        let mut order = b.to_vec();
        order.extend(&rest);
        let permuted = state.permute(&order);
        let rows = q.pow(b.len() as u32);
        let m = DMatrix::from_row_slice(rows, permuted.amplitudes().len() / rows, permuted.amplitudes());
        Ok(m.singular_values().iter().filter(|&&s| s > 1e-7).count())
    }
}

pub(crate) fn check_secret(q: u32, secret: &[Complex64]) -> Result<(), OracleError> {
    if secret.len() != q as usize {
        return Err(OracleError::Precondition(format!("secret needs {q} amplitudes, got {}", secret.len())));
    }
    let norm: f64 = secret.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(OracleError::Precondition(format!("secret has squared norm {norm}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::{classify, cutrank};
    use crate::multigraph::star3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_graph_states() {
        let o = Oracle::default();
        let g = Multigraph::empty(3, 1).unwrap();
        let s = o.graph_state(&g).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a - c(1.0 / 3f64.sqrt())).norm() < 1e-12));

        let g = Multigraph::from_edges(2, 2, &[(0, 1, 1)]).unwrap();
        let s = o.graph_state(&g).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-12);
        }

        let g = Multigraph::from_edges(3, 2, &[(0, 1, 2)]).unwrap();
        let s = o.graph_state(&g).unwrap();
        assert!((s.amplitude(&[1, 2]) - omega_pow(3, 4) / 3.0).norm() < 1e-12);
    }

    #[test]
    fn generators_stabilise_random_graphs() {
        let o = Oracle::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let q = [2u32, 3, 5][rng.gen_range(0..3)];
            let n = rng.gen_range(1..=if q == 5 { 4 } else { 5 });
            let g = Multigraph::random_with(n, q, &mut rng).unwrap();
            assert!(o.stabilizer_defect(&g).unwrap() < 1e-9);
        }
    }

    #[test]
    fn codewords_are_orthonormal() {
        let o = Oracle::default();
        let dg = star3();
        let words: Vec<StateVector> = (0..3).map(|s| o.cq_encode(&dg.graph, dg.dealer, s).unwrap()).collect();
        let base = o.graph_state(&dg.graph.delete_vertex(0).unwrap()).unwrap();
        assert!((words[0].fidelity(&base) - 1.0).abs() < 1e-12);
        // Z⊗Z on the two-qudit edgeless state
        let zz = WeylOperator::new(3, vec![0, 0], vec![1, 1], 0);
        assert!((words[1].inner(&base.apply_weyl(&zz)) - c(1.0)).norm() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((words[i].inner(&words[j]) - c(expect)).norm() < 1e-9);
            }
        }
        assert!(matches!(o.cq_encode(&Multigraph::empty(3, 2).unwrap(), 0, 1), Err(OracleError::IsolatedDealer(0))));
    }

    #[test]
    fn qq_encoding_is_an_isometry() {
        let o = Oracle::default();
        let dg = star3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut s: Vec<Complex64> = (0..3).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let norm = s.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            s.iter_mut().for_each(|a| *a /= norm);
            let e = o.qq_encode(&dg.graph, 0, &s).unwrap();
            assert!((e.norm() - 1.0).abs() < 1e-9);
        }
        let zero = o.qq_encode(&dg.graph, 0, &[c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!((zero.fidelity(&o.cq_encode(&dg.graph, 0, 0).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_density_edge_cases() {
        let o = Oracle::default();
        let g = Multigraph::from_edges(2, 2, &[(0, 1, 1)]).unwrap();
        let s = o.graph_state(&g).unwrap();
        let half = o.reduced_density(&s, &[0]).unwrap();
        assert!((half.clone() - DensityMatrix::identity(2, 2) * c(0.5)).norm() < 1e-12);
        assert!((o.reduced_density(&s, &[]).unwrap()[(0, 0)] - c(1.0)).norm() < 1e-12);
        let full = o.reduced_density(&s, &[0, 1]).unwrap();
        let v = DMatrix::from_column_slice(4, 1, s.amplitudes());
        assert!((full - &v * v.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn star_leakage() {
        let o = Oracle::default();
        let dg = star3();
        let one = o.info_leak(&dg.graph, 0, &[1]).unwrap();
        assert!((one.max_trace_distance - 1.0).abs() < 1e-9);
        assert_eq!(one.verdict(), Some(ClassicalAccess::Accessible));
        let g = Multigraph::from_edges(3, 3, &[(0, 1, 1)]).unwrap();
        let isolated = o.info_leak(&g, 0, &[2]).unwrap();
        assert!(isolated.max_trace_distance < 1e-9);
        assert_eq!(isolated.verdict(), Some(ClassicalAccess::NoInfo));
    }

    #[test]
    fn quantum_check_on_star() {
        let o = Oracle::default();
        let dg = star3();
        assert_eq!(o.quantum_check(&dg.graph, 0, &[1, 2]).unwrap().verdict(), QuantumAccess::Accessible);
        assert_eq!(o.quantum_check(&dg.graph, 0, &[1]).unwrap().verdict(), classify(&dg.graph, 0, &[1]).unwrap().quantum);
        assert_eq!(o.quantum_check(&dg.graph, 0, &[]).unwrap().verdict(), QuantumAccess::NoInfo);
    }

    #[test]
    fn schmidt_rank_matches_cut_rank() {
        let o = Oracle::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let q = [2u32, 3][rng.gen_range(0..2)];
            let g = Multigraph::random_with(5, q, &mut rng).unwrap();
            for mask in 0u32..32 {
                let b: Vec<usize> = (0..5).filter(|v| mask >> v & 1 == 1).collect();
                let expect = (q as usize).pow(cutrank(&g, &b).unwrap() as u32);
                assert_eq!(o.schmidt_rank(&g, &b).unwrap(), expect);
            }
        }
    }
}
