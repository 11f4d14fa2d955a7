use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::codes::{check_secret, shifted};
use super::state::{fourier, omega_pow, StateVector};
use super::weyl::WeylOperator;
use super::{Oracle, OracleError};
use crate::access::{normalize_set, verify_complement_witness_c, verify_witness_d};
use crate::multigraph::{Multigraph, Multiset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Bell measurement between the secret and the dealer qudit of `|G⟩`.
    E1,
    /// Controlled `X̄`, dealer measured in the Fourier basis, `Z̄` correction.
    E2,
    /// Controlled `X̄`, Fourier, controlled `Z̄^{-1}`; no measurement.
    E3,
    /// Controlled `V_B^{-1}` from `|+⟩`, then `U_B` measured and the ancilla corrected.
    D2,
    /// Controlled `V_B^{-1}` from `|+⟩`, then Fourier, controlled `U_B`, inverse Fourier.
    D3,
}

impl Variant {
    pub fn is_encoder(self) -> bool {
        matches!(self, Variant::E1 | Variant::E2 | Variant::E3)
    }
}

/// `X̄ = Z_{Γ.{d}}` and `Z̄ = k_u^{−Γ(u,d)^{−1}}` on `V∖{d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalOperators {
    pub anchor: usize,
    pub x_bar: WeylOperator,
    pub z_bar: WeylOperator,
}

#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub variant: Variant,
    /// Encoders: the corrected state on `V∖{d}` for the first outcome.
    /// Decoders: the recovered single-qudit secret.
    pub output: StateVector,
    /// Smallest fidelity with the target over all measurement outcomes.
    pub fidelity: f64,
    /// For `E3`, overlap of the dealer qudit with `|+⟩`.
    pub dealer_plus: Option<f64>,
}

impl Oracle {
    /// Logical operators anchored at the lowest-indexed neighbour of `d`.
    pub fn logical_operators(&self, g: &Multigraph, d: usize) -> Result<LogicalOperators, OracleError> {
        let anchor = (0..g.order()).find(|&u| g.weight(u, d) != 0).ok_or(OracleError::IsolatedDealer(d))?;
        self.logical_operators_at(g, d, anchor)
    }

    pub fn logical_operators_at(&self, g: &Multigraph, d: usize, anchor: usize) -> Result<LogicalOperators, OracleError> {
        let f = g.field();
        let w = g.weight(anchor, d);
        if w == 0 {
            return Err(OracleError::Precondition(format!("vertex {anchor} is not adjacent to the dealer")));
        }
        let h = g.delete_vertex(d)?;
        let k = WeylOperator::generator(&h, shifted(d, anchor));
        let exp = f.neg(f.inv(w).expect("nonzero weight"));
        Ok(LogicalOperators { anchor, x_bar: self.logical_x(g, d), z_bar: k.pow(i64::from(exp)) })
    }

    /// Runs an encoding variant and compares against `qq_encode`.
    pub fn encode_variant(&self, g: &Multigraph, d: usize, variant: Variant, secret: &[Complex64]) -> Result<VariantOutcome, OracleError> {
        let q = g.q();
        check_secret(q, secret)?;
        let logical = self.logical_operators(g, d)?;
        let target = self.qq_encode(g, d, secret)?;
        let w = g.order() - 1;
        let xi = StateVector::qudit(q, secret)?;
        let mut branches: Vec<StateVector> = Vec::new();
        let mut dealer_plus = None;
        match variant {
            Variant::E1 => {
                self.check(q, w + 2)?;
                let state = xi.tensor(&self.graph_state(g)?, self.budget)?;
                let inv_sqrt = 1.0 / f64::from(q).sqrt();
                for k in 0..q {
                    for l in 0..q {
                        // Z_S^k X_D^l Σ_i |i,i⟩/√q
                        let mut bra = vec![Complex64::new(0.0, 0.0); (q * q) as usize];
                        for i in 0..q {
                            bra[(i * q + (i + l) % q) as usize] = omega_pow(q, u64::from(k * i)) * inv_sqrt;
                        }
                        let rest = state.contract(&[0, d + 1], &bra);
                        if rest.norm() < 1e-9 {
                            continue;
                        }
                        // W holds X̄^l Z̄^{-k}|ξ_L⟩
                        let fix = logical.z_bar.pow(i64::from(k)).mul(&logical.x_bar.pow(-i64::from(l)));
                        let mut fixed = rest.apply_weyl(&fix);
                        fixed.normalize();
                        branches.push(fixed);
                    }
                }
            }
            Variant::E2 | Variant::E3 => {
                self.check(q, w + 1)?;
                let state = xi.tensor(&self.graph_state(&g.delete_vertex(d)?)?, self.budget)?;
                let lift = |op: &WeylOperator| WeylOperator::identity(q, 1).tensor(op);
                let cx: Vec<WeylOperator> = (0..q).map(|c| lift(&logical.x_bar.pow(i64::from(c)))).collect();
                let state = state.apply_controlled_weyl(0, &cx);
                if variant == Variant::E2 {
                    let f = fourier(q, false);
                    for j in 0..q {
                        let bra: Vec<Complex64> = (0..q).map(|k| f[(k * q + j) as usize]).collect();
                        let rest = state.contract(&[0], &bra);
                        if rest.norm() < 1e-9 {
                            continue;
                        }
                        // W holds Z̄^{-j}|ξ_L⟩
                        let mut fixed = rest.apply_weyl(&logical.z_bar.pow(i64::from(j)));
                        fixed.normalize();
                        branches.push(fixed);
                    }
                } else {
                    let state = state.apply_single(0, &fourier(q, false));
                    let cz: Vec<WeylOperator> = (0..q).map(|c| lift(&logical.z_bar.pow(-i64::from(c)))).collect();
                    let state = state.apply_controlled_weyl(0, &cz);
                    let plus = vec![Complex64::new(1.0 / f64::from(q).sqrt(), 0.0); q as usize];
                    let rest = state.contract(&[0], &plus);
                    dealer_plus = Some(rest.norm().powi(2));
                    let mut rest = rest;
                    rest.normalize();
                    branches.push(rest);
                }
            }
            Variant::D2 | Variant::D3 => return Err(OracleError::Precondition(format!("{variant:?} is a decoding variant"))),
        }
        let fidelity = branches.iter().map(|b| b.fidelity(&target)).fold(f64::INFINITY, f64::min);
        Ok(VariantOutcome { variant, output: branches.swap_remove(0), fidelity, dealer_plus })
    }

    /// Runs a decoding variant on `encoded` and compares the ancilla with `secret`.
    #[allow(clippy::too_many_arguments)]
    pub fn decode_variant(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, cw: &Multiset, variant: Variant, encoded: &StateVector, secret: &[Complex64]) -> Result<VariantOutcome, OracleError> {
        let q = g.q();
        check_secret(q, secret)?;
        let b = normalize_set(g, d, b)?;
        if !verify_witness_d(g, d, &b, dw)? || !verify_complement_witness_c(g, d, &b, cw)? {
            return Err(OracleError::InvalidWitness("(D, C) do not certify quantum access".into()));
        }
        let w = g.order() - 1;
        self.check(q, w + 1)?;
        let (u, v) = self.logical_pair(g, d, &b, dw, cw)?;
        let plus = StateVector::qudit(q, &vec![Complex64::new(1.0 / f64::from(q).sqrt(), 0.0); q as usize])?;
        let state = plus.tensor(encoded, self.budget)?;
        let lift = |op: &WeylOperator| WeylOperator::identity(q, 1).tensor(op);
        let cv: Vec<WeylOperator> = (0..q).map(|c| lift(&v.pow(-i64::from(c)))).collect();
        let state = state.apply_controlled_weyl(0, &cv);
        let target = StateVector::qudit(q, secret)?;
        let mut recovered: Vec<StateVector> = Vec::new();
        match variant {
            Variant::D2 => {
                let u_full = lift(&u);
                for k in 0..q {
                    let branch = state.project_weyl(&u_full, k);
                    if branch.norm() < 1e-9 {
                        continue;
                    }
                    // ancilla holds X^{-k}|ξ⟩ next to |k_L⟩
                    let fixed = branch.apply_weyl(&WeylOperator::x_at(q, w + 1, 0, k));
                    recovered.push(self.ancilla_state(&fixed)?);
                }
            }
            Variant::D3 => {
                let state = state.apply_single(0, &fourier(q, false));
                let cu: Vec<WeylOperator> = (0..q).map(|c| lift(&u.pow(i64::from(c)))).collect();
                let state = state.apply_controlled_weyl(0, &cu).apply_single(0, &fourier(q, true));
                recovered.push(self.ancilla_state(&state)?);
            }
            _ => return Err(OracleError::Precondition(format!("{variant:?} is an encoding variant"))),
        }
        let fidelity = recovered.iter().map(|r| r.fidelity(&target)).fold(f64::INFINITY, f64::min);
        Ok(VariantOutcome { variant, output: recovered.swap_remove(0), fidelity, dealer_plus: None })
    }

    /// Leading eigenvector of the reduced state of qudit 0.
    fn ancilla_state(&self, state: &StateVector) -> Result<StateVector, OracleError> {
        let mut state = state.clone();
        state.normalize();
        let rho = self.reduced_density(&state, &[0])?;
        let eig = rho.symmetric_eigen();
        let best = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc }).0;
        let amps: Vec<Complex64> = eig.eigenvectors.column(best).iter().copied().collect();
        let mut out = StateVector::qudit(state.modulus(), &amps)?;
        // a mixed ancilla means decoding failed; shrink the vector accordingly
        let purity = eig.eigenvalues[best].max(0.0).sqrt();
        out = out.scaled(Complex64::new(purity, 0.0));
        Ok(out)
    }
}
