use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codes::{shifted, DensityMatrix};
use super::state::{omega_pow, sample, StateVector};
use super::weyl::WeylOperator;
use super::{Oracle, OracleError};
use crate::access::{complement_witness_c, normalize_set, verify_complement_witness_c, verify_witness_d, witness_d};
use crate::fq::Field;
use crate::multigraph::{Multigraph, Multiset};

/// Eigenvector `|i(t)⟩` of `X^t Z` with eigenvalue `ω^i` (for `q = 2, t = 1`,
/// eigenvalue `i·(−1)^i` of `XZ`).
pub fn mub_vector(q: u32, t: u32, i: u32) -> Result<Vec<Complex64>, OracleError> {
    let f = Field::new(q).map_err(|e| OracleError::Precondition(e.to_string()))?;
    check_basis(q, t)?;
    let i = i % q;
    if t == 0 {
        let mut v = vec![Complex64::new(0.0, 0.0); q as usize];
        v[i as usize] = Complex64::new(1.0, 0.0);
        return Ok(v);
    }
    let s = 1.0 / f64::from(q).sqrt();
    if q == 2 {
        let sign = if i == 0 { -1.0 } else { 1.0 };
        return Ok(vec![Complex64::new(s, 0.0), Complex64::new(0.0, sign * s)]);
    }
    let inv_t = f.inv(t).expect("t nonzero");
    let inv_2t = f.inv(f.mul(2, t)).expect("q odd");
    Ok((0..q)
        .map(|j| {
            let quad = f.mul(f.mul(j, f.sub(j, t)), inv_2t);
            let lin = f.mul(f.mul(i, inv_t), j);
            omega_pow(q, u64::from(f.sub(quad, lin))) * s
        })
        .collect())
}

fn check_basis(q: u32, t: u32) -> Result<(), OracleError> {
    let ok = if q == 2 { t <= 1 } else { t < q };
    if ok {
        Ok(())
    } else {
        Err(OracleError::UnsupportedBasis { q, t })
    }
}

/// Player-side decoding data for basis `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub q: u32,
    pub t: u32,
    /// `(Γ.D)(d)` of the witness as supplied; the parameters use `D/α`.
    pub alpha: u32,
    pub beta: u32,
    pub players: Vec<usize>,
    pub x: Vec<u32>,
    pub z: Vec<u32>,
    /// Phase of `K_C^t K_D^{1−tβ}` net of `t(t−1)β/2`, from exact operator products.
    pub c: u32,
    /// The closed-form phase expression; kept for comparison only.
    pub c_printed: u32,
    pub printed_c_consistent: bool,
    /// `t(t−1)/2 · β`.
    pub offset: u32,
    /// Extra `ω` exponent from rescaling each measured `X^a Z^b` to order `q`;
    /// always 0 for odd `q`.
    pub normalization: u32,
}

impl DecodeParams {
    fn field(&self) -> Field {
        Field::new(self.q).expect("prime modulus")
    }

    /// `f_t(r) = −r − c − t(t−1)β/2` (less the normalisation term).
    pub fn f(&self, r: u32) -> u32 {
        let f = self.field();
        let k = f.add(f.add(self.c, self.offset), self.normalization);
        f.sub(f.neg(r), k)
    }

    /// `f_t` is an involution, so this is `f` again.
    pub fn f_inverse(&self, r: u32) -> u32 {
        self.f(r)
    }

    /// The single-site operator measured by the `k`-th player.
    pub fn player_operator(&self, k: usize) -> WeylOperator {
        WeylOperator::new(self.q, vec![self.x[k]], vec![self.z[k]], 0)
    }

    /// `ω^{c + offset} X_d^t Z_d ⊗_i X^{x_i} Z^{z_i}` on all `n` vertices.
    pub fn assembled_operator(&self, n: usize, dealer: usize) -> WeylOperator {
        let mut x = vec![0; n];
        let mut z = vec![0; n];
        x[dealer] = self.t;
        z[dealer] = 1;
        for (k, &v) in self.players.iter().enumerate() {
            x[v] = self.x[k];
            z[v] = self.z[k];
        }
        let f = self.field();
        WeylOperator::new(self.q, x, z, f.add(self.c, self.offset))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalDecode {
    /// Exponent `r` of the global phase of `Π_{i∈B} k_i^{D(i)}`.
    pub operator_phase: u32,
    /// Eigenvalue exponent observed on `|s_L⟩`; equals `−αs`.
    pub outcome: u32,
    pub recovered: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqRound {
    pub t: u32,
    pub dealer: u32,
    pub players: Vec<u32>,
    pub reconstructed: u32,
}

/// Output of the Bell-pair decoder, averaged over all syndromes.
#[derive(Debug, Clone)]
pub struct QqDecode {
    /// `(k, l, probability)` per syndrome with nonzero weight.
    pub syndromes: Vec<(u32, u32, f64)>,
    /// Density matrix of the output ancilla, mixed over syndromes.
    pub output: DensityMatrix,
    /// Whether `U_B` and `V_B` act only on the player set; when they do not,
    /// the parts outside `B` are dropped before decoding.
    pub local: bool,
}

impl QqDecode {
    pub fn fidelity(&self, secret: &[Complex64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(secret);
        (v.adjoint() * &self.output * &v)[(0, 0)].re
    }

    /// Leading eigenvector of the output, phase-fixed so its largest entry is real.
    pub fn recovered(&self) -> Vec<Complex64> {
        let eig = self.output.clone().symmetric_eigen();
        let (best, _) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
        let col: Vec<Complex64> = eig.eigenvectors.column(best).iter().copied().collect();
        let pivot = col.iter().copied().fold(Complex64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
        let rot = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        col.into_iter().map(|a| a * rot).collect()
    }
}

/// `Π_{v} K_v^{m(v)}` over the whole graph.
fn stabilizer_of(g: &Multigraph, m: &Multiset) -> WeylOperator {
    (0..g.order()).fold(WeylOperator::identity(g.q(), g.order()), |acc, v| acc.mul(&WeylOperator::generator(g, v).pow(i64::from(m.get(v)))))
}

impl Oracle {
    /// Reads the secret off `|s_L⟩` with the stabilizer built from a `D` witness.
    pub fn classical_measure_decode(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, s: u32) -> Result<ClassicalDecode, OracleError> {
        let b = normalize_set(g, d, b)?;
        if !verify_witness_d(g, d, &b, dw)? {
            return Err(OracleError::InvalidWitness("D does not certify access".into()));
        }
        let f = g.field();
        let alpha = g.neighbors(dw)?.get(d);
        let full = stabilizer_of(g, dw);
        debug_assert!(full.x()[d] == 0 && full.z()[d] == alpha);
        let keep: Vec<usize> = (0..g.order()).filter(|&v| v != d).collect();
        let op = full.restrict(&keep);
        let word = self.cq_encode(g, d, s)?;
        let expectation = word.inner(&word.apply_weyl(&op));
        if (expectation.norm() - 1.0).abs() > 1e-9 {
            return Err(OracleError::Precondition("codeword is not an eigenvector of the witness operator".into()));
        }
        let q = f64::from(g.q());
        let outcome = ((expectation.arg() / (2.0 * std::f64::consts::PI) * q).round().rem_euclid(q)) as u32;
        let recovered = f.mul(f.neg(outcome), f.inv(alpha).expect("α nonzero"));
        Ok(ClassicalDecode { operator_phase: op.phase(), outcome, recovered })
    }

    /// Players' decoding parameters for dealer basis `t`. `C` may be omitted for `t = 0`.
    pub fn decode_params(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, cw: Option<&Multiset>, t: u32) -> Result<DecodeParams, OracleError> {
        let q = g.q();
        check_basis(q, t)?;
        let b = normalize_set(g, d, b)?;
        if !verify_witness_d(g, d, &b, dw)? {
            return Err(OracleError::InvalidWitness("D does not certify access".into()));
        }
        let cw = match cw {
            Some(c) => {
                if !verify_complement_witness_c(g, d, &b, c)? {
                    return Err(OracleError::InvalidWitness("C does not certify the complement".into()));
                }
                c.clone()
            }
            None if t == 0 => Multiset::singleton(q, g.order(), d),
            None => return Err(OracleError::InvalidWitness("basis t != 0 needs a C witness".into())),
        };
        let f = g.field();
        let alpha = g.neighbors(dw)?.get(d);
        let dw = dw.scaled(f.inv(alpha).expect("α nonzero"));
        let gd = g.neighbors(&dw)?;
        let gc = g.neighbors(&cw)?;
        let beta = gc.get(d);
        let e = f.sub(1, f.mul(t, beta));
        let x: Vec<u32> = b.iter().map(|&i| f.add(f.mul(t, cw.get(i)), f.mul(e, dw.get(i)))).collect();
        let z: Vec<u32> = b.iter().map(|&i| f.add(f.mul(t, gc.get(i)), f.mul(e, gd.get(i)))).collect();

        let mut with_d = b.clone();
        with_d.push(d);
        let pair_sum = |set: &[usize], m: &Multiset| {
            let mut acc = 0;
            for &i in set {
                for &j in set {
                    if j < i {
                        acc = f.add(acc, f.mul(g.weight(j, i), f.mul(m.get(j), m.get(i))));
                    }
                }
            }
            acc
        };
        let lambda = pair_sum(&with_d, &cw);
        let lambda_p = pair_sum(&b, &dw);
        let cross = b.iter().fold(0, |acc, &i| b.iter().fold(acc, |acc, &j| f.add(acc, f.mul(g.weight(i, j), f.mul(cw.get(i), dw.get(j))))));
        let tt1 = f.mul(t, f.sub(t, 1));
        let c_printed = [f.mul(t, lambda_p), f.mul(e, lambda), f.mul(tt1, lambda_p), f.mul(f.mul(e, f.neg(f.mul(t, beta))), lambda), f.mul(f.mul(t, e), cross)]
            .into_iter()
            .fold(0, |a, v| f.add(a, v));

        let product = stabilizer_of(g, &cw).pow(i64::from(t)).mul(&stabilizer_of(g, &dw).pow(i64::from(e)));
        let mut expected_x = vec![0; g.order()];
        let mut expected_z = vec![0; g.order()];
        expected_x[d] = t;
        expected_z[d] = 1;
        for (k, &i) in b.iter().enumerate() {
            expected_x[i] = x[k];
            expected_z[i] = z[k];
        }
        if product.x() != expected_x.as_slice() || product.z() != expected_z.as_slice() {
            return Err(OracleError::Precondition("stabilizer product does not factor as expected".into()));
        }
        let offset = if q == 2 { 0 } else { f.mul(tt1, f.inv(2).expect("q odd")) };
        let offset = f.mul(offset, beta);
        let c = f.sub(product.phase(), offset);
        // each measured site contributes ω^{φ/q} when its operator is rescaled
        let phi: u32 = std::iter::once((t, 1)).chain(x.iter().copied().zip(z.iter().copied())).map(|(a, bz)| WeylOperator::new(q, vec![a], vec![bz], 0).order_phase()).sum();
        if phi % q != 0 {
            return Err(OracleError::Precondition("rescaled operators leave a fractional phase".into()));
        }
        Ok(DecodeParams {
            q,
            t,
            alpha,
            beta,
            players: b,
            x,
            z,
            c,
            c_printed,
            printed_c_consistent: c == c_printed,
            offset,
            normalization: (phi / q) % q,
        })
    }

    /// One round: the dealer measures `|G⟩` in basis `t`, the players in `B` measure
    /// their assigned operators and reconstruct.
    pub fn cq_round<R: Rng + ?Sized>(&self, g: &Multigraph, d: usize, b: &[usize], t: u32, rng: &mut R) -> Result<CqRound, OracleError> {
        let b = normalize_set(g, d, b)?;
        let dw = witness_d(g, d, &b)?.ok_or_else(|| OracleError::Unauthorized(format!("{b:?} has no classical access")))?;
        let cw = if t == 0 {
            None
        } else {
            Some(complement_witness_c(g, d, &b)?.ok_or_else(|| OracleError::Unauthorized(format!("{b:?} cannot decode in basis {t}")))?)
        };
        let params = self.decode_params(g, d, &b, &dw, cw.as_ref(), t)?;
        let ops: Vec<(usize, WeylOperator)> = params.players.iter().enumerate().map(|(k, &v)| (v, params.player_operator(k))).collect();
        let f = g.field();
        let (dealer, players) = self.measure_round(g, d, t, &ops, rng)?;
        let r = players.iter().fold(0, |a, &m| f.add(a, m));
        Ok(CqRound { t, dealer, players, reconstructed: params.f_inverse(r) })
    }

    /// Dealer measures in basis `t`; each listed vertex then measures its
    /// single-site operator. Returns the dealer outcome and player outcomes.
    pub fn measure_round<R: Rng + ?Sized>(&self, g: &Multigraph, d: usize, t: u32, ops: &[(usize, WeylOperator)], rng: &mut R) -> Result<(u32, Vec<u32>), OracleError> {
        let q = g.q();
        let state = self.graph_state(g)?;
        let branches: Vec<StateVector> = (0..q).map(|i| mub_vector(q, t, i).map(|bra| state.contract(&[d], &bra))).collect::<Result<_, _>>()?;
        let weights: Vec<f64> = branches.iter().map(|s| s.norm().powi(2)).collect();
        let s = sample(&weights, rng);
        let mut rest = branches.into_iter().nth(s).expect("branch exists");
        rest.normalize();
        let w = g.order() - 1;
        let mut outcomes = Vec::with_capacity(ops.len());
        for (v, op) in ops {
            let site = shifted(d, *v);
            let full = op.embed(w, &[site]);
            outcomes.push(rest.measure_weyl(&full, rng));
        }
        Ok((s as u32, outcomes))
    }

    /// Bell-pair decoder for a quantum secret held by `B`.
    pub fn qq_decode_bell(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, cw: &Multiset, encoded: &StateVector) -> Result<QqDecode, OracleError> {
        let b = normalize_set(g, d, b)?;
        if !verify_witness_d(g, d, &b, dw)? || !verify_complement_witness_c(g, d, &b, cw)? {
            return Err(OracleError::InvalidWitness("(D, C) do not certify quantum access".into()));
        }
        self.qq_decode_bell_unchecked(g, d, &b, dw, cw, encoded)
    }

    /// The same procedure without witness validation, restricted to the qudits
    /// of `B`; used to probe unauthorised sets with arbitrary candidate multisets.
    pub fn qq_decode_bell_unchecked(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, cw: &Multiset, encoded: &StateVector) -> Result<QqDecode, OracleError> {
        let q = g.q();
        let f = g.field();
        let w = g.order() - 1;
        if encoded.qudits() != w || encoded.modulus() != q {
            return Err(OracleError::Precondition("encoded state must live on V∖{d}".into()));
        }
        self.check(q, w + 2)?;
        let (u, v) = self.logical_pair(g, d, b, dw, cw)?;
        let sites: Vec<usize> = b.iter().map(|&i| shifted(d, i)).collect();
        let local = u.support().iter().chain(v.support().iter()).all(|s| sites.contains(s));
        // players can only act on their own qudits
        let (u, v) = (u.restrict(&sites).embed(w, &sites), v.restrict(&sites).embed(w, &sites));

        let bell: Vec<Complex64> = (0..q * q).map(|i| if i / q == i % q { Complex64::new(1.0 / f64::from(q).sqrt(), 0.0) } else { Complex64::new(0.0, 0.0) }).collect();
        let state = encoded.tensor(&StateVector::from_amplitudes(q, 2, bell)?, self.budget)?;
        let a1 = w;
        let a2 = w + 1;
        let lift = |op: &WeylOperator| op.tensor(&WeylOperator::identity(q, 2));
        let m1 = lift(&v.inverse()).mul(&WeylOperator::x_at(q, w + 2, a1, f.neg(1)));
        let m2 = lift(&u).mul(&WeylOperator::z_at(q, w + 2, a1, f.neg(1)));

        let mut output = DensityMatrix::zeros(q as usize, q as usize);
        let mut syndromes = Vec::new();
        for k in 0..q {
            let after_k = state.project_weyl(&m1, k);
            for l in 0..q {
                let branch = after_k.project_weyl(&m2, l);
                let p = branch.norm().powi(2);
                if p < 1e-14 {
                    continue;
                }
                // the ancilla holds X^{-l} Z^{-k} |ψ⟩; undo it
                let fix = WeylOperator::z_at(q, w + 2, a2, k).mul(&WeylOperator::x_at(q, w + 2, a2, l));
                let fixed = branch.apply_weyl(&fix);
                let rho = self.reduced_density(&fixed, &[a2])?;
                output += rho;
                syndromes.push((k, l, p));
            }
        }
        Ok(QqDecode { syndromes, output, local })
    }

    /// `(U_B, V_B)` on `V∖{d}`.
    pub(crate) fn logical_pair(&self, g: &Multigraph, d: usize, b: &[usize], dw: &Multiset, cw: &Multiset) -> Result<(WeylOperator, WeylOperator), OracleError> {
        let f = g.field();
        let alpha = g.neighbors(dw)?.get(d);
        let alpha_inv = f.inv(alpha).map_err(|_| OracleError::InvalidWitness("(Γ.D)(d) = 0".into()))?;
        let beta = g.neighbors(cw)?.get(d);
        let h = g.delete_vertex(d)?;
        let w = h.order();
        let mut u = WeylOperator::identity(g.q(), w);
        let mut v = self.logical_x(g, d);
        for &i in b {
            let k = WeylOperator::generator(&h, shifted(d, i));
            u = u.mul(&k.pow(i64::from(f.neg(f.mul(dw.get(i), alpha_inv)))));
            v = v.mul(&k.pow(i64::from(f.sub(cw.get(i), f.mul(beta, f.mul(alpha_inv, dw.get(i)))))));
        }
        Ok((u, v))
    }
}
