//! Dense state vectors over `q^n` amplitudes. Qudit 0 is the most significant digit.

use num_complex::Complex64;
use rand::Rng;

use super::weyl::WeylOperator;
use super::OracleError;

pub const DEFAULT_AMPLITUDE_BUDGET: usize = 2_000_000;

/// `ω^k` for `k` taken mod `q`.
pub fn omega_pow(q: u32, k: u64) -> Complex64 {
    let k = (k % u64::from(q)) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / f64::from(q))
}

/// `q^n`, or `None` when it exceeds `budget`.
pub fn dimension(q: u32, n: usize, budget: usize) -> Option<usize> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim.checked_mul(q as usize)?;
        if dim > budget {
            return None;
        }
    }
    Some(dim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    q: u32,
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(q: u32, n: usize, amps: Vec<Complex64>) -> Result<Self, OracleError> {
        let dim = dimension(q, n, usize::MAX).ok_or(OracleError::Budget { q, n, budget: usize::MAX })?;
        if amps.len() != dim {
            return Err(OracleError::Precondition(format!("expected {dim} amplitudes, got {}", amps.len())));
        }
        Ok(StateVector { q, n, amps })
    }

    /// Computational basis state; `digits[v]` is the value of qudit `v`.
    pub fn basis(q: u32, digits: &[u32], budget: usize) -> Result<Self, OracleError> {
        let n = digits.len();
        let dim = dimension(q, n, budget).ok_or(OracleError::Budget { q, n, budget })?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[encode_index(q, digits)] = Complex64::new(1.0, 0.0);
        Ok(StateVector { q, n, amps })
    }

    /// Single-qudit state from `q` amplitudes.
    pub fn qudit(q: u32, amps: &[Complex64]) -> Result<Self, OracleError> {
        Self::from_amplitudes(q, 1, amps.to_vec())
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn qudits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[u32]) -> Complex64 {
        self.amps[encode_index(self.q, digits)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescales to unit norm; returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            for a in &mut self.amps {
                *a /= norm;
            }
        }
        norm
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.amps.len(), other.amps.len());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scaled(&self, c: Complex64) -> StateVector {
        StateVector { q: self.q, n: self.n, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.amps.len(), other.amps.len());
        StateVector { q: self.q, n: self.n, amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect() }
    }

    /// `self ⊗ other`, with `self` on the leading qudits.
    pub fn tensor(&self, other: &StateVector, budget: usize) -> Result<StateVector, OracleError> {
        let n = self.n + other.n;
        dimension(self.q, n, budget).ok_or(OracleError::Budget { q: self.q, n, budget })?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(StateVector { q: self.q, n, amps })
    }

    pub fn digits(&self, index: usize) -> Vec<u32> {
        decode_index(self.q, self.n, index)
    }

    /// Exact action `W|y⟩ = ω^{p + Σ b_v y_v} |y + a⟩`.
    pub fn apply_weyl(&self, w: &WeylOperator) -> StateVector {
        self.apply_weyl_scaled(w, Complex64::new(1.0, 0.0))
    }

    fn apply_weyl_scaled(&self, w: &WeylOperator, scale: Complex64) -> StateVector {
        assert_eq!(w.len(), self.n, "operator and state sizes differ");
        let q = self.q;
        let roots: Vec<Complex64> = (0..q).map(|k| omega_pow(q, u64::from(k)) * scale).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut digits = vec![0u32; self.n];
        for (index, amp) in self.amps.iter().enumerate() {
            if index > 0 {
                increment(&mut digits, q);
            }
            if *amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut phase = u64::from(w.phase());
            let mut target = 0usize;
            for v in 0..self.n {
                let y = digits[v];
                phase += u64::from(w.z()[v]) * u64::from(y);
                target = target * q as usize + ((y + w.x()[v]) % q) as usize;
            }
            out[target] += amp * roots[(phase % u64::from(q)) as usize];
        }
        StateVector { q, n: self.n, amps: out }
    }

    /// `W' = e^{−2πiφ/q²} W` where `W^q = ω^φ`, so that `W'^q = I` and its
    /// eigenvalues are powers of `ω`.
    pub fn apply_normalized_weyl(&self, w: &WeylOperator, power: u32) -> StateVector {
        let phi = w.order_phase();
        let q = f64::from(self.q);
        let theta = -2.0 * std::f64::consts::PI * f64::from(phi) * f64::from(power) / (q * q);
        self.apply_weyl_scaled(&w.pow(i64::from(power)), Complex64::from_polar(1.0, theta))
    }

    /// Spectral projection onto the `ω^m` eigenspace of the normalised `W`.
    pub fn project_weyl(&self, w: &WeylOperator, m: u32) -> StateVector {
        let q = self.q;
        let mut acc = StateVector { q, n: self.n, amps: vec![Complex64::new(0.0, 0.0); self.amps.len()] };
        for j in 0..q {
            let coeff = omega_pow(q, u64::from(q - (u64::from(j) * u64::from(m) % u64::from(q)) as u32)) / f64::from(q);
            acc = acc.add(&self.apply_normalized_weyl(w, j).scaled(coeff));
        }
        acc
    }

    /// Born-rule measurement of the normalised `W`; collapses the state.
    pub fn measure_weyl<R: Rng + ?Sized>(&mut self, w: &WeylOperator, rng: &mut R) -> u32 {
        let branches: Vec<StateVector> = (0..self.q).map(|m| self.project_weyl(w, m)).collect();
        let weights: Vec<f64> = branches.iter().map(|b| b.norm().powi(2)).collect();
        let m = sample(&weights, rng);
        *self = branches.into_iter().nth(m).expect("outcome in range");
        self.normalize();
        m as u32
    }

    /// Unitary `u` (row-major `q×q`) applied to qudit `v`.
    pub fn apply_single(&self, v: usize, u: &[Complex64]) -> StateVector {
        let q = self.q as usize;
        assert_eq!(u.len(), q * q);
        let stride = q.pow((self.n - 1 - v) as u32);
        let mut out = self.amps.clone();
        for base in 0..self.amps.len() {
            if (base / stride) % q != 0 {
                continue;
            }
            for r in 0..q {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..q {
                    acc += u[r * q + c] * self.amps[base + c * stride];
                }
                out[base + r * stride] = acc;
            }
        }
        StateVector { q: self.q, n: self.n, amps: out }
    }

    /// Applies `ops[c]` to the whole register when qudit `control` holds `c`.
    /// The operators must act trivially on `control`.
    pub fn apply_controlled_weyl(&self, control: usize, ops: &[WeylOperator]) -> StateVector {
        let q = self.q as usize;
        assert_eq!(ops.len(), q);
        let stride = q.pow((self.n - 1 - control) as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (c, op) in ops.iter().enumerate() {
            assert!(op.x()[control] == 0 && op.z()[control] == 0, "controlled operator touches its control");
            let mut branch = self.clone();
            for (i, a) in branch.amps.iter_mut().enumerate() {
                if (i / stride) % q != c {
                    *a = Complex64::new(0.0, 0.0);
                }
            }
            let moved = branch.apply_weyl(op);
            for (o, a) in out.iter_mut().zip(&moved.amps) {
                *o += a;
            }
        }
        StateVector { q: self.q, n: self.n, amps: out }
    }

    /// `(⟨bra| ⊗ I)|self⟩` where `bra` lives on `sites` (first listed is most
    /// significant). The result is unnormalised and keeps the other qudits in order.
    pub fn contract(&self, sites: &[usize], bra: &[Complex64]) -> StateVector {
        let q = self.q as usize;
        assert_eq!(bra.len(), q.pow(sites.len() as u32));
        let rest: Vec<usize> = (0..self.n).filter(|v| !sites.contains(v)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); q.pow(rest.len() as u32)];
        let mut digits = vec![0u32; self.n];
        for (index, amp) in self.amps.iter().enumerate() {
            if index > 0 {
                increment(&mut digits, self.q);
            }
            let s = sites.iter().fold(0usize, |acc, &v| acc * q + digits[v] as usize);
            let r = rest.iter().fold(0usize, |acc, &v| acc * q + digits[v] as usize);
            out[r] += bra[s].conj() * amp;
        }
        StateVector { q: self.q, n: rest.len(), amps: out }
    }

    /// Reorders qudits so that new qudit `i` is old qudit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> StateVector {
        assert_eq!(order.len(), self.n);
        let q = self.q as usize;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut digits = vec![0u32; self.n];
        for (index, amp) in self.amps.iter().enumerate() {
            if index > 0 {
                increment(&mut digits, self.q);
            }
            let target = order.iter().fold(0usize, |acc, &v| acc * q + digits[v] as usize);
            out[target] = *amp;
        }
        StateVector { q: self.q, n: self.n, amps: out }
    }
}

pub(crate) fn sample<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub fn encode_index(q: u32, digits: &[u32]) -> usize {
    digits.iter().fold(0usize, |acc, &d| acc * q as usize + (d % q) as usize)
}

pub fn decode_index(q: u32, n: usize, mut index: usize) -> Vec<u32> {
    let mut digits = vec![0u32; n];
    for v in (0..n).rev() {
        digits[v] = (index % q as usize) as u32;
        index /= q as usize;
    }
    digits
}

fn increment(digits: &mut [u32], q: u32) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < q {
            return;
        }
        *d = 0;
    }
}

/// Discrete Fourier matrix `F|j⟩ = q^{-1/2} Σ_k ω^{jk} |k⟩`, row-major.
pub fn fourier(q: u32, inverse: bool) -> Vec<Complex64> {
    let s = 1.0 / f64::from(q).sqrt();
    let mut f = Vec::with_capacity((q * q) as usize);
    for k in 0..q {
        for j in 0..q {
            let e = u64::from(j) * u64::from(k);
            let e = if inverse { u64::from(q) * u64::from(q) - e } else { e };
            f.push(omega_pow(q, e) * s);
        }
    }
    f
}
