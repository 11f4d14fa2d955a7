//! Entropy-based existence thresholds and counting lower bounds on `k/n`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fq::is_prime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("x = {0} outside [0, 1]")]
    Domain(f64),
    #[error("entropy base {0} below 2")]
    Base(f64),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error("root not bracketed for q = {0}")]
    NoBracket(u32),
}

/// `H_b(x) = x·log_b(b−1) − x·log_b x − (1−x)·log_b(1−x)`, continuous at 0 and 1.
pub fn entropy(x: f64, base: f64) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(BoundsError::Domain(x));
    }
    if !(base >= 2.0) {
        return Err(BoundsError::Base(base));
    }
    let ln_b = base.ln();
    let xlogx = |t: f64| if t <= 0.0 { 0.0 } else { t * t.ln() };
    Ok((x * (base - 1.0).ln() - xlogx(x) - xlogx(1.0 - x)) / ln_b)
}

fn h2(x: f64) -> f64 {
    entropy(x.clamp(0.0, 1.0), 2.0).expect("clamped into the domain")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    AsymptoticRoot,
    FiniteN,
    RandomThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub q: u32,
    pub alpha: f64,
    pub method: BoundMethod,
    pub tolerance: f64,
    pub iterations: u32,
}

const MAX_ITERATIONS: u32 = 200;

/// Bisection on `[lo, hi]` where `ok(lo)` is false and `ok(hi)` is true;
/// returns the final `hi` and the iteration count.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, ok: impl Fn(f64) -> bool) -> (f64, u32) {
    debug_assert!(!ok(lo) && ok(hi));
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    (hi, iterations)
}

/// The root finders are numeric in `q` and accept any `q ≥ 2`; curves list primes only.
fn check_q_tol(q: u32, tol: f64) -> Result<(), BoundsError> {
    if q < 2 {
        return Err(BoundsError::Parameters(format!("q = {q} below 2")));
    }
    if !(tol > 0.0) {
        return Err(BoundsError::Tolerance(tol));
    }
    Ok(())
}

/// Does `alpha` satisfy `H_{q²}(1 − alpha) < 1/2`?
pub fn random_threshold_holds(q: u32, alpha: f64) -> bool {
    let b = f64::from(q) * f64::from(q);
    entropy((1.0 - alpha).clamp(0.0, 1.0), b).expect("valid base") < 0.5
}

/// Smallest `alpha ∈ [0.5, 1]` with `H_{q²}(1 − alpha) < 1/2`, to within `tol`.
pub fn random_threshold_alpha(q: u32, tol: f64) -> Result<BoundResult, BoundsError> {
    check_q_tol(q, tol)?;
    if random_threshold_holds(q, 0.5) {
        return Err(BoundsError::NoBracket(q));
    }
    let (alpha, iterations) = bisect(0.5, 1.0, tol, |a| random_threshold_holds(q, a));
    Ok(BoundResult { q, alpha, method: BoundMethod::RandomThreshold, tolerance: tol, iterations })
}

/// `H₂((αq+1)/(q+1)) + α·H₂((1−α)/α) − H₂(α)`; schemes need this to be `≥ 0`.
pub fn asymptotic_margin(q: u32, alpha: f64) -> f64 {
    let qf = f64::from(q);
    h2((alpha * qf + 1.0) / (qf + 1.0)) + alpha * h2((1.0 - alpha) / alpha) - h2(alpha)
}

/// Smallest `alpha > 0.5` with a nonnegative asymptotic margin, to within `tol`.
pub fn asymptotic_lower_bound(q: u32, tol: f64) -> Result<BoundResult, BoundsError> {
    check_q_tol(q, tol)?;
    let ok = |a: f64| asymptotic_margin(q, a) >= 0.0;
    if ok(0.5) {
        return Err(BoundsError::NoBracket(q));
    }
    let hi = (1..=100).map(|i| 0.5 + 0.005 * f64::from(i)).find(|&a| ok(a)).ok_or(BoundsError::NoBracket(q))?;
    let (alpha, iterations) = bisect(hi - 0.005, hi, tol, ok);
    Ok(BoundResult { q, alpha, method: BoundMethod::AsymptoticRoot, tolerance: tol, iterations })
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `⌈(n − k)·q / (q + 1)⌉`, the rounded support size in the counting bound.
pub fn support_parameter(n: u64, k: u64, q: u32) -> u64 {
    let num = (n - k) * u64::from(q);
    let den = u64::from(q) + 1;
    num.div_ceil(den)
}

/// Exact test of
/// `C(n, m)·C(k, 2k−n)·2n² ≥ (2k−n)(n−k)·C(n, k)` with `m = ⌈(n−k)q/(q+1)⌉`,
/// the integer form of the counting bound at `alpha = k/n`.
pub fn finite_inequality_holds(n: u64, k: u64, q: u32) -> bool {
    if 2 * k <= n || k >= n {
        return true;
    }
    let m = support_parameter(n, k, q);
    let left = binomial(n, m) * binomial(k, 2 * k - n) * BigUint::from(2 * n * n);
    let right = BigUint::from((2 * k - n) * (n - k)) * binomial(n, k);
    left >= right
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteBound {
    pub n: u64,
    pub q: u32,
    /// Largest `k` whose ratio `k/n` violates the counting inequality.
    pub max_ruled_out: Option<u64>,
    /// Largest `k` excluded by no-cloning alone (`k ≤ n/2`).
    pub no_cloning_max: u64,
    pub effective_max_ruled_out: u64,
    pub formula: String,
}

pub fn finite_lower_bound(n: u64, q: u32) -> Result<FiniteBound, BoundsError> {
    if n < 2 {
        return Err(BoundsError::Parameters(format!("n = {n} below 2")));
    }
    if !is_prime(q) {
        return Err(BoundsError::NotPrime(q));
    }
    let max_ruled_out = (n / 2 + 1..=n).rev().find(|&k| !finite_inequality_holds(n, k, q));
    let no_cloning_max = n / 2;
    Ok(FiniteBound {
        n,
        q,
        max_ruled_out,
        no_cloning_max,
        effective_max_ruled_out: max_ruled_out.unwrap_or(0).max(no_cloning_max),
        formula: "C(n, ceil((n-k)q/(q+1))) * C(k, 2k-n) * 2n^2 >= (2k-n)(n-k) * C(n, k)".into(),
    })
}

/// Exact evaluation of the intermediate steps behind the counting bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofChainCheck {
    pub n: u64,
    pub q: u32,
    pub k: u64,
    pub m: u64,
    /// `Σ_{i=1}^{m−1} C(n−1, i) ≤ (n+kq)/(q(2k−n)) · C(n−1, m−1)`.
    pub tail_bound: bool,
    /// `(n+kq)/(q(2k−n))·C(n−1,m−1) = (n−k)(n+kq)/(n(2k−n)(q+1))·C(n,m)`.
    pub rewrite_identity: bool,
    /// `C(n,k)/C(k,2k−n) = kn/(n−k)² · C(n−1,k)/C(k−1,2k−n)`.
    pub ratio_identity: bool,
    /// `C(n−1,k) ≤ C(k−1,2k−n)·Σ_{i=1}^{m−1} C(n−1,i)`.
    pub counting_condition: bool,
    pub final_statement: bool,
}

impl ProofChainCheck {
    pub fn consistent(&self) -> bool {
        self.tail_bound && self.rewrite_identity && self.ratio_identity && (!self.counting_condition || self.final_statement)
    }
}

pub fn proof_chain_check(n: u64, k: u64, q: u32) -> Result<ProofChainCheck, BoundsError> {
    if !(2 * k > n && k < n) {
        return Err(BoundsError::Parameters(format!("need n/2 < k < n, got n = {n}, k = {k}")));
    }
    let m = support_parameter(n, k, q).max(1);
    let qb = u64::from(q);
    let j = 2 * k - n;
    let big = |x: u64| BigUint::from(x);
    let tail: BigUint = (1..m).map(|i| binomial(n - 1, i)).sum();
    let tail_bound = tail.clone() * big(qb * j) <= big(n + k * qb) * binomial(n - 1, m - 1);
    let rewrite_identity = big(n + k * qb) * binomial(n - 1, m - 1) * big(n * j * (qb + 1)) == big((n - k) * (n + k * qb)) * binomial(n, m) * big(qb * j);
    let ratio_identity = binomial(n, k) * binomial(k - 1, j) * big((n - k) * (n - k)) == big(k * n) * binomial(n - 1, k) * binomial(k, j);
    let counting_condition = binomial(n - 1, k) <= binomial(k - 1, j) * tail;
    let check = ProofChainCheck {
        n,
        q,
        k,
        m,
        tail_bound,
        rewrite_identity,
        ratio_identity,
        counting_condition,
        final_statement: finite_inequality_holds(n, k, q),
    };
    if !check.consistent() {
        log::warn!("counting-bound chain inconsistent at n={n} k={k} q={q}: {check:?}");
    }
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub q: u32,
    pub alpha_lower: f64,
    pub alpha_random_threshold: f64,
}

/// Rows for primes `q_min, q_min+step, … ≤ q_max`, ascending.
pub fn curve(q_min: u32, q_max: u32, step: u32, tol: f64) -> Result<Vec<CurveRow>, BoundsError> {
    if step == 0 {
        return Err(BoundsError::Parameters("step must be positive".into()));
    }
    let qs: Vec<u32> = (q_min..=q_max).step_by(step as usize).filter(|&q| is_prime(q)).collect();
    qs.par_iter()
        .map(|&q| {
            Ok(CurveRow {
                q,
                alpha_lower: asymptotic_lower_bound(q, tol)?.alpha,
                alpha_random_threshold: random_threshold_alpha(q, tol)?.alpha,
            })
        })
        .collect()
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("q,alpha_lower,alpha_random_threshold\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.10},{:.10}", r.q, r.alpha_lower, r.alpha_random_threshold);
    }
    s
}

pub fn emit_curve(q_min: u32, q_max: u32, step: u32, tol: f64, out: &mut impl std::io::Write) -> Result<Vec<CurveRow>, std::io::Error> {
    let rows = curve(q_min, q_max, step, tol).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    out.write_all(curve_csv(&rows).as_bytes())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert!((entropy(0.5, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(entropy(0.0, 5.0).unwrap(), 0.0);
        assert!((entropy(1.0, 5.0).unwrap() - 4f64.ln() / 5f64.ln()).abs() < 1e-12);
        assert!((entropy(0.75, 4.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(entropy(1.5, 2.0).is_err());
        assert!(entropy(0.5, 1.5).is_err());
    }

    /// Grid scan for the first point satisfying `ok`.
    fn grid_root(lo: f64, hi: f64, step: f64, ok: impl Fn(f64) -> bool) -> f64 {
        let steps = ((hi - lo) / step).round() as u64;
        (0..=steps).map(|i| lo + step * i as f64).find(|&a| ok(a)).unwrap()
    }

    #[test]
    fn random_threshold_matches_grid() {
        let tol = 1e-8;
        let r = random_threshold_alpha(2, tol).unwrap();
        let grid = grid_root(0.5, 1.0, 1e-6, |a| random_threshold_holds(2, a));
        assert!((r.alpha - grid).abs() < 1e-6 + 2.0 * tol, "{} vs {grid}", r.alpha);
        assert!(random_threshold_holds(2, r.alpha));
        assert!(!random_threshold_holds(2, r.alpha - tol));
        let values: Vec<f64> = [2, 3, 5, 7, 11].iter().map(|&q| random_threshold_alpha(q, tol).unwrap().alpha).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        assert!(random_threshold_alpha(1009, tol).unwrap().alpha < values[4]);
    }

    #[test]
    fn asymptotic_root_values() {
        let tol = 1e-8;
        let a2 = asymptotic_lower_bound(2, tol).unwrap().alpha;
        let grid = grid_root(0.5, 0.51, 1e-8, |a| asymptotic_margin(2, a) >= 0.0);
        assert!((a2 - grid).abs() <= 2e-8, "{a2} vs {grid}");
        assert!((0.505..=0.507).contains(&a2));
        assert!((asymptotic_lower_bound(30, tol).unwrap().alpha - 0.5).abs() < 0.0005 + 1e-12);
        let qs = [2, 3, 5, 7, 11, 13];
        let values: Vec<f64> = qs.iter().map(|&q| asymptotic_lower_bound(q, tol).unwrap().alpha).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0] && w[1] > 0.5));
        for &q in &qs {
            assert!(asymptotic_lower_bound(q, tol).unwrap().alpha < random_threshold_alpha(q, tol).unwrap().alpha);
        }
    }

    #[test]
    fn bisection_is_cauchy() {
        for q in [2, 3, 7] {
            for tol in [1e-4, 1e-6] {
                let a = asymptotic_lower_bound(q, tol).unwrap().alpha;
                let b = asymptotic_lower_bound(q, tol / 10.0).unwrap().alpha;
                assert!((a - b).abs() < tol);
                let a = random_threshold_alpha(q, tol).unwrap().alpha;
                let b = random_threshold_alpha(q, tol / 10.0).unwrap().alpha;
                assert!((a - b).abs() < tol);
            }
        }
    }

    #[test]
    fn finite_bound_examples() {
        let b = finite_lower_bound(7, 7).unwrap();
        assert!(b.max_ruled_out.is_none_or(|k| k < 4));
        assert!(finite_inequality_holds(7, 4, 7));
        for n in 2..60 {
            assert!(finite_inequality_holds(n, n, 2));
        }
        let b = finite_lower_bound(400, 2).unwrap();
        let ratio = b.effective_max_ruled_out as f64 / 400.0;
        let asym = asymptotic_lower_bound(2, 1e-8).unwrap().alpha;
        assert!((ratio - asym).abs() < 0.02, "{ratio} vs {asym}");
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(5, 7), BigUint::from(0u32));
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn curve_format() {
        let rows = curve(2, 31, 1, 1e-8).unwrap();
        assert_eq!(rows.iter().map(|r| r.q).collect::<Vec<_>>(), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]);
        let csv = curve_csv(&rows);
        assert!(csv.starts_with("q,alpha_lower,alpha_random_threshold\n"));
        assert!((rows[0].alpha_lower - 0.506).abs() < 0.001);
    }

    #[test]
    fn proof_chain_identities() {
        let c = proof_chain_check(100, 70, 3).unwrap();
        assert!(c.tail_bound);
        assert!(proof_chain_check(10, 5, 3).is_err());
    }

    proptest! {
        #[test]
        fn binary_entropy_is_symmetric(x in 0.0f64..=1.0) {
            prop_assert!((entropy(x, 2.0).unwrap() - entropy(1.0 - x, 2.0).unwrap()).abs() < 1e-12);
        }
    }
}
