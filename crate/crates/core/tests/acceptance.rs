//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process exits nonzero if any fail.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use qss_core::access::{
    classify, cutrank, dealer_kernel_witness, in_dealer_kernel, quantum_derivative, verify_witness_c, verify_witness_d, witness_c, witness_d, complement_witness_c,
    CutRankEngine, QuantumAccess,
};
use qss_core::bounds::{asymptotic_lower_bound, asymptotic_margin, curve, finite_lower_bound, random_threshold_alpha};
use qss_core::multigraph::{rs747, star3, Multigraph};
use qss_core::oracle::{Oracle, Variant, WeylOperator};
use qss_core::search::{exhaustive_search, random_scan, random_trials, scheme_k, subsets_of_size, SearchConfig, SearchStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn random_secret<R: Rng>(q: u32, rng: &mut R) -> Vec<Complex64> {
    let mut s: Vec<Complex64> = (0..q).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let n = s.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    s.iter_mut().for_each(|a| *a /= n);
    s
}

fn random_subset<R: Rng>(n: usize, exclude: usize, rng: &mut R) -> Vec<usize> {
    (0..n).filter(|&v| v != exclude && rng.gen_bool(0.5)).collect()
}

fn fixture_thresholds() -> Verdict {
    let start = Instant::now();
    let dg = rs747();
    let mut engine = CutRankEngine::new(&dg.graph).unwrap();
    let players = dg.players();
    let fours: Vec<u64> = subsets_of_size(&players, 4).collect();
    let four_ok = fours.len() == 35 && fours.iter().all(|&m| engine.derivative(0, m) == -1);
    let small: Vec<u64> = (1..=3).flat_map(|s| subsets_of_size(&players, s).collect::<Vec<_>>()).collect();
    let small_ok = small.len() == 63 && small.iter().all(|&m| engine.derivative(0, m) >= 0);
    let k = scheme_k(&dg).unwrap().k;
    let elapsed = start.elapsed();
    verdict(
        four_ok && small_ok && k == 4 && elapsed < Duration::from_secs(1),
        format!("35 four-sets decode: {four_ok}; 63 sets of size <= 3 do not: {small_ok}; scheme_k = {k}; {elapsed:.2?}"),
    )
}

fn perfectness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for q in [2u32, 3, 5, 7] {
        for _ in 0..500 {
            let n = rng.gen_range(2..=8);
            let g = Multigraph::random_with(n, q, &mut rng).unwrap();
            let d = rng.gen_range(0..n);
            let b = random_subset(n, d, &mut rng);
            let wd = witness_d(&g, d, &b).unwrap();
            let wc = witness_c(&g, d, &b).unwrap();
            let ok = match (&wd, &wc) {
                (Some(x), None) => verify_witness_d(&g, d, &b, x).unwrap(),
                (None, Some(c)) => verify_witness_c(&g, d, &b, c).unwrap(),
                _ => false,
            };
            bad += usize::from(!ok);
        }
    }
    let elapsed = start.elapsed();
    verdict(bad == 0 && elapsed < Duration::from_secs(30), format!("2000 instances, {bad} without exactly one verified witness; {elapsed:.2?}"))
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let o = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plan = [(2u32, 5usize, 80), (3, 5, 80), (5, 4, 40)];
    let (mut graphs, mut instances, mut mismatches) = (0, 0, 0);
    for (q, n, count) in plan {
        for _ in 0..count {
            let g = Multigraph::random_with(n, q, &mut rng).unwrap();
            graphs += 1;
            for d in (0..n).filter(|&d| !g.is_isolated(d)) {
                let others: Vec<usize> = (0..n).filter(|&v| v != d).collect();
                for mask in 0u32..(1 << others.len()) {
                    let b: Vec<usize> = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
                    let report = o.verify(&g, d, &b).unwrap();
                    instances += 1;
                    if !report.agrees() {
                        mismatches += 1;
                        eprintln!("  mismatch: {}", serde_json::to_string(&report).unwrap());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < Duration::from_secs(600),
        format!("{graphs} graphs, {instances} (d, B) instances, {mismatches} disagreements; {elapsed:.2?}"),
    )
}

fn stabilizer_fixpoint() -> Verdict {
    let o = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let q = [2u32, 3, 5][rng.gen_range(0..3)];
        let n = rng.gen_range(1..=5);
        let g = Multigraph::random_with(n, q, &mut rng).unwrap();
        worst = worst.max(o.stabilizer_defect(&g).unwrap());
    }
    verdict(worst < 1e-9, format!("100 graphs, worst generator defect {worst:.2e}"))
}

fn mutual_information(pairs: &[(u32, u32)], q: u32) -> f64 {
    let n = pairs.len() as f64;
    let q = q as usize;
    let mut joint = vec![0.0; q * q];
    for &(a, b) in pairs {
        joint[a as usize * q + b as usize] += 1.0 / n;
    }
    let pa: Vec<f64> = (0..q).map(|a| (0..q).map(|b| joint[a * q + b]).sum()).collect();
    let pb: Vec<f64> = (0..q).map(|b| (0..q).map(|a| joint[a * q + b]).sum()).collect();
    let mut mi = 0.0;
    for a in 0..q {
        for b in 0..q {
            let p = joint[a * q + b];
            if p > 0.0 {
                mi += p * (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    mi
}

fn cq_contract() -> Verdict {
    let o = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut rounds, mut wrong) = (0, 0);
    let mut worst_mi = 0.0f64;
    for q in [3u32, 5] {
        let (mut accessible, mut silent) = (0, 0);
        while accessible < 3 || silent < 2 {
            let g = Multigraph::random_with(4, q, &mut rng).unwrap();
            if g.is_isolated(0) {
                continue;
            }
            let b = random_subset(4, 0, &mut rng);
            match classify(&g, 0, &b).unwrap().quantum {
                QuantumAccess::Accessible if accessible < 3 => {
                    accessible += 1;
                    for t in 0..q {
                        for _ in 0..100 {
                            let r = o.cq_round(&g, 0, &b, t, &mut rng).unwrap();
                            rounds += 1;
                            wrong += usize::from(r.reconstructed != r.dealer);
                        }
                    }
                }
                QuantumAccess::NoInfo if silent < 2 && !b.is_empty() => {
                    silent += 1;
                    // players measure Z on every qudit and guess minus the sum
                    let ops: Vec<(usize, WeylOperator)> = b.iter().map(|&v| (v, WeylOperator::new(q, vec![0], vec![1], 0))).collect();
                    for t in 0..q {
                        let pairs: Vec<(u32, u32)> = (0..500)
                            .map(|_| {
                                let (s, m) = o.measure_round(&g, 0, t, &ops, &mut rng).unwrap();
                                (s, (q - m.iter().sum::<u32>() % q) % q)
                            })
                            .collect();
                        worst_mi = worst_mi.max(mutual_information(&pairs, q));
                    }
                }
                _ => {}
            }
        }
    }
    verdict(wrong == 0 && worst_mi < 0.05, format!("{rounds} rounds, {wrong} with m != s; worst unauthorised mutual information {worst_mi:.4} bits over 500 rounds"))
}

fn local_complementation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for _ in 0..1000 {
        let q = [2u32, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(2..=8);
        let g = Multigraph::random_with(n, q, &mut rng).unwrap();
        let u = rng.gen_range(0..n);
        let lambda = rng.gen_range(1..q);
        let b: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let h = g.local_complement(u, lambda).unwrap();
        bad += usize::from(cutrank(&g, &b).unwrap() != cutrank(&h, &b).unwrap());
    }
    verdict(bad == 0, format!("1000 instances, {bad} cut-rank changes"))
}

fn derivative_monotone() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut out_of_range, mut increases) = (0, 0);
    for _ in 0..1000 {
        let q = [2u32, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(2..=8);
        let g = Multigraph::random_with(n, q, &mut rng).unwrap();
        let d = rng.gen_range(0..n);
        let big = random_subset(n, d, &mut rng);
        let small: Vec<usize> = big.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let (ds, db) = (quantum_derivative(&g, d, &small).unwrap(), quantum_derivative(&g, d, &big).unwrap());
        out_of_range += usize::from(!(-1..=1).contains(&ds)) + usize::from(!(-1..=1).contains(&db));
        increases += usize::from(ds < db);
    }
    verdict(out_of_range == 0 && increases == 0, format!("1000 nested pairs, {out_of_range} out of range, {increases} increases"))
}

fn kernel_witness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut cases, mut outside, mut over_bound, mut over_relaxed) = (0, 0, 0, 0);
    let mut example = String::new();
    while cases < 300 {
        let q = [2u32, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(3..=8);
        let g = Multigraph::random_with(n, q, &mut rng).unwrap();
        let b = random_subset(n, 0, &mut rng);
        if quantum_derivative(&g, 0, &b).unwrap() != -1 {
            continue;
        }
        cases += 1;
        let w = dealer_kernel_witness(&g, 0, &b).unwrap();
        outside += usize::from(!in_dealer_kernel(&g, 0, &b, &w.c).unwrap());
        over_relaxed += usize::from(!w.relaxed_bound_holds);
        if !w.strict_bound_holds {
            over_bound += 1;
            if example.is_empty() {
                example = format!(" (first: q={q}, B={b:?}, |sup C|={}, cutrk={})", w.support, w.cutrank);
            }
        }
    }
    verdict(outside == 0 && over_bound == 0, format!("{cases} instances with derivative -1: {outside} outside S_d(B), {over_bound} with |sup C|·(q+1) >= q·cutrk(B){example}; relaxed bound q·(cutrk+1) fails on {over_relaxed}"))
}

fn bounds() -> Verdict {
    let tol = 1e-8;
    let root = asymptotic_lower_bound(2, tol).unwrap().alpha;
    // independent grid scan at the tolerance step
    let steps = ((0.51 - 0.5) / tol) as u64;
    let grid = (0..=steps).map(|i| 0.5 + i as f64 * tol).find(|&a| a > 0.5 && asymptotic_margin(2, a) >= 0.0).unwrap_or(f64::NAN);
    let agree = (root - grid).abs() <= 2.0 * tol;
    let rows = curve(2, 60, 1, tol).unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].alpha_lower < w[0].alpha_lower);
    let fb = finite_lower_bound(7, 7).unwrap();
    let k4_open = fb.max_ruled_out.is_none_or(|k| k < 4);
    verdict(
        (0.505..=0.507).contains(&root) && agree && decreasing && k4_open,
        format!("q=2 root {root:.10} (grid {grid:.10}); curve over {} primes strictly decreasing: {decreasing}; n=7 q=7 leaves k=4 open: {k4_open}", rows.len()),
    )
}

fn random_existence() -> Verdict {
    let threshold = random_threshold_alpha(5, 1e-8).unwrap().alpha;
    let alpha = (threshold + 0.05).min(0.99);
    let rates: Vec<(usize, f64)> = [9usize, 11, 13].iter().map(|&n| (n, random_trials(n, 5, alpha, 200, 10).unwrap().success_rate.unwrap())).collect();
    let ok = rates.windows(2).all(|w| {
        let (p0, p1) = (w[0].1, w[1].1);
        let band = 2.0 * ((p0 * (1.0 - p0) + p1 * (1.0 - p1)) / 200.0).sqrt();
        p1 >= p0 - band
    });
    let shown: Vec<String> = rates.iter().map(|(n, r)| format!("n={n}: {r:.3}")).collect();
    verdict(ok, format!("alpha={alpha:.4} (threshold {threshold:.4}); success rates {}", shown.join(", ")))
}

fn small_exhaustive() -> Verdict {
    let config = SearchConfig { n: 4, q: 2, k: 2, dealer_fixed: false, budget: 1 << 20, workers: 1 };
    let outcome = exhaustive_search(&config, None).unwrap();
    let exhausted = outcome.status == SearchStatus::ExhaustedNone && outcome.total == 64;
    // oracle cross-check: no graph and dealer lets every pair decode
    let o = Oracle::default();
    let mut oracle_hits = 0;
    for idx in 0..64u64 {
        let g = qss_core::search::graph_at(4, 2, idx).unwrap();
        for d in (0..4).filter(|&d| !g.is_isolated(d)) {
            let players: Vec<usize> = (0..4).filter(|&v| v != d).collect();
            let pairs_ok = subsets_of_size(&players, 2).all(|m| {
                let b: Vec<usize> = (0..4).filter(|v| m >> v & 1 == 1).collect();
                o.quantum_check(&g, d, &b).unwrap().verdict() == QuantumAccess::Accessible
            });
            oracle_hits += usize::from(pairs_ok);
        }
    }
    let start = Instant::now();
    let scan = random_scan(8, 3, 4, 1_000_000, 11).unwrap();
    let elapsed = start.elapsed();
    verdict(
        exhausted && oracle_hits == 0,
        format!(
            "q=2 n=4 k=2: {:?} over {} graphs, oracle finds {oracle_hits}; q=3 n=8 k=4 scan: found={} ({}, {elapsed:.1?})",
            outcome.status,
            outcome.total,
            scan.found.is_some(),
            scan.interpretation
        ),
    )
}

fn appendix_variants() -> Verdict {
    let o = Oracle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let piece = rs747().graph.subgraph_on(&[0, 4, 5, 1, 2]);
    let fixtures = [("star", star3().graph), ("rs piece", piece)];
    let mut worst = 1.0f64;
    for (_, g) in &fixtures {
        let q = g.q();
        let b = (1u32..16)
            .map(|m| (1..g.order()).filter(|v| m >> (v - 1) & 1 == 1).collect::<Vec<_>>())
            .find(|b| classify(g, 0, b).unwrap().quantum == QuantumAccess::Accessible)
            .expect("an authorised set");
        let dw = witness_d(g, 0, &b).unwrap().unwrap();
        let cw = complement_witness_c(g, 0, &b).unwrap().unwrap();
        for _ in 0..20 {
            let s = random_secret(q, &mut rng);
            let outs: Vec<_> = [Variant::E1, Variant::E2, Variant::E3].iter().map(|&v| o.encode_variant(g, 0, v, &s).unwrap()).collect();
            for a in &outs {
                worst = worst.min(a.fidelity);
                for c in &outs {
                    worst = worst.min(a.output.fidelity(&c.output));
                }
            }
            let enc = o.qq_encode(g, 0, &s).unwrap();
            for v in [Variant::D2, Variant::D3] {
                worst = worst.min(o.decode_variant(g, 0, &b, &dw, &cw, v, &enc, &s).unwrap().fidelity);
            }
        }
    }
    verdict(worst >= 1.0 - 1e-9, format!("star and rs piece, 20 secrets each: worst fidelity {worst:.12}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("fixture thresholds", fixture_thresholds),
        ("perfectness", perfectness),
        ("graph/oracle equivalence", oracle_equivalence),
        ("stabilizer fixpoint", stabilizer_fixpoint),
        ("CQ round contract", cq_contract),
        ("cut rank under local complementation", local_complementation),
        ("derivative range and monotonicity", derivative_monotone),
        ("dealer-kernel witness", kernel_witness),
        ("bounds", bounds),
        ("random existence trend", random_existence),
        ("exhaustive substitute", small_exhaustive),
        ("encoding/decoding variants", appendix_variants),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failures += usize::from(!v.pass);
        println!("criterion {:>2} [{}] {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
