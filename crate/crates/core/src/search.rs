//! Threshold parameters of dealer graphs and searches over graph space.
//!
//! Player counts exclude the dealer: an order-`n` graph shares among `n − 1`
//! players. A graph realises a `((k, m))` scheme when every `k` of its `m`
//! players can recover a quantum secret and some `k − 1` of them cannot.
//! [`scheme_k`] reports that tight `k`; [`is_scheme`] insists on tightness.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::access::{vertices_of, AccessError, CutRankEngine};
use crate::multigraph::{DealerGraph, GraphError, Multigraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Colex-ordered `size`-subsets of `players`, as vertex bitmasks.
pub fn subsets_of_size(players: &[usize], size: usize) -> impl Iterator<Item = u64> + '_ {
    let m = players.len();
    let mut state = if size > m { None } else { Some(if size == 0 { 0u64 } else { (1u64 << size) - 1 }) };
    std::iter::from_fn(move || {
        let x = state?;
        state = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            let next = (((r ^ x) >> 2) / c) | r;
            (next < 1u64 << m).then_some(next)
        };
        let mut mask = 0u64;
        let mut bits = x;
        while bits != 0 {
            mask |= 1u64 << players[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        Some(mask)
    })
}

fn players_of(n: usize, dealer: usize) -> Vec<usize> {
    (0..n).filter(|&v| v != dealer).collect()
}

/// First `size`-set of players without quantum access, if any.
pub fn first_unauthorized(engine: &mut CutRankEngine, dealer: usize, size: usize) -> Option<u64> {
    let players = players_of(engine.order(), dealer);
    let found = subsets_of_size(&players, size).find(|&b| engine.derivative(dealer, b) != -1);
    found
}

/// First `size`-set of players with quantum access, if any.
pub fn first_authorized(engine: &mut CutRankEngine, dealer: usize, size: usize) -> Option<u64> {
    let players = players_of(engine.order(), dealer);
    let found = subsets_of_size(&players, size).find(|&b| engine.derivative(dealer, b) == -1);
    found
}

/// Tight scheme test on a prepared engine: all `k`-sets access, some `(k−1)`-set does not.
pub fn realises(engine: &mut CutRankEngine, dealer: usize, k: usize) -> bool {
    k >= 1 && first_unauthorized(engine, dealer, k).is_none() && first_unauthorized(engine, dealer, k - 1).is_some()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub k: usize,
    pub n_players: usize,
    pub order: usize,
    /// A largest set without quantum access (size `k − 1`).
    pub worst_unauthorized: Vec<usize>,
    pub all_accessible_at_k: bool,
    /// `⌈(n_players + 1) / 2⌉`, the no-cloning minimum for `k`.
    pub no_cloning_floor: usize,
}

/// Exact threshold by increasing-size scan; supersets of accessible sets are skipped.
pub fn scheme_k(dg: &DealerGraph) -> Result<SchemeReport, SearchError> {
    if dg.graph.is_isolated(dg.dealer) {
        return Err(GraphError::IsolatedDealer(dg.dealer).into());
    }
    let mut engine = CutRankEngine::new(&dg.graph)?;
    let d = dg.dealer;
    let players = dg.players();
    let m = players.len();
    let mut accessible_prev: HashSet<u64> = HashSet::new();
    let mut worst = 0u64;
    for size in 0..=m {
        let mut accessible_here = HashSet::new();
        let mut unauthorized = None;
        for b in subsets_of_size(&players, size) {
            let mut bits = b;
            let mut inherited = false;
            while bits != 0 {
                let low = bits & bits.wrapping_neg();
                bits ^= low;
                if accessible_prev.contains(&(b ^ low)) {
                    inherited = true;
                    break;
                }
            }
            if inherited || engine.derivative(d, b) == -1 {
                accessible_here.insert(b);
            } else if unauthorized.is_none() {
                unauthorized = Some(b);
            }
        }
        match unauthorized {
            Some(b) => worst = b,
            None => {
                return Ok(SchemeReport {
                    k: size,
                    n_players: m,
                    order: dg.graph.order(),
                    worst_unauthorized: vertices_of(worst),
                    all_accessible_at_k: true,
                    no_cloning_floor: (m + 2) / 2,
                });
            }
        }
        accessible_prev = accessible_here;
    }
    Err(SearchError::Precondition("the full player set has no quantum access".into()))
}

/// Unpruned reference scan: one more than the largest unauthorized set size.
pub fn scheme_k_naive(dg: &DealerGraph) -> Result<usize, SearchError> {
    let mut engine = CutRankEngine::new(&dg.graph)?;
    let players = dg.players();
    let mut largest: Option<usize> = None;
    for mask in 0u64..1 << players.len() {
        let b = (0..players.len()).filter(|&i| mask >> i & 1 == 1).fold(0u64, |acc, i| acc | 1 << players[i]);
        if engine.derivative(dg.dealer, b) != -1 {
            let size = mask.count_ones() as usize;
            largest = Some(largest.map_or(size, |l| l.max(size)));
        }
    }
    Ok(largest.map_or(0, |l| l + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SchemeCheck {
    Holds { unauthorized_example: Vec<usize> },
    NotAllAccessible { counterexample: Vec<usize> },
    NotMinimal { accessible_smaller: Vec<usize> },
}

impl SchemeCheck {
    pub fn holds(&self) -> bool {
        matches!(self, SchemeCheck::Holds { .. })
    }

    pub fn counterexample(&self) -> Option<&[usize]> {
        match self {
            SchemeCheck::Holds { .. } => None,
            SchemeCheck::NotAllAccessible { counterexample } => Some(counterexample),
            SchemeCheck::NotMinimal { accessible_smaller } => Some(accessible_smaller),
        }
    }
}

pub fn is_scheme(dg: &DealerGraph, k: usize) -> Result<SchemeCheck, SearchError> {
    let m = dg.n_players();
    if k == 0 || k > m {
        return Err(SearchError::Precondition(format!("k = {k} outside 1..={m}")));
    }
    let mut engine = CutRankEngine::new(&dg.graph)?;
    if let Some(b) = first_unauthorized(&mut engine, dg.dealer, k) {
        return Ok(SchemeCheck::NotAllAccessible { counterexample: vertices_of(b) });
    }
    match first_unauthorized(&mut engine, dg.dealer, k - 1) {
        Some(b) => Ok(SchemeCheck::Holds { unauthorized_example: vertices_of(b) }),
        None => {
            let b = first_authorized(&mut engine, dg.dealer, k - 1).expect("all (k-1)-sets are accessible");
            Ok(SchemeCheck::NotMinimal { accessible_smaller: vertices_of(b) })
        }
    }
}

/// `⌈alpha · m⌉`, tolerant of representation error in `alpha`.
pub fn threshold_for(alpha: f64, m: usize) -> usize {
    (alpha * m as f64 - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub q: u32,
    pub n: usize,
    pub alpha: f64,
    pub k: usize,
    pub n_players: usize,
    pub trials: u64,
    pub successes: u64,
    pub seed: u64,
    pub success_rate: Option<f64>,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples order-`n` random graphs with dealer 0 and counts those where every
/// set of `⌈alpha·(n−1)⌉` players can recover a quantum secret.
pub fn random_trials(n: usize, q: u32, alpha: f64, trials: u64, seed: u64) -> Result<TrialSummary, SearchError> {
    if n < 2 {
        return Err(SearchError::Precondition("order must be at least 2".into()));
    }
    let m = n - 1;
    let k = threshold_for(alpha, m);
    if k > m {
        return Err(SearchError::Precondition(format!("k = {k} exceeds the {m} players")));
    }
    Multigraph::empty(q, n)?;
    let successes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = Multigraph::random_with(n, q, &mut trial_rng(seed, t)).expect("validated parameters");
            if g.is_isolated(0) {
                return 0u64;
            }
            let mut engine = CutRankEngine::new(&g).expect("order checked");
            u64::from(first_unauthorized(&mut engine, 0, k).is_none())
        })
        .sum();
    Ok(TrialSummary {
        q,
        n,
        alpha,
        k,
        n_players: m,
        trials,
        successes,
        seed,
        success_rate: (trials > 0).then(|| successes as f64 / trials as f64),
    })
}

/// Checks the local expansion condition: every nonzero `C` with
/// `|sup C| ≤ ⌊(1−alpha)·n⌋` has `|sup C ∪ sup Γ.C| > (1−alpha)·n`.
///
/// A `true` answer implies every set of at least `alpha·n` vertices
/// (dealer excluded) has quantum access; `false` implies nothing.
pub fn sufficient_condition_check(g: &Multigraph, alpha: f64, budget: u64) -> Result<bool, SearchError> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(SearchError::Precondition(format!("alpha = {alpha} outside [0.5, 1]")));
    }
    let n = g.order();
    let limit = (1.0 - alpha) * n as f64;
    let max_support = (limit + 1e-9).floor() as usize;
    let q = u64::from(g.q());
    // count multisets up to scaling (leading nonzero entry fixed to 1)
    let mut count = 0u64;
    for j in 1..=max_support {
        let ways = binomial(n as u64, j as u64).saturating_mul(q.saturating_sub(1).saturating_pow(j as u32 - 1));
        count = count.saturating_add(ways);
    }
    if count > budget {
        return Err(SearchError::Budget(format!("{count} multisets exceed the budget of {budget}")));
    }
    let f = g.field();
    let everyone: Vec<usize> = (0..n).collect();
    for j in 1..=max_support {
        for mask in subsets_of_size(&everyone, j) {
            let support = vertices_of(mask);
            let free = j - 1;
            for code in 0..(q - 1).pow(free as u32) {
                let mut c = vec![0u32; n];
                c[support[0]] = 1;
                let mut rest = code;
                for &v in &support[1..] {
                    c[v] = (rest % (q - 1)) as u32 + 1;
                    rest /= q - 1;
                }
                let mut covered = mask;
                for v in 0..n {
                    let s = support.iter().fold(0u32, |acc, &u| f.add(acc, f.mul(g.weight(u, v), c[u])));
                    if s != 0 {
                        covered |= 1u64 << v;
                    }
                }
                if (covered.count_ones() as f64) <= limit + 1e-9 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub n: usize,
    pub q: u32,
    pub k: usize,
    pub samples: u64,
    pub seed: u64,
    pub found: Option<String>,
    /// Sampling can only exhibit a scheme, never rule one out.
    pub interpretation: String,
}

/// Samples random graphs (dealer 0) looking for a tight `((k, n−1))` scheme.
pub fn random_scan(n: usize, q: u32, k: usize, samples: u64, seed: u64) -> Result<ScanReport, SearchError> {
    if n < 2 || k == 0 || k >= n {
        return Err(SearchError::Precondition(format!("need 1 <= k <= n - 1, got k = {k}, n = {n}")));
    }
    Multigraph::empty(q, n)?;
    let found = (0..samples).into_par_iter().find_first(|&t| {
        let g = Multigraph::random_with(n, q, &mut trial_rng(seed, t)).expect("validated parameters");
        !g.is_isolated(0) && realises(&mut CutRankEngine::new(&g).expect("order checked"), 0, k)
    });
    let found = found.map(|t| Multigraph::random_with(n, q, &mut trial_rng(seed, t)).expect("validated parameters").to_text());
    let interpretation = match &found {
        Some(_) => "a sampled graph realises the scheme".to_string(),
        None => format!("no sampled graph realises the scheme; evidence from {samples} samples, not a proof of non-existence"),
    };
    Ok(ScanReport { n, q, k, samples, seed, found, interpretation })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub q: u32,
    pub k: usize,
    pub dealer_fixed: bool,
    /// Maximum number of graphs examined by one call.
    pub budget: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SliceResult {
    Pending,
    Exhausted,
    Found { index: u64, dealer: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceProgress {
    pub start: u64,
    pub end: u64,
    /// Last enumeration index examined, if any.
    pub last: Option<u64>,
    pub result: SliceResult,
}

impl SliceProgress {
    fn next(&self) -> u64 {
        self.last.map_or(self.start, |l| l + 1)
    }
}

/// Resumable search state; serialises to a plain-text table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub q: u32,
    pub k: usize,
    pub dealer_fixed: bool,
    pub slices: Vec<SliceProgress>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Found,
    ExhaustedNone,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub index: Option<u64>,
    pub dealer: Option<usize>,
    pub graph: Option<String>,
    pub examined: u64,
    pub total: u64,
    pub checkpoint: Checkpoint,
}

/// Number of graphs `q^(n(n−1)/2)`, if it fits in 64 bits.
pub fn graph_space(n: usize, q: u32) -> Option<u64> {
    let pairs = u32::try_from(n * n.saturating_sub(1) / 2).ok()?;
    u64::from(q).checked_pow(pairs)
}

/// Graph at `index`: adjacency entries in `(0,1), (0,2), …, (n−2,n−1)` order
/// read as base-`q` digits, first pair most significant.
pub fn graph_at(n: usize, q: u32, index: u64) -> Result<Multigraph, GraphError> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut rest = index;
    let mut edges = Vec::new();
    for &(u, v) in pairs.iter().rev() {
        let w = (rest % u64::from(q)) as u32;
        rest /= u64::from(q);
        if w != 0 {
            edges.push((u, v, w));
        }
    }
    Multigraph::from_edges(q, n, &edges)
}

fn slice_layout(n: usize, q: u32, total: u64) -> Vec<(u64, u64)> {
    let pairs = n * n.saturating_sub(1) / 2;
    let mut digits = 0;
    let mut count = 1u64;
    while digits < pairs && count < 64 {
        count *= u64::from(q);
        digits += 1;
    }
    let size = total / count;
    (0..count).map(|s| (s * size, (s + 1) * size)).collect()
}

impl Checkpoint {
    pub fn fresh(config: &SearchConfig) -> Result<Self, SearchError> {
        let total = graph_space(config.n, config.q).ok_or_else(|| SearchError::Precondition("graph space exceeds 2^64".into()))?;
        let slices = slice_layout(config.n, config.q, total)
            .into_iter()
            .map(|(start, end)| SliceProgress { start, end, last: None, result: SliceResult::Pending })
            .collect();
        Ok(Checkpoint { n: config.n, q: config.q, k: config.k, dealer_fixed: config.dealer_fixed, slices })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# search n={} q={} k={} dealer_fixed={}\n", self.n, self.q, self.k, self.dealer_fixed);
        s.push_str("# slice_index, last_enumeration_index, partial_result\n");
        for (i, p) in self.slices.iter().enumerate() {
            let last = p.last.map_or("-".to_string(), |l| l.to_string());
            let result = match p.result {
                SliceResult::Pending => "pending".to_string(),
                SliceResult::Exhausted => "exhausted".to_string(),
                SliceResult::Found { index, dealer } => format!("found:{index}:{dealer}"),
            };
            let _ = writeln!(s, "{i}, {last}, {result}");
        }
        s
    }

    pub fn parse(text: &str, config: &SearchConfig) -> Result<Self, SearchError> {
        let bad = |m: &str| SearchError::Checkpoint(m.to_string());
        let mut cp = Checkpoint::fresh(config)?;
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| bad("empty checkpoint"))?;
        let expected = format!("# search n={} q={} k={} dealer_fixed={}", config.n, config.q, config.k, config.dealer_fixed);
        if header != expected {
            return Err(bad(&format!("header `{header}` does not match `{expected}`")));
        }
        let mut seen = 0;
        for line in lines.filter(|l| !l.starts_with('#')) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad(&format!("malformed row `{line}`")));
            }
            let i: usize = fields[0].parse().map_err(|_| bad("bad slice index"))?;
            let slice = cp.slices.get_mut(i).ok_or_else(|| bad("slice index out of range"))?;
            slice.last = match fields[1] {
                "-" => None,
                s => Some(s.parse().map_err(|_| bad("bad enumeration index"))?),
            };
            slice.result = match fields[2] {
                "pending" => SliceResult::Pending,
                "exhausted" => SliceResult::Exhausted,
                s => {
                    let parts: Vec<&str> = s.split(':').collect();
                    match parts.as_slice() {
                        ["found", idx, dealer] => SliceResult::Found {
                            index: idx.parse().map_err(|_| bad("bad found index"))?,
                            dealer: dealer.parse().map_err(|_| bad("bad found dealer"))?,
                        },
                        _ => return Err(bad(&format!("unknown result `{s}`"))),
                    }
                }
            };
            if slice.last.is_some_and(|l| l < slice.start || l >= slice.end) {
                return Err(bad("enumeration index outside its slice"));
            }
            seen += 1;
        }
        if seen != cp.slices.len() {
            return Err(bad(&format!("expected {} slice rows, found {seen}", cp.slices.len())));
        }
        Ok(cp)
    }

    /// Overall outcome implied by the slice states.
    fn status(&self) -> (SearchStatus, Option<(u64, usize)>) {
        for s in &self.slices {
            match s.result {
                SliceResult::Found { index, dealer } => return (SearchStatus::Found, Some((index, dealer))),
                SliceResult::Pending => return (SearchStatus::BudgetExceeded, None),
                SliceResult::Exhausted => {}
            }
        }
        (SearchStatus::ExhaustedNone, None)
    }
}

fn graph_realises(n: usize, q: u32, k: usize, dealer_fixed: bool, index: u64) -> Option<usize> {
    let g = graph_at(n, q, index).expect("index within graph space");
    let mut engine = CutRankEngine::new(&g).expect("order checked");
    let dealers = if dealer_fixed { 0..1 } else { 0..n };
    dealers.into_iter().find(|&d| !g.is_isolated(d) && realises(&mut engine, d, k))
}

/// Enumerates graph space looking for the first graph realising a tight
/// `((k, n−1))` scheme. The space is cut into contiguous slices by leading
/// adjacency digits; each slice gets an equal share of `budget`, and the
/// answer is the lowest index whose preceding slices are all finished, so
/// the result does not depend on `workers`.
pub fn exhaustive_search(config: &SearchConfig, resume: Option<Checkpoint>) -> Result<SearchOutcome, SearchError> {
    let SearchConfig { n, q, k, dealer_fixed, budget, workers } = *config;
    if n < 2 || k == 0 || k >= n {
        return Err(SearchError::Precondition(format!("need n >= 2 and 1 <= k <= n - 1, got n = {n}, k = {k}")));
    }
    if n > crate::access::MASK_LIMIT {
        return Err(SearchError::Precondition("order too large".into()));
    }
    Multigraph::empty(q, n)?;
    let total = graph_space(n, q).ok_or_else(|| SearchError::Precondition("graph space exceeds 2^64".into()))?;
    let mut cp = match resume {
        Some(cp) => {
            if (cp.n, cp.q, cp.k, cp.dealer_fixed) != (n, q, k, dealer_fixed) {
                return Err(SearchError::Checkpoint("checkpoint belongs to a different search".into()));
            }
            cp
        }
        None => Checkpoint::fresh(config)?,
    };

    let pending: Vec<usize> = (0..cp.slices.len()).filter(|&i| cp.slices[i].result == SliceResult::Pending).collect();
    let share = if pending.is_empty() { 0 } else { budget / pending.len() as u64 };
    let extra = if pending.is_empty() { 0 } else { budget % pending.len() as u64 };
    let quotas: Vec<u64> = (0..pending.len()).map(|j| share + u64::from((j as u64) < extra)).collect();
    let known_found = cp.slices.iter().position(|s| matches!(s.result, SliceResult::Found { .. })).unwrap_or(usize::MAX);
    let best = AtomicUsize::new(known_found);

    let run_slice = |(slot, &i): (usize, &usize)| -> (usize, SliceProgress, u64) {
        let mut p = cp.slices[i];
        let mut examined = 0u64;
        let mut idx = p.next();
        while idx < p.end && examined < quotas[slot] {
            if best.load(Ordering::Relaxed) < i {
                break;
            }
            examined += 1;
            p.last = Some(idx);
            if let Some(dealer) = graph_realises(n, q, k, dealer_fixed, idx) {
                p.result = SliceResult::Found { index: idx, dealer };
                best.fetch_min(i, Ordering::Relaxed);
                return (i, p, examined);
            }
            idx += 1;
        }
        if idx >= p.end {
            p.result = SliceResult::Exhausted;
        }
        (i, p, examined)
    };

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| SearchError::Precondition(e.to_string()))?;
    let results: Vec<(usize, SliceProgress, u64)> = pool.install(|| pending.par_iter().enumerate().map(run_slice).collect());
    let mut examined = 0;
    for (i, p, e) in results {
        cp.slices[i] = p;
        examined += e;
    }
    let (status, hit) = cp.status();
    log::info!("search n={n} q={q} k={k}: {status:?} after {examined} graphs");
    Ok(SearchOutcome {
        status,
        index: hit.map(|h| h.0),
        dealer: hit.map(|h| h.1),
        graph: hit.map(|(idx, _)| graph_at(n, q, idx).expect("index within graph space").to_text()),
        examined,
        total,
        checkpoint: cp,
    })
}

/// Draws one random graph with the per-trial stream used by [`random_trials`].
pub fn trial_graph(n: usize, q: u32, seed: u64, trial: u64) -> Result<Multigraph, GraphError> {
    Multigraph::random_with(n, q, &mut trial_rng(seed, trial))
}
