//! Cesàro-mean conditional distribution estimation and the induced
//! maximum-probability predictor, with total-variation and KL metrics.
//!
//! The Cesàro mean of a base measure `R` averages its one-step
//! conditionals over all suffix windows of the history:
//!
//! ```text
//! Rbar(a | x_{1:n-1}) = (1/n) sum_{i=0..n-1} R(a | x_{n-i:n-1})
//! ```
//!
//! the `i = 0` term being the base marginal. Averaging normalized
//! distributions keeps the result normalized. The induced predictor takes
//! the argmax, breaking ties toward the smallest symbol.
//!
//! Evaluating every suffix window exactly costs a full pass of base
//! conditionals per step; the window cap `W` keeps only the `W` most
//! recent windows (and then divides by `W`), which is the documented,
//! flagged approximation. Exact mode is the default up to 4096 symbols.
//!
//! # Engine
//!
//! For the Markov-mixture base the suffix windows share everything except
//! their start: all per-window gram counts are range queries against one
//! global table of gram end-positions. Each live window keeps only its
//! per-order posterior weights in scaled linear arithmetic (ratios of
//! small integers; no logs or exps on the hot path), exploiting that all
//! orders above the window's longest repeated suffix take the uniform
//! ratio `1/D` and need no per-step work. Posterior weights that underflow
//! the occasional max-rescale are flushed to zero; anything below the
//! representable range is many hundreds of nats away from influencing a
//! conditional.

use crate::core::{tail_weight, weight, Sequence};
use crate::error::{Error, Result};
use crate::npd::{self, NpdConfig};
use crate::quantization::PartitionScheme;
use rustc_hash::FxHashMap;

/// A normalized distribution over a finite set of symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    pub support: Vec<u64>,
    pub log_probs: Vec<f64>,
}

impl ConditionalDistribution {
    pub fn from_probs(support: Vec<u64>, probs: &[f64]) -> Self {
        ConditionalDistribution {
            support,
            log_probs: probs.iter().map(|p| p.ln()).collect(),
        }
    }

    pub fn prob_of(&self, sym: u64) -> f64 {
        self.support
            .iter()
            .position(|&s| s == sym)
            .map(|i| self.log_probs[i].exp())
            .unwrap_or(0.0)
    }

    /// Argmax symbol, ties broken toward the smallest symbol value.
    pub fn argmax(&self) -> u64 {
        let mut best_sym = u64::MAX;
        let mut best = f64::NEG_INFINITY;
        for (&s, &lp) in self.support.iter().zip(&self.log_probs) {
            if lp > best || (lp == best && s < best_sym) {
                best = lp;
                best_sym = s;
            }
        }
        best_sym
    }

    pub fn total_mass(&self) -> f64 {
        self.log_probs.iter().map(|l| l.exp()).sum()
    }
}

/// Total variation distance `(1/2) sum |p - q|` over the union of supports.
pub fn total_variation(p: &ConditionalDistribution, q: &ConditionalDistribution) -> f64 {
    let mut syms: Vec<u64> = p.support.iter().chain(q.support.iter()).copied().collect();
    syms.sort_unstable();
    syms.dedup();
    0.5 * syms
        .iter()
        .map(|&s| (p.prob_of(s) - q.prob_of(s)).abs())
        .sum::<f64>()
}

/// Kullback-Leibler divergence `sum p log(p/q)` in nats; infinite when `p`
/// charges a symbol `q` does not.
pub fn kl_divergence(p: &ConditionalDistribution, q: &ConditionalDistribution) -> f64 {
    let mut d = 0.0;
    for (&s, &lp) in p.support.iter().zip(&p.log_probs) {
        let pp = lp.exp();
        if pp == 0.0 {
            continue;
        }
        let qq = q.prob_of(s);
        if qq == 0.0 {
            return f64::INFINITY;
        }
        d += pp * (pp.ln() - qq.ln());
    }
    d.max(0.0)
}

/// Base measure whose conditionals are Cesàro-averaged.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseMeasure {
    /// Total Markov mixture over a finite alphabet.
    PpmTotal { alphabet_size: u64 },
    /// Total quantization mixture; countable-alphabet prediction uses the
    /// incremental scheme. The candidate set is the symbols seen so far
    /// plus one fresh-symbol representative (all unseen symbols share the
    /// same universal-model conditional, and with a non-increasing point
    /// mass the smallest unseen one dominates the rest), and the reported
    /// distribution is renormalized over that set.
    NpdTotal { config: NpdConfig },
}

/// Predictor configuration: base measure and window cap (`None` = exact).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorConfig {
    pub base: BaseMeasure,
    pub window_cap: Option<usize>,
}

impl PredictorConfig {
    pub fn new(base: BaseMeasure, window_cap: Option<usize>) -> Result<Self> {
        if window_cap == Some(0) {
            return Err(Error::InvalidParameter(
                "window cap must be at least 1".into(),
            ));
        }
        if let BaseMeasure::NpdTotal { config } = &base {
            match config.scheme {
                PartitionScheme::IncrementalNaturals | PartitionScheme::TrivialFinite { .. } => {}
                _ => {
                    return Err(Error::Config(
                        "prediction requires a countable-alphabet base".into(),
                    ))
                }
            }
        }
        Ok(PredictorConfig { base, window_cap })
    }

    /// Documented default: exact Cesàro averaging up to 4096 symbols,
    /// window cap 512 beyond.
    pub fn auto(base: BaseMeasure, n: usize) -> Result<Self> {
        let cap = if n <= 4096 { None } else { Some(512) };
        PredictorConfig::new(base, cap)
    }
}

/// Online Cesàro-mean predictor.
#[derive(Debug)]
pub enum CesaroPredictor {
    Ppm(SuffixPool),
    Npd(NaiveCesaro),
}

impl CesaroPredictor {
    pub fn new(cfg: &PredictorConfig) -> Result<Self> {
        match &cfg.base {
            BaseMeasure::PpmTotal { alphabet_size } => {
                if *alphabet_size < 1 {
                    return Err(Error::InvalidParameter("alphabet must be nonempty".into()));
                }
                Ok(CesaroPredictor::Ppm(SuffixPool::new(
                    *alphabet_size,
                    cfg.window_cap,
                )))
            }
            BaseMeasure::NpdTotal { config } => Ok(CesaroPredictor::Npd(NaiveCesaro {
                cfg: config.clone(),
                window_cap: cfg.window_cap,
                history: Vec::new(),
            })),
        }
    }

    /// Cesàro-mean conditional distribution given the consumed history.
    pub fn distribution(&self) -> Result<ConditionalDistribution> {
        match self {
            CesaroPredictor::Ppm(pool) => Ok(pool.distribution()),
            CesaroPredictor::Npd(naive) => naive.distribution(),
        }
    }

    /// Maximum-probability prediction for the next symbol.
    pub fn predict(&self) -> Result<u64> {
        Ok(self.distribution()?.argmax())
    }

    pub fn consume(&mut self, sym: u64) -> Result<()> {
        match self {
            CesaroPredictor::Ppm(pool) => pool.consume(sym),
            CesaroPredictor::Npd(naive) => {
                if sym == 0 {
                    if let PartitionScheme::IncrementalNaturals = naive.cfg.scheme {
                        return Err(Error::Domain(
                            "incremental scheme is defined over naturals >= 1".into(),
                        ));
                    }
                }
                naive.history.push(sym);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CesaroPredictor::Ppm(pool) => pool.history.len(),
            CesaroPredictor::Npd(naive) => naive.history.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Log Cesàro-mean conditional probability of `next` given `history`.
pub fn cesaro_conditional(next: u64, history: &[u64], cfg: &PredictorConfig) -> Result<f64> {
    let d = cesaro_distribution(history, cfg)?;
    d.support
        .iter()
        .position(|&s| s == next)
        .map(|i| d.log_probs[i])
        .ok_or_else(|| Error::SymbolOutOfRange {
            symbol: next,
            alphabet_size: d.support.len() as u64,
        })
}

/// Cesàro-mean conditional distribution given `history`.
pub fn cesaro_distribution(
    history: &[u64],
    cfg: &PredictorConfig,
) -> Result<ConditionalDistribution> {
    let mut p = CesaroPredictor::new(cfg)?;
    for &s in history {
        p.consume(s)?;
    }
    p.distribution()
}

/// Predicted next symbol given `history` (argmax of the Cesàro mean).
pub fn predict(history: &[u64], cfg: &PredictorConfig) -> Result<u64> {
    let mut p = CesaroPredictor::new(cfg)?;
    for &s in history {
        p.consume(s)?;
    }
    p.predict()
}

/// Running 0-1-loss mistake rate over the sample, reported at the grid
/// points.
pub fn mistake_rate(
    x: &[u64],
    cfg: &PredictorConfig,
    grid: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if grid.iter().any(|&g| g == 0 || g > x.len()) {
        return Err(Error::InvalidParameter(
            "grid points must lie in 1..=n".into(),
        ));
    }
    let mut p = CesaroPredictor::new(cfg)?;
    let mut mistakes = 0usize;
    let mut out = Vec::with_capacity(grid.len());
    let mut next_grid = 0usize;
    for (idx, &sym) in x.iter().enumerate() {
        let guess = p.predict()?;
        if guess != sym {
            mistakes += 1;
        }
        p.consume(sym)?;
        let n = idx + 1;
        if next_grid < grid.len() && grid[next_grid] == n {
            out.push((n, mistakes as f64 / n as f64));
            next_grid += 1;
        }
    }
    Ok(out)
}

const RESCALE_EVERY: u32 = 32;
const FLUSH_BELOW: f64 = 1e-250;

/// Gram key: up to 128 bits packed, otherwise the symbols themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum GramKey {
    Packed(u128),
    Wide(Box<[u64]>),
}

/// One live suffix window.
#[derive(Debug)]
struct Run {
    /// Global 1-based index of the window's first symbol.
    start: u32,
    /// Scaled posterior weights of orders `0..=top_order`; an order-`k`
    /// entry equals `w_k * PPM_k(window) * D^m` up to the shared rescale.
    pi: Vec<f64>,
    /// Scale carried by every order above `top_order` (all uniform).
    u_scale: f64,
    /// Longest repeated suffix length of the window.
    ell: u32,
    /// Gram counts from the previous append (denominator shortcut).
    c_prev: Vec<u32>,
    appends: u32,
}

impl Run {
    fn new(start: u32) -> Self {
        Run {
            start,
            pi: vec![weight(0)],
            u_scale: 1.0,
            ell: 0,
            c_prev: Vec::new(),
            appends: 0,
        }
    }

    fn top_order(&self) -> usize {
        self.pi.len() - 1
    }
}

/// Shared-table Cesàro pool for the Markov-mixture base.
#[derive(Debug)]
pub struct SuffixPool {
    d: u64,
    bits: u32,
    pack_cap: usize,
    window_cap: Option<usize>,
    history: Vec<u64>,
    rolled: u128,
    /// `lists[g]` maps each length-`g` gram to its sorted end positions.
    lists: Vec<FxHashMap<GramKey, Vec<u32>>>,
    /// Longest repeated substring length of the full history.
    full_rep: u32,
    runs: std::collections::VecDeque<Run>,
}

impl SuffixPool {
    fn new(d: u64, window_cap: Option<usize>) -> Self {
        let bits = if d <= 2 { 1 } else { 64 - (d - 1).leading_zeros() };
        let mut runs = std::collections::VecDeque::new();
        runs.push_back(Run::new(1));
        SuffixPool {
            d,
            bits,
            pack_cap: (128 / bits) as usize,
            window_cap,
            history: Vec::new(),
            rolled: 0,
            // Gram lengths 1..=full_rep+2 are maintained; index 0 unused.
            lists: vec![FxHashMap::default(); 3],
            full_rep: 0,
            runs,
        }
    }

    /// Key of the gram formed by the last `g-1` history symbols plus `sym`.
    #[inline]
    fn key_with(&self, g: usize, sym: u64) -> GramKey {
        if g <= self.pack_cap {
            let ctx_bits = (g as u32 - 1) * self.bits;
            let mask = if ctx_bits >= 128 {
                u128::MAX
            } else {
                (1u128 << ctx_bits) - 1
            };
            GramKey::Packed(((self.rolled & mask) << self.bits) | sym as u128)
        } else {
            let n = self.history.len();
            let mut v: Vec<u64> = self.history[n + 1 - g..].to_vec();
            v.push(sym);
            GramKey::Wide(v.into())
        }
    }

    /// Ends of the gram at positions `>= lo` (list entries all precede the
    /// position currently being processed).
    #[inline]
    fn count_from(list: Option<&Vec<u32>>, lo: u32) -> u32 {
        match list {
            None => 0,
            Some(v) => (v.len() - v.partition_point(|&e| e < lo)) as u32,
        }
    }

    fn consume(&mut self, sym: u64) -> Result<()> {
        if sym >= self.d {
            return Err(Error::SymbolOutOfRange {
                symbol: sym,
                alphabet_size: self.d,
            });
        }
        let i = self.history.len() as u32 + 1;
        // Resolve the gram lists the runs will query: the gram of length
        // k+1 ending at position i, for every order k they can touch.
        let g_top = (self.full_rep + 2).min(i) as usize;
        let mut gram_lists: Vec<Option<&Vec<u32>>> = Vec::with_capacity(g_top);
        for g in 1..=g_top {
            gram_lists.push(self.lists[g].get(&self.key_with(g, sym)));
        }
        let d = self.d;
        for run in self.runs.iter_mut() {
            let m = i - run.start; // window length before this append
            run.appends += 1;
            if m == 0 {
                continue;
            }
            let genuine_top = ((run.ell + 1).min(m - 1) as usize).min(gram_lists.len() - 1);
            let mut ell_new = 0u32;
            let mut c_now: Vec<u32> = Vec::with_capacity(genuine_top + 1);
            for (k, lists_k) in gram_lists.iter().enumerate().take(genuine_top + 1) {
                let c = Self::count_from(*lists_k, run.start + k as u32);
                let t = if k == 0 {
                    m
                } else {
                    run.c_prev.get(k - 1).copied().unwrap_or(0)
                };
                if c > 0 {
                    ell_new = k as u32 + 1;
                }
                if k <= run.top_order() {
                    let ratio = (c as f64 + 1.0) / (t as u64 + d) as f64 * d as f64;
                    run.pi[k] *= ratio;
                }
                c_now.push(c);
            }
            if ell_new > run.ell {
                debug_assert_eq!(ell_new, run.ell + 1);
                run.ell = ell_new;
                if (run.ell as usize) >= run.pi.len() {
                    // Newly activated order: uniform so far, so its scaled
                    // posterior equals its prior weight.
                    run.pi.push(weight(run.pi.len()) * run.u_scale);
                }
            } else {
                run.ell = ell_new;
            }
            run.c_prev = c_now;
            if run.appends % RESCALE_EVERY == 0 {
                let mut mx = run.u_scale;
                for &v in &run.pi {
                    mx = mx.max(v);
                }
                let inv = 1.0 / mx;
                run.u_scale *= inv;
                for v in run.pi.iter_mut() {
                    *v *= inv;
                    if *v < FLUSH_BELOW {
                        *v = 0.0;
                    }
                }
            }
        }
        // Record the gram ends at position i and track the full-history
        // repetition length, growing the table when it advances.
        self.history.push(sym);
        self.rolled = (self.rolled << self.bits) | sym as u128;
        let mut repeated_suffix = 0u32;
        let g_store = (self.lists.len() - 1).min(self.history.len());
        for g in 1..=g_store {
            let key = self.gram_key_current(g);
            let list = self.lists[g].entry(key).or_default();
            if !list.is_empty() {
                repeated_suffix = g as u32;
            }
            list.push(i);
        }
        if repeated_suffix > self.full_rep {
            self.full_rep = repeated_suffix;
            let g_new = (self.full_rep + 2) as usize;
            if g_new >= self.lists.len() {
                self.lists.push(FxHashMap::default());
                self.backfill(g_new);
            }
        }
        self.runs.push_back(Run::new(i + 1));
        if let Some(w) = self.window_cap {
            while self.runs.len() > w {
                self.runs.pop_front();
            }
        }
        Ok(())
    }

    /// Key of the last `g` symbols of the (already updated) history.
    #[inline]
    fn gram_key_current(&self, g: usize) -> GramKey {
        if g <= self.pack_cap {
            let gb = g as u32 * self.bits;
            let mask = if gb >= 128 { u128::MAX } else { (1u128 << gb) - 1 };
            GramKey::Packed(self.rolled & mask)
        } else {
            let n = self.history.len();
            GramKey::Wide(self.history[n - g..].into())
        }
    }

    /// Inserts all length-`g` gram end positions of the history.
    fn backfill(&mut self, g: usize) {
        debug_assert_eq!(g, self.lists.len() - 1);
        let mut rolled: u128 = 0;
        let history = std::mem::take(&mut self.history);
        for (idx, &s) in history.iter().enumerate() {
            rolled = (rolled << self.bits) | s as u128;
            let end = idx + 1;
            if end >= g {
                let key = if g <= self.pack_cap {
                    let gb = g as u32 * self.bits;
                    let mask = if gb >= 128 { u128::MAX } else { (1u128 << gb) - 1 };
                    GramKey::Packed(rolled & mask)
                } else {
                    GramKey::Wide(history[end - g..end].into())
                };
                self.lists[g].entry(key).or_default().push(end as u32);
            }
        }
        self.history = history;
    }

    /// Cesàro average of the per-window conditional distributions.
    fn distribution(&self) -> ConditionalDistribution {
        let d = self.d as usize;
        let i = self.history.len() as u32 + 1;
        let mut acc = vec![0.0f64; d];
        let mut per_run = vec![0.0f64; d];
        let mut counts = vec![0u32; d];
        // Per-order gram lists for each candidate symbol, shared by runs.
        let read_top = ((self.full_rep + 1).min(i.saturating_sub(1)) as usize)
            .min(self.lists.len().saturating_sub(2));
        let mut cand_lists: Vec<Vec<Option<&Vec<u32>>>> = Vec::with_capacity(read_top + 1);
        for k in 0..=read_top {
            let g = k + 1;
            if g > self.history.len() + 1 {
                break;
            }
            let row = (0..d as u64)
                .map(|a| self.lists[g].get(&self.key_with(g, a)))
                .collect();
            cand_lists.push(row);
        }
        for run in &self.runs {
            let m = i - run.start;
            if m == 0 {
                // Empty window: uniform marginal.
                for v in acc.iter_mut() {
                    *v += 1.0 / self.d as f64;
                }
                continue;
            }
            let genuine_top = (run.ell.min(m - 1) as usize)
                .min(cand_lists.len().saturating_sub(1))
                .min(run.top_order());
            per_run.iter_mut().for_each(|v| *v = 0.0);
            let tail = tail_weight(run.top_order() + 1) * run.u_scale;
            let mut denom = tail;
            let mut rest = tail;
            for (k, &p_k) in run.pi.iter().enumerate() {
                denom += p_k;
                if k > genuine_top {
                    rest += p_k;
                }
            }
            for v in per_run.iter_mut() {
                *v = rest / self.d as f64;
            }
            for (k, row) in cand_lists.iter().enumerate().take(genuine_top + 1) {
                let p_k = run.pi[k];
                if p_k == 0.0 {
                    continue;
                }
                let mut t = 0u32;
                for a in 0..d {
                    let c = Self::count_from(row[a], run.start + k as u32);
                    counts[a] = c;
                    t += c;
                }
                let den = (t as u64 + self.d) as f64;
                for a in 0..d {
                    per_run[a] += p_k * (counts[a] as f64 + 1.0) / den;
                }
            }
            for a in 0..d {
                acc[a] += per_run[a] / denom;
            }
        }
        let runs = self.runs.len() as f64;
        let probs: Vec<f64> = acc.iter().map(|v| v / runs).collect();
        ConditionalDistribution::from_probs((0..self.d).collect(), &probs)
    }
}

/// Direct per-window evaluation for quantization-mixture bases: correct on
/// any countable alphabet, cost is a full density evaluation per window
/// and candidate. Suitable for moderate histories.
#[derive(Debug)]
pub struct NaiveCesaro {
    cfg: NpdConfig,
    window_cap: Option<usize>,
    history: Vec<u64>,
}

impl NaiveCesaro {
    fn distribution(&self) -> Result<ConditionalDistribution> {
        let n = self.history.len();
        let windows = match self.window_cap {
            Some(w) => w.min(n + 1),
            None => n + 1,
        };
        let fresh = self.history.iter().copied().max().unwrap_or(0) + 1;
        let mut candidates: Vec<u64> = self.history.clone();
        candidates.push(fresh);
        candidates.sort_unstable();
        candidates.dedup();
        let mut acc = vec![0.0f64; candidates.len()];
        for len in 0..windows {
            let window = &self.history[n - len..];
            let base = npd::total_log_density(&Sequence::Symbolic(window.to_vec()), &self.cfg)?
                .density
                .log_value;
            let mut probs: Vec<f64> = Vec::with_capacity(candidates.len());
            for &a in &candidates {
                let mut extended = window.to_vec();
                extended.push(a);
                let num = npd::total_log_density(&Sequence::Symbolic(extended), &self.cfg)?
                    .density
                    .log_value;
                let ln_mu = self.cfg.reference.ln_point_mass(a).unwrap_or(0.0);
                probs.push((num - base + ln_mu).exp());
            }
            // Renormalize over the candidate set: the argmax is unchanged
            // and the reported distribution stays a distribution.
            let z: f64 = probs.iter().sum();
            for (slot, p) in acc.iter_mut().zip(&probs) {
                *slot += p / z;
            }
        }
        let probs: Vec<f64> = acc.iter().map(|v| v / windows as f64).collect();
        Ok(ConditionalDistribution::from_probs(candidates, &probs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppm::{PpmMixture, PpmParams};
    use proptest::prelude::*;

    fn ppm_cfg(d: u64, cap: Option<usize>) -> PredictorConfig {
        PredictorConfig::new(BaseMeasure::PpmTotal { alphabet_size: d }, cap).unwrap()
    }

    /// Direct Cesàro computation from scratch via the log-domain mixture,
    /// no shared state with the pool.
    fn naive_ppm_cesaro(history: &[u64], d: u64, cap: Option<usize>) -> Vec<f64> {
        let n = history.len();
        let windows = cap.map(|w| w.min(n + 1)).unwrap_or(n + 1);
        let mut acc = vec![0.0f64; d as usize];
        for len in 0..windows {
            let window = &history[n - len..];
            let mut mix = PpmMixture::new(PpmParams::new(d).unwrap());
            for &s in window {
                mix.append(s).unwrap();
            }
            for (a, l) in mix.conditional_ln_all().into_iter().enumerate() {
                acc[a] += l.exp();
            }
        }
        acc.into_iter().map(|v| v / windows as f64).collect()
    }

    #[test]
    fn empty_history_is_uniform() {
        let d = cesaro_distribution(&[], &ppm_cfg(2, None)).unwrap();
        assert!((d.prob_of(0) - 0.5).abs() < 1e-12);
        assert!((d.prob_of(1) - 0.5).abs() < 1e-12);
        assert_eq!(predict(&[], &ppm_cfg(2, None)).unwrap(), 0);
    }

    #[test]
    fn length_one_history_matches_definition() {
        // Rbar(a | x1) = (1/2)[R(a) + R(a | x1)].
        let cfg = ppm_cfg(2, None);
        let got = cesaro_distribution(&[0], &cfg).unwrap();
        let p = PpmParams::new(2).unwrap();
        for a in 0..2u64 {
            let marginal = crate::ppm::conditional_log(a, &[], &p).unwrap().exp();
            let cond = crate::ppm::conditional_log(a, &[0], &p).unwrap().exp();
            let expect = 0.5 * (marginal + cond);
            assert!((got.prob_of(a) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn pool_matches_naive_recomputation() {
        let x: Vec<u64> = vec![0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1];
        for cap in [None, Some(4), Some(7), Some(64)] {
            let cfg = ppm_cfg(2, cap);
            let mut pool = CesaroPredictor::new(&cfg).unwrap();
            for (i, &s) in x.iter().enumerate() {
                let got = pool.distribution().unwrap();
                let want = naive_ppm_cesaro(&x[..i], 2, cap);
                for a in 0..2usize {
                    assert!(
                        (got.prob_of(a as u64) - want[a]).abs() < 1e-10,
                        "i={i} a={a} cap={cap:?} got={} want={}",
                        got.prob_of(a as u64),
                        want[a]
                    );
                }
                pool.consume(s).unwrap();
            }
        }
    }

    #[test]
    fn pool_matches_naive_ternary() {
        let x: Vec<u64> = vec![2, 0, 1, 2, 2, 0, 1, 2, 0, 0, 1, 2, 1, 2, 2, 0];
        let cfg = ppm_cfg(3, None);
        let mut pool = CesaroPredictor::new(&cfg).unwrap();
        for (i, &s) in x.iter().enumerate() {
            let got = pool.distribution().unwrap();
            let want = naive_ppm_cesaro(&x[..i], 3, None);
            for a in 0..3usize {
                assert!(
                    (got.prob_of(a as u64) - want[a]).abs() < 1e-10,
                    "i={i} a={a}"
                );
            }
            pool.consume(s).unwrap();
        }
    }

    #[test]
    fn distributions_normalize() {
        let x: Vec<u64> = (0..200).map(|i| ((i * 7) % 5 < 2) as u64).collect();
        let cfg = ppm_cfg(2, Some(16));
        let mut pool = CesaroPredictor::new(&cfg).unwrap();
        for &s in &x {
            let d = pool.distribution().unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-9);
            pool.consume(s).unwrap();
        }
    }

    #[test]
    fn windowed_equals_exact_below_cap() {
        let x: Vec<u64> = vec![1, 0, 0, 1, 1, 1, 0, 1, 0, 0];
        let exact = ppm_cfg(2, None);
        let capped = ppm_cfg(2, Some(x.len() + 1));
        let mut a = CesaroPredictor::new(&exact).unwrap();
        let mut b = CesaroPredictor::new(&capped).unwrap();
        for &s in &x {
            let da = a.distribution().unwrap();
            let db = b.distribution().unwrap();
            assert_eq!(da.log_probs, db.log_probs);
            a.consume(s).unwrap();
            b.consume(s).unwrap();
        }
    }

    #[test]
    fn majority_symbol_is_predicted() {
        let cfg = ppm_cfg(2, None);
        assert_eq!(predict(&[0, 0, 0, 0, 0, 0], &cfg).unwrap(), 0);
        assert_eq!(predict(&[1, 1, 1, 1, 1, 1], &cfg).unwrap(), 1);
    }

    #[test]
    fn mistake_rate_on_constant_source_vanishes() {
        let x = vec![1u64; 512];
        let cfg = ppm_cfg(2, None);
        let rates = mistake_rate(&x, &cfg, &[16, 512]).unwrap();
        assert!(rates[0].1 <= 0.25);
        assert!(rates[1].1 <= 0.01);
        for (_, r) in rates {
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn metric_examples() {
        let p = ConditionalDistribution::from_probs(vec![0, 1], &[0.3, 0.7]);
        let q = ConditionalDistribution::from_probs(vec![0, 1], &[0.5, 0.5]);
        assert!(total_variation(&p, &p) < 1e-15);
        assert!((total_variation(&p, &q) - 0.2).abs() < 1e-12);
        let point0 = ConditionalDistribution::from_probs(vec![0], &[1.0]);
        let point1 = ConditionalDistribution::from_probs(vec![1], &[1.0]);
        assert!((total_variation(&point0, &point1) - 1.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&p, &p), 0.0);
        let uniform4 = ConditionalDistribution::from_probs(vec![0, 1, 2, 3], &[0.25; 4]);
        let point = ConditionalDistribution::from_probs(vec![2], &[1.0]);
        assert!((kl_divergence(&point, &uniform4) - 4.0f64.ln()).abs() < 1e-12);
        assert_eq!(kl_divergence(&point0, &point1), f64::INFINITY);
    }

    #[test]
    fn countable_base_prediction() {
        let cfg_npd = NpdConfig::new(
            PartitionScheme::IncrementalNaturals,
            crate::quantization::ReferenceMeasure::GeometricNaturals { q: 0.5 },
        )
        .unwrap();
        let cfg = PredictorConfig::new(BaseMeasure::NpdTotal { config: cfg_npd }, Some(8)).unwrap();
        let history = [1u64, 2, 1, 1, 2, 1, 1];
        let d = cesaro_distribution(&history, &cfg).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
        // Support is seen symbols plus one fresh representative.
        assert_eq!(d.support, vec![1, 2, 3]);
        assert_eq!(d.argmax(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pool_agrees_with_naive_on_random_histories(
            x in proptest::collection::vec(0u64..2, 0..24),
            cap in proptest::option::of(1usize..12),
        ) {
            let got = cesaro_distribution(&x, &ppm_cfg(2, cap)).unwrap();
            let want = naive_ppm_cesaro(&x, 2, cap);
            for a in 0..2usize {
                prop_assert!((got.prob_of(a as u64) - want[a]).abs() <= 1e-10);
            }
        }

        #[test]
        fn pinsker_inequality(
            pa in 1u32..999, qa in 1u32..999,
        ) {
            let p = ConditionalDistribution::from_probs(
                vec![0, 1], &[pa as f64 / 1000.0, 1.0 - pa as f64 / 1000.0]);
            let q = ConditionalDistribution::from_probs(
                vec![0, 1], &[qa as f64 / 1000.0, 1.0 - qa as f64 / 1000.0]);
            let tv = total_variation(&p, &q);
            let kl = kl_divergence(&p, &q);
            prop_assert!(tv <= (kl / 2.0).sqrt() + 1e-12);
        }

        #[test]
        fn relabel_equivariance(x in proptest::collection::vec(0u64..2, 0..16)) {
            let cfg = ppm_cfg(2, None);
            let d = cesaro_distribution(&x, &cfg).unwrap();
            // Only assert on unique maximizers; ties depend on labels.
            if (d.prob_of(0) - d.prob_of(1)).abs() > 1e-9 {
                let flipped: Vec<u64> = x.iter().map(|&s| 1 - s).collect();
                let p = predict(&x, &cfg).unwrap();
                let pf = predict(&flipped, &cfg).unwrap();
                prop_assert_eq!(pf, 1 - p);
            }
        }
    }
}
