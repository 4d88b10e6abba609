//! Adaptive Markov-mixture densities over finite alphabets.
//!
//! The order-`k` density prices the first `k+1` symbols uniformly at
//! `D^{-k-1}` and each later symbol by the Laplace-smoothed ratio
//! `(N(g|prefix)+1) / (N(c|prefix')+D)`, where `g` is the `(k+1)`-gram
//! ending at the current position, `c` is its length-`k` context, and the
//! counts run over the strictly earlier prefix. For `k >= n-1` the density
//! is `D^{-n}` by definition. The total density mixes all orders with the
//! weights `w_k = 1/(k+1) - 1/(k+2)`.
//!
//! The infinite mixture is exactly computable: once `k` exceeds the longest
//! repeated substring length `L` of the sample, no `(k+1)`-gram repeats and
//! no length-`k` context recurs before the last position, so every ratio is
//! `1/D` and the order-`k` density collapses to `D^{-n}`. Orders `0..=L`
//! are therefore evaluated genuinely and the remainder is priced by the
//! closed-form tail weight `1/(L+2)`. (The collapse can fail at `k = L`
//! itself when the repeated `L`-gram recurs before the final position, so
//! the genuine range must include `L`.)
//!
//! [`PpmMixture`] maintains all orders of one growing sequence in a single
//! pass: `O(L)` hash updates per appended symbol, activating a new order
//! whenever the repetition length grows.

use crate::core::{ln_tail_weight, ln_weight, log_sum_exp, LogDensity};
use crate::error::{Error, Result};
use rustc_hash::FxHashMap;

/// Parameters of the adaptive Markov model: the alphabet `{0, .., D-1}`.
/// Smoothing is fixed at +1 on gram counts and +D on context totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpmParams {
    pub alphabet_size: u64,
}

impl PpmParams {
    pub fn new(alphabet_size: u64) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidParameter(
                "alphabet size must be at least 1".into(),
            ));
        }
        Ok(PpmParams { alphabet_size })
    }
}

/// Longest `k` such that some length-`k` substring occurs at two distinct
/// start positions (occurrences may overlap). Zero for `n <= 1` and for
/// all-distinct strings.
pub fn repetition_length(x: &[u64]) -> usize {
    if x.len() <= 1 {
        return 0;
    }
    let sa = suffix_array(x);
    kasai_lcp(x, &sa).into_iter().max().unwrap_or(0)
}

/// Suffix array by prefix doubling, `O(n log^2 n)`; symbol values are
/// arbitrary `u64`s.
fn suffix_array(x: &[u64]) -> Vec<u32> {
    let n = x.len();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    // Initial ranks: dense ranks of the symbols themselves.
    let mut sorted: Vec<u64> = x.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rank: Vec<i64> = x
        .iter()
        .map(|s| sorted.binary_search(s).unwrap() as i64)
        .collect();
    let mut tmp = vec![0i64; n];
    let mut k = 1usize;
    while k < n {
        let key = |i: u32| -> (i64, i64) {
            let i = i as usize;
            let second = if i + k < n { rank[i + k] } else { -1 };
            (rank[i], second)
        };
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0] as usize] = 0;
        for w in 1..n {
            let prev = sa[w - 1];
            let cur = sa[w];
            tmp[cur as usize] =
                tmp[prev as usize] + if key(prev) == key(cur) { 0 } else { 1 };
        }
        rank.copy_from_slice(&tmp);
        if rank[sa[n - 1] as usize] as usize == n - 1 {
            break;
        }
        k *= 2;
    }
    sa
}

/// Kasai's algorithm: LCP of neighbouring suffixes in suffix order.
fn kasai_lcp(x: &[u64], sa: &[u32]) -> Vec<usize> {
    let n = x.len();
    let mut pos = vec![0u32; n];
    for (r, &i) in sa.iter().enumerate() {
        pos[i as usize] = r as u32;
    }
    let mut lcp = vec![0usize; n.saturating_sub(1)];
    let mut h = 0usize;
    for i in 0..n {
        let r = pos[i] as usize;
        if r + 1 < n {
            let j = sa[r + 1] as usize;
            while i + h < n && j + h < n && x[i + h] == x[j + h] {
                h += 1;
            }
            lcp[r] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// Context key: the last `k` symbols, bit-packed when they fit in 128 bits.
/// Maps are per-order, so keys of different lengths never meet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum CtxKey {
    Packed(u128),
    Wide(Box<[u64]>),
}

/// Next-symbol counts of one context. Most contexts see one or two distinct
/// successors, so a linear scan beats a nested map.
#[derive(Debug, Default, Clone)]
struct Node {
    total: u32,
    nexts: Vec<(u64, u32)>,
}

impl Node {
    #[inline]
    fn count(&self, sym: u64) -> u32 {
        self.nexts
            .iter()
            .find(|&&(s, _)| s == sym)
            .map(|&(_, c)| c)
            .unwrap_or(0)
    }

    #[inline]
    fn bump(&mut self, sym: u64) {
        self.total += 1;
        for e in self.nexts.iter_mut() {
            if e.0 == sym {
                e.1 += 1;
                return;
            }
        }
        self.nexts.push((sym, 1));
    }
}

/// Incremental evaluation of all order densities and their mixture for one
/// growing sequence.
///
/// Invariant: after `n` appends, `logs[k]` equals the log order-`k` density
/// of the consumed prefix for every `k <= active_orders()`, the highest
/// active order is `repetition length + 1`, and every order above it has
/// the uniform value `-n ln D`.
#[derive(Debug)]
pub struct PpmMixture {
    d: u64,
    ln_d: f64,
    bits: u32,
    pack_cap: usize,
    history: Vec<u64>,
    rolled: u128,
    logs: Vec<f64>,
    maps: Vec<FxHashMap<CtxKey, Node>>,
    rep_len: usize,
}

impl PpmMixture {
    pub fn new(params: PpmParams) -> Self {
        let d = params.alphabet_size;
        let bits = if d <= 2 {
            1
        } else {
            64 - (d - 1).leading_zeros()
        };
        PpmMixture {
            d,
            ln_d: (d as f64).ln(),
            bits,
            pack_cap: (128 / bits) as usize,
            history: Vec::new(),
            rolled: 0,
            logs: vec![0.0, 0.0],
            maps: vec![FxHashMap::default(), FxHashMap::default()],
            rep_len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn alphabet_size(&self) -> u64 {
        self.d
    }

    /// Longest repeated substring length of the consumed prefix.
    pub fn repetition_length(&self) -> usize {
        self.rep_len
    }

    /// Highest order with an individually tracked density; equals
    /// repetition length + 1.
    pub fn active_orders(&self) -> usize {
        self.logs.len() - 1
    }

    #[inline]
    fn ctx_key(&self, k: usize) -> CtxKey {
        if k <= self.pack_cap {
            let mask = if k as u32 * self.bits >= 128 {
                u128::MAX
            } else {
                (1u128 << (k as u32 * self.bits)) - 1
            };
            CtxKey::Packed(self.rolled & mask)
        } else {
            let n = self.history.len();
            CtxKey::Wide(self.history[n - k..].into())
        }
    }

    /// Appends one symbol, updating every active order in `O(L)` hash
    /// operations. Activates a new top order when the repetition length
    /// grows (it grows by at most one per symbol).
    pub fn append(&mut self, sym: u64) -> Result<()> {
        if sym >= self.d {
            return Err(Error::SymbolOutOfRange {
                symbol: sym,
                alphabet_size: self.d,
            });
        }
        if self.d == 1 {
            // Single-symbol alphabet: every density is exactly 1.
            self.history.push(sym);
            return Ok(());
        }
        let i = self.history.len() + 1; // position being added, 1-based
        let k_top = self.logs.len() - 1;
        let mut suffix_rep = 0usize; // longest repeated suffix of x_{1:i}
        let genuine_top = k_top.min(i.saturating_sub(1));
        for k in 0..=genuine_top {
            let key = self.ctx_key(k);
            let node = self.maps[k].entry(key).or_default();
            if k + 2 <= i {
                let c = node.count(sym);
                let t = node.total;
                self.logs[k] +=
                    ((c + 1) as f64).ln() - ((t as u64 + self.d) as f64).ln();
                if c > 0 {
                    suffix_rep = k + 1;
                }
            }
            node.bump(sym);
        }
        // Orders still in the uniform-pricing region (k >= i-1).
        for k in i.saturating_sub(1).max(0)..=k_top {
            self.logs[k] = -(i as f64) * self.ln_d;
        }
        self.history.push(sym);
        self.rolled = (self.rolled << self.bits) | sym as u128;
        if suffix_rep > self.rep_len {
            debug_assert_eq!(suffix_rep, self.rep_len + 1);
            self.rep_len = suffix_rep;
            self.activate_order(self.rep_len + 1);
        }
        Ok(())
    }

    /// Brings order `k_new` into the genuine range. Its density so far is
    /// exactly `D^{-n}` (no `(k_new+1)`-gram has repeated yet), but future
    /// ratios need the full gram counts of the history, so they are
    /// backfilled here.
    fn activate_order(&mut self, k_new: usize) {
        debug_assert_eq!(k_new, self.logs.len());
        let n = self.history.len();
        self.logs.push(-(n as f64) * self.ln_d);
        let mut map = FxHashMap::default();
        if n >= k_new + 1 {
            let mut rolled: u128 = 0;
            for (idx, &s) in self.history.iter().enumerate() {
                let j = idx + 1;
                if j >= k_new + 1 {
                    let key = if k_new <= self.pack_cap {
                        let mask = if k_new as u32 * self.bits >= 128 {
                            u128::MAX
                        } else {
                            (1u128 << (k_new as u32 * self.bits)) - 1
                        };
                        CtxKey::Packed(rolled & mask)
                    } else {
                        CtxKey::Wide(self.history[j - 1 - k_new..j - 1].into())
                    };
                    map.entry(key).or_insert_with(Node::default).bump(s);
                }
                rolled = (rolled << self.bits) | s as u128;
            }
        }
        self.maps.push(map);
    }

    /// Log density of the consumed prefix under the order-`k` model.
    pub fn order_log(&self, k: usize) -> f64 {
        if self.d == 1 {
            return 0.0;
        }
        match self.logs.get(k) {
            Some(&v) => v,
            None => -(self.history.len() as f64) * self.ln_d,
        }
    }

    /// Log of the total mixture density of the consumed prefix. Exact: the
    /// tail over orders above the repetition length is in closed form.
    pub fn total_log(&self) -> f64 {
        if self.d == 1 {
            return 0.0;
        }
        let k_top = self.logs.len() - 1;
        let mut terms = Vec::with_capacity(k_top + 1);
        for (k, &lv) in self.logs.iter().enumerate().take(k_top) {
            terms.push(ln_weight(k) + lv);
        }
        terms.push(ln_tail_weight(k_top) + self.logs[k_top]);
        log_sum_exp(&terms)
    }

    /// Log conditional probability of each alphabet symbol given the
    /// consumed prefix, i.e. `log [R(x a) / R(x)]` for `a = 0..D-1`.
    pub fn conditional_ln_all(&self) -> Vec<f64> {
        let d = self.d as usize;
        if self.d == 1 {
            return vec![0.0];
        }
        let n = self.history.len();
        let k_top = self.logs.len() - 1;
        let total = self.total_log();
        // Per-order one-step ratios for every symbol.
        let ln_unif = -self.ln_d;
        let mut rho: Vec<Vec<f64>> = Vec::with_capacity(k_top + 1);
        for k in 0..=k_top {
            if k + 1 > n {
                rho.push(vec![ln_unif; d]);
                continue;
            }
            let key = self.ctx_key(k);
            match self.maps[k].get(&key) {
                Some(node) => {
                    let den = ((node.total as u64 + self.d) as f64).ln();
                    let row = (0..d)
                        .map(|a| ((node.count(a as u64) + 1) as f64).ln() - den)
                        .collect();
                    rho.push(row);
                }
                None => {
                    let den = (self.d as f64).ln();
                    rho.push(vec![-den; d]);
                }
            }
        }
        let mut out = Vec::with_capacity(d);
        for a in 0..d {
            let mut terms = Vec::with_capacity(k_top + 2);
            for k in 0..=k_top {
                terms.push(ln_weight(k) + self.logs[k] + rho[k][a]);
            }
            // Orders above k_top stay uniform after one more symbol.
            terms.push(ln_tail_weight(k_top + 1) - ((n + 1) as f64) * self.ln_d);
            out.push(log_sum_exp(&terms) - total);
        }
        out
    }
}

/// Log density of `x` under the adaptive model of fixed order `k`.
pub fn order_log_density(x: &[u64], k: usize, params: &PpmParams) -> Result<LogDensity> {
    let d = params.alphabet_size;
    validate_symbols(x, d)?;
    let n = x.len();
    let ln_d = (d as f64).ln();
    if n == 0 {
        return Ok(LogDensity::exact(0.0, 0));
    }
    if d == 1 {
        return Ok(LogDensity::exact(0.0, 0));
    }
    if k >= n - 1 {
        return Ok(LogDensity::exact(-(n as f64) * ln_d, 0));
    }
    let bits = if d <= 2 { 1 } else { 64 - (d - 1).leading_zeros() };
    let pack_cap = (128 / bits) as usize;
    let mut map: FxHashMap<CtxKey, Node> = FxHashMap::default();
    let mut rolled: u128 = 0;
    let mut log = -((k + 1) as f64) * ln_d;
    for (idx, &sym) in x.iter().enumerate() {
        let i = idx + 1;
        if i >= k + 1 {
            let key = if k <= pack_cap {
                let mask = if k as u32 * bits >= 128 {
                    u128::MAX
                } else {
                    (1u128 << (k as u32 * bits)) - 1
                };
                CtxKey::Packed(rolled & mask)
            } else {
                CtxKey::Wide(x[i - 1 - k..i - 1].into())
            };
            let node = map.entry(key).or_default();
            if i >= k + 2 {
                let c = node.count(sym);
                let t = node.total;
                log += ((c + 1) as f64).ln() - ((t as u64 + d) as f64).ln();
            }
            node.bump(sym);
        }
        rolled = (rolled << bits) | sym as u128;
    }
    Ok(LogDensity::exact(log, 0))
}

/// Log of the total mixture density of `x`. Exact.
pub fn total_log_density(x: &[u64], params: &PpmParams) -> Result<LogDensity> {
    let mut mix = PpmMixture::new(params.clone());
    for &s in x {
        mix.append(s)?;
    }
    Ok(LogDensity::exact(
        mix.total_log(),
        mix.repetition_length() + 1,
    ))
}

/// Log conditional probability `log [R(context ++ next) / R(context)]`
/// under the total mixture.
pub fn conditional_log(next: u64, context: &[u64], params: &PpmParams) -> Result<f64> {
    if next >= params.alphabet_size {
        return Err(Error::SymbolOutOfRange {
            symbol: next,
            alphabet_size: params.alphabet_size,
        });
    }
    let mut mix = PpmMixture::new(params.clone());
    for &s in context {
        mix.append(s)?;
    }
    Ok(mix.conditional_ln_all()[next as usize])
}

fn validate_symbols(x: &[u64], d: u64) -> Result<()> {
    for &s in x {
        if s >= d {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                alphabet_size: d,
            });
        }
    }
    Ok(())
}

/// Literal, slow transcriptions of the density definitions, kept free of
/// any shared code with the incremental implementation. The verification
/// suite checks the fast path against these.
pub mod reference {
    use crate::core::{tail_weight, weight};

    /// Occurrences of `w` as a substring of `s` (empty `w` matches
    /// `s.len() + 1` times).
    pub fn occurrences(w: &[u64], s: &[u64]) -> usize {
        if w.len() > s.len() {
            return 0;
        }
        (0..=s.len() - w.len())
            .filter(|&i| &s[i..i + w.len()] == w)
            .count()
    }

    /// Order-`k` log density, evaluated by naive substring counting.
    pub fn order_log_density(x: &[u64], k: usize, d: u64) -> f64 {
        let n = x.len();
        let ln_d = (d as f64).ln();
        if n == 0 || d == 1 {
            return 0.0;
        }
        if k >= n - 1 {
            return -(n as f64) * ln_d;
        }
        let mut log = -((k + 1) as f64) * ln_d;
        for i in k + 2..=n {
            let num = occurrences(&x[i - k - 1..i], &x[..i - 1]);
            let den = occurrences(&x[i - k - 1..i - 1], &x[..i - 2]);
            log += ((num + 1) as f64).ln() - ((den as u64 + d) as f64).ln();
        }
        log
    }

    /// Total mixture log density by summing every order up to `n-1`, where
    /// the defining uniform branch takes over; no repetition shortcut.
    pub fn total_log_density(x: &[u64], d: u64) -> f64 {
        let n = x.len();
        if n == 0 || d == 1 {
            return 0.0;
        }
        let uniform = (d as f64).powi(-(n as i32));
        let mut sum = 0.0;
        for k in 0..n.saturating_sub(1) {
            sum += weight(k) * order_log_density(x, k, d).exp();
        }
        sum += tail_weight(n.saturating_sub(1)) * uniform;
        sum.ln()
    }

    /// Brute-force repetition length over all `(i, j, k)` triples.
    pub fn repetition_length(x: &[u64]) -> usize {
        let n = x.len();
        let mut best = 0;
        for i in 0..n {
            for j in i + 1..n {
                let mut k = 0;
                while j + k < n && x[i + k] == x[j + k] {
                    k += 1;
                }
                best = best.max(k);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(d: u64) -> PpmParams {
        PpmParams::new(d).unwrap()
    }

    #[test]
    fn repetition_length_examples() {
        assert_eq!(repetition_length(&[0, 1, 2]), 0);
        assert_eq!(repetition_length(&[0, 0]), 1);
        assert_eq!(repetition_length(&[0, 1, 0, 1]), 2);
        assert_eq!(repetition_length(&[]), 0);
        assert_eq!(repetition_length(&[5]), 0);
        assert_eq!(repetition_length(&[1, 1, 1, 1]), 3);
    }

    #[test]
    fn repetition_length_matches_brute_force_exhaustively() {
        // All binary strings up to length 12.
        for n in 0..=12usize {
            for bits in 0u32..(1u32 << n) {
                let x: Vec<u64> = (0..n).map(|i| ((bits >> i) & 1) as u64).collect();
                assert_eq!(
                    repetition_length(&x),
                    reference::repetition_length(&x),
                    "x={x:?}"
                );
            }
        }
    }

    #[test]
    fn order_density_examples() {
        // Uniform branch: k >= n-1.
        let v = order_log_density(&[0, 1], 3, &params(2)).unwrap();
        assert!((v.log_value - 0.25f64.ln()).abs() < 1e-12);
        // Hand evaluation: (1/2) * (1+1)/(1+2).
        let v = order_log_density(&[0, 0], 0, &params(2)).unwrap();
        assert!((v.log_value - (1.0f64 / 3.0).ln()).abs() < 1e-12);
        let v = order_log_density(&[0, 1], 0, &params(2)).unwrap();
        assert!((v.log_value - (1.0f64 / 6.0).ln()).abs() < 1e-12);
        // The four order-0 values over {0,1}^2 sum to one.
        let mut sum = 0.0;
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            sum += order_log_density(&x, 0, &params(2)).unwrap().log_value.exp();
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_density_examples() {
        for d in [2u64, 3, 5] {
            let v = total_log_density(&[0], &params(d)).unwrap();
            assert!((v.log_value - (-(d as f64).ln())).abs() < 1e-12);
        }
        // w_0/3 + (1/2)(1/4) = 7/24.
        let v = total_log_density(&[0, 0], &params(2)).unwrap();
        assert!((v.log_value - (7.0f64 / 24.0).ln()).abs() < 1e-12);
        assert!(v.tail_exact);
    }

    #[test]
    fn total_matches_reference_on_small_strings() {
        for d in [2u64, 3] {
            for n in 1..=6usize {
                for code in 0..(d as usize).pow(n as u32) {
                    let mut c = code;
                    let x: Vec<u64> = (0..n)
                        .map(|_| {
                            let s = (c % d as usize) as u64;
                            c /= d as usize;
                            s
                        })
                        .collect();
                    let fast = total_log_density(&x, &params(d)).unwrap().log_value;
                    let slow = reference::total_log_density(&x, d);
                    assert!(
                        (fast - slow).abs() < 1e-10,
                        "d={d} x={x:?} fast={fast} slow={slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn normalization_exhaustive_small() {
        for d in [2u64, 3] {
            for n in 1..=5usize {
                let count = (d as usize).pow(n as u32);
                let mut sum_total = 0.0;
                let mut sum_order1 = 0.0;
                for code in 0..count {
                    let mut c = code;
                    let x: Vec<u64> = (0..n)
                        .map(|_| {
                            let s = (c % d as usize) as u64;
                            c /= d as usize;
                            s
                        })
                        .collect();
                    sum_total += total_log_density(&x, &params(d)).unwrap().log_value.exp();
                    sum_order1 += order_log_density(&x, 1, &params(d))
                        .unwrap()
                        .log_value
                        .exp();
                }
                assert!((sum_total - 1.0).abs() < 1e-9, "total d={d} n={n}");
                assert!((sum_order1 - 1.0).abs() < 1e-9, "order1 d={d} n={n}");
            }
        }
    }

    #[test]
    fn uniform_collapse_above_repetition_length() {
        let xs: Vec<Vec<u64>> = vec![
            vec![0, 0, 1],
            vec![0, 1, 1, 0, 1, 0],
            vec![1, 1, 1, 1, 0],
            vec![2, 0, 1, 2, 0, 1, 2],
        ];
        for x in xs {
            let d = x.iter().max().unwrap() + 1;
            let l = repetition_length(&x);
            let n = x.len() as f64;
            for k in l + 1..l + 4 {
                let v = order_log_density(&x, k, &params(d)).unwrap().log_value;
                assert!(
                    (v + n * (d as f64).ln()).abs() < 1e-10,
                    "x={x:?} k={k} v={v}"
                );
            }
        }
    }

    #[test]
    fn collapse_at_repetition_length_can_fail() {
        // The repeated 1-gram of (0,0,1) recurs before the last position,
        // so the order-L density differs from the uniform value; the exact
        // mixture must keep order L in the genuine range.
        let x = [0u64, 0, 1];
        assert_eq!(repetition_length(&x), 1);
        let v = order_log_density(&x, 1, &params(2)).unwrap().log_value;
        assert!((v - (1.0f64 / 12.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn mixture_tracks_incremental_state() {
        let x = [0u64, 1, 1, 0, 1, 1, 1, 0, 0, 1];
        let mut mix = PpmMixture::new(params(2));
        for (i, &s) in x.iter().enumerate() {
            mix.append(s).unwrap();
            let prefix = &x[..=i];
            assert_eq!(mix.repetition_length(), repetition_length(prefix));
            let expect = total_log_density(prefix, &params(2)).unwrap().log_value;
            assert!((mix.total_log() - expect).abs() < 1e-12);
            for k in 0..=mix.active_orders() + 2 {
                let expect = reference::order_log_density(prefix, k, 2);
                assert!(
                    (mix.order_log(k) - expect).abs() < 1e-10,
                    "prefix={prefix:?} k={k}"
                );
            }
        }
    }

    #[test]
    fn conditional_examples() {
        // Empty context: uniform marginal.
        let c = conditional_log(0, &[], &params(2)).unwrap();
        assert!((c - 0.5f64.ln()).abs() < 1e-12);
        // Conditionals sum to one.
        let mut mix = PpmMixture::new(params(2));
        for s in [0u64, 0] {
            mix.append(s).unwrap();
        }
        let sum: f64 = mix.conditional_ln_all().iter().map(|l| l.exp()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Adaptivity: a run of zeros makes zero the favourite.
        let c = conditional_log(0, &[0, 0, 0, 0], &params(2)).unwrap();
        assert!(c > 0.5f64.ln());
    }

    #[test]
    fn total_lower_bound() {
        // R(x) >= w_{n-1} D^{-n} > (1/4) (2D)^{-n}.
        for (d, x) in [
            (2u64, vec![0u64, 1, 0, 0, 1, 1, 0]),
            (3, vec![0, 1, 2, 2, 1, 0]),
        ] {
            let n = x.len() as f64;
            let v = total_log_density(&x, &params(d)).unwrap().log_value;
            let bound = 0.25f64.ln() - n * ((2 * d) as f64).ln();
            assert!(v >= bound);
        }
    }

    #[test]
    fn symbol_out_of_range_is_rejected() {
        assert!(matches!(
            total_log_density(&[0, 2], &params(2)),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kolmogorov_consistency(x in proptest::collection::vec(0u64..2, 0..32)) {
            let p = params(2);
            let base = total_log_density(&x, &p).unwrap().log_value.exp();
            let mut sum = 0.0;
            for a in 0..2u64 {
                let mut y = x.clone();
                y.push(a);
                sum += total_log_density(&y, &p).unwrap().log_value.exp();
            }
            prop_assert!((sum - base).abs() <= 1e-12);
        }

        #[test]
        fn fast_order_density_matches_reference(
            x in proptest::collection::vec(0u64..3, 0..40),
            k in 0usize..8,
        ) {
            let d = 3;
            let fast = order_log_density(&x, k, &params(d)).unwrap().log_value;
            let slow = reference::order_log_density(&x, k, d);
            prop_assert!((fast - slow).abs() <= 1e-10);
        }

        #[test]
        fn repetition_length_matches_brute(x in proptest::collection::vec(0u64..3, 0..200)) {
            prop_assert_eq!(repetition_length(&x), reference::repetition_length(&x));
        }
    }
}
