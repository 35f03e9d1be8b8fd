//! Exhaustive landscape scans over all partitions.
//!
//! Canonical partitions (first sign +1) are visited via the binary
//! reflected Gray code on the n-1 free coordinates, so each step updates
//! the running inner product and the Hamming distance to sigma* in O(1).
//! The walk splits into prefix blocks: within a block only the low Gray
//! bits flip, so each block re-seeds its state in O(n) and proceeds
//! independently. Merging is by minimum with a lexicographic tiebreak,
//! which is order-independent, so parallel and sequential scans return
//! identical results.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::energy::{Energy, Threshold};
use crate::instance::Instance;
use crate::partition::Partition;
use crate::wide::I256;
use crate::CoreError;

/// Default hard cap for exhaustive scans (2^29 canonical states).
pub const DEFAULT_MAX_SCAN_N: usize = 30;

/// Default ball-enumeration budget.
pub const DEFAULT_BALL_BUDGET: u128 = 200_000_000;

/// Default level-set cap: extraction stops after this many members and
/// sets the truncation flag instead of exhausting memory.
pub const DEFAULT_LEVEL_SET_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub max_n: usize,
    pub parallel: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            max_n: DEFAULT_MAX_SCAN_N,
            parallel: true,
        }
    }
}

/// Everything an exhaustive scan learns about one instance.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub n: usize,
    /// Minimizer over all of Sigma_n (canonical representative).
    pub global_min: (Partition, Energy),
    /// Minimizer over Sigma_n minus {+-sigma*}.
    pub global_min_excl: (Partition, Energy),
    /// `zeta[k-1]` = min over d_H(sigma, sigma*) = k, k = 1..=n-1.
    pub zeta: Vec<Energy>,
    /// Count of canonical states with H <= t, per requested threshold.
    pub count_below: Vec<(Threshold, u64)>,
    /// Number of canonical states visited (2^(n-1)).
    pub states: u64,
}

/// Partitions at or below a threshold, lexicographically sorted. When the
/// cap bites, the members kept are the first ones in walk order and
/// `truncated` is set.
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub threshold: Threshold,
    pub members: Vec<Partition>,
    pub truncated: bool,
}

struct Geometry {
    n: usize,
    free: u32,
    /// Twice each coordinate value, indexed by coordinate.
    twice: Vec<I256>,
    /// Sum over coordinates with sign +1 everywhere.
    all_plus: I256,
    /// Minus-mask of sigma* restricted to free coordinates (bit j ->
    /// coordinate j+1).
    star_free: u64,
    /// Whether sigma*(1) = -1.
    star_pinned_minus: bool,
}

impl Geometry {
    fn new(inst: &Instance, sigma_star: &Partition) -> Result<Self, CoreError> {
        let n = inst.n();
        if sigma_star.n() != n {
            return Err(CoreError::DimensionMismatch(sigma_star.n(), n));
        }
        if n > 60 {
            return Err(CoreError::ScanTooLarge { n, max: 60 });
        }
        let twice = inst.doubled_numerators();
        let mut all_plus = I256::ZERO;
        for v in inst.values() {
            all_plus += v.numerator();
        }
        let mut star_free = 0u64;
        for j in 1..n {
            if sigma_star.sign(j) == -1 {
                star_free |= 1 << (j - 1);
            }
        }
        Ok(Geometry {
            n,
            free: (n - 1) as u32,
            twice,
            all_plus,
            star_free,
            star_pinned_minus: sigma_star.sign(0) == -1,
        })
    }

    /// Inner product and distance-to-sigma* of the state with Gray mask m.
    fn seed_state(&self, mask: u64) -> (I256, u32) {
        let mut ip = self.all_plus;
        let mut m = mask;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            ip -= self.twice[j + 1];
            m &= m - 1;
        }
        let d = (mask ^ self.star_free).count_ones() + self.star_pinned_minus as u32;
        (ip, d)
    }

    fn partition_of_mask(&self, mask: u64) -> Partition {
        let mut p = Partition::all_plus(self.n);
        for j in 0..self.free as usize {
            if mask >> j & 1 == 1 {
                p.set_sign(j + 1, -1);
            }
        }
        p
    }

    /// Walk states `start..start+len` in Gray order. The visitor receives
    /// (state index, distance to sigma*, |inner product|).
    fn walk<F: FnMut(u64, u32, I256)>(&self, start: u64, len: u64, mut visit: F) {
        let mut mask = start ^ (start >> 1);
        let (mut cur, mut d) = self.seed_state(mask);
        visit(start, d, cur.abs());
        for idx in start + 1..start + len {
            let t = idx.trailing_zeros() as usize;
            // Flipping coordinate t+1: from + the product loses 2x, from -
            // it gains 2x.
            if mask >> t & 1 == 1 {
                cur += self.twice[t + 1];
            } else {
                cur -= self.twice[t + 1];
            }
            mask ^= 1 << t;
            if self.star_free >> t & 1 == mask >> t & 1 {
                d -= 1;
            } else {
                d += 1;
            }
            visit(idx, d, cur.abs());
        }
    }
}

/// Best-so-far with deterministic lexicographic tiebreak: the reversed
/// Gray mask orders canonical partitions lexicographically ('+' < '-').
#[derive(Clone, Copy)]
struct Best {
    abs: I256,
    rev_mask: u64,
}

impl Best {
    const NONE: Best = Best {
        abs: I256::MAX,
        rev_mask: u64::MAX,
    };

    #[inline]
    fn offer(&mut self, abs: I256, mask: u64) {
        let rev = mask.reverse_bits();
        if abs < self.abs || (abs == self.abs && rev < self.rev_mask) {
            self.abs = abs;
            self.rev_mask = rev;
        }
    }

    fn merge(&mut self, other: &Best) {
        if other.abs < self.abs || (other.abs == self.abs && other.rev_mask < self.rev_mask)
        {
            *self = *other;
        }
    }

    fn mask(&self) -> u64 {
        self.rev_mask.reverse_bits()
    }

    fn is_some(&self) -> bool {
        self.rev_mask != u64::MAX || self.abs < I256::MAX
    }
}

struct BlockAcc {
    global: Best,
    excl: Best,
    per_distance: Vec<Option<I256>>,
    counts: Vec<u64>,
}

impl BlockAcc {
    fn new(n: usize, thresholds: usize) -> Self {
        BlockAcc {
            global: Best::NONE,
            excl: Best::NONE,
            per_distance: vec![None; n + 1],
            counts: vec![0; thresholds],
        }
    }

    fn merge(mut self, other: BlockAcc) -> BlockAcc {
        self.global.merge(&other.global);
        self.excl.merge(&other.excl);
        for (a, b) in self.per_distance.iter_mut().zip(other.per_distance) {
            *a = match (*a, b) {
                (None, x) => x,
                (x, None) => x,
                (Some(x), Some(y)) => Some(x.min(y)),
            };
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }
}

/// Choose the prefix-block split: `(block_count, block_len)`.
fn block_split(free: u32, parallel: bool) -> (u64, u64) {
    let states = 1u64 << free;
    if !parallel || free < 16 {
        return (1, states);
    }
    let block_bits = free.min(6);
    (1 << block_bits, states >> block_bits)
}

/// Visit every canonical partition once, tracking exact minima, the
/// distance-resolved minima zeta, and counts below each threshold. Ties
/// break to the lexicographically smallest canonical partition.
pub fn full_scan(
    inst: &Instance,
    sigma_star: &Partition,
    thresholds: &[Threshold],
    opts: &ScanOptions,
) -> Result<ScanResult, CoreError> {
    let n = inst.n();
    if n > opts.max_n {
        return Err(CoreError::ScanTooLarge { n, max: opts.max_n });
    }
    if n < 2 {
        return Err(CoreError::BadParameter(
            "full_scan needs n >= 2 (no states besides +-sigma* otherwise)".into(),
        ));
    }
    let geom = Geometry::new(inst, sigma_star)?;
    let thr_nums: Vec<I256> = thresholds.iter().map(|t| t.numerator()).collect();
    let thr_max = thr_nums.iter().copied().max();

    let (blocks, block_len) = block_split(geom.free, opts.parallel);
    let scan_one = |b: u64| -> BlockAcc {
        let mut acc = BlockAcc::new(n, thr_nums.len());
        geom.walk(b * block_len, block_len, |idx, d, abs| {
            let mask = idx ^ (idx >> 1);
            acc.global.offer(abs, mask);
            if d != 0 && d != n as u32 {
                acc.excl.offer(abs, mask);
            }
            let slot = &mut acc.per_distance[d as usize];
            if slot.map_or(true, |cur| abs < cur) {
                *slot = Some(abs);
            }
            if let Some(tm) = thr_max {
                if abs <= tm {
                    for (k, t) in thr_nums.iter().enumerate() {
                        if abs <= *t {
                            acc.counts[k] += 1;
                        }
                    }
                }
            }
        });
        acc
    };

    let acc = if blocks == 1 {
        scan_one(0)
    } else {
        (0..blocks)
            .into_par_iter()
            .map(scan_one)
            .reduce_with(BlockAcc::merge)
            .expect("at least one block")
    };

    debug_assert!(acc.global.is_some() && acc.excl.is_some());
    let energy = |abs: I256| Energy::from_inner_product(abs, n as u32, inst.frac_bits());
    // Distance class k over the full space folds classes k and n-k of the
    // canonical walk (H(sigma) = H(-sigma), d(-sigma) = n - d(sigma)).
    let zeta = (1..n)
        .map(|k| {
            let fold = match (acc.per_distance[k], acc.per_distance[n - k]) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("class {k} of {n} cannot be empty"),
            };
            energy(fold)
        })
        .collect();
    Ok(ScanResult {
        n,
        global_min: (geom.partition_of_mask(acc.global.mask()), energy(acc.global.abs)),
        global_min_excl: (geom.partition_of_mask(acc.excl.mask()), energy(acc.excl.abs)),
        zeta,
        count_below: thresholds
            .iter()
            .copied()
            .zip(acc.counts)
            .collect(),
        states: 1u64 << geom.free,
    })
}

/// Exact minimum of H over `1 <= d_H(sigma, sigma*) <= d`, by enumerating
/// flip subsets of size at most d. The returned partition is the canonical
/// representative of the minimizer; ties break lexicographically.
pub fn ball_min(
    inst: &Instance,
    sigma_star: &Partition,
    d: usize,
    budget: u128,
) -> Result<(Partition, Energy), CoreError> {
    let n = inst.n();
    if sigma_star.n() != n {
        return Err(CoreError::DimensionMismatch(sigma_star.n(), n));
    }
    if d == 0 || d > n {
        return Err(CoreError::BadRadius(d));
    }
    let nodes = ball_size(n, d);
    if nodes > budget {
        return Err(CoreError::BallBudget { nodes, budget });
    }

    // 2 sigma*(i) x_i: flipping coordinate i changes <sigma, X> by -step[i].
    let step: Vec<I256> = inst
        .doubled_numerators()
        .into_iter()
        .enumerate()
        .map(|(i, t)| if sigma_star.sign(i) == 1 { t } else { -t })
        .collect();
    let base = inst.inner_product(sigma_star)?;

    struct Search<'a> {
        n: usize,
        star: &'a Partition,
        step: &'a [I256],
        best_abs: I256,
        best: Option<Partition>,
        flips: Vec<usize>,
    }
    impl Search<'_> {
        fn materialize(&self) -> Partition {
            let mut sigma = self.star.clone();
            for &i in &self.flips {
                sigma.set_sign(i, -self.star.sign(i));
            }
            sigma.canonicalize()
        }
        fn offer(&mut self, abs: I256) {
            if abs < self.best_abs {
                self.best_abs = abs;
                self.best = Some(self.materialize());
            } else if abs == self.best_abs {
                // Exact ties are rare; break to lexicographically smaller.
                let cand = self.materialize();
                if self.best.as_ref().is_none_or(|b| cand < *b) {
                    self.best = Some(cand);
                }
            }
        }
        fn recurse(&mut self, start: usize, depth_left: usize, cur: I256) {
            for i in start..self.n {
                let next = cur - self.step[i];
                self.flips.push(i);
                self.offer(next.abs());
                if depth_left > 1 {
                    self.recurse(i + 1, depth_left - 1, next);
                }
                self.flips.pop();
            }
        }
    }

    let mut search = Search {
        n,
        star: sigma_star,
        step: &step,
        best_abs: I256::MAX,
        best: None,
        flips: Vec::with_capacity(d),
    };
    search.recurse(0, d, base);

    Ok((
        search.best.expect("ball of radius >= 1 is non-empty"),
        Energy::from_inner_product(search.best_abs, n as u32, inst.frac_bits()),
    ))
}

/// Sum of C(n, k) for k = 1..=d, saturating.
pub fn ball_size(n: usize, d: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for k in 1..=d.min(n) {
        c = c.saturating_mul((n - k + 1) as u128) / k as u128;
        total = total.saturating_add(c);
    }
    total
}

/// All canonical partitions with H <= threshold, lexicographically sorted,
/// truncated at `cap` (the members kept are the first in walk order).
pub fn extract_level_set(
    inst: &Instance,
    threshold: Threshold,
    cap: usize,
    opts: &ScanOptions,
) -> Result<LevelSet, CoreError> {
    let n = inst.n();
    if n > opts.max_n {
        return Err(CoreError::ScanTooLarge { n, max: opts.max_n });
    }
    let sigma_star = Partition::all_plus(n);
    let geom = Geometry::new(inst, &sigma_star)?;
    let thr = threshold.numerator();
    let (blocks, block_len) = block_split(geom.free, opts.parallel);

    let scan_one = |b: u64| -> (Vec<u64>, bool) {
        let mut hits = Vec::new();
        let mut truncated = false;
        geom.walk(b * block_len, block_len, |idx, _d, abs| {
            if abs <= thr {
                if hits.len() < cap {
                    hits.push(idx ^ (idx >> 1));
                } else {
                    truncated = true;
                }
            }
        });
        (hits, truncated)
    };

    let (mut masks, mut truncated) = if blocks == 1 {
        scan_one(0)
    } else {
        let parts: Vec<(Vec<u64>, bool)> =
            (0..blocks).into_par_iter().map(scan_one).collect();
        let mut all = Vec::new();
        let mut trunc = false;
        for (hits, t) in parts {
            trunc |= t;
            all.extend(hits);
        }
        (all, trunc)
    };
    if masks.len() > cap {
        masks.truncate(cap);
        truncated = true;
    }
    masks.sort_unstable_by_key(|m| m.reverse_bits());
    Ok(LevelSet {
        threshold,
        members: masks
            .into_iter()
            .map(|m| geom.partition_of_mask(m))
            .collect(),
        truncated,
    })
}

/// Histogram of `n * overlap` over all unordered member pairs.
pub fn overlap_histogram(ls: &LevelSet) -> Result<BTreeMap<i64, u64>, CoreError> {
    if ls.members.len() < 2 {
        return Err(CoreError::LevelSetTooSmall);
    }
    let mut hist = BTreeMap::new();
    for i in 0..ls.members.len() {
        for j in i + 1..ls.members.len() {
            let ov = ls.members[i].overlap(&ls.members[j])?;
            *hist.entry(ov.numerator).or_insert(0u64) += 1;
        }
    }
    Ok(hist)
}

/// Exhaustive search for sigma_1..sigma_m with sigma_i in sets[i], all
/// pairwise overlaps inside `[beta - eta, beta]`, and sigma_i not in
/// {+-forbid}. `None` is a proof of emptiness for the given sets. Members
/// are tried in lexicographic order, so the first hit is deterministic.
pub fn find_m_tuple(
    sets: &[&LevelSet],
    beta: f64,
    eta: f64,
    forbid: Option<&Partition>,
) -> Option<Vec<Partition>> {
    if sets.len() < 2 {
        return None;
    }
    let n = sets[0].members.first()?.n();
    let lo = ((n as f64) * (beta - eta) - 1e-9).ceil() as i64;
    let hi = ((n as f64) * beta + 1e-9).floor() as i64;
    if lo > hi {
        return None;
    }
    let forbid_mask = forbid.map(|p| {
        assert_eq!(p.n(), n, "forbid must match the set dimension");
        p.canonicalize().minus_mask_u64()
    });
    let masks: Vec<Vec<u64>> = sets
        .iter()
        .map(|s| {
            s.members
                .iter()
                .map(|p| p.minus_mask_u64())
                .filter(|m| forbid_mask != Some(*m))
                .collect()
        })
        .collect();

    let in_window = |a: u64, b: u64| {
        let ov = n as i64 - 2 * ((a ^ b).count_ones() as i64);
        (lo..=hi).contains(&ov)
    };

    fn dfs(
        masks: &[Vec<u64>],
        level: usize,
        chosen: &mut Vec<u64>,
        in_window: &impl Fn(u64, u64) -> bool,
    ) -> bool {
        if level == masks.len() {
            return true;
        }
        for &cand in &masks[level] {
            if chosen.iter().all(|&c| in_window(c, cand)) {
                chosen.push(cand);
                if dfs(masks, level + 1, chosen, in_window) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    // Bucket pruning: fix the first member, keep only in-window candidates
    // in the later sets, then search the reduced lists exhaustively.
    for &first in &masks[0] {
        let filtered: Vec<Vec<u64>> = masks[1..]
            .iter()
            .map(|ms| {
                ms.iter().copied().filter(|&m| in_window(first, m)).collect()
            })
            .collect();
        if filtered.iter().any(|f| f.is_empty()) {
            continue;
        }
        let mut chosen = Vec::with_capacity(sets.len());
        if dfs(&filtered, 0, &mut chosen, &in_window) {
            let mut out = vec![first];
            out.extend(chosen);
            return Some(
                out.into_iter()
                    .map(|m| Partition::from_minus_mask(n, m))
                    .collect(),
            );
        }
    }
    None
}
