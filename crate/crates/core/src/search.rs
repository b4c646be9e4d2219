//! Exact `f(n, k)` by branch and bound, with optional enumeration of every
//! maximum set.
//!
//! Integers sharing a prime support are interchangeable for coprimality and
//! are never coprime to each other, so every maximum set is a union of whole
//! support classes ("kernels"). The search therefore runs over kernels,
//! weighted by class size, looking for a heaviest kernel set whose coprimality
//! graph has no `(k + 1)`-clique.
//!
//! Kernels adjacent to everything (1 and primes above `n / 2`) are
//! interchangeable with each other; the search only includes prefixes of
//! them and the enumeration expands the choices afterwards.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{first_primes, gcd, sieve_primes};
use crate::error::{Error, Result};
use crate::sets::CandidateSet;

pub const MAX_KERNELS: usize = 256;
pub const DEFAULT_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: 1_000_000_000, max_time: Duration::from_secs(300) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchStatus {
    Exact,
    /// The search stopped early; the true value lies in `[lower, upper]`.
    BudgetExceeded { lower: usize, upper: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub nodes: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub n: i64,
    pub k: usize,
    pub status: SearchStatus,
    pub f_value: Option<usize>,
    pub e_size: usize,
    #[serde(rename = "matches_E")]
    pub matches_e: Option<bool>,
    /// Whether `maximum_sets` is the full enumeration (possibly truncated)
    /// rather than a single witness.
    pub enumerated: bool,
    pub maximum_set_count: Option<u64>,
    pub truncated: bool,
    #[serde(rename = "E_is_unique_maximum")]
    pub e_is_unique_maximum: Option<bool>,
    pub maximum_sets: Vec<CandidateSet>,
    pub diagnostics: Diagnostics,
}

impl SearchOutcome {
    pub fn is_exact(&self) -> bool {
        self.status == SearchStatus::Exact
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeMode {
    Value,
    Uniqueness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeEntry {
    pub n: i64,
    pub status: SearchStatus,
    pub f_value: Option<usize>,
    pub e_size: usize,
    #[serde(rename = "matches_E")]
    pub matches_e: Option<bool>,
    #[serde(rename = "E_is_unique_maximum")]
    pub e_is_unique_maximum: Option<bool>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeReport {
    pub k: usize,
    pub from: i64,
    pub to: i64,
    pub mode: RangeMode,
    pub all_exact: bool,
    #[serde(rename = "all_match_E")]
    pub all_match_e: bool,
    /// Only meaningful in uniqueness mode.
    #[serde(rename = "all_E_unique")]
    pub all_e_unique: Option<bool>,
    pub entries: Vec<RangeEntry>,
}

impl RangeReport {
    pub fn entry(&self, n: i64) -> Option<&RangeEntry> {
        self.entries.iter().find(|e| e.n == n)
    }
}

// ---------------------------------------------------------------------------
// fixed-width bitsets

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Bits([u64; 4]);

impl Bits {
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }

    fn clear(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn and(self, o: Bits) -> Bits {
        Bits(std::array::from_fn(|i| self.0[i] & o.0[i]))
    }

    fn or(self, o: Bits) -> Bits {
        Bits(std::array::from_fn(|i| self.0[i] | o.0[i]))
    }

    fn minus(self, o: Bits) -> Bits {
        Bits(std::array::from_fn(|i| self.0[i] & !o.0[i]))
    }

    fn ones(self) -> impl Iterator<Item = usize> {
        (0..4).flat_map(move |i| {
            let mut w = self.0[i];
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }
}

/// Greedy colouring of `cand`; the colour count bounds its clique number.
fn colour_bound(adj: &[Bits], cand: Bits, stop_at: usize) -> usize {
    let mut left = cand;
    let mut colours = 0;
    while !left.is_empty() {
        colours += 1;
        if colours >= stop_at {
            return colours;
        }
        let mut avail = left;
        while let Some(v) = avail.first() {
            left.clear(v);
            avail.clear(v);
            avail = avail.minus(adj[v]);
        }
    }
    colours
}

fn has_clique(adj: &[Bits], cand: Bits, size: usize) -> bool {
    if size == 0 {
        return true;
    }
    if cand.count() < size {
        return false;
    }
    match size {
        1 => true,
        2 => cand.ones().any(|v| !adj[v].and(cand).is_empty()),
        _ => {
            if colour_bound(adj, cand, size) < size {
                return false;
            }
            let mut rest = cand;
            while let Some(v) = rest.first() {
                rest.clear(v);
                if has_clique(adj, rest.and(adj[v]), size - 1) {
                    return true;
                }
                if rest.count() < size {
                    return false;
                }
            }
            false
        }
    }
}

// ---------------------------------------------------------------------------
// kernel graph

struct Graph {
    k: usize,
    members: Vec<Vec<i64>>,
    weight: Vec<usize>,
    adj: Vec<Bits>,
    universal: Vec<usize>,
    /// Non-universal kernels coprime to every small prime.
    residual: Bits,
    /// Kernels divisible by a small prime, heaviest first.
    fk_order: Vec<usize>,
    e_bits: Bits,
    /// Pairwise coprime groups of kernels (one integer each) for the bound.
    cover: Vec<Bits>,
    /// Per kernel: members not accounted for by any cover group.
    spare: Vec<usize>,
}

impl Graph {
    fn build(n: i64, k: usize) -> Result<Graph> {
        let primes = sieve_primes(n.max(1));
        let small: Vec<i64> = first_primes(k.min(primes.len())).into_iter().collect();
        let in_fk = |m: i64| small.iter().any(|&p| m % p == 0);

        // radical by sieve
        let nu = n.max(0) as usize;
        let mut rad = vec![1i64; nu + 1];
        for &p in &primes {
            for m in (p as usize..=nu).step_by(p as usize) {
                rad[m] *= p;
            }
        }
        let mut kernel_of = vec![usize::MAX; nu + 1];
        let mut radicals = Vec::new();
        let mut members: Vec<Vec<i64>> = Vec::new();
        for m in 1..=nu {
            if rad[m] == m as i64 {
                kernel_of[m] = radicals.len();
                radicals.push(m as i64);
                members.push(Vec::new());
            }
        }
        if radicals.len() > MAX_KERNELS {
            return Err(Error::UniverseTooLarge(radicals.len()));
        }
        for m in 1..=nu {
            let idx = kernel_of[rad[m] as usize];
            kernel_of[m] = idx;
            members[idx].push(m as i64);
        }
        let size = radicals.len();
        let weight: Vec<usize> = members.iter().map(Vec::len).collect();
        let mut adj = vec![Bits::default(); size];
        for i in 0..size {
            for j in i + 1..size {
                if gcd(radicals[i], radicals[j]) == 1 {
                    adj[i].set(j);
                    adj[j].set(i);
                }
            }
        }
        let universal: Vec<usize> =
            (0..size).filter(|&i| weight[i] == 1 && adj[i].count() + 1 == size).collect();
        let mut residual = Bits::default();
        let mut e_bits = Bits::default();
        let mut fk_order = Vec::new();
        for (i, &rad) in radicals.iter().enumerate().take(size) {
            if in_fk(rad) {
                e_bits.set(i);
                fk_order.push(i);
            } else if !universal.contains(&i) {
                residual.set(i);
            }
        }
        fk_order.sort_by_key(|&i| (std::cmp::Reverse(weight[i]), radicals[i]));

        let (cover_ints, leftover) = integer_cover(n, k, &small, &primes, &in_fk);
        let cover: Vec<Bits> = cover_ints
            .iter()
            .map(|q| {
                let mut b = Bits::default();
                for &m in q {
                    b.set(kernel_of[m as usize]);
                }
                b
            })
            .collect();
        let mut spare = vec![0usize; size];
        for m in leftover {
            spare[kernel_of[m as usize]] += 1;
        }

        Ok(Graph { k, members, weight, adj, universal, residual, fk_order, e_bits, cover, spare })
    }

    fn weight_of(&self, bits: Bits) -> usize {
        bits.ones().map(|i| self.weight[i]).sum()
    }

    fn bound(&self, avail: Bits) -> usize {
        let grouped: usize = self.cover.iter().map(|q| q.and(avail).count().min(self.k)).sum();
        grouped + avail.ones().map(|i| self.spare[i]).sum::<usize>()
    }

    /// Includes `x`, dropping every live kernel that could no longer join.
    fn include(&self, x: usize, inc: Bits, live: Bits) -> (Bits, Bits) {
        let mut inc = inc;
        inc.set(x);
        let mut live = live;
        live.clear(x);
        let touched = live.and(self.adj[x]);
        let base = inc.and(self.adj[x]);
        for v in touched.ones() {
            if has_clique(&self.adj, base.and(self.adj[v]), self.k - 1) {
                live.clear(v);
            }
        }
        (inc, live)
    }

    fn integers(&self, bits: Bits) -> Vec<i64> {
        let mut v: Vec<i64> = bits.ones().flat_map(|i| self.members[i].iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

/// Pairwise coprime groups of integers covering part of `[1, n]`: 1 with all
/// primes, then each composite free of small primes is attached to a group
/// it is coprime to, or to a fresh group built from `k` small-prime
/// composites (one per small prime). Returns the groups and the integers
/// left uncovered.
fn integer_cover(
    n: i64,
    k: usize,
    small: &[i64],
    primes: &[i64],
    in_fk: &dyn Fn(i64) -> bool,
) -> (Vec<Vec<i64>>, Vec<i64>) {
    if n < 1 {
        return (vec![], vec![]);
    }
    let mut used = vec![false; n as usize + 1];
    let mut groups: Vec<Vec<i64>> = Vec::new();
    let mut first = vec![1i64];
    first.extend(primes.iter().copied().filter(|&p| p <= n));
    for &m in &first {
        used[m as usize] = true;
    }
    groups.push(first);

    let is_prime_small = |m: i64| primes.binary_search(&m).is_ok();
    let one_small = |m: i64| -> Option<usize> {
        let hits: Vec<usize> = (0..small.len()).filter(|&i| m % small[i] == 0).collect();
        (hits.len() == 1).then(|| hits[0])
    };
    let mut pool: Vec<Vec<i64>> = vec![Vec::new(); small.len()];
    for m in 4..=n {
        if !is_prime_small(m) && in_fk(m) {
            if let Some(i) = one_small(m) {
                pool[i].push(m);
            }
        }
    }

    let residual: Vec<i64> = (2..=n).filter(|&m| !in_fk(m) && !is_prime_small(m)).collect();
    for x in residual {
        if let Some(g) = groups[1..].iter_mut().find(|g| g.iter().all(|&y| gcd(x, y) == 1)) {
            g.push(x);
            used[x as usize] = true;
            continue;
        }
        let mut chosen = Vec::with_capacity(k);
        if pick_group(&pool, &used, x, 0, &mut chosen) {
            for &m in &chosen {
                used[m as usize] = true;
            }
            used[x as usize] = true;
            chosen.push(x);
            groups.push(chosen);
        }
    }
    let leftover = (1..=n).filter(|&m| !used[m as usize]).collect();
    (groups, leftover)
}

fn pick_group(pool: &[Vec<i64>], used: &[bool], x: i64, slot: usize, chosen: &mut Vec<i64>) -> bool {
    if slot == pool.len() {
        return true;
    }
    for &m in &pool[slot] {
        if used[m as usize] || gcd(m, x) != 1 || chosen.iter().any(|&c| gcd(c, m) != 1) {
            continue;
        }
        chosen.push(m);
        if pick_group(pool, used, x, slot + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

// ---------------------------------------------------------------------------
// branch and bound

struct Searcher<'g> {
    g: &'g Graph,
    enumerate: bool,
    best: usize,
    witness: Bits,
    /// Maximum kernel sets found so far, with how many universals each uses.
    leaves: Vec<(Bits, usize)>,
    nodes: u64,
    budget: Budget,
    started: Instant,
    aborted: bool,
}

impl Searcher<'_> {
    fn record(&mut self, set: Bits, universals: usize) {
        let value = self.g.weight_of(set);
        if value > self.best {
            self.best = value;
            self.witness = set;
            self.leaves.clear();
        }
        if self.enumerate && value == self.best {
            self.leaves.push((set, universals));
        }
    }

    fn out_of_budget(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes
            || (self.nodes.is_multiple_of(4096) && self.started.elapsed() > self.budget.max_time)
        {
            self.aborted = true;
        }
        self.aborted
    }

    fn pick(&self, inc: Bits, live: Bits) -> usize {
        let open = live.and(self.g.residual);
        if !open.is_empty() {
            // most coprime links into the chosen set first
            let mut best = (0usize, usize::MAX);
            for v in open.ones() {
                let links = self.g.adj[v].and(inc).count();
                if best.1 == usize::MAX || links > best.0 {
                    best = (links, v);
                }
            }
            return best.1;
        }
        *self.g.fk_order.iter().find(|&&v| live.contains(v)).expect("live kernel present")
    }

    fn dfs(&mut self, inc: Bits, live: Bits, universals: usize) {
        if self.out_of_budget() {
            return;
        }
        let avail = inc.or(live);
        let bound = self.g.bound(avail);
        if bound < self.best || (!self.enumerate && bound == self.best) {
            return;
        }
        if live.is_empty() || !has_clique(&self.g.adj, avail, self.g.k + 1) {
            self.record(avail, universals);
            return;
        }
        let v = self.pick(inc, live);
        let (inc_with, live_with) = self.g.include(v, inc, live);
        self.dfs(inc_with, live_with, universals);
        if self.aborted {
            return;
        }
        let mut live_without = live;
        live_without.clear(v);
        self.dfs(inc, live_without, universals);
    }

    fn run(&mut self) {
        let g = self.g;
        let mut rest = Bits::default();
        for i in 0..g.weight.len() {
            if !g.universal.contains(&i) {
                rest.set(i);
            }
        }
        for u in 0..=g.universal.len().min(g.k) {
            let mut inc = Bits::default();
            let mut live = rest;
            for &x in &g.universal[..u] {
                (inc, live) = g.include(x, inc, live);
            }
            self.dfs(inc, live, u);
            if self.aborted {
                return;
            }
        }
    }
}

fn binomial(n: usize, r: usize) -> u64 {
    (0..r).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

fn combinations(n: usize, r: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, r, cur, f);
            cur.pop();
        }
    }
    go(0, n, r, &mut Vec::with_capacity(r), f);
}

/// Expands stored leaves into concrete integer sets in lexicographic order,
/// keeping the first `cap`.
fn expand(g: &Graph, leaves: &[(Bits, usize)], cap: usize) -> (Vec<Vec<i64>>, u64) {
    let mut universal_bits = Bits::default();
    for &u in &g.universal {
        universal_bits.set(u);
    }
    let total: u64 = leaves.iter().map(|&(_, u)| binomial(g.universal.len(), u)).sum();
    let mut kept: Vec<Vec<i64>> = Vec::new();
    for &(set, u) in leaves {
        let core = g.integers(set.minus(universal_bits));
        combinations(g.universal.len(), u, &mut |pick| {
            let mut v = core.clone();
            v.extend(pick.iter().map(|&i| g.members[g.universal[i]][0]));
            v.sort_unstable();
            kept.push(v);
            if kept.len() >= 2 * cap.max(1) {
                kept.sort();
                kept.truncate(cap);
            }
        });
    }
    kept.sort();
    kept.truncate(cap);
    (kept, total)
}

/// `f(n, k)` exactly, or an explicit budget-exceeded outcome with bounds.
/// With `enumerate`, every maximum set is listed (lexicographically, at most
/// `cap` of them).
pub fn exact_f(n: i64, k: usize, budget: Budget, enumerate: bool, cap: usize) -> Result<SearchOutcome> {
    if n < 1 {
        return Err(Error::OutOfRange { n, lo: 1, hi: i64::MAX });
    }
    if k == 0 {
        return Err(Error::ZeroK);
    }
    let started = Instant::now();
    let g = Graph::build(n, k)?;
    let e_size = g.weight_of(g.e_bits);
    let mut s = Searcher {
        g: &g,
        enumerate,
        best: e_size,
        witness: g.e_bits,
        leaves: Vec::new(),
        nodes: 0,
        budget,
        started,
        aborted: false,
    };
    s.run();
    let diagnostics = Diagnostics { nodes: s.nodes, elapsed_ms: started.elapsed().as_millis() as u64 };

    let to_set = |v: Vec<i64>| CandidateSet::in_range(n, v).expect("members lie in [1, n]");
    if s.aborted {
        let mut all = Bits::default();
        for i in 0..g.weight.len() {
            all.set(i);
        }
        return Ok(SearchOutcome {
            n,
            k,
            status: SearchStatus::BudgetExceeded { lower: s.best, upper: g.bound(all) },
            f_value: None,
            e_size,
            matches_e: None,
            enumerated: false,
            maximum_set_count: None,
            truncated: false,
            e_is_unique_maximum: None,
            maximum_sets: vec![to_set(g.integers(s.witness))],
            diagnostics,
        });
    }

    let (sets, count, truncated, unique) = if enumerate {
        let (sets, total) = expand(&g, &s.leaves, cap);
        let e = g.integers(g.e_bits);
        let unique = total == 1 && sets[0] == e;
        let truncated = total > sets.len() as u64;
        (sets, Some(total), truncated, Some(unique))
    } else {
        (vec![g.integers(s.witness)], None, false, None)
    };
    Ok(SearchOutcome {
        n,
        k,
        status: SearchStatus::Exact,
        f_value: Some(s.best),
        e_size,
        matches_e: Some(s.best == e_size),
        enumerated: enumerate,
        maximum_set_count: count,
        truncated,
        e_is_unique_maximum: unique,
        maximum_sets: sets.into_iter().map(to_set).collect(),
        diagnostics,
    })
}

/// Runs `exact_f` for every `n` in `[from, to]`, in parallel across `n`.
/// Uniqueness mode enumerates with a cap of 2, which is enough to decide
/// whether `E(n, k)` is the only maximum set.
pub fn check_range(k: usize, from: i64, to: i64, mode: RangeMode, budget: Budget) -> Result<RangeReport> {
    if from > to {
        return Err(Error::InvalidWindow { lo: from, hi: to });
    }
    let enumerate = mode == RangeMode::Uniqueness;
    let outcomes: Vec<SearchOutcome> = (from..=to)
        .into_par_iter()
        .map(|n| exact_f(n, k, budget, enumerate, 2))
        .collect::<Result<_>>()?;
    let entries: Vec<RangeEntry> = outcomes
        .into_iter()
        .map(|o| RangeEntry {
            n: o.n,
            status: o.status,
            f_value: o.f_value,
            e_size: o.e_size,
            matches_e: o.matches_e,
            e_is_unique_maximum: o.e_is_unique_maximum,
            diagnostics: o.diagnostics,
        })
        .collect();
    let all_exact = entries.iter().all(|e| e.status == SearchStatus::Exact);
    let all_match_e = entries.iter().all(|e| e.matches_e == Some(true));
    let all_e_unique = enumerate.then(|| entries.iter().all(|e| e.e_is_unique_maximum == Some(true)));
    Ok(RangeReport { k, from, to, mode, all_exact, all_match_e, all_e_unique, entries })
}
