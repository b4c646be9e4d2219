//! Integer sets over a window, pairwise-coprime clique detection and
//! admissibility (no `k + 1` pairwise coprime members).

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, radical, Window};
use crate::error::{Error, Result};

/// A subset of a window, stored as one bit per integer of the window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateSet {
    window: Window,
    mask: Vec<u64>,
    len: usize,
}

impl CandidateSet {
    pub fn empty(window: Window) -> Self {
        CandidateSet {
            window,
            mask: vec![0; window.len().div_ceil(64)],
            len: 0,
        }
    }

    pub fn full(window: Window) -> Self {
        let mut set = Self::empty(window);
        for m in window.iter() {
            set.insert_unchecked(m);
        }
        set
    }

    /// Fails if any element lies outside the window. Duplicates collapse.
    pub fn new(window: Window, elements: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut set = Self::empty(window);
        for m in elements {
            if !window.contains(m) {
                return Err(Error::OutsideWindow {
                    m,
                    lo: window.lo(),
                    hi: window.hi(),
                });
            }
            set.insert_unchecked(m);
        }
        Ok(set)
    }

    /// Subset of `[1, n]`.
    pub fn in_range(n: i64, elements: impl IntoIterator<Item = i64>) -> Result<Self> {
        Self::new(Window::new(1, n.max(1))?, elements)
    }

    fn insert_unchecked(&mut self, m: i64) {
        let i = (m - self.window.lo()) as usize;
        let bit = 1u64 << (i % 64);
        if self.mask[i / 64] & bit == 0 {
            self.mask[i / 64] |= bit;
            self.len += 1;
        }
    }

    fn remove_unchecked(&mut self, m: i64) {
        let i = (m - self.window.lo()) as usize;
        let bit = 1u64 << (i % 64);
        if self.mask[i / 64] & bit != 0 {
            self.mask[i / 64] &= !bit;
            self.len -= 1;
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, m: i64) -> bool {
        if !self.window.contains(m) {
            return false;
        }
        let i = (m - self.window.lo()) as usize;
        self.mask[i / 64] & (1u64 << (i % 64)) != 0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.window.iter().filter(move |&m| self.contains(m))
    }

    pub fn elements(&self) -> Vec<i64> {
        self.iter().collect()
    }

    /// Copy with `m` added; `m` must be inside the window.
    pub fn with(&self, m: i64) -> Result<Self> {
        let mut out = self.clone();
        if !self.window.contains(m) {
            return Err(Error::OutsideWindow {
                m,
                lo: self.window.lo(),
                hi: self.window.hi(),
            });
        }
        out.insert_unchecked(m);
        Ok(out)
    }

    /// Copy with `m` removed (no-op if absent).
    pub fn without(&self, m: i64) -> Self {
        let mut out = self.clone();
        if self.window.contains(m) {
            out.remove_unchecked(m);
        }
        out
    }

    pub fn is_subset_of(&self, other: &CandidateSet) -> bool {
        self.iter().all(|m| other.contains(m))
    }
}

#[derive(Serialize, Deserialize)]
struct CandidateSetRepr {
    lo: i64,
    hi: i64,
    elements: Vec<i64>,
}

impl Serialize for CandidateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CandidateSetRepr {
            lo: self.window.lo(),
            hi: self.window.hi(),
            elements: self.elements(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CandidateSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CandidateSetRepr::deserialize(d)?;
        let window = Window::new(repr.lo, repr.hi).map_err(serde::de::Error::custom)?;
        CandidateSet::new(window, repr.elements).map_err(serde::de::Error::custom)
    }
}

/// Pairwise coprime integers, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueWitness {
    pub elements: Vec<i64>,
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Admissibility {
    Admissible,
    Witness(CliqueWitness),
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible)
    }
}

pub fn is_pairwise_coprime(elements: &[i64]) -> bool {
    elements
        .iter()
        .enumerate()
        .all(|(i, &x)| elements[i + 1..].iter().all(|&y| gcd(x, y) == 1))
}

/// Dense bit rows over a small vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

/// Coprimality graph on a list of distinct integers (ascending).
struct CoprimeGraph {
    values: Vec<i64>,
    adj: Vec<Bits>,
    // bits strictly above each vertex index
    above: Vec<Bits>,
}

impl CoprimeGraph {
    fn new(values: Vec<i64>) -> Self {
        let n = values.len();
        let mut adj = vec![Bits::zeros(n); n];
        for i in 0..n {
            for j in i + 1..n {
                if gcd(values[i], values[j]) == 1 {
                    adj[i].set(j);
                    adj[j].set(i);
                }
            }
        }
        let above = (0..n)
            .map(|i| {
                let mut b = Bits::zeros(n);
                for j in i + 1..n {
                    b.set(j);
                }
                b
            })
            .collect();
        CoprimeGraph { values, adj, above }
    }

    /// Greedy colouring into pairwise non-coprime classes; an upper bound on clique size.
    fn colour_bound(&self, cand: &Bits) -> usize {
        let mut rest = cand.clone();
        let mut colours = 0;
        while rest.first().is_some() {
            colours += 1;
            let mut class_cand = rest.clone();
            while let Some(v) = class_cand.first() {
                rest.clear(v);
                class_cand.clear(v);
                class_cand = class_cand.and_not(&self.adj[v]);
            }
        }
        colours
    }

    fn extend(&self, cand: &Bits, need: usize, picked: &mut Vec<usize>) -> bool {
        if need == 0 {
            return true;
        }
        if cand.count() < need || self.colour_bound(cand) < need {
            return false;
        }
        for v in cand.ones().collect::<Vec<_>>() {
            let next = cand.and(&self.adj[v]).and(&self.above[v]);
            picked.push(v);
            if self.extend(&next, need - 1, picked) {
                return true;
            }
            picked.pop();
        }
        false
    }

    /// Lexicographically least clique of the given size, as vertex indices.
    fn lex_least_clique(&self, size: usize) -> Option<Vec<usize>> {
        let mut all = Bits::zeros(self.values.len());
        for i in 0..self.values.len() {
            all.set(i);
        }
        let mut picked = Vec::with_capacity(size);
        self.extend(&all, size, &mut picked).then_some(picked)
    }
}

/// Lexicographically least pairwise-coprime subset of `set` with `size`
/// members, or `None` if there is none.
///
/// Members sharing a prime support are interchangeable, so only the
/// smallest member of each support class is searched. ±1 and 0 are kept
/// individually (1 and -1 are coprime to each other).
pub fn find_coprime_clique(set: &CandidateSet, size: usize) -> Option<CliqueWitness> {
    if size == 0 {
        return Some(CliqueWitness { elements: Vec::new() });
    }
    let mut seen = std::collections::BTreeSet::new();
    let reps: Vec<i64> = set
        .iter()
        .filter(|&m| {
            let r = radical(m);
            r <= 1 || seen.insert(r)
        })
        .collect();
    if reps.len() < size {
        return None;
    }
    let graph = CoprimeGraph::new(reps);
    graph.lex_least_clique(size).map(|idx| CliqueWitness {
        elements: idx.into_iter().map(|i| graph.values[i]).collect(),
    })
}

/// Admissible iff `set` has no `k + 1` pairwise coprime members.
pub fn is_admissible(set: &CandidateSet, k: usize) -> Admissibility {
    match find_coprime_clique(set, k + 1) {
        None => Admissibility::Admissible,
        Some(w) => Admissibility::Witness(w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PrimeBasis;
    use proptest::prelude::*;

    fn range_set(n: i64, elems: impl IntoIterator<Item = i64>) -> CandidateSet {
        CandidateSet::in_range(n, elems).unwrap()
    }

    #[test]
    fn pairwise_coprime_examples() {
        assert!(is_pairwise_coprime(&[2, 3, 5, 7, 11]));
        assert!(is_pairwise_coprime(&[4, 9, 25, 77]));
        assert!(!is_pairwise_coprime(&[6, 10, 15]));
        assert!(is_pairwise_coprime(&[-1, 1, 6]));
        assert!(!is_pairwise_coprime(&[0, 5]));
    }

    #[test]
    fn clique_examples() {
        let b4 = PrimeBasis::new(4).unwrap();
        let e48 = range_set(48, b4.e_set(48));
        assert_eq!(find_coprime_clique(&e48, 5), None);

        let a48 = e48.without(7).with(11).unwrap();
        assert_eq!(find_coprime_clique(&a48, 5), None);

        let s = range_set(49, [1, 2, 3, 5, 49, 11]);
        assert_eq!(
            find_coprime_clique(&s, 5).unwrap().elements,
            vec![1, 2, 3, 5, 11]
        );
    }

    #[test]
    fn admissibility_examples() {
        let b3 = PrimeBasis::new(3).unwrap();
        let a54 = range_set(54, b3.e_set(54))
            .without(5)
            .without(25)
            .with(7)
            .unwrap()
            .with(49)
            .unwrap();
        assert_eq!(a54.len(), 39);
        assert!(is_admissible(&a54, 3).is_admissible());

        let full = CandidateSet::full(Window::new(1, 11).unwrap());
        assert_eq!(
            is_admissible(&full, 3),
            Admissibility::Witness(CliqueWitness { elements: vec![1, 2, 3, 5] })
        );

        let empty = CandidateSet::empty(Window::new(1, 10).unwrap());
        for k in 1..5 {
            assert!(is_admissible(&empty, k).is_admissible());
        }
    }

    #[test]
    fn negative_windows() {
        let w = Window::new(-10, 5).unwrap();
        let s = CandidateSet::new(w, [-7, -5, -1, 1, 0, 4]).unwrap();
        // 0 is coprime only to ±1
        assert_eq!(
            find_coprime_clique(&s, 4).unwrap().elements,
            vec![-7, -5, -1, 1]
        );
        assert_eq!(find_coprime_clique(&s, 6), None);
        assert!(CandidateSet::new(w, [6]).is_err());
    }

    #[test]
    fn set_basics() {
        let s = range_set(20, [3, 5, 5, 17]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(17) && !s.contains(4) && !s.contains(100));
        assert_eq!(s.without(5).elements(), vec![3, 17]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"lo":1,"hi":20,"elements":[3,5,17]}"#);
        let back: CandidateSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    // Exhaustive oracle: every `size`-subset in lexicographic order, first coprime one wins.
    fn brute_force_clique(elems: &[i64], size: usize) -> Option<Vec<i64>> {
        fn rec(elems: &[i64], start: usize, size: usize, cur: &mut Vec<i64>) -> bool {
            if cur.len() == size {
                return is_pairwise_coprime(cur);
            }
            for i in start..elems.len() {
                cur.push(elems[i]);
                if rec(elems, i + 1, size, cur) {
                    return true;
                }
                cur.pop();
            }
            false
        }
        let mut cur = Vec::new();
        rec(elems, 0, size, &mut cur).then_some(cur)
    }

    proptest! {
        #[test]
        fn clique_matches_exhaustive(mask in 0u32..(1 << 20), size in 1usize..6) {
            let elems: Vec<i64> = (1..=20).filter(|m| mask & (1 << (m - 1)) != 0).take(12).collect();
            let set = range_set(20, elems.iter().copied());
            let got = find_coprime_clique(&set, size).map(|w| w.elements);
            prop_assert_eq!(got, brute_force_clique(&elems, size));
        }

        #[test]
        fn witness_is_valid_and_monotone(mask in 0u64..(1 << 40), extra in 0u64..(1 << 40), size in 1usize..6) {
            let small: Vec<i64> = (1..=40).filter(|m| mask & (1 << (m - 1)) != 0).collect();
            let big_set = range_set(40, small.iter().copied().chain((1..=40).filter(|m| extra & (1 << (m - 1)) != 0)));
            let small_set = range_set(40, small);
            if let Some(w) = find_coprime_clique(&small_set, size) {
                prop_assert!(is_pairwise_coprime(&w.elements));
                prop_assert_eq!(w.elements.len(), size);
                prop_assert!(w.elements.iter().all(|&m| small_set.contains(m)));
                prop_assert!(find_coprime_clique(&big_set, size).is_some());
            }
        }
    }
}
