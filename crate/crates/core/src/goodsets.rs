//! Good sets, l-good sets under a congruence condition on `l`, and the
//! generated blocks for the residues handled without a table.
//!
//! A set `{a_1 < ... < a_t}` is l-good when `gcd(P_k l + a_i, a_i - a_j) = 1`
//! for every pair. The check here is symbolic: for each prime `q` dividing a
//! difference we decide whether `q` can divide `P_k l + a_i` for some
//! admissible `l`, rather than sampling values of `l`.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, prime_support, PrimeBasis};
use crate::error::{Error, Result};

/// `q | P_k l + anchor` (when `divides`) or `q ∤ P_k l + anchor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CongruenceCondition {
    pub prime: i64,
    pub divides: bool,
    pub anchor: i64,
}

impl CongruenceCondition {
    pub fn new(basis: &PrimeBasis, prime: i64, divides: bool, anchor: i64) -> Result<Self> {
        let cond = CongruenceCondition { prime, divides, anchor };
        cond.validate(basis)?;
        Ok(cond)
    }

    /// The modulus must be a prime not dividing `P_k`; otherwise the
    /// condition does not depend on `l`.
    pub fn validate(&self, basis: &PrimeBasis) -> Result<()> {
        if !is_prime(self.prime) {
            return Err(Error::MalformedCondition(format!(
                "modulus {} is not prime",
                self.prime
            )));
        }
        if basis.primorial() % self.prime == 0 {
            return Err(Error::MalformedCondition(format!(
                "modulus {} divides P_{} = {}",
                self.prime,
                basis.k(),
                basis.primorial()
            )));
        }
        Ok(())
    }

    /// The complementary condition on the same prime and anchor.
    pub fn negated(&self) -> Self {
        CongruenceCondition { divides: !self.divides, ..*self }
    }

    /// Whether `P_k l + x` is nonzero mod `prime` for every `l` meeting the condition.
    pub fn keeps_nonzero(&self, x: i64) -> bool {
        let offset_zero = (x - self.anchor).rem_euclid(self.prime) == 0;
        if self.divides {
            // P_k l + x ≡ x - anchor
            !offset_zero
        } else {
            // P_k l + anchor ranges over the nonzero residues
            offset_zero
        }
    }

    /// Direct test of the condition for a concrete `l`.
    pub fn holds_for(&self, basis: &PrimeBasis, l: i64) -> bool {
        let divisible = (basis.primorial() as i128 * l as i128 + self.anchor as i128)
            .rem_euclid(self.prime as i128)
            == 0;
        divisible == self.divides
    }
}

impl std::fmt::Display for CongruenceCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rel = if self.divides { "|" } else { "∤" };
        write!(f, "{} {} P_k*l + {}", self.prime, rel, self.anchor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoodStatus {
    Good,
    LGoodUnderCondition,
    NotLGood,
}

/// The first pair (in lexicographic order of the sorted set) breaking the
/// criterion, and the prime responsible. `prime` is 0 for a repeated element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingPair {
    pub a_i: i64,
    pub a_j: i64,
    pub prime: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSetVerdict {
    pub status: GoodStatus,
    pub failing_pair: Option<FailingPair>,
}

impl GoodSetVerdict {
    pub fn passed(&self) -> bool {
        self.status != GoodStatus::NotLGood
    }

    fn fail(a_i: i64, a_j: i64, prime: i64) -> Self {
        GoodSetVerdict {
            status: GoodStatus::NotLGood,
            failing_pair: Some(FailingPair { a_i, a_j, prime }),
        }
    }
}

fn sorted(set: &[i64]) -> Vec<i64> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v
}

/// First offending prime for the pair, if any, under an optional condition.
fn pair_failure(basis: &PrimeBasis, x: i64, y: i64, cond: Option<&CongruenceCondition>) -> Option<i64> {
    if x == y {
        return Some(0);
    }
    prime_support(y - x).into_iter().find(|&q| {
        if basis.primorial() % q == 0 {
            x % q == 0
        } else {
            match cond {
                Some(c) if c.prime == q => !(c.keeps_nonzero(x) && c.keeps_nonzero(y)),
                _ => true,
            }
        }
    })
}

/// Good: no pair shares a base prime and no difference has a prime factor
/// above `p_k`. Good sets are l-good for every `l`.
pub fn is_good_set(basis: &PrimeBasis, set: &[i64]) -> GoodSetVerdict {
    let s = sorted(set);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] == s[j] {
                return GoodSetVerdict::fail(s[i], s[j], 0);
            }
            let shared = gcd(gcd(s[i], s[j]), basis.primorial());
            if shared > 1 {
                return GoodSetVerdict::fail(s[i], s[j], prime_support(shared)[0]);
            }
            if let Some(q) = pair_failure(basis, s[i], s[j], None) {
                return GoodSetVerdict::fail(s[i], s[j], q);
            }
        }
    }
    GoodSetVerdict { status: GoodStatus::Good, failing_pair: None }
}

/// l-goodness for every `l` satisfying `cond` (or every `l` when `cond` is
/// `None`, which is exactly the good-set criterion).
pub fn is_l_good_under(
    basis: &PrimeBasis,
    set: &[i64],
    cond: Option<&CongruenceCondition>,
) -> Result<GoodSetVerdict> {
    if let Some(c) = cond {
        c.validate(basis)?;
    }
    let s = sorted(set);
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if let Some(q) = pair_failure(basis, s[i], s[j], cond) {
                return Ok(GoodSetVerdict::fail(s[i], s[j], q));
            }
        }
    }
    Ok(GoodSetVerdict {
        status: GoodStatus::LGoodUnderCondition,
        failing_pair: None,
    })
}

/// A block produced by construction rather than read from a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedBlock {
    pub a: i64,
    pub elements: Vec<i64>,
    pub lemma: &'static str,
}

fn checked(basis: &PrimeBasis, block: GeneratedBlock) -> Result<GeneratedBlock> {
    let verdict = is_good_set(basis, &block.elements);
    if !verdict.passed() {
        return Err(Error::Internal(format!(
            "generated block for a = {} is not good: {:?}",
            block.a, verdict.failing_pair
        )));
    }
    Ok(block)
}

/// Residues -1 and 1: the negated base primes together with -1 (and 1).
pub fn lemma1_entries(basis: &PrimeBasis) -> Result<Vec<GeneratedBlock>> {
    let neg: Vec<i64> = basis.base_primes().iter().rev().map(|p| -p).collect();
    let minus = [neg.clone(), vec![-1]].concat();
    let plus = [neg, vec![-1, 1]].concat();
    [(-1, minus), (1, plus)]
        .into_iter()
        .map(|(a, elements)| checked(basis, GeneratedBlock { a, elements, lemma: "lemma1" }))
        .collect()
}

/// Residues `p_{k+1}` and `p_{k+2}`. For `p_{k+2}` the base prime 2 is
/// replaced by 4 when `p_{k+2} - 2` is prime.
pub fn lemma2_entries(basis: &PrimeBasis) -> Result<Vec<GeneratedBlock>> {
    let base = basis.base_primes().to_vec();
    let (p1, p2) = (basis.next_prime(), basis.second_next_prime());
    let first = [base.clone(), vec![p1]].concat();
    let mut second_base = base;
    if is_prime(p2 - 2) {
        second_base[0] = 4;
    }
    let second = [second_base, vec![p1, p2]].concat();
    [(p1, first), (p2, second)]
        .into_iter()
        .map(|(a, elements)| checked(basis, GeneratedBlock { a, elements, lemma: "lemma2" }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(k: usize) -> PrimeBasis {
        PrimeBasis::new(k).unwrap()
    }

    const CASE6_DIV: [i64; 8] = [7, 55, 57, 22, 43, 47, 67, 71];

    #[test]
    fn good_set_examples() {
        assert_eq!(is_good_set(&b(4), &[2, 3, 5, 7, 11]).status, GoodStatus::Good);
        assert_eq!(is_good_set(&b(3), &[8, 9, 5, 7, 11, 13, 17]).status, GoodStatus::Good);
        let v = is_good_set(&b(4), &CASE6_DIV);
        assert_eq!(v.status, GoodStatus::NotLGood);
        assert_eq!(v.failing_pair, Some(FailingPair { a_i: 22, a_j: 55, prime: 11 }));
        for k in 1..6 {
            assert_eq!(is_good_set(&b(k), &[17]).status, GoodStatus::Good);
        }
    }

    #[test]
    fn shared_base_prime_fails() {
        let v = is_good_set(&b(3), &[4, 10]);
        assert_eq!(v.failing_pair, Some(FailingPair { a_i: 4, a_j: 10, prime: 2 }));
        let v = is_good_set(&b(3), &[3, 3]);
        assert_eq!(v.failing_pair.unwrap().prime, 0);
    }

    #[test]
    fn l_good_examples() {
        let b4 = b(4);
        let div = CongruenceCondition::new(&b4, 11, true, 71).unwrap();
        let v = is_l_good_under(&b4, &CASE6_DIV, Some(&div)).unwrap();
        assert_eq!(v.status, GoodStatus::LGoodUnderCondition);

        let v = is_l_good_under(&b4, &CASE6_DIV, None).unwrap();
        assert_eq!(v.status, GoodStatus::NotLGood);
        assert_eq!(v.failing_pair, Some(FailingPair { a_i: 22, a_j: 55, prime: 11 }));

        // the complementary condition does not rescue this block
        let v = is_l_good_under(&b4, &CASE6_DIV, Some(&div.negated())).unwrap();
        assert_eq!(v.status, GoodStatus::NotLGood);

        for c in [div, div.negated(), CongruenceCondition::new(&b4, 13, false, 5).unwrap()] {
            let v = is_l_good_under(&b4, &[2, 3, 5, 7, 11], Some(&c)).unwrap();
            assert_eq!(v.status, GoodStatus::LGoodUnderCondition);
        }
    }

    #[test]
    fn malformed_conditions() {
        let b4 = b(4);
        assert!(CongruenceCondition::new(&b4, 7, true, 71).is_err());
        assert!(CongruenceCondition::new(&b4, 15, true, 71).is_err());
        let bad = CongruenceCondition { prime: 5, divides: false, anchor: 1 };
        assert!(matches!(
            is_l_good_under(&b4, &[1, 2], Some(&bad)),
            Err(Error::MalformedCondition(_))
        ));
    }

    #[test]
    fn lemma1_blocks() {
        let e = lemma1_entries(&b(4)).unwrap();
        assert_eq!(e[1].a, 1);
        let mut s = e[1].elements.clone();
        s.sort();
        assert_eq!(s, vec![-7, -5, -3, -2, -1, 1]);
        let e = lemma1_entries(&b(3)).unwrap();
        let mut s = e[0].elements.clone();
        s.sort();
        assert_eq!((e[0].a, s), (-1, vec![-5, -3, -2, -1]));
        // {-2, -1, 1}: the difference 3 exceeds p_1 = 2, so no good block exists for k = 1
        assert!(matches!(lemma1_entries(&b(1)), Err(Error::Internal(_))));
        let e = lemma1_entries(&b(2)).unwrap();
        let mut s = e[1].elements.clone();
        s.sort();
        assert_eq!(s, vec![-3, -2, -1, 1]);
        for k in 2..=10 {
            assert_eq!(lemma1_entries(&b(k)).unwrap().len(), 2);
        }
    }

    #[test]
    fn lemma2_blocks() {
        let e = lemma2_entries(&b(3)).unwrap();
        assert_eq!(e[1].a, 11);
        assert_eq!(e[1].elements, vec![2, 3, 5, 7, 11]);
        let e = lemma2_entries(&b(4)).unwrap();
        assert_eq!((e[0].a, e[0].elements.clone()), (11, vec![2, 3, 5, 7, 11]));
        assert_eq!((e[1].a, e[1].elements.clone()), (13, vec![4, 3, 5, 7, 11, 13]));
        for k in 1..=10 {
            assert_eq!(lemma2_entries(&b(k)).unwrap().len(), 2);
        }
    }

    // Direct gcd evaluation of the translates for concrete l.
    fn translates_pairwise_coprime(basis: &PrimeBasis, set: &[i64], l: i64) -> bool {
        let vals: Vec<i64> = set.iter().map(|s| basis.primorial() * l + s).collect();
        vals.iter()
            .enumerate()
            .all(|(i, &x)| vals[i + 1..].iter().all(|&y| gcd(x, y) == 1))
    }

    #[test]
    fn sampled_l_respect_conditioned_verdicts() {
        let b4 = b(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let blocks: [&[i64]; 3] = [
            &CASE6_DIV,
            &[49, 55, 51, 46, 47, 53, 61, 67, 71],
            &[65, 69, 68, 41, 53, 59, 61],
        ];
        for set in blocks {
            for divides in [true, false] {
                let cond = CongruenceCondition::new(&b4, 11, divides, 71).unwrap();
                let verdict = is_l_good_under(&b4, set, Some(&cond)).unwrap();
                if !verdict.passed() {
                    continue;
                }
                let mut sampled = 0;
                while sampled < 200 {
                    let l = rng.random_range(1..1_000_000i64);
                    if !cond.holds_for(&b4, l) {
                        continue;
                    }
                    sampled += 1;
                    assert!(translates_pairwise_coprime(&b4, set, l), "{set:?} l = {l}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn good_implies_l_good(elems in proptest::collection::btree_set(-12i64..60, 1..7), k in 1usize..5, anchor in -10i64..200, divides: bool) {
            let basis = b(k);
            let set: Vec<i64> = elems.into_iter().collect();
            let good = is_good_set(&basis, &set);
            let plain = is_l_good_under(&basis, &set, None).unwrap();
            prop_assert_eq!(good.passed(), plain.passed());
            if good.passed() {
                let q = crate::arith::first_primes(k + 3)[k + 2];
                let cond = CongruenceCondition::new(&basis, q, divides, anchor).unwrap();
                prop_assert!(is_l_good_under(&basis, &set, Some(&cond)).unwrap().passed());
                for l in 1..40 {
                    prop_assert!(translates_pairwise_coprime(&basis, &set, l));
                }
            } else {
                // the failing pair really violates the rule
                let fp = good.failing_pair.unwrap();
                prop_assert!(set.contains(&fp.a_i) && set.contains(&fp.a_j));
                prop_assert!(fp.prime > 1 && (fp.a_j - fp.a_i) % fp.prime == 0);
            }
        }
    }
}
