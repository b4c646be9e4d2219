//! Primes, primorials and the residue sets built from the first `k` primes.
//!
//! Everything here is exact signed 64-bit arithmetic. `PrimeBasis` refuses
//! any `k` whose primorial would not fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `k` whose primorial fits in an `i64`.
pub const MAX_BASIS_K: usize = 15;

/// All primes `<= limit`, ascending. Empty for `limit < 2`.
pub fn sieve_primes(limit: i64) -> Vec<i64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as i64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Upper bound on the `count`-th prime (Rosser: `p_n < n (ln n + ln ln n)` for `n >= 6`).
fn nth_prime_upper_bound(count: usize) -> i64 {
    if count < 6 {
        return 13;
    }
    let n = count as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as i64 + 1
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<i64> {
    let mut primes = sieve_primes(nth_prime_upper_bound(count));
    primes.truncate(count);
    primes
}

/// Greatest common divisor of `|a|` and `|b|`; `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn is_prime(m: i64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2i64;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `|m|`, ascending. Empty for `m` in {-1, 0, 1}.
pub fn prime_support(m: i64) -> Vec<i64> {
    let mut rest = m.unsigned_abs();
    let mut out = Vec::new();
    if rest <= 1 {
        return out;
    }
    let mut d = 2u64;
    while d * d <= rest {
        if rest.is_multiple_of(d) {
            out.push(d as i64);
            while rest.is_multiple_of(d) {
                rest /= d;
            }
        }
        d += 1;
    }
    if rest > 1 {
        out.push(rest as i64);
    }
    out
}

/// Squarefree kernel of `|m|` (product of its distinct primes); 1 for ±1, 0 for 0.
pub fn radical(m: i64) -> i64 {
    if m == 0 {
        return 0;
    }
    prime_support(m).into_iter().product()
}

/// Largest prime dividing `|m|`. `None` for -1, 0 and 1 (0 has no largest prime factor).
pub fn largest_prime_factor(m: i64) -> Option<i64> {
    if m == 0 {
        return None;
    }
    prime_support(m).last().copied()
}

/// Inclusive integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i64) -> bool {
        self.lo <= m && m <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

/// The first `k + 2` primes and the primorial of the first `k`.
///
/// `p_{k+1}` and `p_{k+2}` are carried because the residue window and the
/// generated base-case blocks need them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeBasis {
    k: usize,
    primes: Vec<i64>,
    primorial: i64,
}

impl PrimeBasis {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k > MAX_BASIS_K {
            return Err(Error::BasisTooLarge(k));
        }
        let primes = first_primes(k + 2);
        let primorial = primes[..k]
            .iter()
            .try_fold(1i64, |acc, &p| acc.checked_mul(p))
            .ok_or(Error::BasisTooLarge(k))?;
        if primes[k + 1] >= 2 * primes[k] {
            return Err(Error::Internal(format!(
                "Bertrand check failed: p_{} = {} >= 2 * {}",
                k + 2,
                primes[k + 1],
                primes[k]
            )));
        }
        Ok(PrimeBasis { k, primes, primorial })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `p_1, ..., p_{k+2}`.
    pub fn primes(&self) -> &[i64] {
        &self.primes
    }

    /// `p_1, ..., p_k`.
    pub fn base_primes(&self) -> &[i64] {
        &self.primes[..self.k]
    }

    /// 1-based: `prime(1) == 2`.
    pub fn prime(&self, i: usize) -> i64 {
        self.primes[i - 1]
    }

    pub fn primorial(&self) -> i64 {
        self.primorial
    }

    /// `p_{k+1}`
    pub fn next_prime(&self) -> i64 {
        self.primes[self.k]
    }

    /// `p_{k+2}`
    pub fn second_next_prime(&self) -> i64 {
        self.primes[self.k + 1]
    }

    /// True iff one of `p_1..p_k` divides `m`. 0 is divisible by everything.
    pub fn in_f_k(&self, m: i64) -> bool {
        self.base_primes().iter().any(|&p| m % p == 0)
    }

    pub fn is_coprime_to_primorial(&self, m: i64) -> bool {
        !self.in_f_k(m)
    }

    /// `|E(n, k)|`: how many of `1..=n` lie in `F_k`.
    pub fn count_e(&self, n: i64) -> i64 {
        (1..=n).filter(|&m| self.in_f_k(m)).count() as i64
    }

    /// `E(n, k)` itself, ascending.
    pub fn e_set(&self, n: i64) -> Vec<i64> {
        (1..=n).filter(|&m| self.in_f_k(m)).collect()
    }

    /// `[-p_{k+1} + 1, P_k - p_{k+1}]`, the window residues `a` range over.
    pub fn residue_window(&self) -> Window {
        Window {
            lo: -self.next_prime() + 1,
            hi: self.primorial - self.next_prime(),
        }
    }

    /// `T_k`: members of the residue window coprime to `P_k`, ascending.
    pub fn t_k(&self) -> Vec<i64> {
        self.residue_window()
            .iter()
            .filter(|&a| gcd(a, self.primorial) == 1)
            .collect()
    }

    pub fn in_t_k(&self, a: i64) -> bool {
        self.residue_window().contains(a) && gcd(a, self.primorial) == 1
    }
}
