//! Scan of prime indices `t` for the condition
//! `p_{t+7} p_{t+8} < p_t p_{t+9}` and `p_{t+9} < p_t^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::first_primes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HRecord {
    pub t: usize,
    pub p_t: i64,
    pub p_t_plus_7: i64,
    pub p_t_plus_8: i64,
    pub p_t_plus_9: i64,
    /// Some `n` satisfies `p_{t+7} p_{t+8} <= n < p_t p_{t+9}`.
    pub window_nonempty: bool,
    pub square_ok: bool,
    pub holds: bool,
}

impl HRecord {
    /// `primes[0]` is `p_1`.
    fn at(primes: &[i64], t: usize) -> Self {
        let p = |i: usize| primes[i - 1];
        let (pt, p7, p8, p9) = (p(t), p(t + 7), p(t + 8), p(t + 9));
        let window_nonempty = (p7 as u128) * (p8 as u128) < (pt as u128) * (p9 as u128);
        let square_ok = (p9 as u128) < (pt as u128) * (pt as u128);
        HRecord {
            t,
            p_t: pt,
            p_t_plus_7: p7,
            p_t_plus_8: p8,
            p_t_plus_9: p9,
            window_nonempty,
            square_ok,
            holds: window_nonempty && square_ok,
        }
    }
}

/// Records for every `t` in `1..=t_max`.
pub fn h_records(t_max: usize) -> Vec<HRecord> {
    let primes = first_primes(t_max + 9);
    (1..=t_max).into_par_iter().map(|t| HRecord::at(&primes, t)).collect()
}

/// The indices `t <= t_max` at which the condition holds, ascending.
pub fn scan_h(t_max: usize) -> Vec<HRecord> {
    h_records(t_max).into_iter().filter(|r| r.holds).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HDensity {
    pub hits: usize,
    pub t_max: usize,
    pub ratio: f64,
}

pub fn h_density(t_max: usize) -> HDensity {
    let hits = scan_h(t_max).len();
    HDensity { hits, t_max, ratio: if t_max == 0 { 0.0 } else { hits as f64 / t_max as f64 } }
}
