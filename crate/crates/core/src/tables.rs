//! Case tables: for each residue `a` above `p_{k+2}`, the blocks whose
//! merged `U ∪ S` sets drive the induction step.
//!
//! Tables are plain JSON. The built-in k = 3 and k = 4 tables are embedded
//! at compile time and go through the same parser and validator as
//! externally supplied files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::PrimeBasis;
use crate::error::{Error, Result};
use crate::goodsets::CongruenceCondition;

const TABLE_K3: &str = include_str!("../data/table_k3.json");
const TABLE_K4: &str = include_str!("../data/table_k4.json");

/// One merged `U ∪ S` block, in the order it was written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block {
    pub elements: Vec<i64>,
}

impl Block {
    pub fn new(elements: Vec<i64>) -> Self {
        Block { elements }
    }

    /// Members divisible by one of `p_1..p_k`.
    pub fn u_part(&self, basis: &PrimeBasis) -> Vec<i64> {
        self.elements.iter().copied().filter(|&m| basis.in_f_k(m)).collect()
    }

    /// Members coprime to `P_k`.
    pub fn s_part(&self, basis: &PrimeBasis) -> Vec<i64> {
        self.elements.iter().copied().filter(|&m| !basis.in_f_k(m)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseEntry {
    pub a_values: Vec<i64>,
    pub condition: Option<CongruenceCondition>,
    pub blocks: Vec<Block>,
    pub provenance: String,
}

impl CaseEntry {
    pub fn covers(&self, a: i64) -> bool {
        self.a_values.binary_search(&a).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTable {
    pub k: usize,
    pub entries: Vec<CaseEntry>,
}

fn invariant(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::TableInvariant { location: location.into(), reason: reason.into() }
}

/// Checks that the conditions attached to the entries for one residue split
/// the values of `l` cleanly: either a single unconditioned entry, or a
/// `q | ·` / `q ∤ ·` pair on the same prime with congruent anchors.
pub fn check_condition_split(entries: &[&CaseEntry]) -> std::result::Result<(), String> {
    match entries {
        [] => Err("no entry".into()),
        [only] => match &only.condition {
            None => Ok(()),
            Some(c) => Err(format!("only the branch {c} is present, conditions not exhaustive")),
        },
        [x, y] => match (&x.condition, &y.condition) {
            (Some(c1), Some(c2)) => {
                if c1.prime != c2.prime {
                    return Err(format!("conditions on different primes {} and {}", c1.prime, c2.prime));
                }
                if (c1.anchor - c2.anchor).rem_euclid(c1.prime) != 0 {
                    return Err(format!(
                        "anchors {} and {} differ mod {}",
                        c1.anchor, c2.anchor, c1.prime
                    ));
                }
                if c1.divides == c2.divides {
                    return Err(format!("conditions {c1} and {c2} overlap, not mutually exclusive"));
                }
                Ok(())
            }
            (None, None) => Err("two unconditioned entries".into()),
            _ => Err("an unconditioned entry overlaps a conditioned one, not mutually exclusive".into()),
        },
        many => Err(format!("{} entries; at most a complementary pair is allowed", many.len())),
    }
}

impl CaseTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: CaseTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables always serialize")
    }

    /// Entries whose `a_values` contain `a`, in file order.
    pub fn entries_for(&self, a: i64) -> Vec<&CaseEntry> {
        self.entries.iter().filter(|e| e.covers(a)).collect()
    }

    /// Structural checks only. Whether the blocks actually prove anything is
    /// decided by the conjecture-2 verifier.
    pub fn validate(&self) -> Result<()> {
        let basis = PrimeBasis::new(self.k)?;
        let floor = basis.second_next_prime();
        let mut by_residue: BTreeMap<i64, Vec<&CaseEntry>> = BTreeMap::new();

        for (i, entry) in self.entries.iter().enumerate() {
            let loc = format!("entries[{i}]");
            if entry.a_values.is_empty() {
                return Err(invariant(format!("{loc}.a_values"), "empty"));
            }
            for (j, &a) in entry.a_values.iter().enumerate() {
                if j > 0 && entry.a_values[j - 1] >= a {
                    return Err(invariant(format!("{loc}.a_values[{j}]"), "not strictly ascending"));
                }
                if !basis.in_t_k(a) {
                    return Err(invariant(
                        format!("{loc}.a_values[{j}]"),
                        format!("{a} is not in T_{}", self.k),
                    ));
                }
                if a <= floor {
                    return Err(invariant(
                        format!("{loc}.a_values[{j}]"),
                        format!("{a} <= p_{} = {floor} is handled by generated blocks", self.k + 2),
                    ));
                }
                by_residue.entry(a).or_default().push(entry);
            }
            if let Some(cond) = &entry.condition {
                cond.validate(&basis)
                    .map_err(|e| invariant(format!("{loc}.condition"), e.to_string()))?;
            }
            if entry.blocks.is_empty() {
                return Err(invariant(format!("{loc}.blocks"), "no blocks"));
            }
            for (b, block) in entry.blocks.iter().enumerate() {
                if block.elements.is_empty() {
                    return Err(invariant(format!("{loc}.blocks[{b}]"), "empty block"));
                }
                let mut sorted = block.elements.clone();
                sorted.sort_unstable();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(invariant(
                        format!("{loc}.blocks[{b}]"),
                        format!("{} appears twice", w[0]),
                    ));
                }
            }
        }

        for (a, entries) in &by_residue {
            check_condition_split(entries).map_err(|r| invariant(format!("a = {a}"), r))?;
        }

        for a in basis.t_k().into_iter().filter(|&a| a > floor) {
            if !by_residue.contains_key(&a) {
                return Err(invariant(format!("a = {a}"), "residue in T_k has no entry"));
            }
        }
        Ok(())
    }
}

/// The embedded tables for k = 3 and k = 4.
pub fn builtin_table(k: usize) -> Result<CaseTable> {
    match k {
        3 => CaseTable::from_json(TABLE_K3),
        4 => CaseTable::from_json(TABLE_K4),
        _ => Err(Error::UnsupportedK(k)),
    }
}

pub fn load_table(path: impl AsRef<Path>) -> Result<CaseTable> {
    CaseTable::from_json(&std::fs::read_to_string(path)?)
}
