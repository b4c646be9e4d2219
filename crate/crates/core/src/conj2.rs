//! Block verification for a single residue and the full induction over the
//! residue window, producing a certificate that can be re-checked offline.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::PrimeBasis;
use crate::error::{Error, Result};
use crate::goodsets::{is_l_good_under, lemma1_entries, lemma2_entries, CongruenceCondition, GeneratedBlock};
use crate::tables::{check_condition_split, Block, CaseEntry, CaseTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl SubCheck {
    fn new(name: impl Into<String>, failure: Option<String>) -> Self {
        SubCheck { name: name.into(), passed: failure.is_none(), detail: failure }
    }
}

/// Outcome of checking one entry's blocks against one residue. The blocks
/// and condition are embedded so the verdict can be replayed on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryVerdict {
    pub a: i64,
    pub condition: Option<CongruenceCondition>,
    pub provenance: String,
    pub blocks: Vec<Block>,
    pub b: i64,
    pub u_sizes: Vec<usize>,
    pub coverage: Vec<i64>,
    pub checks: Vec<SubCheck>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_failure: Option<String>,
}

impl EntryVerdict {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }

    /// The entry this verdict was computed from.
    pub fn entry(&self) -> CaseEntry {
        CaseEntry {
            a_values: vec![self.a],
            condition: self.condition,
            blocks: self.blocks.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

fn list(xs: &[i64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Checks the hypotheses of the block lemma for residue `a`: U parts drawn
/// from `F_k ∩ [b, a]` and pairwise disjoint, each of size `k` or `k - 1`,
/// each block l-good (with `a` adjoined for the short ones), and every member
/// of `T_k ∩ [b, a]` appearing in some S part.
pub fn verify_entry(basis: &PrimeBasis, a: i64, entry: &CaseEntry) -> EntryVerdict {
    let k = basis.k();
    let window = basis.residue_window();
    let cond = entry.condition.as_ref();
    let mut checks = Vec::new();

    checks.push(SubCheck::new(
        "residue",
        (!basis.in_t_k(a)).then(|| format!("{a} is not in T_{k}")),
    ));

    let condition_failure = cond.and_then(|c| match c.validate(basis) {
        Err(e) => Some(e.to_string()),
        Ok(()) if (c.anchor - a).rem_euclid(c.prime) != 0 => {
            Some(format!("anchor {} is not congruent to a = {a} mod {}", c.anchor, c.prime))
        }
        Ok(()) => None,
    });
    checks.push(SubCheck::new("condition", condition_failure.clone()));

    let us: Vec<Vec<i64>> = entry.blocks.iter().map(|bl| bl.u_part(basis)).collect();
    let ss: Vec<Vec<i64>> = entry.blocks.iter().map(|bl| bl.s_part(basis)).collect();

    let stray: Vec<i64> = ss.iter().flatten().copied().filter(|&s| !window.contains(s)).collect();
    let empty = entry.blocks.is_empty() || entry.blocks.iter().any(|bl| bl.elements.is_empty());
    checks.push(SubCheck::new(
        "split",
        if empty {
            Some("entry has an empty block or no blocks".into())
        } else if !stray.is_empty() {
            Some(format!("S elements outside T_{k}: {}", list(&stray)))
        } else {
            None
        },
    ));

    let b = entry.blocks.iter().flat_map(|bl| bl.elements.iter().copied()).min().unwrap_or(a);
    let above: Vec<i64> = us.iter().flatten().copied().filter(|&u| u > a).collect();
    checks.push(SubCheck::new(
        "range",
        if b < window.lo() {
            Some(format!("b = {b} is below the window floor {}", window.lo()))
        } else if !above.is_empty() {
            Some(format!("U elements above a = {a}: {}", list(&above)))
        } else {
            None
        },
    ));

    let mut seen = BTreeSet::new();
    let mut repeated = BTreeSet::new();
    for u in us.iter().flatten() {
        if !seen.insert(*u) {
            repeated.insert(*u);
        }
    }
    let repeated: Vec<i64> = repeated.into_iter().collect();
    checks.push(SubCheck::new(
        "disjointness",
        (!repeated.is_empty()).then(|| format!("U elements shared between blocks: {}", list(&repeated))),
    ));

    let bad_sizes: Vec<String> = us
        .iter()
        .enumerate()
        .filter(|(_, u)| u.len() != k && u.len() + 1 != k)
        .map(|(i, u)| format!("block {} has |U| = {}", i + 1, u.len()))
        .collect();
    checks.push(SubCheck::new(
        "block-size",
        (!bad_sizes.is_empty()).then(|| bad_sizes.join("; ")),
    ));

    for (i, (u, s)) in us.iter().zip(&ss).enumerate() {
        let name = format!("l-good[{}]", i + 1);
        let failure = if condition_failure.is_some() {
            Some("condition is malformed".to_string())
        } else if u.len() + 1 == k && s.contains(&a) {
            Some(format!("|U| = {} but a = {a} lies in S", u.len()))
        } else {
            let mut set = entry.blocks[i].elements.clone();
            if u.len() + 1 == k {
                set.push(a);
            }
            match is_l_good_under(basis, &set, cond) {
                Ok(v) => v.failing_pair.map(|p| {
                    if p.prime == 0 {
                        format!("{} repeated", p.a_i)
                    } else {
                        format!("pair ({}, {}) fails at prime {}", p.a_i, p.a_j, p.prime)
                    }
                }),
                Err(e) => Some(e.to_string()),
            }
        };
        checks.push(SubCheck::new(name, failure));
    }

    let union: BTreeSet<i64> = ss.iter().flatten().copied().collect();
    let coverage: Vec<i64> = (b..=a).filter(|&m| basis.in_t_k(m)).collect();
    let uncovered: Vec<i64> = coverage.iter().copied().filter(|m| !union.contains(m)).collect();
    checks.push(SubCheck::new(
        "coverage",
        (!uncovered.is_empty()).then(|| format!("uncovered: {}", list(&uncovered))),
    ));

    let first_failure = checks
        .iter()
        .find(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail.as_deref().unwrap_or("")));
    EntryVerdict {
        a,
        condition: entry.condition,
        provenance: entry.provenance.clone(),
        blocks: entry.blocks.clone(),
        b,
        u_sizes: us.iter().map(Vec::len).collect(),
        coverage,
        status: Status::from_bool(first_failure.is_none()),
        checks,
        first_failure,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "lemma1")]
    Lemma1,
    #[serde(rename = "lemma2")]
    Lemma2,
    #[serde(rename = "lemma3-skip")]
    Lemma3Skip,
    #[serde(rename = "table")]
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueRecord {
    pub a: i64,
    pub rule: Rule,
    pub status: Status,
    pub entries: Vec<EntryVerdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjecture2Certificate {
    pub claim: String,
    pub k: usize,
    pub status: Status,
    /// Smallest `l` the verdicts apply to. Every check is uniform in `l`
    /// (or split by exhaustive congruence classes), so this is always 1.
    pub valid_from_l: i64,
    pub notes: Vec<String>,
    pub records: Vec<ResidueRecord>,
}

impl Conjecture2Certificate {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    pub fn record(&self, a: i64) -> Option<&ResidueRecord> {
        self.records.iter().find(|r| r.a == a)
    }
}

fn generated_entry(block: &GeneratedBlock) -> CaseEntry {
    CaseEntry {
        a_values: vec![block.a],
        condition: None,
        blocks: vec![Block::new(block.elements.clone())],
        provenance: format!("generated ({})", block.lemma),
    }
}

fn record_from(a: i64, rule: Rule, entries: Vec<EntryVerdict>, detail: Option<String>) -> ResidueRecord {
    let ok = detail.is_none() && entries.iter().all(EntryVerdict::passed);
    ResidueRecord { a, rule, status: Status::from_bool(ok), entries, detail }
}

fn verify_generated(basis: &PrimeBasis, a: i64, rule: Rule, generated: &Result<Vec<GeneratedBlock>>) -> ResidueRecord {
    match generated {
        Ok(blocks) => match blocks.iter().find(|g| g.a == a) {
            Some(g) => record_from(a, rule, vec![verify_entry(basis, a, &generated_entry(g))], None),
            None => record_from(a, rule, vec![], Some(format!("no generated block for a = {a}"))),
        },
        Err(e) => record_from(a, rule, vec![], Some(e.to_string())),
    }
}

fn verify_residue(
    basis: &PrimeBasis,
    table: &CaseTable,
    a: i64,
    lemma1: &Result<Vec<GeneratedBlock>>,
    lemma2: &Result<Vec<GeneratedBlock>>,
) -> ResidueRecord {
    let lo = basis.residue_window().lo();
    if a == lo {
        let detail = (!basis.in_f_k(a)).then(|| format!("{a} is not in F_k"));
        return record_from(a, Rule::Base, vec![], detail);
    }
    if !basis.in_t_k(a) {
        return record_from(a, Rule::Lemma3Skip, vec![], None);
    }
    if a == -1 || a == 1 {
        return verify_generated(basis, a, Rule::Lemma1, lemma1);
    }
    if a == basis.next_prime() || a == basis.second_next_prime() {
        return verify_generated(basis, a, Rule::Lemma2, lemma2);
    }
    let entries = table.entries_for(a);
    if entries.is_empty() {
        return record_from(a, Rule::Table, vec![], Some(format!("no table entry for a = {a}")));
    }
    let split = check_condition_split(&entries).err().map(|r| format!("conditions for a = {a}: {r}"));
    let verdicts = entries.iter().map(|e| verify_entry(basis, a, e)).collect();
    record_from(a, Rule::Table, verdicts, split)
}

/// Walks every residue of the window in order and justifies each one.
pub fn verify_conjecture2(basis: &PrimeBasis, table: &CaseTable) -> Result<Conjecture2Certificate> {
    if table.k != basis.k() {
        return Err(Error::Internal(format!(
            "table is for k = {} but the basis has k = {}",
            table.k,
            basis.k()
        )));
    }
    let lemma1 = lemma1_entries(basis);
    let lemma2 = lemma2_entries(basis);
    let window = basis.residue_window();
    let residues: Vec<i64> = window.iter().collect();
    let records: Vec<ResidueRecord> = residues
        .par_iter()
        .map(|&a| verify_residue(basis, table, a, &lemma1, &lemma2))
        .collect();
    let ok = records.iter().all(|r| r.status.passed());
    let notes = vec![
        format!(
            "residues {} and {} use generated blocks (base primes with p_{{k+1}}, and with p_{{k+2}})",
            basis.next_prime(),
            basis.second_next_prime()
        ),
        "verdicts hold for every l >= 1, or for every l in each branch of an exhaustive congruence split".into(),
    ];
    Ok(Conjecture2Certificate {
        claim: "conjecture2".into(),
        k: basis.k(),
        status: Status::from_bool(ok),
        valid_from_l: 1,
        notes,
        records,
    })
}

/// Recomputes a record from its embedded blocks and reports whether the
/// stored verdicts are reproduced exactly.
pub fn reverify_record(basis: &PrimeBasis, record: &ResidueRecord) -> bool {
    let replayed: Vec<EntryVerdict> =
        record.entries.iter().map(|v| verify_entry(basis, record.a, &v.entry())).collect();
    if replayed != record.entries {
        return false;
    }
    let ok = match record.rule {
        Rule::Base => basis.in_f_k(record.a) && record.a == basis.residue_window().lo(),
        Rule::Lemma3Skip => !basis.in_t_k(record.a) && basis.residue_window().contains(record.a),
        Rule::Lemma1 | Rule::Lemma2 => replayed.len() == 1 && replayed[0].passed(),
        Rule::Table => {
            let entries: Vec<CaseEntry> = replayed.iter().map(EntryVerdict::entry).collect();
            let refs: Vec<&CaseEntry> = entries.iter().collect();
            check_condition_split(&refs).is_ok() && replayed.iter().all(EntryVerdict::passed)
        }
    };
    ok == record.status.passed()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Window;
    use crate::sets::{find_coprime_clique, CandidateSet};
    use crate::tables::builtin_table;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(k: usize) -> PrimeBasis {
        PrimeBasis::new(k).unwrap()
    }

    #[test]
    fn k3_case2_entry() {
        let t = builtin_table(3).unwrap();
        let v = verify_entry(&basis(3), 23, t.entries_for(23)[0]);
        assert!(v.passed(), "{:?}", v.first_failure);
        assert_eq!(v.b, -5);
        assert_eq!(v.u_sizes, vec![3, 3, 2]);
        assert_eq!(v.coverage, vec![-1, 1, 7, 11, 13, 17, 19, 23]);
    }

    #[test]
    fn k4_case9_entry() {
        let t = builtin_table(4).unwrap();
        let v = verify_entry(&basis(4), 97, t.entries_for(97)[0]);
        assert!(v.passed());
        assert_eq!(v.b, 91);
        assert_eq!(v.coverage, vec![97]);
    }

    #[test]
    fn coverage_mutation_detected() {
        let t = builtin_table(3).unwrap();
        let mut entry = t.entries_for(19)[0].clone();
        entry.blocks[1].elements.retain(|&m| m != 19);
        let v = verify_entry(&basis(3), 19, &entry);
        assert!(!v.passed());
        let failure = v.first_failure.unwrap();
        assert!(failure.starts_with("coverage"), "{failure}");
        assert!(failure.contains("19"));
    }

    #[test]
    fn case6_both_branches_pass() {
        let t = builtin_table(4).unwrap();
        let entries = t.entries_for(71);
        assert_eq!(entries.len(), 2);
        for e in entries {
            let v = verify_entry(&basis(4), 71, e);
            assert!(v.passed(), "{:?} {:?}", e.condition, v.first_failure);
        }
    }

    #[test]
    fn case6_divides_branch_fails_without_condition() {
        let t = builtin_table(4).unwrap();
        let mut e = t.entries_for(71).into_iter().find(|e| e.condition.is_some_and(|c| c.divides)).unwrap().clone();
        e.condition = None;
        assert!(!verify_entry(&basis(4), 71, &e).passed());
    }

    #[test]
    fn first_failure_follows_check_order() {
        let t = builtin_table(3).unwrap();
        let mut entry = t.entries_for(23)[0].clone();
        // duplicate a U element across blocks and drop coverage: disjointness reported first
        entry.blocks[2].elements.push(8);
        entry.blocks[2].elements.retain(|&m| m != 13);
        let v = verify_entry(&basis(3), 23, &entry);
        assert!(v.first_failure.unwrap().starts_with("disjointness"));
        let names: Vec<&str> = v.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"coverage"));
    }

    #[test]
    fn residue_not_in_t_k_reported() {
        let t = builtin_table(3).unwrap();
        let v = verify_entry(&basis(3), 21, t.entries_for(23)[0]);
        assert!(v.first_failure.unwrap().starts_with("residue"));
    }

    #[test]
    fn full_pipeline_k3() {
        let cert = verify_conjecture2(&basis(3), &builtin_table(3).unwrap()).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.records.len(), 30);
        assert_eq!(cert.records[0].a, -6);
        assert_eq!(cert.records[0].rule, Rule::Base);
        assert_eq!(cert.record(-1).unwrap().rule, Rule::Lemma1);
        assert_eq!(cert.record(11).unwrap().rule, Rule::Lemma2);
        assert_eq!(cert.record(13).unwrap().rule, Rule::Table);
        assert_eq!(cert.record(0).unwrap().rule, Rule::Lemma3Skip);
        assert_eq!(cert.valid_from_l, 1);
    }

    #[test]
    fn full_pipeline_k4() {
        let cert = verify_conjecture2(&basis(4), &builtin_table(4).unwrap()).unwrap();
        let failed: Vec<_> = cert
            .records
            .iter()
            .filter(|r| !r.status.passed())
            .map(|r| (r.a, r.detail.clone(), r.entries.iter().map(|e| e.first_failure.clone()).collect::<Vec<_>>()))
            .collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(cert.records.len(), 210);
        assert_eq!(cert.records.first().unwrap().a, -10);
        assert_eq!(cert.records.last().unwrap().a, 199);
    }

    #[test]
    fn deleting_a_branch_breaks_the_certificate() {
        let mut t = builtin_table(4).unwrap();
        let idx = t.entries.iter().position(|e| e.condition.is_some()).unwrap();
        t.entries.remove(idx);
        let cert = verify_conjecture2(&basis(4), &t).unwrap();
        assert!(!cert.passed());
        let bad: Vec<i64> = cert.records.iter().filter(|r| !r.status.passed()).map(|r| r.a).collect();
        assert_eq!(bad, vec![71]);
        assert!(cert.record(71).unwrap().detail.as_ref().unwrap().contains("not exhaustive"));
    }

    #[test]
    fn missing_residue_named() {
        let mut t = builtin_table(3).unwrap();
        t.entries.remove(1);
        let cert = verify_conjecture2(&basis(3), &t).unwrap();
        assert!(!cert.passed());
        assert!(cert.record(23).unwrap().detail.as_ref().unwrap().contains("23"));
    }

    #[test]
    fn records_replay_from_json() {
        for k in [3, 4] {
            let b = basis(k);
            let cert = verify_conjecture2(&b, &builtin_table(k).unwrap()).unwrap();
            let back: Conjecture2Certificate = serde_json::from_str(&cert.to_json()).unwrap();
            assert_eq!(back, cert);
            for r in &back.records {
                assert!(reverify_record(&b, r), "a = {}", r.a);
            }
        }
    }

    #[test]
    fn tampered_record_does_not_replay() {
        let b = basis(3);
        let cert = verify_conjecture2(&b, &builtin_table(3).unwrap()).unwrap();
        let mut r = cert.record(23).unwrap().clone();
        r.entries[0].blocks[0].elements.retain(|&m| m != 23);
        assert!(!reverify_record(&b, &r));
    }

    #[test]
    fn table_for_other_k_rejected() {
        assert!(verify_conjecture2(&basis(4), &builtin_table(3).unwrap()).is_err());
    }

    // Greedy random adversaries: B ⊆ [lo, a] such that the translates
    // 30l + B contain no 4 pairwise coprime members never beat F_3.
    #[test]
    fn soundness_spot_check_k3() {
        let b = basis(3);
        let lo = b.residue_window().lo();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..500 {
            let l: i64 = rng.random_range(1..=50);
            let a: i64 = rng.random_range(lo..=b.residue_window().hi());
            let mut order: Vec<i64> = (lo..=a).collect();
            order.shuffle(&mut rng);
            let shift = b.primorial() * l;
            let win = Window::new(shift + lo, shift + a).unwrap();
            let mut chosen = CandidateSet::empty(win);
            for x in order {
                let trial = chosen.with(shift + x).unwrap();
                if find_coprime_clique(&trial, 4).is_none() {
                    chosen = trial;
                }
            }
            let bound = (lo..=a).filter(|&m| b.in_f_k(m)).count();
            assert!(chosen.len() <= bound, "l = {l}, a = {a}: |B| = {} > {bound}", chosen.len());
        }
    }
}
