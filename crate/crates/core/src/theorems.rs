//! Finite-range counting arguments, the k = 4 uniqueness chain, the
//! `p_k^2 - 1` construction, and assembly of full-range certificates from
//! a conjecture-2 certificate plus per-`n` base evidence.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, PrimeBasis};
use crate::conj2::{verify_conjecture2, Conjecture2Certificate, Status};
use crate::error::{Error, Result};
use crate::search::{check_range, Budget, RangeMode, RangeReport};
use crate::sets::{is_admissible, is_pairwise_coprime, CandidateSet};
use crate::tables::builtin_table;

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "elements", rename_all = "kebab-case")]
pub enum SchemeClass {
    /// 1 together with every prime.
    PrimesAndOne,
    Explicit(Vec<i64>),
}

impl SchemeClass {
    fn within(&self, n: i64) -> Vec<i64> {
        match self {
            SchemeClass::PrimesAndOne => (1..=n).filter(|&m| m == 1 || is_prime(m)).collect(),
            SchemeClass::Explicit(v) => {
                let mut v: Vec<i64> = v.iter().copied().filter(|&m| (1..=n).contains(&m)).collect();
                v.sort_unstable();
                v
            }
        }
    }

    fn contains(&self, m: i64) -> bool {
        match self {
            SchemeClass::PrimesAndOne => m == 1 || is_prime(m),
            SchemeClass::Explicit(v) => v.contains(&m),
        }
    }

    fn label(&self) -> String {
        match self {
            SchemeClass::PrimesAndOne => "primes and 1".into(),
            SchemeClass::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", parts.join(", "))
            }
        }
    }
}

/// Pairwise coprime classes; whatever of `F_k` they miss forms one more
/// class of unrestricted elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub k: usize,
    pub classes: Vec<SchemeClass>,
}

impl PartitionScheme {
    pub fn new(k: usize, classes: Vec<SchemeClass>) -> Result<Self> {
        PrimeBasis::new(k)?;
        let intensional = classes.iter().filter(|c| **c == SchemeClass::PrimesAndOne).count();
        if intensional > 1 {
            return Err(Error::Internal("the primes-and-one class may appear only once".into()));
        }
        for c in &classes {
            if let SchemeClass::Explicit(v) = c {
                if !is_pairwise_coprime(v) {
                    return Err(Error::Internal(format!("class {} is not pairwise coprime", c.label())));
                }
            }
        }
        Ok(PartitionScheme { k, classes })
    }

    /// Class members lying in `F_k`: the elements the scheme trades away.
    pub fn excluded(&self) -> BTreeSet<i64> {
        let basis = PrimeBasis::new(self.k).expect("validated at construction");
        let mut y = BTreeSet::new();
        for c in &self.classes {
            match c {
                SchemeClass::PrimesAndOne => y.extend(basis.base_primes().iter().copied()),
                SchemeClass::Explicit(v) => y.extend(v.iter().copied().filter(|&m| basis.in_f_k(m))),
            }
        }
        y
    }
}

/// The built-in schemes for k = 3 and k = 4.
pub fn builtin_scheme(k: usize) -> Result<PartitionScheme> {
    use SchemeClass::*;
    let classes = match k {
        3 => vec![PrimesAndOne, Explicit(vec![4, 9, 25, 77]), Explicit(vec![8, 27, 55, 49])],
        4 => vec![
            PrimesAndOne,
            Explicit(vec![121, 49, 25, 9, 4]),
            Explicit(vec![143, 133, 115, 51, 32]),
            Explicit(vec![187, 91, 125, 27, 8]),
            Explicit(vec![169, 77, 85, 81, 16]),
        ],
        _ => return Err(Error::UnsupportedK(k)),
    };
    let scheme = PartitionScheme::new(k, classes)?;
    if k == 4 {
        let printed: BTreeSet<i64> =
            [2, 3, 5, 7, 49, 25, 9, 4, 133, 115, 51, 32, 91, 125, 27, 8, 77, 85, 81, 16].into();
        if scheme.excluded() != printed {
            return Err(Error::Internal("k = 4 scheme does not reproduce the printed excluded set".into()));
        }
    }
    Ok(scheme)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLedger {
    pub class: String,
    pub in_range: usize,
    pub contribution: usize,
    pub excluded_in_range: usize,
    pub pairwise_coprime: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingReport {
    pub claim: String,
    pub k: usize,
    pub n: i64,
    pub status: Status,
    pub uncovered: Vec<i64>,
    pub classes: Vec<ClassLedger>,
    pub bound: usize,
    pub excluded_in_range: usize,
    pub slack: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

/// Pigeonhole bound: an admissible set meets each pairwise coprime class in
/// at most `k` elements. A pass means `f(n, k) = |E(n, k)|`.
pub fn verify_counting(scheme: &PartitionScheme, n: i64) -> CountingReport {
    let basis = PrimeBasis::new(scheme.k).expect("validated at construction");
    let k = scheme.k;
    let y = scheme.excluded();

    let uncovered: Vec<i64> = (1..=n)
        .filter(|&m| !basis.in_f_k(m) && !scheme.classes.iter().any(|c| c.contains(m)))
        .collect();
    let classes: Vec<ClassLedger> = scheme
        .classes
        .iter()
        .map(|c| {
            let members = c.within(n);
            ClassLedger {
                class: c.label(),
                in_range: members.len(),
                contribution: members.len().min(k),
                excluded_in_range: members.iter().filter(|m| y.contains(m)).count(),
                pairwise_coprime: is_pairwise_coprime(&members),
            }
        })
        .collect();
    let bound: usize = classes.iter().map(|c| c.contribution).sum();
    let excluded_in_range = y.iter().filter(|&&m| (1..=n).contains(&m)).count();
    let slack = excluded_in_range as i64 - bound as i64;

    let failure = if !uncovered.is_empty() {
        Some(format!("{} integers in [1, {n}] lie in no class and outside F_k, first {}", uncovered.len(), uncovered[0]))
    } else if let Some(c) = classes.iter().find(|c| !c.pairwise_coprime) {
        Some(format!("class {} is not pairwise coprime", c.class))
    } else if slack < 0 {
        Some(format!("class bound {bound} exceeds the {excluded_in_range} excluded elements of F_k in range"))
    } else {
        None
    };
    CountingReport {
        claim: "counting".into(),
        k,
        n,
        status: status(failure.is_none()),
        uncovered,
        classes,
        bound,
        excluded_in_range,
        slack,
        failure,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub step: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTradeoff {
    pub p: i64,
    /// `|{11, 121, 143, 187} ∩ [1, n]|`
    pub gained: usize,
    /// `|{p, p^2, 13p, 17p, 19p} ∩ [1, n]|`
    pub lost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessChainReport {
    pub claim: String,
    pub n: i64,
    pub status: Status,
    pub steps: Vec<ChainStep>,
    pub extra_candidates: Vec<i64>,
    pub tradeoffs: Vec<PrimeTradeoff>,
    pub proof_structure: String,
}

const CHAIN_LO: i64 = 49;
const CHAIN_HI: i64 = 199;
const EXTRA: [i64; 4] = [11, 121, 143, 187];

/// The finite facts behind uniqueness for k = 4 at `n ∈ [49, 199]`.
pub fn verify_uniqueness_chain_k4(n: i64) -> Result<UniquenessChainReport> {
    if !(CHAIN_LO..=CHAIN_HI).contains(&n) {
        return Err(Error::OutOfRange { n, lo: CHAIN_LO, hi: CHAIN_HI });
    }
    Ok(uniqueness_chain_k4_unchecked(n))
}

/// Same checks without the range guard, for probing where the chain breaks.
pub fn uniqueness_chain_k4_unchecked(n: i64) -> UniquenessChainReport {
    let scheme = builtin_scheme(4).expect("built-in scheme");
    let mut steps = Vec::new();

    let counting = verify_counting(&scheme, n);
    steps.push(ChainStep {
        step: "s1".into(),
        passed: counting.status.passed() && counting.slack == 0,
        detail: format!("counting slack {} ({:?})", counting.slack, counting.status),
    });

    let w2 = [121, 49, 25, 9, 4];
    let clash: Vec<i64> = (1..=n)
        .filter(|&m| gcd(m, 2310) == 1 && w2.iter().any(|&w| gcd(m, w) != 1))
        .collect();
    steps.push(ChainStep {
        step: "s2".into(),
        passed: clash.is_empty(),
        detail: if clash.is_empty() {
            "every m coprime to 2310 is coprime to the whole second class".into()
        } else {
            format!("not coprime to the second class: {clash:?}")
        },
    });

    let extra: Vec<i64> = (1..=n).filter(|&m| gcd(m, 210) == 1 && gcd(m, 2310) > 1).collect();
    let expected: Vec<i64> = EXTRA.iter().copied().filter(|&m| m <= n).collect();
    steps.push(ChainStep {
        step: "s3".into(),
        passed: extra == expected,
        detail: format!("{extra:?}"),
    });

    let mut bad = Vec::new();
    for p in [2i64, 3, 5, 7] {
        for y in [p * p, 13 * p, 17 * p, 19 * p] {
            let mut five: Vec<i64> = [2, 3, 5, 7, 11].into_iter().filter(|&q| q != p).collect();
            five.push(y);
            if !is_pairwise_coprime(&five) {
                bad.push((p, y));
            }
        }
    }
    steps.push(ChainStep {
        step: "s4".into(),
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "each replacement yields 5 pairwise coprime integers".into()
        } else {
            format!("failing (p, y): {bad:?}")
        },
    });

    let gained = expected.len();
    let tradeoffs: Vec<PrimeTradeoff> = [2i64, 3, 5, 7]
        .into_iter()
        .map(|p| PrimeTradeoff {
            p,
            gained,
            lost: [p, p * p, 13 * p, 17 * p, 19 * p].iter().filter(|&&m| m <= n).count(),
        })
        .collect();
    let short: Vec<String> =
        tradeoffs.iter().filter(|t| t.gained >= t.lost).map(|t| format!("p = {}: {} >= {}", t.p, t.gained, t.lost)).collect();
    steps.push(ChainStep {
        step: "s5".into(),
        passed: short.is_empty(),
        detail: if short.is_empty() {
            "strict loss for every p".into()
        } else {
            short.join("; ")
        },
    });

    let ok = steps.iter().all(|s| s.passed);
    UniquenessChainReport {
        claim: "uniqueness-chain-k4".into(),
        n,
        status: status(ok),
        steps,
        extra_candidates: extra,
        tradeoffs,
        proof_structure: "s1 forces 4 elements from each of the first two classes; s2 rules out everything \
                          coprime to 2310; s3 leaves only 11, 121, 143, 187 outside F_4; if one of them is used \
                          then some p in {2,3,5,7} is dropped from the first class, s4 removes p, p^2, 13p, 17p, 19p, \
                          and s5 shows this loses more than it gains"
            .into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkReport {
    pub claim: String,
    pub k: usize,
    pub n: i64,
    pub set: CandidateSet,
    pub size: usize,
    pub e_size: usize,
    pub admissible: bool,
    pub differs_from_e: bool,
    pub status: Status,
}

/// At `n = p_k^2 - 1`, swapping `p_k` for `p_{k+1}` in `E(n, k)` keeps the
/// set admissible, so `E` is not the unique maximum there.
pub fn remark_counterexample(basis: &PrimeBasis) -> Result<RemarkReport> {
    let k = basis.k();
    let pk = basis.prime(k);
    let n = pk * pk - 1;
    let e = basis.e_set(n);
    let elements = e.iter().copied().filter(|&m| m != pk).chain([basis.next_prime()]);
    let set = CandidateSet::in_range(n, elements)?;
    let admissible = is_admissible(&set, k).is_admissible();
    let differs = set.elements() != e;
    if !admissible || set.len() != e.len() || !differs {
        return Err(Error::Internal(format!(
            "construction at n = {n}, k = {k} failed: admissible {admissible}, size {} vs {}",
            set.len(),
            e.len()
        )));
    }
    Ok(RemarkReport {
        claim: "remark".into(),
        k,
        n,
        size: set.len(),
        e_size: e.len(),
        set,
        admissible,
        differs_from_e: differs,
        status: Status::Pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvidenceGrade {
    Value,
    Uniqueness,
}

/// What is known at a single `n` and how it was established.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseEvidence {
    pub n: i64,
    pub grade: EvidenceGrade,
    pub source: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub range: Option<(i64, i64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCertificate {
    pub claim: String,
    pub k: usize,
    pub n0: i64,
    pub l0: i64,
    /// `P_k l0 - p_{k+1}`: base evidence must reach this far.
    pub base_top: i64,
    pub statement: String,
    pub components: Vec<Component>,
    pub missing: Vec<i64>,
    pub status: Status,
}

impl TheoremCertificate {
    pub fn passed(&self) -> bool {
        self.status.passed()
    }
}

/// Splices a conjecture-2 certificate valid from `l0` with uniqueness
/// evidence on `[n0, P_k l0 - p_{k+1}]`.
pub fn assemble_theorem(
    claim: &str,
    k: usize,
    n0: i64,
    l0: i64,
    conj2: &Conjecture2Certificate,
    base: &[BaseEvidence],
) -> Result<TheoremCertificate> {
    let basis = PrimeBasis::new(k)?;
    let top = basis.primorial() * l0 - basis.next_prime();
    let mut components = Vec::new();

    let conj_ok = conj2.passed() && conj2.k == k;
    components.push(Component {
        name: "conjecture2".into(),
        status: status(conj_ok),
        range: Some((basis.residue_window().lo(), basis.residue_window().hi())),
        detail: (!conj_ok).then(|| format!("certificate for k = {} has status {:?}", conj2.k, conj2.status)),
    });
    let l_ok = conj2.valid_from_l <= l0;
    components.push(Component {
        name: "conjecture2-l-range".into(),
        status: status(l_ok),
        range: None,
        detail: Some(format!("valid from l = {}, needed from l = {l0}", conj2.valid_from_l)),
    });

    let splice_ok = top >= n0;
    components.push(Component {
        name: "splice".into(),
        status: status(splice_ok),
        range: Some((n0, top)),
        detail: (!splice_ok).then(|| format!("P_k l0 - p_(k+1) = {top} is below n0 = {n0}")),
    });

    let covered: BTreeSet<i64> = base
        .iter()
        .filter(|e| e.passed && e.grade == EvidenceGrade::Uniqueness)
        .map(|e| e.n)
        .collect();
    let missing: Vec<i64> = (n0..=top).filter(|n| !covered.contains(n)).collect();
    let sources: BTreeSet<&str> = base.iter().map(|e| e.source.as_str()).collect();
    components.push(Component {
        name: "base-range".into(),
        status: status(missing.is_empty() && splice_ok),
        range: Some((n0, top)),
        detail: Some(if missing.is_empty() {
            format!("uniqueness evidence from {}", sources.into_iter().collect::<Vec<_>>().join(" + "))
        } else {
            format!("no uniqueness evidence for n = {}", missing[0])
        }),
    });

    let ok = components.iter().all(|c| c.status.passed());
    Ok(TheoremCertificate {
        claim: claim.into(),
        k,
        n0,
        l0,
        base_top: top,
        statement: format!(
            "for every n >= {n0}, an admissible subset of [1, n] with at least |E(n, {k})| elements equals E(n, {k})"
        ),
        components,
        missing,
        status: status(ok),
    })
}

/// Everything a theorem run produced, for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremRun {
    pub certificate: TheoremCertificate,
    pub conjecture2: Conjecture2Certificate,
    pub search: Option<RangeReport>,
    pub counting: Vec<CountingReport>,
    pub uniqueness_chain: Vec<UniquenessChainReport>,
    pub extra_components: Vec<Component>,
}

impl TheoremRun {
    pub fn passed(&self) -> bool {
        self.certificate.passed() && self.extra_components.iter().all(|c| c.status.passed())
    }
}

fn from_search(report: &RangeReport) -> Vec<BaseEvidence> {
    report
        .entries
        .iter()
        .map(|e| BaseEvidence {
            n: e.n,
            grade: EvidenceGrade::Uniqueness,
            source: "search".into(),
            passed: e.e_is_unique_maximum == Some(true),
        })
        .collect()
}

/// k = 3 from n = 55: the conjecture-2 certificate plus exhaustive search on
/// `[55, 83]`, where `83 = 30 * 3 - 7`.
pub fn theorem1(budget: Budget) -> Result<TheoremRun> {
    let basis = PrimeBasis::new(3)?;
    let conj = verify_conjecture2(&basis, &builtin_table(3)?)?;
    let search = check_range(3, 55, 83, RangeMode::Uniqueness, budget)?;
    let certificate = assemble_theorem("theorem1", 3, 55, 3, &conj, &from_search(&search))?;
    Ok(TheoremRun {
        certificate,
        conjecture2: conj,
        search: Some(search),
        counting: vec![],
        uniqueness_chain: vec![],
        extra_components: vec![],
    })
}

/// k = 4: counting on `[7, 199]` for the value, the uniqueness chain on
/// `[49, 199]`, and a search cross-check on `[7, 60]`.
pub fn theorem2(budget: Budget) -> Result<TheoremRun> {
    let basis = PrimeBasis::new(4)?;
    let scheme = builtin_scheme(4)?;
    let conj = verify_conjecture2(&basis, &builtin_table(4)?)?;
    let counting: Vec<CountingReport> = (7..=199).into_par_iter().map(|n| verify_counting(&scheme, n)).collect();
    let chain: Vec<UniquenessChainReport> =
        (49..=199).into_par_iter().map(verify_uniqueness_chain_k4).collect::<Result<_>>()?;
    let search = check_range(4, 7, 60, RangeMode::Uniqueness, budget)?;

    let base: Vec<BaseEvidence> = chain
        .iter()
        .map(|c| BaseEvidence {
            n: c.n,
            grade: EvidenceGrade::Uniqueness,
            source: "counting + uniqueness chain".into(),
            passed: c.status.passed(),
        })
        .collect();
    let certificate = assemble_theorem("theorem2", 4, 49, 1, &conj, &base)?;

    let counting_ok = counting.iter().all(|c| c.status.passed());
    let search_ok = search.all_exact
        && search.all_match_e
        && search.entries.iter().all(|e| e.e_is_unique_maximum == Some(e.n >= 49));
    let extra_components = vec![
        Component {
            name: "value-range".into(),
            status: status(counting_ok),
            range: Some((7, 199)),
            detail: Some("f(n, 4) = |E(n, 4)| by counting".into()),
        },
        Component {
            name: "search-cross-check".into(),
            status: status(search_ok),
            range: Some((7, 60)),
            detail: Some("search agrees: f = |E| throughout, E unique exactly from n = 49".into()),
        },
    ];
    Ok(TheoremRun { certificate, conjecture2: conj, search: Some(search), counting, uniqueness_chain: chain, extra_components })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conjecture1Certificate {
    pub claim: String,
    pub k: usize,
    pub n: i64,
    pub status: Status,
    pub counting: CountingReport,
}

/// `f(P_4 - p_5, 4) = |E(199, 4)|`, by the counting bound at 199.
pub fn conjecture1_k4() -> Result<Conjecture1Certificate> {
    let counting = verify_counting(&builtin_scheme(4)?, 199);
    Ok(Conjecture1Certificate {
        claim: "conjecture1-k4".into(),
        k: 4,
        n: 199,
        status: counting.status,
        counting,
    })
}
