//! Plain-text summaries of the JSON reports.

use std::fmt::Write;

use pcx_core::conj2::{Conjecture2Certificate, Status};
use pcx_core::scanner::{HDensity, HRecord};
use pcx_core::search::{RangeReport, SearchOutcome, SearchStatus};
use pcx_core::theorems::{CountingReport, RemarkReport, TheoremRun, UniquenessChainReport};

const SHOWN_SETS: usize = 10;

fn word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
    }
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

fn braces(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn search(o: &SearchOutcome) -> String {
    let mut s = String::new();
    match o.status {
        SearchStatus::Exact => {
            let f = o.f_value.unwrap_or_default();
            let _ = writeln!(s, "f({}, {}) = {f}   |E({}, {})| = {}", o.n, o.k, o.n, o.k, o.e_size);
            if o.enumerated {
                let count = o.maximum_set_count.unwrap_or_default();
                let _ = writeln!(
                    s,
                    "maximum sets: {count}{}   E unique maximum: {}",
                    if o.truncated { " (list truncated)" } else { "" },
                    yes_no(o.e_is_unique_maximum)
                );
            }
        }
        SearchStatus::BudgetExceeded { lower, upper } => {
            let _ = writeln!(s, "budget exceeded for n = {}, k = {}: {lower} <= f <= {upper}", o.n, o.k);
        }
    }
    for set in o.maximum_sets.iter().take(SHOWN_SETS) {
        let _ = writeln!(s, "  {}", braces(&set.elements()));
    }
    if o.maximum_sets.len() > SHOWN_SETS {
        let _ = writeln!(s, "  ... {} more listed in JSON output", o.maximum_sets.len() - SHOWN_SETS);
    }
    s
}

pub fn range(r: &RangeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>6} {:>6} {:>6} {:>8} {:>8}", "n", "f", "|E|", "f=|E|", "unique");
    for e in &r.entries {
        let f = e.f_value.map_or("?".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "{:>6} {:>6} {:>6} {:>8} {:>8}",
            e.n,
            f,
            e.e_size,
            yes_no(e.matches_e),
            yes_no(e.e_is_unique_maximum)
        );
    }
    let _ = writeln!(
        s,
        "k = {}, n in [{}, {}]: all exact {}, all f = |E| {}, all E unique {}",
        r.k,
        r.from,
        r.to,
        yes_no(Some(r.all_exact)),
        yes_no(Some(r.all_match_e)),
        yes_no(r.all_e_unique)
    );
    s
}

pub fn conjecture2(c: &Conjecture2Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "conjecture 2, k = {}: {} ({} residues)", c.k, word(c.status), c.records.len());
    for r in c.records.iter().filter(|r| !r.status.passed()) {
        let mut why: Vec<String> = r.detail.iter().cloned().collect();
        why.extend(r.entries.iter().filter_map(|e| e.first_failure.clone()));
        let _ = writeln!(s, "  a = {}: {}", r.a, why.join("; "));
    }
    s
}

pub fn counting(reports: &[CountingReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(
            s,
            "k = {} n = {:>4}: {} bound {} vs {} (slack {}){}",
            r.k,
            r.n,
            word(r.status),
            r.bound,
            r.excluded_in_range,
            r.slack,
            r.failure.as_ref().map(|f| format!(": {f}")).unwrap_or_default()
        );
    }
    s
}

pub fn chain(reports: &[UniquenessChainReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let failed: Vec<&str> = r.steps.iter().filter(|st| !st.passed).map(|st| st.step.as_str()).collect();
        let _ = writeln!(
            s,
            "n = {:>4}: {}{}",
            r.n,
            word(r.status),
            if failed.is_empty() { String::new() } else { format!(" (failed {})", failed.join(", ")) }
        );
    }
    s
}

pub fn theorem(run: &TheoremRun) -> String {
    let c = &run.certificate;
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", c.claim, word(if run.passed() { Status::Pass } else { Status::Fail }));
    let _ = writeln!(s, "  {}", c.statement);
    for comp in c.components.iter().chain(&run.extra_components) {
        let range = comp.range.map(|(a, b)| format!(" [{a}, {b}]")).unwrap_or_default();
        let detail = comp.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default();
        let _ = writeln!(s, "  {} {}{range}{detail}", word(comp.status), comp.name);
    }
    s
}

pub fn remark(r: &RemarkReport) -> String {
    format!(
        "k = {}, n = {}: {} set of size {} (|E| = {}), admissible, differs from E\n  {}\n",
        r.k,
        r.n,
        word(r.status),
        r.size,
        r.e_size,
        braces(&r.set.elements())
    )
}

pub fn scan(hits: &[HRecord], d: &HDensity) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>8} {:>10} {:>10} {:>10} {:>10}", "t", "p_t", "p_t+7", "p_t+8", "p_t+9");
    for r in hits {
        let _ = writeln!(
            s,
            "{:>8} {:>10} {:>10} {:>10} {:>10}",
            r.t, r.p_t, r.p_t_plus_7, r.p_t_plus_8, r.p_t_plus_9
        );
    }
    let _ = writeln!(s, "{} hits for t <= {} (ratio {})", d.hits, d.t_max, d.ratio);
    s
}
