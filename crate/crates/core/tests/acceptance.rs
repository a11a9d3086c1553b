//! One pass/fail line per acceptance criterion, over (3,1), (5,1) and (3,2).

use std::collections::BTreeMap;
use std::process::ExitCode;

use frobq::suites::{self, CheckResult, Status, SuiteConfig};

const TITLES: [&str; 11] = [
    "Weyl relations and quantization axiom",
    "matrix representation multiplicative, full rank",
    "restricted power cross-check",
    "p-curvature centrality, Katz identity, flat dictionary",
    "psi is a homomorphism",
    "Heisenberg exponential identities",
    "connection invariance",
    "Lie lemmas",
    "group homomorphisms",
    "unit decomposition, pairing, lattices",
    "involution",
];

fn main() -> ExitCode {
    let mut by_criterion: BTreeMap<u8, Vec<CheckResult>> = BTreeMap::new();
    for (p, n) in [(3, 1), (5, 1), (3, 2)] {
        let cfg = SuiteConfig { seed: 20261016, ..SuiteConfig::new(p, n) };
        for r in suites::run(&cfg, "all").expect("valid configuration") {
            by_criterion.entry(r.criterion).or_default().push(r);
        }
    }
    let mut failed = 0;
    for (k, title) in (1u8..=11).zip(TITLES) {
        let rs = by_criterion.remove(&k).unwrap_or_default();
        let bad: Vec<&CheckResult> = rs.iter().filter(|r| r.status != Status::Pass).collect();
        let ok = !rs.is_empty() && bad.is_empty();
        if !ok {
            failed += 1;
        }
        println!("criterion {k:>2} {} {title} ({} checks)", if ok { "PASS" } else { "FAIL" }, rs.len());
        for r in bad {
            println!("    {} [{}] {}: {}", r.check, r.params, r.status.as_str(), r.witness.as_deref().unwrap_or(""));
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
