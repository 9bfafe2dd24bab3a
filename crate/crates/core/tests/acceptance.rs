//! Acceptance criteria 1-11, one pass/fail line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed:
//! `cargo test --test acceptance`.

use csbp::verify::{Suite, SuiteReport};

const SEED: u64 = 42;

struct Criterion {
    number: u32,
    title: &'static str,
    suite: Suite,
    /// Check ids (without the suite prefix) that make up the criterion;
    /// empty means every check of the suite.
    checks: &'static [&'static str],
}

const CRITERIA: [Criterion; 11] = [
    Criterion { number: 1, title: "roundtrip exactness", suite: Suite::Roundtrip, checks: &[] },
    Criterion { number: 2, title: "flow matches λ/(1+λt)", suite: Suite::Flow, checks: &["analytic", "runtime"] },
    Criterion { number: 3, title: "semigroup defect", suite: Suite::Flow, checks: &["semigroup", "runtime"] },
    Criterion { number: 4, title: "discrete Lamperti marginals", suite: Suite::DiscreteLamperti, checks: &[] },
    Criterion { number: 5, title: "CSBP Laplace transform", suite: Suite::CsbpLaplace, checks: &[] },
    Criterion { number: 6, title: "branching property", suite: Suite::Branching, checks: &[] },
    Criterion { number: 7, title: "extinction probability", suite: Suite::Extinction, checks: &[] },
    Criterion { number: 8, title: "hitting time T_0(L f) = ∫f", suite: Suite::HittingTime, checks: &[] },
    Criterion { number: 9, title: "no negative jumps", suite: Suite::Jumps, checks: &[] },
    Criterion { number: 10, title: "weak-convergence trend", suite: Suite::Convergence, checks: &[] },
    Criterion { number: 11, title: "discontinuity of L⁻¹", suite: Suite::Example1, checks: &[] },
];

fn verdict(c: &Criterion, report: &SuiteReport) -> (bool, Vec<String>) {
    let mut lines = Vec::new();
    let mut pass = true;
    for check in &report.checks {
        let short = check.id.split_once('.').map_or(check.id.as_str(), |x| x.1);
        if !c.checks.is_empty() && !c.checks.contains(&short) {
            continue;
        }
        pass &= check.pass;
        lines.push(format!(
            "    {} {}: {}",
            if check.pass { "ok  " } else { "FAIL" },
            short,
            check.detail
        ));
    }
    (pass && !lines.is_empty(), lines)
}

fn main() {
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut failed = Vec::new();
    for c in &CRITERIA {
        if !reports.iter().any(|r| r.suite == c.suite) {
            reports.push(c.suite.run(SEED).unwrap_or_else(|e| panic!("suite {} errored: {e}", c.suite)));
        }
        let report = reports.iter().find(|r| r.suite == c.suite).expect("report");
        let (pass, lines) = verdict(c, report);
        println!(
            "criterion {:>2} [{}] {}: {}",
            c.number,
            c.suite,
            c.title,
            if pass { "PASS" } else { "FAIL" }
        );
        for l in lines {
            println!("{l}");
        }
        if !pass {
            failed.push(c.number);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
