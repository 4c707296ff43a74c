//! The twelve acceptance criteria, one pass/fail line each. Tolerances
//! live in the suites; this file only groups their claims by criterion.

use madec_core::harness::{verify_suite, Claim, Params};

struct Criterion {
    number: usize,
    what: &'static str,
    suite: &'static str,
    /// Claim id prefix within the suite; empty selects every claim.
    prefix: &'static str,
}

const CRITERIA: [Criterion; 12] = [
    Criterion { number: 1, what: "layered DEC sandwich", suite: "gap-inherent", prefix: "layered-dec" },
    Criterion { number: 2, what: "layered first-hit risk", suite: "gap-inherent", prefix: "layered-first-hit" },
    Criterion { number: 3, what: "twin construction", suite: "fdiv-twin", prefix: "" },
    Criterion { number: 4, what: "reduction equalities and embedding sandwich", suite: "reductions", prefix: "" },
    Criterion { number: 5, what: "constrained-to-offset bound", suite: "constrained-offset", prefix: "" },
    Criterion { number: 6, what: "MAExO risk bound and decrease", suite: "maexo", prefix: "" },
    Criterion { number: 7, what: "estimation oracle", suite: "estimation", prefix: "" },
    Criterion { number: 8, what: "solver agreement", suite: "solvers", prefix: "" },
    Criterion { number: 9, what: "DEC ordering CCE <= CE <= NE", suite: "dec-ordering", prefix: "" },
    Criterion { number: 10, what: "separation instance", suite: "separation", prefix: "" },
    Criterion { number: 11, what: "MWU regret inequality", suite: "mwu", prefix: "" },
    Criterion { number: 12, what: "gap algebra", suite: "gap-bounding", prefix: "" },
];

fn describe(c: &Claim) -> String {
    format!("{}: {:.6e} {} {:.6e} (tol {:.1e}) {}", c.id, c.lhs, c.relation, c.rhs, c.tol, c.detail)
}

#[test]
fn all_criteria() {
    let params = Params::default();
    let mut cache: Vec<(&str, Vec<Claim>)> = Vec::new();
    let mut failed = Vec::new();
    for crit in &CRITERIA {
        let claims = match cache.iter().find(|(s, _)| *s == crit.suite) {
            Some((_, c)) => c.clone(),
            None => {
                let start = std::time::Instant::now();
                let r = verify_suite(crit.suite, &params).unwrap_or_else(|e| panic!("suite {}: {e}", crit.suite));
                eprintln!("  suite {} took {:.1}s", crit.suite, start.elapsed().as_secs_f64());
                cache.push((crit.suite, r.claims.clone()));
                r.claims
            }
        };
        let mine: Vec<&Claim> = claims.iter().filter(|c| c.id.starts_with(crit.prefix)).collect();
        let bad: Vec<&&Claim> = mine.iter().filter(|c| !c.pass).collect();
        let pass = !mine.is_empty() && bad.is_empty();
        println!(
            "criterion {:>2} [{}] {}: {} of {} claims hold",
            crit.number,
            if pass { "PASS" } else { "FAIL" },
            crit.what,
            mine.len() - bad.len(),
            mine.len()
        );
        for c in &bad {
            println!("    failed {}", describe(c));
        }
        if !pass {
            failed.push(crit.number);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
