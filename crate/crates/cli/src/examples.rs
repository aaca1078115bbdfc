//! Built-in example suites over the compiled reference data.

use std::collections::BTreeSet;

use anyhow::{bail, Result};

use secants::certifier::{self, Mode};
use secants::classifier::{self, REALITY_TOL};
use secants::geometry::orbit_expand;
use secants::monodromy::{self, Permutation, TriangleLoop};
use secants::{data, tracker, Execution, TrackerConfig};

use crate::Suite;

/// Representatives are listed to four decimals.
const REPRESENTATIVE_TOL: f64 = 5e-4;

struct Checks {
    failed: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: String) {
        println!("{} {what}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            self.failed.push(what);
        }
    }
}

pub fn run(suite: Suite, config: &TrackerConfig) -> Result<()> {
    let mut checks = Checks { failed: Vec::new() };
    match suite {
        Suite::TotallyReal => totally_real(&mut checks, config)?,
        Suite::Monodromy => monodromy_suite(&mut checks, config)?,
        Suite::Admissible => admissible(&mut checks)?,
    }
    if !checks.failed.is_empty() {
        bail!("{} check(s) failed:\n  {}", checks.failed.len(), checks.failed.join("\n  "));
    }
    Ok(())
}

fn totally_real(checks: &mut Checks, config: &TrackerConfig) -> Result<()> {
    let start = tracker::bootstrap_start_set(config)?;
    for (k, w) in data::reference().witnesses().iter().enumerate() {
        let label = format!("example {} {}", k + 1, w.triple);
        let solved = match tracker::solve_at_parameter(&w.matrix, &start, config) {
            Ok(s) => s,
            Err(e) => {
                checks.check(false, format!("{label}: {e}"));
                continue;
            }
        };
        let mut orbits = solved.orbits;
        let census = classifier::classify_records(&mut orbits, REALITY_TOL)
            .and_then(|()| classifier::link_conjugates(&mut orbits))
            .and_then(|()| classifier::census(&orbits));
        let certified = certifier::certify_census(&w.matrix, &orbits, Mode::Fast, Execution::Parallel, 2)
            .ok()
            .and_then(|(report, _)| report.census_certified);
        match census {
            Ok(c) => checks.check(
                c == w.triple && certified == Some(c),
                format!("{label}: census {c}, certified {}", certified.map_or("none".into(), |c| c.to_string())),
            ),
            Err(e) => checks.check(false, format!("{label}: {e}")),
        }
        let unmatched = w
            .representatives
            .iter()
            .filter(|rep| {
                !orbits
                    .iter()
                    .any(|o| orbit_expand(&o.representative).iter().any(|z| z.max_abs_diff(**rep) <= REPRESENTATIVE_TOL))
            })
            .count();
        if unmatched > 0 {
            println!("note {label}: {unmatched} listed representative(s) farther than {REPRESENTATIVE_TOL} from every solution");
        }
    }
    Ok(())
}

fn monodromy_suite(checks: &mut Checks, config: &TrackerConfig) -> Result<()> {
    let start = tracker::bootstrap_start_set(config)?;
    let reference = data::reference();
    let mut stated = Vec::new();
    for label in ["gamma1", "gamma2"] {
        let expected = reference.reference_loop(label).expect("builtin loop");
        let want = Permutation::parse_cycles(&expected.permutation, classifier::SECANT_COUNT)?;
        let triangle = TriangleLoop::builtin(label).expect("builtin loop");
        match monodromy::track_loop(&triangle, &start, config) {
            Ok(run) => checks.check(run.permutation == want, format!("{label}: tracked {}, stated {want}", run.permutation)),
            Err(e) => checks.check(false, format!("{label}: {e}")),
        }
        stated.push(want);
    }
    let order = monodromy::group_order(&stated);
    checks.check(order == 3_628_800, format!("order of the group generated by the stated permutations: {order}"));
    Ok(())
}

fn admissible(checks: &mut Checks) -> Result<()> {
    let tuples = classifier::admissible_tuples();
    checks.check(tuples.len() == 161, format!("{} admissible tuples", tuples.len()));
    let realized: BTreeSet<_> = data::reference().realized().into_iter().collect();
    let diff = classifier::realizability_diff(&realized)?;
    checks.check(
        diff.realized.len() == 128 && diff.missing.len() == 33,
        format!("{} realized / {} missing", diff.realized.len(), diff.missing.len()),
    );
    let corner = secants::TripleCount::new(0, 0, 10);
    checks.check(diff.missing.contains(&corner), format!("{corner} is missing"));
    Ok(())
}
