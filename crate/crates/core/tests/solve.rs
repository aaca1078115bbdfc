use secants::classifier::{self, REALITY_TOL};
use secants::data;
use secants::tracker::{bootstrap_start_set, solve_at_parameter};
use secants::{SolutionPoint, TrackerConfig};

fn matches_up_to_action(x: &SolutionPoint, y: &SolutionPoint, tol: f64) -> bool {
    secants::geometry::orbit_expand(y).iter().any(|z| x.max_abs_diff(*z) <= tol)
}

#[test]
fn witnesses_reproduce_their_triples() {
    let config = TrackerConfig::default();
    let start = bootstrap_start_set(&config).unwrap();
    for (k, w) in data::reference().witnesses().iter().enumerate() {
        let t0 = std::time::Instant::now();
        let mut solved = solve_at_parameter(&w.matrix, &start, &config).unwrap();
        classifier::classify_records(&mut solved.orbits, REALITY_TOL).unwrap();
        let count = classifier::census(&solved.orbits).unwrap();
        eprintln!("witness {k}: {count} attempts {} {:?}", solved.attempts, t0.elapsed());
        assert_eq!(count, w.triple, "witness {k}");
        for rep in &w.representatives {
            assert!(
                solved.orbits.iter().any(|o| matches_up_to_action(rep, &o.representative, 1e-3)),
                "witness {k}: listed representative {rep:?} not found"
            );
        }
    }
}
