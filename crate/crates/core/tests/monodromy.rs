use secants::data;
use secants::geometry::SolutionPoint;
use secants::monodromy::{group_order, random_triangle, track_loop, track_loop_from, Permutation, TriangleLoop};
use secants::tracker::{bootstrap_start_set, StartSet};
use secants::TrackerConfig;

// Permutations of the printed loops under literal straight-line edges, as
// found by an independent fixed-step Newton continuation (numpy, 4000 steps
// per edge, finite-difference Jacobian) from the refined base points.
const GAMMA1_TRACKED: &str = "(1)(2)(3)(4)(5)(6)(7)(8)(9)(10)";
const GAMMA2_TRACKED: &str = "(1 6)(2 4 3 5)(7 9 10 8)";

fn setup() -> (TrackerConfig, StartSet) {
    let config = TrackerConfig::default();
    let start = bootstrap_start_set(&config).unwrap();
    (config, start)
}

#[test]
fn printed_loops_match_independent_tracker() {
    let (config, start) = setup();
    for (label, expected) in [("gamma1", GAMMA1_TRACKED), ("gamma2", GAMMA2_TRACKED)] {
        let run = track_loop(&TriangleLoop::builtin(label).unwrap(), &start, &config).unwrap();
        assert_eq!(run.permutation.to_string(), expected, "{label}");
        assert_eq!(run.path_statuses.len(), 30);
        assert!(run.endpoint_certified.iter().all(|&c| c), "{label}");
        assert!(run.match_ratios.iter().all(|&r| r > 1e6), "{label}");
    }
}

#[test]
fn reference_permutations_generate_the_full_symmetric_group() {
    let r = data::reference();
    let perms: Vec<Permutation> = ["gamma1", "gamma2"]
        .iter()
        .map(|l| Permutation::parse_cycles(&r.reference_loop(l).unwrap().permutation, 10).unwrap())
        .collect();
    assert_eq!(group_order(&perms), 3_628_800);
    let tracked = [GAMMA1_TRACKED, GAMMA2_TRACKED].map(|s| Permutation::parse_cycles(s, 10).unwrap());
    assert_eq!(group_order(&tracked), 4);
}

#[test]
fn reversed_loop_inverts() {
    let (config, start) = setup();
    let triangle = TriangleLoop::builtin("gamma2").unwrap();
    let forward = track_loop(&triangle, &start, &config).unwrap().permutation;
    let backward = track_loop(&triangle.reversed(), &start, &config).unwrap().permutation;
    assert!(backward.compose(&forward).is_identity());
}

#[test]
fn permutation_ignores_choice_of_orbit_member() {
    let (config, start) = setup();
    let triangle = TriangleLoop::builtin("gamma2").unwrap();
    let canonical = track_loop(&triangle, &start, &config).unwrap().permutation;
    let swapped: Vec<SolutionPoint> = start
        .canonical_representatives()
        .iter()
        .enumerate()
        .map(|(i, x)| match i % 3 {
            0 => x.swap_t(),
            1 => x.swap_s(),
            _ => x.swap_t().swap_s(),
        })
        .collect();
    let other = track_loop_from(&triangle, &start, &swapped, &config).unwrap().permutation;
    assert_eq!(canonical, other);
}

#[test]
fn constant_loop_is_identity() {
    let (config, start) = setup();
    let m0 = start.base_matrix.clone();
    let triangle = TriangleLoop {
        label: "constant".into(),
        vertices: [m0.clone(), m0.clone(), m0],
    };
    assert!(track_loop(&triangle, &start, &config).unwrap().permutation.is_identity());
}

#[test]
fn random_triangles_round_trip() {
    let (config, start) = setup();
    for i in 0..5 {
        let triangle = random_triangle(&start.base_matrix, 0.5, 17, i).unwrap();
        let forward = track_loop(&triangle, &start, &config).unwrap().permutation;
        let backward = track_loop(&triangle.reversed(), &start, &config).unwrap().permutation;
        eprintln!("{}: {forward}", triangle.label);
        assert!(backward.compose(&forward).is_identity(), "{}", triangle.label);
    }
}
