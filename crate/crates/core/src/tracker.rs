//! Parameter homotopy from the base instance to arbitrary targets.
//!
//! Because `F(x; M)` is linear in `M`, the straight segment
//! `M(a) = (1 - a) g M_start + a M_target` keeps the start solutions valid
//! for any nonzero `g`; a random unit `g` (the gamma trick) moves the
//! segment off the discriminant for generic targets. Paths are followed with
//! an RK4 predictor on the Davidenko equation `J dx/da = -dF/da` and a
//! Newton corrector at fixed `a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{self, OrbitRecord};
use crate::data;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{self, orbit_expand, ParameterMatrix, SolutionPoint};
use crate::linalg::{self, Lu4, Mat4, Vec4};
use crate::rng;

/// Start points closer than this (relative) are considered the same solution.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Refinement displacement above which a listed start representative is flagged.
pub const DISPLACEMENT_FLAG: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tolerance: f64,
    pub refine_tolerance: f64,
    pub max_newton_iters: usize,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
    /// Endpoints beyond this norm are reported as diverged.
    pub divergence_bound: f64,
    /// Condition number above which a refined endpoint counts as singular.
    pub singular_condition: f64,
    /// Independent gamma draws tried by [`solve_at_parameter`] before giving up.
    pub attempts: usize,
    #[serde(skip)]
    pub gamma: Complex64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl TrackerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            initial_step: 0.05,
            min_step: 1e-14,
            max_step: 0.1,
            corrector_tolerance: 1e-9,
            refine_tolerance: 1e-13,
            max_newton_iters: 12,
            max_corrector_iters: 3,
            max_steps: 10_000,
            divergence_bound: 1e8,
            singular_condition: 1e13,
            attempts: 3,
            gamma: rng::unit_complex(seed, 0),
            seed,
            execution: Execution::default(),
        }
    }

    /// Settings for monodromy edges: a tighter corrector so the discrete
    /// endpoint matching cannot be corrupted by drift.
    pub fn for_monodromy(&self) -> Self {
        Self {
            corrector_tolerance: 1e-11,
            ..self.clone()
        }
    }

    /// A single attempt along the plain segment from the base matrix.
    pub fn without_gamma(&self) -> Self {
        Self {
            gamma: Complex64::new(1.0, 0.0),
            attempts: 1,
            ..self.clone()
        }
    }

    /// Gamma used by retry `attempt` (attempt 0 uses `self.gamma`).
    pub fn gamma_for_attempt(&self, attempt: usize) -> Complex64 {
        if attempt == 0 {
            self.gamma
        } else {
            rng::unit_complex(self.seed, attempt as u64)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= 1.0
            && self.initial_step <= self.max_step
            && self.corrector_tolerance > 0.0
            && self.refine_tolerance > 0.0
            && (self.gamma.norm() - 1.0).abs() < 1e-12
            && self.attempts >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::parse("tracker config", "inconsistent step sizes, tolerances or gamma"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Converged,
    StepUnderflow,
    MaxSteps,
    SingularEndpoint,
    DegenerateEndpoint,
    Diverged,
}

impl std::fmt::Display for PathStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub status: PathStatus,
    pub endpoint: Option<SolutionPoint>,
    pub steps_taken: usize,
    pub final_residual: f64,
}

impl PathResult {
    pub fn converged(&self) -> bool {
        self.status == PathStatus::Converged
    }

    fn failed(status: PathStatus, steps_taken: usize, endpoint: Option<SolutionPoint>) -> Self {
        Self {
            status,
            endpoint,
            steps_taken,
            final_residual: f64::NAN,
        }
    }
}

/// Outcome of [`newton_refine`].
#[derive(Clone, Copy, Debug)]
pub struct Refined {
    pub point: SolutionPoint,
    pub iterations: usize,
    pub residual: f64,
}

/// Full Newton steps until the scaled residual drops below `tol`.
///
/// The residual is the backward error `max_i |f_i| / scale_i`, where
/// `scale_i` sums the moduli of the terms of `f_i`; it is what rounding
/// allows to reach regardless of the size of the solution.
pub fn newton_refine(
    m: &ParameterMatrix,
    x0: &SolutionPoint,
    tol: f64,
    max_iters: usize,
) -> Result<Refined> {
    newton_refine_entries(m.entries(), x0, tol, max_iters)
}

pub(crate) fn newton_refine_entries(
    m: &Mat4,
    x0: &SolutionPoint,
    tol: f64,
    max_iters: usize,
) -> Result<Refined> {
    let mut x = *x0;
    let mut residual = geometry::scaled_residual(m, &x);
    for iteration in 0..=max_iters {
        if residual < tol {
            return Ok(Refined {
                point: x,
                iterations: iteration,
                residual,
            });
        }
        if iteration == max_iters {
            break;
        }
        let lu = Lu4::new(&geometry::jacobian_entries(m, &x)).ok_or(Error::SingularJacobian)?;
        let dx = lu.solve(&geometry::evaluate_entries(m, &x));
        x = SolutionPoint::from_array(linalg::sub(&x.to_array(), &dx));
        if !x.is_finite() {
            break;
        }
        residual = geometry::scaled_residual(m, &x);
    }
    Err(Error::NoConvergence {
        tol,
        iters: max_iters,
        residual,
    })
}

/// The base instance with its 40 solutions, ready to start homotopies from.
#[derive(Clone, Debug)]
pub struct StartSet {
    pub base_matrix: ParameterMatrix,
    /// Refined versions of the ten listed representatives, in listed order;
    /// position `i` is orbit label `i + 1`.
    pub representatives: Vec<SolutionPoint>,
    /// Orbit expansion of the representatives: entries `4i..4i+4` form orbit `i`.
    pub full_set: Vec<SolutionPoint>,
    /// Distance each listed 4-decimal point moved under refinement.
    pub displacements: Vec<f64>,
}

impl StartSet {
    pub fn canonical_representatives(&self) -> Vec<SolutionPoint> {
        self.representatives
            .iter()
            .map(classifier::canonical_representative)
            .collect()
    }

    /// Representatives whose refinement moved more than [`DISPLACEMENT_FLAG`].
    pub fn flagged(&self) -> Vec<usize> {
        (0..self.displacements.len())
            .filter(|&i| self.displacements[i] > DISPLACEMENT_FLAG)
            .collect()
    }
}

/// Refines the ten compiled-in representatives at the base matrix and
/// expands them to the full 40-point start set.
pub fn bootstrap_start_set(config: &TrackerConfig) -> Result<StartSet> {
    let reference = data::reference();
    let base_matrix = reference.base_matrix();
    let listed = reference.base_representatives();
    let mut representatives = Vec::with_capacity(listed.len());
    let mut displacements = Vec::with_capacity(listed.len());
    for (i, x) in listed.iter().enumerate() {
        let refined = newton_refine(&base_matrix, x, config.refine_tolerance, config.max_newton_iters)
            .map_err(|e| Error::BootstrapFailure(format!("representative {}: {e}", i + 1)))?;
        displacements.push(refined.point.distance(*x));
        representatives.push(refined.point);
    }
    let full_set: Vec<SolutionPoint> = representatives.iter().flat_map(orbit_expand).collect();
    for (i, x) in full_set.iter().enumerate() {
        if (x.t1 - x.t2).norm() <= DISTINCT_TOL || (x.s1 - x.s2).norm() <= DISTINCT_TOL {
            return Err(Error::BootstrapFailure(format!("start point {i} is degenerate")));
        }
        for (j, y) in full_set.iter().enumerate().skip(i + 1) {
            if x.distance(*y) <= DISTINCT_TOL {
                return Err(Error::BootstrapFailure(format!("start points {i} and {j} collide")));
            }
        }
    }
    Ok(StartSet {
        base_matrix,
        representatives,
        full_set,
        displacements,
    })
}

/// Tracks one solution along `(1 - a) g M_start + a M_target`, `a: 0 -> 1`,
/// where `g = config.gamma` if `use_gamma` and `g = 1` otherwise.
pub fn track_path(
    start: &ParameterMatrix,
    target: &ParameterMatrix,
    x_start: &SolutionPoint,
    config: &TrackerConfig,
    use_gamma: bool,
) -> PathResult {
    let gamma = if use_gamma {
        config.gamma
    } else {
        Complex64::new(1.0, 0.0)
    };
    track_segment(&start.scaled(gamma), target, x_start, config)
}

/// Tracks along the literal segment from `start` to `target`.
pub(crate) fn track_segment(
    start: &ParameterMatrix,
    target: &ParameterMatrix,
    x_start: &SolutionPoint,
    config: &TrackerConfig,
) -> PathResult {
    let a_mat = start.entries();
    let b_mat = target.entries();
    let direction: Mat4 =
        std::array::from_fn(|i| std::array::from_fn(|j| b_mat[i][j] - a_mat[i][j]));
    let velocity = |x: &SolutionPoint, a: f64| -> Option<Vec4> {
        let m = ParameterMatrix::lerp(a_mat, b_mat, a);
        let lu = Lu4::new(&geometry::jacobian_entries(&m, x))?;
        let rhs = geometry::evaluate_entries(&direction, x);
        let v = lu.solve(&rhs).map(|z| -z);
        v.iter().all(|z| z.is_finite()).then_some(v)
    };
    let shift = |x: &SolutionPoint, v: &Vec4, h: f64| -> SolutionPoint {
        SolutionPoint::from_array(std::array::from_fn(|i| x.to_array()[i] + v[i] * h))
    };

    let mut x = *x_start;
    let mut a = 0.0_f64;
    let mut h = config.initial_step;
    let mut successes = 0;
    let mut steps = 0;
    while a < 1.0 {
        if steps >= config.max_steps {
            return PathResult::failed(PathStatus::MaxSteps, steps, None);
        }
        steps += 1;
        let last = h >= 1.0 - a;
        let step = if last { 1.0 - a } else { h };
        let predicted = (|| {
            let k1 = velocity(&x, a)?;
            let k2 = velocity(&shift(&x, &k1, step / 2.0), a + step / 2.0)?;
            let k3 = velocity(&shift(&x, &k2, step / 2.0), a + step / 2.0)?;
            let k4 = velocity(&shift(&x, &k3, step), a + step)?;
            let v: Vec4 = std::array::from_fn(|i| (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) / 6.0);
            Some(shift(&x, &v, step))
        })();
        let next_a = if last { 1.0 } else { a + step };
        let corrected = predicted.and_then(|p| {
            let m = ParameterMatrix::lerp(a_mat, b_mat, next_a);
            correct(&m, &p, x.distance(p), config)
        });
        match corrected {
            Some(next) => {
                x = next;
                a = next_a;
                successes += 1;
                if successes >= 5 {
                    h = (h * 2.0).min(config.max_step);
                    successes = 0;
                }
                if x.norm() > config.divergence_bound {
                    return PathResult::failed(PathStatus::Diverged, steps, None);
                }
            }
            None => {
                h /= 2.0;
                successes = 0;
                if h < config.min_step {
                    return PathResult::failed(PathStatus::StepUnderflow, steps, None);
                }
            }
        }
    }
    finish_endpoint(target.entries(), &x, steps, config)
}

/// Newton corrector at fixed parameter. Rejects the step when it fails to
/// converge within the iteration budget, stops contracting, or has to move
/// the predicted point by more than a small fraction of the step just taken.
fn correct(
    m: &Mat4,
    predicted: &SolutionPoint,
    step_length: f64,
    config: &TrackerConfig,
) -> Option<SolutionPoint> {
    let mut x = *predicted;
    let mut previous = f64::INFINITY;
    for k in 0..config.max_corrector_iters {
        let scale = 1.0 + x.norm();
        let lu = Lu4::new(&geometry::jacobian_entries(m, &x))?;
        let dx = lu.solve(&geometry::evaluate_entries(m, &x));
        let size = linalg::norm2(&dx);
        if !size.is_finite() {
            return None;
        }
        if k == 0 && size > 0.05 * step_length + 1e-8 * scale {
            return None;
        }
        if size > 0.5 * previous && size > 1e-13 * scale {
            return None;
        }
        x = SolutionPoint::from_array(linalg::sub(&x.to_array(), &dx));
        if size <= config.corrector_tolerance * scale {
            return Some(x);
        }
        previous = size;
    }
    None
}

fn finish_endpoint(target: &Mat4, x: &SolutionPoint, steps: usize, config: &TrackerConfig) -> PathResult {
    if x.is_degenerate() {
        return PathResult::failed(PathStatus::DegenerateEndpoint, steps, Some(*x));
    }
    let refined = match newton_refine_entries(target, x, config.refine_tolerance, config.max_newton_iters) {
        Ok(r) => r,
        Err(_) => return PathResult::failed(PathStatus::SingularEndpoint, steps, Some(*x)),
    };
    let endpoint = refined.point;
    if endpoint.is_degenerate() {
        return PathResult::failed(PathStatus::DegenerateEndpoint, steps, Some(endpoint));
    }
    if condition_number(target, &endpoint) > config.singular_condition {
        return PathResult::failed(PathStatus::SingularEndpoint, steps, Some(endpoint));
    }
    PathResult {
        status: PathStatus::Converged,
        endpoint: Some(endpoint),
        steps_taken: steps,
        final_residual: refined.residual,
    }
}

/// Frobenius-norm condition number of the Jacobian, infinite when singular.
pub fn condition_number(m: &Mat4, x: &SolutionPoint) -> f64 {
    let jac = geometry::jacobian_entries(m, x);
    match Lu4::new(&jac) {
        Some(lu) => linalg::frobenius(&jac) * linalg::frobenius(&lu.inverse()),
        None => f64::INFINITY,
    }
}

/// All 40 paths of one target, grouped into the ten secant orbits.
#[derive(Clone, Debug)]
pub struct Solved {
    /// One result per start point, in start-set order.
    pub paths: Vec<PathResult>,
    pub orbits: Vec<OrbitRecord>,
    /// Number of gamma draws used.
    pub attempts: usize,
}

/// Solves `F(x; target) = 0` by tracking the 40 start points.
///
/// Each attempt tracks every start point with its own gamma; converged
/// endpoints from all attempts are pooled (duplicates dropped) until 40
/// distinct nonsingular solutions forming ten orbits are found.
pub fn solve_at_parameter(
    target: &ParameterMatrix,
    start: &StartSet,
    config: &TrackerConfig,
) -> Result<Solved> {
    let mut paths: Vec<Option<PathResult>> = vec![None; start.full_set.len()];
    let mut pool: Vec<SolutionPoint> = Vec::new();
    let mut last: Vec<PathResult> = Vec::new();
    for attempt in 0..config.attempts {
        let attempt_config = TrackerConfig {
            gamma: config.gamma_for_attempt(attempt),
            ..config.clone()
        };
        let results = config.execution.map(start.full_set.len(), |i| {
            track_path(&start.base_matrix, target, &start.full_set[i], &attempt_config, true)
        });
        for (i, result) in results.iter().enumerate() {
            if let (true, Some(end)) = (result.converged(), result.endpoint) {
                if paths[i].is_none() {
                    paths[i] = Some(result.clone());
                }
                if !pool.iter().any(|p| p.relative_distance(end) <= DISTINCT_TOL) {
                    pool.push(end);
                }
            }
        }
        last = results;
        if pool.len() == start.full_set.len() {
            if let Ok(orbits) = classifier::group_into_orbits(&pool) {
                let paths = paths
                    .into_iter()
                    .zip(last)
                    .map(|(kept, last)| kept.unwrap_or(last))
                    .collect();
                return Ok(Solved {
                    paths,
                    orbits,
                    attempts: attempt + 1,
                });
            }
            break;
        }
        if pool.len() > start.full_set.len() {
            break;
        }
    }
    let paths: Vec<PathResult> = paths
        .into_iter()
        .zip(last)
        .map(|(kept, last)| kept.unwrap_or(last))
        .collect();
    let orbits = classifier::group_into_orbits(&pool).map_or(0, |o| o.len());
    Err(Error::NonGenericTarget {
        converged: pool.len(),
        orbits,
        paths: Box::new(paths),
    })
}

/// Determinant roots along an edge, with the near-segment advisory.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeRoots {
    #[serde(serialize_with = "serialize_roots")]
    pub roots: Vec<Complex64>,
    /// Smallest distance from a root to the real segment `[0, 1]`.
    pub min_distance: f64,
    /// Set when some root lies within [`EdgeRoots::DELTA`] of `[0, 1]`.
    pub near_segment: bool,
}

fn serialize_roots<S: serde::Serializer>(roots: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(roots.iter().map(|z| [z.re, z.im]))
}

impl EdgeRoots {
    pub const DELTA: f64 = 1e-3;
}

fn distance_to_unit_segment(z: Complex64) -> f64 {
    let clamped = z.re.clamp(0.0, 1.0);
    Complex64::new(z.re - clamped, z.im).norm()
}

/// Roots of `det(a M_a + (1 - a) M_b)` in `a`, sorted by real part.
///
/// The determinant is sampled at five nodes and interpolated; the degree is
/// three when the two matrices share a row (as loop vertices with first row
/// `(1,0,0,0)` do) and at most four in general.
pub fn edge_determinant_roots(m_a: &ParameterMatrix, m_b: &ParameterMatrix) -> Result<EdgeRoots> {
    const NODES: usize = 5;
    let values: Vec<Complex64> = (0..NODES)
        .map(|k| {
            let a = k as f64;
            let m = ParameterMatrix::lerp(m_b.entries(), m_a.entries(), a);
            linalg::det4(&m)
        })
        .collect();
    // Newton divided differences on nodes 0..4, then expand to monomials.
    let mut diffs = values.clone();
    for level in 1..NODES {
        for k in (level..NODES).rev() {
            diffs[k] = (diffs[k] - diffs[k - 1]) / level as f64;
        }
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); NODES];
    for k in (0..NODES).rev() {
        // coeffs <- coeffs * (a - k) + diffs[k]
        let mut next = vec![Complex64::new(0.0, 0.0); NODES];
        for j in 0..NODES {
            if j + 1 < NODES {
                next[j + 1] += coeffs[j];
            }
            next[j] -= coeffs[j] * k as f64;
        }
        next[0] += diffs[k];
        coeffs = next;
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= 1e-10 * scale {
        coeffs.pop();
    }
    let degree = if scale == 0.0 { 0 } else { coeffs.len() - 1 };
    if degree < 3 {
        return Err(Error::DegenerateCubic { roots: degree });
    }
    let mut roots = linalg::polynomial_roots(&coeffs);
    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let min_distance = roots
        .iter()
        .map(|&z| distance_to_unit_segment(z))
        .fold(f64::INFINITY, f64::min);
    Ok(EdgeRoots {
        roots,
        min_distance,
        near_segment: min_distance < EdgeRoots::DELTA,
    })
}
