//! Orbit grouping, secant classification and tuple combinatorics.
//!
//! For real `M` a common secant line is real exactly when its `t`-pair and
//! its `s`-pair are each either two real numbers or a conjugate pair:
//!
//! * both pairs real: totally real,
//! * one pair real, the other conjugate: partially real,
//! * both pairs conjugate: minimally real,
//! * otherwise the line is not real; its conjugate is another of the ten.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::geometry::{orbit_expand, SolutionPoint};

/// Default heuristic reality tolerance (relative to `max(1, |z|)`).
pub const REALITY_TOL: f64 = 1e-8;

/// Relative distance under which two points are identified when grouping.
pub const MATCH_TOL: f64 = 1e-6;

/// Number of common secants of two general twisted cubics.
pub const SECANT_COUNT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SecantClass {
    TotallyReal,
    PartiallyReal,
    MinimallyReal,
    Nonreal,
}

impl SecantClass {
    pub fn code(self) -> char {
        match self {
            SecantClass::TotallyReal => 'T',
            SecantClass::PartiallyReal => 'P',
            SecantClass::MinimallyReal => 'M',
            SecantClass::Nonreal => 'N',
        }
    }

    pub fn is_real(self) -> bool {
        self != SecantClass::Nonreal
    }
}

impl fmt::Display for SecantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One `S2 x S2` orbit of solutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// Canonical member, see [`canonical_representative`].
    pub representative: SolutionPoint,
    /// The four members, ordered as `orbit_expand(representative)`.
    pub orbit: [SolutionPoint; 4],
    /// Filled in by [`classify_records`] or by the certifier.
    pub class: Option<SecantClass>,
    /// For nonreal orbits, the index of the conjugate orbit.
    pub conjugate_partner: Option<usize>,
}

/// Counts `(n_t, n_p, n_m)` of totally, partially and minimally real secants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleCount {
    pub n_t: u8,
    pub n_p: u8,
    pub n_m: u8,
}

impl TripleCount {
    pub const fn new(n_t: u8, n_p: u8, n_m: u8) -> Self {
        Self { n_t, n_p, n_m }
    }

    /// Number of real secants.
    pub fn n_r(self) -> u8 {
        self.n_t + self.n_p + self.n_m
    }

    pub fn is_admissible(self) -> bool {
        let n = self.n_r() as usize;
        n <= SECANT_COUNT && n % 2 == 0
    }
}

impl fmt::Display for TripleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n_t, self.n_p, self.n_m)
    }
}

impl std::str::FromStr for TripleCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<u8> = inner
            .split(',')
            .map(|p| p.trim().parse::<u8>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse("triple", format!("{s:?}: {e}")))?;
        match parts[..] {
            [n_t, n_p, n_m] => Ok(Self::new(n_t, n_p, n_m)),
            _ => Err(Error::parse("triple", format!("{s:?}: expected three counts"))),
        }
    }
}

/// `a <= b` up to a relative tolerance: nearly equal values compare equal.
fn tolerant_cmp(a: f64, b: f64) -> Ordering {
    let tol = 1e-9 * a.abs().max(b.abs()).max(1.0);
    if (a - b).abs() <= tol {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

fn sort_key(x: &SolutionPoint) -> [f64; 8] {
    let a = x.to_array();
    std::array::from_fn(|k| if k % 2 == 0 { a[k / 2].re } else { a[k / 2].im })
}

/// Lexicographic order on `(Re t1, Im t1, Re t2, Im t2, Re s1, ...)` that
/// treats nearly equal components as ties, so rounding noise cannot flip it.
pub fn compare_points(x: &SolutionPoint, y: &SolutionPoint) -> Ordering {
    sort_key(x)
        .iter()
        .zip(sort_key(y))
        .map(|(&a, b)| tolerant_cmp(a, b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The orbit member that is least in [`compare_points`] order.
pub fn canonical_representative(x: &SolutionPoint) -> SolutionPoint {
    orbit_expand(x)
        .into_iter()
        .min_by(compare_points)
        .expect("orbit is nonempty")
}

/// Distance between two orbits: the least distance from `x` to an image of `y`.
pub fn quotient_distance(x: &SolutionPoint, y: &SolutionPoint) -> f64 {
    orbit_expand(y)
        .iter()
        .map(|z| x.relative_distance(*z))
        .fold(f64::INFINITY, f64::min)
}

/// Partitions the 40 solutions into ten orbits.
pub fn group_into_orbits(points: &[SolutionPoint]) -> Result<Vec<OrbitRecord>> {
    if points.len() != 4 * SECANT_COUNT {
        return Err(Error::OrbitMismatch(format!(
            "expected {} points, got {}",
            4 * SECANT_COUNT,
            points.len()
        )));
    }
    group_points(points)
}

/// Partitions any set of points closed under the action into orbits, sorted
/// by canonical representative.
pub fn group_points(points: &[SolutionPoint]) -> Result<Vec<OrbitRecord>> {
    if points.len() % 4 != 0 {
        return Err(Error::OrbitMismatch(format!("{} points is not a multiple of 4", points.len())));
    }
    let mut used = vec![false; points.len()];
    let mut orbits = Vec::with_capacity(points.len() / 4);
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let representative = canonical_representative(&points[i]);
        let mut members = [representative; 4];
        let mut self_matched = false;
        for (k, image) in orbit_expand(&representative).into_iter().enumerate() {
            if image.relative_distance(points[i]) <= MATCH_TOL && !self_matched {
                members[k] = points[i];
                self_matched = true;
                continue;
            }
            let found = (0..points.len())
                .filter(|&j| !used[j] && points[j].relative_distance(image) <= MATCH_TOL)
                .min_by(|&a, &b| {
                    points[a]
                        .relative_distance(image)
                        .total_cmp(&points[b].relative_distance(image))
                });
            match found {
                Some(j) => {
                    used[j] = true;
                    members[k] = points[j];
                }
                None => {
                    return Err(Error::OrbitMismatch(format!(
                        "point {i} is missing orbit image {k}"
                    )))
                }
            }
        }
        orbits.push(OrbitRecord {
            representative,
            orbit: members,
            class: None,
            conjugate_partner: None,
        });
    }
    orbits.sort_by(|a, b| compare_points(&a.representative, &b.representative));
    Ok(orbits)
}

fn relative_imag(z: Complex64) -> f64 {
    z.im.abs() / z.norm().max(1.0)
}

enum PairKind {
    Real,
    Conjugate,
    Neither,
}

fn pair_kind(a: Complex64, b: Complex64, tol: f64) -> PairKind {
    if relative_imag(a) <= tol && relative_imag(b) <= tol {
        PairKind::Real
    } else if (b - a.conj()).norm() <= tol * a.norm().max(1.0) {
        PairKind::Conjugate
    } else {
        PairKind::Neither
    }
}

/// Classifies the secant through the orbit of `rep` (for real `M`).
pub fn classify_orbit(rep: &SolutionPoint, reality_tol: f64) -> Result<SecantClass> {
    for (coordinate, z) in rep.to_array().into_iter().enumerate() {
        let imag = relative_imag(z);
        if imag > reality_tol && imag < 10.0 * reality_tol {
            return Err(Error::AmbiguousReality { coordinate, imag });
        }
    }
    use PairKind::*;
    let class = match (pair_kind(rep.t1, rep.t2, reality_tol), pair_kind(rep.s1, rep.s2, reality_tol)) {
        (Real, Real) => SecantClass::TotallyReal,
        (Real, Conjugate) | (Conjugate, Real) => SecantClass::PartiallyReal,
        (Conjugate, Conjugate) => SecantClass::MinimallyReal,
        (Neither, Neither) => SecantClass::Nonreal,
        _ => {
            return Err(Error::InconsistentOrbit(format!(
                "t = ({}, {}), s = ({}, {})",
                rep.t1, rep.t2, rep.s1, rep.s2
            )))
        }
    };
    Ok(class)
}

/// Classifies every orbit and links each nonreal orbit to its conjugate.
pub fn classify_records(orbits: &mut [OrbitRecord], reality_tol: f64) -> Result<()> {
    for orbit in orbits.iter_mut() {
        orbit.class = Some(classify_orbit(&orbit.representative, reality_tol)?);
        orbit.conjugate_partner = None;
    }
    link_conjugates(orbits)
}

/// Pairs nonreal orbits by nearest conjugate, requiring the pairing to be
/// mutual and within [`MATCH_TOL`].
pub fn link_conjugates(orbits: &mut [OrbitRecord]) -> Result<()> {
    let nonreal: Vec<usize> = (0..orbits.len())
        .filter(|&i| orbits[i].class == Some(SecantClass::Nonreal))
        .collect();
    let nearest = |i: usize| -> Option<(usize, f64)> {
        let target = orbits[i].representative.conj();
        nonreal
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (j, quotient_distance(&target, &orbits[j].representative)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    };
    let partners: Vec<Option<usize>> = nonreal
        .iter()
        .map(|&i| nearest(i).filter(|&(_, d)| d <= MATCH_TOL).map(|(j, _)| j))
        .collect();
    for (&i, partner) in nonreal.iter().zip(&partners) {
        let j = partner.ok_or_else(|| {
            Error::OrbitMismatch(format!("nonreal orbit {i} has no conjugate partner"))
        })?;
        let back = partners[nonreal.iter().position(|&k| k == j).expect("j is nonreal")];
        if back != Some(i) {
            return Err(Error::OrbitMismatch(format!(
                "conjugate pairing of orbits {i} and {j} is not mutual"
            )));
        }
        orbits[i].conjugate_partner = Some(j);
    }
    Ok(())
}

/// Counts the classes of classified orbits.
pub fn census(orbits: &[OrbitRecord]) -> Result<TripleCount> {
    let mut count = TripleCount::default();
    let mut nonreal = 0;
    for (i, orbit) in orbits.iter().enumerate() {
        match orbit.class {
            Some(SecantClass::TotallyReal) => count.n_t += 1,
            Some(SecantClass::PartiallyReal) => count.n_p += 1,
            Some(SecantClass::MinimallyReal) => count.n_m += 1,
            Some(SecantClass::Nonreal) => nonreal += 1,
            None => return Err(Error::OrbitMismatch(format!("orbit {i} is unclassified"))),
        }
    }
    if nonreal % 2 != 0 {
        return Err(Error::ParityViolation { nonreal });
    }
    Ok(count)
}

/// Per-orbit class codes, e.g. `T;T;P;N;N`.
pub fn class_list(orbits: &[OrbitRecord]) -> String {
    orbits
        .iter()
        .map(|o| o.class.map_or('?', SecantClass::code).to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// The census line `n_t,n_p,n_m,n_R,class_list`.
pub fn census_line(count: TripleCount, orbits: &[OrbitRecord]) -> String {
    format!(
        "{},{},{},{},{}",
        count.n_t,
        count.n_p,
        count.n_m,
        count.n_r(),
        class_list(orbits)
    )
}

/// All tuples with an even total of at most ten, in lexicographic order.
pub fn admissible_tuples() -> Vec<TripleCount> {
    let max = SECANT_COUNT as u8;
    let mut tuples = Vec::new();
    for n_t in 0..=max {
        for n_p in 0..=max - n_t {
            for n_m in 0..=max - n_t - n_p {
                let t = TripleCount::new(n_t, n_p, n_m);
                if t.is_admissible() {
                    tuples.push(t);
                }
            }
        }
    }
    tuples
}

/// Admissible tuples split by whether they were observed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RealizabilityDiff {
    pub realized: Vec<TripleCount>,
    pub missing: Vec<TripleCount>,
    /// Observed tuples absent from the compiled realized table.
    pub newly_realized: Vec<TripleCount>,
    /// Compiled realized tuples not among the observed ones.
    pub unconfirmed: Vec<TripleCount>,
}

pub fn realizability_diff(observed: &BTreeSet<TripleCount>) -> Result<RealizabilityDiff> {
    if let Some(bad) = observed.iter().find(|t| !t.is_admissible()) {
        return Err(Error::InadmissibleTuple(*bad));
    }
    let compiled: BTreeSet<TripleCount> = data::reference().realized().into_iter().collect();
    let (realized, missing) = admissible_tuples()
        .into_iter()
        .partition(|t| observed.contains(t));
    Ok(RealizabilityDiff {
        realized,
        missing,
        newly_realized: observed.difference(&compiled).copied().collect(),
        unconfirmed: compiled.difference(observed).copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classifies_by_pair_structure() {
        let tol = REALITY_TOL;
        let minimal = SolutionPoint::new(c(0.0, 1.0), c(0.0, -1.0), c(1.0, 2.0), c(1.0, -2.0));
        let partial = SolutionPoint::new(c(0.1, 0.0), c(0.2, 0.0), c(1.0, 2.0), c(1.0, -2.0));
        let nonreal = SolutionPoint::new(c(1.0, 1.0), c(2.0, -3.0), c(0.5, 0.5), c(-1.0, 2.0));
        let real = SolutionPoint::real(0.9750, 0.1977, 0.4144, 2.4773);
        assert_eq!(classify_orbit(&minimal, tol).unwrap(), SecantClass::MinimallyReal);
        assert_eq!(classify_orbit(&partial, tol).unwrap(), SecantClass::PartiallyReal);
        assert_eq!(classify_orbit(&nonreal, tol).unwrap(), SecantClass::Nonreal);
        assert_eq!(classify_orbit(&real, tol).unwrap(), SecantClass::TotallyReal);
        for x in orbit_expand(&partial) {
            assert_eq!(classify_orbit(&x, tol).unwrap(), SecantClass::PartiallyReal);
        }
    }

    #[test]
    fn mixed_pairs_are_inconsistent() {
        let x = SolutionPoint::new(c(0.1, 0.0), c(0.2, 0.0), c(1.0, 2.0), c(3.0, -1.0));
        assert!(matches!(classify_orbit(&x, REALITY_TOL), Err(Error::InconsistentOrbit(_))));
    }

    #[test]
    fn near_threshold_imaginary_part_is_ambiguous() {
        let x = SolutionPoint::new(c(0.1, 5e-8), c(0.2, 0.0), c(1.0, 0.0), c(3.0, 0.0));
        assert!(matches!(
            classify_orbit(&x, REALITY_TOL),
            Err(Error::AmbiguousReality { coordinate: 0, .. })
        ));
    }

    #[test]
    fn canonical_representative_is_orbit_invariant() {
        let x = SolutionPoint::new(c(1.0, 1.0), c(1.0, -1.0), c(0.3, 0.0), c(-2.0, 0.0));
        let rep = canonical_representative(&x);
        assert_eq!(rep, SolutionPoint::new(c(1.0, -1.0), c(1.0, 1.0), c(-2.0, 0.0), c(0.3, 0.0)));
        for y in orbit_expand(&x) {
            assert_eq!(canonical_representative(&y), rep);
        }
    }

    #[test]
    fn grouping_rejects_broken_closure() {
        let reps = data::reference().base_representatives();
        let mut points: Vec<SolutionPoint> = reps.iter().flat_map(orbit_expand).collect();
        assert_eq!(group_into_orbits(&points).unwrap().len(), 10);
        points[13].s1 += 1e-3;
        assert!(matches!(group_into_orbits(&points), Err(Error::OrbitMismatch(_))));
        points.pop();
        assert!(matches!(group_into_orbits(&points), Err(Error::OrbitMismatch(_))));
    }

    #[test]
    fn census_counts_and_parity() {
        let mut orbits = group_into_orbits(
            &data::reference()
                .base_representatives()
                .iter()
                .flat_map(orbit_expand)
                .collect::<Vec<_>>(),
        )
        .unwrap();
        classify_records(&mut orbits, REALITY_TOL).unwrap();
        let count = census(&orbits).unwrap();
        assert_eq!(count, TripleCount::new(10, 0, 0));
        assert_eq!(census_line(count, &orbits), "10,0,0,10,T;T;T;T;T;T;T;T;T;T");
        orbits[0].class = Some(SecantClass::Nonreal);
        assert!(matches!(census(&orbits), Err(Error::ParityViolation { nonreal: 1 })));
    }

    #[test]
    fn conjugate_orbits_are_linked() {
        let x = SolutionPoint::new(c(1.0, 1.0), c(2.0, -3.0), c(0.5, 0.5), c(-1.0, 2.0));
        let y = SolutionPoint::real(0.1, 0.7, -0.4, 1.9);
        let points: Vec<SolutionPoint> = [x, x.conj(), y].iter().flat_map(orbit_expand).collect();
        let mut orbits = group_points(&points).unwrap();
        classify_records(&mut orbits, REALITY_TOL).unwrap();
        let nonreal: Vec<usize> = (0..3).filter(|&i| !orbits[i].class.unwrap().is_real()).collect();
        assert_eq!(nonreal.len(), 2);
        assert_eq!(orbits[nonreal[0]].conjugate_partner, Some(nonreal[1]));
        assert_eq!(orbits[nonreal[1]].conjugate_partner, Some(nonreal[0]));
    }

    #[test]
    fn admissible_tuples_match_binomial_counts() {
        let tuples = admissible_tuples();
        assert_eq!(tuples.len(), 161);
        let per_level: Vec<usize> = (0..=10)
            .step_by(2)
            .map(|n| tuples.iter().filter(|t| t.n_r() == n).count())
            .collect();
        assert_eq!(per_level, [1, 6, 15, 28, 45, 66]);
        assert!(!tuples.contains(&TripleCount::new(1, 1, 1)));
        assert!(tuples.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn diff_against_compiled_table() {
        let realized: BTreeSet<TripleCount> = data::reference().realized().into_iter().collect();
        let diff = realizability_diff(&realized).unwrap();
        assert_eq!(diff.realized.len(), 128);
        assert_eq!(diff.missing.len(), 33);
        assert!(diff.missing.contains(&TripleCount::new(0, 0, 10)));
        assert!(diff.missing.contains(&TripleCount::new(1, 9, 0)));
        let mut not_realized = data::reference().not_realized();
        not_realized.sort();
        assert_eq!(diff.missing, not_realized);
        assert!(diff.newly_realized.is_empty() && diff.unconfirmed.is_empty());

        let empty = realizability_diff(&BTreeSet::new()).unwrap();
        assert_eq!(empty.missing.len(), 161);

        let bad: BTreeSet<TripleCount> = [TripleCount::new(1, 1, 1)].into();
        assert!(matches!(realizability_diff(&bad), Err(Error::InadmissibleTuple(_))));
    }

    #[test]
    fn triple_round_trips_through_text() {
        let t = TripleCount::new(4, 1, 1);
        assert_eq!(t.to_string().parse::<TripleCount>().unwrap(), t);
        assert!("1,2".parse::<TripleCount>().is_err());
    }
}
