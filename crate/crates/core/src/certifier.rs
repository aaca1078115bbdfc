//! Smale alpha-theory certificates for approximate solutions.
//!
//! For an approximate zero `x` of the square system `F`,
//!
//! * `beta = ||J(x)^-1 F(x)||` is the length of the Newton step,
//! * `gamma = sup_k ||J(x)^-1 D^k F(x) / k!||^(1/(k-1))` is bounded above by
//!   `max_k (||J^-1||_F A_k)^(1/(k-1))`, `k = 2..6`, where `A_k` is the
//!   Frobenius norm of the degree-`k` Taylor coefficients at `x` (each
//!   monomial `v^b` weighted by `b!/k!`),
//!
//! and `alpha = beta * gamma < (13 - 3 sqrt 17)/4` guarantees quadratic
//! Newton convergence to a unique nearby zero. Distinctness of zeros and
//! their (non)reality follow from the usual corollaries; reality uses the
//! robust form: if `alpha(x) < 0.03` and `||y - x|| < 1/(20 gamma(x))` then
//! `y` converges to the same zero as `x`. For real `M` the Newton map commutes
//! with conjugation, so applying this to `y = conj(x)` proves the zero real.
//!
//! [`Mode::Fast`] evaluates everything in `f64` with a safety margin on
//! rounding. [`Mode::Strict`] converts the point exactly to rationals, takes
//! the matrix from its decimal text and decides every inequality in exact
//! rational arithmetic.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::classifier::{OrbitRecord, SecantClass, TripleCount};
use crate::error::{Error, Result};
use crate::exact::{self, QComplex};
use crate::ddouble;
use crate::exec::Execution;
use crate::geometry::{self, ParameterMatrix, SolutionPoint};
use crate::linalg::{self, Lu4};
use crate::poly::{self, Poly};

/// `(13 - 3 sqrt 17) / 4`.
pub fn alpha_zero() -> f64 {
    (13.0 - 3.0 * 17f64.sqrt()) / 4.0
}

/// Rational lower bound on the alpha constant used by strict mode.
const ALPHA_ZERO_LOWER: (i64, i64) = (15767, 100_000);

/// Threshold of the robust alpha theorem.
pub const ROBUST_ALPHA: f64 = 0.03;

/// Relative slack added to floating-point bounds in fast mode.
const FAST_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[default]
    Fast,
    Strict,
}

#[derive(Clone, Debug)]
enum Bounds {
    Float,
    Exact {
        beta2: BigRational,
        jinv2: BigRational,
        a2: [BigRational; 5],
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaCertificate {
    pub point: SolutionPoint,
    pub alpha: f64,
    pub beta: f64,
    pub gamma_bound: f64,
    pub certified: bool,
    #[serde(skip)]
    units: Units,
    #[serde(skip)]
    bounds: Bounds,
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn exact_point(x: &SolutionPoint) -> [QComplex; 4] {
    x.to_array().map(exact::complex_from_f64)
}

/// Coordinate units: certificates are computed for `y = x / units`, which
/// leaves zeros, their distinctness and their reality unchanged but keeps
/// solutions with large coordinates from inflating `gamma`.
pub type Units = [f64; 4];

/// Powers of two near the largest modulus in the `t` and `s` blocks.
pub fn coordinate_units(points: &[SolutionPoint]) -> Units {
    let block = |a: usize| {
        let max = points
            .iter()
            .map(|x| x.to_array()[a].norm().max(x.to_array()[a + 1].norm()))
            .fold(1.0, f64::max);
        2f64.powi(max.log2().round() as i32)
    };
    let (t, s) = (block(0), block(2));
    [t, t, s, s]
}

fn scaled_distance(units: &Units, a: &SolutionPoint, b: &SolutionPoint) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..4).map(|k| ((a[k] - b[k]) / units[k]).norm_sqr()).sum::<f64>().sqrt()
}

fn exact_dist2(units: &Units, a: &SolutionPoint, b: &SolutionPoint) -> BigRational {
    exact_point(a)
        .iter()
        .zip(exact_point(b))
        .zip(units)
        .fold(BigRational::zero(), |acc, ((u, v), d)| {
            let d = exact::from_f64(*d);
            acc + exact::abs_sq(&(u - v)) / (&d * &d)
        })
}

fn unit(k: usize) -> poly::Exponent {
    let mut e = [0; 4];
    e[k] = 1;
    e
}

/// `b! / k!` for a multi-index of total degree `k`.
fn weight(e: &poly::Exponent) -> (u64, u64) {
    let k: u8 = e.iter().sum();
    (e.iter().map(|&b| poly::factorial(b)).product(), poly::factorial(k))
}

impl AlphaCertificate {
    fn uncertified(point: SolutionPoint) -> Self {
        Self {
            point,
            alpha: f64::INFINITY,
            beta: f64::INFINITY,
            gamma_bound: f64::INFINITY,
            certified: false,
            units: [1.0; 4],
            bounds: Bounds::Float,
        }
    }

    /// Decides `gamma * scale * r < c`, where `r` is the distance from this
    /// point to `other`, or `beta` when `other` is `None`.
    fn gamma_times_below(&self, other: Option<&SolutionPoint>, scale: i64, c: (i64, i64)) -> bool {
        match &self.bounds {
            Bounds::Float => {
                let r = other.map_or(self.beta, |y| scaled_distance(&self.units, &self.point, y));
                self.gamma_bound * scale as f64 * r * (1.0 + FAST_SLACK) < c.0 as f64 / c.1 as f64
            }
            Bounds::Exact { beta2, jinv2, a2 } => {
                let r2 = match other {
                    None => beta2.clone(),
                    Some(y) => exact_dist2(&self.units, &self.point, y),
                } * q(scale * scale, 1);
                let c2 = q(c.0 * c.0, c.1 * c.1);
                let mut r_pow = BigRational::one();
                let mut c_pow = BigRational::one();
                // gamma r < c  <=>  for all k: (r^2)^(k-1) |J^-1|^2 A_k^2 < (c^2)^(k-1).
                a2.iter().all(|a| {
                    r_pow = &r_pow * &r2;
                    c_pow = &c_pow * &c2;
                    &(&r_pow * jinv2) * a < c_pow
                })
            }
        }
    }

    fn alpha_below(&self, c: (i64, i64)) -> bool {
        self.beta.is_finite() && self.gamma_times_below(None, 1, c)
    }

    /// True when `y` provably converges to the same zero as this point:
    /// `alpha < 0.03` and `20 gamma ||y - x|| < 1`.
    fn same_zero(&self, y: &SolutionPoint) -> bool {
        self.certified && self.alpha_below((3, 100)) && self.gamma_times_below(Some(y), 20, (1, 1))
    }

    fn beta_upper(&self) -> BigRational {
        match &self.bounds {
            Bounds::Exact { beta2, .. } => exact::sqrt_upper(beta2),
            Bounds::Float => exact::from_f64(self.beta * (1.0 + FAST_SLACK)),
        }
    }
}

/// True when the zero of `cx` and the zero approximated by `y` (with Newton
/// step bound `beta_y` taken from `cy`) provably differ:
/// `||x - y|| > 2 (beta_x + beta_y)`.
fn distinct_zeros(cx: &AlphaCertificate, y: &SolutionPoint, cy: &AlphaCertificate) -> bool {
    if !(cx.certified && cy.certified) || cx.units != cy.units {
        return false;
    }
    let approx = scaled_distance(&cx.units, &cx.point, y);
    let bound = 2.0 * (cx.beta + cy.beta);
    let strict = matches!(cx.bounds, Bounds::Exact { .. }) || matches!(cy.bounds, Bounds::Exact { .. });
    if !strict {
        return approx > bound * (1.0 + FAST_SLACK);
    }
    if approx > 1.01 * bound {
        return true;
    }
    if approx < 0.99 * bound {
        return false;
    }
    let b = cx.beta_upper() + cy.beta_upper();
    exact_dist2(&cx.units, &cx.point, y) > q(4, 1) * &b * &b
}

/// Certifies points against one fixed matrix.
pub struct Certifier {
    mode: Mode,
    units: Units,
    float_system: [Poly<Complex64>; 4],
    exact_system: Option<[Poly<QComplex>; 4]>,
    entries: crate::linalg::Mat4,
}

/// `D^b` for the unit vector `D` and multi-index `b`.
fn unit_power(units: &Units, e: &poly::Exponent) -> f64 {
    (0..4).map(|k| units[k].powi(e[k] as i32)).product()
}

impl Certifier {
    pub fn new(m: &ParameterMatrix, mode: Mode) -> Self {
        Self::with_units(m, mode, [1.0; 4])
    }

    /// Certifies in the coordinates `y = x / units`; units must be powers of two.
    pub fn with_units(m: &ParameterMatrix, mode: Mode, units: Units) -> Self {
        debug_assert!(units.iter().all(|u| u.log2().fract() == 0.0));
        Self {
            mode,
            units,
            float_system: poly::system(m.entries()),
            exact_system: (mode == Mode::Strict).then(|| poly::system(&m.exact_entries())),
            entries: *m.entries(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn alpha_test(&self, x: &SolutionPoint) -> Result<AlphaCertificate> {
        match &self.exact_system {
            None => self.fast(x),
            Some(system) => self.strict(system, x),
        }
    }

    fn fast(&self, x: &SolutionPoint) -> Result<AlphaCertificate> {
        let at = x.to_array();
        let shifted: Vec<Poly<Complex64>> = self.float_system.iter().map(|p| p.shift(&at)).collect();
        // The residual is cancellation-dominated; double-double evaluation
        // leaves an error far below anything alpha cares about.
        let f = ddouble::evaluate(&self.entries, x);
        let residual_error: f64 = geometry::residual_scale(&self.entries, x).iter().sum::<f64>() * 1e-28;
        let jac = std::array::from_fn(|i| {
            std::array::from_fn(|k| shifted[i].coefficient(unit(k)) * self.units[k])
        });
        let lu = Lu4::new(&jac).ok_or(Error::SingularJacobian)?;
        let jinv = linalg::frobenius(&lu.inverse()) * (1.0 + FAST_SLACK);
        // Rounding F to f64 moves it by at most one ulp; take 10x that.
        let beta = linalg::norm2(&lu.solve(&f)) * (1.0 + FAST_SLACK)
            + jinv * (linalg::norm2(&f) * 10.0 * f64::EPSILON + residual_error);
        let mut a = [0.0; 5];
        for p in &shifted {
            for (e, c) in p.terms() {
                let k: u8 = e.iter().sum();
                if k >= 2 {
                    let (num, den) = weight(e);
                    let c = c * unit_power(&self.units, e);
                    a[k as usize - 2] += c.norm_sqr() * num as f64 / den as f64;
                }
            }
        }
        let a = a.map(|s| s.sqrt() * (1.0 + FAST_SLACK));
        let gamma_bound = (0..5)
            .map(|j| (jinv * a[j]).powf(1.0 / (j + 1) as f64))
            .fold(0.0, f64::max);
        let mut cert = AlphaCertificate {
            point: *x,
            alpha: beta * gamma_bound,
            beta,
            gamma_bound,
            certified: false,
            units: self.units,
            bounds: Bounds::Float,
        };
        cert.certified = cert.alpha.is_finite() && cert.alpha_below(ALPHA_ZERO_LOWER);
        Ok(cert)
    }

    fn strict(&self, system: &[Poly<QComplex>; 4], x: &SolutionPoint) -> Result<AlphaCertificate> {
        let point = exact_point(x);
        let real = |v: f64| QComplex::new(exact::from_f64(v), BigRational::zero());
        let shifted: Vec<Poly<QComplex>> = system.iter().map(|p| p.shift(&point)).collect();
        let f: [QComplex; 4] = std::array::from_fn(|i| shifted[i].coefficient([0; 4]));
        let jac: [[QComplex; 4]; 4] = std::array::from_fn(|i| {
            std::array::from_fn(|k| shifted[i].coefficient(unit(k)) * real(self.units[k]))
        });
        let step = exact::solve(jac.clone(), f).ok_or(Error::SingularJacobian)?;
        let beta2 = step.iter().fold(BigRational::zero(), |acc, z| acc + exact::abs_sq(z));
        let mut jinv2 = BigRational::zero();
        for k in 0..4 {
            let e: [QComplex; 4] = std::array::from_fn(|i| {
                if i == k {
                    QComplex::one()
                } else {
                    QComplex::zero()
                }
            });
            let column = exact::solve(jac.clone(), e).ok_or(Error::SingularJacobian)?;
            jinv2 = column.iter().fold(jinv2, |acc, z| acc + exact::abs_sq(z));
        }
        let mut a2: [BigRational; 5] = Default::default();
        for p in &shifted {
            for (e, c) in p.terms() {
                let k: u8 = e.iter().sum();
                if k >= 2 {
                    let (num, den) = weight(e);
                    let w = BigRational::new(num.into(), den.into());
                    let c = c * real(unit_power(&self.units, e));
                    a2[k as usize - 2] = &a2[k as usize - 2] + exact::abs_sq(&c) * w;
                }
            }
        }
        let beta = exact::to_f64(&beta2).sqrt();
        let jinv = exact::to_f64(&jinv2).sqrt();
        let gamma_bound = (0..5)
            .map(|j| (jinv * exact::to_f64(&a2[j]).sqrt()).powf(1.0 / (j + 1) as f64))
            .fold(0.0, f64::max);
        let mut cert = AlphaCertificate {
            point: *x,
            alpha: beta * gamma_bound,
            beta,
            gamma_bound,
            certified: false,
            units: self.units,
            bounds: Bounds::Exact { beta2, jinv2, a2 },
        };
        cert.certified = cert.alpha_below(ALPHA_ZERO_LOWER);
        Ok(cert)
    }
}

/// Fast-mode alpha test of one point.
pub fn alpha_test(m: &ParameterMatrix, x: &SolutionPoint) -> Result<AlphaCertificate> {
    Certifier::new(m, Mode::Fast).alpha_test(x)
}

/// Result of [`certify_distinct`]; `pair` names the first offending pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Distinctness {
    pub distinct: bool,
    pub pair: Option<(usize, usize)>,
}

/// Checks `||x_i - x_j|| > 2 (beta_i + beta_j)` for every pair.
pub fn certify_distinct(certs: &[AlphaCertificate]) -> Distinctness {
    for i in 0..certs.len() {
        for j in i + 1..certs.len() {
            if !distinct_zeros(&certs[i], &certs[j].point, &certs[j]) {
                return Distinctness {
                    distinct: false,
                    pair: Some((i, j)),
                };
            }
        }
    }
    Distinctness {
        distinct: true,
        pair: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RealityFlag {
    CertifiedReal,
    CertifiedNonreal,
    Undetermined,
}

/// Reality of the zero associated with `cert` (for real `M`).
pub fn certify_reality(cert: &AlphaCertificate, all: &[AlphaCertificate]) -> RealityFlag {
    if !cert.certified {
        return RealityFlag::Undetermined;
    }
    let y = cert.point.conj();
    if cert.same_zero(&y) {
        return RealityFlag::CertifiedReal;
    }
    if distinct_zeros(cert, &y, cert) && all.iter().any(|c| c.same_zero(&y)) {
        return RealityFlag::CertifiedNonreal;
    }
    RealityFlag::Undetermined
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub mode: Mode,
    /// Orbit `o` owns certificates `4o..4o+4`, in `OrbitRecord::orbit` order.
    pub certificates: Vec<AlphaCertificate>,
    pub distinct: Distinctness,
    /// Reality of each orbit's first member as a coordinate vector.
    pub reality_flags: Vec<RealityFlag>,
    /// Certified secant class per orbit, `None` when undecided.
    pub classes: Vec<Option<SecantClass>>,
    pub conjugate_partners: Vec<Option<usize>>,
    pub census_certified: Option<TripleCount>,
    /// Orbits whose classification could not be certified.
    pub undetermined: Vec<usize>,
}

impl CertificationReport {
    pub fn is_complete(&self) -> bool {
        self.census_certified.is_some()
    }

    /// Copies certified classes and partners into the orbit records.
    pub fn apply(&self, orbits: &mut [OrbitRecord]) {
        for (o, orbit) in orbits.iter_mut().enumerate() {
            orbit.class = self.classes[o];
            orbit.conjugate_partner = self.conjugate_partners[o];
        }
    }
}

/// Which element of the `S2 x S2` action conjugation realizes on an orbit.
fn certify_class(certs: &[AlphaCertificate]) -> Option<SecantClass> {
    let y = certs[0].point.conj();
    let mut same = None;
    for (g, cert) in certs.iter().enumerate() {
        if cert.same_zero(&y) {
            if same.is_some() {
                return None;
            }
            same = Some(g);
        } else if !distinct_zeros(cert, &y, &certs[0]) {
            return None;
        }
    }
    Some(match same {
        Some(0) => SecantClass::TotallyReal,
        Some(1) | Some(2) => SecantClass::PartiallyReal,
        Some(_) => SecantClass::MinimallyReal,
        None => SecantClass::Nonreal,
    })
}

/// Certifies all 40 solutions and the census of a real matrix, without
/// modifying the points. See [`certify_census`] for the refining pipeline.
pub fn certify_report(
    m: &ParameterMatrix,
    orbits: &[OrbitRecord],
    mode: Mode,
    execution: Execution,
) -> Result<CertificationReport> {
    if !m.is_real() {
        return Err(Error::parse("matrix", "reality certification needs a real matrix"));
    }
    let points: Vec<SolutionPoint> = orbits.iter().flat_map(|o| o.orbit).collect();
    let certifier = Certifier::with_units(m, mode, coordinate_units(&points));
    let certificates = execution.map(points.len(), |i| {
        certifier
            .alpha_test(&points[i])
            .unwrap_or_else(|_| AlphaCertificate::uncertified(points[i]))
    });
    let all_certified = certificates.iter().all(|c| c.certified);
    let distinct = certify_distinct(&certificates);
    let per_orbit = execution.map(orbits.len(), |o| {
        let own = &certificates[4 * o..4 * o + 4];
        let flag = certify_reality(&own[0], &certificates);
        let class = certify_class(own);
        let partner = match class {
            Some(SecantClass::Nonreal) => {
                let y = own[0].point.conj();
                (0..orbits.len())
                    .find(|&j| j != o && certificates[4 * j..4 * j + 4].iter().any(|c| c.same_zero(&y)))
            }
            _ => None,
        };
        (flag, class, partner)
    });
    let reality_flags: Vec<RealityFlag> = per_orbit.iter().map(|r| r.0).collect();
    let classes: Vec<Option<SecantClass>> = per_orbit.iter().map(|r| r.1).collect();
    let conjugate_partners: Vec<Option<usize>> = per_orbit.iter().map(|r| r.2).collect();

    let mut undetermined: Vec<usize> = (0..orbits.len())
        .filter(|&o| {
            classes[o].is_none()
                || reality_flags[o] == RealityFlag::Undetermined
                || certificates[4 * o..4 * o + 4].iter().any(|c| !c.certified)
        })
        .collect();
    if let Some((i, j)) = distinct.pair {
        undetermined.extend([i / 4, j / 4]);
    }
    undetermined.sort_unstable();
    undetermined.dedup();

    let census_certified = (all_certified && distinct.distinct && undetermined.is_empty()).then(|| {
        let count = |c: SecantClass| classes.iter().filter(|k| **k == Some(c)).count() as u8;
        TripleCount::new(
            count(SecantClass::TotallyReal),
            count(SecantClass::PartiallyReal),
            count(SecantClass::MinimallyReal),
        )
    });
    Ok(CertificationReport {
        mode,
        certificates,
        distinct,
        reality_flags,
        classes,
        conjugate_partners,
        census_certified,
        undetermined,
    })
}

/// Certification pipeline: certifies, and when some orbit stays
/// undetermined, applies Newton steps to every member and tries again, up
/// to `retries` more times. Returns the report together with the points
/// actually certified.
pub fn certify_census(
    m: &ParameterMatrix,
    orbits: &[OrbitRecord],
    mode: Mode,
    execution: Execution,
    retries: usize,
) -> Result<(CertificationReport, Vec<OrbitRecord>)> {
    let mut current = orbits.to_vec();
    for round in 0..=retries {
        let report = certify_report(m, &current, mode, execution)?;
        if report.is_complete() {
            return Ok((report, current));
        }
        if round == retries {
            return Err(Error::CertificationIncomplete {
                orbits: report.undetermined,
            });
        }
        for orbit in current.iter_mut() {
            for member in orbit.orbit.iter_mut() {
                if let Some(next) = newton_steps(m, member, 2) {
                    *member = next;
                }
            }
        }
    }
    unreachable!("loop returns on its last round")
}

/// Plain Newton steps, ignoring the stopping rule.
fn newton_steps(m: &ParameterMatrix, x: &SolutionPoint, steps: usize) -> Option<SolutionPoint> {
    let mut x = *x;
    for _ in 0..steps {
        let lu = Lu4::new(&geometry::jacobian(m, &x))?;
        let dx = lu.solve(&geometry::evaluate_system(m, &x));
        let next = SolutionPoint::from_array(linalg::sub(&x.to_array(), &dx));
        if !next.is_finite() {
            return None;
        }
        x = next;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{self, REALITY_TOL};
    use crate::data;
    use crate::tracker::{bootstrap_start_set, solve_at_parameter, TrackerConfig};

    fn solved(k: usize) -> (ParameterMatrix, Vec<OrbitRecord>) {
        let config = TrackerConfig::default();
        let start = bootstrap_start_set(&config).unwrap();
        let w = &data::reference().witnesses()[k];
        let solved = solve_at_parameter(&w.matrix, &start, &config).unwrap();
        (w.matrix.clone(), solved.orbits)
    }

    #[test]
    fn alpha_constant() {
        assert!((alpha_zero() - 0.157670780786).abs() < 1e-11);
        assert!((ALPHA_ZERO_LOWER.0 as f64 / ALPHA_ZERO_LOWER.1 as f64) < alpha_zero());
    }

    #[test]
    fn refined_base_solution_is_certified() {
        let start = bootstrap_start_set(&TrackerConfig::default()).unwrap();
        let cert = alpha_test(&start.base_matrix, &start.representatives[0]).unwrap();
        assert!(cert.certified && cert.alpha < 1e-6, "alpha {}", cert.alpha);
        let far = SolutionPoint::from_array(start.representatives[0].to_array().map(|z| z + 0.5));
        let cert = alpha_test(&start.base_matrix, &far).unwrap();
        assert!(!cert.certified, "alpha {}", cert.alpha);
    }

    #[test]
    fn exact_zero_has_zero_beta() {
        // Rows chosen so that p3(s) = p4(s) = s at s = 2, 3, hence x = (0, 1, 2, 3) solves F.
        let m = ParameterMatrix::from_real([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [6.0, -4.0, 1.0, 0.0],
            [0.0, 7.0, -5.0, 1.0],
        ])
        .unwrap();
        let x = SolutionPoint::real(0.0, 1.0, 2.0, 3.0);
        let cert = Certifier::new(&m, Mode::Strict).alpha_test(&x).unwrap();
        assert_eq!(cert.beta, 0.0);
        assert_eq!(cert.alpha, 0.0);
        assert!(cert.certified);
    }

    #[test]
    fn duplicates_are_not_distinct() {
        let start = bootstrap_start_set(&TrackerConfig::default()).unwrap();
        let certs: Vec<AlphaCertificate> = start.full_set[..3]
            .iter()
            .chain(&start.full_set[1..2])
            .map(|x| alpha_test(&start.base_matrix, x).unwrap())
            .collect();
        assert_eq!(
            certify_distinct(&certs),
            Distinctness {
                distinct: false,
                pair: Some((1, 3))
            }
        );
        assert!(certify_distinct(&certs[..3]).distinct);
    }

    #[test]
    fn base_instance_census_is_certified_in_both_modes() {
        let (m, orbits) = solved(0);
        for mode in [Mode::Fast, Mode::Strict] {
            let report = certify_report(&m, &orbits, mode, Execution::Parallel).unwrap();
            assert!(report.distinct.distinct);
            assert!(report.reality_flags.iter().all(|f| *f == RealityFlag::CertifiedReal));
            assert_eq!(report.census_certified, Some(TripleCount::new(10, 0, 0)), "{mode:?}");
        }
    }

    #[test]
    fn nonreal_instance_pairs_conjugates() {
        let (m, orbits) = solved(10);
        let report = certify_report(&m, &orbits, Mode::Fast, Execution::Parallel).unwrap();
        assert_eq!(report.census_certified, Some(TripleCount::new(0, 0, 0)));
        assert!(report.reality_flags.iter().all(|f| *f == RealityFlag::CertifiedNonreal));
        for (o, partner) in report.conjugate_partners.iter().enumerate() {
            let p = partner.expect("partner");
            assert_eq!(report.conjugate_partners[p], Some(o));
        }
    }

    #[test]
    fn certified_census_matches_heuristic_on_witnesses() {
        for k in 0..data::reference().witnesses().len() {
            let (m, mut orbits) = solved(k);
            let report = certify_report(&m, &orbits, Mode::Fast, Execution::Parallel).unwrap();
            classifier::classify_records(&mut orbits, REALITY_TOL).unwrap();
            assert_eq!(report.census_certified, Some(classifier::census(&orbits).unwrap()), "witness {k}");
        }
    }

    #[test]
    fn under_refined_points_are_incomplete() {
        let (m, mut orbits) = solved(0);
        for orbit in orbits.iter_mut() {
            for member in orbit.orbit.iter_mut() {
                member.t1 += 1e-2;
            }
        }
        let report = certify_report(&m, &orbits, Mode::Fast, Execution::Sequential).unwrap();
        assert!(!report.is_complete());
        assert!(matches!(
            certify_census(&m, &orbits, Mode::Fast, Execution::Sequential, 0),
            Err(Error::CertificationIncomplete { .. })
        ));
        // The refining pipeline recovers.
        let (report, _) = certify_census(&m, &orbits, Mode::Fast, Execution::Sequential, 3).unwrap();
        assert_eq!(report.census_certified, Some(TripleCount::new(10, 0, 0)));
    }
}
