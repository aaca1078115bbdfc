//! The parameterized bisecant system.
//!
//! A twisted cubic `C1` is the image of the standard cubic `C0 = {[v(a)]}`,
//! `v(a) = (1, a, a^2, a^3)`, under an invertible 4x4 matrix `M`. A line
//! spanned by `v(t1), v(t2)` meets `C1` at `M v(s1)` and `M v(s2)` exactly
//! when the 3x3 minors (rows 1,2,3 and 1,2,4) of `[v(t1) v(t2) M v(s)]`
//! vanish for both `s`. Dividing out `t1 - t2` leaves, with
//! `p_i(s) = m_i1 + m_i2 s + m_i3 s^2 + m_i4 s^3`,
//!
//! ```text
//! f1(t1,t2,s) = p3(s) - (t1 + t2) p2(s) + t1 t2 p1(s)
//! f2(t1,t2,s) = p4(s) - (t1^2 + t1 t2 + t2^2) p2(s) + t1 t2 (t1 + t2) p1(s)
//! ```
//!
//! and `F = (f1(s1), f1(s2), f2(s1), f2(s2))` in the unknowns `(t1,t2,s1,s2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, QComplex};
use crate::linalg::{self, Mat4, Vec4};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative separation below which `t1 ~ t2` (or `s1 ~ s2`) is a degenerate point.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Scale-invariant invertibility threshold: reject `|det M| < 1e-10 ||M||^4`.
pub const INVERTIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentVector {
    pub a: Complex64,
    pub v: [Complex64; 4],
}

pub fn moment_vector(a: Complex64) -> MomentVector {
    MomentVector {
        a,
        v: [ONE, a, a * a, a * a * a],
    }
}

/// An invertible 4x4 matrix representing the twisted cubic `M . C0`.
///
/// The decimal text an entry was parsed from is kept alongside the binary
/// value so that strict certification and file output see the exact input.
#[derive(Clone, Debug)]
pub struct ParameterMatrix {
    entries: Mat4,
    text: Option<Box<[[String; 4]; 4]>>,
}

impl PartialEq for ParameterMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl ParameterMatrix {
    pub fn new(entries: Mat4) -> Result<Self> {
        let m = Self {
            entries,
            text: None,
        };
        m.check_invertible()?;
        Ok(m)
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(rows.map(|r| r.map(|v| Complex64::new(v, 0.0))))
    }

    /// Builds a matrix from decimal or complex literals (`"1.4351"`, `"-4.9127+5.2184i"`).
    pub fn from_text(rows: [[String; 4]; 4]) -> Result<Self> {
        let mut entries = [[ZERO; 4]; 4];
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let (re, im) = exact::split_complex(cell).ok_or_else(|| {
                    Error::parse(format!("rows[{i}][{j}]"), format!("not a number: {cell:?}"))
                })?;
                entries[i][j] = Complex64::new(
                    re.parse::<f64>().map_err(|e| Error::parse(format!("rows[{i}][{j}]"), e.to_string()))?,
                    im.parse::<f64>().map_err(|e| Error::parse(format!("rows[{i}][{j}]"), e.to_string()))?,
                );
            }
        }
        let m = Self {
            entries,
            text: Some(Box::new(rows)),
        };
        m.check_invertible()?;
        Ok(m)
    }

    pub fn from_str_rows(rows: [[&str; 4]; 4]) -> Result<Self> {
        Self::from_text(rows.map(|r| r.map(str::to_string)))
    }

    pub fn identity() -> Self {
        let mut entries = [[ZERO; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = ONE;
        }
        Self {
            entries,
            text: None,
        }
    }

    /// Skips the invertibility check; used for points along a homotopy.
    pub(crate) fn new_unchecked(entries: Mat4) -> Self {
        Self {
            entries,
            text: None,
        }
    }

    fn check_invertible(&self) -> Result<()> {
        let det = self.det().norm();
        let threshold = INVERTIBILITY_TOL * self.frobenius_norm().powi(4);
        if !(det >= threshold) || threshold == 0.0 {
            return Err(Error::SingularMatrix { det, threshold });
        }
        Ok(())
    }

    pub fn entries(&self) -> &Mat4 {
        &self.entries
    }

    /// Entry `m_ij` with 1-based indices as in the usual matrix notation.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i - 1][j - 1]
    }

    pub fn text(&self) -> Option<&[[String; 4]; 4]> {
        self.text.as_deref()
    }

    /// Decimal text of every entry, falling back to shortest round-trip formatting.
    pub fn text_rows(&self) -> [[String; 4]; 4] {
        match &self.text {
            Some(rows) => (**rows).clone(),
            None => self.entries.map(|r| r.map(format_entry)),
        }
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.im == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.entries)
    }

    pub fn det(&self) -> Complex64 {
        linalg::det4(&self.entries)
    }

    pub fn scaled(&self, gamma: Complex64) -> Self {
        Self::new_unchecked(self.entries.map(|r| r.map(|z| z * gamma)))
    }

    /// `(1 - a) * start + a * target` entrywise.
    pub fn lerp(start: &Mat4, target: &Mat4, a: f64) -> Mat4 {
        std::array::from_fn(|i| std::array::from_fn(|j| start[i][j] * (1.0 - a) + target[i][j] * a))
    }

    /// Exact entries: the parsed decimal text when available, otherwise the
    /// exact binary value of each `f64`.
    pub fn exact_entries(&self) -> [[QComplex; 4]; 4] {
        match &self.text {
            Some(rows) => rows.clone().map(|r| {
                r.map(|cell| {
                    let (re, im) = exact::split_complex(&cell).expect("validated at parse");
                    QComplex::new(
                        exact::parse_decimal(&re).expect("validated"),
                        exact::parse_decimal(&im).expect("validated"),
                    )
                })
            }),
            None => self.entries.map(|r| r.map(exact::complex_from_f64)),
        }
    }

    /// The 16 entries row-major, real parts only.
    pub fn real_entries(&self) -> [f64; 16] {
        std::array::from_fn(|k| self.entries[k / 4][k % 4].re)
    }
}

fn format_entry(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im < 0.0 {
        format!("{:?}{:?}i", z.re, z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// A candidate solution `(t1, t2, s1, s2)` of `F(x; M) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SolutionPoint {
    #[serde(with = "pair")]
    pub t1: Complex64,
    #[serde(with = "pair")]
    pub t2: Complex64,
    #[serde(with = "pair")]
    pub s1: Complex64,
    #[serde(with = "pair")]
    pub s2: Complex64,
}

/// Complex numbers serialize as `[re, im]`.
mod pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl SolutionPoint {
    pub fn new(t1: Complex64, t2: Complex64, s1: Complex64, s2: Complex64) -> Self {
        Self { t1, t2, s1, s2 }
    }

    pub fn real(t1: f64, t2: f64, s1: f64, s2: f64) -> Self {
        Self::from_array([t1, t2, s1, s2].map(|v| Complex64::new(v, 0.0)))
    }

    pub fn from_array(v: Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> Vec4 {
        [self.t1, self.t2, self.s1, self.s2]
    }

    pub fn conj(self) -> Self {
        Self::from_array(self.to_array().map(|z| z.conj()))
    }

    pub fn swap_t(self) -> Self {
        Self::new(self.t2, self.t1, self.s1, self.s2)
    }

    pub fn swap_s(self) -> Self {
        Self::new(self.t1, self.t2, self.s2, self.s1)
    }

    pub fn norm(self) -> f64 {
        linalg::norm2(&self.to_array())
    }

    pub fn distance(self, other: Self) -> f64 {
        linalg::norm2(&linalg::sub(&self.to_array(), &other.to_array()))
    }

    /// Distance scaled by the size of the points, so that far-out solutions
    /// compare on the same footing as unit-sized ones.
    pub fn relative_distance(self, other: Self) -> f64 {
        self.distance(other) / self.norm().max(other.norm()).max(1.0)
    }

    pub fn max_abs_diff(self, other: Self) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|z| z.is_finite())
    }

    /// True when `t1 ~ t2` or `s1 ~ s2`, where the system is singular.
    pub fn is_degenerate(self) -> bool {
        fn close(a: Complex64, b: Complex64) -> bool {
            (a - b).norm() <= DEGENERACY_TOL * a.norm().max(b.norm()).max(1.0)
        }
        close(self.t1, self.t2) || close(self.s1, self.s2)
    }
}

/// `p_i(s; M)`: row `i` (1-based) of `M` dotted with `v(s)`.
pub fn row_cubic(m: &ParameterMatrix, i: usize, s: Complex64) -> Complex64 {
    assert!((1..=4).contains(&i), "row index {i} out of 1..=4");
    let row = &m.entries[i - 1];
    row[0] + s * (row[1] + s * (row[2] + s * row[3]))
}

#[inline]
fn cubic_and_slope(row: &[Complex64; 4], s: Complex64) -> (Complex64, Complex64) {
    let value = row[0] + s * (row[1] + s * (row[2] + s * row[3]));
    let slope = row[1] + s * (row[2] * 2.0 + s * row[3] * 3.0);
    (value, slope)
}

/// Residuals `(f1(s1), f1(s2), f2(s1), f2(s2))` at `x` for the raw matrix entries.
pub fn evaluate_entries(m: &Mat4, x: &SolutionPoint) -> Vec4 {
    let sum = x.t1 + x.t2;
    let prod = x.t1 * x.t2;
    let quad = x.t1 * x.t1 + prod + x.t2 * x.t2;
    let cube = prod * sum;
    let eval = |s: Complex64| {
        let p1 = m[0][0] + s * (m[0][1] + s * (m[0][2] + s * m[0][3]));
        let p2 = m[1][0] + s * (m[1][1] + s * (m[1][2] + s * m[1][3]));
        let p3 = m[2][0] + s * (m[2][1] + s * (m[2][2] + s * m[2][3]));
        let p4 = m[3][0] + s * (m[3][1] + s * (m[3][2] + s * m[3][3]));
        (p3 - sum * p2 + prod * p1, p4 - quad * p2 + cube * p1)
    };
    let (a1, b1) = eval(x.s1);
    let (a2, b2) = eval(x.s2);
    [a1, a2, b1, b2]
}

pub fn evaluate_system(m: &ParameterMatrix, x: &SolutionPoint) -> Vec4 {
    evaluate_entries(&m.entries, x)
}

/// Per-equation magnitude of the terms of `F` (every coefficient and
/// unknown replaced by its modulus); the natural scale for rounding error.
pub fn residual_scale(m: &Mat4, x: &SolutionPoint) -> [f64; 4] {
    let (a, b) = (x.t1.norm(), x.t2.norm());
    let sum = a + b;
    let prod = a * b;
    let quad = a * a + prod + b * b;
    let cube = prod * sum;
    let eval = |s: f64| {
        let p: [f64; 4] = std::array::from_fn(|i| {
            m[i][0].norm() + s * (m[i][1].norm() + s * (m[i][2].norm() + s * m[i][3].norm()))
        });
        (p[2] + sum * p[1] + prod * p[0], p[3] + quad * p[1] + cube * p[0])
    };
    let (a1, b1) = eval(x.s1.norm());
    let (a2, b2) = eval(x.s2.norm());
    [a1, a2, b1, b2]
}

/// Largest residual relative to its term scale: a scale-free backward error.
pub fn scaled_residual(m: &Mat4, x: &SolutionPoint) -> f64 {
    let f = evaluate_entries(m, x);
    let scale = residual_scale(m, x);
    f.iter()
        .zip(scale)
        .map(|(fi, si)| if si > 0.0 { fi.norm() / si } else { fi.norm() })
        .fold(0.0, f64::max)
}

pub fn jacobian_entries(m: &Mat4, x: &SolutionPoint) -> Mat4 {
    let (t1, t2) = (x.t1, x.t2);
    let sum = t1 + t2;
    let prod = t1 * t2;
    let quad = t1 * t1 + prod + t2 * t2;
    let cube = prod * sum;
    let mut jac = [[ZERO; 4]; 4];
    for (k, s) in [x.s1, x.s2].into_iter().enumerate() {
        let (p1, d1) = cubic_and_slope(&m[0], s);
        let (p2, d2) = cubic_and_slope(&m[1], s);
        let (_, d3) = cubic_and_slope(&m[2], s);
        let (_, d4) = cubic_and_slope(&m[3], s);
        let f1 = &mut jac[k];
        f1[0] = -p2 + t2 * p1;
        f1[1] = -p2 + t1 * p1;
        f1[2 + k] = d3 - sum * d2 + prod * d1;
        let f2 = &mut jac[2 + k];
        f2[0] = -(t1 * 2.0 + t2) * p2 + (prod * 2.0 + t2 * t2) * p1;
        f2[1] = -(t1 + t2 * 2.0) * p2 + (prod * 2.0 + t1 * t1) * p1;
        f2[2 + k] = d4 - quad * d2 + cube * d1;
    }
    jac
}

/// Analytic Jacobian with respect to `(t1, t2, s1, s2)`.
pub fn jacobian(m: &ParameterMatrix, x: &SolutionPoint) -> Mat4 {
    jacobian_entries(&m.entries, x)
}

/// The `S2 x S2` orbit: swap `t1 <-> t2`, swap `s1 <-> s2`, both.
pub fn orbit_expand(x: &SolutionPoint) -> [SolutionPoint; 4] {
    [*x, x.swap_t(), x.swap_s(), x.swap_t().swap_s()]
}

/// The quadrics `x1^2 - x0 x2`, `x1 x2 - x0 x3`, `x1 x3 - x2^2` cutting out `C0`.
pub fn standard_cubic_membership(p: &[Complex64; 4]) -> Result<[Complex64; 3]> {
    if p.iter().all(|z| *z == ZERO) {
        return Err(Error::ZeroVector);
    }
    Ok([
        p[1] * p[1] - p[0] * p[2],
        p[1] * p[2] - p[0] * p[3],
        p[1] * p[3] - p[2] * p[2],
    ])
}

/// The secant line `span(v(t1), v(t2))` of `C0`, stored as a normalized basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SecantLine {
    pub basis: [[Complex64; 4]; 2],
}

pub fn secant_line(x: &SolutionPoint) -> Result<SecantLine> {
    let separation = (x.t1 - x.t2).norm();
    if separation <= DEGENERACY_TOL * x.t1.norm().max(x.t2.norm()).max(1.0) {
        return Err(Error::DegenerateSecant { separation });
    }
    Ok(SecantLine {
        basis: [normalize(moment_vector(x.t1).v), normalize(moment_vector(x.t2).v)],
    })
}

fn normalize(v: [Complex64; 4]) -> [Complex64; 4] {
    let n = linalg::norm2(&v);
    let lead = v.iter().find(|z| z.norm() > 0.0).copied().unwrap_or(ONE);
    let phase = lead.conj() / lead.norm();
    v.map(|z| z * phase / n)
}

impl SecantLine {
    /// Distance from the unit vector along `p` to the line's span.
    pub fn distance_to(&self, p: &[Complex64; 4]) -> f64 {
        let n = linalg::norm2(p);
        if n == 0.0 {
            return 0.0;
        }
        let p = p.map(|z| z / n);
        let [a, b] = &self.basis;
        // Orthonormalize the basis (Gram-Schmidt) and project.
        let dot = |u: &[Complex64; 4], v: &[Complex64; 4]| -> Complex64 {
            u.iter().zip(v).map(|(ui, vi)| ui.conj() * vi).sum()
        };
        let ab = dot(a, b);
        let mut q = std::array::from_fn::<Complex64, 4, _>(|i| b[i] - a[i] * ab);
        let qn = linalg::norm2(&q);
        q = q.map(|z| z / qn);
        let pa = dot(a, &p);
        let pq = dot(&q, &p);
        let residual: [Complex64; 4] = std::array::from_fn(|i| p[i] - a[i] * pa - q[i] * pq);
        linalg::norm2(&residual)
    }

    /// A line is real when it is closed under complex conjugation.
    pub fn is_real(&self, tol: f64) -> bool {
        self.basis
            .iter()
            .all(|v| self.distance_to(&v.map(|z| z.conj())) <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn base() -> ParameterMatrix {
        crate::data::reference().base_matrix()
    }

    #[test]
    fn moment_vector_examples() {
        assert_eq!(moment_vector(c(0.0, 0.0)).v, [ONE, ZERO, ZERO, ZERO]);
        assert_eq!(moment_vector(ONE).v, [ONE; 4]);
        assert_eq!(
            moment_vector(c(2.0, 0.0)).v,
            [c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(8.0, 0.0)]
        );
    }

    #[test]
    fn row_cubic_examples() {
        let id = ParameterMatrix::identity();
        assert_eq!(row_cubic(&id, 3, c(5.0, 0.0)), c(25.0, 0.0));
        assert_eq!(row_cubic(&id, 1, c(-3.0, 7.0)), ONE);
        assert_eq!(row_cubic(&base(), 1, c(7.0, 0.0)), ONE);
    }

    #[test]
    fn identity_system_examples() {
        let id = ParameterMatrix::identity();
        let f = evaluate_system(&id, &SolutionPoint::real(0.0, 1.0, 0.0, 1.0));
        assert_eq!(f, [ZERO; 4]);
        let f = evaluate_system(&id, &SolutionPoint::real(0.0, 0.0, 2.0, 2.0));
        assert_eq!(f, [c(4.0, 0.0), c(4.0, 0.0), c(8.0, 0.0), c(8.0, 0.0)]);
    }

    #[test]
    fn identity_target_has_singular_jacobian() {
        let id = ParameterMatrix::identity();
        let jac = jacobian(&id, &SolutionPoint::real(0.0, 1.0, 0.0, 1.0));
        // Numerical rank below 4: the determinant vanishes.
        assert!(linalg::det4(&jac).norm() < 1e-12);
    }

    #[test]
    fn equal_t_gives_equal_jacobian_columns() {
        let m = base();
        let x = SolutionPoint::new(c(0.3, 0.2), c(0.3, 0.2), c(-1.0, 0.5), c(2.0, 0.0));
        let jac = jacobian(&m, &x);
        for row in jac {
            assert!((row[0] - row[1]).norm() < 1e-14);
        }
    }

    #[test]
    fn orbit_expand_examples() {
        let x = SolutionPoint::real(1.0, 2.0, 3.0, 4.0);
        assert_eq!(
            orbit_expand(&x),
            [
                SolutionPoint::real(1.0, 2.0, 3.0, 4.0),
                SolutionPoint::real(2.0, 1.0, 3.0, 4.0),
                SolutionPoint::real(1.0, 2.0, 4.0, 3.0),
                SolutionPoint::real(2.0, 1.0, 4.0, 3.0),
            ]
        );
        let fixed = SolutionPoint::real(5.0, 5.0, 6.0, 6.0);
        assert!(orbit_expand(&fixed).iter().all(|y| *y == fixed));
    }

    #[test]
    fn standard_cubic_examples() {
        let r = |v: [f64; 4]| standard_cubic_membership(&v.map(|x| c(x, 0.0))).unwrap();
        assert_eq!(r([1.0, 2.0, 4.0, 8.0]), [ZERO; 3]);
        assert_eq!(r([0.0, 0.0, 0.0, 1.0]), [ZERO; 3]);
        assert_eq!(r([1.0, 0.0, 1.0, 0.0]), [c(-1.0, 0.0), ZERO, c(-1.0, 0.0)]);
        assert!(matches!(
            standard_cubic_membership(&[ZERO; 4]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn secant_line_examples() {
        let line = secant_line(&SolutionPoint::real(0.0, 1.0, 5.0, 6.0)).unwrap();
        assert_eq!(line.basis[0], [ONE, ZERO, ZERO, ZERO]);
        for z in line.basis[1] {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }

        let conj_pair = SolutionPoint::new(c(0.0, 1.0), c(0.0, -1.0), ZERO, ONE);
        let line = secant_line(&conj_pair).unwrap();
        assert!(line.is_real(1e-12));
        let v = moment_vector(c(0.0, 1.0)).v;
        assert!(line.distance_to(&v.map(|z| c(z.re, 0.0))) < 1e-12);
        assert!(line.distance_to(&v.map(|z| c(z.im, 0.0))) < 1e-12);

        let not_real = secant_line(&SolutionPoint::new(c(1.0, 1.0), c(2.0, -3.0), ZERO, ONE)).unwrap();
        assert!(!not_real.is_real(1e-6));

        assert!(matches!(
            secant_line(&SolutionPoint::real(0.5, 0.5, 1.0, 2.0)),
            Err(Error::DegenerateSecant { .. })
        ));
    }

    #[test]
    fn singular_matrix_rejected() {
        let rows = [[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        assert!(matches!(
            ParameterMatrix::from_real(rows),
            Err(Error::SingularMatrix { .. })
        ));
        // Scale invariance: a tiny multiple of an invertible matrix is still accepted.
        let tiny = [[1e-20, 0.0, 0.0, 0.0], [0.0, 1e-20, 0.0, 0.0], [0.0, 0.0, 1e-20, 0.0], [0.0, 0.0, 0.0, 1e-20]];
        assert!(ParameterMatrix::from_real(tiny).is_ok());
    }

    #[test]
    fn text_entries_are_kept_verbatim() {
        let m = base();
        assert_eq!(m.text().unwrap()[2][0], "-1.3085");
        assert_eq!(m.entry(3, 1), c(-1.3085, 0.0));
        let complex = ParameterMatrix::from_str_rows([
            ["1", "0", "0", "0"],
            ["0", "1+2i", "0", "0"],
            ["0", "0", "-3.5e-1-1i", "0"],
            ["0", "0", "0", "2"],
        ])
        .unwrap();
        assert_eq!(complex.entry(3, 3), c(-0.35, -1.0));
        assert!(!complex.is_real());
        assert_eq!(complex.text_rows()[1][1], "1+2i");
    }
}
