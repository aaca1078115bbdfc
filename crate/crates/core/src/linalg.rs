//! Small dense complex linear algebra: 4x4 solves for Newton steps and
//! polynomial roots through companion-matrix eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Mat4 = [[Complex64; 4]; 4];
pub type Vec4 = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LU factorization with partial pivoting of a 4x4 complex matrix.
#[derive(Clone, Debug)]
pub struct Lu4 {
    lu: Mat4,
    perm: [usize; 4],
    sign: f64,
}

impl Lu4 {
    /// Factors `a`; returns `None` when a pivot vanishes relative to the
    /// largest entry (numerically singular).
    pub fn new(a: &Mat4) -> Option<Self> {
        let mut lu = *a;
        let mut perm = [0, 1, 2, 3];
        let mut sign = 1.0;
        let scale = a
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        for col in 0..4 {
            let (pivot, best) = (col..4)
                .map(|r| (r, lu[r][col].norm()))
                .fold((col, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            if best <= scale * 1e-15 {
                return None;
            }
            if pivot != col {
                lu.swap(pivot, col);
                perm.swap(pivot, col);
                sign = -sign;
            }
            let inv = lu[col][col].inv();
            for r in col + 1..4 {
                let factor = lu[r][col] * inv;
                lu[r][col] = factor;
                for k in col + 1..4 {
                    let delta = factor * lu[col][k];
                    lu[r][k] -= delta;
                }
            }
        }
        Some(Self { lu, perm, sign })
    }

    pub fn solve(&self, b: &Vec4) -> Vec4 {
        let mut y = [ZERO; 4];
        for i in 0..4 {
            let mut acc = b[self.perm[i]];
            for k in 0..i {
                acc -= self.lu[i][k] * y[k];
            }
            y[i] = acc;
        }
        for i in (0..4).rev() {
            let mut acc = y[i];
            for k in i + 1..4 {
                acc -= self.lu[i][k] * y[k];
            }
            y[i] = acc / self.lu[i][i];
        }
        y
    }

    pub fn inverse(&self) -> Mat4 {
        let mut inv = [[ZERO; 4]; 4];
        for col in 0..4 {
            let mut e = [ZERO; 4];
            e[col] = Complex64::new(1.0, 0.0);
            let x = self.solve(&e);
            for row in 0..4 {
                inv[row][col] = x[row];
            }
        }
        inv
    }

    pub fn det(&self) -> Complex64 {
        (0..4).fold(Complex64::new(self.sign, 0.0), |acc, i| acc * self.lu[i][i])
    }
}

/// Determinant with a zero fallback for exactly singular input.
pub fn det4(a: &Mat4) -> Complex64 {
    Lu4::new(a).map_or(ZERO, |lu| lu.det())
}

pub fn norm2(v: &Vec4) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &Mat4) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    std::array::from_fn(|i| a[i] - b[i])
}

/// Roots of `sum coeffs[k] a^k` from the eigenvalues of the companion matrix,
/// each polished by a few Newton steps on the polynomial itself.
///
/// `coeffs` must have a nonzero last entry.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let mut companion = DMatrix::<Complex64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    let eig = companion
        .clone()
        .schur()
        .eigenvalues()
        .expect("complex schur form is triangular");
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let (value, slope) = horner(coeffs, z);
                if slope.norm() == 0.0 {
                    break;
                }
                let next = z - value / slope;
                if !next.is_finite() {
                    break;
                }
                z = next;
            }
            z
        })
        .collect()
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = ZERO;
    let mut slope = ZERO;
    for &c in coeffs.iter().rev() {
        slope = slope * z + value;
        value = value * z + c;
    }
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_and_det_match_known_matrix() {
        let a = [
            [c(2.0, 0.0), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            [c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)],
        ];
        let lu = Lu4::new(&a).unwrap();
        // Expanding along the last row: 4 * det([[2,1+i,0],[0,3,0],[i,0,1]]) = 4 * 6.
        assert!((lu.det() - c(24.0, 0.0)).norm() < 1e-12);
        let x = [c(1.0, -1.0), c(0.5, 0.0), c(0.0, 2.0), c(-1.0, 0.0)];
        let b: Vec4 = std::array::from_fn(|i| (0..4).map(|k| a[i][k] * x[k]).sum());
        let y = lu.solve(&b);
        assert!(norm2(&sub(&x, &y)) < 1e-13);
        let inv = lu.inverse();
        for i in 0..4 {
            for j in 0..4 {
                let e: Complex64 = (0..4).map(|k| a[i][k] * inv[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((e - c(expected, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = [[c(1.0, 0.0); 4]; 4];
        a[0][0] = c(2.0, 0.0);
        assert!(Lu4::new(&a).is_none());
        assert_eq!(det4(&a), ZERO);
    }

    #[test]
    fn cubic_roots_from_companion() {
        // (a - 1)(a + 2)(a - i) expanded.
        let roots = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0)];
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &ck) in coeffs.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            coeffs = next;
        }
        let found = polynomial_roots(&coeffs);
        assert_eq!(found.len(), 3);
        for r in roots {
            assert!(found.iter().any(|z| (z - r).norm() < 1e-12));
        }
    }
}
