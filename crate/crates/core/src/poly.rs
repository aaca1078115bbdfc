//! Sparse polynomials in the four unknowns `(t1, t2, s1, s2)`, generic over
//! the coefficient ring so the same code serves floating-point and exact
//! rational certification.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

pub type Exponent = [u8; 4];

pub trait Ring:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    terms: BTreeMap<Exponent, T>,
}

impl<T: Ring> Poly<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: T) -> Self {
        let mut p = Self::zero();
        p.add_term([0; 4], c);
        p
    }

    pub fn var(k: usize) -> Self {
        let mut e = [0; 4];
        e[k] = 1;
        let mut p = Self::zero();
        p.add_term(e, T::one());
        p
    }

    fn add_term(&mut self, e: Exponent, c: T) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(T::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: Exponent) -> T {
        self.terms.get(&e).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&a| a as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut p = Self::zero();
        for (e, a) in &self.terms {
            p.add_term(*e, a.clone() * c.clone());
        }
        p
    }

    pub fn eval(&self, x: &[T; 4]) -> T {
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            acc + (0..4).fold(c.clone(), |m, k| m * pow(&x[k], e[k]))
        })
    }

    /// Coefficients of `v -> p(x + v)`: the Taylor expansion at `x`.
    pub fn shift(&self, x: &[T; 4]) -> Self {
        let mut out = Self::zero();
        for (alpha, c) in &self.terms {
            let ranges = alpha.map(|a| 0..=a);
            for b0 in ranges[0].clone() {
                for b1 in ranges[1].clone() {
                    for b2 in ranges[2].clone() {
                        for b3 in ranges[3].clone() {
                            let beta = [b0, b1, b2, b3];
                            let mut coeff = c.clone();
                            for k in 0..4 {
                                coeff = coeff
                                    * integer::<T>(binomial(alpha[k], beta[k]))
                                    * pow(&x[k], alpha[k] - beta[k]);
                            }
                            out.add_term(beta, coeff);
                        }
                    }
                }
            }
        }
        out
    }
}

impl<T: Ring> Add for Poly<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl<T: Ring> Sub for Poly<T> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, -c);
        }
        self
    }
}

impl<T: Ring> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: Self) -> Poly<T> {
        let mut out = Poly::zero();
        for (ea, a) in &self.terms {
            for (eb, b) in &rhs.terms {
                let e = std::array::from_fn(|k| ea[k] + eb[k]);
                out.add_term(e, a.clone() * b.clone());
            }
        }
        out
    }
}

fn pow<T: Ring>(x: &T, n: u8) -> T {
    (0..n).fold(T::one(), |acc, _| acc * x.clone())
}

fn integer<T: Ring>(n: u64) -> T {
    (0..n).fold(T::zero(), |acc, _| acc + T::one())
}

pub fn binomial(n: u8, k: u8) -> u64 {
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}

pub fn factorial(n: u8) -> u64 {
    (1..=n as u64).product()
}

/// The four equations `(f1(s1), f1(s2), f2(s1), f2(s2))` as polynomials.
pub fn system<T: Ring>(m: &[[T; 4]; 4]) -> [Poly<T>; 4] {
    let t1 = Poly::var(0);
    let t2 = Poly::var(1);
    let sum = t1.clone() + t2.clone();
    let prod = &t1 * &t2;
    let quad = &t1 * &t1 + prod.clone() + &t2 * &t2;
    let cube = &prod * &sum;
    let cubic = |i: usize, s: &Poly<T>| -> Poly<T> {
        let mut p = Poly::zero();
        let mut power = Poly::constant(T::one());
        for j in 0..4 {
            p = p + power.scale(&m[i][j]);
            power = &power * s;
        }
        p
    };
    let f = |s: Poly<T>| {
        let (p1, p2, p3, p4) = (cubic(0, &s), cubic(1, &s), cubic(2, &s), cubic(3, &s));
        let f1 = p3 - &sum * &p2 + &prod * &p1;
        let f2 = p4 - &quad * &p2 + &cube * &p1;
        (f1, f2)
    };
    let (a1, a2) = f(Poly::var(2));
    let (b1, b2) = f(Poly::var(3));
    [a1, b1, a2, b2]
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::data;
    use crate::geometry::{self, SolutionPoint};

    #[test]
    fn system_matches_closed_form() {
        let m = data::reference().base_matrix();
        let polys = system(m.entries());
        // The base matrix has first row (1,0,0,0); a full first row reaches degree 6.
        assert_eq!(polys.iter().map(Poly::degree).max(), Some(5));
        let mut full = *m.entries();
        full[0][3] = Complex64::new(0.5, 0.0);
        assert_eq!(system(&full).iter().map(Poly::degree).max(), Some(6));
        let x = SolutionPoint::new(
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.1, 0.4),
            Complex64::new(0.7, 0.9),
            Complex64::new(2.0, -0.5),
        );
        let f = geometry::evaluate_system(&m, &x);
        for (p, fi) in polys.iter().zip(f) {
            assert!((p.eval(&x.to_array()) - fi).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_gives_value_and_jacobian() {
        let m = data::reference().base_matrix();
        let x = SolutionPoint::real(0.2, -0.7, 1.3, 0.4);
        let jac = geometry::jacobian(&m, &x);
        for (i, p) in system(m.entries()).iter().enumerate() {
            let shifted = p.shift(&x.to_array());
            assert!((shifted.coefficient([0; 4]) - p.eval(&x.to_array())).norm() < 1e-12);
            for k in 0..4 {
                let mut e = [0; 4];
                e[k] = 1;
                assert!((shifted.coefficient(e) - jac[i][k]).norm() < 1e-11);
            }
            // p(x + v) == shifted(v) at a random-ish v.
            let v = [0.3, -0.1, 0.25, 0.5].map(|r| Complex64::new(r, 0.1));
            let xv: [Complex64; 4] = std::array::from_fn(|k| x.to_array()[k] + v[k]);
            assert!((shifted.eval(&v) - p.eval(&xv)).norm() < 1e-10);
        }
    }

    #[test]
    fn small_combinatorics() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(factorial(5), 120);
    }
}
