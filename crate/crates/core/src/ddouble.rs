//! Double-double arithmetic for residual evaluation.
//!
//! Near a solution, `F(x)` is a sum of terms that cancel to many digits, so
//! plain `f64` evaluation returns mostly rounding noise. Carrying an error
//! term through every operation (Dekker/Knuth error-free transformations)
//! gives about 106 bits, enough for the residual to be meaningful down to
//! `1e-30` of the term scale.

use num_complex::Complex64;

use crate::geometry::SolutionPoint;
use crate::linalg::{Mat4, Vec4};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn add(self, o: Self) -> Self {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(r.hi, r.lo + t.lo)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let err = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, err + (self.hi * o.lo + self.lo * o.hi))
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn new(z: Complex64) -> Self {
        Self {
            re: Dd::new(z.re),
            im: Dd::new(z.im),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re.add(o.re.neg()),
            im: self.im.add(o.im.neg()),
        }
    }

    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// `F(x; M)` in double-double precision, rounded once to `f64`.
pub fn evaluate(m: &Mat4, x: &SolutionPoint) -> Vec4 {
    let [t1, t2, s1, s2] = x.to_array().map(Cdd::new);
    let sum = t1.add(t2);
    let prod = t1.mul(t2);
    let quad = t1.mul(t1).add(prod).add(t2.mul(t2));
    let cube = prod.mul(sum);
    let eval = |s: Cdd| {
        let p: [Cdd; 4] = std::array::from_fn(|i| {
            let row = m[i].map(Cdd::new);
            row[0].add(s.mul(row[1].add(s.mul(row[2].add(s.mul(row[3]))))))
        });
        (
            p[2].sub(sum.mul(p[1])).add(prod.mul(p[0])),
            p[3].sub(quad.mul(p[1])).add(cube.mul(p[0])),
        )
    };
    let (a1, b1) = eval(s1);
    let (a2, b2) = eval(s2);
    [a1, a2, b1, b2].map(Cdd::to_complex)
}
