//! Exact rational arithmetic used by the strict certification backend.
//!
//! Matrix entries are kept as the decimal text they were read from, so a
//! strict run evaluates the system on exactly the numbers the user wrote.
//! Floating-point points are converted with [`from_f64`], which is exact
//! (every finite `f64` is a dyadic rational).

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type QComplex = Complex<BigRational>;

/// Parses a plain decimal literal (`-1.3085`, `7`, `2.5e-3`) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow((-scale) as u32))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Splits a complex literal such as `-4.9127+5.2184i`, `3i` or `2.5` into
/// its real and imaginary decimal parts.
pub fn split_complex(text: &str) -> Option<(String, String)> {
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return None;
    }
    let Some(body) = text.strip_suffix(['i', 'j']) else {
        parse_decimal(&text)?;
        return Some((text, "0".to_string()));
    };
    // The imaginary part starts at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for pos in (1..bytes.len()).rev() {
        if (bytes[pos] == b'+' || bytes[pos] == b'-') && !matches!(bytes[pos - 1], b'e' | b'E') {
            split = Some(pos);
            break;
        }
    }
    let (re, im) = match split {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1".to_string(),
        "-" => "-1".to_string(),
        other => other.strip_prefix('+').unwrap_or(other).to_string(),
    };
    parse_decimal(re)?;
    parse_decimal(&im)?;
    Some((re.to_string(), im))
}

pub fn from_f64(value: f64) -> BigRational {
    BigRational::from_float(value).expect("finite value")
}

pub fn complex_from_f64(z: num_complex::Complex64) -> QComplex {
    Complex::new(from_f64(z.re), from_f64(z.im))
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// A rational upper bound on `sqrt(value)` for a nonnegative rational.
pub fn sqrt_upper(value: &BigRational) -> BigRational {
    if value.is_zero() {
        return BigRational::zero();
    }
    let mut guess = to_f64(value).sqrt();
    loop {
        guess = next_up(guess);
        let candidate = from_f64(guess);
        if &(&candidate * &candidate) >= value {
            return candidate;
        }
        guess *= 1.0 + 1e-15;
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

pub fn abs_sq(z: &QComplex) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

/// Solves `a x = b` exactly by Gaussian elimination; `None` when singular.
pub fn solve(mut a: [[QComplex; 4]; 4], mut b: [QComplex; 4]) -> Option<[QComplex; 4]> {
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = QComplex::one() / a[col][col].clone();
        for row in col + 1..4 {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col..4 {
                let delta = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &delta;
            }
            let delta = &factor * &b[col];
            b[row] = &b[row] - &delta;
        }
    }
    let mut x: [QComplex; 4] = Default::default();
    for row in (0..4).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..4 {
            acc = acc - &a[row][k] * &x[k];
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("-1.3085"), Some(q(-13085, 10000)));
        assert_eq!(parse_decimal("7"), Some(q(7, 1)));
        assert_eq!(parse_decimal(".5"), Some(q(1, 2)));
        assert_eq!(parse_decimal("2.5e-3"), Some(q(1, 400)));
        assert_eq!(parse_decimal("1e2"), Some(q(100, 1)));
        assert_eq!(parse_decimal("abc"), None);
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("-"), None);
    }

    #[test]
    fn complex_literals_split() {
        assert_eq!(
            split_complex("-4.9127+5.2184i"),
            Some(("-4.9127".into(), "5.2184".into()))
        );
        assert_eq!(
            split_complex("13.4085-6.7213i"),
            Some(("13.4085".into(), "-6.7213".into()))
        );
        assert_eq!(split_complex("2.5"), Some(("2.5".into(), "0".into())));
        assert_eq!(split_complex("-i"), Some(("0".into(), "-1".into())));
        assert_eq!(split_complex("1e-3+2e+1i"), Some(("1e-3".into(), "2e+1".into())));
        assert_eq!(split_complex("x+yi"), None);
    }

    #[test]
    fn sqrt_upper_bounds() {
        for v in [q(2, 1), q(1, 3), q(10_000_000, 7), q(1, 1_000_000_007)] {
            let r = sqrt_upper(&v);
            assert!(&r * &r >= v);
            assert!((to_f64(&r) - to_f64(&v).sqrt()).abs() <= 1e-12 * to_f64(&v).sqrt());
        }
    }

    #[test]
    fn exact_solve_recovers_solution() {
        let one = QComplex::one();
        let mut a: [[QComplex; 4]; 4] = Default::default();
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = QComplex::new(q((i * 4 + j + 1) as i64, 1), q(((i + 2 * j) % 3) as i64, 1));
            }
            a[i][i] = &a[i][i] + &one * QComplex::new(q(9, 1), q(0, 1));
        }
        let x = [
            QComplex::new(q(1, 2), q(-1, 3)),
            QComplex::new(q(2, 1), q(0, 1)),
            QComplex::new(q(0, 1), q(5, 7)),
            QComplex::new(q(-3, 4), q(1, 1)),
        ];
        let mut b: [QComplex; 4] = Default::default();
        for i in 0..4 {
            for j in 0..4 {
                b[i] = &b[i] + &a[i][j] * &x[j];
            }
        }
        assert_eq!(solve(a, b).unwrap(), x);
    }
}
