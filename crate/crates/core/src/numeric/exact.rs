//! Exact arithmetic on the binary values of `f64` inputs.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Sign of `c*c - b*d`, evaluated exactly.
pub fn sign_c2_minus_bd(b: f64, c: f64, d: f64) -> Ordering {
    let c = rational(c);
    let disc = &c * &c - rational(b) * rational(d);
    disc.cmp(&BigRational::zero())
}

/// Sign of `a*a + 4*b`, evaluated exactly.
pub fn sign_a2_plus_4b(a: f64, b: f64) -> Ordering {
    let a = rational(a);
    let four = BigRational::from_integer(BigInt::from(4));
    let disc = &a * &a + four * rational(b);
    disc.cmp(&BigRational::zero())
}

/// `|x - y| <= tol * max(|x|, |y|)`: the margin below which a sign decided
/// exactly is reported as marginal.
pub fn is_marginal(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs())
}
