//! Closed-form upper bound on the game value and its pieces, in exact arithmetic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::f2::gaussian_binomial;

pub type Rational = BigRational;

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

fn ratio(num: BigUint, den: BigUint) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^{-e}`
pub fn inverse_pow2(e: usize) -> Rational {
    ratio(BigUint::one(), pow2(e))
}

/// Number of `W ∈ G(2m, m)` whose intersection with the second-half
/// coordinates has dimension `k`: `2^{(m−k)²} · C(m, m−k)₂²`.
pub fn count_by_intersection(m: usize, k: usize) -> BigUint {
    assert!(k <= m, "k = {k} exceeds m = {m}");
    pow2((m - k) * (m - k)) * gaussian_binomial(m, m - k).pow(2)
}

/// Left side of the q-Vandermonde identity, `Σ_k 2^{k²} C(m,k)₂²`.
pub fn vandermonde_sum(m: usize) -> BigUint {
    (0..=m)
        .map(|k| pow2(k * k) * gaussian_binomial(m, k).pow(2))
        .sum()
}

/// `f(m,k) = 2^{k²} C(m,k)₂² / C(2m,m)₂`, the weight of the `k`-th summand.
pub fn summand_weight(m: usize, k: usize) -> Rational {
    ratio(
        pow2(k * k) * gaussian_binomial(m, k).pow(2),
        gaussian_binomial(2 * m, m),
    )
}

/// `(1 / C(2m,m)₂) · Σ_k 2^{k²} C(m,k)₂² 2^{-k}`
pub fn upper_bound(m: usize) -> Rational {
    let total = gaussian_binomial(2 * m, m);
    // Scale every term by 2^m so the sum stays integral.
    let scaled: BigUint = (0..=m)
        .map(|k| pow2(k * k) * gaussian_binomial(m, k).pow(2) * pow2(m - k))
        .sum();
    ratio(scaled, total * pow2(m))
}

/// `(2^{-m}, (11/2)·2^{-m})`, the exact envelope around [`upper_bound`].
pub fn rate_envelope(m: usize) -> (Rational, Rational) {
    let lower = inverse_pow2(m);
    let upper = &lower * Rational::new(BigInt::from(11), BigInt::from(2));
    (lower, upper)
}

/// Decimal rendering with `digits` significant digits.
pub fn to_decimal(q: &Rational, digits: usize) -> String {
    use num_traits::ToPrimitive;
    let v = q.to_f64().unwrap_or(f64::NAN);
    format_significant(v, digits)
}

/// Fixed-point text with `digits` significant digits, always `.` as separator.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), v);
    }
    let exponent = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}
