//! Probabilists' Hermite polynomials `H_k` and Gaussian density helpers.
//!
//! The polynomials follow the probabilists' convention: `H_0 = 1`, `H_1 = x`,
//! and the three-term recurrence
//!
//! ```text
//! H_{k+1}(x) = x H_k(x) - k H_{k-1}(x).
//! ```
//!
//! The index is extended one step below zero by the Mills ratio,
//!
//! ```text
//! H_{-1}(x) = Phibar(x) / phi(x),
//! ```
//!
//! where `phi` is the standard normal density and `Phibar` its upper tail.
//! With this extension the closed form for Gaussian tail integrals,
//!
//! ```text
//! ∫_x^∞ H_k(t) phi(t) dt = H_{k-1}(x) phi(x),
//! ```
//!
//! holds for every `k ≥ 0`, and the Euler characteristic density of dimension
//! zero reduces to the Gaussian tail probability itself.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;

/// `√(2π)`, the normalisation of the standard normal density.
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal density `phi(x) = e^{-x²/2} / √(2π)`.
#[inline]
pub fn gaussian_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / SQRT_2PI
}

/// Standard normal upper tail `Phibar(x) = P(Z ≥ x)`, via `erfc`.
#[inline]
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Mills ratio `Phibar(x) / phi(x)` by the Laplace continued fraction.
///
/// Truncated at depth 60 the fraction is accurate to the last bit for
/// `x ≥ 6` (checked against 50-digit reference values); it is used only on
/// that range, where the naive quotient would eventually degrade to `0/0`.
fn mills_ratio_cf(x: f64) -> f64 {
    let mut r = 0.0;
    for k in (1..=60u32).rev() {
        r = f64::from(k) / (x + r);
    }
    1.0 / (x + r)
}

/// Probabilists' Hermite polynomial `H_k(x)` for `k ≥ -1`.
///
/// `k = -1` returns the Mills ratio `Phibar(x)/phi(x)`; for `x ≥ 6` it is
/// evaluated in scaled form (a continued fraction for the ratio itself)
/// rather than as a quotient of two vanishing terms.
///
/// # Panics
///
/// Panics if `k < -1`; the extension does not continue further down.
///
/// # Examples
///
/// ```
/// use minkowski_lab::hermite::hermite;
/// assert_eq!(hermite(0, 7.3), 1.0);
/// assert_eq!(hermite(3, 1.0), -2.0); // x³ - 3x at x = 1
/// ```
pub fn hermite(k: i32, x: f64) -> f64 {
    assert!(k >= -1, "hermite: index {k} below -1 is not defined");
    if k == -1 {
        return if x >= 6.0 {
            mills_ratio_cf(x)
        } else {
            gaussian_tail(x) / gaussian_pdf(x)
        };
    }
    let mut prev = 1.0; // H_0
    let mut cur = x; // H_1
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - f64::from(j) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gaussian tail integral `∫_x^∞ H_k(t) phi(t) dt = H_{k-1}(x) phi(x)`.
///
/// For `k = 0` this is the plain upper tail probability.
///
/// # Examples
///
/// ```
/// use minkowski_lab::hermite::hermite_tail_integral;
/// assert_eq!(hermite_tail_integral(0, 0.0), 0.5);
/// ```
pub fn hermite_tail_integral(k: u32, x: f64) -> f64 {
    hermite(k as i32 - 1, x) * gaussian_pdf(x)
}

/// `H_k(x)` evaluated in exact rational arithmetic (`k ≥ 0`).
///
/// The jet-algebra verifiers compare determinantal derivative evaluations
/// against Hermite values at rational sample points; both sides must be exact
/// for pointwise equality to constitute a polynomial identity proof.
pub fn hermite_rational(k: u32, x: &BigRational) -> BigRational {
    let mut prev = BigRational::from_integer(BigInt::from(1));
    let mut cur = x.clone();
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * &cur - BigRational::from_integer(BigInt::from(j)) * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Coefficients of `H_k` in the monomial basis, `c_0 + c_1 x + … + c_k x^k`,
/// as exact integers.  Convenience for tests and exact expansions.
pub fn hermite_coefficients(k: u32) -> Vec<BigInt> {
    let mut prev = alloc::vec![BigInt::from(1)];
    if k == 0 {
        return prev;
    }
    let mut cur = alloc::vec![BigInt::from(0), BigInt::from(1)];
    for j in 1..k {
        // H_{j+1} = x H_j - j H_{j-1}
        let mut next = alloc::vec![BigInt::from(0); cur.len() + 1];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] += c;
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] -= BigInt::from(j) * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}
