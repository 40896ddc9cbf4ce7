//! Euler characteristic densities of excursion sets and the expected
//! Minkowski curves they generate.
//!
//! For a unit-variance, isotropic field with second spectral moment `γ`, the
//! EC density of dimension `n` at threshold `x` is
//!
//! ```text
//! Ξ_n(x) = γ^{n/2} (2π)^{-n/2} phi(x) [ H_{n-1}(x) + Δ_{1,n}(x) + Δ_{2,n}(x) ],
//! ```
//!
//! where `Δ_{1,n}` collects the third-order (skewness) corrections and
//! `Δ_{2,n}` the fourth-order ones together with quadratic third-order
//! terms.  The corrections are driven by a [`CumulantSet`]: derivatives of
//! the third and fourth joint cumulant functions at coincident points,
//! with the formal smallness parameter already absorbed into the values.
//! `Ξ_0` reduces to the Gaussian upper tail via the `H_{-1}` extension.
//!
//! Expected curves over a rectangle `E` follow by weighting with intrinsic
//! volumes: `E[χ(E_v)] = Σ_d L_d(E) Ξ_d(v)`, and more generally
//! `E[L_k(E_v)] = Σ_d [k+d, k] L_{k+d}(E) Ξ_d(v)` with flag coefficients
//! from [`crate::geometry`].

use alloc::vec::Vec;

use crate::geometry::{binomial, flag_coeff, unit_ball_volume, LkVector};
use crate::hermite::{gaussian_pdf, hermite};

/// Cumulant derivatives at the origin driving the corrections.
///
/// `k*` are third-order values (`k0 = κ^{(3)}(0,0,0)`, `k1` one slot
/// differentiated once, `k11` two slots once each); `q*` are fourth-order
/// values with the slot pattern named by the suffix: `a` marks derivative
/// pairs sharing a vertex, `aa` disjoint pairs, `111a` a three-edge chain,
/// `111d` the degree-three star.  Loop-type patterns do not enter the
/// expansion and are deliberately absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    /// Second spectral moment `γ > 0` (variance of each field derivative).
    pub gamma: f64,
    /// `κ^{(3)}` at the origin.
    pub k0: f64,
    /// One slot of `κ^{(3)}` differentiated once.
    pub k1: f64,
    /// Two slots of `κ^{(3)}` differentiated once each.
    pub k11: f64,
    /// `κ^{(4)}` at the origin.
    pub q0: f64,
    /// One slot of `κ^{(4)}` differentiated once.
    pub q1: f64,
    /// Two adjacent slots (sharing a vertex) differentiated once each.
    pub q11a: f64,
    /// Two disjoint slots differentiated once each.
    pub q11aa: f64,
    /// Three slots forming a chain, differentiated once each.
    pub q111a: f64,
    /// Three slots meeting at one vertex, differentiated once each.
    pub q111d: f64,
}

impl CumulantSet {
    /// The Gaussian reference point: all corrections zero.
    pub fn gaussian(gamma: f64) -> Self {
        CumulantSet {
            gamma,
            k0: 0.0,
            k1: 0.0,
            k11: 0.0,
            q0: 0.0,
            q1: 0.0,
            q11a: 0.0,
            q11aa: 0.0,
            q111a: 0.0,
            q111d: 0.0,
        }
    }
}

/// How much of the correction series to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    /// Leading Gaussian term only.
    Gaussian,
    /// Gaussian term plus the third-order correction `Δ_1`.
    Skewness,
    /// Full two-term expansion `Δ_1 + Δ_2`.
    SkewnessKurtosis,
}

/// First-order (skewness) correction `Δ_{1,n}(x)`:
///
/// ```text
/// Δ_{1,n} = ½ γ^{-2} k11 n(n-1) H_{n-2} - ½ γ^{-1} k1 n H_n + ⅙ k0 H_{n+2}.
/// ```
///
/// Prefactors that vanish for small `n` short-circuit before the (then
/// undefined) negative-index Hermite value would be touched.
pub fn delta1(n: usize, x: f64, c: &CumulantSet) -> f64 {
    let nf = n as f64;
    let gi = 1.0 / c.gamma;
    let mut acc = 0.0;
    let pair = nf * (nf - 1.0);
    if pair != 0.0 {
        acc += 0.5 * gi * gi * c.k11 * pair * hermite(n as i32 - 2, x);
    }
    if n != 0 {
        acc -= 0.5 * gi * c.k1 * nf * hermite(n as i32, x);
    }
    acc + c.k0 / 6.0 * hermite(n as i32 + 2, x)
}

/// Second-order correction `Δ_{2,n}(x)`, mixing linear fourth-order and
/// quadratic third-order cumulant terms:
///
/// ```text
/// Δ_{2,n} = [ -⅙ γ^{-3} (3 q111a + q111d) + ⅛ γ^{-4} k11² (n-7) ] n(n-1)(n-2) H_{n-3}
///         + [ ⅛ γ^{-2} (q11aa (n-2) + 4 q11a (n-1)) - ¼ γ^{-3} k1 k11 (n-1)(n-4) ] n H_{n-1}
///         + [ -¼ γ^{-1} q1 + (1/24) γ^{-2} (3 k1² (n-2) + 2 k0 k11 (n-1)) ] n H_{n+1}
///         + [ (1/24) q0 - (1/12) γ^{-1} k0 k1 n ] H_{n+3}
///         + (1/72) k0² H_{n+5}.
/// ```
pub fn delta2(n: usize, x: f64, c: &CumulantSet) -> f64 {
    let nf = n as f64;
    let gi = 1.0 / c.gamma;
    let gi2 = gi * gi;
    let mut acc = 0.0;
    let triple = nf * (nf - 1.0) * (nf - 2.0);
    if triple != 0.0 {
        acc += (-gi * gi2 / 6.0 * (3.0 * c.q111a + c.q111d)
            + gi2 * gi2 / 8.0 * c.k11 * c.k11 * (nf - 7.0))
            * triple
            * hermite(n as i32 - 3, x);
    }
    if n != 0 {
        acc += (gi2 / 8.0 * (c.q11aa * (nf - 2.0) + 4.0 * c.q11a * (nf - 1.0))
            - gi * gi2 / 4.0 * c.k1 * c.k11 * (nf - 1.0) * (nf - 4.0))
            * nf
            * hermite(n as i32 - 1, x);
        acc += (-0.25 * gi * c.q1
            + gi2 / 24.0 * (3.0 * c.k1 * c.k1 * (nf - 2.0) + 2.0 * c.k0 * c.k11 * (nf - 1.0)))
            * nf
            * hermite(n as i32 + 1, x);
    }
    acc += (c.q0 / 24.0 - gi / 12.0 * c.k0 * c.k1 * nf) * hermite(n as i32 + 3, x);
    acc + c.k0 * c.k0 / 72.0 * hermite(n as i32 + 5, x)
}

/// EC density `Ξ_n(x)` truncated at the requested correction level.
pub fn ec_density_at(level: Correction, n: usize, x: f64, c: &CumulantSet) -> f64 {
    assert!(c.gamma > 0.0, "ec_density: gamma must be positive");
    let mut bracket = hermite(n as i32 - 1, x);
    if level != Correction::Gaussian {
        bracket += delta1(n, x, c);
    }
    if level == Correction::SkewnessKurtosis {
        bracket += delta2(n, x, c);
    }
    libm::pow(c.gamma, 0.5 * n as f64)
        * libm::pow(2.0 * core::f64::consts::PI, -0.5 * n as f64)
        * gaussian_pdf(x)
        * bracket
}

/// EC density `Ξ_n(x)` with the full two-term correction.
///
/// `Ξ_0(x)` is the Gaussian upper tail plus its corrections; with a zero
/// [`CumulantSet`] it equals `P(Z ≥ x)` to machine precision.
pub fn ec_density(n: usize, x: f64, c: &CumulantSet) -> f64 {
    ec_density_at(Correction::SkewnessKurtosis, n, x, c)
}

/// Expected intrinsic volume of the excursion set,
/// `E[L_k(E_v)] = Σ_{d=0}^{n-k} [k+d, k] L_{k+d}(E) Ξ_d(v)`,
/// truncated at the requested correction level.
pub fn expected_lk_excursion_at(
    level: Correction,
    k: usize,
    lk: &LkVector,
    v: f64,
    c: &CumulantSet,
) -> f64 {
    let n = lk.dim();
    assert!(
        k <= n,
        "expected_lk_excursion: k must not exceed the dimension"
    );
    let mut acc = 0.0;
    for d in 0..=n - k {
        acc += flag_coeff(k, d) * lk.get(k + d) * ec_density_at(level, d, v, c);
    }
    acc
}

/// Expected intrinsic volume with the full correction.
pub fn expected_lk_excursion(k: usize, lk: &LkVector, v: f64, c: &CumulantSet) -> f64 {
    expected_lk_excursion_at(Correction::SkewnessKurtosis, k, lk, v, c)
}

/// Expected Euler characteristic `E[χ(E_v)] = Σ_d L_d(E) Ξ_d(v)` at a given
/// correction level.
pub fn expected_ec_at(level: Correction, lk: &LkVector, v: f64, c: &CumulantSet) -> f64 {
    // The k = 0 Minkowski curve *is* the EC curve: flag_coeff(0, d) = 1
    // exactly, so delegating keeps the two bit-identical.
    expected_lk_excursion_at(level, 0, lk, v, c)
}

/// Expected Euler characteristic with the full correction.
pub fn expected_ec(lk: &LkVector, v: f64, c: &CumulantSet) -> f64 {
    expected_ec_at(Correction::SkewnessKurtosis, lk, v, c)
}

/// Expected Minkowski functional `E[M_{n-k}(E_v)] = ω_{n-k} E[L_k(E_v)] / C(n,k)`,
/// the boundary-integral normalisation of the same curve.
pub fn expected_minkowski(k: usize, lk: &LkVector, v: f64, c: &CumulantSet) -> f64 {
    let n = lk.dim();
    assert!(
        k <= n,
        "expected_minkowski: k must not exceed the dimension"
    );
    unit_ball_volume(n - k) * expected_lk_excursion(k, lk, v, c) / binomial(n, k)
}

/// First-order shift of the expected curve under a contiguous perturbation:
/// the derivative of `E[L_k(E_v)]` in the skewness direction,
///
/// ```text
/// δ_{k,v} = Σ_{d=0}^{n-k} [k+d, k] L_{k+d}(E) γ^{d/2} (2π)^{-d/2} phi(v) Δ_{1,d}(v).
/// ```
pub fn local_power_shift(k: usize, lk: &LkVector, v: f64, c: &CumulantSet) -> f64 {
    let n = lk.dim();
    assert!(k <= n, "local_power_shift: k must not exceed the dimension");
    assert!(c.gamma > 0.0, "local_power_shift: gamma must be positive");
    let mut acc = 0.0;
    for d in 0..=n - k {
        acc += flag_coeff(k, d)
            * lk.get(k + d)
            * libm::pow(c.gamma, 0.5 * d as f64)
            * libm::pow(2.0 * core::f64::consts::PI, -0.5 * d as f64)
            * gaussian_pdf(v)
            * delta1(d, v, c);
    }
    acc
}

/// Normalised ensemble statistic `T_N = N^{-1/2} Σ_i (x_i - μ) / σ`.
///
/// Under the null (`x_i` i.i.d. with mean `μ`, s.d. `σ`) this is
/// asymptotically standard normal; under a contiguous alternative it drifts
/// by `√N · δ/σ` with `δ` from [`local_power_shift`].
///
/// # Panics
///
/// Panics on an empty sample or a nonpositive `σ`.
pub fn tn_statistic(samples: &[f64], null_mean: f64, null_sd: f64) -> f64 {
    assert!(!samples.is_empty(), "tn_statistic: empty sample");
    assert!(null_sd > 0.0, "tn_statistic: null sd must be positive");
    let sum: f64 = samples.iter().map(|x| (x - null_mean) / null_sd).sum();
    sum / libm::sqrt(samples.len() as f64)
}

/// Convenience: `Ξ_d(v)` for `d = 0..=n` on one threshold, full correction.
pub fn ec_density_profile(n: usize, v: f64, c: &CumulantSet) -> Vec<f64> {
    (0..=n).map(|d| ec_density(d, v, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lk_rectangle;
    use crate::hermite::gaussian_tail;

    fn skew_only(gamma: f64, k0: f64) -> CumulantSet {
        CumulantSet {
            k0,
            ..CumulantSet::gaussian(gamma)
        }
    }

    #[test]
    fn delta1_vanishes_without_cumulants() {
        let c = CumulantSet::gaussian(3.0);
        for n in 0..5 {
            for x in [-2.0, 0.0, 1.7] {
                assert_eq!(delta1(n, x, &c), 0.0);
            }
        }
    }

    #[test]
    fn delta1_pure_skewness_value() {
        // n = 2, x = 0, k0 = 0.1 only: ⅙·0.1·H₄(0) = 0.05 (H₄(0) = 3).
        let c = skew_only(1.0, 0.1);
        assert!((delta1(2, 0.0, &c) - 0.05).abs() < 1e-15);
        // n = 0 keeps only the ⅙ k0 H₂ term.
        let x = 0.9;
        assert!((delta1(0, x, &c) - 0.1 / 6.0 * hermite(2, x)).abs() < 1e-15);
    }

    #[test]
    fn delta2_vanishes_without_cumulants() {
        let c = CumulantSet::gaussian(2.0);
        for n in 0..5 {
            assert_eq!(delta2(n, 0.3, &c), 0.0);
        }
    }

    #[test]
    fn delta2_odd_hermite_cancellation() {
        // n = 2, x = 0, k0 only: the surviving terms carry H₅(0) and H₇(0),
        // both odd polynomials, so the value is exactly zero.
        let c = skew_only(1.0, 0.1);
        assert_eq!(delta2(2, 0.0, &c), 0.0);
    }

    #[test]
    fn delta2_prefactor_guards() {
        // n = 1 with only k11 set: every Δ₂ term carries a vanishing integer
        // prefactor or another cumulant factor, so the result is zero.
        let c = CumulantSet {
            k11: 0.7,
            ..CumulantSet::gaussian(2.5)
        };
        assert_eq!(delta2(1, 1.0, &c), 0.0);
    }

    #[test]
    fn gaussian_reduction_matches_closed_form() {
        // Zero cumulants: Ξ_n(x) = γ^{n/2} (2π)^{-n/2} phi(x) H_{n-1}(x).
        let c = CumulantSet::gaussian(50.0);
        for n in 0..=6 {
            for i in 0..33 {
                let x = -4.0 + 0.25 * i as f64;
                let got = ec_density(n, x, &c);
                let want = libm::pow(50.0, 0.5 * n as f64)
                    * libm::pow(2.0 * core::f64::consts::PI, -0.5 * n as f64)
                    * gaussian_pdf(x)
                    * hermite(n as i32 - 1, x);
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                    "n={n} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn xi_zero_is_the_gaussian_tail() {
        let c = CumulantSet::gaussian(7.0);
        for i in 0..65 {
            let x = -8.0 + 0.25 * i as f64;
            let got = ec_density(0, x, &c);
            let want = gaussian_tail(x);
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1e-300),
                "x={x}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn xi_two_known_value() {
        // γ = 50, x = 1: 50·(2π)^{-1}·phi(1)·H₁(1); 50-digit reference.
        let c = CumulantSet::gaussian(50.0);
        assert!((ec_density(2, 1.0, &c) - 1.925_541_844_537_447_2).abs() < 1e-13);
    }

    #[test]
    fn expected_ec_known_values() {
        let c = CumulantSet::gaussian(50.0);
        let square = lk_rectangle(&[1.0, 1.0]).unwrap();
        // Σ_d L_d Ξ_d(1) for the unit square; 50-digit reference.
        let got = expected_ec(&square, 1.0, &c);
        assert!((got - 3.449_370_721_440_948).abs() < 1e-12, "got {got}");
        // Very low thresholds recover χ of the box itself.
        assert!((expected_ec(&square, -8.0, &c) - 1.0).abs() < 1e-10);
        // A single point only has L_0 = 1: the curve is the tail itself.
        let point = LkVector::new(alloc::vec![1.0]);
        assert_eq!(expected_ec(&point, 0.7, &c), ec_density(0, 0.7, &c));
    }

    #[test]
    fn expected_ec_is_bitwise_the_zeroth_minkowski_curve() {
        let c = CumulantSet {
            k0: 0.3,
            k1: -0.2,
            k11: 4.0,
            q0: 0.12,
            ..CumulantSet::gaussian(11.0)
        };
        let lk = lk_rectangle(&[1.0, 2.0, 0.5]).unwrap();
        for i in 0..=26 {
            let v = -3.0 + 0.25 * i as f64;
            let a = expected_ec(&lk, v, &c);
            let b = expected_lk_excursion(0, &lk, v, &c);
            assert!(a == b, "v={v}: {a} vs {b} differ in bits");
        }
    }

    #[test]
    fn expected_lk_top_and_middle_cases() {
        let c = CumulantSet::gaussian(50.0);
        let square = lk_rectangle(&[1.0, 1.0]).unwrap();
        // k = n: flag(n,0)·L_n·Ξ₀(v) = area times the tail.
        let v = 0.8;
        let got = expected_lk_excursion(2, &square, v, &c);
        assert!((got - ec_density(0, v, &c)).abs() < 1e-15);
        // k = 1 at v = 0: 1·2·Ξ₀(0) + (π/2)·1·Ξ₁(0); 50-digit reference.
        let got = expected_lk_excursion(1, &square, 0.0, &c);
        assert!((got - 2.767_766_952_966_369).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn expected_curves_are_linear_in_the_intrinsic_volumes() {
        let c = skew_only(5.0, 0.4);
        let a = LkVector::new(alloc::vec![1.0, 2.0, 1.0]);
        let b = LkVector::new(alloc::vec![1.0, 5.0, 6.0]);
        let sum = LkVector::new(alloc::vec![2.0, 7.0, 7.0]);
        let v = 0.4;
        let lhs = expected_ec(&a, v, &c) + expected_ec(&b, v, &c);
        let rhs = expected_ec(&sum, v, &c);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn minkowski_normalisation() {
        let c = CumulantSet::gaussian(9.0);
        let square = lk_rectangle(&[1.0, 1.0]).unwrap();
        let v = 0.3;
        // n = 2, k = 2: M₀ = ω₀·L₂/C(2,2) = L₂ (the area functional).
        assert_eq!(
            expected_minkowski(2, &square, v, &c),
            expected_lk_excursion(2, &square, v, &c)
        );
        // n = 2, k = 1: M₁ = ω₁·L₁/C(2,1) = L₁ — half the boundary length
        // convention turns into the factor 2/2 = 1 here.
        let got = expected_minkowski(1, &square, v, &c);
        assert!((got - expected_lk_excursion(1, &square, v, &c)).abs() < 1e-15);
    }

    #[test]
    fn correction_levels_nest() {
        let c = CumulantSet {
            k0: 0.3,
            k1: -0.1,
            k11: 2.0,
            q0: 0.2,
            q1: -0.05,
            q11a: 0.5,
            q11aa: 1.0,
            q111a: -0.7,
            q111d: 0.0,
            gamma: 25.0,
        };
        let lk = lk_rectangle(&[1.0, 1.0]).unwrap();
        let v = 1.3;
        let g0 = expected_ec_at(Correction::Gaussian, &lk, v, &c);
        let g1 = expected_ec_at(Correction::Skewness, &lk, v, &c);
        let g2 = expected_ec_at(Correction::SkewnessKurtosis, &lk, v, &c);
        // With zero cumulants all levels agree …
        let gauss = CumulantSet::gaussian(25.0);
        assert_eq!(
            expected_ec_at(Correction::Gaussian, &lk, v, &gauss),
            expected_ec_at(Correction::SkewnessKurtosis, &lk, v, &gauss)
        );
        // … with nonzero ones each level genuinely adds terms.
        assert!(g0 != g1 && g1 != g2);
    }

    #[test]
    fn monotone_gaussian_tail_behaviour() {
        // Far in the tail the expected EC is positive and decreasing.
        let c = CumulantSet::gaussian(50.0);
        let square = lk_rectangle(&[1.0, 1.0]).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..=16 {
            let v = 4.0 + 0.25 * i as f64;
            let val = expected_ec(&square, v, &c);
            assert!(val > 0.0, "v={v}: {val}");
            assert!(val < last, "v={v}: not decreasing");
            last = val;
        }
    }

    #[test]
    fn local_power_shift_pure_skewness() {
        // Only k0 ≠ 0: δ_{0,v} = ⅙ k0 Σ_d flag·L_d·γ^{d/2}(2π)^{-d/2} phi(v) H_{d+2}(v);
        // 50-digit reference for the square, v = 1, γ = 50, k0 = 0.1.
        let c = skew_only(50.0, 0.1);
        let square = lk_rectangle(&[1.0, 1.0]).unwrap();
        let got = local_power_shift(0, &square, 1.0, &c);
        assert!(
            (got - (-0.109_690_515_583_649_69)).abs() < 1e-13,
            "got {got}"
        );
        // Zero cumulants: no shift.
        let gauss = CumulantSet::gaussian(50.0);
        assert_eq!(local_power_shift(0, &square, 1.0, &gauss), 0.0);
    }

    #[test]
    fn tn_statistic_values() {
        // 100 samples each equal to μ + σ: T = 100/√100 = 10.
        let samples = alloc::vec![1.5f64; 100];
        assert!((tn_statistic(&samples, 0.5, 1.0) - 10.0).abs() < 1e-12);
        // Centered samples: 0.
        let samples = alloc::vec![2.0, -2.0, 2.0, -2.0];
        assert_eq!(tn_statistic(&samples, 0.0, 2.0), 0.0);
    }

    #[test]
    #[should_panic(expected = "empty sample")]
    fn tn_statistic_rejects_empty() {
        tn_statistic(&[], 0.0, 1.0);
    }

    #[test]
    #[should_panic(expected = "sd must be positive")]
    fn tn_statistic_rejects_bad_sd() {
        tn_statistic(&[1.0], 0.0, 0.0);
    }
}
