//! Integral-geometric constants and intrinsic volumes of rectangles.
//!
//! Conventions: `ω_d` is the volume of the unit `d`-ball, `Ω_d = d·ω_d` the
//! surface area of the unit `(d-1)`-sphere inside `R^d`.  The intrinsic
//! volumes `L_j` of a solid rectangle `Π [0, e_i]` are the elementary
//! symmetric polynomials of the edge lengths, normalised so that `L_0 = χ`
//! and `L_n` is the volume.  They satisfy the Steiner tube formula
//!
//! ```text
//! Vol_n(Tube(M, ρ)) = Σ_j ω_{n-j} ρ^{n-j} L_j(M),
//! ```
//!
//! which [`mc_tube_volume`] probes by rejection sampling, and they multiply
//! under Cartesian products in the generating-function sense
//! `L(A × B) = L(A)·L(B)` (polynomial product), which is how
//! [`lk_rectangle`] computes them.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Volume `ω_d = π^{d/2} / Γ(d/2 + 1)` of the unit ball in `R^d`.
///
/// `ω_0 = 1` (a point counts once), `ω_1 = 2`, `ω_2 = π`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    libm::pow(core::f64::consts::PI, 0.5 * d) / libm::tgamma(0.5 * d + 1.0)
}

/// Surface area `Ω_d = 2π^{d/2} / Γ(d/2)` of the unit sphere `S^{d-1} ⊂ R^d`.
///
/// # Panics
///
/// Panics for `d = 0`, where the sphere is empty and the formula degenerates.
pub fn unit_sphere_area(d: usize) -> f64 {
    assert!(d >= 1, "unit_sphere_area: dimension must be at least 1");
    let d = d as f64;
    2.0 * libm::pow(core::f64::consts::PI, 0.5 * d) / libm::tgamma(0.5 * d)
}

/// Flag coefficient
/// `[k+d, k] = Γ((k+d+1)/2) Γ(1/2) / (Γ((k+1)/2) Γ((d+1)/2))`.
///
/// These weights transfer EC densities to the lower Minkowski curves;
/// `flag_coeff(k, 0)` and `flag_coeff(0, d)` are exactly 1.
pub fn flag_coeff(k: usize, d: usize) -> f64 {
    let half = |m: usize| libm::tgamma(0.5 * (m as f64 + 1.0));
    half(k + d) * half(0) / (half(k) * half(d))
}

/// Binomial coefficient `C(n, k)` as a float (exact for the small arguments
/// used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Intrinsic volumes `L_0, …, L_n` of a compact set in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LkVector {
    /// `values[j] = L_j`; the ambient dimension is `values.len() - 1`.
    pub values: Vec<f64>,
}

impl LkVector {
    /// Wraps a list `L_0, …, L_n`.
    ///
    /// # Panics
    ///
    /// Panics on an empty list (`L_0` must exist).
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "LkVector: L_0 must be present");
        LkVector { values }
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.values.len() - 1
    }

    /// `L_j`, or 0 beyond the ambient dimension.
    pub fn get(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }
}

/// Intrinsic volumes of the solid rectangle `Π_i [0, e_i]`.
///
/// Computed as the coefficients of `Π_i (1 + e_i t)`, i.e. the elementary
/// symmetric polynomials of the edges, by repeated polynomial multiplication.
/// That makes the product rule `L(A × B) = L(A)·L(B)` hold bit for bit.
///
/// # Errors
///
/// Rejects empty edge lists and nonpositive edge lengths.
pub fn lk_rectangle(edges: &[f64]) -> Result<LkVector> {
    if edges.is_empty() {
        return Err(Error::InvalidParameter("rectangle needs at least one edge"));
    }
    if edges.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("rectangle edges must be positive"));
    }
    let mut poly = vec![1.0];
    for &e in edges {
        let mut next = vec![0.0; poly.len() + 1];
        for (j, &c) in poly.iter().enumerate() {
            next[j] += c;
            next[j + 1] += c * e;
        }
        poly = next;
    }
    Ok(LkVector::new(poly))
}

/// Exact Steiner tube volume `Σ_j ω_{n-j} ρ^{n-j} L_j` at tube radius `ρ ≥ 0`.
pub fn steiner_tube_volume(lk: &LkVector, rho: f64) -> f64 {
    assert!(rho >= 0.0, "steiner_tube_volume: tube radius must be >= 0");
    let n = lk.dim();
    let mut acc = 0.0;
    for j in 0..=n {
        acc += unit_ball_volume(n - j) * libm::pow(rho, (n - j) as f64) * lk.get(j);
    }
    acc
}

/// Monte Carlo estimate of the tube volume around a rectangle.
///
/// Samples points uniformly in the bounding box `Π [-ρ, e_i + ρ]`, counts
/// those within distance `ρ` of the rectangle, and scales by the box volume.
/// Returns `(estimate, stderr)` with the binomial standard error; for
/// `ρ = 0` the estimate is exact (`stderr = 0`).
///
/// # Errors
///
/// Rejects empty edge lists, nonpositive edges, negative `ρ`, and
/// `samples = 0`.
pub fn mc_tube_volume(edges: &[f64], rho: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    if edges.is_empty() {
        return Err(Error::InvalidParameter("rectangle needs at least one edge"));
    }
    if edges.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("rectangle edges must be positive"));
    }
    if rho < 0.0 {
        return Err(Error::InvalidParameter("tube radius must be >= 0"));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive"));
    }
    let n = edges.len();
    let mut box_volume = 1.0;
    for &e in edges {
        box_volume *= e + 2.0 * rho;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    let mut point = vec![0.0f64; n];
    for _ in 0..samples {
        for (x, &e) in point.iter_mut().zip(edges) {
            *x = rng.random::<f64>() * (e + 2.0 * rho) - rho;
        }
        let mut dist_sq = 0.0;
        for (&x, &e) in point.iter().zip(edges) {
            let excess = if x < 0.0 {
                -x
            } else if x > e {
                x - e
            } else {
                0.0
            };
            dist_sq += excess * excess;
        }
        if dist_sq <= rho * rho {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let estimate = box_volume * p;
    let stderr = box_volume * libm::sqrt(p * (1.0 - p) / samples as f64);
    Ok((estimate, stderr))
}
