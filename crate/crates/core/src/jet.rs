//! Exact polynomial jets in the entries of a symmetric matrix and the
//! determinantal derivative operator behind the closed-form evaluation
//! identities.
//!
//! A [`Jet`] is a truncated multivariate polynomial over `Q` in the upper
//! triangle entries `θ_{ab}` (`a ≤ b`) of a symmetric `n×n` matrix `Θ`,
//! `n ≤ 4`.  The matrix derivative acts entrywise as
//! `(D_Θ)_{ab} = ((1+δ_{ab})/2) ∂/∂Θ_{ab}`, and the workhorse operation is
//! expanding `det(-D_Θ + γx I_n)` by the Leibniz formula, applying the
//! resulting derivative monomials to a jet, and reading off the constant
//! term at `Θ = 0`.
//!
//! The `verify_*` functions check the evaluation identities this machinery
//! exists for.  Both sides of each identity are polynomials in `x` of degree
//! at most `n`, so exact agreement at `n + 2` distinct rational points proves
//! the identity as polynomials — there is no floating point anywhere in the
//! verifiers.
//!
//! * `verify_lemma_a1`: with kernel `e^{tr(Θ²)}`,
//!   `det(xI + D_Θ)(e^{tr(Θ²)} Π_i tr(Θ^{c_i}))|_0
//!    = (-1/2)^{m-ℓ} (n)_m H_{n-m}(x)`,
//!   where `m = Σ c_i` and `ℓ` counts the trace factors.
//! * `verify_lemma_a2`: the same right-hand side for the deformed kernel
//!   `e^{(1+β)tr(Θ²) + (β/2)tr(Θ)²}` — the `tr(Θ)²` deformation drops out.
//! * `verify_prop31`: for `ψ(Θ) = e^{(α/2)tr(Θ²) + (β/2)tr(Θ)²}` with
//!   `α = 2(γ² + β)`,
//!   `det(-D_Θ + γx I_n)(ψ Π_i tr(Θ^{c_i}))|_0
//!    = (-1)^m γ^{n-m} (-1/2)^{m-ℓ} (n)_m H_{n-m}(x)`.
//! * `verify_loop_annihilation`: multiplying by
//!   `Π_K(Θ) = tr(Θ)^K - (-2)^{K-1} tr(Θ^K)` (`K ≥ 2`) annihilates the
//!   evaluation identically in `x`.
//!
//! [`goe_hermite_mc`] is the probabilistic shadow of the same algebra:
//! `H_n(x) = E[det(xI + A)]` for `A` with independent `N(0,2)` diagonal and
//! `N(0,1)` off-diagonal entries.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hermite::hermite_rational;

/// Largest supported matrix dimension (the expansion needs `n ≤ 4`).
pub const MAX_DIM: usize = 4;
const MAX_VARS: usize = MAX_DIM * (MAX_DIM + 1) / 2;

/// Exponent vector of one monomial; entries beyond the active variable count
/// stay zero.
type Exps = [u8; MAX_VARS];

fn rat(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// The exact rational `num/den`, a convenience for callers driving the
/// verifiers with literal parameter grids.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_pow(base: &BigRational, exp: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

fn factorial(k: u8) -> BigRational {
    let mut acc = BigInt::one();
    for j in 2..=k as u64 {
        acc *= BigInt::from(j);
    }
    BigRational::from_integer(acc)
}

/// Falling factorial `(n)_m = n (n-1) ⋯ (n-m+1)`; zero once `m > n`.
fn falling_factorial(n: usize, m: u32) -> BigRational {
    let mut acc = BigInt::one();
    for j in 0..m as i64 {
        acc *= BigInt::from(n as i64 - j);
    }
    BigRational::from_integer(acc)
}

/// Truncated polynomial over `Q` in the upper-triangle entries of a
/// symmetric `n×n` matrix, with all terms of total degree above `cap`
/// discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    n: usize,
    cap: u32,
    terms: BTreeMap<Exps, BigRational>,
}

/// Index of `θ_{ab}` in the fixed lexicographic variable order
/// `(0,0), (0,1), …, (0,n-1), (1,1), …` of the upper triangle.
fn var_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // Row `a` is preceded by n + (n-1) + … + (n-a+1) = a(2n-a+1)/2 slots.
    a * (2 * n - a + 1) / 2 + (b - a)
}

impl Jet {
    fn check_dim(n: usize) {
        assert!(
            (1..=MAX_DIM).contains(&n),
            "jet: matrix dimension {n} outside 1..={MAX_DIM}"
        );
    }

    /// The zero jet.
    pub fn zero(n: usize, cap: u32) -> Self {
        Self::check_dim(n);
        Jet {
            n,
            cap,
            terms: BTreeMap::new(),
        }
    }

    /// A constant jet.
    pub fn constant(n: usize, cap: u32, value: BigRational) -> Self {
        let mut jet = Jet::zero(n, cap);
        if !value.is_zero() {
            jet.terms.insert([0; MAX_VARS], value);
        }
        jet
    }

    /// The single variable `θ_{ab}` (order of the indices is irrelevant).
    pub fn variable(n: usize, cap: u32, a: usize, b: usize) -> Self {
        Self::check_dim(n);
        assert!(a < n && b < n, "jet: variable index out of range");
        assert!(cap >= 1, "jet: degree cap too small for a variable");
        let mut exps = [0u8; MAX_VARS];
        exps[var_index(n, a, b)] = 1;
        let mut jet = Jet::zero(n, cap);
        jet.terms.insert(exps, BigRational::one());
        jet
    }

    /// Matrix dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Total-degree cap.
    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// True if no term survives.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with the given upper-triangle exponents
    /// (listed in the fixed variable order, zero-padded).
    pub fn coefficient(&self, exps: &[u8]) -> BigRational {
        let mut key = [0u8; MAX_VARS];
        key[..exps.len()].copy_from_slice(exps);
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn assert_compatible(&self, other: &Jet) {
        assert!(
            self.n == other.n && self.cap == other.cap,
            "jet: mismatched dimensions or caps ({}≤{} vs {}≤{})",
            self.n,
            self.cap,
            other.n,
            other.cap
        );
    }

    /// Sum of two jets over the same matrix and cap.
    pub fn add(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(*e).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Jet {
            n: self.n,
            cap: self.cap,
            terms,
        }
    }

    /// Product, truncated at the cap.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let nvars = self.n * (self.n + 1) / 2;
        let mut terms: BTreeMap<Exps, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().map(|&e| u32::from(e)).sum();
            for (eb, cb) in &other.terms {
                let db: u32 = eb.iter().map(|&e| u32::from(e)).sum();
                if da + db > self.cap {
                    continue;
                }
                let mut e = *ea;
                for v in 0..nvars {
                    e[v] += eb[v];
                }
                let c = ca * cb;
                let entry = terms.entry(e).or_insert_with(BigRational::zero);
                *entry += c;
                if entry.is_zero() {
                    terms.remove(&e);
                }
            }
        }
        Jet {
            n: self.n,
            cap: self.cap,
            terms,
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: &BigRational) -> Jet {
        if factor.is_zero() {
            return Jet::zero(self.n, self.cap);
        }
        Jet {
            n: self.n,
            cap: self.cap,
            terms: self.terms.iter().map(|(e, c)| (*e, c * factor)).collect(),
        }
    }

    /// Truncated exponential `Σ_m a^m / m!`.
    ///
    /// # Panics
    ///
    /// Panics if the argument has a nonzero constant term (the series would
    /// not truncate).
    pub fn exp(&self) -> Jet {
        assert!(
            self.coefficient(&[]).is_zero(),
            "jet: exp needs a vanishing constant term"
        );
        let mut acc = Jet::constant(self.n, self.cap, BigRational::one());
        let mut power = acc.clone();
        for m in 1..=self.cap as i64 {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale(&ratio(1, m)));
        }
        acc
    }

    /// `tr(Θ^k)` as a jet, `k ≥ 1`; degree-`k` terms vanish if `k > cap`.
    pub fn trace_power(n: usize, k: u32, cap: u32) -> Jet {
        Self::check_dim(n);
        assert!(k >= 1, "jet: trace power needs k >= 1");
        // Θ as a matrix of degree-1 jets, then k-1 symbolic products.
        let theta: Vec<Vec<Jet>> = (0..n)
            .map(|a| (0..n).map(|b| Jet::variable(n, cap, a, b)).collect())
            .collect();
        let mut power = theta.clone();
        for _ in 1..k {
            let mut next = vec![vec![Jet::zero(n, cap); n]; n];
            for (a, row) in next.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    for c in 0..n {
                        *cell = cell.add(&power[a][c].mul(&theta[c][b]));
                    }
                }
            }
            power = next;
        }
        let mut trace = Jet::zero(n, cap);
        for (a, row) in power.iter().enumerate() {
            trace = trace.add(&row[a]);
        }
        trace
    }
}

/// All permutations of `0..n` with their signs.
fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn recurse(items: &mut Vec<usize>, k: usize, out: &mut Vec<(Vec<usize>, i32)>) {
        if k == items.len() {
            let perm = items.clone();
            let mut inversions = 0;
            for i in 0..perm.len() {
                for j in i + 1..perm.len() {
                    if perm[i] > perm[j] {
                        inversions += 1;
                    }
                }
            }
            out.push((perm, if inversions % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            recurse(items, k + 1, out);
            items.swap(k, i);
        }
    }
    recurse(&mut items, 0, &mut out);
    out
}

/// Applies `det(s·D_Θ + scalar·I_n)` to a jet and evaluates at `Θ = 0`.
///
/// Leibniz expansion: each permutation term is a product of entries
/// `scalar·δ + s·(D_Θ)`; fixed points expand binomially into "keep the
/// scalar" or "differentiate", off-diagonal entries always differentiate
/// with weight `s/2`.  A derivative monomial `Π ∂_v^{k_v}` reads the
/// coefficient of `Π θ_v^{k_v}` times `Π k_v!`.
fn det_apply(jet: &Jet, scalar: &BigRational, deriv_sign: i64) -> BigRational {
    let n = jet.n;
    let nvars = n * (n + 1) / 2;
    let sign = rat(deriv_sign);
    let mut acc = BigRational::zero();
    for (perm, perm_sign) in permutations_with_sign(n) {
        let fixed: Vec<usize> = (0..n).filter(|&i| perm[i] == i).collect();
        let moved: Vec<usize> = (0..n).filter(|&i| perm[i] != i).collect();
        let mut base_orders = [0u8; MAX_VARS];
        let mut base_weight = rat(perm_sign as i64);
        for &i in &moved {
            base_orders[var_index(n, i, perm[i])] += 1;
            base_weight *= &sign * ratio(1, 2);
        }
        for mask in 0u32..(1 << fixed.len()) {
            let mut orders = base_orders;
            let mut weight = base_weight.clone();
            for (bit, &i) in fixed.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    orders[var_index(n, i, i)] += 1;
                    weight *= &sign;
                } else {
                    weight *= scalar;
                }
            }
            let coeff = jet.coefficient(&orders);
            if coeff.is_zero() {
                continue;
            }
            let mut fact = BigRational::one();
            for &k in orders.iter().take(nvars) {
                if k > 1 {
                    fact *= factorial(k);
                }
            }
            acc += weight * coeff * fact;
        }
    }
    acc
}

/// Applies `det(-D_Θ + γx·I_n)` to a jet and evaluates at `Θ = 0`.
pub fn det_diffop_apply(x: &BigRational, gamma: &BigRational, jet: &Jet) -> BigRational {
    det_apply(jet, &(gamma * x), -1)
}

/// Rational sample points `-n/2, (2-n)/2, …` — `n + 2` of them, enough to
/// pin down any polynomial of degree `≤ n` (and one to spare).
fn sample_points(n: usize) -> Vec<BigRational> {
    (0..=n as i64 + 1)
        .map(|j| ratio(2 * j - n as i64, 2))
        .collect()
}

/// `Π tr(Θ^{c_i})` over a cycle multiset, at the given cap.
fn trace_product(n: usize, cycles: &[u32], cap: u32) -> Jet {
    let mut jet = Jet::constant(n, cap, BigRational::one());
    for &c in cycles {
        jet = jet.mul(&Jet::trace_power(n, c, cap));
    }
    jet
}

/// Right-hand side `(-1/2)^{m-ℓ} (n)_m H_{n-m}(x)` shared by the two lemmas.
fn lemma_rhs(n: usize, cycles: &[u32], x: &BigRational) -> BigRational {
    let m: u32 = cycles.iter().sum();
    let ell = cycles.len() as u32;
    if m as usize > n {
        return BigRational::zero();
    }
    rat_pow(&ratio(-1, 2), m - ell) * falling_factorial(n, m) * hermite_rational(n as u32 - m, x)
}

/// Checks `det(xI + D_Θ)(e^{tr(Θ²)} Π tr(Θ^{c_i}))|_0 = (-1/2)^{m-ℓ} (n)_m H_{n-m}(x)`
/// at `n + 2` rational points (a polynomial identity proof for degree `≤ n`).
pub fn verify_lemma_a1(n: usize, cycles: &[u32]) -> bool {
    let m: u32 = cycles.iter().sum();
    let cap = n as u32 + m;
    let kernel = Jet::trace_power(n, 2, cap).exp();
    let jet = kernel.mul(&trace_product(n, cycles, cap));
    sample_points(n)
        .iter()
        .all(|x| det_apply(&jet, x, 1) == lemma_rhs(n, cycles, x))
}

/// Checks the deformed kernel `e^{(1+β)tr(Θ²) + (β/2)tr(Θ)²}` produces the
/// same right-hand side as `verify_lemma_a1` — for every rational `β`.
pub fn verify_lemma_a2(n: usize, beta: &BigRational, cycles: &[u32]) -> bool {
    let m: u32 = cycles.iter().sum();
    let cap = n as u32 + m;
    let tr2 = Jet::trace_power(n, 2, cap);
    let tr1 = Jet::trace_power(n, 1, cap);
    let quad = tr2
        .scale(&(BigRational::one() + beta))
        .add(&tr1.mul(&tr1).scale(&(beta / rat(2))));
    let jet = quad.exp().mul(&trace_product(n, cycles, cap));
    sample_points(n)
        .iter()
        .all(|x| det_apply(&jet, x, 1) == lemma_rhs(n, cycles, x))
}

/// Whether `(γ, β)` lie in the admissible window `α > 0`, `α + nβ > 0`
/// for `α = 2(γ² + β)` — the condition for the reference kernel to come
/// from a genuine (positive-definite) curvature covariance.
pub fn prop31_admissible(n: usize, gamma: &BigRational, beta: &BigRational) -> bool {
    let alpha = rat(2) * (gamma * gamma + beta);
    alpha.is_positive() && (&alpha + rat(n as i64) * beta).is_positive()
}

/// The reference kernel `ψ(Θ) = e^{(α/2)tr(Θ²) + (β/2)tr(Θ)²}` with
/// `α = 2(γ² + β)`, so that `γ = √(α/2 - β)`.
///
/// # Panics
///
/// Panics unless `α > 0` and `α + nβ > 0` (the admissible window for the
/// kernel to integrate).
fn reference_kernel(n: usize, gamma: &BigRational, beta: &BigRational, cap: u32) -> Jet {
    let alpha = rat(2) * (gamma * gamma + beta);
    assert!(
        prop31_admissible(n, gamma, beta),
        "reference kernel needs alpha > 0 and alpha + n*beta > 0"
    );
    let tr2 = Jet::trace_power(n, 2, cap);
    let tr1 = Jet::trace_power(n, 1, cap);
    tr2.scale(&(&alpha / rat(2)))
        .add(&tr1.mul(&tr1).scale(&(beta / rat(2))))
        .exp()
}

/// Checks
/// `det(-D_Θ + γx I_n)(ψ Π tr(Θ^{c_i}))|_0
///  = (-1)^m γ^{n-m} (-1/2)^{m-ℓ} (n)_m H_{n-m}(x)`
/// at `n + 2` rational points.
///
/// # Panics
///
/// Panics if `(γ, β)` leave the admissible window `α > 0`, `α + nβ > 0`
/// for `α = 2(γ² + β)`.
pub fn verify_prop31(n: usize, gamma: &BigRational, beta: &BigRational, cycles: &[u32]) -> bool {
    let m: u32 = cycles.iter().sum();
    let ell = cycles.len() as u32;
    let cap = n as u32 + m;
    let jet = reference_kernel(n, gamma, beta, cap).mul(&trace_product(n, cycles, cap));
    sample_points(n).iter().all(|x| {
        let lhs = det_apply(&jet, &(gamma * x), -1);
        let rhs = if m as usize > n {
            BigRational::zero()
        } else {
            rat_pow(&rat(-1), m)
                * rat_pow(gamma, n as u32 - m)
                * rat_pow(&ratio(-1, 2), m - ell)
                * falling_factorial(n, m)
                * hermite_rational(n as u32 - m, x)
        };
        lhs == rhs
    })
}

/// Checks that the loop-killing combination
/// `Π_K(Θ) = tr(Θ)^K - (-2)^{K-1} tr(Θ^K)` annihilates the evaluation:
/// `det(-D_Θ + γx I_n)(ψ Π tr(Θ^{c_i}) Π_K(Θ))|_0 = 0` identically in `x`.
///
/// # Panics
///
/// Panics for `K < 2` (there is no loop to kill) and outside the admissible
/// `(γ, β)` window.
pub fn verify_loop_annihilation(
    n: usize,
    gamma: &BigRational,
    beta: &BigRational,
    loop_order: u32,
    cycles: &[u32],
) -> bool {
    assert!(loop_order >= 2, "loop annihilation needs K >= 2");
    let m: u32 = cycles.iter().sum();
    let cap = n as u32 + m + loop_order;
    let tr1 = Jet::trace_power(n, 1, cap);
    let mut tr1_pow = Jet::constant(n, cap, BigRational::one());
    for _ in 0..loop_order {
        tr1_pow = tr1_pow.mul(&tr1);
    }
    let pi_k = tr1_pow
        .add(&Jet::trace_power(n, loop_order, cap).scale(&-rat_pow(&rat(-2), loop_order - 1)));
    let jet = reference_kernel(n, gamma, beta, cap)
        .mul(&trace_product(n, cycles, cap))
        .mul(&pi_k);
    sample_points(n)
        .iter()
        .all(|x| det_apply(&jet, &(gamma * x), -1).is_zero())
}

/// Determinant of a small dense matrix (row-major, `n ≤ 4`).
fn det_small(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        4 => {
            let mut acc = 0.0;
            let mut minor = [0.0f64; 9];
            for col in 0..4 {
                let mut w = 0;
                for r in 1..4 {
                    for c in 0..4 {
                        if c != col {
                            minor[w] = m[4 * r + c];
                            w += 1;
                        }
                    }
                }
                let term = m[col] * det_small(&minor, 3);
                acc += if col % 2 == 0 { term } else { -term };
            }
            acc
        }
        _ => unreachable!("det_small only supports n <= 4"),
    }
}

/// Monte Carlo check of `H_n(x) = E[det(xI_n + A)]` for a symmetric random
/// matrix `A` with independent `N(0,2)` diagonal and `N(0,1)` off-diagonal
/// entries.  Returns `(mean, stderr)` over the requested sample count.
///
/// # Panics
///
/// Panics for `n` outside `1..=4` or fewer than two samples.
pub fn goe_hermite_mc(n: usize, x: f64, samples: u64, seed: u64) -> (f64, f64) {
    assert!(
        (1..=MAX_DIM).contains(&n),
        "goe_hermite_mc: n must be 1..=4"
    );
    assert!(samples >= 2, "goe_hermite_mc: need at least two samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt2 = core::f64::consts::SQRT_2;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut mat = [0.0f64; MAX_DIM * MAX_DIM];
    for _ in 0..samples {
        for a in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            mat[n * a + a] = x + sqrt2 * z;
            for b in a + 1..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                mat[n * a + b] = z;
                mat[n * b + a] = z;
            }
        }
        let d = det_small(&mat[..n * n], n);
        sum += d;
        sum_sq += d * d;
    }
    let count = samples as f64;
    let mean = sum / count;
    let variance = (sum_sq - sum * sum / count) / (count - 1.0);
    (mean, libm::sqrt(variance.max(0.0) / count))
}

/// Every multiset of cycle lengths with total `m ≤ 4`, the battery the
/// acceptance identities sweep over.
pub fn cycle_multisets_up_to_four() -> Vec<Vec<u32>> {
    vec![
        vec![],
        vec![1],
        vec![2],
        vec![1, 1],
        vec![3],
        vec![2, 1],
        vec![1, 1, 1],
        vec![4],
        vec![3, 1],
        vec![2, 2],
        vec![2, 1, 1],
        vec![1, 1, 1, 1],
    ]
}
