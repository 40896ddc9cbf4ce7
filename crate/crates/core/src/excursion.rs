//! Euler characteristics of lattice excursion sets.
//!
//! The lattice is triangulated by the Freudenthal (Kuhn) decomposition:
//! each unit cell splits into `n!` simplices along coordinate-sorted paths,
//! so in 2-D every cell carries the diagonal from the cell origin to the
//! opposite corner.  The excursion set at level `v` is approximated by the
//! full subcomplex on the active vertices `{t : X(t) ≥ v}`, and
//! `χ = Σ_σ (−1)^{dim σ}` over its simplices.
//!
//! [`ec_curve_sweep`] lowers `v` through the sorted vertex values and
//! maintains `χ` incrementally: when a vertex activates, the change is the
//! alternating sum over all simplices containing it whose other vertices
//! are already active.  Those simplices are exactly the monotone chains
//! through the vertex — step sequences with pairwise disjoint coordinate
//! supports — which the implementation enumerates recursively (each
//! downward chain multiplied by an alternating sum over upward
//! extensions).  Equal values activate as one batch and `χ` is recorded
//! once per distinct value, so the curve never exposes a state from inside
//! a tie.
//!
//! [`ec_bruteforce`] recounts from scratch by collecting the active faces
//! of every maximal cell simplex into a set — an independent, slower path
//! used to cross-check the sweep.
//!
//! Everything exists in bounded form (the grid is a box; χ below the
//! minimum is 1) and periodic form (`*_torus`; χ below the minimum is 0,
//! and every axis needs extent ≥ 3 so that distinct chains name distinct
//! simplices and the triangulation stays simplicial).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldGrid;

/// Largest supported lattice dimension (the local template has `n!`
/// simplices per cell, so higher dimensions are better served elsewhere).
pub const MAX_LATTICE_DIM: usize = 6;

/// Euler characteristic of the excursion set as a right-continuous step
/// function of the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ECCurve {
    /// Distinct vertex values in strictly decreasing order.
    pub thresholds: Vec<f64>,
    /// `chi[i]` is χ for thresholds in `(thresholds[i+1], thresholds[i]]`
    /// (the state right after the `i`-th value activates).
    pub chi: Vec<i64>,
}

impl ECCurve {
    /// χ of the excursion set `{X ≥ v}`; zero above the field maximum.
    pub fn chi_at(&self, v: f64) -> i64 {
        if self.thresholds.is_empty() || v > self.thresholds[0] {
            return 0;
        }
        // Thresholds are descending, so `t ≥ v` holds on a prefix.
        let k = self.thresholds.partition_point(|&t| t >= v);
        self.chi[k - 1]
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Bounded,
    Torus,
}

fn validate_lattice(field: &FieldGrid, mode: Mode) -> Result<()> {
    if field.shape.is_empty() || field.values.is_empty() {
        return Err(Error::InvalidParameter("field must not be empty"));
    }
    if field.shape.len() > MAX_LATTICE_DIM {
        return Err(Error::InvalidParameter("lattice dimension too large"));
    }
    let total: usize = field.shape.iter().product();
    if total != field.values.len() {
        return Err(Error::ShapeMismatch);
    }
    if field.values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("field values must not be NaN"));
    }
    let min_extent = match mode {
        Mode::Bounded => 2,
        Mode::Torus => 3,
    };
    if field.shape.iter().any(|&s| s < min_extent) {
        return Err(match mode {
            Mode::Bounded => Error::InvalidParameter("each axis needs at least 2 points"),
            Mode::Torus => Error::GridTooSmall,
        });
    }
    Ok(())
}

/// Shared state of one sweep: which vertices are already active, plus the
/// step alphabet (nonempty axis subsets as bitmasks).
struct Sweeper<'a> {
    shape: &'a [usize],
    active: Vec<bool>,
    torus: bool,
    steps: Vec<u32>,
}

impl<'a> Sweeper<'a> {
    fn new(shape: &'a [usize], torus: bool) -> Self {
        let n = shape.len();
        Sweeper {
            shape,
            active: vec![false; shape.iter().product()],
            torus,
            steps: (1..(1u32 << n)).collect(),
        }
    }

    /// Flat index of possibly out-of-range coordinates; `None` when a
    /// bounded grid is exceeded, wrapped on the torus.
    fn locate(&self, coords: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (&c, &s) in coords.iter().zip(self.shape) {
            let s_i = s as i64;
            let c = if self.torus {
                c.rem_euclid(s_i)
            } else if (0..s_i).contains(&c) {
                c
            } else {
                return None;
            };
            idx = idx * s + c as usize;
        }
        Some(idx)
    }

    fn is_active(&self, coords: &[i64]) -> bool {
        self.locate(coords).is_some_and(|i| self.active[i])
    }

    fn shift(coords: &mut [i64], mask: u32, dir: i64) {
        for (a, c) in coords.iter_mut().enumerate() {
            if mask & (1 << a) != 0 {
                *c += dir;
            }
        }
    }

    /// Alternating sum over upward chains from `pos` on axes outside
    /// `used`, all of whose vertices are active; includes the empty chain
    /// as `+1`.
    fn up_sum(&self, pos: &mut Vec<i64>, used: u32) -> i64 {
        let mut total = 1;
        for k in 0..self.steps.len() {
            let s = self.steps[k];
            if s & used != 0 {
                continue;
            }
            Self::shift(pos, s, 1);
            if self.is_active(pos) {
                total -= self.up_sum(pos, used | s);
            }
            Self::shift(pos, s, -1);
        }
        total
    }

    /// Sum over downward chains from the new vertex (tracked in `pos`,
    /// signed by chain length) of the upward alternating sum attached at
    /// the vertex itself (`t`).
    fn down_up(&self, pos: &mut Vec<i64>, t: &mut Vec<i64>, used: u32, sign: i64) -> i64 {
        let mut total = sign * self.up_sum(t, used);
        for k in 0..self.steps.len() {
            let s = self.steps[k];
            if s & used != 0 {
                continue;
            }
            Self::shift(pos, s, -1);
            if self.is_active(pos) {
                total += self.down_up(pos, t, used | s, -sign);
            }
            Self::shift(pos, s, 1);
        }
        total
    }

    /// Change of χ when the vertex with this flat index activates.
    fn delta_chi(&self, flat: usize) -> i64 {
        let mut coords = vec![0i64; self.shape.len()];
        let mut rem = flat;
        for a in (0..self.shape.len()).rev() {
            coords[a] = (rem % self.shape[a]) as i64;
            rem /= self.shape[a];
        }
        let mut pos = coords.clone();
        self.down_up(&mut pos, &mut coords, 0, 1)
    }
}

fn sweep(field: &FieldGrid, mode: Mode) -> Result<ECCurve> {
    validate_lattice(field, mode)?;
    let total = field.values.len();
    let mut order: Vec<usize> = (0..total).collect();
    // Descending value, ascending index — ties form contiguous batches.
    order.sort_by(|&a, &b| {
        field.values[b]
            .partial_cmp(&field.values[a])
            .expect("NaN was rejected above")
            .then(a.cmp(&b))
    });
    let mut sw = Sweeper::new(&field.shape, mode == Mode::Torus);
    let mut chi = 0i64;
    let mut thresholds = Vec::new();
    let mut chis = Vec::new();
    let mut i = 0;
    while i < total {
        let v = field.values[order[i]];
        let mut j = i;
        while j < total && field.values[order[j]] == v {
            chi += sw.delta_chi(order[j]);
            sw.active[order[j]] = true;
            j += 1;
        }
        thresholds.push(v);
        chis.push(chi);
        i = j;
    }
    Ok(ECCurve {
        thresholds,
        chi: chis,
    })
}

/// χ of `{X ≥ v}` as a step function of `v`, by one descending sweep over
/// the vertex values of a bounded grid.
///
/// # Errors
///
/// Rejects empty or malformed grids, NaN values and more than
/// [`MAX_LATTICE_DIM`] axes.
pub fn ec_curve_sweep(field: &FieldGrid) -> Result<ECCurve> {
    sweep(field, Mode::Bounded)
}

/// Periodic variant of [`ec_curve_sweep`]: all axes wrap.
///
/// # Errors
///
/// As for the bounded sweep, plus [`Error::GridTooSmall`] when an axis has
/// extent < 3.
pub fn ec_curve_sweep_torus(field: &FieldGrid) -> Result<ECCurve> {
    sweep(field, Mode::Torus)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute(field: &FieldGrid, v: f64, mode: Mode) -> Result<i64> {
    validate_lattice(field, mode)?;
    let n = field.shape.len();
    let torus = mode == Mode::Torus;
    let active: Vec<bool> = field.values.iter().map(|&x| x >= v).collect();
    let perms = permutations(n);
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    // Cell base points: one short of the extent on a box, the full extent
    // on the torus.
    let cell_limit: Vec<usize> = field
        .shape
        .iter()
        .map(|&s| if torus { s } else { s - 1 })
        .collect();
    let mut base = vec![0usize; n];
    'cells: loop {
        for perm in &perms {
            // Vertex chain of this maximal simplex, as flat indices.
            let mut coords: Vec<usize> = base.clone();
            let mut verts = Vec::with_capacity(n + 1);
            let flat = |c: &[usize]| -> usize {
                let mut idx = 0;
                for (&ci, &s) in c.iter().zip(&field.shape) {
                    idx = idx * s + ci % s;
                }
                idx
            };
            verts.push(flat(&coords));
            for &axis in perm {
                coords[axis] += 1;
                verts.push(flat(&coords));
            }
            for subset in 1u32..(1 << (n + 1)) {
                let mut members: Vec<usize> = Vec::with_capacity(n + 1);
                let mut all_active = true;
                for (k, &vert) in verts.iter().enumerate() {
                    if subset & (1 << k) != 0 {
                        if !active[vert] {
                            all_active = false;
                            break;
                        }
                        members.push(vert);
                    }
                }
                if all_active {
                    members.sort_unstable();
                    faces.insert(members);
                }
            }
        }
        for a in (0..n).rev() {
            base[a] += 1;
            if base[a] < cell_limit[a] {
                continue 'cells;
            }
            base[a] = 0;
        }
        break;
    }
    Ok(faces
        .iter()
        .map(|f| if f.len() % 2 == 1 { 1 } else { -1 })
        .sum())
}

/// χ of `{X ≥ v}` by explicit enumeration of all active simplices of the
/// bounded grid — the slow cross-check for the sweep.
///
/// # Errors
///
/// As for [`ec_curve_sweep`].
pub fn ec_bruteforce(field: &FieldGrid, v: f64) -> Result<i64> {
    brute(field, v, Mode::Bounded)
}

/// Periodic variant of [`ec_bruteforce`].
///
/// # Errors
///
/// As for [`ec_curve_sweep_torus`].
pub fn ec_bruteforce_torus(field: &FieldGrid, v: f64) -> Result<i64> {
    brute(field, v, Mode::Torus)
}

/// Linear crossing of the level `v` on the segment `pa`–`pb`
/// (`fa ≥ v > fb`, so the denominator cannot vanish).
fn crossing(pa: [f64; 2], fa: f64, pb: [f64; 2], fb: f64, v: f64) -> [f64; 2] {
    let t = (v - fa) / (fb - fa);
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}

fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let mut twice = 0.0;
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        twice += pts[i][0] * pts[j][1] - pts[j][0] * pts[i][1];
    }
    0.5 * libm::fabs(twice)
}

fn segment_length(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(b[0] - a[0], b[1] - a[1])
}

/// Area of `{f ≥ v}` and iso-contour length inside one triangle with
/// linearly interpolated values.
fn triangle_clip(p: [[f64; 2]; 3], f: [f64; 3], v: f64) -> (f64, f64) {
    let above: Vec<usize> = (0..3).filter(|&i| f[i] >= v).collect();
    match above.len() {
        0 => (0.0, 0.0),
        3 => (polygon_area(&p), 0.0),
        1 => {
            let i = above[0];
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let qj = crossing(p[i], f[i], p[j], f[j], v);
            let qk = crossing(p[i], f[i], p[k], f[k], v);
            (polygon_area(&[p[i], qj, qk]), segment_length(qj, qk))
        }
        _ => {
            let (i, j) = (above[0], above[1]);
            let k = 3 - i - j;
            let qj = crossing(p[j], f[j], p[k], f[k], v);
            let qi = crossing(p[i], f[i], p[k], f[k], v);
            (polygon_area(&[p[i], p[j], qj, qi]), segment_length(qi, qj))
        }
    }
}

/// Area and iso-contour length (not yet halved) over the whole 2-D grid.
fn mf2d_geometry(field: &FieldGrid, v: f64) -> (f64, f64) {
    let (s0, s1) = (field.shape[0], field.shape[1]);
    let (d0, d1) = (field.spacing[0], field.spacing[1]);
    let val = |r: usize, c: usize| field.values[r * s1 + c];
    let pt = |r: usize, c: usize| [r as f64 * d0, c as f64 * d1];
    let mut area = 0.0;
    let mut iso = 0.0;
    for r in 0..s0 - 1 {
        for c in 0..s1 - 1 {
            // Freudenthal diagonal (r, c) – (r+1, c+1) in every cell.
            let tris = [
                [(r, c), (r + 1, c), (r + 1, c + 1)],
                [(r, c), (r, c + 1), (r + 1, c + 1)],
            ];
            for t in tris {
                let p = [pt(t[0].0, t[0].1), pt(t[1].0, t[1].1), pt(t[2].0, t[2].1)];
                let f = [
                    val(t[0].0, t[0].1),
                    val(t[1].0, t[1].1),
                    val(t[2].0, t[2].1),
                ];
                let (a, l) = triangle_clip(p, f, v);
                area += a;
                iso += l;
            }
        }
    }
    (area, iso)
}

/// 2-D Minkowski triplet of the excursion set at one level: area of the
/// interpolated set `{X ≥ v}`, half its interior iso-contour length (the
/// 2-D intrinsic-volume convention; the domain boundary is not counted),
/// and χ from the vertex sweep.
///
/// The area/length pair comes from linear interpolation on each triangle
/// while χ uses the vertex-inclusion rule; the two pictures agree except
/// on the measure-zero set of thresholds equal to a vertex value.
///
/// # Errors
///
/// Rejects non-2-D input and anything [`ec_curve_sweep`] rejects.
pub fn mf2d_estimate(field: &FieldGrid, v: f64) -> Result<(f64, f64, i64)> {
    let curve = mf2d_check(field)?;
    let (area, iso) = mf2d_geometry(field, v);
    Ok((area, 0.5 * iso, curve.chi_at(v)))
}

/// [`mf2d_estimate`] over a whole grid of thresholds, sweeping only once.
///
/// # Errors
///
/// As for [`mf2d_estimate`].
pub fn mf2d_curve(field: &FieldGrid, v_grid: &[f64]) -> Result<Vec<(f64, f64, f64, i64)>> {
    let curve = mf2d_check(field)?;
    let mut out = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let (area, iso) = mf2d_geometry(field, v);
        out.push((v, area, 0.5 * iso, curve.chi_at(v)));
    }
    Ok(out)
}

fn mf2d_check(field: &FieldGrid) -> Result<ECCurve> {
    if field.shape.len() != 2 {
        return Err(Error::InvalidParameter(
            "Minkowski estimates need a 2-D grid",
        ));
    }
    ec_curve_sweep(field)
}

/// Ensemble mean and standard error of χ at each requested threshold, with
/// every curve resampled as a step function.
///
/// # Errors
///
/// Needs at least two curves.
pub fn mean_ec_curves(curves: &[ECCurve], v_grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    if curves.len() < 2 {
        return Err(Error::EnsembleTooSmall);
    }
    let rows: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| v_grid.iter().map(|&v| c.chi_at(v) as f64).collect())
        .collect();
    let stats = column_stats(&rows)?;
    Ok(v_grid
        .iter()
        .zip(stats)
        .map(|(&v, (m, se))| (v, m, se))
        .collect())
}

/// Column-wise sample mean and standard error of equally long rows
/// (one row per realization).
///
/// # Errors
///
/// Needs at least two rows of equal length.
pub fn column_stats(rows: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    if rows.len() < 2 {
        return Err(Error::EnsembleTooSmall);
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::ShapeMismatch);
    }
    let n = rows.len() as f64;
    let mut out = Vec::with_capacity(width);
    for col in 0..width {
        let mean = rows.iter().map(|r| r[col]).sum::<f64>() / n;
        let var = rows
            .iter()
            .map(|r| (r[col] - mean) * (r[col] - mean))
            .sum::<f64>()
            / (n - 1.0);
        out.push((mean, libm::sqrt(var / n)));
    }
    Ok(out)
}
