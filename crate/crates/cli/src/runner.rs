//! Ensemble execution and theory-table emission.
//!
//! `theory_tables` evaluates the expected curves at all three correction
//! levels on the configured threshold grid.  `simulate` runs the ensemble
//! (each worker owns whole realizations; stream `i` of the base seed
//! drives realization `i`), then aggregates mean ± standard-error columns
//! in realization order — the output is identical for any worker count.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use minkowski_lab::excursion::{column_stats, ec_curve_sweep, mf2d_curve};
use minkowski_lab::field::synthesize_field;
use minkowski_lab::theory::{ec_density_at, expected_ec_at, expected_lk_excursion_at};

use crate::config::{CorrectionLevel, Resolved};
use crate::csvio::write_csv;
use crate::dump::write_field;

/// Canonical path of the theory table for one correction level.
pub fn theory_path(out_dir: &Path, level: CorrectionLevel) -> PathBuf {
    out_dir.join(format!("theory_{}.csv", level.file_label()))
}

/// Canonical path of the simulation table.
pub fn sim_path(out_dir: &Path) -> PathBuf {
    out_dir.join("sim.csv")
}

fn join_f64(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(sep)
}

fn join_usize(values: &[usize], sep: &str) -> String {
    values
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(sep)
}

fn provenance_comments(res: &Resolved) -> Vec<String> {
    let c = &res.cumulants;
    let mut out = vec![
        format!(
            "grid shape={} extents={}",
            join_usize(&res.shape, "x"),
            join_f64(&res.extents, "x")
        ),
        format!(
            "lk={}",
            join_f64(&(0..=res.n).map(|k| res.lk.get(k)).collect::<Vec<_>>(), ",")
        ),
    ];
    if let Some(p) = &res.model {
        out.push(format!("model g={} tau={} delta={}", p.g, p.tau, p.delta));
    }
    out.push(format!(
        "cumulants gamma={} k0={} k1={} k11={} q0={} q1={} q11a={} q11aa={} q111a={} q111d={}",
        c.gamma, c.k0, c.k1, c.k11, c.q0, c.q1, c.q11a, c.q11aa, c.q111a, c.q111d
    ));
    out
}

/// Writes `theory_<level>.csv` for every correction level.
///
/// Columns: the threshold `v`, the densities `xi_0..xi_n`, the expected
/// Euler characteristic `e_chi`, and the expected intrinsic volumes
/// `e_lk_0..e_lk_n` of the excursion set.
///
/// # Errors
///
/// I/O failures, annotated with the path.
pub fn theory_tables(res: &Resolved) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&res.out_dir)
        .with_context(|| format!("creating {}", res.out_dir.display()))?;
    let n = res.n;
    let mut columns: Vec<String> = vec!["v".into()];
    for d in 0..=n {
        columns.push(format!("xi_{d}"));
    }
    columns.push("e_chi".into());
    for k in 0..=n {
        columns.push(format!("e_lk_{k}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();

    let mut written = Vec::new();
    for level in CorrectionLevel::ALL {
        let core_level = level.to_core();
        let rows: Vec<Vec<f64>> = res
            .thresholds
            .iter()
            .map(|&v| {
                let mut row = Vec::with_capacity(2 * n + 3);
                row.push(v);
                for d in 0..=n {
                    row.push(ec_density_at(core_level, d, v, &res.cumulants));
                }
                row.push(expected_ec_at(core_level, &res.lk, v, &res.cumulants));
                for k in 0..=n {
                    row.push(expected_lk_excursion_at(
                        core_level,
                        k,
                        &res.lk,
                        v,
                        &res.cumulants,
                    ));
                }
                row
            })
            .collect();
        let mut comments = vec![format!("level={}", level.label())];
        comments.extend(provenance_comments(res));
        let path = theory_path(&res.out_dir, level);
        write_csv(&path, &comments, &column_refs, &rows)?;
        written.push(path);
    }
    Ok(written)
}

/// Per-realization observables on the threshold grid.
struct Realization {
    chi: Vec<f64>,
    /// `(area, half_boundary)` per threshold; 2-D grids only.
    mf: Option<Vec<(f64, f64)>>,
}

fn one_realization(res: &Resolved, index: usize, fields_dir: Option<&Path>) -> Result<Realization> {
    let p = res
        .model
        .as_ref()
        .expect("simulate checks for [model] before spawning workers");
    let field = synthesize_field(&res.shape, &res.spacing, p, res.base_seed, index as u64)
        .with_context(|| format!("realization {index}"))?;
    if let Some(dir) = fields_dir {
        write_field(&dir.join(format!("real_{index:05}.mlf")), &field)?;
    }
    if res.n == 2 {
        let rows =
            mf2d_curve(&field, &res.thresholds).with_context(|| format!("realization {index}"))?;
        Ok(Realization {
            chi: rows.iter().map(|&(_, _, _, chi)| chi as f64).collect(),
            mf: Some(
                rows.iter()
                    .map(|&(_, area, halfb, _)| (area, halfb))
                    .collect(),
            ),
        })
    } else {
        let curve = ec_curve_sweep(&field).with_context(|| format!("realization {index}"))?;
        Ok(Realization {
            chi: res
                .thresholds
                .iter()
                .map(|&v| curve.chi_at(v) as f64)
                .collect(),
            mf: None,
        })
    }
}

/// Runs the configured ensemble and writes `sim.csv`.
///
/// Columns: `v, chi_mean, chi_se` and, on 2-D grids, the Minkowski
/// columns `area_mean, area_se, half_boundary_mean, half_boundary_se`.
/// `jobs` sizes the worker pool (`None`: one worker per logical core).
///
/// # Errors
///
/// A config without `[model]` (there is nothing to sample), synthesis
/// errors, or I/O failures.
pub fn simulate(res: &Resolved, jobs: Option<usize>) -> Result<PathBuf> {
    if res.model.is_none() {
        bail!("simulate needs a [model] section; [cumulants] only drives theory curves");
    }
    std::fs::create_dir_all(&res.out_dir)
        .with_context(|| format!("creating {}", res.out_dir.display()))?;
    let fields_dir = if res.dump_fields {
        let dir = res.out_dir.join("fields");
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Some(dir)
    } else {
        None
    };

    let run = || -> Result<Vec<Realization>> {
        (0..res.count)
            .into_par_iter()
            .map(|i| one_realization(res, i, fields_dir.as_deref()))
            .collect()
    };
    let reals: Vec<Realization> = match jobs {
        Some(j) if j > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .context("building worker pool")?
            .install(run),
        _ => run(),
    }?;

    let chi_rows: Vec<Vec<f64>> = reals.iter().map(|r| r.chi.clone()).collect();
    let (rows, columns): (Vec<Vec<f64>>, Vec<&str>) = if res.count >= 2 {
        let chi_stats = column_stats(&chi_rows)?;
        if res.n == 2 {
            let area_rows: Vec<Vec<f64>> = reals
                .iter()
                .map(|r| r.mf.as_ref().unwrap().iter().map(|m| m.0).collect())
                .collect();
            let halfb_rows: Vec<Vec<f64>> = reals
                .iter()
                .map(|r| r.mf.as_ref().unwrap().iter().map(|m| m.1).collect())
                .collect();
            let area_stats = column_stats(&area_rows)?;
            let halfb_stats = column_stats(&halfb_rows)?;
            let rows = res
                .thresholds
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    vec![
                        v,
                        chi_stats[i].0,
                        chi_stats[i].1,
                        area_stats[i].0,
                        area_stats[i].1,
                        halfb_stats[i].0,
                        halfb_stats[i].1,
                    ]
                })
                .collect();
            (
                rows,
                vec![
                    "v",
                    "chi_mean",
                    "chi_se",
                    "area_mean",
                    "area_se",
                    "half_boundary_mean",
                    "half_boundary_se",
                ],
            )
        } else {
            let rows = res
                .thresholds
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![v, chi_stats[i].0, chi_stats[i].1])
                .collect();
            (rows, vec!["v", "chi_mean", "chi_se"])
        }
    } else {
        // A single realization has no ensemble error; report the curve with
        // zero SE rather than refusing (useful for smoke runs).
        let r = &reals[0];
        if res.n == 2 {
            let mf = r.mf.as_ref().unwrap();
            let rows = res
                .thresholds
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![v, r.chi[i], 0.0, mf[i].0, 0.0, mf[i].1, 0.0])
                .collect();
            (
                rows,
                vec![
                    "v",
                    "chi_mean",
                    "chi_se",
                    "area_mean",
                    "area_se",
                    "half_boundary_mean",
                    "half_boundary_se",
                ],
            )
        } else {
            let rows = res
                .thresholds
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![v, r.chi[i], 0.0])
                .collect();
            (rows, vec!["v", "chi_mean", "chi_se"])
        }
    };

    let mut comments = vec![format!(
        "ensemble count={} base_seed={}",
        res.count, res.base_seed
    )];
    comments.push(format!("spacing={}", join_f64(&res.spacing, ",")));
    comments.extend(provenance_comments(res));
    let path = sim_path(&res.out_dir);
    write_csv(&path, &comments, &columns, &rows)?;
    Ok(path)
}
