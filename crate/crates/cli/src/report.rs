//! Theory-vs-simulation comparison: per-threshold z-scores, summed
//! discrepancies per correction level, and a machine-readable verdict.
//!
//! The z-score at threshold `v` is `(simulated mean − theory) / SE`.  A
//! threshold *misses* when `|z|` exceeds the band (default four standard
//! errors); the verdict passes when the selected correction level stays
//! within the allowed miss budget — and, when requested, when the summed
//! squared z-scores order the levels the way the expansion promises:
//! skewness+kurtosis ≤ skewness ≤ gaussian with a strict improvement of
//! skewness over gaussian.

use anyhow::{bail, Context, Result};

use crate::config::CorrectionLevel;
use crate::csvio::CsvTable;

/// Discrepancy summary of one correction level against the simulation.
#[derive(Debug, Clone)]
pub struct LevelStats {
    /// Which theory curve.
    pub level: CorrectionLevel,
    /// Number of thresholds compared.
    pub thresholds: usize,
    /// Σ z² over the threshold grid.
    pub sum_z_sq: f64,
    /// Thresholds with `|z|` beyond the band.
    pub misses: usize,
    /// Largest-magnitude z-score…
    pub worst_z: f64,
    /// …and the threshold where it occurred.
    pub worst_v: f64,
}

/// Ordering of the summed discrepancies across the three levels.
#[derive(Debug, Clone)]
pub struct OrderingVerdict {
    /// Σ z² without corrections.
    pub gaussian: f64,
    /// Σ z² with the skewness correction.
    pub skewness: f64,
    /// Σ z² with skewness and kurtosis.
    pub both: f64,
    /// `both ≤ skewness ≤ gaussian`.
    pub monotone: bool,
    /// Relative improvement of skewness over gaussian, `1 − s/g`.
    pub improvement: f64,
    /// Monotone and improvement ≥ 20 %.
    pub pass: bool,
}

/// Full comparison outcome.
#[derive(Debug, Clone)]
pub struct CompareReport {
    /// Per-level discrepancy summaries, in [`CorrectionLevel::ALL`] order
    /// where present.
    pub levels: Vec<LevelStats>,
    /// The level the verdict is judged on.
    pub selected: CorrectionLevel,
    /// Misses of the selected level within budget?
    pub selected_ok: bool,
    /// Ordering across levels (only when all three are present).
    pub ordering: Option<OrderingVerdict>,
    /// Whether ordering was part of the verdict.
    pub ordering_required: bool,
    /// The overall verdict.
    pub pass: bool,
}

/// Checks two threshold grids for element-wise agreement (1e-9).
///
/// # Errors
///
/// Length or value mismatch, naming the first offending index.
pub fn assert_matching_grids(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        bail!(
            "threshold grids differ in length: {} vs {}",
            a.len(),
            b.len()
        );
    }
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        if !((x - y).abs() <= 1e-9) {
            bail!("threshold grids differ at index {i}: {x} vs {y}");
        }
    }
    Ok(())
}

/// Per-threshold z-scores `(mean − theory)/se`.
///
/// A zero SE with agreeing values scores zero (a curve against itself);
/// a zero SE with a genuine difference scores infinite, which the caller
/// counts as a miss.
pub fn z_scores(mean: &[f64], se: &[f64], theory: &[f64]) -> Vec<f64> {
    mean.iter()
        .zip(se)
        .zip(theory)
        .map(|((&m, &s), &t)| {
            let diff = m - t;
            if s > 0.0 {
                diff / s
            } else if diff.abs() <= 1e-12 {
                0.0
            } else {
                f64::INFINITY * diff.signum()
            }
        })
        .collect()
}

/// Scores one theory curve against the simulated one.
pub fn score_level(
    level: CorrectionLevel,
    v: &[f64],
    mean: &[f64],
    se: &[f64],
    theory: &[f64],
    max_z: f64,
) -> LevelStats {
    let z = z_scores(mean, se, theory);
    let mut sum_z_sq = 0.0;
    let mut misses = 0usize;
    let mut worst_z = 0.0f64;
    let mut worst_v = f64::NAN;
    for (i, &zi) in z.iter().enumerate() {
        sum_z_sq += zi * zi;
        if !(zi.abs() < max_z) {
            misses += 1;
        }
        if zi.abs() > worst_z.abs() || worst_v.is_nan() {
            worst_z = zi;
            worst_v = v[i];
        }
    }
    LevelStats {
        level,
        thresholds: v.len(),
        sum_z_sq,
        misses,
        worst_z,
        worst_v,
    }
}

/// Derives the ordering verdict when all three levels were scored.
pub fn ordering_verdict(levels: &[LevelStats]) -> Option<OrderingVerdict> {
    let find = |l: CorrectionLevel| levels.iter().find(|s| s.level == l).map(|s| s.sum_z_sq);
    let gaussian = find(CorrectionLevel::Gaussian)?;
    let skewness = find(CorrectionLevel::Skewness)?;
    let both = find(CorrectionLevel::SkewnessKurtosis)?;
    let monotone = both <= skewness && skewness <= gaussian;
    let improvement = if gaussian > 0.0 {
        1.0 - skewness / gaussian
    } else {
        0.0
    };
    Some(OrderingVerdict {
        gaussian,
        skewness,
        both,
        monotone,
        improvement,
        pass: monotone && improvement >= 0.20,
    })
}

/// Compares a simulation table against theory tables.
///
/// # Errors
///
/// Missing columns, mismatched threshold grids, or a missing selected
/// level.
pub fn compare_tables(
    sim: &CsvTable,
    theories: &[(CorrectionLevel, CsvTable)],
    selected: CorrectionLevel,
    max_z: f64,
    allow_misses: usize,
    check_ordering: bool,
) -> Result<CompareReport> {
    let v = sim.column_values("v").context("simulation table")?;
    let mean = sim.column_values("chi_mean").context("simulation table")?;
    let se = sim.column_values("chi_se").context("simulation table")?;

    let mut levels = Vec::new();
    for (level, table) in theories {
        let tv = table
            .column_values("v")
            .with_context(|| format!("theory table for {}", level.label()))?;
        assert_matching_grids(&v, &tv)
            .with_context(|| format!("theory table for {}", level.label()))?;
        let e_chi = table
            .column_values("e_chi")
            .with_context(|| format!("theory table for {}", level.label()))?;
        levels.push(score_level(*level, &v, &mean, &se, &e_chi, max_z));
    }

    let selected_stats = levels
        .iter()
        .find(|s| s.level == selected)
        .with_context(|| format!("no theory table for selected level {}", selected.label()))?;
    let selected_ok = selected_stats.misses <= allow_misses;
    let ordering = ordering_verdict(&levels);
    let pass =
        selected_ok && (!check_ordering || ordering.as_ref().map(|o| o.pass).unwrap_or(false));
    Ok(CompareReport {
        levels,
        selected,
        selected_ok,
        ordering,
        ordering_required: check_ordering,
        pass,
    })
}

/// Renders the report: one line per level, the ordering line when present,
/// and a final stable `verdict: PASS|FAIL` line.
pub fn render_report(report: &CompareReport, max_z: f64, allow_misses: usize) -> String {
    let mut out = String::new();
    for s in &report.levels {
        let marker = if s.level == report.selected { "*" } else { " " };
        out.push_str(&format!(
            "{marker} {:<20} sum_z_sq = {:>12.4}  misses(|z|>{max_z}) = {}/{}  worst z = {:+.2} at v = {}\n",
            s.level.label(),
            s.sum_z_sq,
            s.misses,
            s.thresholds,
            s.worst_z,
            s.worst_v,
        ));
    }
    if let Some(o) = &report.ordering {
        out.push_str(&format!(
            "ordering: both {:.4} <= skewness {:.4} <= gaussian {:.4}: {}; skewness improves on gaussian by {:.1}%{}\n",
            o.both,
            o.skewness,
            o.gaussian,
            if o.monotone { "yes" } else { "no" },
            100.0 * o.improvement,
            if report.ordering_required {
                if o.pass { " (required: met)" } else { " (required: NOT met)" }
            } else {
                ""
            },
        ));
    }
    out.push_str(&format!(
        "selected level {}: {} misses allowed\n",
        report.selected.label(),
        allow_misses
    ));
    out.push_str(&format!(
        "verdict: {}\n",
        if report.pass { "PASS" } else { "FAIL" }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csvio::parse_csv;

    fn table(columns: &[&str], rows: &[Vec<f64>]) -> CsvTable {
        parse_csv(&crate::csvio::render_csv(&[], columns, rows)).unwrap()
    }

    #[test]
    fn theory_against_itself_scores_zero() {
        let v = [0.0, 0.5, 1.0];
        let chi = [3.0, -1.0, 2.0];
        let sim = table(
            &["v", "chi_mean", "chi_se"],
            &v.iter()
                .zip(&chi)
                .map(|(&v, &c)| vec![v, c, 0.0])
                .collect::<Vec<_>>(),
        );
        let th = table(
            &["v", "e_chi"],
            &v.iter()
                .zip(&chi)
                .map(|(&v, &c)| vec![v, c])
                .collect::<Vec<_>>(),
        );
        let report = compare_tables(
            &sim,
            &[(CorrectionLevel::Gaussian, th)],
            CorrectionLevel::Gaussian,
            4.0,
            0,
            false,
        )
        .unwrap();
        assert_eq!(report.levels[0].sum_z_sq, 0.0);
        assert_eq!(report.levels[0].misses, 0);
        assert!(report.pass);
    }

    #[test]
    fn unit_shift_with_unit_se_scores_one_per_threshold() {
        let v = [0.0, 0.5, 1.0, 1.5];
        let sim = table(
            &["v", "chi_mean", "chi_se"],
            &v.iter().map(|&v| vec![v, 1.0, 1.0]).collect::<Vec<_>>(),
        );
        let th = table(
            &["v", "e_chi"],
            &v.iter().map(|&v| vec![v, 0.0]).collect::<Vec<_>>(),
        );
        let report = compare_tables(
            &sim,
            &[(CorrectionLevel::Skewness, th)],
            CorrectionLevel::Skewness,
            4.0,
            0,
            false,
        )
        .unwrap();
        let s = &report.levels[0];
        assert!((s.sum_z_sq - 4.0).abs() < 1e-12, "4 thresholds at z = 1");
        assert_eq!(s.misses, 0);
        assert!((s.worst_z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let sim = table(&["v", "chi_mean", "chi_se"], &[vec![0.0, 1.0, 1.0]]);
        let th = table(&["v", "e_chi"], &[vec![0.5, 1.0]]);
        let err = compare_tables(
            &sim,
            &[(CorrectionLevel::Gaussian, th)],
            CorrectionLevel::Gaussian,
            4.0,
            0,
            false,
        )
        .unwrap_err();
        assert!(format!("{err:#}").contains("differ at index 0"), "{err:#}");
    }

    #[test]
    fn ordering_verdict_requires_monotone_and_improvement() {
        let mk = |level, sum| LevelStats {
            level,
            thresholds: 1,
            sum_z_sq: sum,
            misses: 0,
            worst_z: 0.0,
            worst_v: 0.0,
        };
        let good = [
            mk(CorrectionLevel::Gaussian, 100.0),
            mk(CorrectionLevel::Skewness, 50.0),
            mk(CorrectionLevel::SkewnessKurtosis, 40.0),
        ];
        let o = ordering_verdict(&good).unwrap();
        assert!(o.pass && o.monotone);
        assert!((o.improvement - 0.5).abs() < 1e-12);

        let weak = [
            mk(CorrectionLevel::Gaussian, 100.0),
            mk(CorrectionLevel::Skewness, 90.0),
            mk(CorrectionLevel::SkewnessKurtosis, 80.0),
        ];
        let o = ordering_verdict(&weak).unwrap();
        assert!(o.monotone && !o.pass, "10% improvement is not enough");

        let unordered = [
            mk(CorrectionLevel::Gaussian, 50.0),
            mk(CorrectionLevel::Skewness, 100.0),
            mk(CorrectionLevel::SkewnessKurtosis, 80.0),
        ];
        assert!(!ordering_verdict(&unordered).unwrap().monotone);

        assert!(ordering_verdict(&good[..2]).is_none(), "needs all three");
    }

    #[test]
    fn zero_se_with_disagreement_is_a_miss() {
        let sim = table(&["v", "chi_mean", "chi_se"], &[vec![0.0, 1.0, 0.0]]);
        let th = table(&["v", "e_chi"], &[vec![0.0, 0.5]]);
        let report = compare_tables(
            &sim,
            &[(CorrectionLevel::Gaussian, th)],
            CorrectionLevel::Gaussian,
            4.0,
            0,
            false,
        )
        .unwrap();
        assert_eq!(report.levels[0].misses, 1);
        assert!(!report.pass);
    }

    #[test]
    fn report_renders_a_stable_verdict_line() {
        let sim = table(&["v", "chi_mean", "chi_se"], &[vec![0.0, 1.0, 1.0]]);
        let th = table(&["v", "e_chi"], &[vec![0.0, 1.0]]);
        let report = compare_tables(
            &sim,
            &[(CorrectionLevel::Gaussian, th)],
            CorrectionLevel::Gaussian,
            4.0,
            0,
            false,
        )
        .unwrap();
        let text = render_report(&report, 4.0, 0);
        assert!(text.ends_with("verdict: PASS\n"), "{text}");
    }
}
