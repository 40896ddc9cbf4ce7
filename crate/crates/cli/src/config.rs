//! Experiment configuration: TOML sections, validation, and the resolved
//! runtime view.
//!
//! A configuration names the random-field model either through the kernel
//! parameters (`[model]`) or through a directly entered cumulant set
//! (`[cumulants]`) — never both.  The grid section accepts the lattice
//! `shape` together with exactly one of `spacing` (per-axis step) or
//! `extents` (physical domain edge; the step is then `extent/(points-1)`).
//! Validation happens once, up front, and produces messages that name the
//! offending section so a config error is attributable without reading
//! code.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use minkowski_lab::geometry::{lk_rectangle, LkVector};
use minkowski_lab::model::{analytic_cumulants, stability_ok, KernelModelParams};
use minkowski_lab::theory::{Correction, CumulantSet};

/// Which perturbative orders of the expected-curve expansion to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CorrectionLevel {
    /// Gaussian baseline: no cumulant corrections.
    #[serde(rename = "gaussian")]
    Gaussian,
    /// Third-order (skewness) correction only.
    #[serde(rename = "skewness")]
    Skewness,
    /// Third- and fourth-order corrections.
    #[default]
    #[serde(rename = "skewness+kurtosis")]
    SkewnessKurtosis,
}

impl CorrectionLevel {
    /// All levels, in increasing order of the expansion.
    pub const ALL: [CorrectionLevel; 3] = [
        CorrectionLevel::Gaussian,
        CorrectionLevel::Skewness,
        CorrectionLevel::SkewnessKurtosis,
    ];

    /// The corresponding truncation in the numerics crate.
    pub fn to_core(self) -> Correction {
        match self {
            CorrectionLevel::Gaussian => Correction::Gaussian,
            CorrectionLevel::Skewness => Correction::Skewness,
            CorrectionLevel::SkewnessKurtosis => Correction::SkewnessKurtosis,
        }
    }

    /// Stable identifier used in file names and CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            CorrectionLevel::Gaussian => "gaussian",
            CorrectionLevel::Skewness => "skewness",
            CorrectionLevel::SkewnessKurtosis => "skewness+kurtosis",
        }
    }

    /// A label safe for file names (no `+`).
    pub fn file_label(self) -> &'static str {
        match self {
            CorrectionLevel::Gaussian => "gaussian",
            CorrectionLevel::Skewness => "skewness",
            CorrectionLevel::SkewnessKurtosis => "skewness-kurtosis",
        }
    }
}

/// `[model]`: the non-Gaussian kernel model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Correlation decay rate of the underlying Gaussian field.
    pub g: f64,
    /// Smoothing bandwidth of the quadratic coupling.
    pub tau: f64,
    /// Quadratic coupling strength.
    pub delta: f64,
    /// Ambient dimension (must match the grid).
    pub n: usize,
}

/// `[cumulants]`: direct entry of the correction coefficients.
///
/// Only `gamma` is mandatory; omitted cumulants default to zero, so a
/// Gaussian reference configuration is just `gamma = …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CumulantSection {
    /// Second-spectral-moment parameter (must be positive).
    pub gamma: f64,
    /// Third-order cumulant at coincident points.
    #[serde(default)]
    pub k0: f64,
    /// First-derivative slot of the third-order cumulant.
    #[serde(default)]
    pub k1: f64,
    /// Mixed-second-derivative slot of the third-order cumulant.
    #[serde(default)]
    pub k11: f64,
    /// Fourth-order cumulant at coincident points.
    #[serde(default)]
    pub q0: f64,
    /// First-derivative slot of the fourth-order cumulant.
    #[serde(default)]
    pub q1: f64,
    /// Second-derivative slot, two pairs sharing a vertex.
    #[serde(default)]
    pub q11a: f64,
    /// Second-derivative slot, two disjoint pairs.
    #[serde(default)]
    pub q11aa: f64,
    /// Third-derivative slot, chain pattern.
    #[serde(default)]
    pub q111a: f64,
    /// Third-derivative slot, star pattern.
    #[serde(default)]
    pub q111d: f64,
}

/// `[grid]`: lattice geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Lattice points per axis.
    pub shape: Vec<usize>,
    /// Per-axis step in physical units (exclusive with `extents`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Vec<f64>>,
    /// Per-axis physical edge length (exclusive with `spacing`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extents: Option<Vec<f64>>,
}

/// `[ensemble]`: how many realizations and from which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Number of independent realizations.
    pub count: usize,
    /// Base seed; realization `i` uses stream `i` of this seed.
    pub base_seed: u64,
}

/// `[thresholds]`: the level grid for all curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    /// Lowest level, inclusive.
    pub v_min: f64,
    /// Highest level, inclusive (up to step rounding).
    pub v_max: f64,
    /// Grid step (positive).
    pub step: f64,
}

/// `[output]`: destination directory and optional raw dumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory (default `out`, overridable with `--out`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write each realization as a binary field dump.
    #[serde(default)]
    pub dump_fields: bool,
}

/// The on-disk configuration, one struct per TOML section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Correction level for simulation-facing reports (theory output
    /// always includes all levels).
    #[serde(default)]
    pub correction: CorrectionLevel,
    /// Kernel-model parameters (exclusive with `cumulants`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    /// Direct cumulant entry (exclusive with `model`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulants: Option<CumulantSection>,
    /// Lattice geometry.
    pub grid: GridSection,
    /// Ensemble size and seeding.
    pub ensemble: EnsembleSection,
    /// Threshold grid.
    pub thresholds: ThresholdSection,
    /// Output destination.
    #[serde(default)]
    pub output: OutputSection,
}

/// Validated, fully derived runtime view of a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// Correction level for reports.
    pub correction: CorrectionLevel,
    /// Model parameters when the config specified `[model]`.
    pub model: Option<KernelModelParams>,
    /// Cumulant set driving all theory curves.
    pub cumulants: CumulantSet,
    /// Ambient dimension (= number of grid axes).
    pub n: usize,
    /// Lattice points per axis.
    pub shape: Vec<usize>,
    /// Per-axis step.
    pub spacing: Vec<f64>,
    /// Per-axis physical edge length.
    pub extents: Vec<f64>,
    /// Intrinsic volumes of the rectangular domain.
    pub lk: LkVector,
    /// Number of realizations.
    pub count: usize,
    /// Base seed for the ensemble.
    pub base_seed: u64,
    /// The explicit threshold grid.
    pub thresholds: Vec<f64>,
    /// Output directory.
    pub out_dir: PathBuf,
    /// Whether to write raw field dumps.
    pub dump_fields: bool,
}

/// Reads and parses a configuration file.
///
/// # Errors
///
/// I/O and TOML syntax errors, annotated with the path.
pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(cfg)
}

/// Validates a parsed configuration and derives the runtime view.
///
/// # Errors
///
/// One message per violated invariant, prefixed with the section name.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Resolved> {
    let shape = cfg.grid.shape.clone();
    if shape.is_empty() || shape.len() > 3 {
        bail!("[grid] shape: need 1 to 3 axes, got {}", shape.len());
    }
    if shape.iter().any(|&s| s < 2) {
        bail!("[grid] shape: every axis needs at least 2 points");
    }
    let spacing = match (&cfg.grid.spacing, &cfg.grid.extents) {
        (Some(_), Some(_)) => bail!("[grid]: give either spacing or extents, not both"),
        (None, None) => bail!("[grid]: give spacing or extents"),
        (Some(sp), None) => {
            if sp.len() != shape.len() {
                bail!("[grid] spacing: need one entry per axis");
            }
            sp.clone()
        }
        (None, Some(ex)) => {
            if ex.len() != shape.len() {
                bail!("[grid] extents: need one entry per axis");
            }
            ex.iter()
                .zip(&shape)
                .map(|(&e, &s)| e / (s - 1) as f64)
                .collect()
        }
    };
    if spacing.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        bail!("[grid]: spacing must be positive and finite on every axis");
    }
    let extents: Vec<f64> = spacing
        .iter()
        .zip(&shape)
        .map(|(&d, &s)| d * (s - 1) as f64)
        .collect();
    let lk = lk_rectangle(&extents).context("[grid]: domain intrinsic volumes")?;

    let n = shape.len();
    let (model, cumulants) = match (&cfg.model, &cfg.cumulants) {
        (Some(_), Some(_)) => bail!("specify either [model] or [cumulants], not both"),
        (None, None) => bail!("specify one of [model] or [cumulants]"),
        (Some(m), None) => {
            let p = KernelModelParams::new(m.g, m.tau, m.delta, m.n)
                .map_err(|e| anyhow::anyhow!("[model]: {e}"))?;
            if p.n != n {
                bail!("[model] n = {} does not match the {}-axis grid", p.n, n);
            }
            if !stability_ok(&p) {
                bail!(
                    "[model]: parameters leave the stable window \
                     (need alpha > 0 and alpha + n*beta > 0)"
                );
            }
            let c = analytic_cumulants(&p);
            (Some(p), c)
        }
        (None, Some(c)) => {
            if !(c.gamma > 0.0) || !c.gamma.is_finite() {
                bail!("[cumulants] gamma: must be positive");
            }
            let set = CumulantSet {
                gamma: c.gamma,
                k0: c.k0,
                k1: c.k1,
                k11: c.k11,
                q0: c.q0,
                q1: c.q1,
                q11a: c.q11a,
                q11aa: c.q11aa,
                q111a: c.q111a,
                q111d: c.q111d,
            };
            (None, set)
        }
    };

    if cfg.ensemble.count < 1 {
        bail!("[ensemble] count: need at least 1 realization");
    }
    let t = &cfg.thresholds;
    if !(t.step > 0.0) || !t.step.is_finite() {
        bail!("[thresholds] step: must be positive");
    }
    if !(t.v_min < t.v_max) {
        bail!("[thresholds]: v_min must be below v_max");
    }
    let count_levels = ((t.v_max - t.v_min) / t.step).round() as usize + 2;
    if count_levels > 100_000 {
        bail!("[thresholds]: grid has more than 100000 levels");
    }
    let mut thresholds = Vec::new();
    let mut k = 0usize;
    loop {
        let v = t.v_min + k as f64 * t.step;
        if v > t.v_max + 1e-9 * t.step {
            break;
        }
        thresholds.push(v);
        k += 1;
    }

    Ok(Resolved {
        correction: cfg.correction,
        model,
        cumulants,
        n,
        shape,
        spacing,
        extents,
        lk,
        count: cfg.ensemble.count,
        base_seed: cfg.ensemble.base_seed,
        thresholds,
        out_dir: cfg
            .output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out")),
        dump_fields: cfg.output.dump_fields,
    })
}

/// [`load`] followed by [`resolve`].
///
/// # Errors
///
/// As for the two stages.
pub fn load_resolved(path: &Path) -> Result<(ExperimentConfig, Resolved)> {
    let cfg = load(path)?;
    let res = resolve(&cfg)?;
    Ok((cfg, res))
}
