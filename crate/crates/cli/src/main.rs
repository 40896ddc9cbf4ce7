//! `minkowski-lab`: batch harness for expected Euler-characteristic and
//! Minkowski-functional curves of smooth random fields.
//!
//! Subcommands: `theory` (expected curves at all correction levels),
//! `simulate` (ensemble run with mean ± SE aggregation), `compare`
//! (z-score report with a machine-readable verdict), `identities` (exact
//! jet-algebra batteries plus the GOE Monte Carlo cross-check),
//! `tube-check` (Monte Carlo vs Steiner tube volumes), and `plotdata`
//! (SVG or gnuplot overlay of the written tables).
//!
//! Exit codes: 0 success, 1 validation or I/O error, 2 a check or
//! comparison verdict failed.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use minkowski_lab_cli::config::{self, CorrectionLevel, Resolved};
use minkowski_lab_cli::csvio::read_csv;
use minkowski_lab_cli::identities;
use minkowski_lab_cli::plot::{self, PlotFormat};
use minkowski_lab_cli::report;
use minkowski_lab_cli::runner;

#[derive(Parser)]
#[command(
    name = "minkowski-lab",
    version,
    about = "Expected Euler-characteristic and Minkowski-functional curves for \
             smooth random fields: theory tables, lattice ensembles, comparison \
             reports, and identity batteries"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the configured base seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker pool size (default: one per logical core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write theory curves at all three correction levels.
    Theory,

    /// Run the configured ensemble and write the aggregated curve table.
    Simulate,

    /// Compare the simulation table against the theory tables.
    Compare {
        /// Miss threshold: a threshold misses when |z| exceeds this.
        #[arg(long, default_value_t = 4.0, value_name = "Z")]
        max_z: f64,

        /// Misses tolerated at the selected correction level.
        #[arg(long, default_value_t = 1, value_name = "N")]
        allow_misses: usize,

        /// Additionally require the correction-level ordering
        /// (skewness+kurtosis <= skewness <= gaussian, with >= 20 %
        /// improvement of skewness over gaussian).
        #[arg(long)]
        check_ordering: bool,
    },

    /// Run the exact identity batteries and the GOE Monte Carlo check.
    Identities {
        /// Sample count for the Monte Carlo determinant check.
        #[arg(long, default_value_t = 100_000, value_name = "N")]
        mc_samples: u64,

        /// Self-test: flip one known-true case to prove failures surface.
        #[arg(long, hide = true)]
        inject_failure: bool,
    },

    /// Monte Carlo vs Steiner tube volumes for rectangles.
    TubeCheck {
        /// Sample count per (dimension, radius) case.
        #[arg(long, default_value_t = 1_000_000, value_name = "N")]
        samples: u64,
    },

    /// Render plot data from previously written tables.
    Plotdata {
        /// Output flavor.
        #[arg(long, value_enum, default_value_t = PlotFormat::Svg)]
        format: PlotFormat,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Loads and resolves the configuration, applying CLI overrides.
fn resolved(cli: &Cli) -> Result<Resolved> {
    let path = cli
        .config
        .as_ref()
        .context("--config is required for this subcommand")?;
    let (_, mut res) = config::load_resolved(path)?;
    if let Some(seed) = cli.seed {
        res.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        res.out_dir = out.clone();
    }
    Ok(res)
}

/// Reads whichever theory tables exist in the output directory.
fn existing_theories(
    res: &Resolved,
) -> Result<Vec<(CorrectionLevel, minkowski_lab_cli::csvio::CsvTable)>> {
    let mut out = Vec::new();
    for level in CorrectionLevel::ALL {
        let path = runner::theory_path(&res.out_dir, level);
        if path.exists() {
            out.push((level, read_csv(&path)?));
        }
    }
    Ok(out)
}

/// Runs the selected subcommand; `Ok(false)` means a check failed.
fn run(cli: Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Theory => {
            let res = resolved(&cli)?;
            for path in runner::theory_tables(&res)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Cmd::Simulate => {
            let res = resolved(&cli)?;
            let path = runner::simulate(&res, cli.jobs)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Cmd::Compare {
            max_z,
            allow_misses,
            check_ordering,
        } => {
            let res = resolved(&cli)?;
            let sim = read_csv(&runner::sim_path(&res.out_dir)).context("run `simulate` first")?;
            let theories = existing_theories(&res).context("run `theory` first")?;
            let rep = report::compare_tables(
                &sim,
                &theories,
                res.correction,
                *max_z,
                *allow_misses,
                *check_ordering,
            )?;
            let text = report::render_report(&rep, *max_z, *allow_misses);
            print!("{text}");
            let report_path = res.out_dir.join("report.txt");
            std::fs::write(&report_path, &text)
                .with_context(|| format!("writing {}", report_path.display()))?;
            Ok(rep.pass)
        }
        Cmd::Identities {
            mc_samples,
            inject_failure,
        } => {
            let checks = identities::run_battery(*mc_samples, *inject_failure);
            let passed = checks.iter().filter(|c| c.passed).count();
            for check in &checks {
                println!("{}", check.render());
            }
            println!("identities: {passed}/{} checks passed", checks.len());
            Ok(passed == checks.len())
        }
        Cmd::TubeCheck { samples } => {
            let checks = identities::tube_checks(*samples);
            let passed = checks.iter().filter(|c| c.passed).count();
            for check in &checks {
                println!("{}", check.render());
            }
            println!("tube-check: {passed}/{} checks passed", checks.len());
            Ok(passed == checks.len())
        }
        Cmd::Plotdata { format } => {
            let res = resolved(&cli)?;
            let sim_path = runner::sim_path(&res.out_dir);
            let sim = if sim_path.exists() {
                Some(read_csv(&sim_path)?)
            } else {
                None
            };
            let theories = existing_theories(&res)?;
            let text = plot::render(*format, sim.as_ref(), &theories)?;
            let path = res.out_dir.join(format!("curves.{}", format.extension()));
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}
