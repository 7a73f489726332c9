//! Command-line front end. Every subcommand parses its inputs, calls the
//! library, and prints machine-readable output on stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::egal_lp::{solve_oeef, solve_oev};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, HeatmapMetric};
use crate::gen::{self, UtilityModel};
use crate::mechanisms::{Mechanism, DEFAULT_RSD_CAP};
use crate::model::io::{format_allocation, format_profile, read_allocation, read_profile};
use crate::model::{check_feasible, property_report, ValuationProfile};

#[derive(Debug, Parser)]
#[command(
    name = "randassign",
    version,
    about = "Random assignment mechanisms and egalitarian welfare"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MechanismArg {
    Ps,
    Rsd,
    Uniform,
    Oeef,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Borda,
    Exponential,
}

impl From<ModelArg> for UtilityModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Borda => UtilityModel::Borda,
            ModelArg::Exponential => UtilityModel::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Min,
    Mean,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal egalitarian value and a witness allocation.
    Solve {
        profile: PathBuf,
        /// Restrict to envy-free allocations.
        #[arg(long)]
        envy_free: bool,
    },
    /// Expected allocation of a mechanism.
    RunMechanism {
        mechanism: MechanismArg,
        profile: PathBuf,
        /// Monte Carlo RSD with this many sampled orders (exact otherwise).
        #[arg(long, requires = "seed")]
        samples: Option<u64>,
        #[arg(long, requires = "samples")]
        seed: Option<u64>,
    },
    /// Feasibility and fairness report for an allocation.
    Check { profile: PathBuf, allocation: PathBuf },
    /// Sample a Mallows profile.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        phi: f64,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        seed: u64,
    },
    /// Emit one of the adversarial profile families.
    Adversarial {
        #[command(subcommand)]
        family: Family,
    },
    /// Run an experiment grid described by a key=value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Phi-by-n text grid of aggregated achieved ratios.
    Heatmap {
        aggregates: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
    },
}

#[derive(Debug, Subcommand)]
enum Family {
    FavShare {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = gen::DEFAULT_FAV_SHARE_EPS)]
        eps: f64,
    },
    LowerBound {
        #[arg(long)]
        n1: usize,
        /// Replace one B-agent's row by the misreport of index `variant`.
        #[arg(long)]
        variant: Option<usize>,
    },
    Cyclic {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = gen::DEFAULT_FAV_SHARE_EPS)]
        eps: f64,
    },
}

fn load(path: &Path) -> Result<ValuationProfile<f64>> {
    read_profile(path)
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let io_err = |e| Error::io("<stdout>", e);
    match command {
        Command::Solve { profile, envy_free } => {
            let v = load(&profile)?;
            let sol = if envy_free { solve_oeef(&v)? } else { solve_oev(&v)? };
            writeln!(out, "lambda {}", sol.value).map_err(io_err)?;
            out.write_all(format_allocation(&sol.allocation).as_bytes())
                .map_err(io_err)?;
        }
        Command::RunMechanism {
            mechanism,
            profile,
            samples,
            seed,
        } => {
            let v = load(&profile)?;
            let mech = match (mechanism, samples, seed) {
                (MechanismArg::Rsd, Some(samples), Some(seed)) => Mechanism::RsdSampled { samples, seed },
                (MechanismArg::Rsd, _, _) => Mechanism::RsdExact { cap: DEFAULT_RSD_CAP },
                (_, Some(_), _) => {
                    return Err(Error::InvalidParameter("--samples only applies to rsd".into()));
                }
                (MechanismArg::Ps, ..) => Mechanism::Ps,
                (MechanismArg::Uniform, ..) => Mechanism::Uniform,
                (MechanismArg::Oeef, ..) => Mechanism::Oeef,
            };
            let outcome = mech.run(&v)?;
            out.write_all(format_allocation(&outcome.allocation).as_bytes())
                .map_err(io_err)?;
        }
        Command::Check { profile, allocation } => {
            let v = load(&profile)?;
            let p = read_allocation(&allocation)?;
            let violations = check_feasible(&p);
            writeln!(out, "feasible {}", violations.is_empty()).map_err(io_err)?;
            for violation in &violations {
                writeln!(out, "violation {violation}").map_err(io_err)?;
            }
            writeln!(out, "{}", property_report(&v, &p)?).map_err(io_err)?;
        }
        Command::Gen { n, m, phi, model, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: ValuationProfile<f64> = gen::sample_profile(n, m, phi, model.into(), &mut rng)?;
            out.write_all(format_profile(&v).as_bytes()).map_err(io_err)?;
        }
        Command::Adversarial { family } => {
            let v: ValuationProfile<f64> = match family {
                Family::FavShare { n, eps } => gen::fav_share_profile(n, eps)?,
                Family::LowerBound { n1, variant: None } => gen::lower_bound_profile(n1)?,
                Family::LowerBound { n1, variant: Some(l) } => gen::lower_bound_variant(n1, l)?,
                Family::Cyclic { n, eps } => gen::cyclic_ordinal_profile(n, eps)?,
            };
            out.write_all(format_profile(&v).as_bytes()).map_err(io_err)?;
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::read(&config)?;
            let records = experiment::run_grid(&cfg)?;
            let aggregates = experiment::aggregate(&records)?;
            if let Some(path) = &cfg.aggregates_path {
                experiment::write_aggregates_csv(&aggregates, path)?;
            }
            match &cfg.output_path {
                Some(path) => {
                    let _ = writeln!(err, "wrote {} records to {}", records.len(), path.display());
                }
                None => experiment::write_records(&records, &mut *out, Path::new("<stdout>"))?,
            }
        }
        Command::Heatmap { aggregates, metric } => {
            let aggs = experiment::read_aggregates_csv(&aggregates)?;
            let metric = match metric {
                MetricArg::Min => HeatmapMetric::Min,
                MetricArg::Mean => HeatmapMetric::Mean,
            };
            out.write_all(experiment::render_heatmap(&aggs, metric).as_bytes())
                .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
///
/// Returns the process exit code: 0 on success, 1 when the command fails,
/// 2 on a usage error.
pub fn dispatch<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
