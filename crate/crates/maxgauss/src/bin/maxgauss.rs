//! Command-line front end: single one- and two-sample tests, feature-set
//! batches with FDR control, and simulation studies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maxgauss::engine::{run_one_sample, run_two_sample, TestFamily, TestSpec};
use maxgauss::error::Error;
use maxgauss::io::{
    emit_batch, emit_sim, emit_single, emit_to_path, load_gene_sets, load_matrix,
    load_matrix_grouped, load_mu0, load_scenarios, run_batch, OutputFormat, SingleReport,
    DEFAULT_FDR, DEFAULT_MIN_SET_SIZE,
};
use maxgauss::mc::{DEFAULT_BATCH_DRAWS, DEFAULT_DRAWS};
use maxgauss::rng::RngSpec;
use maxgauss::sim::run_scenario;

#[derive(Parser)]
#[command(name = "maxgauss", version, about = "Max-type mean-vector tests with Monte Carlo calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonTestArgs {
    /// Nominal test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of Monte Carlo calibration draws.
    #[arg(long)]
    mc_draws: Option<usize>,
    /// RNG seed; a fixed seed reproduces results exactly.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Studentize the marginal statistics (default).
    #[arg(long, overrides_with = "no_studentized")]
    studentized: bool,
    #[arg(long = "no-studentized", hide = true)]
    no_studentized: bool,
    /// Apply the marginal t-statistic screening step before maximizing.
    #[arg(long, overrides_with = "no_screen")]
    screen: bool,
    #[arg(long = "no-screen", hide = true)]
    no_screen: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

impl CommonTestArgs {
    fn studentized(&self) -> bool {
        // studentized by default; --no-studentized turns it off
        !self.no_studentized
    }

    fn screened(&self) -> bool {
        self.screen && !self.no_screen
    }

    fn spec(&self, family: TestFamily, default_draws: usize) -> TestSpec {
        let mut spec = TestSpec::new(family, self.studentized(), self.screened(), RngSpec::new(self.seed));
        spec.alpha = self.alpha;
        spec.num_draws = self.mc_draws.unwrap_or(default_draws);
        spec
    }
}

#[derive(Subcommand)]
enum Command {
    /// One-sample test of H0: mu = mu0 on a CSV matrix.
    TestOne {
        /// CSV data matrix: header row of feature names, one observation per row.
        data: PathBuf,
        /// Null mean vector file (one value per line); zero when absent.
        #[arg(long)]
        mu0: Option<PathBuf>,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// Two-sample test of H0: mu1 = mu2 on two CSV matrices (or one with a
    /// group column).
    TestTwo {
        /// First group's CSV matrix, or the combined matrix with --group-column.
        data_x: PathBuf,
        /// Second group's CSV matrix; omit when using --group-column.
        data_y: Option<PathBuf>,
        /// Column of `data_x` holding the two group labels.
        #[arg(long)]
        group_column: Option<String>,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// Two-sample tests over many feature sets with BH FDR control.
    Batch {
        /// First group's CSV matrix, or the combined matrix with --group-column.
        data_x: PathBuf,
        /// Second group's CSV matrix; omit when using --group-column.
        data_y: Option<PathBuf>,
        /// Column of `data_x` holding the two group labels.
        #[arg(long)]
        group_column: Option<String>,
        /// Feature-set definitions: CSV with set_id,feature columns.
        #[arg(long)]
        sets: PathBuf,
        /// FDR level for the BH step-up rule.
        #[arg(long, default_value_t = DEFAULT_FDR)]
        fdr: f64,
        /// Sets smaller than this are skipped.
        #[arg(long, default_value_t = DEFAULT_MIN_SET_SIZE)]
        min_set_size: usize,
        #[command(flatten)]
        common: CommonTestArgs,
    },
    /// Empirical size/power study from a JSON scenario file.
    Simulate {
        /// Scenario file: a JSON scenario object or array of them.
        scenarios: PathBuf,
        /// Worker threads; defaults to all cores. Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Also emit per-scenario rejection rates as CSV rows suitable for
        /// plotting power curves.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn emit<F>(out: Option<&PathBuf>, f: F) -> maxgauss::Result<()>
where
    F: FnOnce(&mut dyn std::io::Write) -> maxgauss::Result<()>,
{
    match out {
        Some(path) => emit_to_path(path, f),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn run() -> maxgauss::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::TestOne { data, mu0, common } => {
            let matrix = load_matrix(&data)?;
            let mut spec = common.spec(TestFamily::OneSample, DEFAULT_DRAWS);
            if let Some(path) = mu0 {
                spec.mu0 = Some(load_mu0(&path)?);
            }
            let result = run_one_sample(&matrix, &spec)?;
            let report = SingleReport::from_result(&result, &spec);
            emit(common.out.as_ref(), |w| emit_single(&report, common.format.into(), w))
        }
        Command::TestTwo { data_x, data_y, group_column, common } => {
            let (x, y) = load_pair(&data_x, data_y.as_ref(), group_column.as_deref())?;
            let spec = common.spec(TestFamily::TwoSample, DEFAULT_DRAWS);
            let result = run_two_sample(&x, &y, &spec)?;
            let report = SingleReport::from_result(&result, &spec);
            emit(common.out.as_ref(), |w| emit_single(&report, common.format.into(), w))
        }
        Command::Batch { data_x, data_y, group_column, sets, fdr, min_set_size, common } => {
            let (x, y) = load_pair(&data_x, data_y.as_ref(), group_column.as_deref())?;
            let defs = load_gene_sets(&sets)?;
            let spec = common.spec(TestFamily::TwoSample, DEFAULT_BATCH_DRAWS);
            let report = run_batch(&x, &y, &defs, &spec, fdr, min_set_size)?;
            emit(common.out.as_ref(), |w| emit_batch(&report, common.format.into(), w))
        }
        Command::Simulate { scenarios, threads, emit_plot_data, out, format } => {
            let scenario_list = load_scenarios(&scenarios)?;
            let mut reports = Vec::with_capacity(scenario_list.len());
            for scenario in &scenario_list {
                reports.push(run_scenario(scenario, threads)?);
            }
            if let Some(plot_path) = emit_plot_data {
                emit_to_path(&plot_path, |w| emit_sim(&reports, OutputFormat::Csv, w))?;
            }
            emit(out.as_ref(), |w| emit_sim(&reports, format.into(), w))
        }
    }
}

fn load_pair(
    data_x: &PathBuf,
    data_y: Option<&PathBuf>,
    group_column: Option<&str>,
) -> maxgauss::Result<(maxgauss::DataMatrix, maxgauss::DataMatrix)> {
    match (data_y, group_column) {
        (Some(path_y), None) => Ok((load_matrix(data_x)?, load_matrix(path_y)?)),
        (None, Some(col)) => load_matrix_grouped(data_x, col),
        (Some(_), Some(_)) => {
            Err(Error::invalid("give either a second matrix or --group-column, not both"))
        }
        (None, None) => {
            Err(Error::invalid("two-sample input needs a second matrix or --group-column"))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
