//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::design::{ingest, PredictorSchema};
use crate::error::{Error, Result};
use crate::modelspace::{prior_mass_audit, ModelPriorScheme, PriorKind};
use crate::numerics::HyperGPrior;
use crate::posterior::{baseline_comparison, enumerate_posterior, EnumerateOptions};
use crate::report::{validation_text, SelectOutput};
use crate::synth::{obesity_like, pure_noise, OneFactorScenario};
use crate::validation::{run_suites, Suite, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "factor-select", version, about = "Bayesian variable selection with numeric variables and categorical factors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all models and report posterior inclusion probabilities.
    Select(RunConfig),
    /// Run the numerical oracle suites.
    Validate(ValidateArgs),
    /// Write a seeded synthetic dataset and its schema.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Constant,
    ScottBerger,
    Hierarchical,
}

impl From<PriorArg> for PriorKind {
    fn from(p: PriorArg) -> Self {
        match p {
            PriorArg::Constant => PriorKind::Constant,
            PriorArg::ScottBerger => PriorKind::ScottBerger,
            PriorArg::Hierarchical => PriorKind::Hierarchical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Delimited data file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// TOML schema naming the response, sure columns, variables and factors.
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, value_enum, default_value_t = PriorArg::Hierarchical)]
    pub prior: PriorArg,
    /// Mixing density on g: robust, robust-quadrature, hyper-g, hyper-g-n, zellner-siow.
    #[arg(long, default_value = "robust")]
    pub hyper: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    /// Also report P(A|y) under every baseline coding of this factor.
    #[arg(long, value_name = "FACTOR")]
    pub baseline_demo: Option<String>,
    /// Also enumerate the model-space prior and check its invariants.
    #[arg(long)]
    pub prior_audit: bool,
    /// Field delimiter: a single character, or `tab`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// all, gi, explicit-prior, residual-rank, testability or bcal.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// n = 1002, 3 sure columns, 2 variables, factors with 6 and 3 levels.
    Obesity,
    /// One factor, one level shifted.
    OneFactor,
    /// Pure-noise response, one variable, one 3-level factor.
    Noise,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory receiving `data.csv` and `schema.toml`.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// 1-based level whose mean is shifted (one-factor scenario).
    #[arg(long, default_value_t = 1)]
    pub shifted_level: usize,
    /// Shift in noise standard deviations.
    #[arg(long, default_value_t = 2.0)]
    pub shift: f64,
}

fn parse_delimiter(s: &str) -> Result<u8> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(Error::Config(format!("delimiter must be a single ASCII character or `tab`, got `{s}`"))),
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} file `{}` does not exist", path.display())))
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

/// Runs a selection and returns the rendered output.
pub fn select_output(config: &RunConfig) -> Result<SelectOutput> {
    require_file(&config.schema, "schema")?;
    require_file(&config.data, "data")?;
    let delimiter = parse_delimiter(&config.delimiter)?;
    let hyper = HyperGPrior::from_name(&config.hyper)?;
    let schema = PredictorSchema::load(&config.schema)?;
    let demo_factor = match &config.baseline_demo {
        Some(name) => Some(
            schema
                .factors
                .iter()
                .position(|f| &f.name == name)
                .ok_or_else(|| Error::Config(format!("--baseline-demo names unknown factor `{name}`")))?,
        ),
        None => None,
    };
    let assembly = ingest(&config.data, &schema, delimiter)?;
    let kind = PriorKind::from(config.prior);
    let report = enumerate_posterior(
        &assembly,
        kind,
        &hyper,
        EnumerateOptions {
            top_n: config.top_n,
            parallel: true,
        },
    )?;
    let prior_audit = if config.prior_audit {
        Some(prior_mass_audit(&ModelPriorScheme::for_assembly(kind, &assembly))?)
    } else {
        None
    };
    let baseline_demo = match demo_factor {
        Some(f) => Some(baseline_comparison(&assembly, f, &hyper)?),
        None => None,
    };
    Ok(SelectOutput {
        report,
        prior_audit,
        baseline_demo,
    })
}

pub fn run_select(config: &RunConfig) -> Result<()> {
    let output = select_output(config)?;
    let text = match config.format {
        Format::Json => output.to_json(),
        Format::Text => output.to_text(),
    };
    write_output(config.out.as_deref(), &text)
}

pub fn run_validate(args: &ValidateArgs) -> Result<()> {
    let suites = Suite::from_name(&args.suite)?;
    let summary = run_suites(&suites, args.seed)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
        Format::Text => validation_text(&summary),
    };
    write_output(None, &text)?;
    if summary.passed() {
        Ok(())
    } else {
        let names: Vec<String> = summary.failures().map(|c| format!("{}: {}", c.suite.name(), c.name)).collect();
        Err(Error::Validation(format!("{} check(s) failed: {}", names.len(), names.join("; "))))
    }
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let dataset = match args.scenario {
        Scenario::Obesity => obesity_like(args.seed),
        Scenario::OneFactor => {
            if args.shifted_level == 0 || args.shifted_level > args.levels {
                return Err(Error::Config(format!(
                    "--shifted-level must be between 1 and {}",
                    args.levels
                )));
            }
            OneFactorScenario::balanced(args.seed, args.n, args.levels, vec![args.shifted_level - 1], args.shift)
                .generate()?
        }
        Scenario::Noise => pure_noise(args.seed, args.n, 1, 3)?,
    };
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source| Error::Io { path: p, source }
    };
    fs::create_dir_all(&args.out_dir).map_err(io(&args.out_dir))?;
    let data_path = args.out_dir.join("data.csv");
    let file = fs::File::create(&data_path).map_err(io(&data_path))?;
    dataset.frame.write_csv(file, b',')?;
    let schema_path = args.out_dir.join("schema.toml");
    fs::write(&schema_path, dataset.schema.to_toml_string()).map_err(io(&schema_path))?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Select(c) => run_select(c),
        Command::Validate(v) => run_validate(v),
        Command::Simulate(s) => run_simulate(s),
    }
}

/// Parses arguments, runs, and returns the process exit code. Failures print
/// one `error[code]: message` line on standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delimiters() {
        assert_eq!(parse_delimiter(",").unwrap(), b',');
        assert_eq!(parse_delimiter("tab").unwrap(), b'\t');
        assert_eq!(parse_delimiter(";").unwrap(), b';');
        assert!(parse_delimiter(",,").is_err());
    }

    #[test]
    fn missing_schema_is_a_config_error() {
        let code = main_with_args([
            "factor-select",
            "select",
            "--data",
            "/nonexistent/data.csv",
            "--schema",
            "/nonexistent/schema.toml",
        ]);
        assert_eq!(code, 2);
    }
}
