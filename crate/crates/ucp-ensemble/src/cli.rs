//! `ucp-ensemble` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid data or flag values,
//! 3 internal failure. Data goes to stdout (or `--out`); diagnostics go to
//! stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ucp_ensemble_core::dataset::generate_synthetic;
use ucp_ensemble_core::ensemble::{train_ensemble, DEFAULT_ALPHA, DEFAULT_REPLICATES};
use ucp_ensemble_core::evaluation::{compare, loocv};
use ucp_ensemble_core::rng::DEFAULT_SEED;
use ucp_ensemble_core::{Dataset, EnsembleConfig, EnvFactors, ModelId};

use crate::error::{AppError, AppResult};
use crate::io::{load_dataset, write_dataset};
use crate::model_file::{load_ensemble, save_ensemble};
use crate::profile::parse_profile;
use crate::report::{describe_dataset, emit_report, sig6, Format};

#[derive(Debug, Parser)]
#[command(name = "ucp-ensemble", version, about = "Weighted ensemble productivity estimation for Use Case Points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset drawn from a profile file.
    Generate(GenerateArgs),
    /// Train an ensemble on a dataset and save it as JSON.
    Train(TrainArgs),
    /// Predict productivity and effort for one project.
    Predict(PredictArgs),
    /// Leave-one-out comparison of the ensemble, its base models and the baselines.
    Evaluate(EvaluateArgs),
    /// Descriptive statistics of UCP, effort and productivity.
    Describe(DescribeArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
}

impl EnsembleArgs {
    fn config(&self) -> AppResult<EnsembleConfig> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(AppError::InvalidFlag { flag: "--alpha", message: format!("{} is not positive", self.alpha) });
        }
        if self.replicates == 0 {
            return Err(AppError::InvalidFlag { flag: "--replicates", message: "must be at least 1".into() });
        }
        Ok(EnsembleConfig { alpha: self.alpha, replicates: self.replicates, ..EnsembleConfig::default() }.with_seed(self.seed))
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredictFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Eight comma-separated ratings e1,...,e8.
    #[arg(long, allow_hyphen_values = true)]
    env: String,
    #[arg(long, allow_negative_numbers = true)]
    ucp: f64,
    #[arg(long, value_enum, default_value_t = PredictFormat::Text)]
    format: PredictFormat,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DescribeArgs {
    #[arg(long)]
    data: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> AppResult<()> {
    match command {
        Command::Generate(a) => generate(a, stdout),
        Command::Train(a) => train(a, stdout),
        Command::Predict(a) => predict(a, stdout),
        Command::Evaluate(a) => evaluate(a, stdout),
        Command::Describe(a) => {
            let data = read_dataset(&a.data)?;
            stdout.write_all(describe_dataset(&data)?.as_bytes())?;
            Ok(())
        }
    }
}

fn open(path: &Path) -> AppResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| AppError::Open { path: path.to_owned(), source })
}

fn read_dataset(path: &Path) -> AppResult<Dataset> {
    let name = path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    load_dataset(open(path)?, &name)
}

/// Runs `body` against `--out` if given, otherwise against stdout.
fn with_output(out: Option<&Path>, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> AppResult<()>) -> AppResult<()> {
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            body(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn generate(a: GenerateArgs, stdout: &mut dyn Write) -> AppResult<()> {
    let text = std::fs::read_to_string(&a.profile).map_err(|source| AppError::Open { path: a.profile.clone(), source })?;
    let profile = parse_profile(&text)?;
    let data = generate_synthetic(&profile, a.seed)?;
    with_output(a.out.as_deref(), stdout, |w| write_dataset(&data, w))
}

fn train(a: TrainArgs, stdout: &mut dyn Write) -> AppResult<()> {
    let config = a.ensemble.config()?;
    let data = read_dataset(&a.ensemble.data)?;
    let ensemble = train_ensemble(&data, &config)?;
    with_output(a.out.as_deref(), stdout, |w| save_ensemble(&ensemble, w))
}

fn parse_env(text: &str) -> AppResult<EnvFactors> {
    let invalid = |message: String| AppError::InvalidFlag { flag: "--env", message };
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("{s:?} is not a number"))))
        .collect::<AppResult<Vec<f64>>>()?;
    let ratings: [f64; 8] =
        values.try_into().map_err(|v: Vec<f64>| invalid(format!("expected 8 ratings, found {}", v.len())))?;
    EnvFactors::new(ratings).map_err(|e| invalid(e.to_string()))
}

#[derive(Serialize)]
struct ModelLine {
    model: ModelId,
    productivity: f64,
    weight: f64,
}

#[derive(Serialize)]
struct PredictionOutput {
    productivity: f64,
    effort: f64,
    ucp: f64,
    models: Vec<ModelLine>,
}

fn predict(a: PredictArgs, stdout: &mut dyn Write) -> AppResult<()> {
    if !(a.ucp > 0.0) || !a.ucp.is_finite() {
        return Err(AppError::InvalidFlag { flag: "--ucp", message: format!("UCP must be positive, got {}", a.ucp) });
    }
    let env = parse_env(&a.env)?;
    let ensemble = load_ensemble(open(&a.model)?)?;
    let p = ensemble.predict_effort(&env, a.ucp)?;
    let weights = ensemble.weights.normalized();
    let models: Vec<ModelLine> = ModelId::ALL
        .iter()
        .map(|&id| ModelLine { model: id, productivity: p.per_model[id.index()], weight: weights[id.index()] })
        .collect();
    match a.format {
        PredictFormat::Json => {
            let out = PredictionOutput { productivity: p.productivity, effort: p.effort, ucp: a.ucp, models };
            serde_json::to_writer_pretty(&mut *stdout, &out)?;
            stdout.write_all(b"\n")?;
        }
        PredictFormat::Text => {
            writeln!(stdout, "productivity {}", sig6(p.productivity))?;
            writeln!(stdout, "effort {}", sig6(p.effort))?;
            writeln!(stdout, "\nmodel  productivity  weight")?;
            for m in &models {
                writeln!(stdout, "{:<5}  {:>12}  {:>6}", m.model.name(), sig6(m.productivity), sig6(m.weight))?;
            }
        }
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> AppResult<()> {
    let config = a.ensemble.config()?;
    let data = read_dataset(&a.ensemble.data)?;
    let outcomes = loocv(&data, &config)?;
    let report = compare(&outcomes)?;
    with_output(a.out.as_deref(), stdout, |w| emit_report(&report, a.format, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("ucp-ensemble").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&[]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["describe", "--data", "x.csv", "--bogus"]).0, 1);
        assert_eq!(run_args(&["predict", "--model", "m.json", "--env", "1,2,3,4,5,0,1,2", "--ucp", "abc"]).0, 1);
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("evaluate"));
    }

    #[test]
    fn invalid_values_exit_two() {
        let (code, _, err) = run_args(&["predict", "--model", "missing.json", "--env", "3,3,3,3,3,3,3,3", "--ucp", "-5"]);
        assert_eq!(code, 2);
        assert!(err.contains("--ucp") && err.contains("-5"), "{err}");
        let (code, _, err) = run_args(&["predict", "--model", "missing.json", "--env", "3,3,3", "--ucp", "5"]);
        assert_eq!(code, 2);
        assert!(err.contains("expected 8 ratings"));
        assert_eq!(run_args(&["describe", "--data", "/nonexistent/x.csv"]).0, 2);
    }

    #[test]
    fn env_parsing() {
        assert_eq!(parse_env("1, 2,3,4,5,0,1.5,2").unwrap().get(6), 1.5);
        assert!(parse_env("1,2,3,4,5,0,1,9").is_err());
    }
}
