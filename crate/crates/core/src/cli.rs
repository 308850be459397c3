//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{AnalysisConfig, Analyzer};
use crate::datacard::{default_card, DataCard, MostParameter};
use crate::error::{Error, Result};
use crate::io::{self, read_file, write_file};
use crate::report::{render, ReportFormat};
use crate::rules::{default_rules, parse_rules, RuleSet, DEFAULT_DWELL};
use crate::segmentation::{
    default_matrix, DistanceBands, TransitionMatrix, DEFAULT_IDLE_THRESHOLD, DEFAULT_STEP_LENGTH,
    DEFAULT_WITHIN_REACH,
};
use crate::synth::{self, SynthConfig, DEFAULT_FRAME_RATE, DEFAULT_NOISE_STD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mostwork", version, about = "MOST work measurement from motion-capture traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a trace into MOST motions and compare standard with actual time.
    Analyze(AnalyzeArgs),
    /// Generate trace, gesture and collision files from a task script.
    Synth(SynthArgs),
    /// Parse a rule file and report rule counts and overlapping postures.
    RulesCheck(RulesCheckArgs),
    /// Print the data card in its file format.
    Card(CardArgs),
    /// Print the posture transition matrix in its file format.
    Matrix(MatrixArgs),
    /// Print a random task script.
    RandomScript(RandomScriptArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Motion trace file.
    pub trace: PathBuf,
    /// Glove gesture stream.
    #[arg(long)]
    pub gestures: Option<PathBuf>,
    /// Collision event stream.
    #[arg(long)]
    pub collisions: Option<PathBuf>,
    /// Rule file; the built-in rules when absent.
    #[arg(long)]
    pub rules: Option<PathBuf>,
    /// Data card file; the built-in card when absent.
    #[arg(long)]
    pub card: Option<PathBuf>,
    /// Transition matrix file; the built-in matrix when absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Frames a posture must persist before a change is accepted.
    #[arg(long, default_value_t = DEFAULT_DWELL, value_parser = clap::value_parser!(usize))]
    pub dwell: usize,
    /// Flexion at or above which a finger counts as closed; overrides the rule file.
    #[arg(long)]
    pub gesture_threshold: Option<f64>,
    /// Step length for action-distance bands, meters.
    #[arg(long, default_value_t = DEFAULT_STEP_LENGTH)]
    pub step_length: f64,
    /// Trunk travel still counted as within reach, meters.
    #[arg(long, default_value_t = DEFAULT_WITHIN_REACH)]
    pub within_reach: f64,
    /// Seconds of "No motion" before a segment is flagged for review.
    #[arg(long, default_value_t = DEFAULT_IDLE_THRESHOLD)]
    pub idle_threshold: f64,
    /// table, csv or json.
    #[arg(long, default_value = "table")]
    pub format: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Task script file.
    pub script: PathBuf,
    /// Directory for `<name>.trace`, `<name>.gestures` and `<name>.collisions`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Base name of the output files; the script's file stem when absent.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frames per second.
    #[arg(long, default_value_t = DEFAULT_FRAME_RATE)]
    pub rate: f64,
    /// Standard deviation of marker noise, meters.
    #[arg(long, default_value_t = DEFAULT_NOISE_STD)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct RulesCheckArgs {
    /// Rule file; the built-in rules when absent.
    pub rules: Option<PathBuf>,
    /// Transition matrix to check posture coverage against.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CardArgs {
    /// Card file to validate and print; the built-in card when absent.
    #[arg(long)]
    pub card: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Matrix file to validate and print; the built-in matrix when absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandomScriptArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of steps.
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
}

fn load<T>(path: &Option<PathBuf>, default: impl FnOnce() -> T, parse: impl FnOnce(&[u8]) -> Result<T>) -> Result<T> {
    match path {
        Some(p) => parse(&read_file(p)?).map_err(|e| with_path(p, e)),
        None => Ok(default()),
    }
}

/// Prefixes parse and validation errors with the file they came from.
fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { location, message } => Error::Parse { location, message: format!("{}: {message}", path.display()) },
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn load_rules(path: &Option<PathBuf>) -> Result<RuleSet> {
    load(path, default_rules, parse_rules)
}

fn load_matrix(path: &Option<PathBuf>) -> Result<TransitionMatrix> {
    load(path, default_matrix, TransitionMatrix::parse)
}

fn load_card(path: &Option<PathBuf>) -> Result<DataCard> {
    load(path, default_card, io::load_datacard)
}

fn emit(out: &mut dyn Write, text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let analyzer = Analyzer {
        config: AnalysisConfig {
            dwell: args.dwell,
            gesture_threshold: args.gesture_threshold,
            bands: DistanceBands { step_length: args.step_length, within_reach: args.within_reach },
            idle_threshold: args.idle_threshold,
        },
        rules: load_rules(&args.rules)?,
        card: load_card(&args.card)?,
        matrix: load_matrix(&args.matrix)?,
    };
    analyzer.config.validate()?;
    let trace = io::parse_trace(&read_file(&args.trace)?).map_err(|e| with_path(&args.trace, e))?;
    let gestures = load(&args.gestures, Vec::new, io::parse_gestures)?;
    let collisions = load(&args.collisions, Vec::new, io::parse_collisions)?;
    let report = analyzer.analyze(&trace, &gestures, &collisions)?;
    emit(out, &render(&report, args.format)?, args.output.as_deref())
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let script = synth::parse_script(&read_file(&args.script)?).map_err(|e| with_path(&args.script, e))?;
    let config = SynthConfig { frame_rate: args.rate, noise_std: args.noise, seed: args.seed };
    let result = synth::synthesize(&script, &config).map_err(|e| with_path(&args.script, e))?;
    let name = match &args.name {
        Some(n) => n.clone(),
        None => args
            .script
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "synth".into()),
    };
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|source| Error::Io { path: args.out_dir.display().to_string(), source })?;
    let files = [
        ("trace", io::write_trace(&result.trace)),
        ("gestures", io::write_gestures(&result.gestures)),
        ("collisions", io::write_collisions(&result.collisions)),
    ];
    let mut summary = String::new();
    for (ext, text) in files {
        let path = args.out_dir.join(format!("{name}.{ext}"));
        write_file(&path, text.as_bytes())?;
        summary.push_str(&format!("wrote {}\n", path.display()));
    }
    summary.push_str(&format!(
        "{} frames, {} gesture samples, {} collision events\n",
        result.trace.len(),
        result.gestures.len(),
        result.collisions.len()
    ));
    emit(out, &summary, None)
}

fn cmd_rules_check(args: &RulesCheckArgs, out: &mut dyn Write) -> Result<()> {
    let rules = load_rules(&args.rules)?;
    let matrix = load_matrix(&args.matrix)?;
    let mut text = format!("gesture threshold: {}\n", rules.gesture_threshold);
    text.push_str(&format!("gestures: {}\n", rules.gestures.len()));
    text.push_str(&format!("posture rules: {}\n", rules.postures.len()));
    for group in [MostParameter::G, MostParameter::P] {
        let n = rules.hand_rules.iter().filter(|r| r.group == group).count();
        text.push_str(&format!("hand rules {group}: {n}\n"));
    }
    for (a, b) in rules.overlapping_postures() {
        text.push_str(&format!(
            "warning: posture rules `{}` and `{}` overlap; `{}` wins by file order\n",
            a.label, b.label, a.label
        ));
    }
    for label in matrix.missing_postures(&rules.posture_labels()) {
        text.push_str(&format!("warning: posture `{label}` is not in the transition matrix\n"));
    }
    emit(out, &text, None)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::RulesCheck(a) => cmd_rules_check(a, out),
        Command::Card(a) => load_card(&a.card).and_then(|c| emit(out, &io::write_datacard(&c), None)),
        Command::Matrix(a) => load_matrix(&a.matrix).and_then(|m| emit(out, &m.write(), None)),
        Command::RandomScript(a) => {
            emit(out, &synth::write_script(&synth::random_script(a.seed, a.steps as usize)), None)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Invariant(_) => EXIT_INTERNAL,
                _ => EXIT_INPUT,
            }
        }
    }
}
