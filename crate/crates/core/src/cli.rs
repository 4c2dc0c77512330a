//! Command-line front end. Every command resolves its arguments into an
//! [`Invocation`], runs it into an output directory and records a
//! [`RunManifest`] from which the same files can be regenerated.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{self, DEFAULT_SEED};
use crate::plant::{simulate, ScenarioSpec};
use crate::signals::{gen_smooth_noise, SmoothNoiseSpec};
use crate::stats::{
    calibrate_significance, midpoint_derivative_correlation, verify_derivative_theorems, CorrelationEngine,
    DEFAULT_FLOOR,
};
use crate::tcv::{run_tcv, TcvOptions, DEFAULT_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INSTABILITY: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "faithless", version, about = "Control-loop simulations whose correlations hide their causes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario config and write its trace and correlations.
    Simulate(ConfigArgs),
    /// Regenerate a published table (1-9) and score it.
    Table(TableArgs),
    /// Point data for the capacitor figure.
    Figure1(Figure1Args),
    /// Check the zero-correlation properties of a signal and its derivative.
    VerifyTheorems(CommonArgs),
    /// Spread of the correlation between independent smooth signals.
    Calibrate(CalibrateArgs),
    /// Compare a scenario's causal graph with what its correlations suggest.
    Discover(DiscoverArgs),
    /// Test for the controlled variable.
    Tcv(TcvArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Base seed [default: FAITHLESS_SEED, else a fixed value].
    #[arg(long, env = "FAITHLESS_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Correlations below this magnitude count as zero.
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
}

impl CommonArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table number, 1-9.
    pub number: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    /// Sampling interval of the decimated panels, seconds.
    #[arg(long, default_value_t = 2.0)]
    pub interval: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub coherence_time: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Largest conditioning set in the skeleton search.
    #[arg(long, default_value_t = crate::causal::DEFAULT_MAX_COND)]
    pub max_cond: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TcvArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Input channel to disturb.
    #[arg(long, default_value = "D")]
    pub disturbance: String,
    /// Channels to test, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "P,O")]
    pub candidates: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Output directory [default: the manifest's directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A command with every default and seed resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Invocation {
    Simulate { scenario: ScenarioSpec, floor: f64 },
    Table { number: u32, seed: u64, floor: f64 },
    Figure1 { seed: u64, interval: f64 },
    VerifyTheorems { seed: u64 },
    Calibrate { coherence_time: f64, n_steps: usize, dt: f64, runs: usize, seed: u64 },
    Discover { scenario: ScenarioSpec, floor: f64, max_cond: usize },
    Tcv { scenario: ScenarioSpec, disturbance: String, candidates: Vec<String>, threshold: f64 },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Simulate { .. } => "simulate",
            Invocation::Table { .. } => "table",
            Invocation::Figure1 { .. } => "figure1",
            Invocation::VerifyTheorems { .. } => "verify-theorems",
            Invocation::Calibrate { .. } => "calibrate",
            Invocation::Discover { .. } => "discover",
            Invocation::Tcv { .. } => "tcv",
        }
    }

    fn seeds(&self) -> Vec<u64> {
        match self {
            Invocation::Simulate { scenario, .. }
            | Invocation::Discover { scenario, .. }
            | Invocation::Tcv { scenario, .. } => vec![scenario.seed],
            Invocation::Table { seed, .. }
            | Invocation::Figure1 { seed, .. }
            | Invocation::VerifyTheorems { seed }
            | Invocation::Calibrate { seed, .. } => vec![*seed],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub invocation: Invocation,
    pub seeds: Vec<u64>,
    pub version: String,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// What a finished command reports back.
#[derive(Debug)]
pub struct Outcome {
    pub outputs: Vec<String>,
    pub summary: String,
    pub exit_code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Instability { .. } => EXIT_INSTABILITY,
        _ => EXIT_VALIDATION,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
    let mut spec = ScenarioSpec::from_json(&text)
        .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    Ok(spec)
}

/// Turns parsed arguments into an invocation and its output directory.
pub fn resolve(cmd: &Command) -> Result<(Invocation, PathBuf)> {
    Ok(match cmd {
        Command::Simulate(a) => (
            Invocation::Simulate { scenario: load_config(&a.config, a.common.seed)?, floor: a.common.floor },
            a.common.out.clone(),
        ),
        Command::Table(a) => (
            Invocation::Table { number: a.number, seed: a.common.seed(), floor: a.common.floor },
            a.common.out.clone(),
        ),
        Command::Figure1(a) => (
            Invocation::Figure1 { seed: a.common.seed(), interval: a.interval },
            a.common.out.clone(),
        ),
        Command::VerifyTheorems(a) => (Invocation::VerifyTheorems { seed: a.seed() }, a.out.clone()),
        Command::Calibrate(a) => (
            Invocation::Calibrate {
                coherence_time: a.coherence_time,
                n_steps: a.n_steps,
                dt: a.dt,
                runs: a.runs,
                seed: a.common.seed(),
            },
            a.common.out.clone(),
        ),
        Command::Discover(a) => (
            Invocation::Discover {
                scenario: load_config(&a.config, a.common.seed)?,
                floor: a.common.floor,
                max_cond: a.max_cond,
            },
            a.common.out.clone(),
        ),
        Command::Tcv(a) => (
            Invocation::Tcv {
                scenario: load_config(&a.config, a.common.seed)?,
                disturbance: a.disturbance.clone(),
                candidates: a.candidates.clone(),
                threshold: a.threshold,
            },
            a.common.out.clone(),
        ),
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest)?;
            let dir = match &a.out {
                Some(d) => d.clone(),
                None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            (m.invocation, dir)
        }
    })
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.names.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut f = self.create(name)?;
        f.write_all(body.as_bytes())?;
        Ok(f.flush()?)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Checks everything that can be checked before any output is written.
pub fn validate(inv: &Invocation) -> Result<()> {
    match inv {
        Invocation::Simulate { scenario, .. } | Invocation::Discover { scenario, .. } | Invocation::Tcv { scenario, .. } => {
            scenario.validate()?
        }
        Invocation::Table { number, .. } if !(1..=9).contains(number) => {
            return Err(Error::invalid("table", format!("{number} is not a table number (1-9)")))
        }
        _ => {}
    }
    match inv {
        Invocation::Simulate { floor, .. } | Invocation::Table { floor, .. } | Invocation::Discover { floor, .. }
            if !(*floor > 0.0 && *floor < 1.0) =>
        {
            Err(Error::invalid("floor", format!("must be in (0, 1), got {floor}")))
        }
        _ => Ok(()),
    }
}

/// Runs `inv`, writing its files into `dir` (created if needed).
pub fn execute(inv: &Invocation, dir: &Path) -> Result<Outcome> {
    validate(inv)?;
    fs::create_dir_all(dir)?;
    let mut out = Outputs { dir, names: Vec::new() };
    let mut exit_code = EXIT_OK;
    let summary = match inv {
        Invocation::Simulate { scenario, floor } => {
            let trace = simulate(scenario)?;
            trace.write_csv(out.create("trace.csv")?)?;
            let engine = CorrelationEngine::from_trace(&trace, &[], *floor)?;
            engine.report().write_csv(out.create("correlations.csv")?)?;
            out.text("correlations.json", &engine.report().to_json())?;
            let mut s = format!("{} samples, {} channels\n", trace.len(), trace.names().count());
            if let Ok(r) = crate::stats::rejection_ratio(&trace) {
                s.push_str(&format!("rejection ratio {:.2}\n", r.value()));
            }
            s
        }
        Invocation::Table { number, seed, floor } => {
            let tables = experiments::run_table(*number, *seed, *floor)?;
            let mut f = out.create(&format!("table_{number}.csv"))?;
            let mut s = String::new();
            for (i, t) in tables.iter().enumerate() {
                t.write_csv(&mut f, i == 0)?;
                s.push_str(&format!("table {}: {}\n", t.id, verdict(t.pass())));
                for fail in t.failures() {
                    s.push_str(&format!("  outside tolerance: {fail}\n"));
                }
            }
            f.flush()?;
            if tables.iter().any(|t| !t.pass()) {
                exit_code = EXIT_TOLERANCE;
            }
            s
        }
        Invocation::Figure1 { seed, interval } => {
            let fig = experiments::figure1(*seed, *interval)?;
            for (name, header, cols) in &fig.panels {
                experiments::write_columns(out.create(&format!("{name}.csv"))?, header, cols)?;
            }
            let rows = [
                ("capacitance", fig.capacitance),
                ("sd_v", fig.sd_v),
                ("sd_i", fig.sd_i),
                ("interval", fig.interval),
                ("corr_dense", fig.corr_dense),
                ("corr_decimated", fig.corr_decimated),
                ("lag1_autocorr_decimated", fig.lag1_autocorr_decimated),
                ("mi_dense", fig.mi_dense),
                ("mi_decimated", fig.mi_decimated),
                ("mi_pointwise_dense", fig.mi_pointwise_dense),
                ("mi_pointwise_decimated", fig.mi_pointwise_decimated),
            ];
            let mut f = out.create("fig1_summary.csv")?;
            writeln!(f, "quantity,value")?;
            for (k, v) in rows {
                writeln!(f, "{k},{}", crate::plant::format_f64(v))?;
            }
            f.flush()?;
            format!(
                "corr(V,I) dense {:.4}, decimated {:.4}; MI dense {:.3} nats, decimated {:.4} nats\n",
                fig.corr_dense, fig.corr_decimated, fig.mi_dense, fig.mi_decimated
            )
        }
        Invocation::VerifyTheorems { seed } => {
            let w = gen_smooth_noise(&SmoothNoiseSpec {
                coherence_time: 1.0,
                sigma: 1.0,
                seed: *seed,
                duration: 1000.0,
                dt: 0.001,
            })?;
            let mut report = verify_derivative_theorems(&w)?;
            let n = 4000;
            let sine: Vec<f64> = (0..=n).map(|i| (i as f64 * 4.0 * std::f64::consts::TAU / n as f64).sin()).collect();
            let r = midpoint_derivative_correlation(&sine).unwrap_or(f64::NAN);
            report.checks.push(crate::stats::TheoremCheck {
                name: "sine_whole_periods".into(),
                value: r,
                tolerance: 1e-6,
                expected: 0.0,
                pass: r.abs() <= 1e-6,
            });
            let mut f = out.create("theorems.csv")?;
            writeln!(f, "check,value,expected,tolerance,verdict")?;
            let mut s = String::new();
            for c in &report.checks {
                writeln!(
                    f,
                    "{},{},{},{},{}",
                    c.name,
                    crate::plant::format_f64(c.value),
                    crate::plant::format_f64(c.expected),
                    crate::plant::format_f64(c.tolerance),
                    verdict(c.pass)
                )?;
                s.push_str(&format!("{} {} (value {:.3e}, tolerance {:.1e})\n", verdict(c.pass), c.name, c.value, c.tolerance));
            }
            f.flush()?;
            if !report.checks.iter().all(|c| c.pass) {
                exit_code = EXIT_TOLERANCE;
            }
            s
        }
        Invocation::Calibrate { coherence_time, n_steps, dt, runs, seed } => {
            let c = calibrate_significance(*coherence_time, *n_steps, *dt, *runs, *seed)?;
            out.text("calibration.json", &serde_json::to_string_pretty(&c)?)?;
            format!(
                "sd of null correlation {:.5} over {} runs; suggested floor {:.2}\n",
                c.std_of_null_correlation,
                c.n_runs,
                c.suggested_floor()
            )
        }
        Invocation::Discover { scenario, floor, max_cond } => {
            let trace = simulate(scenario)?;
            let d = experiments::discover(&trace, *floor, *max_cond)?;
            out.text("discovery.txt", &d.diagram)?;
            out.text("discovery.json", &serde_json::to_string_pretty(&d)?)?;
            d.diagram
        }
        Invocation::Tcv { scenario, disturbance, candidates, threshold } => {
            let names: Vec<&str> = candidates.iter().map(String::as_str).collect();
            let mut opts = TcvOptions::new(disturbance, &names);
            opts.threshold = *threshold;
            let report = run_tcv(scenario, &opts)?;
            out.text("tcv.json", &report.to_json())?;
            let v = report.verdict();
            out.text("tcv.txt", &v)?;
            v
        }
    };
    Ok(Outcome { outputs: out.names, summary, exit_code })
}

/// Executes and writes the manifest next to the outputs.
pub fn run_and_record(inv: &Invocation, dir: &Path) -> Result<Outcome> {
    let start = Instant::now();
    let outcome = execute(inv, dir)?;
    let manifest = RunManifest {
        invocation: inv.clone(),
        seeds: inv.seeds(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outcome.outputs.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        exit_code: outcome.exit_code,
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(outcome)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = resolve(&cli.command).and_then(|(inv, dir)| run_and_record(&inv, &dir));
    match result {
        Ok(o) => {
            print!("{}", o.summary);
            o.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
