use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use qpo_core::cpo::{MAX_REL_TOL, MIN_REL_TOL};
use qpo_core::schedule::ScheduleDocument;
use qpo_core::transition::MAX_N;
use qpo_core::{make_cubic_schedule, FrequencySchedule, OscillatorVariant};
use serde::Serialize;

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// `cubic`, `constant`, or a path to a JSON schedule document. A file
    /// overrides --t0, --tf, --omega0 and --omegaf.
    #[arg(long, default_value = "cubic")]
    pub schedule: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub tf: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub omega0: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub omegaf: f64,
    /// `tt` (transitionless) or `adiabatic`.
    #[arg(long, default_value = "tt")]
    pub variant: OscillatorVariant,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Number of output samples, endpoints included.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Largest level in transition tables.
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    /// Output file (a directory for `figures`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Bad input rather than a numerical failure; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub schedule: FrequencySchedule,
    pub schedule_source: String,
    pub variant: OscillatorVariant,
    pub rel_tol: f64,
    pub n_output: usize,
    pub n_max: usize,
    pub output_path: PathBuf,
}

impl RunConfig {
    pub fn new(command: &'static str, args: &CommonArgs, default_out: &str) -> Result<Self, ConfigError> {
        Self::build(command, args, default_out).map_err(ConfigError)
    }

    fn build(command: &'static str, args: &CommonArgs, default_out: &str) -> anyhow::Result<Self> {
        if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&args.rel_tol) {
            bail!("--rel-tol {} outside [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}]", args.rel_tol);
        }
        if args.samples < 2 {
            bail!("--samples must be at least 2");
        }
        if args.n_max > MAX_N {
            bail!("--n-max {} exceeds {MAX_N}", args.n_max);
        }
        Ok(Self {
            command,
            schedule: schedule_from_args(args)?,
            schedule_source: args.schedule.clone(),
            variant: args.variant,
            rel_tol: args.rel_tol,
            n_output: args.samples,
            n_max: args.n_max,
            output_path: args.out.clone().unwrap_or_else(|| PathBuf::from(default_out)),
        })
    }

    /// Same settings with a different schedule and output path.
    pub fn with_schedule(&self, schedule: FrequencySchedule, output_path: PathBuf) -> Self {
        Self {
            schedule,
            output_path,
            ..self.clone()
        }
    }

    pub fn is_cubic_default(&self) -> bool {
        self.schedule_source == "cubic"
    }
}

fn schedule_from_args(args: &CommonArgs) -> anyhow::Result<FrequencySchedule> {
    let s = match args.schedule.as_str() {
        "cubic" => make_cubic_schedule(args.t0, args.tf, args.omega0, args.omegaf)?,
        "constant" => FrequencySchedule::constant(args.t0, args.tf, args.omega0)?,
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading schedule file {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing schedule file {path}"))?
        }
    };
    Ok(s)
}

#[derive(Serialize)]
struct Metadata<'a> {
    command: &'a str,
    schedule: ScheduleDocument,
    schedule_source: &'a str,
    variant: OscillatorVariant,
    rel_tol: f64,
    samples: usize,
    n_max: usize,
    output: String,
    residuals: &'a BTreeMap<String, f64>,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `<out>.meta.json` with the configuration and residuals.
pub fn write_sidecar(cfg: &RunConfig, residuals: &BTreeMap<String, f64>) -> anyhow::Result<()> {
    let meta = Metadata {
        command: cfg.command,
        schedule: cfg.schedule.to_document(),
        schedule_source: &cfg.schedule_source,
        variant: cfg.variant,
        rel_tol: cfg.rel_tol,
        samples: cfg.n_output,
        n_max: cfg.n_max,
        output: cfg.output_path.display().to_string(),
        residuals,
    };
    let path = sidecar_path(&cfg.output_path);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
