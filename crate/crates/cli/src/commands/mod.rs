//! Experiment drivers. Each command turns the effective configuration into
//! result rows and artefact files, then [`run`] writes `results.csv` and
//! `manifest.json` next to them.

mod attack;
mod build;
mod completeness;
mod leakage;
mod lemmas;
mod rates;
pub mod selftest;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use wiretap_auth_core::codebook::Codebook;
use wiretap_auth_core::stats::Estimate;

use crate::config::{ExperimentConfig, Point};
use crate::formats::{self, FileDigest, Manifest, ResultRow, SCHEMA_VERSION};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Build,
    VerifyCodebook,
    Completeness,
    Attack,
    Leakage,
    Lemmas,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Rates,
        Command::Build,
        Command::VerifyCodebook,
        Command::Completeness,
        Command::Attack,
        Command::Leakage,
        Command::Lemmas,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Build => "build",
            Command::VerifyCodebook => "verify-codebook",
            Command::Completeness => "completeness",
            Command::Attack => "attack",
            Command::Leakage => "leakage",
            Command::Lemmas => "lemmas",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Output directory; falls back to the config's `output`, then `results`.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// `KEY=VALUE` budget overrides, applied in order.
    pub budget_overrides: Vec<String>,
    /// Codebook file for `verify-codebook` and `selftest`; overrides the config.
    pub codebook: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<String>,
    pub manifest: Manifest,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Rows, artefacts and failed checks produced by one command.
#[derive(Debug, Default)]
pub(crate) struct Output {
    pub rows: Vec<ResultRow>,
    pub files: Vec<(String, Vec<u8>)>,
    pub failures: Vec<String>,
}

/// Parameter point columns of a result row.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PointInfo {
    pub n: u32,
    pub rows: usize,
    pub cols: usize,
    pub eps: Option<f64>,
}

impl PointInfo {
    pub fn of(cb: &Codebook) -> Self {
        PointInfo {
            n: cb.n() as u32,
            rows: cb.rows(),
            cols: cb.cols(),
            eps: Some(cb.eps()),
        }
    }
}

/// Shared state of a run.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub experiment: String,
    pub config_hash: String,
    pub pool: rayon::ThreadPool,
    pub w1: String,
    pub w2: String,
    pub codebook: Option<PathBuf>,
}

impl Ctx<'_> {
    pub fn row(&self, p: PointInfo, metric: impl Into<String>, value: f64, low: f64, high: f64) -> ResultRow {
        ResultRow {
            experiment: self.experiment.clone(),
            n: p.n,
            w1: self.w1.clone(),
            w2: self.w2.clone(),
            rows: p.rows,
            cols: p.cols,
            q: self.cfg.hash.q,
            s: self.cfg.hash.s,
            eps: p.eps,
            metric: metric.into(),
            value,
            low,
            high,
            seed: self.cfg.seed,
            config_hash: self.config_hash.clone(),
        }
    }

    /// Row with a degenerate interval.
    pub fn point(&self, p: PointInfo, metric: impl Into<String>, value: f64) -> ResultRow {
        self.row(p, metric, value, value, value)
    }

    pub fn estimate(&self, p: PointInfo, metric: impl Into<String>, e: &Estimate) -> ResultRow {
        self.row(p, metric, e.value, e.low, e.high)
    }

    pub fn flag(&self, p: PointInfo, metric: impl Into<String>, b: bool) -> ResultRow {
        self.point(p, metric, if b { 1.0 } else { 0.0 })
    }

    /// Ladder point info before a codebook exists.
    pub fn info(&self, point: &Point) -> PointInfo {
        PointInfo {
            n: point.n(),
            rows: self.cfg.codebook.rows,
            cols: self.cfg.codebook.cols,
            eps: self.cfg.codebook.eps,
        }
    }

    /// Builds the codebook of a ladder point, naming the point on failure.
    pub fn build(&self, point: &Point) -> Result<Codebook, Failure> {
        let bp = self.cfg.build_params(point)?;
        wiretap_auth_core::codebook::build_codebook(&bp).map_err(|e| at_point(point, e))
    }
}

/// Prefixes a core error with the ladder point it came from.
pub(crate) fn at_point(point: &Point, e: wiretap_auth_core::Error) -> Failure {
    match Failure::from(e) {
        Failure::Config(m) => Failure::Config(format!("n={}: {m}", point.n())),
        Failure::Experiment(m) => Failure::Experiment(format!("n={}: {m}", point.n())),
    }
}

fn selftest_config() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{"channels":{"w1":[[1,0],[0,1]],"w2":[[0.5,0.5],[0.5,0.5]]},"input":{"counts":[[3,3]]}}"#,
    )
    .expect("built-in selftest config is valid")
}

/// Applies the command-line overrides to `cfg`.
pub fn effective_config(cfg: ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig, Failure> {
    let mut cfg = cfg;
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    for o in &opts.budget_overrides {
        cfg.budgets.set(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `cmd` and writes its files. Failed checks are reported in the
/// summary (and the manifest); errors that stop the run are returned.
pub fn run(cmd: Command, cfg: Option<ExperimentConfig>, opts: &RunOptions) -> Result<RunSummary, Failure> {
    let cfg = match (cfg, cmd) {
        (Some(c), _) => c,
        (None, Command::Selftest) => selftest_config(),
        (None, Command::VerifyCodebook) if opts.codebook.is_some() => selftest_config(),
        (None, _) => return Err(Failure::Config(format!("`{}` needs --config", cmd.name()))),
    };
    let cfg = effective_config(cfg, opts)?;
    let cfg_json = serde_json::to_vec(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
    let (w1, w2) = cfg.channels()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Failure::Experiment(format!("thread pool: {e}")))?;
    let ctx = Ctx {
        cfg: &cfg,
        experiment: cfg.experiment_id(cmd.name()),
        config_hash: formats::sha256_hex(&cfg_json),
        pool,
        w1: formats::channel_label(&w1),
        w2: formats::channel_label(&w2),
        codebook: opts
            .codebook
            .clone()
            .or_else(|| cfg.codebook_file.as_ref().map(PathBuf::from)),
    };
    let out = match cmd {
        Command::Rates => rates::run(&ctx)?,
        Command::Build => build::run(&ctx)?,
        Command::VerifyCodebook => verify::run(&ctx)?,
        Command::Completeness => completeness::run(&ctx)?,
        Command::Attack => attack::run(&ctx)?,
        Command::Leakage => leakage::run(&ctx)?,
        Command::Lemmas => lemmas::run(&ctx)?,
        Command::Selftest => selftest::run(&ctx)?,
    };
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    write_outputs(&dir, cmd, &ctx, out)
}

fn write_outputs(dir: &Path, cmd: Command, ctx: &Ctx<'_>, out: Output) -> Result<RunSummary, Failure> {
    fs::create_dir_all(dir)?;
    let csv = formats::write_csv(&out.rows)?;
    let mut files = vec![("results.csv".to_string(), csv)];
    files.extend(out.files);
    let mut digests = Vec::new();
    for (name, bytes) in &files {
        fs::write(dir.join(name), bytes)?;
        digests.push(FileDigest {
            name: name.clone(),
            sha256: formats::sha256_hex(bytes),
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: wiretap_auth_core::VERSION.to_string(),
        command: cmd.name().to_string(),
        experiment: ctx.experiment.clone(),
        seed: ctx.cfg.seed,
        config_sha256: ctx.config_hash.clone(),
        config: serde_json::to_value(ctx.cfg).map_err(|e| Failure::Experiment(e.to_string()))?,
        rows: out.rows.len(),
        files: digests,
        failures: out.failures.clone(),
    };
    let mut m = serde_json::to_vec_pretty(&manifest).map_err(|e| Failure::Experiment(e.to_string()))?;
    m.push(b'\n');
    fs::write(dir.join("manifest.json"), m)?;
    Ok(RunSummary {
        out_dir: dir.to_path_buf(),
        rows: out.rows,
        failures: out.failures,
        manifest,
    })
}
