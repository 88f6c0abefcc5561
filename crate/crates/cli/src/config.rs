//! JSON experiment configuration.
//!
//! One document describes a parameter point or an `n` ladder. Every field
//! except `channels` and `input` has a default, so small configs stay small.

use serde::{Deserialize, Serialize};

use wiretap_auth_core::adversary::{Action, AttackPlan, GameConfig, StrategyKind};
use wiretap_auth_core::asu::StinsonFamily;
use wiretap_auth_core::codebook::{Budgets, BuildParams};
use wiretap_auth_core::infotheory::{Channel, Distribution};
use wiretap_auth_core::protocol::{KeyPolicy, MessageSource, SharedKey};
use wiretap_auth_core::types::TypeP;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment id written to every result row; defaults to the command name.
    #[serde(default)]
    pub experiment: Option<String>,
    pub channels: Channels,
    pub input: InputSpec,
    #[serde(default)]
    pub hash: HashSpec,
    #[serde(default)]
    pub codebook: CodebookSpec,
    #[serde(default)]
    pub game: GameSpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: BudgetSpec,
    #[serde(default)]
    pub rates: RatesSpec,
    #[serde(default)]
    pub leakage: LeakageSpec,
    #[serde(default)]
    pub lemmas: LemmaSpec,
    /// Cap on transcript and per-trial attack records written per ladder point.
    #[serde(default = "default_transcripts")]
    pub transcripts: usize,
    /// Codebook file read by `verify-codebook` and `selftest`.
    #[serde(default)]
    pub codebook_file: Option<String>,
    /// Output directory when `--out` is not given.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_trials() -> u64 {
    1000
}

fn default_transcripts() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channels {
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<Vec<f64>>,
}

/// Either a distribution rounded to a type at every `n` of the ladder, or
/// explicit type counts per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    #[serde(default)]
    pub distribution: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<Vec<u32>>,
    #[serde(default)]
    pub counts: Option<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HashSpec {
    pub q: u64,
    pub s: u32,
}

impl Default for HashSpec {
    fn default() -> Self {
        HashSpec { q: 2, s: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    pub theta: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub max_error: Option<f64>,
    #[serde(default)]
    pub max_sd: Option<f64>,
    /// Seed of the random partition; defaults to the run seed.
    #[serde(default)]
    pub build_seed: Option<u64>,
}

fn default_omega() -> f64 {
    0.5
}

impl Default for CodebookSpec {
    fn default() -> Self {
        CodebookSpec {
            rows: 2,
            cols: 2,
            tau: 0.3,
            theta: 0.2,
            omega: 0.5,
            eps: None,
            max_error: None,
            max_sd: None,
            build_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ActionSpec {
    Type1 { session: usize, strategy: String },
    Type2 { after: usize, strategy: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedKey {
    /// Index of `k0` in the enumeration order of the hash key space.
    pub k0: u64,
    pub k1: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(default)]
    pub sessions: usize,
    /// Fixed messages cycled by session; uniform random when absent.
    #[serde(default)]
    pub messages: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    pub schedule: Vec<ActionSpec>,
    #[serde(default)]
    pub max_attacks: Option<usize>,
    /// Reuse one key for every trial instead of a fresh key per trial.
    #[serde(default)]
    pub fixed_key: Option<FixedKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default = "d_enumeration")]
    pub enumeration: u64,
    #[serde(default = "d_exhaustive")]
    pub exhaustive_output: u64,
    #[serde(default = "d_mc")]
    pub mc_trials: u64,
    /// Limit for key/message/output enumerations of the attack tables.
    #[serde(default = "d_oracle")]
    pub oracle: u64,
}

fn d_enumeration() -> u64 {
    1_000_000
}
fn d_exhaustive() -> u64 {
    1 << 16
}
fn d_mc() -> u64 {
    20_000
}
fn d_oracle() -> u64 {
    1 << 24
}

impl Default for BudgetSpec {
    fn default() -> Self {
        BudgetSpec {
            enumeration: d_enumeration(),
            exhaustive_output: d_exhaustive(),
            mc_trials: d_mc(),
            oracle: d_oracle(),
        }
    }
}

impl BudgetSpec {
    pub fn core(&self) -> Budgets {
        Budgets {
            enumeration: self.enumeration as u128,
            exhaustive_output: self.exhaustive_output as u128,
            mc_trials: self.mc_trials,
        }
    }

    /// Applies one `KEY=VALUE` override.
    pub fn set(&mut self, spec: &str) -> Result<(), Failure> {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("budget override `{spec}` is not KEY=VALUE")))?;
        let v: u64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("budget override `{spec}`: value is not an unsigned integer")))?;
        match k.trim() {
            "enumeration" => self.enumeration = v,
            "exhaustive_output" => self.exhaustive_output = v,
            "mc_trials" => self.mc_trials = v,
            "oracle" => self.oracle = v,
            other => return Err(Failure::Config(format!("unknown budget `{other}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RatesSpec {
    /// Backoffs δ for the rate `H(X|Z) - δ`.
    #[serde(default)]
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageSpec {
    /// Session messages; when absent the first `sessions` message indices.
    #[serde(default)]
    pub messages: Option<Vec<Vec<u32>>>,
    #[serde(default = "one")]
    pub sessions: usize,
}

fn one() -> usize {
    1
}

impl Default for LeakageSpec {
    fn default() -> Self {
        LeakageSpec {
            messages: None,
            sessions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSpec {
    pub eps: f64,
    pub trials: u64,
    /// Codewords per packing code.
    pub ell: usize,
    /// Partition classes.
    pub classes: usize,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        LemmaSpec {
            eps: 0.3,
            trials: 10_000,
            ell: 2,
            classes: 2,
        }
    }
}

/// One point of the ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub index: usize,
    pub type_p: TypeP,
}

impl Point {
    pub fn n(&self) -> u32 {
        self.type_p.n()
    }
}

fn cfg_err(e: impl core::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Failure::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without running an experiment.
    pub fn validate(&self) -> Result<(), Failure> {
        let (w1, w2) = self.channels()?;
        if w1.inputs() != w2.inputs() {
            return Err(Failure::Config(format!(
                "channels: w1 has {} inputs but w2 has {}",
                w1.inputs(),
                w2.inputs()
            )));
        }
        for p in self.points()? {
            if p.type_p.alphabet() != w1.inputs() {
                return Err(Failure::Config(format!(
                    "input: type alphabet {} does not match channel inputs {}",
                    p.type_p.alphabet(),
                    w1.inputs()
                )));
            }
        }
        if self.trials == 0 {
            return Err(Failure::Config("trials: must be positive".into()));
        }
        if self.hash.s == 0 || self.hash.q < 2 {
            return Err(Failure::Config("hash: need q >= 2 and s >= 1".into()));
        }
        self.plan()?;
        Ok(())
    }

    pub fn experiment_id(&self, command: &str) -> String {
        self.experiment.clone().unwrap_or_else(|| command.to_string())
    }

    pub fn channels(&self) -> Result<(Channel, Channel), Failure> {
        let w1 = Channel::new(self.channels.w1.clone()).map_err(|e| Failure::Config(format!("channels.w1: {e}")))?;
        let w2 = Channel::new(self.channels.w2.clone()).map_err(|e| Failure::Config(format!("channels.w2: {e}")))?;
        Ok((w1, w2))
    }

    /// The input distribution used for rate computations.
    pub fn input_distribution(&self) -> Result<Distribution, Failure> {
        match (&self.input.distribution, &self.input.counts) {
            (Some(p), _) => {
                Distribution::new(p.clone()).map_err(|e| Failure::Config(format!("input.distribution: {e}")))
            }
            (None, Some(c)) => {
                let first = c.first().ok_or_else(|| Failure::Config("input.counts: empty".into()))?;
                Ok(TypeP::new(first.clone()).map_err(cfg_err)?.distribution())
            }
            (None, None) => Err(Failure::Config("input: need `distribution` or `counts`".into())),
        }
    }

    pub fn points(&self) -> Result<Vec<Point>, Failure> {
        let types = match (&self.input.distribution, &self.input.n, &self.input.counts) {
            (Some(_), Some(ns), None) => {
                let p = self.input_distribution()?;
                ns.iter()
                    .map(|&n| TypeP::from_distribution(&p, n).map_err(|e| Failure::Config(format!("input.n={n}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?
            }
            (None, None, Some(cs)) => cs
                .iter()
                .map(|c| TypeP::new(c.clone()).map_err(|e| Failure::Config(format!("input.counts: {e}"))))
                .collect::<Result<Vec<_>, _>>()?,
            _ => {
                return Err(Failure::Config(
                    "input: give either `distribution` with `n`, or `counts`".into(),
                ))
            }
        };
        if types.is_empty() {
            return Err(Failure::Config("input: the ladder is empty".into()));
        }
        Ok(types
            .into_iter()
            .enumerate()
            .map(|(index, type_p)| Point { index, type_p })
            .collect())
    }

    pub fn family(&self) -> Result<StinsonFamily, Failure> {
        StinsonFamily::new(self.hash.q, self.hash.s).map_err(|e| Failure::Config(format!("hash: {e}")))
    }

    pub fn build_params(&self, point: &Point) -> Result<BuildParams, Failure> {
        let (w1, w2) = self.channels()?;
        let c = &self.codebook;
        Ok(BuildParams {
            type_p: point.type_p.clone(),
            w1,
            w2,
            rows: c.rows,
            cols: c.cols,
            tau: c.tau,
            theta: c.theta,
            omega: c.omega,
            eps: c.eps,
            seed: c.build_seed.unwrap_or(self.seed),
            budgets: self.budgets.core(),
            max_error: c.max_error,
            max_sd: c.max_sd,
        })
    }

    pub fn plan(&self) -> Result<AttackPlan, Failure> {
        let strategy = |s: &str| {
            StrategyKind::from_name(s).ok_or_else(|| {
                let known: Vec<&str> = StrategyKind::ALL.iter().map(|k| k.name()).collect();
                Failure::Config(format!(
                    "game.schedule: unknown strategy `{s}` (known: {})",
                    known.join(", ")
                ))
            })
        };
        let schedule = self
            .game
            .schedule
            .iter()
            .map(|a| {
                Ok(match a {
                    ActionSpec::Type1 { session, strategy: s } => Action::Type1 {
                        session: *session,
                        strategy: strategy(s)?,
                    },
                    ActionSpec::Type2 { after, strategy: s } => Action::Type2 {
                        after: *after,
                        strategy: strategy(s)?,
                    },
                })
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let max_attacks = self.game.max_attacks.unwrap_or(schedule.len().max(1));
        Ok(AttackPlan { schedule, max_attacks })
    }

    pub fn game_config(&self) -> Result<GameConfig, Failure> {
        let fam = self.family()?;
        let keys = match &self.game.fixed_key {
            None => KeyPolicy::Fresh,
            Some(k) => {
                if k.k0 as u128 >= fam.key_space() {
                    return Err(Failure::Config(format!("game.fixed_key.k0: {} out of range", k.k0)));
                }
                KeyPolicy::Fixed(SharedKey {
                    k0: fam.key_from_index(k.k0),
                    k1: k.k1,
                })
            }
        };
        let cfg = GameConfig {
            sessions: self.game.sessions,
            messages: match &self.game.messages {
                None => MessageSource::Random,
                Some(list) => MessageSource::Fixed(list.clone()),
            },
            plan: self.plan()?,
            keys,
            trials: self.trials,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| Failure::Config(format!("game: {e}")))?;
        cfg.messages
            .validate(&fam)
            .map_err(|e| Failure::Config(format!("game.messages: {e}")))?;
        Ok(cfg)
    }
}
