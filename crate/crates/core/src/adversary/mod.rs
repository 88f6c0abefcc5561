//! The attack game: honest sessions interleaved with substitution (Type I) and
//! impersonation (Type II) attacks, a registry of concrete strategies, and the
//! coupled pair of games used for the col/mis accounting.
//!
//! Each trial runs two games on identical generator streams. In the real game
//! Bob verifies every attack as usual. In the modified game Bob's decision on a
//! substitution is just whether the forged message has the same tag as the
//! original one; every substitution that the real verifier would have accepted
//! despite distinct tags is recorded as a mis event. Both games stop at the
//! first success.

mod leakage;
mod oracle;

pub use leakage::{check_lemma1_on_leakage, key_leakage, key_leakage_exact, LeakageReport};
pub use oracle::{optimal_type2, OracleResult, OracleTables};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::asu::{tag_table, Message};
use crate::error::{invalid, Error, Result};
use crate::infotheory::{hamming, sample_word};
use crate::protocol::{KeyPolicy, MessageSource, ProtocolInstance, SharedKey, TrialRng};
use crate::rng::SeedTree;
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    /// Type I: a uniformly random different message.
    RandomSubstitution,
    /// Type I: the partner message with the most colliding keys.
    AdversarialPair,
    /// Type II: random message, channel output of a random codeword.
    RandomInjection,
    /// Type II: replays an observed message with the output of the codeword nearest to its `z`.
    ReplayZ,
    /// Type II: a random word snapped to the nearest codeword, sent through `W1`.
    NearestCodeword,
    /// Type II: the exact maximiser under the key posterior (tiny parameters only).
    Oracle,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::RandomSubstitution,
        StrategyKind::AdversarialPair,
        StrategyKind::RandomInjection,
        StrategyKind::ReplayZ,
        StrategyKind::NearestCodeword,
        StrategyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::RandomSubstitution => "random-substitution",
            StrategyKind::AdversarialPair => "adversarial-pair",
            StrategyKind::RandomInjection => "random-injection",
            StrategyKind::ReplayZ => "replay-z",
            StrategyKind::NearestCodeword => "nearest-codeword",
            StrategyKind::Oracle => "oracle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_substitution(self) -> bool {
        matches!(self, StrategyKind::RandomSubstitution | StrategyKind::AdversarialPair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Substitute the message of honest session `session`.
    Type1 { session: usize, strategy: StrategyKind },
    /// Inject once `after` honest sessions have completed.
    Type2 { after: usize, strategy: StrategyKind },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackPlan {
    pub schedule: Vec<Action>,
    pub max_attacks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewEvent {
    Session {
        m: Message,
        m_received: Message,
        z: Vec<u8>,
        accepted: bool,
    },
    Injection {
        m: Message,
        y: Vec<u8>,
        accepted: bool,
    },
}

/// Everything the adversary has seen, in arrival order. Its private
/// randomness is the trial's adversary stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AdversaryView {
    pub events: Vec<ViewEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    Type1,
    Type2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackRecord {
    pub kind: AttackKind,
    /// Position in the schedule.
    pub action: usize,
    pub strategy: StrategyKind,
    pub success: bool,
    pub tag_collision: bool,
    pub mis_event: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttackOutcome {
    pub attacks: Vec<AttackRecord>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameConfig {
    /// Number of honest sessions `ν`.
    pub sessions: usize,
    pub messages: MessageSource,
    pub plan: AttackPlan,
    pub keys: KeyPolicy,
    pub trials: u64,
    pub seed: u64,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let plan = &self.plan;
        if plan.max_attacks == 0 {
            return Err(invalid("max_attacks", "must be at least 1"));
        }
        if plan.schedule.len() > plan.max_attacks {
            return Err(invalid(
                "schedule",
                format!(
                    "{} attacks exceed max_attacks={}",
                    plan.schedule.len(),
                    plan.max_attacks
                ),
            ));
        }
        let mut hit = vec![false; self.sessions];
        for a in &plan.schedule {
            match *a {
                Action::Type1 { session, strategy } => {
                    if !strategy.is_substitution() {
                        return Err(invalid(
                            "schedule",
                            format!("{} is not a substitution strategy", strategy.name()),
                        ));
                    }
                    if session >= self.sessions {
                        return Err(invalid("schedule", format!("session {session} out of range")));
                    }
                    if hit[session] {
                        return Err(invalid("schedule", format!("session {session} attacked twice")));
                    }
                    hit[session] = true;
                }
                Action::Type2 { after, strategy } => {
                    if strategy.is_substitution() {
                        return Err(invalid(
                            "schedule",
                            format!("{} is not an injection strategy", strategy.name()),
                        ));
                    }
                    if after > self.sessions {
                        return Err(invalid(
                            "schedule",
                            format!("injection after {after} sessions out of range"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn uses(&self, kind: StrategyKind) -> bool {
        self.plan.schedule.iter().any(|a| match *a {
            Action::Type1 { strategy, .. } | Action::Type2 { strategy, .. } => strategy == kind,
        })
    }
}

/// Precomputed public knowledge shared by all trials of a game.
#[derive(Debug, Clone)]
pub struct AttackContext<'a> {
    pub inst: &'a ProtocolInstance,
    /// For each message index, the partner with the most colliding keys.
    partners: Option<Vec<u64>>,
    oracle: Option<OracleTables>,
    oracle_empty: Option<OracleResult>,
}

impl<'a> AttackContext<'a> {
    /// Builds the tables needed by the strategies in `cfg`.
    pub fn new(inst: &'a ProtocolInstance, cfg: &GameConfig, budget: u128) -> Result<Self> {
        cfg.validate()?;
        cfg.messages.validate(inst.family())?;
        let partners = if cfg.uses(StrategyKind::AdversarialPair) {
            Some(collision_partners(inst, budget)?)
        } else {
            None
        };
        let (oracle, oracle_empty) = if cfg.uses(StrategyKind::Oracle) {
            let t = OracleTables::new(inst, budget)?;
            let empty = optimal_type2(&t, inst, &AdversaryView::default())?;
            (Some(t), Some(empty))
        } else {
            (None, None)
        };
        Ok(AttackContext {
            inst,
            partners,
            oracle,
            oracle_empty,
        })
    }

    fn substitute(&self, kind: StrategyKind, m: &[u32], rng: &mut impl Rng) -> Result<Message> {
        let fam = self.inst.family();
        match kind {
            StrategyKind::RandomSubstitution => loop {
                let c = fam.random_message(rng);
                if c != m {
                    return Ok(c);
                }
            },
            StrategyKind::AdversarialPair => {
                let p = self
                    .partners
                    .as_ref()
                    .ok_or_else(|| Error::Contract("partner table missing".into()))?;
                Ok(fam.message_from_index(p[fam.message_index(m) as usize]))
            }
            _ => Err(Error::Contract(format!("{} cannot substitute", kind.name()))),
        }
    }

    fn inject(&self, kind: StrategyKind, view: &AdversaryView, rng: &mut impl Rng) -> Result<(Message, Vec<u8>)> {
        let inst = self.inst;
        let fam = inst.family();
        let cb = inst.codebook();
        let all = cb.all_codewords();
        match kind {
            StrategyKind::RandomInjection => Ok(random_injection(inst, rng)),
            StrategyKind::ReplayZ => {
                let last = view.events.iter().rev().find_map(|e| match e {
                    ViewEvent::Session { m, z, .. } => Some((m, z)),
                    _ => None,
                });
                match last {
                    Some((m, z)) => {
                        let x = nearest(&all, z);
                        Ok((m.clone(), sample_word(x, inst.w1(), rng)))
                    }
                    None => Ok(random_injection(inst, rng)),
                }
            }
            StrategyKind::NearestCodeword => {
                let m = fam.random_message(rng);
                let k = inst.codebook().params().type_p.alphabet();
                let target: Vec<u8> = (0..cb.n()).map(|_| rng.gen_range(0..k) as u8).collect();
                let x = nearest(&all, &target);
                Ok((m, sample_word(x, inst.w1(), rng)))
            }
            StrategyKind::Oracle => {
                let t = self
                    .oracle
                    .as_ref()
                    .ok_or_else(|| Error::Contract("oracle tables missing".into()))?;
                let best = if view.events.is_empty() {
                    self.oracle_empty.clone().expect("computed with the tables")
                } else {
                    optimal_type2(t, inst, view)?
                };
                Ok((best.m_hat, best.y_hat))
            }
            _ => Err(Error::Contract(format!("{} cannot inject", kind.name()))),
        }
    }
}

fn random_injection(inst: &ProtocolInstance, rng: &mut impl Rng) -> (Message, Vec<u8>) {
    let m = inst.family().random_message(rng);
    let all = inst.codebook().all_codewords();
    let x = all[rng.gen_range(0..all.len())];
    (m, sample_word(x, inst.w1(), rng))
}

/// First codeword at minimum Hamming distance.
fn nearest<'c>(all: &[&'c [u8]], w: &[u8]) -> &'c [u8] {
    let mut best = all[0];
    let mut bd = usize::MAX;
    for &c in all {
        let d = hamming(c, w);
        if d < bd {
            bd = d;
            best = c;
        }
    }
    best
}

/// For every message the distinct partner maximising the number of keys with
/// equal tags; ties go to the smallest index.
pub fn collision_partners(inst: &ProtocolInstance, budget: u128) -> Result<Vec<u64>> {
    let fam = inst.family();
    let nm = fam.message_space();
    let nk = fam.key_space();
    let needed = nm.saturating_mul(nm).saturating_mul(nk);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "collision partner search",
            needed,
            limit: budget,
        });
    }
    let table = tag_table(fam, budget)?;
    let (nm, nk) = (nm as usize, nk as usize);
    Ok((0..nm)
        .map(|m| {
            let mut best = (0usize, usize::MAX);
            for c in (0..nm).filter(|&c| c != m) {
                let count = (0..nk).filter(|&k| table[k * nm + m] == table[k * nm + c]).count();
                if best.1 == usize::MAX || count > best.0 {
                    best = (count, c);
                }
            }
            best.1 as u64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Real,
    Modified,
}

/// Plays one game with the given key on (a clone of) the trial streams.
fn play(
    ctx: &AttackContext<'_>,
    cfg: &GameConfig,
    key: &SharedKey,
    mut rngs: TrialRng,
    mode: Mode,
) -> Result<(AttackOutcome, AdversaryView)> {
    let inst = ctx.inst;
    let mut view = AdversaryView::default();
    let mut out = AttackOutcome::default();
    let injections_at = |s: usize| {
        cfg.plan
            .schedule
            .iter()
            .enumerate()
            .filter(move |(_, a)| matches!(a, Action::Type2 { after, .. } if *after == s))
    };
    for s in 0..=cfg.sessions {
        for (idx, a) in injections_at(s) {
            let Action::Type2 { strategy, .. } = *a else {
                unreachable!()
            };
            let (m_hat, y_hat) = ctx.inject(strategy, &view, &mut rngs.adversary)?;
            let accepted = inst.bob_verify(key, &m_hat, &y_hat);
            out.attacks.push(AttackRecord {
                kind: AttackKind::Type2,
                action: idx,
                strategy,
                success: accepted,
                tag_collision: false,
                mis_event: false,
            });
            view.events.push(ViewEvent::Injection {
                m: m_hat,
                y: y_hat,
                accepted,
            });
            if accepted {
                out.success = true;
                return Ok((out, view));
            }
        }
        if s == cfg.sessions {
            break;
        }
        let m = cfg.messages.message(inst.family(), s, &mut rngs.messages);
        let attack = cfg.plan.schedule.iter().enumerate().find_map(|(idx, a)| match *a {
            Action::Type1 { session, strategy } if session == s => Some((idx, strategy)),
            _ => None,
        });
        let (m_sent, x) = inst.alice_authenticate(key, &m, &mut rngs.alice)?;
        let y = sample_word(&x, inst.w1(), &mut rngs.w1);
        let z = sample_word(&x, inst.w2(), &mut rngs.w2);
        match attack {
            None => {
                let accepted = inst.bob_verify(key, &m_sent, &y);
                view.events.push(ViewEvent::Session {
                    m: m_sent.clone(),
                    m_received: m_sent,
                    z,
                    accepted,
                });
            }
            Some((idx, strategy)) => {
                let forged = ctx.substitute(strategy, &m_sent, &mut rngs.adversary)?;
                if forged == m_sent {
                    return Err(Error::Contract(format!(
                        "{} returned the original message",
                        strategy.name()
                    )));
                }
                let collision = inst.tag(key, &forged) == inst.tag(key, &m_sent);
                let real = inst.bob_verify(key, &forged, &y);
                let bit = match mode {
                    Mode::Real => real,
                    Mode::Modified => collision,
                };
                out.attacks.push(AttackRecord {
                    kind: AttackKind::Type1,
                    action: idx,
                    strategy,
                    success: bit,
                    tag_collision: collision,
                    mis_event: real && !collision,
                });
                view.events.push(ViewEvent::Session {
                    m: m_sent,
                    m_received: forged,
                    z,
                    accepted: bit,
                });
                if bit {
                    out.success = true;
                    return Ok((out, view));
                }
            }
        }
    }
    Ok((out, view))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    pub key: SharedKey,
    pub real: AttackOutcome,
    pub modified: AttackOutcome,
    /// Final view of the real game.
    pub view: AdversaryView,
}

impl TrialRecord {
    /// Number of mis events of the modified game.
    pub fn mis_count(&self) -> u32 {
        self.modified.attacks.iter().filter(|a| a.mis_event).count() as u32
    }

    /// `succ(real) ≤ succ(modified) + Σ mis` on this trial.
    pub fn identity_holds(&self) -> bool {
        (self.real.success as u32) <= self.modified.success as u32 + self.mis_count()
    }
}

/// Trial `t`: draws the key, then plays both games on identical streams.
pub fn run_trial(ctx: &AttackContext<'_>, cfg: &GameConfig, seeds: &SeedTree, t: u64) -> Result<TrialRecord> {
    let mut rngs = TrialRng::new(seeds, t);
    let key = match &cfg.keys {
        KeyPolicy::Fresh => ctx.inst.keygen(&mut rngs.key),
        KeyPolicy::Fixed(k) => {
            ctx.inst.check_key(k)?;
            k.clone()
        }
    };
    let (real, view) = play(ctx, cfg, &key, rngs.clone(), Mode::Real)?;
    let (modified, _) = play(ctx, cfg, &key, rngs, Mode::Modified)?;
    Ok(TrialRecord {
        trial: t,
        key,
        real,
        modified,
        view,
    })
}

/// Runs a single real game for trial `t` and returns its outcome.
pub fn run_game(ctx: &AttackContext<'_>, cfg: &GameConfig, seeds: &SeedTree, t: u64) -> Result<AttackOutcome> {
    Ok(run_trial(ctx, cfg, seeds, t)?.real)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessSummary {
    pub trials: u64,
    /// Trials where the real game succeeded.
    pub success: Estimate,
    pub success_modified: Estimate,
    /// Trials with at least one mis event in the modified game.
    pub mis: Estimate,
    pub type1_success: Estimate,
    pub type2_success: Estimate,
    /// Tag collisions among executed substitutions.
    pub tag_collision: Estimate,
    /// Successes without collision among executed substitutions.
    pub type1_mis: Estimate,
    /// The per-trial accounting identity held on every trial.
    pub identity_holds: bool,
    pub identity_violations: u64,
}

pub fn summarize(records: &[TrialRecord]) -> SuccessSummary {
    let n = records.len() as u64;
    let count = |f: &dyn Fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
    let attacks = |kind: AttackKind| {
        records
            .iter()
            .flat_map(|r| r.real.attacks.iter())
            .filter(move |a| a.kind == kind)
    };
    let t1 = attacks(AttackKind::Type1).count() as u64;
    let t2 = attacks(AttackKind::Type2).count() as u64;
    let violations = count(&|r| !r.identity_holds());
    SuccessSummary {
        trials: n,
        success: Estimate::from_counts(count(&|r| r.real.success), n),
        success_modified: Estimate::from_counts(count(&|r| r.modified.success), n),
        mis: Estimate::from_counts(count(&|r| r.mis_count() > 0), n),
        type1_success: Estimate::from_counts(attacks(AttackKind::Type1).filter(|a| a.success).count() as u64, t1),
        type2_success: Estimate::from_counts(attacks(AttackKind::Type2).filter(|a| a.success).count() as u64, t2),
        tag_collision: Estimate::from_counts(
            attacks(AttackKind::Type1).filter(|a| a.tag_collision).count() as u64,
            t1,
        ),
        type1_mis: Estimate::from_counts(attacks(AttackKind::Type1).filter(|a| a.mis_event).count() as u64, t1),
        identity_holds: violations == 0,
        identity_violations: violations,
    }
}

/// Runs every trial sequentially and summarizes.
pub fn estimate_success(ctx: &AttackContext<'_>, cfg: &GameConfig) -> Result<(SuccessSummary, Vec<TrialRecord>)> {
    if cfg.trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let seeds = SeedTree::new(cfg.seed);
    let records = (0..cfg.trials)
        .map(|t| run_trial(ctx, cfg, &seeds, t))
        .collect::<Result<Vec<_>>>()?;
    Ok((summarize(&records), records))
}

/// Short label for logs and CSV.
pub fn describe_plan(plan: &AttackPlan) -> String {
    let parts: Vec<String> = plan
        .schedule
        .iter()
        .map(|a| match a {
            Action::Type1 { session, strategy } => format!("T1@{session}:{}", strategy.name()),
            Action::Type2 { after, strategy } => format!("T2@{after}:{}", strategy.name()),
        })
        .collect();
    if parts.is_empty() {
        String::from("none")
    } else {
        parts.join(";")
    }
}

#[cfg(test)]
mod tests;
