//! Result files: `results.csv`, `manifest.json`, `codebook.json` and the JSON
//! Lines record files (`transcripts.jsonl`, `attacks.jsonl`).
//!
//! The CSV header and the JSON layouts are versioned by [`SCHEMA_VERSION`].

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wiretap_auth_core::adversary::{AttackKind, AttackOutcome, TrialRecord};
use wiretap_auth_core::asu::StinsonFamily;
use wiretap_auth_core::codebook::{Budgets, BuildParams, CandidateScore, Codebook, Diagnostics};
use wiretap_auth_core::infotheory::Channel;
use wiretap_auth_core::protocol::SessionTranscript;
use wiretap_auth_core::types::TypeP;

use crate::Failure;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 15] = [
    "experiment",
    "n",
    "w1",
    "w2",
    "I",
    "J",
    "q",
    "s",
    "eps",
    "metric",
    "value",
    "low",
    "high",
    "seed",
    "config_hash",
];

/// One metric at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub n: u32,
    pub w1: String,
    pub w2: String,
    pub rows: usize,
    pub cols: usize,
    pub q: u64,
    pub s: u32,
    /// Typicality radius; `None` for points that do not use one.
    pub eps: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Compact channel label: `bsc(p)` for binary symmetric channels, else the row matrix.
pub fn channel_label(ch: &Channel) -> String {
    let r = ch.rows();
    if r.len() == 2 && r[0].len() == 2 && r[0][1] == r[1][0] && r[0][0] == r[1][1] {
        return format!("bsc({})", r[0][1]);
    }
    let rows: Vec<String> = r
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    format!("[{}]", rows.join("; "))
}

/// Serialises rows with the fixed header. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_csv(rows: &[ResultRow]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Experiment(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.n.to_string(),
            r.w1.clone(),
            r.w2.clone(),
            r.rows.to_string(),
            r.cols.to_string(),
            r.q.to_string(),
            r.s.to_string(),
            r.eps.map(|e| e.to_string()).unwrap_or_default(),
            r.metric.clone(),
            r.value.to_string(),
            r.low.to_string(),
            r.high.to_string(),
            r.seed.to_string(),
            r.config_hash.clone(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Failure::Experiment(format!("csv: {e}")))
}

/// Reads a results file back; used by tests and by downstream tooling.
pub fn read_csv(bytes: &[u8]) -> Result<Vec<ResultRow>, Failure> {
    let mut r = csv::Reader::from_reader(bytes);
    let bad = |m: String| Failure::Experiment(format!("results.csv: {m}"));
    let header: Vec<String> = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| {
            f(i).parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])))
        };
        let int = |i: usize| {
            f(i).parse::<u64>()
                .map_err(|e| bad(format!("column {}: {e}", CSV_HEADER[i])))
        };
        out.push(ResultRow {
            experiment: f(0),
            n: int(1)? as u32,
            w1: f(2),
            w2: f(3),
            rows: int(4)? as usize,
            cols: int(5)? as usize,
            q: int(6)?,
            s: int(7)? as u32,
            eps: if f(8).is_empty() { None } else { Some(num(8)?) },
            metric: f(9),
            value: num(10)?,
            low: num(11)?,
            high: num(12)?,
            seed: int(13)?,
            config_hash: f(14),
        });
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub core_version: String,
    pub command: String,
    pub experiment: String,
    pub seed: u64,
    /// SHA-256 of the effective configuration (after command-line overrides).
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub rows: usize,
    pub files: Vec<FileDigest>,
    /// Checks that failed; empty on success.
    pub failures: Vec<String>,
}

// ---- codebook.json ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetsFile {
    pub enumeration: u128,
    pub exhaustive_output: u128,
    pub mc_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub type_counts: Vec<u32>,
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<Vec<f64>>,
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    pub theta: f64,
    pub omega: f64,
    pub eps: Option<f64>,
    pub seed: u64,
    pub budgets: BudgetsFile,
    pub max_error: Option<f64>,
    pub max_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub source_column: usize,
    pub error: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsFile {
    pub s2: usize,
    pub nominal_r: usize,
    pub column_error: Vec<f64>,
    pub column_sd: Vec<f64>,
    pub error_exact: bool,
    pub sd_exact: bool,
    pub source_columns: Vec<usize>,
    pub candidates: Vec<CandidateFile>,
    pub log: Vec<String>,
}

/// On-disk codebook. Codewords are digit strings over the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    pub schema_version: u32,
    pub params: ParamsFile,
    pub eps: f64,
    pub r: usize,
    pub n: usize,
    /// `cells[i][j]` lists the members of cell `(i, j)`.
    pub cells: Vec<Vec<Vec<String>>>,
    pub diagnostics: DiagnosticsFile,
}

fn word_string(w: &[u8]) -> String {
    w.iter()
        .map(|&s| char::from_digit(s as u32, 36).expect("alphabet below 36"))
        .collect()
}

fn parse_word(s: &str) -> Result<Vec<u8>, String> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as u8)
                .ok_or_else(|| format!("bad symbol `{c}` in codeword `{s}`"))
        })
        .collect()
}

impl CodebookFile {
    pub fn from_codebook(cb: &Codebook) -> Self {
        let p = cb.params();
        let d = &cb.diagnostics;
        CodebookFile {
            schema_version: SCHEMA_VERSION,
            params: ParamsFile {
                type_counts: p.type_p.counts().to_vec(),
                w1: p.w1.rows().to_vec(),
                w2: p.w2.rows().to_vec(),
                rows: p.rows,
                cols: p.cols,
                tau: p.tau,
                theta: p.theta,
                omega: p.omega,
                eps: p.eps,
                seed: p.seed,
                budgets: BudgetsFile {
                    enumeration: p.budgets.enumeration,
                    exhaustive_output: p.budgets.exhaustive_output,
                    mc_trials: p.budgets.mc_trials,
                },
                max_error: p.max_error,
                max_sd: p.max_sd,
            },
            eps: cb.eps(),
            r: cb.r(),
            n: cb.n(),
            cells: cb
                .cells()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cell| cell.iter().map(|w| word_string(w)).collect())
                        .collect()
                })
                .collect(),
            diagnostics: DiagnosticsFile {
                s2: d.s2,
                nominal_r: d.nominal_r,
                column_error: d.column_error.clone(),
                column_sd: d.column_sd.clone(),
                error_exact: d.error_exact,
                sd_exact: d.sd_exact,
                source_columns: d.source_columns.clone(),
                candidates: d
                    .candidates
                    .iter()
                    .map(|c| CandidateFile {
                        source_column: c.source_column,
                        error: c.error,
                        sd: c.sd,
                    })
                    .collect(),
                log: d.log.clone(),
            },
        }
    }

    /// Rebuilds the codebook, re-checking every structural invariant.
    pub fn to_codebook(&self) -> Result<Codebook, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported codebook schema version {}", self.schema_version));
        }
        let p = &self.params;
        let params = BuildParams {
            type_p: TypeP::new(p.type_counts.clone()).map_err(|e| format!("params.type_counts: {e}"))?,
            w1: Channel::new(p.w1.clone()).map_err(|e| format!("params.w1: {e}"))?,
            w2: Channel::new(p.w2.clone()).map_err(|e| format!("params.w2: {e}"))?,
            rows: p.rows,
            cols: p.cols,
            tau: p.tau,
            theta: p.theta,
            omega: p.omega,
            eps: p.eps,
            seed: p.seed,
            budgets: Budgets {
                enumeration: p.budgets.enumeration,
                exhaustive_output: p.budgets.exhaustive_output,
                mc_trials: p.budgets.mc_trials,
            },
            max_error: p.max_error,
            max_sd: p.max_sd,
        };
        let cells = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| cell.iter().map(|w| parse_word(w)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let d = &self.diagnostics;
        let diagnostics = Diagnostics {
            s2: d.s2,
            nominal_r: d.nominal_r,
            column_error: d.column_error.clone(),
            column_sd: d.column_sd.clone(),
            error_exact: d.error_exact,
            sd_exact: d.sd_exact,
            source_columns: d.source_columns.clone(),
            candidates: d
                .candidates
                .iter()
                .map(|c| CandidateScore {
                    source_column: c.source_column,
                    error: c.error,
                    sd: c.sd,
                })
                .collect(),
            log: d.log.clone(),
        };
        let cb = Codebook::from_cells(params, self.eps, cells, diagnostics)
            .map_err(|e| format!("codebook invariant: {e}"))?;
        if cb.r() != self.r || cb.n() != self.n {
            return Err(format!(
                "codebook invariant: header says r={} n={}, cells give r={} n={}",
                self.r,
                self.n,
                cb.r(),
                cb.n()
            ));
        }
        Ok(cb)
    }
}

pub fn codebook_to_json(cb: &Codebook) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&CodebookFile::from_codebook(cb)).expect("plain data serialises");
    v.push(b'\n');
    v
}

pub fn codebook_from_json(bytes: &[u8]) -> Result<Codebook, String> {
    let file: CodebookFile = serde_json::from_slice(bytes).map_err(|e| format!("codebook parse error: {e}"))?;
    file.to_codebook()
}

// ---- JSON Lines records ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub experiment: String,
    pub n: u32,
    pub trial: u64,
    pub m: Vec<u32>,
    pub m_received: Vec<u32>,
    pub tag: u32,
    pub x: String,
    pub y: String,
    pub z: String,
    pub accepted: bool,
}

impl TranscriptLine {
    pub fn new(experiment: &str, n: u32, trial: u64, s: &SessionTranscript) -> Self {
        TranscriptLine {
            experiment: experiment.to_string(),
            n,
            trial,
            m: s.m.clone(),
            m_received: s.m_received.clone(),
            tag: s.tag,
            x: word_string(&s.x),
            y: word_string(&s.y),
            z: word_string(&s.z),
            accepted: s.accepted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackLine {
    pub kind: String,
    pub action: usize,
    pub strategy: String,
    pub success: bool,
    pub tag_collision: bool,
    pub mis_event: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameLine {
    pub success: bool,
    pub attacks: Vec<AttackLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLine {
    pub experiment: String,
    pub n: u32,
    pub trial: u64,
    pub k0: u64,
    pub k1: usize,
    pub real: GameLine,
    pub modified: GameLine,
    pub mis_count: u32,
    pub identity_holds: bool,
}

fn game_line(o: &AttackOutcome) -> GameLine {
    GameLine {
        success: o.success,
        attacks: o
            .attacks
            .iter()
            .map(|a| AttackLine {
                kind: match a.kind {
                    AttackKind::Type1 => "type1".into(),
                    AttackKind::Type2 => "type2".into(),
                },
                action: a.action,
                strategy: a.strategy.name().into(),
                success: a.success,
                tag_collision: a.tag_collision,
                mis_event: a.mis_event,
            })
            .collect(),
    }
}

impl TrialLine {
    pub fn new(experiment: &str, n: u32, fam: &StinsonFamily, r: &TrialRecord) -> Self {
        TrialLine {
            experiment: experiment.to_string(),
            n,
            trial: r.trial,
            k0: fam.key_index(&r.key.k0),
            k1: r.key.k1,
            real: game_line(&r.real),
            modified: game_line(&r.modified),
            mis_count: r.mis_count(),
            identity_holds: r.identity_holds(),
        }
    }
}

pub fn jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for it in items {
        serde_json::to_writer(&mut out, it).expect("plain data serialises");
        out.push(b'\n');
    }
    out
}
