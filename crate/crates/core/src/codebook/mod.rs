//! Type-class codebooks: random double partition, trimming, column selection,
//! typicality decoding and the reliability/secrecy scores of each column.
//!
//! Cells are addressed `(i, j)` with row `i ∈ [I]` (selected by the secret
//! `k1`) and column `j ∈ [J]` (selected by the tag). Every cell holds the same
//! number `r` of codewords, sorted lexicographically.

pub mod lemmas;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::infotheory::{channel_information, equivocation, l1, mean_rows, Channel};
use crate::math::{exp2, log2, ordered_sum, pow, round};
use crate::rng::SeedTree;
use crate::stats::Estimate;
use crate::types::{output_distribution, word_from_index, word_space, TypeP, TypicalityTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    /// Largest type class that may be enumerated.
    pub enumeration: u128,
    /// Largest output space `|Y|^n` (or `|Z|^n`) handled exactly.
    pub exhaustive_output: u128,
    /// Samples for Monte Carlo fallbacks.
    pub mc_trials: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration: 1_000_000,
            exhaustive_output: 1 << 16,
            mc_trials: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildParams {
    pub type_p: TypeP,
    pub w1: Channel,
    pub w2: Channel,
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    pub theta: f64,
    pub omega: f64,
    /// Typicality ε; `None` means `n^{-(1-ω)/3}`.
    pub eps: Option<f64>,
    pub seed: u64,
    pub budgets: Budgets,
    pub max_error: Option<f64>,
    pub max_sd: Option<f64>,
}

/// Information quantities of a parameter point, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub i_xy: f64,
    pub i_xz: f64,
    pub h_x_given_y: f64,
}

impl BuildParams {
    pub fn n(&self) -> u32 {
        self.type_p.n()
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or_else(|| default_eps(self.n(), self.omega))
    }

    pub fn rates(&self) -> Result<Rates> {
        let p = self.type_p.distribution();
        Ok(Rates {
            i_xy: channel_information(&p, &self.w1)?,
            i_xz: channel_information(&p, &self.w2)?,
            h_x_given_y: equivocation(&p, &self.w1)?,
        })
    }

    /// Checks the rate and margin conditions; the error names the violated one.
    pub fn validate(&self) -> Result<Rates> {
        let k = self.type_p.alphabet();
        if self.w1.inputs() != k || self.w2.inputs() != k {
            return Err(Error::AlphabetMismatch {
                expected: k,
                got: if self.w1.inputs() != k {
                    self.w1.inputs()
                } else {
                    self.w2.inputs()
                },
            });
        }
        if !self.type_p.is_strictly_positive() {
            return Err(invalid("type_p", "input type must be strictly positive"));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("rows/cols", "I and J must be at least 1"));
        }
        if !(self.tau > 0.0) {
            return Err(invalid("tau", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta < self.tau) {
            return Err(invalid("theta", format!("must lie in (0, tau={})", self.tau)));
        }
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(invalid("omega", "must lie in (0,1)"));
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0) {
                return Err(invalid("eps", "must be non-negative"));
            }
        }
        let r = self.rates()?;
        let n = self.n() as f64;
        if !(r.i_xy > r.i_xz + self.tau) {
            return Err(Error::Infeasible(format!(
                "I(X;Y)={:.6} must exceed I(X;Z)+tau={:.6}",
                r.i_xy,
                r.i_xz + self.tau
            )));
        }
        let row_rate = log2(self.rows as f64) / n;
        if !(row_rate < r.i_xy - r.i_xz - self.tau) {
            return Err(Error::Infeasible(format!(
                "I={}: (1/n)log I={:.6} must be below I(X;Y)-I(X;Z)-tau={:.6}",
                self.rows,
                row_rate,
                r.i_xy - r.i_xz - self.tau
            )));
        }
        let col_rate = log2(self.cols as f64) / n;
        if !(col_rate < r.h_x_given_y + self.tau) {
            return Err(Error::Infeasible(format!(
                "J={}: (1/n)log J={:.6} must be below H(X|Y)+tau={:.6}",
                self.cols,
                col_rate,
                r.h_x_given_y + self.tau
            )));
        }
        Ok(r)
    }
}

/// `ε = n^{-(1-ω)/3}`.
pub fn default_eps(n: u32, omega: f64) -> f64 {
    pow(n as f64, -(1.0 - omega) / 3.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub source_column: usize,
    pub error: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub s2: usize,
    pub nominal_r: usize,
    /// Per selected column, final scores.
    pub column_error: Vec<f64>,
    pub column_sd: Vec<f64>,
    pub error_exact: bool,
    pub sd_exact: bool,
    /// Which partition column each selected column came from.
    pub source_columns: Vec<usize>,
    pub candidates: Vec<CandidateScore>,
    pub log: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    params: BuildParams,
    eps: f64,
    r: usize,
    n: usize,
    /// Flat storage, cell `(i, j)` position `p` at `((i*J + j)*r + p)*n`.
    words: Vec<u8>,
    pub diagnostics: Diagnostics,
}

/// One column `C_{·j}` viewed as a code: members in row-major order, so member
/// `k` belongs to row `k / r`.
#[derive(Debug, Clone)]
pub struct ColumnCode<'a> {
    pub j: usize,
    pub r: usize,
    pub codewords: Vec<&'a [u8]>,
    pub table: &'a TypicalityTable,
    pub w1: &'a Channel,
}

impl Codebook {
    /// Assembles a codebook from explicit cells `cells[i][j]`, checking all invariants.
    pub fn from_cells(
        params: BuildParams,
        eps: f64,
        cells: Vec<Vec<Vec<Vec<u8>>>>,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let (ri, rj) = (params.rows, params.cols);
        if cells.len() != ri || cells.iter().any(|row| row.len() != rj) {
            return Err(invalid("cells", format!("expected {ri}x{rj} cells")));
        }
        let r = cells[0][0].len();
        if r == 0 {
            return Err(invalid("cells", "cells must be non-empty"));
        }
        let n = params.n() as usize;
        let mut words = Vec::with_capacity(ri * rj * r * n);
        for row in &cells {
            for cell in row {
                if cell.len() != r {
                    return Err(invalid("cells", "all cells must have the same size"));
                }
                for w in cell {
                    if w.len() != n {
                        return Err(Error::LengthMismatch {
                            expected: n,
                            got: w.len(),
                        });
                    }
                    words.extend_from_slice(w);
                }
            }
        }
        let cb = Codebook {
            params,
            eps,
            r,
            n,
            words,
            diagnostics,
        };
        cb.check_invariants()?;
        Ok(cb)
    }

    /// Disjointness, common type and sortedness of every cell.
    pub fn check_invariants(&self) -> Result<()> {
        let mut all: Vec<&[u8]> = self.words.chunks(self.n).collect();
        let k = self.params.type_p.alphabet();
        for w in &all {
            let mut counts = vec![0u32; k];
            for &s in w.iter() {
                if s as usize >= k {
                    return Err(invalid("cells", "symbol outside the input alphabet"));
                }
                counts[s as usize] += 1;
            }
            if counts != self.params.type_p.counts() {
                return Err(invalid("cells", "codeword outside the type class"));
            }
        }
        for i in 0..self.params.rows {
            for j in 0..self.params.cols {
                let cell = self.cell(i, j);
                if cell.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("cells", "cell members must be sorted and distinct"));
                }
            }
        }
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("cells", "cells must be pairwise disjoint"));
        }
        Ok(())
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.params.rows
    }

    pub fn cols(&self) -> usize {
        self.params.cols
    }

    pub fn codeword(&self, i: usize, j: usize, pos: usize) -> &[u8] {
        let at = ((i * self.params.cols + j) * self.r + pos) * self.n;
        &self.words[at..at + self.n]
    }

    pub fn cell(&self, i: usize, j: usize) -> Vec<&[u8]> {
        (0..self.r).map(|p| self.codeword(i, j, p)).collect()
    }

    pub fn cells(&self) -> Vec<Vec<Vec<Vec<u8>>>> {
        (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| self.cell(i, j).into_iter().map(|w| w.to_vec()).collect())
                    .collect()
            })
            .collect()
    }

    /// All codewords, row-major then column then position.
    pub fn all_codewords(&self) -> Vec<&[u8]> {
        self.words.chunks(self.n).collect()
    }

    pub fn typicality(&self) -> Result<TypicalityTable> {
        TypicalityTable::new(&self.params.type_p, &self.params.w1, self.eps)
    }

    pub fn column<'a>(&'a self, j: usize, table: &'a TypicalityTable) -> ColumnCode<'a> {
        let mut codewords = Vec::with_capacity(self.rows() * self.r);
        for i in 0..self.rows() {
            codewords.extend(self.cell(i, j));
        }
        ColumnCode {
            j,
            r: self.r,
            codewords,
            table,
            w1: &self.params.w1,
        }
    }

    /// `Σ_i p_row(i) · SD(P̃_{Z|(i,j)}; P̃_Z)` with `P̃_Z` induced by a uniform
    /// choice among all retained codewords. Exact when `|Z|^n` fits the budget.
    pub fn column_secrecy_sd(&self, j: usize, p_row: &[f64]) -> Result<f64> {
        if p_row.len() != self.rows() {
            return Err(Error::LengthMismatch {
                expected: self.rows(),
                got: p_row.len(),
            });
        }
        let w2 = &self.params.w2;
        let all = self.all_codewords();
        let total = word_space(w2.outputs(), self.n, self.params.budgets.exhaustive_output)?;
        let global = z_mixture(&all, w2, total);
        let mut acc = 0.0;
        for (i, &w) in p_row.iter().enumerate() {
            let cell = self.cell(i, j);
            acc += w * l1(&z_mixture(&cell, w2, total), &global);
        }
        Ok(acc)
    }
}

/// `P̃_Z` for `X` uniform over `words`.
pub fn z_mixture(words: &[&[u8]], w2: &Channel, total: usize) -> Vec<f64> {
    if w2.has_identical_rows() {
        // Z is independent of X; every row equals the same product distribution
        return output_distribution(words[0], w2, total);
    }
    let rows: Vec<Vec<f64>> = words.iter().map(|w| output_distribution(w, w2, total)).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    mean_rows(&refs)
}

pub const NO_DECODE: u32 = u32::MAX;

impl<'a> ColumnCode<'a> {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Unique conditionally typical codeword, scanning in order; `None` for zero or several.
    pub fn decode(&self, y: &[u8]) -> Option<usize> {
        typicality_decode(&self.codewords, self.table, y)
    }

    /// Decode result for every output word, indexed lexicographically.
    pub fn decode_table(&self, budget: u128) -> Result<Vec<u32>> {
        decode_table(&self.codewords, self.table, self.w1.outputs(), budget)
    }

    /// Exact or Monte Carlo decoding error under a uniformly chosen member.
    pub fn error_probability<R: Rng + ?Sized>(
        &self,
        exact: bool,
        trials: u64,
        budget: u128,
        rng: &mut R,
    ) -> Result<ErrorEstimate> {
        if exact {
            let v = exact_error(&self.codewords, self.table, self.w1, budget)?;
            Ok(ErrorEstimate {
                value: v,
                low: v,
                high: v,
                exact: true,
            })
        } else {
            let e = mc_error(&self.codewords, self.table, self.w1, trials, rng);
            Ok(ErrorEstimate {
                value: e.value,
                low: e.low,
                high: e.high,
                exact: false,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub value: f64,
    pub low: f64,
    pub high: f64,
    pub exact: bool,
}

pub fn typicality_decode(codewords: &[&[u8]], table: &TypicalityTable, y: &[u8]) -> Option<usize> {
    let mut found = None;
    for (k, x) in codewords.iter().enumerate() {
        if table.typical(x, y) {
            if found.is_some() {
                return None;
            }
            found = Some(k);
        }
    }
    found
}

pub fn decode_table(codewords: &[&[u8]], table: &TypicalityTable, outputs: usize, budget: u128) -> Result<Vec<u32>> {
    let n = table.n();
    let total = word_space(outputs, n, budget)?;
    let mut dec = vec![NO_DECODE; total];
    let mut buf = vec![0u8; n];
    for (idx, slot) in dec.iter_mut().enumerate() {
        word_from_index(idx, outputs, &mut buf);
        if let Some(k) = typicality_decode(codewords, table, &buf) {
            *slot = k as u32;
        }
    }
    Ok(dec)
}

/// Average over members of `P(decode(Y) ≠ member)`, by full output enumeration.
pub fn exact_error(codewords: &[&[u8]], table: &TypicalityTable, w1: &Channel, budget: u128) -> Result<f64> {
    let dec = decode_table(codewords, table, w1.outputs(), budget)?;
    Ok(exact_error_with_table(codewords, &dec, w1))
}

pub fn exact_error_with_table(codewords: &[&[u8]], dec: &[u32], w1: &Channel) -> f64 {
    let per: Vec<f64> = codewords
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let probs = output_distribution(x, w1, dec.len());
            let ok = ordered_sum(probs.iter().zip(dec).filter(|(_, &d)| d == k as u32).map(|(p, _)| *p));
            (1.0 - ok).max(0.0)
        })
        .collect();
    ordered_sum(per) / codewords.len() as f64
}

pub fn mc_error<R: Rng + ?Sized>(
    codewords: &[&[u8]],
    table: &TypicalityTable,
    w1: &Channel,
    trials: u64,
    rng: &mut R,
) -> Estimate {
    let mut bad = 0u64;
    for _ in 0..trials {
        let k = rng.gen_range(0..codewords.len());
        let y = crate::infotheory::sample_word(codewords[k], w1, rng);
        if typicality_decode(codewords, table, &y) != Some(k) {
            bad += 1;
        }
    }
    Estimate::from_counts(bad, trials)
}

/// Typicality decoder for codes whose members may have different types; each
/// member gets the table of its own type.
#[derive(Debug, Clone)]
pub struct MixedDecoder {
    tables: Vec<TypicalityTable>,
}

impl MixedDecoder {
    pub fn new(codewords: &[&[u8]], ch: &Channel, eps: f64) -> Result<Self> {
        let tables = codewords
            .iter()
            .map(|x| {
                let mut counts = vec![0u32; ch.inputs()];
                for &a in x.iter() {
                    counts[a as usize] += 1;
                }
                TypicalityTable::new(&TypeP::new(counts)?, ch, eps)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MixedDecoder { tables })
    }

    pub fn decode(&self, codewords: &[&[u8]], y: &[u8]) -> Option<usize> {
        let mut found = None;
        for (k, (x, t)) in codewords.iter().zip(&self.tables).enumerate() {
            if t.typical(x, y) {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }

    /// Exact decoding error under a uniform member.
    pub fn exact_error(&self, codewords: &[&[u8]], ch: &Channel, budget: u128) -> Result<f64> {
        let n = codewords[0].len();
        let total = word_space(ch.outputs(), n, budget)?;
        let mut buf = vec![0u8; n];
        let dec: Vec<u32> = (0..total)
            .map(|idx| {
                word_from_index(idx, ch.outputs(), &mut buf);
                self.decode(codewords, &buf).map_or(NO_DECODE, |k| k as u32)
            })
            .collect();
        Ok(exact_error_with_table(codewords, &dec, ch))
    }

    pub fn mc_error<R: Rng + ?Sized>(&self, codewords: &[&[u8]], ch: &Channel, trials: u64, rng: &mut R) -> Estimate {
        let mut bad = 0u64;
        for _ in 0..trials {
            let k = rng.gen_range(0..codewords.len());
            let y = crate::infotheory::sample_word(codewords[k], ch, rng);
            if self.decode(codewords, &y) != Some(k) {
                bad += 1;
            }
        }
        Estimate::from_counts(bad, trials)
    }
}

/// Monte Carlo estimate of `SD(P_a; P_b)` for `P_a`, `P_b` the `Z` laws of
/// uniform choices among `a` and `b`. Samples come from the even mixture; each
/// sample contributes `2|P_a(z) - P_b(z)| / (P_a(z) + P_b(z))`, computed exactly.
pub fn mc_sd<R: Rng + ?Sized>(a: &[&[u8]], b: &[&[u8]], w2: &Channel, trials: u64, rng: &mut R) -> f64 {
    if w2.has_identical_rows() {
        return 0.0;
    }
    let mean_prob = |set: &[&[u8]], z: &[u8]| ordered_sum(set.iter().map(|x| w2.word_prob(z, x))) / set.len() as f64;
    let mut acc = 0.0;
    for _ in 0..trials {
        let from_a = rng.gen::<bool>();
        let set = if from_a { a } else { b };
        let x = set[rng.gen_range(0..set.len())];
        let z = crate::infotheory::sample_word(x, w2, rng);
        let pa = mean_prob(a, &z);
        let pb = mean_prob(b, &z);
        acc += 2.0 * (pa - pb).abs() / (pa + pb);
    }
    acc / trials as f64
}

/// Secrecy score of one column: `(1/I) Σ_i SD(P̃_{Z|cell i}; reference)`.
fn secrecy_score(
    cells: &[Vec<&[u8]>],
    reference_words: &[&[u8]],
    reference_exact: Option<&[f64]>,
    w2: &Channel,
    total: Option<usize>,
    trials: u64,
    rng: &mut impl Rng,
) -> f64 {
    let per: Vec<f64> = cells
        .iter()
        .map(|cell| match (total, reference_exact) {
            (Some(total), Some(reference)) => l1(&z_mixture(cell, w2, total), reference),
            _ => mc_sd(cell, reference_words, w2, trials, rng),
        })
        .collect();
    ordered_sum(per) / cells.len() as f64
}

/// Builds a codebook by random double partition of the type class.
///
/// Order of operations: partition all of `T_P^n` into `I × s2` cells with iid
/// uniform labels; pick the common size `r` as the smaller of the nominal
/// `|T|/(I·s2)` and the J-th largest per-column minimum cell size; trim every
/// column that can supply `r` members per cell; score those columns; keep the
/// J best by `(error, sd, index)`.
pub fn build_codebook(bp: &BuildParams) -> Result<Codebook> {
    let rates = bp.validate()?;
    let n = bp.n() as usize;
    let eps = bp.eps();
    let (ri, rj) = (bp.rows, bp.cols);
    let members = bp.type_p.members(bp.budgets.enumeration)?;
    let t = members.len();
    let s2_formula = round(t as f64 * exp2(-(n as f64) * (rates.i_xy - bp.theta)));
    let s2 = (s2_formula as usize).max(rj);
    let mut log = vec![
        format!(
            "|T|={t} n={n} eps={eps:.6} I(X;Y)={:.6} I(X;Z)={:.6} H(X|Y)={:.6}",
            rates.i_xy, rates.i_xz, rates.h_x_given_y
        ),
        format!("s2: formula {s2_formula} clipped to {s2}"),
    ];

    let seeds = SeedTree::new(bp.seed);
    let mut part_rng = seeds.stream("build/partition", 0);
    let mut cells: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); ri]; s2];
    for idx in 0..t {
        let i = part_rng.gen_range(0..ri);
        let j = part_rng.gen_range(0..s2);
        cells[j][i].push(idx);
    }
    let min_sizes: Vec<usize> = cells
        .iter()
        .map(|c| c.iter().map(|x| x.len()).min().unwrap_or(0))
        .collect();
    let mut sorted = min_sizes.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let nominal = (t / (ri * s2)).max(1);
    let r = nominal.min(sorted[rj - 1]);
    log.push(format!(
        "nominal r={nominal}, J-th largest column minimum={}, r={r}",
        sorted[rj - 1]
    ));
    if r == 0 {
        let found = min_sizes.iter().filter(|&&m| m > 0).count();
        return Err(Error::InsufficientColumns { needed: rj, found });
    }

    let table = TypicalityTable::new(&bp.type_p, &bp.w1, eps)?;
    let y_exact = word_space(bp.w1.outputs(), n, bp.budgets.exhaustive_output).is_ok();
    let z_total = word_space(bp.w2.outputs(), n, bp.budgets.exhaustive_output).ok();
    let all_refs: Vec<&[u8]> = members.iter().map(|m| m.as_slice()).collect();
    let global_z = z_total.map(|total| z_mixture(&all_refs, &bp.w2, total));

    let mut candidates: Vec<(CandidateScore, Vec<Vec<usize>>)> = Vec::new();
    for (j, col) in cells.iter().enumerate() {
        if min_sizes[j] < r {
            continue;
        }
        let mut trim_rng = seeds.stream("build/trim", j as u64);
        let trimmed: Vec<Vec<usize>> = col
            .iter()
            .map(|cell| {
                let mut pick: Vec<usize> = rand::seq::index::sample(&mut trim_rng, cell.len(), r)
                    .into_iter()
                    .map(|p| cell[p])
                    .collect();
                pick.sort_unstable();
                pick
            })
            .collect();
        let words: Vec<&[u8]> = trimmed.iter().flatten().map(|&x| members[x].as_slice()).collect();
        let error = if y_exact {
            exact_error(&words, &table, &bp.w1, bp.budgets.exhaustive_output)?
        } else {
            let mut rng = seeds.stream("build/score", j as u64);
            mc_error(&words, &table, &bp.w1, bp.budgets.mc_trials, &mut rng).value
        };
        let cell_words: Vec<Vec<&[u8]>> = trimmed
            .iter()
            .map(|c| c.iter().map(|&x| members[x].as_slice()).collect())
            .collect();
        let mut sd_rng = seeds.stream("build/sd", j as u64);
        let sd = secrecy_score(
            &cell_words,
            &all_refs,
            global_z.as_deref(),
            &bp.w2,
            z_total,
            bp.budgets.mc_trials,
            &mut sd_rng,
        );
        candidates.push((
            CandidateScore {
                source_column: j,
                error,
                sd,
            },
            trimmed,
        ));
    }
    log.push(format!("{} candidate columns scored", candidates.len()));

    let passing: Vec<usize> = (0..candidates.len())
        .filter(|&c| {
            let s = &candidates[c].0;
            bp.max_error.is_none_or(|m| s.error <= m) && bp.max_sd.is_none_or(|m| s.sd <= m)
        })
        .collect();
    if passing.len() < rj {
        return Err(Error::InsufficientColumns {
            needed: rj,
            found: passing.len(),
        });
    }
    let mut ranked = passing;
    ranked.sort_by(|&a, &b| {
        let (x, y) = (&candidates[a].0, &candidates[b].0);
        x.error
            .total_cmp(&y.error)
            .then(x.sd.total_cmp(&y.sd))
            .then(x.source_column.cmp(&y.source_column))
    });
    let mut chosen: Vec<usize> = ranked[..rj].to_vec();
    chosen.sort_by_key(|&c| candidates[c].0.source_column);

    let cell_data: Vec<Vec<Vec<Vec<u8>>>> = (0..ri)
        .map(|i| {
            chosen
                .iter()
                .map(|&c| candidates[c].1[i].iter().map(|&x| members[x].clone()).collect())
                .collect()
        })
        .collect();
    let column_error: Vec<f64> = chosen.iter().map(|&c| candidates[c].0.error).collect();
    let source_columns: Vec<usize> = chosen.iter().map(|&c| candidates[c].0.source_column).collect();
    let diagnostics = Diagnostics {
        s2,
        nominal_r: nominal,
        column_error,
        column_sd: Vec::new(),
        error_exact: y_exact,
        sd_exact: z_total.is_some(),
        source_columns,
        candidates: candidates.into_iter().map(|(s, _)| s).collect(),
        log,
    };
    let mut cb = Codebook::from_cells(bp.clone(), eps, cell_data, diagnostics)?;
    cb.diagnostics.column_sd = final_secrecy(&cb, &seeds)?;
    cb.diagnostics
        .log
        .push(format!("selected columns {:?}", cb.diagnostics.source_columns));
    Ok(cb)
}

/// Secrecy of every column against the retained codewords, uniform rows.
fn final_secrecy(cb: &Codebook, seeds: &SeedTree) -> Result<Vec<f64>> {
    let uniform = vec![1.0 / cb.rows() as f64; cb.rows()];
    let exact = word_space(cb.params.w2.outputs(), cb.n, cb.params.budgets.exhaustive_output).is_ok();
    (0..cb.cols())
        .map(|j| {
            if exact {
                cb.column_secrecy_sd(j, &uniform)
            } else {
                let all = cb.all_codewords();
                let cells: Vec<Vec<&[u8]>> = (0..cb.rows()).map(|i| cb.cell(i, j)).collect();
                let mut rng = seeds.stream("build/final-sd", j as u64);
                Ok(secrecy_score(
                    &cells,
                    &all,
                    None,
                    &cb.params.w2,
                    None,
                    cb.params.budgets.mc_trials,
                    &mut rng,
                ))
            }
        })
        .collect()
}

/// A comparison codebook whose cells are filled with lexicographically
/// consecutive members of the type class (a deliberately clustered partition).
pub fn clustered_codebook(bp: &BuildParams, r: usize) -> Result<Codebook> {
    let members = bp.type_p.members(bp.budgets.enumeration)?;
    let need = bp.rows * bp.cols * r;
    if need > members.len() || r == 0 {
        return Err(invalid(
            "r",
            format!("{need} codewords requested, class has {}", members.len()),
        ));
    }
    let cells = (0..bp.rows)
        .map(|i| {
            (0..bp.cols)
                .map(|j| {
                    let start = (i * bp.cols + j) * r;
                    members[start..start + r].to_vec()
                })
                .collect()
        })
        .collect();
    Codebook::from_cells(bp.clone(), bp.eps(), cells, Diagnostics::default())
}
