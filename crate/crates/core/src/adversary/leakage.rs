//! Exact key leakage to the eavesdropper after a list of honest sessions.
//!
//! The view is `V = (m_1, Z_1, …, m_J, Z_J)` with the messages fixed. Given the
//! key, the blocks are independent and block `j` has the law of `Z` for a
//! uniform codeword of cell `(k1, h_{k0}(m_j))`. Keys that select the same cell
//! sequence have identical rows, so the joint is stored per distinct sequence.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::asu::Message;
use crate::codebook::z_mixture;
use crate::error::{invalid, Error, Result};
use crate::infotheory::{csiszar_from_values, l1, sample_word, weighted_mean_rows, CsiszarReport};
use crate::math::{log2, ordered_sum};
use crate::protocol::ProtocolInstance;
use crate::types::word_space;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageReport {
    /// `SD(K|V; K) = Σ_{k,v} |P(k,v) - P(k)P(v)|`.
    pub sd: f64,
    /// `I(K; V)` in bits.
    pub mi: f64,
    /// `|K0|·I`.
    pub key_count: u128,
    /// Number of distinct cell sequences.
    pub groups: usize,
    pub exact: bool,
    /// Standard error of `sd` for the Monte Carlo path, 0 when exact.
    pub sd_std_error: f64,
}

/// Distinct cell sequences `(k1, t_1..t_J)` with their key counts.
fn groups(inst: &ProtocolInstance, messages: &[Message]) -> Result<BTreeMap<Vec<u32>, u64>> {
    let fam = inst.family();
    if messages.is_empty() {
        return Err(invalid("messages", "need at least one session"));
    }
    for m in messages {
        fam.check_message(m)?;
    }
    let nk = fam.key_space();
    if inst.key_count() > (1u128 << 32) {
        return Err(Error::BudgetExceeded {
            what: "key enumeration",
            needed: inst.key_count(),
            limit: 1 << 32,
        });
    }
    let mut out = BTreeMap::new();
    for k0 in 0..nk as u64 {
        let key = fam.key_from_index(k0);
        let tags: Vec<u32> = messages.iter().map(|m| fam.hash_unchecked(&key, m)).collect();
        for k1 in 0..inst.rows() as u32 {
            let mut g = Vec::with_capacity(tags.len() + 1);
            g.push(k1);
            g.extend(tags.iter().map(|&t| inst.tag_embed(t) as u32));
            *out.entry(g).or_insert(0) += 1;
        }
    }
    Ok(out)
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Exact `SD(K|V; K)` and `I(K;V)`; needs `|Z|^{nJ}` within the output budget.
pub fn key_leakage_exact(inst: &ProtocolInstance, messages: &[Message]) -> Result<LeakageReport> {
    let cb = inst.codebook();
    let bp = cb.params();
    let block = word_space(bp.w2.outputs(), cb.n(), bp.budgets.exhaustive_output)?;
    word_space(bp.w2.outputs(), cb.n() * messages.len(), bp.budgets.exhaustive_output)?;
    let groups = groups(inst, messages)?;
    let mut cell_z: Vec<Option<Vec<f64>>> = vec![None; cb.rows() * cb.cols()];
    let mut cell = |i: usize, j: usize| -> Vec<f64> {
        cell_z[i * cb.cols() + j]
            .get_or_insert_with(|| z_mixture(&cb.cell(i, j), &bp.w2, block))
            .clone()
    };
    let kc = inst.key_count() as f64;
    let mut rows = Vec::with_capacity(groups.len());
    let mut weights = Vec::with_capacity(groups.len());
    for (g, &count) in &groups {
        let i = g[0] as usize;
        let mut row = vec![1.0];
        for &t in &g[1..] {
            row = kron(&row, &cell(i, t as usize));
        }
        rows.push(row);
        weights.push(count as f64 / kc);
    }
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let pv = weighted_mean_rows(&refs, &weights);
    let sd = ordered_sum(rows.iter().zip(&weights).map(|(r, &w)| w * l1(r, &pv)));
    let mi = ordered_sum(rows.iter().zip(&weights).map(|(r, &w)| {
        w * ordered_sum(
            r.iter()
                .zip(&pv)
                .filter(|(&a, _)| a > 0.0)
                .map(|(&a, &b)| a * log2(a / b)),
        )
    }));
    Ok(LeakageReport {
        sd,
        mi: mi.max(0.0),
        key_count: inst.key_count(),
        groups: groups.len(),
        exact: true,
        sd_std_error: 0.0,
    })
}

/// Exact when the view space fits the budget; otherwise a Monte Carlo
/// estimate over views with every conditional probability computed exactly.
pub fn key_leakage<R: Rng + ?Sized>(
    inst: &ProtocolInstance,
    messages: &[Message],
    trials: u64,
    rng: &mut R,
) -> Result<LeakageReport> {
    let cb = inst.codebook();
    let bp = cb.params();
    if word_space(bp.w2.outputs(), cb.n() * messages.len(), bp.budgets.exhaustive_output).is_ok() {
        return key_leakage_exact(inst, messages);
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let groups: Vec<(Vec<u32>, u64)> = groups(inst, messages)?.into_iter().collect();
    let kc = inst.key_count() as f64;
    let weights: Vec<f64> = groups.iter().map(|(_, c)| *c as f64 / kc).collect();
    let mut cum = Vec::with_capacity(groups.len());
    let mut run = 0u64;
    for (_, c) in &groups {
        run += c;
        cum.push(run);
    }
    let block_prob = |i: usize, t: usize, z: &[u8]| {
        let cell = cb.cell(i, t);
        ordered_sum(cell.iter().map(|x| bp.w2.word_prob(z, x))) / cell.len() as f64
    };
    let mut sds = Vec::with_capacity(trials as usize);
    let mut mis = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let u = rng.gen_range(0..run);
        let gi = cum.partition_point(|&c| c <= u);
        let g = &groups[gi].0;
        let zs: Vec<Vec<u8>> = g[1..]
            .iter()
            .map(|&t| {
                let cell = cb.cell(g[0] as usize, t as usize);
                sample_word(cell[rng.gen_range(0..cell.len())], &bp.w2, rng)
            })
            .collect();
        let cond: Vec<f64> = groups
            .iter()
            .map(|(h, _)| {
                h[1..]
                    .iter()
                    .zip(&zs)
                    .map(|(&t, z)| block_prob(h[0] as usize, t as usize, z))
                    .product()
            })
            .collect();
        let pv = ordered_sum(cond.iter().zip(&weights).map(|(c, w)| c * w));
        sds.push(ordered_sum(
            cond.iter().zip(&weights).map(|(c, w)| w * (c / pv - 1.0).abs()),
        ));
        mis.push(ordered_sum(cond.iter().zip(&weights).filter(|(c, _)| **c > 0.0).map(
            |(c, w)| {
                let ratio = c / pv;
                w * ratio * log2(ratio)
            },
        )));
    }
    let (sd, se) = crate::stats::mean_se(&sds);
    let mi = ordered_sum(mis.iter().copied()) / mis.len() as f64;
    Ok(LeakageReport {
        sd,
        mi: mi.max(0.0),
        key_count: inst.key_count(),
        groups: groups.len(),
        exact: false,
        sd_std_error: se,
    })
}

/// Both sides of the Csiszár relation on a computed leakage pair, with the key
/// alphabet `|K0|·I`.
pub fn check_lemma1_on_leakage(report: &LeakageReport) -> CsiszarReport {
    csiszar_from_values(report.sd, report.mi, report.key_count as f64)
}
