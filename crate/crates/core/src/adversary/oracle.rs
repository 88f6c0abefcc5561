//! Exact optimal single impersonation at tiny parameters.
//!
//! The posterior over keys `(k0, k1)` given a view is proportional to the
//! product of event likelihoods. For an observed session with original message
//! `m`, delivered message `m'`, eavesdropper word `z` and decision bit `b`:
//!
//! `P(z, b | k) = (1/r) Σ_{x ∈ C(k1, h(m))} W2(z|x) · P(bit = b | x sent, column h(m'), row k1)`
//!
//! and an injection contributes 1 or 0 depending on whether Bob with key `k`
//! would have produced the recorded bit. The best injection maximises the
//! posterior mass of keys that accept it.

use alloc::vec;
use alloc::vec::Vec;

use super::{AdversaryView, ViewEvent};
use crate::asu::{tag_table, Message};
use crate::codebook::NO_DECODE;
use crate::error::{Error, Result};
use crate::protocol::ProtocolInstance;
use crate::types::word_from_index;

#[derive(Debug, Clone)]
pub struct OracleTables {
    /// Key-major tag table `|K0| × |M|`.
    tags: Vec<u32>,
    nk: usize,
    nm: usize,
    /// `acc[x][j][i]`: acceptance probability for codeword `x` (flat order),
    /// decoding column `j` and Bob's row `i`.
    acc: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Maximum acceptance probability over all `(m̂, ŷ)`.
    pub value: f64,
    pub m_hat: Message,
    pub y_hat: Vec<u8>,
}

impl OracleTables {
    pub fn new(inst: &ProtocolInstance, budget: u128) -> Result<Self> {
        let fam = inst.family();
        let tables = inst.decode_tables().ok_or(Error::BudgetExceeded {
            what: "oracle output enumeration",
            needed: u128::MAX,
            limit: inst.codebook().params().budgets.exhaustive_output,
        })?;
        let needed = fam
            .message_space()
            .saturating_mul(tables[0].len() as u128)
            .saturating_mul(fam.q() as u128)
            .max(inst.key_count());
        if needed > budget {
            return Err(Error::BudgetExceeded {
                what: "oracle enumeration",
                needed,
                limit: budget,
            });
        }
        Ok(OracleTables {
            tags: tag_table(fam, budget)?,
            nk: fam.key_space() as usize,
            nm: fam.message_space() as usize,
            acc: inst.acceptance_table()?,
        })
    }
}

/// Unnormalised posterior weights `w[k0][k1]`; all ones for an empty view.
fn posterior(t: &OracleTables, inst: &ProtocolInstance, view: &AdversaryView) -> Vec<Vec<f64>> {
    let fam = inst.family();
    let cb = inst.codebook();
    let (ri, rj, r) = (cb.rows(), cb.cols(), cb.r());
    let mut w = vec![vec![1.0f64; ri]; t.nk];
    for ev in &view.events {
        match ev {
            ViewEvent::Session {
                m,
                m_received,
                z,
                accepted,
            } => {
                let (mi, mri) = (fam.message_index(m) as usize, fam.message_index(m_received) as usize);
                let pz: Vec<f64> = cb.all_codewords().iter().map(|x| inst.w2().word_prob(z, x)).collect();
                // likelihood depends on the key only through (k1, h(m), h(m'))
                let q = fam.q() as usize;
                let mut lik = vec![f64::NAN; ri * q * q];
                for (k0, wk) in w.iter_mut().enumerate() {
                    let tt = t.tags[k0 * t.nm + mi] as usize;
                    let tp = t.tags[k0 * t.nm + mri] as usize;
                    for (k1, wv) in wk.iter_mut().enumerate() {
                        let slot = &mut lik[(k1 * q + tt) * q + tp];
                        if slot.is_nan() {
                            let mut acc = 0.0;
                            for pos in 0..r {
                                let x = (k1 * rj + tt) * r + pos;
                                let pa = t.acc[x][tp][k1];
                                acc += pz[x] * if *accepted { pa } else { 1.0 - pa };
                            }
                            *slot = acc / r as f64;
                        }
                        *wv *= *slot;
                    }
                }
            }
            ViewEvent::Injection { m, y, accepted } => {
                let mi = fam.message_index(m) as usize;
                for (k0, wk) in w.iter_mut().enumerate() {
                    let j = inst.tag_embed(t.tags[k0 * t.nm + mi]);
                    let row = inst.decode_in_column(j, y).map(|d| d / r);
                    for (k1, wv) in wk.iter_mut().enumerate() {
                        if (row == Some(k1)) != *accepted {
                            *wv = 0.0;
                        }
                    }
                }
            }
        }
    }
    w
}

/// The best single injection for `view` and its exact success probability.
///
/// Ties go to the smallest message index, then the smallest output word.
pub fn optimal_type2(t: &OracleTables, inst: &ProtocolInstance, view: &AdversaryView) -> Result<OracleResult> {
    let fam = inst.family();
    let cb = inst.codebook();
    let (ri, r) = (cb.rows(), cb.r());
    let q = fam.q() as usize;
    let dec = inst.decode_tables().expect("checked when the tables were built");
    let total_y = dec[0].len();
    let w = posterior(t, inst, view);
    let total: f64 = w.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(Error::Contract("view has zero probability under every key".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut mass = vec![0.0f64; q * ri];
    for m in 0..t.nm {
        mass.iter_mut().for_each(|v| *v = 0.0);
        for (k0, wk) in w.iter().enumerate() {
            let tag = t.tags[k0 * t.nm + m] as usize;
            for (k1, &wv) in wk.iter().enumerate() {
                mass[tag * ri + k1] += wv;
            }
        }
        for y in 0..total_y {
            let mut v = 0.0;
            for tag in 0..q {
                let d = dec[inst.tag_embed(tag as u32)][y];
                if d != NO_DECODE {
                    v += mass[tag * ri + d as usize / r];
                }
            }
            if v > best.0 {
                best = (v, m, y);
            }
        }
    }
    let mut y_hat = vec![0u8; cb.n()];
    word_from_index(best.2, inst.w1().outputs(), &mut y_hat);
    Ok(OracleResult {
        value: best.0 / total,
        m_hat: fam.message_from_index(best.1 as u64),
        y_hat,
    })
}
