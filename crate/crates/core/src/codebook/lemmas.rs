//! Desk-scale checkers for the random-coding lemmas behind the construction,
//! plus the codebook-level anti-substitution proxy.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{exact_error, mc_error, z_mixture, Budgets, Codebook};
use crate::error::{invalid, Result};
use crate::infotheory::{l1, sample_word, Channel};
use crate::math::{ordered_sum, sqrt};
use crate::stats::{mean_se, median};
use crate::types::{output_distribution, word_from_index, word_space, TypeP, TypicalityTable};

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma7Report {
    pub exact_mean: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub pairs: u64,
    pub within_3se: bool,
}

/// Bitset of `T_[W]ε(x)` over all output words, one per member.
fn typical_bitsets(
    members: &[Vec<u8>],
    table: &TypicalityTable,
    outputs: usize,
    budget: u128,
) -> Result<Vec<Vec<u64>>> {
    let n = table.n();
    let total = word_space(outputs, n, budget)?;
    let words = total.div_ceil(64);
    let mut sets = vec![vec![0u64; words]; members.len()];
    let mut y = vec![0u8; n];
    for idx in 0..total {
        word_from_index(idx, outputs, &mut y);
        for (x, set) in members.iter().zip(sets.iter_mut()) {
            if table.typical(x, &y) {
                set[idx / 64] |= 1 << (idx % 64);
            }
        }
    }
    Ok(sets)
}

fn intersection(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Mean of `|T_[W]ε(x1) ∩ T_[W]ε(x2)|` over distinct pairs of the type class:
/// exactly over all pairs, and empirically over `trials` uniform pairs.
pub fn check_lemma7<R: Rng + ?Sized>(
    tp: &TypeP,
    ch: &Channel,
    eps: f64,
    trials: u64,
    budgets: &Budgets,
    rng: &mut R,
) -> Result<Lemma7Report> {
    let members = tp.members(budgets.enumeration)?;
    if members.len() < 2 {
        return Err(invalid("type_p", "need at least two members for distinct pairs"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let table = TypicalityTable::new(tp, ch, eps)?;
    let sets = typical_bitsets(&members, &table, ch.outputs(), budgets.exhaustive_output)?;
    let t = members.len();
    let mut total = 0u64;
    for a in 0..t {
        for b in a + 1..t {
            total += intersection(&sets[a], &sets[b]) as u64;
        }
    }
    let pairs = (t * (t - 1) / 2) as u64;
    let exact_mean = total as f64 / pairs as f64;
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let a = rng.gen_range(0..t);
            let mut b = rng.gen_range(0..t - 1);
            if b >= a {
                b += 1;
            }
            intersection(&sets[a], &sets[b]) as f64
        })
        .collect();
    let (empirical_mean, empirical_se) = mean_se(&samples);
    Ok(Lemma7Report {
        exact_mean,
        empirical_mean,
        empirical_se,
        pairs,
        within_3se: (empirical_mean - exact_mean).abs() <= 3.0 * empirical_se + 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma8Report {
    pub errors: Vec<f64>,
    pub median: f64,
    pub mean: f64,
}

/// Exact error `e(A)` of the typicality decoder for `trials` uniformly random
/// `ell`-subsets `A` of the type class.
pub fn check_lemma8_packing<R: Rng + ?Sized>(
    tp: &TypeP,
    ch: &Channel,
    ell: usize,
    eps: f64,
    trials: u64,
    budgets: &Budgets,
    rng: &mut R,
) -> Result<Lemma8Report> {
    let members = tp.members(budgets.enumeration)?;
    if ell == 0 || ell > members.len() {
        return Err(invalid("ell", "must lie in [1, |T|]"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let table = TypicalityTable::new(tp, ch, eps)?;
    let mut errors = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let mut pick = rand::seq::index::sample(rng, members.len(), ell).into_vec();
        pick.sort_unstable();
        let code: Vec<&[u8]> = pick.iter().map(|&i| members[i].as_slice()).collect();
        errors.push(exact_error(&code, &table, ch, budgets.exhaustive_output)?);
    }
    let med = median(&errors);
    let mean = ordered_sum(errors.iter().copied()) / errors.len() as f64;
    Ok(Lemma8Report {
        errors,
        median: med,
        mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma11Report {
    pub cell_sizes: Vec<usize>,
    /// `max_b | |A_b| / (|T|/k) - 1 |`.
    pub max_cell_imbalance: f64,
    pub sd_value: f64,
}

/// Uniform random `k`-partition of the type class and the exact
/// `Σ_b P̃(A_b)·SD(P̃_{Y|b}; P̃_Y)`.
pub fn check_lemma11_partition<R: Rng + ?Sized>(
    tp: &TypeP,
    ch: &Channel,
    k: usize,
    budgets: &Budgets,
    rng: &mut R,
) -> Result<Lemma11Report> {
    let members = tp.members(budgets.enumeration)?;
    let t = members.len();
    if k == 0 || k > t {
        return Err(invalid("k", "must lie in [1, |T|]"));
    }
    let total = word_space(ch.outputs(), tp.n() as usize, budgets.exhaustive_output)?;
    let mut cells: Vec<Vec<&[u8]>> = vec![Vec::new(); k];
    for m in &members {
        cells[rng.gen_range(0..k)].push(m.as_slice());
    }
    let all: Vec<&[u8]> = members.iter().map(|m| m.as_slice()).collect();
    let global = z_mixture(&all, ch, total);
    let per: Vec<f64> = cells
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| (c.len() as f64 / t as f64) * l1(&z_mixture(c, ch, total), &global))
        .collect();
    let share = t as f64 / k as f64;
    let max_cell_imbalance = cells
        .iter()
        .map(|c| (c.len() as f64 / share - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Lemma11Report {
        cell_sizes: cells.iter().map(|c| c.len()).collect(),
        max_cell_imbalance,
        sd_value: ordered_sum(per),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Property3Report {
    /// Probability that the output of a uniform codeword of column `j` is
    /// typical with some codeword of the same row in another column `j'`.
    pub cross_typical: f64,
    /// Probability that honest decoding in the right column returns the sent codeword.
    pub honest_success: f64,
    pub exact: bool,
    /// Standard error of the Monte Carlo estimates (0 when exact).
    pub std_error: f64,
}

/// Anti-substitution proxy: wrong-column typicality against honest decoding.
pub fn property3_proxy<R: Rng + ?Sized>(cb: &Codebook, trials: u64, rng: &mut R) -> Result<Property3Report> {
    let (ri, rj, r) = (cb.rows(), cb.cols(), cb.r());
    if rj < 2 {
        return Err(invalid("cols", "the proxy needs at least two columns"));
    }
    let bp = cb.params();
    let table = cb.typicality()?;
    let typical_with_cell = |y: &[u8], i: usize, j: usize| cb.cell(i, j).iter().any(|x| table.typical(x, y));

    if let Ok(total) = word_space(bp.w1.outputs(), cb.n(), bp.budgets.exhaustive_output) {
        let mut cross = Vec::new();
        let mut honest = Vec::new();
        let mut y = vec![0u8; cb.n()];
        for j in 0..rj {
            let col = cb.column(j, &table);
            let dec = col.decode_table(bp.budgets.exhaustive_output)?;
            for i in 0..ri {
                let hit: Vec<Vec<bool>> = (0..rj)
                    .map(|jp| {
                        if jp == j {
                            return Vec::new();
                        }
                        (0..total)
                            .map(|idx| {
                                word_from_index(idx, bp.w1.outputs(), &mut y);
                                typical_with_cell(&y, i, jp)
                            })
                            .collect()
                    })
                    .collect();
                for pos in 0..r {
                    let x = cb.codeword(i, j, pos);
                    let probs = output_distribution(x, &bp.w1, total);
                    let k = (i * r + pos) as u32;
                    honest.push(ordered_sum(
                        probs.iter().zip(&dec).filter(|(_, &d)| d == k).map(|(p, _)| *p),
                    ));
                    for (jp, h) in hit.iter().enumerate() {
                        if jp != j {
                            cross.push(ordered_sum(probs.iter().zip(h).filter(|(_, &b)| b).map(|(p, _)| *p)));
                        }
                    }
                }
            }
        }
        return Ok(Property3Report {
            cross_typical: ordered_sum(cross.iter().copied()) / cross.len() as f64,
            honest_success: ordered_sum(honest.iter().copied()) / honest.len() as f64,
            exact: true,
            std_error: 0.0,
        });
    }

    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let (mut cross, mut honest) = (0u64, 0u64);
    for _ in 0..trials {
        let j = rng.gen_range(0..rj);
        let mut jp = rng.gen_range(0..rj - 1);
        if jp >= j {
            jp += 1;
        }
        let i = rng.gen_range(0..ri);
        let pos = rng.gen_range(0..r);
        let y = sample_word(cb.codeword(i, j, pos), &bp.w1, rng);
        if typical_with_cell(&y, i, jp) {
            cross += 1;
        }
        if cb.column(j, &table).decode(&y) == Some(i * r + pos) {
            honest += 1;
        }
    }
    let t = trials as f64;
    let (pc, ph) = (cross as f64 / t, honest as f64 / t);
    Ok(Property3Report {
        cross_typical: pc,
        honest_success: ph,
        exact: false,
        std_error: sqrt(pc * (1.0 - pc) / t).max(sqrt(ph * (1.0 - ph) / t)),
    })
}

/// Monte Carlo error of an arbitrary code, exposed for agreement checks.
pub fn mc_code_error<R: Rng + ?Sized>(
    code: &[&[u8]],
    tp: &TypeP,
    ch: &Channel,
    eps: f64,
    trials: u64,
    rng: &mut R,
) -> Result<crate::stats::Estimate> {
    let table = TypicalityTable::new(tp, ch, eps)?;
    Ok(mc_error(code, &table, ch, trials, rng))
}
