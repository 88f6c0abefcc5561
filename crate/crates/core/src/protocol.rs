//! The authentication protocol: key generation, Alice's transmission, Bob's
//! verification and honest sessions.
//!
//! Tags live in `[0, q)` and are embedded into columns by the identity, so an
//! instance needs `q ≤ J`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::asu::{HashKey, Message, StinsonFamily};
use crate::codebook::{Codebook, NO_DECODE};
use crate::error::{invalid, Error, Result};
use crate::infotheory::{sample_word, Channel};
use crate::rng::SeedTree;
use crate::stats::Estimate;
use crate::types::{index_of_word, word_space, TypicalityTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedKey {
    pub k0: HashKey,
    pub k1: usize,
}

#[derive(Debug, Clone)]
pub struct ProtocolInstance {
    codebook: Codebook,
    family: StinsonFamily,
    eps: f64,
    table: TypicalityTable,
    /// Per column, decode result of every output word when `|Y|^n` fits the budget.
    decode_tables: Option<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript {
    pub m: Message,
    pub m_received: Message,
    pub tag: u32,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    pub z: Vec<u8>,
    pub accepted: bool,
}

/// The independent generator streams of one trial. Every role owns a stream,
/// so what one role draws never shifts another role's randomness.
#[derive(Debug, Clone)]
pub struct TrialRng {
    pub key: ChaCha20Rng,
    pub alice: ChaCha20Rng,
    pub w1: ChaCha20Rng,
    pub w2: ChaCha20Rng,
    pub adversary: ChaCha20Rng,
    pub messages: ChaCha20Rng,
}

impl TrialRng {
    pub fn new(seeds: &SeedTree, trial: u64) -> Self {
        let t = seeds.child("trial", trial);
        TrialRng {
            key: t.stream("key", 0),
            alice: t.stream("alice", 0),
            w1: t.stream("w1", 0),
            w2: t.stream("w2", 0),
            adversary: t.stream("adversary", 0),
            messages: t.stream("messages", 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyPolicy {
    /// A new uniform key for every trial.
    Fresh,
    /// One key reused for every trial.
    Fixed(SharedKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageSource {
    /// Uniform over the full message space.
    Random,
    /// The list, cycled by session index.
    Fixed(Vec<Message>),
}

impl MessageSource {
    pub fn message<R: Rng + ?Sized>(&self, fam: &StinsonFamily, session: usize, rng: &mut R) -> Message {
        match self {
            MessageSource::Random => fam.random_message(rng),
            MessageSource::Fixed(list) => list[session % list.len()].clone(),
        }
    }

    pub fn validate(&self, fam: &StinsonFamily) -> Result<()> {
        if let MessageSource::Fixed(list) = self {
            if list.is_empty() {
                return Err(invalid("messages", "fixed message list is empty"));
            }
            for m in list {
                fam.check_message(m)?;
            }
        }
        Ok(())
    }
}

impl ProtocolInstance {
    /// Binds a codebook to a hash family. `eps` defaults to the codebook's own.
    pub fn new(codebook: Codebook, family: StinsonFamily, eps: Option<f64>) -> Result<Self> {
        let q = family.q() as usize;
        if q > codebook.cols() {
            return Err(invalid(
                "hash.q",
                format!("tag range q={q} must not exceed the column count J={}", codebook.cols()),
            ));
        }
        let eps = eps.unwrap_or(codebook.eps());
        let bp = codebook.params();
        let table = TypicalityTable::new(&bp.type_p, &bp.w1, eps)?;
        let decode_tables = if word_space(bp.w1.outputs(), codebook.n(), bp.budgets.exhaustive_output).is_ok() {
            let tables = (0..codebook.cols())
                .map(|j| codebook.column(j, &table).decode_table(bp.budgets.exhaustive_output))
                .collect::<Result<Vec<_>>>()?;
            Some(tables)
        } else {
            None
        };
        Ok(ProtocolInstance {
            codebook,
            family,
            eps,
            table,
            decode_tables,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn family(&self) -> &StinsonFamily {
        &self.family
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn table(&self) -> &TypicalityTable {
        &self.table
    }

    pub fn w1(&self) -> &Channel {
        &self.codebook.params().w1
    }

    pub fn w2(&self) -> &Channel {
        &self.codebook.params().w2
    }

    pub fn rows(&self) -> usize {
        self.codebook.rows()
    }

    pub fn tag_embed(&self, tag: u32) -> usize {
        tag as usize
    }

    pub fn check_key(&self, key: &SharedKey) -> Result<()> {
        self.family.check_key(&key.k0)?;
        if key.k1 >= self.rows() {
            return Err(invalid("k1", format!("{} is not below I={}", key.k1, self.rows())));
        }
        Ok(())
    }

    pub fn keygen<R: Rng + ?Sized>(&self, rng: &mut R) -> SharedKey {
        let k0 = self.family.random_key(rng);
        let k1 = rng.gen_range(0..self.rows());
        SharedKey { k0, k1 }
    }

    /// Number of keys `|K0|·I`.
    pub fn key_count(&self) -> u128 {
        self.family.key_space() * self.rows() as u128
    }

    pub fn tag(&self, key: &SharedKey, m: &[u32]) -> u32 {
        self.family.hash_unchecked(&key.k0, m)
    }

    /// Returns the message for the noiseless channel and a uniform codeword of
    /// cell `(k1, tag)`.
    pub fn alice_authenticate<R: Rng + ?Sized>(
        &self,
        key: &SharedKey,
        m: &[u32],
        rng: &mut R,
    ) -> Result<(Message, Vec<u8>)> {
        self.family.check_message(m)?;
        let j = self.tag_embed(self.tag(key, m));
        let pos = rng.gen_range(0..self.codebook.r());
        Ok((m.to_vec(), self.codebook.codeword(key.k1, j, pos).to_vec()))
    }

    /// Index of the unique typical codeword of column `j`, row-major.
    pub fn decode_in_column(&self, j: usize, y: &[u8]) -> Option<usize> {
        match &self.decode_tables {
            Some(t) => {
                let d = t[j][index_of_word(y, self.w1().outputs())];
                (d != NO_DECODE).then_some(d as usize)
            }
            None => self.codebook.column(j, &self.table).decode(y),
        }
    }

    pub fn decode_tables(&self) -> Option<&[Vec<u32>]> {
        self.decode_tables.as_deref()
    }

    pub fn bob_verify(&self, key: &SharedKey, m_received: &[u32], y: &[u8]) -> bool {
        if self.family.check_message(m_received).is_err() || y.len() != self.codebook.n() {
            return false;
        }
        if y.iter().any(|&b| b as usize >= self.w1().outputs()) {
            return false;
        }
        let j = self.tag_embed(self.tag(key, m_received));
        match self.decode_in_column(j, y) {
            Some(k) => k / self.codebook.r() == key.k1,
            None => false,
        }
    }

    /// Alice sends `m`; both channels are sampled; Bob verifies the unaltered message.
    pub fn run_honest_session(&self, key: &SharedKey, m: &[u32], rngs: &mut TrialRng) -> Result<SessionTranscript> {
        let (m, x) = self.alice_authenticate(key, m, &mut rngs.alice)?;
        let y = sample_word(&x, self.w1(), &mut rngs.w1);
        let z = sample_word(&x, self.w2(), &mut rngs.w2);
        let accepted = self.bob_verify(key, &m, &y);
        Ok(SessionTranscript {
            tag: self.tag(key, &m),
            m_received: m.clone(),
            m,
            x,
            y,
            z,
            accepted,
        })
    }

    fn trial_key(&self, policy: &KeyPolicy, rngs: &mut TrialRng) -> Result<SharedKey> {
        match policy {
            KeyPolicy::Fresh => Ok(self.keygen(&mut rngs.key)),
            KeyPolicy::Fixed(k) => {
                self.check_key(k)?;
                Ok(k.clone())
            }
        }
    }

    /// One honest session of trial `t` under the counter-based streams.
    pub fn completeness_trial(
        &self,
        policy: &KeyPolicy,
        source: &MessageSource,
        seeds: &SeedTree,
        t: u64,
    ) -> Result<SessionTranscript> {
        let mut rngs = TrialRng::new(seeds, t);
        let key = self.trial_key(policy, &mut rngs)?;
        let m = source.message(&self.family, t as usize, &mut rngs.messages);
        self.run_honest_session(&key, &m, &mut rngs)
    }

    /// Fraction of rejected honest sessions with its Wilson interval.
    pub fn completeness_error(
        &self,
        policy: &KeyPolicy,
        source: &MessageSource,
        trials: u64,
        seeds: &SeedTree,
    ) -> Result<Estimate> {
        if trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        source.validate(&self.family)?;
        let mut rejected = 0u64;
        for t in 0..trials {
            if !self.completeness_trial(policy, source, seeds, t)?.accepted {
                rejected += 1;
            }
        }
        Ok(Estimate::from_counts(rejected, trials))
    }

    /// `P(accept | x sent, Bob decodes in column j, Bob's row i)` for every
    /// codeword `x` (row-major over all cells), column and row.
    pub fn acceptance_table(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let tables = self.decode_tables.as_ref().ok_or(Error::BudgetExceeded {
            what: "output space enumeration",
            needed: u128::MAX,
            limit: self.codebook.params().budgets.exhaustive_output,
        })?;
        let total = tables[0].len();
        let r = self.codebook.r();
        let (ri, rj) = (self.codebook.rows(), self.codebook.cols());
        Ok(self
            .codebook
            .all_codewords()
            .iter()
            .map(|x| {
                let probs = crate::types::output_distribution(x, self.w1(), total);
                (0..rj)
                    .map(|j| {
                        let mut acc = vec![0.0; ri];
                        for (p, &d) in probs.iter().zip(&tables[j]) {
                            if d != NO_DECODE {
                                acc[d as usize / r] += p;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect())
    }
}
