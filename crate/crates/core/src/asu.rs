//! Almost strongly universal hashing over GF(q) by tree composition.
//!
//! A message is a tuple of `2^s` field elements. The key holds one element
//! `c_i` per level plus an output pair `(a, b)`. Levels `1..s-1` halve the
//! tuple with `(u, v) ↦ u + c_i·v`; the final pair `(u, v)` is mapped to
//! `a·u + c_s·v + b`. The family has exactly uniform tags and collision
//! parameter at most `s/q`, which [`certify_asu`] checks exhaustively.
//!
//! Keys are `s + 2` field elements, so the key space has `q^(s+2)` members.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::field::Field;

pub type Message = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StinsonFamily {
    field: Field,
    s: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HashKey {
    pub levels: Vec<u32>,
    pub a: u32,
    pub b: u32,
}

impl StinsonFamily {
    pub fn new(q: u64, s: u32) -> Result<Self> {
        if s == 0 || s > 16 {
            return Err(invalid("s", "must be in 1..=16"));
        }
        Ok(StinsonFamily {
            field: Field::new(q)?,
            s,
        })
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn message_len(&self) -> usize {
        1 << self.s
    }

    /// The guaranteed collision parameter `s/q`.
    pub fn epsilon_bound(&self) -> f64 {
        self.s as f64 / self.q() as f64
    }

    /// `q^(s+2)`, saturating.
    pub fn key_space(&self) -> u128 {
        pow_sat(self.q() as u128, self.s + 2)
    }

    /// `q^(2^s)`, saturating.
    pub fn message_space(&self) -> u128 {
        pow_sat(self.q() as u128, 1u32 << self.s)
    }

    pub fn check_key(&self, key: &HashKey) -> Result<()> {
        let q = self.q();
        if key.levels.len() != self.s as usize {
            return Err(Error::LengthMismatch {
                expected: self.s as usize,
                got: key.levels.len(),
            });
        }
        if key.levels.iter().chain([&key.a, &key.b]).any(|&e| e >= q) {
            return Err(invalid("key", "element outside the field"));
        }
        Ok(())
    }

    pub fn check_message(&self, msg: &[u32]) -> Result<()> {
        if msg.len() != self.message_len() {
            return Err(Error::LengthMismatch {
                expected: self.message_len(),
                got: msg.len(),
            });
        }
        if msg.iter().any(|&e| e >= self.q()) {
            return Err(invalid("message", "element outside the field"));
        }
        Ok(())
    }

    pub fn hash(&self, key: &HashKey, msg: &[u32]) -> Result<u32> {
        self.check_key(key)?;
        self.check_message(msg)?;
        Ok(self.hash_unchecked(key, msg))
    }

    /// Hash without validation; inputs must already be well formed.
    pub fn hash_unchecked(&self, key: &HashKey, msg: &[u32]) -> u32 {
        let f = &self.field;
        let s = self.s as usize;
        let mut cur: Vec<u32> = msg.to_vec();
        for &c in &key.levels[..s - 1] {
            cur = cur.chunks(2).map(|p| f.add(p[0], f.mul(c, p[1]))).collect();
        }
        debug_assert_eq!(cur.len(), 2);
        let c = key.levels[s - 1];
        f.add(f.add(f.mul(key.a, cur[0]), f.mul(c, cur[1])), key.b)
    }

    pub fn random_key<R: Rng + ?Sized>(&self, rng: &mut R) -> HashKey {
        let q = self.q();
        HashKey {
            levels: (0..self.s).map(|_| rng.gen_range(0..q)).collect(),
            a: rng.gen_range(0..q),
            b: rng.gen_range(0..q),
        }
    }

    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Message {
        let q = self.q();
        (0..self.message_len()).map(|_| rng.gen_range(0..q)).collect()
    }

    /// Key with lexicographic index `idx`; digit order is `c_1..c_s, a, b`.
    pub fn key_from_index(&self, idx: u64) -> HashKey {
        let digits = digits_of(idx, self.q(), self.s as usize + 2);
        HashKey {
            levels: digits[..self.s as usize].to_vec(),
            a: digits[self.s as usize],
            b: digits[self.s as usize + 1],
        }
    }

    pub fn key_index(&self, key: &HashKey) -> u64 {
        let q = self.q() as u64;
        key.levels
            .iter()
            .chain([&key.a, &key.b])
            .fold(0u64, |acc, &d| acc * q + d as u64)
    }

    pub fn message_from_index(&self, idx: u64) -> Message {
        digits_of(idx, self.q(), self.message_len())
    }

    pub fn message_index(&self, msg: &[u32]) -> u64 {
        let q = self.q() as u64;
        msg.iter().fold(0u64, |acc, &d| acc * q + d as u64)
    }

    /// Appends a terminal `1` then zeros up to the full tuple length.
    pub fn pad(&self, symbols: &[u32]) -> Result<Message> {
        let len = self.message_len();
        if symbols.len() + 1 > len {
            return Err(invalid(
                "message",
                alloc::format!("{} symbols do not fit a padded tuple of {len}", symbols.len()),
            ));
        }
        if symbols.iter().any(|&e| e >= self.q()) {
            return Err(invalid("message", "element outside the field"));
        }
        let mut out = Vec::with_capacity(len);
        out.extend_from_slice(symbols);
        out.push(1);
        out.resize(len, 0);
        Ok(out)
    }

    /// Digits per byte in the base-q expansion.
    pub fn digits_per_byte(&self) -> usize {
        let q = self.q() as u64;
        let mut d = 1;
        let mut p = q;
        while p < 256 {
            p *= q;
            d += 1;
        }
        d
    }

    /// Encodes a byte string: each byte becomes `digits_per_byte` base-q digits
    /// (most significant first), then the result is padded.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Result<Message> {
        let d = self.digits_per_byte();
        let mut sym = Vec::with_capacity(bytes.len() * d);
        for &b in bytes {
            sym.extend(digits_of(b as u64, self.q(), d));
        }
        self.pad(&sym)
    }
}

fn pow_sat(b: u128, e: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(b);
    }
    acc
}

fn digits_of(mut idx: u64, q: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        *slot = (idx % q as u64) as u32;
        idx /= q as u64;
    }
    out
}

pub const DEFAULT_EXHAUSTIVE_BUDGET: u128 = 1 << 26;

/// Tags of every (key, message) pair, key-major: `table[k * |M| + m]`.
pub fn tag_table(fam: &StinsonFamily, budget: u128) -> Result<Vec<u32>> {
    let nk = fam.key_space();
    let nm = fam.message_space();
    let needed = nk.saturating_mul(nm);
    if needed > budget {
        return Err(Error::BudgetExceeded {
            what: "exhaustive hash table",
            needed,
            limit: budget,
        });
    }
    let (nk, nm) = (nk as u64, nm as u64);
    let msgs: Vec<Message> = (0..nm).map(|m| fam.message_from_index(m)).collect();
    let mut out = Vec::with_capacity((nk * nm) as usize);
    for k in 0..nk {
        let key = fam.key_from_index(k);
        for m in &msgs {
            out.push(fam.hash_unchecked(&key, m));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsuCertificate {
    pub q: u32,
    pub s: u32,
    pub keys: u64,
    pub uniformity_exact: bool,
    /// Largest `|{k: h_k(x1)=t1, h_k(x2)=t2}|` over distinct messages and tag pairs.
    pub max_pair_count: u64,
    pub epsilon_measured: f64,
    /// `epsilon_measured ≤ s/q`, decided in integer arithmetic.
    pub within_bound: bool,
}

/// Exhaustive check of both ASU conditions.
pub fn certify_asu(fam: &StinsonFamily, budget: u128) -> Result<AsuCertificate> {
    let table = tag_table(fam, budget)?;
    certify_from_table(fam, &table)
}

/// Certification on a precomputed (possibly tampered) tag table.
pub fn certify_from_table(fam: &StinsonFamily, table: &[u32]) -> Result<AsuCertificate> {
    let q = fam.q() as usize;
    let nk = fam.key_space() as usize;
    let nm = fam.message_space() as usize;
    if table.len() != nk * nm {
        return Err(Error::LengthMismatch {
            expected: nk * nm,
            got: table.len(),
        });
    }
    let target = (nk / q) as u64;
    let mut uniform = nk.is_multiple_of(q);
    // transpose to message-major for cache-friendly pair loops
    let mut by_msg = vec![0u16; nk * nm];
    for k in 0..nk {
        for m in 0..nm {
            by_msg[m * nk + k] = table[k * nm + m] as u16;
        }
    }
    for m in 0..nm {
        let mut counts = vec![0u64; q];
        for &t in &by_msg[m * nk..(m + 1) * nk] {
            counts[t as usize] += 1;
        }
        if counts.iter().any(|&c| c != target) {
            uniform = false;
        }
    }
    let mut max_pair = 0u64;
    let mut pair = vec![0u64; q * q];
    for m1 in 0..nm {
        let r1 = &by_msg[m1 * nk..(m1 + 1) * nk];
        for m2 in m1 + 1..nm {
            let r2 = &by_msg[m2 * nk..(m2 + 1) * nk];
            pair.iter_mut().for_each(|c| *c = 0);
            for (&a, &b) in r1.iter().zip(r2) {
                pair[a as usize * q + b as usize] += 1;
            }
            max_pair = max_pair.max(*pair.iter().max().unwrap_or(&0));
        }
    }
    let eps = max_pair as f64 * q as f64 / nk as f64;
    let within = (max_pair as u128) * (q as u128) * (q as u128) <= fam.s() as u128 * nk as u128;
    Ok(AsuCertificate {
        q: fam.q(),
        s: fam.s(),
        keys: nk as u64,
        uniformity_exact: uniform,
        max_pair_count: max_pair,
        epsilon_measured: eps,
        within_bound: within,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairBound {
    /// `P(h(m') = t', h(m) = t)` under a uniform key, indexed `[t' * q + t]`.
    pub joint: Vec<f64>,
    pub max: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact joint tag distribution of two messages under a uniform key.
pub fn check_pair_bound(fam: &StinsonFamily, m_prime: &[u32], m: &[u32], budget: u128) -> Result<PairBound> {
    fam.check_message(m_prime)?;
    fam.check_message(m)?;
    let nk = fam.key_space();
    if nk > budget {
        return Err(Error::BudgetExceeded {
            what: "key enumeration",
            needed: nk,
            limit: budget,
        });
    }
    let q = fam.q() as usize;
    let mut counts = vec![0u64; q * q];
    for k in 0..nk as u64 {
        let key = fam.key_from_index(k);
        let a = fam.hash_unchecked(&key, m_prime) as usize;
        let b = fam.hash_unchecked(&key, m) as usize;
        counts[a * q + b] += 1;
    }
    let joint: Vec<f64> = counts.iter().map(|&c| c as f64 / nk as f64).collect();
    let max = joint.iter().cloned().fold(0.0, f64::max);
    let bound = fam.epsilon_bound() / q as f64;
    Ok(PairBound {
        holds: m_prime == m || max <= bound + 1e-12,
        joint,
        max,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    #[test]
    fn hand_examples() {
        let f = StinsonFamily::new(2, 1).unwrap();
        let key = HashKey {
            levels: vec![0],
            a: 1,
            b: 0,
        };
        for m1 in 0..2 {
            for m2 in 0..2 {
                assert_eq!(f.hash(&key, &[m1, m2]).unwrap(), m1);
            }
        }
        let f = StinsonFamily::new(3, 1).unwrap();
        let key = HashKey {
            levels: vec![1],
            a: 1,
            b: 0,
        };
        assert_eq!(f.hash(&key, &[1, 2]).unwrap(), 0);
    }

    /// The same family written as an explicit linear form in the message.
    fn oracle_hash(q: u32, s: u32, key: &HashKey, msg: &[u32]) -> u32 {
        // coefficient of msg[j]: product over levels i < s-1 of c_i^(bit i of j),
        // then times a or c_s depending on the top bit.
        let field = Field::new(q as u64).unwrap();
        let mut acc = key.b;
        for (j, &m) in msg.iter().enumerate() {
            let mut coef = 1;
            for i in 0..(s - 1) as usize {
                if j >> i & 1 == 1 {
                    coef = field.mul(coef, key.levels[i]);
                }
            }
            let top = if j >> (s - 1) & 1 == 1 {
                key.levels[s as usize - 1]
            } else {
                key.a
            };
            coef = field.mul(coef, top);
            acc = field.add(acc, field.mul(coef, m));
        }
        acc
    }

    #[test]
    fn matches_linear_form_oracle_exhaustively() {
        for (q, s) in [(2u64, 1u32), (2, 2), (3, 2), (4, 2), (2, 3)] {
            let f = StinsonFamily::new(q, s).unwrap();
            for k in 0..f.key_space() as u64 {
                let key = f.key_from_index(k);
                assert_eq!(f.key_index(&key), k);
                for m in 0..f.message_space() as u64 {
                    let msg = f.message_from_index(m);
                    assert_eq!(f.message_index(&msg), m);
                    assert_eq!(f.hash(&key, &msg).unwrap(), oracle_hash(q as u32, s, &key, &msg));
                }
            }
        }
    }

    #[test]
    fn certification_small() {
        let c = certify_asu(&StinsonFamily::new(2, 1).unwrap(), 1 << 20).unwrap();
        assert!(c.uniformity_exact && c.within_bound);
        assert_eq!(c.epsilon_measured, 0.5);
        let c = certify_asu(&StinsonFamily::new(3, 1).unwrap(), 1 << 20).unwrap();
        assert!((c.epsilon_measured - 1.0 / 3.0).abs() < 1e-15);
        let c = certify_asu(&StinsonFamily::new(3, 2).unwrap(), 1 << 20).unwrap();
        assert!(c.within_bound);
        assert!(c.epsilon_measured <= 2.0 / 3.0 + 1e-15);
        assert!((c.epsilon_measured - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn tampered_table_breaks_uniformity() {
        let f = StinsonFamily::new(2, 1).unwrap();
        let mut t = tag_table(&f, 1 << 20).unwrap();
        t[0] ^= 1;
        assert!(!certify_from_table(&f, &t).unwrap().uniformity_exact);
    }

    #[test]
    fn pair_bound_examples() {
        let f = StinsonFamily::new(3, 1).unwrap();
        let r = check_pair_bound(&f, &[0, 1], &[0, 2], 1 << 20).unwrap();
        assert!(r.holds);
        assert!(r.max <= 1.0 / 9.0 + 1e-12);
        let f = StinsonFamily::new(2, 2).unwrap();
        let r = check_pair_bound(&f, &[1, 0, 0, 0], &[0, 0, 1, 1], 1 << 20).unwrap();
        assert!(r.holds && r.max <= 0.5 + 1e-12);
        let r = check_pair_bound(&f, &[1, 0, 0, 0], &[1, 0, 0, 0], 1 << 20).unwrap();
        for t1 in 0..2 {
            for t2 in 0..2 {
                if t1 != t2 {
                    assert_eq!(r.joint[t1 * 2 + t2], 0.0);
                }
            }
        }
    }

    #[test]
    fn padding_and_bytes() {
        let f = StinsonFamily::new(2, 4).unwrap();
        assert_eq!(f.digits_per_byte(), 8);
        let m = f.encode_bytes(b"A").unwrap();
        assert_eq!(m.len(), 16);
        assert_eq!(&m[..9], &[0, 1, 0, 0, 0, 0, 0, 1, 1]);
        assert!(m[9..].iter().all(|&x| x == 0));
        assert!(f.encode_bytes(b"AB").is_err());
        // padding is injective on short inputs
        assert_ne!(f.pad(&[0]).unwrap(), f.pad(&[0, 0]).unwrap());
        assert_eq!(StinsonFamily::new(16, 3).unwrap().digits_per_byte(), 2);
        assert!(StinsonFamily::new(6, 3).is_err());
    }

    #[test]
    fn tags_uniform_for_fixed_message_random_keys() {
        let f = StinsonFamily::new(5, 2).unwrap();
        let mut rng = SeedTree::new(11).stream("asu", 0);
        let msg = f.random_message(&mut rng);
        let mut counts = [0u64; 5];
        for k in 0..f.key_space() as u64 {
            counts[f.hash_unchecked(&f.key_from_index(k), &msg) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == f.key_space() as u64 / 5));
    }
}
