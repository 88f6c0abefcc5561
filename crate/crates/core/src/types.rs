//! Method of types: type classes, their sizes and enumeration, and the
//! (conditional) ε-typicality tests.
//!
//! Types are kept as integer counts. Typicality comparisons use an absolute
//! slack of `1e-12` so that boundary cases computed from exact ratios are not
//! lost to rounding.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigUint;

use crate::error::{invalid, Error, Result};
use crate::infotheory::{Channel, Distribution, Sequence};
use crate::math::{log2, ordered_sum};

pub const TYPICALITY_SLACK: f64 = 1e-12;
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeP {
    counts: Vec<u32>,
    n: u32,
}

impl TypeP {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() || counts.len() > 256 {
            return Err(invalid("type", "alphabet size must be in 1..=256"));
        }
        let n: u32 = counts.iter().sum();
        if n == 0 {
            return Err(invalid("type", "length must be positive"));
        }
        Ok(TypeP { counts, n })
    }

    pub fn of(x: &Sequence) -> Result<Self> {
        let mut counts = vec![0u32; x.alphabet];
        for &s in &x.symbols {
            counts[s as usize] += 1;
        }
        TypeP::new(counts)
    }

    /// Rounds `p` to a type of length `n` by largest remainders (ties to the
    /// lower symbol index).
    pub fn from_distribution(p: &Distribution, n: u32) -> Result<Self> {
        let k = p.size();
        let scaled: Vec<f64> = p.mass().iter().map(|&m| m * n as f64).collect();
        let mut counts: Vec<u32> = scaled.iter().map(|&s| libm::floor(s + 1e-9) as u32).collect();
        let mut left = n as i64 - counts.iter().map(|&c| c as i64).sum::<i64>();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - counts[a] as f64;
            let rb = scaled[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut i = 0;
        while left > 0 {
            counts[order[i % k]] += 1;
            left -= 1;
            i += 1;
        }
        TypeP::new(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.counts.len()
    }

    pub fn distribution(&self) -> Distribution {
        Distribution::derived(self.counts.iter().map(|&c| c as f64 / self.n as f64).collect())
            .expect("counts define a distribution")
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    /// `n! / Π counts[a]!`.
    pub fn class_size(&self) -> BigUint {
        // build the multinomial as a product of binomials to keep numbers small
        let mut acc = BigUint::from(1u32);
        let mut placed = 0u32;
        for &c in &self.counts {
            placed += c;
            acc *= binomial(placed, c);
        }
        acc
    }

    pub fn class_size_u128(&self) -> Option<u128> {
        let digits = self.class_size().to_u64_digits();
        match digits.len() {
            0 => Some(0),
            1 => Some(digits[0] as u128),
            2 => Some(digits[0] as u128 | ((digits[1] as u128) << 64)),
            _ => None,
        }
    }

    /// Lexicographic iterator over the type class. Fails if the class is larger than `budget`.
    pub fn enumerate(&self, budget: u128) -> Result<TypeClassIter> {
        let size = self.class_size_u128().unwrap_or(u128::MAX);
        if size > budget {
            return Err(Error::BudgetExceeded {
                what: "type class enumeration",
                needed: size,
                limit: budget,
            });
        }
        let mut first = Vec::with_capacity(self.n as usize);
        for (a, &c) in self.counts.iter().enumerate() {
            first.extend(core::iter::repeat_n(a as u8, c as usize));
        }
        Ok(TypeClassIter {
            next: Some(first),
            alphabet: self.alphabet(),
        })
    }

    /// Collected enumeration.
    pub fn members(&self, budget: u128) -> Result<Vec<Vec<u8>>> {
        Ok(self.enumerate(budget)?.map(|s| s.symbols).collect())
    }
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub struct TypeClassIter {
    next: Option<Vec<u8>>,
    alphabet: usize,
}

impl Iterator for TypeClassIter {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Sequence {
            alphabet: self.alphabet,
            symbols: cur,
        })
    }
}

/// Advances to the next lexicographic permutation; false at the last one.
pub fn next_permutation(v: &mut [u8]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All types of length `n` over an alphabet of size `k`, in lexicographic order of counts.
pub fn all_types(k: usize, n: u32) -> Vec<TypeP> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<TypeP>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(TypeP::new(cur.clone()).expect("positive length"));
            return;
        }
        for c in 0..=left {
            cur[i] = c;
            rec(i + 1, left - c, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// `|P_x(a) - P_X(a)| ≤ ε/|X|` for every symbol, and no symbol outside the support of `P_X`.
pub fn is_eps_typical(x: &Sequence, px: &Distribution, eps: f64) -> Result<bool> {
    if x.alphabet != px.size() {
        return Err(Error::AlphabetMismatch {
            expected: px.size(),
            got: x.alphabet,
        });
    }
    let n = x.len() as f64;
    let k = px.size() as f64;
    let mut counts = vec![0u32; px.size()];
    for &s in &x.symbols {
        counts[s as usize] += 1;
    }
    Ok(counts.iter().zip(px.mass()).all(|(&c, &p)| {
        if p == 0.0 && c > 0 {
            return false;
        }
        (c as f64 / n - p).abs() <= eps / k + TYPICALITY_SLACK
    }))
}

#[inline]
fn joint_ok(nab: u32, na: u32, w: f64, n: f64, bound: f64) -> bool {
    if na as f64 * w == 0.0 {
        return nab == 0;
    }
    (nab as f64 / n - (na as f64 / n) * w).abs() <= bound + TYPICALITY_SLACK
}

/// Conditional ε-typicality of `y` given `x` under `ch`, with the type of `x`
/// playing the role of `P_X`.
pub fn is_cond_eps_typical(y: &Sequence, x: &Sequence, ch: &Channel, eps: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.alphabet != ch.inputs() || y.alphabet != ch.outputs() {
        return Err(Error::AlphabetMismatch {
            expected: ch.inputs(),
            got: x.alphabet,
        });
    }
    let (nx, ny) = (ch.inputs(), ch.outputs());
    let mut joint = vec![0u32; nx * ny];
    let mut na = vec![0u32; nx];
    for (&a, &b) in x.symbols.iter().zip(&y.symbols) {
        joint[a as usize * ny + b as usize] += 1;
        na[a as usize] += 1;
    }
    let n = x.len() as f64;
    let bound = eps / (nx * ny) as f64;
    Ok((0..nx).all(|a| (0..ny).all(|b| joint_ok(joint[a * ny + b], na[a], ch.w(b, a), n, bound))))
}

/// Precomputed admissible joint counts for inputs of one fixed type.
///
/// `y` is conditionally typical with `x` (of the table's type) iff every joint
/// count `N(a,b)` lies in `allowed[a][b]`. Built with the same float test as
/// [`is_cond_eps_typical`], so the two always agree.
#[derive(Debug, Clone)]
pub struct TypicalityTable {
    nx: usize,
    ny: usize,
    n: usize,
    lo: Vec<u32>,
    hi: Vec<u32>,
    empty: bool,
}

impl TypicalityTable {
    pub fn new(tp: &TypeP, ch: &Channel, eps: f64) -> Result<Self> {
        if tp.alphabet() != ch.inputs() {
            return Err(Error::AlphabetMismatch {
                expected: ch.inputs(),
                got: tp.alphabet(),
            });
        }
        let (nx, ny) = (ch.inputs(), ch.outputs());
        let n = tp.n() as f64;
        let bound = eps / (nx * ny) as f64;
        let mut lo = vec![0u32; nx * ny];
        let mut hi = vec![0u32; nx * ny];
        let mut empty = false;
        for a in 0..nx {
            let na = tp.counts()[a];
            for b in 0..ny {
                let ok: Vec<u32> = (0..=na).filter(|&c| joint_ok(c, na, ch.w(b, a), n, bound)).collect();
                match (ok.first(), ok.last()) {
                    (Some(&l), Some(&h)) => {
                        debug_assert_eq!(ok.len() as u32, h - l + 1);
                        lo[a * ny + b] = l;
                        hi[a * ny + b] = h;
                    }
                    _ => empty = true,
                }
            }
        }
        Ok(TypicalityTable {
            nx,
            ny,
            n: tp.n() as usize,
            lo,
            hi,
            empty,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Test on raw symbol slices; `x` must have the table's type.
    #[inline]
    pub fn typical(&self, x: &[u8], y: &[u8]) -> bool {
        if self.empty {
            return false;
        }
        let m = self.nx * self.ny;
        if m <= 64 {
            let mut buf = [0u32; 64];
            self.check(x, y, &mut buf[..m])
        } else {
            self.check(x, y, &mut vec![0u32; m])
        }
    }

    #[inline]
    fn check(&self, x: &[u8], y: &[u8], counts: &mut [u32]) -> bool {
        for (&a, &b) in x.iter().zip(y) {
            counts[a as usize * self.ny + b as usize] += 1;
        }
        counts
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&c, (&l, &h))| l <= c && c <= h)
    }
}

/// Number of words of length `n` over `k` symbols, checked against a budget.
pub fn word_space(k: usize, n: usize, budget: u128) -> Result<usize> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(k as u128);
    }
    if total > budget {
        return Err(Error::BudgetExceeded {
            what: "output space enumeration",
            needed: total,
            limit: budget,
        });
    }
    Ok(total as usize)
}

/// Writes the `idx`-th word of length `buf.len()` in lexicographic order.
#[inline]
pub fn word_from_index(mut idx: usize, k: usize, buf: &mut [u8]) {
    for slot in buf.iter_mut().rev() {
        *slot = (idx % k) as u8;
        idx /= k;
    }
}

#[inline]
pub fn index_of_word(w: &[u8], k: usize) -> usize {
    w.iter().fold(0usize, |acc, &s| acc * k + s as usize)
}

/// `T_[W]ε(x)` by filtering every output word.
pub fn conditional_typical_set(x: &Sequence, ch: &Channel, eps: f64, budget: u128) -> Result<Vec<Sequence>> {
    let n = x.len();
    let total = word_space(ch.outputs(), n, budget)?;
    let mut out = Vec::new();
    let mut buf = vec![0u8; n];
    for idx in 0..total {
        word_from_index(idx, ch.outputs(), &mut buf);
        let y = Sequence {
            alphabet: ch.outputs(),
            symbols: buf.clone(),
        };
        if is_cond_eps_typical(&y, x, ch, eps)? {
            out.push(y);
        }
    }
    Ok(out)
}

/// `W^n(y|x)` for every output word, indexed lexicographically.
pub fn output_distribution(x: &[u8], ch: &Channel, total: usize) -> Vec<f64> {
    // product built position by position: out[(prefix, b)] = out[prefix] * W(b|x_i)
    let k = ch.outputs();
    let mut cur = vec![1.0f64];
    for &a in x {
        let row = &ch.rows()[a as usize];
        let mut next = Vec::with_capacity(cur.len() * k);
        for &p in &cur {
            for &w in row {
                next.push(p * w);
            }
        }
        cur = next;
    }
    debug_assert_eq!(cur.len(), total);
    cur
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingReport {
    pub class_size: BigUint,
    pub entropy_bits: f64,
    /// `P^n(T_P)` where `P` is the type's own distribution.
    pub type_probability: f64,
    pub lemma5_rhs: f64,
    pub lemma5_holds: bool,
    pub size_upper: f64,
    pub size_lower: f64,
    pub lemma6_holds: bool,
    /// `W^n(T_[W]ε(x) | x)` for the lexicographically first `x` of the class, when affordable.
    pub cond_typical_mass: Option<f64>,
}

const LOG_SLACK: f64 = 1e-9;

/// Evaluates the type-class probability and size bounds exactly (in log domain).
pub fn check_counting_bounds(tp: &TypeP, ch: Option<(&Channel, f64)>, budget: u128) -> Result<CountingReport> {
    let n = tp.n() as f64;
    let k = tp.alphabet() as f64;
    let size = tp.class_size();
    let log_size = log2_biguint(&size);
    let h = crate::infotheory::entropy(&tp.distribution());
    // log2 P^n(T_P) = log2|T_P| + Σ N_a log2(N_a/n)
    let log_prob = log_size
        + ordered_sum(
            tp.counts()
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| c as f64 * log2(c as f64 / n)),
        );
    let log_poly = -k * log2(n + 1.0);
    let lemma5_holds = log_prob + LOG_SLACK >= log_poly;
    let lemma6_holds = log_size <= n * h + LOG_SLACK && log_size + LOG_SLACK >= log_poly + n * h;
    let cond_typical_mass = match ch {
        Some((ch, eps)) => {
            let total = word_space(ch.outputs(), tp.n() as usize, budget)?;
            let x = tp.enumerate(u128::MAX)?.next().expect("non-empty class");
            let table = TypicalityTable::new(tp, ch, eps)?;
            let probs = output_distribution(&x.symbols, ch, total);
            let mut buf = vec![0u8; tp.n() as usize];
            let mut acc = 0.0;
            for (idx, &p) in probs.iter().enumerate() {
                word_from_index(idx, ch.outputs(), &mut buf);
                if table.typical(&x.symbols, &buf) {
                    acc += p;
                }
            }
            Some(acc)
        }
        None => None,
    };
    Ok(CountingReport {
        class_size: size,
        entropy_bits: h,
        type_probability: crate::math::exp2(log_prob),
        lemma5_rhs: crate::math::exp2(log_poly),
        lemma5_holds,
        size_upper: crate::math::exp2(n * h),
        size_lower: crate::math::exp2(log_poly + n * h),
        lemma6_holds,
        cond_typical_mass,
    })
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        let d = x.to_u64_digits();
        return log2(d.first().copied().unwrap_or(0) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64_digits()[0];
    log2(top as f64) + shift as f64
}
