//! Finite-alphabet distributions, channels and information measures.
//!
//! Logs are base 2 throughout. Statistical distance is the plain L1 distance
//! (range `[0, 2]`), not half of it.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::math::{ln, log2, ordered_sum};

pub const CONSTRUCT_TOL: f64 = 1e-12;
pub const DERIVED_TOL: f64 = 1e-9;

/// A word over the alphabet `{0, .., alphabet-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    pub alphabet: usize,
    pub symbols: Vec<u8>,
}

impl Sequence {
    pub fn new(alphabet: usize, symbols: Vec<u8>) -> Result<Self> {
        if alphabet == 0 || alphabet > 256 {
            return Err(invalid("alphabet", "size must be in 1..=256"));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(invalid(
                "symbols",
                alloc::format!("symbol {s} outside alphabet of size {alphabet}"),
            ));
        }
        Ok(Sequence { alphabet, symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Digit-string form, e.g. `022022`. Only meaningful for alphabets up to 10.
    pub fn to_digits(&self) -> alloc::string::String {
        self.symbols.iter().map(|&s| (b'0' + s) as char).collect()
    }

    pub fn from_digits(alphabet: usize, s: &str) -> Result<Self> {
        if alphabet > 10 {
            return Err(invalid("alphabet", "digit strings need an alphabet of at most 10"));
        }
        let mut v = Vec::with_capacity(s.len());
        for c in s.bytes() {
            if !c.is_ascii_digit() {
                return Err(invalid("digits", alloc::format!("non-digit byte {c:#x}")));
            }
            v.push(c - b'0');
        }
        Sequence::new(alphabet, v)
    }

    /// Hamming distance to a word of equal length.
    pub fn hamming(&self, other: &Sequence) -> usize {
        hamming(&self.symbols, &other.symbols)
    }
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    mass: Vec<f64>,
}

fn check_mass(mass: &[f64], tol: f64) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::InvalidDistribution("empty alphabet".into()));
    }
    if let Some(x) = mass.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution(alloc::format!("bad entry {x}")));
    }
    let s = ordered_sum(mass.iter().copied());
    if (s - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(alloc::format!("mass sums to {s}")));
    }
    Ok(())
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_mass(&mass, CONSTRUCT_TOL)?;
        Ok(Distribution { mass })
    }

    /// Builds a distribution from derived (computed) masses, using the looser
    /// derived-quantity tolerance.
    pub fn derived(mass: Vec<f64>) -> Result<Self> {
        check_mass(&mass, DERIVED_TOL)?;
        Ok(Distribution { mass })
    }

    pub fn uniform(k: usize) -> Self {
        Distribution {
            mass: vec![1.0 / k as f64; k],
        }
    }

    pub fn point(k: usize, at: usize) -> Self {
        let mut mass = vec![0.0; k];
        mass[at] = 1.0;
        Distribution { mass }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }
}

/// A discrete memoryless channel `W(y|x)`, one row per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
    outputs: usize,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || outputs == 0 {
            return Err(invalid("channel", "needs at least one row and one column"));
        }
        if rows.len() > 256 || outputs > 256 {
            return Err(invalid("channel", "alphabets are limited to 256 symbols"));
        }
        for r in &rows {
            if r.len() != outputs {
                return Err(Error::AlphabetMismatch {
                    expected: outputs,
                    got: r.len(),
                });
            }
            check_mass(r, CONSTRUCT_TOL)?;
        }
        Ok(Channel { rows, outputs })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("bsc", "crossover must be in [0,1]"));
        }
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    pub fn identity(k: usize) -> Self {
        let rows = (0..k)
            .map(|i| {
                let mut r = vec![0.0; k];
                r[i] = 1.0;
                r
            })
            .collect();
        Channel { rows, outputs: k }
    }

    /// Every row uniform: the output is independent of the input.
    pub fn fully_noisy(inputs: usize, outputs: usize) -> Self {
        Channel {
            rows: vec![vec![1.0 / outputs as f64; outputs]; inputs],
            outputs,
        }
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    #[inline]
    pub fn w(&self, y: usize, x: usize) -> f64 {
        self.rows[x][y]
    }

    /// True when all rows are identical, i.e. the output carries no information.
    pub fn has_identical_rows(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }

    /// `W^n(y|x)` for equal-length words.
    pub fn word_prob(&self, y: &[u8], x: &[u8]) -> f64 {
        let mut p = 1.0;
        for (&a, &b) in x.iter().zip(y) {
            p *= self.rows[a as usize][b as usize];
        }
        p
    }
}

/// Joint distribution over `X × Y`, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    nx: usize,
    ny: usize,
    mass: Vec<f64>,
}

impl JointDistribution {
    pub fn new(nx: usize, ny: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != nx * ny {
            return Err(Error::LengthMismatch {
                expected: nx * ny,
                got: mass.len(),
            });
        }
        check_mass(&mass, CONSTRUCT_TOL)?;
        Ok(JointDistribution { nx, ny, mass })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.mass[x * self.ny + y]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn marginal_x(&self) -> Distribution {
        let m = (0..self.nx)
            .map(|x| ordered_sum((0..self.ny).map(|y| self.get(x, y))))
            .collect();
        Distribution { mass: m }
    }

    pub fn marginal_y(&self) -> Distribution {
        let m = (0..self.ny)
            .map(|y| ordered_sum((0..self.nx).map(|x| self.get(x, y))))
            .collect();
        Distribution { mass: m }
    }

    /// The same joint with the roles of `X` and `Y` exchanged.
    pub fn swap(&self) -> JointDistribution {
        let mut m = vec![0.0; self.mass.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                m[y * self.nx + x] = self.get(x, y);
            }
        }
        JointDistribution {
            nx: self.ny,
            ny: self.nx,
            mass: m,
        }
    }

    pub fn product(px: &Distribution, py: &Distribution) -> JointDistribution {
        let mut m = Vec::with_capacity(px.size() * py.size());
        for &a in px.mass() {
            for &b in py.mass() {
                m.push(a * b);
            }
        }
        JointDistribution {
            nx: px.size(),
            ny: py.size(),
            mass: m,
        }
    }
}

fn plogp_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    ordered_sum(xs.into_iter().filter(|&p| p > 0.0).map(|p| -p * log2(p)))
}

pub fn entropy(d: &Distribution) -> f64 {
    plogp_sum(d.mass.iter().copied())
}

/// `H(X|Y)` for a joint of `(X, Y)`.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    let py = j.marginal_y();
    let mut acc = 0.0;
    for x in 0..j.nx {
        for y in 0..j.ny {
            let p = j.get(x, y);
            if p > 0.0 {
                acc -= p * log2(p / py.mass[y]);
            }
        }
    }
    acc.max(0.0)
}

/// `I(X;Y) = H(X) + H(Y) - H(X,Y)`, tiny negatives clamped to zero.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let hx = entropy(&j.marginal_x());
    let hy = entropy(&j.marginal_y());
    let hxy = plogp_sum(j.mass.iter().copied());
    let i = hx + hy - hxy;
    if i < 0.0 {
        debug_assert!(i > -DERIVED_TOL, "mutual information {i}");
        0.0
    } else {
        i
    }
}

/// Unhalved L1 distance.
pub fn statistical_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.size() != q.size() {
        return Err(Error::AlphabetMismatch {
            expected: p.size(),
            got: q.size(),
        });
    }
    Ok(l1(p.mass(), q.mass()))
}

pub fn l1(p: &[f64], q: &[f64]) -> f64 {
    ordered_sum(p.iter().zip(q).map(|(a, b)| (a - b).abs()))
}

/// `SD(X|Y; X') = Σ_y P_Y(y) · Σ_x |P_{X|Y}(x|y) - P_{X'}(x)|`.
pub fn conditional_statistical_distance(j: &JointDistribution, reference: &Distribution) -> Result<f64> {
    if reference.size() != j.nx {
        return Err(Error::AlphabetMismatch {
            expected: j.nx,
            got: reference.size(),
        });
    }
    let py = j.marginal_y();
    let mut acc = 0.0;
    for y in 0..j.ny {
        let w = py.mass[y];
        if w <= 0.0 {
            continue;
        }
        let inner = ordered_sum((0..j.nx).map(|x| (j.get(x, y) / w - reference.mass[x]).abs()));
        acc += w * inner;
    }
    Ok(acc)
}

pub fn push_through_channel(input: &Distribution, ch: &Channel) -> Result<JointDistribution> {
    if input.size() != ch.inputs() {
        return Err(Error::AlphabetMismatch {
            expected: ch.inputs(),
            got: input.size(),
        });
    }
    let mut m = Vec::with_capacity(ch.inputs() * ch.outputs());
    for x in 0..ch.inputs() {
        for y in 0..ch.outputs() {
            m.push(input.mass[x] * ch.w(y, x));
        }
    }
    Ok(JointDistribution {
        nx: ch.inputs(),
        ny: ch.outputs(),
        mass: m,
    })
}

/// Draws one output symbol from `W(·|x)`.
#[inline]
pub fn sample_symbol<R: Rng + ?Sized>(ch: &Channel, x: u8, rng: &mut R) -> u8 {
    let row = &ch.rows[x as usize];
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (y, &w) in row.iter().enumerate() {
        acc += w;
        if u < acc {
            return y as u8;
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    row.iter().rposition(|&w| w > 0.0).unwrap_or(0) as u8
}

pub fn sample_channel<R: Rng + ?Sized>(x: &Sequence, ch: &Channel, rng: &mut R) -> Result<Sequence> {
    if x.alphabet != ch.inputs() {
        return Err(Error::AlphabetMismatch {
            expected: ch.inputs(),
            got: x.alphabet,
        });
    }
    Ok(Sequence {
        alphabet: ch.outputs(),
        symbols: sample_word(&x.symbols, ch, rng),
    })
}

pub fn sample_word<R: Rng + ?Sized>(x: &[u8], ch: &Channel, rng: &mut R) -> Vec<u8> {
    x.iter().map(|&a| sample_symbol(ch, a, rng)).collect()
}

/// `H(X|Z) - H(X|Y)` for the joints induced by `px` through both channels.
pub fn secrecy_capacity_less_noisy(px: &Distribution, w1: &Channel, w2: &Channel) -> Result<f64> {
    if w1.inputs() != w2.inputs() {
        return Err(Error::AlphabetMismatch {
            expected: w1.inputs(),
            got: w2.inputs(),
        });
    }
    Ok(equivocation(px, w2)? - equivocation(px, w1)?)
}

/// `H(X|Y)` with `Y` the output of `ch` on input `px`.
pub fn equivocation(px: &Distribution, ch: &Channel) -> Result<f64> {
    Ok(conditional_entropy(&push_through_channel(px, ch)?))
}

pub fn channel_information(px: &Distribution, ch: &Channel) -> Result<f64> {
    Ok(mutual_information(&push_through_channel(px, ch)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiszarReport {
    pub delta: f64,
    pub mi: f64,
    pub lower: f64,
    /// `None` when the upper bound is vacuous (`Δ = 0`) or not applicable (`|X| < 4`).
    pub upper: Option<f64>,
    pub holds: bool,
}

pub const CSISZAR_SLACK: f64 = 1e-9;

/// Checks `Δ²/(2 ln 2) ≤ I(X;Y) ≤ Δ·log(|X|/Δ)` with `Δ = SD(X|Y; X)`.
pub fn check_csiszar_bound(j: &JointDistribution) -> CsiszarReport {
    let px = j.marginal_x();
    let delta = conditional_statistical_distance(j, &px).expect("marginal has matching size");
    let mi = mutual_information(j);
    csiszar_from_values(delta, mi, j.nx as f64)
}

/// The same check on an already computed pair, for an `X` of size `x_size`.
pub fn csiszar_from_values(delta: f64, mi: f64, x_size: f64) -> CsiszarReport {
    let lower = delta * delta / (2.0 * ln(2.0));
    let upper = if delta > 0.0 && x_size >= 4.0 {
        Some(delta * log2(x_size / delta))
    } else {
        None
    };
    let holds = lower <= mi + CSISZAR_SLACK && upper.is_none_or(|u| mi <= u + CSISZAR_SLACK);
    CsiszarReport {
        delta,
        mi,
        lower,
        upper,
        holds,
    }
}

/// Average of rows with an exactness shortcut: if every row is bitwise equal to
/// the first, that row is returned unchanged, so independent inputs give an
/// exact zero distance downstream instead of rounding noise.
pub fn mean_rows(rows: &[&[f64]]) -> Vec<f64> {
    let first = rows[0];
    if rows.iter().all(|r| *r == first) {
        return first.to_vec();
    }
    let mut acc = vec![0.0; first.len()];
    for r in rows {
        for (a, &v) in acc.iter_mut().zip(r.iter()) {
            *a += v;
        }
    }
    let k = rows.len() as f64;
    for a in acc.iter_mut() {
        *a /= k;
    }
    acc
}

/// Weighted average of rows, with the same identical-rows shortcut.
pub fn weighted_mean_rows(rows: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    let first = rows[0];
    if rows.iter().all(|r| *r == first) {
        return first.to_vec();
    }
    let mut acc = vec![0.0; first.len()];
    for (r, &w) in rows.iter().zip(weights) {
        for (a, &v) in acc.iter_mut().zip(r.iter()) {
            *a += w * v;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::h2;
    use crate::rng::SeedTree;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Distribution::uniform(2)), 1.0);
        assert_eq!(entropy(&Distribution::point(3, 1)), 0.0);
        let d = Distribution::new(vec![1.0 / 3.0, 0.0, 2.0 / 3.0]).unwrap();
        assert!(close(entropy(&d), 0.918_295_834_054_489_6, 1e-12));
    }

    #[test]
    fn conditional_entropy_and_mi_examples() {
        let j = push_through_channel(&Distribution::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
        // H(X|Y) for uniform X through BSC(0.1) is h2(0.1)
        assert!(close(conditional_entropy(&j), 0.468_995_593_589_281_2, 1e-12));
        assert!(close(mutual_information(&j), 0.531_004_406_410_718_8, 1e-12));
        let copy = push_through_channel(&Distribution::uniform(2), &Channel::identity(2)).unwrap();
        assert_eq!(conditional_entropy(&copy), 0.0);
        assert!(close(mutual_information(&copy), 1.0, 1e-15));
        let ind = JointDistribution::product(&Distribution::uniform(2), &Distribution::uniform(3));
        assert!(close(conditional_entropy(&ind), 1.0, 1e-12));
        assert_eq!(mutual_information(&ind), 0.0);
    }

    #[test]
    fn sd_examples() {
        let a = Distribution::new(vec![1.0, 0.0]).unwrap();
        let b = Distribution::uniform(2);
        assert_eq!(statistical_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(statistical_distance(&a, &a).unwrap(), 0.0);
        let c = Distribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(statistical_distance(&a, &c).unwrap(), 2.0);
        assert!(statistical_distance(&a, &Distribution::uniform(3)).is_err());
    }

    #[test]
    fn conditional_sd_examples() {
        let copy = push_through_channel(&Distribution::uniform(2), &Channel::identity(2)).unwrap();
        assert_eq!(
            conditional_statistical_distance(&copy, &Distribution::uniform(2)).unwrap(),
            1.0
        );
        let ind = JointDistribution::product(&Distribution::uniform(2), &Distribution::uniform(2));
        assert_eq!(
            conditional_statistical_distance(&ind, &Distribution::uniform(2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn push_through_bsc() {
        let j = push_through_channel(&Distribution::uniform(2), &Channel::bsc(0.2).unwrap()).unwrap();
        let want = [0.4, 0.1, 0.1, 0.4];
        for (a, b) in j.mass().iter().zip(want) {
            assert!(close(*a, b, 1e-15));
        }
        let j = push_through_channel(&Distribution::point(2, 1), &Channel::bsc(0.2).unwrap()).unwrap();
        assert_eq!(j.get(0, 0) + j.get(0, 1), 0.0);
    }

    #[test]
    fn secrecy_capacity_examples() {
        let u = Distribution::uniform(2);
        let w1 = Channel::bsc(0.05).unwrap();
        let w2 = Channel::bsc(0.2).unwrap();
        let cs = secrecy_capacity_less_noisy(&u, &w1, &w2).unwrap();
        assert!(close(cs, 0.435_531_137_771_406, 1e-12), "{cs}");
        assert!(close(cs, h2(0.2) - h2(0.05), 1e-12));
        let cs_id = secrecy_capacity_less_noisy(&u, &Channel::identity(2), &w2).unwrap();
        assert!(close(cs_id, 0.721_928, 1e-6));
        assert_eq!(secrecy_capacity_less_noisy(&u, &w2, &w2).unwrap(), 0.0);
    }

    #[test]
    fn sampling_identity_and_bsc_half() {
        let mut rng = SeedTree::new(5).stream("t", 0);
        let x = Sequence::new(2, (0..100).map(|i| (i % 2) as u8).collect()).unwrap();
        assert_eq!(sample_channel(&x, &Channel::identity(2), &mut rng).unwrap(), x);
        assert_eq!(sample_channel(&x, &Channel::bsc(0.0).unwrap(), &mut rng).unwrap(), x);
        let x = Sequence::new(2, vec![0; 10_000]).unwrap();
        let y = sample_channel(&x, &Channel::bsc(0.5).unwrap(), &mut rng).unwrap();
        let frac = x.hamming(&y) as f64 / 10_000.0;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn sampling_matches_rows() {
        let ch = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8]]).unwrap();
        let mut rng = SeedTree::new(9).stream("rows", 0);
        let n = 100_000;
        for x in 0..2u8 {
            let mut counts = [0usize; 3];
            for _ in 0..n {
                counts[sample_symbol(&ch, x, &mut rng) as usize] += 1;
            }
            for y in 0..3 {
                let f = counts[y] as f64 / n as f64;
                assert!((f - ch.w(y, x as usize)).abs() < 0.01);
            }
        }
    }

    #[test]
    fn csiszar_examples() {
        let ind = JointDistribution::product(&Distribution::uniform(4), &Distribution::uniform(4));
        let r = check_csiszar_bound(&ind);
        assert!(r.holds && r.delta == 0.0 && r.mi == 0.0 && r.upper.is_none());
        let copy = push_through_channel(&Distribution::uniform(4), &Channel::identity(4)).unwrap();
        let r = check_csiszar_bound(&copy);
        assert!(r.holds, "{r:?}");
        assert!(close(r.delta, 1.5, 1e-12));
        assert!(close(r.mi, 2.0, 1e-12));
    }

    #[test]
    fn mean_rows_is_exact_for_identical_rows() {
        let r = [0.1, 0.2, 0.7];
        let rows: Vec<&[f64]> = vec![&r; 7];
        assert_eq!(mean_rows(&rows), r.to_vec());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Channel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Sequence::new(2, vec![0, 2]).is_err());
    }
}
