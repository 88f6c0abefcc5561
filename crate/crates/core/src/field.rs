//! Arithmetic in GF(q) for primes below 2^16 and for 2^k with k ≤ 16.
//!
//! Binary extension fields use the fixed reduction polynomials in
//! [`BINARY_POLYS`] (bit i is the coefficient of x^i), so tags are identical
//! on every platform.

use crate::error::{Error, Result};

/// Irreducible polynomials for GF(2^k), indexed by k. Entries 0 and 1 are unused (GF(2) is handled as a prime field).
pub const BINARY_POLYS: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Prime,
    Binary { k: u32, poly: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    q: u32,
    kind: Kind,
}

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..=(1 << 16)).contains(&q) {
            return Err(Error::UnsupportedField(q));
        }
        let q32 = q as u32;
        if q32.is_power_of_two() {
            let k = q32.trailing_zeros();
            if k == 1 {
                return Ok(Field {
                    q: 2,
                    kind: Kind::Prime,
                });
            }
            return Ok(Field {
                q: q32,
                kind: Kind::Binary {
                    k,
                    poly: BINARY_POLYS[k as usize],
                },
            });
        }
        if is_prime(q32) {
            return Ok(Field {
                q: q32,
                kind: Kind::Prime,
            });
        }
        Err(Error::UnsupportedField(q))
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match self.kind {
            Kind::Prime => (a + b) % self.q,
            Kind::Binary { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match self.kind {
            Kind::Prime => (self.q - a) % self.q,
            Kind::Binary { .. } => a,
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match self.kind {
            Kind::Prime => ((a as u64 * b as u64) % self.q as u64) as u32,
            Kind::Binary { k, poly } => {
                let mut acc = 0u32;
                let mut a = a;
                let mut b = b;
                while b != 0 {
                    if b & 1 == 1 {
                        acc ^= a;
                    }
                    b >>= 1;
                    a <<= 1;
                    if a >> k & 1 == 1 {
                        a ^= poly;
                    }
                }
                acc
            }
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.q as u64 - 2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use rand::Rng;

    /// Remainder of polynomial division over GF(2).
    fn poly_mod(mut a: u32, b: u32) -> u32 {
        let db = 31 - b.leading_zeros();
        while a != 0 && 31 - a.leading_zeros() >= db {
            a ^= b << (31 - a.leading_zeros() - db);
        }
        a
    }

    #[test]
    fn reduction_polynomials_are_irreducible() {
        for k in 2..=16u32 {
            let p = BINARY_POLYS[k as usize];
            assert_eq!(31 - p.leading_zeros(), k, "degree of poly for k={k}");
            for d in 2u32..(1 << (k / 2 + 1)) {
                if 31 - d.leading_zeros() > k / 2 {
                    continue;
                }
                assert_ne!(poly_mod(p, d), 0, "k={k} poly {p:#x} divisible by {d:#x}");
            }
        }
    }

    #[test]
    fn supported_orders() {
        for q in [2u64, 3, 4, 5, 7, 8, 11, 16, 65521, 65536] {
            assert!(Field::new(q).is_ok(), "{q}");
        }
        for q in [0u64, 1, 6, 9, 12, 65537] {
            assert!(Field::new(q).is_err(), "{q}");
        }
    }

    #[test]
    fn hand_examples() {
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.add(1, 2), 0);
        assert_eq!(f3.mul(2, 2), 1);
        let f4 = Field::new(4).unwrap();
        // x * x = x + 1 mod x^2 + x + 1
        assert_eq!(f4.mul(2, 2), 3);
        let f256 = Field::new(256).unwrap();
        // AES field reference: 0x57 * 0x83 = 0xc1
        assert_eq!(f256.mul(0x57, 0x83), 0xc1);
        assert_eq!(f256.mul(0x53, 0xca), 0x01);
    }

    #[test]
    fn axioms_exhaustive_small_fields() {
        for q in [2u64, 3, 4, 5, 7, 8, 16] {
            let f = Field::new(q).unwrap();
            let q = q as u32;
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert!(f.mul(a, b) < q);
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn axioms_sampled_large_fields() {
        let mut rng = SeedTree::new(3).stream("field", 0);
        for q in [1024u64, 65536, 65521, 251] {
            let f = Field::new(q).unwrap();
            for _ in 0..2000 {
                let a = rng.gen_range(0..q as u32);
                let b = rng.gen_range(0..q as u32);
                let c = rng.gen_range(0..q as u32);
                assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
        }
    }
}
