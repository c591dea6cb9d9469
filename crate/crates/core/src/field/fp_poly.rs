//! Dense polynomials over a prime field stored as raw residues.
//!
//! This is the hot path for first-level extension arithmetic and for the
//! division-polynomial work done over the base field, so it avoids the
//! generic [`FieldElement`](super::FieldElement) machinery entirely.
//! Coefficients are constant-first; the zero polynomial is the empty vector.

use num_bigint::BigUint;

use crate::arith::{add_mod, inv_mod, mul_mod, sub_mod};

/// Arithmetic context for polynomials over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpPolyRing {
    pub p: u64,
}

pub type RawPoly = Vec<u64>;

pub fn trim(f: &mut RawPoly) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

#[allow(dead_code)]
pub fn degree(f: &[u64]) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

impl FpPolyRing {
    pub fn new(p: u64) -> Self {
        Self { p }
    }

    pub fn from_signed(&self, coeffs: &[i64]) -> RawPoly {
        let mut f: RawPoly = coeffs
            .iter()
            .map(|&c| c.rem_euclid(self.p as i64) as u64)
            .collect();
        trim(&mut f);
        f
    }

    pub fn constant(&self, c: u64) -> RawPoly {
        let mut f = vec![c % self.p];
        trim(&mut f);
        f
    }

    pub fn x(&self) -> RawPoly {
        vec![0, 1]
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> RawPoly {
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out.push(add_mod(x, y, self.p));
        }
        trim(&mut out);
        out
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> RawPoly {
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            out.push(sub_mod(x, y, self.p));
        }
        trim(&mut out);
        out
    }

    pub fn scale(&self, a: &[u64], c: u64) -> RawPoly {
        let c = c % self.p;
        let mut out: RawPoly = a.iter().map(|&x| mul_mod(x, c, self.p)).collect();
        trim(&mut out);
        out
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> RawPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let n = a.len() + b.len() - 1;
        let mut acc = vec![0u128; n];
        // Each product is < 2^64, so up to 2^64 terms fit in the accumulator.
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] += (x as u128) * (y as u128);
            }
        }
        let p = self.p as u128;
        let mut out: RawPoly = acc.into_iter().map(|v| (v % p) as u64).collect();
        trim(&mut out);
        out
    }

    pub fn square(&self, a: &[u64]) -> RawPoly {
        if a.is_empty() {
            return Vec::new();
        }
        let n = 2 * a.len() - 1;
        let mut acc = vec![0u128; n];
        for i in 0..a.len() {
            let x = a[i] as u128;
            if x == 0 {
                continue;
            }
            acc[2 * i] += x * x;
            let x2 = 2 * x;
            for j in (i + 1)..a.len() {
                acc[i + j] += x2 * a[j] as u128;
            }
        }
        let p = self.p as u128;
        let mut out: RawPoly = acc.into_iter().map(|v| (v % p) as u64).collect();
        trim(&mut out);
        out
    }

    /// Quotient and remainder of `a` by nonzero `b`.
    pub fn divrem(&self, a: &[u64], b: &[u64]) -> (RawPoly, RawPoly) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        let p = self.p;
        if a.len() < b.len() {
            return (Vec::new(), a.to_vec());
        }
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p).expect("leading coefficient invertible");
        let mut r = a.to_vec();
        let mut q = vec![0u64; a.len() - db];
        for k in (db..a.len()).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            let c = mul_mod(c, lead_inv, p);
            q[k - db] = c;
            let off = k - db;
            for (i, &bi) in b.iter().enumerate() {
                r[off + i] = sub_mod(r[off + i], mul_mod(c, bi, p), p);
            }
        }
        r.truncate(db);
        trim(&mut r);
        trim(&mut q);
        (q, r)
    }

    pub fn rem(&self, a: &[u64], b: &[u64]) -> RawPoly {
        if a.len() < b.len() {
            let mut r = a.to_vec();
            trim(&mut r);
            return r;
        }
        let p = self.p as u128;
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], self.p).expect("leading coefficient invertible");
        // Lazy reduction: keep an u128 buffer and reduce each coefficient only
        // when it becomes the leading term.
        let neg_b: Vec<u128> = b[..db]
            .iter()
            .map(|&c| ((self.p - c) % self.p) as u128)
            .collect();
        let mut r: Vec<u128> = a.iter().map(|&c| c as u128).collect();
        let mut pending = 0u32;
        for k in (db..a.len()).rev() {
            let c = (r[k] % p) as u64;
            if c != 0 {
                let c = mul_mod(c, lead_inv, self.p) as u128;
                let off = k - db;
                for i in 0..db {
                    r[off + i] += c * neg_b[i];
                }
            }
            pending += 1;
            if pending >= 1 << 20 {
                for v in r.iter_mut() {
                    *v %= p;
                }
                pending = 0;
            }
        }
        let mut out: RawPoly = r[..db].iter().map(|&v| (v % p) as u64).collect();
        trim(&mut out);
        out
    }

    pub fn mul_mod(&self, a: &[u64], b: &[u64], m: &[u64]) -> RawPoly {
        self.rem(&self.mul(a, b), m)
    }

    pub fn pow_mod(&self, base: &[u64], exp: &BigUint, m: &[u64]) -> RawPoly {
        let mut result = self.rem(&self.constant(1), m);
        let base = self.rem(base, m);
        let bits = exp.bits();
        for i in (0..bits).rev() {
            result = self.rem(&self.square(&result), m);
            if exp.bit(i) {
                result = self.mul_mod(&result, &base, m);
            }
        }
        result
    }

    pub fn monic(&self, a: &[u64]) -> RawPoly {
        match a.last() {
            None => Vec::new(),
            Some(&lead) => {
                let inv = inv_mod(lead, self.p).expect("nonzero leading coefficient");
                self.scale(a, inv)
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, a: &[u64], b: &[u64]) -> RawPoly {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// Inverse of `a` modulo `m`, when gcd(a, m) = 1.
    pub fn inv_mod(&self, a: &[u64], m: &[u64]) -> Option<RawPoly> {
        let (mut r0, mut r1) = (m.to_vec(), self.rem(a, m));
        let (mut s0, mut s1) = (Vec::<u64>::new(), vec![1u64]);
        while !r1.is_empty() {
            let (q, r) = self.divrem(&r0, &r1);
            let s = self.sub(&s0, &self.mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.len() != 1 {
            return None;
        }
        let inv = inv_mod(r0[0], self.p)?;
        Some(self.rem(&self.scale(&s0, inv), m))
    }

    pub fn eval(&self, f: &[u64], x: u64) -> u64 {
        f.iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x, self.p), c, self.p))
    }

    pub fn derivative(&self, f: &[u64]) -> RawPoly {
        let mut out: RawPoly = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % self.p, self.p))
            .collect();
        trim(&mut out);
        out
    }

    /// Horner composition f(g) mod m.
    pub fn compose_mod(&self, f: &[u64], g: &[u64], m: &[u64]) -> RawPoly {
        let mut acc = Vec::new();
        for &c in f.iter().rev() {
            acc = self.add(&self.mul_mod(&acc, g, m), &self.constant(c));
        }
        self.rem(&acc, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divrem_reconstructs() {
        let r = FpPolyRing::new(101);
        let a = r.from_signed(&[3, 0, 5, 7, 1, 9]);
        let b = r.from_signed(&[2, 1, 4]);
        let (q, rem) = r.divrem(&a, &b);
        assert_eq!(r.add(&r.mul(&q, &b), &rem), a);
        assert_eq!(r.rem(&a, &b), rem);
    }

    #[test]
    fn inverse_mod_irreducible() {
        let r = FpPolyRing::new(5);
        let m = r.from_signed(&[2, 0, 1]);
        let a = r.from_signed(&[3, 4]);
        let inv = r.inv_mod(&a, &m).unwrap();
        assert_eq!(r.mul_mod(&a, &inv, &m), vec![1]);
    }

    #[test]
    fn gcd_of_products() {
        let r = FpPolyRing::new(7);
        let f = r.from_signed(&[-1, 1]);
        let g = r.from_signed(&[1, 1]);
        let h = r.from_signed(&[3, 0, 1]);
        let a = r.mul(&f, &g);
        let b = r.mul(&f, &h);
        assert_eq!(r.gcd(&a, &b), f);
    }
}
