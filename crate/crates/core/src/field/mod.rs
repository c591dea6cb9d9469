//! Prime fields and towers of extensions built as polynomial quotient rings.
//!
//! A [`FieldTower`] starts at F_p (level 0). Each further level is the
//! quotient of the polynomial ring over the previous level by a monic
//! irreducible polynomial. Elements store their coordinates flattened down to
//! F_p, so a level-2 element over F_{p^2} of relative degree 3 has six
//! residues.

mod fp_poly;
mod poly;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use serde_json::Value;
use smallvec::SmallVec;

use crate::arith::{self, add_mod, inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};

pub use fp_poly::{FpPolyRing, RawPoly};
pub use poly::{Poly, PolyRing};

type Coeffs = SmallVec<[u64; 4]>;

/// An element of some level of a [`FieldTower`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    level: usize,
    coeffs: Coeffs,
}

impl FieldElement {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Flat coordinates over F_p, constant-first.
    pub fn flat(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The residue of a base-field element.
    pub fn as_base(&self) -> Option<u64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            write!(f, "L{}{:?}", self.level, self.coeffs.as_slice())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    /// Degree over the previous level.
    degree: usize,
    /// Defining polynomial, monic, coefficients at the previous level.
    modulus: Vec<FieldElement>,
    /// Flattened defining polynomial for levels directly above F_p.
    raw_modulus: Option<RawPoly>,
    /// Number of F_p coordinates of an element at this level.
    flat_len: usize,
}

/// F_p together with a chain of extensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldTower {
    p: u64,
    levels: Vec<Level>,
}

impl FieldTower {
    /// The prime field F_p. Rejects composite p and p < 5.
    pub fn prime(p: u64) -> Result<Self> {
        if p < 5 || p >= arith::MAX_PRIME || !arith::is_prime(p) {
            return Err(Error::InvalidParameter(format!(
                "field characteristic must be a prime in [5, 2^32), got {p}"
            )));
        }
        Ok(Self {
            p,
            levels: Vec::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Index of the top level (0 for a bare prime field).
    pub fn top(&self) -> usize {
        self.levels.len()
    }

    /// Relative degree of `level` over `level - 1`.
    pub fn relative_degree(&self, level: usize) -> usize {
        if level == 0 {
            1
        } else {
            self.levels[level - 1].degree
        }
    }

    /// Absolute degree of `level` over F_p.
    pub fn degree(&self, level: usize) -> usize {
        self.flat_len(level)
    }

    /// Cardinality of the field at `level`.
    pub fn order(&self, level: usize) -> BigUint {
        arith::big_pow(self.p, self.degree(level) as u64)
    }

    fn flat_len(&self, level: usize) -> usize {
        if level == 0 {
            1
        } else {
            self.levels[level - 1].flat_len
        }
    }

    /// Defining polynomial of `level` (coefficients one level down).
    pub fn defining_polynomial(&self, level: usize) -> &[FieldElement] {
        &self.levels[level - 1].modulus
    }

    fn check(&self, a: &FieldElement) {
        debug_assert!(a.level <= self.top());
        debug_assert_eq!(a.coeffs.len(), self.flat_len(a.level));
    }

    pub fn zero(&self, level: usize) -> FieldElement {
        FieldElement {
            level,
            coeffs: SmallVec::from_elem(0, self.flat_len(level)),
        }
    }

    pub fn one(&self, level: usize) -> FieldElement {
        self.from_u64(level, 1)
    }

    pub fn from_u64(&self, level: usize, c: u64) -> FieldElement {
        let mut e = self.zero(level);
        e.coeffs[0] = c % self.p;
        e
    }

    pub fn from_i64(&self, level: usize, c: i64) -> FieldElement {
        self.from_u64(level, c.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_flat(&self, level: usize, flat: &[u64]) -> Result<FieldElement> {
        if flat.len() != self.flat_len(level) {
            return Err(Error::InvalidParameter(format!(
                "level {level} expects {} coordinates, got {}",
                self.flat_len(level),
                flat.len()
            )));
        }
        Ok(FieldElement {
            level,
            coeffs: flat.iter().map(|&c| c % self.p).collect(),
        })
    }

    /// The adjoined root generating `level` over `level - 1`.
    pub fn generator(&self, level: usize) -> FieldElement {
        assert!(level >= 1);
        let mut e = self.zero(level);
        if self.relative_degree(level) == 1 {
            // Degree-one levels never occur, but keep this total.
            return self.neg(&self.embed(&self.levels[level - 1].modulus[0], level));
        }
        e.coeffs[self.flat_len(level - 1)] = 1;
        e
    }

    /// Image of `a` in the (higher or equal) level `target`.
    pub fn embed(&self, a: &FieldElement, target: usize) -> FieldElement {
        assert!(target >= a.level, "cannot embed into a lower level");
        let mut coeffs = a.coeffs.clone();
        coeffs.resize(self.flat_len(target), 0);
        FieldElement {
            level: target,
            coeffs,
        }
    }

    /// Inverse of [`embed`](Self::embed): succeeds when `a` lies in `target`.
    pub fn descend(&self, a: &FieldElement, target: usize) -> Option<FieldElement> {
        let len = self.flat_len(target);
        if a.coeffs[len..].iter().any(|&c| c != 0) {
            return None;
        }
        Some(FieldElement {
            level: target,
            coeffs: a.coeffs[..len].iter().copied().collect(),
        })
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.level, b.level);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(&x, &y)| add_mod(x, y, self.p))
            .collect();
        FieldElement {
            level: a.level,
            coeffs,
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.level, b.level);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(&x, &y)| sub_mod(x, y, self.p))
            .collect();
        FieldElement {
            level: a.level,
            coeffs,
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let coeffs = a.coeffs.iter().map(|&x| sub_mod(0, x, self.p)).collect();
        FieldElement {
            level: a.level,
            coeffs,
        }
    }

    pub fn scale(&self, a: &FieldElement, c: u64) -> FieldElement {
        let c = c % self.p;
        let coeffs = a.coeffs.iter().map(|&x| mul_mod(x, c, self.p)).collect();
        FieldElement {
            level: a.level,
            coeffs,
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        debug_assert_eq!(a.level, b.level, "operands at different levels");
        self.check(a);
        FieldElement {
            level: a.level,
            coeffs: self.mul_flat(a.level, &a.coeffs, &b.coeffs),
        }
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    fn mul_flat(&self, level: usize, a: &[u64], b: &[u64]) -> Coeffs {
        if level == 0 {
            return SmallVec::from_elem(mul_mod(a[0], b[0], self.p), 1);
        }
        let lvl = &self.levels[level - 1];
        if let Some(raw) = &lvl.raw_modulus {
            let ring = FpPolyRing::new(self.p);
            let prod = ring.mul(a, b);
            let mut r: Coeffs = ring.rem(&prod, raw).into_iter().collect();
            r.resize(lvl.flat_len, 0);
            return r;
        }
        let s = self.flat_len(level - 1);
        let d = lvl.degree;
        let mut prod: Vec<Coeffs> = vec![SmallVec::from_elem(0, s); 2 * d - 1];
        for i in 0..d {
            let ai = &a[i * s..(i + 1) * s];
            if ai.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..d {
                let bj = &b[j * s..(j + 1) * s];
                let t = self.mul_flat(level - 1, ai, bj);
                for (x, y) in prod[i + j].iter_mut().zip(t.iter()) {
                    *x = add_mod(*x, *y, self.p);
                }
            }
        }
        for k in (d..2 * d - 1).rev() {
            let c = std::mem::replace(&mut prod[k], SmallVec::from_elem(0, s));
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for i in 0..d {
                let t = self.mul_flat(level - 1, &c, &lvl.modulus[i].coeffs);
                for (x, y) in prod[k - d + i].iter_mut().zip(t.iter()) {
                    *x = sub_mod(*x, *y, self.p);
                }
            }
        }
        prod.truncate(d);
        prod.into_iter().flatten().collect()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        if a.level == 0 {
            return Some(self.from_u64(0, inv_mod(a.coeffs[0], self.p)?));
        }
        let lvl = &self.levels[a.level - 1];
        if let Some(raw) = &lvl.raw_modulus {
            let ring = FpPolyRing::new(self.p);
            let mut inv: Coeffs = ring.inv_mod(&a.coeffs, raw)?.into_iter().collect();
            inv.resize(lvl.flat_len, 0);
            return Some(FieldElement {
                level: a.level,
                coeffs: inv,
            });
        }
        let exp = self.order(a.level) - 2u32;
        Some(self.pow(a, &exp))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Option<FieldElement> {
        Some(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, exp: &BigUint) -> FieldElement {
        let mut acc = self.one(a.level);
        for i in (0..exp.bits()).rev() {
            acc = self.square(&acc);
            if exp.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &FieldElement, mut exp: u64) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one(a.level);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.square(&base);
            exp >>= 1;
        }
        acc
    }

    /// Signed exponent; negative powers require a nonzero base.
    pub fn pow_i64(&self, a: &FieldElement, exp: i64) -> Option<FieldElement> {
        if exp >= 0 {
            Some(self.pow_u64(a, exp as u64))
        } else {
            Some(self.pow_u64(&self.inv(a)?, exp.unsigned_abs()))
        }
    }

    /// The p-power Frobenius applied `k` times.
    pub fn frobenius(&self, a: &FieldElement, k: usize) -> FieldElement {
        let mut out = a.clone();
        if a.level == 0 {
            return out;
        }
        for _ in 0..k {
            out = self.pow_u64(&out, self.p);
        }
        out
    }

    pub fn is_one(&self, a: &FieldElement) -> bool {
        a.coeffs[0] == 1 && a.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn random<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> FieldElement {
        let coeffs = (0..self.flat_len(level))
            .map(|_| rng.gen_range(0..self.p))
            .collect();
        FieldElement { level, coeffs }
    }

    /// Quadratic character: 1, -1, or 0.
    pub fn quadratic_character(&self, a: &FieldElement) -> i8 {
        if a.is_zero() {
            return 0;
        }
        let e = (self.order(a.level) - 1u32) >> 1;
        if self.is_one(&self.pow(a, &e)) {
            1
        } else {
            -1
        }
    }

    /// A square root by Tonelli-Shanks, or `None` for non-squares.
    pub fn sqrt<R: Rng + ?Sized>(&self, a: &FieldElement, rng: &mut R) -> Option<FieldElement> {
        if a.is_zero() {
            return Some(a.clone());
        }
        if self.quadratic_character(a) != 1 {
            return None;
        }
        let level = a.level;
        let q_minus_1 = self.order(level) - 1u32;
        let s = q_minus_1.trailing_zeros().unwrap_or(0);
        let t = &q_minus_1 >> s;
        let z = loop {
            let z = self.random(level, rng);
            if self.quadratic_character(&z) == -1 {
                break z;
            }
        };
        let mut m = s;
        let mut c = self.pow(&z, &t);
        let mut tt = self.pow(a, &t);
        let mut r = self.pow(a, &((&t + 1u32) >> 1));
        while !self.is_one(&tt) {
            let mut i = 0;
            let mut probe = tt.clone();
            while !self.is_one(&probe) {
                probe = self.square(&probe);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.square(&b);
            }
            m = i;
            c = self.square(&b);
            tt = self.mul(&tt, &c);
            r = self.mul(&r, &b);
        }
        Some(r)
    }

    /// Canonical enumeration index of an element: its flat coordinates read
    /// as base-p digits, constant coordinate least significant.
    pub fn element_from_index(&self, level: usize, mut index: BigUint) -> FieldElement {
        let mut e = self.zero(level);
        let pb = BigUint::from(self.p);
        for c in e.coeffs.iter_mut() {
            let digit = &index % &pb;
            *c = digit.iter_u64_digits().next().unwrap_or(0);
            index /= &pb;
        }
        e
    }

    /// Tower with one more level of the given relative degree over the
    /// current top, defined by the first monic irreducible polynomial in
    /// canonical order. Degree 1 returns the tower unchanged.
    pub fn make_extension(&self, degree: usize) -> Result<FieldTower> {
        if degree == 0 {
            return Err(Error::InvalidParameter(
                "extension degree must be at least 1".into(),
            ));
        }
        if degree == 1 {
            return Ok(self.clone());
        }
        let level = self.top();
        let q = self.order(level);
        let ring = PolyRing::new(self, level);
        // Enumerate monic polynomials by the integer whose base-q digits are
        // the lower coefficients, constant coefficient least significant.
        let mut n = BigUint::zero();
        loop {
            let mut rest = n.clone();
            let mut coeffs = Vec::with_capacity(degree + 1);
            for _ in 0..degree {
                let digit = &rest % &q;
                rest /= &q;
                coeffs.push(self.element_from_index(level, digit));
            }
            coeffs.push(self.one(level));
            let f = Poly::new(level, coeffs);
            if ring.is_irreducible(&f) {
                return Ok(self.with_level(f.coeffs));
            }
            n += 1u32;
        }
    }

    /// Appends a level with the given monic defining polynomial. The caller is
    /// responsible for irreducibility (see [`PolyRing::is_irreducible`]).
    pub fn with_level(&self, modulus: Vec<FieldElement>) -> FieldTower {
        let below = self.top();
        let degree = modulus.len() - 1;
        let raw_modulus = if below == 0 {
            Some(modulus.iter().map(|c| c.coeffs[0]).collect())
        } else {
            None
        };
        let mut tower = self.clone();
        tower.levels.push(Level {
            degree,
            flat_len: degree * self.flat_len(below),
            modulus,
            raw_modulus,
        });
        tower
    }

    /// Tower whose top level has absolute degree a multiple of `total_degree`
    /// reached by extending the current top; returns the tower and the level.
    pub fn extend_to_degree(&self, total_degree: usize) -> Result<(FieldTower, usize)> {
        let have = self.degree(self.top());
        if have % total_degree == 0 {
            return Ok((self.clone(), self.top()));
        }
        let needed = total_degree / arith::gcd(have as u64, total_degree as u64) as usize;
        let tower = self.make_extension(needed)?;
        let top = tower.top();
        Ok((tower, top))
    }

    /// Multiplicative order of `z`, which must divide `bound`.
    pub fn element_order(&self, z: &FieldElement, bound: u64) -> Result<u64> {
        if z.is_zero() {
            return Err(Error::InvalidParameter(
                "zero has no multiplicative order".into(),
            ));
        }
        if !self.is_one(&self.pow_u64(z, bound)) {
            return Err(Error::Arithmetic(format!(
                "element order does not divide {bound}"
            )));
        }
        let mut ord = bound;
        for prime in arith::prime_divisors(bound) {
            while ord % prime == 0 && self.is_one(&self.pow_u64(z, ord / prime)) {
                ord /= prime;
            }
        }
        Ok(ord)
    }

    /// Discrete logarithm of `target` to the primitive m-th root `base`, by
    /// baby-step giant-step.
    pub fn dlog_in_mu_m(&self, base: &FieldElement, target: &FieldElement, m: u64) -> Result<u64> {
        if self.element_order(base, m)? != m {
            return Err(Error::Arithmetic(format!(
                "base is not a primitive {m}-th root of unity"
            )));
        }
        let steps = (m as f64).sqrt().ceil() as u64;
        let mut table = HashMap::with_capacity(steps as usize);
        let mut cur = self.one(base.level);
        for j in 0..steps {
            table.entry(cur.clone()).or_insert(j);
            cur = self.mul(&cur, base);
        }
        // giant step: base^{-steps}
        let giant = self
            .inv(&self.pow_u64(base, steps))
            .expect("roots of unity are invertible");
        let mut gamma = target.clone();
        for i in 0..=steps {
            if let Some(&j) = table.get(&gamma) {
                return Ok((i * steps + j) % m);
            }
            gamma = self.mul(&gamma, &giant);
        }
        Err(Error::Arithmetic(format!(
            "target is not in the subgroup generated by the base (m = {m})"
        )))
    }

    pub fn element_to_json(&self, a: &FieldElement) -> Value {
        self.json_flat(a.level, &a.coeffs)
    }

    fn json_flat(&self, level: usize, flat: &[u64]) -> Value {
        if level == 0 {
            return Value::String(flat[0].to_string());
        }
        let s = self.flat_len(level - 1);
        Value::Array(
            flat.chunks(s)
                .map(|chunk| self.json_flat(level - 1, chunk))
                .collect(),
        )
    }

    pub fn element_from_json(&self, level: usize, v: &Value) -> Result<FieldElement> {
        let mut flat = Vec::with_capacity(self.flat_len(level));
        self.collect_flat(level, v, &mut flat)?;
        self.from_flat(level, &flat)
    }

    fn collect_flat(&self, level: usize, v: &Value, out: &mut Vec<u64>) -> Result<()> {
        if level == 0 {
            out.push(parse_decimal(v)? % self.p);
            return Ok(());
        }
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Format("expected coefficient array".into()))?;
        if arr.len() != self.relative_degree(level) {
            return Err(Error::Format(format!(
                "level {level} element needs {} coefficients",
                self.relative_degree(level)
            )));
        }
        for c in arr {
            self.collect_flat(level - 1, c, out)?;
        }
        Ok(())
    }

    /// `{"p": "...", "levels": [[...], ...]}` with each level's defining
    /// polynomial listed constant-first.
    pub fn to_json(&self) -> Value {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, lvl)| {
                Value::Array(
                    lvl.modulus
                        .iter()
                        .map(|c| self.json_flat(i, &c.coeffs))
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({ "p": self.p.to_string(), "levels": Value::Array(levels) })
    }

    pub fn from_json(v: &Value) -> Result<FieldTower> {
        let p = parse_decimal(
            v.get("p")
                .ok_or_else(|| Error::Format("field description lacks \"p\"".into()))?,
        )?;
        let mut tower = FieldTower::prime(p)?;
        if let Some(levels) = v.get("levels").and_then(Value::as_array) {
            for lvl in levels {
                let arr = lvl
                    .as_array()
                    .ok_or_else(|| Error::Format("level must be an array".into()))?;
                let below = tower.top();
                let modulus = arr
                    .iter()
                    .map(|c| tower.element_from_json(below, c))
                    .collect::<Result<Vec<_>>>()?;
                if modulus.len() < 2 || !tower.is_one(modulus.last().unwrap()) {
                    return Err(Error::Format("defining polynomial must be monic".into()));
                }
                let ring = PolyRing::new(&tower, below);
                if !ring.is_irreducible(&Poly::new(below, modulus.clone())) {
                    return Err(Error::Format("defining polynomial is reducible".into()));
                }
                tower = tower.with_level(modulus);
            }
        }
        Ok(tower)
    }
}

/// Accepts a decimal string or a JSON number.
pub fn parse_decimal(v: &Value) -> Result<u64> {
    match v {
        Value::String(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::Format(format!("bad decimal {s:?}: {e}"))),
        Value::Number(n) => n
            .as_u64()
            .ok_or_else(|| Error::Format(format!("expected non-negative integer, got {n}"))),
        other => Err(Error::Format(format!("expected decimal, got {other}"))),
    }
}

/// F_{p^r} as a two-level tower over F_p, shared across callers.
pub fn prime_extension(p: u64, r: usize) -> Result<Arc<FieldTower>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<FieldTower>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(p, r)) {
        return Ok(t.clone());
    }
    let t = Arc::new(FieldTower::prime(p)?.make_extension(r)?);
    cache.lock().unwrap().insert((p, r), t.clone());
    Ok(t)
}

/// Legendre symbol (n/m) for an odd prime m, via Euler's criterion.
pub fn legendre_symbol(n: i64, m: u64) -> i8 {
    arith::legendre(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degree_one_extension_is_identity() {
        let f5 = FieldTower::prime(5).unwrap();
        assert_eq!(f5.make_extension(1).unwrap(), f5);
    }

    #[test]
    fn first_quadratic_modulus() {
        // x^2 + 2 over F_5 and F_13: constant -2 is a non-residue in both.
        for p in [5u64, 13] {
            let t = FieldTower::prime(p).unwrap().make_extension(2).unwrap();
            let m: Vec<u64> = t
                .defining_polynomial(1)
                .iter()
                .map(|c| c.flat()[0])
                .collect();
            assert_eq!(m, vec![2, 0, 1]);
        }
    }

    #[test]
    fn rejects_small_or_composite() {
        assert!(FieldTower::prime(3).is_err());
        assert!(FieldTower::prime(15).is_err());
        assert!(FieldTower::prime(7).is_ok());
    }

    #[test]
    fn dlog_examples() {
        // 29 = 1 mod 7, so F_29 contains the 7th roots of unity.
        let f = FieldTower::prime(29).unwrap();
        let g = f.from_u64(0, 2); // primitive root mod 29
        let zeta = f.pow_u64(&g, 4);
        assert_eq!(f.element_order(&zeta, 7).unwrap(), 7);
        assert_eq!(f.dlog_in_mu_m(&zeta, &zeta, 7).unwrap(), 1);
        assert_eq!(f.dlog_in_mu_m(&zeta, &f.one(0), 7).unwrap(), 0);
        let z3 = f.pow_u64(&zeta, 3);
        // Exhaustive oracle.
        let expect = (0..7).find(|&a| f.pow_u64(&zeta, a) == z3).unwrap();
        assert_eq!(expect, 3);
        assert_eq!(f.dlog_in_mu_m(&zeta, &z3, 7).unwrap(), expect);
    }

    #[test]
    fn element_order_examples() {
        let f = FieldTower::prime(17).unwrap();
        assert_eq!(f.element_order(&f.one(0), 8).unwrap(), 1);
        // 4 has order 4 mod 17, and it lies in mu_8.
        assert_eq!(f.element_order(&f.from_u64(0, 4), 8).unwrap(), 4);
        assert!(f.element_order(&f.from_u64(0, 3), 8).is_err());
    }

    #[test]
    fn sqrt_in_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = FieldTower::prime(13).unwrap().make_extension(3).unwrap();
        for _ in 0..50 {
            let a = t.random(1, &mut rng);
            let sq = t.square(&a);
            let r = t.sqrt(&sq, &mut rng).unwrap();
            assert_eq!(t.square(&r), sq);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = FieldTower::prime(7)
            .unwrap()
            .make_extension(2)
            .unwrap()
            .make_extension(3)
            .unwrap();
        let v = t.to_json();
        let back = FieldTower::from_json(&v).unwrap();
        assert_eq!(back, t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = t.random(2, &mut rng);
        let ev = t.element_to_json(&e);
        assert_eq!(t.element_from_json(2, &ev).unwrap(), e);
    }
    fn tower(k: usize) -> FieldTower {
        let (p, degs): (u64, &[usize]) =
            [(5, &[2, 3][..]), (13, &[3]), (101, &[2, 2]), (1009, &[1])][k % 4];
        let mut t = FieldTower::prime(p).unwrap();
        for &d in degs {
            t = t.make_extension(d).unwrap();
        }
        t
    }

    proptest::proptest! {
        #[test]
        fn field_axioms(k in 0usize..4, seed: u64) {
            let t = tower(k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = t.top();
            let (a, b, c) = (t.random(l, &mut rng), t.random(l, &mut rng), t.random(l, &mut rng));
            proptest::prop_assert_eq!(t.add(&t.add(&a, &b), &c), t.add(&a, &t.add(&b, &c)));
            proptest::prop_assert_eq!(t.mul(&t.mul(&a, &b), &c), t.mul(&a, &t.mul(&b, &c)));
            proptest::prop_assert_eq!(t.mul(&a, &t.add(&b, &c)), t.add(&t.mul(&a, &b), &t.mul(&a, &c)));
            proptest::prop_assert_eq!(t.mul(&a, &b), t.mul(&b, &a));
            if !a.is_zero() {
                proptest::prop_assert!(t.is_one(&t.mul(&a, &t.inv(&a).unwrap())));
            }
        }

        #[test]
        fn frobenius_is_a_ring_map(k in 0usize..4, seed: u64) {
            let t = tower(k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = t.top();
            let (a, b) = (t.random(l, &mut rng), t.random(l, &mut rng));
            let f = |x: &FieldElement| t.pow_u64(x, t.p());
            proptest::prop_assert_eq!(f(&t.add(&a, &b)), t.add(&f(&a), &f(&b)));
            proptest::prop_assert_eq!(f(&t.mul(&a, &b)), t.mul(&f(&a), &f(&b)));
            proptest::prop_assert_eq!(t.frobenius(&a, 1), f(&a));
        }

        #[test]
        fn extension_is_deterministic(k in 0usize..4) {
            proptest::prop_assert_eq!(tower(k), tower(k));
        }

        #[test]
        fn dlog_round_trip(k in 0usize..4, m_index in 0usize..4, a in 0u64..1000, seed: u64) {
            let t = tower(k);
            let l = t.top();
            let order = t.order(l) - 1u32;
            let m = [2u64, 3, 4, 8][m_index];
            let big_m = num_bigint::BigUint::from(m);
            if &order % &big_m != num_bigint::BigUint::from(0u32) {
                return Ok(());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let zeta = loop {
                let z = t.pow(&t.random(l, &mut rng), &(&order / &big_m));
                if !z.is_zero() && t.element_order(&z, m).unwrap() == m {
                    break z;
                }
            };
            let a = a % m;
            proptest::prop_assert_eq!(t.dlog_in_mu_m(&zeta, &t.pow_u64(&zeta, a), m).unwrap(), a);
        }
    }
}
