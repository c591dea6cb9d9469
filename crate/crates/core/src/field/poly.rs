//! Polynomials with coefficients at a fixed level of a [`FieldTower`].

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{FieldElement, FieldTower, FpPolyRing, RawPoly};

/// Dense polynomial, constant-first, with no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub level: usize,
    pub coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn new(level: usize, mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(FieldElement::is_zero) {
            coeffs.pop();
        }
        Self { level, coeffs }
    }

    pub fn zero(level: usize) -> Self {
        Self {
            level,
            coeffs: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }
}

/// Arithmetic context for polynomials over one level of a tower.
#[derive(Clone, Copy)]
pub struct PolyRing<'a> {
    tower: &'a FieldTower,
    level: usize,
}

impl<'a> PolyRing<'a> {
    pub fn new(tower: &'a FieldTower, level: usize) -> Self {
        Self { tower, level }
    }

    pub fn tower(&self) -> &'a FieldTower {
        self.tower
    }

    pub fn level(&self) -> usize {
        self.level
    }

    fn raw(&self) -> Option<FpPolyRing> {
        (self.level == 0).then(|| FpPolyRing::new(self.tower.p()))
    }

    fn to_raw(f: &Poly) -> RawPoly {
        f.coeffs.iter().map(|c| c.flat()[0]).collect()
    }

    fn from_raw(&self, f: RawPoly) -> Poly {
        Poly::new(
            0,
            f.into_iter().map(|c| self.tower.from_u64(0, c)).collect(),
        )
    }

    pub fn constant(&self, c: FieldElement) -> Poly {
        Poly::new(self.level, vec![c])
    }

    pub fn one(&self) -> Poly {
        self.constant(self.tower.one(self.level))
    }

    pub fn x(&self) -> Poly {
        Poly::new(
            self.level,
            vec![self.tower.zero(self.level), self.tower.one(self.level)],
        )
    }

    /// x - a
    pub fn linear(&self, a: &FieldElement) -> Poly {
        Poly::new(
            self.level,
            vec![self.tower.neg(a), self.tower.one(self.level)],
        )
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let zero = self.tower.zero(self.level);
        let coeffs = (0..n)
            .map(|i| {
                let x = a.coeffs.get(i).unwrap_or(&zero);
                let y = b.coeffs.get(i).unwrap_or(&zero);
                self.tower.add(x, y)
            })
            .collect();
        Poly::new(self.level, coeffs)
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        let zero = self.tower.zero(self.level);
        let coeffs = (0..n)
            .map(|i| {
                let x = a.coeffs.get(i).unwrap_or(&zero);
                let y = b.coeffs.get(i).unwrap_or(&zero);
                self.tower.sub(x, y)
            })
            .collect();
        Poly::new(self.level, coeffs)
    }

    pub fn scale(&self, a: &Poly, c: &FieldElement) -> Poly {
        Poly::new(
            self.level,
            a.coeffs.iter().map(|x| self.tower.mul(x, c)).collect(),
        )
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero(self.level);
        }
        if let Some(r) = self.raw() {
            return self.from_raw(r.mul(&Self::to_raw(a), &Self::to_raw(b)));
        }
        let mut out = vec![self.tower.zero(self.level); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.tower.add(&out[i + j], &self.tower.mul(x, y));
            }
        }
        Poly::new(self.level, out)
    }

    pub fn divrem(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        assert!(!b.is_zero(), "division by the zero polynomial");
        if let Some(r) = self.raw() {
            let (q, rem) = r.divrem(&Self::to_raw(a), &Self::to_raw(b));
            return (self.from_raw(q), self.from_raw(rem));
        }
        if a.coeffs.len() < b.coeffs.len() {
            return (Poly::zero(self.level), a.clone());
        }
        let db = b.coeffs.len() - 1;
        let lead_inv = self.tower.inv(b.leading().unwrap()).unwrap();
        let mut r = a.coeffs.clone();
        let mut q = vec![self.tower.zero(self.level); a.coeffs.len() - db];
        for k in (db..a.coeffs.len()).rev() {
            if r[k].is_zero() {
                continue;
            }
            let c = self.tower.mul(&r[k], &lead_inv);
            let off = k - db;
            for (i, bi) in b.coeffs.iter().enumerate() {
                r[off + i] = self.tower.sub(&r[off + i], &self.tower.mul(&c, bi));
            }
            q[off] = c;
        }
        r.truncate(db);
        (Poly::new(self.level, q), Poly::new(self.level, r))
    }

    pub fn rem(&self, a: &Poly, b: &Poly) -> Poly {
        if let Some(r) = self.raw() {
            return self.from_raw(r.rem(&Self::to_raw(a), &Self::to_raw(b)));
        }
        self.divrem(a, b).1
    }

    pub fn mul_mod(&self, a: &Poly, b: &Poly, m: &Poly) -> Poly {
        self.rem(&self.mul(a, b), m)
    }

    pub fn pow_mod(&self, base: &Poly, exp: &BigUint, m: &Poly) -> Poly {
        if let Some(r) = self.raw() {
            return self.from_raw(r.pow_mod(&Self::to_raw(base), exp, &Self::to_raw(m)));
        }
        let base = self.rem(base, m);
        let mut acc = self.rem(&self.one(), m);
        for i in (0..exp.bits()).rev() {
            acc = self.mul_mod(&acc, &acc, m);
            if exp.bit(i) {
                acc = self.mul_mod(&acc, &base, m);
            }
        }
        acc
    }

    pub fn monic(&self, a: &Poly) -> Poly {
        match a.leading() {
            None => a.clone(),
            Some(lead) => self.scale(a, &self.tower.inv(lead).unwrap()),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, a: &Poly, b: &Poly) -> Poly {
        if let Some(r) = self.raw() {
            return self.from_raw(r.gcd(&Self::to_raw(a), &Self::to_raw(b)));
        }
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    pub fn eval(&self, f: &Poly, x: &FieldElement) -> FieldElement {
        let t = self.tower;
        let x = t.embed(x, self.level.max(x.level()));
        let mut acc = t.zero(x.level());
        for c in f.coeffs.iter().rev() {
            acc = t.add(&t.mul(&acc, &x), &t.embed(c, x.level()));
        }
        acc
    }

    pub fn derivative(&self, f: &Poly) -> Poly {
        Poly::new(
            self.level,
            f.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| self.tower.scale(c, i as u64))
                .collect(),
        )
    }

    /// Ben-Or test: no factor of degree i divides f for i up to deg(f)/2.
    pub fn is_irreducible(&self, f: &Poly) -> bool {
        let Some(n) = f.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let q = self.tower.order(self.level);
        let x = self.x();
        let mut xq = self.rem(&x, f);
        for _ in 1..=n / 2 {
            xq = self.pow_mod(&xq, &q, f);
            let g = self.gcd(f, &self.sub(&xq, &x));
            if g.degree() != Some(0) {
                return false;
            }
        }
        true
    }

    /// Distinct roots of `f` in this level, sorted by canonical index.
    pub fn roots(&self, f: &Poly) -> Vec<FieldElement> {
        let Some(n) = f.degree() else {
            return Vec::new();
        };
        if n == 0 {
            return Vec::new();
        }
        let q = self.tower.order(self.level);
        let x = self.x();
        let f = self.monic(f);
        let xq = self.pow_mod(&x, &q, &f);
        let split = self.gcd(&f, &self.sub(&xq, &x));
        let mut out = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        self.split_roots(split, &q, &mut rng, &mut out);
        out.sort_by(|a, b| a.flat().iter().rev().cmp(b.flat().iter().rev()));
        out
    }

    fn split_roots(&self, g: Poly, q: &BigUint, rng: &mut ChaCha8Rng, out: &mut Vec<FieldElement>) {
        match g.degree() {
            None | Some(0) => {}
            Some(1) => {
                let g = self.monic(&g);
                out.push(self.tower.neg(&g.coeffs[0]));
            }
            Some(d) => {
                let half = (q - 1u32) >> 1;
                loop {
                    let c = self.tower.random(self.level, rng);
                    let h = self.add(&self.x(), &self.constant(c));
                    let w = self.sub(&self.pow_mod(&h, &half, &g), &self.one());
                    let a = self.gcd(&g, &w);
                    let da = a.degree().unwrap_or(0);
                    if da > 0 && da < d {
                        let b = self.divrem(&g, &a).0;
                        self.split_roots(a, q, rng, out);
                        self.split_roots(b, q, rng, out);
                        return;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_roots(t: &FieldTower, level: usize, f: &Poly) -> Vec<FieldElement> {
        let ring = PolyRing::new(t, level);
        let q: u64 = t.order(level).try_into().unwrap();
        let mut out: Vec<FieldElement> = (0..q)
            .map(|i| t.element_from_index(level, BigUint::from(i)))
            .filter(|e| ring.eval(f, e).is_zero())
            .collect();
        out.sort_by(|a, b| a.flat().iter().rev().cmp(b.flat().iter().rev()));
        out
    }

    #[test]
    fn roots_match_exhaustive_search() {
        let t = FieldTower::prime(11).unwrap().make_extension(2).unwrap();
        let ring = PolyRing::new(&t, 1);
        let g = t.generator(1);
        let a = t.add(&g, &t.from_u64(1, 3));
        let b = t.from_u64(1, 7);
        let mut f = ring.mul(&ring.linear(&a), &ring.linear(&b));
        f = ring.mul(&f, &ring.linear(&b));
        // An irreducible quadratic over F_121 would need F_{11^4}; use x^2 - g
        // which has roots exactly when g is a square.
        let extra = Poly::new(1, vec![t.neg(&g), t.zero(1), t.one(1)]);
        f = ring.mul(&f, &extra);
        assert_eq!(ring.roots(&f), brute_roots(&t, 1, &f));
    }

    #[test]
    fn roots_over_prime_field() {
        let t = FieldTower::prime(31).unwrap();
        let ring = PolyRing::new(&t, 0);
        let f = Poly::new(
            0,
            [5i64, -3, 0, 1, 2]
                .iter()
                .map(|&c| t.from_i64(0, c))
                .collect(),
        );
        assert_eq!(ring.roots(&f), brute_roots(&t, 0, &f));
    }

    #[test]
    fn irreducibility_counts() {
        // Number of monic irreducible cubics over F_5 is (125 - 5) / 3 = 40.
        let t = FieldTower::prime(5).unwrap();
        let ring = PolyRing::new(&t, 0);
        let mut count = 0;
        for n in 0..125u64 {
            let coeffs = vec![
                t.from_u64(0, n % 5),
                t.from_u64(0, (n / 5) % 5),
                t.from_u64(0, n / 25),
                t.one(0),
            ];
            if ring.is_irreducible(&Poly::new(0, coeffs)) {
                count += 1;
            }
        }
        assert_eq!(count, 40);
    }
}
