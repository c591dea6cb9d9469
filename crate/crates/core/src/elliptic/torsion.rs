//! Uniform sampling from E[m] for m a prime power, by the cofactor method.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::{Curve, Point};
use crate::arith;
use crate::error::{Error, Result};
use crate::field::FieldTower;

const INITIAL_SAMPLES: usize = 24;
const RETRY_BOUND: usize = 8;

/// Samples uniformly from E[l^e], where E(F) has known order N and
/// l-primary part Z/l^a x Z/l^b with a >= b >= e.
#[derive(Clone, Debug)]
pub struct TorsionSampler {
    curve: Curve,
    level: usize,
    ell: u64,
    e: u32,
    a: u32,
    b: u32,
    cofactor: BigUint,
    /// Point of maximal order l^a in the l-primary part.
    t1: Point,
    /// c * l^(a-1) T1 for c in 0..l.
    low_multiples: Vec<Point>,
    /// l^(a-b) T1, generating the part of <T1> inside E[l^b].
    t1_low: Point,
}

impl TorsionSampler {
    /// `m` must be a prime power coprime to the characteristic and
    /// `group_order` must equal #E(F) at `level`.
    pub fn new<R: Rng + ?Sized>(
        t: &FieldTower,
        curve: &Curve,
        level: usize,
        m: u64,
        group_order: &BigUint,
        rng: &mut R,
    ) -> Result<Self> {
        let factors = arith::factorize(m);
        if factors.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "torsion sampling needs a prime power, got {m}"
            )));
        }
        let (ell, e) = factors[0];
        let v = arith::valuation_big(group_order, ell);
        if v < 2 * e {
            return Err(Error::Arithmetic(format!(
                "#E = {group_order} is not divisible by {m}^2, so E[{m}] is not rational"
            )));
        }
        let cofactor = group_order / arith::big_pow(ell, v as u64);
        let curve = curve.base_change(t, level);
        for _ in 0..RETRY_BOUND {
            let mut best: Option<(u32, Point)> = None;
            for _ in 0..INITIAL_SAMPLES {
                let s = curve.mul_big(t, &cofactor, &curve.random_point(t, level, rng));
                let j = ell_order(t, &curve, ell, &s, v)?;
                if best.as_ref().is_none_or(|(bj, _)| j > *bj) {
                    best = Some((j, s));
                }
            }
            let (a, t1) = best.expect("at least one sample");
            if a < e || v - a < e {
                continue;
            }
            let b = v - a;
            let top = curve.mul_big(t, &arith::big_pow(ell, (a - 1) as u64), &t1);
            let mut low_multiples = vec![Point::Infinity];
            for c in 1..ell {
                low_multiples.push(curve.add(t, &low_multiples[c as usize - 1], &top));
            }
            let t1_low = curve.mul_big(t, &arith::big_pow(ell, (a - b) as u64), &t1);
            let sampler = TorsionSampler {
                curve: curve.clone(),
                level,
                ell,
                e,
                a,
                b,
                cofactor: cofactor.clone(),
                t1,
                low_multiples,
                t1_low,
            };
            // A failed reduction means T1 did not have maximal order.
            if sampler.sample(t, rng).is_ok() {
                return Ok(sampler);
            }
        }
        Err(Error::Arithmetic(format!(
            "could not determine the {ell}-primary structure of E(F)"
        )))
    }

    /// Exponents (a, b) of the l-primary part Z/l^a x Z/l^b.
    pub fn structure(&self) -> (u32, u32) {
        (self.a, self.b)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// Uniform element of E[l^e], possibly the point at infinity.
    pub fn sample<R: Rng + ?Sized>(&self, t: &FieldTower, rng: &mut R) -> Result<Point> {
        let c = &self.curve;
        let ell = self.ell;
        let r = c.random_point(t, self.level, rng);
        let mut s = c.mul_big(t, &self.cofactor, &r);
        // Push s into E[l^b] by subtracting multiples of T1.
        loop {
            let j = ell_order(t, c, ell, &s, self.a)?;
            if j <= self.b {
                break;
            }
            let probe = c.mul_big(t, &arith::big_pow(ell, (j - 1) as u64), &s);
            let k = self
                .low_multiples
                .iter()
                .position(|p| *p == probe)
                .ok_or_else(|| Error::Arithmetic("sample escaped <T1> modulo E[l^b]".into()))?;
            let shift = c.mul_big(t, &(arith::big_pow(ell, (self.a - j) as u64) * k), &self.t1);
            s = c.sub(t, &s, &shift);
        }
        let u = BigUint::from(rng.gen_range(0..ell.pow(self.b)));
        if !u.is_zero() {
            s = c.add(t, &s, &c.mul_big(t, &u, &self.t1_low));
        }
        Ok(c.mul_big(t, &arith::big_pow(ell, (self.b - self.e) as u64), &s))
    }

    /// Random point of exact order l^e.
    pub fn sample_exact<R: Rng + ?Sized>(&self, t: &FieldTower, rng: &mut R) -> Result<Point> {
        let sub = arith::big_pow(self.ell, (self.e - 1) as u64);
        for _ in 0..64 {
            let p = self.sample(t, rng)?;
            if !self.curve.mul_big(t, &sub, &p).is_infinity() {
                return Ok(p);
            }
        }
        Err(Error::Arithmetic("no point of exact order found".into()))
    }
}

/// Exponent j with ord(s) = l^j, given ord(s) | l^bound.
fn ell_order(t: &FieldTower, c: &Curve, ell: u64, s: &Point, bound: u32) -> Result<u32> {
    let mut cur = s.clone();
    let mut j = 0;
    let lb = BigUint::from(ell);
    while !cur.is_infinity() {
        if j == bound {
            return Err(Error::Arithmetic(
                "point order exceeds the expected prime power".into(),
            ));
        }
        cur = c.mul_big(t, &lb, &cur);
        j += 1;
    }
    Ok(j)
}

/// Point of exact order m in E(F_{q^r}) at `level`, given #E at that level.
/// Uniform over the order-m points of E[m] when E[m] is rational; otherwise
/// any point of order m in the l-primary part.
pub fn sample_m_torsion<R: Rng + ?Sized>(
    t: &FieldTower,
    curve: &Curve,
    level: usize,
    m: u64,
    group_order: &BigUint,
    rng: &mut R,
) -> Result<Point> {
    let factors = arith::factorize(m);
    if factors.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "torsion sampling needs a prime power, got {m}"
        )));
    }
    let (ell, e) = factors[0];
    let v = arith::valuation_big(group_order, ell);
    if v >= 2 * e {
        if let Ok(sampler) = TorsionSampler::new(t, curve, level, m, group_order, rng) {
            return sampler.sample_exact(t, rng);
        }
    }
    if v < e {
        return Err(Error::Arithmetic(format!(
            "{m} does not divide #E = {group_order}"
        )));
    }
    let curve = curve.base_change(t, level);
    let cofactor = group_order / arith::big_pow(ell, v as u64);
    for _ in 0..64 {
        let s = curve.mul_big(t, &cofactor, &curve.random_point(t, level, rng));
        let j = ell_order(t, &curve, ell, &s, v)?;
        if j >= e {
            return Ok(curve.mul_big(t, &arith::big_pow(ell, (j - e) as u64), &s));
        }
    }
    Err(Error::Arithmetic("no point of exact order found".into()))
}
