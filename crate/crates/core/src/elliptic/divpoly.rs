//! Division polynomials and the degree of the field generated by E[m].

use std::collections::HashMap;

use num_bigint::BigUint;

use super::Curve;
use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldTower, FpPolyRing, Poly, PolyRing, RawPoly};

/// Largest x-polynomial degree handled by factoring; above it the extension
/// degree is read off the Frobenius characteristic polynomial instead.
pub const FACTORING_DEGREE_LIMIT: usize = 300;

/// Reduced division polynomials in x alone: psi_n for odd n and psi_n / (2y)
/// for even n.
struct Reduced<'a> {
    ring: PolyRing<'a>,
    /// (4 (x^3 + a4 x + a6))^2
    f2: Poly,
    memo: HashMap<usize, Poly>,
}

impl<'a> Reduced<'a> {
    fn new(t: &'a FieldTower, e: &Curve) -> Self {
        let level = e.level();
        let ring = PolyRing::new(t, level);
        let c = |v: i64| t.from_i64(level, v);
        let (a, b) = (e.a4.clone(), e.a6.clone());
        let mut memo = HashMap::new();
        memo.insert(0, Poly::zero(level));
        memo.insert(1, ring.one());
        memo.insert(2, ring.one());
        // 3x^4 + 6a x^2 + 12b x - a^2
        memo.insert(
            3,
            Poly::new(
                level,
                vec![
                    t.neg(&t.square(&a)),
                    t.scale(&b, 12),
                    t.scale(&a, 6),
                    c(0),
                    c(3),
                ],
            ),
        );
        // 2(x^6 + 5a x^4 + 20b x^3 - 5a^2 x^2 - 4ab x - 8b^2 - a^3)
        let a2 = t.square(&a);
        let g4 = vec![
            t.neg(&t.add(&t.scale(&t.square(&b), 8), &t.mul(&a2, &a))),
            t.neg(&t.scale(&t.mul(&a, &b), 4)),
            t.neg(&t.scale(&a2, 5)),
            t.scale(&b, 20),
            t.scale(&a, 5),
            c(0),
            c(1),
        ];
        let g4 = ring.scale(&Poly::new(level, g4), &c(2));
        memo.insert(4, g4);
        let f = cubic(t, e);
        let f4 = ring.scale(&f, &c(4));
        let f2 = ring.mul(&f4, &f4);
        Self { ring, f2, memo }
    }

    fn get(&mut self, n: usize) -> Poly {
        if let Some(p) = self.memo.get(&n) {
            return p.clone();
        }
        let r = self.ring;
        let k = n / 2;
        let out = if n % 2 == 1 {
            let (gk2, gk, gk1, gk_1) = (
                self.get(k + 2),
                self.get(k),
                self.get(k + 1),
                self.get(k - 1),
            );
            let mut left = r.mul(&gk2, &r.mul(&gk, &r.mul(&gk, &gk)));
            let mut right = r.mul(&gk_1, &r.mul(&gk1, &r.mul(&gk1, &gk1)));
            if k % 2 == 0 {
                left = r.mul(&self.f2, &left);
            } else {
                right = r.mul(&self.f2, &right);
            }
            r.sub(&left, &right)
        } else {
            let (gk2, gk_1, gk_2, gk1, gk) = (
                self.get(k + 2),
                self.get(k - 1),
                self.get(k - 2),
                self.get(k + 1),
                self.get(k),
            );
            let a = r.mul(&gk2, &r.mul(&gk_1, &gk_1));
            let b = r.mul(&gk_2, &r.mul(&gk1, &gk1));
            r.mul(&gk, &r.sub(&a, &b))
        };
        self.memo.insert(n, out.clone());
        out
    }
}

/// x^3 + a4 x + a6 as a polynomial.
pub(crate) fn cubic(t: &FieldTower, e: &Curve) -> Poly {
    let level = e.level();
    Poly::new(
        level,
        vec![e.a6.clone(), e.a4.clone(), t.zero(level), t.one(level)],
    )
}

/// Polynomial in x vanishing exactly at the x-coordinates of E[m] \ {O}.
///
/// For odd m this is the classical psi_m of degree (m^2 - 1)/2. For even m it
/// is the cubic times psi_m / (2y), so the 2-torsion x-coordinates are
/// included.
pub fn division_polynomial(t: &FieldTower, e: &Curve, m: usize) -> Result<Poly> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let mut red = Reduced::new(t, e);
    if m % 2 == 1 {
        return Ok(red.get(m));
    }
    let ring = PolyRing::new(t, e.level());
    Ok(ring.mul(&cubic(t, e), &red.get(m)))
}

/// Smallest r with E[m] contained in E(F_{q^r}), for E over a prime field.
///
/// The x-polynomial is split by degree with a precomputed Frobenius matrix,
/// and each block is checked for whether its y-coordinates need a further
/// quadratic extension. When the polynomial is too large to factor, r is the
/// order of the Frobenius characteristic matrix modulo m, which is exact
/// whenever Frobenius does not act on E[m] as a scalar (the situation
/// required by the character attack).
pub fn torsion_extension_degree(t: &FieldTower, e: &Curve, m: usize) -> Result<usize> {
    let q = t.p();
    if e.level() != 0 {
        return Err(Error::InvalidParameter(
            "torsion extension degree needs a curve over the prime field".into(),
        ));
    }
    if m == 0 || arith::gcd(m as u64, q) != 1 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must be positive and coprime to q = {q}"
        )));
    }
    if m == 1 {
        return Ok(1);
    }
    let x_degree = if m % 2 == 1 {
        (m * m - 1) / 2
    } else {
        (m * m + 2) / 2
    };
    if x_degree > FACTORING_DEGREE_LIMIT {
        let trace = e.trace(t)?;
        return Ok(frobenius_matrix_order(q, trace, m as u64) as usize);
    }
    let raw = FpPolyRing::new(q);
    let f: RawPoly = cubic(t, e).coeffs.iter().map(|c| c.flat()[0]).collect();
    let mut red = Reduced::new(t, e);
    let g: RawPoly = red.get(m).coeffs.iter().map(|c| c.flat()[0]).collect();
    let g = raw.monic(&g);
    let mut r = 1usize;
    for (d, block) in distinct_degree_blocks(&raw, &g) {
        // y^2 = f(x) with x in F_{q^d}: y lies there iff f(x) is a square.
        let exp = (arith::big_pow(q, d as u64) - 1u32) >> 1;
        let chi = raw.pow_mod(&f, &exp, &block);
        let need = if chi == vec![1] { d } else { 2 * d };
        r = lcm(r, need);
    }
    if m % 2 == 0 {
        for (d, _) in distinct_degree_blocks(&raw, &f) {
            r = lcm(r, d);
        }
    }
    Ok(r)
}

fn lcm(a: usize, b: usize) -> usize {
    a / arith::gcd(a as u64, b as u64) as usize * b
}

/// Distinct-degree factorization of a monic squarefree polynomial over F_p:
/// pairs (d, product of all irreducible factors of degree d).
pub(crate) fn distinct_degree_blocks(raw: &FpPolyRing, h: &[u64]) -> Vec<(usize, RawPoly)> {
    let n = h.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let frob = FrobeniusMatrix::new(raw, h);
    let x = raw.x();
    let mut cur = raw.rem(&x, h);
    let mut rest = h.to_vec();
    let mut out = Vec::new();
    let mut d = 0;
    while rest.len() > 1 {
        d += 1;
        if 2 * d > rest.len() - 1 {
            out.push((rest.len() - 1, rest));
            break;
        }
        cur = frob.apply(&cur);
        let g = raw.gcd(&rest, &raw.sub(&cur, &x));
        if g.len() > 1 {
            rest = raw.divrem(&rest, &g).0;
            out.push((d, g));
        }
    }
    out
}

/// The F_p-linear map a(x) -> a(x)^p modulo h, as a matrix of residues.
struct FrobeniusMatrix {
    p: u64,
    rows: Vec<RawPoly>,
}

impl FrobeniusMatrix {
    fn new(raw: &FpPolyRing, h: &[u64]) -> Self {
        let n = h.len() - 1;
        let xp = raw.pow_mod(&raw.x(), &BigUint::from(raw.p), h);
        let mut rows = Vec::with_capacity(n);
        let mut cur = raw.rem(&[1], h);
        for _ in 0..n {
            rows.push(cur.clone());
            cur = raw.mul_mod(&cur, &xp, h);
        }
        Self { p: raw.p, rows }
    }

    fn apply(&self, a: &[u64]) -> RawPoly {
        let n = self.rows.len();
        let mut acc = vec![0u128; n];
        for (i, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (j, &v) in self.rows[i].iter().enumerate() {
                acc[j] += c as u128 * v as u128;
            }
        }
        let mut out: RawPoly = acc
            .into_iter()
            .map(|v| (v % self.p as u128) as u64)
            .collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }
}

/// Multiplicative order of [[0, -q], [1, t]] in GL_2(Z/mZ).
pub fn frobenius_matrix_order(q: u64, t: i64, m: u64) -> u64 {
    let mm = m as i128;
    let red = |v: i128| v.rem_euclid(mm);
    let base = [[0, red(-(q as i128))], [1, red(t as i128)]];
    let mul = |a: [[i128; 2]; 2], b: [[i128; 2]; 2]| {
        let mut c = [[0i128; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = red(a[i][0] * b[0][j] + a[i][1] * b[1][j]);
            }
        }
        c
    };
    let mut cur = base;
    let mut k = 1u64;
    let limit = arith::gl2_order(m);
    while cur != [[1, 0], [0, 1]] {
        cur = mul(cur, base);
        k += 1;
        assert!(k <= limit, "Frobenius matrix is not invertible modulo m");
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldTower;

    #[test]
    fn psi3_matches_closed_form() {
        let t = FieldTower::prime(101).unwrap();
        let e = Curve::from_u64(&t, 7, 11).unwrap();
        let g3 = division_polynomial(&t, &e, 3).unwrap();
        let want: Vec<u64> = vec![(101 - 49) % 101, 132 % 101, 42, 0, 3];
        let got: Vec<u64> = g3.coeffs.iter().map(|c| c.flat()[0]).collect();
        assert_eq!(got, want);
        assert_eq!(
            division_polynomial(&t, &e, 1).unwrap(),
            PolyRing::new(&t, 0).one()
        );
    }

    #[test]
    fn degrees() {
        let t = FieldTower::prime(1009).unwrap();
        let e = Curve::from_u64(&t, 3, 5).unwrap();
        for m in [3usize, 5, 7, 9, 11] {
            let g = division_polynomial(&t, &e, m).unwrap();
            assert_eq!(g.degree(), Some((m * m - 1) / 2), "m = {m}");
        }
        for m in [2usize, 4, 6, 8] {
            let g = division_polynomial(&t, &e, m).unwrap();
            assert_eq!(g.degree(), Some((m * m + 2) / 2), "m = {m}");
        }
    }

    #[test]
    fn ddf_blocks_multiply_back() {
        let raw = FpPolyRing::new(13);
        let f1 = raw.from_signed(&[2, 0, 1]); // irreducible
        let f2 = raw.from_signed(&[-1, 1]);
        let f3 = raw.from_signed(&[-2, 0, 0, 1]); // x^3 - 2
        let h = raw.mul(&raw.mul(&f1, &f2), &f3);
        let blocks = distinct_degree_blocks(&raw, &h);
        let prod = blocks
            .iter()
            .fold(vec![1u64], |acc, (_, b)| raw.mul(&acc, b));
        assert_eq!(prod, h);
        assert!(blocks.iter().all(|(d, b)| (b.len() - 1) % d == 0));
    }

    #[test]
    fn matrix_order_small() {
        // t = 0, q = 1 mod 3: the matrix squares to -I, so the order is 4.
        assert_eq!(frobenius_matrix_order(13, 0, 3), 4);
        assert_eq!(frobenius_matrix_order(1, 2, 5), 5);
    }
}
