//! The Weil pairing e_m by Miller's algorithm.
//!
//! With div f_{m,P} = m(P) - m(O) and a random auxiliary point R,
//!
//! e_m(P, Q) = [f_{m,P}(Q + R) / f_{m,P}(R)] / [f_{m,Q}(P - R) / f_{m,Q}(-R)].
//!
//! This is the divisor-based definition with D_P = (P + S) - (S) and
//! D_Q = (Q + T) - (T), translated so that only R = T - S appears.

use rand::Rng;

use crate::elliptic::{Curve, Point};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldTower};

const RETRY_BOUND: usize = 32;

/// A pairing value in mu_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingValue {
    pub value: FieldElement,
    pub modulus: u64,
}

impl PairingValue {
    pub fn is_one(&self, t: &FieldTower) -> bool {
        t.is_one(&self.value)
    }

    /// Multiplicative order, a divisor of the modulus.
    pub fn order(&self, t: &FieldTower) -> u64 {
        t.element_order(&self.value, self.modulus)
            .expect("pairing values lie in mu_m")
    }
}

/// Numerator and denominator of a product of line quotients.
#[derive(Clone)]
struct Fraction {
    num: FieldElement,
    den: FieldElement,
}

/// Value of l_{A,B}(X): the line through A and B (tangent if equal), or the
/// vertical line at A when B = -A.
fn line(
    t: &FieldTower,
    e: &Curve,
    a: (&FieldElement, &FieldElement),
    b: (&FieldElement, &FieldElement),
    x: (&FieldElement, &FieldElement),
) -> FieldElement {
    let (xa, ya) = a;
    let (xb, yb) = b;
    let dx = t.sub(x.0, xa);
    if xa == xb && (ya != yb || ya.is_zero()) {
        return dx;
    }
    let lambda = if xa == xb {
        let a4 = t.embed(&e.a4, xa.level());
        t.div(&t.add(&t.scale(&t.square(xa), 3), &a4), &t.scale(ya, 2))
            .unwrap()
    } else {
        t.div(&t.sub(yb, ya), &t.sub(xb, xa)).unwrap()
    };
    t.sub(&t.sub(x.1, ya), &t.mul(&lambda, &dx))
}

/// f_{m,P} at each evaluation point, or `None` when some evaluation point
/// meets a zero or pole of an intermediate line. Uses f_{m,P} = f_{d,P}^{m/d}
/// for d = ord(P).
fn miller_loop(
    t: &FieldTower,
    e: &Curve,
    p: &Point,
    m: u64,
    at: &[(FieldElement, FieldElement)],
) -> Option<Vec<FieldElement>> {
    let d = crate::arith::divisors(m)
        .into_iter()
        .find(|&d| e.mul(t, d as i64, p).is_infinity())
        .unwrap_or(m);
    let vals = miller_loop_exact(t, e, p, d, at)?;
    Some(vals.iter().map(|v| t.pow_u64(v, m / d)).collect())
}

fn miller_loop_exact(
    t: &FieldTower,
    e: &Curve,
    p: &Point,
    m: u64,
    at: &[(FieldElement, FieldElement)],
) -> Option<Vec<FieldElement>> {
    let Point::Affine { x: px, .. } = p else {
        return Some(vec![t.one(0); at.len()]);
    };
    let level = px.level();
    let mut acc: Vec<Fraction> = at
        .iter()
        .map(|_| Fraction {
            num: t.one(level),
            den: t.one(level),
        })
        .collect();
    let mut cur = p.clone();
    let bits = 64 - m.leading_zeros();
    // Multiply by l_{A,B} / v_{A+B} evaluated at every point.
    let step = |acc: &mut Vec<Fraction>, a: &Point, b: &Point| -> Option<Point> {
        let (Point::Affine { x: xa, y: ya }, Point::Affine { x: xb, y: yb }) = (a, b) else {
            unreachable!("Miller steps never involve the identity");
        };
        let sum = e.add(t, a, b);
        for (f, pt) in acc.iter_mut().zip(at.iter()) {
            let l = line(t, e, (xa, ya), (xb, yb), (&pt.0, &pt.1));
            let v = match &sum {
                Point::Infinity => t.one(level),
                Point::Affine { x, .. } => t.sub(&pt.0, x),
            };
            if l.is_zero() || v.is_zero() {
                return None;
            }
            f.num = t.mul(&f.num, &l);
            f.den = t.mul(&f.den, &v);
        }
        Some(sum)
    };
    for i in (0..bits - 1).rev() {
        for f in acc.iter_mut() {
            f.num = t.square(&f.num);
            f.den = t.square(&f.den);
        }
        if cur.is_infinity() {
            return None;
        }
        cur = step(&mut acc, &cur.clone(), &cur)?;
        if (m >> i) & 1 == 1 {
            if cur.is_infinity() {
                return None;
            }
            cur = step(&mut acc, &cur.clone(), p)?;
        }
    }
    debug_assert!(cur.is_infinity() || m == 1);
    acc.into_iter()
        .map(|f| t.div(&f.num, &f.den))
        .collect::<Option<Vec<_>>>()
}

fn affine(p: &Point) -> Option<(FieldElement, FieldElement)> {
    match p {
        Point::Infinity => None,
        Point::Affine { x, y } => Some((x.clone(), y.clone())),
    }
}

fn check_torsion(t: &FieldTower, e: &Curve, p: &Point, m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    if !e.mul(t, m as i64, p).is_infinity() {
        return Err(Error::InvalidParameter(format!("point is not {m}-torsion")));
    }
    Ok(())
}

fn level_of(p: &Point, q: &Point) -> Option<usize> {
    p.x().or(q.x()).map(FieldElement::level)
}

/// f_{m,P}(Q + R) / f_{m,P}(R) for a random R: the Miller function at a
/// divisor linearly equivalent to (Q) - (O).
pub fn miller_function<R: Rng + ?Sized>(
    t: &FieldTower,
    e: &Curve,
    p: &Point,
    m: u64,
    q: &Point,
    rng: &mut R,
) -> Result<FieldElement> {
    check_torsion(t, e, p, m)?;
    let Some(level) = level_of(p, q) else {
        return Ok(t.one(0));
    };
    let el = e.base_change(t, level);
    for _ in 0..RETRY_BOUND {
        let r = el.random_point(t, level, rng);
        let (Some(a), Some(b)) = (affine(&el.add(t, q, &r)), affine(&r)) else {
            continue;
        };
        if let Some(v) = miller_loop(t, &el, p, m, &[a, b]) {
            if let Some(out) = t.div(&v[0], &v[1]) {
                return Ok(out);
            }
        }
    }
    Err(Error::Arithmetic(
        "Miller evaluation kept hitting the divisor support".into(),
    ))
}

/// e_m(P, Q) for P, Q in E[m] with coordinates in a common level.
pub fn weil_pairing<R: Rng + ?Sized>(
    t: &FieldTower,
    e: &Curve,
    p: &Point,
    q: &Point,
    m: u64,
    rng: &mut R,
) -> Result<PairingValue> {
    let Some(level) = level_of(p, q) else {
        return Ok(PairingValue {
            value: t.one(e.level()),
            modulus: m,
        });
    };
    let el = e.base_change(t, level);
    check_torsion(t, &el, p, m)?;
    check_torsion(t, &el, q, m)?;
    if p.is_infinity() || q.is_infinity() {
        return Ok(PairingValue {
            value: t.one(level),
            modulus: m,
        });
    }
    for _ in 0..RETRY_BOUND {
        let r = el.random_point(t, level, rng);
        let neg_r = el.neg(t, &r);
        let pts_p = [affine(&el.add(t, q, &r)), affine(&r)];
        let pts_q = [affine(&el.sub(t, p, &r)), affine(&neg_r)];
        let (Some(a1), Some(a2)) = (pts_p[0].clone(), pts_p[1].clone()) else {
            continue;
        };
        let (Some(b1), Some(b2)) = (pts_q[0].clone(), pts_q[1].clone()) else {
            continue;
        };
        let Some(fp) = miller_loop(t, &el, p, m, &[a1, a2]) else {
            continue;
        };
        let Some(fq) = miller_loop(t, &el, q, m, &[b1, b2]) else {
            continue;
        };
        let num = t.mul(&fp[0], &fq[1]);
        let den = t.mul(&fp[1], &fq[0]);
        if let Some(value) = t.div(&num, &den) {
            if value.is_zero() {
                continue;
            }
            return Ok(PairingValue { value, modulus: m });
        }
    }
    Err(Error::Arithmetic(
        "Weil pairing evaluation kept hitting the divisor support".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{group_order_over, torsion_extension_degree, TorsionSampler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        tower: FieldTower,
        curve: Curve,
        level: usize,
        sampler: TorsionSampler,
    }

    fn setup(p: u64, a: u64, b: u64, m: u64, rng: &mut ChaCha8Rng) -> Setup {
        let t = FieldTower::prime(p).unwrap();
        let e = Curve::from_u64(&t, a, b).unwrap();
        let r = torsion_extension_degree(&t, &e, m as usize).unwrap();
        let tower = t.make_extension(r).unwrap();
        let level = tower.top();
        let n = group_order_over(p, e.trace(&t).unwrap(), r);
        let sampler = TorsionSampler::new(&tower, &e, level, m, &n, rng).unwrap();
        Setup {
            curve: e.base_change(&tower, level),
            tower,
            level,
            sampler,
        }
    }

    /// f_{3,P} is the tangent line at P, since 2P = -P.
    fn tangent_quotient(
        t: &FieldTower,
        e: &Curve,
        p: &Point,
        x1: &Point,
        x2: &Point,
    ) -> FieldElement {
        let (Point::Affine { x, y }, Point::Affine { x: a, y: b }, Point::Affine { x: c, y: d }) =
            (p, x1, x2)
        else {
            panic!("affine points expected");
        };
        let l1 = line(t, e, (x, y), (x, y), (a, b));
        let l2 = line(t, e, (x, y), (x, y), (c, d));
        t.div(&l1, &l2).unwrap()
    }

    #[test]
    fn miller_for_three_is_the_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = setup(101, 1, 1, 3, &mut rng);
        let (t, e) = (&s.tower, &s.curve);
        for _ in 0..10 {
            let p = s.sampler.sample_exact(t, &mut rng).unwrap();
            let q = s.sampler.sample_exact(t, &mut rng).unwrap();
            let r = e.random_point(t, s.level, &mut rng);
            let qr = e.add(t, &q, &r);
            let direct = t
                .div(
                    &miller_loop(t, e, &p, 3, &[affine(&qr).unwrap()]).unwrap()[0],
                    &miller_loop(t, e, &p, 3, &[affine(&r).unwrap()]).unwrap()[0],
                )
                .unwrap();
            assert_eq!(direct, tangent_quotient(t, e, &p, &qr, &r));
        }
        let p = s.sampler.sample_exact(t, &mut rng).unwrap();
        assert!(miller_function(t, e, &p, 1, &p, &mut rng).is_err());
        let one = miller_loop(t, e, &e.mul(t, 0, &p), 1, &[affine(&p).unwrap()]).unwrap();
        assert!(t.is_one(&one[0]));
    }

    #[test]
    fn full_three_torsion_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = setup(103, 2, 3, 3, &mut rng);
        let (t, e) = (&s.tower, &s.curve);
        let mut pts: Vec<Point> = Vec::new();
        while pts.len() < 9 {
            let p = s.sampler.sample(t, &mut rng).unwrap();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        for p in &pts {
            for q in &pts {
                let w = weil_pairing(t, e, p, q, 3, &mut rng).unwrap();
                let naive = if p.is_infinity() || q.is_infinity() {
                    t.one(s.level)
                } else if p == q || *p == e.neg(t, q) {
                    t.one(s.level)
                } else {
                    let r = e.random_point(t, s.level, &mut rng);
                    let num = tangent_quotient(t, e, p, &e.add(t, q, &r), &r);
                    let den = tangent_quotient(t, e, q, &e.sub(t, p, &r), &e.neg(t, &r));
                    t.div(&num, &den).unwrap()
                };
                assert_eq!(w.value, naive);
                let independent =
                    !p.is_infinity() && !q.is_infinity() && p != q && *p != e.neg(t, q);
                assert_eq!(w.order(t) == 3, independent);
            }
        }
    }

    #[test]
    fn bilinear_and_alternating() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, a, b, m) in [(101u64, 1u64, 1u64, 5u64), (13, 1, 1, 4), (29, 2, 5, 8)] {
            let s = setup(p, a, b, m, &mut rng);
            let (t, e) = (&s.tower, &s.curve);
            for _ in 0..5 {
                let x = s.sampler.sample(t, &mut rng).unwrap();
                let y = s.sampler.sample(t, &mut rng).unwrap();
                let (i, j) = (rng.gen_range(0..m as i64), rng.gen_range(0..m as i64));
                let base = weil_pairing(t, e, &x, &y, m, &mut rng).unwrap().value;
                let lhs =
                    weil_pairing(t, e, &e.mul(t, i, &x), &e.mul(t, j, &y), m, &mut rng).unwrap();
                assert_eq!(lhs.value, t.pow_u64(&base, (i * j) as u64));
                assert!(weil_pairing(t, e, &x, &x, m, &mut rng).unwrap().is_one(t));
                let yx = weil_pairing(t, e, &y, &x, m, &mut rng).unwrap().value;
                assert!(t.is_one(&t.mul(&base, &yx)));
            }
        }
    }

    #[test]
    fn rejects_non_torsion() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = setup(101, 1, 1, 3, &mut rng);
        let t = &s.tower;
        let x = s.curve.random_point(t, s.level, &mut rng);
        let y = s.sampler.sample_exact(t, &mut rng).unwrap();
        if !s.curve.mul(t, 3, &x).is_infinity() {
            assert!(weil_pairing(t, &s.curve, &x, &y, 3, &mut rng).is_err());
        }
    }
}
