//! Short Weierstrass curves y^2 = x^3 + a4 x + a6 over a level of a
//! [`FieldTower`].
//!
//! Curves and points carry no reference to their tower; every operation takes
//! the tower as its first argument.

mod divpoly;
mod torsion;
mod velu;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use rand::Rng;
use serde_json::{json, Value};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldTower};

pub use divpoly::{division_polynomial, frobenius_matrix_order, torsion_extension_degree};
pub use torsion::{sample_m_torsion, TorsionSampler};
pub use velu::Isogeny;

/// Largest field size accepted by the exhaustive point counter.
pub const MAX_COUNT_FIELD: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: FieldElement, y: FieldElement },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine { y, .. } => Some(y),
        }
    }
}

/// The curve y^2 = x^3 + a4 x + a6.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Curve {
    pub a4: FieldElement,
    pub a6: FieldElement,
}

/// Jacobian coordinates (X : Y : Z) standing for (X/Z^2, Y/Z^3).
#[derive(Clone)]
struct Jacobian {
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
}

/// Invariant separating F_q-isomorphism classes of curves over a prime
/// field: j together with the twist class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IsoClass {
    pub j: FieldElement,
    pub twist: FieldElement,
}

impl Curve {
    /// Rejects singular curves and coefficients at different levels.
    pub fn new(t: &FieldTower, a4: FieldElement, a6: FieldElement) -> Result<Self> {
        if a4.level() != a6.level() {
            return Err(Error::InvalidParameter(
                "curve coefficients at different levels".into(),
            ));
        }
        let c = Curve { a4, a6 };
        if c.discriminant_core(t).is_zero() {
            return Err(Error::InvalidParameter("singular curve".into()));
        }
        Ok(c)
    }

    pub fn from_u64(t: &FieldTower, a4: u64, a6: u64) -> Result<Self> {
        Curve::new(t, t.from_u64(0, a4), t.from_u64(0, a6))
    }

    pub fn level(&self) -> usize {
        self.a4.level()
    }

    /// 4 a4^3 + 27 a6^2.
    fn discriminant_core(&self, t: &FieldTower) -> FieldElement {
        let a3 = t.mul(&t.square(&self.a4), &self.a4);
        t.add(&t.scale(&a3, 4), &t.scale(&t.square(&self.a6), 27))
    }

    pub fn j_invariant(&self, t: &FieldTower) -> FieldElement {
        let a3 = t.mul(&t.square(&self.a4), &self.a4);
        let num = t.scale(&a3, 4 * 1728);
        t.div(&num, &self.discriminant_core(t))
            .expect("nonsingular curve")
    }

    pub fn base_change(&self, t: &FieldTower, level: usize) -> Curve {
        Curve {
            a4: t.embed(&self.a4, level),
            a6: t.embed(&self.a6, level),
        }
    }

    /// Right-hand side x^3 + a4 x + a6 at x.
    pub fn rhs(&self, t: &FieldTower, x: &FieldElement) -> FieldElement {
        let a4 = t.embed(&self.a4, x.level());
        let a6 = t.embed(&self.a6, x.level());
        let x2 = t.square(x);
        t.add(&t.mul(&t.add(&x2, &a4), x), &a6)
    }

    pub fn contains(&self, t: &FieldTower, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                x.level() == y.level() && x.level() >= self.level() && t.square(y) == self.rhs(t, x)
            }
        }
    }

    pub fn neg(&self, t: &FieldTower, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x: x.clone(),
                y: t.neg(y),
            },
        }
    }

    /// Chord-tangent addition.
    pub fn add(&self, t: &FieldTower, p: &Point, q: &Point) -> Point {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if y1 != y2 || y1.is_zero() {
                return Point::Infinity;
            }
            let a4 = t.embed(&self.a4, x1.level());
            let num = t.add(&t.scale(&t.square(x1), 3), &a4);
            t.div(&num, &t.scale(y1, 2)).unwrap()
        } else {
            t.div(&t.sub(y2, y1), &t.sub(x2, x1)).unwrap()
        };
        let x3 = t.sub(&t.sub(&t.square(&lambda), x1), x2);
        let y3 = t.sub(&t.mul(&lambda, &t.sub(x1, &x3)), y1);
        Point::Affine { x: x3, y: y3 }
    }

    pub fn sub(&self, t: &FieldTower, p: &Point, q: &Point) -> Point {
        self.add(t, p, &self.neg(t, q))
    }

    pub fn double(&self, t: &FieldTower, p: &Point) -> Point {
        self.add(t, p, p)
    }

    pub fn mul(&self, t: &FieldTower, n: i64, p: &Point) -> Point {
        let q = self.mul_big(t, &BigUint::from(n.unsigned_abs()), p);
        if n < 0 {
            self.neg(t, &q)
        } else {
            q
        }
    }

    pub fn mul_signed(&self, t: &FieldTower, n: &BigInt, p: &Point) -> Point {
        let q = self.mul_big(t, n.magnitude(), p);
        if n.sign() == Sign::Minus {
            self.neg(t, &q)
        } else {
            q
        }
    }

    /// [n]P by left-to-right double-and-add in Jacobian coordinates.
    pub fn mul_big(&self, t: &FieldTower, n: &BigUint, p: &Point) -> Point {
        let (px, py) = match p {
            Point::Infinity => return Point::Infinity,
            Point::Affine { x, y } => (x, y),
        };
        if n.is_zero() {
            return Point::Infinity;
        }
        let level = px.level();
        let a4 = t.embed(&self.a4, level);
        let mut acc: Option<Jacobian> = None;
        for i in (0..n.bits()).rev() {
            acc = acc.and_then(|j| jacobian_double(t, &a4, &j));
            if n.bit(i) {
                acc = match acc {
                    None => Some(Jacobian {
                        x: px.clone(),
                        y: py.clone(),
                        z: t.one(level),
                    }),
                    Some(j) => jacobian_add_affine(t, &a4, &j, px, py),
                };
            }
        }
        match acc {
            None => Point::Infinity,
            Some(j) => {
                let zi = t.inv(&j.z).expect("nonzero Z");
                let zi2 = t.square(&zi);
                Point::Affine {
                    x: t.mul(&j.x, &zi2),
                    y: t.mul(&j.y, &t.mul(&zi2, &zi)),
                }
            }
        }
    }

    /// Uniformly random affine point at `level`.
    pub fn random_point<R: Rng + ?Sized>(
        &self,
        t: &FieldTower,
        level: usize,
        rng: &mut R,
    ) -> Point {
        loop {
            let x = t.random(level, rng);
            let rhs = self.rhs(t, &x);
            if let Some(y) = t.sqrt(&rhs, rng) {
                // x-coordinates with y = 0 carry one point instead of two.
                if y.is_zero() {
                    if rng.gen::<bool>() {
                        return Point::Affine { x, y };
                    }
                    continue;
                }
                let y = if rng.gen::<bool>() { y } else { t.neg(&y) };
                return Point::Affine { x, y };
            }
        }
    }

    /// The q-power Frobenius, where q is the size of the curve's field.
    pub fn frobenius(&self, t: &FieldTower, p: &Point) -> Point {
        let k = t.degree(self.level());
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x: t.frobenius(x, k),
                y: t.frobenius(y, k),
            },
        }
    }

    /// Number of points over the curve's own field, by summing quadratic
    /// characters. Only prime fields up to [`MAX_COUNT_FIELD`].
    pub fn count_points(&self, t: &FieldTower) -> Result<u64> {
        if self.level() != 0 {
            return Err(Error::InvalidParameter(
                "point counting is only implemented over the prime field".into(),
            ));
        }
        let q = t.p();
        if q > MAX_COUNT_FIELD {
            return Err(Error::InvalidParameter(format!(
                "field size {q} exceeds the counting bound {MAX_COUNT_FIELD}"
            )));
        }
        let mut is_square = vec![false; q as usize];
        for y in 1..q.div_ceil(2) {
            is_square[arith::mul_mod(y, y, q) as usize] = true;
        }
        let a = self.a4.flat()[0];
        let b = self.a6.flat()[0];
        let mut n = 1u64;
        for x in 0..q {
            let v = (arith::mul_mod(arith::add_mod(arith::mul_mod(x, x, q), a, q), x, q) + b) % q;
            if v == 0 {
                n += 1;
            } else if is_square[v as usize] {
                n += 2;
            }
        }
        Ok(n)
    }

    /// Frobenius trace q + 1 - #E(F_q).
    pub fn trace(&self, t: &FieldTower) -> Result<i64> {
        Ok(t.p() as i64 + 1 - self.count_points(t)? as i64)
    }

    /// F_q-isomorphism invariant for curves over a prime field.
    pub fn iso_class(&self, t: &FieldTower) -> IsoClass {
        assert_eq!(self.level(), 0, "isomorphism classes are taken over F_p");
        let q = t.p();
        let j = self.j_invariant(t);
        let (a, b) = (self.a4.flat()[0], self.a6.flat()[0]);
        // a' = u^4 a, b' = u^6 b. The twist class is the image of the
        // relevant quantity modulo the corresponding power subgroup.
        let twist = if a != 0 && b != 0 {
            let ratio = arith::mul_mod(b, arith::inv_mod(a, q).unwrap(), q);
            arith::pow_mod(ratio, (q - 1) / 2, q)
        } else if a == 0 {
            arith::pow_mod(b, (q - 1) / arith::gcd(6, q - 1), q)
        } else {
            arith::pow_mod(a, (q - 1) / arith::gcd(4, q - 1), q)
        };
        IsoClass {
            j,
            twist: t.from_u64(0, twist),
        }
    }

    pub fn is_isomorphic(&self, t: &FieldTower, other: &Curve) -> bool {
        self.iso_class(t) == other.iso_class(t)
    }

    /// Quadratic twist by a non-square d: (d^2 a4, d^3 a6).
    pub fn quadratic_twist(&self, t: &FieldTower, d: &FieldElement) -> Curve {
        let d2 = t.square(d);
        Curve {
            a4: t.mul(&self.a4, &d2),
            a6: t.mul(&self.a6, &t.mul(&d2, d)),
        }
    }

    pub fn to_json(&self, t: &FieldTower) -> Value {
        json!({
            "p": t.p().to_string(),
            "tower": t.to_json(),
            "a4": t.element_to_json(&self.a4),
            "a6": t.element_to_json(&self.a6),
        })
    }

    pub fn from_json(v: &Value) -> Result<(FieldTower, Curve)> {
        let tower = FieldTower::from_json(
            v.get("tower")
                .ok_or_else(|| Error::Format("curve lacks \"tower\"".into()))?,
        )?;
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Format(format!("curve lacks \"{k}\"")))
        };
        let level = level_of_json(field("a4")?);
        let a4 = tower.element_from_json(level, field("a4")?)?;
        let a6 = tower.element_from_json(level, field("a6")?)?;
        let curve = Curve::new(&tower, a4, a6)?;
        Ok((tower, curve))
    }

    pub fn point_to_json(t: &FieldTower, p: &Point) -> Value {
        match p {
            Point::Infinity => Value::String("infinity".into()),
            Point::Affine { x, y } => json!({
                "x": t.element_to_json(x),
                "y": t.element_to_json(y),
            }),
        }
    }

    pub fn point_from_json(&self, t: &FieldTower, v: &Value) -> Result<Point> {
        if v.as_str() == Some("infinity") {
            return Ok(Point::Infinity);
        }
        let (Some(xv), Some(yv)) = (v.get("x"), v.get("y")) else {
            return Err(Error::Format("point needs \"x\" and \"y\"".into()));
        };
        let level = level_of_json(xv);
        let p = Point::Affine {
            x: t.element_from_json(level, xv)?,
            y: t.element_from_json(level, yv)?,
        };
        if !self.contains(t, &p) {
            return Err(Error::Format("point is not on the curve".into()));
        }
        Ok(p)
    }
}

fn level_of_json(v: &Value) -> usize {
    match v {
        Value::Array(a) => 1 + a.first().map_or(0, level_of_json),
        _ => 0,
    }
}

fn jacobian_double(t: &FieldTower, a4: &FieldElement, p: &Jacobian) -> Option<Jacobian> {
    if p.y.is_zero() {
        return None;
    }
    let xx = t.square(&p.x);
    let yy = t.square(&p.y);
    let yyyy = t.square(&yy);
    let zz = t.square(&p.z);
    let s = t.scale(&t.mul(&p.x, &yy), 4);
    let m = t.add(&t.scale(&xx, 3), &t.mul(a4, &t.square(&zz)));
    let x3 = t.sub(&t.square(&m), &t.scale(&s, 2));
    let y3 = t.sub(&t.mul(&m, &t.sub(&s, &x3)), &t.scale(&yyyy, 8));
    let z3 = t.scale(&t.mul(&p.y, &p.z), 2);
    Some(Jacobian {
        x: x3,
        y: y3,
        z: z3,
    })
}

fn jacobian_add_affine(
    t: &FieldTower,
    a4: &FieldElement,
    p: &Jacobian,
    x2: &FieldElement,
    y2: &FieldElement,
) -> Option<Jacobian> {
    let z1z1 = t.square(&p.z);
    let u2 = t.mul(x2, &z1z1);
    let s2 = t.mul(y2, &t.mul(&p.z, &z1z1));
    let h = t.sub(&u2, &p.x);
    let r = t.sub(&s2, &p.y);
    if h.is_zero() {
        if r.is_zero() {
            return jacobian_double(t, a4, p);
        }
        return None;
    }
    let hh = t.square(&h);
    let hhh = t.mul(&h, &hh);
    let v = t.mul(&p.x, &hh);
    let x3 = t.sub(&t.sub(&t.square(&r), &hhh), &t.scale(&v, 2));
    let y3 = t.sub(&t.mul(&r, &t.sub(&v, &x3)), &t.mul(&p.y, &hhh));
    let z3 = t.mul(&p.z, &h);
    Some(Jacobian {
        x: x3,
        y: y3,
        z: z3,
    })
}

/// Traces of the q^r-power Frobenius, from t_0 = 2, t_1 = t.
pub fn extension_trace(q: u64, t: i64, r: usize) -> BigInt {
    let (qb, tb) = (BigInt::from(q), BigInt::from(t));
    let (mut prev, mut cur) = (BigInt::from(2), tb.clone());
    if r == 0 {
        return prev;
    }
    for _ in 1..r {
        let next = &tb * &cur - &qb * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// #E(F_{q^r}) = q^r + 1 - t_r.
pub fn group_order_over(q: u64, t: i64, r: usize) -> BigUint {
    let n: BigInt = BigInt::from(arith::big_pow(q, r as u64)) + 1 - extension_trace(q, t, r);
    n.to_biguint()
        .expect("Hasse bound keeps the order positive")
}
