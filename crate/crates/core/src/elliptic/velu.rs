//! Odd prime degree isogenies from kernel polynomials (Vélu, in Kohel's
//! kernel-polynomial form).

use serde_json::{json, Value};

use super::{divpoly::cubic, Curve, Point};
use crate::arith;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldTower, Poly, PolyRing};

/// Normalized separable isogeny of odd prime degree.
///
/// The coordinate maps are x -> N(x)/h(x)^2 and y -> y (N'h - 2Nh')/h^3,
/// where h is the kernel polynomial.
#[derive(Clone, Debug)]
pub struct Isogeny {
    pub domain: Curve,
    pub codomain: Curve,
    pub kernel_poly: Poly,
    pub degree: u64,
    x_num: Poly,
    y_num: Poly,
}

impl Isogeny {
    /// Isogeny with kernel generated by `k`, which may live above the
    /// curve's level as long as <k> is stable under Frobenius.
    pub fn from_kernel_point(t: &FieldTower, e: &Curve, k: &Point, ell: u64) -> Result<Isogeny> {
        if ell < 3 || ell % 2 == 0 || !arith::is_prime(ell) {
            return Err(Error::InvalidParameter(format!(
                "kernel order must be an odd prime, got {ell}"
            )));
        }
        let Point::Affine { x, .. } = k else {
            return Err(Error::InvalidParameter(
                "kernel generator is the identity".into(),
            ));
        };
        let level = x.level();
        let ek = e.base_change(t, level);
        if !ek.mul(t, ell as i64, k).is_infinity() {
            return Err(Error::InvalidParameter(format!(
                "kernel generator does not have order {ell}"
            )));
        }
        let ring = PolyRing::new(t, level);
        let mut h = ring.one();
        let mut cur = k.clone();
        for _ in 0..(ell - 1) / 2 {
            let xi = cur.x().expect("multiples below the order are affine");
            h = ring.mul(&h, &ring.linear(xi));
            cur = ek.add(t, &cur, k);
        }
        let base = e.level();
        let coeffs = h
            .coeffs
            .iter()
            .map(|c| t.descend(c, base))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                Error::InvalidParameter(
                    "kernel is not Frobenius-stable, so the codomain is not rational".into(),
                )
            })?;
        Isogeny::from_kernel_polynomial(t, e, Poly::new(base, coeffs), ell)
    }

    /// Isogeny from a monic kernel polynomial of degree (ell - 1)/2.
    pub fn from_kernel_polynomial(t: &FieldTower, e: &Curve, h: Poly, ell: u64) -> Result<Isogeny> {
        let d = (ell as usize - 1) / 2;
        if h.degree() != Some(d) || !t.is_one(h.leading().unwrap()) {
            return Err(Error::InvalidParameter(format!(
                "kernel polynomial must be monic of degree {d}"
            )));
        }
        let level = e.level();
        let ring = PolyRing::new(t, level);
        let coeff = |i: isize| {
            if i < 0 {
                t.zero(level)
            } else {
                h.coeffs[i as usize].clone()
            }
        };
        let di = d as isize;
        // Elementary symmetric functions of the roots.
        let s1 = t.neg(&coeff(di - 1));
        let s2 = coeff(di - 2);
        let s3 = t.neg(&coeff(di - 3));
        let p1 = s1.clone();
        let p2 = t.sub(&t.square(&s1), &t.scale(&s2, 2));
        let p3 = t.add(
            &t.sub(&t.mul(&t.square(&s1), &s1), &t.scale(&t.mul(&s1, &s2), 3)),
            &t.scale(&s3, 3),
        );
        let (a, b) = (&e.a4, &e.a6);
        let dd = d as u64;
        let v = t.add(&t.scale(&p2, 6), &t.scale(a, 2 * dd));
        let w = t.add(
            &t.add(&t.scale(&p3, 10), &t.scale(&t.mul(a, &p1), 6)),
            &t.scale(b, 4 * dd),
        );
        let codomain = Curve::new(t, t.sub(a, &t.scale(&v, 5)), t.sub(b, &t.scale(&w, 7)))?;

        let f = cubic(t, e);
        let f1 = ring.derivative(&f);
        let h1 = ring.derivative(&h);
        let h2 = ring.derivative(&h1);
        let hh = ring.mul(&h, &h);
        let lin = Poly::new(level, vec![t.neg(&t.scale(&s1, 2)), t.from_u64(level, ell)]);
        let two = t.from_u64(level, 2);
        let four = t.from_u64(level, 4);
        let x_num = ring.add(
            &ring.sub(
                &ring.mul(&lin, &hh),
                &ring.scale(&ring.mul(&f1, &ring.mul(&h1, &h)), &two),
            ),
            &ring.scale(
                &ring.mul(&f, &ring.sub(&ring.mul(&h1, &h1), &ring.mul(&h, &h2))),
                &four,
            ),
        );
        let y_num = ring.sub(
            &ring.mul(&ring.derivative(&x_num), &h),
            &ring.scale(&ring.mul(&x_num, &h1), &two),
        );
        Ok(Isogeny {
            domain: e.clone(),
            codomain,
            kernel_poly: h,
            degree: ell,
            x_num,
            y_num,
        })
    }

    /// Image of a point at any level at or above the domain's.
    pub fn eval(&self, t: &FieldTower, p: &Point) -> Point {
        let Point::Affine { x, y } = p else {
            return Point::Infinity;
        };
        let ring = PolyRing::new(t, self.domain.level());
        let hx = ring.eval(&self.kernel_poly, x);
        if hx.is_zero() {
            return Point::Infinity;
        }
        let hinv = t.inv(&hx).unwrap();
        let hinv2 = t.square(&hinv);
        let xn = ring.eval(&self.x_num, x);
        let yn = ring.eval(&self.y_num, x);
        let x_img: FieldElement = t.mul(&xn, &hinv2);
        let y_img = t.mul(y, &t.mul(&yn, &t.mul(&hinv2, &hinv)));
        Point::Affine { x: x_img, y: y_img }
    }

    pub fn to_json(&self, t: &FieldTower) -> Value {
        json!({
            "domain": self.domain.to_json(t),
            "kernel": self
                .kernel_poly
                .coeffs
                .iter()
                .map(|c| t.element_to_json(c))
                .collect::<Vec<_>>(),
            "degree": self.degree.to_string(),
        })
    }
}
