//! Oriented curves over prime fields, oriented by Frobenius, and the action
//! of cl(Z[sigma]) on them through Vélu isogenies.

mod ideal;

use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith;
use crate::elliptic::{group_order_over, Curve, Isogeny, Point};
use crate::error::{Error, Result};
use crate::field::{prime_extension, FieldTower};
use crate::quadform::{
    assigned_characters, char_eval_class, parse_int, relation_exponents, Character, ClassGroup,
    Discriminant,
};

pub use ideal::{ClassAction, PrimeStep, SmoothIdeal, SMOOTHNESS_BOUND};

/// Largest p accepted by the supersingular instance search.
pub const MAX_SUPERSINGULAR_P: u64 = 10_000;

/// A curve over F_q with sigma = pi_q + shift.
#[derive(Clone, Debug)]
pub struct OrientedCurve {
    pub tower: Arc<FieldTower>,
    pub curve: Curve,
    /// Trace of pi_q.
    pub frobenius_trace: i64,
    pub shift: i64,
    pub disc: Discriminant,
}

impl OrientedCurve {
    /// The curve oriented by sigma = pi_q + shift. The trace is computed by
    /// point counting.
    pub fn new(tower: Arc<FieldTower>, curve: Curve, shift: i64) -> Result<Self> {
        let t = curve.trace(&tower)?;
        let q = tower.p() as i64;
        let d = 4 * q - t * t;
        Ok(OrientedCurve {
            disc: Discriminant::new(d as u64)?,
            tower,
            curve,
            frobenius_trace: t,
            shift,
        })
    }

    pub fn q(&self) -> u64 {
        self.tower.p()
    }

    pub fn sigma_trace(&self) -> i64 {
        self.frobenius_trace + 2 * self.shift
    }

    pub fn sigma_norm(&self) -> i64 {
        let s = self.shift;
        self.q() as i64 + s * self.frobenius_trace + s * s
    }

    pub fn is_supersingular(&self) -> bool {
        self.frobenius_trace % self.q() as i64 == 0
    }

    /// Same orientation data on another curve of the isogeny class.
    pub fn with_curve(&self, curve: Curve) -> Self {
        OrientedCurve {
            curve,
            ..self.clone()
        }
    }

    /// Same curve with sigma replaced by sigma + k.
    pub fn shifted(&self, k: i64) -> Self {
        OrientedCurve {
            shift: self.shift + k,
            ..self.clone()
        }
    }

    /// F_q-isomorphism of the underlying curves.
    pub fn is_isomorphic(&self, other: &OrientedCurve) -> bool {
        self.q() == other.q() && self.curve.is_isomorphic(&self.tower, &other.curve)
    }

    /// sigma(P) = pi_q(P) + [shift]P for P at any level of `t`.
    pub fn sigma(&self, t: &FieldTower, p: &Point) -> Point {
        let level = p.x().map_or(0, |x| x.level());
        let e = self.curve.base_change(t, level);
        let frob = self.curve.frobenius(t, p);
        e.add(t, &frob, &e.mul(t, self.shift, p))
    }

    pub fn to_json(&self) -> Value {
        let kind = if self.shift == 0 {
            "frobenius"
        } else {
            "frobenius_shift"
        };
        json!({
            "p": self.q().to_string(),
            "curve": self.curve.to_json(&self.tower),
            "sigma": {"kind": kind, "k": self.shift.to_string()},
            "trace": self.sigma_trace().to_string(),
            "norm": self.sigma_norm().to_string(),
            "D": self.disc.value().to_string(),
            "factors": self.disc.to_json()["factors"].clone(),
        })
    }

    /// Reads an instance and checks the recorded trace, norm and D against
    /// a fresh point count.
    pub fn from_json(v: &Value) -> Result<Self> {
        let (tower, curve) = Curve::from_json(&v["curve"])?;
        let shift = match v.get("sigma") {
            None => 0,
            Some(s) => match s.get("k") {
                None => 0,
                Some(k) => parse_int(k)?,
            },
        };
        let oc = OrientedCurve::new(Arc::new(tower), curve, shift)?;
        if let Some(p) = v.get("p") {
            if parse_int(p)? as u64 != oc.q() {
                return Err(Error::Format("\"p\" disagrees with the curve".into()));
            }
        }
        for (key, want) in [
            ("trace", oc.sigma_trace()),
            ("norm", oc.sigma_norm()),
            ("D", oc.disc.value() as i64),
        ] {
            if let Some(x) = v.get(key) {
                if parse_int(x)? != want {
                    return Err(Error::Format(format!(
                        "\"{key}\" disagrees with the curve (expected {want})"
                    )));
                }
            }
        }
        Ok(oc)
    }
}

/// A supersingular curve over F_p oriented by Z[sqrt(-p)], p = 1 mod 4.
pub fn gen_supersingular_instance(p: u64) -> Result<OrientedCurve> {
    if !arith::is_prime(p) || p < 5 {
        return Err(Error::InvalidParameter(format!("{p} is not a prime >= 5")));
    }
    if p % 4 != 1 {
        return Err(Error::Infeasible(format!(
            "p = {p} is 3 mod 4: delta is not assigned and chi_p is trivial"
        )));
    }
    if p > MAX_SUPERSINGULAR_P {
        return Err(Error::Infeasible(format!(
            "p = {p} exceeds the search bound {MAX_SUPERSINGULAR_P}"
        )));
    }
    let tower = Arc::new(FieldTower::prime(p)?);
    let order = BigUint::from(p + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    for a4 in 0..p {
        for a6 in 0..p {
            let Ok(e) = Curve::from_u64(&tower, a4, a6) else {
                continue;
            };
            let killed = (0..3).all(|_| {
                let pt = e.random_point(&tower, 0, &mut rng);
                e.mul_big(&tower, &order, &pt).is_infinity()
            });
            if killed && e.trace(&tower)? == 0 {
                return OrientedCurve::new(tower, e, 0);
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no supersingular curve found over F_{p}"
    )))
}

/// Constraints for [`gen_ordinary_instance`].
#[derive(Clone, Debug)]
pub struct OrdinaryQuery {
    pub q_min: u64,
    pub q_max: u64,
    /// Characters that must be assigned, have modulus coprime to q, and be
    /// nontrivial on cl(O). When empty, some chi_m with m <= `m_max` is
    /// required.
    pub required: Vec<Character>,
    pub m_max: u64,
    /// Bound on the degree of the field of definition of E[m] for each
    /// required character.
    pub max_extension: Option<u64>,
    /// Required rank of cl(O)[2]. When set and `required` is empty, no
    /// character is demanded.
    pub two_rank: Option<u32>,
    /// Every odd prime factor of D up to this bound must satisfy
    /// `max_extension`.
    pub cheap_primes_up_to: Option<u64>,
    /// Number of random curves to try.
    pub budget: usize,
}

impl Default for OrdinaryQuery {
    fn default() -> Self {
        OrdinaryQuery {
            q_min: 101,
            q_max: 10_000,
            required: Vec::new(),
            m_max: 50,
            max_extension: None,
            two_rank: None,
            cheap_primes_up_to: None,
            budget: 20_000,
        }
    }
}

/// Random search for an ordinary curve whose Frobenius order Z[pi] is
/// maximal and admits the requested characters.
pub fn gen_ordinary_instance<R: Rng + ?Sized>(
    query: &OrdinaryQuery,
    rng: &mut R,
) -> Result<OrientedCurve> {
    let lo = query.q_min.max(5);
    let hi = query.q_max.min(crate::elliptic::MAX_COUNT_FIELD);
    if lo > hi {
        return Err(Error::Infeasible(format!("empty field range [{lo}, {hi}]")));
    }
    let mut largest = 0u64;
    let mut towers: std::collections::HashMap<u64, Arc<FieldTower>> = Default::default();
    for _ in 0..query.budget {
        let q = rng.gen_range(lo..=hi);
        if !arith::is_prime(q) {
            continue;
        }
        let tower = towers
            .entry(q)
            .or_insert_with(|| Arc::new(FieldTower::prime(q).unwrap()))
            .clone();
        let Ok(e) = Curve::from_u64(&tower, rng.gen_range(0..q), rng.gen_range(0..q)) else {
            continue;
        };
        let t = e.trace(&tower)?;
        if t == 0 {
            continue;
        }
        let d = (4 * q as i64 - t * t) as u64;
        largest = largest.max(d);
        let disc = Discriminant::new(d)?;
        if !disc.is_fundamental() || !admits(query, &disc, q, t) {
            continue;
        }
        return OrientedCurve::new(tower, e, 0);
    }
    Err(Error::Infeasible(format!(
        "no suitable ordinary curve in {} tries (largest D scanned: {largest})",
        query.budget
    )))
}

fn admits(query: &OrdinaryQuery, disc: &Discriminant, q: u64, t: i64) -> bool {
    let assigned = assigned_characters(disc);
    let small_extension = |c: &Character| {
        query
            .max_extension
            .is_none_or(|bound| crate::elliptic::frobenius_matrix_order(q, t, c.modulus()) <= bound)
    };
    if let Some(rank) = query.two_rank {
        if assigned.len() as u32 != rank + 1 {
            return false;
        }
    }
    if let Some(bound) = query.cheap_primes_up_to {
        let cheap = disc
            .odd_factors()
            .filter(|&(l, _)| l <= bound)
            .all(|(l, _)| l != q && small_extension(&Character::Chi(l)));
        if !cheap {
            return false;
        }
    }
    let wanted: Vec<Character> = if !query.required.is_empty() {
        query.required.clone()
    } else if query.two_rank.is_some() {
        Vec::new()
    } else {
        match assigned.iter().find(|c| {
            matches!(c, Character::Chi(m) if *m <= query.m_max && *m != q) && small_extension(c)
        }) {
            Some(c) => vec![*c],
            None => return false,
        }
    };
    if !wanted
        .iter()
        .all(|c| assigned.contains(c) && arith::gcd(c.modulus(), q) == 1 && small_extension(c))
    {
        return false;
    }
    let Ok(group) = ClassGroup::enumerate(disc) else {
        return false;
    };
    wanted.iter().all(|c| {
        group
            .forms()
            .iter()
            .any(|g| char_eval_class(c, g).is_ok_and(|v| v == -1))
    })
}

/// Assigned characters, those usable by the attack (modulus coprime to q and
/// nontrivial on cl(O)), and a maximal independent subset of the usable ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterInventory {
    pub assigned: Vec<Character>,
    pub usable: Vec<Character>,
    pub independent: Vec<Character>,
}

impl CharacterInventory {
    pub fn to_json(&self) -> Value {
        let list = |v: &[Character]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        json!({
            "assigned": list(&self.assigned),
            "usable": list(&self.usable),
            "independent": list(&self.independent),
        })
    }
}

pub fn character_inventory(oc: &OrientedCurve) -> Result<CharacterInventory> {
    let disc = &oc.disc;
    let assigned = assigned_characters(disc);
    let group = ClassGroup::enumerate(disc)?;
    let mut usable = Vec::new();
    for c in &assigned {
        if arith::gcd(c.modulus(), oc.q()) != 1 {
            continue;
        }
        let mut nontrivial = false;
        for g in group.forms() {
            if char_eval_class(c, g)? == -1 {
                nontrivial = true;
                break;
            }
        }
        if nontrivial {
            usable.push(*c);
        }
    }
    let independent = independent_subset(disc, &usable)?;
    Ok(CharacterInventory {
        assigned,
        usable,
        independent,
    })
}

/// Drops the largest-modulus member of the character relation when every
/// member of it is present.
pub fn independent_subset(disc: &Discriminant, chars: &[Character]) -> Result<Vec<Character>> {
    let rel = relation_exponents(disc)?;
    let mut out = chars.to_vec();
    if !rel.is_empty() && rel.iter().all(|c| out.contains(c)) {
        let drop = *rel.iter().max_by_key(|c| c.modulus()).unwrap();
        out.retain(|c| *c != drop);
    }
    Ok(out)
}

/// Roots of x^2 - tr x + N mod l: two for split, one for ramified, none for
/// inert.
pub fn split_prime(oc: &OrientedCurve, ell: u64) -> Vec<u64> {
    let tr = oc.sigma_trace().rem_euclid(ell as i64) as u64;
    let n = oc.sigma_norm().rem_euclid(ell as i64) as u64;
    (0..ell)
        .filter(|&x| {
            let v = arith::mul_mod(x, x, ell) + ell * 2 - arith::mul_mod(tr, x, ell) + n;
            v % ell == 0
        })
        .collect()
}

/// Applies the prime ideal (l, sigma - lambda): the codomain of the isogeny
/// whose kernel is the lambda-eigenspace of sigma on E[l].
pub fn apply_prime_ideal(oc: &OrientedCurve, ell: u64, lambda: u64) -> Result<OrientedCurve> {
    let q = oc.q();
    if ell < 3 || !arith::is_prime(ell) || ell == q || oc.disc.value() % ell == 0 {
        return Err(Error::InvalidParameter(format!(
            "l = {ell} must be an odd prime not dividing p D"
        )));
    }
    let roots = split_prime(oc, ell);
    if roots.len() != 2 || !roots.contains(&(lambda % ell)) {
        return Err(Error::InvalidParameter(format!(
            "{lambda} is not an eigenvalue of sigma mod {ell}"
        )));
    }
    // Eigenvalues of pi_q.
    let shift = oc.shift.rem_euclid(ell as i64) as u64;
    let mu = arith::sub_mod(lambda % ell, shift, ell);
    let other = arith::mul_mod(q % ell, arith::inv_mod(mu, ell).unwrap(), ell);
    let k = arith::mult_order(mu, ell) as usize;
    let ext = prime_extension(q, k)?;
    let level = ext.top();
    let n = group_order_over(q, oc.frobenius_trace, k);
    let v = arith::valuation_big(&n, ell);
    let cofactor = &n / arith::big_pow(ell, v as u64);
    let ek = oc.curve.base_change(&ext, level);
    let mut rng = ChaCha8Rng::seed_from_u64(ell);
    let t = &*ext;
    let primary = |rng: &mut ChaCha8Rng| ek.mul_big(t, &cofactor, &ek.random_point(t, level, rng));
    // (pi - other) kills the other eigenspace of E[l].
    let project = |x: &Point| {
        let frob = oc.curve.frobenius(t, x);
        ek.sub(t, &frob, &ek.mul(t, other as i64, x))
    };
    for _ in 0..64 {
        let r1 = primary(&mut rng);
        if r1.is_infinity() {
            continue;
        }
        let (a, x1) = ell_power_order(&ek, t, ell, &r1);
        let mut kernel = project(&x1);
        // x1 spans the other eigenspace: look for an l-torsion point off
        // its line by reducing a second point modulo <r1>.
        let mut r2 = primary(&mut rng);
        while kernel.is_infinity() && !r2.is_infinity() {
            let (j, y) = ell_power_order(&ek, t, ell, &r2);
            if j > a {
                break;
            }
            match (0..ell).find(|&c| ek.mul(t, c as i64, &x1) == y) {
                None => kernel = project(&y),
                Some(c) => {
                    let shift = ek.mul_big(t, &arith::big_pow(ell, (a - j) as u64), &r1);
                    r2 = ek.sub(t, &r2, &ek.mul(t, c as i64, &shift));
                }
            }
        }
        if kernel.is_infinity() {
            continue;
        }
        let phi = Isogeny::from_kernel_point(t, &oc.curve, &kernel, ell)?;
        return Ok(oc.with_curve(phi.codomain));
    }
    Err(Error::Arithmetic(format!(
        "no {ell}-torsion point with Frobenius eigenvalue {mu} found"
    )))
}

/// For P of order l^j with j >= 1, returns j and l^(j-1) P.
fn ell_power_order(e: &Curve, t: &FieldTower, ell: u64, p: &Point) -> (u32, Point) {
    let mut pt = p.clone();
    let mut j = 1;
    loop {
        let next = e.mul(t, ell as i64, &pt);
        if next.is_infinity() {
            return (j, pt);
        }
        pt = next;
        j += 1;
    }
}

/// Applies each factor of `ideal` in turn.
pub fn apply_smooth_ideal(oc: &OrientedCurve, ideal: &SmoothIdeal) -> Result<OrientedCurve> {
    let mut cur = oc.clone();
    for &(ell, lambda, e) in &ideal.factors {
        let lam = if e >= 0 {
            lambda
        } else {
            ideal::conjugate_eigenvalue(oc, ell, lambda)
        };
        for _ in 0..e.unsigned_abs() {
            cur = apply_prime_ideal(&cur, ell, lam)?;
        }
    }
    Ok(cur)
}

/// Random class as a smooth ideal, by exponent sampling over the split
/// primes followed by the cheapest equivalent factorization.
pub fn random_smooth_class<R: Rng + ?Sized>(
    oc: &OrientedCurve,
    rng: &mut R,
) -> Result<SmoothIdeal> {
    let action = ClassAction::new(oc)?;
    let class = action.sample_class(rng);
    action.cheapest_ideal(&class)
}

#[cfg(test)]
mod tests;
