//! Evaluating an assigned character at the unknown class connecting two
//! oriented curves.
//!
//! For P in E[m] on which sigma does not act by a scalar, zeta = e_m(P, sigma P)
//! generates mu_m. If E' = [a]E and zeta' is the same quantity on E', then
//! zeta' = zeta^a with a = N(a) up to squares, so chi([a]) = chi(a).

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use rand::Rng;
use serde_json::{json, Value};

use crate::action::{independent_subset, OrientedCurve};
use crate::arith;
use crate::elliptic::{group_order_over, torsion_extension_degree, Point, TorsionSampler};
use crate::error::{Error, Result};
use crate::field::{prime_extension, FieldElement, FieldTower};
use crate::pairing::weil_pairing;
use crate::quadform::{assigned_characters, Character};

/// Attempts at drawing a basis of E[m] before giving up.
const RETRY_BOUND: usize = 64;

/// Smallest k >= 0 with N(sigma + k) = N + k(tr + k) coprime to m, or odd
/// when m is even.
pub fn adjust_generator(trace: i64, norm: i64, m: u64) -> Result<i64> {
    let modulus = if m % 2 == 0 { 2 } else { m as i64 };
    for k in 0..=modulus {
        let n = norm as i128 + k as i128 * (trace as i128 + k as i128);
        if arith::gcd_i64(n.rem_euclid(modulus as i128) as i64, modulus) == 1 {
            return Ok(k);
        }
    }
    Err(Error::attack(
        "adjust_generator",
        format!("no shift of sigma has norm coprime to {m} (trace {trace}, norm {norm})"),
    ))
}

/// Whether P is usable: e_m(P, sigma P) primitive for odd m, and
/// sigma((m/2) P) != (m/2) P for m in {4, 8}.
pub fn is_noneigen<R: Rng + ?Sized>(
    t: &FieldTower,
    oc: &OrientedCurve,
    m: u64,
    p: &Point,
    sigma_p: &Point,
    rng: &mut R,
) -> Result<bool> {
    let level = p.x().map_or(0, |x| x.level());
    let e = oc.curve.base_change(t, level);
    if m % 2 == 1 {
        let z = weil_pairing(t, &e, p, sigma_p, m, rng)?;
        Ok(z.order(t) == m)
    } else {
        let half = (m / 2) as i64;
        Ok(e.mul(t, half, sigma_p) != e.mul(t, half, p))
    }
}

/// A point of E[m] on which sigma is not a scalar, with its image.
#[derive(Clone, Debug)]
pub struct NoneigenPoint {
    pub point: Point,
    pub image: Point,
    pub sigma_evaluations: usize,
}

/// Draws a basis (P, Q) of E[m] and returns the first of P, Q, P + Q that
/// passes [`is_noneigen`]. sigma is evaluated on P and Q only.
pub fn find_noneigen_point<R: Rng + ?Sized>(
    t: &FieldTower,
    oc: &OrientedCurve,
    m: u64,
    sampler: &TorsionSampler,
    sigma: &dyn Fn(&Point) -> Point,
    rng: &mut R,
) -> Result<NoneigenPoint> {
    let e = sampler.curve();
    for _ in 0..RETRY_BOUND {
        let p = sampler.sample_exact(t, rng)?;
        let q = sampler.sample_exact(t, rng)?;
        if weil_pairing(t, e, &p, &q, m, rng)?.order(t) != m {
            continue;
        }
        let (sp, sq) = (sigma(&p), sigma(&q));
        let candidates = [
            (p.clone(), sp.clone()),
            (q.clone(), sq.clone()),
            (e.add(t, &p, &q), e.add(t, &sp, &sq)),
        ];
        for (x, sx) in candidates {
            if is_noneigen(t, oc, m, &x, &sx, rng)? {
                return Ok(NoneigenPoint {
                    point: x,
                    image: sx,
                    sigma_evaluations: 2,
                });
            }
        }
        return Err(Error::attack(
            "find_noneigen_point",
            format!("sigma acts as a scalar on E[{m}]: the orientation is not primitive at {m}"),
        ));
    }
    Err(Error::attack(
        "find_noneigen_point",
        format!("no basis of E[{m}] found in {RETRY_BOUND} draws"),
    ))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub setup_ms: f64,
    pub torsion_ms: f64,
    pub pairing_ms: f64,
    pub dlog_ms: f64,
}

impl Timings {
    pub fn total_ms(&self) -> f64 {
        self.setup_ms + self.torsion_ms + self.pairing_ms + self.dlog_ms
    }
}

#[derive(Clone, Debug)]
pub struct CharEvalResult {
    pub character: Character,
    pub value: i8,
    /// a with zeta' = zeta^a.
    pub dlog_a: u64,
    /// r with E[m] defined over F_{q^r}.
    pub extension_degree: usize,
    /// a mod 8, reported when 32 | D.
    pub gamma_mod8: Option<u64>,
    /// The k used in sigma + k.
    pub shift: i64,
    pub sigma_evaluations: usize,
    pub timings: Timings,
}

impl CharEvalResult {
    pub fn to_json(&self) -> Value {
        json!({
            "char": self.character.to_json(),
            "value": self.value,
            "a": self.dlog_a.to_string(),
            "r": self.extension_degree.to_string(),
            "gamma": self.gamma_mod8.map(|g| g.to_string()),
            "shift": self.shift.to_string(),
            "sigma_evaluations": self.sigma_evaluations,
            "timings_ms": {
                "setup": self.timings.setup_ms,
                "torsion": self.timings.torsion_ms,
                "pairing": self.timings.pairing_ms,
                "dlog": self.timings.dlog_ms,
                "total": self.timings.total_ms(),
            },
        })
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Everything about one side of the computation that does not depend on the
/// other curve: the extension, the shift, and zeta = e_m(P, sigma P).
#[derive(Clone, Debug)]
pub struct CharacterProbe {
    character: Character,
    q: u64,
    frobenius_trace: i64,
    base_shift: i64,
    disc_value: u64,
    shift: i64,
    tower: Arc<FieldTower>,
    level: usize,
    group_order: BigUint,
    zeta: FieldElement,
    sigma_evaluations: usize,
    timings: Timings,
}

impl CharacterProbe {
    /// Prepares chi on the reference curve `oc` with sigma shifted by `k`,
    /// or by the smallest admissible shift when `k` is `None`.
    pub fn new<R: Rng + ?Sized>(
        oc: &OrientedCurve,
        chi: Character,
        k: Option<i64>,
        rng: &mut R,
    ) -> Result<Self> {
        let start = Instant::now();
        let m = chi.modulus();
        let q = oc.q();
        if arith::gcd(m, q) != 1 {
            return Err(Error::attack(
                "precondition",
                format!("the modulus {m} of {chi} is not coprime to p = {q}"),
            ));
        }
        if !assigned_characters(&oc.disc).contains(&chi) {
            return Err(Error::attack(
                "precondition",
                format!(
                    "{chi} is not an assigned character of D = {}",
                    oc.disc.value()
                ),
            ));
        }
        let k = match k {
            Some(k) => {
                let n = oc.shifted(k).sigma_norm();
                let need = if m % 2 == 0 { 2 } else { m as i64 };
                if arith::gcd_i64(n.rem_euclid(need), need) != 1 {
                    return Err(Error::attack(
                        "adjust_generator",
                        format!("N(sigma + {k}) = {n} is not coprime to {need}"),
                    ));
                }
                k
            }
            None => adjust_generator(oc.sigma_trace(), oc.sigma_norm(), m)?,
        };
        let base = FieldTower::prime(q)?;
        let r = torsion_extension_degree(&base, &oc.curve, m as usize)
            .map_err(|e| Error::attack("extension_degree", e.to_string()))?;
        let tower = prime_extension(q, r)?;
        let level = tower.top();
        let group_order = group_order_over(q, oc.frobenius_trace, r);
        let tower_one = tower.one(level);
        let mut probe = CharacterProbe {
            character: chi,
            q,
            frobenius_trace: oc.frobenius_trace,
            base_shift: oc.shift,
            disc_value: oc.disc.value(),
            shift: k,
            tower,
            level,
            group_order,
            zeta: tower_one,
            sigma_evaluations: 0,
            timings: Timings {
                setup_ms: ms(start),
                ..Timings::default()
            },
        };
        let (zeta, evals, timings) = probe.zeta_of(oc, rng)?;
        probe.zeta = zeta;
        probe.sigma_evaluations = evals;
        probe.timings.torsion_ms = timings.torsion_ms;
        probe.timings.pairing_ms = timings.pairing_ms;
        Ok(probe)
    }

    pub fn character(&self) -> Character {
        self.character
    }

    pub fn extension_degree(&self) -> usize {
        self.tower.degree(self.level)
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn zeta(&self) -> &FieldElement {
        &self.zeta
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    fn zeta_of<R: Rng + ?Sized>(
        &self,
        oc: &OrientedCurve,
        rng: &mut R,
    ) -> Result<(FieldElement, usize, Timings)> {
        let m = self.character.modulus();
        let t = &*self.tower;
        let start = Instant::now();
        let sampler = TorsionSampler::new(t, &oc.curve, self.level, m, &self.group_order, rng)
            .map_err(|e| Error::attack("torsion", e.to_string()))?;
        let shifted = oc.shifted(self.shift);
        let sigma = |p: &Point| shifted.sigma(t, p);
        let found = find_noneigen_point(t, &shifted, m, &sampler, &sigma, rng)?;
        let torsion_ms = ms(start);
        let start = Instant::now();
        let z = weil_pairing(t, sampler.curve(), &found.point, &found.image, m, rng)
            .map_err(|e| Error::attack("pairing", e.to_string()))?;
        let timings = Timings {
            torsion_ms,
            pairing_ms: ms(start),
            ..Timings::default()
        };
        Ok((z.value, found.sigma_evaluations, timings))
    }

    /// chi of the class connecting the reference curve to `other`.
    pub fn eval<R: Rng + ?Sized>(
        &self,
        other: &OrientedCurve,
        rng: &mut R,
    ) -> Result<CharEvalResult> {
        if other.q() != self.q
            || other.frobenius_trace != self.frobenius_trace
            || other.shift != self.base_shift
            || other.disc.value() != self.disc_value
        {
            return Err(Error::attack(
                "precondition",
                "the two instances do not share p, sigma and D",
            ));
        }
        let m = self.character.modulus();
        let (zeta2, evals, mut timings) = self.zeta_of(other, rng)?;
        let start = Instant::now();
        let a = self
            .tower
            .dlog_in_mu_m(&self.zeta, &zeta2, m)
            .map_err(|e| Error::attack("dlog", e.to_string()))?;
        timings.dlog_ms = ms(start);
        if arith::gcd(a, m) != 1 {
            return Err(Error::attack(
                "dlog",
                format!("exponent {a} is not a unit mod {m}"),
            ));
        }
        timings.setup_ms = self.timings.setup_ms;
        timings.torsion_ms += self.timings.torsion_ms;
        timings.pairing_ms += self.timings.pairing_ms;
        Ok(CharEvalResult {
            character: self.character,
            value: self.character.eval_unit(a as i64),
            dlog_a: a,
            extension_degree: self.extension_degree(),
            gamma_mod8: (self.disc_value % 32 == 0).then_some(a % 8),
            shift: self.shift,
            sigma_evaluations: self.sigma_evaluations + evals,
            timings,
        })
    }
}

/// chi([a]) for the class [a] with `e2` = [a]`e1`.
pub fn eval_character<R: Rng + ?Sized>(
    e1: &OrientedCurve,
    e2: &OrientedCurve,
    chi: Character,
    rng: &mut R,
) -> Result<CharEvalResult> {
    CharacterProbe::new(e1, chi, None, rng)?.eval(e2, rng)
}

/// Evaluates every assigned character with modulus coprime to p and at most
/// `max_modulus`, skipping one member of the character relation when all of
/// its members are present.
pub fn eval_all_characters<R: Rng + ?Sized>(
    e1: &OrientedCurve,
    e2: &OrientedCurve,
    max_modulus: u64,
    rng: &mut R,
) -> Result<Vec<(Character, Result<CharEvalResult>)>> {
    let candidates: Vec<Character> = assigned_characters(&e1.disc)
        .into_iter()
        .filter(|c| c.modulus() <= max_modulus && arith::gcd(c.modulus(), e1.q()) == 1)
        .collect();
    let chars = independent_subset(&e1.disc, &candidates)?;
    Ok(chars
        .into_iter()
        .map(|c| (c, eval_character(e1, e2, c, rng)))
        .collect())
}
