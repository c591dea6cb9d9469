//! Recovering [c] from [c]^2 and the pair (E, [c]E): character values of [c]
//! pin down the square root up to a small subgroup of cl(O)[2], whose
//! members are then tried one by one.

use std::time::Instant;

use rand::Rng;
use serde_json::{json, Value};

use crate::action::{apply_smooth_ideal, ClassAction, OrientedCurve};
use crate::arith;
use crate::attack::eval_character;
use crate::error::{Error, Result};
use crate::quadform::{
    assigned_characters, char_eval_class, span_of, two_torsion_and_sqrt, Character, Discriminant,
    QuadForm,
};

/// min(2^omega(D), max { l_i : l_i <= 2^(omega(D) - i) }) over the prime
/// factors l_1 < l_2 < ... of D, with max of the empty set taken as infinite.
pub fn choose_bound(disc: &Discriminant) -> u64 {
    let omega = disc.omega() as u32;
    let cap = 1u64 << omega;
    let inner = disc
        .factors()
        .iter()
        .enumerate()
        .filter(|&(i, &(l, _))| l <= 1u64 << (omega - 1 - i as u32))
        .map(|(_, &(l, _))| l)
        .max();
    inner.map_or(cap, |m| m.min(cap))
}

#[derive(Clone, Debug, Default)]
pub struct RecoverOptions {
    /// Bound B on the primes used for filtering; `None` uses [`choose_bound`].
    pub bound: Option<u64>,
    /// Also filter with delta, epsilon and delta-epsilon where assigned.
    pub use_two_adic: bool,
}

#[derive(Clone, Debug)]
pub struct RootRecovery {
    pub target_square: QuadForm,
    pub bound: u64,
    /// Odd primes of D up to B that were used, with chi_l([c]).
    pub p1: Vec<(u64, i8)>,
    /// Odd primes of D above B, or dividing p.
    pub p2: Vec<u64>,
    /// Extra 2-adic characters used, with their values.
    pub two_adic: Vec<(Character, i8)>,
    pub residual_group_size: usize,
    pub recovered: QuadForm,
    pub candidates_tested: usize,
    pub character_ms: f64,
    pub verify_ms: f64,
}

impl RootRecovery {
    pub fn to_json(&self) -> Value {
        json!({
            "target_square": self.target_square.to_json(),
            "B": self.bound.to_string(),
            "P1": self.p1.iter().map(|(l, v)| json!({"l": l.to_string(), "value": v})).collect::<Vec<_>>(),
            "P2": self.p2.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "two_adic": self.two_adic.iter().map(|(c, v)| json!({"char": c.to_json(), "value": v})).collect::<Vec<_>>(),
            "residual_group_size": self.residual_group_size.to_string(),
            "recovered": self.recovered.to_json(),
            "candidates_tested": self.candidates_tested.to_string(),
            "timings_ms": {"characters": self.character_ms, "verify": self.verify_ms},
        })
    }
}

/// Finds [c] with [c]^2 = `c_squared` and `target` = [c]`base`.
pub fn recover_root<R: Rng + ?Sized>(
    base: &OrientedCurve,
    target: &OrientedCurve,
    c_squared: &QuadForm,
    options: &RecoverOptions,
    rng: &mut R,
) -> Result<RootRecovery> {
    let disc = &base.disc;
    let q = base.q();
    let bound = options.bound.unwrap_or_else(|| choose_bound(disc));
    let start = Instant::now();
    let mut chars: Vec<(Character, i8)> = Vec::new();
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for (l, _) in disc.odd_factors() {
        if l <= bound && l != q {
            let v = eval_character(base, target, Character::Chi(l), rng)?.value;
            p1.push((l, v));
            chars.push((Character::Chi(l), v));
        } else {
            p2.push(l);
        }
    }
    let mut two_adic = Vec::new();
    if options.use_two_adic {
        for c in assigned_characters(disc) {
            if !matches!(c, Character::Chi(_)) && arith::gcd(c.modulus(), q) == 1 {
                let v = eval_character(base, target, c, rng)?.value;
                two_adic.push((c, v));
                chars.push((c, v));
            }
        }
    }
    let character_ms = start.elapsed().as_secs_f64() * 1e3;

    let action = ClassAction::new(base)?;
    let group = action.group();
    let (basis, root) = two_torsion_and_sqrt(group, c_squared)?;
    let root = root
        .ok_or_else(|| Error::InvalidParameter(format!("{c_squared} is not a square in cl(O)")))?;
    let torsion = span_of(&basis, disc.value());
    let values = |f: &QuadForm| -> Result<Vec<i8>> {
        chars.iter().map(|(c, _)| char_eval_class(c, f)).collect()
    };
    let wanted: Vec<i8> = chars.iter().map(|c| c.1).collect();
    let mut start_root = None;
    for g in &torsion {
        let candidate = group.mul(&root, g);
        if values(&candidate)? == wanted {
            start_root = Some(candidate);
            break;
        }
    }
    let start_root = start_root.ok_or_else(|| {
        Error::attack(
            "filter",
            "no square root of the target has the measured character values",
        )
    })?;
    let mut residual = Vec::new();
    for g in &torsion {
        if values(g)?.iter().all(|&v| v == 1) {
            residual.push(*g);
        }
    }

    let start = Instant::now();
    let mut matches = Vec::new();
    for g in &residual {
        let candidate = group.mul(&start_root, g);
        let ideal = action.cheapest_ideal(&candidate)?;
        if apply_smooth_ideal(base, &ideal)?.is_isomorphic(target) {
            matches.push(candidate);
        }
    }
    let verify_ms = start.elapsed().as_secs_f64() * 1e3;
    let recovered = match matches.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::attack(
                "verify",
                "no candidate matched: the inputs are inconsistent",
            ))
        }
        _ => {
            return Err(Error::Arithmetic(format!(
                "{} candidates matched, so the action is not free",
                matches.len()
            )))
        }
    };
    Ok(RootRecovery {
        target_square: *c_squared,
        bound,
        p1,
        p2,
        two_adic,
        residual_group_size: residual.len(),
        recovered,
        candidates_tested: residual.len(),
        character_ms,
        verify_ms,
    })
}
