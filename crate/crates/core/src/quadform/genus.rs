//! Assigned (genus) characters of cl(O).

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use super::{ClassGroup, Discriminant, QuadForm};
use crate::arith;
use crate::error::{Error, Result};

/// Bound on |x|, |y| when searching for a value represented by a form.
const REPRESENTATION_BOUND: i64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Character {
    /// Legendre symbol modulo an odd prime dividing D.
    Chi(u64),
    /// (-1)^((n-1)/2), modulus 4.
    Delta,
    /// (-1)^((n^2-1)/8), modulus 8.
    Epsilon,
    /// The product delta * epsilon, modulus 8.
    DeltaEpsilon,
}

impl Character {
    pub fn modulus(&self) -> u64 {
        match self {
            Character::Chi(m) => *m,
            Character::Delta => 4,
            Character::Epsilon | Character::DeltaEpsilon => 8,
        }
    }

    /// Value on a residue coprime to the modulus.
    pub fn eval_unit(&self, n: i64) -> i8 {
        match self {
            Character::Chi(m) => arith::legendre(n, *m),
            Character::Delta => sign(n.rem_euclid(4) == 3),
            Character::Epsilon => sign(matches!(n.rem_euclid(8), 3 | 5)),
            // ((n+2)^2 - 9)/8 is odd exactly for n = 5, 7 mod 8.
            Character::DeltaEpsilon => sign(matches!(n.rem_euclid(8), 5 | 7)),
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self {
            Character::Chi(_) => "chi",
            Character::Delta => "delta",
            Character::Epsilon => "epsilon",
            Character::DeltaEpsilon => "delta_epsilon",
        };
        json!({"kind": kind, "modulus": self.modulus().to_string()})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v["kind"]
            .as_str()
            .ok_or_else(|| Error::Format("character needs a kind".into()))?;
        if kind == "chi" {
            let m = super::parse_int(&v["modulus"])?;
            return format!("chi_{m}").parse();
        }
        kind.parse()
    }
}

fn sign(negative: bool) -> i8 {
    if negative {
        -1
    } else {
        1
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Character::Chi(m) => write!(f, "chi_{m}"),
            Character::Delta => write!(f, "delta"),
            Character::Epsilon => write!(f, "epsilon"),
            Character::DeltaEpsilon => write!(f, "delta_epsilon"),
        }
    }
}

impl FromStr for Character {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "delta" => return Ok(Character::Delta),
            "epsilon" => return Ok(Character::Epsilon),
            "delta_epsilon" | "deltaepsilon" => return Ok(Character::DeltaEpsilon),
            _ => {}
        }
        let m = s
            .strip_prefix("chi_")
            .or_else(|| s.strip_prefix("chi"))
            .and_then(|m| m.parse::<u64>().ok())
            .ok_or_else(|| Error::Format(format!("unknown character {s:?}")))?;
        if m < 3 || !arith::is_prime(m) {
            return Err(Error::Format(format!(
                "chi needs an odd prime modulus, got {m}"
            )));
        }
        Ok(Character::Chi(m))
    }
}

/// The assigned characters of discriminant -D: chi_m for each odd prime m | D,
/// then delta, epsilon, delta_epsilon according to f = v_2(D) and d mod 4.
pub fn assigned_characters(disc: &Discriminant) -> Vec<Character> {
    let mut out: Vec<Character> = disc.odd_factors().map(|(m, _)| Character::Chi(m)).collect();
    let f = disc.two_adic();
    let d = disc.odd_part() % 4;
    if (f == 2 && d == 1) || f >= 4 {
        out.push(Character::Delta);
    }
    if (f == 3 && d == 3) || f >= 5 {
        out.push(Character::Epsilon);
    }
    if f == 3 && d == 1 {
        out.push(Character::DeltaEpsilon);
    }
    out
}

/// chi(n) for n coprime to the modulus of chi.
pub fn char_eval_norm(chi: &Character, n: i64) -> Result<i8> {
    if arith::gcd_i64(n, chi.modulus() as i64) != 1 {
        return Err(Error::InvalidParameter(format!(
            "{n} is not coprime to the modulus of {chi}"
        )));
    }
    Ok(chi.eval_unit(n))
}

/// A value represented by `g` and coprime to `modulus`.
pub fn represented_coprime(g: &QuadForm, modulus: u64) -> Result<i64> {
    let m = modulus as i64;
    for n in [g.a, g.c, g.a + g.b + g.c] {
        if arith::gcd_i64(n, m) == 1 {
            return Ok(n);
        }
    }
    for x in 0..=REPRESENTATION_BOUND {
        for y in -REPRESENTATION_BOUND..=REPRESENTATION_BOUND {
            let n = g.eval(x, y);
            if n > 0 && arith::gcd_i64(n, m) == 1 {
                return Ok(n);
            }
        }
    }
    Err(Error::Arithmetic(format!(
        "{g} represents no value coprime to {modulus} with |x|, |y| <= {REPRESENTATION_BOUND}"
    )))
}

/// chi evaluated on the class of `g` through a represented value coprime to
/// 2D.
pub fn char_eval_class(chi: &Character, g: &QuadForm) -> Result<i8> {
    let d = (-g.discriminant()) as u64;
    let n = represented_coprime(g, 2 * d)?;
    char_eval_norm(chi, n)
}

/// The characters whose product is trivial on cl(O): chi_m^(f_m mod 2),
/// delta^((d+1)/2 mod 2), epsilon^(f mod 2), with delta * epsilon written as
/// delta_epsilon when only the product is assigned.
pub fn relation_exponents(disc: &Discriminant) -> Result<Vec<Character>> {
    let assigned = assigned_characters(disc);
    let mut out: Vec<Character> = disc
        .odd_factors()
        .filter(|&(_, e)| e % 2 == 1)
        .map(|(m, _)| Character::Chi(m))
        .collect();
    let d = disc.odd_part();
    let use_delta = d.div_ceil(2) % 2 == 1 && disc.two_adic() > 0;
    let use_eps = disc.two_adic() % 2 == 1;
    let wanted: Vec<Character> = match (use_delta, use_eps) {
        (true, true) if assigned.contains(&Character::DeltaEpsilon) => {
            vec![Character::DeltaEpsilon]
        }
        (true, true) => vec![Character::Delta, Character::Epsilon],
        (true, false) => vec![Character::Delta],
        (false, true) => vec![Character::Epsilon],
        (false, false) => vec![],
    };
    for c in wanted {
        if !assigned.contains(&c) {
            return Err(Error::Arithmetic(format!(
                "relation needs {c}, which is not assigned for D = {}",
                disc.value()
            )));
        }
        out.push(c);
    }
    Ok(out)
}

/// Checks the character relation on every class and that 2^(mu-1) equals
/// the index of the squares.
pub fn verify_character_relation(disc: &Discriminant) -> Result<bool> {
    let group = ClassGroup::enumerate(disc)?;
    let rel = relation_exponents(disc)?;
    for g in group.forms() {
        let mut prod = 1i8;
        for c in &rel {
            prod *= char_eval_class(c, g)?;
        }
        if prod != 1 {
            return Ok(false);
        }
    }
    let mu = assigned_characters(disc).len() as u32;
    let index = group.order() / group.squares().len();
    Ok(mu >= 1 && index == 1 << (mu - 1))
}
