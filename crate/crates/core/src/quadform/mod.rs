//! Positive definite binary quadratic forms of discriminant -D and the class
//! groups they represent.

mod genus;

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::arith;
use crate::error::{Error, Result};

pub use genus::{
    assigned_characters, char_eval_class, char_eval_norm, relation_exponents,
    verify_character_relation, Character,
};

/// Largest D accepted by class-group enumeration.
pub const MAX_ENUMERATION_D: u64 = 10_000_000;

/// A discriminant -D < 0 with the factorization of D.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Discriminant {
    d: u64,
    factors: Vec<(u64, u32)>,
}

impl Discriminant {
    pub fn new(d: u64) -> Result<Self> {
        Self::check(d)?;
        Ok(Discriminant {
            d,
            factors: arith::factorize(d),
        })
    }

    /// Uses a caller-supplied factorization, checked against D.
    pub fn with_factors(d: u64, mut factors: Vec<(u64, u32)>) -> Result<Self> {
        Self::check(d)?;
        factors.sort_unstable();
        let mut prod: u128 = 1;
        for &(p, e) in &factors {
            if !arith::is_prime(p) || e == 0 {
                return Err(Error::InvalidParameter(format!("bad factor {p}^{e}")));
            }
            prod = prod.saturating_mul((p as u128).saturating_pow(e));
        }
        if prod != d as u128 || factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter(format!(
                "factorization does not multiply to {d}"
            )));
        }
        Ok(Discriminant { d, factors })
    }

    fn check(d: u64) -> Result<()> {
        if d == 0 || d % 4 == 1 || d % 4 == 2 {
            return Err(Error::InvalidParameter(format!(
                "-{d} is not a negative discriminant"
            )));
        }
        Ok(())
    }

    /// D itself (the discriminant is -D).
    pub fn value(&self) -> u64 {
        self.d
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// f with 2^f || D.
    pub fn two_adic(&self) -> u32 {
        self.d.trailing_zeros()
    }

    /// d = D / 2^f.
    pub fn odd_part(&self) -> u64 {
        self.d >> self.two_adic()
    }

    /// Odd primes dividing D with their exponents.
    pub fn odd_factors(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.factors.iter().copied().filter(|&(p, _)| p != 2)
    }

    /// Number of distinct primes dividing D.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// -D is the discriminant of a maximal order.
    pub fn is_fundamental(&self) -> bool {
        let f = self.two_adic();
        let d = self.odd_part();
        let squarefree = self.odd_factors().all(|(_, e)| e == 1);
        squarefree && (f == 0 && d % 4 == 3 || f == 2 && d % 4 == 1 || f == 3)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "D": self.d.to_string(),
            "factors": self
                .factors
                .iter()
                .map(|(p, e)| json!([p.to_string(), e.to_string()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let d = parse_int(&v["D"])?;
        let d = u64::try_from(d).map_err(|_| Error::Format("D must be positive".into()))?;
        match v.get("factors").and_then(Value::as_array) {
            None => Discriminant::new(d),
            Some(fs) => {
                let factors = fs
                    .iter()
                    .map(|f| {
                        let p = parse_int(&f[0])?;
                        let e = parse_int(&f[1])?;
                        Ok((p as u64, e as u32))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Discriminant::with_factors(d, factors)
            }
        }
    }
}

/// Reads an integer given as a decimal string or a JSON number.
pub(crate) fn parse_int(v: &Value) -> Result<i64> {
    match v {
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("not an integer: {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .ok_or_else(|| Error::Format(format!("not an integer: {n}"))),
        other => Err(Error::Format(format!("expected an integer, got {other}"))),
    }
}

/// The form a x^2 + b xy + c y^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    /// b^2 - 4ac.
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form (1, D mod 2, (D mod 2 + D)/4).
    pub fn principal(d: u64) -> Self {
        let b = (d % 2) as i64;
        QuadForm::new(1, b, (b + d as i64) / 4)
    }

    pub fn is_principal(&self) -> bool {
        self.a == 1 && self.is_reduced()
    }

    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a
            && self.a <= self.c
            && !((self.b.abs() == self.a || self.a == self.c) && self.b < 0)
    }

    pub fn is_primitive(&self) -> bool {
        arith::gcd_i64(arith::gcd_i64(self.a, self.b), self.c) == 1
    }

    /// The form (a, -b, c), inverse in the class group.
    pub fn inverse(&self) -> Self {
        reduce_unchecked(QuadForm::new(self.a, -self.b, self.c))
    }

    /// Value a x^2 + b xy + c y^2.
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn to_json(&self) -> Value {
        json!([self.a.to_string(), self.b.to_string(), self.c.to_string()])
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::Format("a form is a list [a, b, c]".into()))?;
        Ok(QuadForm::new(
            parse_int(&arr[0])?,
            parse_int(&arr[1])?,
            parse_int(&arr[2])?,
        ))
    }
}

fn check_definite(f: &QuadForm) -> Result<()> {
    if f.a <= 0 || f.discriminant() >= 0 {
        return Err(Error::InvalidParameter(format!(
            "{f} is not positive definite"
        )));
    }
    Ok(())
}

/// The reduced form equivalent to `f`.
pub fn reduce_form(f: QuadForm) -> Result<QuadForm> {
    check_definite(&f)?;
    Ok(reduce_unchecked(f))
}

fn reduce_unchecked(f: QuadForm) -> QuadForm {
    let disc = f.discriminant() as i128;
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        // Bring b into (-a, a].
        let two_a = 2 * a;
        let mut r = b.rem_euclid(two_a);
        if r > a {
            r -= two_a;
        }
        if r != b {
            b = r;
            c = (b * b - disc) / (4 * a);
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if (a == c || b == -a) && b < 0 {
            b = -b;
        }
        return QuadForm::new(a as i64, b as i64, c as i64);
    }
}

/// Gauss composition followed by reduction.
pub fn compose(f1: &QuadForm, f2: &QuadForm) -> Result<QuadForm> {
    if f1.discriminant() != f2.discriminant() {
        return Err(Error::InvalidParameter(format!(
            "discriminants of {f1} and {f2} differ"
        )));
    }
    check_definite(f1)?;
    check_definite(f2)?;
    Ok(compose_unchecked(f1, f2))
}

fn compose_unchecked(f1: &QuadForm, f2: &QuadForm) -> QuadForm {
    let (f1, f2) = if f1.a > f2.a { (f2, f1) } else { (f1, f2) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (d, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        let (g, u, _) = arith::ext_gcd(a2, a1);
        (g, u)
    };
    let (d1, x2, y2) = if s % d == 0 {
        (d, 0, -1)
    } else {
        let (g, u, v) = arith::ext_gcd(s, d);
        (g, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    reduce_unchecked(QuadForm::new(a3 as i64, b3 as i64, c3 as i64))
}

/// f^n in the class group.
pub fn power(f: &QuadForm, n: i64) -> QuadForm {
    let d = (-f.discriminant()) as u64;
    let mut base = if n < 0 {
        f.inverse()
    } else {
        reduce_unchecked(*f)
    };
    let mut e = n.unsigned_abs();
    let mut acc = QuadForm::principal(d);
    while e > 0 {
        if e & 1 == 1 {
            acc = compose_unchecked(&acc, &base);
        }
        base = compose_unchecked(&base, &base);
        e >>= 1;
    }
    acc
}

/// Form of the prime ideal (l, sigma - lambda) of Z[sigma], where sigma has
/// trace `trace` and the order has discriminant -D.
pub fn prime_ideal_form(d: u64, ell: u64, trace: i64, lambda: u64) -> Result<QuadForm> {
    let l = ell as i64;
    // b = 2 lambda - t mod l, b = D mod 2.
    let base = (2 * lambda as i64 - trace).rem_euclid(l);
    let b = if (base - d as i64).rem_euclid(2) == 0 {
        base
    } else {
        base + l
    };
    let num = b as i128 * b as i128 + d as i128;
    if l % 2 == 0 || num % (4 * l as i128) != 0 {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} is not an eigenvalue of sigma mod {ell}"
        )));
    }
    Ok(reduce_unchecked(QuadForm::new(
        l,
        b,
        (num / (4 * l as i128)) as i64,
    )))
}

/// The class group cl(O) as its list of reduced primitive forms, the
/// principal form first.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    disc: Discriminant,
    forms: Vec<QuadForm>,
    index: HashMap<QuadForm, usize>,
}

impl ClassGroup {
    pub fn enumerate(disc: &Discriminant) -> Result<Self> {
        let d = disc.value();
        if d > MAX_ENUMERATION_D {
            return Err(Error::InvalidParameter(format!(
                "D = {d} exceeds the enumeration bound {MAX_ENUMERATION_D}"
            )));
        }
        let di = d as i64;
        let mut forms = Vec::new();
        let mut a = 1i64;
        while 3 * a * a <= di {
            for b in (-a + 1)..=a {
                if (b - di).rem_euclid(2) != 0 {
                    continue;
                }
                let num = b * b + di;
                if num % (4 * a) != 0 {
                    continue;
                }
                let f = QuadForm::new(a, b, num / (4 * a));
                if f.is_reduced() && f.is_primitive() {
                    forms.push(f);
                }
            }
            a += 1;
        }
        forms.sort_by_key(|f| (f.a, f.b.abs(), f.b < 0));
        let index = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        Ok(ClassGroup {
            disc: disc.clone(),
            forms,
            index,
        })
    }

    pub fn discriminant(&self) -> &Discriminant {
        &self.disc
    }

    /// The class number h.
    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn principal(&self) -> QuadForm {
        self.forms[0]
    }

    /// Index of the class of `f`.
    pub fn index_of(&self, f: &QuadForm) -> Result<usize> {
        if f.discriminant() != -(self.disc.value() as i64) {
            return Err(Error::InvalidParameter(format!(
                "{f} has the wrong discriminant"
            )));
        }
        let r = reduce_form(*f)?;
        self.index
            .get(&r)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("{f} is not primitive")))
    }

    pub fn mul(&self, f: &QuadForm, g: &QuadForm) -> QuadForm {
        compose_unchecked(f, g)
    }

    /// Order of the class of `f`.
    pub fn element_order(&self, f: &QuadForm) -> usize {
        let mut cur = reduce_unchecked(*f);
        let mut k = 1;
        while !cur.is_principal() {
            cur = compose_unchecked(&cur, f);
            k += 1;
        }
        k
    }

    /// The subgroup of squares.
    pub fn squares(&self) -> Vec<QuadForm> {
        let mut out: Vec<QuadForm> = self.forms.iter().map(|f| compose_unchecked(f, f)).collect();
        out.sort();
        out.dedup();
        out
    }

    /// The 2-torsion subgroup cl(O)[2].
    pub fn two_torsion(&self) -> Vec<QuadForm> {
        self.forms
            .iter()
            .filter(|f| compose_unchecked(f, f).is_principal())
            .copied()
            .collect()
    }

    /// All square roots of `target`.
    pub fn square_roots(&self, target: &QuadForm) -> Vec<QuadForm> {
        let t = reduce_unchecked(*target);
        self.forms
            .iter()
            .filter(|f| compose_unchecked(f, f) == t)
            .copied()
            .collect()
    }
}

/// An F_2-basis of cl(O)[2] and one square root of `target` if it is a
/// square.
pub fn two_torsion_and_sqrt(
    group: &ClassGroup,
    target: &QuadForm,
) -> Result<(Vec<QuadForm>, Option<QuadForm>)> {
    group.index_of(target)?;
    let mut basis = Vec::new();
    let mut span = vec![group.principal()];
    for g in group.two_torsion() {
        if span.contains(&g) {
            continue;
        }
        let shifted: Vec<QuadForm> = span.iter().map(|s| compose_unchecked(s, &g)).collect();
        span.extend(shifted);
        basis.push(g);
    }
    let root = group.square_roots(target).into_iter().next();
    Ok((basis, root))
}

/// Every element of the subgroup spanned by an F_2-basis.
pub fn span_of(basis: &[QuadForm], d: u64) -> Vec<QuadForm> {
    let mut span = vec![QuadForm::principal(d)];
    for g in basis {
        let shifted: Vec<QuadForm> = span.iter().map(|s| compose_unchecked(s, g)).collect();
        span.extend(shifted);
    }
    span
}

#[cfg(test)]
mod tests;
