use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use rand::Rng;
use serde_json::{json, Value};

use super::{split_prime, OrientedCurve};
use crate::arith;
use crate::error::{Error, Result};
use crate::quadform::{
    compose, parse_int, power, prime_ideal_form, Character, ClassGroup, QuadForm,
};

/// Largest prime used by the class sampler.
pub const SMOOTHNESS_BOUND: u64 = 50;
/// Exponents are sampled from [-EXPONENT_BOUND, EXPONENT_BOUND].
const EXPONENT_BOUND: i64 = 5;

/// Product of prime ideals (l, sigma - lambda)^e. A negative exponent stands
/// for the conjugate ideal (l, sigma - lambda').
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SmoothIdeal {
    pub factors: Vec<(u64, u64, i64)>,
}

pub(super) fn conjugate_eigenvalue(oc: &OrientedCurve, ell: u64, lambda: u64) -> u64 {
    (oc.sigma_trace() - lambda as i64).rem_euclid(ell as i64) as u64
}

impl SmoothIdeal {
    pub fn identity() -> Self {
        SmoothIdeal::default()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| f.2 == 0)
    }

    /// N(a) = product of l^|e|.
    pub fn norm(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::from(1u32), |acc, &(ell, _, e)| {
                acc * arith::big_pow(ell, e.unsigned_abs())
            })
    }

    /// Degree of the isogeny realizing the action, equal to the norm.
    pub fn degree(&self) -> BigUint {
        self.norm()
    }

    /// chi(N(a)), computed factor by factor.
    pub fn norm_character(&self, chi: &Character) -> Result<i8> {
        let mut v = 1i8;
        for &(ell, _, e) in &self.factors {
            if e % 2 != 0 {
                v *= crate::quadform::char_eval_norm(chi, ell as i64)?;
            }
        }
        Ok(v)
    }

    /// The reduced form of the class of this ideal.
    pub fn class(&self, oc: &OrientedCurve) -> Result<QuadForm> {
        let d = oc.disc.value();
        let mut acc = QuadForm::principal(d);
        for &(ell, lambda, e) in &self.factors {
            let f = prime_ideal_form(d, ell, oc.sigma_trace(), lambda)?;
            acc = compose(&acc, &power(&f, e))?;
        }
        Ok(acc)
    }

    /// Product ideal, merging factors over the same prime.
    pub fn product(&self, other: &SmoothIdeal, oc: &OrientedCurve) -> SmoothIdeal {
        let mut out = self.clone();
        for &(ell, lambda, e) in &other.factors {
            if let Some(f) = out.factors.iter_mut().find(|f| f.0 == ell) {
                if f.1 == lambda {
                    f.2 += e;
                } else {
                    debug_assert_eq!(conjugate_eigenvalue(oc, ell, lambda), f.1);
                    f.2 -= e;
                }
            } else {
                out.factors.push((ell, lambda, e));
            }
        }
        out.factors.retain(|f| f.2 != 0);
        out
    }

    /// Number of prime isogenies needed to apply this ideal.
    pub fn length(&self) -> u64 {
        self.factors.iter().map(|f| f.2.unsigned_abs()).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self
                .factors
                .iter()
                .map(|(l, lam, e)| json!([l.to_string(), lam.to_string(), e.to_string()]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let fs = v["factors"]
            .as_array()
            .ok_or_else(|| Error::Format("ideal needs a \"factors\" list".into()))?;
        let factors = fs
            .iter()
            .map(|f| {
                Ok((
                    parse_int(&f[0])? as u64,
                    parse_int(&f[1])? as u64,
                    parse_int(&f[2])?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SmoothIdeal { factors })
    }
}

/// A prime ideal (l, sigma - lambda) usable by the action.
#[derive(Clone, Debug)]
pub struct PrimeStep {
    pub ell: u64,
    pub lambda: u64,
    pub form: QuadForm,
    /// Estimated relative cost of one application.
    pub cost: u64,
    /// Whether lambda is the smaller root, the one used with positive
    /// exponents.
    pub canonical: bool,
}

/// Class group of an instance together with the usable prime ideals and a
/// cheapest factorization of every class into them.
#[derive(Clone, Debug)]
pub struct ClassAction {
    group: ClassGroup,
    steps: Vec<PrimeStep>,
    /// For each class: its predecessor class and the step leading to it.
    tree: Vec<Option<(usize, usize)>>,
    cost: Vec<u64>,
}

impl ClassAction {
    pub fn new(oc: &OrientedCurve) -> Result<Self> {
        let group = ClassGroup::enumerate(&oc.disc)?;
        let d = oc.disc.value();
        let q = oc.q();
        let bits = 64 - q.leading_zeros() as u64;
        let mut steps = Vec::new();
        for ell in (3..=SMOOTHNESS_BOUND).filter(|&l| arith::is_prime(l)) {
            if ell == q || d % ell == 0 {
                continue;
            }
            let roots = split_prime(oc, ell);
            if roots.len() != 2 {
                continue;
            }
            for (i, &lambda) in roots.iter().enumerate() {
                let mu = (lambda as i64 - oc.shift).rem_euclid(ell as i64) as u64;
                let k = arith::mult_order(mu, ell);
                steps.push(PrimeStep {
                    ell,
                    lambda,
                    form: prime_ideal_form(d, ell, oc.sigma_trace(), lambda)?,
                    cost: k * k * k * bits + ell * k * k,
                    canonical: i == 0,
                });
            }
        }
        let h = group.order();
        let mut cost = vec![u64::MAX; h];
        let mut tree = vec![None; h];
        cost[0] = 0;
        let mut heap = BinaryHeap::from([Reverse((0u64, 0usize))]);
        while let Some(Reverse((c, x))) = heap.pop() {
            if c > cost[x] {
                continue;
            }
            let fx = group.forms()[x];
            for (si, s) in steps.iter().enumerate() {
                let y = group.index_of(&group.mul(&fx, &s.form))?;
                let cy = c + s.cost;
                if cy < cost[y] {
                    cost[y] = cy;
                    tree[y] = Some((x, si));
                    heap.push(Reverse((cy, y)));
                }
            }
        }
        if cost.iter().any(|&c| c == u64::MAX) {
            return Err(Error::Infeasible(format!(
                "split primes up to {SMOOTHNESS_BOUND} generate a proper subgroup of cl(O) (h = {h})"
            )));
        }
        Ok(ClassAction {
            group,
            steps,
            tree,
            cost,
        })
    }

    pub fn group(&self) -> &ClassGroup {
        &self.group
    }

    pub fn steps(&self) -> &[PrimeStep] {
        &self.steps
    }

    /// Random exponent vector in [-5, 5] over the split primes.
    pub fn sample_exponents<R: Rng + ?Sized>(&self, rng: &mut R) -> SmoothIdeal {
        let factors = self
            .steps
            .iter()
            .filter(|s| s.canonical)
            .map(|s| {
                (
                    s.ell,
                    s.lambda,
                    rng.gen_range(-EXPONENT_BOUND..=EXPONENT_BOUND),
                )
            })
            .filter(|f| f.2 != 0)
            .collect();
        SmoothIdeal { factors }
    }

    /// Class of a random exponent vector.
    pub fn sample_class<R: Rng + ?Sized>(&self, rng: &mut R) -> QuadForm {
        let ideal = self.sample_exponents(rng);
        let mut acc = self.group.principal();
        for &(ell, lambda, e) in &ideal.factors {
            let s = self.step(ell, lambda).expect("sampled from the steps");
            acc = self.group.mul(&acc, &power(&s.form, e));
        }
        acc
    }

    fn step(&self, ell: u64, lambda: u64) -> Option<&PrimeStep> {
        self.steps
            .iter()
            .find(|s| s.ell == ell && s.lambda == lambda)
    }

    /// Estimated cost of the cheapest ideal in the class of `class`.
    pub fn class_cost(&self, class: &QuadForm) -> Result<u64> {
        Ok(self.cost[self.group.index_of(class)?])
    }

    /// Cheapest product of usable prime ideals in the class of `class`.
    pub fn cheapest_ideal(&self, class: &QuadForm) -> Result<SmoothIdeal> {
        let mut x = self.group.index_of(class)?;
        let mut factors: Vec<(u64, u64, i64)> = Vec::new();
        while let Some((prev, si)) = self.tree[x] {
            let s = &self.steps[si];
            let canonical = if s.canonical {
                s.lambda
            } else {
                self.steps
                    .iter()
                    .find(|t| t.ell == s.ell && t.canonical)
                    .unwrap()
                    .lambda
            };
            let sign = if s.canonical { 1 } else { -1 };
            match factors.iter_mut().find(|f| f.0 == s.ell) {
                Some(f) => f.2 += sign,
                None => factors.push((s.ell, canonical, sign)),
            }
            x = prev;
        }
        factors.sort_unstable();
        Ok(SmoothIdeal { factors })
    }
}
