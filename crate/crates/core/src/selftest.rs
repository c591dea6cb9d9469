//! A quick run of the main invariants at small parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::action::{
    apply_smooth_ideal, gen_ordinary_instance, gen_supersingular_instance, ClassAction,
    OrdinaryQuery, OrientedCurve,
};
use crate::attack::CharacterProbe;
use crate::elliptic::{group_order_over, torsion_extension_degree, Curve, Point, TorsionSampler};
use crate::error::Result;
use crate::field::{FieldElement, FieldTower};
use crate::pairing::weil_pairing;
use crate::quadform::{verify_character_relation, Character, ClassGroup, Discriminant};

/// Deliberate defects, used to check that the suite notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Report e_m(P, Q)^-1 instead of e_m(P, Q).
    InvertedPairing,
    /// Evaluate delta as (-1)^((a+1)/2) instead of (-1)^((a-1)/2).
    DeltaFormula,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

struct Harness {
    faults: Vec<Fault>,
    rng: ChaCha8Rng,
}

impl Harness {
    fn pairing(
        &mut self,
        t: &FieldTower,
        e: &Curve,
        p: &Point,
        q: &Point,
        m: u64,
    ) -> Result<FieldElement> {
        let z = weil_pairing(t, e, p, q, m, &mut self.rng)?.value;
        Ok(if self.faults.contains(&Fault::InvertedPairing) {
            t.inv(&z).expect("roots of unity are invertible")
        } else {
            z
        })
    }

    fn character_value(&self, chi: Character, a: u64) -> i8 {
        match chi {
            Character::Delta if self.faults.contains(&Fault::DeltaFormula) => {
                -chi.eval_unit(a as i64)
            }
            _ => chi.eval_unit(a as i64),
        }
    }
}

type CheckResult = Result<std::result::Result<String, String>>;

fn torsion(
    p: u64,
    a: u64,
    b: u64,
    m: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(FieldTower, Curve, TorsionSampler)> {
    let base = FieldTower::prime(p)?;
    let e = Curve::from_u64(&base, a, b)?;
    let r = torsion_extension_degree(&base, &e, m as usize)?;
    let t = base.make_extension(r)?;
    let n = group_order_over(p, e.trace(&base)?, r);
    let sampler = TorsionSampler::new(&t, &e, t.top(), m, &n, rng)?;
    let curve = e.base_change(&t, t.top());
    Ok((t, curve, sampler))
}

fn field_axioms(h: &mut Harness) -> CheckResult {
    let t = FieldTower::prime(13)?.make_extension(3)?;
    let top = t.top();
    for _ in 0..50 {
        let [a, b, c] = [0; 3].map(|_| t.random(top, &mut h.rng));
        let lhs = t.mul(&a, &t.add(&b, &c));
        let rhs = t.add(&t.mul(&a, &b), &t.mul(&a, &c));
        if lhs != rhs || t.mul(&t.mul(&a, &b), &c) != t.mul(&a, &t.mul(&b, &c)) {
            return Ok(Err("ring axioms fail".into()));
        }
        if !a.is_zero() && !t.is_one(&t.mul(&a, &t.inv(&a).unwrap())) {
            return Ok(Err("inverse fails".into()));
        }
        if t.frobenius(&a, 3) != a {
            return Ok(Err("Frobenius has the wrong order".into()));
        }
    }
    Ok(Ok("F_{13^3}: 50 random triples".into()))
}

fn pairing_bilinear(h: &mut Harness) -> CheckResult {
    let mut cases = 0;
    for (p, a, b, m) in [(101u64, 1u64, 1u64, 5u64), (13, 1, 1, 4), (103, 2, 3, 3)] {
        let (t, e, s) = torsion(p, a, b, m, &mut h.rng)?;
        for _ in 0..6 {
            let [p1, p2, q] = [0; 3].map(|_| s.sample(&t, &mut h.rng).unwrap());
            let lhs = h.pairing(&t, &e, &e.add(&t, &p1, &p2), &q, m)?;
            let rhs = t.mul(
                &h.pairing(&t, &e, &p1, &q, m)?,
                &h.pairing(&t, &e, &p2, &q, m)?,
            );
            if lhs != rhs {
                return Ok(Err(format!(
                    "not linear on y^2 = x^3 + {a}x + {b} over F_{p}"
                )));
            }
            if !t.is_one(&h.pairing(&t, &e, &q, &q, m)?) {
                return Ok(Err("not alternating".into()));
            }
            cases += 1;
        }
    }
    Ok(Ok(format!("{cases} cases")))
}

fn tangent_value(t: &FieldTower, e: &Curve, p: &Point, x: &Point) -> FieldElement {
    let (Point::Affine { x: px, y: py }, Point::Affine { x: qx, y: qy }) = (p, x) else {
        unreachable!("affine points expected")
    };
    let three = t.from_u64(px.level(), 3);
    let num = t.add(&t.mul(&three, &t.square(px)), &t.embed(&e.a4, px.level()));
    let slope = t.div(&num, &t.add(py, py)).unwrap();
    t.sub(&t.sub(qy, py), &t.mul(&slope, &t.sub(qx, px)))
}

/// e_3 against the quotient of tangent lines on all of E[3].
fn pairing_matches_line_functions(h: &mut Harness) -> CheckResult {
    let (t, e, s) = torsion(103, 2, 3, 3, &mut h.rng)?;
    let mut pts: Vec<Point> = Vec::new();
    while pts.len() < 9 {
        let p = s.sample(&t, &mut h.rng)?;
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let level = t.top();
    let mut compared = 0;
    for p in &pts {
        for q in &pts {
            if p.is_infinity() || q.is_infinity() || p == q || *p == e.neg(&t, q) {
                continue;
            }
            let r = loop {
                let r = e.random_point(&t, level, &mut h.rng);
                let probes = [e.add(&t, q, &r), r.clone(), e.sub(&t, p, &r), e.neg(&t, &r)];
                if probes.iter().all(|x| !x.is_infinity() && !pts.contains(x)) {
                    break r;
                }
            };
            let num = t
                .div(
                    &tangent_value(&t, &e, p, &e.add(&t, q, &r)),
                    &tangent_value(&t, &e, p, &r),
                )
                .unwrap();
            let den = t
                .div(
                    &tangent_value(&t, &e, q, &e.sub(&t, p, &r)),
                    &tangent_value(&t, &e, q, &e.neg(&t, &r)),
                )
                .unwrap();
            if h.pairing(&t, &e, p, q, 3)? != t.div(&num, &den).unwrap() {
                return Ok(Err("e_3 disagrees with the line-function quotient".into()));
            }
            compared += 1;
        }
    }
    Ok(Ok(format!("{compared} pairs of E[3]")))
}

fn genus_theory(_: &mut Harness) -> CheckResult {
    let mut count = 0;
    for d in (3..=600u64).filter(|d| d % 4 == 0 || d % 4 == 3) {
        let disc = Discriminant::new(d)?;
        if !verify_character_relation(&disc)? {
            return Ok(Err(format!("genus relation fails for D = {d}")));
        }
        count += 1;
    }
    Ok(Ok(format!("{count} discriminants up to 600")))
}

fn dlog(h: &mut Harness) -> CheckResult {
    let t = FieldTower::prime(1009)?;
    // 1008 = 2^4 3^2 7, so mu_m exists for these m.
    for m in [3u64, 4, 7, 8, 9, 16] {
        let g = loop {
            let x = t.random(0, &mut h.rng);
            if x.is_zero() {
                continue;
            }
            let z = t.pow_u64(&x, 1008 / m);
            if t.element_order(&z, m)? == m {
                break z;
            }
        };
        for a in 0..m {
            if t.dlog_in_mu_m(&g, &t.pow_u64(&g, a), m)? != a {
                return Ok(Err(format!("dlog fails for m = {m}")));
            }
        }
    }
    Ok(Ok("all exponents for m in {3, 4, 7, 8, 9, 16}".into()))
}

fn action_matches_forms(h: &mut Harness) -> CheckResult {
    let oc = gen_supersingular_instance(101)?;
    let action = ClassAction::new(&oc)?;
    for _ in 0..4 {
        let a = action.sample_exponents(&mut h.rng);
        let via_ideal = apply_smooth_ideal(&oc, &a)?;
        let via_class = apply_smooth_ideal(&oc, &action.cheapest_ideal(&a.class(&oc)?)?)?;
        if !via_ideal.is_isomorphic(&via_class) {
            return Ok(Err("ideal and its reduced class act differently".into()));
        }
    }
    Ok(Ok("p = 101, 4 random ideals".into()))
}

fn oracle_equivalence(h: &mut Harness) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(h.rng.gen());
    let query = OrdinaryQuery {
        q_min: 200,
        q_max: 2000,
        required: vec![Character::Chi(3)],
        max_extension: Some(12),
        ..OrdinaryQuery::default()
    };
    let cases: Vec<(OrientedCurve, Character)> = vec![
        (gen_supersingular_instance(13)?, Character::Delta),
        (gen_supersingular_instance(101)?, Character::Delta),
        (gen_ordinary_instance(&query, &mut rng)?, Character::Chi(3)),
    ];
    let mut trials = 0;
    for (oc, chi) in cases {
        let probe = CharacterProbe::new(&oc, chi, None, &mut rng)?;
        let action = ClassAction::new(&oc)?;
        for _ in 0..6 {
            let ideal = action.sample_exponents(&mut rng);
            let target = apply_smooth_ideal(&oc, &ideal)?;
            let res = probe.eval(&target, &mut rng)?;
            let value = h.character_value(chi, res.dlog_a);
            if value != ideal.norm_character(&chi)? {
                return Ok(Err(format!(
                    "{chi} on D = {}: attack and norm disagree",
                    oc.disc.value()
                )));
            }
            trials += 1;
        }
    }
    Ok(Ok(format!("{trials} planted ideals")))
}

fn class_group_axioms(_: &mut Harness) -> CheckResult {
    for d in [3u64, 20, 84, 260, 399, 404, 1155] {
        let g = ClassGroup::enumerate(&Discriminant::new(d)?)?;
        let forms = g.forms();
        for f in forms {
            if g.mul(f, &f.inverse()) != g.principal() {
                return Ok(Err(format!("inverse fails for D = {d}")));
            }
            for k in forms {
                if g.mul(f, k) != g.mul(k, f) {
                    return Ok(Err(format!("composition not commutative for D = {d}")));
                }
            }
        }
        if g.order() % (1 << (crate::quadform::assigned_characters(g.discriminant()).len() - 1))
            != 0
        {
            return Ok(Err(format!("2-rank too large for D = {d}")));
        }
    }
    Ok(Ok("7 class groups".into()))
}

/// Runs every check, recording failures instead of stopping.
pub fn run_selftest(faults: &[Fault], seed: u64) -> SelftestReport {
    let mut h = Harness {
        faults: faults.to_vec(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let checks: [(&'static str, fn(&mut Harness) -> CheckResult); 8] = [
        ("field_axioms", field_axioms),
        ("pairing_bilinear_alternating", pairing_bilinear),
        (
            "pairing_matches_line_functions",
            pairing_matches_line_functions,
        ),
        ("dlog_in_mu_m", dlog),
        ("class_group_axioms", class_group_axioms),
        ("genus_theory", genus_theory),
        ("action_matches_forms", action_matches_forms),
        ("attack_matches_norm_oracle", oracle_equivalence),
    ];
    let mut report = SelftestReport::default();
    for (name, check) in checks {
        let (passed, detail) = match check(&mut h) {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        report.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_build_passes() {
        let report = run_selftest(&[], 1);
        assert!(report.passed(), "{:?}", report.failed());
    }

    #[test]
    fn injected_faults_are_caught() {
        let report = run_selftest(&[Fault::InvertedPairing], 1);
        assert_eq!(report.failed(), vec!["pairing_matches_line_functions"]);
        let report = run_selftest(&[Fault::DeltaFormula], 1);
        assert_eq!(report.failed(), vec!["attack_matches_norm_oracle"]);
    }
}
