use super::*;
use crate::field::{Poly, PolyRing};
use crate::quadform::{compose, QuadForm};
use std::collections::HashMap;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ordinary(seed: u64, required: Vec<Character>) -> OrientedCurve {
    let query = OrdinaryQuery {
        q_min: 200,
        q_max: 2000,
        required,
        max_extension: Some(12),
        ..OrdinaryQuery::default()
    };
    gen_ordinary_instance(&query, &mut rng(seed)).unwrap()
}

#[test]
fn supersingular_instances() {
    let e5 = gen_supersingular_instance(5).unwrap();
    assert_eq!(e5.curve.count_points(&e5.tower).unwrap(), 6);
    for p in [13u64, 101, 1009] {
        let oc = gen_supersingular_instance(p).unwrap();
        assert_eq!(oc.frobenius_trace, 0);
        assert_eq!(oc.disc.value(), 4 * p);
        assert_eq!((oc.sigma_trace(), oc.sigma_norm()), (0, p as i64));
        let inv = character_inventory(&oc).unwrap();
        assert_eq!(inv.assigned, vec![Character::Chi(p), Character::Delta]);
        assert_eq!(inv.independent.len(), 1);
    }
    assert!(matches!(
        gen_supersingular_instance(103),
        Err(Error::Infeasible(_))
    ));
    assert!(gen_supersingular_instance(21).is_err());
    let inv = character_inventory(&gen_supersingular_instance(101).unwrap()).unwrap();
    assert_eq!(inv.usable, vec![Character::Delta]);
}

#[test]
fn splitting_types() {
    let oc = gen_supersingular_instance(13).unwrap();
    for ell in [3u64, 5, 7, 11, 17, 19, 23] {
        let roots = split_prime(&oc, ell);
        match arith::legendre(-13, ell) {
            1 => {
                assert_eq!(roots.len(), 2);
                for r in roots {
                    assert_eq!((r * r + 13) % ell, 0);
                }
            }
            -1 => assert!(roots.is_empty()),
            _ => unreachable!(),
        }
    }
    assert_eq!(split_prime(&oc, 13), vec![0]);
}

#[test]
fn conjugate_ideals_cancel() {
    let oc = gen_supersingular_instance(101).unwrap();
    let action = ClassAction::new(&oc).unwrap();
    for s in action.steps().iter().filter(|s| s.ell < 20) {
        let conj = ideal::conjugate_eigenvalue(&oc, s.ell, s.lambda);
        let there = apply_prime_ideal(&oc, s.ell, s.lambda).unwrap();
        assert_eq!(there.frobenius_trace, 0);
        assert_eq!(there.curve.trace(&oc.tower).unwrap(), 0);
        let back = apply_prime_ideal(&there, s.ell, conj).unwrap();
        assert!(back.is_isomorphic(&oc), "l = {}", s.ell);
    }
}

#[test]
fn class_order_cycles() {
    let oc = gen_supersingular_instance(101).unwrap();
    let action = ClassAction::new(&oc).unwrap();
    let s = action.steps().iter().min_by_key(|s| s.cost).unwrap();
    let n = action.group().element_order(&s.form);
    let mut cur = oc.clone();
    for i in 1..=n {
        cur = apply_prime_ideal(&cur, s.ell, s.lambda).unwrap();
        assert_eq!(cur.is_isomorphic(&oc), i == n, "step {i} of {n}");
    }
}

/// Codomains of the 3-isogenies with kernel in the lambda-eigenspace, found
/// from the rational roots of the 3-division polynomial.
fn three_isogeny_oracle(oc: &OrientedCurve, lambda: u64) -> Vec<Curve> {
    let t = &*oc.tower;
    let psi = crate::elliptic::division_polynomial(t, &oc.curve, 3).unwrap();
    let ring = PolyRing::new(t, 0);
    let mut out = Vec::new();
    for x0 in ring.roots(&psi) {
        // pi acts on (x0, y0) by the quadratic character of y0^2.
        let eig = if t.quadratic_character(&oc.curve.rhs(t, &x0)) == 1 {
            1
        } else {
            2
        };
        if eig == lambda {
            let h = Poly::new(0, vec![t.neg(&x0), t.one(0)]);
            out.push(
                Isogeny::from_kernel_polynomial(t, &oc.curve, h, 3)
                    .unwrap()
                    .codomain,
            );
        }
    }
    out
}

#[test]
fn three_isogenies_match_division_polynomial_oracle() {
    for p in [17u64, 29, 41, 53, 89] {
        let oc = gen_supersingular_instance(p).unwrap();
        for lambda in split_prime(&oc, 3) {
            let got = apply_prime_ideal(&oc, 3, lambda).unwrap();
            let want = three_isogeny_oracle(&oc, lambda);
            assert_eq!(want.len(), 1, "p = {p}");
            assert!(got.curve.is_isomorphic(&oc.tower, &want[0]));
        }
    }
}

#[test]
fn ordinary_instance_search() {
    let oc = ordinary(7, vec![]);
    let q = oc.q() as i64;
    let t = oc.frobenius_trace;
    assert_ne!(t % q, 0);
    assert_eq!(t * t - 4 * q, -(oc.disc.value() as i64));
    assert!(oc.disc.is_fundamental());
    let inv = character_inventory(&oc).unwrap();
    assert!(inv.usable.iter().any(|c| matches!(c, Character::Chi(_))));
    let with_eight = ordinary(8, vec![Character::Epsilon]);
    assert_eq!(with_eight.disc.two_adic(), 3);
    let query = OrdinaryQuery {
        q_min: 101,
        q_max: 103,
        required: vec![Character::Chi(47), Character::Chi(43)],
        budget: 50,
        ..OrdinaryQuery::default()
    };
    assert!(matches!(
        gen_ordinary_instance(&query, &mut rng(1)),
        Err(Error::Infeasible(_))
    ));
}

#[test]
fn action_matches_composition() {
    let mut r = rng(11);
    for oc in [
        gen_supersingular_instance(101).unwrap(),
        ordinary(3, vec![]),
    ] {
        let action = ClassAction::new(&oc).unwrap();
        for _ in 0..4 {
            let a = action.sample_class(&mut r);
            let b = action.sample_class(&mut r);
            let ia = action.cheapest_ideal(&a).unwrap();
            let ib = action.cheapest_ideal(&b).unwrap();
            assert_eq!(ia.class(&oc).unwrap(), a);
            let ab = compose(&a, &b).unwrap();
            let iab = action.cheapest_ideal(&ab).unwrap();
            // [ab]E against [a]([b]E) and [b]([a]E).
            let direct = apply_smooth_ideal(&oc, &iab).unwrap();
            let via_b = apply_smooth_ideal(&apply_smooth_ideal(&oc, &ib).unwrap(), &ia).unwrap();
            let via_a = apply_smooth_ideal(&apply_smooth_ideal(&oc, &ia).unwrap(), &ib).unwrap();
            assert!(direct.is_isomorphic(&via_b));
            assert!(direct.is_isomorphic(&via_a));
            let prod = ia.product(&ib, &oc);
            assert_eq!(prod.class(&oc).unwrap(), ab);
        }
    }
}

#[test]
fn permuted_factors_commute() {
    let oc = ordinary(5, vec![]);
    let action = ClassAction::new(&oc).unwrap();
    let cheap: Vec<&PrimeStep> = {
        let mut v: Vec<&PrimeStep> = action.steps().iter().collect();
        v.sort_by_key(|s| s.cost);
        v.into_iter().take(3).collect()
    };
    let f: Vec<(u64, u64, i64)> = cheap.iter().map(|s| (s.ell, s.lambda, 1)).collect();
    let mut g = f.clone();
    g.reverse();
    let x = apply_smooth_ideal(&oc, &SmoothIdeal { factors: f }).unwrap();
    let y = apply_smooth_ideal(&oc, &SmoothIdeal { factors: g }).unwrap();
    assert!(x.is_isomorphic(&y));
    let same = apply_smooth_ideal(&oc, &SmoothIdeal::identity()).unwrap();
    assert_eq!(same.curve, oc.curve);
}

#[test]
fn action_is_free() {
    let oc = gen_supersingular_instance(1009).unwrap();
    let action = ClassAction::new(&oc).unwrap();
    let mut seen: HashMap<QuadForm, OrientedCurve> = HashMap::new();
    let mut r = rng(5);
    while seen.len() < 20.min(action.group().order() - 1) {
        let c = action.sample_class(&mut r);
        if c.is_principal() || seen.contains_key(&c) {
            continue;
        }
        let ideal = action.cheapest_ideal(&c).unwrap();
        let img = apply_smooth_ideal(&oc, &ideal).unwrap();
        assert!(!img.is_isomorphic(&oc), "class {c}");
        for (other, e) in &seen {
            assert!(!img.is_isomorphic(e), "{c} and {other}");
        }
        seen.insert(c, img);
    }
}

#[test]
fn norm_characters_match_classes() {
    let oc = ordinary(9, vec![]);
    let action = ClassAction::new(&oc).unwrap();
    let mut r = rng(9);
    for _ in 0..50 {
        let ideal = action.sample_exponents(&mut r);
        let class = ideal.class(&oc).unwrap();
        for c in assigned_characters(&oc.disc) {
            assert_eq!(
                ideal.norm_character(&c).unwrap(),
                char_eval_class(&c, &class).unwrap()
            );
        }
        assert!(ideal.norm().bits() > 0);
    }
}

/// Exact distribution of the sampled class, by convolution over cl(O).
fn exact_distribution(action: &ClassAction) -> Vec<f64> {
    let g = action.group();
    let h = g.order();
    let mut dist = vec![0.0; h];
    dist[0] = 1.0;
    for s in action.steps().iter().filter(|s| s.canonical) {
        let mut next = vec![0.0; h];
        for e in -5i64..=5 {
            let f = crate::quadform::power(&s.form, e);
            for (x, p) in dist.iter().enumerate() {
                let y = g.index_of(&g.mul(&g.forms()[x], &f)).unwrap();
                next[y] += p / 11.0;
            }
        }
        dist = next;
    }
    dist
}

#[test]
fn class_sampler_is_near_uniform() {
    let mut r = rng(21);
    for oc in [
        gen_supersingular_instance(101).unwrap(),
        gen_supersingular_instance(1009).unwrap(),
        ordinary(13, vec![]),
    ] {
        let action = ClassAction::new(&oc).unwrap();
        let h = action.group().order();
        let dist = exact_distribution(&action);
        let tv: f64 = dist.iter().map(|p| (p - 1.0 / h as f64).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.05, "statistical distance {tv} for h = {h}");
        // Chi-squared goodness of fit of 10h samples against uniform.
        let n = 10 * h;
        let mut counts = vec![0usize; h];
        for _ in 0..n {
            let c = action.sample_class(&mut r);
            counts[action.group().index_of(&c).unwrap()] += 1;
        }
        let expected = n as f64 / h as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let dof = (h - 1) as f64;
        assert!(
            chi2 < dof + 4.0 * (2.0 * dof).sqrt() + 10.0,
            "chi2 = {chi2}, h = {h}"
        );
    }
}

#[test]
fn horizontal_isogenies_preserve_eigenvalues() {
    let oc = gen_supersingular_instance(101).unwrap();
    let action = ClassAction::new(&oc).unwrap();
    let s = action.steps().iter().min_by_key(|s| s.cost).unwrap();
    let img = apply_prime_ideal(&oc, s.ell, s.lambda).unwrap();
    for t in action.steps().iter().filter(|t| t.cost < 50_000) {
        // Each eigenvalue of sigma on E[l] is still realized on the codomain.
        let a = apply_prime_ideal(&img, t.ell, t.lambda).unwrap();
        assert_eq!(a.curve.trace(&a.tower).unwrap(), oc.frobenius_trace);
    }
}

#[test]
fn rejects_bad_ideals() {
    let oc = gen_supersingular_instance(101).unwrap();
    assert!(apply_prime_ideal(&oc, 101, 0).is_err());
    assert!(apply_prime_ideal(&oc, 2, 1).is_err());
    let inert = (3..50u64)
        .find(|&l| arith::is_prime(l) && arith::legendre(-101, l) == -1)
        .unwrap();
    assert!(apply_prime_ideal(&oc, inert, 1).is_err());
}

#[test]
fn json_round_trips() {
    let oc = ordinary(17, vec![]).shifted(2);
    let back = OrientedCurve::from_json(&oc.to_json()).unwrap();
    assert_eq!(back.curve, oc.curve);
    assert_eq!(back.shift, 2);
    assert_eq!(back.disc, oc.disc);
    let mut v = oc.to_json();
    v["trace"] = serde_json::json!("12345");
    assert!(OrientedCurve::from_json(&v).is_err());
    let ideal = SmoothIdeal {
        factors: vec![(3, 1, 2), (7, 4, -1)],
    };
    assert_eq!(SmoothIdeal::from_json(&ideal.to_json()).unwrap(), ideal);
}

#[test]
fn every_split_prime_acts() {
    for seed in 0..6 {
        let oc = ordinary(200 + seed, vec![]);
        let action = ClassAction::new(&oc).unwrap();
        for s in action.steps() {
            let image = apply_prime_ideal(&oc, s.ell, s.lambda).unwrap();
            assert_eq!(image.curve.trace(&image.tower).unwrap(), oc.frobenius_trace);
        }
    }
}
