use super::*;
use proptest::prelude::*;

fn disc(d: u64) -> Discriminant {
    Discriminant::new(d).unwrap()
}

fn group(d: u64) -> ClassGroup {
    ClassGroup::enumerate(&disc(d)).unwrap()
}

/// Reduced primitive forms by a direct scan over (a, b) with no shortcuts.
fn brute_force_forms(d: i64) -> Vec<QuadForm> {
    let mut out = Vec::new();
    for a in 1..=d {
        for b in -a..=a {
            if (b * b + d) % (4 * a) == 0 {
                let f = QuadForm::new(a, b, (b * b + d) / (4 * a));
                if f.is_reduced() && f.is_primitive() {
                    out.push(f);
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn discriminant_validation() {
    assert!(Discriminant::new(0).is_err());
    assert!(Discriminant::new(5).is_err());
    assert!(Discriminant::new(6).is_err());
    let d = disc(96);
    assert_eq!((d.two_adic(), d.odd_part()), (5, 3));
    assert!(Discriminant::with_factors(20, vec![(2, 2), (5, 1)]).is_ok());
    assert!(Discriminant::with_factors(20, vec![(2, 1), (5, 1)]).is_err());
    assert!(Discriminant::with_factors(20, vec![(4, 1), (5, 1)]).is_err());
    assert!(disc(20).is_fundamental());
    assert!(!disc(12).is_fundamental());
    assert!(disc(8).is_fundamental());
    assert!(!disc(36).is_fundamental());
    let back = Discriminant::from_json(&d.to_json()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn reduction_examples() {
    for d in [3u64, 4, 7, 20, 23, 1000] {
        let p = QuadForm::principal(d);
        assert_eq!(reduce_form(p).unwrap(), p);
    }
    assert_eq!(
        reduce_form(QuadForm::new(2, 2, 3)).unwrap(),
        QuadForm::new(2, 2, 3)
    );
    assert_eq!(
        reduce_form(QuadForm::new(4, 5, 3)).unwrap(),
        QuadForm::new(2, -1, 3)
    );
    assert!(reduce_form(QuadForm::new(1, 3, 1)).is_err());
    assert!(reduce_form(QuadForm::new(-1, 0, -1)).is_err());
}

#[test]
fn composition_examples() {
    let g = QuadForm::new(2, 1, 3);
    assert_eq!(compose(&g, &g).unwrap(), QuadForm::new(2, -1, 3));
    assert_eq!(compose(&g, &g.inverse()).unwrap(), QuadForm::principal(23));
    assert!(compose(&g, &QuadForm::new(2, 2, 3)).is_err());
    assert_eq!(power(&g, 3), QuadForm::principal(23));
    assert_eq!(power(&g, -1), g.inverse());
}

#[test]
fn enumeration_examples() {
    assert_eq!(group(3).forms(), &[QuadForm::new(1, 1, 1)]);
    assert_eq!(
        group(15).forms(),
        &[QuadForm::new(1, 1, 4), QuadForm::new(2, 1, 2)]
    );
    assert_eq!(
        group(23).forms(),
        &[
            QuadForm::new(1, 1, 6),
            QuadForm::new(2, 1, 3),
            QuadForm::new(2, -1, 3)
        ]
    );
    assert_eq!(group(12).order(), 1);
    assert!(ClassGroup::enumerate(&disc(MAX_ENUMERATION_D + 4)).is_err());
    for d in (3..400u64).filter(|d| d % 4 == 0 || d % 4 == 3) {
        let mut got = group(d).forms().to_vec();
        got.sort();
        assert_eq!(got, brute_force_forms(d as i64), "D = {d}");
    }
}

#[test]
fn group_axioms_by_tables() {
    for d in (3..=5000u64)
        .filter(|d| d % 4 == 0 || d % 4 == 3)
        .step_by(7)
    {
        let g = group(d);
        let h = g.order();
        let table: Vec<Vec<usize>> = g
            .forms()
            .iter()
            .map(|x| {
                g.forms()
                    .iter()
                    .map(|y| g.index_of(&compose(x, y).unwrap()).unwrap())
                    .collect()
            })
            .collect();
        for i in 0..h {
            assert_eq!(table[0][i], i);
            assert!(table[i].contains(&0));
            let mut row = table[i].clone();
            row.sort_unstable();
            assert_eq!(row, (0..h).collect::<Vec<_>>());
            for j in 0..h {
                assert_eq!(table[i][j], table[j][i]);
                for k in (0..h).step_by(1 + h / 8) {
                    assert_eq!(table[table[i][j]][k], table[i][table[j][k]]);
                }
            }
        }
    }
}

#[test]
fn assigned_character_table() {
    let list = |d| assigned_characters(&disc(d));
    assert_eq!(list(4 * 13), vec![Character::Chi(13), Character::Delta]);
    assert_eq!(list(4 * 7), vec![Character::Chi(7)]);
    assert_eq!(
        list(96),
        vec![Character::Chi(3), Character::Delta, Character::Epsilon]
    );
    assert_eq!(list(8 * 3), vec![Character::Chi(3), Character::Epsilon]);
    assert_eq!(
        list(8 * 5),
        vec![Character::Chi(5), Character::DeltaEpsilon]
    );
    assert_eq!(list(16 * 3), vec![Character::Chi(3), Character::Delta]);
    assert_eq!(list(23), vec![Character::Chi(23)]);
}

#[test]
fn norm_characters() {
    for c in [
        Character::Chi(5),
        Character::Delta,
        Character::Epsilon,
        Character::DeltaEpsilon,
    ] {
        assert_eq!(char_eval_norm(&c, 1).unwrap(), 1);
    }
    assert_eq!(char_eval_norm(&Character::Delta, 3).unwrap(), -1);
    assert_eq!(char_eval_norm(&Character::Epsilon, 3).unwrap(), -1);
    assert_eq!(char_eval_norm(&Character::DeltaEpsilon, 3).unwrap(), 1);
    assert_eq!(char_eval_norm(&Character::Chi(5), 3).unwrap(), -1);
    assert!(char_eval_norm(&Character::Delta, 6).is_err());
    assert!(char_eval_norm(&Character::Chi(5), 10).is_err());
    // Direct formulas, odd n.
    for n in (1..200i64).step_by(2) {
        let delta = if ((n - 1) / 2) % 2 == 0 { 1 } else { -1 };
        let eps = if ((n * n - 1) / 8) % 2 == 0 { 1 } else { -1 };
        let de = if (((n + 2) * (n + 2) - 9) / 8) % 2 == 0 {
            1
        } else {
            -1
        };
        assert_eq!(Character::Delta.eval_unit(n), delta);
        assert_eq!(Character::Epsilon.eval_unit(n), eps);
        assert_eq!(Character::DeltaEpsilon.eval_unit(n), de);
        assert_eq!(de, delta * eps);
    }
}

#[test]
fn class_character_examples() {
    let g = QuadForm::new(2, 2, 3);
    assert_eq!(char_eval_class(&Character::Chi(5), &g).unwrap(), -1);
    assert_eq!(char_eval_class(&Character::Delta, &g).unwrap(), -1);
    assert_eq!(
        char_eval_class(&Character::Chi(5), &QuadForm::principal(20)).unwrap(),
        1
    );
    assert!(verify_character_relation(&disc(20)).unwrap());
    assert!(verify_character_relation(&disc(3)).unwrap());
    for p in [13u64, 17, 29, 37, 41] {
        let g = group(4 * p);
        for f in g.forms() {
            let a = char_eval_class(&Character::Delta, f).unwrap();
            assert_eq!(a, char_eval_class(&Character::Chi(p), f).unwrap());
        }
        assert!(g
            .forms()
            .iter()
            .any(|f| char_eval_class(&Character::Delta, f).unwrap() == -1));
    }
}

#[test]
fn well_defined_on_classes() {
    for d in [20u64, 84, 96, 120, 195, 260, 420, 1155] {
        let g = group(d);
        for f in g.forms() {
            for c in assigned_characters(&disc(d)) {
                let mut seen = Vec::new();
                for x in -6i64..=6 {
                    for y in 0..=6i64 {
                        let n = f.eval(x, y);
                        if n > 0 && arith::gcd_i64(n, 2 * d as i64) == 1 {
                            seen.push(char_eval_norm(&c, n).unwrap());
                        }
                    }
                }
                assert!(seen.len() >= 10, "D = {d}, {f}");
                assert!(seen.iter().all(|&v| v == seen[0]), "D = {d}, {f}, {c}");
            }
        }
    }
}

#[test]
fn two_torsion_and_roots() {
    let g = group(23);
    let (basis, root) = two_torsion_and_sqrt(&g, &g.principal()).unwrap();
    assert!(basis.is_empty());
    assert_eq!(root, Some(g.principal()));
    for f in g.forms() {
        assert_eq!(g.square_roots(f).len(), 1);
    }
    let g = group(20);
    let (basis, _) = two_torsion_and_sqrt(&g, &g.principal()).unwrap();
    assert_eq!(basis.len(), 1);
    let (_, none) = two_torsion_and_sqrt(&g, &QuadForm::new(2, 2, 3)).unwrap();
    assert!(none.is_none());
    for d in [420u64, 1155, 5460] {
        let g = group(d);
        let mu = assigned_characters(&disc(d)).len();
        let (basis, _) = two_torsion_and_sqrt(&g, &g.principal()).unwrap();
        assert_eq!(1usize << basis.len(), g.two_torsion().len());
        assert_eq!(basis.len(), mu - 1);
        let mut span = span_of(&basis, d);
        span.sort();
        let mut all = g.two_torsion();
        all.sort();
        assert_eq!(span, all);
    }
}

#[test]
fn prime_ideal_forms() {
    // sigma = Frobenius on a trace-0 curve over F_13: x^2 + 13.
    let d = 52;
    for ell in [3u64, 7, 11, 17] {
        for lambda in 0..ell {
            let ok = (lambda * lambda + 13) % ell == 0;
            let f = prime_ideal_form(d, ell, 0, lambda);
            assert_eq!(f.is_ok(), ok);
            if let Ok(f) = f {
                assert_eq!(f.discriminant(), -(d as i64));
                let conj = prime_ideal_form(d, ell, 0, (ell - lambda) % ell).unwrap();
                assert_eq!(compose(&f, &conj).unwrap(), QuadForm::principal(d));
            }
        }
    }
}

#[test]
fn form_json() {
    let f = QuadForm::new(2, -1, 3);
    assert_eq!(QuadForm::from_json(&f.to_json()).unwrap(), f);
    assert_eq!(
        QuadForm::from_json(&serde_json::json!([2, -1, 3])).unwrap(),
        f
    );
    assert!(QuadForm::from_json(&serde_json::json!([2, 1])).is_err());
    for c in [
        Character::Chi(7),
        Character::Delta,
        Character::Epsilon,
        Character::DeltaEpsilon,
    ] {
        assert_eq!(Character::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.to_string().parse::<Character>().unwrap(), c);
    }
    assert!("chi_9".parse::<Character>().is_err());
}

fn arb_disc() -> impl Strategy<Value = u64> {
    (3u64..5000).prop_filter("discriminant", |d| d % 4 == 0 || d % 4 == 3)
}

proptest! {
    #[test]
    fn reduction_is_idempotent_and_invariant(d in arb_disc(), i in 0usize..64, k in -5i64..5) {
        let g = group(d);
        let f = g.forms()[i % g.order()];
        // Apply x -> x + k y, then swap, to get an equivalent unreduced form.
        let moved = QuadForm::new(f.a, f.b + 2 * k * f.a, f.a * k * k + f.b * k + f.c);
        let swapped = QuadForm::new(moved.c, -moved.b, moved.a);
        prop_assert_eq!(reduce_form(moved).unwrap(), f);
        prop_assert_eq!(reduce_form(swapped).unwrap(), f);
        prop_assert_eq!(reduce_form(f).unwrap(), f);
    }

    #[test]
    fn characters_are_homomorphisms(d in arb_disc(), i in 0usize..64, j in 0usize..64) {
        let g = group(d);
        let (x, y) = (g.forms()[i % g.order()], g.forms()[j % g.order()]);
        let xy = compose(&x, &y).unwrap();
        for c in assigned_characters(&disc(d)) {
            let lhs = char_eval_class(&c, &xy).unwrap();
            prop_assert_eq!(lhs, char_eval_class(&c, &x).unwrap() * char_eval_class(&c, &y).unwrap());
            prop_assert_eq!(char_eval_class(&c, &compose(&x, &x).unwrap()).unwrap(), 1);
        }
    }

    #[test]
    fn relation_holds(d in arb_disc()) {
        prop_assert!(verify_character_relation(&disc(d)).unwrap());
    }
}
