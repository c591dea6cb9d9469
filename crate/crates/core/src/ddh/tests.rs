use super::*;
use crate::action::{gen_ordinary_instance, gen_supersingular_instance, OrdinaryQuery};
use crate::elliptic::Curve;
use crate::field::FieldTower;
use std::sync::Arc;

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
fn dh_triples_compose() {
    let base = gen_supersingular_instance(101).unwrap();
    let sampler = TripleSampler::new(&base, false).unwrap();
    let mut r = rng(1);
    for _ in 0..4 {
        let triple = sampler.sample(Mode::Dh, &mut r).unwrap();
        let [a, b, c] = triple.hidden.ideals();
        assert_eq!(*c, a.product(b, &base));
        let direct = apply_smooth_ideal(&base, c).unwrap();
        assert!(direct.is_isomorphic(&triple.view.t3));
        assert_eq!(a.norm() * b.norm() % 4u32, c.norm() % 4u32);
        assert_eq!(
            triple.hidden.oracle_guess(&[Character::Delta]).unwrap(),
            Mode::Dh
        );
    }
}

#[test]
fn trivial_class_group_is_rejected() {
    // Over F_5 a curve of trace 3 has D = 11 and h = 1.
    let t = Arc::new(FieldTower::prime(5).unwrap());
    let curve = (0..5)
        .flat_map(|a| (0..5).map(move |b| (a, b)))
        .filter_map(|(a, b)| Curve::from_u64(&t, a, b).ok())
        .find(|e| e.trace(&t).unwrap() == 3)
        .unwrap();
    let base = OrientedCurve::new(t, curve, 0).unwrap();
    assert_eq!(base.disc.value(), 11);
    let err = sample_triple(&base, Mode::Random, false, &mut rng(0)).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)));
}

#[test]
fn small_experiment_is_exact_and_deterministic() {
    let base = gen_supersingular_instance(101).unwrap();
    let config = ExperimentConfig {
        trials: 40,
        chars: vec![Character::Delta],
        seed: 9,
        squares_only: false,
    };
    let report = run_experiment(&base, &config).unwrap();
    assert_eq!(report.independent, 1);
    assert_eq!(report.false_negatives(), 0);
    assert_eq!(report.oracle_mismatches, 0);
    assert_eq!(report.counts[0][0], 20);
    let again = run_experiment(&base, &config).unwrap();
    assert_eq!(report.to_json().to_string(), again.to_json().to_string());
    assert_eq!(report.records, again.records);
}

#[test]
fn squares_carry_no_information() {
    let base = ordinary(4, vec![Character::Chi(3)]);
    let config = ExperimentConfig {
        trials: 30,
        chars: vec![Character::Chi(3)],
        seed: 2,
        squares_only: true,
    };
    let report = run_experiment(&base, &config).unwrap();
    assert_eq!(report.counts[1][0], 15);
    assert_eq!(report.advantage(), 0.0);
    let (lo, hi) = report.advantage_interval();
    assert!(lo < 0.0 && hi >= 0.0);
}

#[test]
fn distinguisher_reads_only_the_view() {
    let base = gen_supersingular_instance(13).unwrap();
    let triple = sample_triple(&base, Mode::Dh, false, &mut rng(3)).unwrap();
    assert_eq!(
        distinguish(&triple.view, &[Character::Delta], &mut rng(4)).unwrap(),
        Mode::Dh
    );
}

#[test]
fn independence_rank() {
    let base = gen_supersingular_instance(101).unwrap();
    let group = ClassGroup::enumerate(&base.disc).unwrap();
    assert_eq!(independent_count(&group, &[Character::Delta]).unwrap(), 1);
    // delta and chi_101 agree on cl(O).
    let both = [Character::Delta, Character::Chi(101)];
    assert_eq!(independent_count(&group, &both).unwrap(), 1);
}

#[test]
fn intervals() {
    let (lo, hi) = wilson_interval(5, 10);
    assert!((lo + hi - 1.0).abs() < 1e-12);
    assert!((lo - 0.2366).abs() < 1e-3);
    assert_eq!(wilson_interval(0, 10).0, 0.0);
    let (lo, hi) = difference_interval(250, 250, 125, 250);
    assert!(lo < 0.5 && hi > 0.5 && hi - lo < 0.15);
}
