//! The decisional Diffie-Hellman game for the class-group action and the
//! distinguisher that compares character values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::action::{apply_smooth_ideal, ClassAction, OrientedCurve, SmoothIdeal};
use crate::attack::CharacterProbe;
use crate::error::{Error, Result};
use crate::quadform::{char_eval_class, Character, ClassGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Dh,
    Random,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dh => "dh",
            Mode::Random => "random",
        }
    }
}

/// What the distinguisher is allowed to see.
#[derive(Clone, Debug)]
pub struct TripleView {
    pub base: OrientedCurve,
    pub t1: OrientedCurve,
    pub t2: OrientedCurve,
    pub t3: OrientedCurve,
}

/// The sampled ideals behind a triple. Only the experiment harness reads
/// these, to grade guesses and to cross-check against norm characters.
#[derive(Clone, Debug)]
pub struct HiddenData {
    mode: Mode,
    a: SmoothIdeal,
    b: SmoothIdeal,
    c: SmoothIdeal,
}

impl HiddenData {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The ideals a, b, c, with c = a b in dh mode.
    pub fn ideals(&self) -> [&SmoothIdeal; 3] {
        [&self.a, &self.b, &self.c]
    }

    /// Guess computed from chi(N(a)), chi(N(b)), chi(N(c)).
    pub fn oracle_guess(&self, chars: &[Character]) -> Result<Mode> {
        for chi in chars {
            let va = self.a.norm_character(chi)?;
            let vb = self.b.norm_character(chi)?;
            let vc = self.c.norm_character(chi)?;
            if vc != va * vb {
                return Ok(Mode::Random);
            }
        }
        Ok(Mode::Dh)
    }
}

#[derive(Clone, Debug)]
pub struct DdhTriple {
    pub view: TripleView,
    pub hidden: HiddenData,
}

/// Samples classes through a fixed [`ClassAction`], optionally restricted to
/// squares.
#[derive(Clone, Debug)]
pub struct TripleSampler {
    base: OrientedCurve,
    action: ClassAction,
    squares_only: bool,
}

impl TripleSampler {
    pub fn new(base: &OrientedCurve, squares_only: bool) -> Result<Self> {
        let action = ClassAction::new(base)?;
        if action.group().order() == 1 {
            return Err(Error::Infeasible(format!(
                "cl(O) is trivial for D = {}: dh and random triples coincide",
                base.disc.value()
            )));
        }
        Ok(TripleSampler {
            base: base.clone(),
            action,
            squares_only,
        })
    }

    pub fn group(&self) -> &ClassGroup {
        self.action.group()
    }

    fn sample_ideal<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SmoothIdeal> {
        let mut class = self.action.sample_class(rng);
        if self.squares_only {
            class = self.action.group().mul(&class, &class);
        }
        self.action.cheapest_ideal(&class)
    }

    pub fn sample<R: Rng + ?Sized>(&self, mode: Mode, rng: &mut R) -> Result<DdhTriple> {
        let a = self.sample_ideal(rng)?;
        let b = self.sample_ideal(rng)?;
        let t1 = apply_smooth_ideal(&self.base, &a)?;
        let t2 = apply_smooth_ideal(&self.base, &b)?;
        let (c, t3) = match mode {
            Mode::Dh => (a.product(&b, &self.base), apply_smooth_ideal(&t1, &b)?),
            Mode::Random => {
                let c = self.sample_ideal(rng)?;
                let t3 = apply_smooth_ideal(&self.base, &c)?;
                (c, t3)
            }
        };
        Ok(DdhTriple {
            view: TripleView {
                base: self.base.clone(),
                t1,
                t2,
                t3,
            },
            hidden: HiddenData { mode, a, b, c },
        })
    }
}

pub fn sample_triple<R: Rng + ?Sized>(
    base: &OrientedCurve,
    mode: Mode,
    squares_only: bool,
    rng: &mut R,
) -> Result<DdhTriple> {
    TripleSampler::new(base, squares_only)?.sample(mode, rng)
}

/// Character values chi([a]), chi([b]), chi([c]) for each character.
pub type Observation = Vec<[i8; 3]>;

/// Character probes prepared once on the base curve.
#[derive(Clone, Debug)]
pub struct Distinguisher {
    probes: Vec<CharacterProbe>,
}

impl Distinguisher {
    pub fn new<R: Rng + ?Sized>(
        base: &OrientedCurve,
        chars: &[Character],
        rng: &mut R,
    ) -> Result<Self> {
        let probes = chars
            .iter()
            .map(|&c| CharacterProbe::new(base, c, None, rng))
            .collect::<Result<_>>()?;
        Ok(Distinguisher { probes })
    }

    pub fn characters(&self) -> Vec<Character> {
        self.probes.iter().map(|p| p.character()).collect()
    }

    pub fn observe<R: Rng + ?Sized>(&self, view: &TripleView, rng: &mut R) -> Result<Observation> {
        self.probes
            .iter()
            .map(|p| {
                Ok([
                    p.eval(&view.t1, rng)?.value,
                    p.eval(&view.t2, rng)?.value,
                    p.eval(&view.t3, rng)?.value,
                ])
            })
            .collect()
    }

    /// Guesses dh iff chi([c]) = chi([a]) chi([b]) for every character.
    pub fn guess<R: Rng + ?Sized>(
        &self,
        view: &TripleView,
        rng: &mut R,
    ) -> Result<(Mode, Observation)> {
        let obs = self.observe(view, rng)?;
        let mode = if obs.iter().all(|v| v[2] == v[0] * v[1]) {
            Mode::Dh
        } else {
            Mode::Random
        };
        Ok((mode, obs))
    }
}

pub fn distinguish<R: Rng + ?Sized>(
    view: &TripleView,
    chars: &[Character],
    rng: &mut R,
) -> Result<Mode> {
    Ok(Distinguisher::new(&view.base, chars, rng)?
        .guess(view, rng)?
        .0)
}

/// Number of independent characters among `chars`, as the F_2-rank of their
/// value tables on cl(O).
pub fn independent_count(group: &ClassGroup, chars: &[Character]) -> Result<usize> {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let words = group.order().div_ceil(64);
    for chi in chars {
        let mut row = vec![0u64; words];
        for (i, f) in group.forms().iter().enumerate() {
            if char_eval_class(chi, f)? == -1 {
                row[i / 64] |= 1 << (i % 64);
            }
        }
        rows.push(row);
    }
    let mut rank = 0;
    for bit in 0..group.order() {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & mask != 0 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Wilson score interval for k successes out of n.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (n, p) = (n as f64, k as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Newcombe's interval for the difference p1 - p2 of two proportions.
pub fn difference_interval(k1: usize, n1: usize, k2: usize, n2: usize) -> (f64, f64) {
    let p1 = k1 as f64 / n1.max(1) as f64;
    let p2 = k2 as f64 / n2.max(1) as f64;
    let (l1, u1) = wilson_interval(k1, n1);
    let (l2, u2) = wilson_interval(k2, n2);
    let d = p1 - p2;
    (
        d - ((p1 - l1).powi(2) + (u2 - p2).powi(2)).sqrt(),
        d + ((u1 - p1).powi(2) + (p2 - l2).powi(2)).sqrt(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub index: usize,
    pub mode: Mode,
    pub guess: Mode,
    pub oracle_guess: Mode,
    pub observation: Observation,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub chars: Vec<Character>,
    pub seed: u64,
    pub squares_only: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub class_number: usize,
    pub independent: usize,
    /// counts[mode][guess], with dh = 0 and random = 1.
    pub counts: [[usize; 2]; 2],
    pub oracle_mismatches: usize,
    pub records: Vec<TrialRecord>,
}

impl ExperimentReport {
    fn mode_total(&self, mode: usize) -> usize {
        self.counts[mode][0] + self.counts[mode][1]
    }

    pub fn false_negatives(&self) -> usize {
        self.counts[0][1]
    }

    pub fn success_rate(&self) -> f64 {
        let right = self.counts[0][0] + self.counts[1][1];
        right as f64 / self.records.len().max(1) as f64
    }

    /// P[guess = dh | dh] - P[guess = dh | random].
    pub fn advantage(&self) -> f64 {
        let p1 = self.counts[0][0] as f64 / self.mode_total(0).max(1) as f64;
        let p2 = self.counts[1][0] as f64 / self.mode_total(1).max(1) as f64;
        p1 - p2
    }

    pub fn advantage_interval(&self) -> (f64, f64) {
        difference_interval(
            self.counts[0][0],
            self.mode_total(0),
            self.counts[1][0],
            self.mode_total(1),
        )
    }

    pub fn expected_advantage(&self) -> f64 {
        1.0 - 0.5f64.powi(self.independent as i32)
    }

    pub fn to_json(&self) -> Value {
        let (lo, hi) = self.advantage_interval();
        let rate = |mode: usize, guess: usize| {
            let (l, u) = wilson_interval(self.counts[mode][guess], self.mode_total(mode));
            json!({
                "count": self.counts[mode][guess].to_string(),
                "rate": self.counts[mode][guess] as f64 / self.mode_total(mode).max(1) as f64,
                "ci95": [l, u],
            })
        };
        json!({
            "trials": self.records.len().to_string(),
            "seed": self.config.seed.to_string(),
            "chars": self.config.chars.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "squares_only": self.config.squares_only,
            "class_number": self.class_number.to_string(),
            "independent_characters": self.independent.to_string(),
            "confusion": {
                "dh": {"guess_dh": rate(0, 0), "guess_random": rate(0, 1)},
                "random": {"guess_dh": rate(1, 0), "guess_random": rate(1, 1)},
            },
            "false_negatives": self.false_negatives().to_string(),
            "success_rate": self.success_rate(),
            "advantage": self.advantage(),
            "advantage_ci95": [lo, hi],
            "expected_advantage": self.expected_advantage(),
            "oracle_mismatches": self.oracle_mismatches.to_string(),
        })
    }

    /// Rows of (trial, mode, guess, oracle, then chi values a, b, c per
    /// character).
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut header = vec!["trial", "mode", "guess", "oracle"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        for c in &self.config.chars {
            for s in ["a", "b", "c"] {
                header.push(format!("{c}_{s}"));
            }
        }
        let mut rows = vec![header];
        for r in &self.records {
            let mut row = vec![
                r.index.to_string(),
                r.mode.as_str().into(),
                r.guess.as_str().into(),
                r.oracle_guess.as_str().into(),
            ];
            for v in &r.observation {
                row.extend(v.iter().map(|x| x.to_string()));
            }
            rows.push(row);
        }
        rows
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Balanced experiment: even trials are dh, odd trials random. Trial i uses
/// stream i of the seeded generator, so the report depends only on the
/// inputs.
pub fn run_experiment(base: &OrientedCurve, config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one trial is needed".into(),
        ));
    }
    let sampler = TripleSampler::new(base, config.squares_only)?;
    let distinguisher =
        Distinguisher::new(base, &config.chars, &mut trial_rng(config.seed, u64::MAX))?;
    let independent = independent_count(sampler.group(), &config.chars)?;
    let records = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, i as u64);
            let mode = if i % 2 == 0 { Mode::Dh } else { Mode::Random };
            let triple = sampler.sample(mode, &mut rng)?;
            let (guess, observation) = distinguisher.guess(&triple.view, &mut rng)?;
            Ok(TrialRecord {
                index: i,
                mode,
                guess,
                oracle_guess: triple.hidden.oracle_guess(&config.chars)?,
                observation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = [[0usize; 2]; 2];
    let mut oracle_mismatches = 0;
    for r in &records {
        counts[(r.mode == Mode::Random) as usize][(r.guess == Mode::Random) as usize] += 1;
        oracle_mismatches += (r.guess != r.oracle_guess) as usize;
    }
    Ok(ExperimentReport {
        config: config.clone(),
        class_number: sampler.group().order(),
        independent,
        counts,
        oracle_mismatches,
        records,
    })
}

#[cfg(test)]
mod tests;
