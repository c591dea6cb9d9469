use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use genus_weil::action::{
    apply_smooth_ideal, character_inventory, gen_ordinary_instance, gen_supersingular_instance,
    random_smooth_class, ClassAction, OrdinaryQuery, OrientedCurve,
};
use genus_weil::arith;
use genus_weil::attack::{eval_all_characters, eval_character, CharEvalResult};
use genus_weil::ddh::{independent_count, run_experiment, ExperimentConfig};
use genus_weil::field::parse_decimal;
use genus_weil::quadform::{assigned_characters, Character, ClassGroup, QuadForm};
use genus_weil::selftest::{run_selftest, Fault};
use genus_weil::sqrt_disambiguation::{recover_root, RecoverOptions};
use genus_weil::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{read_json, Common, Failure, FaultArg, Outcome};

fn config_u64(config: &Value, key: &str) -> Result<Option<u64>, Failure> {
    match config.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => Ok(Some(parse_decimal(v)?)),
    }
}

fn config_bool(config: &Value, key: &str) -> bool {
    config.get(key).and_then(Value::as_bool).unwrap_or(false)
}

fn seed_of(common: &Common, config: &Value) -> Result<u64, Failure> {
    Ok(match common.seed {
        Some(s) => s,
        None => config_u64(config, "seed")?.unwrap_or(0),
    })
}

fn parse_char_list(list: &str) -> Result<Vec<Character>, Failure> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Character::from_str(s).map_err(Failure::from))
        .collect()
}

fn config_chars(config: &Value) -> Result<Option<Vec<Character>>, Failure> {
    let Some(list) = config.get("chars").and_then(Value::as_array) else {
        return Ok(None);
    };
    list.iter()
        .map(|c| match c {
            Value::String(s) => Character::from_str(s).map_err(Failure::from),
            other => Character::from_json(other).map_err(Failure::from),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn chars_of(flag: &Option<String>, config: &Value) -> Result<Option<Vec<Character>>, Failure> {
    match flag {
        Some(list) => parse_char_list(list).map(Some),
        None => config_chars(config),
    }
}

fn instance_of(config: &Value) -> Result<OrientedCurve, Failure> {
    let v = config
        .get("instance")
        .ok_or_else(|| Failure::usage("the config has no \"instance\" entry"))?;
    Ok(OrientedCurve::from_json(v)?)
}

fn load(path: &Option<PathBuf>) -> Result<Value, Failure> {
    match path {
        Some(p) => read_json(p),
        None => Ok(json!({})),
    }
}

fn sign(v: i8) -> &'static str {
    if v > 0 {
        "+1"
    } else {
        "-1"
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// JSON parameters: {"mode": "supersingular", "p"} or {"mode": "ordinary",
    /// "q_min", "q_max", "chars", "max_extension", "two_rank", "budget"}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Supersingular instance over F_p with sigma = pi_p.
    #[arg(long, value_name = "P", conflicts_with = "ordinary")]
    supersingular: Option<u64>,
    /// Random ordinary instance with sigma = pi_q.
    #[arg(long)]
    ordinary: bool,
    #[arg(long)]
    q_min: Option<u64>,
    #[arg(long)]
    q_max: Option<u64>,
    /// Characters the instance must admit, e.g. chi_3,delta.
    #[arg(long)]
    chars: Option<String>,
    /// Largest allowed degree of the field of definition of E[m].
    #[arg(long)]
    max_extension: Option<u64>,
    /// Required rank of cl(O)[2].
    #[arg(long)]
    two_rank: Option<u32>,
    /// Number of random curves to try.
    #[arg(long)]
    budget: Option<usize>,
    /// Also apply a random ideal and record the target curve with the
    /// expected character values.
    #[arg(long)]
    plant: bool,
}

pub fn gen_instance(args: &GenArgs, common: &Common) -> Result<Outcome, Failure> {
    let config = load(&args.config)?;
    let seed = seed_of(common, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mode = if args.supersingular.is_some() {
        "supersingular"
    } else if args.ordinary {
        "ordinary"
    } else {
        config.get("mode").and_then(Value::as_str).unwrap_or("")
    };
    let oc = match mode {
        "supersingular" => {
            let p = match args.supersingular {
                Some(p) => p,
                None => config_u64(&config, "p")?
                    .ok_or_else(|| Failure::usage("supersingular mode needs p"))?,
            };
            gen_supersingular_instance(p)?
        }
        "ordinary" => {
            let d = OrdinaryQuery::default();
            let pick = |flag: Option<u64>, key: &str, default: u64| -> Result<u64, Failure> {
                Ok(flag.or(config_u64(&config, key)?).unwrap_or(default))
            };
            let query = OrdinaryQuery {
                q_min: pick(args.q_min, "q_min", d.q_min)?,
                q_max: pick(args.q_max, "q_max", d.q_max)?,
                required: chars_of(&args.chars, &config)?.unwrap_or_default(),
                m_max: pick(None, "m_max", d.m_max)?,
                max_extension: args.max_extension.or(config_u64(&config, "max_extension")?),
                two_rank: args
                    .two_rank
                    .or(config_u64(&config, "two_rank")?.map(|r| r as u32)),
                cheap_primes_up_to: config_u64(&config, "cheap_primes_up_to")?,
                budget: pick(args.budget.map(|b| b as u64), "budget", d.budget as u64)? as usize,
            };
            gen_ordinary_instance(&query, &mut rng)?
        }
        _ => {
            return Err(Failure::usage(
                "choose --supersingular P, --ordinary, or a config with \"mode\"",
            ))
        }
    };
    let inventory = character_inventory(&oc)?;
    let mut out = json!({
        "seed": seed.to_string(),
        "instance": oc.to_json(),
        "inventory": inventory.to_json(),
    });
    let mut table = String::new();
    writeln!(table, "q          {}", oc.q()).unwrap();
    writeln!(table, "curve      {}", oc.curve.to_json(&oc.tower)).unwrap();
    writeln!(
        table,
        "sigma      pi + {} (trace {}, norm {})",
        oc.shift,
        oc.sigma_trace(),
        oc.sigma_norm()
    )
    .unwrap();
    writeln!(table, "D          {}", oc.disc.value()).unwrap();
    let names = |v: &[Character]| {
        v.iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    writeln!(table, "assigned   {}", names(&inventory.assigned)).unwrap();
    writeln!(table, "usable     {}", names(&inventory.usable)).unwrap();
    if args.plant || config_bool(&config, "plant") {
        let ideal = random_smooth_class(&oc, &mut rng)?;
        let target = apply_smooth_ideal(&oc, &ideal)?;
        let mut oracle = serde_json::Map::new();
        for chi in assigned_characters(&oc.disc) {
            if arith::gcd(chi.modulus(), oc.q()) == 1 {
                oracle.insert(chi.to_string(), json!(ideal.norm_character(&chi)?));
            }
        }
        writeln!(table, "target     {}", target.curve.to_json(&target.tower)).unwrap();
        writeln!(table, "ideal norm {}", ideal.norm()).unwrap();
        out["target"] = target.to_json();
        out["ideal"] = ideal.to_json();
        out["class"] = ideal.class(&oc)?.to_json();
        out["oracle"] = Value::Object(oracle);
    }
    Ok(Outcome {
        json: out,
        table,
        exit: 0,
    })
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Pair file with "instance" and "target" (as written by gen-instance
    /// --plant).
    #[arg(long)]
    config: PathBuf,
    /// Characters to evaluate; defaults to every usable one.
    #[arg(long)]
    chars: Option<String>,
    /// Largest modulus considered when --chars is not given.
    #[arg(long, default_value_t = 50)]
    max_modulus: u64,
}

pub fn eval_char(args: &EvalArgs, common: &Common) -> Result<Outcome, Failure> {
    let config = read_json(&args.config)?;
    let seed = seed_of(common, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = instance_of(&config)?;
    let target = OrientedCurve::from_json(
        config
            .get("target")
            .ok_or_else(|| Failure::usage("the pair file has no \"target\" entry"))?,
    )?;
    let results: Vec<(Character, Result<CharEvalResult, Error>)> =
        match chars_of(&args.chars, &config)? {
            Some(chars) => chars
                .into_iter()
                .map(|c| (c, eval_character(&base, &target, c, &mut rng)))
                .collect(),
            None => eval_all_characters(&base, &target, args.max_modulus, &mut rng)?,
        };
    let mut entries = Vec::new();
    let mut table = String::new();
    let mut exit = 0;
    for (chi, res) in results {
        let oracle = config
            .get("oracle")
            .and_then(|o| o.get(chi.to_string()))
            .and_then(Value::as_i64);
        match res {
            Ok(r) => {
                let mut entry = r.to_json();
                let mut line = format!(
                    "{:<14} {}  a = {}  r = {}",
                    chi.to_string(),
                    sign(r.value),
                    r.dlog_a,
                    r.extension_degree
                );
                if let Some(o) = oracle {
                    entry["oracle"] = json!(o);
                    entry["matches_oracle"] = json!(o == r.value as i64);
                    write!(line, "  oracle {}", sign(o as i8)).unwrap();
                }
                writeln!(table, "{line}").unwrap();
                entries.push(entry);
            }
            Err(e) => {
                let failure = Failure::from(e.clone());
                exit = exit.max(failure.code);
                let (step, reason) = match &e {
                    Error::Attack { step, reason } => (step.clone(), reason.clone()),
                    other => ("internal".to_string(), other.to_string()),
                };
                eprintln!("error: {chi}: {e}");
                writeln!(table, "{:<14} failed at {step}: {reason}", chi.to_string()).unwrap();
                entries.push(json!({
                    "char": chi.to_json(),
                    "error": {"step": step, "reason": reason},
                }));
            }
        }
    }
    Ok(Outcome {
        json: json!({"seed": seed.to_string(), "results": entries}),
        table,
        exit,
    })
}

#[derive(Args, Debug)]
pub struct DdhArgs {
    /// {"instance": ..., "trials", "seed", "chars", "squares_only"}; an
    /// instance file from gen-instance also works.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    chars: Option<String>,
    /// Sample only square classes.
    #[arg(long)]
    squares_only: bool,
    /// Per-trial log.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn ddh_experiment(args: &DdhArgs, common: &Common) -> Result<Outcome, Failure> {
    let config = read_json(&args.config)?;
    let base = instance_of(&config)?;
    let chars = match chars_of(&args.chars, &config)? {
        Some(c) => c,
        None => character_inventory(&base)?.independent,
    };
    let group = ClassGroup::enumerate(&base.disc)?;
    if group.order() == 1 {
        return Err(Failure::usage(format!(
            "cl(O) is trivial for D = {}",
            base.disc.value()
        )));
    }
    if chars.is_empty() || independent_count(&group, &chars)? == 0 {
        return Err(Failure::usage(
            "no nontrivial character to distinguish with",
        ));
    }
    let experiment = ExperimentConfig {
        trials: match args.trials {
            Some(n) => n,
            None => config_u64(&config, "trials")?.unwrap_or(500) as usize,
        },
        chars,
        seed: seed_of(common, &config)?,
        squares_only: args.squares_only || config_bool(&config, "squares_only"),
    };
    let report = run_experiment(&base, &experiment)?;
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
        for row in report.csv_rows() {
            w.write_record(&row)
                .map_err(|e| Failure::usage(e.to_string()))?;
        }
        w.flush().map_err(|e| Failure::usage(e.to_string()))?;
    }
    let mut table = String::new();
    let c = report.counts;
    let (lo, hi) = report.advantage_interval();
    writeln!(
        table,
        "trials {}  h = {}  independent characters {}{}",
        report.records.len(),
        report.class_number,
        report.independent,
        if experiment.squares_only {
            "  (squares only)"
        } else {
            ""
        }
    )
    .unwrap();
    writeln!(table, "mode      guess dh  guess random  accuracy").unwrap();
    for (i, name) in ["dh", "random"].iter().enumerate() {
        let total = (c[i][0] + c[i][1]).max(1) as f64;
        writeln!(
            table,
            "{:<9} {:>8}  {:>12}  {:>8.3}",
            name,
            c[i][0],
            c[i][1],
            c[i][i] as f64 / total
        )
        .unwrap();
    }
    writeln!(
        table,
        "advantage {:.3}  95% CI [{:.3}, {:.3}]  expected {:.3}",
        report.advantage(),
        lo,
        hi,
        report.expected_advantage()
    )
    .unwrap();
    writeln!(
        table,
        "false negatives {}  oracle mismatches {}",
        report.false_negatives(),
        report.oracle_mismatches
    )
    .unwrap();
    Ok(Outcome {
        json: report.to_json(),
        table,
        exit: 0,
    })
}

#[derive(Args, Debug)]
pub struct SqrtArgs {
    /// {"instance", "target", "c_squared", "bound"}; without a target, a
    /// random class is planted from the seed.
    #[arg(long)]
    config: PathBuf,
    /// Bound B on the filtering primes; defaults to the automatic choice.
    #[arg(long)]
    bound: Option<u64>,
    /// Also filter with the 2-adic characters.
    #[arg(long)]
    two_adic: bool,
}

pub fn sqrt_recover(args: &SqrtArgs, common: &Common) -> Result<Outcome, Failure> {
    let config = read_json(&args.config)?;
    let seed = seed_of(common, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = instance_of(&config)?;
    let (target, square, planted) = match config.get("target") {
        Some(t) => {
            let target = OrientedCurve::from_json(t)?;
            match (config.get("c_squared"), config.get("class")) {
                (Some(sq), _) => (target, QuadForm::from_json(sq)?, None),
                (None, Some(c)) => {
                    let c = QuadForm::from_json(c)?;
                    let group = ClassGroup::enumerate(&base.disc)?;
                    (
                        target,
                        group.mul(&c, &c),
                        Some(group.mul(&c, &group.principal())),
                    )
                }
                (None, None) => {
                    return Err(Failure::usage(
                        "a target needs \"c_squared\" or the planted \"class\"",
                    ))
                }
            }
        }
        None => {
            let action = ClassAction::new(&base)?;
            let c = action.sample_class(&mut rng);
            let target = apply_smooth_ideal(&base, &action.cheapest_ideal(&c)?)?;
            (target, action.group().mul(&c, &c), Some(c))
        }
    };
    let bound = match args.bound {
        Some(b) => Some(b),
        None => match config.get("bound") {
            Some(Value::String(s)) if s == "auto" => None,
            _ => config_u64(&config, "bound")?,
        },
    };
    let options = RecoverOptions {
        bound,
        use_two_adic: args.two_adic || config_bool(&config, "two_adic"),
    };
    let rec = recover_root(&base, &target, &square, &options, &mut rng)?;
    let mut out = rec.to_json();
    out["seed"] = json!(seed.to_string());
    let mut table = String::new();
    writeln!(table, "D                  {}", base.disc.value()).unwrap();
    writeln!(table, "[c]^2              {square}").unwrap();
    writeln!(table, "B                  {}", rec.bound).unwrap();
    writeln!(
        table,
        "P1                 {}",
        rec.p1
            .iter()
            .map(|(l, v)| format!("{l}:{}", sign(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    writeln!(table, "P2                 {:?}", rec.p2).unwrap();
    writeln!(table, "#G                 {}", rec.residual_group_size).unwrap();
    writeln!(table, "candidates tested  {}", rec.candidates_tested).unwrap();
    writeln!(table, "recovered          {}", rec.recovered).unwrap();
    if let Some(c) = planted {
        out["planted"] = c.to_json();
        out["correct"] = json!(c == rec.recovered);
        writeln!(table, "planted            {c}").unwrap();
    }
    Ok(Outcome {
        json: out,
        table,
        exit: 0,
    })
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Deliberately break a component to see the suite catch it.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Vec<FaultArg>,
}

pub fn selftest(args: &SelftestArgs, common: &Common) -> Result<Outcome, Failure> {
    let faults: Vec<Fault> = args
        .inject_fault
        .iter()
        .map(|f| match f {
            FaultArg::InvertedPairing => Fault::InvertedPairing,
            FaultArg::DeltaFormula => Fault::DeltaFormula,
        })
        .collect();
    let report = run_selftest(&faults, common.seed.unwrap_or(1));
    let mut table = String::new();
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        writeln!(table, "{status}  {:<32} {}", c.name, c.detail).unwrap();
    }
    if !report.passed() {
        eprintln!("failed invariants: {}", report.failed().join(", "));
    }
    Ok(Outcome {
        json: report.to_json(),
        table,
        exit: if report.passed() { 0 } else { 1 },
    })
}
