//! The six subcommands. Each one builds its artifact as a string, so the
//! bytes written to `--out` and to stdout are identical.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use lipsearch::adversary::run_adversarial;
use lipsearch::fuzz::{case_rng, random_index};
use lipsearch::oracle::{dynamic_consistency_check, solve};
use lipsearch::policy::{ball_partition, max_searches, root_guarantee, stop_threshold};
use lipsearch::rational::{self, from_int, parse_rat, ratio, render_cell, Rat};
use lipsearch::sim::simulate;
use lipsearch::two_period::{bifurcation_bound, directional_bound, m_curve};
use lipsearch::{DiscreteInstance, Error, LeftToRight, ScriptedPolicy, Searcher};

pub const IO: u8 = 1;
pub const VALIDATION: u8 = 2;
pub const PROPERTY: u8 = 3;
pub const BUDGET: u8 = 4;

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

/// Library failures are user-input problems except for the oracle budget.
fn lib_err(e: Error) -> CliError {
    let code = match e {
        Error::BudgetExceeded { .. } => BUDGET,
        _ => VALIDATION,
    };
    CliError::new(code, e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(IO, format!("{}: {e}", path.display()))
}

pub fn parse_cost(text: &str) -> Result<Rat, CliError> {
    let c = parse_rat(text).map_err(lib_err)?;
    if c <= from_int(0) || c > from_int(1) {
        return Err(CliError::new(
            VALIDATION,
            format!("cost {text} must lie in (0, 1]"),
        ));
    }
    Ok(c)
}

fn emit(out: &Option<PathBuf>, artifact: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, artifact).map_err(|e| io_err(path, e)),
        None => {
            print!("{artifact}");
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(IO, e.to_string()))?;
    emit(out, &format!("{text}\n"))
}

pub fn table(c: &Rat, step: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    let step = parse_rat(step).map_err(lib_err)?;
    if step <= from_int(0) || step > from_int(1) {
        return Err(CliError::new(VALIDATION, "step must lie in (0, 1]"));
    }
    let mut rows = vec!["l,N,phi,first_search_location".to_string()];
    let mut k = 1i64;
    loop {
        let l = &step * from_int(k);
        if l > from_int(1) {
            break;
        }
        let n = max_searches(c, &l).map_err(lib_err)?;
        if n == 0 {
            rows.push(format!("{},0,,", render_cell(&l)));
        } else {
            let phi = stop_threshold(c, &l).map_err(lib_err)?;
            let first = ball_partition(c, &l).map_err(lib_err)?.centers[0].clone();
            rows.push(format!(
                "{},{n},{},{}",
                render_cell(&l),
                render_cell(&phi),
                render_cell(&first)
            ));
        }
        k += 1;
    }
    emit(out, &format!("{}\n", rows.join("\n")))
}

pub fn run_index(c: &Rat, index_path: &Path, out: &Option<PathBuf>) -> Result<(), CliError> {
    let text = fs::read_to_string(index_path).map_err(|e| io_err(index_path, e))?;
    let index = lipsearch::QualityIndex::from_json_str(&text).map_err(lib_err)?;
    let trace = simulate(&LeftToRight, &index, c, 10_000).map_err(lib_err)?;
    trace
        .validate(true)
        .map_err(|e| CliError::new(PROPERTY, e.to_string()))?;
    if max_searches(c, &from_int(1)).map_err(lib_err)? > 0 {
        let bound = root_guarantee(c).map_err(lib_err)?;
        if trace.terminal.payoff < bound {
            return Err(CliError::new(
                PROPERTY,
                format!(
                    "payoff {} fell below the worst-case guarantee {}",
                    render_cell(&trace.terminal.payoff),
                    render_cell(&bound)
                ),
            ));
        }
    }
    emit_json(out, &trace.to_json())
}

pub fn adversary(c: &Rat, policy_spec: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    let builtin = policy_spec == "builtin";
    let policy: Box<dyn Searcher> = if builtin {
        Box::new(LeftToRight)
    } else {
        let path = Path::new(policy_spec);
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Box::new(ScriptedPolicy::from_json_str(&text).map_err(lib_err)?)
    };
    let outcome = run_adversarial(policy.as_ref(), c, 10_000).map_err(lib_err)?;
    outcome
        .trace
        .validate(builtin)
        .map_err(|e| CliError::new(PROPERTY, e.to_string()))?;
    let cap = root_guarantee(c).map_err(lib_err)?;
    if outcome.trace.terminal.payoff > cap {
        return Err(CliError::new(
            PROPERTY,
            format!(
                "payoff {} exceeds the adversarial cap {}",
                render_cell(&outcome.trace.terminal.payoff),
                render_cell(&cap)
            ),
        ));
    }
    emit_json(
        out,
        &json!({
            "trace": outcome.trace.to_json(),
            "witness": outcome.witness.to_json(),
        }),
    )
}

pub fn regions(c: &Rat, samples: usize, out: &Option<PathBuf>) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::new(VALIDATION, "need at least 2 samples"));
    }
    let mut rows = vec!["x,bifurcation_boundary,directional_boundary,m_curve".to_string()];
    for i in 0..samples {
        let x = ratio(i as i64, samples as i64 - 1);
        let bif = bifurcation_bound(&x);
        let dir = directional_bound(&x, c).map_err(lib_err)?;
        let m = m_curve(&x, c).map_err(lib_err)?;
        rows.push(format!(
            "{},{},{},{}",
            render_cell(&x),
            render_cell(&bif),
            render_cell(&dir),
            render_cell(&m)
        ));
    }
    // The curve must peak exactly at the two optimal first-search locations.
    let peak = from_int(3) / from_int(4) - c / from_int(2);
    for px in [from_int(1) / from_int(4) + c / from_int(2), peak.clone()] {
        let v = m_curve(&px, c).map_err(lib_err)?;
        if v != peak {
            return Err(CliError::new(
                PROPERTY,
                format!("m_curve({}) = {}, expected {}", render_cell(&px), v, peak),
            ));
        }
    }
    for i in 0..samples {
        let x = ratio(i as i64, samples as i64 - 1);
        if m_curve(&x, c).map_err(lib_err)? > peak {
            return Err(CliError::new(
                PROPERTY,
                format!("m_curve exceeds its peak at x = {}", render_cell(&x)),
            ));
        }
    }
    emit(out, &format!("{}\n", rows.join("\n")))
}

pub fn verify(
    c: &Rat,
    m: u32,
    kz: u32,
    depth: u32,
    state_cap: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut instance = DiscreteInstance::new(m, kz, c.clone(), depth).map_err(lib_err)?;
    if let Some(cap) = state_cap {
        instance = instance.with_state_cap(cap);
    }
    let solved = solve(&instance).map_err(lib_err)?;
    let closed = if max_searches(c, &from_int(1)).map_err(lib_err)? == 0 {
        from_int(0)
    } else {
        root_guarantee(c).map_err(lib_err)?.max(from_int(0))
    };
    let gap = if solved.value >= closed {
        &solved.value - &closed
    } else {
        &closed - &solved.value
    };
    let tolerance = instance.tolerance();
    let consistent = dynamic_consistency_check(&instance).map_err(lib_err)?;
    let pass = gap <= tolerance && consistent;
    let actions: Vec<Value> = solved
        .best_first_actions
        .iter()
        .map(rational::to_json)
        .collect();
    emit_json(
        out,
        &json!({
            "c": rational::to_json(c),
            "m": m,
            "kz": kz,
            "depth": depth,
            "oracle_value": rational::to_json(&solved.value),
            "best_first_actions": actions,
            "closed_form_value": rational::to_json(&closed),
            "gap": rational::to_json(&gap),
            "tolerance": rational::to_json(&tolerance),
            "dynamic_consistency": consistent,
            "pass": pass,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::new(
            PROPERTY,
            format!(
                "verification failed: gap {} vs tolerance {}, consistency {consistent}",
                render_cell(&gap),
                render_cell(&tolerance)
            ),
        ))
    }
}

pub fn fuzz(c: &Rat, n: usize, seed: u64, out: &Option<PathBuf>) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::new(VALIDATION, "need at least one case"));
    }
    let bound = if max_searches(c, &from_int(1)).map_err(lib_err)? == 0 {
        from_int(0)
    } else {
        root_guarantee(c).map_err(lib_err)?
    };
    let cases: Vec<_> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, i as u64);
            let index = random_index(&mut rng);
            let outcome = simulate(&LeftToRight, &index, c, 10_000)
                .and_then(|trace| trace.validate(true).map(|()| trace))
                .map(|trace| (trace.terminal.payoff, index.to_json()));
            (i, outcome)
        })
        .collect();

    let mut min_payoff: Option<Rat> = None;
    let mut counterexamples = Vec::new();
    for (i, outcome) in &cases {
        match outcome {
            Err(e) => counterexamples.push(json!({
                "case": i,
                "error": e.to_string(),
            })),
            Ok((payoff, index)) => {
                if payoff < &bound {
                    counterexamples.push(json!({
                        "case": i,
                        "payoff": rational::to_json(payoff),
                        "index": index,
                    }));
                }
                min_payoff = Some(match min_payoff {
                    None => payoff.clone(),
                    Some(m) => m.min(payoff.clone()),
                });
            }
        }
    }
    let violations = counterexamples.len();
    emit_json(
        out,
        &json!({
            "c": rational::to_json(c),
            "n": n,
            "seed": seed,
            "bound": rational::to_json(&bound),
            "min_payoff": min_payoff.as_ref().map(rational::to_json),
            "violations": violations,
            "counterexamples": counterexamples,
        }),
    )?;
    if violations == 0 {
        Ok(())
    } else {
        Err(CliError::new(
            PROPERTY,
            format!("{violations} of {n} cases broke the worst-case payoff bound"),
        ))
    }
}
