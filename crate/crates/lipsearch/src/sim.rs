//! Policy simulation against a known quality landscape, with serializable
//! traces.
//!
//! A [`Searcher`] maps histories to actions. [`simulate`] plays one out
//! against a fixed [`QualityIndex`] and records every search as a
//! [`TraceStep`], so runs can be persisted, replayed, and checked.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::index::QualityIndex;
use crate::model::{History, PolicyAction};
use crate::policy;
use crate::rational::{self, Rat};
use crate::window::SearchWindow;

/// A deterministic search policy: given the history so far, decide whether to
/// stop or where to search next.
pub trait Searcher {
    fn act(&self, h: &History) -> Result<PolicyAction>;
}

impl<F> Searcher for F
where
    F: Fn(&History) -> Result<PolicyAction>,
{
    fn act(&self, h: &History) -> Result<PolicyAction> {
        self(h)
    }
}

/// The closed-form left-to-right policy.
pub struct LeftToRight;

impl Searcher for LeftToRight {
    fn act(&self, h: &History) -> Result<PolicyAction> {
        policy::act(h)
    }
}

/// One rule of a scripted policy.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptRule {
    /// Stop as soon as the best observed quality reaches the bound.
    StopIfBestGeq(Rat),
    /// If the window measure is at least `min_measure`, search at
    /// `min + fraction * (max - min)` within the window's extent.
    SearchAtFraction { min_measure: Rat, fraction: Rat },
}

/// A policy assembled from a list of rules.
///
/// Stop rules are standing: the policy stops whenever any of them is met.
/// Search rules are a program consumed left to right, one per executed
/// search; a rule whose measure guard fails is skipped for good (the window
/// never grows back). A script with k search rules therefore makes at most
/// k searches, so "always the midpoint, stop after three" is three identical
/// rules.
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    rules: Vec<ScriptRule>,
}

impl ScriptedPolicy {
    pub fn new(rules: Vec<ScriptRule>) -> Result<Self> {
        for (i, rule) in rules.iter().enumerate() {
            if let ScriptRule::SearchAtFraction { min_measure, fraction } = rule {
                if min_measure < &Rat::zero() {
                    return Err(Error::Malformed(format!(
                        "script rule {i}: window measure bound must be nonnegative"
                    )));
                }
                if fraction < &Rat::zero() || fraction > &rational::from_int(1) {
                    return Err(Error::Malformed(format!(
                        "script rule {i}: search fraction must lie in [0, 1]"
                    )));
                }
            }
        }
        Ok(ScriptedPolicy { rules })
    }

    pub fn rules(&self) -> &[ScriptRule] {
        &self.rules
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let items = value
            .as_array()
            .ok_or_else(|| Error::Malformed("script must be a JSON array of rules".into()))?;
        let mut rules = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let obj = item.as_object().ok_or_else(|| {
                Error::Malformed(format!("script rule {i} must be a JSON object"))
            })?;
            let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
            keys.sort_unstable();
            match keys.as_slice() {
                ["stop_if_best_geq"] => {
                    let bound = rational::from_json(&obj["stop_if_best_geq"])?;
                    rules.push(ScriptRule::StopIfBestGeq(bound));
                }
                ["if_window_measure_geq", "search_at_fraction"] => {
                    let min_measure = rational::from_json(&obj["if_window_measure_geq"])?;
                    let fraction = rational::from_json(&obj["search_at_fraction"])?;
                    rules.push(ScriptRule::SearchAtFraction { min_measure, fraction });
                }
                _ => {
                    return Err(Error::Malformed(format!(
                        "script rule {i}: expected {{\"stop_if_best_geq\": b}} or \
                         {{\"if_window_measure_geq\": w, \"search_at_fraction\": f}}"
                    )));
                }
            }
        }
        ScriptedPolicy::new(rules)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Malformed(format!("script is not valid JSON: {e}")))?;
        Self::from_json(&value)
    }

    pub fn to_json(&self) -> Value {
        let rules: Vec<Value> = self
            .rules
            .iter()
            .map(|rule| match rule {
                ScriptRule::StopIfBestGeq(b) => json!({ "stop_if_best_geq": rational::to_json(b) }),
                ScriptRule::SearchAtFraction { min_measure, fraction } => json!({
                    "if_window_measure_geq": rational::to_json(min_measure),
                    "search_at_fraction": rational::to_json(fraction),
                }),
            })
            .collect();
        Value::Array(rules)
    }
}

impl Searcher for ScriptedPolicy {
    fn act(&self, h: &History) -> Result<PolicyAction> {
        let best = h.best_quality();
        for rule in &self.rules {
            if let ScriptRule::StopIfBestGeq(bound) = rule {
                if &best >= bound {
                    return Ok(PolicyAction::Stop);
                }
            }
        }
        // Replay the prefixes to recover how far the search program has
        // advanced: each prior observation consumed one fired search rule
        // plus any rules whose guards failed at that point.
        let search_rules: Vec<(&Rat, &Rat)> = self
            .rules
            .iter()
            .filter_map(|rule| match rule {
                ScriptRule::SearchAtFraction { min_measure, fraction } => {
                    Some((min_measure, fraction))
                }
                ScriptRule::StopIfBestGeq(_) => None,
            })
            .collect();
        let mut cursor = 0;
        let mut window = SearchWindow::full();
        for obs in h.observations() {
            let measure = window.measure();
            while cursor < search_rules.len() && search_rules[cursor].0 > &measure {
                cursor += 1;
            }
            if cursor == search_rules.len() {
                // The script would already have stopped; treat the longer
                // history as stopped too.
                return Ok(PolicyAction::Stop);
            }
            cursor += 1;
            let radius = (rational::from_int(1) - &obs.z) / h.lipschitz();
            window = window.subtract_open_ball(&obs.x, &radius);
        }
        let live = h.search_window()?;
        let measure = live.measure();
        while cursor < search_rules.len() && search_rules[cursor].0 > &measure {
            cursor += 1;
        }
        match search_rules.get(cursor) {
            None => Ok(PolicyAction::Stop),
            Some((_, fraction)) => {
                let lo = live.min().expect("nonempty window").clone();
                let hi = live.max().expect("nonempty window").clone();
                Ok(PolicyAction::Search(&lo + *fraction * (hi - &lo)))
            }
        }
    }
}

/// One recorded search.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// 1-based search count.
    pub t: usize,
    pub x: Rat,
    pub z: Rat,
    /// Measure of the search window at the history this search was taken from.
    pub window_measure_before: Rat,
    /// The left-to-right stopping bar at that history, when defined.
    pub threshold: Option<Rat>,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Terminal {
    pub adopted_quality: Rat,
    pub searches_paid: usize,
    pub payoff: Rat,
}

/// A full record of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub cost: Rat,
    pub lipschitz: Rat,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "t": s.t,
                    "x": rational::to_json(&s.x),
                    "z": rational::to_json(&s.z),
                    "window_measure_before": rational::to_json(&s.window_measure_before),
                    "threshold": match &s.threshold {
                        Some(v) => rational::to_json(v),
                        None => Value::Null,
                    },
                    "action": "search",
                })
            })
            .collect();
        json!({
            "c": rational::to_json(&self.cost),
            "L": rational::to_json(&self.lipschitz),
            "steps": steps,
            "terminal": {
                "adopted_quality": rational::to_json(&self.terminal.adopted_quality),
                "searches_paid": self.terminal.searches_paid,
                "payoff": rational::to_json(&self.terminal.payoff),
            },
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Malformed("trace must be a JSON object".into()))?;
        let cost = rational::from_json(
            obj.get("c").ok_or_else(|| Error::Malformed("trace is missing \"c\"".into()))?,
        )?;
        let lipschitz = rational::from_json(
            obj.get("L").ok_or_else(|| Error::Malformed("trace is missing \"L\"".into()))?,
        )?;
        let raw_steps = obj
            .get("steps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("trace is missing the \"steps\" array".into()))?;
        let mut steps = Vec::with_capacity(raw_steps.len());
        for (i, raw) in raw_steps.iter().enumerate() {
            let step = raw
                .as_object()
                .ok_or_else(|| Error::Malformed(format!("trace step {i} must be an object")))?;
            let field = |name: &str| -> Result<&Value> {
                step.get(name)
                    .ok_or_else(|| Error::Malformed(format!("trace step {i} is missing \"{name}\"")))
            };
            if field("action")?.as_str() != Some("search") {
                return Err(Error::Malformed(format!(
                    "trace step {i}: only search steps are recorded"
                )));
            }
            let t = field("t")?
                .as_u64()
                .ok_or_else(|| Error::Malformed(format!("trace step {i}: \"t\" must be a count")))?
                as usize;
            let threshold = match field("threshold")? {
                Value::Null => None,
                other => Some(rational::from_json(other)?),
            };
            steps.push(TraceStep {
                t,
                x: rational::from_json(field("x")?)?,
                z: rational::from_json(field("z")?)?,
                window_measure_before: rational::from_json(field("window_measure_before")?)?,
                threshold,
            });
        }
        let terminal = obj
            .get("terminal")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Malformed("trace is missing the \"terminal\" object".into()))?;
        let searches_paid = terminal
            .get("searches_paid")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Malformed("terminal \"searches_paid\" must be a count".into()))?
            as usize;
        let adopted_quality = rational::from_json(terminal.get("adopted_quality").ok_or_else(
            || Error::Malformed("terminal is missing \"adopted_quality\"".into()),
        )?)?;
        let payoff = rational::from_json(
            terminal
                .get("payoff")
                .ok_or_else(|| Error::Malformed("terminal is missing \"payoff\"".into()))?,
        )?;
        Ok(Trace {
            cost,
            lipschitz,
            steps,
            terminal: Terminal { adopted_quality, searches_paid, payoff },
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Malformed(format!("trace is not valid JSON: {e}")))?;
        Self::from_json(&value)
    }

    /// Checks the bookkeeping identities every trace must satisfy, plus the
    /// ordering properties of left-to-right runs when `left_to_right` is set.
    pub fn validate(&self, left_to_right: bool) -> Result<()> {
        let paid = rational::from_int(self.terminal.searches_paid as i64);
        if self.terminal.payoff != &self.terminal.adopted_quality - &self.cost * &paid {
            return Err(Error::Malformed(
                "trace: payoff does not equal adopted quality minus total search cost".into(),
            ));
        }
        if self.terminal.searches_paid != self.steps.len() {
            return Err(Error::Malformed(
                "trace: searches_paid does not match the number of recorded steps".into(),
            ));
        }
        let mut best = Rat::zero();
        for (i, step) in self.steps.iter().enumerate() {
            if step.t != i + 1 {
                return Err(Error::Malformed(format!(
                    "trace: step {} is numbered {}",
                    i + 1,
                    step.t
                )));
            }
            if step.z > best {
                best = step.z.clone();
            }
        }
        if self.terminal.adopted_quality != best {
            return Err(Error::Malformed(
                "trace: adopted quality is not the best observed quality".into(),
            ));
        }
        if left_to_right {
            for pair in self.steps.windows(2) {
                if pair[1].x <= pair[0].x {
                    return Err(Error::Malformed(
                        "trace: search locations do not strictly increase".into(),
                    ));
                }
                match (&pair[0].threshold, &pair[1].threshold) {
                    (Some(a), Some(b)) if b > a => {}
                    _ => {
                        return Err(Error::Malformed(
                            "trace: stopping bars do not strictly increase".into(),
                        ));
                    }
                }
            }
            if let Some(last) = self.steps.last() {
                if self.terminal.adopted_quality != last.z {
                    return Err(Error::Malformed(
                        "trace: run did not adopt its final observation".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Plays `policy` against a known landscape, paying `cost` per search, until
/// the policy stops. Fails with [`Error::NonTerminating`] after `max_steps`
/// searches.
pub fn simulate(
    policy: &dyn Searcher,
    index: &QualityIndex,
    cost: &Rat,
    max_steps: usize,
) -> Result<Trace> {
    let mut h = History::empty(cost.clone(), index.lipschitz().clone())?;
    let mut steps: Vec<TraceStep> = Vec::new();
    loop {
        match policy.act(&h)? {
            PolicyAction::Stop => break,
            PolicyAction::Search(x) => {
                if steps.len() >= max_steps {
                    return Err(Error::NonTerminating { max_steps });
                }
                let window_measure_before = h.window().measure();
                let threshold = threshold_at(cost, &window_measure_before)?;
                let z = index.evaluate(&x);
                steps.push(TraceStep {
                    t: steps.len() + 1,
                    x: x.clone(),
                    z: z.clone(),
                    window_measure_before,
                    threshold,
                });
                h = h.with_observation(x, z)?;
            }
        }
    }
    let adopted_quality = h.best_quality();
    let searches_paid = steps.len();
    let payoff = &adopted_quality - cost * rational::from_int(searches_paid as i64);
    Ok(Trace {
        cost: cost.clone(),
        lipschitz: index.lipschitz().clone(),
        steps,
        terminal: Terminal { adopted_quality, searches_paid, payoff },
    })
}

/// The stopping bar at window measure `l`, or `None` where no search budget
/// remains and the bar is undefined.
pub fn threshold_at(cost: &Rat, l: &Rat) -> Result<Option<Rat>> {
    match policy::stop_threshold(cost, l) {
        Ok(phi) => Ok(Some(phi - cost)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index;
    use crate::rational::ratio;

    fn rat(s: &str) -> Rat {
        rational::parse_rat(s).unwrap()
    }

    #[test]
    fn left_to_right_stops_after_midpoint_search_on_a_late_tent() {
        let index = index::tent(rational::from_int(1), rat("0.95")).unwrap();
        let trace = simulate(&LeftToRight, &index, &rat("0.3"), 100).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[0].x, rat("0.4"));
        assert_eq!(trace.steps[0].z, rat("0.45"));
        assert_eq!(trace.steps[0].window_measure_before, rat("1"));
        assert_eq!(trace.steps[0].threshold, Some(rat("0.3")));
        // After (0.4, 0.45) the window is [0.95, 1], so the second search
        // probes its midpoint, not the peak itself.
        assert_eq!(trace.steps[1].x, rat("0.975"));
        assert_eq!(trace.steps[1].z, rat("0.975"));
        assert_eq!(trace.steps[1].window_measure_before, rat("0.05"));
        assert_eq!(trace.steps[1].threshold, Some(rat("0.675")));
        assert_eq!(trace.terminal.adopted_quality, rat("0.975"));
        assert_eq!(trace.terminal.payoff, rat("0.375"));
        trace.validate(true).unwrap();
    }

    #[test]
    fn left_to_right_stops_immediately_when_flat_quality_meets_the_bar() {
        let index = QualityIndex::new(
            rational::from_int(1),
            vec![
                (rat("0"), rat("0.6")),
                (rat("0.4"), rat("0.6")),
                (rat("0.8"), rat("1")),
                (rat("1"), rat("1")),
            ],
        )
        .unwrap();
        let trace = simulate(&LeftToRight, &index, &rat("0.3"), 100).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(trace.steps[0].x, rat("0.4"));
        assert_eq!(trace.steps[0].z, rat("0.6"));
        assert_eq!(trace.terminal.payoff, rat("0.3"));
        trace.validate(true).unwrap();
    }

    #[test]
    fn no_search_budget_means_an_empty_trace() {
        let index = index::tent(rational::from_int(1), rat("0.5")).unwrap();
        let trace = simulate(&LeftToRight, &index, &rat("0.6"), 100).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.terminal.payoff, rat("0"));
        assert_eq!(trace.terminal.adopted_quality, rat("0"));
        trace.validate(true).unwrap();
    }

    #[test]
    fn a_policy_that_never_stops_is_reported() {
        let index = index::tent(rational::from_int(1), rat("0.5")).unwrap();
        let stubborn =
            |_h: &History| -> Result<PolicyAction> { Ok(PolicyAction::Search(ratio(1, 2))) };
        let err = simulate(&stubborn, &index, &rat("0.3"), 10).unwrap_err();
        assert!(matches!(err, Error::NonTerminating { max_steps: 10 }));
    }

    #[test]
    fn scripted_policy_parses_and_fires_rules_in_order() {
        let script = ScriptedPolicy::from_json_str(
            r#"[
                {"stop_if_best_geq": 0.7},
                {"if_window_measure_geq": 0.5, "search_at_fraction": 0.5},
                {"if_window_measure_geq": 0, "search_at_fraction": 1}
            ]"#,
        )
        .unwrap();
        let h = History::empty(rat("0.3"), rational::from_int(1)).unwrap();
        assert_eq!(script.act(&h).unwrap(), PolicyAction::Search(rat("0.5")));

        let h1 = h.with_observation(rat("0.5"), rat("0.6")).unwrap();
        // The first search rule was consumed at the root; the second probes
        // the right extreme of the window [0, 0.1] u [0.9, 1].
        assert_eq!(script.act(&h1).unwrap(), PolicyAction::Search(rat("1")));

        let h2 = h1.with_observation(rat("1"), rat("0.9")).unwrap();
        assert_eq!(script.act(&h2).unwrap(), PolicyAction::Stop);
    }

    #[test]
    fn scripted_policy_stops_when_its_program_runs_out() {
        // Three searches at the extent midpoint, then stop, regardless of
        // what the window still holds.
        let script = ScriptedPolicy::from_json_str(
            r#"[
                {"if_window_measure_geq": 0, "search_at_fraction": 0.5},
                {"if_window_measure_geq": 0, "search_at_fraction": 0.5},
                {"if_window_measure_geq": 0, "search_at_fraction": 0.5}
            ]"#,
        )
        .unwrap();
        let mut h = History::empty(rat("0.3"), rational::from_int(1)).unwrap();
        for _ in 0..3 {
            let PolicyAction::Search(x) = script.act(&h).unwrap() else {
                panic!("program should still be running");
            };
            let z = rat("0.55");
            h = h.with_observation(x, z).unwrap();
        }
        assert_eq!(script.act(&h).unwrap(), PolicyAction::Stop);
    }

    #[test]
    fn scripted_policy_skips_failed_measure_guards_for_good() {
        let script = ScriptedPolicy::from_json_str(
            r#"[{"if_window_measure_geq": 0.9, "search_at_fraction": 0.25}]"#,
        )
        .unwrap();
        let h = History::empty(rat("0.3"), rational::from_int(1))
            .unwrap()
            .with_observation(rat("0.5"), rat("0.7"))
            .unwrap();
        assert_eq!(script.act(&h).unwrap(), PolicyAction::Stop);
    }

    #[test]
    fn scripted_policy_rejects_bad_shapes() {
        assert!(ScriptedPolicy::from_json_str(r#"[{"search_at_fraction": 0.5}]"#).is_err());
        assert!(ScriptedPolicy::from_json_str(r#"[{"stop_if_best_geq": 0.5, "x": 1}]"#).is_err());
        assert!(ScriptedPolicy::from_json_str("{}").is_err());
        assert!(ScriptedPolicy::from_json_str(
            r#"[{"if_window_measure_geq": 0.1, "search_at_fraction": 1.5}]"#
        )
        .is_err());
    }

    #[test]
    fn trace_round_trips_through_json_exactly() {
        let index = index::tent(rational::from_int(1), rat("0.95")).unwrap();
        let trace = simulate(&LeftToRight, &index, &ratio(1, 10), 100).unwrap();
        let json = trace.to_json();
        let back = Trace::from_json(&json).unwrap();
        assert_eq!(back, trace);
        // Thresholds at c = 1/10 are non-terminating decimals and must still
        // round-trip without loss.
        assert_eq!(back.steps[0].threshold, Some(ratio(19, 30)));
    }

    #[test]
    fn validate_catches_a_tampered_payoff() {
        let index = index::tent(rational::from_int(1), rat("0.5")).unwrap();
        let mut trace = simulate(&LeftToRight, &index, &rat("0.3"), 100).unwrap();
        trace.terminal.payoff = rat("0.9");
        assert!(trace.validate(false).is_err());
    }
}
