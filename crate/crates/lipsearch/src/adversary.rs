//! Worst-case quality constructions: an escalating response schedule that
//! caps what any policy can guarantee, and the flat-then-rise landscape that
//! punishes stopping on a split window.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::index::QualityIndex;
use crate::model::{History, PolicyAction};
use crate::policy;
use crate::rational::{self, Rat};
use crate::sim::{self, Searcher, Terminal, Trace, TraceStep};

/// The adversary's running state: each new discovery is allowed to be one
/// search cost better than the previous one, starting from the stopping bar
/// of the root window.
#[derive(Debug, Clone)]
pub struct AdversarySchedule {
    base_threshold: Rat,
    step: Rat,
    issued: usize,
}

impl AdversarySchedule {
    /// Builds the schedule rooted at `root`. Fails with [`Error::Undefined`]
    /// when the root window supports no searches at all.
    pub fn new(root: &History) -> Result<Self> {
        let l = root.search_window()?.measure();
        let base_threshold = policy::stop_threshold(root.cost(), &l)?;
        Ok(AdversarySchedule { base_threshold, step: root.cost().clone(), issued: 0 })
    }

    pub fn base_threshold(&self) -> &Rat {
        &self.base_threshold
    }

    pub fn issued(&self) -> usize {
        self.issued
    }

    /// The quality ceiling for the next response.
    pub fn next_cap(&self) -> Rat {
        &self.base_threshold + &self.step * rational::from_int(self.issued as i64)
    }

    /// The state after one more response has been issued.
    pub fn advance(&self) -> Self {
        AdversarySchedule {
            base_threshold: self.base_threshold.clone(),
            step: self.step.clone(),
            issued: self.issued + 1,
        }
    }
}

/// The scheduled response to a search at `x`: the cap or the upper envelope,
/// whichever is smaller. The result is always consistent with `h` and keeps
/// the search window nonempty, which is re-checked by construction.
pub fn worst_case_response(schedule: &AdversarySchedule, h: &History, x: &Rat) -> Result<Rat> {
    if x < &Rat::zero() || x > &Rat::one() {
        return Err(Error::OutOfRange(format!(
            "search location {x} lies outside the unit interval"
        )));
    }
    h.search_window()?;
    let cap = schedule.next_cap();
    let z = match h.upper_envelope(x) {
        Some(env) if env < cap => env,
        _ => cap,
    };
    let successor = h.with_observation(x.clone(), z.clone())?;
    successor.search_window()?;
    Ok(z)
}

/// The outcome of an adversarial run: the trace, plus a quality index that
/// realizes every response the adversary gave.
#[derive(Debug, Clone)]
pub struct AdversarialOutcome {
    pub trace: Trace,
    pub witness: QualityIndex,
}

/// Plays `policy` against the escalating schedule from an empty history.
///
/// The witness index passes through every recorded observation, so the whole
/// run can be reproduced by simulating the same policy against it.
pub fn run_adversarial(
    policy: &dyn Searcher,
    cost: &Rat,
    max_steps: usize,
) -> Result<AdversarialOutcome> {
    let mut h = History::empty(cost.clone(), rational::from_int(1))?;
    let mut schedule = AdversarySchedule::new(&h)?;
    let mut steps: Vec<TraceStep> = Vec::new();
    loop {
        match policy.act(&h)? {
            PolicyAction::Stop => break,
            PolicyAction::Search(x) => {
                if steps.len() >= max_steps {
                    return Err(Error::NonTerminating { max_steps });
                }
                let window_measure_before = h.window().measure();
                let threshold = sim::threshold_at(cost, &window_measure_before)?;
                let z = worst_case_response(&schedule, &h, &x)?;
                schedule = schedule.advance();
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
    let witness = h.canonical_index()?;
    let adopted_quality = h.best_quality();
    let searches_paid = steps.len();
    let payoff = &adopted_quality - cost * rational::from_int(searches_paid as i64);
    let trace = Trace {
        cost: cost.clone(),
        lipschitz: rational::from_int(1),
        steps,
        terminal: Terminal { adopted_quality, searches_paid, payoff },
    };
    Ok(AdversarialOutcome { trace, witness })
}

/// The landscape that is flat at `z` left of `x` and rises at full slope to
/// quality 1 afterwards. Only defined where stopping on a split window is
/// the live risk: `max(x, 1-x) <= z < 1`.
pub fn bifurcation_index(x: &Rat, z: &Rat) -> Result<QualityIndex> {
    let one = Rat::one();
    let mirror = &one - x;
    let peak = if x >= &mirror { x.clone() } else { mirror };
    if z < &peak || z >= &one {
        return Err(Error::NotBifurcated { x: Box::new(x.clone()), z: Box::new(z.clone()) });
    }
    let rise_end = x + (&one - z);
    let mut pts: Vec<(Rat, Rat)> = Vec::with_capacity(4);
    for pt in [
        (Rat::zero(), z.clone()),
        (x.clone(), z.clone()),
        (rise_end, one.clone()),
        (one.clone(), one),
    ] {
        if pts.last().is_none_or(|p| p.0 != pt.0) {
            pts.push(pt);
        }
    }
    QualityIndex::new(rational::from_int(1), pts)
}
