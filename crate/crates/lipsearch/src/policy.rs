//! The closed-form left-to-right policy.
//!
//! On an ordered window of length l the policy's remaining-search budget is
//! N(c, l), its stopping bar is the threshold phi(l), and the window tiles
//! into N balls whose diameters shrink by 2c from left to right. The action
//! map stops on z* ≥ phi(l) − c and otherwise searches the center of the
//! largest (leftmost) ball.
//!
//! Everything here assumes L = 1; rescale general instances before calling.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{History, PolicyAction};
use crate::rational::{from_int, Rat};

/// Tiling of the ordered window [1−l, 1] into N balls, diameters
/// largest-first.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPartition {
    pub diameters: Vec<Rat>,
    pub centers: Vec<Rat>,
    pub base_diameter: Rat,
}

fn check_domain(c: &Rat, l: &Rat) -> Result<()> {
    if c > &from_int(1) {
        return Err(Error::OutOfRange(format!("cost {c} exceeds 1")));
    }
    if !c.is_positive() {
        return Err(Error::OutOfRange(format!("cost {c} must be > 0")));
    }
    if l < &Rat::zero() || l > &from_int(1) {
        return Err(Error::OutOfRange(format!("window length {l} outside [0,1]")));
    }
    Ok(())
}

/// N(c, l): how many searches the policy is still prepared to pay for. The
/// case split is half-open with right endpoints included:
/// 0 on c ∈ (1 − l/2, 1], 1 on c ∈ (l/2, 1 − l/2], and n ≥ 2 on
/// c ∈ (l/(n(n+1)), l/(n(n−1))].
pub fn max_searches(c: &Rat, l: &Rat) -> Result<u32> {
    check_domain(c, l)?;
    let one = from_int(1);
    if c > &(&one - l / from_int(2)) {
        return Ok(0);
    }
    if c > &(l / from_int(2)) {
        return Ok(1);
    }
    // Smallest n ≥ 2 with n(n+1)c > l; the loop invariant n(n−1)c ≤ l holds
    // on entry from the branch above (2·1·c ≤ l).
    let mut n: u32 = 2;
    while &(from_int((n as i64) * (n as i64 + 1)) * c) <= l {
        n += 1;
    }
    Ok(n)
}

/// phi(l) = 1 − l/(2N) − (N−1)c/2, the Eq.-2 stopping bar.
pub fn stop_threshold(c: &Rat, l: &Rat) -> Result<Rat> {
    let n = max_searches(c, l)?;
    if n == 0 {
        return Err(Error::Undefined(format!(
            "phi has no value when N(c, l) = 0 (c = {c}, l = {l})"
        )));
    }
    let n = from_int(n as i64);
    Ok(from_int(1) - l / (from_int(2) * &n) - (&n - from_int(1)) * c / from_int(2))
}

/// Tiles [1−l, 1] into N(c, l) balls: base diameter k = l/N − (N−1)c, the
/// rest grow by 2c each, laid out largest-first.
pub fn ball_partition(c: &Rat, l: &Rat) -> Result<BallPartition> {
    let n = max_searches(c, l)?;
    if n == 0 {
        return Err(Error::Undefined(format!(
            "no partition when N(c, l) = 0 (c = {c}, l = {l})"
        )));
    }
    let nr = from_int(n as i64);
    let k = l / &nr - (&nr - from_int(1)) * c;
    debug_assert!(k >= Rat::zero() && k < from_int(2) * c);
    let diameters: Vec<Rat> = (0..n)
        .map(|i| &k + from_int(2) * c * from_int((n - 1 - i) as i64))
        .collect();
    let mut centers = Vec::with_capacity(n as usize);
    let mut left = from_int(1) - l;
    for d in &diameters {
        centers.push(&left + d / from_int(2));
        left += d;
    }
    debug_assert_eq!(left, from_int(1));
    Ok(BallPartition { diameters, centers, base_diameter: k })
}

/// One step of sigma_L→R on any consistent history (lenient admission): the
/// Def.-6 formula applied to (z*, l). Stops on ties and whenever N = 0.
pub fn act(h: &History) -> Result<PolicyAction> {
    if h.lipschitz() != &from_int(1) {
        return Err(Error::OutOfRange(format!(
            "policy is normalized to L = 1, history has L = {}",
            h.lipschitz()
        )));
    }
    let w = h.search_window()?;
    let l = w.measure();
    let n = max_searches(h.cost(), &l)?;
    if n == 0 {
        return Ok(PolicyAction::Stop);
    }
    let phi = stop_threshold(h.cost(), &l)?;
    if h.best_quality() >= &phi - h.cost() {
        return Ok(PolicyAction::Stop);
    }
    Ok(PolicyAction::Search(from_int(2) - &l - phi))
}

/// Strict admission: replays the history and rejects anything sigma_L→R
/// could not itself have produced before applying the action map.
pub fn act_strict(h: &History) -> Result<PolicyAction> {
    let mut replay = History::empty(h.cost().clone(), h.lipschitz().clone())?;
    for (i, o) in h.observations().iter().enumerate() {
        match act(&replay)? {
            PolicyAction::Stop => {
                return Err(Error::NotLToRReachable(format!(
                    "the policy stops after {i} observations, history has {}",
                    h.observations().len()
                )));
            }
            PolicyAction::Search(x) if x == o.x => {
                replay = replay.with_observation(o.x.clone(), o.z.clone())?;
            }
            PolicyAction::Search(x) => {
                return Err(Error::NotLToRReachable(format!(
                    "step {i} searches {x}, history observed at {}",
                    o.x
                )));
            }
        }
    }
    act(h)
}

/// Convenience: phi(1) − c, the worst-case guarantee from a fresh start.
pub fn root_guarantee(c: &Rat) -> Result<Rat> {
    Ok(stop_threshold(c, &from_int(1))? - c)
}
