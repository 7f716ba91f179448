//! The closed-form two-period solution for mid-range search costs: risk
//! classification after one search, the stopping-region boundary, and the
//! optimal two-period policy.

use num_traits::One;

use crate::error::{Error, Result};
use crate::model::{History, PolicyAction};
use crate::rational::{ratio, Rat};

/// The situation after one search, from the searcher's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiskClass {
    /// Searching again would split the window; the next discovery cannot be
    /// trusted to point anywhere. Stop.
    BifurcationRisk,
    /// The window is contiguous but the quality in hand is already too good
    /// to gamble against a hostile second draw. Stop.
    DirectionalRisk,
    /// Searching again is worth it.
    Continue,
}

fn check_cost(c: &Rat) -> Result<()> {
    if c <= &ratio(1, 4) || c >= &ratio(1, 2) {
        return Err(Error::OutOfRange(format!(
            "two-period analysis covers costs strictly between 1/4 and 1/2, got {c}"
        )));
    }
    Ok(())
}

fn check_location(x: &Rat) -> Result<()> {
    if x < &Rat::from_integer(0.into()) || x > &Rat::one() {
        return Err(Error::OutOfRange(format!(
            "location {x} lies outside the unit interval"
        )));
    }
    Ok(())
}

/// `max(x, 1-x)`: the lowest quality at `x` that splits the window in two.
pub fn bifurcation_bound(x: &Rat) -> Rat {
    let mirror = &Rat::one() - x;
    if x >= &mirror {
        x.clone()
    } else {
        mirror
    }
}

/// The quality above which stopping beats one more search when the window
/// stays contiguous: the smaller of the two one-sided stopping curves.
pub fn directional_bound(x: &Rat, c: &Rat) -> Result<Rat> {
    check_cost(c)?;
    check_location(x)?;
    let base = ratio(2, 3) * (&Rat::one() - c);
    let third = ratio(1, 3);
    let left = &base + &third * x;
    let right = &base - &third * (x - Rat::one());
    Ok(if left <= right { left } else { right })
}

/// Classifies a feasible first observation `(x, z)` at cost `c`.
pub fn classify(x: &Rat, z: &Rat, c: &Rat) -> Result<RiskClass> {
    check_cost(c)?;
    check_location(x)?;
    let one = Rat::one();
    if z > &one {
        return Err(Error::OutOfRange(format!(
            "observed quality {z} exceeds the quality standard"
        )));
    }
    let floor = &one - bifurcation_bound(x);
    if z < &floor {
        return Err(Error::InfeasibleHistory(format!(
            "quality {z} at {x} leaves nowhere for the standard to be attained"
        )));
    }
    if z == &one {
        // The window is untouched, hence contiguous; the search is over.
        return Ok(RiskClass::DirectionalRisk);
    }
    if z >= &bifurcation_bound(x) {
        return Ok(RiskClass::BifurcationRisk);
    }
    if z >= &directional_bound(x, c)? {
        return Ok(RiskClass::DirectionalRisk);
    }
    Ok(RiskClass::Continue)
}

/// The lower boundary of the stopping region at `x`: below it, a second
/// search is optimal; on or above it, stopping is.
pub fn m_curve(x: &Rat, c: &Rat) -> Result<Rat> {
    let bifurcation = bifurcation_bound(x);
    let directional = directional_bound(x, c)?;
    Ok(if bifurcation <= directional { bifurcation } else { directional })
}

/// The optimal policy of the two-period game: search `1/4 + c/2` first, then
/// stop at `3/4 - c/2` or probe the remaining window's midpoint.
///
/// Only its own decision points are supported: the empty history and a single
/// observation at the first search location.
pub fn optimal_two_period(h: &History) -> Result<PolicyAction> {
    let c = h.cost();
    check_cost(c)?;
    if h.lipschitz() != &Rat::one() {
        return Err(Error::OutOfRange(format!(
            "the two-period policy is calibrated to Lipschitz constant 1, got {}",
            h.lipschitz()
        )));
    }
    let x0 = ratio(1, 4) + c / Rat::from_integer(2.into());
    match h.observations() {
        [] => Ok(PolicyAction::Search(x0)),
        [obs] => {
            if obs.x != x0 {
                return Err(Error::UnsupportedHistory(format!(
                    "the two-period policy searches {x0} first, not {}",
                    obs.x
                )));
            }
            h.validate_feasible()?;
            let bar = ratio(3, 4) - c / Rat::from_integer(2.into());
            if obs.z >= bar {
                Ok(PolicyAction::Stop)
            } else {
                let l = h.window().measure();
                Ok(PolicyAction::Search(Rat::one() - l / Rat::from_integer(2.into())))
            }
        }
        _ => Err(Error::UnsupportedHistory(
            "the two-period policy decides at most one continuation".into(),
        )),
    }
}
