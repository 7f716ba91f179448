//! Exhaustive minimax solver for a discretized version of the search game.
//!
//! Locations live on a grid of step `1/M`, qualities on a grid of step
//! `1/Kz`, and the game is cut off after `D` searches. Everything is scaled
//! to a common integer denominator so the recursion runs on `i64` values and
//! the results are exact rationals of the discrete game, independent of
//! evaluation order.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{History, PolicyAction};
use crate::rational::{self, Rat};
use crate::sim::Searcher;

const DEFAULT_STATE_CAP: usize = 10_000_000;
const MAX_GRID: u32 = 4096;
const MAX_DEPTH: u32 = 4;
const MAX_SCALE: i64 = 1 << 53;

/// One discretized game: location grid, quality grid, cost, and search
/// budget.
#[derive(Debug, Clone)]
pub struct DiscreteInstance {
    m: u32,
    kz: u32,
    cost: Rat,
    depth: u32,
    state_cap: usize,
    unit: i64,
}

impl DiscreteInstance {
    pub fn new(m: u32, kz: u32, cost: Rat, depth: u32) -> Result<Self> {
        if m == 0 || m > MAX_GRID || !m.is_power_of_two() {
            return Err(Error::OutOfRange(format!(
                "location grid size {m} must be a power of two in 1..={MAX_GRID}"
            )));
        }
        if kz == 0 || kz > MAX_GRID {
            return Err(Error::OutOfRange(format!(
                "quality grid size {kz} must lie in 1..={MAX_GRID}"
            )));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::OutOfRange(format!(
                "search depth {depth} must lie in 1..={MAX_DEPTH}"
            )));
        }
        if !cost.is_positive() || cost > Rat::one() {
            return Err(Error::OutOfRange(format!("cost {cost} must lie in (0, 1]")));
        }
        let unit = BigInt::from(m)
            .lcm(&BigInt::from(kz))
            .lcm(cost.denom());
        let unit = unit
            .to_i64()
            .filter(|u| *u <= MAX_SCALE)
            .ok_or_else(|| {
                Error::OutOfRange(format!(
                    "common denominator of 1/{m}, 1/{kz} and {cost} exceeds 2^53"
                ))
            })?;
        Ok(DiscreteInstance { m, kz, cost, depth, state_cap: DEFAULT_STATE_CAP, unit })
    }

    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn kz(&self) -> u32 {
        self.kz
    }

    pub fn cost(&self) -> &Rat {
        &self.cost
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn grid_step_x(&self) -> Rat {
        rational::ratio(1, self.m as i64)
    }

    pub fn grid_step_z(&self) -> Rat {
        rational::ratio(1, self.kz as i64)
    }

    /// The discretization allowance used by the verification reports:
    /// `2 * (1/M + 1/Kz)`.
    pub fn tolerance(&self) -> Rat {
        rational::from_int(2) * (self.grid_step_x() + self.grid_step_z())
    }

    fn scaled(&self) -> Scaled {
        let unit = self.unit;
        let uc = (&self.cost * Rat::from_integer(BigInt::from(unit)))
            .to_integer()
            .to_i64()
            .expect("scaled cost fits i64 by construction");
        Scaled {
            m: self.m as i64,
            kz: self.kz as i64,
            ux: unit / self.m as i64,
            uz: unit / self.kz as i64,
            uc,
            unit,
            depth: self.depth as usize,
            cap: self.state_cap,
        }
    }
}

/// The solved value of a discrete game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameValue {
    /// Worst-case guaranteed payoff; never below the stop-now value 0.
    pub value: Rat,
    /// Every first search location attaining `value`; empty when stopping
    /// immediately is strictly best.
    pub best_first_actions: Vec<Rat>,
}

struct Scaled {
    m: i64,
    kz: i64,
    ux: i64,
    uz: i64,
    uc: i64,
    unit: i64,
    depth: usize,
    cap: usize,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(a >= 0 && b > 0);
    (a + b - 1) / b
}

/// Removes the open interval `(center-radius, center+radius)` from a sorted
/// list of disjoint closed intervals. Degenerate single points survive.
fn subtract_ball(intervals: &[(i64, i64)], center: i64, radius: i64) -> Vec<(i64, i64)> {
    if radius <= 0 {
        return intervals.to_vec();
    }
    let lo = center - radius;
    let hi = center + radius;
    let mut out = Vec::with_capacity(intervals.len() + 1);
    for &(a, b) in intervals {
        if b <= lo || a >= hi {
            out.push((a, b));
            continue;
        }
        if a <= lo {
            out.push((a, lo));
        }
        if b >= hi {
            out.push((hi, b));
        }
    }
    out
}

impl Scaled {
    /// Smallest and largest grid locations inside the window, scaled.
    fn grid_extremes(&self, window: &[(i64, i64)]) -> Option<(i64, i64)> {
        let mut min = None;
        let mut max = None;
        for &(a, b) in window {
            let first = ceil_div(a, self.ux);
            let last = b.div_euclid(self.ux);
            if first > last {
                continue;
            }
            if min.is_none() {
                min = Some(first * self.ux);
            }
            max = Some(last * self.ux);
        }
        Some((min?, max?))
    }

    /// The feasible quality indices for a search at scaled location `x`:
    /// above every lower cone and the target-existence floor, below every
    /// upper cone and the standard.
    fn z_range(
        &self,
        obs: &[(i64, i64)],
        gmin: i64,
        gmax: i64,
        x: i64,
    ) -> Option<(i64, i64)> {
        let mut lo = self.unit - (x - gmin).max(gmax - x);
        if lo < 0 {
            lo = 0;
        }
        let mut hi = self.unit;
        for &(ox, oz) in obs {
            let d = (x - ox).abs();
            if oz - d > lo {
                lo = oz - d;
            }
            if oz + d < hi {
                hi = oz + d;
            }
        }
        let jlo = ceil_div(lo, self.uz);
        let jhi = hi.div_euclid(self.uz);
        (jlo <= jhi).then_some((jlo, jhi))
    }

    fn memo_key(&self, obs: &[(i64, i64)], remaining: usize) -> u128 {
        let mut idx = [(0u32, 0u32); MAX_DEPTH as usize];
        let n = obs.len();
        for (slot, &(x, z)) in idx.iter_mut().zip(obs) {
            *slot = ((x / self.ux) as u32, (z / self.uz) as u32);
        }
        idx[..n].sort_unstable();
        let mut key: u128 = 0;
        for &(ix, jz) in &idx[..n] {
            key = (key << 26) | ((ix as u128) << 13) | jz as u128;
        }
        (key << 3) | remaining as u128
    }

    fn charge(&self, counter: &AtomicUsize) -> Result<()> {
        let states = counter.fetch_add(1, Ordering::Relaxed) + 1;
        if states > self.cap {
            return Err(Error::BudgetExceeded { states, cap: self.cap });
        }
        Ok(())
    }

    /// Exact minimax continuation value of the discrete game at this state.
    fn value(
        &self,
        obs: &mut Vec<(i64, i64)>,
        window: &[(i64, i64)],
        zstar: i64,
        remaining: usize,
        memo: &mut HashMap<u128, i64>,
        counter: &AtomicUsize,
    ) -> Result<i64> {
        if remaining == 0 {
            return Ok(zstar);
        }
        let key = self.memo_key(obs, remaining);
        if let Some(&v) = memo.get(&key) {
            return Ok(v);
        }
        self.charge(counter)?;
        let (gmin, gmax) = self
            .grid_extremes(window)
            .expect("reachable states keep a grid point in the window");
        let mut best = zstar;
        for ix in 0..=self.m {
            let x = ix * self.ux;
            let Some((jlo, jhi)) = self.z_range(obs, gmin, gmax, x) else {
                continue;
            };
            let mut worst = i64::MAX;
            for j in jlo..=jhi {
                let z = j * self.uz;
                let child_zstar = zstar.max(z);
                let v = if remaining == 1 {
                    child_zstar
                } else {
                    let child_window = subtract_ball(window, x, self.unit - z);
                    obs.push((x, z));
                    let v =
                        self.value(obs, &child_window, child_zstar, remaining - 1, memo, counter);
                    obs.pop();
                    v?
                };
                if v < worst {
                    worst = v;
                    if worst - self.uc <= best {
                        break;
                    }
                }
            }
            let cand = worst - self.uc;
            if cand > best {
                best = cand;
            }
        }
        memo.insert(key, best);
        Ok(best)
    }

    /// Worst-case value of a fixed black-box policy from this state. The
    /// policy sees exact rational histories; its locations are snapped to the
    /// grid by rounding half away from zero.
    #[allow(clippy::too_many_arguments)]
    fn policy_value(
        &self,
        policy: &dyn Searcher,
        h: &History,
        obs: &mut Vec<(i64, i64)>,
        window: &[(i64, i64)],
        zstar: i64,
        remaining: usize,
        counter: &AtomicUsize,
    ) -> Result<i64> {
        if remaining == 0 {
            return Ok(zstar);
        }
        let xr = match policy.act(h)? {
            PolicyAction::Stop => return Ok(zstar),
            PolicyAction::Search(xr) => xr,
        };
        self.charge(counter)?;
        let ix = self.snap(&xr);
        let x = ix * self.ux;
        let (gmin, gmax) = self
            .grid_extremes(window)
            .expect("reachable states keep a grid point in the window");
        let Some((jlo, jhi)) = self.z_range(obs, gmin, gmax, x) else {
            return Err(Error::Undefined(format!(
                "no grid quality is feasible at location {ix}/{}; refine the quality grid",
                self.m
            )));
        };
        let mut worst = i64::MAX;
        for j in jlo..=jhi {
            let z = j * self.uz;
            let child_zstar = zstar.max(z);
            let child_window = subtract_ball(window, x, self.unit - z);
            let child_h = h.with_observation(
                rational::ratio(ix, self.m),
                rational::ratio(j, self.kz),
            )?;
            obs.push((x, z));
            let v = self.policy_value(
                policy,
                &child_h,
                obs,
                &child_window,
                child_zstar,
                remaining - 1,
                counter,
            );
            obs.pop();
            worst = worst.min(v?);
        }
        Ok(worst - self.uc)
    }

    /// Snaps a search location down to the grid. Rounding down is load
    /// bearing: the closed-form locations sit exactly where the response
    /// that leaves an isolated window point ties with the stop bar, and a
    /// location nudged upward hands the adversary a pivot below it.
    fn snap(&self, x: &Rat) -> i64 {
        (x * Rat::from_integer(BigInt::from(self.m)))
            .floor()
            .to_integer()
            .to_i64()
            .unwrap_or(0)
            .clamp(0, self.m)
    }

    fn to_rat(&self, v: i64) -> Rat {
        Rat::new(BigInt::from(v), BigInt::from(self.unit))
    }
}

/// Solves the discrete game by backward induction from the empty history.
pub fn solve(instance: &DiscreteInstance) -> Result<GameValue> {
    let s = instance.scaled();
    let counter = AtomicUsize::new(0);
    let full_window = [(0i64, s.unit)];
    let candidates: Vec<(usize, i64)> = (0..s.m as usize + 1)
        .into_par_iter()
        .map(|ix| -> Result<(usize, i64)> {
            let x = ix as i64 * s.ux;
            let (jlo, jhi) = s
                .z_range(&[], 0, s.unit, x)
                .expect("every location is feasible at the empty history");
            let mut memo = HashMap::new();
            let mut obs = Vec::with_capacity(s.depth);
            let mut worst = i64::MAX;
            for j in jlo..=jhi {
                let z = j * s.uz;
                let v = if s.depth == 1 {
                    z
                } else {
                    let child_window = subtract_ball(&full_window, x, s.unit - z);
                    obs.push((x, z));
                    let v = s.value(&mut obs, &child_window, z, s.depth - 1, &mut memo, &counter);
                    obs.pop();
                    v?
                };
                worst = worst.min(v);
            }
            Ok((ix, worst - s.uc))
        })
        .collect::<Result<_>>()?;
    let mut value = 0i64;
    for &(_, cand) in &candidates {
        if cand > value {
            value = cand;
        }
    }
    let best_first_actions = candidates
        .iter()
        .filter(|(_, cand)| *cand == value)
        .map(|(ix, _)| rational::ratio(*ix as i64, s.m))
        .collect();
    Ok(GameValue { value: s.to_rat(value), best_first_actions })
}

/// Worst-case payoff of `policy` in the discrete game, with its search
/// locations snapped to the grid.
pub fn value_of_policy(instance: &DiscreteInstance, policy: &dyn Searcher) -> Result<Rat> {
    let s = instance.scaled();
    let counter = AtomicUsize::new(0);
    let h = History::empty(instance.cost.clone(), Rat::one())?;
    let mut obs = Vec::with_capacity(s.depth);
    let v = s.policy_value(
        policy,
        &h,
        &mut obs,
        &[(0, s.unit)],
        0,
        s.depth,
        &counter,
    )?;
    Ok(s.to_rat(v.max(0)))
}

/// Checks that the builtin left-to-right policy leaves no profitable revision
/// at any history it can reach in the discrete game: at every on-path state,
/// its continuation value stays within `2 * (1/M + 1/Kz)` of the oracle's.
pub fn dynamic_consistency_check(instance: &DiscreteInstance) -> Result<bool> {
    dynamic_consistency_check_for(instance, &crate::sim::LeftToRight)
}

/// [`dynamic_consistency_check`] for an arbitrary policy.
pub fn dynamic_consistency_check_for(
    instance: &DiscreteInstance,
    policy: &dyn Searcher,
) -> Result<bool> {
    let s = instance.scaled();
    let counter = AtomicUsize::new(0);
    let tolerance = 2 * (s.ux + s.uz);
    let mut memo = HashMap::new();

    struct State {
        h: History,
        obs: Vec<(i64, i64)>,
        window: Vec<(i64, i64)>,
        zstar: i64,
        remaining: usize,
    }
    let root = State {
        h: History::empty(instance.cost.clone(), Rat::one())?,
        obs: Vec::new(),
        window: vec![(0, s.unit)],
        zstar: 0,
        remaining: s.depth,
    };
    let mut stack = vec![root];
    while let Some(state) = stack.pop() {
        let mut obs = state.obs.clone();
        let attained = s.policy_value(
            policy,
            &state.h,
            &mut obs,
            &state.window,
            state.zstar,
            state.remaining,
            &counter,
        )?;
        let optimal = s.value(
            &mut obs,
            &state.window,
            state.zstar,
            state.remaining,
            &mut memo,
            &counter,
        )?;
        debug_assert!(attained <= optimal);
        if optimal - attained > tolerance {
            return Ok(false);
        }
        if state.remaining == 0 {
            continue;
        }
        let xr = match policy.act(&state.h)? {
            PolicyAction::Stop => continue,
            PolicyAction::Search(xr) => xr,
        };
        let ix = s.snap(&xr);
        let x = ix * s.ux;
        let (gmin, gmax) = s
            .grid_extremes(&state.window)
            .expect("reachable states keep a grid point in the window");
        let Some((jlo, jhi)) = s.z_range(&state.obs, gmin, gmax, x) else {
            return Err(Error::Undefined(format!(
                "no grid quality is feasible at location {ix}/{}; refine the quality grid",
                s.m
            )));
        };
        for j in jlo..=jhi {
            let z = j * s.uz;
            let mut child_obs = state.obs.clone();
            child_obs.push((x, z));
            stack.push(State {
                h: state.h.with_observation(
                    rational::ratio(ix, s.m),
                    rational::ratio(j, s.kz),
                )?,
                obs: child_obs,
                window: subtract_ball(&state.window, x, s.unit - z),
                zstar: state.zstar.max(z),
                remaining: state.remaining - 1,
            });
        }
    }
    Ok(true)
}
