//! Histories, envelopes, and the window calculus.
//!
//! A history pins down everything the searcher knows: each observation
//! (x_i, z_i) caps the landscape from above by the cone z_i + L|x − x_i| and
//! from below by z_i − L|x − x_i|, and the standing promise that some item
//! reaches quality 1 carves an open ball around every observation out of the
//! set of possible target locations.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::index::QualityIndex;
use crate::piecewise::Pl;
use crate::rational::{self, from_int, Rat};
use crate::window::SearchWindow;

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Rat,
    pub z: Rat,
}

impl Observation {
    pub fn new(x: Rat, z: Rat) -> Self {
        Observation { x, z }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyAction {
    Search(Rat),
    Stop,
}

/// Partial search record plus the game's constants.
///
/// Construction checks domains (locations in [0,1], qualities below the
/// Lipschitz cap, positive c and L). Feasibility, meaning pairwise Lipschitz
/// consistency and a nonempty window, is checked by the operations that
/// need it, so infeasible histories are representable and their error paths
/// testable.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    cost: Rat,
    lipschitz: Rat,
    observations: Vec<Observation>,
}

impl History {
    pub fn new(cost: Rat, lipschitz: Rat, observations: Vec<Observation>) -> Result<Self> {
        if !cost.is_positive() {
            return Err(Error::OutOfRange(format!("search cost {cost} must be > 0")));
        }
        if !lipschitz.is_positive() {
            return Err(Error::OutOfRange(format!(
                "Lipschitz constant {lipschitz} must be > 0"
            )));
        }
        let cap = from_int(1) + &lipschitz;
        for (i, o) in observations.iter().enumerate() {
            if o.x < from_int(0) || o.x > from_int(1) {
                return Err(Error::OutOfRange(format!(
                    "observation {i}: location {} outside [0,1]",
                    o.x
                )));
            }
            if o.z > cap {
                return Err(Error::OutOfRange(format!(
                    "observation {i}: quality {} exceeds 1 + L = {cap}",
                    o.z
                )));
            }
        }
        Ok(History { cost, lipschitz, observations })
    }

    pub fn empty(cost: Rat, lipschitz: Rat) -> Result<Self> {
        History::new(cost, lipschitz, Vec::new())
    }

    pub fn cost(&self) -> &Rat {
        &self.cost
    }

    pub fn lipschitz(&self) -> &Rat {
        &self.lipschitz
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Functional append; the receiver is untouched.
    pub fn with_observation(&self, x: Rat, z: Rat) -> Result<Self> {
        let mut obs = self.observations.clone();
        obs.push(Observation::new(x, z));
        History::new(self.cost.clone(), self.lipschitz.clone(), obs)
    }

    /// z*: best quality seen so far, never below the outside option 0.
    pub fn best_quality(&self) -> Rat {
        self.observations
            .iter()
            .map(|o| o.z.clone())
            .max()
            .map_or_else(|| from_int(0), |z| z.max(from_int(0)))
    }

    /// Checks |z_i − z_j| ≤ L·|x_i − x_j| for every pair.
    pub fn pairwise_consistent(&self) -> Result<()> {
        for i in 0..self.observations.len() {
            for j in (i + 1)..self.observations.len() {
                let (a, b) = (&self.observations[i], &self.observations[j]);
                if (&a.z - &b.z).abs() > &self.lipschitz * (&a.x - &b.x).abs() {
                    return Err(Error::InfeasibleHistory(format!(
                        "observations {i} and {j} violate the Lipschitz bound: \
                         |{} − {}| > L·|{} − {}|",
                        a.z, b.z, a.x, b.x
                    )));
                }
            }
        }
        Ok(())
    }

    /// Possible target locations: [0,1] minus an open ball of radius
    /// (1 − z_i)/L around each observation. May be empty.
    pub fn window(&self) -> SearchWindow {
        let mut w = SearchWindow::full();
        for o in &self.observations {
            let radius = (from_int(1) - &o.z) / &self.lipschitz;
            w = w.subtract_open_ball(&o.x, &radius);
        }
        w
    }

    /// As `window`, but an empty result is the error it deserves to be.
    pub fn search_window(&self) -> Result<SearchWindow> {
        self.pairwise_consistent()?;
        let w = self.window();
        if w.is_empty() {
            return Err(Error::InfeasibleHistory(
                "search window is empty: no target location remains".into(),
            ));
        }
        Ok(w)
    }

    /// Both feasibility conditions at once: pairwise Lipschitz consistency
    /// and a nonempty window. Exactly the cases where a consistent index
    /// exists, which `canonical_index` then constructs.
    pub fn validate_feasible(&self) -> Result<()> {
        self.search_window().map(|_| ())
    }

    /// Ordered means the window is one interval with right endpoint 1; the
    /// shape left-to-right play preserves. Empty histories are ordered.
    pub fn is_ordered(&self) -> bool {
        let w = self.window();
        w.is_single_interval() && w.max() == Some(&from_int(1))
    }

    /// Pointwise least upper bound on q(x) over consistent indices; `None`
    /// when nothing constrains it (empty history).
    pub fn upper_envelope(&self, x: &Rat) -> Option<Rat> {
        self.observations
            .iter()
            .map(|o| &o.z + &self.lipschitz * (x - &o.x).abs())
            .min()
    }

    /// Pointwise least quality consistent with the observations and with a
    /// target somewhere in the window. The target can hide at the far end
    /// of the window, so the floor is 1 − L·(max distance into the window).
    pub fn lower_envelope(&self, x: &Rat) -> Result<Rat> {
        let w = self.search_window()?;
        let floor = from_int(1) - &self.lipschitz * w.max_distance(x).unwrap();
        let cones = self
            .observations
            .iter()
            .map(|o| &o.z - &self.lipschitz * (x - &o.x).abs())
            .max();
        Ok(match cones {
            Some(c) => c.max(floor),
            None => floor,
        })
    }

    /// The constructive witness of feasibility: min(1, upper envelope),
    /// pushed back up by the observation cones where they demand more. It is
    /// L-Lipschitz, passes through every observation, and (for histories
    /// with qualities ≤ 1) attains 1 exactly on the search window.
    pub fn canonical_index(&self) -> Result<QualityIndex> {
        self.validate_feasible()?;
        let mut f = Pl::constant(from_int(1));
        for o in &self.observations {
            f = f.min_with(&Pl::cone(&o.x, &o.z, &self.lipschitz));
        }
        for o in &self.observations {
            f = f.max_with(&Pl::cone(&o.x, &o.z, &(-self.lipschitz.clone())));
        }
        QualityIndex::new(self.lipschitz.clone(), f.into_points())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "c": rational::to_json(&self.cost),
            "L": rational::to_json(&self.lipschitz),
            "observations": self.observations
                .iter()
                .map(|o| vec![rational::to_json(&o.x), rational::to_json(&o.z)])
                .collect::<Vec<_>>(),
        })
    }

    /// Strict file-boundary parse: domain checks plus full feasibility.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed("history must be a JSON object".into()))?;
        let c = rational::from_json(
            obj.get("c").ok_or_else(|| Error::Malformed("missing \"c\"".into()))?,
        )?;
        let l = rational::from_json(
            obj.get("L").ok_or_else(|| Error::Malformed("missing \"L\"".into()))?,
        )?;
        let raw = obj
            .get("observations")
            .and_then(|o| o.as_array())
            .ok_or_else(|| Error::Malformed("missing \"observations\" array".into()))?;
        let mut obs = Vec::with_capacity(raw.len());
        for (i, pair) in raw.iter().enumerate() {
            let pair = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Malformed(format!("observation {i} is not an [x, z] pair")))?;
            obs.push(Observation::new(
                rational::from_json(&pair[0])?,
                rational::from_json(&pair[1])?,
            ));
        }
        let h = History::new(c, l, obs)?;
        h.validate_feasible()?;
        Ok(h)
    }
}
