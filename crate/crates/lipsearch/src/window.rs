//! Search windows: the subset of [0,1] where a target can still hide.
//!
//! A window is a sorted union of disjoint closed intervals, degenerate
//! intervals allowed. Subtracting an *open* ball around each observation is
//! what keeps isolated boundary points alive, and those points matter: the
//! adversary's measure argument bottoms out at a window of measure zero that
//! is still nonempty.

use num_traits::{Signed, Zero};

use crate::rational::{from_int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchWindow {
    intervals: Vec<(Rat, Rat)>,
}

impl SearchWindow {
    /// The whole space [0,1].
    pub fn full() -> Self {
        SearchWindow {
            intervals: vec![(from_int(0), from_int(1))],
        }
    }

    pub fn empty() -> Self {
        SearchWindow { intervals: Vec::new() }
    }

    /// Builds a window from arbitrary closed intervals: sorts, merges
    /// overlapping or touching pieces, keeps degenerate points.
    pub fn from_intervals(mut intervals: Vec<(Rat, Rat)>) -> Self {
        intervals.retain(|(a, b)| a <= b);
        intervals.sort();
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some((_, pb)) if a <= *pb => {
                    if b > *pb {
                        *pb = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        SearchWindow { intervals: merged }
    }

    /// Removes the open ball (center − radius, center + radius). A ball of
    /// non-positive radius removes the empty set.
    pub fn subtract_open_ball(&self, center: &Rat, radius: &Rat) -> Self {
        if radius <= &Rat::zero() {
            return self.clone();
        }
        let lo = center - radius;
        let hi = center + radius;
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        for (a, b) in &self.intervals {
            if &hi <= a || &lo >= b {
                out.push((a.clone(), b.clone()));
                continue;
            }
            if &lo >= a {
                out.push((a.clone(), lo.clone()));
            }
            if &hi <= b {
                out.push((hi.clone(), b.clone()));
            }
        }
        SearchWindow { intervals: out }
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure; isolated points contribute nothing.
    pub fn measure(&self) -> Rat {
        self.intervals
            .iter()
            .fold(Rat::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn min(&self) -> Option<&Rat> {
        self.intervals.first().map(|(a, _)| a)
    }

    pub fn max(&self) -> Option<&Rat> {
        self.intervals.last().map(|(_, b)| b)
    }

    /// max(b) − min(a); zero on a single point.
    pub fn span(&self) -> Option<Rat> {
        Some(self.max()? - self.min()?)
    }

    pub fn is_single_interval(&self) -> bool {
        self.intervals.len() == 1
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.intervals.iter().any(|(a, b)| a <= x && x <= b)
    }

    /// Largest distance from x to a point of the window; the target can
    /// hide this far away.
    pub fn max_distance(&self, x: &Rat) -> Option<Rat> {
        let lo = (x - self.min()?).abs();
        let hi = (x - self.max()?).abs();
        Some(lo.max(hi))
    }

    /// True when every point of `self` lies inside `other`.
    pub fn subset_of(&self, other: &SearchWindow) -> bool {
        self.intervals.iter().all(|(a, b)| {
            other
                .intervals
                .iter()
                .any(|(oa, ob)| oa <= a && b <= ob)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn subtracting_an_open_ball_keeps_endpoints() {
        let w = SearchWindow::full().subtract_open_ball(&ratio(2, 5), &ratio(2, 5));
        assert_eq!(w.intervals(), &[(from_int(0), from_int(0)), (ratio(4, 5), from_int(1))]);
        assert_eq!(w.measure(), ratio(1, 5));
        assert!(!w.is_single_interval());
        assert!(w.contains(&from_int(0)));
        assert!(!w.contains(&ratio(1, 2)));
    }

    #[test]
    fn zero_radius_removes_nothing() {
        let w = SearchWindow::full().subtract_open_ball(&ratio(1, 2), &from_int(0));
        assert_eq!(w, SearchWindow::full());
        let w = SearchWindow::full().subtract_open_ball(&ratio(1, 2), &ratio(-1, 4));
        assert_eq!(w, SearchWindow::full());
    }

    #[test]
    fn merge_normalizes_touching_pieces() {
        let w = SearchWindow::from_intervals(vec![
            (ratio(1, 2), from_int(1)),
            (from_int(0), ratio(1, 2)),
        ]);
        assert_eq!(w.intervals(), &[(from_int(0), from_int(1))]);
    }

    #[test]
    fn max_distance_uses_extremes() {
        let w = SearchWindow::from_intervals(vec![
            (from_int(0), from_int(0)),
            (ratio(4, 5), from_int(1)),
        ]);
        assert_eq!(w.max_distance(&ratio(9, 10)), Some(ratio(9, 10)));
        assert_eq!(w.max_distance(&ratio(1, 10)), Some(ratio(9, 10)));
    }

    #[test]
    fn covering_ball_empties_the_window() {
        let w = SearchWindow::full().subtract_open_ball(&ratio(1, 2), &from_int(1));
        assert!(w.is_empty());
        assert_eq!(w.measure(), Rat::zero());
        assert_eq!(w.max_distance(&ratio(1, 2)), None);
    }
}
