//! Piecewise-linear quality landscapes.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::{self, from_int, Rat};

/// An L-Lipschitz piecewise-linear function on [0,1] under which some item
/// reaches the quality standard 1. This is the landscape the searcher walks.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityIndex {
    lipschitz: Rat,
    breakpoints: Vec<(Rat, Rat)>,
}

impl QualityIndex {
    /// Validates and builds. Error messages name the offending breakpoint
    /// or segment.
    pub fn new(lipschitz: Rat, breakpoints: Vec<(Rat, Rat)>) -> Result<Self> {
        if !lipschitz.is_positive() {
            return Err(Error::InvalidIndex(format!(
                "Lipschitz constant {lipschitz} is not positive"
            )));
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidIndex(
                "need at least two breakpoints to cover [0,1]".into(),
            ));
        }
        if breakpoints[0].0 != from_int(0) {
            return Err(Error::InvalidIndex(format!(
                "first breakpoint at x = {}, must be 0",
                breakpoints[0].0
            )));
        }
        if breakpoints.last().unwrap().0 != from_int(1) {
            return Err(Error::InvalidIndex(format!(
                "last breakpoint at x = {}, must be 1",
                breakpoints.last().unwrap().0
            )));
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            let ((x0, q0), (x1, q1)) = (&w[0], &w[1]);
            if x1 <= x0 {
                return Err(Error::InvalidIndex(format!(
                    "segment {i}: x must increase strictly ({x1} after {x0})"
                )));
            }
            if (q1 - q0).abs() > &lipschitz * (x1 - x0) {
                return Err(Error::InvalidIndex(format!(
                    "segment {i} (x in [{x0}, {x1}]): slope magnitude exceeds L = {lipschitz}"
                )));
            }
        }
        if breakpoints.iter().map(|(_, q)| q).max().unwrap() < &from_int(1) {
            return Err(Error::InvalidIndex(
                "index never attains the quality standard 1".into(),
            ));
        }
        Ok(QualityIndex { lipschitz, breakpoints })
    }

    pub fn lipschitz(&self) -> &Rat {
        &self.lipschitz
    }

    pub fn breakpoints(&self) -> &[(Rat, Rat)] {
        &self.breakpoints
    }

    /// Exact interpolated value; x outside [0,1] clamps to the endpoints.
    pub fn evaluate(&self, x: &Rat) -> Rat {
        let pts = &self.breakpoints;
        let i = pts.partition_point(|(px, _)| px <= x);
        if i == 0 {
            return pts[0].1.clone();
        }
        if i == pts.len() {
            return pts.last().unwrap().1.clone();
        }
        let (x0, q0) = &pts[i - 1];
        let (x1, q1) = &pts[i];
        if x == x0 {
            return q0.clone();
        }
        q0 + (q1 - q0) * (x - x0) / (x1 - x0)
    }

    /// Maximum over [0,1]; attained at a breakpoint.
    pub fn max_value(&self) -> Rat {
        self.breakpoints.iter().map(|(_, q)| q).max().unwrap().clone()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "L": rational::to_json(&self.lipschitz),
            "breakpoints": self.breakpoints
                .iter()
                .map(|(x, q)| vec![rational::to_json(x), rational::to_json(q)])
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed("quality index must be a JSON object".into()))?;
        let l = obj
            .get("L")
            .ok_or_else(|| Error::Malformed("missing \"L\"".into()))?;
        let bps = obj
            .get("breakpoints")
            .and_then(|b| b.as_array())
            .ok_or_else(|| Error::Malformed("missing \"breakpoints\" array".into()))?;
        let mut breakpoints = Vec::with_capacity(bps.len());
        for (i, pair) in bps.iter().enumerate() {
            let pair = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Malformed(format!("breakpoint {i} is not an [x, q] pair")))?;
            breakpoints.push((rational::from_json(&pair[0])?, rational::from_json(&pair[1])?));
        }
        QualityIndex::new(rational::from_json(l)?, breakpoints)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_json(&v)
    }
}

/// The symmetric tent peaking at 1 over `peak`, the simplest landscape with
/// a single target.
pub fn tent(lipschitz: Rat, peak: Rat) -> Result<QualityIndex> {
    let one = from_int(1);
    let mut pts = Vec::with_capacity(3);
    if peak > from_int(0) {
        pts.push((from_int(0), &one - &lipschitz * &peak));
    }
    if peak < one {
        pts.push((peak.clone(), one.clone()));
        pts.push((from_int(1), &one - &lipschitz * (&one - &peak)));
    } else {
        pts.push((peak, one));
    }
    QualityIndex::new(lipschitz, pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn evaluate_examples() {
        let q = QualityIndex::new(
            from_int(1),
            vec![(from_int(0), from_int(0)), (from_int(1), from_int(1))],
        )
        .unwrap();
        assert_eq!(q.evaluate(&ratio(1, 2)), ratio(1, 2));

        let q = QualityIndex::new(
            from_int(1),
            vec![
                (from_int(0), ratio(1, 5)),
                (ratio(2, 5), ratio(3, 5)),
                (from_int(1), from_int(1)),
            ],
        )
        .unwrap();
        assert_eq!(q.evaluate(&ratio(1, 5)), ratio(2, 5));

        let q = QualityIndex::new(
            from_int(1),
            vec![(from_int(0), from_int(1)), (from_int(1), from_int(0))],
        )
        .unwrap();
        assert_eq!(q.evaluate(&from_int(0)), from_int(1));
    }

    #[test]
    fn validation_names_the_offender() {
        let err = QualityIndex::new(
            from_int(1),
            vec![
                (from_int(0), from_int(0)),
                (ratio(1, 10), ratio(1, 2)),
                (from_int(1), from_int(1)),
            ],
        )
        .unwrap_err();
        assert!(matches!(&err, Error::InvalidIndex(m) if m.contains("segment 0")), "{err}");

        let err = QualityIndex::new(
            from_int(1),
            vec![
                (from_int(0), from_int(0)),
                (ratio(1, 2), ratio(1, 4)),
                (ratio(1, 2), ratio(1, 4)),
                (from_int(1), from_int(1)),
            ],
        )
        .unwrap_err();
        assert!(matches!(&err, Error::InvalidIndex(m) if m.contains("segment 1")), "{err}");

        let err = QualityIndex::new(
            from_int(1),
            vec![(from_int(0), from_int(0)), (from_int(1), ratio(9, 10))],
        )
        .unwrap_err();
        assert!(matches!(&err, Error::InvalidIndex(m) if m.contains("never attains")), "{err}");

        let err = QualityIndex::new(
            from_int(1),
            vec![(ratio(1, 10), from_int(0)), (from_int(1), from_int(1))],
        )
        .unwrap_err();
        assert!(matches!(&err, Error::InvalidIndex(m) if m.contains("first breakpoint")), "{err}");
    }

    #[test]
    fn tent_reaches_one_at_the_peak() {
        let t = tent(from_int(1), ratio(19, 20)).unwrap();
        assert_eq!(t.evaluate(&ratio(19, 20)), from_int(1));
        assert_eq!(t.evaluate(&ratio(2, 5)), ratio(9, 20));
        assert_eq!(t.max_value(), from_int(1));
        // Peaks at the boundary produce two breakpoints, not three.
        assert_eq!(tent(from_int(1), from_int(1)).unwrap().breakpoints().len(), 2);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = tent(from_int(1), ratio(11, 15)).unwrap();
        let s = serde_json::to_string(&t.to_json()).unwrap();
        let back = QualityIndex::from_json_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
