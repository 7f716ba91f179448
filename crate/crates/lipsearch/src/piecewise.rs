//! Exact piecewise-linear functions on [0, 1].
//!
//! Small internal workhorse: envelopes are minima of cones, the canonical
//! index is a max of envelopes and cones, and the fuzz generator grafts tent
//! functions onto random walks. All of that reduces to pointwise min/max of
//! two piecewise-linear functions, computed here with exact crossings.

use num_traits::{Signed, Zero};

use crate::rational::Rat;

/// Breakpoint list with strictly increasing x, first 0, last 1.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pl {
    pts: Vec<(Rat, Rat)>,
}

impl Pl {
    pub fn new(pts: Vec<(Rat, Rat)>) -> Self {
        debug_assert!(pts.len() >= 2);
        debug_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(pts.first().unwrap().0.is_zero());
        debug_assert!(pts.last().unwrap().0 == crate::rational::from_int(1));
        Pl { pts }
    }

    pub fn constant(v: Rat) -> Self {
        Pl::new(vec![
            (crate::rational::from_int(0), v.clone()),
            (crate::rational::from_int(1), v),
        ])
    }

    /// `z + slope * |x - apex|`; a downward cone is `slope < 0`.
    pub fn cone(apex: &Rat, z: &Rat, slope: &Rat) -> Self {
        let zero = crate::rational::from_int(0);
        let one = crate::rational::from_int(1);
        let mut pts = Vec::with_capacity(3);
        if apex > &zero {
            pts.push((zero.clone(), z + slope * apex));
        }
        pts.push((apex.clone(), z.clone()));
        if apex < &one {
            pts.push((one.clone(), z + slope * (&one - apex)));
        }
        Pl::new(pts)
    }

    pub fn into_points(self) -> Vec<(Rat, Rat)> {
        self.pts
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let i = self.pts.partition_point(|(px, _)| px <= x);
        if i == 0 {
            return self.pts[0].1.clone();
        }
        if i == self.pts.len() {
            return self.pts.last().unwrap().1.clone();
        }
        let (x0, y0) = &self.pts[i - 1];
        let (x1, y1) = &self.pts[i];
        if x == x0 {
            return y0.clone();
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn min_with(&self, other: &Pl) -> Pl {
        self.combine(other, false)
    }

    pub fn max_with(&self, other: &Pl) -> Pl {
        self.combine(other, true)
    }

    fn combine(&self, other: &Pl, take_max: bool) -> Pl {
        let mut xs: Vec<Rat> = Vec::with_capacity(self.pts.len() + other.pts.len());
        let (mut i, mut j) = (0, 0);
        while i < self.pts.len() || j < other.pts.len() {
            let x = match (self.pts.get(i), other.pts.get(j)) {
                (Some((a, _)), Some((b, _))) => {
                    if a < b {
                        i += 1;
                        a.clone()
                    } else if b < a {
                        j += 1;
                        b.clone()
                    } else {
                        i += 1;
                        j += 1;
                        a.clone()
                    }
                }
                (Some((a, _)), None) => {
                    i += 1;
                    a.clone()
                }
                (None, Some((b, _))) => {
                    j += 1;
                    b.clone()
                }
                (None, None) => unreachable!(),
            };
            xs.push(x);
        }

        let pick = |f: &Rat, g: &Rat| -> Rat {
            if (f >= g) == take_max { f.clone() } else { g.clone() }
        };

        let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(xs.len());
        for (k, x) in xs.iter().enumerate() {
            let f = self.eval(x);
            let g = other.eval(x);
            if k > 0 {
                // Insert the crossing if the winner flips strictly inside
                // the previous segment.
                let x0 = &xs[k - 1];
                let f0 = self.eval(x0);
                let g0 = other.eval(x0);
                let d0 = &f0 - &g0;
                let d1 = &f - &g;
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive())
                {
                    let t = &d0 / (&d0 - &d1);
                    let xc = x0 + (x - x0) * t;
                    let yc = self.eval(&xc);
                    debug_assert_eq!(yc, other.eval(&xc));
                    out.push((xc, yc));
                }
            }
            out.push((x.clone(), pick(&f, &g)));
        }
        simplify(&mut out);
        Pl::new(out)
    }
}

/// Drops interior breakpoints that sit on the line through their neighbors.
fn simplify(pts: &mut Vec<(Rat, Rat)>) {
    let mut k = 1;
    while k + 1 < pts.len() {
        let (x0, y0) = pts[k - 1].clone();
        let (x1, y1) = pts[k].clone();
        let (x2, y2) = pts[k + 1].clone();
        if (&y2 - &y0) * (&x1 - &x0) == (&y1 - &y0) * (&x2 - &x0) {
            pts.remove(k);
        } else {
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{from_int, ratio};

    fn pl(pts: &[(Rat, Rat)]) -> Pl {
        Pl::new(pts.to_vec())
    }

    #[test]
    fn eval_interpolates() {
        let f = pl(&[(from_int(0), from_int(0)), (from_int(1), from_int(1))]);
        assert_eq!(f.eval(&ratio(1, 3)), ratio(1, 3));
        let tent = Pl::cone(&ratio(1, 2), &from_int(1), &from_int(-1));
        assert_eq!(tent.eval(&ratio(1, 4)), ratio(3, 4));
        assert_eq!(tent.eval(&from_int(0)), ratio(1, 2));
    }

    #[test]
    fn min_finds_crossings() {
        let up = pl(&[(from_int(0), from_int(0)), (from_int(1), from_int(1))]);
        let down = pl(&[(from_int(0), from_int(1)), (from_int(1), from_int(0))]);
        let m = up.min_with(&down);
        assert_eq!(
            m.pts.as_slice(),
            &[
                (from_int(0), from_int(0)),
                (ratio(1, 2), ratio(1, 2)),
                (from_int(1), from_int(0)),
            ]
        );
        let mx = up.max_with(&down);
        assert_eq!(mx.eval(&ratio(1, 2)), ratio(1, 2));
        assert_eq!(mx.eval(&from_int(0)), from_int(1));
    }

    #[test]
    fn simplify_drops_collinear() {
        let f = pl(&[
            (from_int(0), from_int(0)),
            (ratio(1, 2), ratio(1, 2)),
            (from_int(1), from_int(1)),
        ]);
        let g = Pl::constant(from_int(5));
        let m = f.min_with(&g);
        assert_eq!(m.pts.len(), 2);
    }

    #[test]
    fn pointwise_agreement_on_a_grid() {
        let a = Pl::cone(&ratio(1, 4), &ratio(1, 2), &from_int(1));
        let b = Pl::cone(&ratio(2, 3), &ratio(1, 5), &from_int(1));
        let m = a.min_with(&b);
        let mx = a.max_with(&b);
        for k in 0..=24 {
            let x = ratio(k, 24);
            let (av, bv) = (a.eval(&x), b.eval(&x));
            assert_eq!(m.eval(&x), av.clone().min(bv.clone()));
            assert_eq!(mx.eval(&x), av.max(bv));
        }
    }
}
