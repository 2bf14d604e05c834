//! Budget allocation across separable convex piecewise-linear costs.
//!
//! Minimizes `sum_y w_y c_y(x_y)` subject to `sum_y w_y x_y = budget`, where
//! each `c_y` is convex and piecewise linear on `[0, x_max_y]`. Spending one
//! unit of weighted budget on a segment of slope `s` changes the objective by
//! `s`, so the optimum spends on the most negative slopes first.

/// Knots `(x, c(x))` of a convex piecewise-linear function, `x` ascending
/// from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub knots: Vec<(f64, f64)>,
}

impl Curve {
    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                if x1 == x0 {
                    return y1;
                }
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        k[k.len() - 1].1
    }

    pub fn x_max(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    /// Lower convex hull of `points` (sorted by `x`).
    pub fn lower_hull(points: &[(f64, f64)]) -> Curve {
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for &p in points {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // drop b if it lies on or above the chord a -> p
                let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        Curve { knots: hull }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Greedy steepest-descent allocation. Ties in slope go to the smaller
/// coordinate index. The budget is clamped to what the curves can absorb.
pub fn allocate(weights: &[f64], curves: &[Curve], budget: f64) -> Allocation {
    assert_eq!(weights.len(), curves.len());
    let mut segments: Vec<(f64, usize, usize)> = Vec::new();
    for (y, c) in curves.iter().enumerate() {
        for (s, w) in c.knots.windows(2).enumerate() {
            let dx = w[1].0 - w[0].0;
            if dx > 0.0 {
                segments.push(((w[1].1 - w[0].1) / dx, y, s));
            }
        }
    }
    segments.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut x: Vec<f64> = vec![0.0; curves.len()];
    let mut left = budget.max(0.0);
    for (_, y, s) in segments {
        if left <= 0.0 {
            break;
        }
        let w = weights[y];
        if w <= 0.0 {
            continue;
        }
        let (x0, x1) = (curves[y].knots[s].0, curves[y].knots[s + 1].0);
        let cap = (x1 - x0) * w;
        if cap <= left {
            x[y] = x1;
            left -= cap;
        } else {
            x[y] = x0 + left / w;
            left = 0.0;
        }
    }
    let value = weights.iter().zip(curves).zip(&x).map(|((w, c), &xi)| w * c.eval(xi)).sum();
    Allocation { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_concave_bumps() {
        let h = Curve::lower_hull(&[(0.0, 1.0), (0.5, 0.9), (1.0, 0.0)]);
        assert_eq!(h.knots, vec![(0.0, 1.0), (1.0, 0.0)]);
        let h = Curve::lower_hull(&[(0.0, 1.0), (0.5, 0.2), (1.0, 0.0)]);
        assert_eq!(h.knots.len(), 3);
    }

    #[test]
    fn greedy_spends_on_steepest_first() {
        let a = Curve { knots: vec![(0.0, 3.0), (1.0, 0.0)] };
        let b = Curve { knots: vec![(0.0, 1.0), (1.0, 0.0)] };
        let r = allocate(&[0.5, 0.5], &[a, b], 0.25);
        assert_eq!(r.x, vec![0.5, 0.0]);
        assert!((r.value - (0.5 * 1.5 + 0.5)).abs() < 1e-15);
    }
}
