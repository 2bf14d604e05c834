//! Guessing with side information `Y` available to the guesser.
//!
//! The optimal strategy guesses each conditional row optimally and splits
//! the error budget across rows, so the minimal moment is the cheapest
//! allocation of `eps` over the per-row moment curves `eps_y -> M*(eps_y)`.

use serde::Serialize;

use crate::alloc::{allocate, Curve};
use crate::entropy::{kuzuoka_conditional_smooth, EntropyOrder};
use crate::error::{check_eps, check_rho, Result};
use crate::guessing::index_pow;
use crate::pmf::{z_variable, JointPmf, ListSize, Pmf};

/// The exact moment as a piecewise-linear function of the error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCurve {
    /// `(eps, moment)` knots, `eps` ascending from 0 to 1.
    pub knots: Vec<(f64, f64)>,
}

impl MomentCurve {
    pub fn eval(&self, eps: f64) -> f64 {
        self.as_curve().eval(eps)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }

    fn as_curve(&self) -> Curve {
        Curve { knots: self.knots.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsAllocation {
    pub eps_y: Vec<f64>,
}

pub fn moment_curve(p_row: &Pmf, rho: f64, d: f64) -> Result<MomentCurve> {
    moment_curve_l(p_row, rho, ListSize::from_distortion(d)?)
}

/// Knots sit at the tail sums of `P_Z`; while list `k` is being cut the
/// slope is `-k^rho`.
pub fn moment_curve_l(p_row: &Pmf, rho: f64, l: ListSize) -> Result<MomentCurve> {
    check_rho(rho)?;
    let z = z_variable(p_row, l);
    let pz = z.probs();
    let m = pz.len();
    // value at eps = tail(k) is sum_{i<=k} P_Z(i) i^rho
    let mut head = vec![0.0; m + 1];
    for (i, &v) in pz.iter().enumerate() {
        head[i + 1] = head[i] + v * index_pow(i as u64 + 1, rho);
    }
    let mut knots = vec![(0.0, head[m])];
    let mut tail = 0.0;
    for k in (1..m).rev() {
        tail += pz[k];
        if tail > knots[knots.len() - 1].0 {
            knots.push((tail.min(1.0), head[k]));
        }
    }
    if knots[knots.len() - 1].0 >= 1.0 {
        knots.pop();
    }
    knots.push((1.0, 0.0));
    Ok(MomentCurve { knots })
}

pub fn conditional_min_moment(j: &JointPmf, rho: f64, d: f64, eps: f64) -> Result<(f64, EpsAllocation)> {
    conditional_min_moment_l(j, rho, ListSize::from_distortion(d)?, eps)
}

/// Greedy spend of the budget on the steepest curve segments first.
pub fn conditional_min_moment_l(
    j: &JointPmf,
    rho: f64,
    l: ListSize,
    eps: f64,
) -> Result<(f64, EpsAllocation)> {
    check_eps(eps)?;
    let curves: Vec<Curve> = (0..j.n_y())
        .map(|y| moment_curve_l(&j.conditional(y), rho, l).map(|c| c.as_curve()))
        .collect::<Result<_>>()?;
    let a = allocate(&j.p_y(), &curves, eps);
    Ok((a.value, EpsAllocation { eps_y: a.x }))
}

/// Joint of `(Z, Y)` with `Z` the per-row list index.
pub fn z_joint(j: &JointPmf, l: ListSize) -> Result<JointPmf> {
    let py = j.p_y();
    let rows: Vec<Vec<f64>> = (0..j.n_y())
        .map(|y| z_variable(&j.conditional(y), l).probs().iter().map(|v| v * py[y]).collect())
        .collect();
    let width = rows.iter().map(Vec::len).max().unwrap_or(1);
    let padded = rows
        .into_iter()
        .map(|mut r| {
            r.resize(width, 0.0);
            r
        })
        .collect();
    JointPmf::with_atol(padded, j.atol())
}

fn log_factor(j: &JointPmf, rho: f64) -> f64 {
    (1.0 + (j.support_x() as f64).log2()).powf(-rho)
}

pub fn theorem2_bounds(j: &JointPmf, rho: f64, d: f64, eps: f64) -> Result<(f64, f64)> {
    theorem2_bounds_l(j, rho, ListSize::from_distortion(d)?, eps)
}

pub fn theorem2_bounds_l(j: &JointPmf, rho: f64, l: ListSize, eps: f64) -> Result<(f64, f64)> {
    let order = EntropyOrder::from_rho(rho)?;
    let h = kuzuoka_conditional_smooth(&z_joint(j, l)?, order, eps)?;
    let upper = (rho * h).exp2();
    Ok((upper, log_factor(j, rho) * upper))
}

pub fn prop4_bounds(j: &JointPmf, rho: f64, d: f64, eps: f64) -> Result<(f64, f64)> {
    prop4_bounds_l(j, rho, ListSize::from_distortion(d)?, eps)
}

pub fn prop4_bounds_l(j: &JointPmf, rho: f64, l: ListSize, eps: f64) -> Result<(f64, f64)> {
    let order = EntropyOrder::from_rho(rho)?;
    let h = kuzuoka_conditional_smooth(j, order, eps)?;
    let core = (rho * h - rho * l.log2()).exp2();
    let upper = if l.get() == 1 { (rho * h).exp2() } else { 1.0 - eps + rho.exp2() * core };
    Ok((upper, log_factor(j, rho) * core))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideInfoReport {
    pub exact: f64,
    pub eps_y: Vec<f64>,
    pub thm2_upper: f64,
    pub thm2_lower: f64,
    pub prop4_upper: f64,
    pub prop4_lower: f64,
}

impl SideInfoReport {
    pub fn min_slack(&self) -> f64 {
        [
            self.exact - self.thm2_lower,
            self.thm2_upper - self.exact,
            self.exact - self.prop4_lower,
            self.prop4_upper - self.exact,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

pub fn side_info_report_l(j: &JointPmf, rho: f64, l: ListSize, eps: f64) -> Result<SideInfoReport> {
    let (exact, alloc) = conditional_min_moment_l(j, rho, l, eps)?;
    let (thm2_upper, thm2_lower) = theorem2_bounds_l(j, rho, l, eps)?;
    let (prop4_upper, prop4_lower) = prop4_bounds_l(j, rho, l, eps)?;
    Ok(SideInfoReport { exact, eps_y: alloc.eps_y, thm2_upper, thm2_lower, prop4_upper, prop4_lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guessing::{min_moment, theorem1_bounds};
    use crate::oracle::conditional_moment_grid_oracle;

    #[test]
    fn point_mass_curve() {
        let c = moment_curve(&Pmf::new(&[1.0]).unwrap(), 1.0, 0.0).unwrap();
        assert_eq!(c.knots, vec![(0.0, 1.0), (1.0, 0.0)]);
    }

    #[test]
    fn dyadic_curve() {
        let p = Pmf::new(&[0.5, 0.25, 0.125, 0.125]).unwrap();
        let c = moment_curve(&p, 1.0, 1.0).unwrap();
        assert_eq!(c.knots, vec![(0.0, 1.25), (0.25, 0.75), (1.0, 0.0)]);
        assert_eq!(c.slopes(), vec![-2.0, -1.0]);
        assert!((c.eval(0.125) - 1.0).abs() < 1e-15);
        for k in 0..20 {
            let e = k as f64 * 0.05;
            let m = min_moment(&p, 1.0, 1.0, e).unwrap().moment;
            assert!((c.eval(e) - m).abs() < 1e-12, "eps {e}");
        }
    }

    #[test]
    fn curve_is_convex_and_anchored() {
        for seed in 0..30 {
            let p = crate::pmf::generate(crate::pmf::Generator::Random { m: 8, seed }).unwrap();
            for (rho, d) in [(0.5, 0.0), (1.0, 1.0), (3.0, 1.7)] {
                let c = moment_curve(&p, rho, d).unwrap();
                let s = c.slopes();
                assert!(s.windows(2).all(|w| w[0] <= w[1]));
                assert!(s.iter().all(|&x| x < 0.0));
                let m0 = min_moment(&p, rho, d, 0.0).unwrap().moment;
                assert!((c.eval(0.0) - m0).abs() < 1e-12);
                assert_eq!(*c.knots.last().unwrap(), (1.0, 0.0));
            }
        }
    }

    #[test]
    fn single_row_and_identity() {
        let row = [0.4, 0.3, 0.2, 0.1];
        let j = JointPmf::new(vec![row.to_vec()]).unwrap();
        let p = Pmf::new(&row).unwrap();
        for eps in [0.0, 0.15, 0.6] {
            let (v, _) = conditional_min_moment(&j, 1.3, 1.0, eps).unwrap();
            assert!((v - min_moment(&p, 1.3, 1.0, eps).unwrap().moment).abs() < 1e-12);
        }
        let diag = JointPmf::new(vec![vec![0.2, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.3]]).unwrap();
        for eps in [0.0, 0.1, 0.45, 0.9] {
            for rho in [0.5, 2.0] {
                let (v, a) = conditional_min_moment(&diag, rho, 0.0, eps).unwrap();
                assert!((v - (1.0 - eps)).abs() < 1e-12);
                let spent: f64 = a.eps_y.iter().zip(diag.p_y()).map(|(e, w)| e * w).sum();
                assert!((spent - eps).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_grid_oracle() {
        for seed in 0..5 {
            let j = JointPmf::random(2, 4, 40 + seed).unwrap();
            let (v, _) = conditional_min_moment(&j, 1.0, 1.0, 0.1).unwrap();
            let g = conditional_moment_grid_oracle(&j, 1.0, ListSize::new(2).unwrap(), 0.1, 1e-5).unwrap();
            assert!((v - g).abs() < 1e-9, "{v} vs {g}");
        }
    }

    #[test]
    fn degenerate_bound_reductions() {
        let row = [0.4, 0.3, 0.2, 0.1];
        let p = Pmf::new(&row).unwrap();
        let single = JointPmf::new(vec![row.to_vec()]).unwrap();
        let indep = JointPmf::independent(&row, &[0.7, 0.3]).unwrap();
        for (k, j) in [single, indep].into_iter().enumerate() {
            for eps in [0.0, 0.2] {
                let (u, l) = theorem2_bounds(&j, 1.0, 1.0, eps).unwrap();
                let (u1, l1) = theorem1_bounds(&p, 1.0, 1.0, eps).unwrap();
                if k == 0 || eps == 0.0 {
                    assert!((u - u1).abs() < 1e-10 && (l - l1).abs() < 1e-10);
                } else {
                    // independent rows may still share the budget unevenly
                    assert!(u <= u1 + 1e-12 && l <= l1 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sandwiches_on_random_joints() {
        for seed in 0..20 {
            let j = JointPmf::random(3, 5, seed).unwrap();
            for (rho, d, eps) in [(1.0, 1.0, 0.1), (0.5, 0.0, 0.3), (2.0, 1.6, 0.0)] {
                let r = side_info_report_l(&j, rho, ListSize::from_distortion(d).unwrap(), eps).unwrap();
                assert!(r.min_slack() >= -1e-9, "{seed}: {r:?}");
                let marg = min_moment(&j.marginal_x(), rho, d, eps).unwrap().moment;
                assert!(r.exact <= marg + 1e-12);
            }
        }
    }
}
