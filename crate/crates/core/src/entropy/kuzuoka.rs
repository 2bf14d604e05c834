//! Kuzuoka's conditional smooth Rényi entropy.
//!
//! The value is `(a/(1-a)) log2 min G`, where
//! `G(e) = sum_y P_Y(y) f_y(e_y)` over allocations with
//! `sum_y P_Y(y) e_y = eps`, `0 <= e_y <= 1`, and
//! `f_y(e) = (sum_j Q^e(j|y)^a)^(1/a)` is the smoothed row norm.
//!
//! Between consecutive breakpoints `1 - c_k` (tail sums of the sorted row)
//! only the last kept mass `t` moves, and `t -> (S + t^a)^(1/a)` is concave
//! for `a < 1`. So `G` is concave on every cell of the breakpoint grid, and a
//! minimum sits at a vertex of some cell intersected with the constraint
//! hyperplane: every coordinate but one is at a breakpoint. Small problems
//! enumerate those vertices exactly. Larger ones start from the minimizer of
//! the convex envelope (which also gives a lower bound) and run pairwise
//! exchange, where each exchange is an exact line search over the merged
//! breakpoints of the two coordinates.

use super::{EntropyOrder, MASS_FLOOR};
use crate::alloc::{allocate, Curve};
use crate::error::{check_eps, Error, Result};
use crate::pmf::{JointPmf, CUM_SLACK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest vertex count handled by exhaustive enumeration.
    pub max_vertices: u64,
    /// Sweep cap for the pairwise-exchange fallback.
    pub max_sweeps: usize,
    /// Relative improvement below which an exchange is ignored.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_vertices: 4_000_000, max_sweeps: 10_000, tol: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KuzuokaSolution {
    /// Entropy in bits.
    pub value: f64,
    pub eps_y: Vec<f64>,
    /// Minimized `G`.
    pub objective: f64,
    /// Convex-envelope lower bound on `G`.
    pub lower_bound: f64,
    /// True when every vertex was enumerated.
    pub exhaustive: bool,
}

pub fn kuzuoka_conditional_smooth(j: &JointPmf, order: EntropyOrder, eps: f64) -> Result<f64> {
    kuzuoka_solve(j, order, eps).map(|s| s.value)
}

pub fn kuzuoka_solve(j: &JointPmf, order: EntropyOrder, eps: f64) -> Result<KuzuokaSolution> {
    kuzuoka_solve_with(j, order, eps, SolverOptions::default())
}

pub fn kuzuoka_solve_with(
    j: &JointPmf,
    order: EntropyOrder,
    eps: f64,
    opts: SolverOptions,
) -> Result<KuzuokaSolution> {
    let a = order.alpha();
    if a >= 1.0 {
        return Err(Error::BadParameter("this quantity needs alpha < 1".into()));
    }
    check_eps(eps)?;
    let w = j.p_y();
    let rows: Vec<Row> = (0..j.n_y()).map(|y| Row::new(j.conditional(y).probs(), a)).collect();

    let hull: Vec<Curve> = rows
        .iter()
        .map(|r| {
            let pts: Vec<(f64, f64)> = r.breaks.iter().zip(&r.break_vals).map(|(&x, &v)| (x, v)).collect();
            Curve::lower_hull(&pts)
        })
        .collect();
    let envelope = allocate(&w, &hull, eps);

    let vertices = vertex_count(&rows);
    let (eps_y, objective, exhaustive) = if vertices <= opts.max_vertices as f64 {
        let (e, g) = enumerate_vertices(&rows, &w, eps);
        (e, g, true)
    } else {
        let (e, g) = pairwise_descent(&rows, &w, envelope.x.clone(), opts)?;
        (e, g, false)
    };
    Ok(KuzuokaSolution {
        value: a / (1.0 - a) * objective.log2(),
        eps_y,
        objective,
        lower_bound: envelope.value,
        exhaustive,
    })
}

/// One conditional row with prefix data for O(log m) evaluation.
struct Row {
    alpha: f64,
    probs: Vec<f64>,
    /// `cum[k]` = mass of the first `k` atoms.
    cum: Vec<f64>,
    /// `pow[k]` = sum of `p^a` over the first `k` atoms.
    pow: Vec<f64>,
    /// Kinks of `f` in `[0, 1]`, ascending, including both ends.
    breaks: Vec<f64>,
    break_vals: Vec<f64>,
}

impl Row {
    fn new(probs: &[f64], alpha: f64) -> Self {
        let m = probs.len();
        let mut cum = vec![0.0; m + 1];
        let mut pow = vec![0.0; m + 1];
        for (k, &p) in probs.iter().enumerate() {
            cum[k + 1] = cum[k] + p;
            pow[k + 1] = pow[k] + if p >= MASS_FLOOR { p.powf(alpha) } else { 0.0 };
        }
        let mut breaks = vec![0.0];
        for k in (1..m).rev() {
            let b = (1.0 - cum[k]).clamp(0.0, 1.0);
            if b > breaks[breaks.len() - 1] + 1e-15 {
                breaks.push(b);
            }
        }
        if breaks[breaks.len() - 1] < 1.0 - 1e-15 {
            breaks.push(1.0);
        } else {
            *breaks.last_mut().unwrap() = 1.0;
        }
        let mut row = Row { alpha, probs: probs.to_vec(), cum, pow, breaks, break_vals: vec![] };
        row.break_vals = row.breaks.iter().map(|&e| row.f(e)).collect();
        row
    }

    /// Smoothed row norm at budget `e`.
    fn f(&self, e: f64) -> f64 {
        if e >= 1.0 {
            return 0.0;
        }
        let target = 1.0 - e;
        let m = self.probs.len();
        // least k with cum[k] >= target - slack
        let k = self.cum[1..]
            .partition_point(|&c| c < target - CUM_SLACK)
            .min(m - 1)
            + 1;
        let t = (target - self.cum[k - 1]).clamp(0.0, self.probs[k - 1]);
        let last = if t >= MASS_FLOOR { t.powf(self.alpha) } else { 0.0 };
        (self.pow[k - 1] + last).powf(1.0 / self.alpha)
    }
}

fn vertex_count(rows: &[Row]) -> f64 {
    let sizes: Vec<f64> = rows.iter().map(|r| r.breaks.len() as f64).collect();
    let total: f64 = sizes.iter().product();
    sizes.iter().map(|s| total / s).sum()
}

fn enumerate_vertices(rows: &[Row], w: &[f64], eps: f64) -> (Vec<f64>, f64) {
    let n = rows.len();
    let mut best = (vec![0.0; n], f64::INFINITY);
    let mut current = vec![0.0; n];
    // capacity of coordinates after index i (excluding the free one)
    for free in 0..n {
        if w[free] <= 0.0 {
            continue;
        }
        let fixed: Vec<usize> = (0..n).filter(|&y| y != free).collect();
        let mut tail_cap = vec![0.0; fixed.len() + 1];
        for i in (0..fixed.len()).rev() {
            tail_cap[i] = tail_cap[i + 1] + w[fixed[i]];
        }
        let ctx = Dfs { rows, w, eps, free, fixed: &fixed, tail_cap: &tail_cap };
        ctx.go(0, 0.0, 0.0, &mut current, &mut best);
    }
    best
}

struct Dfs<'a> {
    rows: &'a [Row],
    w: &'a [f64],
    eps: f64,
    free: usize,
    fixed: &'a [usize],
    tail_cap: &'a [f64],
}

impl Dfs<'_> {
    fn go(&self, depth: usize, spent: f64, g: f64, cur: &mut Vec<f64>, best: &mut (Vec<f64>, f64)) {
        const TOL: f64 = 1e-12;
        if depth == self.fixed.len() {
            let wf = self.w[self.free];
            let e = (self.eps - spent) / wf;
            if !(-TOL..=1.0 + TOL).contains(&e) {
                return;
            }
            let e = e.clamp(0.0, 1.0);
            let total = g + wf * self.rows[self.free].f(e);
            if total < best.1 {
                cur[self.free] = e;
                best.0.clone_from(cur);
                best.1 = total;
            }
            return;
        }
        let y = self.fixed[depth];
        let row = &self.rows[y];
        let reach = self.tail_cap[depth + 1] + self.w[self.free];
        for (&b, &v) in row.breaks.iter().zip(&row.break_vals) {
            let s = spent + self.w[y] * b;
            if s > self.eps + TOL {
                break;
            }
            if s + reach < self.eps - TOL {
                continue;
            }
            cur[y] = b;
            self.go(depth + 1, s, g + self.w[y] * v, cur, best);
        }
    }
}

fn objective(rows: &[Row], w: &[f64], e: &[f64]) -> f64 {
    rows.iter().zip(w).zip(e).map(|((r, &wy), &ey)| wy * r.f(ey)).sum()
}

fn pairwise_descent(
    rows: &[Row],
    w: &[f64],
    mut e: Vec<f64>,
    opts: SolverOptions,
) -> Result<(Vec<f64>, f64)> {
    let n = rows.len();
    let mut g = objective(rows, w, &e);
    for _ in 0..opts.max_sweeps {
        let mut improved = false;
        for a in 0..n {
            for b in (a + 1)..n {
                if w[a] <= 0.0 || w[b] <= 0.0 {
                    continue;
                }
                // move d units of weighted budget from b to a
                let lo = (-w[a] * e[a]).max(-w[b] * (1.0 - e[b]));
                let hi = (w[a] * (1.0 - e[a])).min(w[b] * e[b]);
                if hi <= lo {
                    continue;
                }
                let pair = |d: f64| {
                    let ea = (e[a] + d / w[a]).clamp(0.0, 1.0);
                    let eb = (e[b] - d / w[b]).clamp(0.0, 1.0);
                    w[a] * rows[a].f(ea) + w[b] * rows[b].f(eb)
                };
                let base = pair(0.0);
                let mut best = (0.0, base);
                let cands = rows[a]
                    .breaks
                    .iter()
                    .map(|&x| w[a] * (x - e[a]))
                    .chain(rows[b].breaks.iter().map(|&x| w[b] * (e[b] - x)))
                    .chain([lo, hi]);
                for d in cands {
                    if d < lo || d > hi {
                        continue;
                    }
                    let v = pair(d);
                    if v < best.1 {
                        best = (d, v);
                    }
                }
                if base - best.1 > opts.tol * base.abs().max(1e-300) {
                    let d = best.0;
                    e[a] = (e[a] + d / w[a]).clamp(0.0, 1.0);
                    e[b] = (e[b] - d / w[b]).clamp(0.0, 1.0);
                    g = objective(rows, w, &e);
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok((e, g));
        }
    }
    Err(Error::OptimizerNotConverged(format!(
        "pairwise exchange still improving after {} sweeps (G = {g})",
        opts.max_sweeps
    )))
}

/// Direct evaluation of `G` through [`crate::pmf::smooth_truncation`],
/// independent of the prefix tables above.
#[cfg(test)]
fn objective_reference(j: &JointPmf, alpha: f64, e: &[f64]) -> f64 {
    use super::power_sum;
    let w = j.p_y();
    (0..j.n_y())
        .map(|y| {
            if e[y] >= 1.0 {
                return 0.0;
            }
            let t = crate::pmf::smooth_truncation(&j.conditional(y), e[y]).expect("eps in range");
            w[y] * power_sum(&t.q, alpha).powf(1.0 / alpha)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{arimoto_renyi_conditional, smooth_renyi};

    fn ord(a: f64) -> EntropyOrder {
        EntropyOrder::new(a).unwrap()
    }

    #[test]
    fn zero_eps_is_arimoto() {
        for seed in 0..20 {
            let j = JointPmf::random(3, 4, seed).unwrap();
            for a in [0.2, 0.5, 0.8] {
                let k = kuzuoka_conditional_smooth(&j, ord(a), 0.0).unwrap();
                assert!((k - arimoto_renyi_conditional(&j, ord(a))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_row_is_smooth_renyi() {
        let row = [0.4, 0.3, 0.2, 0.1];
        let j = JointPmf::new(vec![row.to_vec()]).unwrap();
        let p = crate::pmf::Pmf::new(&row).unwrap();
        for eps in [0.0, 0.05, 0.1, 0.35, 0.9] {
            let k = kuzuoka_conditional_smooth(&j, ord(0.5), eps).unwrap();
            assert!((k - smooth_renyi(&p, ord(0.5), eps).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn row_norm_matches_reference() {
        let j = JointPmf::random(2, 5, 3).unwrap();
        let w = j.p_y();
        let rows: Vec<Row> = (0..2).map(|y| Row::new(j.conditional(y).probs(), 0.4)).collect();
        for i in 0..=100 {
            let e = [i as f64 / 100.0, 1.0 - i as f64 / 100.0];
            let fast = objective(&rows, &w, &e);
            assert!((fast - objective_reference(&j, 0.4, &e)).abs() < 1e-12);
        }
    }

    #[test]
    fn descent_agrees_with_enumeration() {
        for seed in 0..30 {
            let j = JointPmf::random(4, 5, 100 + seed).unwrap();
            for eps in [0.05, 0.2, 0.5] {
                let exact = kuzuoka_solve(&j, ord(0.5), eps).unwrap();
                assert!(exact.exhaustive);
                assert!(exact.lower_bound <= exact.objective + 1e-12);
                let opts = SolverOptions { max_vertices: 0, ..SolverOptions::default() };
                let desc = kuzuoka_solve_with(&j, ord(0.5), eps, opts).unwrap();
                assert!(!desc.exhaustive);
                assert!(desc.objective >= exact.objective - 1e-12);
                let budget: f64 = desc.eps_y.iter().zip(j.p_y()).map(|(e, w)| e * w).sum();
                assert!((budget - eps).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stall_is_reported() {
        let j = JointPmf::random(3, 4, 9).unwrap();
        let opts = SolverOptions { max_vertices: 0, max_sweeps: 0, tol: 1e-14 };
        assert!(matches!(
            kuzuoka_solve_with(&j, ord(0.5), 0.2, opts),
            Err(Error::OptimizerNotConverged(_))
        ));
    }
}
