//! Independent reference computations used to check the fast paths.
//!
//! # Brute-force guessing oracle
//!
//! Enumerates every ordered partition of the alphabet into cells of at most
//! `L` atoms. A uniform soft reconstruction on a larger cell would exceed
//! log-loss `D` for its members, and a non-uniform one covers fewer atoms,
//! so these cells exhaust the admissible guesses. For fixed cells with
//! masses `m_i`, the moment is `sum_i s_i i^rho` with success masses
//! `s_i = lambda_i m_i <= m_i` and the constraint `sum_i s_i >= 1 - eps`.
//! The cost per unit of success `i^rho` increases with `i`, so swapping
//! success mass from a later cell to an earlier unfilled one never hurts:
//! the optimal schedule is `lambda = 1, ..., 1, fraction, 0, ..., 0`, which is
//! also non-increasing and therefore a valid survival sequence.
//!
//! # Grid oracles
//!
//! Allocation problems over `|Y| <= 3` budgets are minimized on a dense grid
//! of the free coordinates, followed by local zoom grids around the best
//! grid points so that minima sitting exactly on a kink are resolved well
//! below the grid step.

use crate::entropy::{power_sum, EntropyOrder};
use crate::error::{check_eps, check_rho, Error, Result};
use crate::guessing::{index_pow, min_moment_l, SoftStrategy};
use crate::pmf::{smooth_truncation, JointPmf, ListSize, Pmf};

/// Largest alphabet the brute-force oracle accepts.
pub const MAX_ORACLE_ATOMS: usize = 6;

/// Calls `f` once per ordered partition of `0..n` into cells of size `<= l`.
pub fn for_each_ordered_partition(n: usize, l: usize, mut f: impl FnMut(&[Vec<usize>])) {
    let mut cells: Vec<Vec<usize>> = Vec::new();
    rec_partition((1u32 << n) - 1, l, &mut cells, &mut f);
}

fn rec_partition(left: u32, l: usize, cells: &mut Vec<Vec<usize>>, f: &mut impl FnMut(&[Vec<usize>])) {
    if left == 0 {
        f(cells);
        return;
    }
    // every non-empty subset of `left`
    let mut sub = left;
    while sub != 0 {
        if sub.count_ones() as usize <= l {
            cells.push((0..32).filter(|b| sub >> b & 1 == 1).collect());
            rec_partition(left & !sub, l, cells, f);
            cells.pop();
        }
        sub = (sub - 1) & left;
    }
}

/// The best give-up schedule for fixed cells: survive fully until the
/// success mass reaches `1 - eps`, partially in the cell that crosses it.
pub fn greedy_lambda(masses: &[f64], eps: f64) -> Vec<f64> {
    let target = 1.0 - eps;
    let mut got = 0.0;
    masses
        .iter()
        .map(|&m| {
            let need = target - got;
            if need <= 0.0 {
                0.0
            } else if m <= need {
                got += m;
                1.0
            } else {
                got = target;
                need / m
            }
        })
        .collect()
}

fn check_oracle_size(p: &Pmf) -> Result<()> {
    if p.len() > MAX_ORACLE_ATOMS {
        return Err(Error::TooLargeForOracle { size: p.len(), max: MAX_ORACLE_ATOMS });
    }
    Ok(())
}

/// Visits every competitor strategy: each ordered partition with its best
/// give-up schedule.
pub fn for_each_competitor(p: &Pmf, l: ListSize, eps: f64, mut f: impl FnMut(&SoftStrategy)) -> Result<()> {
    check_oracle_size(p)?;
    check_eps(eps)?;
    let cap = usize::try_from(l.get()).unwrap_or(usize::MAX).min(p.len());
    let probs = p.probs();
    for_each_ordered_partition(p.len(), cap, |cells| {
        let masses: Vec<f64> = cells.iter().map(|c| c.iter().map(|&x| probs[x]).sum()).collect();
        let lambda = greedy_lambda(&masses, eps);
        f(&SoftStrategy::from_lambda(cells.to_vec(), lambda, l.get()));
    });
    Ok(())
}

pub fn brute_force_min_moment(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<f64> {
    brute_force_min_moment_l(p, rho, ListSize::from_distortion(d)?, eps)
}

pub fn brute_force_min_moment_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<f64> {
    check_oracle_size(p)?;
    check_eps(eps)?;
    check_rho(rho)?;
    let cap = usize::try_from(l.get()).unwrap_or(usize::MAX).min(p.len());
    let probs = p.probs();
    let mut best = f64::INFINITY;
    for_each_ordered_partition(p.len(), cap, |cells| {
        let masses: Vec<f64> = cells.iter().map(|c| c.iter().map(|&x| probs[x]).sum()).collect();
        let lambda = greedy_lambda(&masses, eps);
        let v: f64 = masses
            .iter()
            .zip(&lambda)
            .enumerate()
            .map(|(i, (m, l))| l * m * index_pow(i as u64 + 1, rho))
            .sum();
        best = best.min(v);
    });
    Ok(best)
}

const ZOOM_FLOOR: f64 = 1e-12;
const ZOOM_STARTS: usize = 8;

/// Dense 1-D grid on `[lo, hi]` plus local zoom refinement.
pub fn grid_min_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let mut pts: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let x = (lo + k as f64 * step).min(hi);
            (x, f(x))
        })
        .collect();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best = pts[0];
    for &(x0, v0) in pts.iter().take(ZOOM_STARTS) {
        let (mut x, mut v, mut h) = (x0, v0, step);
        while h > ZOOM_FLOOR {
            let sub = h / 10.0;
            for k in -10i32..=10 {
                let xx = (x + k as f64 * sub).clamp(lo, hi);
                let vv = f(xx);
                if vv < v {
                    (x, v) = (xx, vv);
                }
            }
            h = sub;
        }
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Grid on the box `[0,1]^2` restricted to `feasible`, plus zoom.
pub fn grid_min_2d(
    f: impl Fn(f64, f64) -> Option<f64>,
    step: f64,
) -> Option<((f64, f64), f64)> {
    let n = (1.0 / step).round() as usize;
    let mut pts: Vec<((f64, f64), f64)> = Vec::new();
    for a in 0..=n {
        for b in 0..=n {
            let (x, y) = ((a as f64 * step).min(1.0), (b as f64 * step).min(1.0));
            if let Some(v) = f(x, y) {
                pts.push(((x, y), v));
            }
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut best = *pts.first()?;
    for &(p0, v0) in pts.iter().take(ZOOM_STARTS) {
        let (mut p, mut v, mut h) = (p0, v0, step);
        while h > ZOOM_FLOOR {
            let sub = h / 10.0;
            for i in -10i32..=10 {
                for k in -10i32..=10 {
                    let q = ((p.0 + i as f64 * sub).clamp(0.0, 1.0), (p.1 + k as f64 * sub).clamp(0.0, 1.0));
                    if let Some(vv) = f(q.0, q.1) {
                        if vv < v {
                            (p, v) = (q, vv);
                        }
                    }
                }
            }
            h = sub;
        }
        if v < best.1 {
            best = (p, v);
        }
    }
    Some(best)
}

/// Minimizes `sum_y w_y g_y(e_y)` over `sum_y w_y e_y = eps`, `e_y in [0, 1]`,
/// for up to three budgets. `step_1d` is the dense step for two budgets;
/// three budgets use a 1e-3 grid before zooming.
fn allocation_grid(w: &[f64], g: &dyn Fn(usize, f64) -> f64, eps: f64, step_1d: f64) -> Result<f64> {
    const FEAS: f64 = 1e-12;
    match w.len() {
        1 => Ok(w[0] * g(0, eps / w[0])),
        2 => {
            let lo = ((eps - w[1]) / w[0]).max(0.0);
            let hi = (eps / w[0]).min(1.0);
            let obj = |e0: f64| {
                let e1 = ((eps - w[0] * e0) / w[1]).clamp(0.0, 1.0);
                w[0] * g(0, e0) + w[1] * g(1, e1)
            };
            Ok(grid_min_1d(obj, lo, hi, step_1d).1)
        }
        3 => {
            let obj = |e0: f64, e1: f64| {
                let e2 = (eps - w[0] * e0 - w[1] * e1) / w[2];
                if !(-FEAS..=1.0 + FEAS).contains(&e2) {
                    return None;
                }
                Some(w[0] * g(0, e0) + w[1] * g(1, e1) + w[2] * g(2, e2.clamp(0.0, 1.0)))
            };
            grid_min_2d(obj, 1e-3)
                .map(|(_, v)| v)
                .ok_or_else(|| Error::BadParameter("no feasible allocation on the grid".into()))
        }
        n => Err(Error::TooLargeForOracle { size: n, max: 3 }),
    }
}

/// Grid reference for Kuzuoka's conditional smooth entropy, `|Y| <= 3`.
pub fn kuzuoka_grid_oracle(j: &JointPmf, order: EntropyOrder, eps: f64, step: f64) -> Result<f64> {
    check_eps(eps)?;
    let a = order.alpha();
    if a >= 1.0 {
        return Err(Error::BadParameter("this quantity needs alpha < 1".into()));
    }
    let rows: Vec<Pmf> = (0..j.n_y()).map(|y| j.conditional(y)).collect();
    let g = |y: usize, e: f64| {
        if e >= 1.0 {
            return 0.0;
        }
        let t = smooth_truncation(&rows[y], e).expect("budget in range");
        power_sum(&t.q, a).powf(1.0 / a)
    };
    let best = allocation_grid(&j.p_y(), &g, eps, step)?;
    Ok(a / (1.0 - a) * best.log2())
}

/// Grid reference for the side-information moment, `|Y| <= 3`, built from
/// per-row calls to the unconditional exact moment.
pub fn conditional_moment_grid_oracle(j: &JointPmf, rho: f64, l: ListSize, eps: f64, step: f64) -> Result<f64> {
    check_eps(eps)?;
    let rows: Vec<Pmf> = (0..j.n_y()).map(|y| j.conditional(y)).collect();
    let g = |y: usize, e: f64| {
        if e >= 1.0 {
            return 0.0;
        }
        min_moment_l(&rows[y], rho, l, e).expect("parameters validated").moment
    };
    allocation_grid(&j.p_y(), &g, eps, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::{generate, Generator};

    #[test]
    fn partition_counts() {
        // ordered set partitions: Fubini numbers 1, 3, 13, 75
        for (n, count) in [(1, 1), (2, 3), (3, 13), (4, 75)] {
            let mut c = 0;
            for_each_ordered_partition(n, n, |_| c += 1);
            assert_eq!(c, count);
        }
        let mut c = 0;
        for_each_ordered_partition(3, 1, |_| c += 1);
        assert_eq!(c, 6);
    }

    #[test]
    fn greedy_schedule() {
        assert!(greedy_lambda(&[0.5, 0.3, 0.2], 0.0).iter().all(|v| (v - 1.0).abs() < 1e-12));
        let l = greedy_lambda(&[0.5, 0.3, 0.2], 0.35);
        assert_eq!(l[0], 1.0);
        assert!((l[1] - 0.5).abs() < 1e-15);
        assert_eq!(l[2], 0.0);
    }

    #[test]
    fn oracle_examples() {
        let u3 = generate(Generator::Uniform(3)).unwrap();
        for eps in [0.0, 0.2, 0.7] {
            for rho in [0.5, 2.0] {
                let v = brute_force_min_moment_l(&u3, rho, ListSize::new(3).unwrap(), eps).unwrap();
                assert!((v - (1.0 - eps)).abs() < 1e-15);
            }
        }
        let p = generate(Generator::Random { m: 4, seed: 8 }).unwrap();
        assert!((brute_force_min_moment_l(&p, 1.0, ListSize::new(9).unwrap(), 0.0).unwrap() - 1.0).abs() < 1e-15);
        let big = generate(Generator::Uniform(7)).unwrap();
        assert_eq!(
            brute_force_min_moment(&big, 1.0, 0.0, 0.0),
            Err(Error::TooLargeForOracle { size: 7, max: 6 })
        );
    }

    #[test]
    fn zoom_finds_kinks() {
        let f = |x: f64| (x - 0.123456789).abs();
        let (x, v) = grid_min_1d(f, 0.0, 1.0, 1e-3);
        assert!((x - 0.123456789).abs() < 1e-11 && v < 1e-11);
    }
}
