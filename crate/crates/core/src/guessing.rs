//! Optimal soft guessing with a give-up option, and its bounds.
//!
//! Atoms are the indices of a sorted [`Pmf`]. A strategy proposes lists of
//! at most `L = floor(2^D)` atoms (each list is a uniform soft reconstruction,
//! so it covers its members at log-loss `<= D`) and may stop with
//! probability `pi_i` before guess `i`.

use serde::Serialize;

use crate::entropy::{smooth_renyi, EntropyOrder};
use crate::error::{check_eps, check_rho, Result};
use crate::pmf::{smooth_truncation, truncate_sorted, z_variable, ListSize, Pmf};

/// Tolerated drift of the cutoff stopping probability outside `[0, 1]`.
const PI_DRIFT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftStrategy {
    /// Ordered cells; entries are 0-based atom indices of the sorted pmf.
    pub lists: Vec<Vec<usize>>,
    /// Stopping probability before each guess.
    pub pi: Vec<f64>,
    /// Probability of still guessing at step `i`: `prod_{j<=i} (1 - pi_j)`.
    pub lambda: Vec<f64>,
    pub list_size: u64,
    /// 1-based index of the cutoff list.
    pub cutoff: usize,
}

impl SoftStrategy {
    pub fn n_lists(&self) -> usize {
        self.lists.len()
    }

    /// Builds a strategy from cells and survival probabilities.
    pub fn from_lambda(lists: Vec<Vec<usize>>, lambda: Vec<f64>, list_size: u64) -> Self {
        let mut pi = Vec::with_capacity(lambda.len());
        let mut prev = 1.0;
        for &l in &lambda {
            pi.push(if prev > 0.0 { 1.0 - l / prev } else { 1.0 });
            prev = l;
        }
        let cutoff = pi.iter().position(|&p| p > 0.0).map_or(lambda.len(), |k| k + 1);
        SoftStrategy { lists, pi, lambda, list_size, cutoff }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub moment: f64,
    pub error_prob: f64,
    pub rho: f64,
    pub d: f64,
    pub eps: f64,
    pub list_size: u64,
    pub n_lists: usize,
    pub cutoff: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub exact: f64,
    pub thm1_upper: f64,
    pub thm1_lower: f64,
    pub prop2_upper: f64,
    pub prop2_lower: f64,
}

impl BoundsReport {
    /// Smallest of the four sandwich slacks (negative means a violation).
    pub fn min_slack(&self) -> f64 {
        [
            self.exact - self.thm1_lower,
            self.thm1_upper - self.exact,
            self.exact - self.prop2_lower,
            self.prop2_upper - self.exact,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperComparison {
    pub z_bound: f64,
    pub explicit_bound: f64,
    pub z_tighter: bool,
}

/// `i^rho` for a positive integer index.
pub(crate) fn index_pow(i: u64, rho: f64) -> f64 {
    (rho * (i as f64).ln()).exp()
}

fn usize_list(l: ListSize) -> usize {
    usize::try_from(l.get()).unwrap_or(usize::MAX)
}

pub fn build_optimal_strategy(p: &Pmf, d: f64, eps: f64) -> Result<SoftStrategy> {
    build_optimal_strategy_l(p, ListSize::from_distortion(d)?, eps)
}

pub fn build_optimal_strategy_l(p: &Pmf, l: ListSize, eps: f64) -> Result<SoftStrategy> {
    check_eps(eps)?;
    let t = smooth_truncation(p, eps)?;
    let probs = p.probs();
    let n = probs.len();
    let ls = usize_list(l);
    let i_star = t.i_star;
    let k = i_star.div_ceil(ls);

    let mut lists: Vec<Vec<usize>> = Vec::new();
    let mut start = 0;
    while start < i_star {
        let end = (start + ls).min(i_star);
        lists.push((start..end).collect());
        start = end;
    }
    while start < n {
        let end = start.saturating_add(ls).min(n);
        lists.push((start..end).collect());
        start = end;
    }

    let cut = &lists[k - 1];
    let q_mass: f64 = cut.iter().map(|&x| t.q[x]).sum();
    let p_mass: f64 = cut.iter().map(|&x| probs[x]).sum();
    let raw = 1.0 - q_mass / p_mass;
    assert!(
        raw > -PI_DRIFT && raw < 1.0 + PI_DRIFT,
        "cutoff stopping probability {raw} drifted outside [0, 1]"
    );
    let pi_k = raw.clamp(0.0, 1.0);

    let pi: Vec<f64> = (1..=lists.len())
        .map(|i| match i.cmp(&k) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => pi_k,
            std::cmp::Ordering::Greater => 1.0,
        })
        .collect();
    let mut lambda = Vec::with_capacity(pi.len());
    let mut acc = 1.0;
    for &x in &pi {
        acc *= 1.0 - x;
        lambda.push(acc);
    }
    Ok(SoftStrategy { lists, pi, lambda, list_size: l.get(), cutoff: k })
}

fn cell_mass(cell: &[usize], p: &Pmf) -> f64 {
    cell.iter().map(|&x| p.probs()[x]).sum()
}

pub fn strategy_error_prob(s: &SoftStrategy, p: &Pmf) -> f64 {
    1.0 - s.lists.iter().zip(&s.lambda).map(|(c, l)| l * cell_mass(c, p)).sum::<f64>()
}

pub fn strategy_moment(s: &SoftStrategy, p: &Pmf, rho: f64) -> f64 {
    s.lists
        .iter()
        .zip(&s.lambda)
        .enumerate()
        .map(|(i, (c, l))| l * cell_mass(c, p) * index_pow(i as u64 + 1, rho))
        .sum()
}

/// `P[G <= k]` for `k = 1..N`: success probability within `k` guesses.
pub fn success_profile(s: &SoftStrategy, p: &Pmf) -> Vec<f64> {
    let mut acc = 0.0;
    s.lists
        .iter()
        .zip(&s.lambda)
        .map(|(c, l)| {
            acc += l * cell_mass(c, p);
            acc
        })
        .collect()
}

/// `sum_{i <= i*} Q^eps(i) i^rho` for a sorted probability vector.
pub(crate) fn truncated_moment(sorted: &[f64], rho: f64, eps: f64) -> f64 {
    let t = truncate_sorted(sorted, eps);
    t.q.iter().enumerate().map(|(i, q)| q * index_pow(i as u64 + 1, rho)).sum()
}

pub fn min_moment(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<MomentReport> {
    let mut r = min_moment_l(p, rho, ListSize::from_distortion(d)?, eps)?;
    r.d = d;
    Ok(r)
}

/// Exact minimal moment, evaluated on the list-index variable `Z`.
pub fn min_moment_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<MomentReport> {
    check_rho(rho)?;
    check_eps(eps)?;
    let z = z_variable(p, l);
    let moment = truncated_moment(z.probs(), rho, eps);
    let s = build_optimal_strategy_l(p, l, eps)?;
    Ok(MomentReport {
        moment,
        error_prob: strategy_error_prob(&s, p),
        rho,
        d: l.log2(),
        eps,
        list_size: l.get(),
        n_lists: s.n_lists(),
        cutoff: s.cutoff,
    })
}

fn log_factor(p: &Pmf, rho: f64) -> f64 {
    (1.0 + (p.len() as f64).log2()).powf(-rho)
}

pub fn theorem1_bounds(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<(f64, f64)> {
    theorem1_bounds_l(p, rho, ListSize::from_distortion(d)?, eps)
}

pub fn theorem1_bounds_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<(f64, f64)> {
    let order = EntropyOrder::from_rho(rho)?;
    let h = smooth_renyi(&z_variable(p, l), order, eps)?;
    let upper = (rho * h).exp2();
    Ok((upper, log_factor(p, rho) * upper))
}

pub fn prop2_bounds(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<(f64, f64)> {
    prop2_bounds_l(p, rho, ListSize::from_distortion(d)?, eps)
}

pub fn prop2_bounds_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<(f64, f64)> {
    let order = EntropyOrder::from_rho(rho)?;
    let h = smooth_renyi(p, order, eps)?;
    let core = (rho * h - rho * l.log2()).exp2();
    let upper = if l.get() == 1 { (rho * h).exp2() } else { 1.0 - eps + rho.exp2() * core };
    Ok((upper, log_factor(p, rho) * core))
}

pub fn bounds(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<BoundsReport> {
    bounds_l(p, rho, ListSize::from_distortion(d)?, eps)
}

pub fn bounds_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<BoundsReport> {
    let exact = min_moment_l(p, rho, l, eps)?.moment;
    let (thm1_upper, thm1_lower) = theorem1_bounds_l(p, rho, l, eps)?;
    let (prop2_upper, prop2_lower) = prop2_bounds_l(p, rho, l, eps)?;
    Ok(BoundsReport { exact, thm1_upper, thm1_lower, prop2_upper, prop2_lower })
}

pub fn compare_upper_bounds(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<UpperComparison> {
    compare_upper_bounds_l(p, rho, ListSize::from_distortion(d)?, eps)
}

/// Compares the list-index bound with the explicit one. The former is
/// provably no larger when `L <= 2`; beyond that this is only reported.
pub fn compare_upper_bounds_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<UpperComparison> {
    let (z_bound, _) = theorem1_bounds_l(p, rho, l, eps)?;
    let (explicit_bound, _) = prop2_bounds_l(p, rho, l, eps)?;
    Ok(UpperComparison { z_bound, explicit_bound, z_tighter: z_bound <= explicit_bound + 1e-9 })
}

/// True when the list-index upper bound is guaranteed to be the tighter one.
pub fn comparison_is_proven(l: ListSize) -> bool {
    l.get() <= 2
}
