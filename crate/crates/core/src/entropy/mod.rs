//! Rényi-type entropies (all in bits) and self-information statistics.

mod kuzuoka;

pub use kuzuoka::{
    kuzuoka_conditional_smooth, kuzuoka_solve, kuzuoka_solve_with, KuzuokaSolution, SolverOptions,
};

use crate::error::{check_eps, Error, Result};
use crate::pmf::{JointPmf, Pmf};

/// Masses below this are treated as zero before raising to a power `< 1`.
pub(crate) const MASS_FLOOR: f64 = 1e-15;

/// Orders this close to 1 are evaluated as the Shannon limit.
const SHANNON_WINDOW: f64 = 1e-6;

/// A Rényi order `alpha` in `(0, 1]`; `1` stands for the Shannon limit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropyOrder(f64);

impl EntropyOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::BadParameter(format!("order alpha must lie in (0, 1] (got {alpha})")));
        }
        Ok(EntropyOrder(alpha))
    }

    /// The order `1 / (1 + rho)` that governs `rho`-th moments.
    pub fn from_rho(rho: f64) -> Result<Self> {
        crate::error::check_rho(rho)?;
        Self::new(1.0 / (1.0 + rho))
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    pub fn is_shannon(self) -> bool {
        1.0 - self.0 < SHANNON_WINDOW
    }

    /// The order itself, or an error at the Shannon limit.
    pub fn require_below_one(self) -> Result<f64> {
        if self.0 >= 1.0 {
            return Err(Error::BadParameter("this quantity needs alpha < 1".into()));
        }
        Ok(self.0)
    }
}

/// `sum q^alpha`, with tiny masses dropped.
pub(crate) fn power_sum(q: &[f64], alpha: f64) -> f64 {
    q.iter().filter(|&&v| v >= MASS_FLOOR).map(|v| v.powf(alpha)).sum()
}

pub fn shannon(p: &Pmf) -> f64 {
    p.probs().iter().map(|&v| -v * v.log2()).sum()
}

pub fn renyi(p: &Pmf, order: EntropyOrder) -> f64 {
    if order.is_shannon() {
        return shannon(p);
    }
    let a = order.alpha();
    power_sum(p.probs(), a).log2() / (1.0 - a)
}

/// Smooth Rényi entropy via the explicit tail-truncation formula.
pub fn smooth_renyi(p: &Pmf, order: EntropyOrder, eps: f64) -> Result<f64> {
    let a = order.require_below_one()?;
    check_eps(eps)?;
    let t = crate::pmf::smooth_truncation(p, eps)?;
    Ok(power_sum(&t.q, a).log2() / (1.0 - a))
}

/// Arimoto's conditional Rényi entropy `H_alpha(X|Y)`.
pub fn arimoto_renyi_conditional(j: &JointPmf, order: EntropyOrder) -> f64 {
    if order.is_shannon() {
        return conditional_stats(j).0;
    }
    let a = order.alpha();
    let g: f64 = j.matrix().iter().map(|row| power_sum(row, a).powf(1.0 / a)).sum();
    a / (1.0 - a) * g.log2()
}

/// Renner-Wolf conditional entropy at zero smoothing: the worst row.
pub fn renner_wolf_conditional_zero(j: &JointPmf, order: EntropyOrder) -> f64 {
    (0..j.n_y())
        .map(|y| renyi(&j.conditional(y), order))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Entropy, varentropy and third absolute central moment of `-log2 P(X)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceStats {
    pub h: f64,
    pub v: f64,
    pub t: f64,
}

pub fn source_stats(p: &Pmf) -> SourceStats {
    let h = shannon(p);
    let (mut v, mut t) = (0.0, 0.0);
    for &q in p.probs() {
        let d = (-q.log2() - h).abs();
        v += q * d * d;
        t += q * d * d * d;
    }
    SourceStats { h, v, t }
}

/// `(H(X|Y), U(X|Y))`: mean and variance of `-log2 P(X|Y)`.
pub fn conditional_stats(j: &JointPmf) -> (f64, f64) {
    let py = j.p_y();
    let cells = || {
        j.matrix().iter().zip(&py).flat_map(|(row, &w)| {
            row.iter().filter(|&&v| v > 0.0).map(move |&v| (v, -(v / w).log2()))
        })
    };
    let h: f64 = cells().map(|(v, s)| v * s).sum();
    let u: f64 = cells().map(|(v, s)| v * (s - h) * (s - h)).sum();
    (h, u)
}
