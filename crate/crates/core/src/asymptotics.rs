//! Block-length behaviour of the minimal moment and the optimal cumulant.
//!
//! Exact values for `n` i.i.d. copies come from walking the type classes of
//! the product pmf list by list, with block list size `L_n = floor(2^(nD))`.
//! They are paired with the normal approximation
//! `rho (H - D - sqrt(V/n) Phi^-1(eps))`.

use serde::Serialize;

use crate::entropy::{conditional_stats, shannon, source_stats};
use crate::error::{check_eps, check_rho, Error, Result};
use crate::guessing::index_pow;
use crate::pmf::{iid_extension_with_budget, list_size, JointPmf, ListSize, Pmf, RunPmf, SizeBudget, CUM_SLACK};
use crate::side_info::conditional_min_moment_l;

/// `Phi^-1(eps)` for the standard normal distribution.
///
/// Acklam's rational approximation followed by Newton steps on `Phi`.
pub fn gaussian_quantile(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfDomain(eps));
    }
    if eps > 0.5 {
        return Ok(-gaussian_quantile(1.0 - eps)?);
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let mut x = if eps < 0.02425 {
        let q = (-2.0 * eps.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = eps - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        let err = normal_cdf(x) - eps;
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        x -= err / pdf;
    }
    Ok(x)
}

/// `Phi(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `floor(2^(n D))` with the same snapping as [`list_size`].
pub fn block_list_size(n: usize, d: f64) -> Result<ListSize> {
    ListSize::new(list_size(n as f64 * d)?)
}

/// Walks the list masses of a sorted run pmf, stopping at the list that
/// reaches mass `1 - eps`. Returns `sum_{l <= K} Q_Z(l) w(l)`.
fn truncated_list_sum(
    runs: &RunPmf,
    l: ListSize,
    eps: f64,
    max_lists: u64,
    w: impl Fn(u64) -> f64,
) -> Result<f64> {
    let target = 1.0 - eps;
    let size = l.get() as u128;
    let mut cum = 0.0;
    let mut acc = 0.0;
    let mut index = 0u64;
    let mut fill = 0u128;
    let mut mass = 0.0;
    let mut flush = |mass: f64, index: &mut u64| -> Result<Option<f64>> {
        *index += 1;
        if *index > max_lists {
            return Err(Error::TooLarge(format!("more than {max_lists} lists")));
        }
        if cum + mass >= target - CUM_SLACK {
            let last = (target - cum).clamp(0.0, mass);
            return Ok(Some(acc + last * w(*index)));
        }
        cum += mass;
        acc += mass * w(*index);
        Ok(None)
    };
    for run in runs.runs() {
        let mut left = run.count as u128;
        while left > 0 {
            let take = left.min(size - fill);
            mass += take as f64 * run.value;
            fill += take;
            left -= take;
            if fill == size {
                if let Some(v) = flush(mass, &mut index)? {
                    return Ok(v);
                }
                fill = 0;
                mass = 0.0;
            }
        }
    }
    if fill > 0 {
        if let Some(v) = flush(mass, &mut index)? {
            return Ok(v);
        }
    }
    // rounding left the total a hair short of 1 - eps
    Ok(acc)
}

/// Minimal moment of a run pmf with list size `l`.
pub fn run_moment(runs: &RunPmf, rho: f64, l: ListSize, eps: f64, max_lists: u64) -> Result<f64> {
    check_rho(rho)?;
    check_eps(eps)?;
    truncated_list_sum(runs, l, eps, max_lists, |i| index_pow(i, rho))
}

/// Optimal normalized cumulant `Lambda*` of a run pmf with list size `l`.
pub fn run_cumulant(runs: &RunPmf, rho: f64, l: ListSize, eps: f64, max_lists: u64) -> Result<f64> {
    check_rho(rho)?;
    check_eps(eps)?;
    let s = truncated_list_sum(runs, l, eps, max_lists, |i| {
        (rho * crate::coding::codeword_length(i) as f64).exp2()
    })?;
    Ok((s + eps).log2() / rho)
}

pub fn exact_block_moment(base: &Pmf, n: usize, rho: f64, d: f64, eps: f64) -> Result<f64> {
    exact_block_moment_with_budget(base, n, rho, d, eps, SizeBudget::default())
}

/// `M*` of `n` i.i.d. copies of `base` at per-letter distortion `d`.
pub fn exact_block_moment_with_budget(
    base: &Pmf,
    n: usize,
    rho: f64,
    d: f64,
    eps: f64,
    budget: SizeBudget,
) -> Result<f64> {
    let runs = iid_extension_with_budget(base, n, budget)?;
    run_moment(&runs, rho, block_list_size(n, d)?, eps, budget.max_lists)
}

/// `Lambda*` of `n` i.i.d. copies of `base`.
pub fn exact_block_cumulant(base: &Pmf, n: usize, rho: f64, d: f64, eps: f64) -> Result<f64> {
    let budget = SizeBudget::default();
    let runs = iid_extension_with_budget(base, n, budget)?;
    run_cumulant(&runs, rho, block_list_size(n, d)?, eps, budget.max_lists)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub n: usize,
    /// Per-symbol exact value.
    pub exact: f64,
    pub predicted: f64,
    pub residual: f64,
}

fn require_below_entropy(d: f64, h: f64) -> Result<()> {
    if d >= h {
        return Err(Error::DistortionAboveEntropy { d, h });
    }
    Ok(())
}

/// `H - D - sqrt(V/n) Phi^-1(eps)`.
fn second_order(base: &Pmf, n: usize, d: f64, eps: f64) -> Result<f64> {
    let s = source_stats(base);
    require_below_entropy(d, s.h)?;
    Ok(s.h - d - (s.v / n as f64).sqrt() * gaussian_quantile(eps)?)
}

pub fn expansion_moment(base: &Pmf, n: usize, rho: f64, d: f64, eps: f64) -> Result<ExpansionReport> {
    let predicted = rho * second_order(base, n, d, eps)?;
    let exact = exact_block_moment(base, n, rho, d, eps)?.log2() / n as f64;
    Ok(ExpansionReport { n, exact, predicted, residual: exact - predicted })
}

pub fn expansion_cumulant(base: &Pmf, n: usize, rho: f64, d: f64, eps: f64) -> Result<ExpansionReport> {
    let predicted = second_order(base, n, d, eps)?;
    let exact = exact_block_cumulant(base, n, rho, d, eps)? / n as f64;
    Ok(ExpansionReport { n, exact, predicted, residual: exact - predicted })
}

/// `rho (H(X) - D)`, the growth rate of `log2 M*` per symbol.
pub fn guessing_exponent(base: &Pmf, rho: f64, d: f64) -> Result<f64> {
    check_rho(rho)?;
    let h = shannon(base);
    require_below_entropy(d, h)?;
    Ok(rho * (h - d))
}

/// `rho (H(X|Y) - D)`.
pub fn guessing_exponent_side_info(j: &JointPmf, rho: f64, d: f64) -> Result<f64> {
    check_rho(rho)?;
    let (h, _) = conditional_stats(j);
    require_below_entropy(d, h)?;
    Ok(rho * (h - d))
}

/// First-order check with side information: the exact value uses the
/// `n`-fold product joint, so only small `n` are feasible.
pub fn side_info_first_order(j: &JointPmf, n: usize, rho: f64, d: f64, eps: f64) -> Result<ExpansionReport> {
    let predicted = guessing_exponent_side_info(j, rho, d)?;
    let block = j.power(n)?;
    let (m, _) = conditional_min_moment_l(&block, rho, block_list_size(n, d)?, eps)?;
    let exact = m.log2() / n as f64;
    Ok(ExpansionReport { n, exact, predicted, residual: exact - predicted })
}

/// CSV with header `n,exact_per_symbol,predicted,residual`.
pub fn write_expansion_csv<W: std::io::Write>(rows: &[ExpansionReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Input(e.to_string());
    w.write_record(["n", "exact_per_symbol", "predicted", "residual"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            crate::fmt::g12(r.exact),
            crate::fmt::g12(r.predicted),
            crate::fmt::g12(r.residual),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{build_optimal_code, cumulant_length};
    use crate::guessing::min_moment;
    use crate::pmf::{generate, Generator};

    #[test]
    fn quantile_values() {
        assert_eq!(gaussian_quantile(0.5).unwrap(), 0.0);
        assert!((gaussian_quantile(0.8413447460685429).unwrap() - 1.0).abs() < 1e-9);
        assert!((gaussian_quantile(0.1).unwrap() + 1.2815515655446004).abs() < 1e-12);
        for e in [0.01, 0.1, 0.25, 0.3, 0.49] {
            let a = gaussian_quantile(e).unwrap();
            let b = gaussian_quantile(1.0 - e).unwrap();
            assert!((a + b).abs() < 1e-12, "{e}");
        }
        assert!(matches!(gaussian_quantile(0.0), Err(Error::OutOfDomain(_))));
        assert!(matches!(gaussian_quantile(1.0), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn quantile_round_trip() {
        for i in 1..1000 {
            let e = i as f64 / 1000.0;
            let x = gaussian_quantile(e).unwrap();
            assert!((normal_cdf(x) - e).abs() < 1e-9);
        }
    }

    #[test]
    fn block_of_one_is_single_letter() {
        let p = generate(Generator::Random { m: 7, seed: 3 }).unwrap();
        for (rho, d, eps) in [(1.0, 0.0, 0.0), (0.5, 1.0, 0.2), (2.0, 1.7, 0.05)] {
            let m = exact_block_moment(&p, 1, rho, d, eps).unwrap();
            assert!((m - min_moment(&p, rho, d, eps).unwrap().moment).abs() < 1e-12);
            let lam = exact_block_cumulant(&p, 1, rho, d, eps).unwrap();
            let code = build_optimal_code(&p, d, eps).unwrap();
            assert!((lam - cumulant_length(&code, &p, rho).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn fair_coin_mean_guesses() {
        let p = generate(Generator::Bernoulli(0.5)).unwrap();
        for n in [1, 4, 9] {
            let m = exact_block_moment(&p, n, 1.0, 0.0, 0.0).unwrap();
            let expect = ((1u64 << n) as f64 + 1.0) / 2.0;
            assert!((m - expect).abs() < 1e-9 * expect);
        }
    }

    #[test]
    fn runs_match_atoms() {
        let p = generate(Generator::Bernoulli(0.2)).unwrap();
        let runs = crate::pmf::iid_extension(&p, 10).unwrap();
        let atoms = runs.expand().unwrap();
        let l = block_list_size(10, 0.2).unwrap();
        assert_eq!(l.get(), 4);
        let direct = crate::guessing::min_moment_l(&atoms, 1.0, l, 0.1).unwrap().moment;
        let walked = exact_block_moment(&p, 10, 1.0, 0.2, 0.1).unwrap();
        assert!((direct - walked).abs() < 1e-9 * direct);
    }

    #[test]
    fn exponents() {
        let p = generate(Generator::Bernoulli(0.2)).unwrap();
        assert!((guessing_exponent(&p, 1.0, 0.2).unwrap() - 0.52193).abs() < 1e-5);
        let u = generate(Generator::Uniform(4)).unwrap();
        assert!((guessing_exponent(&u, 2.0, 2.0 - 0.25).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            expansion_moment(&p, 8, 1.0, 0.8, 0.1),
            Err(Error::DistortionAboveEntropy { .. })
        ));
    }

    #[test]
    fn uniform_base_has_no_second_order_term() {
        let u = generate(Generator::Uniform(2)).unwrap();
        let r = expansion_moment(&u, 12, 1.0, 0.25, 0.1).unwrap();
        assert!((r.predicted - 0.75).abs() < 1e-12);
        assert!(r.residual.abs() < 0.2);
    }

    #[test]
    fn list_budget_is_enforced() {
        let p = generate(Generator::Bernoulli(0.5)).unwrap();
        let tight = SizeBudget { max_lists: 100, ..SizeBudget::default() };
        assert!(matches!(
            exact_block_moment_with_budget(&p, 10, 1.0, 0.0, 0.0, tight),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn side_info_single_letter() {
        let j = JointPmf::random(2, 3, 9).unwrap();
        let r = side_info_first_order(&j, 1, 1.0, 0.0, 0.1).unwrap();
        let (m, _) = crate::side_info::conditional_min_moment(&j, 1.0, 0.0, 0.1).unwrap();
        assert!((r.exact - m.log2()).abs() < 1e-12);
    }
}
