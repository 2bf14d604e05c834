//! The acceptance suite: eleven seeded end-to-end checks, each returning a
//! pass/fail [`Outcome`] instead of panicking so that both the test harness
//! and the `selftest` command can report every criterion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{expansion_cumulant, expansion_moment, guessing_exponent};
use crate::coding::{
    build_optimal_code_l, corollary4_bounds, cumulant_length, excess_distortion_prob, figure_data, linspace,
    theorem3_check_l, FigureCase,
};
use crate::entropy::{
    kuzuoka_conditional_smooth, renner_wolf_conditional_zero, smooth_renyi, EntropyOrder,
};
use crate::error::Result;
use crate::guessing::{bounds_l, compare_upper_bounds_l, comparison_is_proven, min_moment_l};
use crate::oracle::{brute_force_min_moment_l, kuzuoka_grid_oracle};
use crate::pmf::{generate, z_variable, Generator, JointPmf, ListSize, Pmf};
use crate::side_info::side_info_report_l;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Runs a reduced instance count per criterion.
    pub quick: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 20240601, quick: false }
    }
}

impl SuiteOptions {
    fn count(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(3)
        } else {
            full
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "oracle equivalence"),
    (2, "bound sandwiches"),
    (3, "upper bound comparison"),
    (4, "chain rules"),
    (5, "conditional smooth vs grid"),
    (6, "cumulant sandwich"),
    (7, "figure reproduction"),
    (8, "small-rho divergence"),
    (9, "second-order envelope"),
    (10, "exponent limits"),
    (11, "reduction identities"),
];

pub fn run_all(opts: SuiteOptions) -> Vec<Outcome> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, opts)).collect()
}

/// Runs one criterion by number (1 to 11).
pub fn run_criterion(id: u8, opts: SuiteOptions) -> Outcome {
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let start = Instant::now();
    let result = match id {
        1 => oracle_equivalence(opts),
        2 => bound_sandwiches(opts),
        3 => upper_comparison(opts),
        4 => chain_rules(opts),
        5 => kuzuoka_vs_grid(opts),
        6 => cumulant_sandwich(opts),
        7 => figures(opts),
        8 => small_rho_divergence(),
        9 => envelope(opts),
        10 => exponent_limits(),
        11 => reductions(opts),
        _ => Ok(Err(format!("no criterion {id}"))),
    };
    let (pass, detail) = match result {
        Ok(Ok(msg)) => (true, msg),
        Ok(Err(msg)) => (false, msg),
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

/// `Ok(Ok(summary))` on success, `Ok(Err(first failure))` on a violated
/// property, `Err` if a computation itself failed.
type Check = Result<std::result::Result<String, String>>;

// Negated so that a NaN comparison counts as a failure.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Ok(Err(format!($($fmt)+)));
        }
    };
}

/// A seeded unconditional test instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub p: Pmf,
    pub rho: f64,
    pub l: ListSize,
    pub eps: f64,
}

const RHOS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const EPSS: [f64; 6] = [0.0, 0.01, 0.05, 0.125, 0.3, 0.6];

/// `count` random instances with `2..=max_atoms` atoms.
pub fn sweep_instances(seed: u64, count: usize, max_atoms: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(2..=max_atoms);
            let p = generate(Generator::Random { m, seed: rng.random() }).expect("valid generator");
            Instance {
                p,
                rho: RHOS[rng.random_range(0..RHOS.len())],
                l: ListSize::new(rng.random_range(1..=m as u64 + 1)).expect("positive"),
                eps: EPSS[rng.random_range(0..EPSS.len())],
            }
        })
        .collect()
}

fn random_joint(rng: &mut ChaCha8Rng, ny: usize, nx: usize) -> Result<JointPmf> {
    JointPmf::random(ny, nx, rng.random())
}

fn oracle_equivalence(opts: SuiteOptions) -> Check {
    let mut rng = opts.rng(1);
    let n = opts.count(200);
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let m = 3 + k % 3;
        let p = generate(Generator::Random { m, seed: rng.random() })?;
        for l in 1..=3 {
            let l = ListSize::new(l)?;
            for eps in [0.0, 0.05, 0.125, 0.3] {
                for rho in [0.5, 1.0, 2.0] {
                    let fast = min_moment_l(&p, rho, l, eps)?.moment;
                    let slow = brute_force_min_moment_l(&p, rho, l, eps)?;
                    let gap = (fast - slow).abs();
                    worst = worst.max(gap);
                    ensure!(gap <= 1e-9, "p={:?} L={} eps={eps} rho={rho}: {fast} vs {slow}", p.probs(), l.get());
                    checks += 1;
                }
            }
        }
    }
    Ok(Ok(format!("{checks} checks, max gap {worst:.1e}")))
}

fn bound_sandwiches(opts: SuiteOptions) -> Check {
    let mut worst = f64::INFINITY;
    let insts = sweep_instances(opts.seed ^ 2, opts.count(500), 12);
    for (k, t) in insts.iter().enumerate() {
        let r = bounds_l(&t.p, t.rho, t.l, t.eps)?;
        worst = worst.min(r.min_slack());
        ensure!(r.min_slack() >= -1e-9, "instance {k}: {r:?}");
    }
    let mut rng = opts.rng(2);
    let joints = opts.count(200);
    for k in 0..joints {
        let ny = 2 + k % 2;
        let nx = rng.random_range(2..=6);
        let j = random_joint(&mut rng, ny, nx)?;
        let rho = RHOS[rng.random_range(0..RHOS.len())];
        let l = ListSize::new(rng.random_range(1..=nx as u64))?;
        let eps = EPSS[rng.random_range(0..EPSS.len())];
        let r = side_info_report_l(&j, rho, l, eps)?;
        worst = worst.min(r.min_slack());
        ensure!(r.min_slack() >= -1e-9, "joint {k} rho={rho} L={} eps={eps}: {r:?}", l.get());
    }
    Ok(Ok(format!("{} unconditional + {joints} joint instances, min slack {worst:.3e}", insts.len())))
}

fn upper_comparison(opts: SuiteOptions) -> Check {
    let insts = sweep_instances(opts.seed ^ 3, opts.count(500), 12);
    let (mut proven, mut open, mut open_tighter) = (0, 0, 0);
    for (k, t) in insts.iter().enumerate() {
        let c = compare_upper_bounds_l(&t.p, t.rho, t.l, t.eps)?;
        if comparison_is_proven(t.l) {
            ensure!(c.z_tighter, "instance {k} (L={}): {c:?}", t.l.get());
            proven += 1;
        } else {
            open += 1;
            open_tighter += usize::from(c.z_tighter);
        }
    }
    Ok(Ok(format!(
        "L<=2: {proven}/{proven} tighter; L>2 (not asserted): {open_tighter}/{open} tighter"
    )))
}

/// Joint of `X` and the conditioning pair `(y, f(x))`, rows indexed by
/// `(y, z)`.
fn refine_rows(j: &JointPmf, f: &[usize], k: usize) -> Result<JointPmf> {
    let mut rows = Vec::new();
    for row in j.matrix() {
        for z in 0..k {
            rows.push(row.iter().enumerate().map(|(x, &v)| if f[x] == z { v } else { 0.0 }).collect());
        }
    }
    JointPmf::with_atol(rows, j.atol())
}

/// Joint of `(f(X), Y)`, rows indexed by `y`.
fn push_forward(j: &JointPmf, f: &[usize], k: usize) -> Result<JointPmf> {
    let rows = j
        .matrix()
        .iter()
        .map(|row| {
            let mut out = vec![0.0; k];
            for (x, &v) in row.iter().enumerate() {
                out[f[x]] += v;
            }
            out
        })
        .collect();
    JointPmf::with_atol(rows, j.atol())
}

fn chain_rules(opts: SuiteOptions) -> Check {
    let mut rng = opts.rng(4);
    let n = opts.count(300);
    let mut checks = 0;
    for k in 0..n {
        let ny = rng.random_range(1..=3);
        let nx = rng.random_range(2..=6);
        let j = random_joint(&mut rng, ny, nx)?;
        let kz = rng.random_range(1..=nx);
        let f: Vec<usize> = (0..nx).map(|x| if x < kz { x } else { rng.random_range(0..kz) }).collect();
        let px = j.marginal_x();
        let cols: Vec<f64> = (0..nx).map(|x| j.matrix().iter().map(|r| r[x]).sum()).collect();
        let marg = JointPmf::new(vec![cols])?;
        let refined = refine_rows(&j, &f, kz)?;
        let zy = push_forward(&j, &f, kz)?;
        let x_given_z = refine_rows(&marg, &f, kz)?;
        let pz = push_forward(&marg, &f, kz)?.flatten();
        // Z as the sorted grouping into lists of two
        let grouped_z = z_variable(&px, ListSize::new(2)?);
        let grouping: Vec<usize> = (0..px.len()).map(|i| i / 2).collect();
        let sorted = JointPmf::new(vec![px.probs().to_vec()])?;
        let x_given_list = refine_rows(&sorted, &grouping, px.len().div_ceil(2))?;
        for alpha in [0.2, 0.5, 0.9] {
            let order = EntropyOrder::new(alpha)?;
            for eps in [0.0, 0.1, 0.3] {
                let lhs = smooth_renyi(&px, order, eps)?;
                let rhs = renner_wolf_conditional_zero(&x_given_z, order) + smooth_renyi(&pz, order, eps)?;
                ensure!(lhs <= rhs + 1e-9, "joint {k} alpha={alpha} eps={eps}: unconditional {lhs} > {rhs}");
                let rhs = renner_wolf_conditional_zero(&x_given_list, order) + smooth_renyi(&grouped_z, order, eps)?;
                ensure!(lhs <= rhs + 1e-9, "joint {k} alpha={alpha} eps={eps}: list grouping {lhs} > {rhs}");
                let lhs = kuzuoka_conditional_smooth(&j, order, eps)?;
                let rhs = renner_wolf_conditional_zero(&refined, order) + kuzuoka_conditional_smooth(&zy, order, eps)?;
                ensure!(lhs <= rhs + 1e-9, "joint {k} alpha={alpha} eps={eps}: conditional {lhs} > {rhs}");
                checks += 3;
            }
        }
    }
    Ok(Ok(format!("{checks} inequalities on {n} joints")))
}

fn kuzuoka_vs_grid(opts: SuiteOptions) -> Check {
    let mut rng = opts.rng(5);
    let n = opts.count(50);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let ny = 2 + k % 2;
        let nx = rng.random_range(3..=5);
        let j = random_joint(&mut rng, ny, nx)?;
        let order = EntropyOrder::new([0.2, 0.5, 0.8][rng.random_range(0..3)])?;
        let eps = [0.05, 0.1, 0.3][rng.random_range(0..3)];
        let v = kuzuoka_conditional_smooth(&j, order, eps)?;
        let g = kuzuoka_grid_oracle(&j, order, eps, 1e-5)?;
        worst = worst.max((v - g).abs());
        ensure!((v - g).abs() <= 1e-6, "joint {k} |Y|={ny} alpha={} eps={eps}: {v} vs grid {g}", order.alpha());
    }
    Ok(Ok(format!("{n} joints, max gap {worst:.1e}")))
}

fn cumulant_sandwich(opts: SuiteOptions) -> Check {
    let insts = sweep_instances(opts.seed ^ 6, opts.count(500), 12);
    let mut min_gap = f64::INFINITY;
    for (k, t) in insts.iter().enumerate() {
        let r = match theorem3_check_l(&t.p, t.rho, t.l, t.eps) {
            Ok(r) => r,
            Err(crate::Error::SandwichViolation(m)) => return Ok(Err(format!("instance {k}: {m}"))),
            Err(e) => return Err(e),
        };
        min_gap = min_gap.min(r.lambda_star - r.strict_lower);
        let code = build_optimal_code_l(&t.p, t.l, t.eps)?;
        let excess = excess_distortion_prob(&code, &t.p, t.l.log2());
        let hits_budget = code.l_star >= 2 || code.alpha == 0.0;
        ensure!(
            excess <= t.eps + 1e-9 && (!hits_budget || (excess - t.eps).abs() <= 1e-9),
            "instance {k}: excess {excess} vs eps {}",
            t.eps
        );
    }
    // lossless, error free: log2(M*)/rho - 1 < Lambda* <= log2(M*)/rho
    for (k, t) in sweep_instances(opts.seed ^ 66, opts.count(100), 12).iter().enumerate() {
        let r = theorem3_check_l(&t.p, t.rho, ListSize::new(1)?, 0.0)?;
        let m = r.moment.log2() / t.rho;
        ensure!(m - 1.0 < r.lambda_star && r.lambda_star <= m + 1e-9, "lossless instance {k}: {r:?}");
    }
    Ok(Ok(format!("{} instances, min strict gap {min_gap:.3e}", insts.len())))
}

fn figures(opts: SuiteOptions) -> Check {
    let grid = linspace(0.1, 10.0, 100);
    let mut rows = 0;
    for case in FigureCase::ALL {
        for r in figure_data(case, &grid, opts.seed)? {
            ensure!(r.new_upper <= r.old_upper + 1e-12, "case {} rho={}: new {} > old {}", case.name(), r.rho, r.new_upper, r.old_upper);
            ensure!(r.lambda_exact <= r.new_upper + 1e-9, "case {} rho={}: exact {} > new {}", case.name(), r.rho, r.lambda_exact, r.new_upper);
            rows += 1;
        }
    }
    Ok(Ok(format!("6 cases, {rows} grid points")))
}

fn small_rho_divergence() -> Check {
    let p = FigureCase::C1a.pmf(0);
    let (_, old_small) = corollary4_bounds(&p, 1e-3, 2.0)?;
    let (_, old_one) = corollary4_bounds(&p, 1.0, 2.0)?;
    ensure!(old_small > 10.0 * old_one, "old bound {old_small} at 1e-3 vs {old_one} at 1");
    let cap = 3f64.log2();
    for rho in std::iter::once(1e-3).chain(linspace(0.1, 10.0, 100)) {
        let (new, _) = corollary4_bounds(&p, rho, 2.0)?;
        ensure!(new <= cap + 1e-12, "new bound {new} at rho={rho} exceeds log2 3");
    }
    Ok(Ok(format!("old(1e-3)/old(1) = {:.1}, new <= log2 3", old_small / old_one)))
}

/// Frozen constant for the second-order envelope.
#[derive(Debug, Clone, Deserialize)]
pub struct Envelope {
    pub c: f64,
    pub d: f64,
    pub eps: f64,
    pub rho: f64,
    pub n_min: usize,
    pub n_max: usize,
}

pub fn frozen_envelope() -> Envelope {
    serde_json::from_str(include_str!("../fixtures/expansion_envelope.json")).expect("fixture parses")
}

fn envelope(opts: SuiteOptions) -> Check {
    let env = frozen_envelope();
    let base = generate(Generator::Bernoulli(0.2))?;
    let ns: Vec<usize> = if opts.quick {
        vec![env.n_min, env.n_max]
    } else {
        (env.n_min..=env.n_max).collect()
    };
    let mut residuals = Vec::new();
    for &n in &ns {
        let r = expansion_moment(&base, n, env.rho, env.d, env.eps)?;
        let bound = env.c * (n as f64).log2() / n as f64;
        ensure!(r.residual.abs() <= bound, "n={n}: |residual| {} > {bound}", r.residual.abs());
        residuals.push(r.residual.abs());
    }
    let (first, last) = (residuals[0], residuals[residuals.len() - 1]);
    ensure!(last < first, "residual did not shrink: n={} {first} vs n={} {last}", ns[0], ns[ns.len() - 1]);
    Ok(Ok(format!("C={:.3}, |residual| {first:.4} -> {last:.4}", env.c)))
}

/// Sources, distortions and parameters for the `n = 16` limit check.
pub const LIMIT_CASES: [(usize, f64); 3] = [(2, 0.5), (3, 0.5), (4, 1.0)];
pub const LIMIT_RHO: f64 = 2.0;
pub const LIMIT_EPS: f64 = 0.01;

fn exponent_limits() -> Check {
    let mut worst: f64 = 0.0;
    for (m, d) in LIMIT_CASES {
        let p = generate(Generator::Uniform(m))?;
        let e = guessing_exponent(&p, LIMIT_RHO, d)?;
        let r = expansion_moment(&p, 16, LIMIT_RHO, d, LIMIT_EPS)?;
        ensure!((r.exact - e).abs() <= 0.1 * LIMIT_RHO, "uniform({m}) D={d}: moment rate {} vs {e}", r.exact);
        let c = expansion_cumulant(&p, 16, LIMIT_RHO, d, LIMIT_EPS)?;
        ensure!((c.exact - e / LIMIT_RHO).abs() <= 0.1, "uniform({m}) D={d}: cumulant rate {} vs {}", c.exact, e / LIMIT_RHO);
        worst = worst.max((c.exact - e / LIMIT_RHO).abs());
    }
    Ok(Ok(format!("3 sources at n=16, max cumulant gap {worst:.3}")))
}

fn reductions(opts: SuiteOptions) -> Check {
    let insts = sweep_instances(opts.seed ^ 11, opts.count(500), 12);
    let one = ListSize::new(1)?;
    for (k, t) in insts.iter().enumerate() {
        let z = z_variable(&t.p, t.l);
        let mx = min_moment_l(&t.p, t.rho, t.l, t.eps)?.moment;
        let mz = min_moment_l(&z, t.rho, one, t.eps)?.moment;
        ensure!((mx - mz).abs() <= 1e-12, "instance {k}: moment {mx} vs {mz}");
        let lx = cumulant_length(&build_optimal_code_l(&t.p, t.l, t.eps)?, &t.p, t.rho)?;
        let lz = cumulant_length(&build_optimal_code_l(&z, one, t.eps)?, &z, t.rho)?;
        ensure!((lx - lz).abs() <= 1e-12, "instance {k}: cumulant {lx} vs {lz}");
    }
    Ok(Ok(format!("{} instances", insts.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let opts = SuiteOptions { quick: true, ..SuiteOptions::default() };
        for id in [1, 3, 7, 8, 11] {
            let o = run_criterion(id, opts);
            assert!(o.pass, "{}", o.line());
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(12, SuiteOptions::default()).pass);
    }
}
