//! Probability mass functions on finite alphabets.
//!
//! A [`Pmf`] is always stored in non-increasing order with zero-mass atoms
//! removed, so atom `i` (1-based in the docs, 0-based in code) is the `i`-th
//! most likely outcome. Everything downstream (list construction, smooth
//! truncation, optimal strategies and codes) relies on that ordering.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{check_eps, Error, Result};

/// Default absolute tolerance for the sum-to-one check.
pub const DEFAULT_ATOL: f64 = 1e-9;

/// Slack used when comparing cumulative sums against `1 - eps`.
pub(crate) const CUM_SLACK: f64 = 1e-13;

/// A validated, descending-sorted probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    atol: f64,
}

impl Pmf {
    /// Validates `raw` with the default tolerance; see [`make_pmf`].
    pub fn new(raw: &[f64]) -> Result<Self> {
        make_pmf(raw, DEFAULT_ATOL)
    }

    pub fn with_atol(raw: &[f64], atol: f64) -> Result<Self> {
        make_pmf(raw, atol)
    }

    /// Caller guarantees the invariants (sorted, positive, normalized).
    pub(crate) fn from_sorted(probs: Vec<f64>, atol: f64) -> Self {
        debug_assert!(!probs.is_empty());
        debug_assert!(probs.windows(2).all(|w| w[0] >= w[1]));
        Pmf { probs, atol }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn atol(&self) -> f64 {
        self.atol
    }

    /// Tolerance scaled by alphabet size, used for all "equals eps" checks.
    pub fn scaled_atol(&self) -> f64 {
        self.atol * (self.probs.len().max(1) as f64)
    }

    /// Applies a deterministic map `f: {0..len} -> {0..}` to the atoms and
    /// returns the pmf of `f(X)`.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Pmf {
        let mut out: Vec<f64> = Vec::new();
        for (i, &p) in self.probs.iter().enumerate() {
            let j = f(i);
            if j >= out.len() {
                out.resize(j + 1, 0.0);
            }
            out[j] += p;
        }
        make_pmf(&out, self.atol).expect("image of a valid pmf is valid")
    }
}

/// Validates and canonicalizes a raw probability vector.
///
/// Zero entries are stripped and the rest sorted in non-increasing order
/// (stable, so ties keep their input order).
pub fn make_pmf(raw: &[f64], atol: f64) -> Result<Pmf> {
    if raw.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&bad) = raw.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidMass(bad));
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > atol {
        return Err(Error::NotNormalized(sum));
    }
    let mut probs: Vec<f64> = raw.iter().copied().filter(|&p| p > 0.0).collect();
    if probs.is_empty() {
        return Err(Error::EmptyInput);
    }
    probs.sort_by(|a, b| b.total_cmp(a));
    Ok(Pmf { probs, atol })
}

/// Source models used throughout the examples and figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `1/2, 1/4, ..., 1/2^(m-1), 1/2^(m-1)`.
    Dyadic(usize),
    Uniform(usize),
    /// Uniform sample from the simplex, reproducible from the seed.
    Random { m: usize, seed: u64 },
    Bernoulli(f64),
}

pub fn generate(kind: Generator) -> Result<Pmf> {
    match kind {
        Generator::Dyadic(m) => {
            if m == 0 {
                return Err(Error::BadParameter("dyadic needs m >= 1".into()));
            }
            let mut probs: Vec<f64> = (1..m).map(|i| 0.5f64.powi(i as i32)).collect();
            probs.push(0.5f64.powi(m as i32 - 1));
            make_pmf(&probs, DEFAULT_ATOL)
        }
        Generator::Uniform(m) => {
            if m == 0 {
                return Err(Error::BadParameter("uniform needs m >= 1".into()));
            }
            Ok(Pmf::from_sorted(vec![1.0 / m as f64; m], DEFAULT_ATOL))
        }
        Generator::Random { m, seed } => {
            if m == 0 {
                return Err(Error::BadParameter("random needs m >= 1".into()));
            }
            make_pmf(&random_simplex(m, seed), DEFAULT_ATOL)
        }
        Generator::Bernoulli(p) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::BadParameter(format!("bernoulli needs p in (0,1) (got {p})")));
            }
            let (hi, lo) = if p >= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
            Ok(Pmf::from_sorted(vec![hi, lo], DEFAULT_ATOL))
        }
    }
}

/// Flat-Dirichlet sample of length `m`.
pub fn random_simplex(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..m)
        .map(|_| {
            let e: f64 = Exp1.sample(&mut rng);
            e.max(f64::MIN_POSITIVE)
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

impl FromStr for Generator {
    type Err = Error;

    /// Parses `dyadic:10`, `uniform:4`, `random:5:42`, `bernoulli:0.2`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::BadParameter(format!("unrecognized generator spec '{s}'"));
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["dyadic", m] => Ok(Generator::Dyadic(int(m)?)),
            ["uniform", m] => Ok(Generator::Uniform(int(m)?)),
            ["random", m] => Ok(Generator::Random { m: int(m)?, seed: 0 }),
            ["random", m, seed] => Ok(Generator::Random {
                m: int(m)?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            ["bernoulli", p] => Ok(Generator::Bernoulli(p.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// A joint pmf `P_{X,Y}` stored as a `|Y| x |X|` matrix; row `y` holds
/// `P_{X,Y}(., y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    matrix: Vec<Vec<f64>>,
    atol: f64,
}

impl JointPmf {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_atol(matrix, DEFAULT_ATOL)
    }

    /// Validates the matrix and strips rows with zero mass.
    pub fn with_atol(matrix: Vec<Vec<f64>>, atol: f64) -> Result<Self> {
        let nx = matrix.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if nx == 0 {
            return Err(Error::EmptyInput);
        }
        if matrix.iter().any(|r| r.len() != nx) {
            return Err(Error::RaggedMatrix);
        }
        if let Some(&bad) = matrix.iter().flatten().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidMass(bad));
        }
        let sum: f64 = matrix.iter().flatten().sum();
        if (sum - 1.0).abs() > atol {
            return Err(Error::NotNormalized(sum));
        }
        let matrix: Vec<Vec<f64>> = matrix
            .into_iter()
            .filter(|r| r.iter().sum::<f64>() > 0.0)
            .collect();
        Ok(JointPmf { matrix, atol })
    }

    /// Joint pmf of independent `X ~ px` and `Y ~ py`.
    pub fn independent(px: &[f64], py: &[f64]) -> Result<Self> {
        let m = py.iter().map(|&b| px.iter().map(|&a| a * b).collect()).collect();
        Self::new(m)
    }

    /// Joint pmf of `(X, f(X))`, with rows indexed by the value of `f`.
    pub fn of_function(px: &[f64], f: &[usize]) -> Result<Self> {
        assert_eq!(px.len(), f.len());
        let nz = f.iter().max().map_or(0, |m| m + 1);
        let mut m = vec![vec![0.0; px.len()]; nz];
        for (x, (&p, &z)) in px.iter().zip(f).enumerate() {
            m[z][x] = p;
        }
        Self::new(m)
    }

    /// Flat-Dirichlet random joint with `ny` rows and `nx` columns.
    pub fn random(ny: usize, nx: usize, seed: u64) -> Result<Self> {
        if ny == 0 || nx == 0 {
            return Err(Error::BadParameter("random joint needs positive dimensions".into()));
        }
        let flat = random_simplex(ny * nx, seed);
        Self::new(flat.chunks(nx).map(<[f64]>::to_vec).collect())
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn atol(&self) -> f64 {
        self.atol
    }

    pub fn n_y(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_x(&self) -> usize {
        self.matrix[0].len()
    }

    /// Number of `x` with positive marginal mass.
    pub fn support_x(&self) -> usize {
        (0..self.n_x())
            .filter(|&x| self.matrix.iter().any(|r| r[x] > 0.0))
            .count()
    }

    pub fn p_y(&self) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().sum()).collect()
    }

    /// `P_{X|Y}(. | y)` as a sorted [`Pmf`].
    pub fn conditional(&self, y: usize) -> Pmf {
        let row = &self.matrix[y];
        let s: f64 = row.iter().sum();
        let normalized: Vec<f64> = row.iter().map(|v| v / s).collect();
        make_pmf(&normalized, self.atol).expect("rows of a valid joint normalize")
    }

    pub fn marginal_x(&self) -> Pmf {
        let mut m = vec![0.0; self.n_x()];
        for r in &self.matrix {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        make_pmf(&m, self.atol).expect("marginal of a valid joint is valid")
    }

    pub fn marginal_y(&self) -> Pmf {
        make_pmf(&self.p_y(), self.atol).expect("marginal of a valid joint is valid")
    }

    /// The pmf of the pair `(X, Y)` viewed as a single variable.
    pub fn flatten(&self) -> Pmf {
        let flat: Vec<f64> = self.matrix.iter().flatten().copied().collect();
        make_pmf(&flat, self.atol * self.n_y() as f64).expect("flattened joint is valid")
    }

    /// Joint of `(X^n, Y^n)` for `n` independent copies. Rows and columns
    /// are indexed by tuples in mixed-radix order.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParameter("n must be positive".into()));
        }
        let (ny, nx) = (self.n_y(), self.n_x());
        let rows = ny.checked_pow(n as u32).filter(|r| *r <= 1 << 16);
        let cols = nx.checked_pow(n as u32).filter(|c| *c <= 1 << 16);
        let (Some(rows), Some(cols)) = (rows, cols) else {
            return Err(Error::TooLarge(format!("{ny}x{nx} joint to the power {n}")));
        };
        if rows.saturating_mul(cols) > 1 << 24 {
            return Err(Error::TooLarge(format!("{rows}x{cols} product joint")));
        }
        let mut m = vec![vec![1.0; cols]; rows];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                let (mut rr, mut cc) = (r, c);
                for _ in 0..n {
                    *v *= self.matrix[rr % ny][cc % nx];
                    rr /= ny;
                    cc /= nx;
                }
            }
        }
        Self::with_atol(m, self.atol * n as f64)
    }
}

/// A group of equiprobable atoms of a product pmf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run {
    pub value: f64,
    pub count: u64,
}

/// A sorted pmf stored as runs of identical probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPmf {
    runs: Vec<Run>,
    atoms: u64,
}

impl RunPmf {
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn atoms(&self) -> u64 {
        self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.runs.iter().map(|r| r.value * r.count as f64).sum()
    }

    /// Materializes every atom. Only sensible for small products.
    pub fn expand(&self) -> Result<Pmf> {
        if self.atoms > 1 << 24 {
            return Err(Error::TooLarge(format!("{} atoms", self.atoms)));
        }
        let probs: Vec<f64> = self
            .runs
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.count as usize))
            .collect();
        Ok(Pmf::from_sorted(probs, DEFAULT_ATOL * self.atoms as f64))
    }

    /// Single-letter pmf viewed as runs of multiplicity one (ties merged).
    pub fn from_pmf(p: &Pmf) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for &v in p.probs() {
            match runs.last_mut() {
                Some(r) if r.value == v => r.count += 1,
                _ => runs.push(Run { value: v, count: 1 }),
            }
        }
        RunPmf { runs, atoms: p.len() as u64 }
    }
}

/// Resource limits for block-length computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBudget {
    /// Upper bound on `n * log2 |X|`.
    pub max_atoms_log2: f64,
    pub max_runs: usize,
    /// Upper bound on the number of lists a block walk may visit.
    pub max_lists: u64,
}

impl Default for SizeBudget {
    fn default() -> Self {
        SizeBudget { max_atoms_log2: 40.0, max_runs: 10_000_000, max_lists: 10_000_000 }
    }
}

/// The `n`-fold product of `base`, grouped into type classes.
pub fn iid_extension(base: &Pmf, n: usize) -> Result<RunPmf> {
    iid_extension_with_budget(base, n, SizeBudget::default())
}

pub fn iid_extension_with_budget(base: &Pmf, n: usize, budget: SizeBudget) -> Result<RunPmf> {
    if n == 0 {
        return Err(Error::BadParameter("n must be positive".into()));
    }
    let log_atoms = n as f64 * (base.len() as f64).log2();
    if log_atoms > budget.max_atoms_log2 {
        return Err(Error::TooLarge(format!(
            "{n} copies of a {}-atom source need 2^{log_atoms:.1} atoms (budget 2^{})",
            base.len(),
            budget.max_atoms_log2
        )));
    }
    // Group equal base probabilities so that ties collapse into one class.
    let mut groups: Vec<(f64, u64)> = Vec::new();
    for &v in base.probs() {
        match groups.last_mut() {
            Some(g) if g.0 == v => g.1 += 1,
            _ => groups.push((v, 1)),
        }
    }
    let n_classes = binomial(n as u64 + groups.len() as u64 - 1, groups.len() as u64 - 1);
    if n_classes.is_none_or(|c| c > budget.max_runs as u128) {
        return Err(Error::TooLarge(format!("more than {} type classes", budget.max_runs)));
    }

    let mut runs = Vec::new();
    let mut composition = vec![0usize; groups.len()];
    compositions(n, 0, &mut composition, &mut |comp| {
        let mut value = 1.0;
        let mut count: u128 = multinomial(n, comp);
        for (&(v, mult), &k) in groups.iter().zip(comp) {
            value *= v.powi(k as i32);
            count *= (mult as u128).pow(k as u32);
        }
        runs.push(Run { value, count: count as u64 });
    });
    runs.sort_by(|a, b| b.value.total_cmp(&a.value));

    // Distinct compositions can land on the same probability.
    let mut merged: Vec<Run> = Vec::with_capacity(runs.len());
    for r in runs {
        match merged.last_mut() {
            Some(m) if (m.value - r.value).abs() <= 1e-12 * m.value => m.count += r.count,
            _ => merged.push(r),
        }
    }
    let atoms = merged.iter().map(|r| r.count).sum();
    Ok(RunPmf { runs: merged, atoms })
}

fn compositions(remaining: usize, idx: usize, comp: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if idx + 1 == comp.len() {
        comp[idx] = remaining;
        f(comp);
        return;
    }
    for k in 0..=remaining {
        comp[idx] = k;
        compositions(remaining - k, idx + 1, comp, f);
    }
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

fn multinomial(n: usize, comp: &[usize]) -> u128 {
    let mut acc: u128 = 1;
    let mut left = n as u64;
    for &k in comp {
        acc *= binomial(left, k as u64).expect("multinomial fits in u128");
        left -= k as u64;
    }
    acc
}

/// Snap window for `floor(2^D)`.
const SNAP: f64 = 1.0 / (1u64 << 40) as f64;

/// `floor(2^d)`, snapping to `k` when `d` is within `2^-40` of `log2 k`.
///
/// Saturates at `u64::MAX` for `d >= 64`.
pub fn list_size(d: f64) -> Result<u64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::NegativeDistortion(d));
    }
    if d >= 64.0 {
        return Ok(u64::MAX);
    }
    let raw = d.exp2();
    let nearest = raw.round().max(1.0);
    if (d - nearest.log2()).abs() <= SNAP {
        return Ok(nearest as u64);
    }
    Ok(raw.floor() as u64)
}

/// List size `L = floor(2^D)`, the largest number of atoms a single soft
/// reconstruction can cover at log-loss `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ListSize(u64);

impl ListSize {
    pub fn new(l: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::BadParameter("list size must be at least 1".into()));
        }
        Ok(ListSize(l))
    }

    pub fn from_distortion(d: f64) -> Result<Self> {
        list_size(d).map(ListSize)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn log2(self) -> f64 {
        (self.0 as f64).log2()
    }
}

/// First `i_star` entries of the smoothed sub-distribution `Q^eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTruncation {
    /// 1-based index of the last atom kept.
    pub i_star: usize,
    pub q: Vec<f64>,
}

impl SmoothTruncation {
    pub fn mass(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Removes `eps` of mass from the tail of `p`.
///
/// `i_star` is the least index whose cumulative mass reaches `1 - eps`; the
/// last kept atom carries whatever is needed to make the total `1 - eps`.
pub fn smooth_truncation(p: &Pmf, eps: f64) -> Result<SmoothTruncation> {
    check_eps(eps)?;
    Ok(truncate_sorted(p.probs(), eps))
}

pub(crate) fn truncate_sorted(probs: &[f64], eps: f64) -> SmoothTruncation {
    let target = 1.0 - eps;
    let mut cum = 0.0;
    let mut i_star = probs.len();
    for (i, &p) in probs.iter().enumerate() {
        if cum + p >= target - CUM_SLACK {
            i_star = i + 1;
            break;
        }
        cum += p;
    }
    let mut q = probs[..i_star].to_vec();
    let last = (target - cum).clamp(0.0, probs[i_star - 1]);
    q[i_star - 1] = last;
    SmoothTruncation { i_star, q }
}

/// The list index `Z = ceil(X / L)` of a sorted pmf.
pub fn z_variable(p: &Pmf, l: ListSize) -> Pmf {
    let l = usize::try_from(l.get()).unwrap_or(usize::MAX);
    let probs: Vec<f64> = p.probs().chunks(l.min(p.len())).map(|c| c.iter().sum()).collect();
    debug_assert!(probs.windows(2).all(|w| w[0] >= w[1] - 1e-15));
    // Grouping consecutive atoms of a sorted pmf keeps the order; ties in
    // the sums may differ in the last bit, which we clean up here.
    let mut probs = probs;
    for i in 1..probs.len() {
        if probs[i] > probs[i - 1] {
            probs[i] = probs[i - 1];
        }
    }
    Pmf::from_sorted(probs, p.atol())
}
