//! The optimal variable-length lossy code under log-loss with excess
//! distortion probability `eps`, and Campbell's normalized cumulant of its
//! codeword lengths.
//!
//! Atoms are grouped into lists of `L` consecutive atoms of the sorted pmf.
//! List `l` before the cutoff gets the `l`-th binary string in shortlex
//! order (empty, 0, 1, 00, 01, ...), which has length `floor(log2 l)`. The
//! cutoff list `l*` is sent with its own string with probability `1 - alpha`
//! and as the empty string otherwise; later lists are always sent empty.

use std::str::FromStr;

use serde::Serialize;

use crate::entropy::{renyi, smooth_renyi, EntropyOrder};
use crate::error::{check_eps, check_rho, Error, Result};
use crate::guessing::min_moment_l;
use crate::pmf::{generate, smooth_truncation, z_variable, Generator, ListSize, Pmf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VlCode {
    /// `lengths[l - 1] = floor(log2 l)` for lists `1..=l_star`; later lists
    /// are encoded as the empty string.
    pub lengths: Vec<u32>,
    /// Probability that the cutoff list is sent as the empty string.
    pub alpha: f64,
    /// 1-based cutoff list index.
    pub l_star: usize,
    pub list_size: u64,
    pub eps: f64,
}

/// `floor(log2 l)` for `l >= 1`.
pub fn codeword_length(l: u64) -> u32 {
    63 - l.leading_zeros()
}

/// The `l`-th string of `{0,1}*` in shortlex order: `l` in binary with the
/// leading 1 removed.
pub fn codeword(l: u64) -> String {
    assert!(l >= 1, "lists are numbered from 1");
    let bits = format!("{l:b}");
    bits[1..].to_string()
}

pub fn build_optimal_code(p: &Pmf, d: f64, eps: f64) -> Result<VlCode> {
    build_optimal_code_l(p, ListSize::from_distortion(d)?, eps)
}

pub fn build_optimal_code_l(p: &Pmf, l: ListSize, eps: f64) -> Result<VlCode> {
    check_eps(eps)?;
    let t = smooth_truncation(p, eps)?;
    let ls = usize::try_from(l.get()).unwrap_or(usize::MAX);
    let l_star = t.i_star.div_ceil(ls);
    let pz = z_variable(p, l);
    let tail: f64 = pz.probs()[l_star..].iter().sum();
    let alpha = ((eps - tail) / pz.probs()[l_star - 1]).clamp(0.0, 1.0);
    let lengths = (1..=l_star as u64).map(codeword_length).collect();
    Ok(VlCode { lengths, alpha, l_star, list_size: l.get(), eps })
}

fn list_masses(code: &VlCode, p: &Pmf) -> Pmf {
    z_variable(p, ListSize::new(code.list_size).expect("code has a valid list size"))
}

/// Probability that the decoded reconstruction fails to cover `X` at
/// log-loss `D`. A list decoded from its own string covers its members iff
/// `log2 |list| <= D`; an atom sent as the empty string is covered only if
/// it sits in list 1.
pub fn excess_distortion_prob(code: &VlCode, p: &Pmf, d: f64) -> f64 {
    let ls = usize::try_from(code.list_size).unwrap_or(usize::MAX);
    let sizes: Vec<usize> = p.probs().chunks(ls.min(p.len())).map(<[f64]>::len).collect();
    let covers = |idx: usize| (sizes[idx] as f64).log2() <= d + 1e-12;
    let pz = list_masses(code, p);
    let mut err = 0.0;
    for (i, &m) in pz.probs().iter().enumerate() {
        let l = i + 1;
        let own = if l < code.l_star {
            1.0
        } else if l == code.l_star {
            1.0 - code.alpha
        } else {
            0.0
        };
        if !covers(i) {
            err += own * m;
        }
        // the remainder travels as the empty string and decodes to list 1
        if !(l == 1 && covers(0)) {
            err += (1.0 - own) * m;
        }
    }
    err
}

/// `(1/rho) log2 E[2^(rho * length)]` for the code.
pub fn cumulant_length(code: &VlCode, p: &Pmf, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let pz = list_masses(code, p);
    let mut acc = 0.0;
    for (i, &m) in pz.probs().iter().enumerate() {
        let l = i + 1;
        if l < code.l_star {
            acc += m * (rho * code.lengths[i] as f64).exp2();
        } else if l == code.l_star {
            acc += (1.0 - code.alpha) * m * (rho * code.lengths[i] as f64).exp2() + code.alpha * m;
        } else {
            acc += m;
        }
    }
    Ok(acc.log2() / rho)
}

/// Expected codeword length, the `rho -> 0` limit of [`cumulant_length`].
pub fn expected_length(code: &VlCode, p: &Pmf) -> f64 {
    let pz = list_masses(code, p);
    pz.probs()
        .iter()
        .take(code.l_star)
        .enumerate()
        .map(|(i, &m)| {
            let w = if i + 1 == code.l_star { 1.0 - code.alpha } else { 1.0 };
            w * m * code.lengths[i] as f64
        })
        .sum()
}

/// Longest codeword used with positive probability, the `rho -> inf` limit.
pub fn max_length(code: &VlCode) -> u32 {
    if code.alpha < 1.0 {
        code.lengths[code.l_star - 1]
    } else if code.l_star >= 2 {
        code.lengths[code.l_star - 2]
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantReport {
    pub lambda_star: f64,
    pub moment: f64,
    pub rho: f64,
    pub d: f64,
    pub eps: f64,
    /// `(1/rho) log2(2^-rho M* + eps)`, strictly below `lambda_star`.
    pub strict_lower: f64,
    /// `(1/rho) log2(M* + eps)`.
    pub upper: f64,
}

pub fn theorem3_check(p: &Pmf, rho: f64, d: f64, eps: f64) -> Result<CumulantReport> {
    let mut r = theorem3_check_l(p, rho, ListSize::from_distortion(d)?, eps)?;
    r.d = d;
    Ok(r)
}

/// Evaluates the cumulant/moment sandwich and fails if it is violated.
pub fn theorem3_check_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<CumulantReport> {
    let moment = min_moment_l(p, rho, l, eps)?.moment;
    let code = build_optimal_code_l(p, l, eps)?;
    let lambda_star = cumulant_length(&code, p, rho)?;
    let strict_lower = ((-rho).exp2() * moment + eps).log2() / rho;
    let upper = (moment + eps).log2() / rho;
    let r = CumulantReport { lambda_star, moment, rho, d: l.log2(), eps, strict_lower, upper };
    if !(strict_lower < lambda_star && lambda_star <= upper + 1e-9) {
        return Err(Error::SandwichViolation(format!(
            "{strict_lower} < {lambda_star} <= {upper} fails"
        )));
    }
    Ok(r)
}

pub fn corollary4_bounds(p: &Pmf, rho: f64, d: f64) -> Result<(f64, f64)> {
    corollary4_bounds_l(p, rho, ListSize::from_distortion(d)?)
}

/// Error-free upper bounds on the cumulant: `(list-index bound, explicit
/// bound)`.
pub fn corollary4_bounds_l(p: &Pmf, rho: f64, l: ListSize) -> Result<(f64, f64)> {
    let order = EntropyOrder::from_rho(rho)?;
    let new = renyi(&z_variable(p, l), order);
    let h = renyi(p, order);
    let old = (1.0 + rho.exp2() * (rho * h - rho * l.log2()).exp2()).log2() / rho;
    Ok((new, old))
}

/// Cumulant bounds with an error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantBounds {
    pub z_upper: f64,
    pub explicit_upper: f64,
    pub z_strict_lower: f64,
    pub explicit_lower: f64,
}

pub fn cumulant_bounds_l(p: &Pmf, rho: f64, l: ListSize, eps: f64) -> Result<CumulantBounds> {
    let order = EntropyOrder::from_rho(rho)?;
    let hz = smooth_renyi(&z_variable(p, l), order, eps)?;
    let hx = smooth_renyi(p, order, eps)?;
    let factor = (1.0 + (p.len() as f64).log2()).powf(-rho) * (-rho).exp2();
    let core = (rho * hx - rho * l.log2()).exp2();
    let lg = |v: f64| v.log2() / rho;
    Ok(CumulantBounds {
        z_upper: lg((rho * hz).exp2() + eps),
        explicit_upper: lg(1.0 - eps + rho.exp2() * core + eps),
        z_strict_lower: lg(factor * (rho * hz).exp2() + eps),
        explicit_lower: lg(factor * core + eps),
    })
}

/// The six reference sources for the error-free bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureCase {
    C1a,
    C1b,
    C1c,
    C2a,
    C2b,
    C2c,
}

impl FigureCase {
    pub const ALL: [FigureCase; 6] =
        [FigureCase::C1a, FigureCase::C1b, FigureCase::C1c, FigureCase::C2a, FigureCase::C2b, FigureCase::C2c];

    fn alphabet(self) -> usize {
        match self {
            FigureCase::C1a | FigureCase::C1b | FigureCase::C1c => 10,
            _ => 50,
        }
    }

    pub fn distortion(self) -> f64 {
        if self.alphabet() == 10 {
            2.0
        } else {
            4.0
        }
    }

    /// Source pmf; `seed` only matters for the random cases.
    pub fn pmf(self, seed: u64) -> Pmf {
        let m = self.alphabet();
        let kind = match self {
            FigureCase::C1a | FigureCase::C2a => Generator::Dyadic(m),
            FigureCase::C1b | FigureCase::C2b => Generator::Uniform(m),
            FigureCase::C1c | FigureCase::C2c => Generator::Random { m, seed },
        };
        generate(kind).expect("figure sources are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            FigureCase::C1a => "1a",
            FigureCase::C1b => "1b",
            FigureCase::C1c => "1c",
            FigureCase::C2a => "2a",
            FigureCase::C2b => "2b",
            FigureCase::C2c => "2c",
        }
    }
}

impl FromStr for FigureCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::BadParameter(format!("unknown case '{s}' (expected 1a..2c)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureRow {
    pub rho: f64,
    pub new_upper: f64,
    pub old_upper: f64,
    pub lambda_exact: f64,
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

pub fn figure_data(case: FigureCase, rho_grid: &[f64], seed: u64) -> Result<Vec<FigureRow>> {
    let p = case.pmf(seed);
    let l = ListSize::from_distortion(case.distortion())?;
    let code = build_optimal_code_l(&p, l, 0.0)?;
    rho_grid
        .iter()
        .map(|&rho| {
            let (new_upper, old_upper) = corollary4_bounds_l(&p, rho, l)?;
            let lambda_exact = cumulant_length(&code, &p, rho)?;
            Ok(FigureRow { rho, new_upper, old_upper, lambda_exact })
        })
        .collect()
}

/// CSV with header `rho,new_upper,old_upper,lambda_exact`.
pub fn write_figure_csv<W: std::io::Write>(rows: &[FigureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Input(e.to_string());
    w.write_record(["rho", "new_upper", "old_upper", "lambda_exact"]).map_err(io)?;
    for r in rows {
        w.write_record([r.rho, r.new_upper, r.old_upper, r.lambda_exact].map(crate::fmt::g12)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy4() -> Pmf {
        Pmf::new(&[0.5, 0.25, 0.125, 0.125]).unwrap()
    }

    #[test]
    fn shortlex_strings() {
        let expect = ["", "0", "1", "00", "01", "10", "11", "000"];
        for (i, s) in expect.iter().enumerate() {
            assert_eq!(codeword(i as u64 + 1), *s);
            assert_eq!(codeword_length(i as u64 + 1) as usize, s.len());
        }
    }

    #[test]
    fn dyadic_code() {
        let c = build_optimal_code(&dy4(), 1.0, 0.0).unwrap();
        assert_eq!((c.l_star, c.alpha, c.lengths.clone()), (2, 0.0, vec![0, 1]));
        assert_eq!(excess_distortion_prob(&c, &dy4(), 1.0), 0.0);
        let lam = cumulant_length(&c, &dy4(), 1.0).unwrap();
        assert!((lam - 1.25f64.log2()).abs() < 1e-12);
        assert!((lam - 0.32193).abs() < 1e-5);

        let c = build_optimal_code(&dy4(), 1.0, 0.125).unwrap();
        assert!((excess_distortion_prob(&c, &dy4(), 1.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn single_list_code() {
        let u4 = generate(Generator::Uniform(4)).unwrap();
        let c = build_optimal_code(&u4, 2.0, 0.0).unwrap();
        assert_eq!((c.l_star, c.lengths.clone()), (1, vec![0]));
        assert_eq!(cumulant_length(&c, &u4, 2.0).unwrap(), 0.0);
        let c = build_optimal_code(&u4, 2.0, 0.3).unwrap();
        assert!(cumulant_length(&c, &u4, 0.7).unwrap().abs() < 1e-15);
    }

    #[test]
    fn alpha_boundaries() {
        // eps equal to the mass beyond the cutoff list
        let p = Pmf::new(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let c = build_optimal_code(&p, 0.0, 0.3).unwrap();
        assert_eq!((c.l_star, c.alpha), (2, 0.0));
        // eps at 1 - P_Z(1): the cutoff moves to the first list
        let c = build_optimal_code(&p, 1.0, 0.3).unwrap();
        assert_eq!(c.l_star, 1);
        assert!(c.alpha.abs() < 1e-12);
        assert!((excess_distortion_prob(&c, &p, 1.0) - 0.3).abs() < 1e-12);
        let c = build_optimal_code(&p, 1.0, 0.3 - 1e-9).unwrap();
        assert_eq!(c.l_star, 2);
        assert!((excess_distortion_prob(&c, &p, 1.0) - (0.3 - 1e-9)).abs() < 1e-12);
    }

    #[test]
    fn small_rho_gives_expected_length() {
        let p = generate(Generator::Random { m: 12, seed: 5 }).unwrap();
        for eps in [0.0, 0.1] {
            let c = build_optimal_code(&p, 1.0, eps).unwrap();
            let lam = cumulant_length(&c, &p, 1e-6).unwrap();
            assert!((lam - expected_length(&c, &p)).abs() < 1e-4);
            let big = cumulant_length(&c, &p, 200.0).unwrap();
            assert!((big - max_length(&c) as f64).abs() < 0.05);
        }
    }

    #[test]
    fn theorem3_examples() {
        let r = theorem3_check(&dy4(), 1.0, 1.0, 0.0).unwrap();
        assert!((r.strict_lower - 0.625f64.log2()).abs() < 1e-12);
        assert!((r.upper - r.lambda_star).abs() < 1e-12);
        // lossless, error free
        let p = generate(Generator::Random { m: 9, seed: 2 }).unwrap();
        let r = theorem3_check(&p, 2.0, 0.0, 0.0).unwrap();
        assert!(r.strict_lower < r.lambda_star && r.lambda_star <= r.upper);
    }

    #[test]
    fn corollary4_examples() {
        let p = generate(Generator::Dyadic(10)).unwrap();
        for i in 1..=100 {
            let rho = i as f64 / 10.0;
            let (new, old) = corollary4_bounds(&p, rho, 2.0).unwrap();
            assert!(new <= old, "rho {rho}");
        }
        let (_, old_small) = corollary4_bounds(&p, 0.1, 2.0).unwrap();
        let (_, old_one) = corollary4_bounds(&p, 1.0, 2.0).unwrap();
        assert!(old_small > old_one);

        let q = generate(Generator::Random { m: 6, seed: 4 }).unwrap();
        let ord = EntropyOrder::from_rho(1.5).unwrap();
        let (new, old) = corollary4_bounds(&q, 1.5, 0.5).unwrap();
        assert!((new - renyi(&q, ord)).abs() < 1e-12);
        let h = renyi(&q, ord);
        assert!((old - (1.0 + 1.5f64.exp2() * (1.5 * h).exp2()).log2() / 1.5).abs() < 1e-12);
        assert!(old > new);
    }

    #[test]
    fn figure_cases_parse() {
        assert_eq!("2b".parse::<FigureCase>().unwrap(), FigureCase::C2b);
        assert!("3a".parse::<FigureCase>().is_err());
        let g = linspace(0.1, 10.0, 100);
        assert_eq!(g.len(), 100);
        assert!((g[99] - 10.0).abs() < 1e-12);
        let rows = figure_data(FigureCase::C1a, &g, 0).unwrap();
        assert!(rows.iter().all(|r| r.lambda_exact <= r.new_upper + 1e-12 && r.new_upper <= r.old_upper));
        let mut buf = Vec::new();
        write_figure_csv(&rows[..2], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rho,new_upper,old_upper,lambda_exact\n0.1,"));
        assert_eq!(text.lines().count(), 3);
    }
}
