//! Browser front end for `softguess`. The pure functions here return plain
//! serde structs; the `#[wasm_bindgen]` wrappers hand them to JavaScript as
//! JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use softguess::coding::{build_optimal_code_l, codeword, cumulant_bounds_l, excess_distortion_prob, theorem3_check_l};
use softguess::guessing::{bounds_l, build_optimal_strategy_l, min_moment_l};
use softguess::io::pmf_source;
use softguess::side_info::moment_curve_l;
use softguess::{ListSize, Pmf};

/// Largest source the page will accept; keeps every request interactive.
pub const MAX_ATOMS: usize = 4096;
/// Largest number of grid points per request.
pub const MAX_POINTS: usize = 2000;

type Res<T> = Result<T, String>;

fn err(e: softguess::Error) -> String {
    e.to_string()
}

/// Parses a generator spec (`dyadic:8`, `random:20:3`, ...) or a list of
/// nonnegative weights separated by commas or whitespace. Weights are
/// normalized.
pub fn parse_source(text: &str) -> Res<Pmf> {
    let text = text.trim();
    if text.starts_with("file:") {
        return Err("files are not available in the browser".into());
    }
    let p = if text.contains(':') {
        pmf_source(text).map_err(err)?
    } else {
        let weights = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: '{t}'")))
            .collect::<Res<Vec<f64>>>()?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err("weights must be finite and nonnegative".into());
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err("weights must have positive total".into());
        }
        Pmf::new(&weights.iter().map(|w| w / total).collect::<Vec<_>>()).map_err(err)?
    };
    if p.len() > MAX_ATOMS {
        return Err(format!("at most {MAX_ATOMS} atoms (got {})", p.len()));
    }
    Ok(p)
}

fn grid(lo: f64, hi: f64, count: usize) -> Res<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) || count == 0 || count > MAX_POINTS {
        return Err(format!("grid needs lo <= hi and 1..={MAX_POINTS} points"));
    }
    Ok(softguess::coding::linspace(lo, hi, count))
}

#[derive(Debug, Clone, Serialize)]
pub struct CumulantRow {
    pub rho: f64,
    pub lambda_exact: f64,
    pub upper: f64,
    pub strict_lower: f64,
    pub z_upper: f64,
    pub explicit_upper: f64,
}

/// Normalized cumulant of the optimal code and its bounds over a rho grid.
pub fn cumulant_curves(source: &str, d: f64, eps: f64, rho_lo: f64, rho_hi: f64, count: usize) -> Res<Vec<CumulantRow>> {
    let p = parse_source(source)?;
    let l = ListSize::from_distortion(d).map_err(err)?;
    grid(rho_lo, rho_hi, count)?
        .into_iter()
        .map(|rho| {
            let t = theorem3_check_l(&p, rho, l, eps).map_err(err)?;
            let b = cumulant_bounds_l(&p, rho, l, eps).map_err(err)?;
            Ok(CumulantRow {
                rho,
                lambda_exact: t.lambda_star,
                upper: t.upper,
                strict_lower: t.strict_lower,
                z_upper: b.z_upper,
                explicit_upper: b.explicit_upper,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSample {
    pub eps: f64,
    pub exact: f64,
    pub z_upper: f64,
    pub z_lower: f64,
    pub explicit_upper: f64,
    pub explicit_lower: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCurveView {
    /// `(eps, moment)` breakpoints of the exact piecewise-linear curve.
    pub knots: Vec<(f64, f64)>,
    pub samples: Vec<MomentSample>,
}

/// The exact moment as a function of the error budget, with bounds sampled
/// on `[0, eps_max]`.
pub fn moment_curve(source: &str, rho: f64, d: f64, eps_max: f64, count: usize) -> Res<MomentCurveView> {
    let p = parse_source(source)?;
    let l = ListSize::from_distortion(d).map_err(err)?;
    if !(0.0..1.0).contains(&eps_max) {
        return Err("eps_max must lie in [0, 1)".into());
    }
    let knots = moment_curve_l(&p, rho, l).map_err(err)?.knots;
    let samples = grid(0.0, eps_max, count)?
        .into_iter()
        .map(|eps| {
            let b = bounds_l(&p, rho, l, eps).map_err(err)?;
            Ok(MomentSample {
                eps,
                exact: b.exact,
                z_upper: b.thm1_upper,
                z_lower: b.thm1_lower,
                explicit_upper: b.prop2_upper,
                explicit_lower: b.prop2_lower,
            })
        })
        .collect::<Res<Vec<_>>>()?;
    Ok(MomentCurveView { knots, samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyView {
    pub probs: Vec<f64>,
    pub list_size: u64,
    pub lists: Vec<Vec<usize>>,
    /// Probability of giving up right before each list.
    pub pi: Vec<f64>,
    pub cutoff: usize,
    pub moment: f64,
    pub error_prob: f64,
    pub codewords: Vec<String>,
    pub alpha: f64,
    pub excess_prob: f64,
    pub cumulant: f64,
}

/// The optimal guessing strategy and the matching lossy code.
pub fn strategy(source: &str, d: f64, eps: f64, rho: f64) -> Res<StrategyView> {
    let p = parse_source(source)?;
    let l = ListSize::from_distortion(d).map_err(err)?;
    let s = build_optimal_strategy_l(&p, l, eps).map_err(err)?;
    let m = min_moment_l(&p, rho, l, eps).map_err(err)?;
    let code = build_optimal_code_l(&p, l, eps).map_err(err)?;
    let t = theorem3_check_l(&p, rho, l, eps).map_err(err)?;
    Ok(StrategyView {
        probs: p.probs().to_vec(),
        list_size: l.get(),
        lists: s.lists,
        pi: s.pi,
        cutoff: s.cutoff,
        moment: m.moment,
        error_prob: m.error_prob,
        codewords: (1..=code.l_star as u64).map(codeword).collect(),
        alpha: code.alpha,
        excess_prob: excess_distortion_prob(&code, &p, l.log2()),
        cumulant: t.lambda_star,
    })
}

fn to_js<T: Serialize>(r: Res<T>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = cumulantCurves)]
pub fn cumulant_curves_js(source: &str, d: f64, eps: f64, rho_lo: f64, rho_hi: f64, count: usize) -> Result<String, JsValue> {
    to_js(cumulant_curves(source, d, eps, rho_lo, rho_hi, count))
}

#[wasm_bindgen(js_name = momentCurve)]
pub fn moment_curve_js(source: &str, rho: f64, d: f64, eps_max: f64, count: usize) -> Result<String, JsValue> {
    to_js(moment_curve(source, rho, d, eps_max, count))
}

#[wasm_bindgen(js_name = optimalStrategy)]
pub fn strategy_js(source: &str, d: f64, eps: f64, rho: f64) -> Result<String, JsValue> {
    to_js(strategy(source, d, eps, rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources() {
        assert_eq!(parse_source("1, 1 2").unwrap().probs(), &[0.5, 0.25, 0.25]);
        assert_eq!(parse_source(" uniform:4 ").unwrap().len(), 4);
        assert!(parse_source("file:/etc/passwd").is_err());
        assert!(parse_source("1,-1").is_err());
        assert!(parse_source("0,0").is_err());
        assert!(parse_source("a,b").is_err());
        assert!(parse_source("uniform:5000").is_err());
    }

    #[test]
    fn dyadic_strategy() {
        let s = strategy("0.5,0.25,0.125,0.125", 1.0, 0.125, 1.0).unwrap();
        assert_eq!(s.lists, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(s.cutoff, 2);
        assert!((s.moment - 1.0).abs() < 1e-12);
        assert!((s.error_prob - 0.125).abs() < 1e-12);
        assert_eq!(s.codewords, vec!["", "0"]);
    }

    #[test]
    fn curves_are_ordered() {
        for r in cumulant_curves("random:12:5", 1.0, 0.1, 0.1, 5.0, 20).unwrap() {
            assert!(r.strict_lower < r.lambda_exact && r.lambda_exact <= r.upper + 1e-9);
            assert!(r.upper <= r.z_upper + 1e-9);
        }
        let v = moment_curve("dyadic:6", 2.0, 0.0, 0.9, 30).unwrap();
        for s in &v.samples {
            assert!(s.z_lower <= s.exact + 1e-9 && s.exact <= s.z_upper + 1e-9);
        }
        assert_eq!(v.knots[0].0, 0.0);
    }

    #[test]
    fn bad_grids() {
        assert!(cumulant_curves("uniform:3", 0.0, 0.0, 2.0, 1.0, 5).is_err());
        assert!(moment_curve("uniform:3", 1.0, 0.0, 1.0, 5).is_err());
        assert!(moment_curve("uniform:3", 1.0, 0.0, 0.5, 0).is_err());
    }
}
