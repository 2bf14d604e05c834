use softguess::coding::theorem3_check;
use softguess::guessing::min_moment;
use softguess::pmf::{generate, Generator};
use softguess_demo::{cumulant_curves, cumulant_curves_js, moment_curve, moment_curve_js, strategy, strategy_js};

#[test]
fn wrappers_emit_json() {
    let v: serde_json::Value = serde_json::from_str(&cumulant_curves_js("random:9:2", 0.5, 0.1, 0.5, 3.0, 6).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
    assert!(v[0]["lambda_exact"].is_f64());
    let v: serde_json::Value = serde_json::from_str(&moment_curve_js("dyadic:5", 1.0, 1.0, 0.5, 11).unwrap()).unwrap();
    assert_eq!(v["samples"].as_array().unwrap().len(), 11);
    let v: serde_json::Value = serde_json::from_str(&strategy_js("3,2,1", 0.0, 0.0, 1.0).unwrap()).unwrap();
    assert_eq!(v["cutoff"], 3);
    assert_eq!(v["codewords"], serde_json::json!(["", "0", "1"]));
}

#[test]
fn values_match_the_library() {
    let p = generate(Generator::Random { m: 15, seed: 4 }).unwrap();
    let rows = cumulant_curves("random:15:4", 1.0, 0.05, 1.0, 4.0, 4).unwrap();
    for r in rows {
        let t = theorem3_check(&p, r.rho, 1.0, 0.05).unwrap();
        assert_eq!(r.lambda_exact, t.lambda_star);
    }
    let s = strategy("random:15:4", 1.0, 0.05, 2.0).unwrap();
    assert_eq!(s.moment, min_moment(&p, 2.0, 1.0, 0.05).unwrap().moment);
    assert!((s.error_prob - 0.05).abs() < 1e-12);
}

#[test]
fn sampled_curve_agrees_with_direct_moments() {
    let p = generate(Generator::Dyadic(7)).unwrap();
    let v = moment_curve("dyadic:7", 1.5, 1.0, 0.9, 19).unwrap();
    for s in &v.samples {
        let direct = min_moment(&p, 1.5, 1.0, s.eps).unwrap().moment;
        assert!((s.exact - direct).abs() < 1e-12 * direct.max(1.0));
    }
    for w in v.knots.windows(2) {
        assert!(w[0].0 < w[1].0 && w[0].1 >= w[1].1);
    }
}
