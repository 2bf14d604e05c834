//! Freezes the constant `C` in `|exact/n - predicted| <= C log2(n) / n` for
//! bernoulli(0.2), D = 0.2, eps = 0.1, rho = 1 over n = 8..=16.
//!
//! Run with `cargo run --release --example calibrate_envelope` and commit the
//! regenerated `fixtures/expansion_envelope.json`.

use softguess::asymptotics::expansion_moment;
use softguess::pmf::{generate, Generator};

const SAFETY: f64 = 1.5;

fn main() -> softguess::Result<()> {
    let base = generate(Generator::Bernoulli(0.2))?;
    let mut worst: f64 = 0.0;
    for n in 8..=16 {
        let r = expansion_moment(&base, n, 1.0, 0.2, 0.1)?;
        let ratio = r.residual.abs() * n as f64 / (n as f64).log2();
        println!("n={n:2} exact={:.6} predicted={:.6} residual={:+.6} ratio={ratio:.4}", r.exact, r.predicted, r.residual);
        worst = worst.max(ratio);
    }
    let doc = serde_json::json!({
        "source": "bernoulli:0.2",
        "d": 0.2,
        "eps": 0.1,
        "rho": 1.0,
        "n_min": 8,
        "n_max": 16,
        "max_observed_ratio": worst,
        "safety": SAFETY,
        "c": worst * SAFETY,
    });
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/expansion_envelope.json");
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap() + "\n").map_err(|e| softguess::Error::Input(e.to_string()))?;
    println!("wrote {path}");
    Ok(())
}
