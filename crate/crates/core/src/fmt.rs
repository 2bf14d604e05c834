//! Number formatting shared by the CLI and the figure tables.

/// Formats `x` with 12 significant digits, like C's `%.12g`.
pub fn g12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim(mant);
        return format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(2.0), "2");
        assert_eq!(g12(0.321928094887362), "0.321928094887");
        assert_eq!(g12(-1.25), "-1.25");
        assert_eq!(g12(1e-7), "1e-07");
        assert_eq!(g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(g12(0.0001), "0.0001");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
    }
}
