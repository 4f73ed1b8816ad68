//! Locale-independent numeric formatting for CSV output.

/// Formats `x` with `digits` significant digits, C `%g` style: fixed
/// notation for moderate exponents, scientific otherwise, trailing zeros
/// trimmed.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    // Round once in scientific form so the exponent reflects the rounding.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve significant digits, the precision used by every CSV writer here.
pub fn num(x: f64) -> String {
    sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(2.0 / 3.0), "0.666666666667");
        assert_eq!(num(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(num(123456.789), "123456.789");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(1.5e15), "1.5e15");
        assert_eq!(num(0.000123), "0.000123");
        assert_eq!(num(9.9999999999996), "10");
        assert_eq!(num(999999999999.7), "1e12");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for &x in &[std::f64::consts::PI, 1.0 / 7.0, 6.02214076e23, 1.602e-19, 0.1 + 0.2] {
            let back: f64 = num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
    }
}
