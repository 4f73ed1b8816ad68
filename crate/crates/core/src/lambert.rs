//! Principal branch of the Lambert W function on `[0, ∞)`.

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 64;

/// Solves `w * exp(w) = x` for `w >= 0`.
///
/// Halley iteration started from `ln(1 + x)`; a truncated series is used for
/// very small arguments. Negative arguments belong to branches this crate
/// never needs and are rejected.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("lambert_w0 requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x < 1e-3 {
        return Ok(series_near_zero(x));
    }
    Ok(halley(x, x.ln_1p()))
}

/// `W(exp(z))`, usable when `exp(z)` itself would overflow.
pub fn lambert_w0_exp(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::Domain("lambert_w0_exp of NaN".into()));
    }
    if z < 500.0 {
        return lambert_w0(z.exp());
    }
    // w + ln(w) = z, Newton in log form.
    let mut w = z - z.ln();
    for _ in 0..MAX_ITER {
        let step = (w + w.ln() - z) * w / (w + 1.0);
        w -= step;
        if step.abs() <= REL_TOL * w {
            break;
        }
    }
    Ok(w)
}

fn series_near_zero(x: f64) -> f64 {
    // W(x) = sum_{n>=1} (-n)^(n-1) x^n / n!
    x * (1.0 + x * (-1.0 + x * (1.5 + x * (-8.0 / 3.0 + x * (125.0 / 24.0 - x * 54.0 / 5.0)))))
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= REL_TOL * (1.0 + w.abs()) {
            // one extra step lands on the limiting precision
            let ew = w.exp();
            let f = w * ew - x;
            let wp1 = w + 1.0;
            w -= f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on `w e^w = x`, independent of the Halley path.
    fn bisect_oracle(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, x.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        // omega constant
        let omega = bisect_oracle(1.0);
        assert!((omega - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - omega).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative() {
        assert!(matches!(lambert_w0(-0.1), Err(Error::Domain(_))));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn agrees_with_bisection() {
        for &x in &[1e-10, 1e-4, 0.999e-3, 1.001e-3, 0.3, 2.0, 10.0, 1e3, 1e8] {
            let w = lambert_w0(x).unwrap();
            let o = bisect_oracle(x);
            assert!((w - o).abs() <= 1e-12 * o.max(1e-300) + 1e-300, "x={x} w={w} oracle={o}");
        }
    }

    #[test]
    fn roundtrip_and_monotone_on_log_grid() {
        let n = 2000;
        let mut prev = 0.0;
        for i in 0..n {
            let x = 10f64.powf(-12.0 + 18.0 * i as f64 / (n - 1) as f64);
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-10 * x.max(1.0), "x={x}");
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn exp_form_matches_direct_and_extends_range() {
        for &z in &[-20.0, 0.0, 1.0, 50.0, 499.0] {
            let a = lambert_w0_exp(z).unwrap();
            let b = lambert_w0(f64::exp(z)).unwrap();
            assert!((a - b).abs() <= 1e-13 * b.max(1e-300));
        }
        for &z in &[500.0, 800.0, 1e4] {
            let w = lambert_w0_exp(z).unwrap();
            assert!((w + w.ln() - z).abs() < 1e-10 * z);
        }
    }
}
