//! Characteristic functions of the contact-time laws and CDF inversion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_many};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const INNER_TOL: f64 = 1e-13;
const MAX_SEGMENTS: usize = 20_000;

/// Below this `|u|` the continued fraction converges slowly and the
/// contour integral is used instead.
const CONTINUED_FRACTION_MIN_U: f64 = 2.0;
const CF_MAX_TERMS: usize = 10_000;

/// `E[e^{iuT}]` for one shifted-Pareto contact duration, density
/// `α (1 + t)^{-α-1}` on `t >= 0`.
///
/// Substituting `s = 1 + t` gives `φ(u) = α e^{-iu} E_{α+1}(-iu)` with the
/// generalized exponential integral `E_p(z) = ∫_1^∞ e^{-zs} s^{-p} ds`.
/// For `|u| >= 2` that is evaluated by its continued fraction; closer to the
/// origin by quadrature along a rotated contour (see [`pareto_cf_contour`]).
/// Negative `u` uses `φ(-u) = conj φ(u)`.
pub fn pareto_cf(u: f64, alpha: f64) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("pareto shape must be > 0, got {alpha}")));
    }
    if u == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let v = u.abs();
    let phi = if v >= CONTINUED_FRACTION_MIN_U {
        match continued_fraction(v, alpha) {
            Some(z) => z,
            None => pareto_cf_contour(v, alpha)?,
        }
    } else {
        pareto_cf_contour(v, alpha)?
    };
    Ok(if u > 0.0 { phi } else { phi.conj() })
}

/// `α e^{z} E_{α+1}(z)` at `z = -iv` by modified Lentz evaluation of
/// `E_p(z) = e^{-z} / (z + p - 1·p / (z + p + 2 - 2(p+1) / (z + p + 4 - ...)))`.
fn continued_fraction(v: f64, alpha: f64) -> Option<Complex64> {
    const TINY: f64 = 1e-300;
    let p = alpha + 1.0;
    let mut b = Complex64::new(p, -v);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..=CF_MAX_TERMS {
        let a = -(i as f64) * (p - 1.0 + i as f64);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-15 {
            return Some(h * alpha);
        }
    }
    None
}

/// `φ(v)` for `v > 0` by quadrature on the positive imaginary axis.
///
/// The oscillatory integral along the real axis is moved to `t = is`, where
/// it decays like `e^{-vs}`:
///
/// ```text
/// φ(v) = α i ∫_0^∞ e^{-vs} (1 + is)^{-α-1} ds
/// ```
///
/// The integrand is analytic in the first quadrant and vanishes on the
/// connecting arc, so nothing is lost.
pub fn pareto_cf_contour(v: f64, alpha: f64) -> Result<Complex64> {
    debug_assert!(v > 0.0);
    // substitute s = x / v
    let scale = alpha / v;
    let upper = 40.0 + scale.ln().max(0.0);
    let inner = integrate(
        |x| (-x).exp() * (Complex64::new(1.0, x / v)).powf(-alpha - 1.0),
        0.0,
        upper,
        INNER_TOL / scale.max(1.0),
        MAX_SEGMENTS,
    )?;
    Ok(I * inner * scale)
}

/// `E[e^{iuS}]` for `S` a Poisson(`rate`) sum of Pareto durations:
/// `exp(rate (φ(u) - 1))`.
pub fn cf_total_contact_time(u: f64, rate: f64, alpha: f64) -> Result<Complex64> {
    if !(rate >= 0.0) {
        return Err(Error::Domain(format!("rate must be >= 0, got {rate}")));
    }
    if rate == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok((rate * (pareto_cf(u, alpha)? - 1.0)).exp())
}

/// Upper bound on the Gil-Pelaez tail `|∫_U^∞ Im(e^{-iut0} ψ(u)) du| / π`
/// with `ψ(u) = (CF(u) - e^{-r}) / u`.
///
/// A decreasing density with value `α` at zero has `|φ(u)| <= a/u`, `a = 2α`,
/// and `t f(t)` (zero at both ends, one peak `h`) gives `|φ'(u)| <= b/u`,
/// `b = 2h`. Then with `x = ra/U`:
///
/// - directly, `|ψ(u)| <= e^{-r}(e^{ra/u} - 1)/u`, so the tail is at most
///   `e^{-r} x e^x / π`;
/// - integrating by parts once against `e^{-iut0}`, it is at most
///   `(|ψ(U)| + ∫_U^∞ |ψ'|) / (π t0) <= e^{-r} e^x r (b + 2a/U) / (π t0 U)`.
fn tail_bound(cutoff: f64, t0: f64, rate: f64, alpha: f64) -> f64 {
    let a = 2.0 * alpha;
    let peak = (1.0 + 1.0 / alpha).powf(-alpha - 1.0);
    let b = 2.0 * peak;
    let x = rate * a / cutoff;
    let damp = (-rate).exp() * x.exp();
    let direct = damp * x / PI;
    let by_parts = damp * rate * (b + 2.0 * a / cutoff) / (PI * t0 * cutoff);
    direct.min(by_parts)
}

/// `P[S < t0]` by Gil-Pelaez inversion of [`cf_total_contact_time`] to
/// absolute accuracy `tol`.
pub fn prob_total_below(t0: f64, rate: f64, alpha: f64, tol: f64) -> Result<f64> {
    Ok(prob_total_below_many(t0, &[rate], alpha, tol)?[0])
}

/// [`prob_total_below`] for several Poisson means at once.
///
/// `S` has an atom `e^{-rate}` at zero (no contacts) and a density on
/// `(0, ∞)`. The atom is removed from the CF before inverting, which leaves
/// an integrand decaying like `u^{-2}`, and added back afterwards. All rates
/// share the quadrature nodes, so the single-contact CF is evaluated once
/// per node.
pub fn prob_total_below_many(t0: f64, rates: &[f64], alpha: f64, tol: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("pareto shape must be > 0, got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("rate must be finite and >= 0, got {r}")));
    }
    if t0 <= 0.0 {
        return Ok(vec![0.0; rates.len()]);
    }
    let mut distinct: Vec<f64> = rates.iter().copied().filter(|&r| r > 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.is_empty() {
        return Ok(vec![1.0; rates.len()]);
    }
    let atoms: Vec<f64> = distinct.iter().map(|r| (-r).exp()).collect();

    let mut cutoff = 1.0f64;
    while distinct.iter().any(|&r| tail_bound(cutoff, t0, r, alpha) > 0.5 * tol) {
        cutoff *= 2.0;
        if cutoff > 1e12 {
            return Err(Error::Numerical("inversion cutoff did not settle".into()));
        }
    }
    // one panel per period of e^{-iu t0}
    let period = 2.0 * PI / t0;
    let n_panels = ((cutoff / period).ceil() as usize).max(1);
    let breaks: Vec<f64> = (0..=n_panels).map(|j| (j as f64 * period).min(cutoff)).collect();

    let mut failure = None;
    let integrals = integrate_many(
        |u, out| {
            let phi = match pareto_cf(u, alpha) {
                Ok(z) => z,
                Err(e) => {
                    failure.get_or_insert(e);
                    out.fill(0.0);
                    return;
                }
            };
            let rot = Complex64::new(0.0, -u * t0).exp();
            for ((o, &r), &atom) in out.iter_mut().zip(&distinct).zip(&atoms) {
                let cf = (r * (phi - 1.0)).exp();
                *o = (rot * (cf - atom)).im / u;
            }
        },
        distinct.len(),
        &breaks,
        0.5 * tol * PI,
        MAX_SEGMENTS.max(8 * n_panels),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let below: Vec<f64> = atoms
        .iter()
        .zip(&integrals)
        .map(|(&atom, &i)| (atom + 0.5 * (1.0 - atom) - i / PI).clamp(0.0, 1.0))
        .collect();
    Ok(rates
        .iter()
        .map(|&r| {
            if r == 0.0 {
                1.0
            } else {
                let idx = distinct.partition_point(|&d| d < r);
                below[idx]
            }
        })
        .collect())
}
