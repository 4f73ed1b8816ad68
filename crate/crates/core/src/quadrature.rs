//! Adaptive Gauss–Kronrod (7/15) integration of complex-valued integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        k += pair * WGK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    Segment { a, b, value, error }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, bisecting the
/// segment with the largest error estimate until the summed estimate fits.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, max_segments: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_with_breaks(f, &[a, b], tol, max_segments)
}

/// Like [`integrate`], starting from the segments between consecutive
/// `breaks` (which must be increasing).
pub fn integrate_with_breaks<F>(
    mut f: F,
    breaks: &[f64],
    tol: f64,
    max_segments: usize,
) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let mut heap: BinaryHeap<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    let mut total_error: f64 = heap.iter().map(|s| s.error).sum();
    while total_error > tol {
        if heap.len() >= max_segments.max(breaks.len()) {
            // the running sum drifts; recheck before giving up
            total_error = heap.iter().map(|s| s.error).sum();
            if total_error <= tol {
                break;
            }
            return Err(Error::Numerical(format!(
                "quadrature on [{}, {}] reached {} segments with error {total_error:e} > {tol:e}",
                breaks[0],
                breaks[breaks.len() - 1],
                heap.len()
            )));
        }
        let s = heap.pop().expect("nonempty while error is positive");
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(Error::Numerical(format!(
                "quadrature segment [{}, {}] cannot be split further",
                s.a, s.b
            )));
        }
        let left = kronrod(&mut f, s.a, mid);
        let right = kronrod(&mut f, mid, s.b);
        total_error += left.error + right.error - s.error;
        heap.push(left);
        heap.push(right);
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

struct VecSegment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    worst: f64,
}

impl PartialEq for VecSegment {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}

impl Eq for VecSegment {}

impl PartialOrd for VecSegment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VecSegment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn kronrod_many<F: FnMut(f64, &mut [f64])>(f: &mut F, dim: usize, a: f64, b: f64) -> VecSegment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut buf = vec![0.0; dim];
    let mut buf2 = vec![0.0; dim];
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(center, &mut buf);
    for i in 0..dim {
        k[i] = buf[i] * WGK[7];
        g[i] = buf[i] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, &mut buf);
        f(center + dx, &mut buf2);
        for i in 0..dim {
            let pair = buf[i] + buf2[i];
            k[i] += pair * WGK[j];
            if j % 2 == 1 {
                g[i] += pair * WG[j / 2];
            }
        }
    }
    let errors: Vec<f64> = k.iter().zip(&g).map(|(k, g)| ((k - g) * half).abs()).collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    VecSegment {
        a,
        b,
        values: k.into_iter().map(|k| k * half).collect(),
        errors,
        worst,
    }
}

/// Integrates a vector-valued `f` (writing `dim` components into its
/// second argument) over the segments between consecutive `breaks`.
///
/// Every component is brought within `tol`; all components share the
/// same nodes, so expensive work common to them is done once per node.
pub fn integrate_many<F>(
    mut f: F,
    dim: usize,
    breaks: &[f64],
    tol: f64,
    max_segments: usize,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut heap: BinaryHeap<VecSegment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod_many(&mut f, dim, w[0], w[1]))
        .collect();
    // Sum of per-segment worst errors bounds every component's total error.
    let mut budget: f64 = heap.iter().map(|s| s.worst).sum();
    while budget > tol {
        let exact_max = (0..dim)
            .map(|i| heap.iter().map(|s| s.errors[i]).sum::<f64>())
            .fold(0.0, f64::max);
        if exact_max <= tol {
            break;
        }
        if heap.len() >= max_segments.max(breaks.len()) {
            return Err(Error::Numerical(format!(
                "vector quadrature on [{}, {}] reached {} segments with error {exact_max:e} > {tol:e}",
                breaks[0],
                breaks[breaks.len() - 1],
                heap.len()
            )));
        }
        // Refine a batch of the worst segments before rechecking.
        for _ in 0..heap.len().div_ceil(8) {
            let Some(s) = heap.pop() else { break };
            let mid = 0.5 * (s.a + s.b);
            if !(mid > s.a && mid < s.b) {
                return Err(Error::Numerical(format!(
                    "quadrature segment [{}, {}] cannot be split further",
                    s.a, s.b
                )));
            }
            let left = kronrod_many(&mut f, dim, s.a, mid);
            let right = kronrod_many(&mut f, dim, mid, s.b);
            budget += left.worst + right.worst - s.worst;
            heap.push(left);
            heap.push(right);
        }
    }
    let mut total = vec![0.0; dim];
    for s in heap.iter() {
        for (t, v) in total.iter_mut().zip(&s.values) {
            *t += v;
        }
    }
    Ok(total)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, tol: f64, max_segments: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol, max_segments).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        // degree 21 is within the Kronrod rule's exactness
        let v = integrate_real(|x| x.powi(21), 0.0, 1.0, 1e-14, 10).unwrap();
        assert!((v - 1.0 / 22.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^{10} e^{ix} dx = (e^{10i} - 1)/i
        let v = integrate(|x| Complex64::new(0.0, x).exp(), 0.0, 10.0, 1e-12, 200).unwrap();
        let exact = (Complex64::new(0.0, 10.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_adapts() {
        // ∫_0^1 x^{-1/2} dx = 2
        let v = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, 1e-8, 500).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }

    #[test]
    fn breakpoints_match_single_interval() {
        let f = |x: f64| Complex64::new(x.sin(), x.cos());
        let a = integrate(f, 0.0, 20.0, 1e-12, 500).unwrap();
        let b = integrate_with_breaks(f, &[0.0, 5.0, 10.0, 20.0], 1e-12, 500).unwrap();
        assert!((a - b).norm() < 1e-11);
    }

    #[test]
    fn vector_components_each_converge() {
        let breaks = [0.0, 1.0, 3.0];
        let v = integrate_many(
            |x, out| {
                out[0] = x.exp();
                out[1] = (5.0 * x).cos();
                out[2] = x.sqrt();
            },
            3,
            &breaks,
            1e-12,
            2000,
        )
        .unwrap();
        assert!((v[0] - (3f64.exp() - 1.0)).abs() < 1e-11);
        assert!((v[1] - (15f64).sin() / 5.0).abs() < 1e-12);
        assert!((v[2] - 2.0 / 3.0 * 3f64.powf(1.5)).abs() < 1e-11);
    }

    #[test]
    fn reports_failure() {
        let r = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, 1e-14, 3);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
