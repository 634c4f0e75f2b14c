//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// nodes and weights as tabulated, beyond f64 precision
#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Part of `error` that is only the roundoff floor.
    floor: f64,
}

impl Segment {
    fn excess(&self) -> f64 {
        self.error - self.floor
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.excess() == other.excess()
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.excess().total_cmp(&other.excess())
    }
}

fn kronrod<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    res_abs *= h;
    res_asc *= h;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let mut floor = 0.0;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * res_abs;
        error = error.max(floor);
    }
    if !(res_k.is_finite() && error.is_finite()) {
        return Err(Error::QuadratureNoConvergence {
            a,
            b,
            error: f64::INFINITY,
            intervals: 1,
        });
    }
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error,
        floor: floor.min(error),
    })
}

/// Integrates a fallible integrand over [a, b]; integrand errors propagate.
pub fn try_integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod(&f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut floor = first.floor;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // The roundoff floor cannot be refined away, so only the excess over it
    // has to meet the tolerance.
    while error - floor > tol.target(value) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNoConvergence {
                a,
                b,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval cannot be split further; accept what roundoff allows
            heap.push(worst);
            if error <= 1e3 * f64::EPSILON * value.abs().max(tol.abs) {
                break;
            }
            return Err(Error::QuadratureNoConvergence {
                a,
                b,
                error,
                intervals: heap.len(),
            });
        }
        let left = kronrod(&f, worst.a, mid)?;
        let right = kronrod(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
        // re-sum periodically to avoid drift from incremental updates
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            floor = heap.iter().map(|s| s.floor).sum();
        }
    }
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_by(|l, r| l.a.total_cmp(&r.a));
    Ok(Estimate {
        value: segments.iter().map(|s| s.value).sum(),
        error: segments.iter().map(|s| s.error).sum(),
        intervals: segments.len(),
    })
}

pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, tol).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::relative(1e-14)).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(|x| (50.0 * x).sin().powi(2), 0.0, PI, Tolerance::relative(1e-12)).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-11);
        let w = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::relative(1e-10)).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((w - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| x.exp(), 1.0, 0.0, Tolerance::relative(1e-12)).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = try_integrate(|_| Err(Error::ZeroNorm), 0.0, 1.0, Tolerance::relative(1e-8));
        assert_eq!(r.unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let r = integrate(|x| 1.0 / x.abs(), -1.0, 1.0, Tolerance::relative(1e-12));
        assert!(matches!(r, Err(Error::QuadratureNoConvergence { .. })));
    }
}
