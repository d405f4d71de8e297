#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Tail magnitude below which semi-infinite ranges are cut off.
    pub truncation: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-15, truncation: 1e-18, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || !(self.truncation > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if self.max_subdivisions == 0 {
            return domain("max_subdivisions must be positive");
        }
        Ok(())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_429,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let abs_value = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_value);
    }
    Panel { a, b, value, error, abs_value }
}

/// Adaptive Gauss–Kronrod (G10/K21) integration of `f` over the finite
/// interval `[a, b]`.
///
/// Converges when the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|, 64·ε·∫|f|)`; the last term is the rounding floor
/// of integrands that cancel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return domain("integrate needs finite limits; use integrate_to_infinity for tails");
    }
    if a == b {
        return Ok(0.0);
    }
    let first = kronrod21(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_value = first.abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let target = quad.abs_tol.max(quad.rel_tol * value.abs()).max(64.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(value);
        }
        if !error.is_finite() || !value.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if heap.len() >= quad.max_subdivisions {
            return Err(Error::Quadrature { achieved: error, requested: target });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::Quadrature { achieved: error, requested: target });
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        // Running sums drift; refresh them now and then.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            abs_value = heap.iter().map(|p| p.abs_value).sum();
        }
    }
}

/// First point `t >= start` (stepping outwards) at which `envelope(t)` drops
/// below the truncation threshold.
fn tail_cutoff<E: Fn(f64) -> f64>(start: f64, envelope: &E, quad: &QuadratureSpec) -> Result<f64> {
    let mut step = 0.5;
    let mut t = start + step;
    for _ in 0..200 {
        if envelope(t) < quad.truncation {
            return Ok(t);
        }
        step *= 1.25;
        t += step;
    }
    Err(Error::Numerical(format!("tail envelope still above {:e} at t = {t}", quad.truncation)))
}

/// `∫_a^∞ f`, truncated where `envelope` (an upper bound on `|f(s)|` for all
/// `s >= t`, valid once `t >= start`) falls below `quad.truncation`.
pub fn integrate_to_infinity<F, E>(f: F, a: f64, start: f64, envelope: E, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let upper = tail_cutoff(a.max(start), &envelope, quad)?;
    integrate(f, a, upper, quad)
}

/// `∫_ℝ f` for an even envelope.
pub fn integrate_real_line<F, E>(f: F, start: f64, envelope: E, quad: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let upper = tail_cutoff(start.max(0.0), &envelope, quad)?;
    integrate(f, -upper, upper, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_half_line() {
        let q = QuadratureSpec::default();
        let v = integrate_to_infinity(|t| (-t * t / 2.0).exp(), 0.0, 0.0, |t| (-t * t / 2.0).exp(), &q).unwrap();
        assert_relative_eq!(v, (PI / 2.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let v = integrate(|t| t, -1.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn gaussian_third_absolute_moment() {
        let q = QuadratureSpec::default();
        let env = |t: f64| 10.0 * (t.abs().powi(3) + 1.0) * (-t * t / 2.0).exp();
        let v = integrate_real_line(|t: f64| (-t * t / 2.0).exp() * t.abs().powi(3), 3.0, env, &q).unwrap();
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn log_singularity() {
        // ∫_0^1 ln t dt = -1
        let v = integrate(|t: f64| t.ln(), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(v, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn reports_nonconvergence() {
        let q = QuadratureSpec { max_subdivisions: 3, ..Default::default() };
        let err = integrate(|t: f64| (50.0 * t).sin() / t.sqrt(), 1e-9, 10.0, &q).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn rejects_bad_spec() {
        let q = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(q.validate().is_err());
    }
}
