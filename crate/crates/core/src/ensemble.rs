//! Exact sampling from the real elliptic ensemble and Monte Carlo estimates
//! built on it.
//!
//! Draw `d` of stream `s` comes from a ChaCha8 generator keyed by the seed,
//! on stream `s`, positioned at word `d · 2^36`, so every matrix is
//! addressable and results do not depend on thread scheduling.

use log::{debug, warn};
use nalgebra::{DMatrix, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::EllipticParams;

const WORDS_PER_DRAW_LOG2: u32 = 36;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub tau: f64,
    pub n: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub n_streams: usize,
    /// Worker cap; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl SampleConfig {
    pub fn new(tau: f64, n: usize, seed: u64, n_samples: usize) -> Result<Self> {
        let c = Self { tau, n, seed, n_samples, n_streams: 64, threads: None };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        EllipticParams::for_sampling(self.tau, self.n)?;
        if self.n_samples == 0 {
            return domain("need at least one sample");
        }
        if self.n_streams == 0 {
            return domain("need at least one stream");
        }
        if self.threads == Some(0) {
            return domain("thread cap must be positive");
        }
        Ok(())
    }

    /// Streams actually used: never more than there are samples.
    fn streams(&self) -> usize {
        self.n_streams.min(self.n_samples)
    }

    fn draws_in(&self, stream: usize) -> usize {
        let s = self.streams();
        self.n_samples / s + usize::from(stream < self.n_samples % s)
    }

    /// Every `(stream, draw)` pair the estimators use, stream by stream.
    pub fn draws(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.streams()).flat_map(move |s| (0..self.draws_in(s)).map(move |d| (s as u64, d as u64)))
    }
}

/// One `N × N` draw: `A = √(1+τ) (G+Gᵀ)/2 + √(1-τ) (G-Gᵀ)/2`, `G_ij ~ N(0, 1/N)`.
pub fn sample(config: &SampleConfig, stream: u64, draw: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(draw) << WORDS_PER_DRAW_LOG2);
    let n = config.n;
    let scale = 1.0 / (n as f64).sqrt();
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale);
    let a = (1.0 + config.tau).sqrt();
    let b = (1.0 - config.tau).sqrt();
    DMatrix::from_fn(n, n, |i, j| {
        let (gij, gji) = (g[(i, j)], g[(j, i)]);
        0.5 * a * (gij + gji) + 0.5 * b * (gij - gji)
    })
}

/// `log |det(A - μ I)|` by pivoted LU; `-∞` if the matrix is exactly singular.
pub fn log_abs_det(a: &DMatrix<f64>, mu: f64) -> f64 {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= mu;
    }
    let lu = m.lu();
    let u = lu.u();
    u.diagonal().iter().map(|d| d.abs().ln()).sum()
}

/// Monte Carlo estimate in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub log_mean: f64,
    /// Standard error of the mean divided by the mean.
    pub stderr_rel: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Draws with an exactly singular `A - μ`, left out of the average.
    pub n_singular: usize,
}

/// Target `E ∏_i |det(A - μ_i)|^ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    pub ell: f64,
    pub mus: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct StreamSums {
    // log Σ e^{x}, with the count of finite terms
    lse: f64,
    count: usize,
    singular: usize,
}

fn run_streams<T: Send>(config: &SampleConfig, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    let streams = config.streams();
    let job = || (0..streams).into_par_iter().map(&f).collect::<Vec<T>>();
    match config.threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Numerical(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Several moment estimates from one shared set of draws.
pub fn mc_moments(config: &SampleConfig, queries: &[MomentQuery]) -> Result<Vec<MomentEstimate>> {
    config.validate()?;
    for q in queries {
        if !(q.ell > -1.0) {
            return domain(format!("moment exponent must exceed -1, got {}", q.ell));
        }
        if q.ell > 4.0 {
            warn!("exponent {} > 4: the estimator is heavy-tailed and its error bar unreliable", q.ell);
        }
    }
    // each distinct shift is factorised once per draw
    let mut shifts: Vec<f64> = Vec::new();
    let slots: Vec<Vec<usize>> = queries
        .iter()
        .map(|q| {
            q.mus
                .iter()
                .map(|&mu| match shifts.iter().position(|&m| m.to_bits() == mu.to_bits()) {
                    Some(i) => i,
                    None => {
                        shifts.push(mu);
                        shifts.len() - 1
                    }
                })
                .collect()
        })
        .collect();
    let per_stream = run_streams(config, |s| {
        let mut sums = vec![StreamSums { lse: f64::NEG_INFINITY, count: 0, singular: 0 }; queries.len()];
        let mut logs = vec![0.0; shifts.len()];
        for d in 0..config.draws_in(s) {
            let a = sample(config, s as u64, d as u64);
            for (l, &mu) in logs.iter_mut().zip(&shifts) {
                *l = log_abs_det(&a, mu);
            }
            for ((q, slot), acc) in queries.iter().zip(&slots).zip(sums.iter_mut()) {
                if q.ell == 0.0 {
                    acc.count += 1;
                    acc.lse = log_add(acc.lse, 0.0);
                    continue;
                }
                if slot.iter().any(|&i| logs[i] == f64::NEG_INFINITY) {
                    acc.singular += 1;
                    continue;
                }
                let x = q.ell * slot.iter().map(|&i| logs[i]).sum::<f64>();
                acc.count += 1;
                acc.lse = log_add(acc.lse, x);
            }
        }
        sums
    })?;
    (0..queries.len())
        .map(|qi| {
            let sums: Vec<StreamSums> = per_stream.iter().map(|v| v[qi]).collect();
            let mut est = combine(config, &sums)?;
            if queries[qi].ell == 0.0 {
                est.log_mean = 0.0;
                est.stderr_rel = 0.0;
            }
            Ok(est)
        })
        .collect()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn combine(config: &SampleConfig, sums: &[StreamSums]) -> Result<MomentEstimate> {
    let n_singular: usize = sums.iter().map(|s| s.singular).sum();
    let used: Vec<&StreamSums> = sums.iter().filter(|s| s.count > 0).collect();
    if used.is_empty() {
        return Err(Error::Numerical("every draw was singular".into()));
    }
    if n_singular > 0 {
        debug!("{n_singular} singular draws left out");
    }
    // batch means, scaled by a common shift
    let logs: Vec<f64> = used.iter().map(|s| s.lse - (s.count as f64).ln()).collect();
    let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let means: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
    let total: usize = used.iter().map(|s| s.count).sum();
    let mean: f64 = used.iter().zip(&means).map(|(s, m)| s.count as f64 * m).sum::<f64>() / total as f64;
    let k = means.len() as f64;
    let stderr_rel = if means.len() < 2 {
        f64::NAN
    } else {
        let avg = means.iter().sum::<f64>() / k;
        let var = means.iter().map(|m| (m - avg) * (m - avg)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt() / mean
    };
    Ok(MomentEstimate { log_mean: shift + mean.ln(), stderr_rel, n_samples: total, seed: config.seed, n_singular })
}

/// `E ∏_i |det(A - μ_i)|^ℓ` by Monte Carlo.
pub fn mc_moment(config: &SampleConfig, ell: f64, mus: &[f64]) -> Result<MomentEstimate> {
    let q = MomentQuery { ell, mus: mus.to_vec() };
    Ok(mc_moments(config, &[q])?[0])
}

/// Number of eigenvalues with `|Im λ| ≤ tol`; `tol` defaults to
/// `1e-9 ‖A‖_F`. Non-real eigenvalues must pair up with their conjugates.
pub fn count_real_eigenvalues(a: &DMatrix<f64>, tol: Option<f64>) -> Result<usize> {
    let n = a.nrows();
    if n != a.ncols() {
        return domain("matrix must be square");
    }
    let norm = a.norm();
    let tol = tol.unwrap_or(1e-9 * norm.max(f64::MIN_POSITIVE));
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    // The shifted QR iteration occasionally cycles; a transpose or an index
    // reversal has the same spectrum and usually breaks the cycle.
    let reversed = DMatrix::from_fn(n, n, |i, j| a[(n - 1 - i, n - 1 - j)]);
    let eig = [a.clone(), a.transpose(), reversed]
        .into_iter()
        .find_map(|m| Schur::try_new(m, f64::EPSILON, 10_000))
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?
        .complex_eigenvalues();
    let real = eig.iter().filter(|z| z.im.abs() <= tol).count();
    let mut upper: Vec<_> = eig.iter().filter(|z| z.im > tol).collect();
    let mut lower: Vec<_> = eig.iter().filter(|z| z.im < -tol).collect();
    if upper.len() != lower.len() || (n - real) % 2 != 0 {
        return Err(Error::Pairing(format!("{} eigenvalues above the axis, {} below", upper.len(), lower.len())));
    }
    let key = |z: &&nalgebra::Complex<f64>| (z.re, z.im.abs());
    upper.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    lower.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap_or(std::cmp::Ordering::Equal));
    let pair_tol = 1e-6 * norm.max(1.0);
    for (p, q) in upper.iter().zip(&lower) {
        if (p.re - q.re).abs() > pair_tol || (p.im + q.im).abs() > pair_tol {
            return Err(Error::Pairing(format!("{p} has no conjugate partner (nearest {q})")));
        }
    }
    Ok(real)
}

/// Mean number of real eigenvalues with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn mc_real_count(config: &SampleConfig) -> Result<CountEstimate> {
    config.validate()?;
    let per_stream = run_streams(config, |s| -> Result<(f64, usize)> {
        let mut total = 0usize;
        let draws = config.draws_in(s);
        for d in 0..draws {
            total += count_real_eigenvalues(&sample(config, s as u64, d as u64), None)?;
        }
        Ok((total as f64, draws))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n: usize = per_stream.iter().map(|p| p.1).sum();
    let mean = per_stream.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let means: Vec<f64> = per_stream.iter().map(|(t, c)| t / *c as f64).collect();
    let k = means.len() as f64;
    let stderr = if means.len() < 2 {
        f64::NAN
    } else {
        let avg = means.iter().sum::<f64>() / k;
        (means.iter().map(|m| (m - avg) * (m - avg)).sum::<f64>() / (k - 1.0) / k).sqrt()
    };
    Ok(CountEstimate { mean, stderr, n_samples: n, seed: config.seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(tau: f64, n: usize, samples: usize) -> SampleConfig {
        SampleConfig::new(tau, n, 12345, samples).unwrap()
    }

    #[test]
    fn draws_are_addressable() {
        let c = cfg(0.3, 5, 10);
        assert_eq!(sample(&c, 3, 7), sample(&c, 3, 7));
        assert_ne!(sample(&c, 3, 7), sample(&c, 3, 8));
        assert_ne!(sample(&c, 3, 7), sample(&c, 4, 7));
    }

    #[test]
    fn ginibre_entry_variance() {
        let c = cfg(0.0, 3, 1);
        let draws = 30_000;
        let mut s2 = 0.0;
        let mut s4 = 0.0;
        for d in 0..draws {
            let a = sample(&c, 0, d);
            for x in a.iter() {
                s2 += x * x;
                s4 += x.powi(4);
            }
        }
        let m = (draws * 9) as f64;
        let var = s2 / m;
        let se = ((s4 / m - var * var) / m).sqrt();
        assert!((var - 1.0 / 3.0).abs() < 3.0 * se, "{var} ± {se}");
    }

    #[test]
    fn elliptic_covariance() {
        let c = cfg(0.5, 4, 1);
        let draws = 100_000u64;
        let (mut xx, mut yy, mut xy, mut dd) = (0.0, 0.0, 0.0, 0.0);
        for d in 0..draws {
            let a = sample(&c, 1, d);
            let (x, y) = (a[(0, 1)], a[(1, 0)]);
            xx += x * x;
            yy += y * y;
            xy += x * y;
            dd += a[(2, 2)] * a[(2, 2)];
        }
        let m = draws as f64;
        // standard errors for products of unit-scale Gaussians with variance 1/4
        let se = 0.25 * (2.0 / m).sqrt();
        assert!((xx / m - 0.25).abs() < 3.0 * se);
        assert!((yy / m - 0.25).abs() < 3.0 * se);
        assert!((xy / m - 0.125).abs() < 3.0 * se);
        let se_d = 0.375 * (2.0 / m).sqrt();
        assert!((dd / m - 0.375).abs() < 3.0 * se_d);
    }

    #[test]
    fn log_det_small_cases() {
        assert_eq!(log_abs_det(&DMatrix::identity(3, 3), 0.0), 0.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        assert_relative_eq!(log_abs_det(&d, 0.0), 6f64.ln(), max_relative = 1e-15);
        let a = sample(&cfg(0.2, 2, 1), 0, 0);
        let direct = (a[(0, 0)] - 0.3) * (a[(1, 1)] - 0.3) - a[(0, 1)] * a[(1, 0)];
        assert!((log_abs_det(&a, 0.3) - direct.abs().ln()).abs() < 1e-12);
        let z = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(log_abs_det(&z, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn zero_exponent_is_one() {
        let e = mc_moment(&cfg(0.0, 3, 200), 0.0, &[0.0]).unwrap();
        assert_eq!(e.log_mean, 0.0);
        assert_eq!(e.stderr_rel, 0.0);
    }

    #[test]
    fn two_by_two_moments() {
        let c = cfg(0.0, 2, 200_000);
        let est = mc_moments(&c, &[MomentQuery { ell: 1.0, mus: vec![0.0] }, MomentQuery { ell: 2.0, mus: vec![0.0] }])
            .unwrap();
        for e in est {
            let z = (e.log_mean.exp() - 0.5) / (0.5 * e.stderr_rel);
            assert!(z.abs() < 4.0, "{e:?}");
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut c = cfg(0.4, 4, 2000);
        c.threads = Some(1);
        let a = mc_moment(&c, 1.0, &[0.2]).unwrap();
        c.threads = Some(4);
        let b = mc_moment(&c, 1.0, &[0.2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn real_counts() {
        let sym = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 2.0, -1.0, 0.3, 0.5, 0.3, 2.0]);
        assert_eq!(count_real_eigenvalues(&sym, None).unwrap(), 3);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(count_real_eigenvalues(&rot, None).unwrap(), 0);
        let c = cfg(0.5, 7, 1);
        for d in 0..200 {
            let k = count_real_eigenvalues(&sample(&c, 0, d), None).unwrap();
            assert_eq!((7 - k) % 2, 0);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SampleConfig::new(1.0, 3, 0, 10).is_err());
        assert!(SampleConfig::new(0.0, 3, 0, 0).is_err());
        assert!(mc_moment(&cfg(0.0, 3, 10), -1.5, &[0.0]).is_err());
    }
}
