//! Seeded Ginibre/Wishart sampling and Monte Carlo estimators.
//!
//! Every sample `k` draws from its own ChaCha8 stream seeded by
//! `splitmix64(seed ⊕ splitmix64(k))`, so estimates do not depend on how
//! samples are spread over threads. Per-sample statistics are stored by index
//! and reduced in index order with compensated summation.
//!
//! Entries of `G` have independent real and imaginary parts of variance
//! `1/(2M)`, so that `E|g|² = 1/M` and `E tr W = P/M`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::matrix::ComplexMatrix;
use crate::partitions::FreeCumulants;
use crate::perms::MatrixShape;
use crate::wick::WickWord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub shape: MatrixShape,
    pub samples: usize,
    pub seed: u64,
    pub parallel_streams: usize,
}

impl SamplerConfig {
    pub fn new(shape: MatrixShape, samples: usize, seed: u64) -> Result<Self> {
        let c = Self { shape, samples, seed, parallel_streams: 1 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_streams(mut self, streams: usize) -> Result<Self> {
        self.parallel_streams = streams;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::domain("at least two samples are needed"));
        }
        if self.parallel_streams == 0 {
            return Err(Error::domain("parallel_streams must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for sample `index` of a run seeded by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Standard normals by the Marsaglia polar method.
pub struct PolarNormal<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> PolarNormal<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(s) = self.spare.take() {
            return s;
        }
        loop {
            let u = 2.0 * self.rng.gen::<f64>() - 1.0;
            let v = 2.0 * self.rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// An `M × P` Ginibre matrix with `E|g|² = 1/M`.
pub fn sample_ginibre<R: Rng>(shape: MatrixShape, normals: &mut PolarNormal<R>) -> ComplexMatrix {
    let sd = (0.5 / shape.m as f64).sqrt();
    ComplexMatrix::from_fn(shape.m, shape.p, |_, _| {
        let re = normals.sample() * sd;
        let im = normals.sample() * sd;
        Complex64::new(re, im)
    })
}

/// `W = GG*` for sample `index`.
pub fn sample_wishart(shape: MatrixShape, seed: u64, index: u64) -> ComplexMatrix {
    let mut normals = PolarNormal::new(substream(seed, index));
    sample_ginibre(shape, &mut normals).gram()
}

/// `Tr(W^σ1 ⋯ W^σm)` (unnormalised).
pub fn word_trace(word: &WickWord, w: &ComplexMatrix) -> Result<Complex64> {
    let perms = word.perms();
    let factors: Vec<ComplexMatrix> = perms.iter().map(|p| p.apply(w)).collect::<Result<_>>()?;
    if factors.len() == 1 {
        return Ok(factors[0].trace());
    }
    let mut acc = factors[0].clone();
    for f in &factors[1..factors.len() - 1] {
        acc = acc.matmul(f)?;
    }
    acc.trace_of_product(&factors[factors.len() - 1])
}

/// Neumaier-compensated sum in slice order.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - mu) * (x - mu)).collect();
    compensated_sum(&sq) / (xs.len() as f64 - 1.0)
}

/// Unbiased sample covariance.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    compensated_sum(&prods) / (xs.len() as f64 - 1.0)
}

fn report(xs: &[f64], config: &SamplerConfig) -> EstimateReport {
    EstimateReport {
        mean: mean(xs),
        std_error: (sample_variance(xs) / xs.len() as f64).sqrt(),
        samples: xs.len(),
        seed: config.seed,
    }
}

/// Evaluates `stat` on every sampled `W`, returning per-sample rows in index order.
fn collect_rows<F>(config: &SamplerConfig, width: usize, stat: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&ComplexMatrix) -> Result<Vec<f64>> + Sync,
{
    let n = config.samples;
    let streams = config.parallel_streams.min(n);
    let chunk = n.div_ceil(streams);
    let chunks: Vec<Vec<Vec<f64>>> = (0..streams)
        .into_par_iter()
        .map(|s| {
            (s * chunk..((s + 1) * chunk).min(n))
                .map(|k| {
                    let row = stat(&sample_wishart(config.shape, config.seed, k as u64))?;
                    debug_assert_eq!(row.len(), width);
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

fn columns(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    (0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
}

fn check_words(words: &[WickWord], config: &SamplerConfig) -> Result<()> {
    if words.iter().any(|w| w.shape() != config.shape) {
        return Err(Error::domain("word shape differs from the sampler shape"));
    }
    Ok(())
}

/// Estimates of `E tr(W^σ1 ⋯ W^σm)` for several words over shared draws.
pub fn mc_mixed_moments(words: &[WickWord], config: &SamplerConfig) -> Result<Vec<EstimateReport>> {
    check_words(words, config)?;
    let side = config.shape.m as f64;
    let rows = collect_rows(config, words.len(), |w| {
        words.iter().map(|word| Ok(word_trace(word, w)?.re / side)).collect()
    })?;
    Ok(columns(&rows, words.len()).iter().map(|c| report(c, config)).collect())
}

pub fn mc_mixed_moment(word: &WickWord, config: &SamplerConfig) -> Result<EstimateReport> {
    Ok(mc_mixed_moments(std::slice::from_ref(word), config)?[0])
}

/// Sample covariance of `Tr Π W^σ` and `Tr Π W^τ` (unnormalised traces).
pub fn mc_covariance(w1: &WickWord, w2: &WickWord, config: &SamplerConfig) -> Result<EstimateReport> {
    check_words(&[w1.clone(), w2.clone()], config)?;
    let rows = collect_rows(config, 2, |w| Ok(vec![word_trace(w1, w)?.re, word_trace(w2, w)?.re]))?;
    let cols = columns(&rows, 2);
    let (mx, my) = (mean(&cols[0]), mean(&cols[1]));
    let z: Vec<f64> = cols[0].iter().zip(&cols[1]).map(|(x, y)| (x - mx) * (y - my)).collect();
    let n = z.len() as f64;
    Ok(EstimateReport {
        mean: sample_covariance(&cols[0], &cols[1]),
        std_error: (sample_variance(&z) / n).sqrt(),
        samples: z.len(),
        seed: config.seed,
    })
}

/// Number of batches behind the cumulant standard error.
pub const CUMULANT_BATCHES: usize = 20;

/// Plug-in estimate of `κ_n(W^σ1, …, W^σn)`, standard error by batch means.
pub fn mc_mixed_cumulant(word: &WickWord, config: &SamplerConfig) -> Result<EstimateReport> {
    check_words(std::slice::from_ref(word), config)?;
    let n = word.len();
    // every nonempty subword, indexed by its bit mask
    let masks: Vec<usize> = (1..1usize << n).collect();
    let subwords: Vec<WickWord> = masks
        .iter()
        .map(|&mask| word.subword(&(0..n).filter(|k| mask >> k & 1 == 1).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let side = config.shape.m as f64;
    let rows = collect_rows(config, masks.len(), |w| {
        subwords.iter().map(|s| Ok(word_trace(s, w)?.re / side)).collect()
    })?;
    let cumulant_of = |rows: &[Vec<f64>]| -> Result<f64> {
        let cols = columns(rows, masks.len());
        let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
        let mut calc = FreeCumulants::new(|w: &[usize]| -> Result<f64> {
            let mask: usize = w.iter().map(|&k| 1usize << k).sum();
            Ok(means[mask - 1])
        });
        calc.cumulant(&(0..n).collect::<Vec<_>>())
    };
    let estimate = cumulant_of(&rows)?;
    let batches = CUMULANT_BATCHES.min(rows.len() / 2).max(2);
    let size = rows.len() / batches;
    let per_batch: Vec<f64> =
        (0..batches).map(|b| cumulant_of(&rows[b * size..(b + 1) * size])).collect::<Result<_>>()?;
    Ok(EstimateReport {
        mean: estimate,
        std_error: (sample_variance(&per_batch) / batches as f64).sqrt(),
        samples: rows.len(),
        seed: config.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub m: usize,
    pub variance: f64,
    /// Sample covariance of the unnormalised trace with itself, `M²·variance`.
    pub trace_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    /// `None` when some variance vanishes.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residuals: Vec<f64>,
    pub degenerate: bool,
}

/// Least-squares fit of `log variance` against `log M`.
pub fn fit_variance_scaling(points: Vec<ScalingPoint>) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::domain("variance scaling needs at least three grid points"));
    }
    if points.iter().any(|p| p.variance <= 0.0 || !p.variance.is_finite()) {
        return Ok(ScalingFit { points, slope: None, intercept: None, residuals: vec![], degenerate: true });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.variance.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(ScalingFit { points, slope: Some(slope), intercept: Some(intercept), residuals, degenerate: false })
}

/// `Var tr(W^σ1 ⋯ W^σm)` along a grid of words (one per `M`), then the log-log slope.
pub fn variance_scaling_probe(words: &[WickWord], samples: usize, seed: u64) -> Result<ScalingFit> {
    let mut points = Vec::new();
    for word in words {
        let config = SamplerConfig::new(word.shape(), samples, seed)?;
        let side = word.shape().m as f64;
        let rows = collect_rows(&config, 1, |w| Ok(vec![word_trace(word, w)?.re / side]))?;
        let variance = sample_variance(&columns(&rows, 1)[0]);
        points.push(ScalingPoint { m: word.shape().m, variance, trace_variance: variance * side * side });
    }
    fit_variance_scaling(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub m: usize,
    pub value: f64,
}

/// One realisation `tr(W_N^{σ1,N} ⋯)` along increasing `N`; point `k` uses
/// sample index `k` of the stream seeded by `seed`.
pub fn as_convergence_path(words: &[WickWord], seed: u64) -> Result<Vec<PathPoint>> {
    words
        .iter()
        .enumerate()
        .map(|(k, word)| {
            let w = sample_wishart(word.shape(), seed, k as u64);
            let value = word_trace(word, &w)?.re / word.shape().m as f64;
            Ok(PathPoint { m: word.shape().m, value })
        })
        .collect()
}
