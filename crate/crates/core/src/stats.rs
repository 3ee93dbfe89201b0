//! Goodness-of-fit checks of trial records against the Poisson limit laws.

use alloc::vec;
use alloc::vec::Vec;

use crate::ensembles::{EnsembleSpec, Model};
use crate::error::{Error, Result};
use crate::extremes::{TrialConfig, TrialRecord};
use crate::geometry::{Chart, Region, SurfacePoint};
use crate::kacrice::{intensity, limit_cdf};

/// Upper 0.999 quantiles of chi-square with 1..=15 degrees of freedom.
pub const CHI_SQUARE_999: [f64; 15] = [
    10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588, 31.264, 32.909,
    34.528, 36.123, 37.697,
];

/// Coefficient of the asymptotic 95% KS band `c/√m`.
pub const KS_COEFFICIENT: f64 = 1.36;

/// Two-sided 0.999 normal quantile, used for count-based flags.
pub const NORMAL_999: f64 = 3.29;

/// Minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

pub fn chi_square_quantile_999(dof: usize) -> Option<f64> {
    dof.checked_sub(1).and_then(|i| CHI_SQUARE_999.get(i)).copied()
}

/// Two-sided KS distance between the empirical CDF of sorted `samples` and
/// `cdf`, evaluated on both sides of every jump.
pub fn ks_stat(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    check_sorted(samples)?;
    let m = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample KS distance between sorted `a` and `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / ma - j as f64 / mb).abs());
    }
    Ok(d)
}

fn check_sorted(samples: &[f64]) -> Result<()> {
    match samples.len() {
        0 => return Err(Error::EmptyInput),
        1 => return Err(Error::InvalidArgument("at least two samples are required")),
        _ => {}
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite);
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("samples must be sorted"));
    }
    Ok(())
}

/// Sample mean and standard error `sd/√m` (`sd` with the `m − 1` divisor).
pub fn mean_stderr(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.into_iter().collect();
    let m = values.len();
    if m == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    (mean, libm::sqrt(var / m as f64))
}

/// Sample variance over sample mean.
pub fn dispersion(counts: &[u64]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / m;
    if !(mean > 0.0) {
        return Err(Error::ZeroMean);
    }
    if counts.len() == 1 {
        return Ok(0.0);
    }
    let var = counts.iter().map(|&c| (c as f64 - mean) * (c as f64 - mean)).sum::<f64>() / (m - 1.0);
    Ok(var / mean)
}

/// Index of the equal-measure bin containing `p`.
///
/// Sphere: latitude bands, `1/(1+|z|²)` being uniform under `ω/π`. Torus: a
/// `rows × cols` grid of the unit square with `rows` the largest divisor of
/// `bins` not above `√bins`. Plane: annuli of equal area in `B_R`.
pub fn bin_index(spec: &EnsembleSpec, p: &SurfacePoint, bins: usize) -> usize {
    let u = match spec {
        EnsembleSpec::Su2 { .. } => {
            let r2 = p.coord.norm_sqr();
            match p.chart {
                Chart::Affine1 => r2 / (1.0 + r2),
                _ => 1.0 / (1.0 + r2),
            }
        }
        EnsembleSpec::TorusTheta { .. } => {
            let rows = (1..=bins).filter(|r| bins % r == 0 && r * r <= bins).max().unwrap_or(1);
            let cols = bins / rows;
            let col = ((p.coord.re * cols as f64) as usize).min(cols - 1);
            let row = ((p.coord.im * rows as f64) as usize).min(rows - 1);
            return row * cols + col;
        }
        EnsembleSpec::Gef { radius, .. } => p.coord.norm_sqr() / (radius * radius),
    };
    ((u * bins as f64) as usize).min(bins - 1)
}

/// Pearson statistic of `marks` against equal-measure bins, and its degrees
/// of freedom.
pub fn chi_square_uniform(marks: &[SurfacePoint], spec: &EnsembleSpec, bins: usize) -> Result<(f64, usize)> {
    if bins < 2 {
        return Err(Error::InvalidArgument("at least two bins are required"));
    }
    if marks.is_empty() {
        return Err(Error::EmptyInput);
    }
    let expected = marks.len() as f64 / bins as f64;
    if expected < MIN_EXPECTED {
        return Err(Error::SparseBins(expected));
    }
    let mut observed = vec![0u64; bins];
    for p in marks {
        observed[bin_index(spec, p, bins)] += 1;
    }
    let stat = observed.iter().map(|&o| (o as f64 - expected) * (o as f64 - expected) / expected).sum();
    Ok((stat, bins - 1))
}

/// Mean and standard error of `N(thresholds[t], regions[r])`.
pub fn empirical_intensity(records: &[TrialRecord], t: usize, r: usize) -> (f64, f64) {
    factorial_moment(records, t, r, 1)
}

/// Mean and standard error of `N(N−1)⋯(N−k+1)` for `N = N(thresholds[t], regions[r])`.
pub fn factorial_moment(records: &[TrialRecord], t: usize, r: usize, k: usize) -> (f64, f64) {
    mean_stderr(records.iter().map(|rec| {
        let n = rec.count(t, r);
        (0..k as u64).map(|i| n.saturating_sub(i) as f64).product::<f64>()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsEntry {
    pub k: usize,
    pub model: Model,
    pub samples: usize,
    pub statistic: f64,
    /// `KS_COEFFICIENT / √samples`.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionEntry {
    pub a: f64,
    pub value: f64,
    /// Allowed `|value − 1|`, `NORMAL_999 · √(2/(m−1))`.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub quantile: f64,
    pub pass: bool,
}

impl ChiSquare {
    fn of(marks: &[SurfacePoint], spec: &EnsembleSpec, bins: usize) -> Option<Self> {
        let (statistic, dof) = chi_square_uniform(marks, spec, bins).ok()?;
        let quantile = chi_square_quantile_999(dof)?;
        Some(Self { statistic, dof, quantile, pass: statistic <= quantile })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanCount {
    pub a: f64,
    pub region: Region,
    pub mean: f64,
    pub stderr: f64,
    /// Poisson prediction `a⁴/8 · ∫_U ω/π`.
    pub predicted: f64,
    /// `|mean − predicted| ≤ NORMAL_999 · stderr`.
    pub pass: bool,
}

/// Verdicts of one experiment against the limit laws.
#[derive(Debug, Clone, PartialEq)]
pub struct GofReport {
    pub trials: usize,
    /// `σ̃_k` against `1 − S_k`, for each `k ≤ k_max` with at least two samples.
    pub ks: Vec<KsEntry>,
    /// Dispersion of `N(a, M)` per threshold; thresholds with zero mean are skipped.
    pub dispersion: Vec<DispersionEntry>,
    /// Location uniformity of the smallest pair; `None` if the bins are too sparse.
    pub chi_square: Option<ChiSquare>,
    /// Location uniformity conditional on `σ̃_1` below and above its median.
    pub independence: Option<[ChiSquare; 2]>,
    pub mean_counts: Vec<MeanCount>,
    pub bins: usize,
}

impl GofReport {
    pub fn new(spec: &EnsembleSpec, config: &TrialConfig, records: &[TrialRecord], bins: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let model = spec.model();
        let m = records.len();

        let mut ks = Vec::new();
        for k in 1..=config.k_max {
            let mut samples: Vec<f64> = records.iter().filter_map(|r| r.sigma.get(k - 1).copied()).collect();
            if samples.len() < 2 {
                continue;
            }
            samples.sort_by(f64::total_cmp);
            let statistic = ks_stat(&samples, |x| limit_cdf(k, x))?;
            let threshold = KS_COEFFICIENT / libm::sqrt(samples.len() as f64);
            ks.push(KsEntry { k, model, samples: samples.len(), statistic, threshold, pass: statistic <= threshold });
        }

        let whole = config.regions.iter().position(|&r| r == Region::Whole);
        let mut dispersion_entries = Vec::new();
        if let Some(r) = whole {
            for (t, &a) in config.thresholds.iter().enumerate() {
                let counts: Vec<u64> = records.iter().map(|rec| rec.count(t, r)).collect();
                if let Ok(value) = dispersion(&counts) {
                    let tolerance = NORMAL_999 * libm::sqrt(2.0 / (m.max(2) - 1) as f64);
                    let pass = (value - 1.0).abs() <= tolerance;
                    dispersion_entries.push(DispersionEntry { a, value, tolerance, pass });
                }
            }
        }

        let mut mean_counts = Vec::new();
        for (t, &a) in config.thresholds.iter().enumerate() {
            for (r, &region) in config.regions.iter().enumerate() {
                let (mean, stderr) = empirical_intensity(records, t, r);
                let predicted = intensity(a, region.measure());
                let pass = (mean - predicted).abs() <= NORMAL_999 * stderr;
                mean_counts.push(MeanCount { a, region, mean, stderr, predicted, pass });
            }
        }

        let first: Vec<(f64, SurfacePoint)> =
            records.iter().filter_map(|r| Some((*r.sigma.first()?, *r.marks.first()?))).collect();
        let marks: Vec<SurfacePoint> = first.iter().map(|f| f.1).collect();
        let chi_square = ChiSquare::of(&marks, spec, bins);

        let independence = if first.len() >= 2 {
            let mut sigmas: Vec<f64> = first.iter().map(|f| f.0).collect();
            sigmas.sort_by(f64::total_cmp);
            let median = sigmas[sigmas.len() / 2];
            let (low, high): (Vec<&(f64, SurfacePoint)>, Vec<&(f64, SurfacePoint)>) = first.iter().partition(|f| f.0 < median);
            let low: Vec<SurfacePoint> = low.iter().map(|f| f.1).collect();
            let high: Vec<SurfacePoint> = high.iter().map(|f| f.1).collect();
            ChiSquare::of(&low, spec, bins).zip(ChiSquare::of(&high, spec, bins)).map(|(a, b)| [a, b])
        } else {
            None
        };

        Ok(Self { trials: m, ks, dispersion: dispersion_entries, chi_square, independence, mean_counts, bins })
    }

    pub fn pass(&self) -> bool {
        self.ks.iter().all(|e| e.pass)
            && self.dispersion.iter().all(|e| e.pass)
            && self.chi_square.as_ref().is_none_or(|c| c.pass)
            && self.independence.as_ref().is_none_or(|c| c.iter().all(|c| c.pass))
            && self.mean_counts.iter().all(|e| e.pass)
    }
}
