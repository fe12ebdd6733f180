//! One-dimensional distribution statistics for ensemble tests.

use crate::states::WavefunctionModel;
use crate::{Error, Result};

use super::quadrature::{axis_extent, trapezoid, DEFAULT_TAIL_THRESHOLD};

/// Nodes in the tabulated cumulative distribution.
pub const CDF_NODES: usize = 4001;

/// Tabulated cumulative distribution of a one-coordinate density `Υ(x, t)`.
///
/// Built by the trapezoid rule on the automatic box, normalized to end at 1
/// and linearly interpolated between nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl MarginalCdf {
    pub fn new(model: &WavefunctionModel, t: f64) -> Result<Self> {
        if model.coordinate_count() != 1 {
            return Err(Error::Usage(format!(
                "marginal tables need a one-coordinate model, {} has {}",
                model.label(),
                model.coordinate_count()
            )));
        }
        let (lower, upper) = axis_extent(model, t, DEFAULT_TAIL_THRESHOLD);
        let rule = trapezoid(lower[0], upper[0], CDF_NODES);
        let density: Vec<f64> = rule.iter().map(|&(x, _)| model.jet(&[x], t).density()).collect();
        let h = rule[1].0 - rule[0].0;
        let mut cdf = Vec::with_capacity(CDF_NODES);
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..CDF_NODES {
            acc += 0.5 * h * (density[k - 1] + density[k]);
            cdf.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::Domain(format!("density of {} does not integrate", model.label())));
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        Ok(Self {
            xs: rule.iter().map(|&(x, _)| x).collect(),
            cdf,
        })
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return 0.0;
        }
        if x >= self.upper() {
            return 1.0;
        }
        let k = self.xs.partition_point(|&n| n <= x) - 1;
        let s = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.cdf[k] + s * (self.cdf[k + 1] - self.cdf[k])
    }

    /// Inverse of [`cdf`](Self::cdf) for `p` in `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c < p);
        if k == 0 {
            return self.lower();
        }
        if k >= self.cdf.len() {
            return self.upper();
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let s = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.xs[k - 1] + s * (self.xs[k] - self.xs[k - 1])
    }

    /// Probability mass in `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }
}

/// Kolmogorov–Smirnov distance `sup |F_N - F|` between a sample and a CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (k, &x)| {
        let f = cdf(x);
        d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n)
    })
}

/// Percentile `q ∈ [0, 1]` with linear interpolation between order statistics.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of an empty list");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Freedman–Diaconis bin width `2·IQR·N^{-1/3}`.
pub fn freedman_diaconis_width(samples: &[f64]) -> f64 {
    let iqr = percentile(samples, 0.75) - percentile(samples, 0.25);
    2.0 * iqr * (samples.len() as f64).powf(-1.0 / 3.0)
}

/// Histogram with Freedman–Diaconis bins over the sample range and its L1
/// distance `Σ|count/N - mass|` to the tabulated distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramDistance {
    pub bin_width: f64,
    pub bins: usize,
    pub l1: f64,
}

pub fn histogram_l1(samples: &[f64], table: &MarginalCdf) -> HistogramDistance {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let width = freedman_diaconis_width(samples);
    let bins = if width > 0.0 {
        (((hi - lo) / width).ceil() as usize).max(1)
    } else {
        1
    };
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = samples.len() as f64;
    let inside: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let a = lo + k as f64 * width;
            (c as f64 / n - table.mass(a, a + width)).abs()
        })
        .sum();
    // Mass the histogram range misses counts fully.
    let outside = table.cdf(lo) + (1.0 - table.cdf(lo + bins as f64 * width));
    HistogramDistance {
        bin_width: width,
        bins,
        l1: inside + outside,
    }
}
