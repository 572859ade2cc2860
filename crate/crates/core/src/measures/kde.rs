//! Gaussian kernel smoothing of samples into measures.

use super::{density_to_measure, DensityCurve, Grid, Measure, SampleSet};
use crate::error::{Error, Result};

/// Kernel contributions beyond this many bandwidths are below `1e-21` and dropped.
const KERNEL_CUTOFF: f64 = 10.0;

/// Distinct sample points with positive frequency weights.
///
/// Integer weights behave exactly like the expanded sample in which each
/// value is repeated `weight` times; count data is smoothed through this.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSampleSet {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: weights.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure(
                "sample contains a non-finite value".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        // zero-weight points carry nothing
        let (values, weights): (Vec<f64>, Vec<f64>) = values
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .unzip();
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { values, weights })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total frequency weight, the size of the equivalent expanded sample.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn check_domain(&self, grid: &Grid) -> Result<()> {
        self.values.iter().try_for_each(|&v| grid.check_contains(v))
    }

    /// Scales all weights by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }

    fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self
            .values
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }
}

impl From<&SampleSet> for WeightedSampleSet {
    fn from(s: &SampleSet) -> Self {
        Self {
            values: s.values().to_vec(),
            weights: vec![1.0; s.len()],
        }
    }
}

/// Rule-of-thumb bandwidth `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`.
///
/// When the IQR vanishes but the standard deviation does not, the standard
/// deviation alone is used.
pub fn silverman_bandwidth(s: &SampleSet) -> Result<f64> {
    silverman_bandwidth_weighted(&WeightedSampleSet::from(s))
}

pub fn silverman_bandwidth_weighted(s: &WeightedSampleSet) -> Result<f64> {
    let n = s.total_weight();
    if n < 2.0 {
        return Err(Error::DegenerateSample("need at least two observations"));
    }
    let mean = s
        .values
        .iter()
        .zip(&s.weights)
        .map(|(v, w)| v * w)
        .sum::<f64>()
        / n;
    let ss: f64 = s
        .values
        .iter()
        .zip(&s.weights)
        .map(|(v, w)| w * (v - mean) * (v - mean))
        .sum();
    let sd = (ss / (n - 1.0)).sqrt();
    let first = s.values[0];
    if s.values.iter().all(|&v| v == first) || sd.is_nan() || sd <= 0.0 {
        return Err(Error::DegenerateSample("zero spread"));
    }
    let pairs = s.sorted_pairs();
    let iqr = linear_quantile(&pairs, n, 0.75) - linear_quantile(&pairs, n, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Linearly interpolated quantile (R type 7) of the expanded sample.
fn linear_quantile(sorted: &[(f64, f64)], n: f64, p: f64) -> f64 {
    let rank = (n - 1.0) * p;
    let lower = rank.floor();
    let frac = rank - lower;
    let a = value_at_rank(sorted, lower);
    if frac == 0.0 {
        a
    } else {
        a + frac * (value_at_rank(sorted, lower + 1.0) - a)
    }
}

fn value_at_rank(sorted: &[(f64, f64)], rank: f64) -> f64 {
    let mut cum = 0.0;
    for &(v, w) in sorted {
        cum += w;
        if rank < cum {
            return v;
        }
    }
    sorted[sorted.len() - 1].0
}

/// Gaussian KDE with reflection at both domain ends, inverted to quantiles.
pub fn kde_to_measure(s: &SampleSet, bandwidth: f64, grid: Grid) -> Result<Measure> {
    kde_to_measure_weighted(&WeightedSampleSet::from(s), bandwidth, grid)
}

pub fn kde_to_measure_weighted(
    s: &WeightedSampleSet,
    bandwidth: f64,
    grid: Grid,
) -> Result<Measure> {
    Ok(density_to_measure(&kde_density(s, bandwidth, grid)?))
}

pub(crate) fn kde_density(
    s: &WeightedSampleSet,
    bandwidth: f64,
    grid: Grid,
) -> Result<DensityCurve> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidBandwidth(bandwidth));
    }
    s.check_domain(&grid)?;
    let (a, b) = (grid.omega_min(), grid.omega_max());
    let cut = KERNEL_CUTOFF * bandwidth;

    let mut points = Vec::with_capacity(s.values.len() * 2);
    for (&v, &w) in s.values.iter().zip(&s.weights) {
        points.push((v, w));
        if v - a < cut {
            points.push((2.0 * a - v, w));
        }
        if b - v < cut {
            points.push((2.0 * b - v, w));
        }
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    let positions: Vec<f64> = points.iter().map(|p| p.0).collect();

    let inv_bw = 1.0 / bandwidth;
    let f = grid
        .nodes()
        .into_iter()
        .map(|x| {
            let lo = positions.partition_point(|&p| p < x - cut);
            let hi = positions.partition_point(|&p| p <= x + cut);
            points[lo..hi]
                .iter()
                .map(|&(p, w)| {
                    let u = (x - p) * inv_bw;
                    w * (-0.5 * u * u).exp()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>();
    if f.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidDensity(
            "kernel density vanishes at every node; bandwidth too small for the grid".into(),
        ));
    }
    DensityCurve::from_unnormalized(grid, f)
}
