//! Probability measures on a compact interval.
//!
//! A [`Measure`] is stored by its quantile function at the midpoint levels
//! `p_k = (k + 1/2) / m` of a [`Grid`]. Densities, CDFs and samples are
//! conversions into and out of that representation. Between levels the
//! quantile function is piecewise linear; below the first and above the last
//! level it is extended linearly over the remaining half step and clipped to
//! the domain. The CDF of a measure is the inverse of that extended
//! quantile function.

mod grid;
mod kde;

pub use grid::Grid;
pub use kde::{
    kde_to_measure, kde_to_measure_weighted, silverman_bandwidth, silverman_bandwidth_weighted,
    WeightedSampleSet,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    grid: Grid,
    q: Vec<f64>,
}

impl Measure {
    /// Builds a measure from quantile values at the grid levels.
    pub fn new(grid: Grid, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: q.len(),
            });
        }
        for (k, &v) in q.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMeasure(format!("quantile {k} is not finite")));
            }
            grid.check_contains(v)?;
        }
        if let Some(k) = q.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidMeasure(format!(
                "quantiles decrease between levels {k} and {}",
                k + 1
            )));
        }
        Ok(Self { grid, q })
    }

    /// Samples a quantile function at the grid levels.
    pub fn from_quantile_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.levels().into_iter().map(f).collect())
    }

    /// Uniform distribution on `[a, b]`, which must lie inside the grid domain.
    pub fn uniform(grid: Grid, a: f64, b: f64) -> Result<Self> {
        if a >= b {
            return Err(Error::InvalidMeasure(format!("empty interval [{a}, {b}]")));
        }
        Self::from_quantile_fn(grid, |p| a + (b - a) * p)
    }

    /// Dirac mass at `c`.
    pub fn point_mass(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn quantiles(&self) -> &[f64] {
        &self.q
    }

    pub fn into_quantiles(self) -> Vec<f64> {
        self.q
    }

    pub fn is_point_mass(&self) -> bool {
        self.q.iter().all(|&v| v == self.q[0])
    }

    /// True when no two levels share a quantile value, i.e. the measure has
    /// no atom of mass `1/m` or more.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.q.windows(2).all(|w| w[1] > w[0])
    }

    /// Left and right end of the support implied by the extended quantile function.
    pub fn support(&self) -> (f64, f64) {
        let m = self.q.len();
        let lo = self.q[0] - 0.5 * (self.q[1] - self.q[0]);
        let hi = self.q[m - 1] + 0.5 * (self.q[m - 1] - self.q[m - 2]);
        (self.grid.clamp(lo), self.grid.clamp(hi))
    }

    /// Piecewise-linear quantile function, defined on all of `[0, 1]`.
    pub fn quantile_at(&self, p: f64) -> f64 {
        let m = self.q.len();
        let s = p.clamp(0.0, 1.0) * m as f64;
        let (lo, hi) = self.support();
        if s <= 0.5 {
            lo + (self.q[0] - lo) * (s / 0.5)
        } else if s >= m as f64 - 0.5 {
            let t = (s - (m as f64 - 0.5)) / 0.5;
            self.q[m - 1] + (hi - self.q[m - 1]) * t
        } else {
            let u = s - 0.5;
            let i = (u.floor() as usize).min(m - 2);
            let t = u - i as f64;
            self.q[i] + t * (self.q[i + 1] - self.q[i])
        }
    }

    /// Right-continuous CDF implied by the extended quantile function.
    pub fn cdf(&self, x: f64) -> f64 {
        let m = self.q.len();
        let (lo, hi) = self.support();
        if x < lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let c = self.q.partition_point(|&v| v <= x);
        let (x0, x1, p0, p1) = if c == 0 {
            (lo, self.q[0], 0.0, self.grid.level(0))
        } else if c == m {
            (self.q[m - 1], hi, self.grid.level(m - 1), 1.0)
        } else {
            (
                self.q[c - 1],
                self.q[c],
                self.grid.level(c - 1),
                self.grid.level(c),
            )
        };
        p0 + (p1 - p0) * (x - x0) / (x1 - x0)
    }

    /// Mass of every grid cell; sums to one.
    pub fn cell_masses(&self) -> Vec<f64> {
        let m = self.grid.len();
        let mut prev = 0.0;
        (1..=m)
            .map(|j| {
                let c = if j == m {
                    1.0
                } else {
                    self.cdf(self.grid.edge(j))
                };
                let mass = (c - prev).max(0.0);
                prev = c;
                mass
            })
            .collect()
    }
}

/// Density values at the grid nodes, normalized under the midpoint rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    grid: Grid,
    f: Vec<f64>,
}

const MASS_TOLERANCE: f64 = 1e-9;

impl DensityCurve {
    pub fn new(grid: Grid, f: Vec<f64>) -> Result<Self> {
        Self::validate_values(&grid, &f)?;
        let mass = grid.cell_width() * f.iter().sum::<f64>();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDensity(format!("total mass {mass} is not 1")));
        }
        Ok(Self { grid, f })
    }

    /// Rescales nonnegative node values so that they integrate to one.
    pub fn from_unnormalized(grid: Grid, mut f: Vec<f64>) -> Result<Self> {
        Self::validate_values(&grid, &f)?;
        let mass = grid.cell_width() * f.iter().sum::<f64>();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidDensity(format!(
                "cannot normalize density with mass {mass}"
            )));
        }
        f.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, f })
    }

    /// Evaluates `f` at the nodes and normalizes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_unnormalized(grid, grid.nodes().into_iter().map(f).collect())
    }

    fn validate_values(grid: &Grid, f: &[f64]) -> Result<()> {
        if f.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: f.len(),
            });
        }
        if let Some(j) = f.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidDensity(format!(
                "value at node {j} is negative or not finite"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn mass(&self) -> f64 {
        self.grid.cell_width() * self.f.iter().sum::<f64>()
    }
}

/// Raw observations from one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure(
                "sample contains a non-finite value".into(),
            ));
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_domain(&self, grid: &Grid) -> Result<()> {
        self.values.iter().try_for_each(|&v| grid.check_contains(v))
    }

    /// Copy with every value clipped into the grid domain.
    pub fn clamped(&self, grid: &Grid) -> Self {
        Self {
            values: self.values.iter().map(|&v| grid.clamp(v)).collect(),
        }
    }
}

/// Type-1 empirical quantiles of `s` at the grid levels.
pub fn measure_from_samples(s: &SampleSet, grid: Grid) -> Result<Measure> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    s.check_domain(&grid)?;
    let mut sorted = s.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = grid.len();
    // smallest i with i / n >= (2k + 1) / (2m), in exact integer arithmetic
    let q = (0..m)
        .map(|k| {
            let num = n * (2 * k + 1);
            let i = num.div_ceil(2 * m);
            sorted[i.clamp(1, n) - 1]
        })
        .collect();
    Measure::new(grid, q)
}

/// Inverts the midpoint-rule CDF of a density at the grid levels.
pub fn density_to_measure(d: &DensityCurve) -> Measure {
    let grid = *d.grid();
    let m = grid.len();
    let h = grid.cell_width();
    let total: f64 = d.values().iter().sum();
    // cumulative mass at cell right edges, pinned to exactly 0 and 1
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for &f in d.values() {
        acc += f;
        cum.push(acc / total);
    }
    cum[m] = 1.0;

    let mut q = Vec::with_capacity(m);
    let mut last = grid.omega_min();
    for k in 0..m {
        let p = grid.level(k);
        // first edge with cum >= p; flat stretches resolve to their left end
        let j = cum.partition_point(|&c| c < p).max(1);
        let (c0, c1) = (cum[j - 1], cum[j]);
        let x = grid.edge(j - 1) + h * (p - c0) / (c1 - c0);
        let x = grid.clamp(x).max(last);
        q.push(x);
        last = x;
    }
    Measure { grid, q }
}

/// Finite-difference density of the implied CDF across each cell.
pub fn measure_to_density(mu: &Measure) -> Result<DensityCurve> {
    if mu.is_point_mass() {
        return Err(Error::DensityUndefined);
    }
    let h = mu.grid().cell_width();
    let f = mu.cell_masses().into_iter().map(|w| w / h).collect();
    DensityCurve::from_unnormalized(*mu.grid(), f)
}

/// 2-Wasserstein distance: the RMS difference of the quantile vectors.
pub fn wasserstein_distance(mu: &Measure, nu: &Measure) -> Result<f64> {
    mu.grid().ensure_same(nu.grid())?;
    let m = mu.q.len() as f64;
    let ss: f64 = mu.q.iter().zip(&nu.q).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / m).sqrt())
}
