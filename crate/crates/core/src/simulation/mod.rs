//! Synthetic regression data: Beta-mixture predictors, `zeta_k` deformations
//! and piecewise random noise maps with identity mean.

mod rng;

pub use rng::SeedStream;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::estimator::{RegressionDataset, RegressionPair};
use crate::measures::{
    density_to_measure, kde_to_measure, silverman_bandwidth, DensityCurve, Grid, Measure, SampleSet,
};
use crate::transport::{pushforward, MonotoneMap};

/// `zeta_0(x) = x`, `zeta_k(x) = x - sin(pi k x) / (|k| pi)`.
///
/// Nondecreasing and fixes `-1`, `0` and `1` for every integer `k`.
pub fn zeta(k: i32, x: f64) -> f64 {
    if k == 0 {
        x
    } else {
        let kf = k as f64;
        x - (PI * kf * x).sin() / (kf.abs() * PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaMixtureSpec {
    pub weights: [f64; 3],
    /// Both shape parameters of every component are drawn uniformly from this range.
    pub parameter_range: (f64, f64),
}

impl BetaMixtureSpec {
    pub fn new(weights: [f64; 3], parameter_range: (f64, f64)) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidSpec(
                "mixture weights must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "mixture weights sum to {total}"
            )));
        }
        let (lo, hi) = parameter_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "invalid shape parameter range [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            weights,
            parameter_range,
        })
    }
}

impl Default for BetaMixtureSpec {
    fn default() -> Self {
        Self {
            weights: [1.0 / 3.0; 3],
            parameter_range: (1.0, 10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Number of segments `J`.
    pub segments: usize,
    /// Values of `K`, drawn uniformly.
    pub k_support: Vec<i32>,
}

impl NoiseSpec {
    pub fn new(segments: usize, k_support: Vec<i32>) -> Result<Self> {
        if segments < 2 {
            return Err(Error::InvalidSpec(format!(
                "need more than one segment, got {segments}"
            )));
        }
        if k_support.is_empty() {
            return Err(Error::InvalidSpec("empty support for K".into()));
        }
        let count = |k: i32| k_support.iter().filter(|&&v| v == k).count();
        if k_support.iter().any(|&k| count(k) != count(-k)) {
            return Err(Error::InvalidSpec("support of K must be symmetric".into()));
        }
        Ok(Self {
            segments,
            k_support,
        })
    }

    /// `K` uniform on `{-k_max, ..., -1, 1, ..., k_max}`; `k_max = 0` gives `K = 0`,
    /// i.e. no noise.
    pub fn with_k_max(segments: usize, k_max: u32) -> Result<Self> {
        let k_max = k_max as i32;
        let support = if k_max == 0 {
            vec![0]
        } else {
            (-k_max..=k_max).filter(|&k| k != 0).collect()
        };
        Self::new(segments, support)
    }

    pub fn noiseless() -> Self {
        Self {
            segments: 2,
            k_support: vec![0],
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            segments: 4,
            k_support: vec![-3, -2, -1, 1, 2, 3],
        }
    }
}

fn require_unit_grid(grid: &Grid) -> Result<()> {
    if grid.omega_min() == 0.0 && grid.omega_max() == 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(
            "simulation requires the domain [0, 1]".into(),
        ))
    }
}

fn draw_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Random three-component Beta mixture, converted to quantiles.
pub fn sample_beta_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &BetaMixtureSpec,
    grid: Grid,
) -> Result<Measure> {
    require_unit_grid(&grid)?;
    let params: Vec<(f64, f64)> = (0..3)
        .map(|_| {
            let a = draw_in(rng, spec.parameter_range);
            let b = draw_in(rng, spec.parameter_range);
            (a, b)
        })
        .collect();
    let components: Vec<(f64, f64, f64, f64)> = spec
        .weights
        .iter()
        .zip(&params)
        .filter(|(w, _)| **w > 0.0)
        .map(|(&w, &(a, b))| (w, a, b, ln_beta(a, b)))
        .collect();
    let density = DensityCurve::from_fn(grid, |x| {
        let (lx, l1x) = (x.ln(), (1.0 - x).ln());
        components
            .iter()
            .map(|&(w, a, b, lb)| w * ((a - 1.0) * lx + (b - 1.0) * l1x - lb).exp())
            .sum()
    })?;
    Ok(density_to_measure(&density))
}

/// Continuous piecewise `zeta`-deformation of `[0, 1]`.
///
/// Breakpoints `0 = U_0 <= U_1 <= ... <= U_J = 1`; on `[U_j, U_{j+1}]` the
/// segment is rescaled to `[-1, 1]`, deformed by `zeta_{K_j}` and scaled
/// back, so every breakpoint is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseZetaMap {
    breaks: Vec<f64>,
    ks: Vec<i32>,
}

impl PiecewiseZetaMap {
    pub fn new(breaks: Vec<f64>, ks: Vec<i32>) -> Result<Self> {
        if breaks.len() != ks.len() + 1 || ks.is_empty() {
            return Err(Error::InvalidSpec(
                "need one more breakpoint than segments".into(),
            ));
        }
        if breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 {
            return Err(Error::InvalidSpec(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpec("breakpoints must be sorted".into()));
        }
        Ok(Self { breaks, ks })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn segment_k(&self) -> &[i32] {
        &self.ks
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let last = self.ks.len() - 1;
        let seg = (self.breaks.partition_point(|&u| u <= x).max(1) - 1).min(last);
        let (a, b) = (self.breaks[seg], self.breaks[seg + 1]);
        if b <= a {
            return x;
        }
        let t = (2.0 * x - (a + b)) / (b - a);
        (a + 0.5 * (b - a) * (zeta(self.ks[seg], t) + 1.0)).clamp(a, b)
    }

    pub fn at_nodes(&self, grid: Grid) -> Result<MonotoneMap> {
        MonotoneMap::from_fn(grid, |x| self.evaluate(x))
    }
}

/// Draws `J - 1` uniform breakpoints and `J` values of `K`.
pub fn draw_noise_map<R: Rng + ?Sized>(rng: &mut R, spec: &NoiseSpec) -> PiecewiseZetaMap {
    let j = spec.segments;
    let mut breaks: Vec<f64> = (0..j - 1).map(|_| rng.random::<f64>()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.insert(0, 0.0);
    breaks.push(1.0);
    let ks = (0..j)
        .map(|_| spec.k_support[rng.random_range(0..spec.k_support.len())])
        .collect();
    PiecewiseZetaMap { breaks, ks }
}

/// A random noise map sampled at the grid nodes.
pub fn sample_noise_map<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &NoiseSpec,
    grid: Grid,
) -> Result<MonotoneMap> {
    require_unit_grid(&grid)?;
    draw_noise_map(rng, spec).at_nodes(grid)
}

/// Inverse-CDF sampling through the piecewise-linear quantile function.
pub fn sample_from_measure<R: Rng + ?Sized>(
    rng: &mut R,
    mu: &Measure,
    n: usize,
) -> Result<SampleSet> {
    SampleSet::new(
        (0..n)
            .map(|_| mu.quantile_at(rng.random::<f64>()))
            .collect(),
    )
}

/// How the generated measures are observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    Full,
    /// `n` draws per measure, smoothed by KDE with the Silverman bandwidth.
    Samples(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: RegressionDataset,
    pub true_map: MonotoneMap,
    pub noise_maps: Vec<PiecewiseZetaMap>,
    pub seed: SeedStream,
}

/// Draws `n_pairs` pairs from `nu_i = T_eps_i # (t0 # mu_i)`.
///
/// Observation `i` uses substream `seed.child(i)`: predictor, then noise
/// map, then (if sampled) predictor and response draws.
pub fn generate_dataset(
    seed: SeedStream,
    n_pairs: usize,
    t0: &MonotoneMap,
    mixture: &BetaMixtureSpec,
    noise: &NoiseSpec,
    observation: Observation,
) -> Result<SyntheticDataset> {
    if n_pairs == 0 {
        return Err(Error::EmptyDataset);
    }
    let grid = *t0.grid();
    require_unit_grid(&grid)?;
    if let Observation::Samples(n) = observation {
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 samples, got {n}"
            )));
        }
    }

    let draws: Vec<(RegressionPair, PiecewiseZetaMap)> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let mu = sample_beta_mixture(&mut rng, mixture, grid)?;
            let eps = draw_noise_map(&mut rng, noise);
            let clean = pushforward(t0, &mu)?;
            let nu = Measure::new(
                grid,
                clean.quantiles().iter().map(|&q| eps.evaluate(q)).collect(),
            )?;
            let pair = match observation {
                Observation::Full => RegressionPair::new(mu, nu)?,
                Observation::Samples(n) => {
                    let xs = sample_from_measure(&mut rng, &mu, n)?;
                    let ys = sample_from_measure(&mut rng, &nu, n)?;
                    let mu_n = kde_to_measure(&xs, silverman_bandwidth(&xs)?, grid)?;
                    let nu_n = kde_to_measure(&ys, silverman_bandwidth(&ys)?, grid)?;
                    RegressionPair::new(mu_n, nu_n)?.with_samples(xs, ys)
                }
            };
            Ok((pair, eps))
        })
        .collect::<Result<_>>()?;

    let (pairs, noise_maps): (Vec<_>, Vec<_>) = draws.into_iter().unzip();
    Ok(SyntheticDataset {
        dataset: RegressionDataset::new(pairs)?,
        true_map: t0.clone(),
        noise_maps,
        seed,
    })
}
