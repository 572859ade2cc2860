//! Monte Carlo study of the estimation error as `N` and `n` grow.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::error_to_truth;
use crate::error::{Error, Result};
use crate::estimator::fit;
use crate::simulation::{generate_dataset, BetaMixtureSpec, NoiseSpec, Observation, SeedStream};
use crate::transport::MonotoneMap;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub observations: Vec<Observation>,
    /// Values of `N`.
    pub pair_counts: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub mixture: BetaMixtureSpec,
    pub noise: NoiseSpec,
    /// True regression map; its grid is the study grid.
    pub t0: MonotoneMap,
}

impl ConvergenceConfig {
    fn validate(&self) -> Result<()> {
        if self.observations.is_empty() || self.pair_counts.is_empty() {
            return Err(Error::InvalidSpec("empty list of sample sizes".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidSpec("need at least one replication".into()));
        }
        if self.pair_counts.contains(&0) {
            return Err(Error::InvalidSpec("N must be positive".into()));
        }
        if self.observations.contains(&Observation::Samples(0)) {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        Ok(())
    }
}

/// One fitted replication. Equality ignores `elapsed`.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub observation: Observation,
    pub n_pairs: usize,
    pub replication: usize,
    pub error: f64,
    pub elapsed: Duration,
}

impl PartialEq for ConvergenceRow {
    fn eq(&self, other: &Self) -> bool {
        self.observation == other.observation
            && self.n_pairs == other.n_pairs
            && self.replication == other.replication
            && self.error.to_bits() == other.error.to_bits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub observation: Observation,
    pub n_pairs: usize,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    /// Ordered by observation, then `N`, then replication, as configured.
    pub rows: Vec<ConvergenceRow>,
    pub summary: Vec<CellSummary>,
    /// Least-squares slope of log median error against log `N` over the
    /// fully observed cells; `None` without full observation or with fewer
    /// than two distinct `N`.
    pub slope: Option<f64>,
}

impl ConvergenceTable {
    pub fn median(&self, observation: Observation, n_pairs: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|c| c.observation == observation && c.n_pairs == n_pairs)
            .map(|c| c.median)
    }
}

/// Runs every `(n, N, replication)` cell.
///
/// The data for `(N, r)` come from substream `seed / N / r` regardless of
/// `n`, so the observation regimes see the same underlying measures and noise.
pub fn convergence_study(cfg: &ConvergenceConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let tasks: Vec<(Observation, usize, usize)> = cfg
        .observations
        .iter()
        .flat_map(|&obs| {
            cfg.pair_counts
                .iter()
                .flat_map(move |&n_pairs| (0..cfg.replications).map(move |r| (obs, n_pairs, r)))
        })
        .collect();

    let rows: Vec<ConvergenceRow> = tasks
        .par_iter()
        .map(|&(observation, n_pairs, replication)| {
            let start = Instant::now();
            let stream = root.child(n_pairs as u64).child(replication as u64);
            let data = generate_dataset(
                stream,
                n_pairs,
                &cfg.t0,
                &cfg.mixture,
                &cfg.noise,
                observation,
            )?;
            let f = fit(&data.dataset)?;
            let error = error_to_truth(&f, &cfg.t0)?;
            Ok(ConvergenceRow {
                observation,
                n_pairs,
                replication,
                error,
                elapsed: start.elapsed(),
            })
        })
        .collect::<Result<_>>()?;

    let summary: Vec<CellSummary> = rows
        .chunks(cfg.replications)
        .map(|cell| CellSummary {
            observation: cell[0].observation,
            n_pairs: cell[0].n_pairs,
            median: median(cell.iter().map(|r| r.error).collect()),
        })
        .collect();

    let full: Vec<(f64, f64)> = summary
        .iter()
        .filter(|c| c.observation == Observation::Full && c.median > 0.0)
        .map(|c| ((c.n_pairs as f64).ln(), c.median.ln()))
        .collect();
    let slope = least_squares_slope(&full);

    Ok(ConvergenceTable {
        rows,
        summary,
        slope,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
