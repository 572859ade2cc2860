//! Residual maps, goodness of fit and the convergence-rate study.

mod convergence;

pub use convergence::{
    convergence_study, CellSummary, ConvergenceConfig, ConvergenceRow, ConvergenceTable,
};

use crate::error::{Error, Result};
use crate::estimator::{predict, FitResult, RegressionDataset};
use crate::measures::wasserstein_distance;
use crate::transport::{identity_map, map_l2_distance, optimal_map, MonotoneMap};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    /// Optimal maps from each fitted response to the observed response.
    pub residual_maps: Vec<MonotoneMap>,
    pub mean_residual: MonotoneMap,
    pub per_pair_wd: Vec<f64>,
}

pub fn residuals(f: &FitResult, d: &RegressionDataset) -> Result<ResidualSet> {
    f.map.grid().ensure_same(d.grid())?;
    let mut residual_maps = Vec::with_capacity(d.len());
    let mut per_pair_wd = Vec::with_capacity(d.len());
    for (i, p) in d.pairs().iter().enumerate() {
        let fitted = predict(f, &p.predictor)?;
        if fitted.is_point_mass() {
            return Err(Error::DegenerateFittedResponse { pair: i });
        }
        per_pair_wd.push(wasserstein_distance(&fitted, &p.response)?);
        residual_maps.push(optimal_map(&fitted, &p.response)?);
    }
    let mean_residual = mean_map(&residual_maps)?;
    Ok(ResidualSet {
        residual_maps,
        mean_residual,
        per_pair_wd,
    })
}

/// Pointwise average of maps on one grid; a node is defined if any input defines it.
pub fn mean_map(maps: &[MonotoneMap]) -> Result<MonotoneMap> {
    let grid = *maps.first().ok_or(Error::EmptyDataset)?.grid();
    for t in maps {
        grid.ensure_same(t.grid())?;
    }
    let n = maps.len() as f64;
    let mean = (0..grid.len())
        .map(|j| maps.iter().map(|t| t.values()[j]).sum::<f64>() / n)
        .collect();
    let defined = (0..grid.len())
        .map(|j| maps.iter().any(|t| t.defined_mask()[j]))
        .collect();
    MonotoneMap::new(grid, mean, defined)
}

/// `||T_hat - t0||` in `L^2(Q_N)`.
pub fn error_to_truth(f: &FitResult, t0: &MonotoneMap) -> Result<f64> {
    map_l2_distance(&f.map, t0, &f.qn_weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessOfFit {
    /// `(pair index, d_W(fitted, observed))`, largest distance first.
    pub rows: Vec<(usize, f64)>,
    /// `||mean residual - identity||` in `L^2(Q_N)`.
    pub validity_statistic: f64,
}

pub fn goodness_of_fit_report(f: &FitResult, d: &RegressionDataset) -> Result<GoodnessOfFit> {
    let r = residuals(f, d)?;
    Ok(goodness_of_fit_from_residuals(f, &r))
}

pub fn goodness_of_fit_from_residuals(f: &FitResult, r: &ResidualSet) -> GoodnessOfFit {
    let mut rows: Vec<(usize, f64)> = r.per_pair_wd.iter().copied().enumerate().collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let id = identity_map(*f.map.grid());
    let validity_statistic = map_l2_distance(&r.mean_residual, &id, &f.qn_weights)
        .expect("residuals share the fit grid");
    GoodnessOfFit {
        rows,
        validity_statistic,
    }
}
