//! Fréchet least-squares fit of the regression map.
//!
//! The objective `M_N(T) = 1/(2N) sum_i d_W^2(T # mu_i, nu_i)` is replaced by
//! its Riemann approximation `sum_i sum_j |T(x_j) - y_ij|^2 w_ij` with
//! `y_ij` the optimal map from `mu_i` to `nu_i` at node `j` and `w_ij` the
//! `mu_i`-mass of cell `j`. The double sum decomposes per node, so pooling to
//! `(W_j, Ybar_j)` and running weighted PAVA gives the exact minimizer over
//! nondecreasing node vectors.

mod pava;

pub use pava::pava;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{wasserstein_distance, Grid, Measure, SampleSet};
use crate::transport::{fill_undefined, optimal_map, pushforward, MonotoneMap, NodeWeights};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionPair {
    pub predictor: Measure,
    pub response: Measure,
    pub predictor_samples: Option<SampleSet>,
    pub response_samples: Option<SampleSet>,
}

impl RegressionPair {
    pub fn new(predictor: Measure, response: Measure) -> Result<Self> {
        predictor.grid().ensure_same(response.grid())?;
        Ok(Self {
            predictor,
            response,
            predictor_samples: None,
            response_samples: None,
        })
    }

    pub fn with_samples(mut self, predictor: SampleSet, response: SampleSet) -> Self {
        self.predictor_samples = Some(predictor);
        self.response_samples = Some(response);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    grid: Grid,
    pairs: Vec<RegressionPair>,
}

impl RegressionDataset {
    pub fn new(pairs: Vec<RegressionPair>) -> Result<Self> {
        let grid = *pairs.first().ok_or(Error::EmptyDataset)?.predictor.grid();
        for p in &pairs {
            grid.ensure_same(p.predictor.grid())?;
            grid.ensure_same(p.response.grid())?;
        }
        Ok(Self { grid, pairs })
    }

    /// Convenience constructor from bare measure pairs.
    pub fn from_measures(pairs: impl IntoIterator<Item = (Measure, Measure)>) -> Result<Self> {
        let pairs = pairs
            .into_iter()
            .map(|(mu, nu)| RegressionPair::new(mu, nu))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn pairs(&self) -> &[RegressionPair] {
        &self.pairs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Empirical `Q_N`: the average of the predictors' cell masses.
    pub fn predictor_weights(&self) -> Result<NodeWeights> {
        let mut w = vec![0.0; self.grid.len()];
        for p in &self.pairs {
            for (acc, m) in w.iter_mut().zip(p.predictor.cell_masses()) {
                *acc += m;
            }
        }
        NodeWeights::normalized(self.grid, w)
    }
}

/// Per-node pooled weighted isotonic problem.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicProblem {
    pub grid: Grid,
    /// `Ybar_j`; `None` where no predictor puts mass on cell `j`.
    pub pooled_targets: Vec<Option<f64>>,
    /// `W_j = sum_i w_ij`.
    pub pooled_weights: Vec<f64>,
    pub coverage_mask: Vec<bool>,
}

pub fn build_isotonic_problem(d: &RegressionDataset) -> Result<IsotonicProblem> {
    let grid = *d.grid();
    let per_pair: Vec<(Vec<f64>, Vec<f64>)> = d
        .pairs()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if !p.predictor.is_absolutely_continuous() {
                return Err(Error::NotAbsolutelyContinuous { pair: i });
            }
            let t = optimal_map(&p.predictor, &p.response)?;
            Ok((p.predictor.cell_masses(), t.values().to_vec()))
        })
        .collect::<Result<_>>()?;

    let m = grid.len();
    let mut weight = vec![0.0; m];
    let mut weighted_sum = vec![0.0; m];
    for (w, y) in &per_pair {
        for j in 0..m {
            weight[j] += w[j];
            weighted_sum[j] += w[j] * y[j];
        }
    }
    let coverage_mask: Vec<bool> = weight.iter().map(|&w| w > 0.0).collect();
    let pooled_targets = (0..m)
        .map(|j| coverage_mask[j].then(|| grid.clamp(weighted_sum[j] / weight[j])))
        .collect();
    Ok(IsotonicProblem {
        grid,
        pooled_targets,
        pooled_weights: weight,
        coverage_mask,
    })
}

/// Outcome of [`fit`].
///
/// No derivative bound is imposed on the fitted map. Any nondecreasing map
/// into the domain has node slopes at most `|Omega| / h`, so the fit lies in
/// the bounded-derivative class for that bound; see
/// [`FitResult::implied_derivative_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub map: MonotoneMap,
    /// `M_N` at the fitted map.
    pub objective: f64,
    /// `d_W(T # mu_i, nu_i)` per pair.
    pub per_pair_wd: Vec<f64>,
    pub coverage_mask: Vec<bool>,
    /// Empirical `Q_N` used for all map-space errors.
    pub qn_weights: NodeWeights,
}

impl FitResult {
    pub fn implied_derivative_bound(&self) -> f64 {
        let g = self.map.grid();
        g.width() / g.cell_width()
    }
}

pub fn fit(d: &RegressionDataset) -> Result<FitResult> {
    let problem = build_isotonic_problem(d)?;
    let grid = problem.grid;
    let covered: Vec<usize> = (0..grid.len())
        .filter(|&j| problem.coverage_mask[j])
        .collect();
    let targets: Vec<f64> = covered
        .iter()
        .map(|&j| problem.pooled_targets[j].expect("covered node has a target"))
        .collect();
    let weights: Vec<f64> = covered.iter().map(|&j| problem.pooled_weights[j]).collect();
    let solved = pava(&targets, &weights)?;

    let mut z = vec![0.0; grid.len()];
    for (&j, v) in covered.iter().zip(solved) {
        z[j] = grid.clamp(v);
    }
    fill_undefined(&mut z, &problem.coverage_mask)?;
    let map = MonotoneMap::new(grid, z, problem.coverage_mask.clone())?;

    let per_pair_wd = pair_distances(&map, d)?;
    let objective = half_mean_square(&per_pair_wd);
    let qn_weights = NodeWeights::normalized(grid, problem.pooled_weights)?;
    Ok(FitResult {
        map,
        objective,
        per_pair_wd,
        coverage_mask: problem.coverage_mask,
        qn_weights,
    })
}

/// Fitted response `T_hat # mu`.
pub fn predict(f: &FitResult, mu: &Measure) -> Result<Measure> {
    pushforward(&f.map, mu)
}

/// `M_N(t) = 1/(2N) sum_i d_W^2(t # mu_i, nu_i)`.
pub fn objective(t: &MonotoneMap, d: &RegressionDataset) -> Result<f64> {
    Ok(half_mean_square(&pair_distances(t, d)?))
}

fn pair_distances(t: &MonotoneMap, d: &RegressionDataset) -> Result<Vec<f64>> {
    d.pairs()
        .iter()
        .map(|p| wasserstein_distance(&pushforward(t, &p.predictor)?, &p.response))
        .collect()
}

fn half_mean_square(wd: &[f64]) -> f64 {
    wd.iter().map(|v| v * v).sum::<f64>() / (2.0 * wd.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::identity_map;

    #[test]
    fn self_pair_fits_identity() {
        let g = Grid::unit(200).unwrap();
        let mu = Measure::from_quantile_fn(g, |p| 0.2 + 0.6 * p * p).unwrap();
        let d = RegressionDataset::from_measures([(mu.clone(), mu.clone())]).unwrap();
        let prob = build_isotonic_problem(&d).unwrap();
        let (lo, hi) = mu.support();
        for j in 0..200 {
            let x = g.node(j);
            if let Some(y) = prob.pooled_targets[j] {
                if x > lo && x < hi {
                    assert!((y - x).abs() < 1e-12);
                }
            }
        }
        // nodes between the support ends and the first quantile carry clamped values
        let f = fit(&d).unwrap();
        assert!(f.objective <= 1e-6, "objective {}", f.objective);

        let u = Measure::uniform(g, 0.0, 1.0).unwrap();
        let d = RegressionDataset::from_measures([(u.clone(), u)]).unwrap();
        assert!(fit(&d).unwrap().objective <= 1e-12);
    }

    #[test]
    fn two_shifted_responses_average() {
        let g = Grid::new(0.0, 2.0, 400).unwrap();
        let mu = Measure::uniform(g, 0.0, 1.0).unwrap();
        let nu2 = Measure::uniform(g, 0.2, 1.2).unwrap();
        let d = RegressionDataset::from_measures([(mu.clone(), mu.clone()), (mu, nu2)]).unwrap();
        let prob = build_isotonic_problem(&d).unwrap();
        let mut covered = 0;
        for j in 0..400 {
            if let Some(y) = prob.pooled_targets[j] {
                covered += 1;
                assert!((y - (g.node(j) + 0.1)).abs() < 1e-12);
            }
        }
        assert_eq!(covered, 200);
        let total: f64 = prob.pooled_weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-6);
    }

    #[test]
    fn atom_in_predictor_rejected() {
        let g = Grid::unit(10).unwrap();
        let mut q = Measure::uniform(g, 0.0, 1.0).unwrap().into_quantiles();
        q[4] = q[3];
        let mu = Measure::new(g, q).unwrap();
        let ok = Measure::uniform(g, 0.0, 1.0).unwrap();
        let d = RegressionDataset::from_measures([(ok.clone(), ok.clone()), (mu, ok)]).unwrap();
        assert_eq!(
            build_isotonic_problem(&d),
            Err(Error::NotAbsolutelyContinuous { pair: 1 })
        );
    }

    #[test]
    fn empty_and_mismatched_datasets() {
        assert_eq!(RegressionDataset::new(vec![]), Err(Error::EmptyDataset));
        let a = Measure::uniform(Grid::unit(10).unwrap(), 0.0, 1.0).unwrap();
        let b = Measure::uniform(Grid::unit(12).unwrap(), 0.0, 1.0).unwrap();
        assert_eq!(RegressionPair::new(a, b), Err(Error::GridMismatch));
    }

    #[test]
    fn objective_of_shift() {
        let g = Grid::new(0.0, 2.0, 100).unwrap();
        let mu = Measure::uniform(g, 0.5, 1.0).unwrap();
        let nu = Measure::uniform(g, 1.0, 1.5).unwrap();
        let d = RegressionDataset::from_measures([(mu, nu)]).unwrap();
        let v = objective(&identity_map(g), &d).unwrap();
        assert!((v - 0.125).abs() < 1e-12);
    }

    #[test]
    fn fit_result_invariants() {
        let g = Grid::unit(100).unwrap();
        let mu = Measure::from_quantile_fn(g, |p| p * p).unwrap();
        let nu = Measure::from_quantile_fn(g, |p| p.sqrt()).unwrap();
        let mu2 = Measure::from_quantile_fn(g, |p| 0.1 + 0.8 * p).unwrap();
        let d = RegressionDataset::from_measures([(mu.clone(), nu), (mu2, mu)]).unwrap();
        let f = fit(&d).unwrap();
        let recomputed: f64 =
            f.per_pair_wd.iter().map(|v| v * v).sum::<f64>() / (2.0 * f.per_pair_wd.len() as f64);
        assert!((f.objective - recomputed).abs() < 1e-9);
        assert!((objective(&f.map, &d).unwrap() - f.objective).abs() < 1e-12);
        let fitted = predict(&f, &d.pairs()[0].predictor).unwrap();
        let wd = wasserstein_distance(&fitted, &d.pairs()[0].response).unwrap();
        assert_eq!(wd, f.per_pair_wd[0]);
        assert_eq!(f.implied_derivative_bound(), 100.0);
        assert!(f.map.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn predict_with_identity_map() {
        let g = Grid::unit(50).unwrap();
        let mu = Measure::uniform(g, 0.0, 1.0).unwrap();
        let f = FitResult {
            map: identity_map(g),
            objective: 0.0,
            per_pair_wd: vec![0.0],
            coverage_mask: vec![true; 50],
            qn_weights: NodeWeights::uniform(g),
        };
        let out = predict(&f, &mu).unwrap();
        assert!(wasserstein_distance(&out, &mu).unwrap() < 1e-12);
    }
}
