//! Distribution-on-distribution regression with monotone transport maps.
//!
//! Response measures are modelled as `nu_i = T_eps_i # (T_0 # mu_i)`, where
//! `T_0` is a nondecreasing map of a compact interval and the random noise
//! maps `T_eps_i` have identity mean. `T_0` is estimated by minimizing the
//! sum of squared Wasserstein distances between `T # mu_i` and `nu_i`, which
//! on a grid reduces to a weighted isotonic regression.
//!
//! - [`measures`]: grids, quantile-vector measures, densities, samples, KDE
//!   and the Wasserstein distance.
//! - [`transport`]: monotone maps, optimal maps, pushforward, composition.
//! - [`estimator`]: the pooled isotonic problem, PAVA and the fit.
//! - [`simulation`]: Beta-mixture predictors and random noise maps.
//! - [`diagnostics`]: residual maps, goodness of fit, convergence studies.

pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod measures;
pub mod simulation;
pub mod transport;

pub use error::{Error, Result};
pub use estimator::{fit, predict, FitResult, RegressionDataset, RegressionPair};
pub use measures::{Grid, Measure};
pub use transport::{MonotoneMap, NodeWeights};
