//! One module per subcommand, plus the dataset loading they share.

mod convergence;
mod fit;
mod ingest;
mod predict;
mod residuals;
mod simulate;

pub use convergence::{run_convergence, ConvergenceArgs};
pub use fit::{run_fit, FitArgs};
pub use ingest::{run_ingest_counts, IngestArgs};
pub use predict::{run_predict, PredictArgs};
pub use residuals::{run_residuals, ResidualsArgs};
pub use simulate::{run_simulate, SimulateArgs};

use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use otreg::measures::{
    kde_to_measure, kde_to_measure_weighted, silverman_bandwidth, silverman_bandwidth_weighted,
    SampleSet, WeightedSampleSet,
};
use otreg::simulation::{zeta, BetaMixtureSpec};
use otreg::transport::identity_map;
use otreg::{Grid, Measure, MonotoneMap, RegressionDataset, RegressionPair};

use crate::formats::{
    read_counts_csv, read_map_csv, read_quantile_csv, read_sample_file, Bandwidth, EntryKind,
    Manifest,
};
use crate::input_error;

/// A dataset loaded from a manifest, with entry ids in manifest order.
pub struct LoadedData {
    pub manifest: Manifest,
    pub dataset: RegressionDataset,
    pub ids: Vec<String>,
}

pub fn load_data(
    manifest_path: &Path,
    m: Option<usize>,
    bandwidth: Bandwidth,
    clamp: bool,
) -> Result<LoadedData> {
    let (manifest, base) = Manifest::load(manifest_path)?;
    let spec = manifest.grid;
    let grid = Grid::new(spec.omega_min, spec.omega_max, m.unwrap_or(spec.m))?;
    let mut pairs = Vec::with_capacity(manifest.entries.len());
    for e in &manifest.entries {
        let (x, y) = (base.join(&e.predictor), base.join(&e.response));
        let pair = match e.kind {
            EntryKind::Quantiles => {
                if grid.len() != spec.m {
                    return Err(input_error(format!(
                        "grid mismatch: entry `{}` stores {} quantiles but --m is {}",
                        e.id,
                        spec.m,
                        grid.len()
                    )));
                }
                RegressionPair::new(read_quantile_csv(&x, grid)?, read_quantile_csv(&y, grid)?)?
            }
            EntryKind::Samples => {
                let xs = prepare_samples(read_sample_file(&x)?, &grid, clamp, &x)?;
                let ys = prepare_samples(read_sample_file(&y)?, &grid, clamp, &y)?;
                let mu = smooth_samples(&xs, bandwidth, grid)
                    .with_context(|| format!("entry `{}` predictor", e.id))?;
                let nu = smooth_samples(&ys, bandwidth, grid)
                    .with_context(|| format!("entry `{}` response", e.id))?;
                RegressionPair::new(mu, nu)?.with_samples(xs, ys)
            }
            EntryKind::Counts => {
                let mu = smooth_counts(&read_counts_csv(&x, &grid, clamp)?, bandwidth, grid)
                    .with_context(|| format!("entry `{}` predictor", e.id))?;
                let nu = smooth_counts(&read_counts_csv(&y, &grid, clamp)?, bandwidth, grid)
                    .with_context(|| format!("entry `{}` response", e.id))?;
                RegressionPair::new(mu, nu)?
            }
        };
        pairs.push(pair);
    }
    let ids = manifest.entries.iter().map(|e| e.id.clone()).collect();
    Ok(LoadedData {
        dataset: RegressionDataset::new(pairs)?,
        manifest,
        ids,
    })
}

fn prepare_samples(s: SampleSet, grid: &Grid, clamp: bool, path: &Path) -> Result<SampleSet> {
    if clamp {
        return Ok(s.clamped(grid));
    }
    s.check_domain(grid)
        .with_context(|| format!("{} (use --clamp to clamp into the domain)", path.display()))?;
    Ok(s)
}

pub fn smooth_samples(s: &SampleSet, bandwidth: Bandwidth, grid: Grid) -> Result<Measure> {
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(s)?,
        Bandwidth::Fixed(h) => h,
    };
    Ok(kde_to_measure(s, h, grid)?)
}

pub fn smooth_counts(s: &WeightedSampleSet, bandwidth: Bandwidth, grid: Grid) -> Result<Measure> {
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth_weighted(s)?,
        Bandwidth::Fixed(h) => h,
    };
    Ok(kde_to_measure_weighted(s, h, grid)?)
}

/// `zeta:K`, `identity`, or a map CSV (optionally prefixed `file:`).
#[derive(Debug, Clone, PartialEq)]
pub enum TrueMapSpec {
    Zeta(i32),
    Identity,
    File(String),
}

impl FromStr for TrueMapSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "identity" {
            return Ok(Self::Identity);
        }
        if let Some(k) = s.strip_prefix("zeta:") {
            return k
                .parse()
                .map(Self::Zeta)
                .map_err(|_| format!("invalid t0 `{s}`: expected zeta:<integer>"));
        }
        let path = s.strip_prefix("file:").unwrap_or(s);
        if path.is_empty() || s.starts_with("zeta") {
            return Err(format!("invalid t0 `{s}`"));
        }
        Ok(Self::File(path.to_owned()))
    }
}

impl TrueMapSpec {
    pub fn build(&self, grid: Grid) -> Result<MonotoneMap> {
        match self {
            Self::Zeta(k) => Ok(MonotoneMap::from_fn(grid, |x| zeta(*k, x))?),
            Self::Identity => Ok(identity_map(grid)),
            Self::File(p) => read_map_csv(Path::new(p), grid),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Zeta(k) => format!("zeta:{k}"),
            Self::Identity => "identity".into(),
            Self::File(p) => format!("file:{p}"),
        }
    }
}

/// Parses three comma-separated mixture weights.
pub fn parse_mixture(s: &str) -> Result<BetaMixtureSpec> {
    let w: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| input_error(format!("invalid --pi `{s}`: expected three numbers")))?;
    let w: [f64; 3] = w
        .try_into()
        .map_err(|_| input_error(format!("invalid --pi `{s}`: expected three numbers")))?;
    Ok(BetaMixtureSpec::new(
        w,
        BetaMixtureSpec::default().parameter_range,
    )?)
}

pub fn default_pi() -> String {
    let w = BetaMixtureSpec::default().weights;
    format!("{},{},{}", w[0], w[1], w[2])
}
