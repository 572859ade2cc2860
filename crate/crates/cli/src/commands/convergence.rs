use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use clap::Args;
use otreg::diagnostics::{convergence_study, ConvergenceConfig};
use otreg::simulation::{NoiseSpec, Observation};
use otreg::Grid;
use serde::{Deserialize, Serialize};

use super::{default_pi, parse_mixture, TrueMapSpec};
use crate::formats::{create_dir, to_json, write_atomic, GridSpec};

/// `full` or a per-measure sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct SampleSize(pub Observation);

impl FromStr for SampleSize {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "full" {
            return Ok(Self(Observation::Full));
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 2 => Ok(Self(Observation::Samples(n))),
            _ => Err(format!("expected `full` or an integer ≥ 2, got `{s}`")),
        }
    }
}

impl fmt::Display for SampleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Observation::Full => f.write_str("full"),
            Observation::Samples(n) => write!(f, "{n}"),
        }
    }
}

impl From<SampleSize> for String {
    fn from(s: SampleSize) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for SampleSize {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Comma-separated numbers of pairs.
    #[arg(long = "N-list", value_delimiter = ',', required = true)]
    pub pair_counts: Vec<usize>,
    /// Comma-separated sample sizes per measure, or `full`.
    #[arg(long = "n-list", value_delimiter = ',', default_value = "full")]
    pub sample_sizes: Vec<SampleSize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long = "J", default_value_t = 4)]
    pub segments: usize,
    #[arg(long, default_value_t = 3)]
    pub k_max: u32,
    #[arg(long, default_value = "zeta:4")]
    pub t0: TrueMapSpec,
    #[arg(long, default_value_t = default_pi())]
    pub pi: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub n: SampleSize,
    #[serde(rename = "N")]
    pub n_pairs: usize,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEcho {
    pub grid: GridSpec,
    pub reps: usize,
    pub seed: u64,
    pub t0: String,
    pub segments: usize,
    pub k_max: u32,
    pub pi: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub config: StudyEcho,
    pub cells: Vec<CellRow>,
    /// Log-log slope of the median error against `N`, fully observed cells.
    pub slope: Option<f64>,
}

pub fn run_convergence(a: &ConvergenceArgs) -> Result<()> {
    let grid = Grid::unit(a.m)?;
    let mixture = parse_mixture(&a.pi)?;
    let cfg = ConvergenceConfig {
        observations: a.sample_sizes.iter().map(|s| s.0).collect(),
        pair_counts: a.pair_counts.clone(),
        replications: a.reps,
        seed: a.seed,
        mixture: mixture.clone(),
        noise: NoiseSpec::with_k_max(a.segments, a.k_max)?,
        t0: a.t0.build(grid)?,
    };
    let table = convergence_study(&cfg)?;

    let mut csv = String::from("n,N,replication,error\n");
    for r in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            SampleSize(r.observation),
            r.n_pairs,
            r.replication,
            r.error
        ));
    }
    let summary = ConvergenceSummary {
        config: StudyEcho {
            grid: GridSpec::from(&grid),
            reps: a.reps,
            seed: a.seed,
            t0: a.t0.label(),
            segments: a.segments,
            k_max: a.k_max,
            pi: mixture.weights,
        },
        cells: table
            .summary
            .iter()
            .map(|c| CellRow {
                n: SampleSize(c.observation),
                n_pairs: c.n_pairs,
                median: c.median,
            })
            .collect(),
        slope: table.slope,
    };
    create_dir(&a.out)?;
    write_atomic(&a.out.join("table.csv"), csv.as_bytes())?;
    write_atomic(&a.out.join("summary.json"), to_json(&summary).as_bytes())
}
