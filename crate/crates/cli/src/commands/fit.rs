use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otreg::diagnostics::goodness_of_fit_report;
use otreg::{fit, Error};

use super::load_data;
use crate::formats::{
    to_json, write_atomic, Bandwidth, FitConfig, FitReport, GridSpec, MapRow, PairRow,
};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset manifest.
    #[arg(long)]
    pub data: PathBuf,
    /// Grid cells for sample and count entries; defaults to the manifest grid.
    #[arg(long)]
    pub m: Option<usize>,
    /// KDE bandwidth for sample and count entries: `silverman` or a positive number.
    #[arg(long, default_value = "silverman")]
    pub bandwidth: Bandwidth,
    /// Clamp out-of-domain samples instead of rejecting them.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_fit(a: &FitArgs) -> Result<()> {
    let data = load_data(&a.data, a.m, a.bandwidth, a.clamp)?;
    let f = fit(&data.dataset).map_err(|e| name_pair(e, &data.ids))?;
    let validity_statistic = match goodness_of_fit_report(&f, &data.dataset) {
        Ok(g) => Some(g.validity_statistic),
        Err(Error::DegenerateFittedResponse { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let grid = *f.map.grid();
    let map = (0..grid.len())
        .map(|j| MapRow {
            x: grid.node(j),
            value: f.map.values()[j],
            defined: f.map.defined_mask()[j],
            weight: f.qn_weights.values()[j],
        })
        .collect();
    let pairs = data
        .ids
        .iter()
        .zip(&f.per_pair_wd)
        .map(|(id, &wd)| PairRow { id: id.clone(), wd })
        .collect();
    let report = FitReport {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: FitConfig {
            data: a.data.display().to_string(),
            grid: GridSpec::from(&grid),
            bandwidth: a.bandwidth,
            clamp: a.clamp,
            seed: data.manifest.seed,
        },
        objective: f.objective,
        validity_statistic,
        implied_derivative_bound: f.implied_derivative_bound(),
        pairs,
        map,
    };
    write_atomic(&a.out, to_json(&report).as_bytes())
}

fn name_pair(e: Error, ids: &[String]) -> anyhow::Error {
    let id = match &e {
        Error::NotAbsolutelyContinuous { pair } | Error::DegenerateFittedResponse { pair } => {
            ids.get(*pair).cloned()
        }
        _ => None,
    };
    match id {
        Some(id) => anyhow::Error::from(e).context(format!("entry `{id}`")),
        None => e.into(),
    }
}
