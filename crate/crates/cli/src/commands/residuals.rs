use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otreg::diagnostics::{goodness_of_fit_from_residuals, residuals};
use serde::{Deserialize, Serialize};

use super::load_data;
use crate::formats::{create_dir, map_csv, to_json, write_atomic, FitReport, PairRow};
use crate::input_error;
use crate::svg::residual_overlay;

#[derive(Debug, Args)]
pub struct ResidualsArgs {
    /// Fit report written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Dataset manifest the fit was computed from.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// `L^2(Q_N)` distance of the mean residual map from the identity.
    pub validity_statistic: f64,
    /// Pairs by decreasing Wasserstein distance to their fitted response.
    pub pairs: Vec<PairRow>,
    pub qn_weights: Vec<f64>,
    pub residual_files: Vec<String>,
}

pub fn run_residuals(a: &ResidualsArgs) -> Result<()> {
    let report = FitReport::load(&a.fit)?;
    let f = report.fit_result()?;
    let cfg = &report.config;
    let data = load_data(&a.data, Some(cfg.grid.m), cfg.bandwidth, cfg.clamp)?;
    if data.dataset.grid() != f.map.grid() {
        return Err(input_error("grid mismatch between fit report and dataset"));
    }
    let r = residuals(&f, &data.dataset)?;
    let gof = goodness_of_fit_from_residuals(&f, &r);

    create_dir(&a.out_dir)?;
    let mut files = Vec::with_capacity(data.ids.len());
    for (id, t) in data.ids.iter().zip(&r.residual_maps) {
        let name = format!("residual_{id}.csv");
        write_atomic(&a.out_dir.join(&name), map_csv(t).as_bytes())?;
        files.push(name);
    }
    write_atomic(
        &a.out_dir.join("mean_residual.csv"),
        map_csv(&r.mean_residual).as_bytes(),
    )?;
    let summary = ResidualSummary {
        validity_statistic: gof.validity_statistic,
        pairs: gof
            .rows
            .iter()
            .map(|&(i, wd)| PairRow {
                id: data.ids[i].clone(),
                wd,
            })
            .collect(),
        qn_weights: f.qn_weights.values().to_vec(),
        residual_files: files,
    };
    write_atomic(
        &a.out_dir.join("summary.json"),
        to_json(&summary).as_bytes(),
    )?;
    write_atomic(
        &a.out_dir.join("residuals.svg"),
        residual_overlay(&r.residual_maps, &r.mean_residual).as_bytes(),
    )
}
