use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otreg::predict;

use crate::formats::{quantile_csv, read_quantile_csv, write_atomic, FitReport};

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Fit report written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Quantile CSV of the predictor.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_predict(a: &PredictArgs) -> Result<()> {
    let report = FitReport::load(&a.fit)?;
    let f = report.fit_result()?;
    let mu = read_quantile_csv(&a.input, *f.map.grid())?;
    let nu = predict(&f, &mu)?;
    write_atomic(&a.out, quantile_csv(&nu).as_bytes())
}
