use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use otreg::{Grid, Measure};

use super::smooth_counts;
use crate::formats::{
    create_dir, quantile_csv, read_counts_csv, to_json, write_atomic, Bandwidth, EntryKind,
    GridSpec, Manifest, ManifestEntry, FORMAT_VERSION,
};
use crate::input_error;

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["counts", "pairs"])))]
pub struct IngestArgs {
    /// One `age,count` CSV; writes a single quantile CSV to --out.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// CSV with columns id,predictor,response naming count files; writes a
    /// dataset directory with a manifest to --out.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Domain as `min,max`.
    #[arg(long, default_value = "0,110")]
    pub omega: String,
    #[arg(long, default_value_t = 110)]
    pub m: usize,
    #[arg(long, default_value = "silverman")]
    pub bandwidth: Bandwidth,
    /// Clamp ages outside the domain instead of rejecting them.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_omega(s: &str) -> Result<(f64, f64)> {
    let bad = || input_error(format!("invalid --omega `{s}`: expected `min,max`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn ingest_file(path: &Path, a: &IngestArgs, grid: Grid) -> Result<Measure> {
    let counts = read_counts_csv(path, &grid, a.clamp)?;
    smooth_counts(&counts, a.bandwidth, grid).map_err(|e| e.context(format!("{}", path.display())))
}

pub fn run_ingest_counts(a: &IngestArgs) -> Result<()> {
    let (lo, hi) = parse_omega(&a.omega)?;
    let grid = Grid::new(lo, hi, a.m)?;
    if let Some(path) = &a.counts {
        let mu = ingest_file(path, a, grid)?;
        return write_atomic(&a.out, quantile_csv(&mu).as_bytes());
    }
    let list = a.pairs.as_ref().expect("clap requires one source");
    let text = fs::read_to_string(list)
        .map_err(|e| input_error(format!("cannot read {}: {e}", list.display())))?;
    let base = list.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| input_error(format!("{}: {e}", list.display())))?
        .clone();
    if header.iter().ne(["id", "predictor", "response"]) {
        return Err(input_error(format!(
            "{}: line 1: expected header `id,predictor,response`",
            list.display()
        )));
    }
    create_dir(&a.out)?;
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_error(format!("{}: {e}", list.display())))?;
        let id = rec[0].to_owned();
        if id.is_empty() || id.contains(['/', '\\']) {
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            return Err(input_error(format!(
                "{}: line {line}: invalid id `{id}`",
                list.display()
            )));
        }
        let mu = ingest_file(&base.join(&rec[1]), a, grid)?;
        let nu = ingest_file(&base.join(&rec[2]), a, grid)?;
        let (x, y) = (format!("{id}_predictor.csv"), format!("{id}_response.csv"));
        write_atomic(&a.out.join(&x), quantile_csv(&mu).as_bytes())?;
        write_atomic(&a.out.join(&y), quantile_csv(&nu).as_bytes())?;
        entries.push(ManifestEntry {
            id,
            predictor: x,
            response: y,
            kind: EntryKind::Quantiles,
        });
    }
    if entries.is_empty() {
        return Err(input_error(format!("{}: no pairs listed", list.display())));
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        grid: GridSpec::from(&grid),
        entries,
        seed: None,
        simulation: None,
    };
    write_atomic(&a.out.join("manifest.json"), to_json(&manifest).as_bytes())
}
