use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otreg::simulation::{generate_dataset, NoiseSpec, Observation, SeedStream};
use otreg::Grid;

use super::{default_pi, parse_mixture, TrueMapSpec};
use crate::formats::{
    create_dir, map_csv, quantile_csv, sample_file, to_json, write_atomic, EntryKind, GridSpec,
    Manifest, ManifestEntry, SimulationInfo, FORMAT_VERSION,
};
use crate::input_error;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of predictor/response pairs.
    #[arg(long = "N")]
    pub pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// True map: `zeta:K`, `identity`, or a CSV with columns x,value.
    #[arg(long, default_value = "zeta:4")]
    pub t0: TrueMapSpec,
    /// Segments of each noise map.
    #[arg(long = "J", default_value_t = 4)]
    pub segments: usize,
    /// K is uniform on ±1..±k-max; 0 disables noise.
    #[arg(long, default_value_t = 3)]
    pub k_max: u32,
    /// Beta-mixture weights, three comma-separated values.
    #[arg(long, default_value_t = default_pi())]
    pub pi: String,
    /// Store n samples per measure instead of quantiles.
    #[arg(long = "n")]
    pub samples: Option<usize>,
    /// Grid cells on [0, 1].
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_simulate(a: &SimulateArgs) -> Result<()> {
    if a.pairs == 0 {
        return Err(input_error("--N must be positive"));
    }
    let grid = Grid::unit(a.m)?;
    let t0 = a.t0.build(grid)?;
    let mixture = parse_mixture(&a.pi)?;
    let noise = NoiseSpec::with_k_max(a.segments, a.k_max)?;
    let observation = a.samples.map_or(Observation::Full, Observation::Samples);
    let data = generate_dataset(
        SeedStream::new(a.seed),
        a.pairs,
        &t0,
        &mixture,
        &noise,
        observation,
    )?;

    create_dir(&a.out.join("pairs"))?;
    create_dir(&a.out.join("noise"))?;
    let width = (a.pairs - 1).to_string().len();
    let mut entries = Vec::with_capacity(a.pairs);
    let mut noise_files = Vec::with_capacity(a.pairs);
    for (i, (pair, eps)) in data
        .dataset
        .pairs()
        .iter()
        .zip(&data.noise_maps)
        .enumerate()
    {
        let id = format!("{i:0width$}");
        let (kind, x, y, xs, ys) = match (&pair.predictor_samples, &pair.response_samples) {
            (Some(xs), Some(ys)) => (
                EntryKind::Samples,
                format!("pairs/{id}_predictor.txt"),
                format!("pairs/{id}_response.txt"),
                sample_file(xs),
                sample_file(ys),
            ),
            _ => (
                EntryKind::Quantiles,
                format!("pairs/{id}_predictor.csv"),
                format!("pairs/{id}_response.csv"),
                quantile_csv(&pair.predictor),
                quantile_csv(&pair.response),
            ),
        };
        write_atomic(&a.out.join(&x), xs.as_bytes())?;
        write_atomic(&a.out.join(&y), ys.as_bytes())?;
        let noise_file = format!("noise/{id}.csv");
        write_atomic(
            &a.out.join(&noise_file),
            map_csv(&eps.at_nodes(grid)?).as_bytes(),
        )?;
        noise_files.push(noise_file);
        entries.push(ManifestEntry {
            id,
            predictor: x,
            response: y,
            kind,
        });
    }
    write_atomic(&a.out.join("true_map.csv"), map_csv(&t0).as_bytes())?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        grid: GridSpec::from(&grid),
        entries,
        seed: Some(a.seed),
        simulation: Some(SimulationInfo {
            t0: a.t0.label(),
            segments: a.segments,
            k_max: a.k_max,
            pi: mixture.weights,
            samples: a.samples,
            true_map: "true_map.csv".into(),
            noise_maps: noise_files,
        }),
    };
    write_atomic(&a.out.join("manifest.json"), to_json(&manifest).as_bytes())
}
