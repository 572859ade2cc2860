//! On-disk formats: quantile CSVs, sample files, count CSVs, map CSVs, the
//! dataset manifest and the fit report.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use otreg::measures::{SampleSet, WeightedSampleSet};
use otreg::transport::NodeWeights;
use otreg::{FitResult, Grid, Measure, MonotoneMap};
use serde::{Deserialize, Serialize};

use crate::input_error;

pub const FORMAT_VERSION: u32 = 1;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let write = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    write().map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)
        .map_err(|e| input_error(format!("cannot create {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(path: &Path, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = rdr
        .headers()
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(input_error(format!(
            "{}: line 1: expected header `{}`",
            path.display(),
            expected.join(",")
        )));
    }
    Ok(())
}

/// Reads all data rows as `(line number, fields)`.
fn csv_rows(path: &Path, text: &str, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = csv_reader(text);
    check_header(path, &mut rdr, header)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_error(format!("{}: line {line}: {e}", path.display()))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn parse_real(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(input_error(format!(
            "{}: line {line}: {what} `{field}` is not a finite number",
            path.display()
        ))),
    }
}

pub fn quantile_csv(mu: &Measure) -> String {
    let g = mu.grid();
    let mut out = String::from("p,value\n");
    for (k, q) in mu.quantiles().iter().enumerate() {
        out.push_str(&format!("{},{}\n", g.level(k), q));
    }
    out
}

pub fn read_quantile_csv(path: &Path, grid: Grid) -> Result<Measure> {
    let text = read_text(path)?;
    let rows = csv_rows(path, &text, &["p", "value"])?;
    if rows.len() != grid.len() {
        return Err(input_error(format!(
            "{}: grid mismatch: expected {} rows, found {}",
            path.display(),
            grid.len(),
            rows.len()
        )));
    }
    let mut q = Vec::with_capacity(rows.len());
    for (k, (line, fields)) in rows.iter().enumerate() {
        let p = parse_real(path, *line, &fields[0], "level")?;
        let v = parse_real(path, *line, &fields[1], "value")?;
        if (p - grid.level(k)).abs() > 1e-9 {
            return Err(input_error(format!(
                "{}: line {line}: level {p} does not match the grid level {}",
                path.display(),
                grid.level(k)
            )));
        }
        q.push(v);
    }
    Measure::new(grid, q).with_context(|| format!("{}", path.display()))
}

pub fn sample_file(s: &SampleSet) -> String {
    s.values().iter().map(|v| format!("{v}\n")).collect()
}

pub fn read_sample_file(path: &Path) -> Result<SampleSet> {
    let text = read_text(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        values.push(parse_real(path, i as u64 + 1, field, "sample")?);
    }
    SampleSet::new(values).with_context(|| format!("{}", path.display()))
}

/// Reads `age,count` rows; each count sits at `age + 0.5`.
pub fn read_counts_csv(path: &Path, grid: &Grid, clamp: bool) -> Result<WeightedSampleSet> {
    let text = read_text(path)?;
    let rows = csv_rows(path, &text, &["age", "count"])?;
    let mut values = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for (line, fields) in &rows {
        let (age, count) = (&fields[0], &fields[1]);
        let place = age
            .parse::<f64>()
            .ok()
            .filter(|a| a.is_finite())
            .map(|a| a + 0.5);
        let x = match place {
            Some(x) if grid.contains(x) => x,
            Some(x) if clamp => grid.clamp(x),
            _ => {
                return Err(input_error(format!(
                    "{}: line {line}: row `{age},{count}` has age `{age}` outside [{}, {}]",
                    path.display(),
                    grid.omega_min(),
                    grid.omega_max()
                )))
            }
        };
        let c: u64 = count.parse().map_err(|_| {
            let why = if count.starts_with('-') {
                "negative count"
            } else {
                "count must be a nonnegative integer"
            };
            input_error(format!("{}: line {line}: {why} `{count}`", path.display()))
        })?;
        values.push(x);
        weights.push(c as f64);
    }
    WeightedSampleSet::new(values, weights).with_context(|| format!("{}", path.display()))
}

/// `x,value,defined` rows, one per grid node.
pub fn map_csv(t: &MonotoneMap) -> String {
    let g = t.grid();
    let mut out = String::from("x,value,defined\n");
    for (j, (z, d)) in t.values().iter().zip(t.defined_mask()).enumerate() {
        out.push_str(&format!("{},{},{}\n", g.node(j), z, u8::from(*d)));
    }
    out
}

/// Reads a map CSV; the `defined` column is optional.
pub fn read_map_csv(path: &Path, grid: Grid) -> Result<MonotoneMap> {
    let text = read_text(path)?;
    let mut rdr = csv_reader(&text);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let with_mask = match header.as_slice() {
        [x, v] if x == "x" && v == "value" => false,
        [x, v, d] if x == "x" && v == "value" && d == "defined" => true,
        _ => {
            return Err(input_error(format!(
                "{}: line 1: expected header `x,value` or `x,value,defined`",
                path.display()
            )))
        }
    };
    let mut z = Vec::new();
    let mut defined = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let j = z.len();
        let x = parse_real(path, line, &rec[0], "node")?;
        if j < grid.len() && (x - grid.node(j)).abs() > 1e-9 * grid.width().max(1.0) {
            return Err(input_error(format!(
                "{}: line {line}: node {x} does not match the grid node {}",
                path.display(),
                grid.node(j)
            )));
        }
        z.push(parse_real(path, line, &rec[1], "value")?);
        defined.push(if with_mask {
            match &rec[2] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(input_error(format!(
                        "{}: line {line}: defined flag `{other}` must be 0 or 1",
                        path.display()
                    )))
                }
            }
        } else {
            true
        });
    }
    if z.len() != grid.len() {
        return Err(input_error(format!(
            "{}: grid mismatch: expected {} rows, found {}",
            path.display(),
            grid.len(),
            z.len()
        )));
    }
    MonotoneMap::new(grid, z, defined).with_context(|| format!("{}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.omega_min, self.omega_max, self.m)?)
    }
}

impl From<&Grid> for GridSpec {
    fn from(g: &Grid) -> Self {
        Self {
            omega_min: g.omega_min(),
            omega_max: g.omega_max(),
            m: g.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Quantiles,
    Samples,
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub predictor: String,
    pub response: String,
    pub kind: EntryKind,
}

/// How a simulated dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationInfo {
    pub t0: String,
    pub segments: usize,
    pub k_max: u32,
    pub pi: [f64; 3],
    pub samples: Option<usize>,
    pub true_map: String,
    pub noise_maps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub grid: GridSpec,
    pub entries: Vec<ManifestEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationInfo>,
}

impl Manifest {
    /// Loads a manifest and checks that every referenced file exists.
    /// Returns the directory relative paths are resolved against.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        if !path.is_file() {
            return Err(input_error(format!(
                "manifest not found: {}",
                path.display()
            )));
        }
        let text = read_text(path)?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| input_error(format!("{}: invalid manifest: {e}", path.display())))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(input_error(format!(
                "{}: unsupported format version {}",
                path.display(),
                manifest.format_version
            )));
        }
        manifest.grid.grid()?;
        if manifest.entries.is_empty() {
            return Err(input_error(format!(
                "{}: manifest has no entries",
                path.display()
            )));
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for e in &manifest.entries {
            for f in [&e.predictor, &e.response] {
                if !base.join(f).is_file() {
                    return Err(input_error(format!(
                        "{}: entry `{}` references missing file {f}",
                        path.display(),
                        e.id
                    )));
                }
            }
        }
        Ok((manifest, base))
    }
}

/// KDE bandwidth: Silverman's rule or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Bandwidth {
    Silverman,
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "silverman" {
            return Ok(Self::Silverman);
        }
        match s.parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => Ok(Self::Fixed(h)),
            Ok(h) => Err(format!("bandwidth must be positive, got {h}")),
            Err(_) => Err(format!("expected `silverman` or a number, got `{s}`")),
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Silverman => f.write_str("silverman"),
            Self::Fixed(h) => write!(f, "{h}"),
        }
    }
}

impl From<Bandwidth> for String {
    fn from(b: Bandwidth) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Bandwidth {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub data: String,
    pub grid: GridSpec,
    pub bandwidth: Bandwidth,
    pub clamp: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub x: f64,
    pub value: f64,
    pub defined: bool,
    /// Node weight of the pooled predictor distribution.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub id: String,
    pub wd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub tool_version: String,
    pub config: FitConfig,
    pub objective: f64,
    /// `None` when some fitted response collapses to a point.
    pub validity_statistic: Option<f64>,
    pub implied_derivative_bound: f64,
    pub pairs: Vec<PairRow>,
    pub map: Vec<MapRow>,
}

impl FitReport {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(input_error(format!(
                "fit report not found: {}",
                path.display()
            )));
        }
        let text = read_text(path)?;
        serde_json::from_str(&text)
            .map_err(|e| input_error(format!("{}: invalid fit report: {e}", path.display())))
    }

    pub fn fit_result(&self) -> Result<FitResult> {
        let grid = self.config.grid.grid()?;
        if self.map.len() != grid.len() {
            return Err(input_error(format!(
                "fit report: expected {} map rows, found {}",
                grid.len(),
                self.map.len()
            )));
        }
        let defined: Vec<bool> = self.map.iter().map(|r| r.defined).collect();
        let map = MonotoneMap::new(
            grid,
            self.map.iter().map(|r| r.value).collect(),
            defined.clone(),
        )?;
        let qn_weights = NodeWeights::new(grid, self.map.iter().map(|r| r.weight).collect())?;
        Ok(FitResult {
            map,
            objective: self.objective,
            per_pair_wd: self.pairs.iter().map(|p| p.wd).collect(),
            coverage_mask: defined,
            qn_weights,
        })
    }
}
