//! File formats.
//!
//! * Points, CSV: header `x1,...,xd` with an optional trailing `weight` column.
//! * Points, binary: magic `CSPS1`, a flags byte (bit 0: weights present),
//!   `u32` n, `u32` d, then `n*d` little-endian `f64` coordinates and, if
//!   flagged, `n` little-endian `f64` weights.
//! * Coresets: CSV with header `x1,...,xd,weight,provenance` plus a JSON
//!   sidecar next to it (same stem, `.json`).
//! * Discrete instances: magic `CSDI1`, `u32` clients per copy, `u32` centers
//!   per copy, `u32` copies, `u32` z, `u64` word count, then the packed edge
//!   words little-endian; a JSON manifest sits next to it.
//! * Solutions: CSV with header `solution,x1,...,xd`, one row per center.
//!
//! Floats are written in shortest round-trip form, so every format reloads
//! bit-exactly. Row numbers in errors count data rows from 1.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CoresetError, Result};
use crate::lower_bounds::discrete::{DiscreteInstance, StarParams, EDGE_PROBABILITY};
use crate::metric::{PointSet, Solution, WeightedPoints};
use crate::partition::GroupSummary;
use crate::projection::ProjectionSpec;
use crate::sampler::{Provenance, RawPoints, WeightedCoreset};

pub const POINTS_MAGIC: &[u8; 5] = b"CSPS1";
pub const DISCRETE_MAGIC: &[u8; 5] = b"CSDI1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFormat {
    Csv,
    Binary,
}

impl PointFormat {
    /// `.csv` selects CSV; anything else is read as binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => PointFormat::Csv,
            _ => PointFormat::Binary,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CoresetError::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CoresetError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CoresetError::io(path, e))
}

fn csv_error(row: usize, e: csv::Error) -> CoresetError {
    CoresetError::Parse {
        row,
        message: e.to_string(),
    }
}

fn parse_float(s: &str, row: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| CoresetError::Parse {
        row,
        message: format!("{s:?}: {e}"),
    })
}

fn coordinate_header(fields: &[&str]) -> bool {
    fields.iter().enumerate().all(|(i, h)| h.trim() == format!("x{}", i + 1))
}

/// Parses point CSV text.
pub fn parse_points_csv<R: Read>(reader: R) -> Result<RawPoints> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| CoresetError::MalformedHeader(e.to_string()))?.clone();
    let fields: Vec<&str> = header.iter().collect();
    let weighted = fields.last().map(|h| h.trim()) == Some("weight");
    let dim = fields.len() - usize::from(weighted);
    if dim == 0 || !coordinate_header(&fields[..dim]) {
        return Err(CoresetError::MalformedHeader(format!(
            "expected x1..xd[,weight], found {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        if rec.len() != fields.len() {
            return Err(CoresetError::Parse {
                row,
                message: format!("expected {} fields, found {}", fields.len(), rec.len()),
            });
        }
        for t in 0..dim {
            let x = parse_float(&rec[t], row)?;
            if !x.is_finite() {
                return Err(CoresetError::NonFinite { row });
            }
            coords.push(x);
        }
        if weighted {
            let w = parse_float(&rec[dim], row)?;
            if !w.is_finite() {
                return Err(CoresetError::NonFinite { row });
            }
            if w < 0.0 {
                return Err(CoresetError::NegativeWeight { row });
            }
            weights.push(w);
        }
    }
    if coords.is_empty() {
        return Err(CoresetError::Parse {
            row: 0,
            message: "no data rows".into(),
        });
    }
    Ok(RawPoints {
        dim,
        coords,
        weights: weighted.then_some(weights),
    })
}

/// Serializes points to CSV; the weight column is written when `weights` is given.
pub fn points_csv(dim: usize, coords: &[f64], weights: Option<&[f64]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    if weights.is_some() {
        header.push("weight".into());
    }
    w.write_record(&header).map_err(|e| csv_error(0, e))?;
    for (i, row) in coords.chunks_exact(dim).enumerate() {
        let mut rec: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        if let Some(ws) = weights {
            rec.push(format!("{:?}", ws[i]));
        }
        w.write_record(&rec).map_err(|e| csv_error(i + 1, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CoresetError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn parse_points_binary(bytes: &[u8]) -> Result<RawPoints> {
    let bad = |m: &str| CoresetError::Format(m.to_string());
    if bytes.len() < 14 || &bytes[..5] != POINTS_MAGIC {
        return Err(bad("missing CSPS1 header"));
    }
    let flags = bytes[5];
    if flags & !1 != 0 {
        return Err(bad("unknown flag bits"));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let weighted = flags & 1 == 1;
    let count = n * d + if weighted { n } else { 0 };
    if n == 0 || d == 0 || bytes.len() != 14 + 8 * count {
        return Err(bad("payload size does not match the header"));
    }
    let values: Vec<f64> = bytes[14..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (coords, rest) = values.split_at(n * d);
    if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
        return Err(CoresetError::NonFinite { row: i / d + 1 });
    }
    if let Some(i) = rest.iter().position(|w| !w.is_finite()) {
        return Err(CoresetError::NonFinite { row: i + 1 });
    }
    if let Some(i) = rest.iter().position(|w| *w < 0.0) {
        return Err(CoresetError::NegativeWeight { row: i + 1 });
    }
    Ok(RawPoints {
        dim: d,
        coords: coords.to_vec(),
        weights: weighted.then(|| rest.to_vec()),
    })
}

pub fn points_binary(dim: usize, coords: &[f64], weights: Option<&[f64]>) -> Result<Vec<u8>> {
    let n = coords.len() / dim;
    let n32 = u32::try_from(n).map_err(|_| CoresetError::invalid("too many points for the binary format"))?;
    let d32 = u32::try_from(dim).map_err(|_| CoresetError::invalid("dimension too large for the binary format"))?;
    let mut out = Vec::with_capacity(14 + 8 * (coords.len() + n));
    out.extend_from_slice(POINTS_MAGIC);
    out.push(u8::from(weights.is_some()));
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&d32.to_le_bytes());
    for x in coords.iter().chain(weights.unwrap_or(&[])) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

/// Reads raw (possibly real-weighted) points.
pub fn load_raw_points(path: &Path, format: PointFormat) -> Result<RawPoints> {
    let bytes = read_file(path)?;
    match format {
        PointFormat::Csv => parse_points_csv(&bytes[..]),
        PointFormat::Binary => parse_points_binary(&bytes),
    }
}

/// Reads points whose weights are positive integers (or absent).
pub fn load_points(path: &Path, format: PointFormat) -> Result<PointSet> {
    let raw = load_raw_points(path, format)?;
    match &raw.weights {
        None => PointSet::new(raw.coords, raw.dim),
        Some(w) => {
            if let Some(i) = w.iter().position(|x| *x < 1.0 || x.fract() != 0.0) {
                return Err(CoresetError::Parse {
                    row: i + 1,
                    message: format!("weight {} is not a positive integer", w[i]),
                });
            }
            let mult = w.iter().map(|&x| x as u64).collect();
            PointSet::with_multiplicities(raw.coords, raw.dim, mult)
        }
    }
}

/// Writes points; the weight column or block is present only when some
/// multiplicity differs from 1.
pub fn save_points(path: &Path, p: &PointSet, format: PointFormat) -> Result<()> {
    let weights: Option<Vec<f64>> = p
        .multiplicities()
        .iter()
        .any(|&m| m != 1)
        .then(|| p.multiplicities().iter().map(|&m| m as f64).collect());
    save_raw_points(
        path,
        &RawPoints {
            dim: p.dim(),
            coords: p.coords().to_vec(),
            weights,
        },
        format,
    )
}

pub fn save_raw_points(path: &Path, raw: &RawPoints, format: PointFormat) -> Result<()> {
    let w = raw.weights.as_deref();
    match format {
        PointFormat::Csv => write_file(path, points_csv(raw.dim, &raw.coords, w)?.as_bytes()),
        PointFormat::Binary => write_file(path, &points_binary(raw.dim, &raw.coords, w)?),
    }
}

/// Metadata stored next to a coreset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetSidecar {
    pub k: usize,
    pub z: u32,
    pub epsilon: f64,
    pub delta: usize,
    pub delta_capped: bool,
    pub c_delta: f64,
    pub seed: u64,
    pub size: usize,
    pub total_weight: f64,
    pub offset: f64,
    /// Factor applied to the sampled weights to express them in input units.
    pub weight_factor: f64,
    /// Scale applied to real input weights before rounding.
    #[serde(default = "unit")]
    pub input_scale: f64,
    /// Projection the coreset lives under, if any.
    #[serde(default)]
    pub projection: Option<ProjectionSpec>,
    pub groups: Vec<GroupSummary>,
}

fn unit() -> f64 {
    1.0
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn coreset_csv(c: &WeightedCoreset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=c.dim).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    header.push("provenance".into());
    w.write_record(&header).map_err(|e| csv_error(0, e))?;
    for (i, row) in c.points.chunks_exact(c.dim).enumerate() {
        let mut rec: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        rec.push(format!("{:?}", c.weights[i]));
        rec.push(c.provenance[i].to_string());
        w.write_record(&rec).map_err(|e| csv_error(i + 1, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CoresetError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn parse_coreset_csv<R: Read>(reader: R) -> Result<WeightedCoreset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| CoresetError::MalformedHeader(e.to_string()))?.clone();
    let fields: Vec<&str> = header.iter().collect();
    let ok = fields.len() >= 3
        && fields[fields.len() - 2] == "weight"
        && fields[fields.len() - 1] == "provenance"
        && coordinate_header(&fields[..fields.len() - 2]);
    if !ok {
        return Err(CoresetError::MalformedHeader("expected x1..xd,weight,provenance".into()));
    }
    let dim = fields.len() - 2;
    let (mut coords, mut weights, mut prov) = (Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        for t in 0..dim {
            let x = parse_float(&rec[t], row)?;
            if !x.is_finite() {
                return Err(CoresetError::NonFinite { row });
            }
            coords.push(x);
        }
        let w = parse_float(&rec[dim], row)?;
        if !(w >= 0.0) {
            return Err(CoresetError::NegativeWeight { row });
        }
        weights.push(w);
        prov.push(rec[dim + 1].parse::<Provenance>().map_err(|e| CoresetError::Parse {
            row,
            message: e.to_string(),
        })?);
    }
    WeightedCoreset::new(dim, coords, weights, prov)
}

/// Writes the coreset CSV and, if given, its JSON sidecar.
pub fn save_coreset(path: &Path, c: &WeightedCoreset, sidecar: Option<&CoresetSidecar>) -> Result<()> {
    write_file(path, coreset_csv(c)?.as_bytes())?;
    if let Some(meta) = sidecar {
        write_file(&sidecar_path(path), serde_json::to_string_pretty(meta)?.as_bytes())?;
    }
    Ok(())
}

pub fn load_coreset(path: &Path) -> Result<WeightedCoreset> {
    parse_coreset_csv(&read_file(path)?[..])
}

pub fn load_sidecar(path: &Path) -> Result<CoresetSidecar> {
    let p = sidecar_path(path);
    Ok(serde_json::from_slice(&read_file(&p)?)?)
}

/// JSON manifest written next to a discrete instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteManifest {
    pub n_clients: usize,
    pub n_centers: usize,
    pub copies: usize,
    pub z: u32,
    pub seed: u64,
    pub edge_probability: f64,
    pub star: Option<StarParams>,
    pub words: usize,
    /// Edge length of non-short edges, `2^{1/z}`.
    pub long_edge: f64,
    /// Surrogate distance between copies, when star-composed.
    pub cross_copy_distance: Option<f64>,
}

pub fn discrete_manifest(inst: &DiscreteInstance) -> DiscreteManifest {
    DiscreteManifest {
        n_clients: inst.n_clients,
        n_centers: inst.n_centers,
        copies: inst.copies(),
        z: inst.z,
        seed: inst.seed,
        edge_probability: EDGE_PROBABILITY,
        star: inst.star,
        words: inst.raw_bits().len(),
        long_edge: 2f64.powf(1.0 / inst.z as f64),
        cross_copy_distance: inst.star.map(|_| inst.cross_copy_distance()),
    }
}

pub fn discrete_binary(inst: &DiscreteInstance) -> Result<Vec<u8>> {
    let to32 = |v: usize| u32::try_from(v).map_err(|_| CoresetError::invalid("instance too large for the binary format"));
    let bits = inst.raw_bits();
    let mut out = Vec::with_capacity(29 + 8 * bits.len());
    out.extend_from_slice(DISCRETE_MAGIC);
    out.extend_from_slice(&to32(inst.n_clients)?.to_le_bytes());
    out.extend_from_slice(&to32(inst.n_centers)?.to_le_bytes());
    out.extend_from_slice(&to32(inst.copies())?.to_le_bytes());
    out.extend_from_slice(&inst.z.to_le_bytes());
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    for w in bits {
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}

pub fn parse_discrete(bytes: &[u8], manifest: &DiscreteManifest) -> Result<DiscreteInstance> {
    let bad = |m: &str| CoresetError::Format(m.to_string());
    if bytes.len() < 29 || &bytes[..5] != DISCRETE_MAGIC {
        return Err(bad("missing CSDI1 header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (n_clients, n_centers, copies, z) = (u32_at(5), u32_at(9), u32_at(13), u32_at(17) as u32);
    let words = u64::from_le_bytes(bytes[21..29].try_into().unwrap()) as usize;
    if bytes.len() != 29 + 8 * words {
        return Err(bad("payload size does not match the header"));
    }
    if (n_clients, n_centers, copies, z) != (manifest.n_clients, manifest.n_centers, manifest.copies, manifest.z) {
        return Err(bad("binary header disagrees with the manifest"));
    }
    let bits = bytes[29..]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DiscreteInstance::from_parts(n_clients, n_centers, z, manifest.seed, manifest.star, bits)
}

/// Writes the instance to `path` and its manifest to `path` with extension `.json`.
pub fn save_discrete(path: &Path, inst: &DiscreteInstance) -> Result<()> {
    write_file(path, &discrete_binary(inst)?)?;
    write_file(&sidecar_path(path), serde_json::to_string_pretty(&discrete_manifest(inst))?.as_bytes())
}

pub fn load_discrete(path: &Path) -> Result<DiscreteInstance> {
    let manifest: DiscreteManifest = serde_json::from_slice(&read_file(&sidecar_path(path))?)?;
    parse_discrete(&read_file(path)?, &manifest)
}

pub fn solutions_csv(solutions: &[Solution]) -> Result<String> {
    let dim = solutions.first().map_or(0, |s| s.dim());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["solution".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(|e| csv_error(0, e))?;
    for (j, s) in solutions.iter().enumerate() {
        if s.dim() != dim {
            return Err(CoresetError::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        for c in s.centers() {
            let mut rec = vec![j.to_string()];
            rec.extend(c.iter().map(|x| format!("{x:?}")));
            w.write_record(&rec).map_err(|e| csv_error(j + 1, e))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CoresetError::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

/// Rows sharing a `solution` id form one solution; ids must be contiguous from 0.
pub fn parse_solutions_csv<R: Read>(reader: R) -> Result<Vec<Solution>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| CoresetError::MalformedHeader(e.to_string()))?.clone();
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 2 || fields[0] != "solution" || !coordinate_header(&fields[1..]) {
        return Err(CoresetError::MalformedHeader("expected solution,x1..xd".into()));
    }
    let dim = fields.len() - 1;
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(row, e))?;
        let id: usize = rec[0].trim().parse().map_err(|_| CoresetError::Parse {
            row,
            message: format!("bad solution id {:?}", &rec[0]),
        })?;
        if id > groups.len() {
            return Err(CoresetError::Parse {
                row,
                message: "solution ids must be contiguous".into(),
            });
        }
        if id == groups.len() {
            groups.push(Vec::new());
        }
        for t in 0..dim {
            let x = parse_float(&rec[t + 1], row)?;
            if !x.is_finite() {
                return Err(CoresetError::NonFinite { row });
            }
            groups[id].push(x);
        }
    }
    groups.into_iter().map(|c| Solution::new(c, dim)).collect()
}

pub fn save_solutions(path: &Path, solutions: &[Solution]) -> Result<()> {
    write_file(path, solutions_csv(solutions)?.as_bytes())
}

pub fn load_solutions(path: &Path) -> Result<Vec<Solution>> {
    parse_solutions_csv(&read_file(path)?[..])
}

/// Writes any serializable value as pretty JSON.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, serde_json::to_string_pretty(value)?.as_bytes())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text.as_bytes())
}
