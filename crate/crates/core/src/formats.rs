//! On-disk containers: RDOD datasets, RDOW parameter checkpoints, the
//! TOML architecture sidecar that makes a checkpoint self-describing,
//! and a CSV mirror of datasets for inspection.
//!
//! Both binary formats are little-endian throughout. RDOW holds
//! name + extents + payload per parameter and is read until EOF;
//! RDOD embeds provenance so a file regenerates bit-identically.

use crate::error::{Error, Result};
use crate::models::{
    AnyModel, DeepOnetModel, FnoModel, ModelKind, Quadrature, RdoConfig, RdoModel,
};
use crate::params::ParamStore;
use crate::pdegen::{Dataset, ResBlock};
use crate::tensor::{Activation, Tensor};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const RDOW_MAGIC: &[u8; 4] = b"RDOW";
pub const RDOW_VERSION: u32 = 1;
pub const RDOD_MAGIC: &[u8; 4] = b"RDOD";
pub const RDOD_VERSION: u32 = 1;

// ── Little-endian primitives ────────────────────────────────────────

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_str(w: &mut impl Write, s: &str) -> Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_f64_vec(r: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn get_str(r: &mut impl Read) -> Result<String> {
    let len = get_u32(r)? as usize;
    if len > 1 << 24 {
        return Err(Error::Format(format!("unreasonable string length {len}")));
    }
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|e| Error::Format(format!("invalid UTF-8 string: {e}")))
}

fn check_magic(r: &mut impl Read, magic: &[u8; 4], what: &str) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format(format!("not a {what} file (bad magic)")));
    }
    Ok(())
}

// ── Parameter checkpoints (RDOW) ────────────────────────────────────

pub fn save_params(store: &ParamStore, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(RDOW_MAGIC)?;
    put_u32(&mut w, RDOW_VERSION)?;
    for (name, t) in store.iter() {
        put_str(&mut w, name)?;
        put_u32(&mut w, t.rank() as u32)?;
        for &e in t.shape() {
            put_u64(&mut w, e as u64)?;
        }
        for &v in t.data() {
            put_f64(&mut w, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<Vec<(String, Tensor)>> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, RDOW_MAGIC, "parameter checkpoint")?;
    let version = get_u32(&mut r)?;
    if version != RDOW_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let mut records = Vec::new();
    loop {
        // Records run until EOF; a clean boundary before a name means
        // we are done.
        let mut peek = [0u8; 4];
        match r.read_exact(&mut peek) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let name_len = u32::from_le_bytes(peek) as usize;
        if name_len > 1 << 24 {
            return Err(Error::Format(format!("unreasonable name length {name_len}")));
        }
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|e| Error::Format(format!("invalid parameter name: {e}")))?;
        let rank = get_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(get_u64(&mut r)? as usize);
        }
        let len: usize = shape.iter().product();
        let data = get_f64_vec(&mut r, len)?;
        records.push((name, Tensor::new(shape, data)?));
    }
    Ok(records)
}

/// Copy checkpoint records into an existing store by name; every
/// record must match a parameter and every parameter must be covered.
pub fn apply_params(store: &mut ParamStore, records: &[(String, Tensor)]) -> Result<()> {
    if records.len() != store.len() {
        return Err(Error::Format(format!(
            "checkpoint has {} parameters, model has {}",
            records.len(),
            store.len()
        )));
    }
    for (name, t) in records {
        let id = store
            .find(name)
            .ok_or_else(|| Error::Format(format!("checkpoint parameter '{name}' not in model")))?;
        let dst = store.value_mut(id);
        if dst.shape() != t.shape() {
            return Err(Error::Format(format!(
                "parameter '{}' shape {:?} does not match checkpoint {:?}",
                name,
                dst.shape(),
                t.shape()
            )));
        }
        dst.data_mut().copy_from_slice(t.data());
    }
    Ok(())
}

// ── Architecture sidecar ────────────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RdoArch {
    pub t1: usize,
    pub t2: usize,
    pub modes: usize,
    pub d_phi: usize,
    pub p: usize,
    pub trunk: Vec<usize>,
    pub activation: String,
    pub quadrature: String,
    pub d_a: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeepOnetArch {
    pub branch: Vec<usize>,
    pub trunk: Vec<usize>,
    pub activation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FnoArch {
    pub width: usize,
    pub modes: usize,
    pub layers: usize,
    pub activation: String,
    pub d_a: usize,
}

fn default_ratios() -> Vec<f64> {
    vec![0.6, 0.2, 0.2]
}

/// Everything needed to rebuild a model before loading its weights.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ArchFile {
    pub kind: String,
    pub experiment: String,
    pub train_resolution: usize,
    /// Split ratios the model was trained with, so evaluation can
    /// reproduce the same test partition.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rdo: Option<RdoArch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deeponet: Option<DeepOnetArch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fno: Option<FnoArch>,
}

impl ArchFile {
    pub fn from_model(model: &AnyModel, experiment: &str, train_resolution: usize) -> Self {
        let mut arch = ArchFile {
            kind: model.kind().name().to_string(),
            experiment: experiment.to_string(),
            train_resolution,
            ratios: default_ratios(),
            rdo: None,
            deeponet: None,
            fno: None,
        };
        match model {
            AnyModel::Rdo(m) => {
                arch.rdo = Some(RdoArch {
                    t1: m.config.t1,
                    t2: m.config.t2,
                    modes: m.config.modes,
                    d_phi: m.config.d_phi,
                    p: m.config.p,
                    trunk: m.config.trunk_widths.clone(),
                    activation: m.config.activation.name().to_string(),
                    quadrature: m.config.quadrature.name().to_string(),
                    d_a: m.config.d_a,
                });
            }
            AnyModel::DeepOnet(m) => {
                arch.deeponet = Some(DeepOnetArch {
                    branch: m.branch_widths.clone(),
                    trunk: m.trunk_widths.clone(),
                    activation: m.activation.name().to_string(),
                });
            }
            AnyModel::Fno(m) => {
                arch.fno = Some(FnoArch {
                    width: m.width,
                    modes: m.modes,
                    layers: m.layers,
                    activation: m.activation.name().to_string(),
                    d_a: m.d_a,
                });
            }
        }
        arch
    }

    /// Fresh model with the recorded architecture, initialized from
    /// `seed` (pass anything when a checkpoint will overwrite it).
    pub fn build_model(&self, seed: u64) -> Result<AnyModel> {
        match ModelKind::parse(&self.kind)? {
            ModelKind::Rdo => {
                let a = self
                    .rdo
                    .as_ref()
                    .ok_or_else(|| Error::Format("rdo section missing".into()))?;
                let config = RdoConfig {
                    t1: a.t1,
                    t2: a.t2,
                    modes: a.modes,
                    d_phi: a.d_phi,
                    p: a.p,
                    trunk_widths: a.trunk.clone(),
                    activation: Activation::parse(&a.activation)?,
                    quadrature: Quadrature::parse(&a.quadrature)?,
                    d_a: a.d_a,
                };
                Ok(AnyModel::Rdo(RdoModel::new(config, seed)?))
            }
            ModelKind::DeepOnet => {
                let a = self
                    .deeponet
                    .as_ref()
                    .ok_or_else(|| Error::Format("deeponet section missing".into()))?;
                Ok(AnyModel::DeepOnet(DeepOnetModel::new(
                    &a.branch,
                    &a.trunk,
                    Activation::parse(&a.activation)?,
                    seed,
                )?))
            }
            ModelKind::Fno => {
                let a = self
                    .fno
                    .as_ref()
                    .ok_or_else(|| Error::Format("fno section missing".into()))?;
                Ok(AnyModel::Fno(FnoModel::new(
                    a.width,
                    a.modes,
                    a.layers,
                    Activation::parse(&a.activation)?,
                    a.d_a,
                    seed,
                )?))
            }
        }
    }
}

fn arch_path(weights_path: &Path) -> std::path::PathBuf {
    let mut s = weights_path.as_os_str().to_os_string();
    s.push(".arch");
    std::path::PathBuf::from(s)
}

/// Weights to `path`, architecture to `path`.arch.
pub fn save_model(
    model: &AnyModel,
    experiment: &str,
    train_resolution: usize,
    ratios: &[f64],
    path: &Path,
) -> Result<()> {
    use crate::models::OperatorModel;
    let mut arch = ArchFile::from_model(model, experiment, train_resolution);
    arch.ratios = ratios.to_vec();
    let text = toml::to_string(&arch).map_err(|e| Error::Format(format!("arch encode: {e}")))?;
    std::fs::write(arch_path(path), text)?;
    save_params(model.store(), path)
}

pub fn load_model(path: &Path) -> Result<(AnyModel, ArchFile)> {
    use crate::models::OperatorModel;
    let text = std::fs::read_to_string(arch_path(path))?;
    let arch: ArchFile =
        toml::from_str(&text).map_err(|e| Error::Format(format!("arch decode: {e}")))?;
    let mut model = arch.build_model(0)?;
    let records = load_params(path)?;
    apply_params(model.store_mut(), &records)?;
    Ok((model, arch))
}

// ── Datasets (RDOD) ─────────────────────────────────────────────────

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(RDOD_MAGIC)?;
    put_u32(&mut w, RDOD_VERSION)?;
    put_str(&mut w, &ds.experiment)?;
    put_u64(&mut w, ds.seed)?;
    put_str(&mut w, &ds.provenance)?;
    put_f64(&mut w, ds.lo)?;
    put_f64(&mut w, ds.hi)?;
    put_u32(&mut w, ds.blocks.len() as u32)?;
    for b in &ds.blocks {
        put_u32(&mut w, b.resolution as u32)?;
        put_u32(&mut w, b.inputs.len() as u32)?;
        put_u32(&mut w, b.n_queries() as u32)?;
        put_u32(&mut w, b.d2 as u32)?;
        for row in &b.inputs {
            if row.len() != b.resolution {
                return Err(Error::Format("input row length mismatch".into()));
            }
            for &v in row {
                put_f64(&mut w, v)?;
            }
        }
        for &v in &b.coords {
            put_f64(&mut w, v)?;
        }
        for row in &b.targets {
            if row.len() != b.n_queries() {
                return Err(Error::Format("target row length mismatch".into()));
            }
            for &v in row {
                put_f64(&mut w, v)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, RDOD_MAGIC, "dataset")?;
    let version = get_u32(&mut r)?;
    if version != RDOD_VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let experiment = get_str(&mut r)?;
    let seed = get_u64(&mut r)?;
    let provenance = get_str(&mut r)?;
    let lo = get_f64(&mut r)?;
    let hi = get_f64(&mut r)?;
    let n_blocks = get_u32(&mut r)? as usize;
    let mut blocks = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        let resolution = get_u32(&mut r)? as usize;
        let n = get_u32(&mut r)? as usize;
        let n_queries = get_u32(&mut r)? as usize;
        let d2 = get_u32(&mut r)? as usize;
        if resolution == 0 || d2 == 0 {
            return Err(Error::Format("zero block extent".into()));
        }
        let mut inputs = Vec::with_capacity(n);
        for _ in 0..n {
            inputs.push(get_f64_vec(&mut r, resolution)?);
        }
        let coords = get_f64_vec(&mut r, n_queries * d2)?;
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            targets.push(get_f64_vec(&mut r, n_queries)?);
        }
        blocks.push(ResBlock {
            resolution,
            d2,
            inputs,
            coords,
            targets,
        });
    }
    Ok(Dataset {
        experiment,
        seed,
        provenance,
        lo,
        hi,
        blocks,
    })
}

// ── CSV mirror ──────────────────────────────────────────────────────

/// Long-form CSV of every stored value, for eyeballing and spreadsheet
/// import. Columns: experiment, resolution, role, sample, idx, value.
/// Coordinates are sample-independent, so their sample field is empty.
pub fn export_dataset_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "experiment,resolution,role,sample,idx,value")?;
    for b in &ds.blocks {
        for (i, row) in b.inputs.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(w, "{},{},input,{},{},{}", ds.experiment, b.resolution, i, j, fmt_f64(*v))?;
            }
        }
        for (j, v) in b.coords.iter().enumerate() {
            let (q, axis) = (j / b.d2, j % b.d2);
            writeln!(
                w,
                "{},{},coord{},,{},{}",
                ds.experiment,
                b.resolution,
                axis,
                q,
                fmt_f64(*v)
            )?;
        }
        for (i, row) in b.targets.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(w, "{},{},target,{},{},{}", ds.experiment, b.resolution, i, j, fmt_f64(*v))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Shortest decimal that round-trips the exact f64 (Rust's `{}` float
/// formatting contract), so CSV exports are value-faithful.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
