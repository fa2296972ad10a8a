//! Sectioned TOML run configuration: [experiment], [model], [train].
//!
//! Every hyperparameter has an experiment-aware default, so a minimal
//! file is just an experiment id and a model kind; any key can be
//! overridden, and unknown keys are rejected to catch typos. Resolving
//! a file produces a ready-to-build architecture plus the training
//! schedule.

use crate::error::{Error, Result};
use crate::formats::{ArchFile, DeepOnetArch, FnoArch, RdoArch};
use crate::harness::train::TrainConfig;
use crate::models::{AnyModel, ModelKind, Quadrature};
use crate::tensor::Activation;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// "sbvp", "darcy_tri", or "burgers".
    pub id: String,
    /// Dataset file the run expects; informational, the CLI's --data
    /// flag is what actually selects the file.
    pub data: Option<String>,
    /// Resolutions evaluation will request; checked against the
    /// dataset at train time so typos surface before hours of work.
    pub test_resolutions: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "rdo", "deeponet", or "fno".
    pub kind: String,
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub modes: Option<usize>,
    pub d_phi: Option<usize>,
    pub p: Option<usize>,
    pub trunk: Option<Vec<usize>>,
    pub branch: Option<Vec<usize>>,
    pub width: Option<usize>,
    pub layers: Option<usize>,
    pub activation: Option<String>,
    pub quadrature: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub lr_decay: Option<f64>,
    pub lr_epochs: Option<usize>,
    pub train_resolution: Option<usize>,
    pub seed: Option<u64>,
    pub early_stopping: Option<bool>,
    pub ratios: Option<Vec<f64>>,
}

/// Per-experiment defaults; rdo is (t1, t2, modes, d_phi, p, trunk).
struct ExperimentDefaults {
    query_dim: usize,
    train_resolution: usize,
    test_resolutions: &'static [usize],
    epochs: usize,
    rdo: (usize, usize, usize, usize, usize, &'static [usize]),
    deeponet_tail: &'static [usize],
    deeponet_trunk: &'static [usize],
}

static SBVP_DEFAULTS: ExperimentDefaults = ExperimentDefaults {
    query_dim: 1,
    train_resolution: 33,
    test_resolutions: &[33, 65, 129],
    epochs: 500,
    rdo: (3, 1, 16, 32, 100, &[1, 100, 100, 100]),
    deeponet_tail: &[100, 100, 100],
    deeponet_trunk: &[1, 100, 100, 100],
};

static DARCY_DEFAULTS: ExperimentDefaults = ExperimentDefaults {
    query_dim: 2,
    train_resolution: 51,
    test_resolutions: &[51, 101, 201],
    epochs: 500,
    rdo: (1, 1, 26, 64, 64, &[2, 128, 128, 64]),
    deeponet_tail: &[128, 128, 100],
    deeponet_trunk: &[2, 128, 128, 128, 100],
};

static BURGERS_DEFAULTS: ExperimentDefaults = ExperimentDefaults {
    query_dim: 2,
    train_resolution: 41,
    test_resolutions: &[41, 81, 161],
    epochs: 300,
    rdo: (3, 1, 8, 32, 128, &[2, 128, 128, 128]),
    deeponet_tail: &[128, 128, 128],
    deeponet_trunk: &[2, 128, 128, 128],
};

fn defaults_for(id: &str) -> Result<&'static ExperimentDefaults> {
    match id {
        "sbvp" => Ok(&SBVP_DEFAULTS),
        "darcy_tri" => Ok(&DARCY_DEFAULTS),
        "burgers" => Ok(&BURGERS_DEFAULTS),
        other => Err(Error::Config(format!(
            "unknown experiment '{other}' (expected sbvp, darcy_tri, or burgers)"
        ))),
    }
}

/// A fully-resolved run: what to build, how to train it, and which
/// resolutions to evaluate.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub experiment_id: String,
    pub data: Option<String>,
    pub test_resolutions: Vec<usize>,
    pub arch: ArchFile,
    pub train: TrainConfig,
}

impl ResolvedConfig {
    /// Model with the resolved architecture, initialized from the
    /// training seed.
    pub fn build_model(&self) -> Result<AnyModel> {
        self.arch.build_model(self.train.seed)
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let d = defaults_for(&self.experiment.id)?;

        let train = TrainConfig {
            epochs: self.train.epochs.unwrap_or(d.epochs),
            batch_size: self.train.batch_size.unwrap_or(20),
            lr: self.train.lr.unwrap_or(1e-3),
            lr_decay: self.train.lr_decay.unwrap_or(0.5),
            lr_epochs: self.train.lr_epochs.unwrap_or(100),
            train_resolution: self.train.train_resolution.unwrap_or(d.train_resolution),
            seed: self.train.seed.unwrap_or(1),
            early_stopping: self.train.early_stopping.unwrap_or(true),
            ratios: self.train.ratios.clone().unwrap_or_else(|| vec![0.6, 0.2, 0.2]),
        };
        train.validate()?;
        if train.ratios.len() != 3 || train.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config(format!(
                "ratios must be three positive numbers (train:val:test), got {:?}",
                train.ratios
            )));
        }

        let m = &self.model;
        let kind = ModelKind::parse(&m.kind)?;
        let activation = m.activation.clone().unwrap_or_else(|| "gelu".to_string());
        Activation::parse(&activation)?;
        let quadrature = m.quadrature.clone().unwrap_or_else(|| "trapezoid".to_string());
        Quadrature::parse(&quadrature)?;

        let reject = |fields: &[(&str, bool)]| -> Result<()> {
            for (name, set) in fields {
                if *set {
                    return Err(Error::Config(format!(
                        "key '{name}' does not apply to a '{}' model",
                        m.kind
                    )));
                }
            }
            Ok(())
        };

        let mut arch = ArchFile {
            kind: m.kind.clone(),
            experiment: self.experiment.id.clone(),
            train_resolution: train.train_resolution,
            ratios: train.ratios.clone(),
            rdo: None,
            deeponet: None,
            fno: None,
        };
        match kind {
            ModelKind::Rdo => {
                reject(&[
                    ("branch", m.branch.is_some()),
                    ("width", m.width.is_some()),
                    ("layers", m.layers.is_some()),
                ])?;
                let (t1, t2, modes, d_phi, p_default, trunk_default) = d.rdo;
                let trunk = m.trunk.clone().unwrap_or_else(|| trunk_default.to_vec());
                if trunk.first() != Some(&d.query_dim) {
                    return Err(Error::Config(format!(
                        "trunk input width must equal the query dimension {} for {}, got {:?}",
                        d.query_dim, self.experiment.id, trunk
                    )));
                }
                // p defaults to the trunk output so an overridden trunk
                // stays consistent without repeating yourself.
                let p = m.p.unwrap_or(if m.trunk.is_some() { *trunk.last().unwrap() } else { p_default });
                arch.rdo = Some(RdoArch {
                    t1: m.t1.unwrap_or(t1),
                    t2: m.t2.unwrap_or(t2),
                    modes: m.modes.unwrap_or(modes),
                    d_phi: m.d_phi.unwrap_or(d_phi),
                    p,
                    trunk,
                    activation,
                    quadrature,
                    d_a: 1,
                });
            }
            ModelKind::DeepOnet => {
                reject(&[
                    ("t1", m.t1.is_some()),
                    ("t2", m.t2.is_some()),
                    ("modes", m.modes.is_some()),
                    ("d_phi", m.d_phi.is_some()),
                    ("p", m.p.is_some()),
                    ("width", m.width.is_some()),
                    ("layers", m.layers.is_some()),
                    ("quadrature", m.quadrature.is_some()),
                ])?;
                let branch = m.branch.clone().unwrap_or_else(|| {
                    let mut b = vec![train.train_resolution];
                    b.extend_from_slice(d.deeponet_tail);
                    b
                });
                let trunk = m.trunk.clone().unwrap_or_else(|| d.deeponet_trunk.to_vec());
                if branch.first() != Some(&train.train_resolution) {
                    return Err(Error::Config(format!(
                        "deeponet branch input width {:?} must equal the train resolution {}",
                        branch.first(),
                        train.train_resolution
                    )));
                }
                if trunk.first() != Some(&d.query_dim) {
                    return Err(Error::Config(format!(
                        "trunk input width must equal the query dimension {} for {}, got {:?}",
                        d.query_dim, self.experiment.id, trunk
                    )));
                }
                arch.deeponet = Some(DeepOnetArch { branch, trunk, activation });
            }
            ModelKind::Fno => {
                reject(&[
                    ("t1", m.t1.is_some()),
                    ("t2", m.t2.is_some()),
                    ("d_phi", m.d_phi.is_some()),
                    ("p", m.p.is_some()),
                    ("trunk", m.trunk.is_some()),
                    ("branch", m.branch.is_some()),
                    ("quadrature", m.quadrature.is_some()),
                ])?;
                arch.fno = Some(FnoArch {
                    width: m.width.unwrap_or(32),
                    modes: m.modes.unwrap_or(16),
                    layers: m.layers.unwrap_or(4),
                    activation,
                    d_a: 1,
                });
            }
        }
        // Run the model-level validators now so a bad combination fails
        // at config time, not after data loading.
        arch.build_model(0)?;

        Ok(ResolvedConfig {
            experiment_id: self.experiment.id.clone(),
            data: self.experiment.data.clone(),
            test_resolutions: self
                .experiment
                .test_resolutions
                .clone()
                .unwrap_or_else(|| d.test_resolutions.to_vec()),
            arch,
            train,
        })
    }
}
