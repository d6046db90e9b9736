//! Declarative JSON configuration for spaces, models, and walks.
//!
//! One schema serves every CLI subcommand through the discriminating `kind`
//! field. Parsing is two-phase: the kind is read first, then the remaining
//! fields are deserialized into the matching parameter struct, so that type
//! and missing-field errors carry the precise JSON path of the offending
//! field. Semantic validation happens eagerly in `build`, so a config either
//! yields working objects or a precise error before any computation starts.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{PAdicModel, TwoExponentModel};
use crate::rules::{SequenceRule, SlowlyVarying};
use crate::sinf::SymmetricModel;
use crate::space::{CaseKind, EigenvalueProfile, HomogeneousSpace};
use crate::walk::{GroupKind, StepDistribution, TailPolicy, WalkConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PadicParams {
    pub p: u64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PadicMixedParams {
    pub p: u64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PadicScanParams {
    pub alpha: f64,
    pub ps: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SinfParams {
    pub alpha: f64,
    pub phi: SlowlyVarying,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_tilde: Option<SlowlyVarying>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpaceParams {
    pub case_kind: CaseKind,
    pub degree_rule: SequenceRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_rule: Option<SequenceRule>,
    pub profile: ProfileConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct WalkParams {
    pub group: GroupKind,
    pub step: StepConfig,
    pub horizon: u32,
    pub samples: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

/// A parsed configuration document.
#[derive(Clone, Debug)]
pub enum ModelConfig {
    Padic(PadicParams),
    PadicMixed(PadicMixedParams),
    PadicScan(PadicScanParams),
    Sinf(SinfParams),
    Space(SpaceParams),
    Walk(WalkParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase"
)]
pub enum ProfileConfig {
    /// λ_k = 1/r_k from the space's distance rule.
    StandardFromMetric,
    /// Entrywise power of the standard profile.
    Fractional { alpha: f64 },
    /// Explicit eigenvalue rule.
    Explicit { rule: SequenceRule },
}

impl ProfileConfig {
    pub fn build(&self, space: &HomogeneousSpace) -> Result<EigenvalueProfile> {
        match self {
            ProfileConfig::StandardFromMetric => EigenvalueProfile::standard_from_metric(space),
            ProfileConfig::Fractional { alpha } => {
                EigenvalueProfile::standard_from_metric(space)?.fractional(*alpha)
            }
            ProfileConfig::Explicit { rule } => Ok(EigenvalueProfile::explicit(rule.clone())),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase"
)]
pub enum StepConfig {
    /// Explicit weights, normalized on construction.
    Explicit { weights: Vec<f64> },
    /// Weights induced by the p-adic fractional profile.
    FromPadicProfile {
        p: u64,
        alpha: f64,
        truncation: usize,
        #[serde(default)]
        policy: TailPolicy,
        #[serde(default = "default_tail_tol")]
        tail_tol: f64,
    },
    /// Factorial-decay weights of a symmetric-group model.
    FromSymmetricWeights {
        alpha: f64,
        #[serde(default = "default_phi")]
        phi_tilde: SlowlyVarying,
        truncation: usize,
    },
}

fn default_tail_tol() -> f64 {
    1e-9
}

fn default_phi() -> SlowlyVarying {
    SlowlyVarying::ONE
}

impl StepConfig {
    pub fn build(&self) -> Result<StepDistribution> {
        match self {
            StepConfig::Explicit { weights } => StepDistribution::from_weights(weights),
            StepConfig::FromPadicProfile {
                p,
                alpha,
                truncation,
                policy,
                tail_tol,
            } => {
                let profile = PAdicModel::new(*p, *alpha)?.profile();
                StepDistribution::from_profile(&profile, *truncation, *policy, *tail_tol)
            }
            StepConfig::FromSymmetricWeights {
                alpha,
                phi_tilde,
                truncation,
            } => {
                let model = SymmetricModel::new(*alpha, SlowlyVarying::ONE, *phi_tilde)?;
                StepDistribution::from_weights(&model.step_weight_table(*truncation))
            }
        }
    }
}

fn payload<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| Error::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Parses a config document. Syntax errors carry line/column, field errors
/// carry the JSON path.
pub fn parse_model(input: &str) -> Result<ModelConfig> {
    let mut value: serde_json::Value = serde_json::from_str(input).map_err(|e| Error::Json {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let object = value.as_object_mut().ok_or_else(|| Error::Json {
        path: ".".into(),
        message: "config document must be a JSON object".into(),
    })?;
    let kind = match object.remove("kind") {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => {
            return Err(Error::Json {
                path: "kind".into(),
                message: format!("expected a string, got {other}"),
            })
        }
        None => {
            return Err(Error::Json {
                path: "kind".into(),
                message: "missing discriminating field".into(),
            })
        }
    };
    match kind.as_str() {
        "padic" => Ok(ModelConfig::Padic(payload(value)?)),
        "padic-mixed" => Ok(ModelConfig::PadicMixed(payload(value)?)),
        "padic-scan" => Ok(ModelConfig::PadicScan(payload(value)?)),
        "sinf" => Ok(ModelConfig::Sinf(payload(value)?)),
        "space" => Ok(ModelConfig::Space(payload(value)?)),
        "walk" => Ok(ModelConfig::Walk(payload(value)?)),
        other => Err(Error::Json {
            path: "kind".into(),
            message: format!(
                "unknown kind `{other}`; expected one of padic, padic-mixed, padic-scan, sinf, space, walk"
            ),
        }),
    }
}

/// FNV-1a hash of the raw config bytes; echoed into CLI outputs so artifacts
/// can be traced back to the exact configuration.
pub fn config_hash(input: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in input.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Everything a computational subcommand might need from a model config.
pub enum BuiltModel {
    Padic(PAdicModel),
    PadicMixed(TwoExponentModel),
    PadicScan {
        alpha: f64,
        ps: Vec<u64>,
    },
    Sinf(SymmetricModel),
    Space {
        space: HomogeneousSpace,
        profile: EigenvalueProfile,
    },
    Walk(WalkConfig),
}

impl ModelConfig {
    /// Eager semantic validation: builds every object the config describes.
    pub fn build(&self) -> Result<BuiltModel> {
        match self {
            ModelConfig::Padic(p) => Ok(BuiltModel::Padic(match p.c {
                Some(c) => PAdicModel::with_scale(p.p, p.alpha, c)?,
                None => PAdicModel::new(p.p, p.alpha)?,
            })),
            ModelConfig::PadicMixed(p) => Ok(BuiltModel::PadicMixed(
                TwoExponentModel::sum_of_fractional(p.p, p.alpha, p.beta)?,
            )),
            ModelConfig::PadicScan(p) => {
                if p.ps.is_empty() {
                    return Err(Error::config("scan needs at least one p"));
                }
                for &q in &p.ps {
                    PAdicModel::new(q, p.alpha)?;
                }
                Ok(BuiltModel::PadicScan {
                    alpha: p.alpha,
                    ps: p.ps.clone(),
                })
            }
            ModelConfig::Sinf(p) => Ok(BuiltModel::Sinf(SymmetricModel::new(
                p.alpha,
                p.phi,
                p.phi_tilde.unwrap_or(SlowlyVarying::ONE),
            )?)),
            ModelConfig::Space(p) => {
                let space = HomogeneousSpace::new(
                    p.case_kind,
                    p.degree_rule.clone(),
                    p.distance_rule.clone(),
                )?;
                let profile = p.profile.build(&space)?;
                Ok(BuiltModel::Space { space, profile })
            }
            ModelConfig::Walk(p) => {
                p.group.space()?;
                Ok(BuiltModel::Walk(WalkConfig {
                    group: p.group,
                    step: p.step.build()?,
                    horizon: p.horizon,
                    samples: p.samples,
                    seed: p.seed,
                    workers: p.workers,
                }))
            }
        }
    }
}
