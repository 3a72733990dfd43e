//! Run configuration: a JSON document describing the root system, the walk
//! and the sweep. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use affwalk_core::rootsys::{build_root_system, QParams, RootKind};
use affwalk_core::sphfun::SphericalContext;
use affwalk_core::walk::{build_kernel, Kernel, Step, WalkSpec};
use affwalk_core::LatticePoint;
use serde::{Deserialize, Serialize};

use crate::error::{field, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorName {
    Building,
    Lattice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Root system family letter; building flavor only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub rank: usize,
    /// One value for all roots, or one per simple root.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSection {
    pub mu: Vec<i64>,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    pub steps: Vec<StepSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "N")]
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<u64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(rename = "K", default = "default_k")]
    pub k: f64,
    /// Boundary exponent; fitted when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_k() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub flavor: FlavorName,
    pub system: SystemSection,
    pub walk: WalkSection,
    #[serde(default)]
    pub grid: GridSection,
    pub sweep: SweepSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> CliResult<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field against the preconditions of the numerical code.
    pub fn validate(&self) -> CliResult<()> {
        let r = self.system.rank;
        if r == 0 {
            return Err(field("system.rank", "must be at least 1"));
        }
        if self.walk.steps.is_empty() {
            return Err(field("walk.steps", "needs at least one step"));
        }
        for (i, s) in self.walk.steps.iter().enumerate() {
            if s.mu.len() != r {
                return Err(field(
                    format!("walk.steps[{i}].mu"),
                    format!("has length {} but system.rank is {r}", s.mu.len()),
                ));
            }
            if !(s.a > 0.0 && s.a.is_finite()) {
                return Err(field(format!("walk.steps[{i}].a"), "must be positive"));
            }
        }
        let total: f64 = self.walk.steps.iter().map(|s| s.a).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(field(
                "walk.steps",
                format!("walk.steps probabilities must sum to 1 (sum is {total})"),
            ));
        }
        match self.flavor {
            FlavorName::Building => {
                let kind = self
                    .system
                    .kind
                    .as_deref()
                    .ok_or_else(|| field("system.kind", "required for the building flavor"))?;
                RootKind::parse(kind).map_err(|e| field("system.kind", e.to_string()))?;
                if self.system.q.len() != 1 && self.system.q.len() != r {
                    return Err(field(
                        "system.q",
                        format!("needs 1 or {r} values, got {}", self.system.q.len()),
                    ));
                }
                if let Some(q) = self.system.q.iter().find(|q| !(**q > 1.0 && q.is_finite())) {
                    return Err(field("system.q", format!("thickness {q} must exceed 1")));
                }
                if let Some(i) = self
                    .walk
                    .steps
                    .iter()
                    .position(|s| s.mu.iter().any(|&x| x < 0))
                {
                    return Err(field(
                        format!("walk.steps[{i}].mu"),
                        "building steps must be dominant coweights",
                    ));
                }
            }
            FlavorName::Lattice => {
                if self.system.kind.is_some() || !self.system.q.is_empty() {
                    return Err(field("system", "kind and q apply to the building flavor only"));
                }
            }
        }
        if self.grid.n < 8 || !self.grid.n.is_multiple_of(2) {
            return Err(field("grid.N", "must be even and at least 8"));
        }
        if self.sweep.n_list.is_empty() || self.sweep.n_list.contains(&0) {
            return Err(field("sweep.n_list", "needs positive step counts"));
        }
        if !(self.sweep.epsilon > 0.0) {
            return Err(field("sweep.epsilon", "must be positive"));
        }
        if !(self.sweep.k > 0.0) {
            return Err(field("sweep.K", "must be positive"));
        }
        if let Some(eta) = self.sweep.eta {
            if !(eta >= 1.0) {
                return Err(field("sweep.eta", "boundary exponent must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "run".into())
    }

    /// The transition kernel described by the config.
    pub fn kernel(&self) -> CliResult<Kernel> {
        let steps: Vec<Step> = self
            .walk
            .steps
            .iter()
            .map(|s| Step {
                mu: LatticePoint(s.mu.clone()),
                weight: s.a,
            })
            .collect();
        let spec = match self.flavor {
            FlavorName::Lattice => WalkSpec::lattice(self.system.rank, steps)?,
            FlavorName::Building => {
                let (kind, named_rank) = RootKind::parse(self.system.kind.as_deref().unwrap_or(""))?;
                if let Some(r) = named_rank.filter(|&r| r != self.system.rank) {
                    return Err(field(
                        "system.kind",
                        format!("names rank {r} but system.rank is {}", self.system.rank),
                    ));
                }
                let rs = build_root_system(kind, self.system.rank)?;
                let q = if self.system.q.len() == 1 {
                    QParams::uniform(&rs, self.system.q[0])?
                } else {
                    QParams::new(&rs, &self.system.q)?
                };
                WalkSpec::building(SphericalContext::new(rs, q)?, steps)?
            }
        };
        Ok(build_kernel(&spec)?)
    }
}

pub fn parse_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json(&text, path)
}

/// The configs shipped in `configs/`.
pub fn shipped() -> Vec<(&'static str, RunConfig)> {
    const FILES: [(&str, &str); 6] = [
        ("tree_q2", include_str!("../configs/tree_q2.json")),
        ("tree_q3", include_str!("../configs/tree_q3.json")),
        ("a2_q2", include_str!("../configs/a2_q2.json")),
        ("z1_simple", include_str!("../configs/z1_simple.json")),
        ("z1_lazy", include_str!("../configs/z1_lazy.json")),
        ("z2_simple", include_str!("../configs/z2_simple.json")),
    ];
    FILES
        .iter()
        .map(|(name, text)| {
            let cfg = RunConfig::from_json(text, Path::new(name)).expect("shipped config is valid");
            (*name, cfg)
        })
        .collect()
}

pub fn shipped_config(name: &str) -> Option<RunConfig> {
    shipped().into_iter().find(|(n, _)| *n == name).map(|(_, c)| c)
}
