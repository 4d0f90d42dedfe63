//! Run configuration: JSON file contents overlaid with command-line flags.

use std::path::PathBuf;

use chainlab_core::chain::{GroupChain, MAX_CHAIN_DEPTH};
use chainlab_core::lattice::is_prime;
use chainlab_core::{FiniteIndexSubgroup, GroupModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: Option<GroupSpec>,
    pub chain: Option<ChainSpec>,
    /// Diagonal finite-index subgroup: `diag(a, b)·Z² × cZ` in the Heisenberg
    /// group, `{(a·x, b·y, c·z)}` in the split extension.
    pub cover: Option<CoverSpec>,
    pub depth: Option<usize>,
    pub radii: Option<Vec<usize>>,
    #[serde(rename = "box")]
    pub bound: Option<i64>,
    pub cap: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupSpec {
    FreeAbelian { rank: u32 },
    Heisenberg,
    SplitExt,
}

fn default_third_base() -> i64 {
    3
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChainSpec {
    HeisDiag {
        p: i64,
        q: i64,
    },
    RtDiag {
        p: i64,
        q: i64,
        #[serde(default = "default_third_base")]
        third_base: i64,
    },
    AbelianPowers {
        scales: Vec<i64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl GroupSpec {
    pub fn model(&self) -> Result<GroupModel, CliError> {
        match *self {
            GroupSpec::FreeAbelian { rank } => {
                GroupModel::free_abelian(rank).map_err(|_| invalid("group.rank", "rank ≥ 1"))
            }
            GroupSpec::Heisenberg => Ok(GroupModel::Heisenberg),
            GroupSpec::SplitExt => Ok(GroupModel::SplitExtZ2ByZ),
        }
    }
}

impl ChainSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ChainSpec::HeisDiag { .. } => "heis-diag",
            ChainSpec::RtDiag { .. } => "rt-diag",
            ChainSpec::AbelianPowers { .. } => "abelian-powers",
        }
    }

    pub fn model(&self) -> GroupModel {
        match self {
            ChainSpec::HeisDiag { .. } => GroupModel::Heisenberg,
            ChainSpec::RtDiag { .. } => GroupModel::SplitExtZ2ByZ,
            ChainSpec::AbelianPowers { scales } => GroupModel::FreeAbelian {
                rank: scales.len() as u32,
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            ChainSpec::HeisDiag { p, q } => format!("heis-diag({p},{q})"),
            ChainSpec::RtDiag { p, q, third_base } => format!("rt-diag({p},{q},{third_base})"),
            ChainSpec::AbelianPowers { scales } => format!("abelian-powers({scales:?})"),
        }
    }

    pub fn build(&self, depth: usize) -> Result<GroupChain, CliError> {
        Ok(match self {
            ChainSpec::HeisDiag { p, q } => GroupChain::heis_diag(*p, *q, depth)?,
            ChainSpec::RtDiag { p, q, third_base } => {
                GroupChain::rt_diag(*p, *q, *third_base, depth)?
            }
            ChainSpec::AbelianPowers { scales } => GroupChain::abelian_powers(scales, depth)?,
        })
    }

    fn validate(&self) -> Result<(), CliError> {
        match self {
            ChainSpec::HeisDiag { p, q } | ChainSpec::RtDiag { p, q, .. } => {
                if p == q || !is_prime(*p) || !is_prime(*q) {
                    return Err(invalid("chain", "p and q must be distinct primes"));
                }
                if let ChainSpec::RtDiag { third_base, .. } = self {
                    if *third_base < 1 {
                        return Err(invalid("chain.third_base", "third_base must be ≥ 1"));
                    }
                }
            }
            ChainSpec::AbelianPowers { scales } => {
                if scales.is_empty() || scales.iter().any(|&s| s < 2) {
                    return Err(invalid("chain.scales", "scales must be non-empty and ≥ 2"));
                }
            }
        }
        Ok(())
    }
}

impl CoverSpec {
    pub fn subgroup(&self, model: GroupModel) -> Result<FiniteIndexSubgroup, CliError> {
        let s = match model {
            GroupModel::Heisenberg => FiniteIndexSubgroup::heisenberg_diag(self.a, self.b, self.c)?,
            GroupModel::SplitExtZ2ByZ => FiniteIndexSubgroup::diag_scales(self.a, self.b, self.c)?,
            GroupModel::FreeAbelian { rank } => {
                let scales = [self.a, self.b, self.c];
                let r = rank as usize;
                if r > 3 {
                    return Err(invalid("cover", "covers of free abelian groups need rank ≤ 3"));
                }
                FiniteIndexSubgroup::diagonal_sublattice(&scales[..r])?
            }
        };
        if !s.check_subgroup() {
            return Err(invalid(
                "cover",
                format!("{} is not a subgroup", s.describe()),
            ));
        }
        Ok(s)
    }
}

impl RunConfig {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            group: top.group.or(self.group),
            chain: top.chain.or(self.chain),
            cover: top.cover.or(self.cover),
            depth: top.depth.or(self.depth),
            radii: top.radii.or(self.radii),
            bound: top.bound.or(self.bound),
            cap: top.cap.or(self.cap),
            out: top.out.or(self.out),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let group_model = self.group.map(|g| g.model()).transpose()?;
        if let Some(chain) = &self.chain {
            chain.validate()?;
            if let Some(m) = group_model {
                if m != chain.model() {
                    return Err(invalid(
                        "chain.family",
                        format!("{} needs group model {}", chain.family_name(), chain.model()),
                    ));
                }
            }
        }
        if let Some(d) = self.depth {
            if d == 0 || d > MAX_CHAIN_DEPTH {
                return Err(invalid("depth", format!("depth must be in 1..={MAX_CHAIN_DEPTH}")));
            }
        }
        if let Some(r) = &self.radii {
            if r.is_empty() {
                return Err(invalid("radii", "radii must be non-empty"));
            }
        }
        if let Some(b) = self.bound {
            if b < 1 {
                return Err(invalid("box", "box must be ≥ 1"));
            }
        }
        if let Some(c) = self.cap {
            if c == 0 {
                return Err(invalid("cap", "cap must be ≥ 1"));
            }
        }
        if let Some(c) = &self.cover {
            if c.a < 1 || c.b < 1 || c.c < 1 {
                return Err(invalid("cover", "a, b, c must be ≥ 1"));
            }
        }
        Ok(())
    }

    /// The model named by `group`, or implied by `chain`.
    pub fn model(&self) -> Result<Option<GroupModel>, CliError> {
        match (&self.group, &self.chain) {
            (Some(g), _) => g.model().map(Some),
            (None, Some(c)) => Ok(Some(c.model())),
            (None, None) => Ok(None),
        }
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}
