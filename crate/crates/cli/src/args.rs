use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Command;
use crate::config::{ChainSpec, CoverSpec, GroupSpec, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "chainlab", version, about = "Group chains, coset actions and word growth")]
pub struct Cli {
    /// JSON configuration file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination. Without it the report goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Top,
}

#[derive(Debug, Subcommand)]
pub enum Top {
    /// Regularity verdicts and kernels of group chains.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Finite levels of the coset-tower action.
    #[command(subcommand)]
    Action(ActionCmd),
    /// Word growth, degree estimates and lower central series.
    #[command(subcommand)]
    Growth(GrowthCmd),
    /// Reproductions of the worked examples.
    #[command(subcommand)]
    Paper(PaperCmd),
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    Classify(ChainFlags),
    Kernel(ChainFlags),
}

#[derive(Debug, Subcommand)]
pub enum ActionCmd {
    Levels(ChainFlags),
}

#[derive(Debug, Subcommand)]
pub enum GrowthCmd {
    Ball(GrowthFlags),
    Degree(GrowthFlags),
    Bass(GrowthFlags),
}

#[derive(Debug, Subcommand)]
pub enum PaperCmd {
    Rt(PaperFlags),
    Heisenberg(PaperFlags),
    Notvh(PaperFlags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    HeisDiag,
    RtDiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    FreeAbelian,
    Heisenberg,
    SplitExt,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CoverFlags {
    #[arg(long)]
    pub a: Option<i64>,
    #[arg(long)]
    pub b: Option<i64>,
    #[arg(long)]
    pub c: Option<i64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChainFlags {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<i64>,
    #[arg(long)]
    pub third_base: Option<i64>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Coordinate bound for kernel scans.
    #[arg(long = "box")]
    pub bound: Option<i64>,
    /// Maximum number of cosets per table.
    #[arg(long)]
    pub cap: Option<usize>,
    #[command(flatten)]
    pub cover: CoverFlags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GrowthFlags {
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub rank: Option<u32>,
    /// Largest radius; the series covers 0..=rmax.
    #[arg(long)]
    pub rmax: Option<usize>,
    /// Also write the (radius, count) series as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub cover: CoverFlags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PaperFlags {
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<i64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[command(flatten)]
    pub cover: CoverFlags,
}

impl Cli {
    pub fn command(&self) -> Command {
        match &self.command {
            Top::Chain(ChainCmd::Classify(_)) => Command::ChainClassify,
            Top::Chain(ChainCmd::Kernel(_)) => Command::ChainKernel,
            Top::Action(ActionCmd::Levels(_)) => Command::ActionLevels,
            Top::Growth(GrowthCmd::Ball(_)) => Command::GrowthBall,
            Top::Growth(GrowthCmd::Degree(_)) => Command::GrowthDegree,
            Top::Growth(GrowthCmd::Bass(_)) => Command::GrowthBass,
            Top::Paper(PaperCmd::Rt(_)) => Command::PaperRt,
            Top::Paper(PaperCmd::Heisenberg(_)) => Command::PaperHeisenberg,
            Top::Paper(PaperCmd::Notvh(_)) => Command::PaperNotvh,
        }
    }

    pub fn csv_path(&self) -> Option<&PathBuf> {
        match &self.command {
            Top::Growth(GrowthCmd::Ball(g) | GrowthCmd::Degree(g)) => g.csv.as_ref(),
            _ => None,
        }
    }

    /// Applies the flags on top of `file`.
    pub fn resolve(&self, file: RunConfig) -> Result<RunConfig, CliError> {
        let mut cfg = file;
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        match &self.command {
            Top::Chain(ChainCmd::Classify(f) | ChainCmd::Kernel(f))
            | Top::Action(ActionCmd::Levels(f)) => {
                cfg.chain = chain_overlay(cfg.chain.take(), f)?;
                cfg.depth = f.depth.or(cfg.depth);
                cfg.bound = f.bound.or(cfg.bound);
                cfg.cap = f.cap.or(cfg.cap);
                cfg.cover = cover_overlay(cfg.cover, &f.cover)?;
            }
            Top::Growth(GrowthCmd::Ball(f) | GrowthCmd::Degree(f) | GrowthCmd::Bass(f)) => {
                cfg.group = group_overlay(cfg.group, f)?;
                if let Some(r) = f.rmax {
                    cfg.radii = Some((0..=r).collect());
                }
                cfg.cover = cover_overlay(cfg.cover, &f.cover)?;
            }
            Top::Paper(cmd) => {
                let f = match cmd {
                    PaperCmd::Rt(f) | PaperCmd::Heisenberg(f) | PaperCmd::Notvh(f) => f,
                };
                let family = if matches!(cmd, PaperCmd::Rt(_)) {
                    FamilyArg::RtDiag
                } else {
                    FamilyArg::HeisDiag
                };
                if f.p.is_some() || f.q.is_some() {
                    let (p0, q0) = match (&cfg.chain, family) {
                        (Some(ChainSpec::RtDiag { p, q, .. }), FamilyArg::RtDiag)
                        | (Some(ChainSpec::HeisDiag { p, q }), FamilyArg::HeisDiag) => (*p, *q),
                        (_, FamilyArg::RtDiag) => (5, 7),
                        (_, FamilyArg::HeisDiag) => (2, 3),
                    };
                    let (p, q) = (f.p.unwrap_or(p0), f.q.unwrap_or(q0));
                    cfg.chain = Some(match family {
                        FamilyArg::RtDiag => ChainSpec::RtDiag { p, q, third_base: 3 },
                        FamilyArg::HeisDiag => ChainSpec::HeisDiag { p, q },
                    });
                }
                cfg.depth = f.depth.or(cfg.depth);
                cfg.cover = cover_overlay(cfg.cover, &f.cover)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn chain_overlay(base: Option<ChainSpec>, f: &ChainFlags) -> Result<Option<ChainSpec>, CliError> {
    let family = match (f.family, &base) {
        (Some(fam), _) => Some(fam),
        (None, Some(ChainSpec::HeisDiag { .. })) => Some(FamilyArg::HeisDiag),
        (None, Some(ChainSpec::RtDiag { .. })) => Some(FamilyArg::RtDiag),
        (None, Some(ChainSpec::AbelianPowers { .. })) => {
            if f.p.is_some() || f.q.is_some() || f.third_base.is_some() {
                return Err(CliError::Usage("--p/--q/--third-base do not apply to abelian-powers".into()));
            }
            return Ok(base);
        }
        (None, None) => {
            if f.p.is_some() || f.q.is_some() || f.third_base.is_some() {
                return Err(CliError::Usage("--p/--q need --family".into()));
            }
            return Ok(None);
        }
    };
    let (bp, bq, bt) = match &base {
        Some(ChainSpec::HeisDiag { p, q }) => (Some(*p), Some(*q), None),
        Some(ChainSpec::RtDiag { p, q, third_base }) => (Some(*p), Some(*q), Some(*third_base)),
        _ => (None, None, None),
    };
    let need = |v: Option<i64>, name: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--{name} is required with --family")))
    };
    let p = need(f.p.or(bp), "p")?;
    let q = need(f.q.or(bq), "q")?;
    Ok(Some(match family {
        Some(FamilyArg::RtDiag) => ChainSpec::RtDiag {
            p,
            q,
            third_base: f.third_base.or(bt).unwrap_or(3),
        },
        _ => {
            if f.third_base.is_some() {
                return Err(CliError::Usage("--third-base applies to rt-diag only".into()));
            }
            ChainSpec::HeisDiag { p, q }
        }
    }))
}

fn group_overlay(base: Option<GroupSpec>, f: &GrowthFlags) -> Result<Option<GroupSpec>, CliError> {
    Ok(match (f.model, base) {
        (Some(ModelArg::FreeAbelian), b) => {
            let rank = match (f.rank, b) {
                (Some(r), _) => r,
                (None, Some(GroupSpec::FreeAbelian { rank })) => rank,
                (None, _) => 2,
            };
            Some(GroupSpec::FreeAbelian { rank })
        }
        (Some(m), _) => {
            if f.rank.is_some() {
                return Err(CliError::Usage("--rank applies to free-abelian only".into()));
            }
            Some(match m {
                ModelArg::Heisenberg => GroupSpec::Heisenberg,
                _ => GroupSpec::SplitExt,
            })
        }
        (None, Some(GroupSpec::FreeAbelian { rank })) => Some(GroupSpec::FreeAbelian {
            rank: f.rank.unwrap_or(rank),
        }),
        (None, b) => {
            if f.rank.is_some() {
                return Err(CliError::Usage("--rank needs --model free-abelian".into()));
            }
            b
        }
    })
}

fn cover_overlay(base: Option<CoverSpec>, f: &CoverFlags) -> Result<Option<CoverSpec>, CliError> {
    if f.a.is_none() && f.b.is_none() && f.c.is_none() {
        return Ok(base);
    }
    let pick = |v: Option<i64>, b: Option<i64>, name: &str| {
        v.or(b)
            .ok_or_else(|| CliError::Usage(format!("--{name} is required when a cover is given")))
    };
    Ok(Some(CoverSpec {
        a: pick(f.a, base.map(|c| c.a), "a")?,
        b: pick(f.b, base.map(|c| c.b), "b")?,
        c: pick(f.c, base.map(|c| c.c), "c")?,
    }))
}
