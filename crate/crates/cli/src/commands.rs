use std::collections::BTreeSet;

use chainlab_core::action::build_action_with;
use chainlab_core::cases::{case_heisenberg, case_not_virtually_homogeneous, case_rt_example, CaseReport};
use chainlab_core::chain::{normal_chain_test, virtual_regularity_probe, weak_regularity_probe, GroupChain};
use chainlab_core::growth::{ball_series, degree_estimate, lcs_ranks, schreier_series, CosetSpace, GrowthSeries};
use chainlab_core::subgroup::DEFAULT_COSET_CAP;
use chainlab_core::{CosetTable, GroupModel};
use serde_json::{json, Value};

use crate::cache::TableCache;
use crate::config::{ChainSpec, CoverSpec, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ChainClassify,
    ChainKernel,
    ActionLevels,
    GrowthBall,
    GrowthDegree,
    GrowthBass,
    PaperRt,
    PaperHeisenberg,
    PaperNotvh,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ChainClassify => "chain classify",
            Command::ChainKernel => "chain kernel",
            Command::ActionLevels => "action levels",
            Command::GrowthBall => "growth ball",
            Command::GrowthDegree => "growth degree",
            Command::GrowthBass => "growth bass",
            Command::PaperRt => "paper rt",
            Command::PaperHeisenberg => "paper heisenberg",
            Command::PaperNotvh => "paper notvh",
        }
    }

    /// The chain family a paper command runs on.
    pub fn case_family(&self) -> Option<&'static str> {
        match self {
            Command::PaperRt => Some("rt-diag"),
            Command::PaperHeisenberg | Command::PaperNotvh => Some("heis-diag"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    CheckFailed,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
    pub status: Status,
    pub csv: Option<String>,
}

impl Outcome {
    fn ok(report: Value, summary: String) -> Self {
        Outcome {
            report,
            summary,
            status: Status::Success,
            csv: None,
        }
    }
}

pub const DEFAULT_DEPTH: usize = 4;
pub const DEFAULT_BOX: i64 = 30;
pub const DEFAULT_ACTION_DEPTH: usize = 2;
/// Levels larger than this are reported without cycle lists.
pub const MAX_CYCLE_LISTING: usize = 256;

fn require_chain(cfg: &RunConfig) -> Result<&ChainSpec, CliError> {
    cfg.chain.as_ref().ok_or_else(|| {
        CliError::Usage("no chain given; pass --family with --p/--q or a config \"chain\" section".into())
    })
}

fn require_model(cfg: &RunConfig) -> Result<GroupModel, CliError> {
    cfg.model()?.ok_or_else(|| {
        CliError::Usage("no group given; pass --model or a config \"group\" section".into())
    })
}

fn default_rmax(model: GroupModel, cmd: Command) -> usize {
    match (model, cmd) {
        (GroupModel::Heisenberg, Command::GrowthDegree) => 14,
        (GroupModel::Heisenberg, _) => 10,
        (GroupModel::FreeAbelian { .. }, Command::GrowthDegree) => 40,
        (GroupModel::FreeAbelian { .. }, _) => 20,
        (GroupModel::SplitExtZ2ByZ, Command::GrowthDegree) => 30,
        (GroupModel::SplitExtZ2ByZ, _) => 20,
    }
}

pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match cmd {
        Command::ChainClassify => chain_classify(cfg),
        Command::ChainKernel => chain_kernel(cfg),
        Command::ActionLevels => action_levels(cfg),
        Command::GrowthBall | Command::GrowthDegree => growth(cmd, cfg),
        Command::GrowthBass => growth_bass(cfg),
        Command::PaperRt | Command::PaperHeisenberg | Command::PaperNotvh => paper(cmd, cfg),
    }
}

fn chain_classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = require_chain(cfg)?;
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    let chain = spec.build(depth)?;
    let normal = normal_chain_test(&chain, depth)?;
    let (probe, cover) = match &cfg.cover {
        Some(c) => {
            let s = c.subgroup(chain.model())?;
            (virtual_regularity_probe(&chain, &s, depth)?, Some(s))
        }
        None => (weak_regularity_probe(&chain, depth)?, None),
    };
    let verdict = serde_json::to_value(probe.verdict)?;
    let mut summary = format!(
        "{} depth {depth}: {}",
        spec.label(),
        verdict.as_str().unwrap_or_default()
    );
    if let Some(w) = &probe.witness {
        summary.push_str(&format!(" (witness h={} at s={})", w.h, w.s));
    }
    if let Some(c) = &cover {
        summary.push_str(&format!(" inside {}", c.describe()));
    }
    let report = json!({
        "command": "chain classify",
        "chain": spec,
        "depth": depth,
        "cover": cover,
        "normal": normal,
        "probe": probe,
    });
    Ok(Outcome::ok(report, summary))
}

fn chain_kernel(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = require_chain(cfg)?;
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    let bound = cfg.bound.unwrap_or(DEFAULT_BOX);
    let chain = spec.build(depth)?;
    let kernel = chain.truncated_kernel(depth, bound)?;
    let summary = format!(
        "{} depth {depth} box {bound}: {} kernel element(s)",
        spec.label(),
        kernel.len()
    );
    let report = json!({
        "command": "chain kernel",
        "chain": spec,
        "depth": depth,
        "box": bound,
        "kernel": kernel,
        "trivial": kernel.len() == 1 && kernel[0].is_identity(),
    });
    Ok(Outcome::ok(report, summary))
}

fn action_levels(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = require_chain(cfg)?;
    let depth = cfg.depth.unwrap_or(DEFAULT_ACTION_DEPTH);
    let cap = cfg.cap.unwrap_or(DEFAULT_COSET_CAP);
    let mut chain = spec.build(depth)?;
    if let Some(c) = &cfg.cover {
        chain = GroupChain::intersected(&chain, c.subgroup(chain.model())?)?;
    }
    let cache = TableCache::from_env();
    let action = build_action_with(&chain, depth, |s, gens| match &cache {
        Some(c) => c.table(s, gens, cap),
        None => CosetTable::enumerate(s, gens, cap),
    })?;
    let mut levels = Vec::new();
    let mut all_transitive = true;
    for n in 0..=depth {
        let size = action.table(n)?.index();
        let transitive = action.check_transitive(n)?;
        all_transitive &= transitive;
        let mut gens = Vec::new();
        for g in action.generators() {
            let perm = action.act(g, n)?;
            let mut entry = json!({ "generator": g, "order": perm.order()? });
            if size <= MAX_CYCLE_LISTING {
                entry["cycles"] = json!(perm.cycles());
            }
            gens.push(entry);
        }
        levels.push(json!({ "level": n, "size": size, "transitive": transitive, "generators": gens }));
    }
    let summary = format!(
        "{} levels 0..={depth}: sizes {:?}, {}",
        spec.label(),
        action.sizes(),
        if all_transitive { "transitive" } else { "NOT transitive" }
    );
    let report = json!({
        "command": "action levels",
        "chain": spec,
        "cover": cfg.cover,
        "depth": depth,
        "levels": levels,
    });
    Ok(Outcome::ok(report, summary))
}

fn radii(cfg: &RunConfig, model: GroupModel, cmd: Command) -> (usize, Option<BTreeSet<usize>>) {
    match &cfg.radii {
        Some(r) => (
            r.iter().copied().max().unwrap_or(0),
            Some(r.iter().copied().collect()),
        ),
        None => (default_rmax(model, cmd), None),
    }
}

fn keep(series: &GrowthSeries, only: &Option<BTreeSet<usize>>) -> GrowthSeries {
    match only {
        Some(set) => GrowthSeries {
            slate: series.slate.clone(),
            entries: series
                .entries
                .iter()
                .filter(|e| set.contains(&e.radius))
                .copied()
                .collect(),
        },
        None => series.clone(),
    }
}

fn growth(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = require_model(cfg)?;
    let (rmax, only) = radii(cfg, model, cmd);
    let slate = model.standard_generators();
    let series = ball_series(model, &slate, rmax)?;
    if cmd == Command::GrowthBall {
        let shown = keep(&series, &only);
        let schreier = match &cfg.cover {
            Some(c) => Some(schreier_series(
                model,
                &CosetSpace::FiniteIndex(c.subgroup(model)?),
                &slate,
                rmax,
            )?),
            None => None,
        };
        let last = shown.entries.last().map(|e| (e.radius, e.count)).unwrap_or((0, 1));
        let summary = format!("{model}: ball of radius {} has {} elements", last.0, last.1);
        let csv = Some(shown.to_csv());
        let report = json!({
            "command": "growth ball",
            "model": model,
            "series": shown,
            "cover": cfg.cover,
            "schreier": schreier.map(|s| keep(&s, &only)),
        });
        return Ok(Outcome {
            csv,
            ..Outcome::ok(report, summary)
        });
    }
    let est = degree_estimate(&series)?;
    let summary = format!(
        "{model}: slope {:.3} over radii {}..{}, doubling {:.3} at r={}",
        est.slope, est.slope_radii.0, est.slope_radii.1, est.doubling, est.doubling_radius
    );
    let report = json!({
        "command": "growth degree",
        "model": model,
        "series": series,
        "estimate": est,
    });
    Ok(Outcome {
        csv: Some(series.to_csv()),
        ..Outcome::ok(report, summary)
    })
}

fn growth_bass(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = require_model(cfg)?;
    let lcs = lcs_ranks(model)?;
    let summary = match lcs.bass_degree {
        Some(d) => format!("{model}: ranks {:?}, bass_degree {d}", lcs.ranks),
        None => format!("{model}: {}", lcs.note),
    };
    let report = json!({ "command": "growth bass", "lcs": lcs });
    Ok(Outcome::ok(report, summary))
}

fn case_primes(cmd: Command, cfg: &RunConfig, default: (i64, i64)) -> Result<(i64, i64), CliError> {
    let want = cmd.case_family().unwrap_or_default();
    match &cfg.chain {
        None => Ok(default),
        Some(ChainSpec::HeisDiag { p, q }) if want == "heis-diag" => Ok((*p, *q)),
        Some(ChainSpec::RtDiag { p, q, third_base: 3 }) if want == "rt-diag" => Ok((*p, *q)),
        Some(other) => Err(CliError::Config {
            path: "chain.family".into(),
            message: format!("{} runs on {want}, not {}", cmd.name(), other.label()),
        }),
    }
}

fn paper(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report: CaseReport = match cmd {
        Command::PaperRt => {
            let (p, q) = case_primes(cmd, cfg, (5, 7))?;
            case_rt_example(p, q)?
        }
        Command::PaperHeisenberg => {
            let (p, q) = case_primes(cmd, cfg, (2, 3))?;
            case_heisenberg(p, q, cfg.depth.unwrap_or(6))?
        }
        _ => {
            let (p, q) = case_primes(cmd, cfg, (2, 3))?;
            let c = cfg.cover.unwrap_or(CoverSpec { a: 2, b: 2, c: 2 });
            case_not_virtually_homogeneous(p, q, c.a, c.b, c.c, cfg.depth.unwrap_or(6))?
        }
    };
    let params: Vec<String> = report.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let total = report.subresults.len();
    let failed: Vec<&str> = report.failures().map(|s| s.label.as_str()).collect();
    let summary = if report.pass {
        format!("{} ({}): PASS, {total} checks", report.case, params.join(", "))
    } else {
        format!(
            "{} ({}): FAIL, {} of {total} checks failed: {}",
            report.case,
            params.join(", "),
            failed.len(),
            failed.join("; ")
        )
    };
    let status = if report.pass {
        Status::Success
    } else {
        Status::CheckFailed
    };
    Ok(Outcome {
        report: serde_json::to_value(&report)?,
        summary,
        status,
        csv: None,
    })
}
