//! Browser bindings. Each export returns a JSON string; errors become JS
//! exceptions.

use chainlab_core::action::build_action;
use chainlab_core::cases::case_heisenberg;
use chainlab_core::chain::GroupChain;
use chainlab_core::growth::{ball_series, degree_estimate, GrowthLimits};
use chainlab_core::GroupModel;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest coset table the page will list cycles for.
pub const MAX_LEVEL_SIZE: usize = 20_000;

fn model_named(name: &str, rank: u32) -> Result<GroupModel, String> {
    match name {
        "heisenberg" => Ok(GroupModel::Heisenberg),
        "split-ext" => Ok(GroupModel::SplitExtZ2ByZ),
        "free-abelian" => GroupModel::free_abelian(rank).map_err(|e| e.to_string()),
        other => Err(format!("unknown model {other:?}")),
    }
}

pub fn growth_json(model: &str, rank: u32, rmax: usize) -> Result<String, String> {
    let model = model_named(model, rank)?;
    let limit = GrowthLimits::for_model(model).max_radius;
    if rmax > limit {
        return Err(format!("radius {rmax} exceeds {limit} for {model}"));
    }
    let series = ball_series(model, &model.standard_generators(), rmax).map_err(|e| e.to_string())?;
    let estimate = degree_estimate(&series).ok();
    Ok(json!({
        "model": model.to_string(),
        "entries": series.entries,
        "estimate": estimate,
    })
    .to_string())
}

pub fn heisenberg_case_json(p: i64, q: i64, depth: usize) -> Result<String, String> {
    let report = case_heisenberg(p, q, depth).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

pub fn action_cycles_json(p: i64, q: i64, level: usize) -> Result<String, String> {
    let chain = GroupChain::heis_diag(p, q, level.max(1)).map_err(|e| e.to_string())?;
    let size = chain
        .level(level)
        .and_then(|s| s.index())
        .map_err(|e| e.to_string())?;
    if size > MAX_LEVEL_SIZE as u64 {
        return Err(format!("level {level} has {size} cosets; the page lists at most {MAX_LEVEL_SIZE}"));
    }
    let action = build_action(&chain, level).map_err(|e| e.to_string())?;
    let perms = action
        .generators()
        .iter()
        .map(|g| {
            let perm = action.act(g, level)?;
            Ok(json!({
                "generator": g,
                "order": perm.order()?,
                "cycles": perm.cycles(),
            }))
        })
        .collect::<chainlab_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({
        "chain": format!("heis-diag({p},{q})"),
        "level": level,
        "size": size,
        "transitive": action.check_transitive(level).map_err(|e| e.to_string())?,
        "generators": perms,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn growth(model: &str, rank: u32, rmax: usize) -> Result<String, JsError> {
    growth_json(model, rank, rmax).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = heisenbergCase)]
pub fn heisenberg_case(p: u32, q: u32, depth: usize) -> Result<String, JsError> {
    heisenberg_case_json(p.into(), q.into(), depth).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = actionCycles)]
pub fn action_cycles(p: u32, q: u32, level: usize) -> Result<String, JsError> {
    action_cycles_json(p.into(), q.into(), level).map_err(|e| JsError::new(&e))
}
