//! Word growth: balls in the Cayley graph and in coset spaces, degree
//! estimates, and lower central series ranks.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Elem, GroupModel};
use crate::lattice::{smith_invariants, Lattice};
use crate::subgroup::{CosetIndexer, FiniteIndexSubgroup};

/// Radius and memory bounds for ball enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrowthLimits {
    pub max_radius: usize,
    pub max_elements: usize,
}

impl GrowthLimits {
    pub fn for_model(model: GroupModel) -> Self {
        let max_radius = match model {
            GroupModel::Heisenberg => 14,
            GroupModel::FreeAbelian { .. } => 60,
            GroupModel::SplitExtZ2ByZ => 40,
        };
        GrowthLimits {
            max_radius,
            max_elements: 40_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrowthEntry {
    pub radius: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthSeries {
    pub slate: Vec<Elem>,
    pub entries: Vec<GrowthEntry>,
}

impl GrowthSeries {
    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.count).collect()
    }

    pub fn count_at(&self, radius: usize) -> Option<u64> {
        self.entries.iter().find(|e| e.radius == radius).map(|e| e.count)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,count\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.radius, e.count));
        }
        out
    }
}

fn check_slate(model: GroupModel, slate: &[Elem]) -> Result<Vec<Elem>> {
    if slate.is_empty() {
        return Err(Error::InvalidParameter("empty generating slate".into()));
    }
    let mut moves = Vec::with_capacity(2 * slate.len());
    for s in slate {
        if s.model() != model {
            return Err(Error::ModelMismatch {
                left: model,
                right: s.model(),
            });
        }
        moves.push(s.clone());
    }
    for s in slate {
        moves.push(s.inverse()?);
    }
    Ok(moves)
}

fn check_radius(rmax: usize, limits: GrowthLimits) -> Result<()> {
    if rmax > limits.max_radius {
        return Err(Error::InvalidParameter(format!(
            "radius {rmax} exceeds the cap {}",
            limits.max_radius
        )));
    }
    Ok(())
}

/// Ball sizes for radii `0..=rmax`, by layered breadth-first search.
pub fn ball_series(model: GroupModel, slate: &[Elem], rmax: usize) -> Result<GrowthSeries> {
    ball_series_with(model, slate, rmax, GrowthLimits::for_model(model))
}

pub fn ball_series_with(
    model: GroupModel,
    slate: &[Elem],
    rmax: usize,
    limits: GrowthLimits,
) -> Result<GrowthSeries> {
    check_radius(rmax, limits)?;
    let moves = check_slate(model, slate)?;
    let id = model.identity();
    let mut seen: HashSet<Elem> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    let mut entries = vec![GrowthEntry { radius: 0, count: 1 }];
    for radius in 1..=rmax {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &moves {
                let h = g.multiply(s)?;
                if !seen.contains(&h) {
                    if seen.len() >= limits.max_elements {
                        return Err(Error::MemoryCap {
                            cap: limits.max_elements,
                        });
                    }
                    seen.insert(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
        entries.push(GrowthEntry {
            radius,
            count: seen.len() as u64,
        });
    }
    Ok(GrowthSeries {
        slate: slate.to_vec(),
        entries,
    })
}

pub fn ball(model: GroupModel, slate: &[Elem], r: usize) -> Result<u64> {
    Ok(ball_series(model, slate, r)?.entries[r].count)
}

/// A coset space `G/S` with an exact key per coset.
#[derive(Debug, Clone)]
pub enum CosetSpace {
    FiniteIndex(FiniteIndexSubgroup),
    /// `{(0,0,z)}` in the Heisenberg group; cosets are keyed by `(x, y)`.
    HeisenbergCenter,
    /// Arbitrary membership-tested subgroup; cosets are deduplicated by
    /// pairwise comparison.
    Membership(FiniteIndexSubgroup),
}

enum Keyer {
    Index(CosetIndexer),
    Center,
}

impl Keyer {
    fn key(&self, g: &Elem) -> Result<(i64, i64)> {
        match self {
            Keyer::Index(ix) => Ok((ix.index_of(g)? as i64, 0)),
            Keyer::Center => Ok((g.coords()[0], g.coords()[1])),
        }
    }
}

/// Ball sizes in the coset space: cosets `γS` with `‖γ‖ ≤ r`.
pub fn schreier_series(
    model: GroupModel,
    space: &CosetSpace,
    slate: &[Elem],
    rmax: usize,
) -> Result<GrowthSeries> {
    check_radius(rmax, GrowthLimits::for_model(model))?;
    let moves = check_slate(model, slate)?;
    let keyer = match space {
        CosetSpace::FiniteIndex(s) => {
            same_model(model, s)?;
            Keyer::Index(s.coset_indexer()?)
        }
        CosetSpace::HeisenbergCenter => {
            if model != GroupModel::Heisenberg {
                return Err(Error::InvalidParameter(
                    "center axis cosets need the Heisenberg model".into(),
                ));
            }
            Keyer::Center
        }
        CosetSpace::Membership(s) => {
            same_model(model, s)?;
            return schreier_by_membership(s, slate, &moves, rmax);
        }
    };
    let id = model.identity();
    let mut seen = HashSet::from([keyer.key(&id)?]);
    let mut frontier = vec![id];
    let mut entries = vec![GrowthEntry { radius: 0, count: 1 }];
    for radius in 1..=rmax {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &moves {
                let h = s.multiply(g)?;
                if seen.insert(keyer.key(&h)?) {
                    next.push(h);
                }
            }
        }
        frontier = next;
        entries.push(GrowthEntry {
            radius,
            count: seen.len() as u64,
        });
    }
    Ok(GrowthSeries {
        slate: slate.to_vec(),
        entries,
    })
}

fn same_model(model: GroupModel, s: &FiniteIndexSubgroup) -> Result<()> {
    if s.model() != model {
        return Err(Error::ModelMismatch {
            left: model,
            right: s.model(),
        });
    }
    Ok(())
}

fn schreier_by_membership(
    s: &FiniteIndexSubgroup,
    slate: &[Elem],
    moves: &[Elem],
    rmax: usize,
) -> Result<GrowthSeries> {
    let id = s.model().identity();
    let mut reps = vec![id.clone()];
    let mut frontier = vec![id];
    let mut entries = vec![GrowthEntry { radius: 0, count: 1 }];
    for radius in 1..=rmax {
        let mut next = Vec::new();
        for g in &frontier {
            for m in moves {
                let h = m.multiply(g)?;
                let inv = h.inverse()?;
                let mut fresh = true;
                for r in &reps {
                    if s.contains(&inv.multiply(r)?)? {
                        fresh = false;
                        break;
                    }
                }
                if fresh {
                    reps.push(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
        entries.push(GrowthEntry {
            radius,
            count: reps.len() as u64,
        });
    }
    Ok(GrowthSeries {
        slate: slate.to_vec(),
        entries,
    })
}

pub fn schreier_ball(
    model: GroupModel,
    space: &CosetSpace,
    slate: &[Elem],
    r: usize,
) -> Result<u64> {
    Ok(schreier_series(model, space, slate, r)?.entries[r].count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeEstimate {
    /// `log₂(f(2r)/f(r))` at the largest available pair.
    pub doubling: f64,
    pub doubling_radius: usize,
    /// Least-squares slope of `log f` against `log r` over the top half.
    pub slope: f64,
    pub slope_radii: (usize, usize),
    /// Last three ball sizes.
    pub tail: Vec<u64>,
}

pub const MIN_SERIES_LEN: usize = 6;

pub fn degree_estimate(series: &GrowthSeries) -> Result<DegreeEstimate> {
    let n = series.entries.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            got: n,
            need: MIN_SERIES_LEN,
        });
    }
    let rmax = series.entries.iter().map(|e| e.radius).max().unwrap_or(0);
    let f = |r: usize| series.count_at(r);

    let mut doubling = (0.0, 0);
    for r in (1..=rmax / 2).rev() {
        if let (Some(a), Some(b)) = (f(r), f(2 * r)) {
            doubling = ((b as f64 / a as f64).log2(), r);
            break;
        }
    }

    let lo = (rmax / 2).max(1);
    let points: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|e| e.radius >= lo)
        .map(|e| ((e.radius as f64).ln(), (e.count as f64).ln()))
        .collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    Ok(DegreeEstimate {
        doubling: doubling.0,
        doubling_radius: doubling.1,
        slope,
        slope_radii: (lo, rmax),
        tail: series.counts().iter().rev().take(3).rev().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LcsReport {
    pub model: GroupModel,
    /// `r_ℓ`: free rank of `Γ_ℓ / Γ_{ℓ+1}`.
    pub ranks: Vec<u32>,
    /// Nilpotency length; `None` when the series does not reach the
    /// identity within the computed steps.
    pub length: Option<usize>,
    pub bass_degree: Option<u32>,
    pub nilpotent: bool,
    /// Bases of `Γ_1, Γ_2, …` as coordinate lattices.
    pub terms: Vec<Vec<Vec<i64>>>,
    pub closed_form_agrees: bool,
    /// A free abelian subgroup of finite index, when one exists.
    pub abelian_cover: Option<FiniteIndexSubgroup>,
    pub note: String,
}

/// Number of series terms computed before declaring non-nilpotence.
const LCS_STEPS: usize = 6;
const SWEEP_RADIUS: usize = 4;

fn elements_of_ball(model: GroupModel, r: usize) -> Result<Vec<Elem>> {
    let moves = check_slate(model, &model.standard_generators())?;
    let id = model.identity();
    let mut seen: HashSet<Elem> = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut frontier = vec![id];
    for _ in 0..r {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &moves {
                let h = g.multiply(s)?;
                if seen.insert(h.clone()) {
                    out.push(h.clone());
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Rank of the integer span of `vectors`, via Smith invariants.
fn span_rank(vectors: &[Vec<i64>]) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    Ok(smith_invariants(vectors)?.len())
}

fn closed_form_term(model: GroupModel, l: usize) -> Result<Lattice> {
    let n = model.arity();
    Ok(match model {
        GroupModel::FreeAbelian { .. } => Lattice::zero(n),
        GroupModel::Heisenberg if l == 1 => Lattice::from_generators(3, &[vec![0, 0, 1]])?,
        GroupModel::Heisenberg => Lattice::zero(3),
        GroupModel::SplitExtZ2ByZ => {
            let k = 1i64 << l;
            Lattice::from_generators(3, &[vec![k, 0, 0], vec![0, k, 0]])?
        }
    })
}

/// Lower central series by commutator sweep.
///
/// `Γ_{ℓ+1}` is spanned by `[g, h]` for `g` in a word ball and `h` in the
/// same ball intersected with `Γ_ℓ`, plus small multiples of a basis of
/// `Γ_ℓ`. In every built-in model the terms from `Γ_1` on are coordinate
/// lattices on which the group law is vector addition.
pub fn lcs_ranks(model: GroupModel) -> Result<LcsReport> {
    let n = model.arity();
    let ball = elements_of_ball(model, SWEEP_RADIUS)?;
    let mut current = Lattice::full(n);
    let mut ranks = Vec::new();
    let mut terms = Vec::new();
    let mut length = None;
    let mut agrees = true;
    for l in 0..LCS_STEPS {
        let mut partners: Vec<Elem> = Vec::new();
        for h in &ball {
            if current.contains(h.coords())? {
                partners.push(h.clone());
            }
        }
        if l > 0 {
            for b in current.basis() {
                for k in [1, -1, 2] {
                    let v: Vec<i64> = b.iter().map(|x| x * k).collect();
                    partners.push(model.elem(&v)?);
                }
            }
        }
        let mut commutators: Vec<Vec<i64>> = Vec::new();
        let mut seen = HashSet::new();
        for g in &ball {
            for h in &partners {
                let c = g.commutator(h)?;
                if !c.is_identity() && seen.insert(c.clone()) {
                    commutators.push(c.coords().to_vec());
                }
            }
        }
        let next = Lattice::from_generators(n, &commutators)?;
        let rank_cur = if l == 0 { n } else { current.rank() };
        let rank_next = span_rank(&commutators)?;
        debug_assert_eq!(rank_next, next.rank());
        ranks.push((rank_cur - rank_next) as u32);
        let expected = closed_form_term(model, l + 1)?;
        agrees &= next.contains_lattice(&expected)? && expected.contains_lattice(&next)?;
        terms.push(next.basis().to_vec());
        current = next;
        if current.rank() == 0 {
            length = Some(l + 1);
            break;
        }
    }
    let nilpotent = length.is_some();
    let bass_degree = length.map(|_| bass_degree(&ranks));
    let abelian_cover = match model {
        GroupModel::FreeAbelian { .. } => Some(FiniteIndexSubgroup::whole(model)),
        GroupModel::SplitExtZ2ByZ => Some(FiniteIndexSubgroup::diag_scales(1, 1, 2)?),
        GroupModel::Heisenberg => None,
    };
    let note = match length {
        Some(k) => format!("nilpotent of length {k}; degree Σ(ℓ+1)·r_ℓ"),
        None => format!(
            "not nilpotent, so the Bass formula is inapplicable: Γ_ℓ stays a rank-{} lattice for ℓ = 1..={LCS_STEPS}",
            current.rank()
        ),
    };
    Ok(LcsReport {
        model,
        ranks,
        length,
        bass_degree,
        nilpotent,
        terms,
        closed_form_agrees: agrees,
        abelian_cover,
        note,
    })
}

pub fn bass_degree(ranks: &[u32]) -> u32 {
    ranks
        .iter()
        .enumerate()
        .map(|(l, r)| (l as u32 + 1) * r)
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteIndexGrowthReport {
    pub subgroup: FiniteIndexSubgroup,
    pub group: DegreeEstimate,
    pub inside_subgroup: DegreeEstimate,
    pub coset_space: Vec<u64>,
    pub group_counts: Vec<u64>,
    pub estimate_gap: f64,
    pub cosets_dominated: bool,
}

/// Growth of `S` (with its own generators) against growth of the model,
/// plus the coset-space domination `#(Γ^{(r)}S/S) ≤ #Γ^{(r)}`.
pub fn finite_index_growth_check(
    model: GroupModel,
    subgroup: &FiniteIndexSubgroup,
    rmax: usize,
) -> Result<FiniteIndexGrowthReport> {
    same_model(model, subgroup)?;
    let gens = model.standard_generators();
    let group = ball_series(model, &gens, rmax)?;
    let inside = ball_series(model, &subgroup.generators()?, rmax)?;
    let cosets = schreier_series(
        model,
        &CosetSpace::FiniteIndex(subgroup.clone()),
        &gens,
        rmax,
    )?;
    let g = degree_estimate(&group)?;
    let s = degree_estimate(&inside)?;
    let group_counts = group.counts();
    let coset_space = cosets.counts();
    let dominated = coset_space.iter().zip(&group_counts).all(|(c, b)| c <= b);
    Ok(FiniteIndexGrowthReport {
        subgroup: subgroup.clone(),
        estimate_gap: (g.slope - s.slope).abs(),
        group: g,
        inside_subgroup: s,
        coset_space,
        group_counts,
        cosets_dominated: dominated,
    })
}
