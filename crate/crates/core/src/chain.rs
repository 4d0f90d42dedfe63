//! Group chains and finite-depth regularity verdicts.
//!
//! A chain is a properly descending sequence of finite-index subgroups
//! starting at an ambient group (the whole model, or a finite-index cover
//! for intersected chains). Regularity is a statement about the infinite
//! chain, so the probes here only ever report what a finite computation can
//! certify:
//!
//! * `regular` when every checked level is normal in the ambient group;
//! * `irregular` when explicit conjugation witnesses are found;
//! * `weakly_regular` when some level normalizes every deeper checked level;
//! * `inconclusive_at_depth` otherwise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Elem, GroupModel};
use crate::lattice::{checked_pow, lcm, valuation};
use crate::subgroup::{first_coset_reps, FiniteIndexSubgroup};

/// Upper bound on chain depth; keeps every level well inside `i64`.
pub const MAX_CHAIN_DEPTH: usize = 16;

/// How many coset representatives the witness search tries per level.
const WITNESS_REP_LIMIT: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ChainFamily {
    /// `{(pⁿa, qⁿb, tⁿc)}` in the split extension.
    RtDiag { p: i64, q: i64, third_base: i64 },
    /// `diag(pⁿ, qⁿ)·Z² × pⁿZ` in the Heisenberg group.
    HeisDiag { p: i64, q: i64 },
    /// `parent.level(n) ∩ cover`, regarded inside `cover`.
    Intersected {
        parent: Box<GroupChain>,
        cover: FiniteIndexSubgroup,
    },
    Explicit { levels: Vec<FiniteIndexSubgroup> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupChain {
    model: GroupModel,
    #[serde(flatten)]
    family: ChainFamily,
    max_depth: usize,
}

impl GroupChain {
    fn build(model: GroupModel, family: ChainFamily, max_depth: usize) -> Result<Self> {
        if max_depth == 0 || max_depth > MAX_CHAIN_DEPTH {
            return Err(Error::InvalidChain(format!(
                "max_depth must be in 1..={MAX_CHAIN_DEPTH}"
            )));
        }
        let chain = GroupChain {
            model,
            family,
            max_depth,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn rt_diag(p: i64, q: i64, third_base: i64, max_depth: usize) -> Result<Self> {
        if p < 2 || q < 2 || third_base < 1 {
            return Err(Error::InvalidChain(
                "RtDiag needs p, q ≥ 2 and third_base ≥ 1".into(),
            ));
        }
        Self::build(
            GroupModel::SplitExtZ2ByZ,
            ChainFamily::RtDiag { p, q, third_base },
            max_depth,
        )
    }

    pub fn heis_diag(p: i64, q: i64, max_depth: usize) -> Result<Self> {
        if p < 2 || q < 2 {
            return Err(Error::InvalidChain("HeisDiag needs p, q ≥ 2".into()));
        }
        Self::build(GroupModel::Heisenberg, ChainFamily::HeisDiag { p, q }, max_depth)
    }

    pub fn intersected(parent: &GroupChain, cover: FiniteIndexSubgroup) -> Result<Self> {
        if cover.model() != parent.model {
            return Err(Error::ModelMismatch {
                left: parent.model,
                right: cover.model(),
            });
        }
        if !cover.check_subgroup() {
            return Err(Error::InvalidSubgroup(format!(
                "cover {} is not a subgroup",
                cover.describe()
            )));
        }
        Self::build(
            parent.model,
            ChainFamily::Intersected {
                parent: Box::new(parent.clone()),
                cover,
            },
            parent.max_depth,
        )
    }

    pub fn explicit(levels: Vec<FiniteIndexSubgroup>) -> Result<Self> {
        let Some(first) = levels.first() else {
            return Err(Error::InvalidChain("empty level list".into()));
        };
        let model = first.model();
        if levels.iter().any(|l| l.model() != model) {
            return Err(Error::InvalidChain("levels from different models".into()));
        }
        if !first.same_set(&FiniteIndexSubgroup::whole(model))? {
            return Err(Error::InvalidChain("level 0 must be the whole group".into()));
        }
        let depth = levels.len() - 1;
        Self::build(model, ChainFamily::Explicit { levels }, depth)
    }

    /// `Sublattice(diag(s₁ⁿ, …, s_kⁿ))` in `FreeAbelian(k)`.
    pub fn abelian_powers(scales: &[i64], max_depth: usize) -> Result<Self> {
        let levels = (0..=max_depth as u32)
            .map(|n| {
                let d = scales
                    .iter()
                    .map(|&s| checked_pow(s, n))
                    .collect::<Result<Vec<_>>>()?;
                FiniteIndexSubgroup::diagonal_sublattice(&d)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(levels)
    }

    fn validate(&self) -> Result<()> {
        let ambient = self.ambient();
        if !self.level(0)?.same_set(&ambient)? {
            return Err(Error::InvalidChain("level 0 must be the ambient group".into()));
        }
        let mut prev = self.level(0)?;
        for n in 1..=self.max_depth {
            let cur = self.level(n)?;
            if !cur.check_subgroup() {
                return Err(Error::InvalidChain(format!(
                    "level {n} ({}) is not a subgroup",
                    cur.describe()
                )));
            }
            // Intersections with a coarse cover may repeat early levels.
            let strict = !matches!(self.family, ChainFamily::Intersected { .. });
            if !cur.is_subgroup_of(&prev)? || (strict && cur.index()? <= prev.index()?) {
                return Err(Error::InvalidChain(format!(
                    "level {n} does not properly descend from level {}",
                    n - 1
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    pub fn model(&self) -> GroupModel {
        self.model
    }

    pub fn family(&self) -> &ChainFamily {
        &self.family
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// The group the chain lives in: level 0.
    pub fn ambient(&self) -> FiniteIndexSubgroup {
        match &self.family {
            ChainFamily::Intersected { cover, .. } => cover.clone(),
            _ => FiniteIndexSubgroup::whole(self.model),
        }
    }

    pub fn ambient_generators(&self) -> Result<Vec<Elem>> {
        match &self.family {
            ChainFamily::Intersected { cover, .. } => cover.generators(),
            _ => Ok(self.model.standard_generators()),
        }
    }

    pub fn level(&self, n: usize) -> Result<FiniteIndexSubgroup> {
        if n > self.max_depth {
            return Err(Error::DepthOutOfRange {
                level: n,
                max_depth: self.max_depth,
            });
        }
        let e = n as u32;
        match &self.family {
            ChainFamily::RtDiag { p, q, third_base } => FiniteIndexSubgroup::diag_scales(
                checked_pow(*p, e)?,
                checked_pow(*q, e)?,
                checked_pow(*third_base, e)?,
            ),
            ChainFamily::HeisDiag { p, q } => {
                let pn = checked_pow(*p, e)?;
                FiniteIndexSubgroup::heisenberg_diag(pn, checked_pow(*q, e)?, pn)
            }
            ChainFamily::Intersected { parent, cover } => parent.level(n)?.intersect(cover),
            ChainFamily::Explicit { levels } => Ok(levels[n].clone()),
        }
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.max_depth {
            return Err(Error::DepthOutOfRange {
                level: depth,
                max_depth: self.max_depth,
            });
        }
        Ok(())
    }

    /// Elements with every coordinate in `[-bound, bound]` lying in all
    /// levels up to `depth`, in lexicographic order.
    pub fn truncated_kernel(&self, depth: usize, bound: i64) -> Result<Vec<Elem>> {
        self.check_depth(depth)?;
        let deepest = self.level(depth)?;
        let levels = (0..depth)
            .map(|i| self.level(i))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for g in box_members(&deepest, bound)? {
            let mut inside = true;
            for l in &levels {
                if !l.contains(&g)? {
                    inside = false;
                    break;
                }
            }
            if inside {
                out.push(g);
            }
        }
        Ok(out)
    }

    fn structured_h(&self, s: usize) -> Result<Vec<Elem>> {
        let e = s as u32;
        match self.family {
            // h = (p^s q, q^s y', p^s z')
            ChainFamily::HeisDiag { p, q } => {
                let (ps, qs) = (checked_pow(p, e)?, checked_pow(q, e)?);
                let psq = ps.checked_mul(q).ok_or(Error::Overflow("witness"))?;
                Ok(vec![
                    self.model.elem(&[psq, qs, ps])?,
                    self.model.elem(&[psq, 0, 0])?,
                ])
            }
            ChainFamily::RtDiag { p, q, .. } => Ok(vec![
                self.model.elem(&[checked_pow(p, e)?, 0, 0])?,
                self.model.elem(&[0, checked_pow(q, e)?, 0])?,
            ]),
            _ => Ok(vec![]),
        }
    }

    fn structured_gamma(&self, n: usize) -> Result<Vec<Elem>> {
        let e = n as u32;
        match self.family {
            // γ = (pⁿx, q^{n+1}, pⁿz)
            ChainFamily::HeisDiag { p, q } => {
                let (pn, qn1) = (checked_pow(p, e)?, checked_pow(q, e + 1)?);
                Ok(vec![
                    self.model.elem(&[pn, qn1, pn])?,
                    self.model.elem(&[0, qn1, 0])?,
                ])
            }
            ChainFamily::RtDiag { p, q, third_base } => {
                let tn = checked_pow(third_base, e)?;
                Ok(vec![
                    self.model.elem(&[0, 0, tn])?,
                    self.model.elem(&[checked_pow(p, e)?, checked_pow(q, e)?, tn])?,
                ])
            }
            _ => Ok(vec![]),
        }
    }

    fn gamma_candidates(&self, n: usize) -> Result<Vec<Elem>> {
        let mut out = self.structured_gamma(n)?;
        let gens = self.level(n)?.generators()?;
        for g in &gens {
            out.push(g.clone());
            out.push(g.inverse()?);
        }
        for (i, a) in gens.iter().enumerate() {
            for b in gens.iter().skip(i + 1) {
                out.push(a.multiply(b)?);
            }
        }
        Ok(out)
    }

    /// Searches `h ∈ level(s)` such that for every `n` in
    /// `target..=depth` some `γ ∈ level(n)` has `hγh⁻¹ ∉ level(target)`.
    fn witness_search(
        &self,
        s: usize,
        target: usize,
        depth: usize,
        extra_h: &[Elem],
        extra_gamma: &dyn Fn(usize) -> Result<Vec<Elem>>,
    ) -> Result<Option<Witness>> {
        self.check_depth(depth)?;
        if s >= target || target > depth {
            return Ok(None);
        }
        let home = self.level(s)?;
        let aim = self.level(target)?;
        let mut candidates: Vec<Elem> = extra_h.to_vec();
        candidates.extend(self.structured_h(s)?);
        candidates.extend(first_coset_reps(
            &self.level(s + 1)?,
            &home.generators()?,
            WITNESS_REP_LIMIT,
        )?);
        let mut gammas = Vec::with_capacity(depth + 1 - target);
        for n in target..=depth {
            let mut g = extra_gamma(n)?;
            g.extend(self.gamma_candidates(n)?);
            gammas.push((n, g));
        }
        'h: for h in candidates {
            if !home.contains(&h)? {
                continue;
            }
            let mut failures = Vec::with_capacity(gammas.len());
            for (n, gs) in &gammas {
                let level_n = self.level(*n)?;
                let mut hit = None;
                for g in gs {
                    if !level_n.contains(g)? {
                        continue;
                    }
                    let c = h.conjugate(g)?;
                    if !aim.contains(&c)? {
                        hit = Some(Failure {
                            n: *n,
                            gamma: g.clone(),
                            conjugate: c,
                        });
                        break;
                    }
                }
                match hit {
                    Some(f) => failures.push(f),
                    None => continue 'h,
                }
            }
            return Ok(Some(Witness {
                h,
                s,
                target,
                failures,
            }));
        }
        Ok(None)
    }
}

/// Members of `s` with all coordinates in `[-bound, bound]`.
fn box_members(s: &FiniteIndexSubgroup, bound: i64) -> Result<Vec<Elem>> {
    use crate::subgroup::SubgroupData;
    let multiples = |d: i64| -> Vec<i64> {
        let d = d.abs();
        (-(bound / d)..=bound / d).map(|k| k * d).collect()
    };
    let axes: Option<Vec<Vec<i64>>> = match s.data() {
        SubgroupData::DiagScales { alpha, beta, gamma } => {
            Some(vec![multiples(*alpha), multiples(*beta), multiples(*gamma)])
        }
        SubgroupData::HeisenbergBM { .. } => s
            .as_heisenberg_diag()
            .map(|(d1, d2, m)| vec![multiples(d1), multiples(d2), multiples(m)]),
        SubgroupData::Sublattice { basis } => {
            let n = basis.len();
            let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || basis[i][j] == 0));
            diagonal.then(|| (0..n).map(|i| multiples(basis[i][i])).collect())
        }
    };
    let model = s.model();
    let axes = match axes {
        Some(a) => a,
        None => {
            let side = (2 * bound + 1) as u64;
            if side.checked_pow(model.arity() as u32).is_none_or(|c| c > 20_000_000) {
                return Err(Error::InvalidParameter("kernel box too large".into()));
            }
            vec![(-bound..=bound).collect(); model.arity()]
        }
    };
    let mut points: Vec<Vec<i64>> = vec![vec![]];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in points {
        let g = model.elem(&p)?;
        if s.contains(&g)? {
            out.push(g);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Regular,
    WeaklyRegular,
    Irregular,
    InconclusiveAtDepth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub n: usize,
    pub gamma: Elem,
    pub conjugate: Elem,
}

/// `h ∈ level(s)` whose conjugation pushes some element of every
/// `level(n)`, `n ∈ [target, depth]`, outside `level(target)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub h: Elem,
    pub s: usize,
    pub target: usize,
    pub failures: Vec<Failure>,
}

impl Witness {
    /// Re-checks every recorded failure against the chain.
    pub fn verify(&self, chain: &GroupChain) -> Result<bool> {
        if !chain.level(self.s)?.contains(&self.h)? {
            return Ok(false);
        }
        let aim = chain.level(self.target)?;
        for f in &self.failures {
            if !chain.level(f.n)?.contains(&f.gamma)? {
                return Ok(false);
            }
            let c = self.h.conjugate(&f.gamma)?;
            if c != f.conjugate || aim.contains(&c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularityReport {
    pub verdict: Verdict,
    pub depth_checked: usize,
    pub witness: Option<Witness>,
    pub rationale: String,
}

/// `Some((i, g))` for the first level `i ≤ depth` not normalized by the
/// ambient generator `g`.
fn first_non_normal(chain: &GroupChain, depth: usize) -> Result<Option<(usize, Elem)>> {
    let gens = chain.ambient_generators()?;
    for i in 0..=depth {
        let l = chain.level(i)?;
        for g in &gens {
            if !l.is_normalized_by(g)? {
                return Ok(Some((i, g.clone())));
            }
        }
    }
    Ok(None)
}

/// Regular when every level up to `depth` is normal in the ambient group.
///
/// Normality is checked on ambient generators: the normalizer is a
/// subgroup, so it is everything exactly when it holds every generator.
pub fn normal_chain_test(chain: &GroupChain, depth: usize) -> Result<RegularityReport> {
    chain.check_depth(depth)?;
    Ok(match first_non_normal(chain, depth)? {
        None => RegularityReport {
            verdict: Verdict::Regular,
            depth_checked: depth,
            witness: None,
            rationale: format!("normal chain: levels 0..={depth} are normal in the ambient group"),
        },
        Some((i, g)) => RegularityReport {
            verdict: Verdict::InconclusiveAtDepth,
            depth_checked: depth,
            witness: None,
            rationale: format!("level {i} is not normalized by {g}; an equivalent normal chain is not excluded"),
        },
    })
}

pub fn irregularity_witness(chain: &GroupChain, s: usize, depth: usize) -> Result<Option<Witness>> {
    if chain.model().is_abelian() {
        return Ok(None);
    }
    chain.witness_search(s, s + 1, depth, &[], &|_| Ok(vec![]))
}

/// Largest `s` the probes require a witness for.
fn witness_bound(depth: usize) -> usize {
    depth.saturating_sub(1).min(3)
}

fn irregular_everywhere(chain: &GroupChain, depth: usize) -> Result<Option<Witness>> {
    if depth == 0 {
        return Ok(None);
    }
    let mut first = None;
    for s in 0..=witness_bound(depth) {
        match irregularity_witness(chain, s, depth)? {
            Some(w) => {
                first.get_or_insert(w);
            }
            None => return Ok(None),
        }
    }
    Ok(first)
}

/// Smallest `n < depth` such that `level(n)` normalizes every `level(i)`
/// for `i ∈ [n, depth]`.
fn normalizing_level(chain: &GroupChain, depth: usize) -> Result<Option<usize>> {
    'n: for n in 0..depth {
        let gens = chain.level(n)?.generators()?;
        for i in n..=depth {
            let li = chain.level(i)?;
            for g in &gens {
                if !li.is_normalized_by(g)? {
                    continue 'n;
                }
            }
        }
        return Ok(Some(n));
    }
    Ok(None)
}

pub fn weak_regularity_probe(chain: &GroupChain, depth: usize) -> Result<RegularityReport> {
    let normal = normal_chain_test(chain, depth)?;
    if normal.verdict == Verdict::Regular {
        return Ok(normal);
    }
    if let Some(w) = irregular_everywhere(chain, depth)? {
        return Ok(RegularityReport {
            verdict: Verdict::Irregular,
            depth_checked: depth,
            witness: Some(w),
            rationale: format!(
                "conjugation witnesses found for every s in 0..={}; no level normalizes all deeper checked levels",
                witness_bound(depth)
            ),
        });
    }
    if let Some(n) = normalizing_level(chain, depth)? {
        return Ok(RegularityReport {
            verdict: Verdict::WeaklyRegular,
            depth_checked: depth,
            witness: None,
            rationale: format!("level {n} normalizes every level in {n}..={depth}"),
        });
    }
    Ok(RegularityReport {
        verdict: Verdict::InconclusiveAtDepth,
        depth_checked: depth,
        witness: None,
        rationale: "no normal chain, no complete witness family, no normalizing level".into(),
    })
}

/// Parameters of the structured search for `HeisDiag(p, q)` inside a
/// diagonal cover `diag(a, b)·Z² × cZ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverSearch {
    pub s: usize,
    pub lcm_a: i64,
    pub lcm_b: i64,
    pub lcm_c: i64,
    /// Exponent of `p` in `lcm_a · lcm_b`.
    pub t: u32,
}

impl CoverSearch {
    pub fn new(p: i64, q: i64, a: i64, b: i64, c: i64) -> Result<Self> {
        let biggest = a.max(b).max(c);
        let mut s = 1u32;
        loop {
            let (ps, qs) = (checked_pow(p, s)?, checked_pow(q, s)?);
            if biggest < ps.min(qs) {
                let (la, lb, lc) = (lcm(a, ps)?, lcm(b, qs)?, lcm(c, ps)?);
                let ab = la.checked_mul(lb).ok_or(Error::Overflow("cover search"))?;
                return Ok(CoverSearch {
                    s: s as usize,
                    lcm_a: la,
                    lcm_b: lb,
                    lcm_c: lc,
                    t: valuation(ab, p),
                });
            }
            s += 1;
        }
    }

    /// `h = (A q, B y', C z')`.
    pub fn h(&self, q: i64, y: i64, z: i64) -> Result<Elem> {
        let coords = [
            self.lcm_a.checked_mul(q),
            self.lcm_b.checked_mul(y),
            self.lcm_c.checked_mul(z),
        ];
        let coords: Vec<i64> = coords
            .into_iter()
            .map(|c| c.ok_or(Error::Overflow("cover search")))
            .collect::<Result<_>>()?;
        GroupModel::Heisenberg.elem(&coords)
    }

    /// `γ = (A p^{n-s} x, B q^{n-s} q, C p^{n-s} z)`.
    pub fn gamma(&self, p: i64, q: i64, n: usize, x: i64, z: i64) -> Result<Elem> {
        let k = (n - self.s) as u32;
        let (pk, qk) = (checked_pow(p, k)?, checked_pow(q, k)?);
        let ov = || Error::Overflow("cover search");
        let u = self.lcm_a.checked_mul(pk).and_then(|v| v.checked_mul(x)).ok_or_else(ov)?;
        let v = self.lcm_b.checked_mul(qk).and_then(|v| v.checked_mul(q)).ok_or_else(ov)?;
        let w = self.lcm_c.checked_mul(pk).and_then(|v| v.checked_mul(z)).ok_or_else(ov)?;
        GroupModel::Heisenberg.elem(&[u, v, w])
    }
}

/// Regularity of `chain ∩ cover` regarded inside `cover`.
pub fn virtual_regularity_probe(
    chain: &GroupChain,
    cover: &FiniteIndexSubgroup,
    depth: usize,
) -> Result<RegularityReport> {
    chain.check_depth(depth)?;
    if cover.model() != chain.model() {
        return Err(Error::ModelMismatch {
            left: chain.model(),
            right: cover.model(),
        });
    }
    if !cover.check_subgroup() {
        return Err(Error::InvalidSubgroup(format!(
            "cover {} is not a subgroup",
            cover.describe()
        )));
    }
    if cover.same_set(&FiniteIndexSubgroup::whole(chain.model()))? {
        return weak_regularity_probe(chain, depth);
    }
    let inner = GroupChain::intersected(chain, cover.clone())?;
    let normal = normal_chain_test(&inner, depth)?;
    if normal.verdict == Verdict::Regular {
        return Ok(RegularityReport {
            rationale: format!("inside cover {}: {}", cover.describe(), normal.rationale),
            ..normal
        });
    }
    if let (ChainFamily::HeisDiag { p, q }, Some((a, b, c))) =
        (chain.family(), cover.as_heisenberg_diag())
    {
        let (p, q) = (*p, *q);
        let search = CoverSearch::new(p, q, a, b, c)?;
        let target = search.t as usize + 1;
        if search.s < target && target <= depth {
            let h = search.h(q, 1, 1)?;
            let gamma = |n: usize| -> Result<Vec<Elem>> {
                Ok(if n >= search.s {
                    vec![search.gamma(p, q, n, 1, 1)?, search.gamma(p, q, n, 0, 0)?]
                } else {
                    vec![]
                })
            };
            if let Some(w) = inner.witness_search(search.s, target, depth, &[h], &gamma)? {
                return Ok(RegularityReport {
                    verdict: Verdict::Irregular,
                    depth_checked: depth,
                    witness: Some(w),
                    rationale: format!(
                        "inside cover {}: s={}, A={}, B={}, C={}, t={}; conjugates leave level {target} at every n in {target}..={depth}",
                        cover.describe(),
                        search.s,
                        search.lcm_a,
                        search.lcm_b,
                        search.lcm_c,
                        search.t
                    ),
                });
            }
        }
    }
    let mut report = weak_regularity_probe(&inner, depth)?;
    report.rationale = format!("inside cover {}: {}", cover.describe(), report.rationale);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroup::{enumerate_cosets, normalizer};

    const H: GroupModel = GroupModel::Heisenberg;
    const S: GroupModel = GroupModel::SplitExtZ2ByZ;

    fn e(m: GroupModel, c: &[i64]) -> Elem {
        m.elem(c).unwrap()
    }

    #[test]
    fn level_examples() {
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        assert_eq!(
            h.level(1).unwrap(),
            FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap()
        );
        let rt = GroupChain::rt_diag(5, 7, 3, 4).unwrap();
        assert_eq!(rt.level(0).unwrap(), FiniteIndexSubgroup::whole(S));
        let inter =
            GroupChain::intersected(&rt, FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap())
                .unwrap();
        assert_eq!(
            inter.level(1).unwrap(),
            FiniteIndexSubgroup::diag_scales(5, 7, 6).unwrap()
        );
        assert!(matches!(rt.level(5), Err(Error::DepthOutOfRange { .. })));
    }

    #[test]
    fn rejects_non_descending() {
        let w = FiniteIndexSubgroup::whole(H);
        assert!(matches!(
            GroupChain::explicit(vec![w.clone(), w.clone()]),
            Err(Error::InvalidChain(_))
        ));
        let a = FiniteIndexSubgroup::heisenberg_diag(2, 2, 2).unwrap();
        let b = FiniteIndexSubgroup::heisenberg_diag(3, 3, 3).unwrap();
        assert!(GroupChain::explicit(vec![w, a, b]).is_err());
        assert!(GroupChain::heis_diag(2, 3, 0).is_err());
        assert!(GroupChain::rt_diag(1, 7, 3, 2).is_err());
    }

    #[test]
    fn descending_indices() {
        let chains = [
            GroupChain::heis_diag(2, 3, 6).unwrap(),
            GroupChain::rt_diag(5, 7, 3, 5).unwrap(),
            GroupChain::rt_diag(5, 7, 1, 5).unwrap(),
            GroupChain::abelian_powers(&[2, 3, 5], 5).unwrap(),
        ];
        for c in &chains {
            for n in 0..c.max_depth() {
                let (a, b) = (c.level(n).unwrap(), c.level(n + 1).unwrap());
                assert!(b.is_subgroup_of(&a).unwrap());
                assert!(b.index().unwrap() > a.index().unwrap());
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        assert_eq!(h.truncated_kernel(6, 30).unwrap(), vec![H.identity()]);
        // The third scale 3^4 = 81 fits in a box of radius 100.
        let rt = GroupChain::rt_diag(5, 7, 3, 4).unwrap();
        assert_eq!(
            rt.truncated_kernel(4, 100).unwrap(),
            vec![e(S, &[0, 0, -81]), S.identity(), e(S, &[0, 0, 81])]
        );
        assert_eq!(rt.truncated_kernel(4, 80).unwrap(), vec![S.identity()]);
        let axis = GroupChain::rt_diag(5, 7, 1, 4).unwrap();
        let k = axis.truncated_kernel(4, 3).unwrap();
        let expected: Vec<Elem> = (-3..=3).map(|c| e(S, &[0, 0, c])).collect();
        assert_eq!(k, expected);
    }

    #[test]
    fn kernel_matches_box_scan() {
        // Independent scan of the full box against every level.
        let rt = GroupChain::rt_diag(5, 7, 3, 4).unwrap();
        let mut scan = vec![];
        for a in -100..=100 {
            for b in -100..=100 {
                for c in -100..=100 {
                    if a % 625 == 0 && b % 2401 == 0 && c % 81 == 0 {
                        scan.push(e(S, &[a, b, c]));
                    }
                }
            }
        }
        assert_eq!(rt.truncated_kernel(4, 100).unwrap(), scan);
    }

    #[test]
    fn kernel_is_closed_in_box() {
        let axis = GroupChain::rt_diag(5, 7, 1, 3).unwrap();
        let k = axis.truncated_kernel(3, 4).unwrap();
        for a in &k {
            let inv = a.inverse().unwrap();
            assert!(axis.level(3).unwrap().contains(&inv).unwrap());
            for b in &k {
                let p = a.multiply(b).unwrap();
                if p.coords().iter().all(|x| x.abs() <= 4) {
                    assert!(k.contains(&p));
                }
            }
        }
    }

    #[test]
    fn normal_chain_examples() {
        let rt = GroupChain::rt_diag(5, 7, 3, 4).unwrap();
        let inter =
            GroupChain::intersected(&rt, FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap())
                .unwrap();
        assert_eq!(normal_chain_test(&inter, 3).unwrap().verdict, Verdict::Regular);
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        let r = normal_chain_test(&h, 3).unwrap();
        assert_eq!(r.verdict, Verdict::InconclusiveAtDepth);
        assert!(r.rationale.starts_with("level 1"));
    }

    #[test]
    fn normal_test_agrees_with_normalizer_tables() {
        let chains = [
            GroupChain::heis_diag(2, 3, 3).unwrap(),
            GroupChain::rt_diag(5, 7, 3, 2).unwrap(),
            GroupChain::abelian_powers(&[2, 3], 3).unwrap(),
            GroupChain::intersected(
                &GroupChain::rt_diag(5, 7, 3, 2).unwrap(),
                FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap(),
            )
            .unwrap(),
        ];
        for c in &chains {
            for d in 0..=c.max_depth() {
                let by_tables = (0..=d).all(|i| {
                    let t = enumerate_cosets(&c.level(i).unwrap(), &c.ambient_generators().unwrap())
                        .unwrap();
                    normalizer(&t).unwrap().is_everything()
                });
                let verdict = normal_chain_test(c, d).unwrap().verdict;
                assert_eq!(by_tables, verdict == Verdict::Regular);
            }
        }
    }

    #[test]
    fn heisenberg_witness() {
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        let w = irregularity_witness(&h, 1, 6).unwrap().unwrap();
        assert_eq!(w.h, e(H, &[6, 3, 2]));
        assert_eq!(w.target, 2);
        assert_eq!(w.failures.len(), 5);
        assert!(w.verify(&h).unwrap());
        // n = 2: γ = (4, 27, 4); third entry 4 + 6·27 - 4·3 = 154 = 2·77
        assert_eq!(w.failures[0].gamma, e(H, &[4, 27, 4]));
        assert_eq!(w.failures[0].conjugate, e(H, &[4, 27, 154]));
        // the simpler pattern h = (6,0,0), γ = (0,27,0): 162 = 2·81
        let c = e(H, &[6, 0, 0]).conjugate(&e(H, &[0, 27, 0])).unwrap();
        assert_eq!(c.coords()[2], 162);
        assert_ne!(c.coords()[2] % 4, 0);
    }

    #[test]
    fn rt_witness() {
        let rt = GroupChain::rt_diag(5, 7, 3, 3).unwrap();
        let w = irregularity_witness(&rt, 0, 3).unwrap().unwrap();
        assert_eq!(w.h, e(S, &[1, 0, 0]));
        for f in &w.failures {
            assert_eq!(f.conjugate.coords()[0], 2 + f.gamma.coords()[0]);
        }
        assert!(w.verify(&rt).unwrap());
    }

    #[test]
    fn abelian_chains_have_no_witness() {
        let c = GroupChain::abelian_powers(&[2, 3, 5], 4).unwrap();
        for s in 0..3 {
            assert!(irregularity_witness(&c, s, 4).unwrap().is_none());
        }
        assert_eq!(weak_regularity_probe(&c, 4).unwrap().verdict, Verdict::Regular);
    }

    #[test]
    fn weak_probe_examples() {
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        let r = weak_regularity_probe(&h, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Irregular);
        for s in 0..=3 {
            let w = irregularity_witness(&h, s, 5).unwrap().unwrap();
            assert!(w.verify(&h).unwrap());
        }
        let rt = GroupChain::rt_diag(5, 7, 3, 4).unwrap();
        assert_eq!(weak_regularity_probe(&rt, 4).unwrap().verdict, Verdict::Irregular);
    }

    #[test]
    fn virtual_probe_examples() {
        let h = GroupChain::heis_diag(2, 3, 6).unwrap();
        let cover = FiniteIndexSubgroup::heisenberg_diag(2, 2, 2).unwrap();
        let r = virtual_regularity_probe(&h, &cover, 6).unwrap();
        assert_eq!(r.verdict, Verdict::Irregular);
        let w = r.witness.unwrap();
        // s = 2, A = 4, B = 18, C = 4, t = v₂(72) = 3
        assert_eq!((w.s, w.target), (2, 4));
        assert_eq!(w.h, e(H, &[12, 18, 4]));
        let inner = GroupChain::intersected(&h, cover).unwrap();
        assert!(w.verify(&inner).unwrap());

        let rt = GroupChain::rt_diag(5, 7, 3, 3).unwrap();
        let half = FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap();
        assert_eq!(
            virtual_regularity_probe(&rt, &half, 3).unwrap().verdict,
            Verdict::Regular
        );
        let whole = FiniteIndexSubgroup::whole(H);
        assert_eq!(
            virtual_regularity_probe(&h, &whole, 5).unwrap(),
            weak_regularity_probe(&h, 5).unwrap()
        );
    }

    #[test]
    fn cover_search_parameters() {
        let c = CoverSearch::new(2, 3, 2, 2, 2).unwrap();
        assert_eq!((c.s, c.lcm_a, c.lcm_b, c.lcm_c, c.t), (2, 4, 18, 4, 3));
        // max(4,9,8) = 9 < min(2^s, 3^s) first holds at s = 4
        let c = CoverSearch::new(2, 3, 4, 9, 8).unwrap();
        assert_eq!((c.s, c.lcm_a, c.lcm_b, c.lcm_c), (4, 16, 81, 16));
    }

    #[test]
    fn verdicts_are_consistent() {
        let chains = [
            GroupChain::heis_diag(2, 3, 4).unwrap(),
            GroupChain::heis_diag(3, 5, 4).unwrap(),
            GroupChain::rt_diag(5, 7, 3, 4).unwrap(),
            GroupChain::rt_diag(5, 7, 1, 4).unwrap(),
            GroupChain::abelian_powers(&[2, 3], 4).unwrap(),
            GroupChain::intersected(
                &GroupChain::rt_diag(5, 7, 3, 4).unwrap(),
                FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap(),
            )
            .unwrap(),
        ];
        for c in &chains {
            for d in 1..=4 {
                let regular = normal_chain_test(c, d).unwrap().verdict == Verdict::Regular;
                for s in 0..d {
                    let w = irregularity_witness(c, s, d).unwrap();
                    assert!(!(regular && w.is_some()));
                    if let Some(w) = w {
                        assert!(w.verify(c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let h = GroupChain::heis_diag(2, 3, 3).unwrap();
        let r = weak_regularity_probe(&h, 3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "irregular");
        assert_eq!(v["depth_checked"], 3);
        assert_eq!(v["witness"]["s"], 0);
        assert!(v["witness"]["failures"][0]["gamma"].is_array());
        assert!(v["rationale"].is_string());
    }
}
