//! Finite-index subgroups in canonical families, exact membership, coset
//! enumeration and normalizers.
//!
//! Three families cover everything the chains need:
//!
//! * `Sublattice` in `FreeAbelian(n)`: the columns of a square integer matrix.
//! * `HeisenbergBM` in `Heisenberg`: the set `B·Z² × mZ`.
//! * `DiagScales` in `SplitExtZ2ByZ`: the set `{(αa, βb, γc)}`.
//!
//! Each family admits a closed-form left-coset normal form, so a coset
//! `gS` maps to a dense integer in `[0, |G:S|)` without any search. Coset
//! tables are built by breadth-first search from the identity and keep the
//! first-discovered element of each coset as its representative.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Elem, GroupModel};
use crate::lattice::{gcd, lcm, Lattice};

/// Default guard for coset enumeration.
pub const DEFAULT_COSET_CAP: usize = 1_000_000;

/// Coset indices up to this bound use a flat lookup array.
const DENSE_LOOKUP_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubgroupData {
    /// Row-major square matrix; the subgroup is spanned by its columns.
    Sublattice { basis: Vec<Vec<i64>> },
    #[serde(rename = "heisenberg-bm")]
    HeisenbergBM { b: [[i64; 2]; 2], m: i64 },
    DiagScales { alpha: i64, beta: i64, gamma: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteIndexSubgroup {
    model: GroupModel,
    #[serde(flatten)]
    data: SubgroupData,
}

impl FiniteIndexSubgroup {
    pub fn new(model: GroupModel, data: SubgroupData) -> Result<Self> {
        match (&model, &data) {
            (GroupModel::FreeAbelian { rank }, SubgroupData::Sublattice { basis }) => {
                let n = *rank as usize;
                if basis.len() != n || basis.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidSubgroup(format!(
                        "sublattice basis must be {n}x{n}"
                    )));
                }
                if !Lattice::from_matrix_columns(basis)?.is_full_rank() {
                    return Err(Error::InvalidSubgroup(
                        "sublattice basis has zero determinant".into(),
                    ));
                }
            }
            (GroupModel::Heisenberg, SubgroupData::HeisenbergBM { b, m }) => {
                if *m <= 0 {
                    return Err(Error::InvalidSubgroup("m must be positive".into()));
                }
                if det2(b)? == 0 {
                    return Err(Error::InvalidSubgroup("B has zero determinant".into()));
                }
            }
            (
                GroupModel::SplitExtZ2ByZ,
                SubgroupData::DiagScales { alpha, beta, gamma },
            ) => {
                if *alpha <= 0 || *beta <= 0 || *gamma <= 0 {
                    return Err(Error::InvalidSubgroup("scales must be positive".into()));
                }
            }
            _ => {
                return Err(Error::InvalidSubgroup(format!(
                    "subgroup family does not belong to {model}"
                )))
            }
        }
        Ok(FiniteIndexSubgroup { model, data })
    }

    pub fn sublattice(rows: Vec<Vec<i64>>) -> Result<Self> {
        let rank = u32::try_from(rows.len())
            .map_err(|_| Error::InvalidSubgroup("rank too large".into()))?;
        let model = GroupModel::free_abelian(rank)?;
        Self::new(model, SubgroupData::Sublattice { basis: rows })
    }

    pub fn diagonal_sublattice(scales: &[i64]) -> Result<Self> {
        let n = scales.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { scales[i] } else { 0 }).collect())
            .collect();
        Self::sublattice(rows)
    }

    pub fn heisenberg_bm(b: [[i64; 2]; 2], m: i64) -> Result<Self> {
        Self::new(GroupModel::Heisenberg, SubgroupData::HeisenbergBM { b, m })
    }

    pub fn heisenberg_diag(d1: i64, d2: i64, m: i64) -> Result<Self> {
        Self::heisenberg_bm([[d1, 0], [0, d2]], m)
    }

    pub fn diag_scales(alpha: i64, beta: i64, gamma: i64) -> Result<Self> {
        Self::new(
            GroupModel::SplitExtZ2ByZ,
            SubgroupData::DiagScales { alpha, beta, gamma },
        )
    }

    pub fn whole(model: GroupModel) -> Self {
        let data = match model {
            GroupModel::FreeAbelian { rank } => {
                let n = rank as usize;
                SubgroupData::Sublattice {
                    basis: (0..n)
                        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                        .collect(),
                }
            }
            GroupModel::Heisenberg => SubgroupData::HeisenbergBM {
                b: [[1, 0], [0, 1]],
                m: 1,
            },
            GroupModel::SplitExtZ2ByZ => SubgroupData::DiagScales {
                alpha: 1,
                beta: 1,
                gamma: 1,
            },
        };
        FiniteIndexSubgroup { model, data }
    }

    pub fn model(&self) -> GroupModel {
        self.model
    }

    pub fn data(&self) -> &SubgroupData {
        &self.data
    }

    /// `(d1, d2, m)` for a Heisenberg subgroup with diagonal `B`.
    pub fn as_heisenberg_diag(&self) -> Option<(i64, i64, i64)> {
        match self.data {
            SubgroupData::HeisenbergBM { b, m } if b[0][1] == 0 && b[1][0] == 0 => {
                Some((b[0][0].abs(), b[1][1].abs(), m))
            }
            _ => None,
        }
    }

    fn check_model(&self, g: &Elem) -> Result<()> {
        if g.model() != self.model {
            return Err(Error::ModelMismatch {
                left: self.model,
                right: g.model(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, g: &Elem) -> Result<bool> {
        self.check_model(g)?;
        let c = g.coords();
        match &self.data {
            SubgroupData::Sublattice { basis } => Lattice::from_matrix_columns(basis)?.contains(c),
            SubgroupData::HeisenbergBM { b, m } => {
                Ok(c[2] % m == 0 && solve2(b, c[0], c[1])?.is_some())
            }
            SubgroupData::DiagScales { alpha, beta, gamma } => {
                Ok(c[0] % alpha == 0 && c[1] % beta == 0 && c[2] % gamma == 0)
            }
        }
    }

    /// Whether the described set is closed under the group law.
    ///
    /// For `B·Z² × mZ` the products of two members differ from the
    /// coordinatewise sum by `u_x · u'_y` in the third slot, where `u_x`
    /// ranges over `gcd(row 1)·Z` and `u'_y` over `gcd(row 2)·Z`; the set is a
    /// subgroup exactly when `m` divides `gcd(row 1)·gcd(row 2)`.
    pub fn check_subgroup(&self) -> bool {
        match &self.data {
            SubgroupData::HeisenbergBM { b, m } => {
                let g1 = gcd(b[0][0], b[0][1]) as i128;
                let g2 = gcd(b[1][0], b[1][1]) as i128;
                (g1 * g2) % (*m as i128) == 0
            }
            // A = -I preserves every diagonal lattice.
            SubgroupData::Sublattice { .. } | SubgroupData::DiagScales { .. } => true,
        }
    }

    /// The row-divisibility test: `m` divides both entries of some row of
    /// `B`. Sufficient for closure but not necessary (`diag(2,3)`, `m = 6`
    /// is a subgroup that fails it).
    pub fn row_divisibility_criterion(&self) -> bool {
        match &self.data {
            SubgroupData::HeisenbergBM { b, m } => b
                .iter()
                .any(|row| row[0] % m == 0 && row[1] % m == 0),
            _ => true,
        }
    }

    /// Members spanning the set: lattice generators and their negatives.
    fn closure_slate(&self) -> Result<Vec<Elem>> {
        let mut slate = Vec::new();
        for g in self.raw_generators()? {
            let neg: Vec<i64> = g.coords().iter().map(|&x| -x).collect();
            slate.push(g);
            slate.push(self.model.elem(&neg)?);
        }
        Ok(slate)
    }

    /// Brute-force closure check: every product of at most `radius` slate
    /// members must stay in the set. Returns the first escaping product.
    pub fn closure_oracle(&self, radius: usize) -> Result<ClosureVerdict> {
        if radius == 0 || radius > 6 {
            return Err(Error::InvalidParameter("closure radius must be in 1..=6".into()));
        }
        let slate = self.closure_slate()?;
        let mut seen: HashSet<Elem> = HashSet::new();
        let mut frontier: Vec<(Elem, Vec<usize>)> = vec![(self.model.identity(), vec![])];
        seen.insert(self.model.identity());
        for _ in 0..radius {
            let mut next = Vec::new();
            for (g, word) in &frontier {
                for (i, s) in slate.iter().enumerate() {
                    let p = g.multiply(s)?;
                    if !seen.insert(p.clone()) {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(i);
                    if !self.contains(&p)? {
                        return Ok(ClosureVerdict {
                            closed: false,
                            witness: Some(ClosureWitness {
                                factors: w.iter().map(|&k| slate[k].clone()).collect(),
                                product: p,
                            }),
                        });
                    }
                    next.push((p, w));
                }
            }
            frontier = next;
        }
        Ok(ClosureVerdict {
            closed: true,
            witness: None,
        })
    }

    fn raw_generators(&self) -> Result<Vec<Elem>> {
        let m = self.model;
        match &self.data {
            SubgroupData::Sublattice { basis } => {
                let n = basis.len();
                (0..n)
                    .map(|j| {
                        let col: Vec<i64> = basis.iter().map(|r| r[j]).collect();
                        m.elem(&col)
                    })
                    .collect()
            }
            SubgroupData::HeisenbergBM { b, m: modulus } => Ok(vec![
                m.elem(&[b[0][0], b[1][0], 0])?,
                m.elem(&[b[0][1], b[1][1], 0])?,
                m.elem(&[0, 0, *modulus])?,
            ]),
            SubgroupData::DiagScales { alpha, beta, gamma } => Ok(vec![
                m.elem(&[*alpha, 0, 0])?,
                m.elem(&[0, *beta, 0])?,
                m.elem(&[0, 0, *gamma])?,
            ]),
        }
    }

    /// A generating set of the subgroup.
    pub fn generators(&self) -> Result<Vec<Elem>> {
        self.require_subgroup()?;
        self.raw_generators()
    }

    fn require_subgroup(&self) -> Result<()> {
        if !self.check_subgroup() {
            return Err(Error::InvalidSubgroup(format!(
                "{} is not closed under multiplication",
                self.describe()
            )));
        }
        Ok(())
    }

    pub fn index(&self) -> Result<u64> {
        match &self.data {
            SubgroupData::Sublattice { basis } => Lattice::from_matrix_columns(basis)?
                .index()?
                .ok_or_else(|| Error::InvalidSubgroup("infinite index".into())),
            SubgroupData::HeisenbergBM { b, m } => det2(b)?
                .unsigned_abs()
                .checked_mul(*m as u64)
                .ok_or(Error::Overflow("index")),
            SubgroupData::DiagScales { alpha, beta, gamma } => (*alpha as u64)
                .checked_mul(*beta as u64)
                .and_then(|x| x.checked_mul(*gamma as u64))
                .ok_or(Error::Overflow("index")),
        }
    }

    /// Whether every generator of `self` lies in `other` (so `self ⊆ other`).
    pub fn is_subgroup_of(&self, other: &FiniteIndexSubgroup) -> Result<bool> {
        for g in self.generators()? {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality of the underlying sets.
    pub fn same_set(&self, other: &FiniteIndexSubgroup) -> Result<bool> {
        Ok(self.model == other.model
            && self.is_subgroup_of(other)?
            && other.is_subgroup_of(self)?)
    }

    /// Whether `g S g⁻¹ = S`. Conjugation preserves the index, so inclusion
    /// on generators suffices.
    pub fn is_normalized_by(&self, g: &Elem) -> Result<bool> {
        for s in self.generators()? {
            if !self.contains(&g.conjugate(&s)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &FiniteIndexSubgroup) -> Result<FiniteIndexSubgroup> {
        if self.model != other.model {
            return Err(Error::ModelMismatch {
                left: self.model,
                right: other.model,
            });
        }
        match (&self.data, &other.data) {
            (
                SubgroupData::DiagScales { alpha, beta, gamma },
                SubgroupData::DiagScales {
                    alpha: a2,
                    beta: b2,
                    gamma: c2,
                },
            ) => Self::diag_scales(lcm(*alpha, *a2)?, lcm(*beta, *b2)?, lcm(*gamma, *c2)?),
            (SubgroupData::HeisenbergBM { .. }, SubgroupData::HeisenbergBM { .. }) => {
                match (self.as_heisenberg_diag(), other.as_heisenberg_diag()) {
                    (Some((d1, d2, m)), Some((e1, e2, n))) => {
                        Self::heisenberg_diag(lcm(d1, e1)?, lcm(d2, e2)?, lcm(m, n)?)
                    }
                    _ => Err(Error::NotCanonical(
                        "Heisenberg intersections need diagonal B".into(),
                    )),
                }
            }
            (SubgroupData::Sublattice { basis: a }, SubgroupData::Sublattice { basis: b }) => {
                let l = Lattice::from_matrix_columns(a)?
                    .intersect(&Lattice::from_matrix_columns(b)?)?;
                let n = l.dim();
                let rows = (0..n)
                    .map(|i| l.basis().iter().map(|c| c[i]).collect())
                    .collect();
                Self::sublattice(rows)
            }
            _ => Err(Error::NotCanonical("mixed subgroup families".into())),
        }
    }

    pub fn describe(&self) -> String {
        match &self.data {
            SubgroupData::Sublattice { basis } => format!("Sublattice({basis:?})"),
            SubgroupData::HeisenbergBM { b, m } => format!("HeisenbergBM({b:?}, m={m})"),
            SubgroupData::DiagScales { alpha, beta, gamma } => {
                format!("DiagScales({alpha},{beta},{gamma})")
            }
        }
    }

    pub fn coset_indexer(&self) -> Result<CosetIndexer> {
        self.require_subgroup()?;
        let kind = match &self.data {
            SubgroupData::Sublattice { basis } => {
                let lattice = Lattice::from_matrix_columns(basis)?;
                IndexerKind::Lattice {
                    radices: lattice.diagonal(),
                    lattice,
                }
            }
            SubgroupData::HeisenbergBM { b, m } => {
                let lattice = Lattice::from_matrix_columns(&[b[0].to_vec(), b[1].to_vec()])?;
                IndexerKind::Heisenberg {
                    radices: lattice.diagonal(),
                    lattice,
                    m: *m,
                }
            }
            SubgroupData::DiagScales { alpha, beta, gamma } => IndexerKind::Diag {
                scales: [*alpha, *beta, *gamma],
            },
        };
        Ok(CosetIndexer {
            model: self.model,
            total: self.index()?,
            kind,
        })
    }
}

fn det2(b: &[[i64; 2]; 2]) -> Result<i64> {
    let p = (b[0][0] as i128) * (b[1][1] as i128) - (b[0][1] as i128) * (b[1][0] as i128);
    i64::try_from(p).map_err(|_| Error::Overflow("det"))
}

/// Integer solution `t` of `B t = (u, v)` via the adjugate, if one exists.
fn solve2(b: &[[i64; 2]; 2], u: i64, v: i64) -> Result<Option<(i64, i64)>> {
    let det = det2(b)? as i128;
    let (u, v) = (u as i128, v as i128);
    let n1 = b[1][1] as i128 * u - b[0][1] as i128 * v;
    let n2 = -(b[1][0] as i128) * u + b[0][0] as i128 * v;
    if n1 % det != 0 || n2 % det != 0 {
        return Ok(None);
    }
    let t1 = i64::try_from(n1 / det).map_err(|_| Error::Overflow("solve"))?;
    let t2 = i64::try_from(n2 / det).map_err(|_| Error::Overflow("solve"))?;
    Ok(Some((t1, t2)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureWitness {
    pub factors: Vec<Elem>,
    pub product: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureVerdict {
    pub closed: bool,
    pub witness: Option<ClosureWitness>,
}

#[derive(Debug, Clone)]
enum IndexerKind {
    Lattice { lattice: Lattice, radices: Vec<i64> },
    Heisenberg { lattice: Lattice, radices: Vec<i64>, m: i64 },
    Diag { scales: [i64; 3] },
}

/// Maps an element `g` to the dense number of the left coset `gS`.
#[derive(Debug, Clone)]
pub struct CosetIndexer {
    model: GroupModel,
    total: u64,
    kind: IndexerKind,
}

fn mixed_radix(digits: &[i64], radices: &[i64]) -> u64 {
    digits
        .iter()
        .zip(radices)
        .fold(0u64, |acc, (&d, &r)| acc * r as u64 + d as u64)
}

impl CosetIndexer {
    /// Number of cosets `|G : S|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn index_of(&self, g: &Elem) -> Result<u64> {
        if g.model() != self.model {
            return Err(Error::ModelMismatch {
                left: self.model,
                right: g.model(),
            });
        }
        let c = g.coords();
        Ok(match &self.kind {
            IndexerKind::Lattice { lattice, radices } => {
                mixed_radix(&lattice.reduce(c)?, radices)
            }
            IndexerKind::Heisenberg {
                lattice,
                radices,
                m,
            } => {
                // g·(s, 0) with s ∈ B·Z² moves (x, y) to its reduced form and
                // shifts z by x·s_y; the rest of the coset only moves z by mZ.
                let (red, shift) = lattice.reduce_with_shift(&c[..2])?;
                let z = c[0]
                    .checked_mul(shift[1])
                    .and_then(|t| t.checked_add(c[2]))
                    .ok_or(Error::Overflow("coset index"))?;
                mixed_radix(&red, radices) * (*m as u64) + z.rem_euclid(*m) as u64
            }
            IndexerKind::Diag { scales } => {
                let d: Vec<i64> = c.iter().zip(scales).map(|(&x, &s)| x.rem_euclid(s)).collect();
                mixed_radix(&d, scales)
            }
        })
    }
}

#[derive(Debug, Clone)]
enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

/// Left cosets of a subgroup inside the group generated by an ambient slate.
#[derive(Debug, Clone)]
pub struct CosetTable {
    subgroup: FiniteIndexSubgroup,
    indexer: CosetIndexer,
    reps: Vec<Elem>,
    lookup: Lookup,
}

impl Serialize for CosetTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("CosetTable", 2)?;
        st.serialize_field("index", &self.reps.len())?;
        st.serialize_field("reps", &self.reps)?;
        st.end()
    }
}

impl CosetTable {
    /// Breadth-first enumeration from the identity under left
    /// multiplication by `generators` and then their inverses.
    pub fn enumerate(
        subgroup: &FiniteIndexSubgroup,
        generators: &[Elem],
        cap: usize,
    ) -> Result<Self> {
        let (indexer, reps, lookup, complete) = bfs(subgroup, generators, cap)?;
        if !complete {
            return Err(Error::IndexTooLarge { cap });
        }
        Ok(CosetTable {
            subgroup: subgroup.clone(),
            indexer,
            reps,
            lookup,
        })
    }

    /// Rebuilds a table from stored representatives, rejecting lists with
    /// two reps in one coset or a first rep outside the subgroup.
    pub fn from_reps(subgroup: &FiniteIndexSubgroup, reps: Vec<Elem>) -> Result<Self> {
        let indexer = subgroup.coset_indexer()?;
        let mut lookup = if indexer.total() <= DENSE_LOOKUP_LIMIT {
            Lookup::Dense(vec![u32::MAX; indexer.total() as usize])
        } else {
            Lookup::Sparse(HashMap::new())
        };
        match reps.first() {
            Some(r) if subgroup.contains(r)? => {}
            _ => return Err(Error::InvalidSubgroup("first rep must lie in the subgroup".into())),
        }
        for (i, r) in reps.iter().enumerate() {
            let key = indexer.index_of(r)?;
            if get(&lookup, key).is_some() {
                return Err(Error::InvalidSubgroup(format!("rep {r} repeats a coset")));
            }
            insert(&mut lookup, key, i as u32);
        }
        Ok(CosetTable {
            subgroup: subgroup.clone(),
            indexer,
            reps,
            lookup,
        })
    }

    pub fn subgroup(&self) -> &FiniteIndexSubgroup {
        &self.subgroup
    }

    pub fn index(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[Elem] {
        &self.reps
    }

    /// Position of the coset `gS`, or `None` when it is outside the table.
    pub fn position(&self, g: &Elem) -> Result<Option<usize>> {
        let key = self.indexer.index_of(g)?;
        Ok(get(&self.lookup, key).map(|p| p as usize))
    }
}

type BfsOutput = (CosetIndexer, Vec<Elem>, Lookup, bool);

fn bfs(subgroup: &FiniteIndexSubgroup, generators: &[Elem], limit: usize) -> Result<BfsOutput> {
    let indexer = subgroup.coset_indexer()?;
    let mut slate = generators.to_vec();
    for g in generators {
        slate.push(g.inverse()?);
    }
    let mut lookup = if indexer.total() <= DENSE_LOOKUP_LIMIT {
        Lookup::Dense(vec![u32::MAX; indexer.total() as usize])
    } else {
        Lookup::Sparse(HashMap::new())
    };
    let id = subgroup.model().identity();
    let mut reps = vec![id.clone()];
    insert(&mut lookup, indexer.index_of(&id)?, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(pos) = queue.pop_front() {
        for s in &slate {
            let next = s.multiply(&reps[pos])?;
            let key = indexer.index_of(&next)?;
            if get(&lookup, key).is_none() {
                if reps.len() >= limit {
                    return Ok((indexer, reps, lookup, false));
                }
                insert(&mut lookup, key, reps.len() as u32);
                queue.push_back(reps.len());
                reps.push(next);
            }
        }
    }
    Ok((indexer, reps, lookup, true))
}

/// The first `limit` representatives in table order, without requiring the
/// enumeration to finish.
pub fn first_coset_reps(
    subgroup: &FiniteIndexSubgroup,
    generators: &[Elem],
    limit: usize,
) -> Result<Vec<Elem>> {
    Ok(bfs(subgroup, generators, limit)?.1)
}

fn insert(lookup: &mut Lookup, key: u64, pos: u32) {
    match lookup {
        Lookup::Dense(v) => v[key as usize] = pos,
        Lookup::Sparse(m) => {
            m.insert(key, pos);
        }
    }
}

fn get(lookup: &Lookup, key: u64) -> Option<u32> {
    match lookup {
        Lookup::Dense(v) => v.get(key as usize).copied().filter(|&p| p != u32::MAX),
        Lookup::Sparse(m) => m.get(&key).copied(),
    }
}

/// Default slate for the whole model: the coordinate unit vectors.
pub fn default_generators(model: GroupModel) -> Vec<Elem> {
    model.standard_generators()
}

/// Cosets of `subgroup` in the subgroup generated by `generators`, capped at
/// [`DEFAULT_COSET_CAP`].
pub fn enumerate_cosets(subgroup: &FiniteIndexSubgroup, generators: &[Elem]) -> Result<CosetTable> {
    CosetTable::enumerate(subgroup, generators, DEFAULT_COSET_CAP)
}

#[derive(Debug, Clone, Serialize)]
pub struct Normalizer {
    /// Size of the coset table.
    pub table_index: usize,
    /// Table positions whose representative normalizes the subgroup.
    pub positions: Vec<usize>,
    pub reps: Vec<Elem>,
}

impl Normalizer {
    /// `|N(S) : S|` relative to the ambient slate.
    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn is_everything(&self) -> bool {
        self.positions.len() == self.table_index
    }
}

/// Coset representatives `r` with `r S r⁻¹ = S`, by exhaustive conjugation.
pub fn normalizer(table: &CosetTable) -> Result<Normalizer> {
    let s = table.subgroup();
    let gens = s.generators()?;
    let mut positions = Vec::new();
    let mut reps = Vec::new();
    'rep: for (i, r) in table.reps().iter().enumerate() {
        for g in &gens {
            if !s.contains(&r.conjugate(g)?)? {
                continue 'rep;
            }
        }
        positions.push(i);
        reps.push(r.clone());
    }
    Ok(Normalizer {
        table_index: table.index(),
        positions,
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: GroupModel = GroupModel::Heisenberg;
    const S: GroupModel = GroupModel::SplitExtZ2ByZ;

    fn e(m: GroupModel, c: &[i64]) -> Elem {
        m.elem(c).unwrap()
    }

    /// Number of classes of `points` under `g ~ h iff g⁻¹h ∈ S`, by pairwise
    /// comparison against class leaders.
    fn brute_force_classes(s: &FiniteIndexSubgroup, points: &[Elem]) -> usize {
        let mut leaders: Vec<&Elem> = Vec::new();
        for p in points {
            let mut found = false;
            for l in &leaders {
                if s.contains(&l.inverse().unwrap().multiply(p).unwrap()).unwrap() {
                    found = true;
                    break;
                }
            }
            if !found {
                leaders.push(p);
            }
        }
        leaders.len()
    }

    fn box_points(m: GroupModel, ranges: &[i64]) -> Vec<Elem> {
        let mut out = vec![vec![]];
        for &r in ranges {
            out = out
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    (0..r).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out.iter().map(|c| e(m, c)).collect()
    }

    #[test]
    fn contains_examples() {
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        assert!(s.contains(&e(H, &[4, 3, 6])).unwrap());
        assert!(!s.contains(&e(H, &[1, 0, 0])).unwrap());
        let d = FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap();
        assert!(d.contains(&e(S, &[5, 7, 3])).unwrap());
        assert!(matches!(
            d.contains(&e(H, &[0, 0, 0])),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn check_subgroup_examples() {
        let a = FiniteIndexSubgroup::heisenberg_bm([[2, 0], [0, 3]], 3).unwrap();
        assert!(a.check_subgroup() && a.row_divisibility_criterion());
        let b = FiniteIndexSubgroup::heisenberg_bm([[2, 0], [0, 3]], 5).unwrap();
        assert!(!b.check_subgroup() && !b.row_divisibility_criterion());
        let c = FiniteIndexSubgroup::heisenberg_bm([[2, 4], [6, 8]], 2).unwrap();
        assert!(c.check_subgroup());
        assert!(FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap().check_subgroup());
    }

    #[test]
    fn row_criterion_is_not_necessary() {
        let s = FiniteIndexSubgroup::heisenberg_bm([[2, 0], [0, 3]], 6).unwrap();
        assert!(!s.row_divisibility_criterion());
        assert!(s.check_subgroup());
        assert!(s.closure_oracle(4).unwrap().closed);
        // and the inverse of every slate member stays inside too
        for g in s.generators().unwrap() {
            assert!(s.contains(&g.inverse().unwrap()).unwrap());
        }
    }

    #[test]
    fn closure_oracle_examples() {
        let bad = FiniteIndexSubgroup::heisenberg_diag(2, 3, 5).unwrap();
        let v = bad.closure_oracle(2).unwrap();
        assert!(!v.closed);
        let w = v.witness.unwrap();
        // (2,0,0)·(0,3,0) = (2,3,6) and 5 does not divide 6
        assert_eq!(w.product, e(H, &[2, 3, 6]));
        assert_eq!(w.factors, vec![e(H, &[2, 0, 0]), e(H, &[0, 3, 0])]);
        let z2 = FiniteIndexSubgroup::diagonal_sublattice(&[2, 2]).unwrap();
        assert!(z2.closure_oracle(5).unwrap().closed);
        let good = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        assert!(good.closure_oracle(4).unwrap().closed);
        assert!(FiniteIndexSubgroup::diag_scales(5, 7, 3)
            .unwrap()
            .closure_oracle(4)
            .unwrap()
            .closed);
        assert!(good.closure_oracle(7).is_err());
    }

    #[test]
    fn generators_examples() {
        assert_eq!(
            FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap().generators().unwrap(),
            vec![e(H, &[2, 0, 0]), e(H, &[0, 3, 0]), e(H, &[0, 0, 2])]
        );
        assert_eq!(
            FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap().generators().unwrap(),
            vec![e(S, &[5, 0, 0]), e(S, &[0, 7, 0]), e(S, &[0, 0, 3])]
        );
        let z2 = GroupModel::free_abelian(2).unwrap();
        assert_eq!(
            FiniteIndexSubgroup::sublattice(vec![vec![2, 1], vec![0, 1]])
                .unwrap()
                .generators()
                .unwrap(),
            vec![e(z2, &[2, 0]), e(z2, &[1, 1])]
        );
        assert!(FiniteIndexSubgroup::heisenberg_diag(2, 3, 5)
            .unwrap()
            .generators()
            .is_err());
    }

    #[test]
    fn heisenberg_generators_generate_the_set() {
        // Every member of B·Z² × mZ in a box is a word g1^t1 g2^t2 g3^k.
        let s = FiniteIndexSubgroup::heisenberg_bm([[2, 4], [6, 8]], 2).unwrap();
        let g = s.generators().unwrap();
        for x in -12..=12 {
            for y in -12..=12 {
                for z in -6..=6 {
                    let p = e(H, &[x, y, z]);
                    if !s.contains(&p).unwrap() {
                        continue;
                    }
                    let SubgroupData::HeisenbergBM { b, .. } = s.data() else { unreachable!() };
                    let (t1, t2) = solve2(b, x, y).unwrap().unwrap();
                    let w = g[0].power(t1).unwrap().multiply(&g[1].power(t2).unwrap()).unwrap();
                    let rest = w.inverse().unwrap().multiply(&p).unwrap();
                    assert_eq!(&rest.coords()[..2], &[0, 0]);
                    assert_eq!(rest.coords()[2] % 2, 0);
                }
            }
        }
    }

    #[test]
    fn enumerate_examples() {
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let t = enumerate_cosets(&s, &default_generators(H)).unwrap();
        assert_eq!(t.index(), 12);
        assert_eq!(brute_force_classes(&s, &box_points(H, &[2, 3, 2])), 12);

        let d = FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap();
        let t = enumerate_cosets(&d, &default_generators(S)).unwrap();
        assert_eq!(t.index(), 105);
        assert_eq!(brute_force_classes(&d, &box_points(S, &[5, 7, 3])), 105);

        let z2 = GroupModel::free_abelian(2).unwrap();
        let w = FiniteIndexSubgroup::whole(z2);
        assert_eq!(enumerate_cosets(&w, &default_generators(z2)).unwrap().index(), 1);
    }

    #[test]
    fn enumeration_cap() {
        let s = FiniteIndexSubgroup::heisenberg_diag(64, 64, 64).unwrap();
        assert_eq!(
            CosetTable::enumerate(&s, &default_generators(H), 1000).unwrap_err(),
            Error::IndexTooLarge { cap: 1000 }
        );
    }

    #[test]
    fn table_is_deterministic_bfs() {
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let t = enumerate_cosets(&s, &default_generators(H)).unwrap();
        assert!(t.reps()[0].is_identity());
        assert_eq!(t.reps()[1], e(H, &[1, 0, 0]));
        assert_eq!(t.reps()[2], e(H, &[0, 1, 0]));
        assert_eq!(t.reps()[3], e(H, &[0, 0, 1]));
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.starts_with("{\"index\":12,\"reps\":[[0,0,0],[1,0,0]"));
    }

    #[test]
    fn index_independent_of_slate() {
        let slates = |m: GroupModel| -> Vec<Vec<Elem>> {
            match m {
                GroupModel::Heisenberg => vec![
                    default_generators(H),
                    vec![e(H, &[1, 0, 0]), e(H, &[1, 1, 0])],
                ],
                GroupModel::SplitExtZ2ByZ => vec![
                    default_generators(S),
                    vec![e(S, &[1, 1, 1]), e(S, &[0, 1, 0]), e(S, &[1, 0, 0])],
                ],
                GroupModel::FreeAbelian { .. } => vec![
                    default_generators(m),
                    vec![e(m, &[1, 0]), e(m, &[1, 1])],
                ],
            }
        };
        let subgroups = [
            FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap(),
            FiniteIndexSubgroup::heisenberg_bm([[2, 4], [6, 8]], 2).unwrap(),
            FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap(),
            FiniteIndexSubgroup::sublattice(vec![vec![2, 1], vec![0, 3]]).unwrap(),
        ];
        for s in &subgroups {
            let idx: Vec<usize> = slates(s.model())
                .iter()
                .map(|sl| enumerate_cosets(s, sl).unwrap().index())
                .collect();
            assert_eq!(idx[0], idx[1], "{}", s.describe());
            assert_eq!(idx[0] as u64, s.index().unwrap());
        }
    }

    #[test]
    fn normalizer_examples() {
        let d = FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap();
        let t = enumerate_cosets(&d, &default_generators(S)).unwrap();
        let n = normalizer(&t).unwrap();
        // t = (0,0,1) acts on Z² by -I, which preserves every diagonal
        // lattice, so the cosets of (0,0,1) and (0,0,-1) normalize as well.
        assert_eq!(n.positions, vec![0, 3, 6]);
        assert_eq!(n.reps[1], e(S, &[0, 0, 1]));
        assert_eq!(n.table_index, 105);
        // no coset of the form (a,b,0)H with (a,b) outside 5Z x 7Z normalizes
        for (i, r) in t.reps().iter().enumerate() {
            if r.coords()[2] == 0 && !r.is_identity() {
                assert!(!n.positions.contains(&i), "{r}");
            }
        }

        let w = FiniteIndexSubgroup::whole(H);
        let n = normalizer(&enumerate_cosets(&w, &default_generators(H)).unwrap()).unwrap();
        assert!(n.is_everything());

        let half = FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap();
        let n = normalizer(&enumerate_cosets(&half, &default_generators(S)).unwrap()).unwrap();
        assert_eq!(n.count(), 2);
        assert!(n.is_everything());
    }

    #[test]
    fn normalizer_is_closed() {
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let t = enumerate_cosets(&s, &default_generators(H)).unwrap();
        let n = normalizer(&t).unwrap();
        assert!(n.positions.contains(&0));
        for a in &n.reps {
            for b in &n.reps {
                let p = t.position(&a.multiply(b).unwrap()).unwrap().unwrap();
                assert!(n.positions.contains(&p));
            }
        }
        assert!(n.count() < t.index());
    }

    #[test]
    fn intersect_examples() {
        let a = FiniteIndexSubgroup::diag_scales(5, 7, 3).unwrap();
        let b = FiniteIndexSubgroup::diag_scales(1, 1, 2).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), FiniteIndexSubgroup::diag_scales(5, 7, 6).unwrap());
        let h1 = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let h2 = FiniteIndexSubgroup::heisenberg_diag(4, 3, 4).unwrap();
        assert_eq!(h1.intersect(&h2).unwrap(), h2);
        let l1 = FiniteIndexSubgroup::diagonal_sublattice(&[2, 1]).unwrap();
        let l2 = FiniteIndexSubgroup::diagonal_sublattice(&[3, 1]).unwrap();
        assert!(l1
            .intersect(&l2)
            .unwrap()
            .same_set(&FiniteIndexSubgroup::diagonal_sublattice(&[6, 1]).unwrap())
            .unwrap());
        let skew = FiniteIndexSubgroup::heisenberg_bm([[2, 2], [0, 2]], 2).unwrap();
        assert!(matches!(skew.intersect(&h1), Err(Error::NotCanonical(_))));
        assert!(matches!(a.intersect(&h1), Err(Error::ModelMismatch { .. })));
    }

    #[test]
    fn diagonal_heisenberg_index_formula() {
        for d1 in 1..=4 {
            for d2 in 1..=4 {
                for m in 1..=4 {
                    let s = FiniteIndexSubgroup::heisenberg_diag(d1, d2, m).unwrap();
                    if !s.check_subgroup() {
                        continue;
                    }
                    let t = enumerate_cosets(&s, &default_generators(H)).unwrap();
                    assert_eq!(t.index() as i64, d1 * d2 * m);
                }
            }
        }
    }

    fn heis_subgroup() -> impl Strategy<Value = FiniteIndexSubgroup> {
        (proptest::array::uniform4(-4i64..=4), 1i64..=4)
            .prop_filter_map("valid subgroup", |(v, m)| {
                let s = FiniteIndexSubgroup::heisenberg_bm([[v[0], v[1]], [v[2], v[3]]], m).ok()?;
                s.check_subgroup().then_some(s)
            })
    }

    proptest! {
        #[test]
        fn coset_index_matches_membership(
            s in heis_subgroup(),
            g in proptest::collection::vec(-15i64..=15, 3),
            h in proptest::collection::vec(-15i64..=15, 3),
        ) {
            let ix = s.coset_indexer().unwrap();
            let (g, h) = (e(H, &g), e(H, &h));
            let same = s.contains(&g.inverse().unwrap().multiply(&h).unwrap()).unwrap();
            prop_assert_eq!(ix.index_of(&g).unwrap() == ix.index_of(&h).unwrap(), same);
            prop_assert!(ix.index_of(&g).unwrap() < ix.total());
        }

        #[test]
        fn split_coset_index_matches_membership(
            (a, b, c) in (1i64..=6, 1i64..=6, 1i64..=6),
            g in proptest::collection::vec(-15i64..=15, 3),
            h in proptest::collection::vec(-15i64..=15, 3),
        ) {
            let s = FiniteIndexSubgroup::diag_scales(a, b, c).unwrap();
            let ix = s.coset_indexer().unwrap();
            let (g, h) = (e(S, &g), e(S, &h));
            let same = s.contains(&g.inverse().unwrap().multiply(&h).unwrap()).unwrap();
            prop_assert_eq!(ix.index_of(&g).unwrap() == ix.index_of(&h).unwrap(), same);
        }

        #[test]
        fn heisenberg_closure_agrees_with_check(v in proptest::array::uniform4(0i64..=6), m in 1i64..=6) {
            if let Ok(s) = FiniteIndexSubgroup::heisenberg_bm([[v[0], v[1]], [v[2], v[3]]], m) {
                prop_assert_eq!(s.check_subgroup(), s.closure_oracle(4).unwrap().closed);
                if s.row_divisibility_criterion() {
                    prop_assert!(s.check_subgroup());
                }
            }
        }
    }

    #[test]
    fn table_from_reps_round_trip() {
        let s = FiniteIndexSubgroup::heisenberg_diag(2, 3, 2).unwrap();
        let t = enumerate_cosets(&s, &H.standard_generators()).unwrap();
        let back = CosetTable::from_reps(&s, t.reps().to_vec()).unwrap();
        for r in t.reps() {
            assert_eq!(back.position(r).unwrap(), t.position(r).unwrap());
        }
        let mut dup = t.reps().to_vec();
        dup.push(e(H, &[0, 0, 2]));
        assert!(CosetTable::from_reps(&s, dup).is_err());
        assert!(CosetTable::from_reps(&s, vec![e(H, &[1, 0, 0])]).is_err());
    }
}
