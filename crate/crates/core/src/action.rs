//! Finite truncations of the inverse-limit action of a chain.
//!
//! Level `i` is the coset space `G₀/Gᵢ`, stored as a [`CosetTable`] built
//! from the ambient generators. The basepoint is always the identity coset
//! tower.

use std::collections::VecDeque;

use serde::Serialize;

use crate::chain::GroupChain;
use crate::error::{Error, Result};
use crate::group::Elem;
use crate::lattice::lcm;
use crate::subgroup::{CosetTable, DEFAULT_COSET_CAP};

#[derive(Debug, Clone)]
pub struct TruncatedAction {
    chain: GroupChain,
    depth: usize,
    generators: Vec<Elem>,
    tables: Vec<CosetTable>,
    level_maps: Vec<Vec<u32>>,
}

/// The permutation of level-`level` positions induced by `generator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPermutation {
    pub level: usize,
    pub generator: Elem,
    pub mapping: Vec<u32>,
}

impl LevelPermutation {
    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LevelPermutation) -> Result<LevelPermutation> {
        if self.mapping.len() != other.mapping.len() {
            return Err(Error::InvalidParameter("permutations of different sizes".into()));
        }
        Ok(LevelPermutation {
            level: self.level,
            generator: self.generator.multiply(&other.generator)?,
            mapping: other.mapping.iter().map(|&j| self.mapping[j as usize]).collect(),
        })
    }

    /// Non-trivial cycles, each starting at its smallest position.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.mapping.len()];
        let mut out = Vec::new();
        for start in 0..self.mapping.len() {
            if seen[start] || self.mapping[start] as usize == start {
                continue;
            }
            let mut cycle = vec![];
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                cycle.push(j as u32);
                j = self.mapping[j] as usize;
            }
            out.push(cycle);
        }
        out
    }

    pub fn order(&self) -> Result<i64> {
        self.cycles()
            .iter()
            .try_fold(1i64, |acc, c| lcm(acc, c.len() as i64))
    }
}

impl Serialize for LevelPermutation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("LevelPermutation", 4)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("generator", &self.generator)?;
        st.serialize_field("size", &self.mapping.len())?;
        st.serialize_field("cycles", &self.cycles())?;
        st.end()
    }
}

pub fn build_action(chain: &GroupChain, depth: usize) -> Result<TruncatedAction> {
    build_action_with_cap(chain, depth, DEFAULT_COSET_CAP)
}

pub fn build_action_with_cap(chain: &GroupChain, depth: usize, cap: usize) -> Result<TruncatedAction> {
    build_action_with(chain, depth, |s, gens| CosetTable::enumerate(s, gens, cap))
}

/// Builds the action from tables supplied by `tables`, e.g. a cache.
///
/// Each supplied table must cover the cosets reachable from the ambient
/// generators; the level maps fail otherwise.
pub fn build_action_with<F>(chain: &GroupChain, depth: usize, mut tables: F) -> Result<TruncatedAction>
where
    F: FnMut(&crate::subgroup::FiniteIndexSubgroup, &[Elem]) -> Result<CosetTable>,
{
    if depth > chain.max_depth() {
        return Err(Error::DepthOutOfRange {
            level: depth,
            max_depth: chain.max_depth(),
        });
    }
    let generators = chain.ambient_generators()?;
    let tables = (0..=depth)
        .map(|i| tables(&chain.level(i)?, &generators))
        .collect::<Result<Vec<_>>>()?;
    let mut level_maps = Vec::with_capacity(depth);
    for pair in tables.windows(2) {
        let map = pair[1]
            .reps()
            .iter()
            .map(|r| {
                pair[0]
                    .position(r)?
                    .map(|p| p as u32)
                    .ok_or_else(|| Error::InvalidChain("level does not cover the next".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        level_maps.push(map);
    }
    Ok(TruncatedAction {
        chain: chain.clone(),
        depth,
        generators,
        tables,
        level_maps,
    })
}

impl TruncatedAction {
    pub fn chain(&self) -> &GroupChain {
        &self.chain
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn table(&self, level: usize) -> Result<&CosetTable> {
        self.tables.get(level).ok_or(Error::DepthOutOfRange {
            level,
            max_depth: self.depth,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.tables.iter().map(CosetTable::index).collect()
    }

    /// Projection from level `level + 1` positions to level `level`.
    pub fn level_map(&self, level: usize) -> Result<&[u32]> {
        self.level_maps
            .get(level)
            .map(Vec::as_slice)
            .ok_or(Error::DepthOutOfRange {
                level,
                max_depth: self.depth.saturating_sub(1),
            })
    }

    pub fn act(&self, gamma: &Elem, level: usize) -> Result<LevelPermutation> {
        let table = self.table(level)?;
        if gamma.model() != self.chain.model() {
            return Err(Error::ModelMismatch {
                left: self.chain.model(),
                right: gamma.model(),
            });
        }
        if !self.chain.ambient().contains(gamma)? {
            return Err(Error::InvalidParameter(format!(
                "{gamma} is outside the ambient group"
            )));
        }
        let mapping = table
            .reps()
            .iter()
            .map(|r| {
                let p = table.position(&gamma.multiply(r)?)?;
                p.map(|p| p as u32)
                    .ok_or_else(|| Error::InvalidParameter("coset outside the table".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelPermutation {
            level,
            generator: gamma.clone(),
            mapping,
        })
    }

    pub fn check_transitive(&self, level: usize) -> Result<bool> {
        let perms = self
            .generators
            .iter()
            .map(|g| self.act(g, level))
            .collect::<Result<Vec<_>>>()?;
        let n = self.table(level)?.index();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut count = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(j) = queue.pop_front() {
            for p in &perms {
                let k = p.mapping[j] as usize;
                if !seen[k] {
                    seen[k] = true;
                    count += 1;
                    queue.push_back(k);
                }
            }
        }
        Ok(count == n)
    }

    fn require_isotropy(&self, g: &Elem) -> Result<()> {
        if !self.chain.level(self.depth)?.contains(g)? {
            return Err(Error::NotInIsotropy(g.to_string()));
        }
        Ok(())
    }

    /// Whether `g` fixes every point of the cylinder over the level-`ell`
    /// basepoint coset, to the truncation depth.
    pub fn holonomy_probe(&self, g: &Elem, ell: usize) -> Result<bool> {
        self.require_isotropy(g)?;
        let home = self.chain.level(ell)?;
        let deepest = self.chain.level(self.depth)?;
        for h in self.table(self.depth)?.reps() {
            if !home.contains(h)? {
                continue;
            }
            let c = h.inverse()?.conjugate(g)?;
            if !deepest.contains(&c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Least `i` such that every generator `h` of `level(i)` conjugates `g`
    /// back into the truncated kernel.
    pub fn normalization_level(&self, g: &Elem) -> Result<Option<usize>> {
        self.require_isotropy(g)?;
        let deepest = self.chain.level(self.depth)?;
        'level: for i in 0..=self.depth {
            for h in self.chain.level(i)?.generators()? {
                for h in [h.clone(), h.inverse()?] {
                    if !deepest.contains(&h.inverse()?.conjugate(g)?)? {
                        continue 'level;
                    }
                }
            }
            return Ok(Some(i));
        }
        Ok(None)
    }
}
