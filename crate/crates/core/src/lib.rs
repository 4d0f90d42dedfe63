//! Exact computations with group chains in small nilpotent-type groups:
//! subgroup lattices, coset actions on finite quotients, regularity
//! verdicts with conjugation witnesses, and word growth.

pub mod error;
pub mod group;
pub mod lattice;
pub mod subgroup;
pub mod chain;
pub mod action;
pub mod growth;
pub mod cases;

pub use error::{Error, Result};
pub use group::{Elem, GroupModel};
pub use subgroup::{CosetTable, FiniteIndexSubgroup, SubgroupData};
