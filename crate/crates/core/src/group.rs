//! Exact arithmetic in the three concrete group models.
//!
//! Every group here has underlying set Z^k and elements are coordinate
//! tuples of `i64`. All arithmetic is checked: an operation that would
//! overflow returns [`Error::Overflow`] instead of wrapping.
//!
//! * `FreeAbelian(n)`: Z^n under addition.
//! * `Heisenberg`: Z^3 with `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')`.
//! * `SplitExtZ2ByZ`: Z^2 ⋊ Z where the generator of Z acts by `A = -I`, so
//!   `(a,b,c)(a',b',c') = ((a,b) + (-1)^c (a',b'), c+c')`.
//!
//! The commutator convention is `[g, h] = g⁻¹ h⁻¹ g h` throughout the crate.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[i64; 4]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum GroupModel {
    FreeAbelian { rank: u32 },
    Heisenberg,
    #[serde(rename = "split-ext")]
    SplitExtZ2ByZ,
}

impl GroupModel {
    pub fn free_abelian(rank: u32) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidModel("rank must be ≥ 1".into()));
        }
        Ok(GroupModel::FreeAbelian { rank })
    }

    pub fn arity(&self) -> usize {
        match *self {
            GroupModel::FreeAbelian { rank } => rank as usize,
            GroupModel::Heisenberg | GroupModel::SplitExtZ2ByZ => 3,
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupModel::FreeAbelian { .. })
    }

    pub fn identity(&self) -> Elem {
        Elem {
            model: *self,
            coords: SmallVec::from_elem(0, self.arity()),
        }
    }

    pub fn elem(&self, coords: &[i64]) -> Result<Elem> {
        Elem::new(*self, coords)
    }

    /// Standard generating slate: the coordinate unit vectors.
    pub fn standard_generators(&self) -> Vec<Elem> {
        (0..self.arity())
            .map(|i| {
                let mut e = self.identity();
                e.coords[i] = 1;
                e
            })
            .collect()
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            GroupModel::Heisenberg => write!(f, "Heisenberg"),
            GroupModel::SplitExtZ2ByZ => write!(f, "Z^2 x| Z"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Elem {
    model: GroupModel,
    coords: Coords,
}

impl Serialize for Elem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.as_slice().serialize(serializer)
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[inline]
fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("add"))
}

#[inline]
fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(Error::Overflow("sub"))
}

#[inline]
fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("mul"))
}

#[inline]
fn neg(a: i64) -> Result<i64> {
    a.checked_neg().ok_or(Error::Overflow("neg"))
}

impl Elem {
    pub fn new(model: GroupModel, coords: &[i64]) -> Result<Self> {
        if coords.len() != model.arity() {
            return Err(Error::Arity {
                model,
                expected: model.arity(),
                got: coords.len(),
            });
        }
        Ok(Elem {
            model,
            coords: SmallVec::from_slice(coords),
        })
    }

    pub fn model(&self) -> GroupModel {
        self.model
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn same_model(&self, other: &Elem) -> Result<()> {
        if self.model != other.model {
            return Err(Error::ModelMismatch {
                left: self.model,
                right: other.model,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Elem) -> Result<Elem> {
        self.same_model(other)?;
        let (a, b) = (&self.coords, &other.coords);
        let coords: Coords = match self.model {
            GroupModel::FreeAbelian { .. } => a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| add(x, y))
                .collect::<Result<_>>()?,
            GroupModel::Heisenberg => smallvec::smallvec![
                add(a[0], b[0])?,
                add(a[1], b[1])?,
                add(add(a[2], b[2])?, mul(a[0], b[1])?)?,
            ],
            GroupModel::SplitExtZ2ByZ => {
                if a[2].rem_euclid(2) == 0 {
                    smallvec::smallvec![add(a[0], b[0])?, add(a[1], b[1])?, add(a[2], b[2])?]
                } else {
                    smallvec::smallvec![sub(a[0], b[0])?, sub(a[1], b[1])?, add(a[2], b[2])?]
                }
            }
        };
        Ok(Elem {
            model: self.model,
            coords,
        })
    }

    pub fn inverse(&self) -> Result<Elem> {
        let a = &self.coords;
        let coords: Coords = match self.model {
            GroupModel::FreeAbelian { .. } => a.iter().map(|&x| neg(x)).collect::<Result<_>>()?,
            GroupModel::Heisenberg => {
                smallvec::smallvec![neg(a[0])?, neg(a[1])?, add(neg(a[2])?, mul(a[0], a[1])?)?]
            }
            // (u, c)^-1 = (-A^{-c} u, -c) and A^{-c} = A^c since A has order 2.
            GroupModel::SplitExtZ2ByZ => {
                if a[2].rem_euclid(2) == 0 {
                    smallvec::smallvec![neg(a[0])?, neg(a[1])?, neg(a[2])?]
                } else {
                    smallvec::smallvec![a[0], a[1], neg(a[2])?]
                }
            }
        };
        Ok(Elem {
            model: self.model,
            coords,
        })
    }

    /// `self⁻¹ · other⁻¹ · self · other`.
    pub fn commutator(&self, other: &Elem) -> Result<Elem> {
        self.inverse()?
            .multiply(&other.inverse()?)?
            .multiply(self)?
            .multiply(other)
    }

    /// `self · g · self⁻¹`.
    pub fn conjugate(&self, g: &Elem) -> Result<Elem> {
        self.multiply(g)?.multiply(&self.inverse()?)
    }

    pub fn power(&self, n: i64) -> Result<Elem> {
        let mut base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.model.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.multiply(&base)?;
            }
        }
        Ok(acc)
    }
}
