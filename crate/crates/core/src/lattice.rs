//! Integer lattices in Z^n: Hermite normal form, Smith invariants and
//! intersections.
//!
//! Hermite form is column style: basis vectors are columns, the matrix is
//! lower triangular (echelon in general), pivots are positive and every entry
//! to the left of a pivot lies in `[0, pivot)`.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

pub fn lcm(a: i64, b: i64) -> Result<i64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .map(i64::abs)
        .ok_or(Error::Overflow("lcm"))
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(mut n: i64, p: i64) -> u32 {
    let mut k = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn checked_pow(base: i64, exp: u32) -> Result<i64> {
    base.checked_pow(exp).ok_or(Error::Overflow("pow"))
}

fn narrow(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow("lattice"))
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

struct Echelon {
    /// Pivot columns, in pivot-row order.
    pivots: Vec<(usize, Vec<i128>)>,
    /// Columns that vanish on the reduced rows.
    rest: Vec<Vec<i128>>,
}

/// Column echelon form on the first `rows` coordinates of `cols`, with column
/// operations applied to the full column (so extra trailing coordinates track
/// the unimodular transform).
fn echelon(mut cols: Vec<Vec<i128>>, rows: usize) -> Echelon {
    let mut pivots: Vec<(usize, Vec<i128>)> = Vec::new();
    for r in 0..rows {
        loop {
            let best = cols
                .iter()
                .enumerate()
                .filter(|(_, c)| c[r] != 0)
                .min_by_key(|(_, c)| c[r].unsigned_abs())
                .map(|(i, _)| i);
            let Some(best) = best else { break };
            let piv = cols.swap_remove(best);
            let mut done = true;
            for c in cols.iter_mut() {
                if c[r] != 0 {
                    let q = floor_div(c[r], piv[r]);
                    for (x, y) in c.iter_mut().zip(piv.iter()) {
                        *x -= q * y;
                    }
                    if c[r] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                let mut piv = piv;
                if piv[r] < 0 {
                    piv.iter_mut().for_each(|x| *x = -*x);
                }
                for (_, prev) in pivots.iter_mut() {
                    let q = floor_div(prev[r], piv[r]);
                    if q != 0 {
                        for (x, y) in prev.iter_mut().zip(piv.iter()) {
                            *x -= q * y;
                        }
                    }
                }
                pivots.push((r, piv));
                break;
            }
            cols.push(piv);
        }
    }
    Echelon { pivots, rest: cols }
}

/// A sublattice of Z^n, stored by its Hermite basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Lattice {
    dim: usize,
    /// Hermite basis columns.
    basis: Vec<Vec<i64>>,
    /// Pivot row of each basis column.
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: &[Vec<i64>]) -> Result<Self> {
        if let Some(g) = gens.iter().find(|g| g.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} in dimension {dim}",
                g.len()
            )));
        }
        let cols = gens
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let ech = echelon(cols, dim);
        let mut basis = Vec::with_capacity(ech.pivots.len());
        let mut pivots = Vec::with_capacity(ech.pivots.len());
        for (r, c) in ech.pivots {
            pivots.push(r);
            basis.push(c.into_iter().map(narrow).collect::<Result<Vec<_>>>()?);
        }
        Ok(Lattice { dim, basis, pivots })
    }

    /// Lattice spanned by the columns of a square matrix given row-major.
    pub fn from_matrix_columns(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let cols: Vec<Vec<i64>> = (0..n)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::from_generators(n, &cols)
    }

    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|j| (0..dim).map(|i| i64::from(i == j)).collect())
            .collect();
        Lattice {
            dim,
            basis,
            pivots: (0..dim).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Lattice {
            dim,
            basis: vec![],
            pivots: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Pivot entries of the Hermite basis.
    pub fn diagonal(&self) -> Vec<i64> {
        self.basis
            .iter()
            .zip(&self.pivots)
            .map(|(c, &r)| c[r])
            .collect()
    }

    /// Index in Z^n; `None` when the rank is deficient.
    pub fn index(&self) -> Result<Option<u64>> {
        if !self.is_full_rank() {
            return Ok(None);
        }
        self.diagonal()
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
            .map(Some)
            .ok_or(Error::Overflow("lattice index"))
    }

    /// Canonical representative of `v + L`; for full-rank lattices every
    /// pivot coordinate lands in `[0, pivot)`.
    pub fn reduce(&self, v: &[i64]) -> Result<Vec<i64>> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (c, &r) in self.basis.iter().zip(&self.pivots) {
            let q = floor_div(w[r], c[r] as i128);
            if q != 0 {
                for (x, &y) in w.iter_mut().zip(c.iter()) {
                    *x -= q * y as i128;
                }
            }
        }
        w.into_iter().map(narrow).collect()
    }

    /// Like [`reduce`](Self::reduce) but also returns the lattice vector
    /// that was added (`reduced = v + shift`).
    pub fn reduce_with_shift(&self, v: &[i64]) -> Result<(Vec<i64>, Vec<i64>)> {
        let reduced = self.reduce(v)?;
        let shift = reduced
            .iter()
            .zip(v)
            .map(|(&r, &x)| r.checked_sub(x).ok_or(Error::Overflow("reduce")))
            .collect::<Result<Vec<_>>>()?;
        Ok((reduced, shift))
    }

    pub fn contains(&self, v: &[i64]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|&x| x == 0))
    }

    pub fn contains_lattice(&self, other: &Lattice) -> Result<bool> {
        for b in &other.basis {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        if self.dim != other.dim {
            return Err(Error::InvalidParameter("lattice dimensions differ".into()));
        }
        let n = self.dim;
        let (k1, k2) = (self.rank(), other.rank());
        // Kernel of [B1 | -B2]: rows 0..n reduced, the identity block below
        // records the coefficient vectors.
        let mut cols: Vec<Vec<i128>> = Vec::with_capacity(k1 + k2);
        for (j, b) in self.basis.iter().enumerate() {
            let mut c: Vec<i128> = b.iter().map(|&x| x as i128).collect();
            c.extend((0..k1 + k2).map(|i| i128::from(i == j)));
            cols.push(c);
        }
        for (j, b) in other.basis.iter().enumerate() {
            let mut c: Vec<i128> = b.iter().map(|&x| -(x as i128)).collect();
            c.extend((0..k1 + k2).map(|i| i128::from(i == k1 + j)));
            cols.push(c);
        }
        let ech = echelon(cols, n);
        let mut gens = Vec::with_capacity(ech.rest.len());
        for c in ech.rest {
            let coeff = &c[n..n + k1];
            let mut v = vec![0i128; n];
            for (t, b) in coeff.iter().zip(&self.basis) {
                for (x, &y) in v.iter_mut().zip(b) {
                    *x += t * y as i128;
                }
            }
            gens.push(v.into_iter().map(narrow).collect::<Result<Vec<_>>>()?);
        }
        Lattice::from_generators(n, &gens)
    }
}

/// Smith invariant factors `d1 | d2 | ...` of an integer matrix given
/// row-major. Zero factors are dropped, so the length is the rank.
pub fn smith_invariants(rows: &[Vec<i64>]) -> Result<Vec<i64>> {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if a[i][j] != 0
                    && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let p = a[t][t];
        let mut clean = true;
        for i in t + 1..m {
            let q = floor_div(a[i][t], p);
            if q != 0 {
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in tail[0][t..n].iter_mut().zip(&head[t][t..n]) {
                    *x -= q * y;
                }
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..n {
            let q = floor_div(a[t][j], p);
            if q != 0 {
                for row in a.iter_mut().skip(t) {
                    row[j] -= q * row[t];
                }
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // Pivot must divide the whole trailing block.
        let bad = (t + 1..m)
            .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| a[i][j] % p != 0);
        if let Some((i, _)) = bad {
            let (head, tail) = a.split_at_mut(i);
            for (x, y) in head[t][t..n].iter_mut().zip(&tail[0][t..n]) {
                *x += y;
            }
            continue;
        }
        diag.push(narrow(p.abs())?);
        t += 1;
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hermite_basis_shape() {
        let l = Lattice::from_matrix_columns(&[vec![2, 1], vec![0, 1]]).unwrap();
        // columns (2,0),(1,1) -> Hermite basis (1,1),(0,2)
        assert_eq!(l.basis(), &[vec![1, 1], vec![0, 2]]);
        assert_eq!(l.index().unwrap(), Some(2));
        assert!(l.contains(&[3, 1]).unwrap());
        assert!(!l.contains(&[1, 0]).unwrap());
    }

    #[test]
    fn intersections() {
        let a = Lattice::from_matrix_columns(&[vec![2, 0], vec![0, 1]]).unwrap();
        let b = Lattice::from_matrix_columns(&[vec![3, 0], vec![0, 1]]).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(
            c,
            Lattice::from_matrix_columns(&[vec![6, 0], vec![0, 1]]).unwrap()
        );
        let z = Lattice::from_generators(2, &[vec![2, 4]]).unwrap();
        let w = Lattice::from_generators(2, &[vec![3, 6]]).unwrap();
        assert_eq!(
            z.intersect(&w).unwrap(),
            Lattice::from_generators(2, &[vec![6, 12]]).unwrap()
        );
    }

    #[test]
    fn smith_examples() {
        assert_eq!(
            smith_invariants(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap(),
            vec![2, 6, 12]
        );
        assert_eq!(smith_invariants(&[vec![0, 0], vec![0, 0]]).unwrap(), Vec::<i64>::new());
        assert_eq!(smith_invariants(&[vec![2, 0], vec![0, 3]]).unwrap(), vec![1, 6]);
        assert_eq!(smith_invariants(&[vec![4, 0, 0]]).unwrap(), vec![4]);
    }

    #[test]
    fn number_helpers() {
        assert_eq!(gcd(-12, 18), 6);
        assert_eq!(lcm(4, 6).unwrap(), 12);
        assert_eq!(valuation(72, 2), 3);
        assert!(is_prime(13) && !is_prime(1) && !is_prime(9));
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        proptest::collection::vec(proptest::collection::vec(-7i64..=7, 3), 3)
    }

    proptest! {
        #[test]
        fn index_matches_determinant(m in small_matrix()) {
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            let l = Lattice::from_matrix_columns(&m).unwrap();
            if det == 0 {
                prop_assert!(!l.is_full_rank());
            } else {
                prop_assert_eq!(l.index().unwrap(), Some(det.unsigned_abs()));
                let prod: i64 = smith_invariants(&m).unwrap().iter().product();
                prop_assert_eq!(prod, det.abs());
            }
        }

        #[test]
        fn reduce_is_canonical(m in small_matrix(), v in proptest::collection::vec(-30i64..=30, 3), t in proptest::collection::vec(-3i64..=3, 3)) {
            let l = Lattice::from_matrix_columns(&m).unwrap();
            // v + (lattice vector) must reduce to the same representative
            let cols: Vec<Vec<i64>> = (0..3).map(|j| m.iter().map(|r| r[j]).collect()).collect();
            let mut w = v.clone();
            for (k, c) in t.iter().zip(&cols) {
                for (x, y) in w.iter_mut().zip(c) { *x += k * y; }
            }
            prop_assert_eq!(l.reduce(&v).unwrap(), l.reduce(&w).unwrap());
            for c in &cols { prop_assert!(l.contains(c).unwrap()); }
        }

        #[test]
        fn intersection_membership(a in small_matrix(), b in small_matrix(), v in proptest::collection::vec(-40i64..=40, 3)) {
            let la = Lattice::from_matrix_columns(&a).unwrap();
            let lb = Lattice::from_matrix_columns(&b).unwrap();
            let lc = la.intersect(&lb).unwrap();
            prop_assert_eq!(
                lc.contains(&v).unwrap(),
                la.contains(&v).unwrap() && lb.contains(&v).unwrap()
            );
        }
    }
}
