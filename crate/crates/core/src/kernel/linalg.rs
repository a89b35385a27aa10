//! Exact linear algebra over Q and F2: rank, span membership and closure.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::ExactInt;

/// Field over which spans are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "Q")]
    Rationals,
    #[serde(rename = "F2")]
    Binary,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Rationals => "Q",
            Field::Binary => "F2",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q" | "q" => Ok(Field::Rationals),
            "F2" | "f2" => Ok(Field::Binary),
            other => Err(invalid(format!("unknown field `{other}`"))),
        }
    }
}

/// A vector of exact integers with a fixed ambient dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntVector<T = BigInt> {
    entries: Vec<T>,
}

impl<T: ExactInt> IntVector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        IntVector { entries }
    }

    /// The 0-1 vector of dimension `dim` whose bit `i` of `mask` sets entry `i`.
    pub fn from_mask(mask: u64, dim: usize) -> Self {
        IntVector::new((0..dim).map(|i| if mask >> i & 1 == 1 { T::one() } else { T::zero() }).collect())
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    fn to_bits(&self) -> Vec<u64> {
        let mut bits = vec![0u64; self.entries.len().div_ceil(64)];
        for (i, e) in self.entries.iter().enumerate() {
            if e.is_odd() {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        bits
    }
}

impl<T> std::ops::Index<usize> for IntVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

/// Incremental row-echelon basis over Q, kept fraction free.
///
/// Rows are stored primitive (content 1) with a positive pivot.
#[derive(Debug, Clone)]
pub struct RationalEchelon<T> {
    dim: usize,
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: ExactInt> RationalEchelon<T> {
    pub fn new(dim: usize) -> Self {
        RationalEchelon { dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `x` against the basis. `None` signals overflow in `T`.
    fn reduce(&self, x: &[T]) -> Option<Vec<T>> {
        let mut x = x.to_vec();
        for (pivot, row) in &self.rows {
            if x[*pivot].is_zero() {
                continue;
            }
            let scale = row[*pivot].clone();
            let factor = x[*pivot].clone();
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi = T::cross(xi, &scale, ri, &factor)?;
            }
            make_primitive(&mut x);
        }
        Some(x)
    }

    /// Whether `x` lies in the span. `None` on overflow.
    pub fn contains(&self, x: &[T]) -> Option<bool> {
        debug_assert_eq!(x.len(), self.dim);
        Some(self.reduce(x)?.iter().all(Zero::is_zero))
    }

    /// Adds `x`; returns whether the rank grew. `None` on overflow.
    pub fn insert(&mut self, x: &[T]) -> Option<bool> {
        debug_assert_eq!(x.len(), self.dim);
        let mut r = self.reduce(x)?;
        let Some(pivot) = r.iter().position(|e| !e.is_zero()) else {
            return Some(false);
        };
        if r[pivot].is_negative() {
            for e in r.iter_mut() {
                *e = e.neg_exact()?;
            }
        }
        self.rows.push((pivot, r));
        Some(true)
    }
}

fn make_primitive<T: ExactInt>(x: &mut [T]) {
    let g = x.iter().fold(T::zero(), |g, e| g.gcd(e));
    if !g.is_zero() && !g.is_one() {
        for e in x.iter_mut() {
            *e = e.div_floor(&g);
        }
    }
}

/// Incremental echelon basis over F2 on packed bit rows.
#[derive(Debug, Clone)]
pub struct BinaryEchelon {
    rows: Vec<(usize, Vec<u64>)>,
}

impl BinaryEchelon {
    pub fn new() -> Self {
        BinaryEchelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, x: &[u64]) -> Vec<u64> {
        let mut x = x.to_vec();
        for (pivot, row) in &self.rows {
            if x[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (a, b) in x.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        x
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.reduce(x).iter().all(|w| *w == 0)
    }

    pub fn insert(&mut self, x: &[u64]) -> bool {
        let r = self.reduce(x);
        let Some(word) = r.iter().position(|w| *w != 0) else {
            return false;
        };
        let pivot = word * 64 + r[word].trailing_zeros() as usize;
        self.rows.push((pivot, r));
        true
    }
}

impl Default for BinaryEchelon {
    fn default() -> Self {
        Self::new()
    }
}

fn common_dim<T: ExactInt>(vectors: &[&IntVector<T>]) -> Result<Option<usize>> {
    let Some(first) = vectors.first() else {
        return Ok(None);
    };
    let dim = first.dim();
    if dim == 0 {
        return Err(invalid("vectors must have dimension at least 1"));
    }
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
        }
    }
    Ok(Some(dim))
}

fn rational_rank_in<U: ExactInt, T: ExactInt>(vectors: &[&IntVector<T>], dim: usize) -> Option<usize> {
    let mut basis = RationalEchelon::<U>::new(dim);
    for v in vectors {
        let row: Vec<U> = v.entries().iter().map(|e| e.cast()).collect::<Option<_>>()?;
        basis.insert(&row)?;
    }
    Some(basis.rank())
}

/// Rank of the span of `vectors` over `field`. Over F2 entries are reduced mod 2.
pub fn rank<T: ExactInt>(vectors: &[IntVector<T>], field: Field) -> Result<usize> {
    let refs: Vec<&IntVector<T>> = vectors.iter().collect();
    let Some(dim) = common_dim(&refs)? else {
        return Ok(0);
    };
    Ok(match field {
        Field::Rationals => rational_rank_in::<i64, T>(&refs, dim)
            .or_else(|| rational_rank_in::<i128, T>(&refs, dim))
            .or_else(|| rational_rank_in::<BigInt, T>(&refs, dim))
            .expect("arbitrary precision never overflows"),
        Field::Binary => {
            let mut basis = BinaryEchelon::new();
            for v in &refs {
                basis.insert(&v.to_bits());
            }
            basis.rank()
        }
    })
}

fn rational_closure_in<U: ExactInt, T: ExactInt>(
    generators: &[&IntVector<T>],
    ground: &[IntVector<T>],
    dim: usize,
) -> Option<BTreeSet<usize>> {
    let to_u = |v: &IntVector<T>| -> Option<Vec<U>> { v.entries().iter().map(|e| e.cast()).collect() };
    let mut basis = RationalEchelon::<U>::new(dim);
    for g in generators {
        basis.insert(&to_u(g)?)?;
    }
    let mut closed = BTreeSet::new();
    for (i, v) in ground.iter().enumerate() {
        if basis.contains(&to_u(v)?)? {
            closed.insert(i);
        }
    }
    Some(closed)
}

/// Indices of the ground elements lying in the span of `generators`.
pub fn span_closure<T: ExactInt>(
    generators: &[IntVector<T>],
    ground: &[IntVector<T>],
    field: Field,
) -> Result<BTreeSet<usize>> {
    let mut all: Vec<&IntVector<T>> = ground.iter().collect();
    all.extend(generators.iter());
    let Some(dim) = common_dim(&all)? else {
        return Ok(BTreeSet::new());
    };
    for g in generators {
        if !ground.contains(g) {
            return Err(invalid("generator is not an element of the ground set"));
        }
    }
    let gens: Vec<&IntVector<T>> = generators.iter().collect();
    Ok(match field {
        Field::Rationals => rational_closure_in::<i64, T>(&gens, ground, dim)
            .or_else(|| rational_closure_in::<i128, T>(&gens, ground, dim))
            .or_else(|| rational_closure_in::<BigInt, T>(&gens, ground, dim))
            .expect("arbitrary precision never overflows"),
        Field::Binary => {
            let mut basis = BinaryEchelon::new();
            for g in &gens {
                basis.insert(&g.to_bits());
            }
            ground.iter().enumerate().filter(|(_, v)| basis.contains(&v.to_bits())).map(|(i, _)| i).collect()
        }
    })
}

/// All nonzero 0-1 vectors of dimension `dim`, ordered by mask value.
pub fn nonzero_binary_vectors<T: ExactInt>(dim: usize) -> Vec<IntVector<T>> {
    (1..1u64 << dim).map(|m| IntVector::from_mask(m, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[i64]) -> IntVector<i64> {
        IntVector::new(entries.to_vec())
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank::<i64>(&[], Field::Rationals).unwrap(), 0);
        let vs = [v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        assert_eq!(rank(&vs, Field::Rationals).unwrap(), 2);
        for n in 2..=7 {
            let all = nonzero_binary_vectors::<i64>(n - 1);
            assert_eq!(rank(&all, Field::Rationals).unwrap(), n - 1);
            assert_eq!(rank(&all, Field::Binary).unwrap(), n - 1);
        }
    }

    #[test]
    fn binary_rank_reduces_mod_two() {
        let vs = [v(&[1, 1, 0]), v(&[0, 1, 1]), v(&[1, 0, 1])];
        assert_eq!(rank(&vs, Field::Rationals).unwrap(), 3);
        assert_eq!(rank(&vs, Field::Binary).unwrap(), 2);
        assert_eq!(rank(&[v(&[2, 4])], Field::Binary).unwrap(), 0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = rank(&[v(&[1, 0]), v(&[1])], Field::Rationals).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 1 }));
    }

    #[test]
    fn overflow_falls_back_to_big_integers() {
        let big = i64::MAX / 2;
        let vs = [v(&[big, big - 1]), v(&[big - 1, big - 3])];
        assert_eq!(rank(&vs, Field::Rationals).unwrap(), 2);
        let dependent = [v(&[big, big - 1]), v(&[big, big - 1])];
        assert_eq!(rank(&dependent, Field::Rationals).unwrap(), 1);
    }

    /// Span membership in dimension 3 by brute force: `x` is in the span of
    /// two independent vectors iff the 3x3 determinant vanishes.
    fn det3(a: &[i64], b: &[i64], c: &[i64]) -> i64 {
        a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
    }

    fn brute_closure(g1: &[i64], g2: &[i64]) -> BTreeSet<usize> {
        (1u64..8)
            .filter(|&m| {
                let x: Vec<i64> = (0..3).map(|i| (m >> i & 1) as i64).collect();
                det3(g1, g2, &x) == 0
            })
            .map(|m| m as usize - 1)
            .collect()
    }

    #[test]
    fn closure_examples() {
        let ground = nonzero_binary_vectors::<i64>(3);
        assert!(span_closure(&[], &ground, Field::Rationals).unwrap().is_empty());
        for (g1, g2) in [([1, 0, 0], [0, 1, 0]), ([1, 0, 0], [0, 1, 1]), ([1, 1, 0], [0, 1, 1])] {
            let c = span_closure(&[v(&g1), v(&g2)], &ground, Field::Rationals).unwrap();
            assert_eq!(c, brute_closure(&g1, &g2));
        }
        // frozen from the determinant oracle; ground index = mask - 1
        let c = span_closure(&[v(&[1, 0, 0]), v(&[0, 1, 0])], &ground, Field::Rationals).unwrap();
        assert_eq!(c, [0, 1, 2].into_iter().collect());
        // e1 + (e2 + e3) is the all-ones vector, so this plane holds three points
        let c = span_closure(&[v(&[1, 0, 0]), v(&[0, 1, 1])], &ground, Field::Rationals).unwrap();
        assert_eq!(c, [0, 5, 6].into_iter().collect());
        // a genuine two-point rank-2 flat
        let c = span_closure(&[v(&[1, 1, 0]), v(&[0, 1, 1])], &ground, Field::Rationals).unwrap();
        assert_eq!(c, [2, 5].into_iter().collect());
        // over F2 the same pair also picks up e1 + e3
        let c = span_closure(&[v(&[1, 1, 0]), v(&[0, 1, 1])], &ground, Field::Binary).unwrap();
        assert_eq!(c, [2, 4, 5].into_iter().collect());
    }

    #[test]
    fn generator_outside_ground_is_rejected() {
        let ground = nonzero_binary_vectors::<i64>(2);
        assert!(span_closure(&[v(&[2, 0])], &ground, Field::Rationals).is_err());
    }
}
