//! Lattices of flats of the nonzero 0-1 vectors in dimension `n - 1`, over Q
//! and over F2, with Möbius values, characteristic polynomials and Whitney
//! numbers of the first kind.
//!
//! Ground point `i` is the 0-1 vector with mask `i + 1`. A flat is a set of
//! ground points closed under span, stored as a bit set.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::families::pair_count;
use crate::kernel::{BinaryEchelon, Field, RationalEchelon};

/// Largest `n` whose lattice is built over Q.
pub const MAX_RATIONAL_N: usize = 7;
/// Largest `n` whose lattice is built explicitly over F2.
pub const MAX_BINARY_N: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flat {
    /// Bit `i` set iff ground point `i` lies in the flat.
    pub points: u64,
    pub rank: usize,
    /// `μ(0̂, x)`.
    pub moebius: BigInt,
}

impl Flat {
    pub fn point_indices(&self) -> Vec<usize> {
        (0..64).filter(|i| self.points >> i & 1 == 1).collect()
    }

    pub fn is_below(&self, other: &Flat) -> bool {
        self.points & !other.points == 0
    }
}

#[derive(Debug, Clone)]
pub struct FlatLattice {
    n: usize,
    field: Field,
    /// `levels[k]` holds the flats of rank `k`, sorted by point set.
    levels: Vec<Vec<Flat>>,
}

struct Ground {
    field: Field,
    dim: usize,
    vectors: Vec<Vec<i64>>,
}

impl Ground {
    fn new(n: usize, field: Field) -> Self {
        let dim = n - 1;
        let vectors = (1..=pair_count(n) as u64).map(|m| (0..dim).map(|i| (m >> i & 1) as i64).collect()).collect();
        Ground { field, dim, vectors }
    }

    /// Closure of the span of `basis` as a point set.
    fn closure(&self, basis: &[usize]) -> u64 {
        match self.field {
            Field::Rationals => {
                let mut ech = RationalEchelon::<i64>::new(self.dim);
                for &b in basis {
                    ech.insert(&self.vectors[b]).expect("0-1 data stays small");
                }
                self.vectors
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| ech.contains(v).expect("0-1 data stays small"))
                    .fold(0u64, |acc, (i, _)| acc | 1 << i)
            }
            Field::Binary => {
                let mut ech = BinaryEchelon::new();
                for &b in basis {
                    ech.insert(&[b as u64 + 1]);
                }
                (0..self.vectors.len()).filter(|&i| ech.contains(&[i as u64 + 1])).fold(0u64, |acc, i| acc | 1 << i)
            }
        }
    }
}

/// Builds every flat by upward closure, then Möbius values rank by rank.
pub fn build_flat_lattice(n: usize, field: Field) -> Result<FlatLattice> {
    let max = match field {
        Field::Rationals => MAX_RATIONAL_N,
        Field::Binary => MAX_BINARY_N,
    };
    if !(2..=max).contains(&n) {
        return Err(invalid(format!("lattice over {field} supports 2 <= n <= {max}, got {n}")));
    }
    let ground = Ground::new(n, field);
    let points = ground.vectors.len();
    let top_rank = n - 1;

    // (points, basis) per rank
    let mut levels: Vec<Vec<(u64, Vec<usize>)>> = vec![vec![(ground.closure(&[]), Vec::new())]];
    for rank in 1..=top_rank {
        let below = &levels[rank - 1];
        let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
        for (flat, basis) in below {
            let mut covered = *flat;
            for p in 0..points {
                if covered >> p & 1 == 1 {
                    continue;
                }
                let mut next_basis = basis.clone();
                next_basis.push(p);
                let closed = ground.closure(&next_basis);
                covered |= closed;
                seen.entry(closed).or_insert(next_basis);
            }
        }
        let mut level: Vec<(u64, Vec<usize>)> = seen.into_iter().collect();
        level.sort_unstable_by_key(|(p, _)| *p);
        levels.push(level);
    }

    let mut flat_levels: Vec<Vec<Flat>> = Vec::with_capacity(levels.len());
    for (rank, level) in levels.iter().enumerate() {
        let moebius: Vec<i128> = if rank == 0 {
            vec![1]
        } else {
            level
                .par_iter()
                .map(|(x, _)| {
                    -flat_levels
                        .iter()
                        .flatten()
                        .filter(|y: &&Flat| y.points & !x == 0)
                        .map(|y| i128::try_from(&y.moebius).expect("Möbius values fit i128"))
                        .sum::<i128>()
                })
                .collect()
        };
        flat_levels.push(
            level
                .iter()
                .zip(moebius)
                .map(|((points, _), mu)| Flat { points: *points, rank, moebius: BigInt::from(mu) })
                .collect(),
        );
    }
    Ok(FlatLattice { n, field, levels: flat_levels })
}

impl FlatLattice {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rank(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, rank: usize) -> &[Flat] {
        &self.levels[rank]
    }

    pub fn flats(&self) -> impl Iterator<Item = &Flat> {
        self.levels.iter().flatten()
    }

    pub fn flat_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Flat counts per rank.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn bottom(&self) -> &Flat {
        &self.levels[0][0]
    }

    pub fn top(&self) -> &Flat {
        &self.levels[self.rank()][0]
    }
}

/// Characteristic polynomial of the lattice for ground-set size `n`;
/// `coeffs[k]` is the coefficient of `t^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPoly {
    pub n: usize,
    pub field: Field,
    pub coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `w_k`, the coefficient of `t^{r-k}`.
    pub fn whitney(&self) -> Vec<BigInt> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn evaluate(&self, t: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            schema: Some("1".into()),
            n: self.n,
            field: self.field,
            coeffs: self.coeffs.iter().rev().map(BigInt::to_string).collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        let mut coeffs = json
            .coeffs
            .iter()
            .map(|c| c.parse::<BigInt>().map_err(|_| invalid(format!("bad coefficient `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(invalid("polynomial needs at least one coefficient"));
        }
        coeffs.reverse();
        Ok(CharPoly { n: json.n, field: json.field, coeffs })
    }
}

impl std::fmt::Display for CharPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("t")?,
                (1, false) => write!(f, "{mag}t")?,
                (_, true) => write!(f, "t^{k}")?,
                (_, false) => write!(f, "{mag}t^{k}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `{"schema":"1","n":4,"field":"Q","coeffs":["1","-7","15","-9"]}`, highest
/// degree first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    pub field: Field,
    pub coeffs: Vec<String>,
}

/// `sum_x μ(0̂, x) t^{r - rank x}`.
pub fn characteristic_polynomial(lattice: &FlatLattice) -> CharPoly {
    let r = lattice.rank();
    let mut coeffs = vec![BigInt::zero(); r + 1];
    for flat in lattice.flats() {
        coeffs[r - flat.rank] += &flat.moebius;
    }
    CharPoly { n: lattice.n, field: lattice.field, coeffs }
}

/// Chamber count `(-1)^r p(-1)`, checked against `sum_k |w_k|`.
pub fn zaslavsky_count(p: &CharPoly) -> Result<BigInt> {
    let at_minus_one = p.evaluate(&BigInt::from(-1));
    let by_evaluation = if p.degree().is_multiple_of(2) { at_minus_one } else { -at_minus_one };
    let by_whitney: BigInt = p.coeffs.iter().map(BigInt::abs).sum();
    if by_evaluation != by_whitney {
        return Err(Error::Internal(format!("chamber count routes disagree: {by_evaluation} vs {by_whitney} for {p}")));
    }
    Ok(by_evaluation)
}

/// Expands `prod_{i=0}^{n-2} (t - 2^i)`.
pub fn projective_charpoly(n: usize) -> Result<CharPoly> {
    if n < 2 {
        return Err(invalid("the projective closed form needs n >= 2"));
    }
    let mut coeffs = vec![BigInt::one()];
    for i in 0..n - 1 {
        let root = BigInt::one() << i;
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * &root;
        }
        coeffs = next;
    }
    Ok(CharPoly { n, field: Field::Binary, coeffs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhitneyComparison {
    pub n: usize,
    /// `|w_k|` over Q.
    pub rational: Vec<BigInt>,
    /// `|w_k|` over F2.
    pub binary: Vec<BigInt>,
    pub per_k: Vec<bool>,
    pub rational_chambers: BigInt,
    pub binary_chambers: BigInt,
    /// The explicit F2 polynomial equals the projective closed form.
    pub binary_matches_closed_form: bool,
}

impl WhitneyComparison {
    pub fn passed(&self) -> bool {
        self.per_k.iter().all(|&b| b)
            && self.rational_chambers >= self.binary_chambers
            && self.binary_matches_closed_form
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Audit {
                audit: "whitney",
                detail: format!("|w_k| over Q {:?} vs F2 {:?} at n = {}", self.rational, self.binary, self.n),
            })
        }
    }
}

/// Compares Whitney magnitudes of the Q and F2 lattices coefficientwise.
pub fn whitney_compare(n: usize) -> Result<WhitneyComparison> {
    if !(2..=6).contains(&n) {
        return Err(invalid("the Whitney comparison supports 2 <= n <= 6"));
    }
    let q = characteristic_polynomial(&build_flat_lattice(n, Field::Rationals)?);
    let f2 = characteristic_polynomial(&build_flat_lattice(n, Field::Binary)?);
    let closed = projective_charpoly(n)?;
    let rational: Vec<BigInt> = q.whitney().iter().map(BigInt::abs).collect();
    let binary: Vec<BigInt> = f2.whitney().iter().map(BigInt::abs).collect();
    let per_k = rational.iter().zip(&binary).map(|(a, b)| a >= b).collect();
    Ok(WhitneyComparison {
        n,
        per_k,
        rational_chambers: zaslavsky_count(&q)?,
        binary_chambers: zaslavsky_count(&f2)?,
        binary_matches_closed_form: f2.coeffs == closed.coeffs,
        rational,
        binary,
    })
}
