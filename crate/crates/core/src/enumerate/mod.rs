//! Breadth-first enumeration of the maximal unbalanced families of `[n]`.
//!
//! Every maximal unbalanced family is a selection (one set of each
//! complementary pair), and it is unbalanced exactly when its sign vector
//! names a chamber of the arrangement of hyperplanes with nonzero 0-1 normals
//! in `R^{n-1}`. The search starts at the family of nonempty subsets avoiding
//! element 1 and follows single flips that stay unbalanced; the one-swap
//! graph on chambers is connected, so the closure is all of them.

mod audit;
mod checkpoint;

use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use dashmap::DashSet;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::families::{pair_count, selection_to_family, SignVector, Signature};
use crate::kernel::{lp_max_margin, IntVector, LpProblem};

pub use audit::{
    bipartite_audit, chamber_adjacency_audit, parity_audit, selection_space_audit, signature_uniqueness_audit,
    AdjacencyReport, BipartiteReport, ParityReport, SelectionSpaceReport, UniquenessReport,
};
pub use checkpoint::Checkpoint;

/// Largest `n` whose sign vectors fit a [`ChamberKey`].
pub const MAX_KEY_N: usize = 8;

/// Sign vector packed little-endian by representative mask: bit `m - 1` is
/// set iff the sign of representative `m` is `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChamberKey(pub u128);

impl ChamberKey {
    pub fn from_signs(sigma: &SignVector) -> Result<Self> {
        if sigma.n() > MAX_KEY_N {
            return Err(invalid(format!("chamber keys support n <= {MAX_KEY_N}")));
        }
        Ok(ChamberKey(sigma.signs().iter().enumerate().filter(|(_, &s)| s > 0).fold(0u128, |k, (i, _)| k | 1 << i)))
    }

    pub fn to_signs(self, n: usize) -> SignVector {
        let signs = (0..pair_count(n)).map(|i| if self.0 >> i & 1 == 1 { 1 } else { -1 }).collect();
        SignVector::new(n, signs).expect("key width matches n")
    }

    pub fn flipped(self, m: usize) -> ChamberKey {
        ChamberKey(self.0 ^ 1 << (m - 1))
    }

    pub fn sign(self, m: usize) -> i8 {
        if self.0 >> (m - 1) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn to_hex(self) -> String {
        format!("{:x}", self.0)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        u128::from_str_radix(text.trim(), 16).map(ChamberKey).map_err(|_| invalid(format!("bad chamber key `{text}`")))
    }

    /// Signature of the selection family, computed straight from the key.
    pub fn signature(self, n: usize) -> Signature {
        let full = (1u32 << n) - 1;
        let mut counts = vec![0u64; n];
        for m in 1..=pair_count(n) {
            let chosen = if self.sign(m) > 0 { m as u32 } else { !(m as u32) & full };
            for (i, c) in counts.iter_mut().enumerate() {
                *c += u64::from(chosen >> i & 1);
            }
        }
        Signature(counts)
    }
}

impl fmt::Display for ChamberKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

fn check_key_n(n: usize) -> Result<()> {
    if !(2..=MAX_KEY_N).contains(&n) {
        return Err(invalid(format!("n = {n} outside 2..={MAX_KEY_N}")));
    }
    Ok(())
}

/// The selection of every nonempty subset avoiding element 1.
pub fn seed_chamber(n: usize) -> Result<SignVector> {
    if n < 2 {
        return Err(invalid("there are no maximal unbalanced families for n < 2"));
    }
    let signs = (1..=pair_count(n)).map(|m| if m & 1 == 1 { -1 } else { 1 }).collect();
    SignVector::new(n, signs)
}

/// The chamber LP in `R^{n-1}`: `sigma_m * (m·w) >= t` for every
/// representative `m`, optionally with representative `on_wall` moved onto
/// its hyperplane.
pub fn chamber_problem(sigma: &SignVector, on_wall: Option<usize>) -> LpProblem<i64> {
    let d = sigma.n() - 1;
    let mut lp = LpProblem::with_unit_box(d);
    for m in 1..=pair_count(sigma.n()) {
        let s = i64::from(sigma.sign(m));
        let row = IntVector::new((0..d).map(|i| if m >> i & 1 == 1 { s } else { 0 }).collect());
        if on_wall == Some(m) { lp.push_zero(row) } else { lp.push_margin(row) }.expect("dimension n - 1");
    }
    lp
}

/// Whether `sigma` names a chamber, i.e. its selection family is unbalanced.
pub fn is_chamber(sigma: &SignVector) -> Result<bool> {
    Ok(lp_max_margin(&chamber_problem(sigma, None))?.is_strictly_feasible())
}

/// All single flips of `sigma` that are again chambers, as `(m, flipped)`.
pub fn feasible_neighbors(sigma: &SignVector) -> Result<Vec<(usize, SignVector)>> {
    let mut out = Vec::new();
    for m in 1..=pair_count(sigma.n()) {
        let next = sigma.flipped(m);
        if is_chamber(&next)? {
            out.push((m, next));
        }
    }
    Ok(out)
}

/// The chambers found by an enumeration, sorted by key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberSet {
    n: usize,
    keys: Vec<ChamberKey>,
}

impl ChamberSet {
    pub fn new(n: usize, mut keys: Vec<ChamberKey>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        ChamberSet { n, keys }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn keys(&self) -> &[ChamberKey] {
        &self.keys
    }

    pub fn count(&self) -> usize {
        self.keys.len()
    }

    pub fn contains(&self, key: ChamberKey) -> bool {
        self.keys.binary_search(&key).is_ok()
    }

    pub fn sign_vectors(&self) -> impl Iterator<Item = SignVector> + '_ {
        self.keys.iter().map(move |k| k.to_signs(self.n))
    }

    /// `n=<n>` header, then one lowercase hex key per line in key order.
    pub fn to_chamber_file(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for k in &self.keys {
            out.push_str(&k.to_hex());
            out.push('\n');
        }
        out
    }

    pub fn parse_chamber_file(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| invalid("empty chamber file"))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| invalid(format!("bad chamber file header `{header}`")))?;
        let keys = lines.filter(|l| !l.trim().is_empty()).map(ChamberKey::from_hex).collect::<Result<_>>()?;
        Ok(ChamberSet::new(n, keys))
    }

    pub fn signatures(&self) -> Vec<Signature> {
        self.keys.iter().map(|k| k.signature(self.n)).collect()
    }

    /// One signature per line, entries comma separated, sorted.
    pub fn to_signature_csv(&self) -> String {
        let mut sigs = self.signatures();
        sigs.sort();
        sigs.iter().map(|s| s.to_csv_line() + "\n").collect()
    }
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub threads: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Write a checkpoint every this many generations.
    pub checkpoint_every: u64,
    /// Stop at the next generation boundary once this many chambers are known.
    pub limit_chambers: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Stop after this many generations have been expanded in this run.
    pub max_generations: Option<u64>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            threads: 1,
            checkpoint: None,
            resume: false,
            checkpoint_every: 1,
            limit_chambers: None,
            time_budget: None,
            max_generations: None,
        }
    }
}

impl EnumerateOptions {
    pub fn with_threads(threads: usize) -> Self {
        EnumerateOptions { threads, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    pub lp_calls: u64,
    pub generations: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    /// Chambers visited so far; all of them when `complete`.
    pub chambers: ChamberSet,
    pub complete: bool,
    pub stats: EnumerationStats,
}

/// Enumerates every chamber for `n`, optionally resuming from and writing to
/// a checkpoint. The result does not depend on the worker count.
pub fn enumerate_chambers(n: usize, options: &EnumerateOptions) -> Result<Enumeration> {
    if n == 1 {
        return Ok(Enumeration {
            chambers: ChamberSet::new(1, Vec::new()),
            complete: true,
            stats: EnumerationStats::default(),
        });
    }
    check_key_n(n)?;
    if options.resume && options.checkpoint.is_none() {
        return Err(invalid("resume requires a checkpoint path"));
    }

    let started = Instant::now();
    let (visited, mut frontier, mut generation, mut stats) = match (&options.checkpoint, options.resume) {
        (Some(path), true) => {
            let cp = Checkpoint::read(path)?;
            if cp.n != n {
                return Err(Error::Integrity(format!("checkpoint is for n = {}, not {n}", cp.n)));
            }
            let visited: DashSet<ChamberKey> = cp.visited.iter().copied().collect();
            let stats =
                EnumerationStats { lp_calls: cp.lp_calls, generations: cp.generation, elapsed_ms: cp.elapsed_ms };
            (visited, cp.frontier, cp.generation, stats)
        }
        _ => {
            let seed = ChamberKey::from_signs(&seed_chamber(n)?)?;
            let visited = DashSet::new();
            visited.insert(seed);
            (visited, vec![seed], 0, EnumerationStats::default())
        }
    };
    let base_elapsed = stats.elapsed_ms;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let pairs = pair_count(n);
    let mut expanded_here = 0u64;
    while !frontier.is_empty() {
        let over_limit = options.limit_chambers.is_some_and(|l| visited.len() >= l)
            || options.time_budget.is_some_and(|b| started.elapsed() >= b)
            || options.max_generations.is_some_and(|g| expanded_here >= g);
        if over_limit {
            break;
        }

        let results: Vec<Result<(Vec<ChamberKey>, u64)>> = pool.install(|| {
            frontier
                .par_iter()
                .map(|&key| {
                    let mut found = Vec::new();
                    let mut calls = 0u64;
                    for m in 1..=pairs {
                        let next = key.flipped(m);
                        if visited.contains(&next) {
                            continue;
                        }
                        calls += 1;
                        if is_chamber(&next.to_signs(n))? && visited.insert(next) {
                            found.push(next);
                        }
                    }
                    Ok((found, calls))
                })
                .collect()
        });
        let mut next_frontier = Vec::new();
        for r in results {
            let (found, calls) = r?;
            stats.lp_calls += calls;
            next_frontier.extend(found);
        }
        next_frontier.sort_unstable();
        frontier = next_frontier;
        generation += 1;
        expanded_here += 1;
        stats.generations = generation;
        stats.elapsed_ms = base_elapsed + started.elapsed().as_millis() as u64;

        if let Some(path) = &options.checkpoint {
            if generation % options.checkpoint_every.max(1) == 0 || frontier.is_empty() {
                snapshot(n, generation, &visited, &frontier, &stats).write(path)?;
            }
        }
    }

    let complete = frontier.is_empty();
    stats.elapsed_ms = base_elapsed + started.elapsed().as_millis() as u64;
    if let Some(path) = &options.checkpoint {
        snapshot(n, generation, &visited, &frontier, &stats).write(path)?;
    }
    Ok(Enumeration { chambers: ChamberSet::new(n, visited.into_iter().collect()), complete, stats })
}

fn snapshot(
    n: usize,
    generation: u64,
    visited: &DashSet<ChamberKey>,
    frontier: &[ChamberKey],
    stats: &EnumerationStats,
) -> Checkpoint {
    let mut keys: Vec<ChamberKey> = visited.iter().map(|k| *k).collect();
    keys.sort_unstable();
    Checkpoint {
        n,
        generation,
        visited: keys,
        frontier: frontier.to_vec(),
        lp_calls: stats.lp_calls,
        elapsed_ms: stats.elapsed_ms,
    }
}

/// Certifies every selection of `[n]` and returns the keys of the unbalanced
/// ones. Exponential in `2^{n-1}`; intended for `n <= 5`.
pub fn brute_force_chambers(n: usize) -> Result<ChamberSet> {
    check_key_n(n)?;
    if n > 5 {
        return Err(invalid("brute force over all selections is limited to n <= 5"));
    }
    let total = 1u128 << pair_count(n);
    let keys: Vec<ChamberKey> = (0..total)
        .into_par_iter()
        .map(|k| {
            let key = ChamberKey(k);
            let fam = selection_to_family(&key.to_signs(n));
            Ok((key, crate::families::balance_certify(&fam)?.is_balanced()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, balanced)| !balanced)
        .map(|(k, _)| k)
        .collect();
    Ok(ChamberSet::new(n, keys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{balance_certify, signature, Family, Subset};

    fn family_signature(sigma: &SignVector) -> Signature {
        signature(&selection_to_family(sigma))
    }

    #[test]
    fn seed_examples() {
        let s2 = seed_chamber(2).unwrap();
        assert_eq!(s2.signs(), &[-1]);
        assert_eq!(selection_to_family(&s2), Family::new(2, [Subset::from_elements(&[2], 2).unwrap()]).unwrap());
        assert_eq!(family_signature(&s2).0, vec![0, 1]);
        let s3 = seed_chamber(3).unwrap();
        assert_eq!(selection_to_family(&s3).to_string(), "{{2}, {3}, {2,3}}");
        assert_eq!(family_signature(&s3).0, vec![0, 2, 2]);
        assert_eq!(family_signature(&seed_chamber(4).unwrap()).0, vec![0, 4, 4, 4]);
        assert!(seed_chamber(1).is_err());
        for n in 2..=8 {
            let seed = seed_chamber(n).unwrap();
            assert!(is_chamber(&seed).unwrap());
            let key = ChamberKey::from_signs(&seed).unwrap();
            assert_eq!(key.signature(n), family_signature(&seed));
        }
    }

    #[test]
    fn neighbors_at_two() {
        let s = SignVector::new(2, vec![1]).unwrap();
        let nb = feasible_neighbors(&s).unwrap();
        assert_eq!(nb, vec![(1, SignVector::new(2, vec![-1]).unwrap())]);
    }

    #[test]
    fn neighbors_at_three_match_brute_force() {
        let seed = seed_chamber(3).unwrap();
        let expected: Vec<usize> = (1..=3)
            .filter(|&m| !balance_certify(&selection_to_family(&seed.flipped(m))).unwrap().is_balanced())
            .collect();
        let got: Vec<usize> = feasible_neighbors(&seed).unwrap().into_iter().map(|(m, _)| m).collect();
        assert_eq!(got, expected);
        // seed is {2},{3},{2,3}; flipping representative {1} gives {1},{2},{3}, which is balanced
        assert_eq!(got, vec![2, 3]);
    }

    #[test]
    fn key_round_trip_and_hex() {
        let s = SignVector::new(3, vec![1, -1, 1]).unwrap();
        let k = ChamberKey::from_signs(&s).unwrap();
        assert_eq!(k, ChamberKey(0b101));
        assert_eq!(k.to_signs(3), s);
        assert_eq!(k.to_hex(), "5");
        assert_eq!(ChamberKey::from_hex("5").unwrap(), k);
        assert!(ChamberKey::from_hex("zz").is_err());
    }

    #[test]
    fn small_counts() {
        for (n, e) in [(1, 0), (2, 2), (3, 6), (4, 32)] {
            let run = enumerate_chambers(n, &EnumerateOptions::default()).unwrap();
            assert!(run.complete);
            assert_eq!(run.chambers.count(), e);
        }
        assert!(enumerate_chambers(9, &EnumerateOptions::default()).is_err());
    }

    #[test]
    fn chamber_file_round_trip() {
        let run = enumerate_chambers(3, &EnumerateOptions::default()).unwrap();
        let text = run.chambers.to_chamber_file();
        assert!(text.starts_with("n=3\n"));
        assert_eq!(ChamberSet::parse_chamber_file(&text).unwrap(), run.chambers);
    }

    #[test]
    fn resume_needs_path() {
        let opts = EnumerateOptions { resume: true, ..Default::default() };
        assert!(enumerate_chambers(3, &opts).is_err());
    }
}
