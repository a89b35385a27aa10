//! Audits over a complete chamber set: signature parity, bipartiteness of the
//! one-swap graph, facet adjacency of one-swap pairs, signature uniqueness,
//! and the balanced/unbalanced split of all selections.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;

use super::{check_key_n, ChamberKey, ChamberSet};
use crate::error::{invalid, Error, Result};
use crate::families::{balance_certify, pair_count, selection_to_family, Signature};
use crate::kernel::lp_max_margin;

fn fail(audit: &'static str, detail: String) -> Error {
    Error::Audit { audit, detail }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityReport {
    pub n: usize,
    pub all_even: usize,
    pub all_odd: usize,
    /// Chambers whose signature mixes parities.
    pub violations: Vec<(ChamberKey, Signature)>,
}

impl ParityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.violations.first() {
            None => Ok(self),
            Some((k, s)) => Err(fail("parity", format!("chamber {k} has mixed-parity signature {s:?}"))),
        }
    }
}

/// Checks that each signature is all even or all odd.
pub fn parity_audit(chambers: &ChamberSet) -> ParityReport {
    let mut report = ParityReport { n: chambers.n(), all_even: 0, all_odd: 0, violations: Vec::new() };
    for &key in chambers.keys() {
        let sig = key.signature(chambers.n());
        match sig.entries().first().map(|e| e % 2) {
            _ if !sig.is_parity_uniform() => report.violations.push((key, sig)),
            Some(0) => report.all_even += 1,
            _ => report.all_odd += 1,
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteReport {
    pub bipartite: bool,
    pub edges: usize,
    /// Sizes of the two color classes (color 0 holds the smallest key).
    pub classes: (usize, usize),
    /// Whether every color class is a single signature parity class.
    pub matches_parity: bool,
}

/// Two-colors the one-swap graph induced on the chamber set.
pub fn bipartite_audit(chambers: &ChamberSet) -> BipartiteReport {
    let n = chambers.n();
    let keys = chambers.keys();
    let index: HashMap<ChamberKey, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut color: Vec<Option<u8>> = vec![None; keys.len()];
    let mut bipartite = true;
    let mut edges = 0;
    for start in 0..keys.len() {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let c = color[i].expect("queued nodes are colored");
            for m in 1..=pair_count(n) {
                let Some(&j) = index.get(&keys[i].flipped(m)) else { continue };
                if i < j {
                    edges += 1;
                }
                match color[j] {
                    None => {
                        color[j] = Some(1 - c);
                        queue.push_back(j);
                    }
                    Some(cj) if cj == c => bipartite = false,
                    Some(_) => {}
                }
            }
        }
    }
    let zeros = color.iter().filter(|c| **c == Some(0)).count();
    let mut class_parity: [Option<u64>; 2] = [None, None];
    let mut matches_parity = true;
    for (k, c) in keys.iter().zip(&color) {
        let sig = k.signature(n);
        if !sig.is_parity_uniform() {
            matches_parity = false;
            continue;
        }
        let p = sig.entries()[0] % 2;
        match &mut class_parity[c.unwrap_or(0) as usize] {
            slot @ None => *slot = Some(p),
            Some(q) if *q != p => matches_parity = false,
            Some(_) => {}
        }
    }
    if let [Some(a), Some(b)] = class_parity {
        matches_parity &= a != b;
    }
    BipartiteReport { bipartite, edges, classes: (zeros, keys.len() - zeros), matches_parity }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyReport {
    pub edges_checked: usize,
    /// One-swap pairs `(a, b, m)` that do not share the facet on hyperplane `m`.
    pub not_facet_adjacent: Vec<(ChamberKey, ChamberKey, usize)>,
}

impl AdjacencyReport {
    pub fn passed(&self) -> bool {
        self.not_facet_adjacent.is_empty()
    }
}

/// For each one-swap pair, checks that the hyperplane they disagree on
/// carries a common facet: with that row turned into an equality, every other
/// row must still be strictly satisfiable.
pub fn chamber_adjacency_audit(chambers: &ChamberSet) -> Result<AdjacencyReport> {
    let n = chambers.n();
    if n > 5 {
        return Err(invalid("the adjacency audit is limited to n <= 5"));
    }
    let pairs: Vec<(ChamberKey, ChamberKey, usize)> = chambers
        .keys()
        .iter()
        .flat_map(|&a| {
            (1..=pair_count(n)).map(move |m| (a, a.flipped(m), m)).filter(|(a, b, _)| a < b && chambers.contains(*b))
        })
        .collect();
    let verdicts = pairs
        .par_iter()
        .map(|&(a, _, m)| {
            let lp = super::chamber_problem(&a.to_signs(n), Some(m));
            match lp_max_margin(&lp) {
                Ok(sol) => Ok(sol.is_strictly_feasible()),
                // no other rows: the whole hyperplane is the shared facet
                Err(Error::Unbounded) => Ok(true),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(AdjacencyReport {
        edges_checked: pairs.len(),
        not_facet_adjacent: pairs.into_iter().zip(verdicts).filter(|(_, ok)| !ok).map(|(p, _)| p).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessReport {
    pub chambers: usize,
    pub distinct: usize,
    pub duplicates: Vec<(ChamberKey, ChamberKey, Signature)>,
}

impl UniquenessReport {
    pub fn passed(&self) -> bool {
        self.duplicates.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        match self.duplicates.first() {
            None => Ok(self),
            Some((a, b, s)) => Err(fail("uniqueness", format!("chambers {a} and {b} share signature {s:?}"))),
        }
    }
}

/// Scans for two chambers with the same signature.
pub fn signature_uniqueness_audit(chambers: &ChamberSet) -> UniquenessReport {
    let mut seen: HashMap<Signature, ChamberKey> = HashMap::with_capacity(chambers.count());
    let mut duplicates = Vec::new();
    for &key in chambers.keys() {
        let sig = key.signature(chambers.n());
        if let Some(&other) = seen.get(&sig) {
            duplicates.push((other, key, sig));
        } else {
            seen.insert(sig, key);
        }
    }
    UniquenessReport { chambers: chambers.count(), distinct: seen.len(), duplicates }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSpaceReport {
    pub n: usize,
    pub selections: usize,
    pub unbalanced: usize,
    pub balanced: usize,
    /// Signatures shared by a balanced and an unbalanced selection.
    pub overlap: Vec<Signature>,
    /// The unbalanced selections, i.e. the chambers.
    pub chambers: ChamberSet,
}

impl SelectionSpaceReport {
    pub fn disjoint(&self) -> bool {
        self.overlap.is_empty()
    }

    /// Some selection is balanced, so the chambers are a proper subset.
    pub fn strict_inclusion(&self) -> bool {
        self.balanced > 0
    }

    pub fn into_result(self) -> Result<Self> {
        if let Some(s) = self.overlap.first() {
            return Err(fail(
                "selection-space",
                format!("signature {s:?} occurs for both a balanced and an unbalanced selection"),
            ));
        }
        if self.n >= 3 && !self.strict_inclusion() {
            return Err(fail("selection-space", format!("every selection is unbalanced at n = {}", self.n)));
        }
        Ok(self)
    }
}

/// Certifies every selection for `n <= 5` and compares signature sets.
pub fn selection_space_audit(n: usize) -> Result<SelectionSpaceReport> {
    check_key_n(n)?;
    if n > 5 {
        return Err(invalid("the selection-space audit is limited to n <= 5"));
    }
    let total = 1u128 << pair_count(n);
    let verdicts = (0..total)
        .into_par_iter()
        .map(|k| {
            let key = ChamberKey(k);
            let cert = balance_certify(&selection_to_family(&key.to_signs(n)))?;
            Ok((key, cert.is_balanced()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut balanced_sigs = HashSet::new();
    let mut unbalanced_sigs = HashSet::new();
    let mut chambers = Vec::new();
    for (key, balanced) in &verdicts {
        if *balanced {
            balanced_sigs.insert(key.signature(n));
        } else {
            unbalanced_sigs.insert(key.signature(n));
            chambers.push(*key);
        }
    }
    let mut overlap: Vec<Signature> = balanced_sigs.intersection(&unbalanced_sigs).cloned().collect();
    overlap.sort();
    let unbalanced = chambers.len();
    Ok(SelectionSpaceReport {
        n,
        selections: verdicts.len(),
        unbalanced,
        balanced: verdicts.len() - unbalanced,
        overlap,
        chambers: ChamberSet::new(n, chambers),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_chambers, EnumerateOptions};

    fn chambers(n: usize) -> ChamberSet {
        enumerate_chambers(n, &EnumerateOptions::default()).unwrap().chambers
    }

    #[test]
    fn parity_at_two_is_mixed() {
        // (1, 0) and (0, 1): the base signature (0, 2^{n-2}) mixes parities at n = 2
        let report = parity_audit(&chambers(2));
        assert_eq!(report.violations.len(), 2);
        assert!(report.into_result().is_err());
    }

    #[test]
    fn parity_at_three() {
        let report = parity_audit(&chambers(3));
        assert!(report.passed());
        assert_eq!(report.all_even + report.all_odd, 6);
    }

    #[test]
    fn bipartite_small() {
        for n in 3..=4 {
            let report = bipartite_audit(&chambers(n));
            assert!(report.bipartite);
            assert!(report.matches_parity);
        }
    }

    #[test]
    fn adjacency_small() {
        let two = chamber_adjacency_audit(&chambers(2)).unwrap();
        assert_eq!(two.edges_checked, 1);
        assert!(two.passed());
        let three = chamber_adjacency_audit(&chambers(3)).unwrap();
        assert_eq!(three.edges_checked, 6);
        assert!(three.passed());
        assert!(chamber_adjacency_audit(&ChamberSet::new(6, vec![])).is_err());
    }

    #[test]
    fn selection_space_small() {
        let two = selection_space_audit(2).unwrap();
        assert_eq!((two.selections, two.unbalanced, two.balanced), (2, 2, 0));
        assert!(two.disjoint());
        let three = selection_space_audit(3).unwrap();
        assert_eq!((three.selections, three.unbalanced, three.balanced), (8, 6, 2));
        assert!(three.disjoint() && three.strict_inclusion());
        assert_eq!(three.chambers, chambers(3));
    }

    #[test]
    fn uniqueness_small() {
        let report = signature_uniqueness_audit(&chambers(3));
        assert_eq!(report.distinct, 6);
        assert!(report.passed());
    }
}
