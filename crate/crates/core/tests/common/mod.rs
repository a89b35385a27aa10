#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use unbalanced::families::{pair_count, Family, SignVector};

/// A random family over `[n]`, drawn from one of several shapes so that both
/// verdicts show up: random selections, subfamilies of a threshold family
/// (always unbalanced), sparse and dense random families, and families that
/// contain a complementary pair (always balanced).
pub fn random_family<R: Rng>(rng: &mut R, n: usize) -> Family {
    let all: Vec<u32> = (0..1u32 << n).collect();
    let nontrivial: Vec<u32> = (1..(1u32 << n) - 1).collect();
    match rng.gen_range(0..5) {
        0 => {
            let signs = (0..pair_count(n)).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            unbalanced::families::selection_to_family(&SignVector::new(n, signs).unwrap())
        }
        1 => {
            // {F : v(F) > 0} for a random zero-sum integer v, thinned out
            let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
            let total: i64 = v.iter().sum();
            v[0] -= total;
            let keep = rng.gen_range(0.1..1.0);
            let masks = nontrivial
                .iter()
                .copied()
                .filter(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| v[i]).sum::<i64>() > 0)
                .filter(|_| rng.gen_bool(keep));
            Family::from_masks(n, masks).unwrap()
        }
        2 => {
            let k = rng.gen_range(1..=n.min(nontrivial.len()));
            Family::from_masks(n, nontrivial.choose_multiple(rng, k).copied()).unwrap()
        }
        3 => {
            let p = rng.gen_range(0.05..0.6);
            Family::from_masks(n, all.iter().copied().filter(|_| rng.gen_bool(p))).unwrap()
        }
        _ => {
            let f = *nontrivial.choose(rng).unwrap();
            let g = !f & ((1u32 << n) - 1);
            let extra = nontrivial.choose_multiple(rng, 3).copied();
            let mut masks: Vec<u32> = extra.chain([f, g]).collect();
            masks.sort_unstable();
            masks.dedup();
            Family::from_masks(n, masks).unwrap()
        }
    }
}

/// Unique solution of a square-or-tall rational system by Gauss-Jordan
/// elimination, or `None` when the solution is missing or not unique.
pub fn solve_unique(mut rows: Vec<Vec<BigRational>>, vars: usize) -> Option<Vec<BigRational>> {
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..vars {
        let r = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(pivot_row, r);
        let p = rows[pivot_row][col].clone();
        for x in rows[pivot_row].iter_mut() {
            *x = &*x / &p;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[vars].is_zero()) {
        return None;
    }
    Some((0..vars).map(|c| rows[pivots[c]][vars].clone()).collect())
}

/// Brute-force balance oracle: the family is balanced iff some subfamily of
/// at most `n + 1` members has a unique solution `(λ, c)` of
/// `sum λ_F χ_F = c·1, sum λ_F = 1` with `λ >= 0`.
pub fn brute_force_balanced(fam: &Family) -> bool {
    let n = fam.n();
    let members = fam.members();
    let max = (n + 1).min(members.len());
    let mut chosen = Vec::new();
    fn rec(fam: &Family, start: usize, max: usize, chosen: &mut Vec<usize>) -> bool {
        if !chosen.is_empty() && check(fam, chosen) {
            return true;
        }
        if chosen.len() == max {
            return false;
        }
        for i in start..fam.len() {
            chosen.push(i);
            if rec(fam, i + 1, max, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    fn check(fam: &Family, chosen: &[usize]) -> bool {
        let n = fam.n();
        let k = chosen.len();
        let q = |v: i64| BigRational::from_integer(BigInt::from(v));
        // unknowns: λ_1..λ_k, c
        let mut rows: Vec<Vec<BigRational>> = (1..=n)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    chosen.iter().map(|&j| q(fam.members()[j].contains(i) as i64)).collect();
                row.push(q(-1));
                row.push(q(0));
                row
            })
            .collect();
        let mut sum_row = vec![BigRational::one(); k];
        sum_row.push(q(0));
        sum_row.push(q(1));
        rows.push(sum_row);
        match solve_unique(rows, k + 1) {
            Some(sol) => sol[..k].iter().all(|x| !x.is_negative()),
            None => false,
        }
    }
    rec(fam, 0, max, &mut chosen)
}
