//! Exact maximum-margin linear programs.
//!
//! A problem asks for the largest `t` such that `a·v >= t` holds for every
//! margin row, `a·v = 0` holds for every zero row, and each `v_i` stays in
//! its rational interval. Strict feasibility of the margin rows is exactly
//! `t* > 0`.
//!
//! The solver is a dense dictionary simplex with Bland's rule, run with
//! fraction-free integer pivoting: the tableau is stored as integers over a
//! single common denominator (the basis determinant), so every division is
//! exact. It first runs in `i64`, then `i128`, then `BigInt`, restarting from
//! scratch on overflow. Bland's rule only ever compares exact values, so every
//! ring takes the same pivot path and returns the same rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::kernel::linalg::IntVector;
use crate::scalar::{ratio, ExactInt};

/// Kind of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    /// `a·v >= t`
    AtLeastMargin,
    /// `a·v = 0`
    Zero,
}

#[derive(Debug, Clone)]
pub struct LpProblem<T = BigInt> {
    dim: usize,
    rows: Vec<IntVector<T>>,
    senses: Vec<RowSense>,
    bounds: Vec<(BigRational, BigRational)>,
}

impl<T: ExactInt> LpProblem<T> {
    /// An empty problem over `dim` variables, each boxed in `[-1, 1]`.
    pub fn with_unit_box(dim: usize) -> Self {
        let one = BigRational::from_integer(BigInt::from(1));
        LpProblem { dim, rows: Vec::new(), senses: Vec::new(), bounds: vec![(-one.clone(), one); dim] }
    }

    pub fn set_bounds(&mut self, var: usize, lo: BigRational, hi: BigRational) -> Result<()> {
        if lo > hi {
            return Err(invalid(format!("empty bound interval for variable {var}")));
        }
        self.bounds[var] = (lo, hi);
        Ok(())
    }

    pub fn push(&mut self, row: IntVector<T>, sense: RowSense) -> Result<()> {
        if row.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: row.dim() });
        }
        self.rows.push(row);
        self.senses.push(sense);
        Ok(())
    }

    pub fn push_margin(&mut self, row: IntVector<T>) -> Result<()> {
        self.push(row, RowSense::AtLeastMargin)
    }

    pub fn push_zero(&mut self, row: IntVector<T>) -> Result<()> {
        self.push(row, RowSense::Zero)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[IntVector<T>] {
        &self.rows
    }

    pub fn senses(&self) -> &[RowSense] {
        &self.senses
    }

    pub fn bounds(&self) -> &[(BigRational, BigRational)] {
        &self.bounds
    }

    /// Exact value of row `r` at `point`.
    pub fn row_value(&self, r: usize, point: &[BigRational]) -> BigRational {
        self.rows[r]
            .entries()
            .iter()
            .zip(point)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, x)| x * BigRational::from_integer(a.to_bigint()))
            .fold(BigRational::zero(), |acc, x| acc + x)
    }

    /// Re-checks a solution in exact arithmetic: the witness is inside the
    /// box, zero rows vanish, and every margin row is at least `margin`.
    pub fn verify(&self, solution: &LpSolution) -> bool {
        if solution.witness.len() != self.dim {
            return false;
        }
        let in_box = solution.witness.iter().zip(&self.bounds).all(|(x, (lo, hi))| lo <= x && x <= hi);
        in_box
            && (0..self.rows.len()).all(|r| {
                let value = self.row_value(r, &solution.witness);
                match self.senses[r] {
                    RowSense::AtLeastMargin => value >= solution.margin,
                    RowSense::Zero => value.is_zero(),
                }
            })
    }
}

/// Optimal margin, a primal point attaining it, and the row multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub margin: BigRational,
    pub witness: Vec<BigRational>,
    /// One multiplier per problem row; nonnegative on margin rows.
    pub duals: Vec<BigRational>,
    pub pivots: usize,
    /// Name of the integer ring the solve completed in.
    pub ring: &'static str,
}

impl LpSolution {
    pub fn is_strictly_feasible(&self) -> bool {
        self.margin.is_positive()
    }
}

/// Maximizes the margin exactly, widening the integer ring on overflow.
pub fn lp_max_margin<T: ExactInt>(problem: &LpProblem<T>) -> Result<LpSolution> {
    if let Some(sol) = solve_in::<i64, T>(problem)? {
        return Ok(sol);
    }
    if let Some(sol) = solve_in::<i128, T>(problem)? {
        return Ok(sol);
    }
    Ok(solve_in::<BigInt, T>(problem)?.expect("arbitrary precision never overflows"))
}

/// Solves in the ring `U`. `Ok(None)` means `U` overflowed.
pub fn solve_in<U: ExactInt, T: ExactInt>(problem: &LpProblem<T>) -> Result<Option<LpSolution>> {
    let Some(mut tableau) = Tableau::<U>::build(problem) else {
        return Ok(None);
    };
    match tableau.run() {
        Step::Done => {}
        Step::Overflow => return Ok(None),
        Step::Infeasible => return Err(Error::Infeasible),
        Step::Unbounded => return Err(Error::Unbounded),
    }
    Ok(Some(tableau.extract(problem)))
}

enum Step {
    Done,
    Overflow,
    Infeasible,
    Unbounded,
}

/// Dictionary `x_B(i) + sum_j a_ij x_N(j) = b_i`, all entries over `denom`.
///
/// Row 0 is the objective `z + sum_j a_0j x_N(j) = z0`; the last column holds
/// the right-hand side. Structural variables are `v+_i, v-_i` pairs followed
/// by `t+, t-`; slack `k` has id `structural + k`.
struct Tableau<U> {
    width: usize,
    cells: Vec<U>,
    denom: U,
    basis: Vec<usize>,
    nonbasic: Vec<usize>,
    costs: Vec<i64>,
    artificial: Option<usize>,
    structural: usize,
    pivots: usize,
}

impl<U: ExactInt> Tableau<U> {
    fn build<T: ExactInt>(problem: &LpProblem<T>) -> Option<Self> {
        let d = problem.dim;
        let structural = 2 * d + 2;
        let (t_plus, t_minus) = (2 * d, 2 * d + 1);

        // Each inequality row: (coefficients over structural vars, rhs), as `<=`.
        let mut ineqs: Vec<(Vec<U>, U)> = Vec::new();
        for (row, sense) in problem.rows.iter().zip(&problem.senses) {
            let a: Vec<U> = row.entries().iter().map(|e| e.cast()).collect::<Option<_>>()?;
            let mut le = vec![U::zero(); structural];
            for (i, ai) in a.iter().enumerate() {
                le[2 * i] = ai.clone();
                le[2 * i + 1] = ai.neg_exact()?;
            }
            match sense {
                RowSense::AtLeastMargin => {
                    // -a·v + t <= 0
                    let mut r: Vec<U> = le.iter().map(|x| x.neg_exact()).collect::<Option<_>>()?;
                    r[t_plus] = U::one();
                    r[t_minus] = U::one().neg_exact()?;
                    ineqs.push((r, U::zero()));
                }
                RowSense::Zero => {
                    let neg: Vec<U> = le.iter().map(|x| x.neg_exact()).collect::<Option<_>>()?;
                    ineqs.push((le, U::zero()));
                    ineqs.push((neg, U::zero()));
                }
            }
        }
        for (i, (lo, hi)) in problem.bounds.iter().enumerate() {
            // q*(v+ - v-) <= p for hi = p/q, and the mirror for lo.
            for (bound, sign) in [(hi, 1i64), (lo, -1i64)] {
                let q = U::from_bigint(bound.denom())?;
                let p = U::from_bigint(bound.numer())?;
                let mut r = vec![U::zero(); structural];
                let s = U::from_i64(sign);
                r[2 * i] = q.mul_exact(&s)?;
                r[2 * i + 1] = r[2 * i].neg_exact()?;
                ineqs.push((r, p.mul_exact(&s)?));
            }
        }

        let m = ineqs.len();
        let width = structural + 1;
        let mut cells = Vec::with_capacity((m + 1) * width);
        cells.extend(std::iter::repeat_with(U::zero).take(width));
        for (a, b) in ineqs {
            cells.extend(a);
            cells.push(b);
        }
        let mut costs = vec![0i64; structural + m + 1];
        costs[t_plus] = 1;
        costs[t_minus] = -1;
        let mut tableau = Tableau {
            width,
            cells,
            denom: U::one(),
            basis: std::iter::once(usize::MAX).chain(structural..structural + m).collect(),
            nonbasic: (0..structural).collect(),
            costs,
            artificial: None,
            structural,
            pivots: 0,
        };
        tableau.reset_objective()?;
        Some(tableau)
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, i: usize, j: usize) -> &U {
        &self.cells[i * self.width + j]
    }

    /// Rewrites row 0 for the current `costs` in terms of the nonbasic variables.
    fn reset_objective(&mut self) -> Option<()> {
        let w = self.width;
        for j in 0..w {
            let mut acc =
                if j + 1 < w { U::from_i64(-self.costs[self.nonbasic[j]]).mul_exact(&self.denom)? } else { U::zero() };
            for i in 1..self.rows() {
                let c = self.costs[self.basis[i]];
                if c != 0 {
                    acc = acc.add_exact(&self.at(i, j).mul_exact(&U::from_i64(c))?)?;
                }
            }
            self.cells[j] = acc;
        }
        Some(())
    }

    fn pivot(&mut self, r: usize, s: usize) -> Option<()> {
        let w = self.width;
        let p = self.at(r, s).clone();
        let d = self.denom.clone();
        let pivot_row: Vec<U> = self.cells[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let row = &mut self.cells[i * w..(i + 1) * w];
            let ais = row[s].clone();
            for j in 0..w {
                if j == s {
                    continue;
                }
                let num =
                    if ais.is_zero() { row[j].mul_exact(&p)? } else { U::cross(&row[j], &p, &ais, &pivot_row[j])? };
                row[j] = if d.is_one() { num } else { num.div_exact(&d)? };
            }
            row[s] = ais.neg_exact()?;
        }
        self.cells[r * w + s] = d;
        self.denom = p;
        if self.denom.is_negative() {
            for c in self.cells.iter_mut() {
                *c = c.neg_exact()?;
            }
            self.denom = self.denom.neg_exact()?;
        }
        std::mem::swap(&mut self.basis[r], &mut self.nonbasic[s]);
        self.pivots += 1;
        Some(())
    }

    /// Bland's rule: lowest-id improving column, then lowest-id tied row.
    fn optimize(&mut self) -> Result<(), Step> {
        let rhs = self.rhs_col();
        loop {
            let entering = (0..rhs).filter(|&j| self.at(0, j).is_negative()).min_by_key(|&j| self.nonbasic[j]);
            let Some(s) = entering else {
                return Ok(());
            };
            let mut leaving: Option<usize> = None;
            for i in 1..self.rows() {
                let ais = self.at(i, s);
                if !ais.is_positive() {
                    continue;
                }
                leaving = Some(match leaving {
                    None => i,
                    Some(k) => {
                        // b_i / a_is  vs  b_k / a_ks
                        let lhs = self.at(i, rhs).mul_exact(self.at(k, s)).ok_or(Step::Overflow)?;
                        let rhs_v = self.at(k, rhs).mul_exact(ais).ok_or(Step::Overflow)?;
                        match lhs.cmp(&rhs_v) {
                            std::cmp::Ordering::Less => i,
                            std::cmp::Ordering::Equal if self.basis[i] < self.basis[k] => i,
                            _ => k,
                        }
                    }
                });
            }
            let Some(r) = leaving else {
                return Err(Step::Unbounded);
            };
            self.pivot(r, s).ok_or(Step::Overflow)?;
        }
    }

    fn run(&mut self) -> Step {
        match self.run_phases() {
            Ok(()) => Step::Done,
            Err(step) => step,
        }
    }

    fn run_phases(&mut self) -> Result<(), Step> {
        let rhs = self.rhs_col();
        let most_negative = (1..self.rows())
            .filter(|&i| self.at(i, rhs).is_negative())
            .min_by(|&a, &b| self.at(a, rhs).cmp(self.at(b, rhs)).then(self.basis[a].cmp(&self.basis[b])));
        if let Some(r) = most_negative {
            self.phase_one(r)?;
        }
        self.optimize()
    }

    /// Adds an artificial `x0` with coefficient -1 in every row, pivots it in
    /// on the most negative row, and drives it back to zero.
    fn phase_one(&mut self, start_row: usize) -> Result<(), Step> {
        let old_w = self.width;
        let new_w = old_w + 1;
        let art_col = old_w - 1;
        let art_id = self.costs.len() - 1;
        let minus_one = U::one().neg_exact().ok_or(Step::Overflow)?;
        let mut cells = Vec::with_capacity(self.rows() * new_w);
        for i in 0..self.rows() {
            let row = &self.cells[i * old_w..(i + 1) * old_w];
            cells.extend_from_slice(&row[..old_w - 1]);
            cells.push(if i == 0 { U::zero() } else { minus_one.clone() });
            cells.push(row[old_w - 1].clone());
        }
        self.cells = cells;
        self.width = new_w;
        self.nonbasic.push(art_id);
        self.artificial = Some(art_id);

        let saved = std::mem::replace(&mut self.costs, vec![0; art_id + 1]);
        self.costs[art_id] = -1;
        self.reset_objective().ok_or(Step::Overflow)?;
        self.pivot(start_row, art_col).ok_or(Step::Overflow)?;
        self.optimize()?;
        if self.at(0, self.rhs_col()).is_negative() {
            return Err(Step::Infeasible);
        }

        if let Some(r) = (1..self.rows()).find(|&i| self.basis[i] == art_id) {
            // Degenerate: x0 is basic at zero; pivot it out if the row allows.
            if let Some(s) = (0..self.width - 1).find(|&j| !self.at(r, j).is_zero()) {
                self.pivot(r, s).ok_or(Step::Overflow)?;
            }
        }
        if let Some(col) = self.nonbasic.iter().position(|&v| v == art_id) {
            let w = self.width;
            let mut cells = Vec::with_capacity(self.rows() * (w - 1));
            for i in 0..self.rows() {
                for j in 0..w {
                    if j != col {
                        cells.push(self.cells[i * w + j].clone());
                    }
                }
            }
            self.cells = cells;
            self.width = w - 1;
            self.nonbasic.remove(col);
        }
        self.costs = saved;
        self.reset_objective().ok_or(Step::Overflow)
    }

    fn value_of(&self, var: usize) -> BigRational {
        match self.basis.iter().skip(1).position(|&b| b == var) {
            Some(i) => ratio(self.at(i + 1, self.rhs_col()), &self.denom),
            None => BigRational::zero(),
        }
    }

    fn dual_of_slack(&self, k: usize) -> BigRational {
        let id = self.structural + k;
        match self.nonbasic.iter().position(|&v| v == id) {
            Some(j) => ratio(self.at(0, j), &self.denom),
            None => BigRational::zero(),
        }
    }

    fn extract<T: ExactInt>(&self, problem: &LpProblem<T>) -> LpSolution {
        let d = problem.dim;
        let witness = (0..d).map(|i| self.value_of(2 * i) - self.value_of(2 * i + 1)).collect();
        let mut duals = Vec::with_capacity(problem.rows.len());
        let mut k = 0;
        for sense in &problem.senses {
            match sense {
                RowSense::AtLeastMargin => {
                    duals.push(self.dual_of_slack(k));
                    k += 1;
                }
                RowSense::Zero => {
                    duals.push(self.dual_of_slack(k) - self.dual_of_slack(k + 1));
                    k += 2;
                }
            }
        }
        LpSolution {
            margin: ratio(self.at(0, self.rhs_col()), &self.denom),
            witness,
            duals,
            pivots: self.pivots,
            ring: U::NAME,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn row(entries: &[i64]) -> IntVector<i64> {
        IntVector::new(entries.to_vec())
    }

    #[test]
    fn opposing_constraints_give_zero_margin() {
        let mut lp = LpProblem::with_unit_box(1);
        lp.push_margin(row(&[1])).unwrap();
        lp.push_margin(row(&[-1])).unwrap();
        let sol = lp_max_margin(&lp).unwrap();
        assert_eq!(sol.margin, q(0, 1));
        assert_eq!(sol.witness, vec![q(0, 1)]);
        assert!(lp.verify(&sol));
    }

    #[test]
    fn single_direction_with_zero_sum() {
        let mut lp = LpProblem::with_unit_box(2);
        lp.push_margin(row(&[1, 0])).unwrap();
        lp.push_zero(row(&[1, 1])).unwrap();
        let sol = lp_max_margin(&lp).unwrap();
        assert_eq!(sol.margin, q(1, 1));
        assert_eq!(sol.witness, vec![q(1, 1), q(-1, 1)]);
        assert!(lp.verify(&sol));
    }

    #[test]
    fn seed_chamber_at_three() {
        // sums over {2}, {3}, {2,3} in coordinates (v1, v2, v3), zero total
        let mut lp = LpProblem::with_unit_box(3);
        for r in [[0, 1, 0], [0, 0, 1], [0, 1, 1]] {
            lp.push_margin(row(&r)).unwrap();
        }
        lp.push_zero(row(&[1, 1, 1])).unwrap();
        let sol = lp_max_margin(&lp).unwrap();
        assert!(sol.is_strictly_feasible());
        assert!(lp.verify(&sol));
        // (-2, 1, 1) scaled into the box reaches margin 1/2
        assert!(sol.margin >= q(1, 2));
    }

    #[test]
    fn bounds_excluding_origin_use_phase_one() {
        let mut lp = LpProblem::with_unit_box(2);
        lp.set_bounds(0, q(1, 2), q(3, 4)).unwrap();
        lp.push_margin(row(&[-1, 0])).unwrap();
        lp.push_margin(row(&[0, 1])).unwrap();
        let sol = lp_max_margin(&lp).unwrap();
        assert_eq!(sol.margin, q(-1, 2));
        assert!(lp.verify(&sol));
    }

    #[test]
    fn infeasible_equalities_are_reported() {
        let mut lp = LpProblem::with_unit_box(1);
        lp.set_bounds(0, q(1, 1), q(2, 1)).unwrap();
        lp.push_zero(row(&[1])).unwrap();
        lp.push_margin(row(&[1])).unwrap();
        assert!(matches!(lp_max_margin(&lp), Err(Error::Infeasible)));
    }

    #[test]
    fn unbounded_margin_without_rows() {
        let lp = LpProblem::<i64>::with_unit_box(2);
        assert!(matches!(lp_max_margin(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn rings_agree_bit_for_bit() {
        let mut lp = LpProblem::with_unit_box(3);
        for r in [[1, 1, 0], [1, -1, 1], [0, 1, 1], [2, -3, 1], [-1, 2, 2]] {
            lp.push_margin(row(&r)).unwrap();
        }
        let small = solve_in::<i64, i64>(&lp).unwrap().unwrap();
        let wide = solve_in::<i128, i64>(&lp).unwrap().unwrap();
        let big = solve_in::<BigInt, i64>(&lp).unwrap().unwrap();
        assert_eq!((small.margin.clone(), small.witness.clone()), (big.margin.clone(), big.witness.clone()));
        assert_eq!(small.duals, big.duals);
        assert_eq!(wide.witness, big.witness);
        assert_eq!(small.pivots, big.pivots);
    }

    #[test]
    fn huge_coefficients_fall_back_to_big_integers() {
        let huge = i64::MAX / 3;
        let mut lp = LpProblem::with_unit_box(2);
        lp.push_margin(row(&[huge, -huge + 1])).unwrap();
        lp.push_margin(row(&[-huge + 7, huge])).unwrap();
        let sol = lp_max_margin(&lp).unwrap();
        assert!(lp.verify(&sol));
        assert_ne!(sol.ring, "i64");
    }

    #[test]
    fn dimension_mismatch() {
        let mut lp = LpProblem::<i64>::with_unit_box(2);
        assert!(lp.push_margin(row(&[1])).is_err());
    }
}
