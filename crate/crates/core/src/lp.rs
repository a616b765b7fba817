//! Exact linear programming over the rationals.
//!
//! A dense two-phase primal simplex with Bland's rule. Single-variable rows
//! are folded into bounds before the tableau is built, so the fixed-to-zero
//! and nonnegativity rows that dominate the ratio programs cost nothing.

use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    fn lhs(&self, values: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| a * &values[*j]).sum()
    }

    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// Maximise a linear objective subject to `=` and `≥` rows. Variables are
/// free unless a row bounds them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(usize, Rational)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        values: Vec<Rational>,
        objective: Rational,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(name.into());
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            terms,
            relation,
            rhs,
        });
    }

    /// `Σ terms ≤ rhs`, stored as `Σ -terms ≥ -rhs`.
    pub fn add_le(&mut self, terms: Vec<(usize, Rational)>, rhs: Rational) {
        let negated = terms.into_iter().map(|(j, a)| (j, -a)).collect();
        self.add_constraint(negated, Relation::Ge, -rhs);
    }

    pub fn maximize(&mut self, terms: Vec<(usize, Rational)>) {
        self.objective = terms;
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &values[*j]).sum()
    }

    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        values.len() == self.variables.len()
            && self.constraints.iter().all(|c| c.is_satisfied(values))
    }

    /// Variables that appear in no constraint.
    pub fn unconstrained_variables(&self) -> Vec<usize> {
        let mut used = vec![false; self.variables.len()];
        for c in &self.constraints {
            for (j, _) in &c.terms {
                used[*j] = true;
            }
        }
        (0..used.len()).filter(|&j| !used[j]).collect()
    }
}

fn combine(terms: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
    for (j, a) in terms {
        *merged.entry(*j).or_insert_with(Rational::zero) += a;
    }
    merged.into_iter().filter(|(_, a)| !a.is_zero()).collect()
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Debug)]
enum Column {
    Fixed(Rational),
    Shifted { lower: Rational, col: usize },
    Split { pos: usize, neg: usize },
}

pub fn lp_solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.variables.len();
    let mut fixed: Vec<Option<Rational>> = vec![None; n];
    let mut lower: Vec<Option<Rational>> = vec![None; n];
    let mut rows: Vec<(Vec<(usize, Rational)>, Relation, Rational)> = Vec::new();

    for c in &lp.constraints {
        let terms = combine(&c.terms);
        match terms.as_slice() {
            [] => {
                let ok = match c.relation {
                    Relation::Eq => c.rhs.is_zero(),
                    Relation::Ge => !c.rhs.is_positive(),
                };
                if !ok {
                    return LpOutcome::Infeasible;
                }
            }
            [(j, a)] if c.relation == Relation::Eq => {
                let value = &c.rhs / a;
                match &fixed[*j] {
                    Some(f) if *f != value => return LpOutcome::Infeasible,
                    _ => fixed[*j] = Some(value),
                }
            }
            [(j, a)] if a.is_positive() => {
                let bound = &c.rhs / a;
                if lower[*j].as_ref().is_none_or(|l| bound > *l) {
                    lower[*j] = Some(bound);
                }
            }
            _ => rows.push((terms, c.relation, c.rhs.clone())),
        }
    }

    let mut columns = Vec::with_capacity(n);
    let mut width = 0;
    for j in 0..n {
        let column = match (&fixed[j], &lower[j]) {
            (Some(f), Some(l)) if f < l => return LpOutcome::Infeasible,
            (Some(f), _) => Column::Fixed(f.clone()),
            (None, Some(l)) => {
                width += 1;
                Column::Shifted {
                    lower: l.clone(),
                    col: width - 1,
                }
            }
            (None, None) => {
                width += 2;
                Column::Split {
                    pos: width - 2,
                    neg: width - 1,
                }
            }
        };
        columns.push(column);
    }

    // Rewrite rows over the tableau columns.
    let mut dense_rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for (terms, relation, rhs) in rows {
        let mut coeffs = vec![Rational::zero(); width];
        let mut rhs = rhs;
        for (j, a) in &terms {
            match &columns[*j] {
                Column::Fixed(f) => rhs -= a * f,
                Column::Shifted { lower, col } => {
                    rhs -= a * lower;
                    coeffs[*col] += a;
                }
                Column::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        if coeffs.iter().all(Zero::is_zero) {
            let ok = match relation {
                Relation::Eq => rhs.is_zero(),
                Relation::Ge => !rhs.is_positive(),
            };
            if !ok {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        dense_rows.push((coeffs, relation, rhs));
    }

    let mut objective = vec![Rational::zero(); width];
    let mut objective_offset = Rational::zero();
    for (j, c) in combine(&lp.objective) {
        match &columns[j] {
            Column::Fixed(f) => objective_offset += &c * f,
            Column::Shifted { lower, col } => {
                objective_offset += &c * lower;
                objective[*col] += c;
            }
            Column::Split { pos, neg } => {
                objective[*pos] += &c;
                objective[*neg] -= c;
            }
        }
    }

    let solution = match Tableau::solve(width, dense_rows, &objective) {
        Phase::Infeasible => return LpOutcome::Infeasible,
        Phase::Unbounded => return LpOutcome::Unbounded,
        Phase::Optimal(x) => x,
    };

    let values: Vec<Rational> = columns
        .iter()
        .map(|c| match c {
            Column::Fixed(f) => f.clone(),
            Column::Shifted { lower, col } => lower + &solution[*col],
            Column::Split { pos, neg } => &solution[*pos] - &solution[*neg],
        })
        .collect();
    let objective = lp.objective_value(&values);
    debug_assert!(lp.is_satisfied(&values));
    debug_assert_eq!(
        objective,
        objective_offset + objective_value(&objective_cols(&lp.objective, &columns, width), &solution)
    );
    LpOutcome::Optimal { values, objective }
}

fn objective_cols(obj: &[(usize, Rational)], columns: &[Column], width: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); width];
    for (j, c) in combine(obj) {
        match &columns[j] {
            Column::Fixed(_) => {}
            Column::Shifted { col, .. } => out[*col] += c,
            Column::Split { pos, neg } => {
                out[*pos] += &c;
                out[*neg] -= c;
            }
        }
    }
    out
}

fn objective_value(c: &[Rational], x: &[Rational]) -> Rational {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

enum Phase {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

/// Standard-form tableau `A x = b`, `x ≥ 0`, `b ≥ 0`.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    /// Maximises `objective · x` over `rows` with nonnegative `x`.
    fn solve(width: usize, rows: Vec<(Vec<Rational>, Relation, Rational)>, objective: &[Rational]) -> Phase {
        let surplus: usize = rows.iter().filter(|r| r.1 == Relation::Ge).count();
        let m = rows.len();
        let structural = width + surplus;
        let total = structural + m;
        let mut tableau = Tableau {
            rows: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
            basis: Vec::with_capacity(m),
        };
        let mut next_surplus = width;
        for (i, (coeffs, relation, rhs)) in rows.into_iter().enumerate() {
            let mut row = coeffs;
            row.resize(total, Rational::zero());
            if relation == Relation::Ge {
                row[next_surplus] = -Rational::from_integer(1.into());
                next_surplus += 1;
            }
            let mut rhs = rhs;
            if rhs.is_negative() {
                for a in row.iter_mut() {
                    *a = -a.clone();
                }
                rhs = -rhs;
            }
            row[structural + i] = Rational::from_integer(1.into());
            tableau.rows.push(row);
            tableau.rhs.push(rhs);
            tableau.basis.push(structural + i);
        }

        // Phase I: maximise -Σ artificials.
        let mut phase_one = vec![Rational::zero(); total];
        for a in phase_one.iter_mut().skip(structural) {
            *a = -Rational::from_integer(1.into());
        }
        match tableau.run(&phase_one, total) {
            Some(()) => {}
            None => unreachable!("phase one is bounded"),
        }
        let infeasibility: Rational = tableau
            .basis
            .iter()
            .zip(&tableau.rhs)
            .filter(|(b, _)| **b >= structural)
            .map(|(_, r)| r.clone())
            .sum();
        if infeasibility.is_positive() {
            return Phase::Infeasible;
        }

        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tableau.rows.len() {
            if tableau.basis[i] >= structural {
                match (0..structural).find(|&j| !tableau.rows[i][j].is_zero()) {
                    Some(j) => tableau.pivot(i, j),
                    None => {
                        tableau.rows.remove(i);
                        tableau.rhs.remove(i);
                        tableau.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in tableau.rows.iter_mut() {
            row.truncate(structural);
        }

        let mut phase_two = objective.to_vec();
        phase_two.resize(structural, Rational::zero());
        if tableau.run(&phase_two, structural).is_none() {
            return Phase::Unbounded;
        }
        let mut x = vec![Rational::zero(); structural];
        for (b, r) in tableau.basis.iter().zip(&tableau.rhs) {
            x[*b] = r.clone();
        }
        x.truncate(width);
        Phase::Optimal(x)
    }

    /// Primal simplex with Bland's rule; `None` when unbounded.
    fn run(&mut self, cost: &[Rational], columns: usize) -> Option<()> {
        loop {
            let entering = (0..columns).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced: Rational = &cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(b, row)| &cost[*b] * &row[j])
                        .sum::<Rational>();
                reduced.is_positive()
            });
            let Some(j) = entering else {
                return Some(());
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &leaving {
                        None => true,
                        Some((k, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let (i, _) = leaving?;
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pivot = self.rows[r][c].clone();
        for a in self.rows[r].iter_mut() {
            *a /= &pivot;
        }
        self.rhs[r] /= &pivot;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for (a, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
    }
}
