//! One-shot two-player games in which one player, the dictator, may mix.
//!
//! A political equilibrium only asks that the opponent's assigned action be a
//! best response to the dictator's mixture. Per opponent column this is a
//! linear program over the dictator's mixtures.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::rational::{format_rational, parse_rational, Rational};

/// Payoffs indexed `[dictator action][opponent action]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bimatrix {
    pub dictator_actions: Vec<String>,
    pub opponent_actions: Vec<String>,
    pub dictator_payoff: Vec<Vec<Rational>>,
    pub opponent_payoff: Vec<Vec<Rational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictatorSide {
    Row,
    Col,
}

/// The on-disk matrix game: `A` pays the row player, `B` the column player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    pub dictator: DictatorSide,
}

impl Bimatrix {
    pub fn new(
        dictator_actions: Vec<String>,
        opponent_actions: Vec<String>,
        dictator_payoff: Vec<Vec<Rational>>,
        opponent_payoff: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let (a, b) = (dictator_actions.len(), opponent_actions.len());
        if a == 0 || b == 0 {
            return Err(Error::InvalidGame("a matrix game needs actions on both sides".into()));
        }
        for m in [&dictator_payoff, &opponent_payoff] {
            if m.len() != a || m.iter().any(|row| row.len() != b) {
                return Err(Error::InvalidGame(format!("payoff matrices must be {a}×{b}")));
            }
        }
        Ok(Bimatrix {
            dictator_actions,
            opponent_actions,
            dictator_payoff,
            opponent_payoff,
        })
    }

    pub fn from_document(doc: &MatrixDocument) -> Result<Self> {
        let parse = |m: &Vec<Vec<String>>| -> Result<Vec<Vec<Rational>>> {
            m.iter()
                .map(|row| row.iter().map(|x| parse_rational(x)).collect())
                .collect()
        };
        let (a, b) = (parse(&doc.a)?, parse(&doc.b)?);
        let (r, c) = (doc.rows.len(), doc.cols.len());
        for m in [&a, &b] {
            if m.len() != r || m.iter().any(|row| row.len() != c) {
                return Err(Error::InvalidGame(format!("payoff matrices must be {r}×{c}")));
            }
        }
        match doc.dictator {
            DictatorSide::Row => Bimatrix::new(doc.rows.clone(), doc.cols.clone(), a, b),
            DictatorSide::Col => Bimatrix::new(doc.cols.clone(), doc.rows.clone(), transpose(&b), transpose(&a)),
        }
    }

    pub fn to_document(&self) -> MatrixDocument {
        let text = |m: &Vec<Vec<Rational>>| m.iter().map(|row| row.iter().map(format_rational).collect()).collect();
        MatrixDocument {
            rows: self.dictator_actions.clone(),
            cols: self.opponent_actions.clone(),
            a: text(&self.dictator_payoff),
            b: text(&self.opponent_payoff),
            dictator: DictatorSide::Row,
        }
    }

    fn shape(&self) -> (usize, usize) {
        (self.dictator_actions.len(), self.opponent_actions.len())
    }

    /// Expected payoffs `(x·A·y, x·B·y)`.
    pub fn payoffs(&self, x: &[Rational], y: &[Rational]) -> (Rational, Rational) {
        let value = |m: &Vec<Vec<Rational>>| -> Rational {
            x.iter()
                .enumerate()
                .flat_map(|(i, xi)| y.iter().enumerate().map(move |(j, yj)| xi * yj * &m[i][j]))
                .sum()
        };
        (value(&self.dictator_payoff), value(&self.opponent_payoff))
    }

    /// Opponent payoff of each column against `x`.
    fn column_values(&self, x: &[Rational]) -> Vec<Rational> {
        let (a, b) = self.shape();
        (0..b)
            .map(|j| (0..a).map(|i| &x[i] * &self.opponent_payoff[i][j]).sum())
            .collect()
    }

    /// Dictator payoff of each row against `y`.
    fn row_values(&self, y: &[Rational]) -> Vec<Rational> {
        let (a, b) = self.shape();
        (0..a)
            .map(|i| (0..b).map(|j| &y[j] * &self.dictator_payoff[i][j]).sum())
            .collect()
    }
}

fn transpose(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<Bimatrix> {
    let doc: MatrixDocument = serde_json::from_str(text)
        .map_err(|e| Error::Syntax(format!("{e} at line {} column {}", e.line(), e.column())))?;
    Bimatrix::from_document(&doc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedProfile {
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
    pub dictator_payoff: Rational,
    pub opponent_payoff: Rational,
}

impl MixedProfile {
    fn new(m: &Bimatrix, x: Vec<Rational>, y: Vec<Rational>) -> Self {
        let (dictator_payoff, opponent_payoff) = m.payoffs(&x, &y);
        MixedProfile {
            x,
            y,
            dictator_payoff,
            opponent_payoff,
        }
    }

    fn check_distributions(&self, m: &Bimatrix) -> bool {
        let (a, b) = m.shape();
        let ok = |d: &[Rational], k: usize| {
            d.len() == k && d.iter().all(|p| !p.is_negative()) && d.iter().sum::<Rational>() == Rational::one()
        };
        ok(&self.x, a) && ok(&self.y, b) && m.payoffs(&self.x, &self.y) == (self.dictator_payoff.clone(), self.opponent_payoff.clone())
    }

    /// Every opponent action played is a best response to `x`.
    pub fn is_political(&self, m: &Bimatrix) -> bool {
        let cols = m.column_values(&self.x);
        let best = cols.iter().max().expect("nonempty");
        self.check_distributions(m) && (0..cols.len()).all(|j| self.y[j].is_zero() || cols[j] == *best)
    }

    /// Both sides play only best responses.
    pub fn is_nash(&self, m: &Bimatrix) -> bool {
        let rows = m.row_values(&self.y);
        let best = rows.iter().max().expect("nonempty");
        self.is_political(m) && (0..rows.len()).all(|i| self.x[i].is_zero() || rows[i] == *best)
    }
}

/// Maximises `c·x` over mixtures `x` against which column `j` is a best
/// response, optionally holding `floor` on the dictator payoff.
fn column_program(m: &Bimatrix, j: usize, c: &[Rational], floor: Option<&Rational>) -> LpOutcome {
    let (a, b) = m.shape();
    let mut lp = LinearProgram::new();
    for i in 0..a {
        lp.add_variable(m.dictator_actions[i].clone());
        lp.add_constraint(vec![(i, Rational::one())], Relation::Ge, Rational::zero());
    }
    lp.add_constraint((0..a).map(|i| (i, Rational::one())).collect(), Relation::Eq, Rational::one());
    for k in (0..b).filter(|&k| k != j) {
        let terms = (0..a)
            .map(|i| (i, &m.opponent_payoff[i][j] - &m.opponent_payoff[i][k]))
            .collect();
        lp.add_constraint(terms, Relation::Ge, Rational::zero());
    }
    if let Some(floor) = floor {
        let terms = (0..a).map(|i| (i, m.dictator_payoff[i][j].clone())).collect();
        lp.add_constraint(terms, Relation::Ge, floor.clone());
    }
    lp.maximize(c.iter().cloned().enumerate().collect());
    lp_solve(&lp)
}

/// The dictator's best mixture with a pure best-responding opponent. Among
/// mixtures with the same dictator payoff the opponent's payoff is maximised.
pub fn political_optimum(m: &Bimatrix) -> MixedProfile {
    let (a, b) = m.shape();
    let mut best: Option<MixedProfile> = None;
    for j in 0..b {
        let own: Vec<Rational> = (0..a).map(|i| m.dictator_payoff[i][j].clone()).collect();
        let LpOutcome::Optimal { objective, .. } = column_program(m, j, &own, None) else {
            continue;
        };
        let theirs: Vec<Rational> = (0..a).map(|i| m.opponent_payoff[i][j].clone()).collect();
        let LpOutcome::Optimal { values, .. } = column_program(m, j, &theirs, Some(&objective)) else {
            unreachable!("the first stage optimum is feasible");
        };
        let mut y = vec![Rational::zero(); b];
        y[j] = Rational::one();
        let candidate = MixedProfile::new(m, values, y);
        let better = best.as_ref().is_none_or(|p| {
            (&candidate.dictator_payoff, &candidate.opponent_payoff) > (&p.dictator_payoff, &p.opponent_payoff)
        });
        if better {
            best = Some(candidate);
        }
    }
    best.expect("some column is a best response to some mixture")
}

pub const DEFAULT_SUPPORT_LIMIT: u128 = 1 << 20;

/// Solves a square system exactly; `None` when it is singular.
fn solve_square(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = rows[col][col].clone();
        for k in col..n {
            rows[col][k] = &rows[col][k] / &p;
        }
        rhs[col] = &rhs[col] / &p;
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for k in col..n {
                    let delta = &f * &rows[col][k];
                    rows[r][k] -= delta;
                }
                let delta = &f * &rhs[col];
                rhs[r] -= delta;
            }
        }
    }
    Some(rhs)
}

/// Vertices of `{(x, u) : x ≥ 0, Σx = 1, (x·M)_k ≤ u}` where `payoff[i][k]`
/// is what the other side gets; returns the mixtures `x`.
fn envelope_vertices(payoff: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let a = payoff.len();
    let b = payoff[0].len();
    // Constraint c < a is x_c ≥ 0, otherwise column c − a.
    let total = a + b;
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for mask in 0u64..1 << total {
        if mask.count_ones() as usize != a {
            continue;
        }
        let mut rows = Vec::with_capacity(a + 1);
        let mut rhs = Vec::with_capacity(a + 1);
        for c in (0..total).filter(|c| mask >> c & 1 == 1) {
            let mut row = vec![Rational::zero(); a + 1];
            if c < a {
                row[c] = Rational::one();
            } else {
                for i in 0..a {
                    row[i] = payoff[i][c - a].clone();
                }
                row[a] = -Rational::one();
            }
            rows.push(row);
            rhs.push(Rational::zero());
        }
        let mut sum = vec![Rational::one(); a];
        sum.push(Rational::zero());
        rows.push(sum);
        rhs.push(Rational::one());
        let Some(sol) = solve_square(rows, rhs) else {
            continue;
        };
        let (x, u) = sol.split_at(a);
        let feasible = x.iter().all(|p| !p.is_negative())
            && (0..b).all(|k| (0..a).map(|i| &x[i] * &payoff[i][k]).sum::<Rational>() <= u[0]);
        if feasible && !out.iter().any(|v| v.as_slice() == x) {
            out.push(x.to_vec());
        }
    }
    out
}

/// All extreme Nash equilibria, by pairing vertices of the two best-response
/// polytopes.
pub fn nash_equilibria(m: &Bimatrix) -> Result<Vec<MixedProfile>> {
    nash_equilibria_with_limit(m, DEFAULT_SUPPORT_LIMIT)
}

pub fn nash_equilibria_with_limit(m: &Bimatrix, limit: u128) -> Result<Vec<MixedProfile>> {
    let (a, b) = m.shape();
    let size = 1u128.checked_shl((a + b) as u32).unwrap_or(u128::MAX);
    if size > limit || a + b >= 64 {
        return Err(Error::BoundExceeded {
            what: "support pairs",
            size,
            bound: limit,
        });
    }
    let xs = envelope_vertices(&m.opponent_payoff);
    let ys = envelope_vertices(&transpose(&m.dictator_payoff));
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            let profile = MixedProfile::new(m, x.clone(), y.clone());
            if profile.is_nash(m) {
                out.push(profile);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    pub(crate) const PRISONERS_LEFT: &str = include_str!("../fixtures/prisoners_left.json");
    pub(crate) const PRISONERS_RIGHT: &str = include_str!("../fixtures/prisoners_right.json");

    fn pure(k: usize, n: usize) -> Vec<Rational> {
        (0..n).map(|i| if i == k { int(1) } else { int(0) }).collect()
    }

    #[test]
    fn left_matrix() {
        let m = parse_matrix(PRISONERS_LEFT).unwrap();
        let p = political_optimum(&m);
        assert_eq!(p.x, pure(2, 3));
        assert_eq!(p.y, pure(0, 2));
        assert_eq!((p.dictator_payoff.clone(), p.opponent_payoff.clone()), (int(-5), int(-8)));
        assert!(p.is_political(&m) && !p.is_nash(&m));
        let nash = nash_equilibria(&m).unwrap();
        assert_eq!(nash.len(), 1);
        assert_eq!((nash[0].x.clone(), nash[0].y.clone()), (pure(1, 3), pure(1, 2)));
        assert_eq!(nash[0].dictator_payoff, int(-8));
    }

    #[test]
    fn right_matrix() {
        let m = parse_matrix(PRISONERS_RIGHT).unwrap();
        let p = political_optimum(&m);
        assert_eq!(p.x, vec![ratio(3, 4), int(0), ratio(1, 4)]);
        assert_eq!(p.y, pure(0, 2));
        assert_eq!((p.dictator_payoff.clone(), p.opponent_payoff.clone()), (int(-2), int(-2)));
        let nash = nash_equilibria(&m).unwrap();
        assert_eq!(nash.len(), 1);
        assert_eq!((nash[0].opponent_payoff.clone(), nash[0].y.clone()), (int(-8), pure(1, 2)));
    }

    #[test]
    fn single_cell() {
        let m = Bimatrix::new(vec!["a".into()], vec!["b".into()], vec![vec![int(3)]], vec![vec![int(-7)]]).unwrap();
        let p = political_optimum(&m);
        assert_eq!((p.dictator_payoff, p.opponent_payoff), (int(3), int(-7)));
        assert_eq!(nash_equilibria(&m).unwrap().len(), 1);
    }

    #[test]
    fn matching_pennies() {
        let labels = || vec!["H".to_string(), "T".to_string()];
        let a = vec![vec![int(1), int(-1)], vec![int(-1), int(1)]];
        let b = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let m = Bimatrix::new(labels(), labels(), a, b).unwrap();
        let nash = nash_equilibria(&m).unwrap();
        assert_eq!(nash.len(), 1);
        assert_eq!(nash[0].x, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(nash[0].y, vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn column_dictator_is_transposed() {
        let mut doc: MatrixDocument = serde_json::from_str(PRISONERS_LEFT).unwrap();
        let row = Bimatrix::from_document(&doc).unwrap();
        std::mem::swap(&mut doc.rows, &mut doc.cols);
        let (a, b) = (doc.a.clone(), doc.b.clone());
        let t = |m: &Vec<Vec<String>>| (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect();
        doc.a = t(&b);
        doc.b = t(&a);
        doc.dictator = DictatorSide::Col;
        assert_eq!(Bimatrix::from_document(&doc).unwrap(), row);
        assert_eq!(Bimatrix::from_document(&row.to_document()).unwrap(), row);
    }

    #[test]
    fn support_limit() {
        let m = parse_matrix(PRISONERS_LEFT).unwrap();
        assert!(nash_equilibria_with_limit(&m, 8).is_err());
    }
}
