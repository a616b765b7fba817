//! Derived games: 3SAT hardness instances plus the zero-sum and social
//! welfare transforms.

use std::fmt;

use indexmap::IndexMap;
use num::{One, Zero};

use crate::enumeration::{EquilibriumSearch, EquilibriumWitness, SearchOutcome, ThresholdSearch};
use crate::equilibrium::{Mode, Objective};
use crate::error::{Error, Result};
use crate::game::{EdgeEntry, Game, GameBuilder, Player};
use crate::mpg::PunishmentTable;
use crate::rational::{format_rational, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based.
    pub variable: usize,
    pub positive: bool,
}

impl Literal {
    /// Name of the player representing this literal.
    pub fn player(&self) -> String {
        if self.positive {
            format!("z{}", self.variable)
        } else {
            format!("~z{}", self.variable)
        }
    }

    pub fn negated(&self) -> Literal {
        Literal {
            positive: !self.positive,
            ..*self
        }
    }

    fn holds(&self, assignment: u64) -> bool {
        (assignment >> (self.variable - 1) & 1 == 1) == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.positive { "" } else { "-" };
        write!(f, "{sign}{}", self.variable)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    variables: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(variables: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::Formula("no clauses".into()));
        }
        if let Some(l) = clauses
            .iter()
            .flatten()
            .find(|l| l.variable == 0 || l.variable > variables)
        {
            return Err(Error::Formula(format!(
                "literal {l} outside variables 1..={variables}"
            )));
        }
        Ok(CnfFormula { variables, clauses })
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Tries all assignments; meant for small test formulas.
    pub fn is_satisfiable(&self) -> bool {
        assert!(self.variables < 64, "too many variables to enumerate");
        (0..1u64 << self.variables)
            .any(|a| self.clauses.iter().all(|c| c.iter().any(|l| l.holds(a))))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.variables, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }
}

/// Reads DIMACS CNF. Clauses must have exactly three literals unless `pad`
/// is set, in which case shorter clauses repeat their first literal.
pub fn parse_cnf(text: &str, pad: bool) -> Result<CnfFormula> {
    let syntax = |line: usize, m: String| Error::Syntax(format!("line {line}: {m}"));
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let number = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["p", "cnf", n, m] if header.is_none() => {
                    let n = n.parse().map_err(|_| syntax(number, format!("bad variable count {n:?}")))?;
                    let m = m.parse().map_err(|_| syntax(number, format!("bad clause count {m:?}")))?;
                    header = Some((n, m));
                }
                _ => return Err(syntax(number, format!("bad header {line:?}"))),
            }
            continue;
        }
        if header.is_none() {
            return Err(syntax(number, "clause before the header".into()));
        }
        for token in line.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(number, format!("bad literal {token:?}")))?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(Literal {
                    variable: value.unsigned_abs() as usize,
                    positive: value > 0,
                });
            }
        }
    }
    let (n, m) = header.ok_or_else(|| Error::Syntax("missing \"p cnf\" header".into()))?;
    if !current.is_empty() {
        return Err(Error::Syntax("last clause is not terminated by 0".into()));
    }
    if clauses.len() != m {
        return Err(Error::Formula(format!(
            "header announces {m} clauses, found {}",
            clauses.len()
        )));
    }
    let clauses = clauses
        .into_iter()
        .enumerate()
        .map(|(j, c)| match (c.as_slice(), pad) {
            (&[a, b, c], _) => Ok([a, b, c]),
            (&[a, b], true) => Ok([a, a, b]),
            (&[a], true) => Ok([a, a, a]),
            _ => Err(Error::Formula(format!(
                "clause {} has {} literals, expected 3",
                j + 1,
                c.len()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    CnfFormula::new(n, clauses)
}

pub const DICTATOR: &str = "d";
pub const ABSORBING: &str = "abs";

fn ring_vertex(l: &Literal) -> String {
    format!("w_{}", l.player())
}

/// The hardness game of a formula.
///
/// The dictator walks the chain `d0 … d{n+m}`: first choosing a literal of
/// every variable, then one literal of every clause, then entering a ring in
/// which each step penalises the counter-literal of the vertex passed. Every
/// literal vertex outside the ring may escape to the absorbing vertex `abs`,
/// which pays 1 to every literal player and 0 to the dictator.
pub fn reduce_3sat(f: &CnfFormula) -> Game {
    let n = f.variables();
    let m = f.clauses().len();
    let lit = |i: usize, positive: bool| Literal { variable: i, positive };
    let literals: Vec<Literal> = (1..=n).flat_map(|i| [lit(i, true), lit(i, false)]).collect();
    let chain = |i: usize| format!("d{i}");
    let clause_vertex = |j: usize, k: usize| format!("c{j}_{k}");

    let mut players = vec![DICTATOR.to_string()];
    players.extend(literals.iter().map(Literal::player));
    let mut b = GameBuilder::new().players(players.clone()).initial(chain(0));
    for i in 0..=n + m {
        b = b.vertex(chain(i), DICTATOR);
    }
    for l in &literals {
        b = b.vertex(l.player(), l.player());
    }
    for (j, clause) in f.clauses().iter().enumerate() {
        for (k, l) in clause.iter().enumerate() {
            b = b.vertex(clause_vertex(j + 1, k + 1), l.player());
        }
    }
    b = b.vertex(ABSORBING, DICTATOR);
    for l in &literals {
        b = b.vertex(ring_vertex(l), l.player());
    }

    for i in 1..=n {
        for positive in [true, false] {
            let l = lit(i, positive);
            b = b.edge(chain(i - 1), l.player(), &[]);
            b = b.edge(l.player(), chain(i), &[]);
            b = b.edge(l.player(), ABSORBING, &[]);
        }
    }
    for j in 1..=m {
        for k in 1..=3 {
            b = b.edge(chain(n + j - 1), clause_vertex(j, k), &[]);
            b = b.edge(clause_vertex(j, k), chain(n + j), &[]);
            b = b.edge(clause_vertex(j, k), ABSORBING, &[]);
        }
    }
    for positive in [true, false] {
        b = b.edge(chain(n + m), ring_vertex(&lit(1, positive)), &[]);
    }
    let absorbing: Vec<(&str, Rational)> = players
        .iter()
        .map(|p| (p.as_str(), if p == DICTATOR { int(0) } else { int(1) }))
        .collect();
    b = b.edge(ABSORBING, ABSORBING, &absorbing);
    for l in &literals {
        let next = l.variable % n + 1;
        let loser = l.negated().player();
        let rewards: Vec<(&str, Rational)> = players
            .iter()
            .map(|p| (p.as_str(), if *p == loser { int(0) } else { int(1) }))
            .collect();
        for positive in [true, false] {
            b = b.edge(ring_vertex(l), ring_vertex(&lit(next, positive)), &rewards);
        }
    }
    b.build().expect("reduction output is a valid game")
}

fn fresh_name(g: &Game, base: &str) -> String {
    (0..)
        .map(|i| if i == 0 { base.to_string() } else { format!("{base}{i}") })
        .find(|name| g.player_index(name).is_none())
        .expect("some name is free")
}

/// Maps rewards 0 to −1 and adds vertex-less players that balance every
/// edge to zero.
pub fn make_zero_sum(g: &Game) -> Result<Game> {
    for e in 0..g.edge_count() {
        for p in g.players() {
            let r = g.reward(e, p);
            if !r.is_zero() && !r.is_one() {
                return Err(Error::Precondition(format!(
                    "reward {} of {} is not 0 or 1",
                    format_rational(r),
                    g.player_name(p)
                )));
            }
        }
    }
    let mapped = |r: &Rational| if r.is_zero() { -1i64 } else { 1 };
    let sums: Vec<i64> = (0..g.edge_count())
        .map(|e| g.players().map(|p| mapped(g.reward(e, p))).sum())
        .collect();
    let widest = sums.iter().map(|s| s.abs()).max().unwrap_or(0);
    // Every sum has the parity of the player count.
    let parity = g.player_count() as i64 % 2;
    let k = if widest % 2 == parity { widest } else { widest + 1 };

    let mut doc = g.to_document();
    let mut names = Vec::new();
    for i in 0..k {
        let base = fresh_name(g, &format!("balance{}", i + 1));
        names.push(base.clone());
        doc.players.push(base);
    }
    for (e, edge) in doc.edges.iter_mut().enumerate() {
        let mut rewards = IndexMap::new();
        for p in g.players() {
            rewards.insert(g.player_name(p).to_string(), mapped(g.reward(e, p)).to_string());
        }
        let winners = (k - sums[e]) / 2;
        for (i, name) in names.iter().enumerate() {
            let r = if (i as i64) < winners { "1" } else { "-1" };
            rewards.insert(name.clone(), r.to_string());
        }
        *edge = EdgeEntry {
            rewards,
            ..edge.clone()
        };
    }
    Game::from_document(&doc)
}

pub const SOCIETY: &str = "society";

/// Adds the vertex-less player [`SOCIETY`] whose reward on each edge is the
/// weighted sum of everyone's reward.
pub fn add_social_player(g: &Game, weights: &[Rational]) -> Result<Game> {
    if g.player_index(SOCIETY).is_some() {
        return Err(Error::InvalidGame(format!("player {SOCIETY:?} already exists")));
    }
    if weights.len() != g.player_count() {
        return Err(Error::Precondition(format!(
            "{} weights for {} players",
            weights.len(),
            g.player_count()
        )));
    }
    let mut doc = g.to_document();
    doc.players.push(SOCIETY.to_string());
    for (e, edge) in doc.edges.iter_mut().enumerate() {
        let total: Rational = g.players().map(|p| &weights[p] * g.reward(e, p)).sum();
        if !total.is_zero() {
            edge.rewards.insert(SOCIETY.to_string(), format_rational(&total));
        }
    }
    Game::from_document(&doc)
}

pub fn unit_weights(g: &Game) -> Vec<Rational> {
    vec![Rational::one(); g.player_count()]
}

/// Optimises the objectives in order, each stage keeping the earlier optima
/// as lower bounds.
pub fn lexicographic_optimize(g: &Game, mode: Mode, objectives: &[Player]) -> Result<Option<EquilibriumWitness>> {
    let punish = PunishmentTable::compute(g);
    Ok(lexicographic_search(g, mode, &punish, objectives, &ThresholdSearch)?.witness)
}

/// Regions explored are summed over the stages.
pub fn lexicographic_search(
    g: &Game,
    mode: Mode,
    punish: &PunishmentTable,
    objectives: &[Player],
    search: &dyn EquilibriumSearch,
) -> Result<SearchOutcome> {
    if objectives.is_empty() {
        return Err(Error::Precondition("no objectives".into()));
    }
    if let Some(&p) = objectives.iter().find(|&&p| p >= g.player_count()) {
        return Err(Error::UnknownPlayer(format!("#{p}")));
    }
    let mut floors = Vec::new();
    let mut outcome = SearchOutcome {
        witness: None,
        regions_explored: 0,
    };
    for &p in objectives {
        let objective = Objective {
            player: p,
            floors: floors.clone(),
        };
        let stage = search.search(g, mode, punish, &objective)?;
        outcome.regions_explored += stage.regions_explored;
        let Some(w) = stage.witness else {
            outcome.witness = None;
            return Ok(outcome);
        };
        floors.push((p, w.optimum().clone()));
        outcome.witness = Some(w);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{exhaustive_optimize, optimize, search_exhaustive, DEFAULT_VERTEX_BOUND};
    use crate::game::tests::example;
    use crate::game::validate;
    use num::Signed;

    pub(crate) const THREE_CLAUSES: &str = "c the three-clause example\np cnf 3 3\n1 -2 -3 0\n-1 2 -3 0\n-1 -2 -3 0\n";

    fn political_optimum(g: &Game) -> Rational {
        let d = g.player(DICTATOR).unwrap();
        optimize(g, Mode::political(d)).unwrap().unwrap().optimum().clone()
    }

    #[test]
    fn parses_the_example_formula() {
        let f = parse_cnf(THREE_CLAUSES, false).unwrap();
        assert_eq!(f.variables(), 3);
        assert_eq!(f.clauses().len(), 3);
        assert!(f.is_satisfiable());
        assert_eq!(parse_cnf(&f.to_dimacs(), false).unwrap(), f);
    }

    #[test]
    fn clause_arity() {
        assert!(parse_cnf("p cnf 1 1\n1 1 1 0\n", false).is_ok());
        let err = parse_cnf("p cnf 2 1\n1 2 0\n", false).unwrap_err();
        assert!(err.to_string().contains("2 literals"));
        let padded = parse_cnf("p cnf 2 1\n1 2 0\n", true).unwrap();
        assert_eq!(padded.to_dimacs(), "p cnf 2 1\n1 1 2 0\n");
        assert!(parse_cnf("p cnf 2 1\n1 2 3 0\n", false).is_err());
        assert!(parse_cnf("1 2 3 0\n", false).is_err());
        assert!(parse_cnf("p cnf 2 1\n1 x 2 0\n", false).is_err());
    }

    #[test]
    fn reduction_sizes() {
        let g = reduce_3sat(&parse_cnf(THREE_CLAUSES, false).unwrap());
        assert_eq!((g.player_count(), g.vertex_count()), (7, 29));
        assert!(validate(&g.to_document()).is_empty());
        let single = reduce_3sat(&parse_cnf("p cnf 1 1\n1 1 1 0\n", false).unwrap());
        assert_eq!((single.player_count(), single.vertex_count()), (3, 11));
    }

    #[test]
    fn satisfiable_and_unsatisfiable_instances() {
        let sat = reduce_3sat(&parse_cnf(THREE_CLAUSES, false).unwrap());
        assert_eq!(political_optimum(&sat), int(1));
        let unsat = reduce_3sat(&parse_cnf("p cnf 1 2\n1 0\n-1 0\n", true).unwrap());
        assert_eq!(political_optimum(&unsat), int(0));
        assert_eq!(political_optimum(&make_zero_sum(&sat).unwrap()), int(1));
        assert_eq!(political_optimum(&make_zero_sum(&unsat).unwrap()), int(-1));
    }

    #[test]
    fn zero_sum_balances_every_edge() {
        let g = make_zero_sum(&reduce_3sat(&parse_cnf(THREE_CLAUSES, false).unwrap())).unwrap();
        for e in 0..g.edge_count() {
            let total: Rational = g.players().map(|p| g.reward(e, p)).sum();
            assert!(total.is_zero());
            assert!(g.players().all(|p| g.reward(e, p).abs() == int(1)));
        }
        assert!(make_zero_sum(&example()).is_err());
    }

    #[test]
    fn society_sums_the_rewards() {
        let g = example();
        let s = add_social_player(&g, &unit_weights(&g)).unwrap();
        let society = s.player(SOCIETY).unwrap();
        for name in ["3", "4", "5"] {
            let v = s.vertex(name).unwrap();
            assert!(s.reward(s.edge_index(v, v).unwrap(), society).is_zero());
        }
        assert!(!s.owns_any(society));
        assert!(add_social_player(&s, &unit_weights(&s)).is_err());

        let zero = add_social_player(&g, &[int(0), int(0), int(0)]).unwrap();
        assert!(zero.rewards_of(society).iter().all(Zero::is_zero));
        let mirror = add_social_player(&g, &[int(0), int(1), int(0)]).unwrap();
        assert_eq!(mirror.rewards_of(society), g.rewards_of(g.player("dictator").unwrap()));

        let mut doc = s.to_document();
        doc.players.pop();
        for e in &mut doc.edges {
            e.rewards.shift_remove(SOCIETY);
        }
        assert_eq!(Game::from_document(&doc).unwrap(), g);
    }

    #[test]
    fn lexicographic_stages() {
        let g = add_social_player(&example(), &unit_weights(&example())).unwrap();
        let d = g.player("dictator").unwrap();
        let society = g.player(SOCIETY).unwrap();
        let mode = Mode::political(d);
        let single = lexicographic_optimize(&g, mode, &[d]).unwrap().unwrap();
        assert_eq!(single.optimum(), optimize(&g, mode).unwrap().unwrap().optimum());

        let w = lexicographic_optimize(&g, mode, &[d, society]).unwrap().unwrap();
        assert_eq!(w.rewards()[d], int(1));
        assert_eq!(w.rewards()[society], int(0));

        let punish = PunishmentTable::compute(&g);
        let oracle = search_exhaustive(
            &g,
            mode,
            &punish,
            &Objective {
                player: society,
                floors: vec![(d, int(1))],
            },
            DEFAULT_VERTEX_BOUND,
        )
        .unwrap()
        .witness
        .unwrap();
        assert_eq!(oracle.optimum(), w.optimum());

        let reversed = lexicographic_optimize(&g, mode, &[society, d]).unwrap().unwrap();
        assert_eq!(reversed.rewards()[society], int(0));
        assert_eq!(reversed.rewards()[d], int(1));
        assert!(exhaustive_optimize(&g, mode).unwrap().is_some());
    }
}
