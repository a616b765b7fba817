//! The ratio linear program of a region `(Q, S)`.
//!
//! A well-behaved play that visits exactly `Q` and stays in `S` forever is
//! summarised by limit ratios `p_v` and `p_e`. Part I of the program makes
//! the ratios a circulation of total mass one inside `S`; Part II demands
//! that every constrained player gets at least her punishment threshold.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::game::{is_strongly_connected, reachable, EdgeId, Game, Player, Vertex, VertexSet};
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::mpg::PunishmentTable;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Nash,
    Political,
}

/// Which vertices of `Q` set a player's threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Only the vertices she owns.
    #[default]
    OwnerRestricted,
    /// Every vertex of `Q`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub kind: Kind,
    pub beneficiary: Player,
    pub variant: Variant,
}

impl Mode {
    pub fn nash(beneficiary: Player) -> Self {
        Mode {
            kind: Kind::Nash,
            beneficiary,
            variant: Variant::default(),
        }
    }

    pub fn political(beneficiary: Player) -> Self {
        Mode {
            kind: Kind::Political,
            beneficiary,
            variant: Variant::default(),
        }
    }

    pub fn with_variant(self, variant: Variant) -> Self {
        Mode { variant, ..self }
    }

    /// Players whose incentives must be respected.
    pub fn is_constrained(&self, p: Player) -> bool {
        self.kind == Kind::Nash || p != self.beneficiary
    }

    pub fn check(&self, g: &Game) -> Result<()> {
        if self.beneficiary >= g.player_count() {
            return Err(Error::UnknownPlayer(format!("#{}", self.beneficiary)));
        }
        Ok(())
    }
}

/// What the program maximises, and lower bounds from earlier optimisation
/// stages.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub player: Player,
    pub floors: Vec<(Player, Rational)>,
}

impl Objective {
    pub fn of(player: Player) -> Self {
        Objective {
            player,
            floors: Vec::new(),
        }
    }
}

pub fn vertex_variable(v: Vertex) -> usize {
    v
}

pub fn edge_variable(g: &Game, e: EdgeId) -> usize {
    g.vertex_count() + e
}

fn check_region(g: &Game, q: &VertexSet, s: &VertexSet) -> Result<()> {
    if let Some(v) = q.iter().chain(s.iter()).find(|&v| v >= g.vertex_count()) {
        return Err(Error::Precondition(format!("vertex index {v} out of range")));
    }
    if !s.is_subset(q) {
        return Err(Error::Precondition("S is not a subset of Q".into()));
    }
    if !is_strongly_connected(g, s) {
        return Err(Error::Precondition(
            "S is not strongly connected with an edge".into(),
        ));
    }
    if !s.iter().any(|v| reachable(g, q).contains(v)) {
        return Err(Error::Precondition(
            "S is not reachable from the initial vertex inside Q".into(),
        ));
    }
    Ok(())
}

/// The program for region `(q, s)` maximising the beneficiary's reward.
///
/// `thresholds[p]` is `None` for players without a Part II row; the
/// beneficiary never gets one in political mode.
pub fn build_program(
    g: &Game,
    mode: Mode,
    q: &VertexSet,
    s: &VertexSet,
    thresholds: &[Option<Rational>],
) -> Result<LinearProgram> {
    build_program_for(g, mode, q, s, thresholds, &Objective::of(mode.beneficiary))
}

pub fn build_program_for(
    g: &Game,
    mode: Mode,
    q: &VertexSet,
    s: &VertexSet,
    thresholds: &[Option<Rational>],
    objective: &Objective,
) -> Result<LinearProgram> {
    mode.check(g)?;
    check_region(g, q, s)?;
    if thresholds.len() != g.player_count() {
        return Err(Error::Precondition(format!(
            "{} thresholds for {} players",
            thresholds.len(),
            g.player_count()
        )));
    }
    let one = Rational::one;
    let inside = |e: EdgeId| {
        let (a, b) = g.edge(e);
        s.contains(a) && s.contains(b)
    };

    let mut lp = LinearProgram::new();
    for v in g.vertices() {
        lp.add_variable(format!("p_v[{}]", g.vertex_name(v)));
    }
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        lp.add_variable(format!("p_e[{}->{}]", g.vertex_name(a), g.vertex_name(b)));
        debug_assert_eq!(lp.variables.len() - 1, edge_variable(g, e));
    }

    for v in g.vertices() {
        let relation = if s.contains(v) { Relation::Ge } else { Relation::Eq };
        lp.add_constraint(vec![(vertex_variable(v), one())], relation, Rational::zero());
    }
    for e in 0..g.edge_count() {
        let relation = if inside(e) { Relation::Ge } else { Relation::Eq };
        lp.add_constraint(vec![(edge_variable(g, e), one())], relation, Rational::zero());
    }
    lp.add_constraint(
        g.vertices().map(|v| (vertex_variable(v), one())).collect(),
        Relation::Eq,
        one(),
    );
    for v in s.iter() {
        let mut outflow = vec![(vertex_variable(v), one())];
        let mut inflow = vec![(vertex_variable(v), one())];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if a == v {
                outflow.push((edge_variable(g, e), -one()));
            }
            if b == v {
                inflow.push((edge_variable(g, e), -one()));
            }
        }
        lp.add_constraint(outflow, Relation::Eq, Rational::zero());
        lp.add_constraint(inflow, Relation::Eq, Rational::zero());
    }

    // Edges outside S are fixed to zero, so only S × S contributes.
    let reward_terms = |p: Player| -> Vec<(usize, Rational)> {
        (0..g.edge_count())
            .filter(|&e| inside(e) && !g.reward(e, p).is_zero())
            .map(|e| (edge_variable(g, e), g.reward(e, p).clone()))
            .collect()
    };
    for p in g.players() {
        if let (true, Some(t)) = (mode.is_constrained(p), &thresholds[p]) {
            lp.add_constraint(reward_terms(p), Relation::Ge, t.clone());
        }
    }
    for (p, floor) in &objective.floors {
        lp.add_constraint(reward_terms(*p), Relation::Ge, floor.clone());
    }
    lp.maximize(reward_terms(objective.player));
    Ok(lp)
}

/// Part II thresholds implied by visiting `q`.
pub fn region_thresholds(
    g: &Game,
    mode: Mode,
    q: &VertexSet,
    punish: &PunishmentTable,
) -> Vec<Option<Rational>> {
    let owners: Vec<bool> = g
        .players()
        .map(|p| q.iter().any(|v| g.owner(v) == p))
        .collect();
    g.players()
        .map(|p| {
            if !mode.is_constrained(p) || !owners[p] {
                return None;
            }
            q.iter()
                .filter(|&v| mode.variant == Variant::Literal || g.owner(v) == p)
                .map(|v| punish.value(p, v))
                .max()
                .cloned()
        })
        .collect()
}

/// Solves the region with thresholds derived from `q`.
pub fn solve_region(
    g: &Game,
    mode: Mode,
    q: &VertexSet,
    s: &VertexSet,
    punish: &PunishmentTable,
) -> Result<Option<RatioProfile>> {
    if reachable(g, q) != *q {
        return Err(Error::Precondition(
            "Q is not the set reachable from the initial vertex inside Q".into(),
        ));
    }
    let thresholds = region_thresholds(g, mode, q, punish);
    solve_program(g, mode, q, s, &thresholds, &Objective::of(mode.beneficiary))
}

/// Builds and solves the program; `None` when it is infeasible.
pub fn solve_program(
    g: &Game,
    mode: Mode,
    q: &VertexSet,
    s: &VertexSet,
    thresholds: &[Option<Rational>],
    objective: &Objective,
) -> Result<Option<RatioProfile>> {
    let lp = build_program_for(g, mode, q, s, thresholds, objective)?;
    match lp_solve(&lp) {
        LpOutcome::Optimal { values, objective: optimum } => {
            let n = g.vertex_count();
            let vertex_ratios = values[..n].to_vec();
            let edge_ratios = values[n..].to_vec();
            let rewards = g
                .players()
                .map(|p| weighted_reward(g, &edge_ratios, p))
                .collect();
            let profile = RatioProfile {
                q: q.clone(),
                s: s.clone(),
                vertex_ratios,
                edge_ratios,
                rewards,
                objective: objective.player,
                optimum,
            };
            debug_assert!(profile.check(g).is_ok());
            Ok(Some(profile))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("ratio programs are bounded"),
    }
}

fn weighted_reward(g: &Game, edge_ratios: &[Rational], p: Player) -> Rational {
    edge_ratios
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_zero())
        .map(|(e, r)| r * g.reward(e, p))
        .sum()
}

/// An optimal solution of a region's program.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioProfile {
    pub q: VertexSet,
    pub s: VertexSet,
    pub vertex_ratios: Vec<Rational>,
    pub edge_ratios: Vec<Rational>,
    /// `Σ_e p_e · r_p(e)` per player.
    pub rewards: Vec<Rational>,
    /// The player whose reward was maximised.
    pub objective: Player,
    pub optimum: Rational,
}

impl RatioProfile {
    /// Edges with positive ratio, in document order.
    pub fn support(&self) -> Vec<EdgeId> {
        (0..self.edge_ratios.len())
            .filter(|&e| self.edge_ratios[e].is_positive())
            .collect()
    }

    /// Re-substitutes every invariant exactly.
    pub fn check(&self, g: &Game) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidWitness(m));
        if self.vertex_ratios.len() != g.vertex_count() || self.edge_ratios.len() != g.edge_count() {
            return fail("ratio vectors do not match the game".into());
        }
        if self.rewards.len() != g.player_count() {
            return fail("reward vector does not match the game".into());
        }
        if !self.s.is_subset(&self.q) {
            return fail("S is not a subset of Q".into());
        }
        for v in g.vertices() {
            let r = &self.vertex_ratios[v];
            if r.is_negative() || (!self.s.contains(v) && !r.is_zero()) {
                return fail(format!("bad ratio {r} at vertex {}", g.vertex_name(v)));
            }
        }
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            let r = &self.edge_ratios[e];
            let inside = self.s.contains(a) && self.s.contains(b);
            if r.is_negative() || (!inside && !r.is_zero()) {
                return fail(format!(
                    "bad ratio {r} on edge ({}, {})",
                    g.vertex_name(a),
                    g.vertex_name(b)
                ));
            }
        }
        if self.vertex_ratios.iter().sum::<Rational>() != Rational::one() {
            return fail("vertex ratios do not sum to one".into());
        }
        for v in g.vertices() {
            let mut outflow = Rational::zero();
            let mut inflow = Rational::zero();
            for (e, &(a, b)) in g.edges().iter().enumerate() {
                if a == v {
                    outflow += &self.edge_ratios[e];
                }
                if b == v {
                    inflow += &self.edge_ratios[e];
                }
            }
            if outflow != self.vertex_ratios[v] || inflow != self.vertex_ratios[v] {
                return fail(format!("flow is not conserved at {}", g.vertex_name(v)));
            }
        }
        for p in g.players() {
            if weighted_reward(g, &self.edge_ratios, p) != self.rewards[p] {
                return fail(format!("reward of {} does not match", g.player_name(p)));
            }
        }
        if self.objective >= g.player_count() || self.rewards[self.objective] != self.optimum {
            return fail("optimum does not match the objective reward".into());
        }
        Ok(())
    }
}
