//! Searching regions for the optimal equilibrium.
//!
//! A threshold vector fixes, per player, the largest punishment value she may
//! be exposed to (or bans her vertices entirely). The vector determines the
//! largest admissible visited set `Q`, and the infinity set `S` ranges over
//! the strongly connected components of `Q`. The exhaustive search instead
//! guesses every `S ⊆ Q` directly and serves as the oracle.

use rayon::prelude::*;

use crate::equilibrium::{
    region_thresholds, solve_program, Kind, Mode, Objective, RatioProfile, Variant,
};
use crate::error::{Error, Result};
use crate::game::{is_strongly_connected, reachable, sccs, Game, Player, Vertex, VertexSet};
use crate::mpg::PunishmentTable;
use crate::rational::Rational;

/// `None` is ⊥: no Part II row, and the player may own no visited vertex
/// (the political beneficiary excepted).
pub type ThresholdVector = Vec<Option<Rational>>;

pub const DEFAULT_VERTEX_BOUND: usize = 14;

/// Candidate thresholds of each player, ascending, with ⊥ last.
pub fn candidate_thresholds(g: &Game, punish: &PunishmentTable, mode: Mode) -> Vec<Vec<Option<Rational>>> {
    g.players()
        .map(|p| {
            if !mode.is_constrained(p) || !g.owns_any(p) {
                return vec![None];
            }
            let mut values: Vec<Rational> = match mode.variant {
                Variant::OwnerRestricted => g.owned_by(p).map(|v| punish.value(p, v).clone()).collect(),
                Variant::Literal => g.vertices().map(|v| punish.value(p, v).clone()).collect(),
            };
            values.sort();
            values.dedup();
            values.into_iter().map(Some).chain([None]).collect()
        })
        .collect()
}

/// The Cartesian product of the candidates, first player most significant.
pub fn threshold_vectors(
    g: &Game,
    punish: &PunishmentTable,
    mode: Mode,
) -> impl Iterator<Item = ThresholdVector> {
    let candidates = candidate_thresholds(g, punish, mode);
    let mut digits = vec![0usize; candidates.len()];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let current = digits
            .iter()
            .zip(&candidates)
            .map(|(&i, c)| c[i].clone())
            .collect();
        done = true;
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < candidates[k].len() {
                done = false;
                break;
            }
            digits[k] = 0;
        }
        Some(current)
    })
}

/// The largest visited set compatible with `t`, and its infinity-set
/// candidates.
pub fn admissible_region(
    g: &Game,
    mode: Mode,
    t: &[Option<Rational>],
    punish: &PunishmentTable,
) -> (VertexSet, Vec<VertexSet>) {
    let exempt = |p: Player| mode.kind == Kind::Political && p == mode.beneficiary;
    let allowed = |v: Vertex| {
        let o = g.owner(v);
        if !exempt(o) && t[o].is_none() {
            return false;
        }
        match mode.variant {
            Variant::OwnerRestricted => t[o].as_ref().is_none_or(|bound| punish.value(o, v) <= bound),
            Variant::Literal => g
                .players()
                .all(|p| t[p].as_ref().is_none_or(|bound| punish.value(p, v) <= bound)),
        }
    };
    let q = reachable(g, &g.vertices().filter(|&v| allowed(v)).collect());
    let candidates = sccs(g, &q);
    (q, candidates)
}

/// An optimal region with its solution and the path into it.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumWitness {
    pub mode: Mode,
    pub profile: RatioProfile,
    /// From the initial vertex to the first vertex of `S`, inside `Q`.
    pub entry_path: Vec<Vertex>,
    /// The Part II thresholds the profile was solved under.
    pub thresholds: ThresholdVector,
}

impl EquilibriumWitness {
    fn new(g: &Game, mode: Mode, profile: RatioProfile, thresholds: ThresholdVector) -> Self {
        let entry_path = g
            .shortest_path(g.initial(), |v| profile.s.contains(v), |v| profile.q.contains(v))
            .expect("S is reachable inside Q");
        EquilibriumWitness {
            mode,
            profile,
            entry_path,
            thresholds,
        }
    }

    pub fn q(&self) -> &VertexSet {
        &self.profile.q
    }

    pub fn s(&self) -> &VertexSet {
        &self.profile.s
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.profile.rewards
    }

    pub fn optimum(&self) -> &Rational {
        &self.profile.optimum
    }

    /// Checks the witness against thresholds recomputed from its `Q`.
    pub fn verify(&self, g: &Game, punish: &PunishmentTable) -> Result<()> {
        self.profile.check(g)?;
        let fail = |m: String| Err(Error::InvalidWitness(m));
        if reachable(g, self.q()) != *self.q() {
            return fail("Q is not closed under reachability".into());
        }
        if !is_strongly_connected(g, self.s()) {
            return fail("S is not strongly connected".into());
        }
        let path = &self.entry_path;
        if path.first() != Some(&g.initial()) {
            return fail("entry path does not start at the initial vertex".into());
        }
        if !path.last().is_some_and(|&v| self.s().contains(v)) {
            return fail("entry path does not end in S".into());
        }
        if !path.iter().all(|&v| self.q().contains(v)) {
            return fail("entry path leaves Q".into());
        }
        if path.windows(2).any(|w| g.edge_index(w[0], w[1]).is_none()) {
            return fail("entry path uses a missing edge".into());
        }
        for (p, t) in region_thresholds(g, self.mode, self.q(), punish).iter().enumerate() {
            if let Some(t) = t {
                if self.profile.rewards[p] < *t {
                    return fail(format!(
                        "{} gets {} below her threshold {}",
                        g.player_name(p),
                        self.profile.rewards[p],
                        t
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub witness: Option<EquilibriumWitness>,
    pub regions_explored: usize,
}

/// Keeps the first of the best.
fn best_of(found: impl IntoIterator<Item = (RatioProfile, ThresholdVector)>) -> Option<(RatioProfile, ThresholdVector)> {
    let mut best: Option<(RatioProfile, ThresholdVector)> = None;
    for (profile, t) in found {
        if best.as_ref().is_none_or(|(b, _)| profile.optimum > b.optimum) {
            best = Some((profile, t));
        }
    }
    best
}

/// Threshold enumeration with a caller-supplied objective.
pub fn search_thresholds(
    g: &Game,
    mode: Mode,
    punish: &PunishmentTable,
    objective: &Objective,
) -> Result<SearchOutcome> {
    mode.check(g)?;
    let vectors: Vec<ThresholdVector> = threshold_vectors(g, punish, mode).collect();
    let per_vector = vectors
        .into_par_iter()
        .map(|t| {
            let (q, candidates) = admissible_region(g, mode, &t, punish);
            let mut found = Vec::new();
            for s in &candidates {
                if let Some(profile) = solve_program(g, mode, &q, s, &t, objective)? {
                    found.push((profile, t.clone()));
                }
            }
            Ok((candidates.len(), found))
        })
        .collect::<Result<Vec<_>>>()?;
    let regions_explored = per_vector.iter().map(|(n, _)| n).sum();
    let best = best_of(per_vector.into_iter().flat_map(|(_, f)| f));
    Ok(SearchOutcome {
        witness: best.map(|(profile, t)| EquilibriumWitness::new(g, mode, profile, t)),
        regions_explored,
    })
}

/// Every reachable-closed `Q` and strongly connected `S ⊆ Q`.
pub fn search_exhaustive(
    g: &Game,
    mode: Mode,
    punish: &PunishmentTable,
    objective: &Objective,
    bound: usize,
) -> Result<SearchOutcome> {
    mode.check(g)?;
    let n = g.vertex_count();
    if n > bound {
        return Err(Error::BoundExceeded {
            what: "vertices for exhaustive search",
            size: n as u128,
            bound: bound as u128,
        });
    }
    let init = 1u64 << g.initial();
    let regions: Vec<u64> = (0..1u64 << n)
        .filter(|&m| m & init != 0 && reachable(g, &VertexSet::from_mask(m)) == VertexSet::from_mask(m))
        .collect();
    let per_region = regions
        .into_par_iter()
        .map(|qm| {
            let q = VertexSet::from_mask(qm);
            let t = region_thresholds(g, mode, &q, punish);
            let mut found = Vec::new();
            let mut explored = 0;
            // Ascending submasks of qm.
            let mut sm = 0u64;
            loop {
                sm = (sm.wrapping_sub(qm)) & qm;
                if sm == 0 {
                    break;
                }
                let s = VertexSet::from_mask(sm);
                if is_strongly_connected(g, &s) {
                    explored += 1;
                    if let Some(profile) = solve_program(g, mode, &q, &s, &t, objective)? {
                        found.push((profile, t.clone()));
                    }
                }
            }
            Ok((explored, found))
        })
        .collect::<Result<Vec<_>>>()?;
    let regions_explored = per_region.iter().map(|(n, _)| n).sum();
    let best = best_of(per_region.into_iter().flat_map(|(_, f)| f));
    Ok(SearchOutcome {
        witness: best.map(|(profile, t)| EquilibriumWitness::new(g, mode, profile, t)),
        regions_explored,
    })
}

/// A region search strategy.
pub trait EquilibriumSearch: Send + Sync {
    fn name(&self) -> &'static str;
    fn search(
        &self,
        g: &Game,
        mode: Mode,
        punish: &PunishmentTable,
        objective: &Objective,
    ) -> Result<SearchOutcome>;
}

/// Threshold vectors with their maximal visited sets.
#[derive(Clone, Copy, Debug, Default)]
pub struct ThresholdSearch;

impl EquilibriumSearch for ThresholdSearch {
    fn name(&self) -> &'static str {
        "threshold"
    }

    fn search(&self, g: &Game, mode: Mode, punish: &PunishmentTable, objective: &Objective) -> Result<SearchOutcome> {
        search_thresholds(g, mode, punish, objective)
    }
}

/// Every region up to a vertex bound.
#[derive(Clone, Copy, Debug)]
pub struct ExhaustiveSearch {
    pub bound: usize,
}

impl Default for ExhaustiveSearch {
    fn default() -> Self {
        ExhaustiveSearch {
            bound: DEFAULT_VERTEX_BOUND,
        }
    }
}

impl EquilibriumSearch for ExhaustiveSearch {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn search(&self, g: &Game, mode: Mode, punish: &PunishmentTable, objective: &Objective) -> Result<SearchOutcome> {
        search_exhaustive(g, mode, punish, objective, self.bound)
    }
}

/// The optimal equilibrium for the beneficiary, if any region is feasible.
pub fn optimize(g: &Game, mode: Mode) -> Result<Option<EquilibriumWitness>> {
    let punish = PunishmentTable::compute(g);
    Ok(search_thresholds(g, mode, &punish, &Objective::of(mode.beneficiary))?.witness)
}

pub fn exhaustive_optimize(g: &Game, mode: Mode) -> Result<Option<EquilibriumWitness>> {
    let punish = PunishmentTable::compute(g);
    Ok(search_exhaustive(g, mode, &punish, &Objective::of(mode.beneficiary), DEFAULT_VERTEX_BOUND)?.witness)
}

/// Whether some equilibrium gives the beneficiary at least `threshold`.
pub fn decide(g: &Game, mode: Mode, threshold: &Rational) -> Result<bool> {
    Ok(optimize(g, mode)?.is_some_and(|w| w.optimum() >= threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::example;
    use crate::game::GameBuilder;
    use crate::rational::{int, ratio};

    fn names(g: &Game, s: &VertexSet) -> Vec<String> {
        s.names(g)
    }

    #[test]
    fn example_threshold_vectors() {
        let g = example();
        let punish = PunishmentTable::compute(&g);
        let d = g.player("dictator").unwrap();
        let vectors: Vec<_> = threshold_vectors(&g, &punish, Mode::political(d)).collect();
        assert_eq!(vectors.len(), 8);
        assert!(vectors.iter().all(|t| t[d].is_none()));
        assert_eq!(vectors[0], vec![Some(int(0)), None, Some(int(-2))]);
        let nash: Vec<_> = threshold_vectors(&g, &punish, Mode::nash(d)).collect();
        // dictator owns vertex 2 only
        assert_eq!(nash.len(), 16);
    }

    #[test]
    fn single_player_political_has_one_vector() {
        let g = GameBuilder::new()
            .player("d")
            .vertex("a", "d")
            .initial("a")
            .edge("a", "a", &[])
            .build()
            .unwrap();
        let punish = PunishmentTable::compute(&g);
        assert_eq!(threshold_vectors(&g, &punish, Mode::political(0)).count(), 1);
    }

    #[test]
    fn example_admissible_regions() {
        let g = example();
        let punish = PunishmentTable::compute(&g);
        let mode = Mode::political(g.player("dictator").unwrap());
        let (q, candidates) = admissible_region(&g, mode, &[Some(int(0)), None, Some(int(-2))], &punish);
        assert_eq!(names(&g, &q), ["1", "2", "5"]);
        assert_eq!(candidates.len(), 1);
        let (q, _) = admissible_region(&g, mode, &[None, None, Some(int(0))], &punish);
        assert!(q.is_empty());
        let (q, candidates) = admissible_region(&g, mode, &[Some(int(0)), None, Some(int(0))], &punish);
        assert_eq!(q, VertexSet::all(&g));
        assert_eq!(candidates.len(), 3);
    }

    #[test]
    fn example_optima() {
        let g = example();
        let d = g.player("dictator").unwrap();
        let political = optimize(&g, Mode::political(d)).unwrap().unwrap();
        assert_eq!(*political.optimum(), int(1));
        assert_eq!(political.entry_path, vec![0, 1, 4]);
        assert_eq!(names(&g, political.s()), ["5"]);
        let nash = optimize(&g, Mode::nash(d)).unwrap().unwrap();
        assert_eq!(*nash.optimum(), int(0));
        assert_eq!(names(&g, nash.s()), ["4"]);
        assert_eq!(nash.entry_path, vec![0, 3]);

        let punish = PunishmentTable::compute(&g);
        political.verify(&g, &punish).unwrap();
        nash.verify(&g, &punish).unwrap();

        for mode in [Mode::political(d), Mode::nash(d)] {
            let oracle = exhaustive_optimize(&g, mode).unwrap().unwrap();
            assert_eq!(oracle.optimum(), optimize(&g, mode).unwrap().unwrap().optimum());
        }
    }

    #[test]
    fn example_decisions() {
        let g = example();
        let d = g.player("dictator").unwrap();
        assert!(decide(&g, Mode::political(d), &int(1)).unwrap());
        assert!(!decide(&g, Mode::political(d), &ratio(3, 2)).unwrap());
        assert!(!decide(&g, Mode::nash(d), &ratio(1, 2)).unwrap());
    }

    #[test]
    fn self_loop_optimum_is_its_reward() {
        let g = GameBuilder::new()
            .players(["d", "o"])
            .vertex("a", "o")
            .initial("a")
            .edge("a", "a", &[("d", ratio(5, 3)), ("o", int(-1))])
            .build()
            .unwrap();
        for mode in [Mode::political(0), Mode::nash(0)] {
            assert_eq!(*optimize(&g, mode).unwrap().unwrap().optimum(), ratio(5, 3));
            assert_eq!(*exhaustive_optimize(&g, mode).unwrap().unwrap().optimum(), ratio(5, 3));
        }
    }

    #[test]
    fn exhaustive_bound_is_enforced() {
        let g = example();
        let punish = PunishmentTable::compute(&g);
        let err = search_exhaustive(&g, Mode::nash(0), &punish, &Objective::of(0), 4).unwrap_err();
        assert!(matches!(err, Error::BoundExceeded { .. }));
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let g = example();
        let d = g.player("dictator").unwrap();
        let punish = PunishmentTable::compute(&g);
        let mut w = optimize(&g, Mode::political(d)).unwrap().unwrap();
        w.entry_path = vec![0, 4];
        assert!(w.verify(&g, &punish).is_err());
        let mut w = optimize(&g, Mode::nash(d)).unwrap().unwrap();
        w.profile.q = VertexSet::all(&g);
        assert!(w.verify(&g, &punish).is_err());
    }
}
