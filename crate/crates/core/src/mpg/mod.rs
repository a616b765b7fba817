//! Two-player mean-payoff games "one player against the rest".
//!
//! For every player `p` the punishment table records the value `r_p(v)` of
//! the zero-sum game in which `p` maximises her mean reward and the coalition
//! of all other players minimises it, together with optimal memoryless
//! strategies for both sides.

mod brute_force;
mod certificate;
mod value_iteration;

use num::Zero;
use rayon::prelude::*;

pub use brute_force::{brute_force_values, DEFAULT_PROFILE_BOUND};
pub use value_iteration::punishment_values;

use crate::error::Result;
use crate::game::{EdgeId, Game, LassoPlay, Player, Vertex};
use crate::rational::{to_scaled_integers, Rational};

/// The zero-sum game for player `p` with integer-scaled weights.
pub(crate) struct Arena<'a> {
    pub game: &'a Game,
    pub player: Player,
    /// `r_p(e) · scale`, integral.
    pub weights: Vec<i128>,
    pub scale: i128,
}

impl<'a> Arena<'a> {
    pub fn new(game: &'a Game, player: Player) -> Self {
        let (weights, scale) = to_scaled_integers(&game.rewards_of(player));
        Arena {
            game,
            player,
            weights,
            scale,
        }
    }

    pub fn is_max(&self, v: Vertex) -> bool {
        self.game.owner(v) == self.player
    }

    pub fn max_weight(&self) -> i128 {
        self.weights.iter().map(|w| w.abs()).max().unwrap_or(0)
    }
}

/// Values and optimal memoryless strategies of one punishment game.
#[derive(Clone, Debug, PartialEq)]
pub struct PlayerValues {
    pub player: Player,
    /// `r_p(v)` indexed by vertex.
    pub values: Vec<Rational>,
    /// Chosen edge at each vertex owned by the player, `None` elsewhere.
    pub player_strategy: Vec<Option<EdgeId>>,
    /// Chosen edge at each vertex not owned by the player, `None` elsewhere.
    pub coalition_strategy: Vec<Option<EdgeId>>,
}

impl PlayerValues {
    /// The edge taken at `v` when both sides follow their strategies.
    pub fn choice(&self, v: Vertex) -> EdgeId {
        self.player_strategy[v]
            .or(self.coalition_strategy[v])
            .expect("strategies are total")
    }

    /// The lasso produced from `v` when both sides follow their strategies.
    pub fn play_from(&self, g: &Game, v: Vertex) -> LassoPlay {
        let mut walk = Vec::new();
        let mut position = vec![usize::MAX; g.vertex_count()];
        let mut cur = v;
        while position[cur] == usize::MAX {
            position[cur] = walk.len();
            walk.push(cur);
            cur = g.edge(self.choice(cur)).1;
        }
        let cycle = walk.split_off(position[cur]);
        LassoPlay::new(walk, cycle)
    }
}

/// A solver for the punishment games.
pub trait MpgSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, g: &Game, p: Player) -> Result<PlayerValues>;
}

/// Pseudo-polynomial value iteration with certified early exit.
#[derive(Clone, Copy, Debug, Default)]
pub struct ValueIteration;

impl MpgSolver for ValueIteration {
    fn name(&self) -> &'static str {
        "value-iteration"
    }

    fn solve(&self, g: &Game, p: Player) -> Result<PlayerValues> {
        Ok(value_iteration::solve(g, p))
    }
}

/// Exhaustive minimax over memoryless strategy pairs; a test oracle.
#[derive(Clone, Copy, Debug)]
pub struct BruteForce {
    pub bound: u128,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce {
            bound: DEFAULT_PROFILE_BOUND,
        }
    }
}

impl MpgSolver for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn solve(&self, g: &Game, p: Player) -> Result<PlayerValues> {
        let values = brute_force::values_with_bound(g, p, self.bound)?;
        let arena = Arena::new(g, p);
        let scaled: Vec<Rational> = values
            .iter()
            .map(|v| v * Rational::from_integer(arena.scale.into()))
            .collect();
        let (player_strategy, coalition_strategy) = certificate::certify(&arena, &scaled)
            .expect("brute-force values admit optimal strategies");
        Ok(PlayerValues {
            player: p,
            values,
            player_strategy,
            coalition_strategy,
        })
    }
}

/// Memoryless optimal strategies for both sides of `2mpg(g, p)`.
pub fn punishment_strategies(g: &Game, p: Player) -> (Vec<Option<EdgeId>>, Vec<Option<EdgeId>>) {
    let v = value_iteration::solve(g, p);
    (v.player_strategy, v.coalition_strategy)
}

/// Punishment values and strategies for every player.
#[derive(Clone, Debug, PartialEq)]
pub struct PunishmentTable {
    tables: Vec<PlayerValues>,
}

impl PunishmentTable {
    pub fn compute(g: &Game) -> Self {
        Self::with_solver(g, &ValueIteration).expect("value iteration is total")
    }

    pub fn with_solver(g: &Game, solver: &dyn MpgSolver) -> Result<Self> {
        let tables = (0..g.player_count())
            .into_par_iter()
            .map(|p| {
                if g.owns_any(p) || !g.rewards_of(p).iter().all(Zero::is_zero) {
                    solver.solve(g, p)
                } else {
                    Ok(trivial(g, p))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PunishmentTable { tables })
    }

    pub fn value(&self, p: Player, v: Vertex) -> &Rational {
        &self.tables[p].values[v]
    }

    pub fn player(&self, p: Player) -> &PlayerValues {
        &self.tables[p]
    }

    pub fn players(&self) -> &[PlayerValues] {
        &self.tables
    }
}

fn trivial(g: &Game, p: Player) -> PlayerValues {
    let pick = |mine: bool| -> Vec<Option<EdgeId>> {
        g.vertices()
            .map(|v| ((g.owner(v) == p) == mine).then(|| g.out_edges(v)[0]))
            .collect()
    };
    PlayerValues {
        player: p,
        values: vec![Rational::zero(); g.vertex_count()],
        player_strategy: pick(true),
        coalition_strategy: pick(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::example;
    use crate::game::{lasso_payoff, GameBuilder};
    use crate::rational::{int, ratio};

    #[test]
    fn self_loop_value() {
        let g = GameBuilder::new()
            .player("p")
            .vertex("a", "p")
            .initial("a")
            .edge("a", "a", &[("p", ratio(3, 2))])
            .build()
            .unwrap();
        assert_eq!(punishment_values(&g, 0), vec![ratio(3, 2)]);
        assert_eq!(brute_force_values(&g, 0).unwrap(), vec![ratio(3, 2)]);
        let (mine, theirs) = punishment_strategies(&g, 0);
        assert_eq!(mine, vec![Some(0)]);
        assert_eq!(theirs, vec![None]);
    }

    #[test]
    fn example_values() {
        let g = example();
        let v = |n| g.vertex(n).unwrap();
        let first = g.player("first").unwrap();
        let dictator = g.player("dictator").unwrap();
        let passive = g.player("passive").unwrap();

        let r_first = punishment_values(&g, first);
        assert_eq!(r_first[v("1")], int(0));
        assert_eq!(r_first[v("2")], int(-1));
        let r_dictator = punishment_values(&g, dictator);
        assert_eq!(r_dictator[v("2")], int(2));
        assert_eq!(r_dictator[v("1")], int(0));
        let r_passive = brute_force_values(&g, passive).unwrap();
        assert_eq!(r_passive[v("1")], int(-2));
        assert_eq!(punishment_values(&g, passive), r_passive);
    }

    #[test]
    fn example_strategies() {
        let g = example();
        let v = |n| g.vertex(n).unwrap();
        let to_3 = g.edge_index(v("2"), v("3"));
        let (_, coalition) = punishment_strategies(&g, g.player("first").unwrap());
        assert_eq!(coalition[v("2")], to_3);
        let (mine, _) = punishment_strategies(&g, g.player("dictator").unwrap());
        assert_eq!(mine[v("2")], to_3);
    }

    #[test]
    fn player_reaches_better_loop() {
        let g = GameBuilder::new()
            .player("p")
            .vertex("a", "p")
            .vertex("b", "p")
            .initial("a")
            .edge("a", "a", &[])
            .edge("a", "b", &[])
            .edge("b", "a", &[])
            .edge("b", "b", &[("p", int(1))])
            .build()
            .unwrap();
        assert_eq!(brute_force_values(&g, 0).unwrap(), vec![int(1), int(1)]);
        assert_eq!(punishment_values(&g, 0), vec![int(1), int(1)]);
    }

    #[test]
    fn stored_strategies_replay_their_values() {
        let g = example();
        let table = PunishmentTable::compute(&g);
        for p in g.players() {
            for v in g.vertices() {
                let play = table.player(p).play_from(&g, v);
                assert_eq!(&lasso_payoff(&g, &play, p).unwrap(), table.value(p, v));
            }
        }
    }

    #[test]
    fn bound_is_enforced() {
        let g = example();
        let err = brute_force::values_with_bound(&g, 0, 3).unwrap_err();
        assert!(err.to_string().contains("bound"));
    }
}
