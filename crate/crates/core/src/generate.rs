//! Seeded random instances for tests and benchmarks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Game, GameBuilder};
use crate::rational::int;
use crate::reductions::{CnfFormula, Literal};

#[derive(Clone, Copy, Debug)]
pub struct GameShape {
    pub max_vertices: usize,
    pub max_players: usize,
    pub max_out_degree: usize,
    /// Rewards are integers in `-reward_bound..=reward_bound`.
    pub reward_bound: i64,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape {
            max_vertices: 6,
            max_players: 3,
            max_out_degree: 3,
            reward_bound: 2,
        }
    }
}

/// Players `p0, p1, …`, vertices `v0, v1, …`, initial `v0`.
pub fn random_game<R: Rng>(rng: &mut R, shape: GameShape) -> Game {
    let n = rng.random_range(1..=shape.max_vertices);
    let k = rng.random_range(1..=shape.max_players);
    let players: Vec<String> = (0..k).map(|p| format!("p{p}")).collect();
    let mut b = GameBuilder::new().players(players.clone()).initial("v0");
    for v in 0..n {
        b = b.vertex(format!("v{v}"), players[rng.random_range(0..k)].clone());
    }
    for v in 0..n {
        let degree = rng.random_range(1..=shape.max_out_degree.min(n));
        let mut targets = sample(rng, n, degree).into_vec();
        targets.sort_unstable();
        for t in targets {
            let rewards: Vec<(String, _)> = players
                .iter()
                .map(|p| (p.clone(), int(rng.random_range(-shape.reward_bound..=shape.reward_bound))))
                .collect();
            let rewards: Vec<(&str, _)> = rewards.iter().map(|(p, r)| (p.as_str(), r.clone())).collect();
            b = b.edge(format!("v{v}"), format!("v{t}"), &rewards);
        }
    }
    b.build().expect("generated games are valid")
}

/// `count` games from one seed.
pub fn seeded_games(seed: u64, count: usize, shape: GameShape) -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_game(&mut rng, shape)).collect()
}

/// A random 3-CNF over at most `max_variables` variables.
pub fn random_cnf<R: Rng>(rng: &mut R, max_variables: usize, max_clauses: usize) -> CnfFormula {
    let n = rng.random_range(1..=max_variables);
    let m = rng.random_range(1..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            [(); 3].map(|_| Literal {
                variable: rng.random_range(1..=n),
                positive: rng.random_bool(0.5),
            })
        })
        .collect();
    CnfFormula::new(n, clauses).expect("generated formulas are valid")
}
