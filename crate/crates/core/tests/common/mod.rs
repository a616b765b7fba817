#![allow(dead_code)]

use polieq::generate::{random_game, GameShape};
use polieq::{Game, LassoPlay, Rational, Vertex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn game_from_seed(seed: u64) -> Game {
    random_game(&mut ChaCha8Rng::seed_from_u64(seed), GameShape::default())
}

pub fn arb_game() -> impl Strategy<Value = Game> {
    any::<u64>().prop_map(game_from_seed)
}

/// A random walk from `start` until it closes a cycle.
pub fn random_lasso(g: &Game, start: Vertex, seed: u64) -> LassoPlay {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = vec![start];
    loop {
        let v = *walk.last().unwrap();
        let out: Vec<Vertex> = g.successors(v).collect();
        let u = out[rng.random_range(0..out.len())];
        if let Some(i) = walk.iter().position(|&w| w == u) {
            let cycle = walk.split_off(i);
            return LassoPlay::new(walk, cycle);
        }
        walk.push(u);
    }
}

/// Positive rationals with small numerator and denominator.
pub fn arb_positive() -> impl Strategy<Value = Rational> {
    (1i64..20, 1i64..20).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}
