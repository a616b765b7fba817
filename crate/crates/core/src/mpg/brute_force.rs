use num::Zero;

use crate::error::{Error, Result};
use crate::game::{Game, Player, Vertex};
use crate::rational::Rational;

pub const DEFAULT_PROFILE_BOUND: u128 = 1_000_000;

/// Exact minimax over all memoryless strategy pairs.
pub fn brute_force_values(g: &Game, p: Player) -> Result<Vec<Rational>> {
    values_with_bound(g, p, DEFAULT_PROFILE_BOUND)
}

pub(crate) fn values_with_bound(g: &Game, p: Player, bound: u128) -> Result<Vec<Rational>> {
    let profiles = g
        .vertices()
        .map(|v| g.out_edges(v).len() as u128)
        .try_fold(1u128, |acc, d| acc.checked_mul(d))
        .unwrap_or(u128::MAX);
    if profiles > bound {
        return Err(Error::BoundExceeded {
            what: "memoryless strategy profiles",
            size: profiles,
            bound,
        });
    }
    let mine: Vec<Vertex> = g.owned_by(p).collect();
    let theirs: Vec<Vertex> = g.vertices().filter(|&v| g.owner(v) != p).collect();
    let n = g.vertex_count();
    let mut choice = vec![0usize; n];
    let mut best: Vec<Option<Rational>> = vec![None; n];

    let mut outer = Odometer::new(g, &mine);
    loop {
        outer.write(&mut choice);
        let mut worst: Vec<Option<Rational>> = vec![None; n];
        let mut inner = Odometer::new(g, &theirs);
        loop {
            inner.write(&mut choice);
            let means = functional_means(g, p, &choice);
            for v in 0..n {
                if worst[v].as_ref().is_none_or(|w| means[v] < *w) {
                    worst[v] = Some(means[v].clone());
                }
            }
            if !inner.advance() {
                break;
            }
        }
        for v in 0..n {
            let w = worst[v].take().expect("at least one profile");
            if best[v].as_ref().is_none_or(|b| w > *b) {
                best[v] = Some(w);
            }
        }
        if !outer.advance() {
            break;
        }
    }
    Ok(best.into_iter().map(|b| b.expect("evaluated")).collect())
}

/// Mixed-radix counter over the out-edges of a vertex subset.
struct Odometer<'a> {
    g: &'a Game,
    vertices: &'a [Vertex],
    digits: Vec<usize>,
}

impl<'a> Odometer<'a> {
    fn new(g: &'a Game, vertices: &'a [Vertex]) -> Self {
        Odometer {
            g,
            vertices,
            digits: vec![0; vertices.len()],
        }
    }

    fn write(&self, choice: &mut [usize]) {
        for (i, &v) in self.vertices.iter().enumerate() {
            choice[v] = self.g.out_edges(v)[self.digits[i]];
        }
    }

    fn advance(&mut self) -> bool {
        for (i, &v) in self.vertices.iter().enumerate() {
            self.digits[i] += 1;
            if self.digits[i] < self.g.out_edges(v).len() {
                return true;
            }
            self.digits[i] = 0;
        }
        false
    }
}

/// Mean of the cycle reached from each vertex when every vertex follows
/// `choice`.
fn functional_means(g: &Game, p: Player, choice: &[usize]) -> Vec<Rational> {
    let n = g.vertex_count();
    let mut mean: Vec<Option<Rational>> = vec![None; n];
    for start in 0..n {
        if mean[start].is_some() {
            continue;
        }
        let mut path = Vec::new();
        let mut index = vec![usize::MAX; n];
        let mut cur = start;
        while mean[cur].is_none() && index[cur] == usize::MAX {
            index[cur] = path.len();
            path.push(cur);
            cur = g.edge(choice[cur]).1;
        }
        let value = match &mean[cur] {
            Some(m) => m.clone(),
            None => {
                let cycle = &path[index[cur]..];
                let total: Rational = cycle
                    .iter()
                    .map(|&v| g.reward(choice[v], p).clone())
                    .fold(Rational::zero(), |a, b| a + b);
                total / Rational::from_integer(cycle.len().into())
            }
        };
        for v in path {
            mean[v] = Some(value.clone());
        }
    }
    mean.into_iter().map(|m| m.expect("assigned")).collect()
}
