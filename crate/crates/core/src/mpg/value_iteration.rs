//! Finite-horizon value iteration for the punishment games.
//!
//! With integer weights bounded by `W` on `n` vertices, `ν_k(v)/k` lies
//! within `2nW/k` of the game value, and the value is a rational with
//! denominator at most `n`. After `k = 4n³W` rounds rounding is unique. At
//! geometric checkpoints before that, the rounded candidate is accepted only
//! if [`certify`](super::certificate::certify) proves it exact.

use num::bigint::BigInt;
use num::Integer;

use super::certificate::certify;
use super::{Arena, PlayerValues};
use crate::game::{Game, Player};
use crate::rational::Rational;

/// `r_p(v)` for every vertex.
pub fn punishment_values(g: &Game, p: Player) -> Vec<Rational> {
    solve(g, p).values
}

pub(crate) fn solve(g: &Game, p: Player) -> PlayerValues {
    let arena = Arena::new(g, p);
    let n = g.vertex_count() as i128;
    let w = arena.max_weight();
    let horizon = 4 * n * n * n * w;

    let mut nu = vec![0i128; g.vertex_count()];
    let mut next = nu.clone();
    let mut checkpoint = n.max(1);
    let mut k: i128 = 0;
    loop {
        if k == checkpoint || k >= horizon {
            let last = k >= horizon;
            if let Some(found) = try_certify(&arena, &nu, k, n, w, last) {
                return found;
            }
            assert!(!last, "value iteration failed to certify after {k} rounds");
            checkpoint *= 2;
        }
        for v in g.vertices() {
            let options = g
                .out_edges(v)
                .iter()
                .map(|&e| arena.weights[e] + nu[g.edge(e).1]);
            next[v] = if arena.is_max(v) {
                options.max()
            } else {
                options.min()
            }
            .expect("every vertex has a successor");
        }
        std::mem::swap(&mut nu, &mut next);
        k += 1;
    }
}

fn try_certify(
    arena: &Arena<'_>,
    nu: &[i128],
    k: i128,
    n: i128,
    w: i128,
    last: bool,
) -> Option<PlayerValues> {
    let candidates: Vec<Vec<Rational>> = nu
        .iter()
        .map(|&x| nearest_small_denominators(x, k, n, if last { 2 * n * w } else { 0 }))
        .collect();
    // Try the nearest candidate everywhere; at the horizon fall back to the
    // runner-up for vertices that sit exactly between two candidates.
    let depth = candidates.iter().map(Vec::len).max().unwrap_or(1);
    for choice in 0..depth {
        let chi: Vec<Rational> = candidates
            .iter()
            .map(|c| c[choice.min(c.len() - 1)].clone())
            .collect();
        if let Some((player_strategy, coalition_strategy)) = certify(arena, &chi) {
            let scale = Rational::from_integer(BigInt::from(arena.scale));
            return Some(PlayerValues {
                player: arena.player,
                values: chi.into_iter().map(|x| x / &scale).collect(),
                player_strategy,
                coalition_strategy,
            });
        }
    }
    None
}

/// Rationals `a/q` with `q ≤ n` nearest to `x/k`, closest first.
///
/// With `slack > 0` every candidate within `slack/k` is returned; otherwise
/// only the single nearest one.
fn nearest_small_denominators(x: i128, k: i128, n: i128, slack: i128) -> Vec<Rational> {
    if k == 0 {
        return vec![Rational::from_integer(0.into())];
    }
    // (|a·k − x·q|, q, a): distance is the first over q·k.
    let mut found: Vec<(i128, i128, i128)> = Vec::new();
    for q in 1..=n {
        let a = Integer::div_floor(&(2 * x * q + k), &(2 * k));
        for a in [a, a + 1, a - 1] {
            let err = (a * k - x * q).abs();
            if slack > 0 && err > slack * q {
                continue;
            }
            found.push((err, q, a));
        }
    }
    found.sort_by(|l, r| (l.0 * r.1).cmp(&(r.0 * l.1)).then(l.1.cmp(&r.1)));
    let mut out: Vec<Rational> = Vec::new();
    for (_, q, a) in found {
        let r = Rational::new(a.into(), q.into());
        if !out.contains(&r) {
            out.push(r);
        }
        if slack == 0 {
            break;
        }
    }
    if out.is_empty() {
        out.push(Rational::new(
            Integer::div_floor(&(2 * x + k), &(2 * k)).into(),
            1.into(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn rounding_picks_small_denominators() {
        assert_eq!(nearest_small_denominators(334, 1000, 3, 0), vec![ratio(1, 3)]);
        assert_eq!(nearest_small_denominators(-499, 1000, 2, 0), vec![ratio(-1, 2)]);
        assert_eq!(nearest_small_denominators(7000, 1000, 5, 0), vec![ratio(7, 1)]);
    }

    #[test]
    fn slack_lists_all_candidates_by_distance() {
        let c = nearest_small_denominators(500, 1000, 2, 600);
        assert_eq!(c[0], ratio(1, 2));
        assert!(c.contains(&ratio(0, 1)) && c.contains(&ratio(1, 1)));
    }
}
