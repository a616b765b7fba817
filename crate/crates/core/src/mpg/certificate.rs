//! Exact verification of candidate game values.
//!
//! Given candidate values `χ` (in scaled units), optimal strategies are
//! extracted per value class with an energy progress measure, then each
//! strategy is checked against the best one-player response of the other
//! side. When both checks pass `χ` is the value of the game.

use std::collections::VecDeque;

use num::{Signed, ToPrimitive};

use super::Arena;
use crate::game::{components, EdgeId, Vertex};
use crate::rational::Rational;

type Strategy = Vec<Option<EdgeId>>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Max,
    Min,
}

/// Optimal strategies (player, coalition) when `chi` is exactly the value.
pub(crate) fn certify(arena: &Arena<'_>, chi: &[Rational]) -> Option<(Strategy, Strategy)> {
    let max = energy_strategy(arena, chi, Side::Max)?;
    let min = energy_strategy(arena, chi, Side::Min)?;
    let guaranteed_low = one_player_values(arena, &max, Side::Min);
    let guaranteed_high = one_player_values(arena, &min, Side::Max);
    let sound = (0..chi.len()).all(|v| guaranteed_low[v] >= chi[v] && guaranteed_high[v] <= chi[v]);
    sound.then_some((max, min))
}

fn controls(arena: &Arena<'_>, v: Vertex, side: Side) -> bool {
    arena.is_max(v) == (side == Side::Max)
}

/// A memoryless strategy for `side` that keeps the mean on the right side of
/// `chi` inside every value class. `None` if `chi` is inconsistent.
fn energy_strategy(arena: &Arena<'_>, chi: &[Rational], side: Side) -> Option<Strategy> {
    let g = arena.game;
    let n = g.vertex_count();
    // Energy weight of a class edge: b·w − a for Max, a − b·w for Min, where
    // the class value is a/b.
    let mut class_edges: Vec<Vec<(EdgeId, Vertex, i128)>> = vec![Vec::new(); n];
    for v in 0..n {
        let a = chi[v].numer().to_i128()?;
        let b = chi[v].denom().to_i128()?;
        for &e in g.out_edges(v) {
            let u = g.edge(e).1;
            let better_for_opponent = match side {
                Side::Max => chi[u] < chi[v],
                Side::Min => chi[u] > chi[v],
            };
            if better_for_opponent && !controls(arena, v, side) {
                return None;
            }
            if chi[u] == chi[v] {
                let w = b * arena.weights[e] - a;
                class_edges[v].push((e, u, if side == Side::Max { w } else { -w }));
            }
        }
        if class_edges[v].is_empty() {
            return None;
        }
    }

    let bound: i128 = class_edges
        .iter()
        .map(|es| es.iter().map(|&(_, _, w)| (-w).max(0)).max().unwrap_or(0))
        .sum();
    const TOP: i128 = i128::MAX;
    let cost = |f: &[i128], u: Vertex, w: i128| -> i128 {
        if f[u] == TOP {
            TOP
        } else {
            let need = (f[u] - w).max(0);
            if need > bound {
                TOP
            } else {
                need
            }
        }
    };

    let mut preds: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for (v, es) in class_edges.iter().enumerate() {
        for &(_, u, _) in es {
            preds[u].push(v);
        }
    }
    let mut f = vec![0i128; n];
    let mut queued = vec![true; n];
    let mut work: VecDeque<Vertex> = (0..n).collect();
    while let Some(v) = work.pop_front() {
        queued[v] = false;
        let costs = class_edges[v].iter().map(|&(_, u, w)| cost(&f, u, w));
        let lifted = if controls(arena, v, side) {
            costs.min()
        } else {
            costs.max()
        }
        .expect("nonempty");
        if lifted > f[v] {
            f[v] = lifted;
            for &p in &preds[v] {
                if !queued[p] {
                    queued[p] = true;
                    work.push_back(p);
                }
            }
        }
    }
    if f.contains(&TOP) {
        return None;
    }
    Some(
        (0..n)
            .map(|v| {
                controls(arena, v, side).then(|| {
                    class_edges[v]
                        .iter()
                        .find(|&&(_, u, w)| cost(&f, u, w) <= f[v])
                        .expect("progress measure is consistent")
                        .0
                })
            })
            .collect(),
    )
}

/// Optimal mean reachable by `free` when the other side plays `fixed`.
fn one_player_values(arena: &Arena<'_>, fixed: &Strategy, free: Side) -> Vec<Rational> {
    let g = arena.game;
    let n = g.vertex_count();
    let sign: i128 = if free == Side::Min { 1 } else { -1 };
    let mut edges: Vec<(Vertex, Vertex, i128)> = Vec::new();
    for v in 0..n {
        match fixed[v] {
            Some(e) => edges.push((v, g.edge(e).1, sign * arena.weights[e])),
            None => {
                for &e in g.out_edges(v) {
                    edges.push((v, g.edge(e).1, sign * arena.weights[e]));
                }
            }
        }
    }
    let comps = components(n, edges.iter().map(|&(s, t, _)| (s, t)));
    let mut comp_of = vec![0; n];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    // Minimum cycle mean of each component with a cycle.
    let comp_mean: Vec<Option<Rational>> = comps
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let inner: Vec<(Vertex, Vertex, i128)> = edges
                .iter()
                .copied()
                .filter(|&(s, t, _)| comp_of[s] == i && comp_of[t] == i)
                .collect();
            (!inner.is_empty()).then(|| karp_min_mean(c, &inner))
        })
        .collect();

    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for &(s, t, _) in &edges {
        adj[s].push(t);
    }
    (0..n)
        .map(|v| {
            let mut seen = vec![false; n];
            let mut stack = vec![v];
            seen[v] = true;
            let mut best: Option<Rational> = None;
            while let Some(u) = stack.pop() {
                if let Some(m) = &comp_mean[comp_of[u]] {
                    if best.as_ref().is_none_or(|b| m < b) {
                        best = Some(m.clone());
                    }
                }
                for &x in &adj[u] {
                    if !seen[x] {
                        seen[x] = true;
                        stack.push(x);
                    }
                }
            }
            let best = best.expect("every vertex reaches a cycle");
            if sign < 0 {
                -best
            } else {
                best
            }
        })
        .collect()
}

/// Karp's minimum cycle mean of a strongly connected component.
fn karp_min_mean(members: &[Vertex], edges: &[(Vertex, Vertex, i128)]) -> Rational {
    let k = members.len();
    let local = |v: Vertex| members.binary_search(&v).expect("member");
    let mut dist: Vec<Vec<Option<i128>>> = vec![vec![None; k]; k + 1];
    dist[0][0] = Some(0);
    for step in 1..=k {
        for &(s, t, w) in edges {
            if let Some(d) = dist[step - 1][local(s)] {
                let slot = &mut dist[step][local(t)];
                if slot.is_none_or(|x| d + w < x) {
                    *slot = Some(d + w);
                }
            }
        }
    }
    let mut best: Option<Rational> = None;
    for v in 0..k {
        let Some(dk) = dist[k][v] else { continue };
        let worst = (0..k)
            .filter_map(|j| dist[j][v].map(|dj| Rational::new((dk - dj).into(), ((k - j) as i128).into())))
            .max()
            .expect("dist[0] or a shorter walk exists");
        if best.as_ref().is_none_or(|b| worst < *b) {
            best = Some(worst);
        }
    }
    let best = best.expect("component has a cycle");
    debug_assert!(!best.denom().is_negative());
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn karp_finds_the_cheaper_cycle() {
        // 0→1→0 has mean 2, the loop at 1 costs 5
        let edges = [(0, 1, 3), (1, 0, 1), (1, 1, 5)];
        assert_eq!(karp_min_mean(&[0, 1], &edges), ratio(2, 1));
        let edges = [(0, 1, 3), (1, 0, 1), (1, 1, -1)];
        assert_eq!(karp_min_mean(&[0, 1], &edges), ratio(-1, 1));
        let edges = [(0, 1, 1), (1, 2, 0), (2, 0, 0)];
        assert_eq!(karp_min_mean(&[0, 1, 2], &edges), ratio(1, 3));
    }
}
