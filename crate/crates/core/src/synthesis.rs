//! From ratios back to a play.
//!
//! The support of a ratio profile splits into islands, the strongly
//! connected components of its positive edges. Inside an island a quota rule
//! picks the first edge that is behind its target share. The play visits
//! the islands round-robin with segments growing linearly in the round
//! number, so the bounded transfers between islands vanish in the limit.

use std::collections::VecDeque;

use num::bigint::BigInt;
use num::{Integer, Signed, ToPrimitive, Zero};

use crate::enumeration::EquilibriumWitness;
use crate::error::{Error, Result};
use crate::game::{components, EdgeId, Game, Player, Vertex};
use crate::mpg::PunishmentTable;
use crate::rational::{lcm_of_denominators, to_scaled_integers, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Entry,
    Transfer,
    Island(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub from: Vertex,
    pub edge: EdgeId,
    pub to: Vertex,
    pub kind: StepKind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub entry: u64,
    pub transfer: u64,
    pub island: u64,
}

impl StepStats {
    pub fn total(&self) -> u64 {
        self.entry + self.transfer + self.island
    }

    /// Share of steps spent outside islands.
    pub fn transfer_fraction(&self) -> f64 {
        (self.entry + self.transfer) as f64 / self.total().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Island {
    pub vertices: Vec<Vertex>,
    /// Relative share of island steps.
    pub weight: u128,
    /// Where the island is entered next.
    pub resume: Vertex,
}

/// A quota target `P` on the common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Quota {
    edge: EdgeId,
    to: Vertex,
    share: u128,
}

/// Produces the play of a witness one edge at a time.
#[derive(Clone, Debug)]
pub struct Scheduler {
    islands: Vec<Island>,
    island_of: Vec<Option<usize>>,
    unit: u128,
    vertex_share: Vec<u128>,
    quotas: Vec<Vec<Quota>>,
    /// Edges inside `S`, by target.
    inside: Vec<Vec<(Vertex, EdgeId)>>,
    visits: Vec<u128>,
    taken: Vec<u128>,
    current: Vertex,
    pending: VecDeque<Step>,
    island: usize,
    round: u128,
    remaining: u128,
    stats: StepStats,
}

fn to_u128(x: &BigInt, what: &str) -> Result<u128> {
    x.to_u128()
        .ok_or_else(|| Error::InvalidWitness(format!("{what} {x} does not fit the scheduler")))
}

fn bfs_path(inside: &[Vec<(Vertex, EdgeId)>], from: Vertex, to: Vertex) -> Vec<(EdgeId, Vertex)> {
    if from == to {
        return Vec::new();
    }
    let mut parent: Vec<Option<(Vertex, EdgeId)>> = vec![None; inside.len()];
    let mut seen = vec![false; inside.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for &(u, e) in &inside[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((v, e));
                if u == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while let Some((p, e)) = parent[cur] {
                        path.push((e, cur));
                        cur = p;
                    }
                    path.reverse();
                    return path;
                }
                queue.push_back(u);
            }
        }
    }
    unreachable!("S is strongly connected")
}

/// Sets up the play of `w`.
pub fn build_schedule(g: &Game, w: &EquilibriumWitness) -> Result<Scheduler> {
    w.profile.check(g)?;
    let s = w.s();
    let path = &w.entry_path;
    if path.first() != Some(&g.initial()) || !path.last().is_some_and(|&v| s.contains(v)) {
        return Err(Error::InvalidWitness("entry path does not lead from the initial vertex into S".into()));
    }
    let mut entry_edges = Vec::new();
    for pair in path.windows(2) {
        let e = g
            .edge_index(pair[0], pair[1])
            .ok_or_else(|| Error::InvalidWitness("entry path uses a missing edge".into()))?;
        entry_edges.push(e);
    }

    let p = &w.profile;
    let support = p.support();
    if support.is_empty() {
        return Err(Error::InvalidWitness("empty support".into()));
    }
    let n = g.vertex_count();
    let denominator = lcm_of_denominators(p.vertex_ratios.iter().chain(&p.edge_ratios));
    let scaled = |r: &Rational| (r * Rational::from_integer(denominator.clone())).to_integer();
    let vertex_share = p
        .vertex_ratios
        .iter()
        .map(|r| to_u128(&scaled(r), "vertex share"))
        .collect::<Result<Vec<_>>>()?;
    let mut quotas: Vec<Vec<Quota>> = vec![Vec::new(); n];
    for &e in &support {
        let (a, b) = g.edge(e);
        quotas[a].push(Quota {
            edge: e,
            to: b,
            share: to_u128(&scaled(&p.edge_ratios[e]), "edge share")?,
        });
    }
    // Every segment is a multiple of the denominators of p_e / p_v.
    let unit = lcm_of_denominators(
        support
            .iter()
            .map(|&e| &p.edge_ratios[e] / &p.vertex_ratios[g.edge(e).0])
            .collect::<Vec<_>>()
            .iter(),
    );
    let unit = to_u128(&unit, "segment unit")?;

    let comps = components(n, support.iter().map(|&e| g.edge(e)));
    let comps: Vec<Vec<Vertex>> = comps
        .into_iter()
        .filter(|c| p.vertex_ratios[c[0]].is_positive())
        .collect();
    let masses: Vec<Rational> = comps
        .iter()
        .map(|c| c.iter().map(|&v| &p.vertex_ratios[v]).sum())
        .collect();
    let clear = lcm_of_denominators(&masses);
    let cleared: Vec<BigInt> = masses
        .iter()
        .map(|m| (m * Rational::from_integer(clear.clone())).to_integer())
        .collect();
    let common = cleared.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut island_of = vec![None; n];
    let islands = comps
        .into_iter()
        .zip(&cleared)
        .enumerate()
        .map(|(j, (vertices, c))| {
            for &v in &vertices {
                island_of[v] = Some(j);
            }
            Ok(Island {
                resume: vertices[0],
                weight: to_u128(&(c / &common), "island weight")?,
                vertices,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut inside: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if s.contains(a) && s.contains(b) {
            inside[a].push((b, e));
        }
    }
    for list in &mut inside {
        list.sort_unstable();
    }

    let mut pending: VecDeque<Step> = entry_edges
        .iter()
        .zip(path.windows(2))
        .map(|(&e, pair)| Step {
            from: pair[0],
            edge: e,
            to: pair[1],
            kind: StepKind::Entry,
        })
        .collect();
    let arrival = *path.last().expect("nonempty");
    let mut at = arrival;
    for (e, to) in bfs_path(&inside, arrival, islands[0].resume) {
        pending.push_back(Step {
            from: at,
            edge: e,
            to,
            kind: StepKind::Entry,
        });
        at = to;
    }
    let first = islands[0].weight * unit;
    Ok(Scheduler {
        islands,
        island_of,
        unit,
        vertex_share,
        quotas,
        inside,
        visits: vec![0; n],
        taken: vec![0; g.edge_count()],
        current: g.initial(),
        pending,
        island: 0,
        round: 1,
        remaining: first,
        stats: StepStats::default(),
    })
}

impl Scheduler {
    pub fn islands(&self) -> &[Island] {
        &self.islands
    }

    /// The segment unit `L`.
    pub fn unit(&self) -> u128 {
        self.unit
    }

    pub fn current(&self) -> Vertex {
        self.current
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn round(&self) -> u128 {
        self.round
    }

    /// Visits and edge counts made by the quota rule.
    pub fn counters(&self) -> (&[u128], &[u128]) {
        (&self.visits, &self.taken)
    }

    /// Takes one edge.
    pub fn step(&mut self) -> Step {
        let step = loop {
            if let Some(step) = self.pending.pop_front() {
                break step;
            }
            if self.remaining > 0 {
                self.remaining -= 1;
                break self.quota_step();
            }
            self.next_segment();
        };
        debug_assert_eq!(step.from, self.current);
        match step.kind {
            StepKind::Entry => self.stats.entry += 1,
            StepKind::Transfer => self.stats.transfer += 1,
            StepKind::Island(_) => self.stats.island += 1,
        }
        self.current = step.to;
        step
    }

    fn quota_step(&mut self) -> Step {
        let v = self.current;
        let j = self.island_of[v].expect("island steps stay on the support");
        self.visits[v] += 1;
        let nv = self.visits[v];
        let pv = self.vertex_share[v];
        let quotas = &self.quotas[v];
        let pick = quotas
            .iter()
            .find(|q| self.taken[q.edge] * pv < q.share * nv)
            .unwrap_or(&quotas[0]);
        self.taken[pick.edge] += 1;
        Step {
            from: v,
            edge: pick.edge,
            to: pick.to,
            kind: StepKind::Island(j),
        }
    }

    fn next_segment(&mut self) {
        self.islands[self.island].resume = self.current;
        self.island += 1;
        if self.island == self.islands.len() {
            self.island = 0;
            self.round += 1;
        }
        let target = self.islands[self.island].resume;
        let mut at = self.current;
        for (e, to) in bfs_path(&self.inside, self.current, target) {
            self.pending.push_back(Step {
                from: at,
                edge: e,
                to,
                kind: StepKind::Transfer,
            });
            at = to;
        }
        self.remaining = self.round * self.islands[self.island].weight * self.unit;
    }

    /// The next `steps` vertices of the play.
    pub fn advance(&mut self, steps: usize) -> Vec<Vertex> {
        self.take(steps).collect()
    }

    /// Takes `steps` edges without recording them.
    pub fn fast_forward(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

impl Iterator for Scheduler {
    type Item = Vertex;

    /// The current vertex; the scheduler then moves on.
    fn next(&mut self) -> Option<Vertex> {
        let v = self.current;
        self.step();
        Some(v)
    }
}

/// Exact per-player totals over a stream of edges.
#[derive(Clone, Debug)]
pub struct RewardMeter {
    /// `weights[e][p]`, scaled by `scale[p]`.
    weights: Vec<Vec<i128>>,
    scale: Vec<i128>,
    totals: Vec<i128>,
    steps: u64,
}

impl RewardMeter {
    pub fn new(g: &Game) -> Self {
        let per_player: Vec<(Vec<i128>, i128)> = g.players().map(|p| to_scaled_integers(&g.rewards_of(p))).collect();
        let weights = (0..g.edge_count())
            .map(|e| per_player.iter().map(|(w, _)| w[e]).collect())
            .collect();
        RewardMeter {
            weights,
            scale: per_player.iter().map(|(_, s)| *s).collect(),
            totals: vec![0; g.player_count()],
            steps: 0,
        }
    }

    pub fn add(&mut self, e: EdgeId) {
        for (t, w) in self.totals.iter_mut().zip(&self.weights[e]) {
            *t += w;
        }
        self.steps += 1;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Mean reward per player; zero before the first edge.
    pub fn means(&self) -> Vec<Rational> {
        let steps = self.steps.max(1) as i128;
        self.totals
            .iter()
            .zip(&self.scale)
            .map(|(t, s)| Rational::new((*t).into(), (s * steps).into()))
            .collect()
    }
}

/// Average reward per player over the edges of `segment`.
pub fn running_means(g: &Game, segment: &[Vertex]) -> Result<Vec<Rational>> {
    if segment.len() < 2 {
        return Err(Error::InvalidPlay("a segment needs at least one edge".into()));
    }
    let mut meter = RewardMeter::new(g);
    for pair in segment.windows(2) {
        if pair.iter().any(|&v| v >= g.vertex_count()) {
            return Err(Error::InvalidPlay("vertex out of range".into()));
        }
        let e = g.edge_index(pair[0], pair[1]).ok_or_else(|| {
            Error::InvalidPlay(format!(
                "no edge ({}, {})",
                g.vertex_name(pair[0]),
                g.vertex_name(pair[1])
            ))
        })?;
        meter.add(e);
    }
    Ok(meter.means())
}

/// Mean reward of `deviator` over `horizon` steps when she leaves the
/// schedule at step `at` through `alt` and everyone then plays the
/// punishment game: the coalition against her, she for herself.
pub fn simulate_deviation(
    g: &Game,
    s: &Scheduler,
    deviator: Player,
    at: u64,
    alt: EdgeId,
    horizon: u64,
    punish: &PunishmentTable,
) -> Result<Rational> {
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be positive".into()));
    }
    if deviator >= g.player_count() || alt >= g.edge_count() {
        return Err(Error::Precondition("unknown deviator or edge".into()));
    }
    let mut s = s.clone();
    s.fast_forward(at);
    let v = s.current();
    if g.owner(v) != deviator {
        return Err(Error::Precondition(format!(
            "{} does not own the scheduled vertex {}",
            g.player_name(deviator),
            g.vertex_name(v)
        )));
    }
    if g.edge(alt).0 != v {
        return Err(Error::Precondition("deviation edge does not leave the scheduled vertex".into()));
    }
    if s.step().edge == alt {
        return Err(Error::Precondition("deviation edge is the scheduled edge".into()));
    }

    let table = punish.player(deviator);
    let reward = |e: EdgeId| g.reward(e, deviator).clone();
    let mut total = reward(alt);
    let rest = horizon - 1;
    // Walk the punishment lasso from the deviation target.
    let mut walk: Vec<EdgeId> = Vec::new();
    let mut position = vec![usize::MAX; g.vertex_count()];
    let mut cur = g.edge(alt).1;
    while position[cur] == usize::MAX && (walk.len() as u64) < rest {
        position[cur] = walk.len();
        let e = table.choice(cur);
        walk.push(e);
        cur = g.edge(e).1;
    }
    if walk.len() as u64 == rest {
        total += walk.iter().map(|&e| reward(e)).sum::<Rational>();
    } else {
        let start = position[cur];
        let (prefix, cycle) = walk.split_at(start);
        total += prefix.iter().map(|&e| reward(e)).sum::<Rational>();
        let left = rest - prefix.len() as u64;
        let len = cycle.len() as u64;
        let cycle_sum: Rational = cycle.iter().map(|&e| reward(e)).sum();
        total += cycle_sum * Rational::from_integer((left / len).into());
        total += cycle[..(left % len) as usize]
            .iter()
            .map(|&e| reward(e))
            .sum::<Rational>();
    }
    Ok(total / Rational::from_integer(horizon.into()))
}
