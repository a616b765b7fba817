//! Multi-player mean-payoff games: the arena, plays, payoffs and the JSON
//! document format.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use num::Zero;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

/// Index of a vertex in document order.
pub type Vertex = usize;
/// Index of a player in document order.
pub type Player = usize;
/// Index of an edge in document order.
pub type EdgeId = usize;

/// A validated multi-player mean-payoff game.
///
/// Vertices, players and edges are addressed by their position in the source
/// document, so every derived result is reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    players: Vec<String>,
    vertices: Vec<String>,
    owner: Vec<Player>,
    initial: Vertex,
    edges: Vec<(Vertex, Vertex)>,
    /// `rewards[e][p]`
    rewards: Vec<Vec<Rational>>,
    out: Vec<Vec<EdgeId>>,
}

impl Game {
    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn players(&self) -> impl Iterator<Item = Player> + '_ {
        0..self.players.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        0..self.vertices.len()
    }

    pub fn player_name(&self, p: Player) -> &str {
        &self.players[p]
    }

    pub fn vertex_name(&self, v: Vertex) -> &str {
        &self.vertices[v]
    }

    pub fn player_index(&self, name: &str) -> Option<Player> {
        self.players.iter().position(|n| n == name)
    }

    pub fn vertex_index(&self, name: &str) -> Option<Vertex> {
        self.vertices.iter().position(|n| n == name)
    }

    pub fn player(&self, name: &str) -> Result<Player> {
        self.player_index(name)
            .ok_or_else(|| Error::UnknownPlayer(name.to_string()))
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex> {
        self.vertex_index(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn owner(&self, v: Vertex) -> Player {
        self.owner[v]
    }

    pub fn initial(&self) -> Vertex {
        self.initial
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    /// Outgoing edges of `v` in document order.
    pub fn out_edges(&self, v: Vertex) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn successors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out[v].iter().map(move |&e| self.edges[e].1)
    }

    pub fn edge_index(&self, from: Vertex, to: Vertex) -> Option<EdgeId> {
        self.out[from].iter().copied().find(|&e| self.edges[e].1 == to)
    }

    pub fn reward(&self, e: EdgeId, p: Player) -> &Rational {
        &self.rewards[e][p]
    }

    /// Rewards of player `p` indexed by edge.
    pub fn rewards_of(&self, p: Player) -> Vec<Rational> {
        self.rewards.iter().map(|r| r[p].clone()).collect()
    }

    pub fn owned_by(&self, p: Player) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices().filter(move |&v| self.owner[v] == p)
    }

    pub fn owns_any(&self, p: Player) -> bool {
        self.owner.contains(&p)
    }

    pub fn to_document(&self) -> GameDocument {
        GameDocument {
            players: self.players.clone(),
            initial: self.vertices[self.initial].clone(),
            vertices: self
                .vertices()
                .map(|v| VertexEntry {
                    id: self.vertices[v].clone(),
                    owner: self.players[self.owner[v]].clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(e, &(s, t))| EdgeEntry {
                    from: self.vertices[s].clone(),
                    to: self.vertices[t].clone(),
                    rewards: self
                        .players()
                        .filter(|&p| !self.rewards[e][p].is_zero())
                        .map(|p| {
                            (self.players[p].clone(), format_rational(&self.rewards[e][p]))
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &GameDocument) -> Result<Game> {
        let violations = validate(doc);
        if let Some(first) = violations.first() {
            return Err(match first {
                Violation::UnknownOwner { owner, .. } => Error::UnknownPlayer(owner.clone()),
                Violation::UnknownRewardPlayer { player, .. } => {
                    Error::UnknownPlayer(player.clone())
                }
                Violation::MalformedReward { text, .. } => Error::Rational(text.clone()),
                _ => Error::InvalidGame(
                    violations
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("; "),
                ),
            });
        }
        let player_of: HashMap<&str, Player> = doc
            .players
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let vertex_of: HashMap<&str, Vertex> = doc
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let edges: Vec<(Vertex, Vertex)> = doc
            .edges
            .iter()
            .map(|e| (vertex_of[e.from.as_str()], vertex_of[e.to.as_str()]))
            .collect();
        let mut rewards = vec![vec![Rational::zero(); doc.players.len()]; edges.len()];
        for (e, entry) in doc.edges.iter().enumerate() {
            for (player, text) in &entry.rewards {
                rewards[e][player_of[player.as_str()]] = parse_rational(text)?;
            }
        }
        let mut out = vec![Vec::new(); doc.vertices.len()];
        for (e, &(s, _)) in edges.iter().enumerate() {
            out[s].push(e);
        }
        Ok(Game {
            players: doc.players.clone(),
            vertices: doc.vertices.iter().map(|v| v.id.clone()).collect(),
            owner: doc
                .vertices
                .iter()
                .map(|v| player_of[v.owner.as_str()])
                .collect(),
            initial: vertex_of[doc.initial.as_str()],
            edges,
            rewards,
            out,
        })
    }

    /// Invariant violations of this game; always empty for a constructed game.
    pub fn violations(&self) -> Vec<Violation> {
        validate(&self.to_document())
    }

    /// A copy of this game with a different initial vertex.
    pub fn with_initial(&self, v: Vertex) -> Game {
        let mut g = self.clone();
        g.initial = v;
        g
    }

    /// A copy with the rewards of player `p` replaced per edge by `f`.
    pub fn map_rewards(&self, p: Player, mut f: impl FnMut(EdgeId, &Rational) -> Rational) -> Game {
        let mut g = self.clone();
        for e in 0..g.edges.len() {
            g.rewards[e][p] = f(e, &self.rewards[e][p]);
        }
        g
    }

    /// Breadth-first shortest path from `from` to the first vertex satisfying
    /// `target`, using only vertices accepted by `within`. Successors are
    /// explored in increasing index order, so among the shortest paths the
    /// lexicographically least one is returned.
    pub fn shortest_path(
        &self,
        from: Vertex,
        target: impl Fn(Vertex) -> bool,
        within: impl Fn(Vertex) -> bool,
    ) -> Option<Vec<Vertex>> {
        if !within(from) {
            return None;
        }
        let mut parent: Vec<Option<Vertex>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if target(v) {
                let mut path = vec![v];
                let mut cur = v;
                while let Some(p) = parent[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            let mut next: Vec<Vertex> = self.successors(v).collect();
            next.sort_unstable();
            for u in next {
                if !seen[u] && within(u) {
                    seen[u] = true;
                    parent[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
        None
    }
}

/// The on-disk game document.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDocument {
    pub players: Vec<String>,
    pub initial: String,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub owner: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub rewards: IndexMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicatePlayer(String),
    DuplicateVertex(String),
    UnknownOwner { vertex: String, owner: String },
    UnknownInitial(String),
    UnknownEndpoint { from: String, to: String, missing: String },
    DuplicateEdge { from: String, to: String },
    UnknownRewardPlayer { from: String, to: String, player: String },
    MalformedReward { from: String, to: String, text: String },
    NoSuccessor(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePlayer(p) => write!(f, "duplicate player {p:?}"),
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex {v:?}"),
            Violation::UnknownOwner { vertex, owner } => {
                write!(f, "vertex {vertex:?} is owned by unknown player {owner:?}")
            }
            Violation::UnknownInitial(v) => write!(f, "initial vertex {v:?} is not a vertex"),
            Violation::UnknownEndpoint { from, to, missing } => {
                write!(f, "edge ({from:?}, {to:?}) refers to unknown vertex {missing:?}")
            }
            Violation::DuplicateEdge { from, to } => {
                write!(f, "edge ({from:?}, {to:?}) appears more than once")
            }
            Violation::UnknownRewardPlayer { from, to, player } => {
                write!(f, "edge ({from:?}, {to:?}) rewards unknown player {player:?}")
            }
            Violation::MalformedReward { from, to, text } => {
                write!(f, "edge ({from:?}, {to:?}) has malformed reward {text:?}")
            }
            Violation::NoSuccessor(v) => write!(f, "vertex {v:?} has no outgoing edge"),
        }
    }
}

/// Checks every game invariant, returning one entry per violation.
pub fn validate(doc: &GameDocument) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut players = HashSet::new();
    for p in &doc.players {
        if !players.insert(p.as_str()) {
            violations.push(Violation::DuplicatePlayer(p.clone()));
        }
    }
    let mut vertices = HashSet::new();
    for v in &doc.vertices {
        if !vertices.insert(v.id.as_str()) {
            violations.push(Violation::DuplicateVertex(v.id.clone()));
        }
        if !players.contains(v.owner.as_str()) {
            violations.push(Violation::UnknownOwner {
                vertex: v.id.clone(),
                owner: v.owner.clone(),
            });
        }
    }
    if !vertices.contains(doc.initial.as_str()) {
        violations.push(Violation::UnknownInitial(doc.initial.clone()));
    }
    let mut edges = HashSet::new();
    let mut has_successor = HashSet::new();
    for e in &doc.edges {
        for end in [&e.from, &e.to] {
            if !vertices.contains(end.as_str()) {
                violations.push(Violation::UnknownEndpoint {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    missing: end.clone(),
                });
            }
        }
        if !edges.insert((e.from.as_str(), e.to.as_str())) {
            violations.push(Violation::DuplicateEdge {
                from: e.from.clone(),
                to: e.to.clone(),
            });
        }
        has_successor.insert(e.from.as_str());
        for (player, text) in &e.rewards {
            if !players.contains(player.as_str()) {
                violations.push(Violation::UnknownRewardPlayer {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    player: player.clone(),
                });
            }
            if parse_rational(text).is_err() {
                violations.push(Violation::MalformedReward {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    text: text.clone(),
                });
            }
        }
    }
    for v in &doc.vertices {
        if !has_successor.contains(v.id.as_str()) {
            violations.push(Violation::NoSuccessor(v.id.clone()));
        }
    }
    violations
}

pub fn parse_game(text: &str) -> Result<Game> {
    let doc: GameDocument =
        serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    Game::from_document(&doc)
}

pub fn serialize_game(g: &Game) -> String {
    let mut text = serde_json::to_string_pretty(&g.to_document()).expect("document serializes");
    text.push('\n');
    text
}

/// Incremental construction of a [`Game`] by name.
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    doc: GameDocument,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn player(mut self, name: impl Into<String>) -> Self {
        self.doc.players.push(name.into());
        self
    }

    pub fn players<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.doc.players.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn vertex(mut self, id: impl Into<String>, owner: impl Into<String>) -> Self {
        self.doc.vertices.push(VertexEntry {
            id: id.into(),
            owner: owner.into(),
        });
        self
    }

    pub fn initial(mut self, id: impl Into<String>) -> Self {
        self.doc.initial = id.into();
        self
    }

    pub fn edge(
        mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        rewards: &[(&str, Rational)],
    ) -> Self {
        self.doc.edges.push(EdgeEntry {
            from: from.into(),
            to: to.into(),
            rewards: rewards
                .iter()
                .filter(|(_, r)| !r.is_zero())
                .map(|(p, r)| (p.to_string(), format_rational(r)))
                .collect(),
        });
        self
    }

    pub fn build(self) -> Result<Game> {
        Game::from_document(&self.doc)
    }
}

/// A set of vertices, iterated in increasing index order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet(BTreeSet<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn all(g: &Game) -> Self {
        g.vertices().collect()
    }

    pub fn from_mask(mask: u64) -> Self {
        (0..64).filter(|i| mask >> i & 1 == 1).collect()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        self.0.insert(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn first(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn names(&self, g: &Game) -> Vec<String> {
        self.iter().map(|v| g.vertex_name(v).to_string()).collect()
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

/// Vertices reachable from the initial vertex using only edges inside `q`.
pub fn reachable(g: &Game, q: &VertexSet) -> VertexSet {
    let mut seen = VertexSet::new();
    if !q.contains(g.initial()) {
        return seen;
    }
    let mut stack = vec![g.initial()];
    seen.insert(g.initial());
    while let Some(v) = stack.pop() {
        for u in g.successors(v) {
            if q.contains(u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen
}

/// All strongly connected components of the graph on `0..n` with the given
/// edges, each sorted, ordered by least member. Trivial components are kept.
pub(crate) fn components(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<Vec<usize>> {
    let mut graph: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for (s, t) in edges {
        graph.add_edge(nodes[s], nodes[t], ());
    }
    let mut comps: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| i.index()).collect();
            c.sort_unstable();
            c
        })
        .collect();
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Maximal strongly connected components of the subgraph induced by `q` that
/// contain at least one edge, ordered by least vertex.
pub fn sccs(g: &Game, q: &VertexSet) -> Vec<VertexSet> {
    let inside = |&(s, t): &(Vertex, Vertex)| q.contains(s) && q.contains(t);
    components(g.vertex_count(), g.edges().iter().copied().filter(inside))
        .into_iter()
        .filter(|c| q.contains(c[0]))
        .filter(|c| c.len() > 1 || g.edge_index(c[0], c[0]).is_some())
        .map(|c| c.into_iter().collect())
        .collect()
}

/// True when `s` is strongly connected through its own edges and has an edge.
pub fn is_strongly_connected(g: &Game, s: &VertexSet) -> bool {
    let comps = sccs(g, s);
    comps.len() == 1 && comps[0] == *s
}

/// The ultimately periodic play `prefix · cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoPlay {
    pub prefix: Vec<Vertex>,
    pub cycle: Vec<Vertex>,
}

impl LassoPlay {
    pub fn new(prefix: Vec<Vertex>, cycle: Vec<Vertex>) -> Self {
        LassoPlay { prefix, cycle }
    }

    /// Edges of the cycle, including the wrap-around edge.
    pub fn cycle_edges(&self, g: &Game) -> Result<Vec<EdgeId>> {
        self.check(g)?;
        let k = self.cycle.len();
        Ok((0..k)
            .map(|i| {
                g.edge_index(self.cycle[i], self.cycle[(i + 1) % k])
                    .expect("checked")
            })
            .collect())
    }

    pub fn check(&self, g: &Game) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::InvalidPlay("empty cycle".into()));
        }
        if let Some(&v) = self
            .prefix
            .iter()
            .chain(&self.cycle)
            .find(|&&v| v >= g.vertex_count())
        {
            return Err(Error::InvalidPlay(format!("vertex index {v} out of range")));
        }
        let walk: Vec<Vertex> = self
            .prefix
            .iter()
            .chain(&self.cycle)
            .chain(std::iter::once(&self.cycle[0]))
            .copied()
            .collect();
        for w in walk.windows(2) {
            if g.edge_index(w[0], w[1]).is_none() {
                return Err(Error::InvalidPlay(format!(
                    "no edge ({}, {})",
                    g.vertex_name(w[0]),
                    g.vertex_name(w[1])
                )));
            }
        }
        Ok(())
    }
}

/// The liminf mean payoff of player `p` on a lasso: the mean of its cycle.
pub fn lasso_payoff(g: &Game, play: &LassoPlay, p: Player) -> Result<Rational> {
    let edges = play.cycle_edges(g)?;
    let total: Rational = edges.iter().map(|&e| g.reward(e, p)).sum();
    Ok(total / Rational::from_integer(edges.len().into()))
}
