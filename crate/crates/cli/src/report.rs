//! The JSON report written by `solve` and `lex-solve`, and its re-validation.

use anyhow::{bail, ensure, Context, Result};
use indexmap::IndexMap;
use num::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use polieq::enumeration::EquilibriumWitness;
use polieq::equilibrium::{region_thresholds, Kind, Mode, RatioProfile, Variant};
use polieq::mpg::PunishmentTable;
use polieq::rational::{format_rational, parse_rational};
use polieq::{serialize_game, Game, Rational, VertexSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub kind: String,
    pub dictator: String,
    pub variant: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRatio {
    pub from: String,
    pub to: String,
    pub ratio: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: Vec<String>,
    pub game_digest: String,
    pub mode: ModeRecord,
    /// Players optimised in order; the last one's reward is `optimum`.
    pub objectives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<bool>,
    pub optimum: String,
    pub rewards: IndexMap<String, String>,
    pub q: Vec<String>,
    pub s: Vec<String>,
    pub entry_path: Vec<String>,
    /// Nonzero ratios only.
    pub edge_ratios: Vec<EdgeRatio>,
    pub regions_explored: usize,
    pub duration_ms: u64,
}

pub fn digest(g: &Game) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(serialize_game(g).as_bytes())))
}

pub fn mode_record(g: &Game, mode: Mode) -> ModeRecord {
    ModeRecord {
        kind: match mode.kind {
            Kind::Political => "political",
            Kind::Nash => "nash",
        }
        .into(),
        dictator: g.player_name(mode.beneficiary).into(),
        variant: match mode.variant {
            Variant::OwnerRestricted => "owner",
            Variant::Literal => "literal",
        }
        .into(),
    }
}

fn parse_mode(g: &Game, m: &ModeRecord) -> Result<Mode> {
    let d = g.player(&m.dictator)?;
    let mode = match m.kind.as_str() {
        "political" => Mode::political(d),
        "nash" => Mode::nash(d),
        other => bail!("unknown mode {other:?}"),
    };
    Ok(mode.with_variant(match m.variant.as_str() {
        "owner" => Variant::OwnerRestricted,
        "literal" => Variant::Literal,
        other => bail!("unknown variant {other:?}"),
    }))
}

pub fn build(
    g: &Game,
    command: Vec<String>,
    objectives: &[usize],
    w: &EquilibriumWitness,
    regions_explored: usize,
) -> Report {
    let names = |s: &VertexSet| s.names(g);
    Report {
        command,
        game_digest: digest(g),
        mode: mode_record(g, w.mode),
        objectives: objectives.iter().map(|&p| g.player_name(p).to_string()).collect(),
        threshold: None,
        decision: None,
        optimum: format_rational(w.optimum()),
        rewards: g
            .players()
            .map(|p| (g.player_name(p).to_string(), format_rational(&w.rewards()[p])))
            .collect(),
        q: names(w.q()),
        s: names(w.s()),
        entry_path: w.entry_path.iter().map(|&v| g.vertex_name(v).to_string()).collect(),
        edge_ratios: w
            .profile
            .support()
            .into_iter()
            .map(|e| {
                let (a, b) = g.edge(e);
                EdgeRatio {
                    from: g.vertex_name(a).into(),
                    to: g.vertex_name(b).into(),
                    ratio: format_rational(&w.profile.edge_ratios[e]),
                }
            })
            .collect(),
        regions_explored,
        duration_ms: 0,
    }
}

/// Rebuilds the witness of `r` and checks it against `g`.
pub fn witness(g: &Game, r: &Report) -> Result<EquilibriumWitness> {
    ensure!(r.game_digest == digest(g), "report was made for a different game");
    let mode = parse_mode(g, &r.mode)?;
    let objective = g.player(r.objectives.last().context("report lists no objectives")?)?;
    let set = |names: &[String]| -> Result<VertexSet> { names.iter().map(|n| Ok(g.vertex(n)?)).collect() };
    let (q, s) = (set(&r.q)?, set(&r.s)?);

    let mut edge_ratios = vec![Rational::zero(); g.edge_count()];
    let mut vertex_ratios = vec![Rational::zero(); g.vertex_count()];
    for e in &r.edge_ratios {
        let (a, b) = (g.vertex(&e.from)?, g.vertex(&e.to)?);
        let id = g.edge_index(a, b).with_context(|| format!("no edge ({}, {})", e.from, e.to))?;
        let ratio = parse_rational(&e.ratio)?;
        vertex_ratios[a] += &ratio;
        edge_ratios[id] = ratio;
    }
    let mut rewards = Vec::new();
    for p in g.players() {
        let text = r.rewards.get(g.player_name(p)).with_context(|| format!("no reward for {}", g.player_name(p)))?;
        rewards.push(parse_rational(text)?);
    }
    let profile = RatioProfile {
        q: q.clone(),
        s,
        vertex_ratios,
        edge_ratios,
        rewards,
        objective,
        optimum: parse_rational(&r.optimum)?,
    };
    let punish = PunishmentTable::compute(g);
    let w = EquilibriumWitness {
        mode,
        profile,
        entry_path: r.entry_path.iter().map(|n| Ok(g.vertex(n)?)).collect::<Result<_>>()?,
        thresholds: region_thresholds(g, mode, &q, &punish),
    };
    w.verify(g, &punish)?;
    Ok(w)
}
