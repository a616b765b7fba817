use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use indexmap::IndexMap;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use polieq::bimatrix::{nash_equilibria, parse_matrix, political_optimum, Bimatrix, MixedProfile};
use polieq::enumeration::{EquilibriumWitness, SearchOutcome};
use polieq::equilibrium::{Mode, Objective, Variant};
use polieq::mpg::PunishmentTable;
use polieq::rational::{format_rational, parse_rational};
use polieq::reductions::{add_social_player, lexicographic_search, make_zero_sum, parse_cnf, reduce_3sat, unit_weights};
use polieq::registry::{equilibrium_searches, mpg_solvers};
use polieq::synthesis::{build_schedule, simulate_deviation};
use polieq::{parse_game, serialize_game, Game, Player};

use crate::report::{self, Report};
use crate::{Command, EquilibriumArgs, GameArgs, ModeArg, Outcome, VariantArg};

/// Steps scanned for deviation points when `--at` is not given.
const DEVIATION_WINDOW: u64 = 20_000;

pub fn run(command: Command, echo: Vec<String>) -> Result<Outcome> {
    match command {
        Command::Solve { eq, threshold, out } => solve(&eq, threshold.as_deref(), out.as_deref(), echo),
        Command::Values { game, player, out } => values(&game, player.as_deref(), out.as_deref()),
        Command::Synthesize { eq, steps, out } => synthesize(&eq, steps, out.as_deref()),
        Command::SimulateDeviation {
            eq,
            deviator,
            at,
            to,
            horizon,
            seed,
            tolerance,
            out,
        } => deviate(&eq, &deviator, at.zip(to), horizon, seed, &tolerance, out.as_deref()),
        Command::Reduce3Sat {
            cnf,
            pad,
            zero_sum,
            social,
            out,
        } => reduce(&cnf, pad, zero_sum, social, out.as_deref()),
        Command::Bimatrix { matrix, out } => bimatrix(&matrix, out.as_deref()),
        Command::LexSolve {
            eq,
            objectives,
            social,
            out,
        } => lex_solve(&eq, &objectives, social, out.as_deref(), echo),
        Command::Verify { report, game, social } => verify(&report, &game, social),
    }
}

fn load_game(path: &Path) -> Result<Game> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_game(&text).with_context(|| format!("in {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(value)?)
}

fn mode_of(g: &Game, eq: &EquilibriumArgs) -> Result<Mode> {
    let d = g.player(&eq.dictator)?;
    let mode = match eq.mode {
        ModeArg::Political => Mode::political(d),
        ModeArg::Nash => Mode::nash(d),
    };
    Ok(mode.with_variant(match eq.variant {
        VariantArg::Owner => Variant::OwnerRestricted,
        VariantArg::Literal => Variant::Literal,
    }))
}

fn punishments(g: &Game, args: &GameArgs) -> Result<PunishmentTable> {
    let solvers = mpg_solvers();
    Ok(PunishmentTable::with_solver(g, solvers.get(&args.solver)?)?)
}

/// Runs the configured search, lexicographically over `objectives`.
fn search(g: &Game, eq: &EquilibriumArgs, objectives: &[Player]) -> Result<(Mode, PunishmentTable, SearchOutcome)> {
    let mode = mode_of(g, eq)?;
    let punish = punishments(g, &eq.game)?;
    let searches = equilibrium_searches();
    let strategy = searches.get(&eq.search)?;
    let outcome = match objectives {
        [] => strategy.search(g, mode, &punish, &Objective::of(mode.beneficiary))?,
        _ => lexicographic_search(g, mode, &punish, objectives, strategy)?,
    };
    Ok((mode, punish, outcome))
}

fn no_equilibrium() -> Outcome {
    Outcome::NotFound("no equilibrium found".into())
}

fn solve(eq: &EquilibriumArgs, threshold: Option<&str>, out: Option<&Path>, echo: Vec<String>) -> Result<Outcome> {
    let start = Instant::now();
    let g = load_game(&eq.game.game)?;
    let threshold = threshold.map(parse_rational).transpose()?;
    let (mode, _, outcome) = search(&g, eq, &[])?;
    let Some(w) = outcome.witness else {
        return Ok(no_equilibrium());
    };
    let mut r = report::build(&g, echo, &[mode.beneficiary], &w, outcome.regions_explored);
    let mut result = Outcome::Done;
    if let Some(t) = threshold {
        let reached = *w.optimum() >= t;
        if !reached {
            result = Outcome::NotFound(format!("optimum {} is below {}", format_rational(w.optimum()), format_rational(&t)));
        }
        r.threshold = Some(format_rational(&t));
        r.decision = Some(reached);
    }
    r.duration_ms = start.elapsed().as_millis() as u64;
    emit_json(out, &r)?;
    Ok(result)
}

fn lex_solve(eq: &EquilibriumArgs, objectives: &[String], social: bool, out: Option<&Path>, echo: Vec<String>) -> Result<Outcome> {
    let start = Instant::now();
    let mut g = load_game(&eq.game.game)?;
    if social {
        g = add_social_player(&g, &unit_weights(&g))?;
    }
    let players = objectives.iter().map(|n| Ok(g.player(n.trim())?)).collect::<Result<Vec<_>>>()?;
    let (_, _, outcome) = search(&g, eq, &players)?;
    let Some(w) = outcome.witness else {
        return Ok(no_equilibrium());
    };
    let mut r = report::build(&g, echo, &players, &w, outcome.regions_explored);
    r.duration_ms = start.elapsed().as_millis() as u64;
    emit_json(out, &r)?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct ValueTable {
    player: String,
    values: IndexMap<String, String>,
}

fn values(args: &GameArgs, player: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    let g = load_game(&args.game)?;
    let punish = punishments(&g, args)?;
    let table = |p: Player| ValueTable {
        player: g.player_name(p).into(),
        values: g
            .vertices()
            .map(|v| (g.vertex_name(v).to_string(), format_rational(punish.value(p, v))))
            .collect(),
    };
    match player {
        Some(name) => emit_json(out, &table(g.player(name)?))?,
        None => emit_json(out, &g.players().map(table).collect::<Vec<_>>())?,
    }
    Ok(Outcome::Done)
}

fn witness(g: &Game, eq: &EquilibriumArgs) -> Result<Option<(EquilibriumWitness, PunishmentTable)>> {
    let (_, punish, outcome) = search(g, eq, &[])?;
    Ok(outcome.witness.map(|w| (w, punish)))
}

fn synthesize(eq: &EquilibriumArgs, steps: u64, out: Option<&Path>) -> Result<Outcome> {
    let g = load_game(&eq.game.game)?;
    let Some((w, _)) = witness(&g, eq)? else {
        return Ok(no_equilibrium());
    };
    let play = build_schedule(&g, &w)?;
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    for v in play.take(steps as usize) {
        writeln!(sink, "{}", g.vertex_name(v))?;
    }
    sink.flush()?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct DeviationRecord {
    deviator: String,
    horizon: u64,
    mean: String,
    equilibrium_reward: String,
    profitable: bool,
}

fn deviate(
    eq: &EquilibriumArgs,
    deviator: &str,
    point: Option<(u64, String)>,
    horizon: u64,
    seed: u64,
    tolerance: &str,
    out: Option<&Path>,
) -> Result<Outcome> {
    let g = load_game(&eq.game.game)?;
    let tolerance = parse_rational(tolerance)?;
    let p = g.player(deviator)?;
    let Some((w, punish)) = witness(&g, eq)? else {
        return Ok(no_equilibrium());
    };
    let schedule = build_schedule(&g, &w)?;
    let (at, alt) = match point {
        Some((at, to)) => {
            let mut s = schedule.clone();
            s.fast_forward(at);
            let (v, t) = (s.current(), g.vertex(&to)?);
            let alt = g
                .edge_index(v, t)
                .with_context(|| format!("no edge ({}, {to}) at step {at}", g.vertex_name(v)))?;
            (at, alt)
        }
        None => {
            let mut s = schedule.clone();
            let mut choices = Vec::new();
            for t in 0..DEVIATION_WINDOW {
                let v = s.current();
                let scheduled = s.step().edge;
                if g.owner(v) == p {
                    choices.extend(g.out_edges(v).iter().filter(|&&e| e != scheduled).map(|&e| (t, e)));
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            *choices
                .choose(&mut rng)
                .with_context(|| format!("{deviator} has no alternative in the first {DEVIATION_WINDOW} steps"))?
        }
    };
    let mean = simulate_deviation(&g, &schedule, p, at, alt, horizon, &punish)?;
    let reward = &w.rewards()[p];
    emit_json(
        out,
        &DeviationRecord {
            deviator: deviator.into(),
            horizon,
            profitable: mean > reward + &tolerance,
            mean: format_rational(&mean),
            equilibrium_reward: format_rational(reward),
        },
    )?;
    Ok(Outcome::Done)
}

fn reduce(cnf: &Path, pad: bool, zero_sum: bool, social: bool, out: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(cnf).with_context(|| format!("cannot read {}", cnf.display()))?;
    let f = parse_cnf(&text, pad).with_context(|| format!("in {}", cnf.display()))?;
    let mut g = reduce_3sat(&f);
    if zero_sum {
        g = make_zero_sum(&g)?;
    }
    if social {
        g = add_social_player(&g, &unit_weights(&g))?;
    }
    emit(out, serialize_game(&g).trim_end())?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct ProfileRecord {
    dictator: IndexMap<String, String>,
    opponent: IndexMap<String, String>,
    dictator_payoff: String,
    opponent_payoff: String,
}

#[derive(Serialize)]
struct MatrixRecord {
    political: ProfileRecord,
    nash: Vec<ProfileRecord>,
}

fn profile_record(m: &Bimatrix, p: &MixedProfile) -> ProfileRecord {
    let mix = |labels: &[String], d: &[polieq::Rational]| {
        labels
            .iter()
            .zip(d)
            .map(|(l, x)| (l.clone(), format_rational(x)))
            .collect()
    };
    ProfileRecord {
        dictator: mix(&m.dictator_actions, &p.x),
        opponent: mix(&m.opponent_actions, &p.y),
        dictator_payoff: format_rational(&p.dictator_payoff),
        opponent_payoff: format_rational(&p.opponent_payoff),
    }
}

fn bimatrix(path: &Path, out: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let m = parse_matrix(&text).with_context(|| format!("in {}", path.display()))?;
    let record = MatrixRecord {
        political: profile_record(&m, &political_optimum(&m)),
        nash: nash_equilibria(&m)?.iter().map(|p| profile_record(&m, p)).collect(),
    };
    emit_json(out, &record)?;
    Ok(Outcome::Done)
}

fn verify(report_path: &Path, game_path: &Path, social: bool) -> Result<Outcome> {
    let text = fs::read_to_string(report_path).with_context(|| format!("cannot read {}", report_path.display()))?;
    let r: Report = serde_json::from_str(&text).with_context(|| format!("in {}", report_path.display()))?;
    let mut g = load_game(game_path)?;
    if social {
        g = add_social_player(&g, &unit_weights(&g))?;
    }
    let w = match report::witness(&g, &r) {
        Ok(w) => w,
        Err(e) => return Ok(Outcome::NotFound(format!("report does not re-validate: {e:#}"))),
    };
    let objectives = r.objectives.iter().map(|n| Ok(g.player(n)?)).collect::<Result<Vec<_>>>()?;
    let punish = PunishmentTable::compute(&g);
    let searches = equilibrium_searches();
    let best = lexicographic_search(&g, w.mode, &punish, &objectives, searches.get("threshold")?)?;
    if best.witness.as_ref().map(|b| b.optimum()) != Some(w.optimum()) {
        return Ok(Outcome::NotFound(format!("reported optimum {} is not optimal", r.optimum)));
    }
    if let (Some(t), Some(decision)) = (&r.threshold, r.decision) {
        if (*w.optimum() >= parse_rational(t)?) != decision {
            bail!("decision does not match the threshold");
        }
    }
    println!("valid: optimum {} for {}", r.optimum, r.objectives.join(", then "));
    Ok(Outcome::Done)
}
