//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p polieq --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num::{Signed, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use polieq::bimatrix::{nash_equilibria, parse_matrix, political_optimum, Bimatrix};
use polieq::enumeration::{exhaustive_optimize, optimize, EquilibriumWitness};
use polieq::equilibrium::{Mode, Variant};
use polieq::generate::{random_cnf, seeded_games, GameShape};
use polieq::mpg::{brute_force_values, punishment_values, PunishmentTable};
use polieq::rational::{int, ratio};
use polieq::reductions::{make_zero_sum, parse_cnf, reduce_3sat, DICTATOR};
use polieq::synthesis::{build_schedule, simulate_deviation, RewardMeter};
use polieq::{parse_game, Game, Rational};

const EXAMPLE: &str = include_str!("../fixtures/dictator_example.json");
const PRISONERS_LEFT: &str = include_str!("../fixtures/prisoners_left.json");
const PRISONERS_RIGHT: &str = include_str!("../fixtures/prisoners_right.json");
const THREE_CLAUSES: &str = include_str!("../fixtures/three_clauses.cnf");
const CONTRADICTION: &str = "p cnf 1 2\n1 0\n-1 0\n";

const RANDOM_GAMES: usize = 200;
const GAME_SEED: u64 = 2024;
const DEVIATIONS: usize = 500;
const DEVIATION_WINDOW: u64 = 20_000;
const DEVIATION_HORIZON: u64 = 100_000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&mut Context) -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Found {
    label: String,
    game: Game,
    witness: EquilibriumWitness,
}

/// Witnesses and (political, Nash) optima collected by the early criteria.
#[derive(Default)]
struct Context {
    found: Vec<Found>,
    optima: Vec<(String, Option<Rational>, Option<Rational>)>,
    matrices: Vec<(String, Bimatrix)>,
}

impl Context {
    fn keep(&mut self, label: impl Into<String>, game: &Game, witness: &EquilibriumWitness) {
        self.found.push(Found {
            label: label.into(),
            game: game.clone(),
            witness: witness.clone(),
        });
    }
}

fn check_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure!(elapsed < limit, "took {elapsed:.2?}, limit {limit:?}");
    Ok(())
}

fn optimum(w: &Option<EquilibriumWitness>) -> Option<Rational> {
    w.as_ref().map(|w| w.optimum().clone())
}

fn example_game(ctx: &mut Context) -> Outcome {
    let start = Instant::now();
    let g = parse_game(EXAMPLE).map_err(|e| e.to_string())?;
    let d = g.player("dictator").map_err(|e| e.to_string())?;
    let political = optimize(&g, Mode::political(d)).map_err(|e| e.to_string())?;
    let nash = optimize(&g, Mode::nash(d)).map_err(|e| e.to_string())?;
    let p = political.clone().ok_or("no political equilibrium")?;
    let n = nash.clone().ok_or("no Nash equilibrium")?;
    ensure!(*p.optimum() == int(1), "political optimum {}", p.optimum());
    ensure!(*n.optimum() == int(0), "Nash optimum {}", n.optimum());
    let play: Vec<String> = build_schedule(&g, &p)
        .map_err(|e| e.to_string())?
        .take(8)
        .map(|v| g.vertex_name(v).to_string())
        .collect();
    ensure!(play == ["1", "2", "5", "5", "5", "5", "5", "5"], "play {play:?}");
    check_time(start.elapsed(), Duration::from_secs(1))?;
    ctx.keep("example/political", &g, &p);
    ctx.keep("example/nash", &g, &n);
    ctx.optima.push(("example".into(), optimum(&political), optimum(&nash)));
    Ok(format!("political 1, Nash 0, play {}…", play[..4].join("·")))
}

fn prisoner_matrices(ctx: &mut Context) -> Outcome {
    let start = Instant::now();
    let left = parse_matrix(PRISONERS_LEFT).map_err(|e| e.to_string())?;
    let right = parse_matrix(PRISONERS_RIGHT).map_err(|e| e.to_string())?;
    let action = |m: &Bimatrix, names: &[String], label: &str| names.iter().position(|a| a == label).unwrap_or(m.dictator_actions.len());

    let l = political_optimum(&left);
    let (dd, dp) = (action(&left, &left.dictator_actions, "D"), action(&left, &left.dictator_actions, "P"));
    let od = action(&left, &left.opponent_actions, "D");
    let mut pure_p = vec![int(0); left.dictator_actions.len()];
    pure_p[dp] = int(1);
    ensure!(l.x == pure_p, "left mixture {:?}", l.x);
    ensure!(l.y[od] == int(1), "left opponent {:?}", l.y);
    ensure!((l.dictator_payoff.clone(), l.opponent_payoff.clone()) == (int(-5), int(-8)), "left payoffs ({}, {})", l.dictator_payoff, l.opponent_payoff);

    let r = political_optimum(&right);
    let mut mix = vec![int(0); right.dictator_actions.len()];
    mix[dd] = ratio(3, 4);
    mix[dp] = ratio(1, 4);
    ensure!(r.x == mix, "right mixture {:?}", r.x);
    ensure!(r.y[od] == int(1), "right opponent {:?}", r.y);
    ensure!(r.dictator_payoff == int(-2), "right dictator payoff {}", r.dictator_payoff);

    for (name, m) in [("left", &left), ("right", &right)] {
        let all = nash_equilibria(m).map_err(|e| e.to_string())?;
        ensure!(all.len() == 1, "{name}: {} Nash equilibria", all.len());
        let e = &all[0];
        let c_row = action(m, &m.dictator_actions, "C");
        let c_col = action(m, &m.opponent_actions, "C");
        ensure!(e.x[c_row] == int(1) && e.y[c_col] == int(1), "{name}: equilibrium {:?} {:?}", e.x, e.y);
        ensure!((e.dictator_payoff.clone(), e.opponent_payoff.clone()) == (int(-8), int(-8)), "{name}: Nash payoffs");
        ctx.matrices.push((name.into(), m.clone()));
    }
    check_time(start.elapsed(), Duration::from_secs(1))?;
    Ok("left (-5, -8) at P/D, right -2 at 3/4 D + 1/4 P, Nash C/C (-8, -8)".into())
}

fn sat_reduction(ctx: &mut Context) -> Outcome {
    let mut notes = Vec::new();
    for (name, text, expected) in [("three clauses", THREE_CLAUSES, 1), ("contradiction", CONTRADICTION, 0)] {
        let start = Instant::now();
        let f = parse_cnf(text, true).map_err(|e| e.to_string())?;
        let g = reduce_3sat(&f);
        if name == "three clauses" {
            ensure!(g.player_count() == 7 && g.vertex_count() == 29, "{name}: {} players, {} vertices", g.player_count(), g.vertex_count());
        }
        let d = g.player(DICTATOR).map_err(|e| e.to_string())?;
        let w = optimize(&g, Mode::political(d)).map_err(|e| e.to_string())?.ok_or("no witness")?;
        ensure!(*w.optimum() == int(expected), "{name}: optimum {}", w.optimum());
        let nash = optimize(&g, Mode::nash(d)).map_err(|e| e.to_string())?;
        ctx.optima.push((format!("3sat/{name}"), Some(w.optimum().clone()), optimum(&nash)));
        ctx.keep(format!("3sat/{name}"), &g, &w);
        check_time(start.elapsed(), Duration::from_secs(300))?;

        let start = Instant::now();
        let z = make_zero_sum(&g).map_err(|e| e.to_string())?;
        for e in 0..z.edge_count() {
            let sum: Rational = z.players().map(|p| z.reward(e, p).clone()).sum();
            ensure!(sum.is_zero(), "{name}: edge {e} sums to {sum}");
        }
        let wz = optimize(&z, Mode::political(d)).map_err(|e| e.to_string())?.ok_or("no zero-sum witness")?;
        let want = if expected == 1 { int(1) } else { int(-1) };
        ensure!(*wz.optimum() == want, "{name}: zero-sum optimum {}", wz.optimum());
        ctx.keep(format!("3sat/{name}/zero-sum"), &z, &wz);
        check_time(start.elapsed(), Duration::from_secs(300))?;
        notes.push(format!("{name} {expected}/{want}"));
    }
    Ok(format!("7 players, 29 vertices; optima {}", notes.join(", ")))
}

fn enumeration_oracle(ctx: &mut Context) -> Outcome {
    let start = Instant::now();
    let games = seeded_games(GAME_SEED, RANDOM_GAMES, GameShape::default());
    let modes = [
        ("political/owner", Mode::political(0)),
        ("political/literal", Mode::political(0).with_variant(Variant::Literal)),
        ("nash/owner", Mode::nash(0)),
        ("nash/literal", Mode::nash(0).with_variant(Variant::Literal)),
    ];
    type Row = Vec<(String, Option<EquilibriumWitness>, Option<EquilibriumWitness>)>;
    let rows: Vec<Result<Row, String>> = games
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let punish = PunishmentTable::compute(g);
            let mut row = Vec::new();
            for (name, mode) in modes {
                let a = optimize(g, mode).map_err(|e| format!("game {i} {name}: {e}"))?;
                let b = exhaustive_optimize(g, mode).map_err(|e| format!("game {i} {name}: {e}"))?;
                if optimum(&a) != optimum(&b) {
                    return Err(format!("game {i} {name}: threshold {:?} vs exhaustive {:?}", optimum(&a), optimum(&b)));
                }
                for w in a.iter().chain(b.iter()) {
                    w.verify(g, &punish).map_err(|e| format!("game {i} {name}: {e}"))?;
                }
                row.push((name.to_string(), a, b));
            }
            Ok(row)
        })
        .collect();
    let mut witnesses = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        let g = &games[i];
        for (name, a, b) in &row {
            for (which, w) in [("threshold", a), ("exhaustive", b)] {
                if let Some(w) = w {
                    ctx.keep(format!("random {i}/{name}/{which}"), g, w);
                    witnesses += 1;
                }
            }
        }
        ctx.optima.push((format!("random {i}/owner"), optimum(&row[0].1), optimum(&row[2].1)));
        ctx.optima.push((format!("random {i}/literal"), optimum(&row[1].1), optimum(&row[3].1)));
    }
    check_time(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!("{RANDOM_GAMES} games × 4 settings agree; {witnesses} witnesses verified"))
}

fn punishment_oracle(_: &mut Context) -> Outcome {
    let games = seeded_games(GAME_SEED + 1, RANDOM_GAMES, GameShape::default());
    let checked: Result<Vec<usize>, String> = games
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            for p in g.players() {
                let vi = punishment_values(g, p);
                let bf = brute_force_values(g, p).map_err(|e| format!("game {i}: {e}"))?;
                if vi != bf {
                    return Err(format!("game {i} player {p}: {vi:?} vs {bf:?}"));
                }
                if let Some(r) = vi.iter().find(|r| *r.denom() > (g.vertex_count() as i64).into()) {
                    return Err(format!("game {i} player {p}: value {r} has a denominator above |V|"));
                }
            }
            Ok(g.player_count())
        })
        .collect();
    let pairs: usize = checked?.iter().sum();
    Ok(format!("{RANDOM_GAMES} games, {pairs} punishment games agree"))
}

fn dominance(ctx: &mut Context) -> Outcome {
    ensure!(!ctx.optima.is_empty(), "no games collected");
    for (label, political, nash) in &ctx.optima {
        match (political, nash) {
            (Some(p), Some(n)) => ensure!(p >= n, "{label}: political {p} < Nash {n}"),
            (None, Some(n)) => return Err(format!("{label}: Nash {n} but no political equilibrium")),
            _ => {}
        }
    }
    for (label, m) in &ctx.matrices {
        let p = political_optimum(m);
        for e in nash_equilibria(m).map_err(|e| e.to_string())? {
            ensure!(p.dictator_payoff >= e.dictator_payoff, "{label}: political {} < Nash {}", p.dictator_payoff, e.dictator_payoff);
        }
    }
    Ok(format!("{} games, {} matrices", ctx.optima.len(), ctx.matrices.len()))
}

fn convergence(ctx: &mut Context) -> Outcome {
    ensure!(!ctx.found.is_empty(), "no witnesses collected");
    let tolerance = ratio(1, 20);
    let results: Result<Vec<(bool, f64)>, String> = ctx
        .found
        .par_iter()
        .filter(|f| !f.witness.profile.support().is_empty())
        .map(|f| {
            let mut s = build_schedule(&f.game, &f.witness).map_err(|e| format!("{}: {e}", f.label))?;
            let multi = s.islands().len() > 1;
            let n: u64 = if multi { 1_000_000 } else { 100_000 };
            let mut meter = RewardMeter::new(&f.game);
            for _ in 0..n {
                meter.add(s.step().edge);
            }
            for (p, (mean, want)) in meter.means().iter().zip(f.witness.rewards()).enumerate() {
                let gap = (mean - want).abs();
                if gap > tolerance {
                    return Err(format!("{}: {} mean {mean} vs {want}", f.label, f.game.player_name(p)));
                }
            }
            let fraction = s.stats().transfer_fraction();
            if fraction > 0.01 {
                return Err(format!("{}: transfer fraction {fraction:.4}", f.label));
            }
            Ok((multi, fraction))
        })
        .collect();
    let results = results?;
    let multi = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(format!("{} witnesses ({multi} multi-island), worst transfer fraction {worst:.5}", results.len()))
}

fn no_profitable_deviation(ctx: &mut Context) -> Outcome {
    ensure!(!ctx.found.is_empty(), "no witnesses collected");
    let tolerance = ratio(1, 20);
    let results: Result<Vec<usize>, String> = ctx
        .found
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let g = &f.game;
            let w = &f.witness;
            let punish = PunishmentTable::compute(g);
            let fail = |m: String| format!("{}: {m}", f.label);
            let start = build_schedule(g, w).map_err(|e| fail(e.to_string()))?;
            let eligible = |v| w.mode.is_constrained(g.owner(v)) && g.out_edges(v).len() >= 2;

            let mut s = start.clone();
            let mut positions = Vec::new();
            for t in 0..DEVIATION_WINDOW {
                if eligible(s.current()) {
                    positions.push(t);
                }
                s.step();
            }
            if positions.is_empty() {
                return Ok(0);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            let mut picks: Vec<u64> = (0..DEVIATIONS).map(|_| *positions.choose(&mut rng).unwrap()).collect();
            picks.sort_unstable();

            let mut s = start;
            let mut t = 0;
            for at in picks {
                s.fast_forward(at - t);
                t = at;
                let v = s.current();
                let scheduled = s.clone().step().edge;
                let others: Vec<_> = g.out_edges(v).iter().copied().filter(|&e| e != scheduled).collect();
                let alt = others[rng.random_range(0..others.len())];
                let deviator = g.owner(v);
                let mean = simulate_deviation(g, &s, deviator, 0, alt, DEVIATION_HORIZON, &punish).map_err(|e| fail(e.to_string()))?;
                let bound = &w.rewards()[deviator] + &tolerance;
                if mean > bound {
                    return Err(fail(format!(
                        "{} gains {mean} > {} by leaving {} at step {at}",
                        g.player_name(deviator),
                        w.rewards()[deviator],
                        g.vertex_name(v)
                    )));
                }
            }
            Ok(DEVIATIONS)
        })
        .collect();
    let results = results?;
    let tested = results.iter().filter(|&&n| n > 0).count();
    Ok(format!(
        "{} deviations over {tested} witnesses; {} witnesses give no constrained player a choice",
        results.iter().sum::<usize>(),
        results.len() - tested
    ))
}

fn hardness_corpus(_: &mut Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED);
    let shapes = [(3, 4), (2, 8), (1, 4)];
    let formulas: Vec<_> = (0..45)
        .map(|i| {
            let (n, m) = shapes[i % 3];
            random_cnf(&mut rng, n, m)
        })
        .collect();
    let checked: Result<Vec<bool>, String> = formulas
        .par_iter()
        .map(|f| {
            let g = reduce_3sat(f);
            let d = g.player(DICTATOR).map_err(|e| e.to_string())?;
            let sat = f.is_satisfiable();
            let w = optimize(&g, Mode::political(d)).map_err(|e| e.to_string())?.ok_or("no witness")?;
            if (*w.optimum() == int(1)) != sat {
                return Err(format!("optimum {} for a formula with satisfiable = {sat}\n{}", w.optimum(), f.to_dimacs()));
            }
            let z = make_zero_sum(&g).map_err(|e| e.to_string())?;
            let wz = optimize(&z, Mode::political(d)).map_err(|e| e.to_string())?.ok_or("no zero-sum witness")?;
            let want = if sat { int(1) } else { int(-1) };
            if *wz.optimum() != want {
                return Err(format!("zero-sum optimum {} for satisfiable = {sat}", wz.optimum()));
            }
            Ok(sat)
        })
        .collect();
    let checked = checked?;
    let sat = checked.iter().filter(|s| **s).count();
    Ok(format!(
        "asymptotic claims are theoretical; semantic corpus of {} formulas ({sat} satisfiable) agrees with a SAT oracle",
        checked.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("example game optima", example_game),
        ("prisoner matrices", prisoner_matrices),
        ("3SAT reduction", sat_reduction),
        ("enumeration oracle", enumeration_oracle),
        ("punishment oracle", punishment_oracle),
        ("dominance", dominance),
        ("scheduler convergence", convergence),
        ("no profitable deviation", no_profitable_deviation),
        ("hardness corpus", hardness_corpus),
    ];
    let mut ctx = Context::default();
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut ctx))).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name} ({elapsed:.2?}): {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
