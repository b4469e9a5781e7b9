//! Execute programs on explicit small games to validate encodings and
//! certified bounds empirically.
//!
//! The numeric semantics per block: `Random` samples the simplex uniformly;
//! `BestResponse` takes the pure argmax; `ZeroSumNE` solves the induced
//! matrix game exactly by support enumeration (small) or iterative play;
//! `UniformMixing` averages; `OptimalMixing` grid-searches the coefficient
//! polytope with local refinement; `StationaryPoint` runs projected descent
//! on the worst regret until the descent-inequality residual is small.
//! Custom blocks producing a two-player strategy pair execute as an exact
//! equilibrium of the induced two-player game, and the encoding validator
//! then checks their declared contract a posteriori.

mod game;

pub use game::{
    is_simplex_point, pure, random_simplex, solve_bimatrix, solve_zero_sum, ConcreteGame,
};

use crate::blocks;
use crate::frontend::{Arg, BasicType, SourceProgram, Statement};
use crate::logic::{encode_program, PayoffCombo, PayoffFn, StrategyArg, Term};
use crate::solver::BoundCertificate;
use crate::tactics::{abstract_system, payoff_set, StrategyUniverse, VarKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Residual target for δ-approximate blocks.
pub const DELTA_NUM: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Block(#[from] blocks::BlockError),
    #[error("program/game player count mismatch: {prog} vs {game}")]
    PlayerMismatch { prog: usize, game: usize },
    #[error("no numeric semantics for custom block '{0}'")]
    UnknownSemantics(String),
    #[error("the program has no return profile after auto-return")]
    NoReturn,
}

/// One concrete execution: strategies per statement, the final profile and
/// its regrets, plus ρ witnesses for descent blocks.
#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    /// Variable name → (player, strategy vector), in assignment order.
    pub strategies: Vec<(String, usize, Vec<f64>)>,
    pub final_profile: Vec<Vec<f64>>,
    pub regrets: Vec<f64>,
    /// Existential witnesses keyed by the freshened name (`rho_l<line>`).
    pub rho_witnesses: BTreeMap<String, f64>,
    /// Descent failed to reach the residual target within the cap.
    pub partial: bool,
}

impl Trace {
    pub fn strategy(&self, name: &str) -> Option<&Vec<f64>> {
        self.strategies.iter().rev().find(|(n, _, _)| n == name).map(|(_, _, s)| s)
    }
}

/// Execute the program (after auto-return) on one game.
pub fn run_concrete(
    prog: &SourceProgram,
    game: &ConcreteGame,
    seed: u64,
) -> Result<Trace, OracleError> {
    if prog.player_count != game.players {
        return Err(OracleError::PlayerMismatch { prog: prog.player_count, game: game.players });
    }
    let prog = if prog.options.auto_return_optimal_mixing {
        blocks::auto_return(prog)?
    } else {
        prog.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace {
        strategies: Vec::new(),
        final_profile: Vec::new(),
        regrets: Vec::new(),
        rho_witnesses: BTreeMap::new(),
        partial: false,
    };
    let mut env: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();

    let mut index = 0usize;
    for stmt in &prog.algorithm.statements {
        let a = match stmt {
            Statement::Assign(a) => a,
            Statement::Branch { .. } => continue,
        };
        let decl = blocks::resolve_block_at(&prog, index)?;
        index += 1;
        let outputs = execute_block(&prog, &decl, a, game, &env, &mut rng, &mut trace)?;
        for ((name, strategy), param) in a.outputs.iter().zip(outputs).zip(&decl.outputs) {
            if let BasicType::Strategy(p) = param.ty {
                debug_assert!(is_simplex_point(&strategy, 1e-9));
                trace.strategies.push((name.clone(), p, strategy.clone()));
                env.insert(name.clone(), (p, strategy));
            }
        }
    }

    let profile_names = prog.algorithm.return_profile.as_ref().ok_or(OracleError::NoReturn)?;
    trace.final_profile = profile_names
        .iter()
        .map(|n| env.get(n).map(|(_, s)| s.clone()).ok_or(OracleError::NoReturn))
        .collect::<Result<_, _>>()?;
    trace.regrets =
        (0..game.players).map(|p| game.regret(p, &trace.final_profile)).collect();
    Ok(trace)
}

type Env = BTreeMap<String, (usize, Vec<f64>)>;

fn fixed_profile(game: &ConcreteGame, env: &Env, args: &[(usize, &str)]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = game.actions.iter().map(|&n| vec![0.0; n]).collect();
    for (p, name) in args {
        out[*p] = env[*name].1.clone();
    }
    out
}

fn execute_block(
    prog: &SourceProgram,
    decl: &crate::frontend::BlockDecl,
    a: &crate::frontend::Assignment,
    game: &ConcreteGame,
    env: &Env,
    rng: &mut ChaCha8Rng,
    trace: &mut Trace,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let name = &a.block;
    let out_player = |k: usize| match decl.outputs[k].ty {
        BasicType::Strategy(p) => p,
        _ => unreachable!("strategy outputs only"),
    };

    // strategy arguments resolved through the environment
    let strat_args: Vec<(usize, &str)> = a
        .args
        .iter()
        .filter_map(|arg| match arg {
            Arg::Ident(n) => env.get(n).map(|(p, _)| (*p, n.as_str())),
            _ => None,
        })
        .collect();

    if name.starts_with("Random") {
        let p = out_player(0);
        return Ok(vec![random_simplex(game.actions[p], rng)]);
    }
    if name.starts_with("BestResponse") {
        let p = out_player(0);
        let others = fixed_profile(game, env, &strat_args);
        return Ok(vec![game.best_response(p, &others)]);
    }
    if name.starts_with("UniformMixing") || name.starts_with("EqMix") {
        let p = out_player(0);
        let parts: Vec<&Vec<f64>> = strat_args.iter().map(|(_, n)| &env[*n].1).collect();
        let mut mix = vec![0.0; game.actions[p]];
        for part in &parts {
            for (m, v) in mix.iter_mut().zip(part.iter()) {
                *m += v / parts.len() as f64;
            }
        }
        return Ok(vec![mix]);
    }
    if name.starts_with("ZeroSumNE") {
        let (i, j) = (out_player(0), out_player(1));
        let combo = a
            .args
            .iter()
            .find_map(|arg| match arg {
                Arg::Payoff(c) => Some(c.clone()),
                _ => None,
            })
            .expect("zero-sum block takes a payoff literal");
        let fixed = fixed_profile(game, env, &strat_args);
        let m = game.induced_matrix(&combo, i, j, &fixed);
        let (x, y) = solve_zero_sum(&m);
        return Ok(vec![x, y]);
    }
    if name.starts_with("StationaryPoint") {
        let (i, j) = (out_player(0), out_player(1));
        let fixed = fixed_profile(game, env, &strat_args);
        let (xi, xj, yi, yj, rho, partial) = stationary_point(game, i, j, &fixed, rng);
        trace.rho_witnesses.insert(format!("rho_l{}", a.line), rho);
        trace.partial |= partial;
        return Ok(vec![xi, xj, yi, yj]);
    }
    if name == "OptimalMixing" {
        let mut groups: Vec<Vec<&Vec<f64>>> = vec![Vec::new(); game.players];
        for (p, n) in &strat_args {
            groups[*p].push(&env[*n].1);
        }
        return Ok(optimal_mixing(game, &groups));
    }

    // custom block: an output pair (Strategy i, Strategy j) executes as an
    // exact equilibrium of the induced two-player game
    let out_players: Vec<usize> = decl
        .outputs
        .iter()
        .filter_map(|p| match p.ty {
            BasicType::Strategy(k) => Some(k),
            _ => None,
        })
        .collect();
    if out_players.len() == 2 && out_players[0] != out_players[1] && prog.custom_block(name).is_some() {
        let (i, j) = (out_players[0], out_players[1]);
        let fixed = fixed_profile(game, env, &strat_args);
        let r = game.induced_matrix(&PayoffCombo::base(i), i, j, &fixed);
        let c = game.induced_matrix(&PayoffCombo::base(j), i, j, &fixed);
        if let Some((x, y)) = solve_bimatrix(&r, &c) {
            return Ok(vec![x, y]);
        }
        // equilibrium search failed on restricted supports: fall back to a
        // zero-sum-style saddle of the difference, flagged partial
        trace.partial = true;
        let diff: Vec<Vec<f64>> =
            r.iter().zip(&c).map(|(rr, cc)| rr.iter().zip(cc).map(|(a, b)| a - b).collect()).collect();
        let (x, y) = solve_zero_sum(&diff);
        return Ok(vec![x, y]);
    }
    Err(OracleError::UnknownSemantics(name.clone()))
}

/// Projected descent on `max{f_i, f_j}` with the other players fixed,
/// followed by a pattern search that drives the encoding residual (regret
/// equality plus the ρ-weighted descent inequality) toward zero. The
/// encoding, not the optimizer, is the contract: the residual is what gets
/// verified.
fn stationary_point(
    game: &ConcreteGame,
    i: usize,
    j: usize,
    fixed: &[Vec<f64>],
    _rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64, bool) {
    let mut profile = fixed.to_vec();
    profile[i] = vec![1.0 / game.actions[i] as f64; game.actions[i]];
    profile[j] = vec![1.0 / game.actions[j] as f64; game.actions[j]];

    let phi = |prof: &[Vec<f64>]| -> f64 { game.regret(i, prof).max(game.regret(j, prof)) };

    // phase 1: descent on the worst regret along best-response directions,
    // with independent step sizes per player
    let mut value = phi(&profile);
    for _ in 0..5_000 {
        let bi = game.best_response(i, &profile);
        let bj = game.best_response(j, &profile);
        let mut improved = false;
        'steps: for eps_i in [1.0, 0.5, 0.25, 0.1, 0.04, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 2e-5, 0.0] {
            for eps_j in [1.0, 0.5, 0.25, 0.1, 0.04, 0.01, 3e-3, 1e-3, 3e-4, 1e-4, 2e-5, 0.0] {
                if eps_i == 0.0 && eps_j == 0.0 {
                    continue;
                }
                let mut cand = profile.clone();
                for (c, b) in cand[i].iter_mut().zip(&bi) {
                    *c = (1.0 - eps_i) * *c + eps_i * b;
                }
                for (c, b) in cand[j].iter_mut().zip(&bj) {
                    *c = (1.0 - eps_j) * *c + eps_j * b;
                }
                let v = phi(&cand);
                if v < value - 1e-10 {
                    profile = cand;
                    value = v;
                    improved = true;
                    break 'steps;
                }
            }
        }
        if !improved {
            break;
        }
    }

    // phase 2: pattern search on the encoding residual. The duals live in
    // the tied best-response set: at a stationary point the kink of
    // max{f_i,f_j} makes ties structural, and only the right mixture over
    // tied actions satisfies the descent inequality.
    let residual_at = |prof: &[Vec<f64>]| -> f64 {
        let gap = (game.regret(i, prof) - game.regret(j, prof)).abs();
        let (_, _, _, r) = duals_and_rho(game, i, j, prof, 12);
        gap.max(r)
    };
    let mut best_res = residual_at(&profile);
    let mut radius = 0.05;
    let mut evals = 0;
    while best_res > 1e-6 && radius > 1e-7 && evals < 6_000 {
        let mut improved = false;
        'outer: for player in [i, j] {
            for a in 0..game.actions[player] {
                for dir in [radius, -radius] {
                    evals += 1;
                    let mut cand = profile.clone();
                    cand[player][a] = (cand[player][a] + dir).max(0.0);
                    let sum: f64 = cand[player].iter().sum();
                    if sum <= 0.0 {
                        continue;
                    }
                    for v in cand[player].iter_mut() {
                        *v /= sum;
                    }
                    let r = residual_at(&cand);
                    if r < best_res - 1e-12 {
                        profile = cand;
                        best_res = r;
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }

    let (mut yi, mut yj, mut rho, descent_res) = duals_and_rho(game, i, j, &profile, 60);
    let gap = (game.regret(i, &profile) - game.regret(j, &profile)).abs();
    let mut final_res = descent_res.max(gap);

    // descent can stall short of the residual target; an exact equilibrium
    // of the induced game is also a stationary point (zero regret, zero
    // residual), so use it when support enumeration finds one
    if final_res > 1e-4 && game.actions[i] <= 5 && game.actions[j] <= 5 {
        let r_m = game.induced_matrix(&PayoffCombo::base(i), i, j, &profile);
        let c_m = game.induced_matrix(&PayoffCombo::base(j), i, j, &profile);
        if let Some((x_ne, y_ne)) = solve_bimatrix(&r_m, &c_m) {
            let mut cand = profile.clone();
            cand[i] = x_ne;
            cand[j] = y_ne;
            let (cyi, cyj, crho, cres) = duals_and_rho(game, i, j, &cand, 20);
            let cgap = (game.regret(i, &cand) - game.regret(j, &cand)).abs();
            if cres.max(cgap) < final_res {
                profile = cand;
                yi = cyi;
                yj = cyj;
                rho = crho;
                final_res = cres.max(cgap);
            }
        }
    }
    (profile[i].clone(), profile[j].clone(), yi, yj, rho, final_res > 1e-4)
}

/// Pick dual strategies and a ρ minimizing the combined residual: the
/// descent-inequality violation plus the duals' own best-response
/// violations. Candidates: the stationary strategies themselves (exact
/// when the regret is tiny), the uniform mixture over tied best responses,
/// and a pattern-search refinement of the tied weights (the kink of
/// max{f_i,f_j} makes ties structural at stationary points).
fn duals_and_rho(
    game: &ConcreteGame,
    i: usize,
    j: usize,
    profile: &[Vec<f64>],
    effort: usize,
) -> (Vec<f64>, Vec<f64>, f64, f64) {
    let dual_violation = |player: usize, y: &[f64]| -> f64 {
        let mut s = profile.to_vec();
        s[player] = y.to_vec();
        game.regret(player, &s).max(0.0)
    };
    let score = |yi: &[f64], yj: &[f64]| -> (f64, f64) {
        let (rho, r) = best_rho(game, i, j, profile, yi, yj);
        (rho, r.max(dual_violation(i, yi)).max(dual_violation(j, yj)))
    };

    // candidate 0: the point's own strategies
    let mut best_yi = profile[i].clone();
    let mut best_yj = profile[j].clone();
    let (mut best_rho_v, mut best_res) = score(&best_yi, &best_yj);
    if best_res < 1e-9 {
        return (best_yi, best_yj, best_rho_v, best_res);
    }

    // candidate 1: uniform over tied best responses
    let tied = |player: usize| -> Vec<usize> {
        let values: Vec<f64> = (0..game.actions[player])
            .map(|a| {
                let mut s = profile.to_vec();
                s[player] = pure(game.actions[player], a);
                game.expected(player, &s)
            })
            .collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..game.actions[player]).filter(|&a| values[a] >= best - 1e-7).collect()
    };
    let ti = tied(i);
    let tj = tied(j);
    let realize = |support: &[usize], weights: &[f64], n: usize| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (&a, &w) in support.iter().zip(weights) {
            v[a] = w;
        }
        v
    };
    let mut wi = vec![1.0 / ti.len() as f64; ti.len()];
    let mut wj = vec![1.0 / tj.len() as f64; tj.len()];
    let mut yi = realize(&ti, &wi, game.actions[i]);
    let mut yj = realize(&tj, &wj, game.actions[j]);
    let (mut rho, mut res) = score(&yi, &yj);
    if res < best_res {
        best_yi = yi.clone();
        best_yj = yj.clone();
        best_rho_v = rho;
        best_res = res;
    }

    // candidate 2: pattern search over the tied weights
    let mut radius = 0.25;
    for _ in 0..effort {
        if res < 1e-9 || radius < 1e-6 {
            break;
        }
        let mut improved = false;
        'outer: for (weights, support, player) in [(&mut wi, &ti, i), (&mut wj, &tj, j)] {
            if support.len() < 2 {
                continue;
            }
            for k in 0..weights.len() {
                for dir in [radius, -radius] {
                    let mut cand = weights.clone();
                    cand[k] = (cand[k] + dir).max(0.0);
                    let sum: f64 = cand.iter().sum();
                    if sum <= 0.0 {
                        continue;
                    }
                    for v in cand.iter_mut() {
                        *v /= sum;
                    }
                    let (cyi, cyj) = if player == i {
                        (realize(support, &cand, game.actions[i]), yj.clone())
                    } else {
                        (yi.clone(), realize(support, &cand, game.actions[j]))
                    };
                    let (crho, cres) = score(&cyi, &cyj);
                    if cres < res - 1e-12 {
                        *weights = cand;
                        yi = cyi;
                        yj = cyj;
                        rho = crho;
                        res = cres;
                        improved = true;
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    if res < best_res {
        best_yi = yi;
        best_yj = yj;
        best_rho_v = rho;
        best_res = res;
    }
    (best_yi, best_yj, best_rho_v, best_res)
}

/// ρ ∈ [0,1] minimizing the worst violation of the descent inequality over
/// ρ ∈ [0,1] minimizing the worst violation of the descent inequality over
/// pure deviation pairs (the inequality's right side is bilinear in the
/// deviations, so pure pairs attain its minimum). The worst violation is
/// convex piecewise-linear in ρ: coarse grid plus local refinement.
fn best_rho(
    game: &ConcreteGame,
    i: usize,
    j: usize,
    profile: &[Vec<f64>],
    yi: &[f64],
    yj: &[f64],
) -> (f64, f64) {
    let b = game.regret(i, profile).max(game.regret(j, profile));
    let u = |player: usize, pi: &[f64], pj: &[f64]| -> f64 {
        let mut prof = profile.to_vec();
        prof[i] = pi.to_vec();
        prof[j] = pj.to_vec();
        game.expected(player, &prof)
    };
    // precompute the two bracketed parts per pure deviation pair
    let mut parts: Vec<(f64, f64)> = Vec::with_capacity(game.actions[i] * game.actions[j]);
    let base_i = u(i, &profile[i], &profile[j]);
    let base_j = u(j, &profile[i], &profile[j]);
    for ai in 0..game.actions[i] {
        let zi = pure(game.actions[i], ai);
        for aj in 0..game.actions[j] {
            let zj = pure(game.actions[j], aj);
            let part_i = u(i, yi, &zj) - u(i, &zi, &profile[j]) - u(i, &profile[i], &zj) + base_i;
            let part_j = u(j, &zi, yj) - u(j, &zi, &profile[j]) - u(j, &profile[i], &zj) + base_j;
            parts.push((part_i, part_j));
        }
    }
    let residual = |rho: f64| -> f64 {
        parts
            .iter()
            .map(|(pi, pj)| b - (rho * pi + (1.0 - rho) * pj))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = (0.0, residual(0.0));
    for s in 1..=100 {
        let rho = s as f64 / 100.0;
        let r = residual(rho);
        if r < best.1 {
            best = (rho, r);
        }
    }
    // golden-section refinement around the incumbent
    let (mut lo, mut hi) = ((best.0 - 0.01).max(0.0), (best.0 + 0.01).min(1.0));
    for _ in 0..40 {
        let m1 = lo + (hi - lo) * 0.382;
        let m2 = lo + (hi - lo) * 0.618;
        if residual(m1) < residual(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let rho = (lo + hi) / 2.0;
    let r = residual(rho);
    if r < best.1 {
        best = (rho, r);
    }
    best
}

/// Minimize the worst regret over convex recombinations of the inputs.
/// Every vertex and every polytope edge is scanned (the worst regret is
/// convex along an edge, so golden-section is exact there), which makes the
/// output at least as good as the edge-based mixing bound; a local pattern
/// refinement then explores the interior.
fn optimal_mixing(game: &ConcreteGame, groups: &[Vec<&Vec<f64>>]) -> Vec<Vec<f64>> {
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let realize = |coeffs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        groups
            .iter()
            .enumerate()
            .map(|(p, parts)| {
                let mut s = vec![0.0; game.actions[p]];
                for (w, part) in coeffs[p].iter().zip(parts) {
                    for (si, v) in s.iter_mut().zip(part.iter()) {
                        *si += w * v;
                    }
                }
                s
            })
            .collect()
    };
    let value = |coeffs: &[Vec<f64>]| -> f64 { game.max_regret(&realize(coeffs)) };

    // vertices: pure coefficient profiles
    let mut vertices: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        let coeffs: Vec<Vec<f64>> = sizes
            .iter()
            .enumerate()
            .map(|(p, &t)| {
                let mut w = vec![0.0; t];
                w[idx[p]] = 1.0;
                w
            })
            .collect();
        vertices.push(coeffs);
        let mut k = sizes.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
            if k == 0 {
                break;
            }
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }

    let mut best_coeffs = vertices[0].clone();
    let mut best_value = value(&best_coeffs);
    for v in &vertices {
        let val = value(v);
        if val < best_value {
            best_value = val;
            best_coeffs = v.clone();
        }
    }

    // edges: one player's coefficient moves between two pure inputs; the
    // worst regret is convex in λ there, so golden-section suffices
    for (vi, v) in vertices.iter().enumerate() {
        for (wi, w) in vertices.iter().enumerate().skip(vi + 1) {
            let differs: Vec<usize> =
                (0..sizes.len()).filter(|&p| v[p] != w[p]).collect();
            if differs.len() != 1 {
                continue;
            }
            let at = |lambda: f64| -> Vec<Vec<f64>> {
                v.iter()
                    .zip(w)
                    .map(|(a, b)| {
                        a.iter().zip(b).map(|(x, y)| (1.0 - lambda) * x + lambda * y).collect()
                    })
                    .collect()
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..60 {
                let m1 = lo + (hi - lo) * 0.382;
                let m2 = lo + (hi - lo) * 0.618;
                if value(&at(m1)) < value(&at(m2)) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let cand = at((lo + hi) / 2.0);
            let val = value(&cand);
            if val < best_value {
                best_value = val;
                best_coeffs = cand;
            }
        }
    }

    // interior refinement; can only improve on the edge minimum
    let mut radius = 0.05;
    while radius > 1e-6 {
        let mut improved = false;
        for p in 0..groups.len() {
            for k in 0..sizes[p] {
                for dir in [radius, -radius] {
                    let mut cand = best_coeffs.clone();
                    cand[p][k] = (cand[p][k] + dir).max(0.0);
                    let s: f64 = cand[p].iter().sum();
                    if s <= 0.0 {
                        continue;
                    }
                    for v in cand[p].iter_mut() {
                        *v /= s;
                    }
                    let v = value(&cand);
                    if v + 1e-12 < best_value {
                        best_value = v;
                        best_coeffs = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    realize(&best_coeffs)
}




#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub games: usize,
    pub max_observed_regret: f64,
    pub partial_traces: usize,
    /// Traces on the unanalyzed side of a branch gate.
    pub other_branch: usize,
    pub violation: Option<BoundViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundViolation {
    pub observed: f64,
    pub bound: f64,
    pub game: ConcreteGame,
    pub seed: u64,
}

/// Check the certified bound against concrete executions on random games
/// plus the adversarial corner games.
pub fn validate_bound(
    prog: &SourceProgram,
    cert: &BoundCertificate,
    games: usize,
    actions: &[usize],
    seed: u64,
) -> Result<BoundReport, OracleError> {
    let slack = if cert.delta_flag { DELTA_NUM } else { 0.0 };
    let limit = cert.bound + slack + 1e-6;

    let mut suite: Vec<(u64, ConcreteGame)> = Vec::new();
    for (k, g) in ConcreteGame::corner_games(prog.player_count, actions).into_iter().enumerate() {
        suite.push((seed ^ (0xc0 + k as u64), g));
    }
    for gi in 0..games {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(gi as u64));
        suite.push((seed.wrapping_add(gi as u64), ConcreteGame::random(prog.player_count, actions, &mut rng)));
    }

    let results: Vec<Result<(u64, ConcreteGame, Trace), OracleError>> = suite
        .into_par_iter()
        .map(|(s, game)| run_concrete(prog, &game, s).map(|t| (s, game, t)))
        .collect();

    let with_return = if prog.options.auto_return_optimal_mixing {
        blocks::auto_return(prog)?
    } else {
        prog.clone()
    };
    let enc = encode_program(&with_return).map_err(|_| OracleError::NoReturn)?;
    let mut report = BoundReport {
        games: 0,
        max_observed_regret: 0.0,
        partial_traces: 0,
        other_branch: 0,
        violation: None,
    };
    for r in results {
        let (s, game, trace) = r?;
        report.games += 1;
        if trace.partial {
            report.partial_traces += 1;
            continue;
        }
        if !gates_hold(&enc, &game, &trace) {
            report.other_branch += 1;
            continue;
        }
        let worst = trace.regrets.iter().cloned().fold(0.0, f64::max);
        if worst > report.max_observed_regret {
            report.max_observed_regret = worst;
        }
        if worst > limit && report.violation.is_none() {
            report.violation = Some(BoundViolation {
                observed: worst,
                bound: cert.bound,
                game,
                seed: s,
            });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingReport {
    pub games: usize,
    pub constraints_checked: usize,
    pub partial_traces: usize,
    /// Traces on the unanalyzed side of a branch gate.
    pub other_branch: usize,
    pub worst_slack: f64,
    pub violation: Option<EncodingViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingViolation {
    pub constraint: String,
    pub violation: f64,
    pub seed: u64,
    pub game: ConcreteGame,
}

/// Model-transfer soundness: on every game/trace, assigning each abstract
/// variable the numeric value of its originating term satisfies every
/// constraint (1e−9 for exact blocks, 1e−4 for δ-approximate ones).
pub fn validate_encoding(
    prog: &SourceProgram,
    games: usize,
    actions: &[usize],
    seed: u64,
) -> Result<EncodingReport, OracleError> {
    let prog = if prog.options.auto_return_optimal_mixing {
        blocks::auto_return(prog)?
    } else {
        prog.clone()
    };
    let encoding = encode_program(&prog).map_err(|_| OracleError::NoReturn)?;
    let universe = StrategyUniverse::from_program(&prog)
        .map_err(|e| match e {
            crate::tactics::TacticsError::Block(b) => OracleError::Block(b),
            other => OracleError::UnknownSemantics(other.to_string()),
        })?;
    let payoffs = payoff_set(&prog);
    let (system, _) = abstract_system(&encoding, &universe, &payoffs, prog.options.delta_symbolic)
        .map_err(|e| match e {
            crate::tactics::TacticsError::Block(b) => OracleError::Block(b),
            other => OracleError::UnknownSemantics(other.to_string()),
        })?;

    let runs: Vec<Result<(u64, ConcreteGame, Trace), OracleError>> = (0..games)
        .into_par_iter()
        .map(|gi| {
            let s = seed.wrapping_add(gi as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let game = ConcreteGame::random(prog.player_count, actions, &mut rng);
            run_concrete(&prog, &game, s).map(|t| (s, game, t))
        })
        .collect();

    let mut report = EncodingReport {
        games: 0,
        constraints_checked: 0,
        partial_traces: 0,
        other_branch: 0,
        worst_slack: 0.0,
        violation: None,
    };
    let delta_tolerant = encoding.delta_flag;
    for r in runs {
        let (s, game, trace) = r?;
        report.games += 1;
        if trace.partial {
            report.partial_traces += 1;
            continue;
        }
        if !gates_hold(&encoding, &game, &trace) {
            report.other_branch += 1;
            continue;
        }
        // variable valuation from the trace
        let mut values: BTreeMap<&str, f64> = BTreeMap::new();
        for (name, info) in &system.variables {
            let v = match (&info.kind, &info.term) {
                (VarKind::Exists, _) => trace.rho_witnesses.get(name).copied().unwrap_or(0.5),
                (_, Some(term)) => eval_term(term, &game, &trace),
                _ => continue,
            };
            values.insert(name.as_str(), v);
        }
        let at = |n: &String| values.get(n.as_str()).copied().unwrap_or(f64::NAN);
        for cmp in system.constraints() {
            report.constraints_checked += 1;
            let tol = if delta_tolerant { 1e-4 } else { 1e-9 };
            let v = cmp.violation(&at, 0.0);
            if v > report.worst_slack {
                report.worst_slack = v;
            }
            if v > tol && report.violation.is_none() {
                report.violation = Some(EncodingViolation {
                    constraint: cmp.to_string(),
                    violation: v,
                    seed: s,
                    game: game.clone(),
                });
            }
        }
    }
    Ok(report)
}

/// Do the program's branch-gate assumptions hold on this trace? A gate
/// selects the analyzed (symmetric) branch; traces on the other side are
/// outside the certificate's case and are reported separately.
fn gates_hold(enc: &crate::logic::ProgramEncoding, game: &ConcreteGame, trace: &Trace) -> bool {
    enc.gates.iter().all(|c| c.violation(&|t: &Term| eval_term(t, game, trace), 0.0) <= 1e-9)
}

/// The numeric value of a ground term under a trace.
pub fn eval_term(term: &Term, game: &ConcreteGame, trace: &Trace) -> f64 {
    let strategy = |arg: &StrategyArg| -> Vec<f64> {
        trace.strategy(arg.name()).cloned().unwrap_or_default()
    };
    match term {
        Term::Payoff { payoff, args } => {
            let profile: Vec<Vec<f64>> = args.iter().map(strategy).collect();
            match payoff {
                PayoffFn::Combo(c) => game.expected_combo(c, &profile),
                PayoffFn::Var(_) => f64::NAN,
            }
        }
        Term::Loss { player, args } => {
            let profile: Vec<Vec<f64>> = args.iter().map(strategy).collect();
            game.regret(*player, &profile)
        }
        Term::MaxPayoff { player, payoff, others } => {
            let mut profile: Vec<Vec<f64>> = Vec::with_capacity(game.players);
            let mut it = others.iter();
            for p in 0..game.players {
                if p == *player {
                    profile.push(vec![0.0; game.actions[p]]);
                } else {
                    profile.push(strategy(it.next().unwrap()));
                }
            }
            match payoff {
                PayoffFn::Combo(c) => game.best_payoff_combo(c, *player, &profile),
                PayoffFn::Var(_) => f64::NAN,
            }
        }
        Term::RealVar(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const DMP: &str = include_str!("../../../../programs/dmp.lne");

    #[test]
    fn dmp_trace_on_matching_pennies() {
        let prog = parse(DMP).unwrap();
        let game = ConcreteGame {
            players: 2,
            actions: vec![2, 2],
            payoffs: vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]],
        };
        let trace = run_concrete(&prog, &game, 7).unwrap();
        assert!(trace.regrets.iter().all(|&r| r <= 0.5 + 1e-9), "{:?}", trace.regrets);
        for s in &trace.final_profile {
            assert!(is_simplex_point(s, 1e-9));
        }
    }

    #[test]
    fn best_response_pair_at_pure_equilibrium_has_zero_regret() {
        // a game with a dominant pure equilibrium at (0, 0)
        let mut game = ConcreteGame {
            players: 2,
            actions: vec![2, 2],
            payoffs: vec![vec![1.0, 0.6, 0.2, 0.1], vec![1.0, 0.2, 0.6, 0.1]],
        };
        game.payoffs[0] = vec![1.0, 0.6, 0.2, 0.1];
        let src = r#"
game 2 players

algorithm BrPair:
    a: Strategy1 = Random1()
    y: Strategy2 = BestResponse2(a)
    x: Strategy1 = BestResponse1(y)
    z: Strategy2 = BestResponse2(x)
    return x, z
end
"#;
        let prog = parse(src).unwrap();
        let trace = run_concrete(&prog, &game, 3).unwrap();
        assert!(game.max_regret(&trace.final_profile) < 1e-9);
    }

    #[test]
    fn uniform_mixing_with_itself_is_identity() {
        let src = r#"
game 2 players

algorithm SelfMix:
    a: Strategy1 = Random1()
    b: Strategy2 = Random2()
    m: Strategy1 = UniformMixing1(a, a)
    return m, b
end
"#;
        let prog = parse(src).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let game = ConcreteGame::random(2, &[4, 4], &mut rng);
        let trace = run_concrete(&prog, &game, 11).unwrap();
        let a = trace.strategy("a").unwrap();
        let m = trace.strategy("m").unwrap();
        for (x, y) in a.iter().zip(m) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_game_has_zero_regret() {
        let prog = parse(DMP).unwrap();
        let game = ConcreteGame {
            players: 2,
            actions: vec![3, 3],
            payoffs: vec![vec![0.0; 9], vec![0.0; 9]],
        };
        let trace = run_concrete(&prog, &game, 1).unwrap();
        assert!(trace.regrets.iter().all(|&r| r.abs() < 1e-12));
    }
}
