//! The standard building-block library.
//!
//! Every block is materialized as an ordinary [`BlockDecl`] — signature plus
//! encoding over formal names — so user-declared and standard blocks flow
//! through the same statement encoder. Standard blocks are templates over
//! player indices: `BestResponse2`, `ZeroSumNE12`, `StationaryPoint13`, …
//! `EqMix` is an alias of `UniformMixing`.

mod optmix;

pub use optmix::{
    l_star_expr, line_value, t_e_expr, t_e_value, EdgeBoundSpec, MixingError, MAX_EDGES,
    MAX_VERTICES,
};

use crate::frontend::{Arg, Assignment, BasicType, BlockDecl, Param, SourceProgram, Statement};
use crate::logic::{
    AtomicProperty, Comparison, ExistsReal, Expr, Formula, PayoffFn, Rational, StrategyArg,
    StrategyQuant, Term, TermExpr,
};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BlockError {
    #[error("unknown building block '{0}'")]
    Unknown(String),
    #[error("'{block}' takes {expected} inputs, {given} given")]
    Arity { block: String, expected: usize, given: usize },
    #[error("'{block}': {msg}")]
    Index { block: String, msg: String },
    #[error(transparent)]
    Mixing(#[from] MixingError),
    #[error("auto return: player {} constructs no strategy to mix", player + 1)]
    NoStrategyForPlayer { player: usize },
}

/// True when `name` denotes a standard block valid for `r` players.
pub fn is_builtin_name(name: &str, r: usize) -> bool {
    parse_builtin(name, r).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Builtin {
    Random(usize),
    BestResponse(usize),
    UniformMixing(usize),
    ZeroSumNe(usize, usize),
    StationaryPoint(usize, usize),
    OptimalMixing,
}

fn parse_builtin(name: &str, r: usize) -> Option<Builtin> {
    let one_index = |rest: &str| -> Option<usize> {
        rest.parse::<usize>().ok().filter(|&i| i >= 1 && i <= r).map(|i| i - 1)
    };
    let two_indices = |rest: &str| -> Option<(usize, usize)> {
        let digits: Vec<u32> = rest.chars().map(|c| c.to_digit(10)).collect::<Option<_>>()?;
        if digits.len() != 2 {
            return None;
        }
        let (i, j) = (digits[0] as usize, digits[1] as usize);
        if i >= 1 && i <= r && j >= 1 && j <= r && i != j {
            Some((i - 1, j - 1))
        } else {
            None
        }
    };
    if name == "OptimalMixing" {
        return Some(Builtin::OptimalMixing);
    }
    if let Some(rest) = name.strip_prefix("Random") {
        return one_index(rest).map(Builtin::Random);
    }
    if let Some(rest) = name.strip_prefix("BestResponse") {
        return one_index(rest).map(Builtin::BestResponse);
    }
    if let Some(rest) = name.strip_prefix("UniformMixing") {
        return one_index(rest).map(Builtin::UniformMixing);
    }
    if let Some(rest) = name.strip_prefix("EqMix") {
        return one_index(rest).map(Builtin::UniformMixing);
    }
    if let Some(rest) = name.strip_prefix("ZeroSumNE") {
        return two_indices(rest).map(|(i, j)| Builtin::ZeroSumNe(i, j));
    }
    if let Some(rest) = name.strip_prefix("StationaryPoint") {
        return two_indices(rest).map(|(i, j)| Builtin::StationaryPoint(i, j));
    }
    None
}

/// Resolve the block used by assignment `index`, synthesizing standard-block
/// declarations on demand. Custom declarations shadow nothing: a name clash
/// with a standard block is rejected by the typechecker.
pub fn resolve_block_at(prog: &SourceProgram, index: usize) -> Result<BlockDecl, BlockError> {
    let assignments: Vec<&Assignment> = prog.algorithm.assignments().collect();
    let a = assignments
        .get(index)
        .copied()
        .unwrap_or_else(|| panic!("assignment index {} out of range", index));

    if let Some(decl) = prog.custom_block(&a.block) {
        return Ok(decl.clone());
    }

    // types of earlier outputs, for grouping OptimalMixing inputs
    let mut env: Vec<(String, BasicType)> = Vec::new();
    for prev in &assignments[..index] {
        let decl = resolve_shallow(prog, prev, &env)?;
        for (out, p) in prev.outputs.iter().zip(&decl.outputs) {
            env.push((out.clone(), p.ty));
        }
    }
    resolve_shallow(prog, a, &env)
}

fn resolve_shallow(
    prog: &SourceProgram,
    a: &Assignment,
    env: &[(String, BasicType)],
) -> Result<BlockDecl, BlockError> {
    if let Some(decl) = prog.custom_block(&a.block) {
        return Ok(decl.clone());
    }
    let Some(builtin) = parse_builtin(&a.block, prog.player_count) else {
        return Err(BlockError::Unknown(a.block.clone()));
    };
    synth(builtin, prog.player_count, a, env)
}

fn strategy_param(prefix: &str, player: usize) -> Param {
    Param { name: format!("{}{}", prefix, player + 1), ty: BasicType::Strategy(player) }
}

/// Build a full profile from `(player, arg)` pairs; panics on gaps, which
/// indicates a template bug rather than user error.
fn profile(r: usize, slots: &[(usize, StrategyArg)]) -> Vec<StrategyArg> {
    let mut out: Vec<Option<StrategyArg>> = vec![None; r];
    for (p, arg) in slots {
        out[*p] = Some(arg.clone());
    }
    out.into_iter()
        .enumerate()
        .map(|(p, a)| a.unwrap_or_else(|| panic!("profile misses player {}", p + 1)))
        .collect()
}

fn var(name: &str) -> StrategyArg {
    StrategyArg::Var(name.to_string())
}

fn quant(name: &str) -> StrategyArg {
    StrategyArg::Quant(name.to_string())
}

fn u(player: usize, args: Vec<StrategyArg>) -> TermExpr {
    Expr::Atom(Term::payoff_base(player, args))
}

fn w_app(args: Vec<StrategyArg>) -> TermExpr {
    TermExpr::payoff_app(PayoffFn::Var("w".into()), args)
}

fn loss(player: usize, args: Vec<StrategyArg>) -> TermExpr {
    Expr::Atom(Term::Loss { player, args })
}

fn synth(
    builtin: Builtin,
    r: usize,
    a: &Assignment,
    env: &[(String, BasicType)],
) -> Result<BlockDecl, BlockError> {
    match builtin {
        Builtin::Random(i) => Ok(BlockDecl {
            name: a.block.clone(),
            inputs: vec![],
            outputs: vec![strategy_param("x", i)],
            encoding: Formula::true_formula(),
            delta_approximate: false,
        }),

        Builtin::BestResponse(i) => {
            let opponents: Vec<usize> = (0..r).filter(|&k| k != i).collect();
            let inputs: Vec<Param> = opponents.iter().map(|&k| strategy_param("s", k)).collect();
            let out = strategy_param("x", i);
            let fixed: Vec<(usize, StrategyArg)> =
                opponents.iter().map(|&k| (k, var(&format!("s{}", k + 1)))).collect();
            let mut dev = fixed.clone();
            dev.push((i, quant("z")));
            let mut own = fixed.clone();
            own.push((i, var(&out.name)));
            let atom = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: vec![StrategyQuant { player: i, name: "z".into() }],
                forall_payoffs: vec![],
                body: vec![Comparison::le(u(i, profile(r, &dev)), u(i, profile(r, &own)))],
            };
            Ok(BlockDecl {
                name: a.block.clone(),
                inputs,
                outputs: vec![out],
                encoding: Formula::Atom(atom),
                delta_approximate: false,
            })
        }

        Builtin::ZeroSumNe(i, j) => {
            // player i minimizes the combination, player j maximizes it
            let rest: Vec<usize> = (0..r).filter(|&k| k != i && k != j).collect();
            let mut inputs: Vec<Param> = rest.iter().map(|&k| strategy_param("s", k)).collect();
            inputs.push(Param { name: "w".into(), ty: BasicType::Payoff });
            let outputs = vec![strategy_param("x", i), strategy_param("x", j)];
            let fixed: Vec<(usize, StrategyArg)> =
                rest.iter().map(|&k| (k, var(&format!("s{}", k + 1)))).collect();
            let at = |iv: StrategyArg, jv: StrategyArg| {
                let mut slots = fixed.clone();
                slots.push((i, iv));
                slots.push((j, jv));
                profile(r, &slots)
            };
            let xi = var(&format!("x{}", i + 1));
            let xj = var(&format!("x{}", j + 1));
            let atom_i = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: vec![StrategyQuant { player: i, name: "z".into() }],
                forall_payoffs: vec![],
                body: vec![Comparison::ge(
                    w_app(at(quant("z"), xj.clone())),
                    w_app(at(xi.clone(), xj.clone())),
                )],
            };
            let atom_j = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: vec![StrategyQuant { player: j, name: "z".into() }],
                forall_payoffs: vec![],
                body: vec![Comparison::le(
                    w_app(at(xi.clone(), quant("z"))),
                    w_app(at(xi, xj)),
                )],
            };
            Ok(BlockDecl {
                name: a.block.clone(),
                inputs,
                outputs,
                encoding: Formula::and(vec![Formula::Atom(atom_i), Formula::Atom(atom_j)]),
                delta_approximate: false,
            })
        }

        Builtin::StationaryPoint(i, j) => {
            let rest: Vec<usize> = (0..r).filter(|&k| k != i && k != j).collect();
            let inputs: Vec<Param> = rest.iter().map(|&k| strategy_param("s", k)).collect();
            let outputs = vec![
                strategy_param("x", i),
                strategy_param("x", j),
                strategy_param("y", i),
                strategy_param("y", j),
            ];
            let fixed: Vec<(usize, StrategyArg)> =
                rest.iter().map(|&k| (k, var(&format!("s{}", k + 1)))).collect();
            let at = |iv: StrategyArg, jv: StrategyArg| {
                let mut slots = fixed.clone();
                slots.push((i, iv));
                slots.push((j, jv));
                profile(r, &slots)
            };
            let xi = var(&format!("x{}", i + 1));
            let xj = var(&format!("x{}", j + 1));
            let yi = var(&format!("y{}", i + 1));
            let yj = var(&format!("y{}", j + 1));

            let equal_losses = AtomicProperty::bare(vec![Comparison::eq(
                loss(i, at(xi.clone(), xj.clone())),
                loss(j, at(xi.clone(), xj.clone())),
            )]);
            let dual_i = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: vec![StrategyQuant { player: i, name: "z".into() }],
                forall_payoffs: vec![],
                body: vec![Comparison::ge(
                    u(i, at(yi.clone(), xj.clone())),
                    u(i, at(quant("z"), xj.clone())),
                )],
            };
            let dual_j = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: vec![StrategyQuant { player: j, name: "z".into() }],
                forall_payoffs: vec![],
                body: vec![Comparison::ge(
                    u(j, at(xi.clone(), yj.clone())),
                    u(j, at(xi.clone(), quant("z"))),
                )],
            };

            // descent inequality: regret at the point is bounded by the
            // ρ-weighted first-order deviation expression
            let zi = || quant("zi");
            let zj = || quant("zj");
            let rho = || Expr::Atom(Term::RealVar("rho".into()));
            let part_i = u(i, at(yi.clone(), zj()))
                .sub(u(i, at(zi(), xj.clone())))
                .sub(u(i, at(xi.clone(), zj())))
                .add(u(i, at(xi.clone(), xj.clone())));
            let part_j = u(j, at(zi(), yj.clone()))
                .sub(u(j, at(zi(), xj.clone())))
                .sub(u(j, at(xi.clone(), zj())))
                .add(u(j, at(xi.clone(), xj.clone())));
            let rhs = rho().mul(part_i).add((Expr::one().sub(rho())).mul(part_j));
            let descent = AtomicProperty {
                exists_reals: vec![ExistsReal {
                    name: "rho".into(),
                    lo: Rational::zero(),
                    hi: Rational::one(),
                }],
                forall_strategies: vec![
                    StrategyQuant { player: i, name: "zi".into() },
                    StrategyQuant { player: j, name: "zj".into() },
                ],
                forall_payoffs: vec![],
                body: vec![Comparison::le(loss(i, at(xi.clone(), xj.clone())), rhs)],
            };

            Ok(BlockDecl {
                name: a.block.clone(),
                inputs,
                outputs,
                encoding: Formula::and(vec![
                    Formula::Atom(equal_losses),
                    Formula::Atom(dual_i),
                    Formula::Atom(dual_j),
                    Formula::Atom(descent),
                ]),
                delta_approximate: true,
            })
        }

        Builtin::UniformMixing(i) => {
            let s = a.args.len();
            if s < 2 {
                return Err(BlockError::Arity { block: a.block.clone(), expected: 2, given: s });
            }
            let inputs: Vec<Param> = (0..s)
                .map(|k| Param { name: format!("p{}", k + 1), ty: BasicType::Strategy(i) })
                .collect();
            let out = strategy_param("x", i);
            let others: Vec<usize> = (0..r).filter(|&k| k != i).collect();
            let binders: Vec<StrategyQuant> = others
                .iter()
                .map(|&k| StrategyQuant { player: k, name: format!("z{}", k + 1) })
                .collect();
            let at = |own: StrategyArg| {
                let mut slots: Vec<(usize, StrategyArg)> =
                    others.iter().map(|&k| (k, quant(&format!("z{}", k + 1)))).collect();
                slots.push((i, own));
                profile(r, &slots)
            };
            let coeff = Rational::new(1, s as i64);

            // linearity under every payoff function
            let mix_parts: Vec<TermExpr> = (0..s)
                .map(|k| {
                    TermExpr::payoff_app(PayoffFn::Var("U".into()), at(var(&format!("p{}", k + 1))))
                        .scale(coeff)
                })
                .collect();
            let linearity = AtomicProperty {
                exists_reals: vec![],
                forall_strategies: binders.clone(),
                forall_payoffs: vec!["U".into()],
                body: vec![Comparison::eq(
                    TermExpr::payoff_app(PayoffFn::Var("U".into()), at(var(&out.name))),
                    TermExpr::sum(mix_parts),
                )],
            };

            // Jensen's inequality for every other player's regret
            let mut atoms = vec![Formula::Atom(linearity)];
            for &jp in &others {
                let lhs_parts: Vec<TermExpr> = (0..s)
                    .map(|k| loss(jp, at(var(&format!("p{}", k + 1)))).scale(coeff))
                    .collect();
                let jensen = AtomicProperty {
                    exists_reals: vec![],
                    forall_strategies: binders.clone(),
                    forall_payoffs: vec![],
                    body: vec![Comparison::ge(
                        TermExpr::sum(lhs_parts),
                        loss(jp, at(var(&out.name))),
                    )],
                };
                atoms.push(Formula::Atom(jensen));
            }

            Ok(BlockDecl {
                name: a.block.clone(),
                inputs,
                outputs: vec![out],
                encoding: Formula::and(atoms),
                delta_approximate: false,
            })
        }

        Builtin::OptimalMixing => {
            // group strategy arguments per player, in argument order
            let mut groups: Vec<Vec<String>> = vec![Vec::new(); r];
            for arg in &a.args {
                let Arg::Ident(name) = arg else {
                    return Err(BlockError::Index {
                        block: a.block.clone(),
                        msg: "takes strategy identifiers only".into(),
                    });
                };
                match env.iter().rev().find(|(n, _)| n == name) {
                    Some((_, BasicType::Strategy(p))) => groups[*p].push(name.clone()),
                    _ => {
                        return Err(BlockError::Index {
                            block: a.block.clone(),
                            msg: format!("'{}' is not an assigned strategy", name),
                        })
                    }
                }
            }
            for (p, g) in groups.iter().enumerate() {
                if g.is_empty() {
                    return Err(BlockError::NoStrategyForPlayer { player: p });
                }
            }
            let inputs: Vec<Param> = a
                .args
                .iter()
                .enumerate()
                .map(|(k, arg)| {
                    let name = match arg {
                        Arg::Ident(n) => n.clone(),
                        _ => unreachable!(),
                    };
                    let player = groups
                        .iter()
                        .position(|g| g.contains(&name))
                        .expect("grouped above");
                    Param { name: format!("m{}", k + 1), ty: BasicType::Strategy(player) }
                })
                .collect();
            let outputs: Vec<Param> = (0..r).map(|p| strategy_param("o", p)).collect();

            // formal-name groups aligned with the actual grouping
            let mut formal_groups: Vec<Vec<String>> = vec![Vec::new(); r];
            for (k, arg) in a.args.iter().enumerate() {
                let Arg::Ident(name) = arg else { unreachable!() };
                let player = groups.iter().position(|g| g.contains(name)).unwrap();
                let _ = name;
                formal_groups[player].push(format!("m{}", k + 1));
            }

            let encoding = optimal_mixing_encoding(r, &formal_groups, &outputs)?;
            Ok(BlockDecl {
                name: a.block.clone(),
                inputs,
                outputs,
                encoding,
                delta_approximate: false,
            })
        }
    }
}

/// The optimal-mixing encoding: one atomic `max_i f_i(out) ≤ L*` where `L*`
/// is the edge-minimum of the closed-form `T_E` over the input polytope.
pub fn optimal_mixing_encoding(
    r: usize,
    groups: &[Vec<String>],
    outputs: &[Param],
) -> Result<Formula, BlockError> {
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let spec = EdgeBoundSpec::new(&sizes)?;

    let vertex_regret = |v: usize, i: usize| -> TermExpr {
        let idx = &spec.vertices[v];
        let args: Vec<StrategyArg> =
            (0..r).map(|p| StrategyArg::Var(groups[p][idx[p]].clone())).collect();
        Expr::Atom(Term::Loss { player: i, args })
    };
    let l_star = l_star_expr(&spec, r, vertex_regret);

    let out_args: Vec<StrategyArg> =
        outputs.iter().map(|p| StrategyArg::Var(p.name.clone())).collect();
    let out_losses: Vec<TermExpr> =
        (0..r).map(|i| loss(i, out_args.clone())).collect();
    let atom = AtomicProperty::bare(vec![Comparison::le(Expr::Max(out_losses), l_star)]);
    Ok(Formula::Atom(atom))
}

/// Append an optimal mixing over every constructed strategy and return its
/// output profile. Programs that already return are passed through.
pub fn auto_return(prog: &SourceProgram) -> Result<SourceProgram, BlockError> {
    if prog.algorithm.return_profile.is_some() {
        return Ok(prog.clone());
    }
    let by_player = strategies_by_player(prog)?;
    for (p, list) in by_player.iter().enumerate() {
        if list.is_empty() {
            return Err(BlockError::NoStrategyForPlayer { player: p });
        }
    }

    let mut out = prog.clone();
    let taken: Vec<String> =
        prog.algorithm.assignments().flat_map(|a| a.outputs.iter().cloned()).collect();
    let fresh = |base: String| -> String {
        let mut name = base;
        while taken.contains(&name) {
            name.push('_');
        }
        name
    };
    let outputs: Vec<String> =
        (0..prog.player_count).map(|p| fresh(format!("opt{}", p + 1))).collect();
    let args: Vec<Arg> =
        by_player.iter().flatten().map(|s| Arg::Ident(s.clone())).collect();
    let line = prog.algorithm.statements.last().map(|s| s.line() + 1).unwrap_or(1);
    out.algorithm.statements.push(Statement::Assign(Assignment {
        outputs: outputs.clone(),
        annotations: vec![None; prog.player_count],
        block: "OptimalMixing".into(),
        args,
        line,
    }));
    out.algorithm.return_profile = Some(outputs);
    out.algorithm.return_line = Some(line);
    Ok(out)
}

/// Constructed strategies per player, in statement order.
pub fn strategies_by_player(prog: &SourceProgram) -> Result<Vec<Vec<String>>, BlockError> {
    let mut out = vec![Vec::new(); prog.player_count];
    for (idx, a) in prog.algorithm.assignments().enumerate() {
        let decl = resolve_block_at(prog, idx)?;
        for (name, p) in a.outputs.iter().zip(&decl.outputs) {
            if let BasicType::Strategy(k) = p.ty {
                out[k].push(name.clone());
            }
        }
    }
    Ok(out)
}

/// JSON manifest of standard blocks for a given player count, consumed by
/// discovery prompts: name, signature, encoding pretty-print.
pub fn block_manifest(r: usize, allowlist: &[String]) -> serde_json::Value {
    let mut entries = Vec::new();
    for name in allowlist {
        let Some(builtin) = parse_builtin(name, r) else { continue };
        // representative instance: variadic mixing shown at arity 2
        let args = match builtin {
            Builtin::Random(_) => vec![],
            Builtin::BestResponse(_) | Builtin::ZeroSumNe(..) | Builtin::StationaryPoint(..) => {
                vec![]
            }
            Builtin::UniformMixing(_) => vec![Arg::Ident("a".into()), Arg::Ident("b".into())],
            Builtin::OptimalMixing => continue, // applied automatically
        };
        let a = Assignment {
            outputs: vec![],
            annotations: vec![],
            block: name.clone(),
            args,
            line: 0,
        };
        if let Ok(decl) = synth(builtin, r, &a, &[]) {
            let signature = format!(
                "{}({}) -> ({})",
                decl.name,
                decl.inputs
                    .iter()
                    .map(|p| format!("{}: {}", p.name, p.ty))
                    .collect::<Vec<_>>()
                    .join(", "),
                decl.outputs
                    .iter()
                    .map(|p| format!("{}: {}", p.name, p.ty))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            let encoding: Vec<String> =
                decl.encoding.atoms().iter().map(|at| crate::frontend::pretty_atomic(at)).collect();
            entries.push(serde_json::json!({
                "name": decl.name,
                "signature": signature,
                "variadic": matches!(builtin, Builtin::UniformMixing(_)),
                "delta_approximate": decl.delta_approximate,
                "encoding": encoding,
            }));
        }
    }
    serde_json::Value::Array(entries)
}
