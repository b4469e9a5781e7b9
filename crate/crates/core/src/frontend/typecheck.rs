//! Semantic validation of parsed programs.
//!
//! Never aborts: every problem becomes a located diagnostic. A program with
//! no error-severity diagnostics is well-typed and in SSA form.

use super::ast::*;
use super::diagnostics::{Diagnostic, DiagnosticCode};
use crate::blocks::{self, BlockError};
use crate::logic::{PayoffFn, StrategyArg, Term};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// The variable-type environment after a prefix of the algorithm.
pub type TypeEnv = BTreeMap<String, BasicType>;

/// Run all semantic checks; returns diagnostics (errors and warnings).
pub fn typecheck(prog: &SourceProgram) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_block_decls(prog, &mut diags);
    check_algorithm(prog, &mut diags);
    diags
}

fn check_block_decls(prog: &SourceProgram, diags: &mut Vec<Diagnostic>) {
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    for decl in &prog.blocks {
        if seen.insert(&decl.name, ()).is_some() {
            diags.push(Diagnostic::error(
                DiagnosticCode::DuplicateName,
                0,
                0,
                format!("block '{}' is declared twice", decl.name),
            ));
        }
        if blocks::is_builtin_name(&decl.name, prog.player_count) {
            diags.push(Diagnostic::error(
                DiagnosticCode::DuplicateName,
                0,
                0,
                format!("block '{}' shadows a standard building block", decl.name),
            ));
        }
        for out in &decl.outputs {
            if matches!(out.ty, BasicType::Comp | BasicType::None) {
                diags.push(Diagnostic::error(
                    DiagnosticCode::TypeMismatch,
                    0,
                    0,
                    format!("block '{}': output '{}' has type {}, but outputs are values", decl.name, out.name, out.ty),
                ));
            }
        }
        check_encoding_scope(prog, decl, diags);
    }
}

/// Every concrete strategy name in an encoding must be a strategy-typed
/// formal of the right player; bare reals must be exists-bound or Real
/// formals (the parser already scopes those).
fn check_encoding_scope(prog: &SourceProgram, decl: &BlockDecl, diags: &mut Vec<Diagnostic>) {
    let formal_ty: BTreeMap<&str, BasicType> = decl
        .inputs
        .iter()
        .chain(&decl.outputs)
        .map(|p| (p.name.as_str(), p.ty))
        .collect();

    for atom in decl.encoding.atoms() {
        let quant_player: BTreeMap<&str, usize> =
            atom.forall_strategies.iter().map(|q| (q.name.as_str(), q.player)).collect();
        let mut check_term = |t: &Term| {
            let args = t.strategy_args();
            let slots: Vec<usize> = match t {
                Term::MaxPayoff { player, .. } => {
                    (0..prog.player_count).filter(|p| p != player).collect()
                }
                _ => (0..args.len()).collect(),
            };
            if matches!(t, Term::Payoff { .. } | Term::Loss { .. }) && args.len() != prog.player_count {
                diags.push(Diagnostic::error(
                    DiagnosticCode::ArityMismatch,
                    0,
                    0,
                    format!("block '{}': term {} needs one strategy per player ({} expected, {} given)", decl.name, t, prog.player_count, args.len()),
                ));
                return;
            }
            for (slot, arg) in slots.iter().zip(args) {
                match arg {
                    StrategyArg::Var(name) => match formal_ty.get(name.as_str()) {
                        Some(BasicType::Strategy(p)) if p == slot => {}
                        Some(BasicType::Strategy(p)) => diags.push(Diagnostic::error(
                            DiagnosticCode::TypeMismatch,
                            0,
                            0,
                            format!("block '{}': '{}' is a Strategy{} but sits in player {}'s slot of {}", decl.name, name, p + 1, slot + 1, t),
                        )),
                        _ => diags.push(Diagnostic::error(
                            DiagnosticCode::TypeMismatch,
                            0,
                            0,
                            format!("block '{}': encoding references '{}', which is not a strategy formal", decl.name, name),
                        )),
                    },
                    StrategyArg::Quant(name) => match quant_player.get(name.as_str()) {
                        Some(p) if p == slot => {}
                        _ => diags.push(Diagnostic::error(
                            DiagnosticCode::TypeMismatch,
                            0,
                            0,
                            format!("block '{}': quantified '{}' used in the wrong player slot of {}", decl.name, name, t),
                        )),
                    },
                }
            }
            if let Term::Payoff { payoff: PayoffFn::Var(v), .. } | Term::MaxPayoff { payoff: PayoffFn::Var(v), .. } = t {
                if !atom.forall_payoffs.iter().any(|b| b == v) {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::TypeMismatch,
                        0,
                        0,
                        format!("block '{}': payoff variable '{}' is not bound", decl.name, v),
                    ));
                }
            }
        };
        for cmp in &atom.body {
            cmp.lhs.for_each_atom(&mut check_term);
            cmp.rhs.for_each_atom(&mut check_term);
        }
    }
}

fn check_algorithm(prog: &SourceProgram, diags: &mut Vec<Diagnostic>) {
    let mut env: TypeEnv = TypeEnv::new();
    let mut assignment_index = 0usize;

    for stmt in &prog.algorithm.statements {
        match stmt {
            Statement::Assign(a) => {
                check_assignment(prog, assignment_index, a, &mut env, diags);
                assignment_index += 1;
            }
            Statement::Branch { condition, line } => {
                diags.push(Diagnostic::warning(
                    DiagnosticCode::BranchWarning,
                    *line,
                    1,
                    "branch gate: only this branch is analyzed; soundness relies on the algorithm being symmetric across branches",
                ));
                let mut check = |t: &Term| check_ground_term(prog, t, &env, *line, diags);
                condition.lhs.for_each_atom(&mut check);
                condition.rhs.for_each_atom(&mut check);
            }
        }
    }

    if let Some(profile) = &prog.algorithm.return_profile {
        let line = prog.algorithm.return_line.unwrap_or(0);
        if profile.len() != prog.player_count {
            diags.push(Diagnostic::error(
                DiagnosticCode::ArityMismatch,
                line,
                1,
                format!("return profile names {} strategies for {} players", profile.len(), prog.player_count),
            ));
        } else {
            for (i, name) in profile.iter().enumerate() {
                match env.get(name) {
                    Some(BasicType::Strategy(p)) if *p == i => {}
                    Some(ty) => diags.push(Diagnostic::error(
                        DiagnosticCode::TypeMismatch,
                        line,
                        1,
                        format!("returned '{}' has type {}, expected Strategy{}", name, ty, i + 1),
                    )),
                    None => diags.push(Diagnostic::error(
                        DiagnosticCode::SSAViolation,
                        line,
                        1,
                        format!("returned '{}' is never assigned", name),
                    )),
                }
            }
        }
    }
}

fn check_assignment(
    prog: &SourceProgram,
    index: usize,
    a: &Assignment,
    env: &mut TypeEnv,
    diags: &mut Vec<Diagnostic>,
) {
    let decl = match blocks::resolve_block_at(prog, index) {
        Ok(d) => d,
        Err(BlockError::Unknown(name)) => {
            diags.push(Diagnostic::error(
                DiagnosticCode::UnknownBlock,
                a.line,
                1,
                format!("unknown building block '{}'", name),
            ));
            // keep SSA tracking alive with opaque outputs
            for (out, ann) in a.outputs.iter().zip(&a.annotations) {
                bind_output(out, ann.unwrap_or(BasicType::None), a.line, env, diags);
            }
            return;
        }
        Err(e) => {
            let code = match e {
                BlockError::Arity { .. } => DiagnosticCode::ArityMismatch,
                _ => DiagnosticCode::TypeMismatch,
            };
            diags.push(Diagnostic::error(code, a.line, 1, e.to_string()));
            return;
        }
    };

    if a.args.len() != decl.inputs.len() {
        diags.push(Diagnostic::error(
            DiagnosticCode::ArityMismatch,
            a.line,
            1,
            format!("'{}' takes {} inputs, {} given", decl.name, decl.inputs.len(), a.args.len()),
        ));
    } else {
        for (arg, formal) in a.args.iter().zip(&decl.inputs) {
            check_arg(arg, formal, &decl.name, a.line, env, diags);
        }
    }

    if a.outputs.len() != decl.outputs.len() {
        diags.push(Diagnostic::error(
            DiagnosticCode::ArityMismatch,
            a.line,
            1,
            format!("'{}' produces {} outputs, {} names given", decl.name, decl.outputs.len(), a.outputs.len()),
        ));
        return;
    }
    for ((out, ann), formal) in a.outputs.iter().zip(&a.annotations).zip(&decl.outputs) {
        if let Some(ann_ty) = ann {
            if *ann_ty != formal.ty {
                diags.push(Diagnostic::error(
                    DiagnosticCode::TypeMismatch,
                    a.line,
                    1,
                    format!("'{}' is annotated {} but '{}' produces {}", out, ann_ty, decl.name, formal.ty),
                ));
            }
        }
        bind_output(out, formal.ty, a.line, env, diags);
    }
}

fn bind_output(name: &str, ty: BasicType, line: usize, env: &mut TypeEnv, diags: &mut Vec<Diagnostic>) {
    if env.contains_key(name) {
        diags.push(Diagnostic::error(
            DiagnosticCode::SSAViolation,
            line,
            1,
            format!("'{}' is assigned more than once; each variable is assigned exactly once", name),
        ));
    } else {
        env.insert(name.to_string(), ty);
    }
}

fn check_arg(
    arg: &Arg,
    formal: &Param,
    block: &str,
    line: usize,
    env: &TypeEnv,
    diags: &mut Vec<Diagnostic>,
) {
    match (arg, formal.ty) {
        (Arg::Ident(name), expected) => match env.get(name) {
            None => diags.push(Diagnostic::error(
                DiagnosticCode::SSAViolation,
                line,
                1,
                format!("'{}' is used before assignment", name),
            )),
            Some(ty) if *ty == expected => {}
            Some(ty) => diags.push(Diagnostic::error(
                DiagnosticCode::TypeMismatch,
                line,
                1,
                format!("'{}' expects {} for '{}', got '{}' of type {}", block, expected, formal.name, name, ty),
            )),
        },
        (Arg::Payoff(_), BasicType::Payoff) => {}
        (Arg::Real(v), BasicType::Real) => {
            if *v < num_rational::Ratio::zero() || *v > num_rational::Ratio::one() {
                diags.push(Diagnostic::error(
                    DiagnosticCode::TypeMismatch,
                    line,
                    1,
                    format!("real argument {} for '{}' lies outside [0,1]", v, formal.name),
                ));
            }
        }
        (given, expected) => diags.push(Diagnostic::error(
            DiagnosticCode::TypeMismatch,
            line,
            1,
            format!("'{}' expects {} for '{}', got literal '{}'", block, expected, formal.name, given),
        )),
    }
}

/// Branch-gate terms reference only already-assigned strategy variables.
fn check_ground_term(
    prog: &SourceProgram,
    t: &Term,
    env: &TypeEnv,
    line: usize,
    diags: &mut Vec<Diagnostic>,
) {
    let args = t.strategy_args();
    if matches!(t, Term::Payoff { .. } | Term::Loss { .. }) && args.len() != prog.player_count {
        diags.push(Diagnostic::error(
            DiagnosticCode::ArityMismatch,
            line,
            1,
            format!("term {} needs one strategy per player", t),
        ));
        return;
    }
    let slots: Vec<usize> = match t {
        Term::MaxPayoff { player, .. } => (0..prog.player_count).filter(|p| p != player).collect(),
        _ => (0..args.len()).collect(),
    };
    for (slot, arg) in slots.iter().zip(args) {
        match arg {
            StrategyArg::Var(name) => match env.get(name) {
                Some(BasicType::Strategy(p)) if p == slot => {}
                Some(_) | None => diags.push(Diagnostic::error(
                    DiagnosticCode::TypeMismatch,
                    line,
                    1,
                    format!("'{}' is not an assigned Strategy{} at this point", name, slot + 1),
                )),
            },
            StrategyArg::Quant(name) => diags.push(Diagnostic::error(
                DiagnosticCode::TypeMismatch,
                line,
                1,
                format!("quantified variable '{}' cannot appear in a branch gate", name),
            )),
        }
    }
}
