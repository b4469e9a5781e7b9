//! Canonical pretty-printer; `parse(pretty(p))` is the identity on the IR.

use super::ast::*;
use crate::logic::{
    AtomicProperty, CompareOp, Comparison, Expr, Formula, PayoffFn, StrategyArg, Term,
};
use std::fmt::Write;

pub fn pretty(prog: &SourceProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "game {} players", prog.player_count);
    let _ = writeln!(
        out,
        "option auto_return = {}",
        if prog.options.auto_return_optimal_mixing { "on" } else { "off" }
    );
    let _ = writeln!(
        out,
        "option delta_symbolic = {}",
        if prog.options.delta_symbolic { "on" } else { "off" }
    );
    out.push('\n');

    for block in &prog.blocks {
        let ins = params(&block.inputs);
        let outs = params(&block.outputs);
        let _ = writeln!(out, "block {}({}) -> ({}):", block.name, ins, outs);
        render_formula(&block.encoding, &mut out);
        out.push_str("end\n\n");
    }

    let _ = writeln!(out, "algorithm {}:", prog.algorithm.name);
    for stmt in &prog.algorithm.statements {
        match stmt {
            Statement::Assign(a) => {
                let lhs: Vec<String> = a
                    .outputs
                    .iter()
                    .zip(&a.annotations)
                    .map(|(o, ann)| match ann {
                        Some(ty) => format!("{}: {}", o, ty),
                        None => o.clone(),
                    })
                    .collect();
                let args: Vec<String> = a.args.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "    {} = {}({})", lhs.join(", "), a.block, args.join(", "));
            }
            Statement::Branch { condition, .. } => {
                let _ = writeln!(out, "    branch {}", comparison(condition));
            }
        }
    }
    if let Some(profile) = &prog.algorithm.return_profile {
        let _ = writeln!(out, "    return {}", profile.join(", "));
    }
    out.push_str("end\n");
    out
}

fn params(ps: &[Param]) -> String {
    ps.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect::<Vec<_>>().join(", ")
}

fn render_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::And(parts) => {
            for p in parts {
                render_formula(p, out);
            }
        }
        Formula::Atom(a) => {
            out.push_str("    ensures ");
            out.push_str(&atomic(a));
            out.push('\n');
        }
        // the surface grammar is conjunctive; disjunctions only exist at the
        // IR level and are not printable as source
        Formula::Or(_) => out.push_str("    # <disjunctive encoding: no surface form>\n"),
    }
}

pub fn atomic(a: &AtomicProperty) -> String {
    let mut s = String::new();
    if !a.exists_reals.is_empty() {
        let parts: Vec<String> =
            a.exists_reals.iter().map(|e| format!("{} in [{}, {}]", e.name, e.lo, e.hi)).collect();
        let _ = write!(s, "exists {} . ", parts.join(", "));
    }
    if !a.forall_strategies.is_empty() || !a.forall_payoffs.is_empty() {
        let mut parts: Vec<String> = a
            .forall_strategies
            .iter()
            .map(|q| format!("{}: Strategy{}", q.name, q.player + 1))
            .collect();
        parts.extend(a.forall_payoffs.iter().map(|p| format!("{}: Payoff", p)));
        let _ = write!(s, "forall {} . ", parts.join(", "));
    }
    match a.body.len() {
        1 => s.push_str(&comparison(&a.body[0])),
        2 if a.body[0].rhs == a.body[1].lhs => {
            // chained bound like 0 <= e <= 1
            let _ = write!(
                s,
                "{} {} {} {} {}",
                expr(&a.body[0].lhs, 0),
                op(a.body[0].op),
                expr(&a.body[0].rhs, 0),
                op(a.body[1].op),
                expr(&a.body[1].rhs, 0)
            );
        }
        _ => {
            let parts: Vec<String> = a.body.iter().map(comparison).collect();
            s.push_str(&parts.join(" and "));
        }
    }
    s
}

fn op(o: CompareOp) -> &'static str {
    match o {
        CompareOp::Le => "<=",
        CompareOp::Ge => ">=",
        CompareOp::Eq => "=",
    }
}

pub fn comparison(c: &Comparison<Term>) -> String {
    format!("{} {} {}", expr(&c.lhs, 0), op(c.op), expr(&c.rhs, 0))
}

/// Precedence-aware rendering: level 0 = additive, 1 = multiplicative,
/// 2 = atoms.
pub fn expr(e: &Expr<Term>, level: u8) -> String {
    let (s, my_level) = match e {
        Expr::Atom(t) => (term(t), 2),
        Expr::Const(c) => {
            if c.is_integer() {
                (format!("{}", c.numer()), 2)
            } else {
                (format!("{}/{}", c.numer(), c.denom()), 1)
            }
        }
        Expr::Delta => ("delta".to_string(), 2),
        Expr::Add(a, b) => (format!("{} + {}", expr(a, 0), expr(b, 1)), 0),
        Expr::Sub(a, b) => (format!("{} - {}", expr(a, 0), expr(b, 1)), 0),
        Expr::Mul(a, b) => (format!("{} * {}", expr(a, 1), expr(b, 2)), 1),
        Expr::Div(a, b) => (format!("{} / {}", expr(a, 1), expr(b, 2)), 1),
        Expr::Min(parts) => (
            format!("min{{{}}}", parts.iter().map(|p| expr(p, 0)).collect::<Vec<_>>().join(", ")),
            2,
        ),
        Expr::Max(parts) => (
            format!("max{{{}}}", parts.iter().map(|p| expr(p, 0)).collect::<Vec<_>>().join(", ")),
            2,
        ),
    };
    if my_level < level {
        format!("({})", s)
    } else {
        s
    }
}

fn term(t: &Term) -> String {
    let args = |xs: &[StrategyArg]| xs.iter().map(|a| a.name().to_string()).collect::<Vec<_>>().join(", ");
    match t {
        Term::Payoff { payoff, args: a } => {
            let head = match payoff {
                PayoffFn::Combo(c) => match c.as_base() {
                    Some(k) => format!("u{}", k + 1),
                    None => format!("({})", c),
                },
                PayoffFn::Var(v) => v.clone(),
            };
            format!("{}({})", head, args(a))
        }
        Term::Loss { player, args: a } => format!("f{}({})", player + 1, args(a)),
        Term::MaxPayoff { player, payoff, others } => {
            let head = match payoff {
                PayoffFn::Combo(c) => match c.as_base() {
                    Some(k) => format!("u{}", k + 1),
                    None => format!("({})", c),
                },
                PayoffFn::Var(v) => v.clone(),
            };
            let binder = format!("z{}_", player + 1);
            let mut slots: Vec<String> = Vec::new();
            let mut it = others.iter();
            let r = others.len() + 1;
            for p in 0..r {
                if p == *player {
                    slots.push(binder.clone());
                } else {
                    slots.push(it.next().unwrap().name().to_string());
                }
            }
            format!("(max {}: Strategy{} . {}({}))", binder, player + 1, head, slots.join(", "))
        }
        Term::RealVar(name) => name.clone(),
    }
}
