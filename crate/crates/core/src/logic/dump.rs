//! Canonical JSON rendering of formulas and goals: terms appear as
//! S-expression-like nested arrays with stable ordering, for tooling and
//! snapshot tests.

use super::encode::ProgramEncoding;
use super::expr::{CompareOp, Comparison, Expr, TermExpr};
use super::term::{PayoffFn, Term};
use super::{AtomicProperty, Formula};
use serde_json::{json, Value};

pub fn encoding_to_json(enc: &ProgramEncoding) -> Value {
    json!({
        "phi": formula_to_json(&enc.phi),
        "goal": {
            "profile": enc.goal.profile,
            "objective": expr_to_json(&enc.goal.objective),
        },
        "delta_flag": enc.delta_flag,
    })
}

pub fn formula_to_json(f: &Formula) -> Value {
    match f {
        Formula::Atom(a) => json!({ "atom": atomic_to_json(a) }),
        Formula::And(parts) => json!({ "and": parts.iter().map(formula_to_json).collect::<Vec<_>>() }),
        Formula::Or(parts) => json!({ "or": parts.iter().map(formula_to_json).collect::<Vec<_>>() }),
    }
}

fn atomic_to_json(a: &AtomicProperty) -> Value {
    json!({
        "exists": a.exists_reals.iter().map(|e| json!([e.name, e.lo.to_string(), e.hi.to_string()])).collect::<Vec<_>>(),
        "forall_strategies": a.forall_strategies.iter().map(|q| json!([q.name, q.player + 1])).collect::<Vec<_>>(),
        "forall_payoffs": a.forall_payoffs,
        "body": a.body.iter().map(comparison_to_json).collect::<Vec<_>>(),
    })
}

pub fn comparison_to_json(c: &Comparison<Term>) -> Value {
    let op = match c.op {
        CompareOp::Le => "<=",
        CompareOp::Ge => ">=",
        CompareOp::Eq => "=",
    };
    json!([op, expr_to_json(&c.lhs), expr_to_json(&c.rhs)])
}

pub fn expr_to_json(e: &TermExpr) -> Value {
    match e {
        Expr::Atom(t) => term_to_json(t),
        Expr::Const(c) => json!(c.to_string()),
        Expr::Delta => json!("delta"),
        Expr::Add(a, b) => json!(["+", expr_to_json(a), expr_to_json(b)]),
        Expr::Sub(a, b) => json!(["-", expr_to_json(a), expr_to_json(b)]),
        Expr::Mul(a, b) => json!(["*", expr_to_json(a), expr_to_json(b)]),
        Expr::Div(a, b) => json!(["/", expr_to_json(a), expr_to_json(b)]),
        Expr::Min(parts) => {
            let mut v = vec![json!("min")];
            v.extend(parts.iter().map(expr_to_json));
            Value::Array(v)
        }
        Expr::Max(parts) => {
            let mut v = vec![json!("max")];
            v.extend(parts.iter().map(expr_to_json));
            Value::Array(v)
        }
    }
}

fn term_to_json(t: &Term) -> Value {
    match t {
        Term::Payoff { payoff, args } => {
            let mut v = vec![json!(payoff_head(payoff))];
            v.extend(args.iter().map(|a| json!(a.name())));
            Value::Array(v)
        }
        Term::Loss { player, args } => {
            let mut v = vec![json!(format!("f{}", player + 1))];
            v.extend(args.iter().map(|a| json!(a.name())));
            Value::Array(v)
        }
        Term::MaxPayoff { player, payoff, others } => json!([
            "maxdev",
            player + 1,
            payoff_head(payoff),
            others.iter().map(|a| json!(a.name())).collect::<Vec<_>>()
        ]),
        Term::RealVar(name) => json!(name),
    }
}

fn payoff_head(p: &PayoffFn) -> String {
    match p {
        PayoffFn::Combo(c) => match c.as_base() {
            Some(k) => format!("u{}", k + 1),
            None => c.to_string(),
        },
        PayoffFn::Var(v) => v.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::logic::encode_program;

    #[test]
    fn dump_is_stable_across_runs() {
        let src = "game 2 players\n\nalgorithm A:\n    x: Strategy1 = Random1()\n    y: Strategy2 = BestResponse2(x)\n    return x, y\nend\n";
        let prog = parse(src).unwrap();
        let a = serde_json::to_string(&encoding_to_json(&encode_program(&prog).unwrap())).unwrap();
        let b = serde_json::to_string(&encoding_to_json(&encode_program(&prog).unwrap())).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("[\"u2\",\"x\",\"z\"]"), "{}", a);
    }
}
