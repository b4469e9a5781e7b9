//! Script export for external solvers.

use crate::logic::{CompareOp, Expr};
use crate::optprob::OptimizationProblem;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportDialect {
    /// A self-contained Wolfram Language script: one `NMaximize` per
    /// disjunct with the reference parameters (AccuracyGoal 10,
    /// WorkingPrecision 20, MaxIterations 2000), aggregated by `Max`.
    WolframNMaximize,
    /// The problem as JSON, mirroring `--dump-problem`.
    GenericJson,
}

impl ExportDialect {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wolfram" | "wolfram-nmaximize" => Some(ExportDialect::WolframNMaximize),
            "json" | "generic-json" => Some(ExportDialect::GenericJson),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("unsupported expression for this dialect: {0}")]
    UnsupportedExpression(String),
}

pub fn export_script(problem: &OptimizationProblem, dialect: ExportDialect) -> Result<String, ExportError> {
    if problem.disjuncts.is_empty() {
        return Err(ExportError::UnsupportedExpression(
            "problem has no disjuncts".to_string(),
        ));
    }
    match dialect {
        ExportDialect::GenericJson => Ok(serde_json::to_string_pretty(problem).expect("serializable")),
        ExportDialect::WolframNMaximize => Ok(wolfram(problem)),
    }
}

fn wolfram(problem: &OptimizationProblem) -> String {
    let mut out = String::new();
    out.push_str("(* generated maximization script; run with wolframscript -file *)\n");
    out.push_str("safeDiv[a_, b_] := If[Abs[b] < 10^-12, 0, a/b];\n\n");

    let vars: Vec<String> = problem.variables.keys().map(|k| sym(k)).collect();
    let boxes: Vec<String> = problem
        .variables
        .iter()
        .map(|(k, b)| format!("{} <= {} <= {}", fnum(b.lo), sym(k), fnum(b.hi)))
        .collect();

    for (i, d) in problem.disjuncts.iter().enumerate() {
        let mut cons: Vec<String> = boxes.clone();
        for c in &d.constraints {
            let op = match c.op {
                CompareOp::Le => "<=",
                CompareOp::Ge => ">=",
                CompareOp::Eq => "==",
            };
            cons.push(format!("{} {} {}", wexpr(&c.lhs), op, wexpr(&c.rhs)));
        }
        out.push_str(&format!(
            "v{} = Quiet[Check[NMaximize[{{{}, {}}}, {{{}}}, MaxIterations -> 2000, AccuracyGoal -> 10, WorkingPrecision -> 20][[1]], -Infinity]];\n",
            i + 1,
            wexpr(&d.objective),
            cons.join(" && "),
            vars.join(", ")
        ));
    }
    let all: Vec<String> = (1..=problem.disjuncts.len()).map(|i| format!("v{}", i)).collect();
    out.push_str(&format!("\nbound = Max[{}];\n", all.join(", ")));
    out.push_str("Print[NumberForm[N[bound], 10]];\n");
    out
}

fn sym(name: &str) -> String {
    // Wolfram symbols are alphanumeric; variable names here are already of
    // the form a12 / rho_l5 — strip underscores
    name.replace('_', "")
}

fn fnum(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{}", v)
    }
}

fn wexpr(e: &Expr<String>) -> String {
    match e {
        Expr::Atom(n) => sym(n),
        Expr::Const(c) => {
            if c.is_integer() {
                format!("{}", c.numer())
            } else {
                format!("({}/{})", c.numer(), c.denom())
            }
        }
        Expr::Delta => "0".to_string(),
        Expr::Add(a, b) => format!("({} + {})", wexpr(a), wexpr(b)),
        Expr::Sub(a, b) => format!("({} - {})", wexpr(a), wexpr(b)),
        Expr::Mul(a, b) => format!("({} * {})", wexpr(a), wexpr(b)),
        Expr::Div(a, b) => format!("safeDiv[{}, {}]", wexpr(a), wexpr(b)),
        Expr::Min(parts) => format!("Min[{}]", parts.iter().map(wexpr).collect::<Vec<_>>().join(", ")),
        Expr::Max(parts) => format!("Max[{}]", parts.iter().map(wexpr).collect::<Vec<_>>().join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Comparison;
    use crate::optprob::{Disjunct, VarBox};
    use indexmap::IndexMap;

    #[test]
    fn wolfram_script_shape() {
        let mut variables = IndexMap::new();
        variables.insert("a1".to_string(), VarBox { lo: 0.0, hi: 1.0 });
        let p = OptimizationProblem {
            variables,
            disjuncts: vec![
                Disjunct { constraints: vec![], objective: Expr::Atom("a1".into()) },
                Disjunct {
                    constraints: vec![Comparison::le(Expr::Atom("a1".into()), Expr::one())],
                    objective: Expr::Atom("a1".into()),
                },
            ],
            delta_flag: false,
        };
        let s = export_script(&p, ExportDialect::WolframNMaximize).unwrap();
        assert!(s.contains("NMaximize"));
        assert!(s.contains("AccuracyGoal -> 10"));
        assert!(s.contains("WorkingPrecision -> 20"));
        assert!(s.contains("MaxIterations -> 2000"));
        assert!(s.contains("Max[v1, v2]"));
    }

    #[test]
    fn empty_problem_is_unsupported() {
        let p = OptimizationProblem {
            variables: IndexMap::new(),
            disjuncts: vec![],
            delta_flag: false,
        };
        assert!(export_script(&p, ExportDialect::WolframNMaximize).is_err());
    }

    #[test]
    fn min_max_stay_symbolic() {
        let mut variables = IndexMap::new();
        variables.insert("a1".to_string(), VarBox { lo: 0.0, hi: 1.0 });
        let p = OptimizationProblem {
            variables,
            disjuncts: vec![Disjunct {
                constraints: vec![],
                objective: Expr::Min(vec![Expr::Atom("a1".into()), Expr::one()]),
            }],
            delta_flag: false,
        };
        let s = export_script(&p, ExportDialect::WolframNMaximize).unwrap();
        assert!(s.contains("Min[a1, 1]"));
    }
}
