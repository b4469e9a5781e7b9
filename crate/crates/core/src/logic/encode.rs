//! From statements to formulas: φ[Γ] and the proof goal.

use super::expr::{Comparison, Expr, TermExpr};
use super::inherent::inherent_formulas;
use super::term::{PayoffFn, StrategyArg, Term};
use super::{AtomicProperty, Formula};
use crate::blocks::{self, BlockError};
use crate::frontend::{Arg, Assignment, BasicType, BlockDecl, SourceProgram, Statement};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("no return profile: enable auto_return or end the algorithm with 'return'")]
    MissingReturn,
    #[error("encoding of '{block}' references undeclared formal '{formal}'")]
    Substitution { block: String, formal: String },
    #[error(transparent)]
    Block(#[from] BlockError),
}

/// The proof goal: bound the worst regret of the returned profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProofGoal {
    pub profile: Vec<String>,
    /// `f(s¹,…,s^r) = max_i f_i(s¹,…,s^r)` over the returned profile.
    pub objective: TermExpr,
}

/// φ[Γ] with its goal and the δ flag.
#[derive(Debug, Clone, Serialize)]
pub struct ProgramEncoding {
    pub phi: Formula,
    pub goal: ProofGoal,
    /// Set when any used encoding mentions δ or any used block is only
    /// δ-approximately computable.
    pub delta_flag: bool,
    /// Branch-gate comparisons: assumptions selecting the analyzed branch,
    /// not guaranteed block properties. Concrete validation classifies
    /// traces by them.
    pub gates: Vec<Comparison<Term>>,
}

/// Instantiate a block declaration's encoding at a statement: formal
/// strategy names become the actual identifiers, payoff and real formals are
/// substituted by the literal arguments, and existentially bound reals are
/// freshened per statement so two uses of the same block stay independent.
pub fn encode_statement(stmt: &Assignment, decl: &BlockDecl) -> Result<Formula, EncodeError> {
    let mut strategy_renames: BTreeMap<String, String> = BTreeMap::new();
    let mut payoff_subs: BTreeMap<String, super::term::PayoffCombo> = BTreeMap::new();
    let mut real_subs: BTreeMap<String, super::term::Rational> = BTreeMap::new();

    if stmt.args.len() != decl.inputs.len() || stmt.outputs.len() != decl.outputs.len() {
        return Err(BlockError::Arity {
            block: decl.name.clone(),
            expected: decl.inputs.len(),
            given: stmt.args.len(),
        }
        .into());
    }
    for (formal, actual) in decl.inputs.iter().zip(&stmt.args) {
        match (formal.ty, actual) {
            (BasicType::Payoff, Arg::Payoff(c)) => {
                payoff_subs.insert(formal.name.clone(), c.clone());
            }
            (BasicType::Real, Arg::Real(v)) => {
                real_subs.insert(formal.name.clone(), *v);
            }
            (_, Arg::Ident(name)) => {
                strategy_renames.insert(formal.name.clone(), name.clone());
            }
            _ => {
                return Err(EncodeError::Substitution {
                    block: decl.name.clone(),
                    formal: formal.name.clone(),
                })
            }
        }
    }
    for (formal, actual) in decl.outputs.iter().zip(&stmt.outputs) {
        strategy_renames.insert(formal.name.clone(), actual.clone());
    }

    let formula = decl.encoding.map_atoms(&mut |atom| {
        let mut atom = atom.clone();
        // fresh ∃-bound names per statement instance
        let mut rho_renames: BTreeMap<String, String> = BTreeMap::new();
        for e in &mut atom.exists_reals {
            let fresh = format!("{}_l{}", e.name, stmt.line);
            rho_renames.insert(e.name.clone(), fresh.clone());
            e.name = fresh;
        }
        for cmp in &mut atom.body {
            for side in [&mut cmp.lhs, &mut cmp.rhs] {
                *side = substitute_expr(side, &strategy_renames, &payoff_subs, &real_subs, &rho_renames);
            }
        }
        Formula::Atom(atom)
    });
    Ok(formula)
}

fn substitute_expr(
    e: &TermExpr,
    strategies: &BTreeMap<String, String>,
    payoffs: &BTreeMap<String, super::term::PayoffCombo>,
    reals: &BTreeMap<String, super::term::Rational>,
    rhos: &BTreeMap<String, String>,
) -> TermExpr {
    e.map_atoms(&mut |t: &Term| {
        let mut t = t.clone();
        for slot in t.strategy_args_mut() {
            if let StrategyArg::Var(name) = slot {
                if let Some(actual) = strategies.get(name) {
                    *slot = StrategyArg::Var(actual.clone());
                }
            }
        }
        match &t {
            Term::RealVar(name) => {
                if let Some(v) = reals.get(name) {
                    return Expr::Const(*v);
                }
                if let Some(fresh) = rhos.get(name) {
                    return Expr::Atom(Term::RealVar(fresh.clone()));
                }
                Expr::Atom(t)
            }
            Term::Payoff { payoff: PayoffFn::Var(v), args } => match payoffs.get(v) {
                Some(combo) => TermExpr::payoff_app(PayoffFn::Combo(combo.clone()), args.clone()),
                None => Expr::Atom(t.clone()),
            },
            Term::MaxPayoff { player, payoff: PayoffFn::Var(v), others } => match payoffs.get(v) {
                Some(combo) => Expr::Atom(Term::MaxPayoff {
                    player: *player,
                    payoff: PayoffFn::Combo(combo.clone()),
                    others: others.clone(),
                }),
                None => Expr::Atom(t.clone()),
            },
            _ => Expr::Atom(t),
        }
    })
}

/// Encode a whole program: φ[Γ] = φ₀ ∧ every statement's encoding ∧ branch
/// gates, plus the proof goal over the returned profile.
pub fn encode_program(prog: &SourceProgram) -> Result<ProgramEncoding, EncodeError> {
    let mut parts = vec![inherent_formulas(prog.player_count)];
    let mut delta_flag = false;
    let mut assignment_index = 0usize;
    let mut gates = Vec::new();

    for stmt in &prog.algorithm.statements {
        match stmt {
            Statement::Assign(a) => {
                let decl = blocks::resolve_block_at(prog, assignment_index)?;
                assignment_index += 1;
                delta_flag |= decl.delta_approximate;
                parts.push(encode_statement(a, &decl)?);
            }
            Statement::Branch { condition, .. } => {
                gates.push(condition.clone());
                parts.push(Formula::Atom(AtomicProperty::bare(vec![condition.clone()])));
            }
        }
    }

    let phi = Formula::and(parts);
    delta_flag |= phi.mentions_delta();

    let profile = prog.algorithm.return_profile.clone().ok_or(EncodeError::MissingReturn)?;
    let args: Vec<StrategyArg> = profile.iter().map(|s| StrategyArg::Var(s.clone())).collect();
    let losses: Vec<TermExpr> = (0..prog.player_count)
        .map(|i| Expr::Atom(Term::Loss { player: i, args: args.clone() }))
        .collect();
    let goal = ProofGoal { profile, objective: Expr::Max(losses) };

    Ok(ProgramEncoding { phi, goal, delta_flag, gates })
}

/// Two-branch disjunction for hand-written IR encodings: the strict side of
/// the gate is closed to `≤`, which cannot change the certified upper bound
/// of a continuous objective.
pub fn if_then_else(a: TermExpr, b: TermExpr, branch1: Formula, branch2: Formula) -> Formula {
    let gate1 = Formula::Atom(AtomicProperty::bare(vec![Comparison::ge(a.clone(), b.clone())]));
    let gate2 = Formula::Atom(AtomicProperty::bare(vec![Comparison::le(a, b)]));
    Formula::Or(vec![
        Formula::and(vec![gate1, branch1]),
        Formula::and(vec![gate2, branch2]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const DMP: &str = r#"
game 2 players

algorithm Dmp:
    i: Strategy1 = Random1()
    r2: Strategy2 = BestResponse2(i)
    k: Strategy1 = BestResponse1(r2)
    r1: Strategy1 = UniformMixing1(i, k)
    return r1, r2
end
"#;

    #[test]
    fn dmp_encoding_has_inherents_plus_blocks() {
        let prog = parse(DMP).unwrap();
        let enc = encode_program(&prog).unwrap();
        // 8 inherent atoms; Random contributes none; two best responses one
        // each; uniform mixing: linearity + one Jensen (r=2)
        assert_eq!(enc.phi.atoms().len(), 8 + 1 + 1 + 2);
        assert!(!enc.delta_flag);
        assert_eq!(enc.goal.profile, vec!["r1".to_string(), "r2".to_string()]);
    }

    #[test]
    fn best_response_statement_encodes_domination() {
        let prog = parse(DMP).unwrap();
        let enc = encode_program(&prog).unwrap();
        let atoms = enc.phi.atoms();
        // the encoding of `r2 = BestResponse2(i)`
        let br2 = &atoms[8];
        assert_eq!(br2.forall_strategies.len(), 1);
        assert_eq!(br2.body[0].to_string(), "u2(i,z) <= u2(i,r2)");
    }

    #[test]
    fn distinct_statements_get_distinct_rhos() {
        let src = r#"
game 2 players
option auto_return = on

algorithm TwoPoints:
    a: Strategy1, b: Strategy2, c: Strategy1, d: Strategy2 = StationaryPoint12()
    e: Strategy1, g: Strategy2, h: Strategy1, k: Strategy2 = StationaryPoint12()
end
"#;
        let prog = parse(src).unwrap();
        let with_return = crate::blocks::auto_return(&prog).unwrap();
        let enc = encode_program(&with_return).unwrap();
        let rhos: Vec<String> = enc
            .phi
            .atoms()
            .iter()
            .flat_map(|a| a.exists_reals.iter().map(|e| e.name.clone()))
            .collect();
        assert_eq!(rhos.len(), 2);
        assert_ne!(rhos[0], rhos[1]);
    }

    #[test]
    fn missing_return_is_an_error() {
        let src = "game 2 players\nalgorithm A:\n    x: Strategy1 = Random1()\nend\n";
        let prog = parse(src).unwrap();
        assert!(matches!(encode_program(&prog), Err(EncodeError::MissingReturn)));
    }
}
