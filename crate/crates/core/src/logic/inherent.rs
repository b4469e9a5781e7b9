//! Inherent formulas φ₀: game-independent facts implied by the definitions
//! of payoffs and regrets, injected into every program encoding.

use super::expr::{Comparison, Expr, TermExpr};
use super::term::{StrategyArg, Term};
use super::{AtomicProperty, Formula, StrategyQuant};

/// For every player i, four families:
///   1. `∀x  0 ≤ u_i(x) ≤ 1`
///   2. `∀x  f_i(x) = max_{x̃^i} u_i(x̃^i, x^{−i}) − u_i(x)`
///   3. `∀x  max_{x̃^i} u_i(x̃^i, x^{−i}) ≥ u_i(x)`
///   4. `∀x^{−i}  max_{x̃^i} u_i(x̃^i, x^{−i}) ≤ 1`
///
/// `f_i ∈ [0,1]` follows from 2–4 together with 1 and is not stated.
pub fn inherent_formulas(r: usize) -> Formula {
    assert!(r >= 2, "games have at least two players");
    let mut atoms = Vec::with_capacity(4 * r);

    for i in 0..r {
        let full_binders: Vec<StrategyQuant> =
            (0..r).map(|p| StrategyQuant { player: p, name: format!("x{}", p + 1) }).collect();
        let other_binders: Vec<StrategyQuant> =
            (0..r).filter(|&p| p != i).map(|p| StrategyQuant { player: p, name: format!("x{}", p + 1) }).collect();

        let full_args: Vec<StrategyArg> =
            (0..r).map(|p| StrategyArg::Quant(format!("x{}", p + 1))).collect();
        let other_args: Vec<StrategyArg> = (0..r)
            .filter(|&p| p != i)
            .map(|p| StrategyArg::Quant(format!("x{}", p + 1)))
            .collect();

        let u_i = Expr::Atom(Term::payoff_base(i, full_args.clone()));
        let f_i = Expr::Atom(Term::Loss { player: i, args: full_args.clone() });
        let max_i = Expr::Atom(Term::max_base(i, other_args.clone()));

        // 1: payoff normalization
        atoms.push(AtomicProperty {
            exists_reals: vec![],
            forall_strategies: full_binders.clone(),
            forall_payoffs: vec![],
            body: vec![
                Comparison::le(TermExpr::zero(), u_i.clone()),
                Comparison::le(u_i.clone(), TermExpr::one()),
            ],
        });
        // 2: regret definition
        atoms.push(AtomicProperty {
            exists_reals: vec![],
            forall_strategies: full_binders.clone(),
            forall_payoffs: vec![],
            body: vec![Comparison::eq(f_i, max_i.clone().sub(u_i.clone()))],
        });
        // 3: the max dominates every payoff
        atoms.push(AtomicProperty {
            exists_reals: vec![],
            forall_strategies: full_binders,
            forall_payoffs: vec![],
            body: vec![Comparison::ge(max_i.clone(), u_i)],
        });
        // 4: the max is itself normalized
        atoms.push(AtomicProperty {
            exists_reals: vec![],
            forall_strategies: other_binders,
            forall_payoffs: vec![],
            body: vec![Comparison::le(max_i, TermExpr::one())],
        });
    }

    Formula::And(atoms.into_iter().map(Formula::Atom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::CompareOp;

    #[test]
    fn four_families_per_player() {
        assert_eq!(inherent_formulas(2).atoms().len(), 8);
        assert_eq!(inherent_formulas(3).atoms().len(), 12);
    }

    #[test]
    fn regret_definition_shape() {
        // family 2 for player 1 of a two-player game:
        // f1(x1,x2) = max[1](*,x2) - u1(x1,x2)
        let f = inherent_formulas(2);
        let atom = f.atoms()[1];
        assert_eq!(atom.body.len(), 1);
        assert_eq!(atom.body[0].op, CompareOp::Eq);
        assert_eq!(atom.body[0].to_string(), "f1(x1,x2) = (max[1]u1(*,x2) - u1(x1,x2))");
    }
}
