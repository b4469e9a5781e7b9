//! The restricted term and formula grammar shared by the whole analyzer.
//!
//! Terms are payoff applications, loss applications, maxima of payoff terms,
//! bound real variables and constants. Formulas are And/Or trees over atomic
//! properties of the prefix form `(∃ρ…)(∀strategies…)(∀payoffs…) comparisons`.
//! There is deliberately no negation and no nesting of quantifiers beyond this
//! prefix; everything downstream relies on that shape.

mod dump;
mod encode;
mod expr;
mod inherent;
mod term;

pub use dump::{comparison_to_json, encoding_to_json, expr_to_json, formula_to_json};
pub use encode::{
    encode_program, encode_statement, if_then_else, EncodeError, ProgramEncoding, ProofGoal,
};
pub use expr::{Comparison, CompareOp, Expr, TermExpr};
pub use inherent::inherent_formulas;
pub use term::{PayoffCombo, PayoffFn, Rational, StrategyArg, Term};

use serde::Serialize;

/// A strategy quantifier `∀ x : Strategy_player`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StrategyQuant {
    /// 0-based player index.
    pub player: usize,
    pub name: String,
}

/// An existentially bound real with its box, e.g. `∃ρ ∈ [0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ExistsReal {
    pub name: String,
    pub lo: Rational,
    pub hi: Rational,
}

/// One atomic property: a quantifier prefix over a conjunction of comparisons.
///
/// The body is a (non-empty) list of comparisons sharing the prefix; chained
/// bounds like `0 ≤ u ≤ 1` count as a single atomic property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicProperty {
    pub exists_reals: Vec<ExistsReal>,
    pub forall_strategies: Vec<StrategyQuant>,
    /// Names of universally quantified payoff variables.
    pub forall_payoffs: Vec<String>,
    pub body: Vec<Comparison<Term>>,
}

impl AtomicProperty {
    pub fn bare(body: Vec<Comparison<Term>>) -> Self {
        AtomicProperty {
            exists_reals: Vec::new(),
            forall_strategies: Vec::new(),
            forall_payoffs: Vec::new(),
            body,
        }
    }

    /// Total number of occurrences of strategy quantifier `name` in the body.
    pub fn occurrences(&self, name: &str) -> usize {
        self.body
            .iter()
            .map(|c| c.lhs.count_strategy_occurrences(name) + c.rhs.count_strategy_occurrences(name))
            .sum()
    }

    pub fn mentions_delta(&self) -> bool {
        self.body.iter().any(|c| c.lhs.mentions_delta() || c.rhs.mentions_delta())
    }
}

/// And/Or tree over atomic properties. No negation, no implication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Formula {
    Atom(AtomicProperty),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    /// Flattened conjunction; nested `And`s are merged, empty parts dropped.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Formula::And(out)
        }
    }

    pub fn true_formula() -> Formula {
        Formula::And(Vec::new())
    }

    /// All atomic properties in left-to-right order.
    pub fn atoms(&self) -> Vec<&AtomicProperty> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AtomicProperty>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(parts) | Formula::Or(parts) => {
                for p in parts {
                    p.collect_atoms(out);
                }
            }
        }
    }

    /// Rebuild the tree by transforming every atom, preserving structure.
    pub fn map_atoms(&self, f: &mut impl FnMut(&AtomicProperty) -> Formula) -> Formula {
        match self {
            Formula::Atom(a) => f(a),
            Formula::And(parts) => Formula::And(parts.iter().map(|p| p.map_atoms(f)).collect()),
            Formula::Or(parts) => Formula::Or(parts.iter().map(|p| p.map_atoms(f)).collect()),
        }
    }

    pub fn mentions_delta(&self) -> bool {
        self.atoms().iter().any(|a| a.mentions_delta())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::term::tests_support::*;

    #[test]
    fn and_flattens_nested_conjunctions() {
        let a = Formula::Atom(AtomicProperty::bare(vec![cmp_le(
            payoff(0, &["x", "y"]),
            constant(1),
        )]));
        let f = Formula::and(vec![Formula::and(vec![a.clone(), a.clone()]), a.clone()]);
        assert_eq!(f.atoms().len(), 3);
    }

    #[test]
    fn occurrence_count_spans_all_body_comparisons() {
        let body = vec![
            cmp_le(constant(0), payoff_q(0, &["q", "y"])),
            cmp_le(payoff_q(0, &["q", "y"]), constant(1)),
        ];
        let atom = AtomicProperty {
            exists_reals: vec![],
            forall_strategies: vec![StrategyQuant { player: 0, name: "q".into() }],
            forall_payoffs: vec![],
            body,
        };
        assert_eq!(atom.occurrences("q"), 2);
        // concrete identifiers are not quantified occurrences
        assert_eq!(atom.occurrences("y"), 0);
    }
}
