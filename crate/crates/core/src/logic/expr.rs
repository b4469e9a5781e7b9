//! Arithmetic expressions and comparisons, generic over the atom type.
//!
//! The same tree shape is used twice: over [`Term`]s while encoding and
//! instantiating, and over variable names after forgetting. Division by zero
//! evaluates to 0; the only division the compiler emits is inside clamped
//! line-crossing formulas, where a vanishing denominator means the crossing
//! degenerates to an endpoint that is already accounted for.

use super::term::{PayoffFn, Rational, StrategyArg, Term};
use num_traits::ToPrimitive;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CompareOp {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "=",
        })
    }
}

/// Expression tree with `+ − × ÷` and finite `min`/`max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr<A> {
    Atom(A),
    Const(Rational),
    /// The distinguished symbolic slack introduced by approximate blocks.
    Delta,
    Add(Box<Expr<A>>, Box<Expr<A>>),
    Sub(Box<Expr<A>>, Box<Expr<A>>),
    Mul(Box<Expr<A>>, Box<Expr<A>>),
    Div(Box<Expr<A>>, Box<Expr<A>>),
    Min(Vec<Expr<A>>),
    Max(Vec<Expr<A>>),
}

pub type TermExpr = Expr<Term>;

impl<A> Expr<A> {
    pub fn add(self, rhs: Expr<A>) -> Expr<A> {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
    pub fn sub(self, rhs: Expr<A>) -> Expr<A> {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
    pub fn mul(self, rhs: Expr<A>) -> Expr<A> {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
    pub fn div(self, rhs: Expr<A>) -> Expr<A> {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
    pub fn scale(self, c: Rational) -> Expr<A> {
        Expr::Const(c).mul(self)
    }

    pub fn rational(num: i64, den: i64) -> Expr<A> {
        Expr::Const(Rational::new(num, den))
    }

    pub fn zero() -> Expr<A> {
        Expr::Const(Rational::from_integer(0))
    }

    pub fn one() -> Expr<A> {
        Expr::Const(Rational::from_integer(1))
    }

    /// Sum of parts; empty sums are 0.
    pub fn sum(parts: Vec<Expr<A>>) -> Expr<A> {
        let mut it = parts.into_iter();
        match it.next() {
            None => Expr::zero(),
            Some(first) => it.fold(first, |acc, e| acc.add(e)),
        }
    }

    /// `max(0, min(1, e))` — used for clamped line-crossing parameters.
    pub fn clamp01(self) -> Expr<A> {
        Expr::Max(vec![Expr::zero(), Expr::Min(vec![Expr::one(), self])])
    }

    pub fn children(&self) -> Vec<&Expr<A>> {
        match self {
            Expr::Atom(_) | Expr::Const(_) | Expr::Delta => Vec::new(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                vec![a, b]
            }
            Expr::Min(parts) | Expr::Max(parts) => parts.iter().collect(),
        }
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a A)) {
        match self {
            Expr::Atom(a) => f(a),
            _ => {
                for c in self.children() {
                    c.for_each_atom(f);
                }
            }
        }
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| out.push(a));
        out
    }

    pub fn mentions_delta(&self) -> bool {
        match self {
            Expr::Delta => true,
            _ => self.children().iter().any(|c| c.mentions_delta()),
        }
    }

    /// Rebuild the tree, mapping every atom to a subexpression.
    pub fn map_atoms<B>(&self, f: &mut impl FnMut(&A) -> Expr<B>) -> Expr<B> {
        match self {
            Expr::Atom(a) => f(a),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Delta => Expr::Delta,
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Min(parts) => Expr::Min(parts.iter().map(|p| p.map_atoms(f)).collect()),
            Expr::Max(parts) => Expr::Max(parts.iter().map(|p| p.map_atoms(f)).collect()),
        }
    }

    /// Evaluate with the given atom valuation and value for `Delta`.
    ///
    /// Division by zero yields 0 (see module docs).
    pub fn eval(&self, atom: &impl Fn(&A) -> f64, delta: f64) -> f64 {
        match self {
            Expr::Atom(a) => atom(a),
            Expr::Const(c) => c.to_f64().unwrap_or(f64::NAN),
            Expr::Delta => delta,
            Expr::Add(a, b) => a.eval(atom, delta) + b.eval(atom, delta),
            Expr::Sub(a, b) => a.eval(atom, delta) - b.eval(atom, delta),
            Expr::Mul(a, b) => a.eval(atom, delta) * b.eval(atom, delta),
            Expr::Div(a, b) => {
                let d = b.eval(atom, delta);
                if d.abs() < 1e-12 {
                    0.0
                } else {
                    a.eval(atom, delta) / d
                }
            }
            Expr::Min(parts) => parts
                .iter()
                .map(|p| p.eval(atom, delta))
                .fold(f64::INFINITY, f64::min),
            Expr::Max(parts) => parts
                .iter()
                .map(|p| p.eval(atom, delta))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl TermExpr {
    /// Apply a payoff function to a full profile, expanding concrete linear
    /// combinations by linearity so only base-payoff terms remain.
    pub fn payoff_app(payoff: PayoffFn, args: Vec<StrategyArg>) -> TermExpr {
        match payoff {
            PayoffFn::Var(_) => Expr::Atom(Term::Payoff { payoff, args }),
            PayoffFn::Combo(combo) => {
                if let Some(k) = combo.as_base() {
                    return Expr::Atom(Term::payoff_base(k, args));
                }
                let parts = combo
                    .coeffs()
                    .map(|(k, c)| Expr::Atom(Term::payoff_base(k, args.clone())).scale(c))
                    .collect();
                Expr::sum(parts)
            }
        }
    }

    pub fn count_strategy_occurrences(&self, name: &str) -> usize {
        let mut n = 0;
        self.for_each_atom(&mut |t: &Term| {
            n += t
                .strategy_args()
                .iter()
                .filter(|a| a.is_quant() && a.name() == name)
                .count();
        });
        n
    }

    /// Substitute quantified strategy variable `name` by a concrete argument.
    pub fn subst_strategy(&self, name: &str, to: &StrategyArg) -> TermExpr {
        self.map_atoms(&mut |t: &Term| {
            let mut t = t.clone();
            for slot in t.strategy_args_mut() {
                if slot.is_quant() && slot.name() == name {
                    *slot = to.clone();
                }
            }
            Expr::Atom(t)
        })
    }

    /// Substitute payoff variable `name` by a concrete combination,
    /// re-expanding by linearity where the variable headed a payoff term.
    pub fn subst_payoff(&self, name: &str, to: &super::term::PayoffCombo) -> TermExpr {
        self.map_atoms(&mut |t: &Term| match t {
            Term::Payoff { payoff: PayoffFn::Var(v), args } if v == name => {
                TermExpr::payoff_app(PayoffFn::Combo(to.clone()), args.clone())
            }
            Term::MaxPayoff { player, payoff: PayoffFn::Var(v), others } if v == name => {
                Expr::Atom(Term::MaxPayoff {
                    player: *player,
                    payoff: PayoffFn::Combo(to.clone()),
                    others: others.clone(),
                })
            }
            other => Expr::Atom(other.clone()),
        })
    }
}

/// `lhs op rhs` over arithmetic expressions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison<A> {
    pub lhs: Expr<A>,
    pub op: CompareOp,
    pub rhs: Expr<A>,
}

impl<A> Comparison<A> {
    pub fn le(lhs: Expr<A>, rhs: Expr<A>) -> Self {
        Comparison { lhs, op: CompareOp::Le, rhs }
    }
    pub fn ge(lhs: Expr<A>, rhs: Expr<A>) -> Self {
        Comparison { lhs, op: CompareOp::Ge, rhs }
    }
    pub fn eq(lhs: Expr<A>, rhs: Expr<A>) -> Self {
        Comparison { lhs, op: CompareOp::Eq, rhs }
    }

    /// Signed violation at a valuation: ≤ 0 means satisfied.
    pub fn violation(&self, atom: &impl Fn(&A) -> f64, delta: f64) -> f64 {
        let l = self.lhs.eval(atom, delta);
        let r = self.rhs.eval(atom, delta);
        match self.op {
            CompareOp::Le => l - r,
            CompareOp::Ge => r - l,
            CompareOp::Eq => (l - r).abs(),
        }
    }

    pub fn holds(&self, atom: &impl Fn(&A) -> f64, delta: f64, tol: f64) -> bool {
        self.violation(atom, delta) <= tol
    }
}

impl<A: fmt::Display> fmt::Display for Expr<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(a) => write!(f, "{}", a),
            Expr::Const(c) => write!(f, "{}", c),
            Expr::Delta => f.write_str("delta"),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "({} * {})", a, b),
            Expr::Div(a, b) => write!(f, "({} / {})", a, b),
            Expr::Min(parts) => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "min{{{}}}", s.join(", "))
            }
            Expr::Max(parts) => {
                let s: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "max{{{}}}", s.join(", "))
            }
        }
    }
}

impl<A: fmt::Display> fmt::Display for Comparison<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::term::PayoffCombo;

    #[test]
    fn division_by_zero_is_zero() {
        let e: Expr<String> = Expr::one().div(Expr::zero());
        assert_eq!(e.eval(&|_| 0.0, 0.0), 0.0);
    }

    #[test]
    fn payoff_app_expands_combinations_by_linearity() {
        let combo = PayoffCombo::new([(0, Rational::from_integer(1)), (1, -Rational::from_integer(1))]);
        let args = vec![StrategyArg::Var("x".into()), StrategyArg::Var("y".into())];
        let e = TermExpr::payoff_app(PayoffFn::Combo(combo), args);
        // u1(x,y) - u2(x,y): evaluates with u1=0.7, u2=0.2 to 0.5
        let v = e.eval(
            &|t: &Term| match t {
                Term::Payoff { payoff, .. } => match payoff {
                    PayoffFn::Combo(c) if c.as_base() == Some(0) => 0.7,
                    _ => 0.2,
                },
                _ => f64::NAN,
            },
            0.0,
        );
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn clamp01_saturates() {
        let e: Expr<String> = Expr::rational(7, 2).clamp01();
        assert_eq!(e.eval(&|_| 0.0, 0.0), 1.0);
        let e: Expr<String> = Expr::rational(-7, 2).clamp01();
        assert_eq!(e.eval(&|_| 0.0, 0.0), 0.0);
    }
}
