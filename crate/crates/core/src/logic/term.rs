//! Terms of the logic encoding grammar.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Exact rational constants; coefficients stay exact until solving.
pub type Rational = Ratio<i64>;

/// A strategy slot in a term: either a concrete program identifier or an
/// occurrence of a quantified strategy variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StrategyArg {
    Var(String),
    Quant(String),
}

impl StrategyArg {
    pub fn name(&self) -> &str {
        match self {
            StrategyArg::Var(s) | StrategyArg::Quant(s) => s,
        }
    }

    pub fn is_quant(&self) -> bool {
        matches!(self, StrategyArg::Quant(_))
    }
}

impl fmt::Display for StrategyArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A linear combination of base payoffs, `Σ c_k · u_k`, keyed by 0-based
/// player index. Kept sorted and free of zero coefficients so syntactic
/// equality is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PayoffCombo(BTreeMap<usize, Rational>);

impl PayoffCombo {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            let entry = map.entry(k).or_insert_with(Rational::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        PayoffCombo(map)
    }

    /// The base payoff `u_player`.
    pub fn base(player: usize) -> Self {
        PayoffCombo::new([(player, Rational::one())])
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, Rational)> + '_ {
        self.0.iter().map(|(k, c)| (*k, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(player)` when the combination is exactly one base payoff with
    /// coefficient 1.
    pub fn as_base(&self) -> Option<usize> {
        if self.0.len() == 1 {
            let (&k, c) = self.0.iter().next().unwrap();
            if c.is_one() {
                return Some(k);
            }
        }
        None
    }

    /// Value range implied by every base payoff lying in [0,1].
    pub fn value_range(&self) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (_, c) in self.coeffs() {
            if c.is_negative() {
                lo += c;
            } else {
                hi += c;
            }
        }
        (lo, hi)
    }

    pub fn max_player(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }
}

impl fmt::Display for PayoffCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.coeffs().enumerate() {
            if i == 0 {
                if c == -Rational::one() {
                    write!(f, "-")?;
                } else if !c.is_one() {
                    write!(f, "{}*", c)?;
                }
            } else if c.is_negative() {
                if c == -Rational::one() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " - {}*", -c)?;
                }
            } else if c.is_one() {
                write!(f, " + ")?;
            } else {
                write!(f, " + {}*", c)?;
            }
            write!(f, "u{}", k + 1)?;
        }
        Ok(())
    }
}

/// The payoff function applied in a payoff or max-payoff term: either a
/// concrete linear combination of base payoffs, or a universally quantified
/// payoff variable awaiting instantiation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PayoffFn {
    Combo(PayoffCombo),
    Var(String),
}

impl PayoffFn {
    pub fn base(player: usize) -> Self {
        PayoffFn::Combo(PayoffCombo::base(player))
    }

    pub fn value_range(&self) -> (Rational, Rational) {
        match self {
            PayoffFn::Combo(c) => c.value_range(),
            // A payoff variable ranges over base payoffs and program
            // combinations; instantiation removes it before boxes matter.
            PayoffFn::Var(_) => (Rational::zero(), Rational::one()),
        }
    }
}

impl fmt::Display for PayoffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayoffFn::Combo(c) => match c.as_base() {
                Some(k) => write!(f, "u{}", k + 1),
                None => write!(f, "({})", c),
            },
            PayoffFn::Var(v) => f.write_str(v),
        }
    }
}

/// A term of the encoding grammar.
///
/// Payoff applications over proper combinations are expanded by linearity at
/// construction time (see [`crate::logic::Expr::payoff_app`]), so a
/// `Term::Payoff` holds either a single base payoff or a payoff variable.
/// Max-payoff terms keep their combination opaque: the maximum of a
/// combination is not a combination of maxima.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    /// `U(x¹, …, x^r)` — one strategy argument per player.
    Payoff { payoff: PayoffFn, args: Vec<StrategyArg> },
    /// `f_player(x¹, …, x^r)` — regret of `player` at the full profile.
    Loss { player: usize, args: Vec<StrategyArg> },
    /// `max_{x^player} U(…, x^player, …)` with the other players fixed.
    /// `others` has length r−1, ordered by player index skipping `player`.
    MaxPayoff { player: usize, payoff: PayoffFn, others: Vec<StrategyArg> },
    /// A named real variable (existentially bound in encodings).
    RealVar(String),
}

impl Term {
    pub fn payoff_base(player: usize, args: Vec<StrategyArg>) -> Term {
        Term::Payoff { payoff: PayoffFn::base(player), args }
    }

    pub fn loss(player: usize, args: Vec<StrategyArg>) -> Term {
        Term::Loss { player, args }
    }

    /// `max_{x^player} u_player(…)` over the fixed opponent profile.
    pub fn max_base(player: usize, others: Vec<StrategyArg>) -> Term {
        Term::MaxPayoff { player, payoff: PayoffFn::base(player), others }
    }

    pub fn strategy_args(&self) -> &[StrategyArg] {
        match self {
            Term::Payoff { args, .. } | Term::Loss { args, .. } => args,
            Term::MaxPayoff { others, .. } => others,
            Term::RealVar(_) => &[],
        }
    }

    pub fn strategy_args_mut(&mut self) -> &mut [StrategyArg] {
        match self {
            Term::Payoff { args, .. } | Term::Loss { args, .. } => args,
            Term::MaxPayoff { others, .. } => others,
            Term::RealVar(_) => &mut [],
        }
    }

    /// True when no quantified strategy variable or payoff variable remains.
    pub fn is_ground(&self) -> bool {
        let payoff_ground = match self {
            Term::Payoff { payoff, .. } | Term::MaxPayoff { payoff, .. } => {
                matches!(payoff, PayoffFn::Combo(_))
            }
            _ => true,
        };
        payoff_ground && self.strategy_args().iter().all(|a| !a.is_quant())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |args: &[StrategyArg]| {
            args.iter().map(|a| a.name().to_string()).collect::<Vec<_>>().join(",")
        };
        match self {
            Term::Payoff { payoff, args } => write!(f, "{}({})", payoff, join(args)),
            Term::Loss { player, args } => write!(f, "f{}({})", player + 1, join(args)),
            Term::MaxPayoff { player, payoff, others } => {
                let mut slots: Vec<String> = Vec::new();
                let mut it = others.iter();
                let r = others.len() + 1;
                for p in 0..r {
                    if p == *player {
                        slots.push("*".into());
                    } else {
                        slots.push(it.next().unwrap().name().into());
                    }
                }
                write!(f, "max[{}]{}({})", player + 1, payoff, slots.join(","))
            }
            Term::RealVar(name) => f.write_str(name),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::logic::expr::{CompareOp, Comparison, TermExpr};

    pub fn arg(name: &str) -> StrategyArg {
        StrategyArg::Var(name.into())
    }

    pub fn payoff(player: usize, names: &[&str]) -> TermExpr {
        TermExpr::Atom(Term::payoff_base(player, names.iter().map(|n| arg(n)).collect()))
    }

    pub fn payoff_q(player: usize, names: &[&str]) -> TermExpr {
        // first argument quantified, rest concrete
        let mut args: Vec<StrategyArg> = names.iter().map(|n| arg(n)).collect();
        args[0] = StrategyArg::Quant(names[0].into());
        TermExpr::Atom(Term::payoff_base(player, args))
    }

    pub fn constant(v: i64) -> TermExpr {
        TermExpr::Const(Rational::from_integer(v))
    }

    pub fn cmp_le(lhs: TermExpr, rhs: TermExpr) -> Comparison<Term> {
        Comparison { lhs, op: CompareOp::Le, rhs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combo_canonicalizes_zero_and_merges() {
        let c = PayoffCombo::new([
            (1, Rational::new(1, 2)),
            (0, Rational::new(1, 3)),
            (1, Rational::new(-1, 2)),
        ]);
        assert_eq!(c.coeffs().collect::<Vec<_>>(), vec![(0, Rational::new(1, 3))]);
        assert_eq!(c.as_base(), None);
        assert_eq!(PayoffCombo::base(2).as_base(), Some(2));
    }

    #[test]
    fn combo_value_range_splits_signs() {
        let c = PayoffCombo::new([(0, Rational::one()), (1, -Rational::one())]);
        assert_eq!(c.value_range(), (-Rational::one(), Rational::one()));
    }
}
