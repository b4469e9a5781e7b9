//! Quantifier instantiation and term forgetting.
//!
//! Instantiation replaces payoff quantifiers by the program's payoff set and
//! strategy quantifiers by the program's constructed strategies (Procedure 1),
//! plus max-operator instantiation for strategy variables occurring exactly
//! once (Procedure 2). Forgetting renames each distinct ground term to a
//! fresh real variable, discarding functional structure. The result is a
//! quantifier-free comparison system over boxed reals.

use crate::blocks;
use crate::frontend::SourceProgram;
use crate::logic::{
    AtomicProperty, Comparison, Expr, Formula, PayoffCombo, ProgramEncoding, Rational,
    StrategyArg, Term, TermExpr,
};
use indexmap::IndexMap;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TacticsError {
    #[error(transparent)]
    Block(#[from] blocks::BlockError),
    #[error("forgetting reached non-ground term '{0}'; instantiation must run first")]
    NonGroundTerm(String),
}

/// Ordered constructed strategies per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyUniverse {
    pub per_player: Vec<Vec<String>>,
}

impl StrategyUniverse {
    pub fn from_program(prog: &SourceProgram) -> Result<Self, TacticsError> {
        Ok(StrategyUniverse { per_player: blocks::strategies_by_player(prog)? })
    }

    pub fn strategies(&self, player: usize) -> &[String] {
        &self.per_player[player]
    }
}

/// The payoff-quantifier instantiation set: the base payoffs plus every
/// payoff literal appearing in the program, deduplicated in order.
pub fn payoff_set(prog: &SourceProgram) -> Vec<PayoffCombo> {
    let mut out: Vec<PayoffCombo> = (0..prog.player_count).map(PayoffCombo::base).collect();
    for a in prog.algorithm.assignments() {
        for arg in &a.args {
            if let crate::frontend::Arg::Payoff(c) = arg {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
    }
    out
}

/// Instantiate one atomic property. Returns the conjunction C₁ ∧ C₂ as a
/// single atomic carrying over the existential prefix, plus warnings for
/// quantifiers over players with no constructed strategy.
pub fn instantiate(
    atomic: &AtomicProperty,
    universe: &StrategyUniverse,
    payoffs: &[PayoffCombo],
) -> (AtomicProperty, Vec<String>) {
    let mut warnings = Vec::new();

    // step 1: payoff quantifiers expand over the payoff set
    let mut bodies: Vec<Vec<Comparison<Term>>> = vec![atomic.body.clone()];
    for pvar in &atomic.forall_payoffs {
        let mut next = Vec::with_capacity(bodies.len() * payoffs.len());
        for body in &bodies {
            for combo in payoffs {
                next.push(
                    body.iter()
                        .map(|c| Comparison {
                            lhs: c.lhs.subst_payoff(pvar, combo),
                            op: c.op,
                            rhs: c.rhs.subst_payoff(pvar, combo),
                        })
                        .collect(),
                );
            }
        }
        bodies = next;
    }

    for q in &atomic.forall_strategies {
        if universe.strategies(q.player).is_empty() {
            warnings.push(format!(
                "quantifier over Strategy{} instantiates to an empty conjunct: the program constructs no strategy for player {}",
                q.player + 1,
                q.player + 1
            ));
        }
    }

    let mut out_body: Vec<Comparison<Term>> = Vec::new();
    let mut push_unique = |c: Comparison<Term>| {
        if !out_body.contains(&c) {
            out_body.push(c);
        }
    };

    for body in &bodies {
        // Procedure 1: full cross product over strategy quantifiers
        let mut instances: Vec<Vec<Comparison<Term>>> = vec![body.clone()];
        for q in &atomic.forall_strategies {
            let mut next = Vec::new();
            for inst in &instances {
                for s in universe.strategies(q.player) {
                    let to = StrategyArg::Var(s.clone());
                    next.push(
                        inst.iter()
                            .map(|c| Comparison {
                                lhs: c.lhs.subst_strategy(&q.name, &to),
                                op: c.op,
                                rhs: c.rhs.subst_strategy(&q.name, &to),
                            })
                            .collect(),
                    );
                }
            }
            instances = next;
        }
        for inst in instances {
            for c in inst {
                push_unique(c);
            }
        }

        // Procedure 2: max-operator instantiation for variables occurring
        // exactly once (a max over two different terms need not be attained
        // at the same point)
        for q in &atomic.forall_strategies {
            let occurrences: usize = body
                .iter()
                .map(|c| {
                    c.lhs.count_strategy_occurrences(&q.name)
                        + c.rhs.count_strategy_occurrences(&q.name)
                })
                .sum();
            if occurrences != 1 {
                continue;
            }
            // the occurrence must sit in the quantified player's own slot of
            // a payoff term; otherwise no max rewriting applies
            if !occurrence_is_maximizable(body, q) {
                continue;
            }
            let mut instances: Vec<Vec<Comparison<Term>>> = vec![body.clone()];
            for other in &atomic.forall_strategies {
                if other.name == q.name {
                    continue;
                }
                let mut next = Vec::new();
                for inst in &instances {
                    for s in universe.strategies(other.player) {
                        let to = StrategyArg::Var(s.clone());
                        next.push(
                            inst.iter()
                                .map(|c| Comparison {
                                    lhs: c.lhs.subst_strategy(&other.name, &to),
                                    op: c.op,
                                    rhs: c.rhs.subst_strategy(&other.name, &to),
                                })
                                .collect(),
                        );
                    }
                }
                instances = next;
            }
            for inst in instances {
                for c in inst {
                    push_unique(Comparison {
                        lhs: to_max_term(&c.lhs, q),
                        op: c.op,
                        rhs: to_max_term(&c.rhs, q),
                    });
                }
            }
        }
    }

    let out = AtomicProperty {
        exists_reals: atomic.exists_reals.clone(),
        forall_strategies: vec![],
        forall_payoffs: vec![],
        body: out_body,
    };
    (out, warnings)
}

fn occurrence_is_maximizable(body: &[Comparison<Term>], q: &crate::logic::StrategyQuant) -> bool {
    let mut ok = false;
    let mut check = |t: &Term| {
        if let Term::Payoff { args, .. } = t {
            if args.len() > q.player {
                if let StrategyArg::Quant(name) = &args[q.player] {
                    if name == &q.name {
                        ok = true;
                    }
                }
            }
        }
    };
    for c in body {
        c.lhs.for_each_atom(&mut check);
        c.rhs.for_each_atom(&mut check);
    }
    ok
}

/// Replace the payoff term holding the quantified variable in its own slot
/// with the corresponding max-payoff term.
fn to_max_term(e: &TermExpr, q: &crate::logic::StrategyQuant) -> TermExpr {
    e.map_atoms(&mut |t: &Term| match t {
        Term::Payoff { payoff, args } => {
            if args.len() > q.player {
                if let StrategyArg::Quant(name) = &args[q.player] {
                    if name == &q.name {
                        let mut others = args.clone();
                        others.remove(q.player);
                        return Expr::Atom(Term::MaxPayoff {
                            player: q.player,
                            payoff: payoff.clone(),
                            others,
                        });
                    }
                }
            }
            Expr::Atom(t.clone())
        }
        _ => Expr::Atom(t.clone()),
    })
}

/// Whether a variable of the abstract system is a forgotten term or an
/// existentially bound real awaiting elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    TermVar,
    Exists,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarInfo {
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    /// Pretty form of the originating term (θ⁻¹); existential reals carry
    /// their own name.
    pub origin: String,
    /// The originating term itself, for numeric validation.
    pub term: Option<Term>,
}

/// And/Or tree over comparisons between named real variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Structure {
    Leaf(Comparison<String>),
    And(Vec<Structure>),
    Or(Vec<Structure>),
}

impl Structure {
    pub fn leaves(&self) -> Vec<&Comparison<String>> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }
    fn collect<'a>(&'a self, out: &mut Vec<&'a Comparison<String>>) {
        match self {
            Structure::Leaf(c) => out.push(c),
            Structure::And(parts) | Structure::Or(parts) => {
                for p in parts {
                    p.collect(out);
                }
            }
        }
    }
}

/// A quantifier-free comparison system over fresh boxed reals.
#[derive(Debug, Clone, Serialize)]
pub struct AbstractSystem {
    pub variables: IndexMap<String, VarInfo>,
    pub structure: Structure,
    pub objective: Expr<String>,
    pub delta_flag: bool,
}

impl AbstractSystem {
    pub fn constraints(&self) -> Vec<&Comparison<String>> {
        self.structure.leaves()
    }
}

/// Instantiate every atomic of a program encoding and forget terms.
pub fn abstract_system(
    enc: &ProgramEncoding,
    universe: &StrategyUniverse,
    payoffs: &[PayoffCombo],
    delta_symbolic: bool,
) -> Result<(AbstractSystem, Vec<String>), TacticsError> {
    let mut warnings = Vec::new();
    let instantiated = enc.phi.map_atoms(&mut |a| {
        let (atom, w) = instantiate(a, universe, payoffs);
        warnings.extend(w);
        Formula::Atom(atom)
    });

    let mut forgetter = Forgetter::new(delta_symbolic);
    let structure = forgetter.formula(&instantiated)?;
    let objective = forgetter.expr(&enc.goal.objective)?;

    let system = AbstractSystem {
        variables: forgetter.variables,
        structure,
        objective,
        delta_flag: enc.delta_flag && delta_symbolic,
    };
    Ok((system, warnings))
}

/// The forgetting tactic: θ maps each distinct ground term to a fresh name,
/// injectively on canonical term forms, in first-encounter order.
pub struct Forgetter {
    variables: IndexMap<String, VarInfo>,
    theta: IndexMap<Term, String>,
    next_id: usize,
    delta_symbolic: bool,
}

impl Forgetter {
    pub fn new(delta_symbolic: bool) -> Self {
        Forgetter {
            variables: IndexMap::new(),
            theta: IndexMap::new(),
            next_id: 0,
            delta_symbolic,
        }
    }

    pub fn formula(&mut self, f: &Formula) -> Result<Structure, TacticsError> {
        match f {
            Formula::And(parts) => Ok(Structure::And(
                parts.iter().map(|p| self.formula(p)).collect::<Result<_, _>>()?,
            )),
            Formula::Or(parts) => Ok(Structure::Or(
                parts.iter().map(|p| self.formula(p)).collect::<Result<_, _>>()?,
            )),
            Formula::Atom(atom) => {
                for e in &atom.exists_reals {
                    self.variables.entry(e.name.clone()).or_insert(VarInfo {
                        kind: VarKind::Exists,
                        lo: e.lo.to_f64().unwrap_or(0.0),
                        hi: e.hi.to_f64().unwrap_or(1.0),
                        origin: e.name.clone(),
                        term: None,
                    });
                }
                let mut leaves = Vec::with_capacity(atom.body.len());
                for c in &atom.body {
                    leaves.push(Structure::Leaf(Comparison {
                        lhs: self.expr(&c.lhs)?,
                        op: c.op,
                        rhs: self.expr(&c.rhs)?,
                    }));
                }
                Ok(if leaves.len() == 1 { leaves.pop().unwrap() } else { Structure::And(leaves) })
            }
        }
    }

    pub fn expr(&mut self, e: &TermExpr) -> Result<Expr<String>, TacticsError> {
        if !self.delta_symbolic {
            if let Expr::Delta = e {
                return Ok(Expr::Const(Rational::from_integer(0)));
            }
        }
        let mut err = None;
        let out = e.map_atoms(&mut |t: &Term| match self.var_for(t) {
            Ok(name) => Expr::Atom(name),
            Err(e) => {
                err = Some(e);
                Expr::Atom(String::new())
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    fn var_for(&mut self, t: &Term) -> Result<String, TacticsError> {
        if !t.is_ground() {
            return Err(TacticsError::NonGroundTerm(t.to_string()));
        }
        if let Some(name) = self.theta.get(t) {
            return Ok(name.clone());
        }
        let (name, info) = match t {
            Term::RealVar(n) => (
                n.clone(),
                VarInfo { kind: VarKind::Exists, lo: 0.0, hi: 1.0, origin: n.clone(), term: None },
            ),
            Term::Payoff { payoff, .. } | Term::MaxPayoff { payoff, .. } => {
                self.next_id += 1;
                let (lo, hi) = payoff.value_range();
                (
                    format!("a{}", self.next_id),
                    VarInfo {
                        kind: VarKind::TermVar,
                        lo: lo.to_f64().unwrap_or(0.0),
                        hi: hi.to_f64().unwrap_or(1.0),
                        origin: t.to_string(),
                        term: Some(t.clone()),
                    },
                )
            }
            Term::Loss { .. } => {
                self.next_id += 1;
                (
                    format!("a{}", self.next_id),
                    VarInfo {
                        kind: VarKind::TermVar,
                        lo: 0.0,
                        hi: 1.0,
                        origin: t.to_string(),
                        term: Some(t.clone()),
                    },
                )
            }
        };
        // existential reals keep their declared boxes when already recorded
        self.variables.entry(name.clone()).or_insert(info);
        self.theta.insert(t.clone(), name.clone());
        Ok(name)
    }

    /// θ as (origin term, variable name) pairs in assignment order.
    pub fn symbol_table(&self) -> Vec<(Term, String)> {
        self.theta.iter().map(|(t, n)| (t.clone(), n.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{CompareOp, PayoffFn, StrategyQuant};

    fn universe(p1: &[&str], p2: &[&str]) -> StrategyUniverse {
        StrategyUniverse {
            per_player: vec![
                p1.iter().map(|s| s.to_string()).collect(),
                p2.iter().map(|s| s.to_string()).collect(),
            ],
        }
    }

    fn base_payoffs() -> Vec<PayoffCombo> {
        vec![PayoffCombo::base(0), PayoffCombo::base(1)]
    }

    /// ∀s1: u1(s1, j) <= u1(k, j) — the best-response property.
    fn br_atomic() -> AtomicProperty {
        AtomicProperty {
            exists_reals: vec![],
            forall_strategies: vec![StrategyQuant { player: 0, name: "s1".into() }],
            forall_payoffs: vec![],
            body: vec![Comparison::le(
                Expr::Atom(Term::payoff_base(
                    0,
                    vec![StrategyArg::Quant("s1".into()), StrategyArg::Var("j".into())],
                )),
                Expr::Atom(Term::payoff_base(
                    0,
                    vec![StrategyArg::Var("k".into()), StrategyArg::Var("j".into())],
                )),
            )],
        }
    }

    #[test]
    fn procedure_one_substitutes_every_strategy() {
        let (out, warnings) = instantiate(&br_atomic(), &universe(&["i", "k", "r1"], &["j"]), &base_payoffs());
        assert!(warnings.is_empty());
        let rendered: Vec<String> = out.body.iter().map(|c| c.to_string()).collect();
        assert!(rendered.contains(&"u1(i,j) <= u1(k,j)".to_string()));
        assert!(rendered.contains(&"u1(k,j) <= u1(k,j)".to_string()), "trivially true instance retained");
        assert!(rendered.contains(&"u1(r1,j) <= u1(k,j)".to_string()));
    }

    #[test]
    fn procedure_two_adds_the_max_instance() {
        let (out, _) = instantiate(&br_atomic(), &universe(&["i", "k", "r1"], &["j"]), &base_payoffs());
        let rendered: Vec<String> = out.body.iter().map(|c| c.to_string()).collect();
        assert!(rendered.contains(&"max[1]u1(*,j) <= u1(k,j)".to_string()));
        assert_eq!(out.body.len(), 4);
    }

    #[test]
    fn procedure_two_skips_repeated_variables() {
        // ∀s1: u1(s1, j) <= u1(s1, k) — s1 occurs twice
        let atomic = AtomicProperty {
            exists_reals: vec![],
            forall_strategies: vec![StrategyQuant { player: 0, name: "s1".into() }],
            forall_payoffs: vec![],
            body: vec![Comparison::le(
                Expr::Atom(Term::payoff_base(
                    0,
                    vec![StrategyArg::Quant("s1".into()), StrategyArg::Var("j".into())],
                )),
                Expr::Atom(Term::payoff_base(
                    0,
                    vec![StrategyArg::Quant("s1".into()), StrategyArg::Var("k".into())],
                )),
            )],
        };
        let (out, _) = instantiate(&atomic, &universe(&["i"], &["j", "k"]), &base_payoffs());
        assert!(out.body.iter().all(|c| !c.to_string().contains("max[")));
    }

    #[test]
    fn empty_universe_yields_warning() {
        let (out, warnings) = instantiate(&br_atomic(), &universe(&[], &["j"]), &base_payoffs());
        assert_eq!(warnings.len(), 1);
        // Procedure 1 contributes nothing; only the max instance remains
        assert_eq!(out.body.len(), 1);
        assert!(out.body[0].to_string().contains("max[1]"));
    }

    #[test]
    fn monotonicity_larger_universe_keeps_old_constraints() {
        let small = instantiate(&br_atomic(), &universe(&["i", "k"], &["j"]), &base_payoffs()).0;
        let large = instantiate(&br_atomic(), &universe(&["i", "k", "r1"], &["j"]), &base_payoffs()).0;
        for c in &small.body {
            assert!(large.body.contains(c));
        }
    }

    #[test]
    fn forgetting_maps_identical_terms_to_one_variable() {
        let t1 = Term::payoff_base(0, vec![StrategyArg::Var("i".into()), StrategyArg::Var("j".into())]);
        let t2 = t1.clone();
        let mut f = Forgetter::new(true);
        let n1 = f.var_for(&t1).unwrap();
        let n2 = f.var_for(&t2).unwrap();
        assert_eq!(n1, n2);
        let t3 = Term::payoff_base(0, vec![StrategyArg::Var("k".into()), StrategyArg::Var("j".into())]);
        assert_ne!(f.var_for(&t3).unwrap(), n1);
    }

    #[test]
    fn forgetting_rejects_quantified_terms() {
        let t = Term::payoff_base(0, vec![StrategyArg::Quant("z".into()), StrategyArg::Var("j".into())]);
        let mut f = Forgetter::new(true);
        assert!(f.var_for(&t).is_err());
    }

    #[test]
    fn combination_terms_get_interval_boxes() {
        // max over a combination u1 − u2 ranges in [−1, 1]
        let combo = PayoffCombo::new([
            (0, Rational::from_integer(1)),
            (1, Rational::from_integer(-1)),
        ]);
        let t = Term::MaxPayoff {
            player: 0,
            payoff: PayoffFn::Combo(combo),
            others: vec![StrategyArg::Var("j".into())],
        };
        let mut f = Forgetter::new(true);
        let name = f.var_for(&t).unwrap();
        let info = &f.variables[&name];
        assert_eq!((info.lo, info.hi), (-1.0, 1.0));
    }

    #[test]
    fn comparison_rewrites_to_fresh_names() {
        let atomic = br_atomic();
        let (inst, _) = instantiate(&atomic, &universe(&["i", "k"], &["j"]), &base_payoffs());
        let mut f = Forgetter::new(true);
        let s = f
            .formula(&Formula::Atom(inst))
            .unwrap();
        let leaves = s.leaves();
        assert_eq!(leaves[0].to_string(), "a1 <= a2");
        assert_eq!(leaves[0].op, CompareOp::Le);
    }
}
