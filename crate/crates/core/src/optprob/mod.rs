//! From abstract systems to per-disjunct constrained maximization problems.

use crate::logic::{CompareOp, Comparison, Expr};
use crate::tactics::{AbstractSystem, Structure, VarKind};
use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_DISJUNCT_CAP: usize = 1024;

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("existential variable '{0}' carries no box")]
    MissingBox(String),
    #[error("DNF expansion would exceed {cap} disjuncts ({would} required)")]
    DisjunctExplosion { cap: usize, would: usize },
    #[error("variable '{0}' appears without a declared box")]
    UnboundedVariable(String),
}

/// Variable box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarBox {
    pub lo: f64,
    pub hi: f64,
}

/// One maximization: a conjunction of comparisons and an objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disjunct {
    pub constraints: Vec<Comparison<String>>,
    pub objective: Expr<String>,
}

/// The compiled problem: the certified bound is the max of the disjunct
/// optima.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationProblem {
    pub variables: IndexMap<String, VarBox>,
    pub disjuncts: Vec<Disjunct>,
    pub delta_flag: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Split a top-level max in the objective into one disjunct per part.
    pub split_objective: bool,
    /// Also case-split top-level min/max inside constraints; explodes on
    /// multi-edge mixing bounds, so off by default and capped.
    pub split_constraints: bool,
    pub disjunct_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { split_objective: true, split_constraints: false, disjunct_cap: DEFAULT_DISJUNCT_CAP }
    }
}

/// Free every existentially bound real inside its declared box; the And/Or
/// structure is untouched. Logically this moves `∃ρ.(A ∧ …)` to a fresh
/// optimization variable ρ.
pub fn eliminate_existentials(sys: &AbstractSystem) -> Result<AbstractSystem, OptError> {
    let mut out = sys.clone();
    for (name, info) in out.variables.iter_mut() {
        if info.kind == VarKind::Exists {
            if !info.lo.is_finite() || !info.hi.is_finite() {
                return Err(OptError::MissingBox(name.clone()));
            }
            info.kind = VarKind::TermVar;
        }
    }
    Ok(out)
}

/// Distribute the And/Or tree into a disjunct list, left-to-right.
pub fn to_dnf(structure: &Structure, cap: usize) -> Result<Vec<Vec<Comparison<String>>>, OptError> {
    fn go(
        s: &Structure,
        cap: usize,
    ) -> Result<Vec<Vec<Comparison<String>>>, OptError> {
        match s {
            Structure::Leaf(c) => Ok(vec![vec![c.clone()]]),
            Structure::Or(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(go(p, cap)?);
                    if out.len() > cap {
                        return Err(OptError::DisjunctExplosion { cap, would: out.len() });
                    }
                }
                Ok(out)
            }
            Structure::And(parts) => {
                let mut acc: Vec<Vec<Comparison<String>>> = vec![Vec::new()];
                for p in parts {
                    let sub = go(p, cap)?;
                    let would = acc.len().checked_mul(sub.len()).unwrap_or(usize::MAX);
                    if would > cap {
                        return Err(OptError::DisjunctExplosion { cap, would });
                    }
                    let mut next = Vec::with_capacity(would);
                    for a in &acc {
                        for b in &sub {
                            let mut merged = a.clone();
                            merged.extend(b.iter().cloned());
                            next.push(merged);
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
        }
    }
    go(structure, cap)
}

/// Assemble the maximization problem: existentials freed, premise in DNF,
/// objective attached (split over a top-level max by default).
pub fn build_problem(sys: &AbstractSystem, opts: BuildOptions) -> Result<OptimizationProblem, OptError> {
    let sys = eliminate_existentials(sys)?;

    let mut used: Vec<String> = Vec::new();
    let mut record = |e: &Expr<String>| {
        e.for_each_atom(&mut |n: &String| {
            if !used.contains(n) {
                used.push(n.clone());
            }
        })
    };
    for c in sys.constraints() {
        record(&c.lhs);
        record(&c.rhs);
    }
    record(&sys.objective);
    for name in &used {
        if !sys.variables.contains_key(name) {
            return Err(OptError::UnboundedVariable(name.clone()));
        }
    }

    let variables: IndexMap<String, VarBox> = sys
        .variables
        .iter()
        .map(|(n, i)| (n.clone(), VarBox { lo: i.lo, hi: i.hi }))
        .collect();

    let premises = to_dnf(&sys.structure, opts.disjunct_cap)?;

    let objectives: Vec<Expr<String>> = match (&sys.objective, opts.split_objective) {
        (Expr::Max(parts), true) => parts.clone(),
        (obj, _) => vec![obj.clone()],
    };

    let mut disjuncts = Vec::new();
    for premise in &premises {
        let premise: Vec<Comparison<String>> =
            premise.iter().flat_map(normalize_conjunctive).collect();
        for obj in &objectives {
            if opts.split_constraints {
                let split = split_nonsmooth(&premise, opts.disjunct_cap)?;
                for constraints in split {
                    disjuncts.push(Disjunct { constraints, objective: obj.clone() });
                }
            } else {
                disjuncts.push(Disjunct { constraints: premise.clone(), objective: obj.clone() });
            }
            if disjuncts.len() > opts.disjunct_cap {
                return Err(OptError::DisjunctExplosion {
                    cap: opts.disjunct_cap,
                    would: disjuncts.len(),
                });
            }
        }
    }

    Ok(OptimizationProblem { variables, disjuncts, delta_flag: sys.delta_flag })
}

/// Split the conjunctive side of min/max comparisons: `max{A,B} ≤ C` is
/// `A ≤ C ∧ B ≤ C`, `A ≤ min{B,C}` is `A ≤ B ∧ A ≤ C`, dually for `≥`.
/// These never multiply disjuncts; the disjunctive side (`≤ max`, `min ≤`)
/// is left for the nonsmooth solver or the explicit case-split flag.
fn normalize_conjunctive(c: &Comparison<String>) -> Vec<Comparison<String>> {
    let mut out = Vec::new();
    let mut queue = vec![c.clone()];
    while let Some(c) = queue.pop() {
        match (&c.op, &c.lhs, &c.rhs) {
            (CompareOp::Le, Expr::Max(parts), rhs) => {
                for p in parts {
                    queue.push(Comparison::le(p.clone(), rhs.clone()));
                }
            }
            (CompareOp::Le, lhs, Expr::Min(parts)) => {
                for p in parts {
                    queue.push(Comparison::le(lhs.clone(), p.clone()));
                }
            }
            (CompareOp::Ge, Expr::Min(parts), rhs) => {
                for p in parts {
                    queue.push(Comparison::ge(p.clone(), rhs.clone()));
                }
            }
            (CompareOp::Ge, lhs, Expr::Max(parts)) => {
                for p in parts {
                    queue.push(Comparison::ge(lhs.clone(), p.clone()));
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Case-split comparisons whose sides are top-level min/max:
/// `e ≤ max{A,B}` becomes the union of `e ≤ A` and `e ≤ B`, while
/// `e ≤ min{A,B}` is the conjunction of both — and dually for `≥`.
/// Min/max nested inside arithmetic stays; the built-in solver treats it
/// with subgradients.
fn split_nonsmooth(
    constraints: &[Comparison<String>],
    cap: usize,
) -> Result<Vec<Vec<Comparison<String>>>, OptError> {
    let mut acc: Vec<Vec<Comparison<String>>> = vec![Vec::new()];
    for c in constraints {
        let alternatives = split_one(c);
        let would = acc.len().checked_mul(alternatives.len()).unwrap_or(usize::MAX);
        if would > cap {
            return Err(OptError::DisjunctExplosion { cap, would });
        }
        let mut next = Vec::with_capacity(would);
        for base in &acc {
            for alt in &alternatives {
                let mut merged = base.clone();
                merged.extend(alt.iter().cloned());
                next.push(merged);
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// The disjunctive alternatives for one comparison (each alternative is a
/// conjunction).
fn split_one(c: &Comparison<String>) -> Vec<Vec<Comparison<String>>> {
    // normalize ≥ to ≤ by swapping sides; equalities are left alone
    let (lhs, rhs) = match c.op {
        CompareOp::Le => (c.lhs.clone(), c.rhs.clone()),
        CompareOp::Ge => (c.rhs.clone(), c.lhs.clone()),
        CompareOp::Eq => return vec![vec![c.clone()]],
    };
    // lhs ≤ rhs with rhs = max{..} → disjunction; rhs = min{..} → conjunction
    let rhs_parts: Vec<(bool, Vec<Expr<String>>)> = match rhs {
        Expr::Max(parts) => vec![(true, parts)],
        Expr::Min(parts) => vec![(false, parts)],
        other => vec![(false, vec![other])],
    };
    let lhs_parts: Vec<(bool, Vec<Expr<String>>)> = match lhs {
        // lhs ≤ r with lhs = min{..}: any part may witness → disjunction;
        // lhs = max{..}: all parts must satisfy → conjunction
        Expr::Min(parts) => vec![(true, parts)],
        Expr::Max(parts) => vec![(false, parts)],
        other => vec![(false, vec![other])],
    };
    let (l_disj, l_items) = lhs_parts.into_iter().next().unwrap();
    let (r_disj, r_items) = rhs_parts.into_iter().next().unwrap();

    let mut alternatives = Vec::new();
    match (l_disj, r_disj) {
        (false, false) => {
            let conj: Vec<Comparison<String>> = l_items
                .iter()
                .flat_map(|l| r_items.iter().map(move |r| Comparison::le(l.clone(), r.clone())))
                .collect();
            alternatives.push(conj);
        }
        (true, false) => {
            for l in &l_items {
                alternatives.push(r_items.iter().map(|r| Comparison::le(l.clone(), r.clone())).collect());
            }
        }
        (false, true) => {
            for r in &r_items {
                alternatives.push(l_items.iter().map(|l| Comparison::le(l.clone(), r.clone())).collect());
            }
        }
        (true, true) => {
            for l in &l_items {
                for r in &r_items {
                    alternatives.push(vec![Comparison::le(l.clone(), r.clone())]);
                }
            }
        }
    }
    alternatives
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tactics::VarInfo;

    fn leaf(name: &str, op: CompareOp, v: i64) -> Structure {
        Structure::Leaf(Comparison {
            lhs: Expr::Atom(name.to_string()),
            op,
            rhs: Expr::Const(crate::logic::Rational::from_integer(v)),
        })
    }

    #[test]
    fn dnf_distributes_and_over_or() {
        // A ∧ (B ∨ C) → {A,B}, {A,C}
        let s = Structure::And(vec![
            leaf("a", CompareOp::Le, 1),
            Structure::Or(vec![leaf("b", CompareOp::Le, 1), leaf("c", CompareOp::Le, 1)]),
        ]);
        let d = to_dnf(&s, 16).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].len(), 2);
        assert_eq!(d[0][1].lhs, Expr::Atom("b".to_string()));
        assert_eq!(d[1][1].lhs, Expr::Atom("c".to_string()));
    }

    #[test]
    fn pure_conjunction_is_one_disjunct() {
        let s = Structure::And(vec![leaf("a", CompareOp::Le, 1), leaf("b", CompareOp::Ge, 0)]);
        assert_eq!(to_dnf(&s, 16).unwrap().len(), 1);
    }

    #[test]
    fn explosion_is_reported() {
        let two = Structure::Or(vec![leaf("a", CompareOp::Le, 1), leaf("b", CompareOp::Le, 1)]);
        let s = Structure::And(vec![two.clone(), two.clone(), two]);
        let err = to_dnf(&s, 4).unwrap_err();
        assert!(matches!(err, OptError::DisjunctExplosion { cap: 4, .. }));
    }

    #[test]
    fn dnf_and_tree_agree_on_random_assignments() {
        // random boolean assignments to the atoms must evaluate identically
        let s = Structure::And(vec![
            Structure::Or(vec![leaf("a", CompareOp::Le, 1), leaf("b", CompareOp::Le, 1)]),
            Structure::Or(vec![leaf("c", CompareOp::Le, 1), Structure::And(vec![
                leaf("d", CompareOp::Le, 1),
                leaf("e", CompareOp::Le, 1),
            ])]),
        ]);
        let disjuncts = to_dnf(&s, 64).unwrap();
        let leaves = s.leaves();
        let n = leaves.len();
        fn eval_structure(s: &Structure, assign: &dyn Fn(&Comparison<String>) -> bool) -> bool {
            match s {
                Structure::Leaf(c) => assign(c),
                Structure::And(ps) => ps.iter().all(|p| eval_structure(p, assign)),
                Structure::Or(ps) => ps.iter().any(|p| eval_structure(p, assign)),
            }
        }
        for mask in 0..(1u32 << n) {
            let truth: std::collections::HashMap<String, bool> = leaves
                .iter()
                .enumerate()
                .map(|(i, c)| (c.to_string(), mask & (1 << i) != 0))
                .collect();
            let assign = |c: &Comparison<String>| truth[&c.to_string()];
            let tree = eval_structure(&s, &assign);
            let dnf = disjuncts.iter().any(|d| d.iter().all(|c| assign(c)));
            assert_eq!(tree, dnf, "mask {:b}", mask);
        }
    }

    #[test]
    fn objective_max_splits_into_disjunct_copies() {
        let mut variables = IndexMap::new();
        for n in ["f1", "f2"] {
            variables.insert(
                n.to_string(),
                VarInfo { kind: VarKind::TermVar, lo: 0.0, hi: 1.0, origin: n.into(), term: None },
            );
        }
        let sys = AbstractSystem {
            variables,
            structure: Structure::And(vec![leaf("f1", CompareOp::Le, 1)]),
            objective: Expr::Max(vec![Expr::Atom("f1".into()), Expr::Atom("f2".into())]),
            delta_flag: false,
        };
        let p = build_problem(&sys, BuildOptions::default()).unwrap();
        assert_eq!(p.disjuncts.len(), 2);
        assert_eq!(p.disjuncts[0].objective, Expr::Atom("f1".into()));
        assert_eq!(p.disjuncts[1].objective, Expr::Atom("f2".into()));
    }

    #[test]
    fn unboxed_variable_is_rejected() {
        let sys = AbstractSystem {
            variables: IndexMap::new(),
            structure: leaf("ghost", CompareOp::Le, 1),
            objective: Expr::Const(crate::logic::Rational::from_integer(0)),
            delta_flag: false,
        };
        assert!(matches!(
            build_problem(&sys, BuildOptions::default()),
            Err(OptError::UnboundedVariable(_))
        ));
    }

    #[test]
    fn constraint_split_expands_max_on_the_right() {
        let c = Comparison::le(
            Expr::Atom("x".to_string()),
            Expr::Max(vec![Expr::Atom("a".into()), Expr::Atom("b".into())]),
        );
        let alts = split_one(&c);
        assert_eq!(alts.len(), 2);
        let c = Comparison::le(
            Expr::Atom("x".to_string()),
            Expr::Min(vec![Expr::Atom("a".into()), Expr::Atom("b".into())]),
        );
        let alts = split_one(&c);
        assert_eq!(alts.len(), 1);
        assert_eq!(alts[0].len(), 2);
    }
}
