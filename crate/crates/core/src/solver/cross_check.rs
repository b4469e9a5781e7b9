//! Lower-bound sanity fuzzing: sample feasible points and verify none beats
//! the certified bound.
//!
//! Uniform rejection sampling almost never hits equality constraints, so
//! linear equalities are eliminated first: Gaussian elimination pins a
//! subset of coordinates as affine functions of the free ones, the free
//! coordinates are sampled in their boxes, and the full point is then
//! rejected against the remaining constraints.

use super::eval::{eval, CompiledConstraint, IExpr};
use super::linear;
use super::BoundCertificate;
use crate::logic::Expr;
use crate::optprob::OptimizationProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub samples_requested: usize,
    pub feasible_found: usize,
    /// Max objective over feasible samples, per disjunct (NaN when none).
    pub max_objective: f64,
    pub vacuous_disjuncts: usize,
    /// A feasible point whose objective exceeds the certified bound, if any.
    pub violation: Option<SoundnessViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessViolation {
    pub disjunct: usize,
    pub point: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
}

/// Sample up to `samples` feasible points across disjuncts; any feasible
/// objective above `cert.bound + tolerance` is a soundness violation.
pub fn cross_check(
    problem: &OptimizationProblem,
    cert: &BoundCertificate,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> CrossCheckReport {
    let n = problem.variables.len();
    let boxes: Vec<(f64, f64)> = problem.variables.values().map(|b| (b.lo, b.hi)).collect();
    let index: indexmap::IndexMap<&String, usize> =
        problem.variables.keys().enumerate().map(|(i, k)| (k, i)).collect();

    let mut report = CrossCheckReport {
        samples_requested: samples,
        feasible_found: 0,
        max_objective: f64::NEG_INFINITY,
        vacuous_disjuncts: 0,
        violation: None,
    };

    let per_disjunct = samples / problem.disjuncts.len().max(1);
    for (di, d) in problem.disjuncts.iter().enumerate() {
        let to_idx = |e: &Expr<String>| -> IExpr { e.map_atoms(&mut |s: &String| Expr::Atom(index[s])) };
        let objective = to_idx(&d.objective);
        let constraints: Vec<CompiledConstraint> = d
            .constraints
            .iter()
            .map(|c| CompiledConstraint { lhs: to_idx(&c.lhs), op: c.op, rhs: to_idx(&c.rhs) })
            .collect();

        // split affine equalities from everything else
        let (elim, rest) = linear::AffineElimination::build(&constraints, n);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (di as u64) << 32);
        let mut feasible_here = 0usize;
        for _ in 0..per_disjunct {
            let free_vals: Vec<f64> = elim
                .free
                .iter()
                .map(|&i| rng.gen_range(boxes[i].0..=boxes[i].1))
                .collect();
            let mut x = vec![0.0; n];
            elim.reconstruct(&free_vals, &mut x);
            if elim
                .pinned
                .iter()
                .any(|p| x[p.var] < boxes[p.var].0 - 1e-9 || x[p.var] > boxes[p.var].1 + 1e-9)
            {
                continue;
            }
            if rest.iter().any(|c| c.violation(&x) > tolerance) {
                continue;
            }
            feasible_here += 1;
            let obj = eval(&objective, &x);
            if obj > report.max_objective {
                report.max_objective = obj;
            }
            if obj > cert.bound + tolerance && report.violation.is_none() {
                report.violation = Some(SoundnessViolation {
                    disjunct: di,
                    point: x.clone(),
                    objective: obj,
                    bound: cert.bound,
                });
            }
        }
        if feasible_here == 0 {
            report.vacuous_disjuncts += 1;
        }
        report.feasible_found += feasible_here;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Comparison, Rational};
    use crate::optprob::{Disjunct, VarBox};
    use crate::solver::{solve_builtin, SolverConfig};
    use indexmap::IndexMap;

    fn chain_problem() -> OptimizationProblem {
        // maximize a subject to a = (b + c)/2, a <= b, c <= 1/2
        let mut variables = IndexMap::new();
        for v in ["a", "b", "c"] {
            variables.insert(v.to_string(), VarBox { lo: 0.0, hi: 1.0 });
        }
        let half = Expr::Const(Rational::new(1, 2));
        OptimizationProblem {
            variables,
            disjuncts: vec![Disjunct {
                constraints: vec![
                    Comparison::eq(
                        Expr::Atom("a".into()),
                        Expr::Atom("b".to_string()).add(Expr::Atom("c".into())).mul(half.clone()),
                    ),
                    Comparison::le(Expr::Atom("a".into()), Expr::Atom("b".into())),
                    Comparison::le(Expr::Atom("c".into()), half),
                ],
                objective: Expr::Atom("a".into()),
            }],
            delta_flag: false,
        }
    }

    #[test]
    fn feasible_samples_found_despite_equality() {
        let p = chain_problem();
        let cert = solve_builtin(&p, &SolverConfig { restarts: 16, ..Default::default() });
        let report = cross_check(&p, &cert, 20_000, 11, 1e-6);
        assert!(report.feasible_found > 100, "found {}", report.feasible_found);
        assert!(report.violation.is_none(), "bound {} vs max {}", cert.bound, report.max_objective);
    }

    #[test]
    fn lowered_bound_is_caught() {
        let p = chain_problem();
        let mut cert = solve_builtin(&p, &SolverConfig { restarts: 16, ..Default::default() });
        cert.bound = 0.1; // artificially broken certificate
        let report = cross_check(&p, &cert, 20_000, 11, 1e-6);
        assert!(report.violation.is_some());
    }
}
