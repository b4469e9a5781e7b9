//! Hand-encoded systems: rows whose derivation steps live outside the
//! compiler (the compiler solves them, it does not derive them), plus the
//! polymatrix and vertex-cover extension systems.

use crate::logic::{Comparison, Expr, Rational};
use crate::optprob::{Disjunct, OptimizationProblem, VarBox};
use indexmap::IndexMap;

fn boxed(names: &[(&str, f64, f64)]) -> IndexMap<String, VarBox> {
    names.iter().map(|(n, lo, hi)| (n.to_string(), VarBox { lo: *lo, hi: *hi })).collect()
}

fn v(name: &str) -> Expr<String> {
    Expr::Atom(name.to_string())
}

fn c(num: i64, den: i64) -> Expr<String> {
    Expr::Const(Rational::new(num, den))
}

/// The uniform-hedge system: each player mixes an arbitrary strategy with
/// the best response to the opponent's arbitrary strategy. The mixed
/// profile's regret obeys Jensen's inequality over the two columns; at the
/// anchor column the regret is half the best-response gain, at the other it
/// is unconstrained.
///
/// Optimum 0.75 at full gain and full residual loss.
pub fn kps_manual() -> OptimizationProblem {
    let variables = boxed(&[
        ("loss_mixed_1", 0.0, 1.0),
        ("gain_anchor_1", 0.0, 1.0),
        ("loss_far_1", 0.0, 1.0),
        ("loss_mixed_2", 0.0, 1.0),
        ("gain_anchor_2", 0.0, 1.0),
        ("loss_far_2", 0.0, 1.0),
    ]);
    let jensen = |mixed: &str, gain: &str, far: &str| {
        Comparison::le(
            v(mixed),
            c(1, 2).mul(c(1, 2).mul(v(gain))).add(c(1, 2).mul(v(far))),
        )
    };
    let constraints = vec![
        jensen("loss_mixed_1", "gain_anchor_1", "loss_far_1"),
        jensen("loss_mixed_2", "gain_anchor_2", "loss_far_2"),
    ];
    OptimizationProblem {
        variables,
        disjuncts: vec![
            Disjunct { constraints: constraints.clone(), objective: v("loss_mixed_1") },
            Disjunct { constraints, objective: v("loss_mixed_2") },
        ],
        delta_flag: false,
    }
}

/// The diagonal-derived system for the zero-sum-based 0.38 algorithm: with
/// `g` the stationary gain, the hedged case crosses a line from the
/// responder's residual loss `a2 ≤ 1 − g` against a line from the deviation
/// loss `b1 ≤ 1`, with the hedge weight `lam` free. Both case values are
/// admissible, so the certified value is their balance point, the golden
/// ratio bound. The zero-sum pair is computed approximately, hence the δ.
pub fn dmp038_manual() -> OptimizationProblem {
    let variables = boxed(&[
        ("t", 0.0, 1.0),
        ("g", 0.0, 1.0),
        ("a2", 0.0, 1.0),
        ("b1", 0.0, 1.0),
        ("lam", 0.0, 1.0),
    ]);
    let constraints = vec![
        Comparison::le(v("t"), v("g")),
        Comparison::le(v("a2"), Expr::one().sub(v("g"))),
        Comparison::le(v("t"), v("lam").mul(v("b1"))),
        Comparison::le(v("t"), Expr::one().sub(v("lam")).mul(v("a2"))),
    ];
    OptimizationProblem {
        variables,
        disjuncts: vec![Disjunct { constraints, objective: v("t") }],
        delta_flag: true,
    }
}

/// The improved zero-sum-based bound. Its published value, ½ − 1/(3√6), is
/// the smaller root of `108 t² − 108 t + 25 = 0`; the system maximizes `t`
/// under that defining quadratic, written square-free as
/// `(1 − 2t)² ≥ 2/27` on `t ∈ [0, ½]`.
pub fn bbm2_manual() -> OptimizationProblem {
    let variables = boxed(&[("t", 0.0, 0.5)]);
    let one_minus_2t = Expr::one().sub(c(2, 1).mul(v("t")));
    let constraints = vec![Comparison::ge(
        one_minus_2t.clone().mul(one_minus_2t),
        c(2, 27),
    )];
    OptimizationProblem {
        variables,
        disjuncts: vec![Disjunct { constraints, objective: v("t") }],
        delta_flag: false,
    }
}

/// The polymatrix stationary-point system, exactly as the instantiated and
/// forgotten encoding reads: maximize the stationary loss `a` subject to
/// the two dual bounds and the best-response identity, all variables
/// normalized to [0,1], δ symbolic (substituted to 0 for solving).
pub fn polymatrix() -> OptimizationProblem {
    let variables = boxed(&[
        ("a", 0.0, 1.0),
        ("b", 0.0, 1.0),
        ("c", 0.0, 1.0),
        ("d", 0.0, 1.0),
        ("e", 0.0, 1.0),
        ("f", 0.0, 1.0),
        ("g", 0.0, 1.0),
    ]);
    // δ enters symbolically and is 0 at solve time; the certificate reports
    // the additive flag
    let constraints = vec![
        Comparison::le(v("a"), v("b").add(Expr::Delta)),
        Comparison::le(v("a"), v("c").add(Expr::Delta)),
        Comparison::le(v("b"), v("d").sub(v("e"))),
        Comparison::le(v("c"), v("d").sub(v("f")).sub(v("g")).add(v("e"))),
        Comparison::eq(v("d"), v("g")),
    ];
    OptimizationProblem {
        variables,
        disjuncts: vec![Disjunct { constraints, objective: v("a") }],
        delta_flag: true,
    }
}

/// Polymatrix variants used by regression tests: dropping the identity or
/// widening the normalization changes the certified value.
pub fn polymatrix_variant(drop_identity: bool, box_hi: f64) -> OptimizationProblem {
    let mut p = polymatrix();
    if drop_identity {
        for d in &mut p.disjuncts {
            d.constraints.retain(|c| c.op != crate::logic::CompareOp::Eq);
        }
    }
    for b in p.variables.values_mut() {
        b.hi = box_hi;
    }
    p
}

/// The vertex-cover implication as a maximization: the rounded cover is at
/// most twice the relaxation, the integral optimum dominates the rounded
/// cover... the implication premise bounds `a − 2c` by zero, certifying the
/// approximation ratio 2.
pub fn vertex_cover(objective_factor: Rational, box_hi: f64) -> OptimizationProblem {
    let variables = boxed(&[("a", 0.0, box_hi), ("b", 0.0, box_hi), ("c", 0.0, box_hi)]);
    let constraints = vec![
        Comparison::le(v("a"), c(2, 1).mul(v("b"))),
        Comparison::le(v("c"), v("a")),
        Comparison::le(v("b"), v("c")),
    ];
    let objective = v("a").sub(Expr::Const(objective_factor).mul(v("c")));
    OptimizationProblem {
        variables,
        disjuncts: vec![Disjunct { constraints, objective }],
        delta_flag: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_builtin, SolverConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve(p: &OptimizationProblem) -> f64 {
        solve_builtin(p, &SolverConfig::default()).bound
    }

    #[test]
    fn kps_hand_system_is_three_quarters() {
        assert!((solve(&kps_manual()) - 0.75).abs() < 1e-5);
    }

    #[test]
    fn dmp038_hand_system_is_golden_ratio_bound() {
        assert!((solve(&dmp038_manual()) - 0.381_966_0).abs() < 1e-5);
    }

    #[test]
    fn bbm2_hand_system_matches_closed_form() {
        let expected = 0.5 - 1.0 / (3.0 * 6.0_f64.sqrt());
        assert!((solve(&bbm2_manual()) - expected).abs() < 1e-6);
    }

    #[test]
    fn polymatrix_is_one_half_plus_delta() {
        let p = polymatrix();
        let cert = solve_builtin(&p, &SolverConfig::default());
        assert!(cert.delta_flag);
        assert!((cert.bound - 0.5).abs() < 1e-4, "bound {}", cert.bound);
    }

    #[test]
    fn polymatrix_regressions_move_the_bound() {
        // dropping d = g relaxes the system: the bound rises to 1
        let relaxed = solve(&polymatrix_variant(true, 1.0));
        assert!(relaxed > 0.5 + 1e-3, "relaxed {}", relaxed);
        assert!((relaxed - 1.0).abs() < 1e-4);
        // widening the boxes to [0,2] moves the bound to 1: normalization
        // is load-bearing
        let wide = solve(&polymatrix_variant(false, 2.0));
        assert!((wide - 1.0).abs() < 1e-3, "wide {}", wide);
    }

    /// Grid-search oracle for the vertex-cover box systems.
    fn grid_vc(factor: f64, hi: f64) -> f64 {
        let steps = 60;
        let mut best = f64::NEG_INFINITY;
        for ai in 0..=steps {
            for bi in 0..=steps {
                for ci in 0..=steps {
                    let (a, b, c) =
                        (ai as f64 * hi / steps as f64, bi as f64 * hi / steps as f64, ci as f64 * hi / steps as f64);
                    if a <= 2.0 * b + 1e-12 && c <= a + 1e-12 && b <= c + 1e-12 {
                        best = best.max(a - factor * c);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn vertex_cover_certifies_ratio_two() {
        let p = vertex_cover(Rational::from_integer(2), 10.0);
        let b = solve(&p);
        assert!(b.abs() < 1e-6, "optimum {}", b);
        assert!(grid_vc(2.0, 10.0).abs() < 1e-9);
    }

    #[test]
    fn vertex_cover_ratio_is_tight() {
        // with 1.9 instead of 2 the optimum is strictly positive: 0.05·B
        let p = vertex_cover(Rational::new(19, 10), 10.0);
        let b = solve(&p);
        assert!((b - 0.5).abs() < 1e-4, "optimum {}", b);
        assert!((grid_vc(1.9, 10.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn vertex_cover_degenerate_box() {
        let p = vertex_cover(Rational::from_integer(2), 0.0);
        assert!(solve(&p).abs() < 1e-9);
    }

    #[test]
    fn dmp038_inner_balance_matches_harmonic_oracle() {
        // the lam-handled case value equals a2·b1/(a2+b1): check on random
        // instances against a dense lam grid
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a2: f64 = rng.gen();
            let b1: f64 = rng.gen();
            let harmonic = if a2 + b1 > 0.0 { a2 * b1 / (a2 + b1) } else { 0.0 };
            let mut grid_best: f64 = 0.0;
            for s in 0..=1000 {
                let lam = s as f64 / 1000.0;
                grid_best = grid_best.max((lam * b1).min((1.0 - lam) * a2));
            }
            assert!((harmonic - grid_best).abs() < 2e-3);
        }
    }
}
