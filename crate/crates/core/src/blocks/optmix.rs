//! Closed-form upper bound for the optimal mixing operation.
//!
//! Optimal mixing returns the profile minimizing the worst regret `f` over
//! all convex recombinations of the input strategies. That minimum is not
//! expressible in the term grammar, so the block is encoded by a necessary
//! condition instead: restricted to any edge of the coefficient polytope,
//! each `f_i` is bounded by the line through its endpoint values, and the
//! min over the edge of the max of those lines has a closed form `T_E`. The
//! bound `L*` is the min of `T_E` over all edges, an expression in the
//! vertex regrets only.

use crate::logic::{Expr, Rational};
use serde::Serialize;
use thiserror::Error;

/// Keeps `L*` expressions tractable; the literature programs stay far below.
pub const MAX_VERTICES: usize = 4096;
pub const MAX_EDGES: usize = 32768;

#[derive(Debug, Error, PartialEq)]
pub enum MixingError {
    #[error("optimal mixing over {requested} {what} exceeds the cap of {limit}")]
    Capacity { what: &'static str, limit: usize, requested: usize },
    #[error("optimal mixing needs at least one strategy for player {}", player + 1)]
    EmptyGroup { player: usize },
}

/// The vertex/edge structure of the mixing coefficient polytope for given
/// per-player input counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeBoundSpec {
    /// Input count per player.
    pub group_sizes: Vec<usize>,
    /// Every pure coefficient profile, lexicographically ordered; one input
    /// index per player.
    pub vertices: Vec<Vec<usize>>,
    /// Pairs of vertex indices differing in exactly one player's coordinate.
    pub edges: Vec<(usize, usize)>,
}

impl EdgeBoundSpec {
    pub fn new(group_sizes: &[usize]) -> Result<Self, MixingError> {
        for (player, &t) in group_sizes.iter().enumerate() {
            if t == 0 {
                return Err(MixingError::EmptyGroup { player });
            }
        }
        let n_vertices: usize = group_sizes.iter().product();
        if n_vertices > MAX_VERTICES {
            return Err(MixingError::Capacity {
                what: "vertices",
                limit: MAX_VERTICES,
                requested: n_vertices,
            });
        }

        let mut vertices = Vec::with_capacity(n_vertices);
        let mut idx = vec![0usize; group_sizes.len()];
        loop {
            vertices.push(idx.clone());
            // lexicographic increment, last coordinate fastest
            let mut k = group_sizes.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < group_sizes[k] {
                    break;
                }
                idx[k] = 0;
                if k == 0 {
                    break;
                }
            }
            if idx.iter().all(|&v| v == 0) {
                break;
            }
        }
        debug_assert_eq!(vertices.len(), n_vertices);

        // an edge varies exactly one player's coordinate; degenerate players
        // (a single input) contribute none
        let mut edges = Vec::new();
        for (vi, v) in vertices.iter().enumerate() {
            for k in 0..group_sizes.len() {
                for next in v[k] + 1..group_sizes[k] {
                    let mut w = v.clone();
                    w[k] = next;
                    let wi = vertices.iter().position(|x| x == &w).expect("vertex exists");
                    edges.push((vi, wi));
                    if edges.len() > MAX_EDGES {
                        return Err(MixingError::Capacity {
                            what: "edges",
                            limit: MAX_EDGES,
                            requested: edges.len(),
                        });
                    }
                }
            }
        }
        Ok(EdgeBoundSpec { group_sizes: group_sizes.to_vec(), vertices, edges })
    }
}

/// `T_E` as an expression over the endpoint regrets `a_i` (the λ=0 vertex)
/// and `b_i` (λ=1).
///
/// `T_E = min{ max_i a_i, max_i b_i, max_k l_k(λ*_{ij}) for i<j }` with
/// `l_k(λ) = a_k + λ(b_k − a_k)` and `λ*_{ij} = (a_i−a_j)/(a_i+b_j−a_j−b_i)`
/// clamped into [0,1]. When the pair does not cross in [0,1] the clamped
/// crossing degenerates to an endpoint whose value the first two entries
/// already cover, so no case split is needed.
pub fn t_e_expr<A: Clone>(a: &[Expr<A>], b: &[Expr<A>]) -> Expr<A> {
    assert_eq!(a.len(), b.len());
    let r = a.len();
    let mut entries = vec![Expr::Max(a.to_vec()), Expr::Max(b.to_vec())];
    for i in 0..r {
        for j in i + 1..r {
            let num = a[i].clone().sub(a[j].clone());
            let den = a[i].clone().add(b[j].clone()).sub(a[j].clone()).sub(b[i].clone());
            let lambda = num.div(den).clamp01();
            let lines: Vec<Expr<A>> = (0..r)
                .map(|k| {
                    a[k].clone().add(lambda.clone().mul(b[k].clone().sub(a[k].clone())))
                })
                .collect();
            entries.push(Expr::Max(lines));
        }
    }
    Expr::Min(entries)
}

/// Closed-form `T_E` on concrete values; mirrors [`t_e_expr`] exactly,
/// including the division-by-zero convention.
pub fn t_e_value(a: &[f64], b: &[f64]) -> f64 {
    let r = a.len();
    let max_a = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_b = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = max_a.min(max_b);
    for i in 0..r {
        for j in i + 1..r {
            let den = a[i] + b[j] - a[j] - b[i];
            let lambda = if den.abs() < 1e-12 { 0.0 } else { (a[i] - a[j]) / den };
            let lambda = lambda.clamp(0.0, 1.0);
            let v = (0..r)
                .map(|k| a[k] + lambda * (b[k] - a[k]))
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(v);
        }
    }
    best
}

/// `L*`: min of `T_E` over all polytope edges, or the single vertex's worst
/// regret when the polytope is a point. `vertex_regret(v, i)` supplies the
/// expression for `f_i` at vertex index `v`.
pub fn l_star_expr<A: Clone>(
    spec: &EdgeBoundSpec,
    players: usize,
    vertex_regret: impl Fn(usize, usize) -> Expr<A>,
) -> Expr<A> {
    if spec.edges.is_empty() {
        let losses: Vec<Expr<A>> = (0..players).map(|i| vertex_regret(0, i)).collect();
        return Expr::Max(losses);
    }
    let mut terms = Vec::with_capacity(spec.edges.len());
    for &(vi, wi) in &spec.edges {
        let a: Vec<Expr<A>> = (0..players).map(|i| vertex_regret(vi, i)).collect();
        let b: Vec<Expr<A>> = (0..players).map(|i| vertex_regret(wi, i)).collect();
        terms.push(t_e_expr(&a, &b));
    }
    Expr::Min(terms)
}

/// Rational-weighted line value used in tests and the numeric oracle.
pub fn line_value(a: f64, b: f64, lambda: f64) -> f64 {
    a + lambda * (b - a)
}

#[allow(dead_code)]
fn _rational_unused(_: Rational) {}

#[cfg(test)]
mod tests {
    use super::*;

    /// Grid oracle: minimize max_k l_k(λ) over λ ∈ [0,1] at step 1e-4.
    fn grid_t_e(a: &[f64], b: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let steps = 10_000;
        for s in 0..=steps {
            let lambda = s as f64 / steps as f64;
            let v = a
                .iter()
                .zip(b)
                .map(|(&ai, &bi)| line_value(ai, bi, lambda))
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(v);
        }
        best
    }

    #[test]
    fn crossing_edge_matches_grid() {
        // lines cross at 0.5 with value 0.3
        let a = [0.6, 0.0];
        let b = [0.0, 0.6];
        assert!((t_e_value(&a, &b) - 0.3).abs() < 1e-9);
        assert!((grid_t_e(&a, &b) - 0.3).abs() < 1e-4);
    }

    #[test]
    fn non_crossing_edge_takes_endpoint() {
        let a = [0.2, 0.1];
        let b = [0.5, 0.4];
        assert!((t_e_value(&a, &b) - 0.2).abs() < 1e-9);
        assert!((grid_t_e(&a, &b) - 0.2).abs() < 1e-4);
    }

    #[test]
    fn expr_and_value_agree() {
        // the expression form and the direct evaluator share semantics
        let cases = [
            (vec![0.6, 0.0], vec![0.0, 0.6]),
            (vec![0.2, 0.1], vec![0.5, 0.4]),
            (vec![0.3, 0.3, 0.9], vec![0.9, 0.2, 0.1]),
            (vec![0.5, 0.5], vec![0.5, 0.5]), // parallel, zero denominator
        ];
        for (a, b) in cases {
            let ea: Vec<Expr<usize>> = a.iter().map(|&v| Expr::Const(approx_rational(v))).collect();
            let eb: Vec<Expr<usize>> = b.iter().map(|&v| Expr::Const(approx_rational(v))).collect();
            let e = t_e_expr(&ea, &eb);
            let lhs = e.eval(&|_| f64::NAN, 0.0);
            let rhs = t_e_value(&a, &b);
            assert!((lhs - rhs).abs() < 1e-9, "{} vs {}", lhs, rhs);
        }
    }

    fn approx_rational(v: f64) -> Rational {
        Rational::new((v * 1000.0).round() as i64, 1000)
    }

    #[test]
    fn single_profile_polytope_has_no_edges() {
        let spec = EdgeBoundSpec::new(&[1, 1]).unwrap();
        assert_eq!(spec.vertices.len(), 1);
        assert!(spec.edges.is_empty());
    }

    #[test]
    fn edge_counts_for_products_of_simplices() {
        // 3 x 3 inputs for two players: 9 vertices, 3*3 + 3*3 = 18 edges
        let spec = EdgeBoundSpec::new(&[3, 3]).unwrap();
        assert_eq!(spec.vertices.len(), 9);
        assert_eq!(spec.edges.len(), 18);
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let err = EdgeBoundSpec::new(&[70, 70]).unwrap_err();
        assert!(matches!(err, MixingError::Capacity { what: "vertices", .. }));
    }
}
