//! Affine-equality elimination shared by the solver and the cross checker.
//!
//! Equality constraints dominate compiled systems (regret definitions,
//! mixing linearity) and are exactly what quadratic penalties handle worst,
//! so affine equalities are removed by Gauss–Jordan elimination: a pinned
//! subset of coordinates becomes an affine function of the free ones.

use super::eval::{as_affine, CompiledConstraint};
use crate::logic::CompareOp;

/// `x_pinned = k − Σ_{j free} row_j · x_j`; rows reference free variables
/// only.
#[derive(Debug, Clone)]
pub struct PinnedVar {
    pub var: usize,
    pub row: Vec<f64>,
    pub k: f64,
}

#[derive(Debug, Clone)]
pub struct AffineElimination {
    pub pinned: Vec<PinnedVar>,
    pub free: Vec<usize>,
}

impl AffineElimination {
    /// Partition the constraints of a disjunct: affine equalities are
    /// eliminated, everything else is returned for penalty handling.
    pub fn build<'a>(
        constraints: &'a [CompiledConstraint],
        n: usize,
    ) -> (Self, Vec<&'a CompiledConstraint>) {
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut rest: Vec<&CompiledConstraint> = Vec::new();
        for c in constraints {
            if c.op == CompareOp::Eq {
                if let (Some((cl, kl)), Some((cr, kr))) = (as_affine(&c.lhs, n), as_affine(&c.rhs, n)) {
                    let coeffs: Vec<f64> = cl.iter().zip(&cr).map(|(a, b)| a - b).collect();
                    if coeffs.iter().any(|c| c.abs() > 1e-12) {
                        rows.push((coeffs, kr - kl));
                        continue;
                    }
                    // degenerate 0 = c rows stay as residual checks
                }
            }
            rest.push(c);
        }
        let pinned = eliminate(&mut rows, n);
        let is_pinned: Vec<bool> = {
            let mut v = vec![false; n];
            for p in &pinned {
                v[p.var] = true;
            }
            v
        };
        let free: Vec<usize> = (0..n).filter(|i| !is_pinned[*i]).collect();
        (AffineElimination { pinned, free }, rest)
    }

    /// Fill the full point from free coordinates.
    pub fn reconstruct(&self, free_vals: &[f64], out: &mut [f64]) {
        for (slot, &v) in self.free.iter().zip(free_vals) {
            out[*slot] = v;
        }
        for p in &self.pinned {
            let mut v = p.k;
            for &j in &self.free {
                let c = p.row[j];
                if c != 0.0 {
                    v -= c * out[j];
                }
            }
            out[p.var] = v;
        }
    }

    /// Chain rule: gradient over the full point → gradient over free
    /// coordinates.
    pub fn reduce_grad(&self, g_full: &[f64], g_free: &mut [f64]) {
        for (gi, &slot) in g_free.iter_mut().zip(&self.free) {
            *gi = g_full[slot];
            for p in &self.pinned {
                let c = p.row[slot];
                if c != 0.0 {
                    *gi -= g_full[p.var] * c;
                }
            }
        }
    }
}

/// Gauss–Jordan with partial pivoting; returns pinned rows normalized to a
/// unit pivot, mutually reduced so they reference free variables only.
pub fn eliminate(rows: &mut Vec<(Vec<f64>, f64)>, n: usize) -> Vec<PinnedVar> {
    let mut pinned: Vec<PinnedVar> = Vec::new();
    let mut used = vec![false; n];
    let m = rows.len();
    let mut r = 0;
    for _ in 0..m {
        if r >= rows.len() {
            break;
        }
        let mut best: Option<(usize, usize, f64)> = None;
        for (ri, (row, _)) in rows.iter().enumerate().skip(r) {
            for (vi, &c) in row.iter().enumerate() {
                if !used[vi] && c.abs() > best.map(|(_, _, b)| b).unwrap_or(1e-9) {
                    best = Some((ri, vi, c.abs()));
                }
            }
        }
        let Some((ri, vi, _)) = best else { break };
        rows.swap(r, ri);
        let (row, k) = rows[r].clone();
        let piv = row[vi];
        let norm_row: Vec<f64> = row.iter().map(|c| c / piv).collect();
        let norm_k = k / piv;
        for (ri2, (row2, k2)) in rows.iter_mut().enumerate() {
            if ri2 != r && row2[vi].abs() > 1e-12 {
                let f = row2[vi];
                for j in 0..n {
                    row2[j] -= f * norm_row[j];
                }
                *k2 -= f * norm_k;
            }
        }
        for p in pinned.iter_mut() {
            if p.row[vi].abs() > 1e-12 {
                let f = p.row[vi];
                for j in 0..n {
                    p.row[j] -= f * norm_row[j];
                }
                p.k -= f * norm_k;
            }
        }
        used[vi] = true;
        pinned.push(PinnedVar { var: vi, row: norm_row, k: norm_k });
        r += 1;
    }
    pinned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Comparison, Expr};
    use crate::solver::eval::IExpr;

    #[test]
    fn elimination_pins_and_reconstructs() {
        // a = (b + c)/2 with vars [a, b, c]
        let half = crate::logic::Rational::new(1, 2);
        let c: IExpr = Expr::Atom(1usize).add(Expr::Atom(2)).mul(Expr::Const(half));
        let cons = vec![CompiledConstraint {
            lhs: Expr::Atom(0),
            op: CompareOp::Eq,
            rhs: c,
        }];
        let (elim, rest) = AffineElimination::build(&cons, 3);
        assert!(rest.is_empty());
        assert_eq!(elim.pinned.len(), 1);
        assert_eq!(elim.free.len(), 2);
        let mut full = [0.0; 3];
        elim.reconstruct(&[0.4, 0.8], &mut full);
        let (a, b, cc) = (full[0], full[1], full[2]);
        assert!((a - (b + cc) / 2.0).abs() < 1e-12);
    }
}
