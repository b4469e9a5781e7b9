//! Index-compiled expression evaluation and subgradients.

use crate::logic::{CompareOp, Expr};
use num_traits::{ToPrimitive, Zero};

/// Expression over variable indices into the solver's point vector.
pub type IExpr = Expr<usize>;

pub fn eval(e: &IExpr, x: &[f64]) -> f64 {
    match e {
        Expr::Atom(i) => x[*i],
        Expr::Const(c) => c.to_f64().unwrap_or(f64::NAN),
        Expr::Delta => 0.0,
        Expr::Add(a, b) => eval(a, x) + eval(b, x),
        Expr::Sub(a, b) => eval(a, x) - eval(b, x),
        Expr::Mul(a, b) => eval(a, x) * eval(b, x),
        Expr::Div(a, b) => {
            let d = eval(b, x);
            if d.abs() < 1e-12 {
                0.0
            } else {
                eval(a, x) / d
            }
        }
        Expr::Min(parts) => parts.iter().map(|p| eval(p, x)).fold(f64::INFINITY, f64::min),
        Expr::Max(parts) => parts.iter().map(|p| eval(p, x)).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Accumulate `seed · ∂e/∂x` into `grad`. Min/max route the seed into the
/// active branch (a subgradient at ties); division guards a vanishing
/// denominator by dropping the contribution, matching [`eval`].
pub fn grad(e: &IExpr, x: &[f64], seed: f64, out: &mut [f64]) {
    if seed == 0.0 {
        return;
    }
    match e {
        Expr::Atom(i) => out[*i] += seed,
        Expr::Const(_) | Expr::Delta => {}
        Expr::Add(a, b) => {
            grad(a, x, seed, out);
            grad(b, x, seed, out);
        }
        Expr::Sub(a, b) => {
            grad(a, x, seed, out);
            grad(b, x, -seed, out);
        }
        Expr::Mul(a, b) => {
            let va = eval(a, x);
            let vb = eval(b, x);
            grad(a, x, seed * vb, out);
            grad(b, x, seed * va, out);
        }
        Expr::Div(a, b) => {
            let vb = eval(b, x);
            if vb.abs() < 1e-9 {
                return;
            }
            let va = eval(a, x);
            grad(a, x, seed / vb, out);
            grad(b, x, -seed * va / (vb * vb), out);
        }
        Expr::Min(parts) => {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for (k, p) in parts.iter().enumerate() {
                let v = eval(p, x);
                if v < best {
                    best = v;
                    arg = k;
                }
            }
            grad(&parts[arg], x, seed, out);
        }
        Expr::Max(parts) => {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (k, p) in parts.iter().enumerate() {
                let v = eval(p, x);
                if v > best {
                    best = v;
                    arg = k;
                }
            }
            grad(&parts[arg], x, seed, out);
        }
    }
}

/// One compiled constraint: nonnegative violation and its gradient.
#[derive(Debug, Clone)]
pub struct CompiledConstraint {
    pub lhs: IExpr,
    pub op: CompareOp,
    pub rhs: IExpr,
}

impl CompiledConstraint {
    /// Signed violation; ≤ 0 is satisfied (equalities return |lhs − rhs|).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let l = eval(&self.lhs, x);
        let r = eval(&self.rhs, x);
        match self.op {
            CompareOp::Le => l - r,
            CompareOp::Ge => r - l,
            CompareOp::Eq => (l - r).abs(),
        }
    }

    /// Accumulate `seed · ∂violation/∂x` where the violation is active.
    pub fn violation_grad(&self, x: &[f64], seed: f64, out: &mut [f64]) {
        let l = eval(&self.lhs, x);
        let r = eval(&self.rhs, x);
        match self.op {
            CompareOp::Le => {
                if l - r > 0.0 {
                    grad(&self.lhs, x, seed, out);
                    grad(&self.rhs, x, -seed, out);
                }
            }
            CompareOp::Ge => {
                if r - l > 0.0 {
                    grad(&self.rhs, x, seed, out);
                    grad(&self.lhs, x, -seed, out);
                }
            }
            CompareOp::Eq => {
                let s = if l >= r { seed } else { -seed };
                grad(&self.lhs, x, s, out);
                grad(&self.rhs, x, -s, out);
            }
        }
    }
}

/// Try to read an expression as an affine function `coeffs·x + c`.
pub fn as_affine(e: &IExpr, n: usize) -> Option<(Vec<f64>, f64)> {
    match e {
        Expr::Atom(i) => {
            let mut c = vec![0.0; n];
            c[*i] = 1.0;
            Some((c, 0.0))
        }
        Expr::Const(v) => Some((vec![0.0; n], v.to_f64()?)),
        Expr::Delta => Some((vec![0.0; n], 0.0)),
        Expr::Add(a, b) => {
            let (ca, ka) = as_affine(a, n)?;
            let (cb, kb) = as_affine(b, n)?;
            Some((ca.iter().zip(&cb).map(|(x, y)| x + y).collect(), ka + kb))
        }
        Expr::Sub(a, b) => {
            let (ca, ka) = as_affine(a, n)?;
            let (cb, kb) = as_affine(b, n)?;
            Some((ca.iter().zip(&cb).map(|(x, y)| x - y).collect(), ka - kb))
        }
        Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Const(c), inner) | (inner, Expr::Const(c)) => {
                let k = c.to_f64()?;
                let (ci, ki) = as_affine(inner, n)?;
                Some((ci.iter().map(|x| x * k).collect(), ki * k))
            }
            _ => None,
        },
        Expr::Div(a, b) => match b.as_ref() {
            Expr::Const(c) if !c.numer().is_zero() => {
                let k = c.to_f64()?;
                let (ca, ka) = as_affine(a, n)?;
                Some((ca.iter().map(|x| x / k).collect(), ka / k))
            }
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Rational;

    #[test]
    fn gradient_matches_finite_differences() {
        // (x0 * x1 + max{x0, x2}) / (1 + x1)
        let e: IExpr = Expr::Atom(0)
            .mul(Expr::Atom(1))
            .add(Expr::Max(vec![Expr::Atom(0), Expr::Atom(2)]))
            .div(Expr::one().add(Expr::Atom(1)));
        let x = [0.3, 0.7, 0.9];
        let mut g = [0.0; 3];
        grad(&e, &x, 1.0, &mut g);
        let h = 1e-7;
        for i in 0..3 {
            let mut xp = x;
            xp[i] += h;
            let mut xm = x;
            xm[i] -= h;
            let fd = (eval(&e, &xp) - eval(&e, &xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5, "coord {}: fd {} vs grad {}", i, fd, g[i]);
        }
    }

    #[test]
    fn affine_extraction() {
        // 2*x0 - x1/2 + 3/4
        let e: IExpr = Expr::Const(Rational::from_integer(2))
            .mul(Expr::Atom(0))
            .sub(Expr::Atom(1).div(Expr::Const(Rational::from_integer(2))))
            .add(Expr::Const(Rational::new(3, 4)));
        let (c, k) = as_affine(&e, 2).unwrap();
        assert_eq!(c, vec![2.0, -0.5]);
        assert!((k - 0.75).abs() < 1e-12);
        let nl: IExpr = Expr::Atom(0).mul(Expr::Atom(1));
        assert!(as_affine(&nl, 2).is_none());
    }
}
