//! Flat tape compilation of expressions: one forward pass evaluates, one
//! reverse pass accumulates gradients, with child values cached from the
//! forward pass. Division by zero follows the tree evaluator: value 0, no
//! gradient.

use super::eval::IExpr;
use crate::logic::Expr;
use num_traits::ToPrimitive;

#[derive(Debug, Clone)]
enum Op {
    Var(usize),
    Const(f64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    /// Children stored contiguously in `args`.
    Min(usize, usize),
    Max(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<usize>,
    /// Scratch for node values; reused across evaluations.
    values: Vec<f64>,
    adjoint: Vec<f64>,
}

impl Tape {
    pub fn compile(e: &IExpr) -> Tape {
        let mut t = Tape { ops: Vec::new(), args: Vec::new(), values: Vec::new(), adjoint: Vec::new() };
        t.push(e);
        t.values = vec![0.0; t.ops.len()];
        t.adjoint = vec![0.0; t.ops.len()];
        t
    }

    fn push(&mut self, e: &IExpr) -> usize {
        let op = match e {
            Expr::Atom(i) => Op::Var(*i),
            Expr::Const(c) => Op::Const(c.to_f64().unwrap_or(f64::NAN)),
            Expr::Delta => Op::Const(0.0),
            Expr::Add(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Op::Add(a, b)
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Op::Sub(a, b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Op::Mul(a, b)
            }
            Expr::Div(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Op::Div(a, b)
            }
            Expr::Min(parts) => {
                let ids: Vec<usize> = parts.iter().map(|p| self.push(p)).collect();
                let start = self.args.len();
                self.args.extend(ids);
                Op::Min(start, self.args.len())
            }
            Expr::Max(parts) => {
                let ids: Vec<usize> = parts.iter().map(|p| self.push(p)).collect();
                let start = self.args.len();
                self.args.extend(ids);
                Op::Max(start, self.args.len())
            }
        };
        self.ops.push(op);
        self.ops.len() - 1
    }

    /// Forward pass; ops are in child-before-parent order by construction.
    pub fn eval(&mut self, x: &[f64]) -> f64 {
        for i in 0..self.ops.len() {
            let v = match &self.ops[i] {
                Op::Var(j) => x[*j],
                Op::Const(c) => *c,
                Op::Add(a, b) => self.values[*a] + self.values[*b],
                Op::Sub(a, b) => self.values[*a] - self.values[*b],
                Op::Mul(a, b) => self.values[*a] * self.values[*b],
                Op::Div(a, b) => {
                    let d = self.values[*b];
                    if d.abs() < 1e-12 {
                        0.0
                    } else {
                        self.values[*a] / d
                    }
                }
                Op::Min(s, e) => {
                    self.args[*s..*e].iter().map(|&k| self.values[k]).fold(f64::INFINITY, f64::min)
                }
                Op::Max(s, e) => self.args[*s..*e]
                    .iter()
                    .map(|&k| self.values[k])
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            self.values[i] = v;
        }
        *self.values.last().unwrap_or(&f64::NAN)
    }

    /// Reverse pass after [`Tape::eval`]; accumulates `seed · ∂/∂x` into
    /// `out`. Min/max route the adjoint into the first extremal child.
    pub fn grad(&mut self, x: &[f64], seed: f64, out: &mut [f64]) {
        let _ = x;
        for a in self.adjoint.iter_mut() {
            *a = 0.0;
        }
        let root = self.ops.len() - 1;
        self.adjoint[root] = seed;
        for i in (0..self.ops.len()).rev() {
            let a = self.adjoint[i];
            if a == 0.0 {
                continue;
            }
            match &self.ops[i] {
                Op::Var(j) => out[*j] += a,
                Op::Const(_) => {}
                Op::Add(l, r) => {
                    self.adjoint[*l] += a;
                    self.adjoint[*r] += a;
                }
                Op::Sub(l, r) => {
                    self.adjoint[*l] += a;
                    self.adjoint[*r] -= a;
                }
                Op::Mul(l, r) => {
                    let (vl, vr) = (self.values[*l], self.values[*r]);
                    self.adjoint[*l] += a * vr;
                    self.adjoint[*r] += a * vl;
                }
                Op::Div(l, r) => {
                    let vr = self.values[*r];
                    if vr.abs() >= 1e-9 {
                        let vl = self.values[*l];
                        self.adjoint[*l] += a / vr;
                        self.adjoint[*r] -= a * vl / (vr * vr);
                    }
                }
                Op::Min(s, e) => {
                    let mut best = f64::INFINITY;
                    let mut arg = self.args[*s];
                    for &k in &self.args[*s..*e] {
                        if self.values[k] < best {
                            best = self.values[k];
                            arg = k;
                        }
                    }
                    self.adjoint[arg] += a;
                }
                Op::Max(s, e) => {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = self.args[*s];
                    for &k in &self.args[*s..*e] {
                        if self.values[k] > best {
                            best = self.values[k];
                            arg = k;
                        }
                    }
                    self.adjoint[arg] += a;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::eval as tree;

    #[test]
    fn tape_matches_tree_evaluator() {
        let e: IExpr = Expr::Atom(0)
            .mul(Expr::Atom(1))
            .add(Expr::Max(vec![Expr::Atom(0), Expr::Atom(2).mul(Expr::Atom(1))]))
            .div(Expr::one().add(Expr::Atom(1)))
            .sub(Expr::Min(vec![Expr::Atom(2), Expr::one()]));
        let mut tape = Tape::compile(&e);
        for x in [[0.3, 0.7, 0.9], [0.0, 0.0, 0.0], [1.0, 0.2, 0.5]] {
            assert!((tape.eval(&x) - tree::eval(&e, &x)).abs() < 1e-12);
            let mut g_tape = [0.0; 3];
            tape.eval(&x);
            tape.grad(&x, 1.0, &mut g_tape);
            let mut g_tree = [0.0; 3];
            tree::grad(&e, &x, 1.0, &mut g_tree);
            for i in 0..3 {
                assert!((g_tape[i] - g_tree[i]).abs() < 1e-12);
            }
        }
    }
}
