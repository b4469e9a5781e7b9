//! Maximize each disjunct's objective subject to its constraints.
//!
//! Built-in path, per disjunct:
//!
//! 1. fold a single-variable objective's upper bounds into a min-objective;
//! 2. eliminate affine equalities (Gauss–Jordan), leaving a free-coordinate
//!    space plus inequality/nonlinear residuals;
//! 3. a differential-evolution pass over the free space with an annealed
//!    quadratic penalty, globally seeding
//! 4. multistart projected ascent with subgradient steps for min/max terms
//!    and a compass-search polish.
//!
//! Equality constraints act as paired inequalities within the feasibility
//! tolerance. Everything is deterministic for a fixed seed. The certified
//! bound is the max over disjunct optima; infeasible disjuncts contribute −∞
//! (a vacuous premise imposes no bound).

mod cross_check;
mod eval;
mod export;
mod linear;
mod tape;

pub use cross_check::{cross_check, CrossCheckReport};
pub use eval::{as_affine, eval as eval_expr, grad as grad_expr, CompiledConstraint, IExpr};
pub use export::{export_script, ExportDialect, ExportError};

use crate::logic::{CompareOp, Expr};
use crate::optprob::OptimizationProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use tape::Tape;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    /// Feasibility/optimality epsilon.
    pub tolerance: f64,
    /// Iteration budget per start (split across the penalty schedule).
    pub max_iterations: usize,
    pub seed: u64,
    /// Multiplicative penalty growth per outer round.
    pub penalty_growth: f64,
    pub initial_penalty: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 64,
            tolerance: 1e-7,
            max_iterations: 2000,
            seed: 0x1e90,
            penalty_growth: 10.0,
            initial_penalty: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    BoxBoundaryHit,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisjunctResult {
    pub value: f64,
    pub point: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub restarts_used: usize,
}

/// The solved certificate: the bound is a proven worst-case approximation
/// bound for the encoded algorithm (up to numerical solving).
#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    /// Max over feasible disjunct optima; −∞ when every disjunct is
    /// infeasible (vacuous premise).
    pub bound: f64,
    /// Reported additively when the program used δ-approximate blocks.
    pub delta_flag: bool,
    pub per_disjunct: Vec<DisjunctResult>,
    /// False when any disjunct failed numerically.
    pub valid: bool,
    pub vacuous: bool,
    pub elapsed_ms: u128,
    pub config: SolverConfig,
}

impl BoundCertificate {
    pub fn bound_text(&self) -> String {
        if self.vacuous {
            return "vacuous (no satisfiable branch)".to_string();
        }
        if self.delta_flag {
            format!("{:.5}+delta", self.bound)
        } else {
            format!("{:.5}", self.bound)
        }
    }
}

struct Compiled {
    boxes: Vec<(f64, f64)>,
    objective: IExpr,
    constraints: Vec<CompiledConstraint>,
}

fn compile(problem: &OptimizationProblem, disjunct: usize) -> Compiled {
    let index: indexmap::IndexMap<&String, usize> =
        problem.variables.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let to_idx = |e: &Expr<String>| -> IExpr { e.map_atoms(&mut |n: &String| Expr::Atom(index[n])) };
    let d = &problem.disjuncts[disjunct];
    Compiled {
        boxes: problem.variables.values().map(|b| (b.lo, b.hi)).collect(),
        objective: to_idx(&d.objective),
        constraints: d
            .constraints
            .iter()
            .map(|c| CompiledConstraint { lhs: to_idx(&c.lhs), op: c.op, rhs: to_idx(&c.rhs) })
            .collect(),
    }
}

/// Maximize every disjunct and assemble the certificate.
pub fn solve_builtin(problem: &OptimizationProblem, cfg: &SolverConfig) -> BoundCertificate {
    let start = Instant::now();
    let per_disjunct: Vec<DisjunctResult> = (0..problem.disjuncts.len())
        .map(|di| solve_disjunct(problem, di, cfg))
        .collect();

    let valid = per_disjunct.iter().all(|r| r.status != SolveStatus::Failed);
    let feasible: Vec<&DisjunctResult> = per_disjunct
        .iter()
        .filter(|r| matches!(r.status, SolveStatus::Converged | SolveStatus::BoxBoundaryHit))
        .collect();
    let vacuous = feasible.is_empty();
    let bound = feasible.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);

    BoundCertificate {
        bound,
        delta_flag: problem.delta_flag,
        per_disjunct,
        valid,
        vacuous,
        elapsed_ms: start.elapsed().as_millis(),
        config: cfg.clone(),
    }
}

struct EliminatedObjective {
    var: usize,
    lo: f64,
    hi: f64,
}

/// When the objective is a bare variable that appears in the constraints
/// only as `v ≤ expr` (or `expr ≥ v`), fold those bounds into
/// `min(box_hi, exprs…)` and drop the constraints. The optimum is
/// unchanged: at a maximizer the variable sits at its smallest bound.
fn eliminate_objective_var(c: &mut Compiled) -> Option<EliminatedObjective> {
    let Expr::Atom(v) = c.objective else { return None };
    let mentions = |e: &IExpr| {
        let mut hit = false;
        e.for_each_atom(&mut |i: &usize| hit |= *i == v);
        hit
    };
    let mut bounds: Vec<IExpr> = Vec::new();
    for k in &c.constraints {
        let own_upper = match (&k.lhs, k.op, &k.rhs) {
            (Expr::Atom(i), CompareOp::Le, rhs) if *i == v => Some(rhs),
            (lhs, CompareOp::Ge, Expr::Atom(i)) if *i == v => Some(lhs),
            _ => None,
        };
        match own_upper {
            Some(bound) => {
                if mentions(bound) {
                    return None;
                }
                bounds.push(bound.clone());
            }
            None => {
                if mentions(&k.lhs) || mentions(&k.rhs) {
                    // appears in some other role: leave the problem alone
                    return None;
                }
            }
        }
    }
    if bounds.is_empty() {
        return None;
    }
    let (lo, hi) = c.boxes[v];
    let mut parts = Vec::with_capacity(bounds.len() + 1);
    parts.push(rational_const(hi));
    parts.extend(bounds);
    c.objective = Expr::Min(parts);
    c.constraints.retain(|k| {
        !matches!((&k.lhs, k.op), (Expr::Atom(i), CompareOp::Le) if *i == v)
            && !matches!((&k.rhs, k.op), (Expr::Atom(i), CompareOp::Ge) if *i == v)
    });
    Some(EliminatedObjective { var: v, lo, hi })
}

fn rational_const(v: f64) -> IExpr {
    // box bounds come from exact rationals upstream; a 10^9 denominator
    // captures every box in use losslessly
    Expr::Const(crate::logic::Rational::new((v * 1e9).round() as i64, 1_000_000_000))
}

/// Tape-compiled working set for one disjunct. Violations are computed from
/// residual tapes (`lhs − rhs`, or `rhs − lhs` for `≥`): positive residual
/// means violated for inequalities, any residual counts for equalities.
#[derive(Clone)]
struct Task {
    boxes: Vec<(f64, f64)>,
    free: Vec<usize>,
    elim: linear::AffineElimination,
    objective: Tape,
    /// `(is_equality, residual tape)`.
    residuals: Vec<(bool, Tape)>,
    full: Vec<f64>,
    g_full: Vec<f64>,
}

impl Task {
    fn build(compiled: &Compiled) -> Task {
        let n = compiled.boxes.len();
        let (elim, residual_constraints) =
            linear::AffineElimination::build(&compiled.constraints, n);
        let residuals = residual_constraints
            .iter()
            .map(|c| {
                let expr = match c.op {
                    CompareOp::Le | CompareOp::Eq => c.lhs.clone().sub(c.rhs.clone()),
                    CompareOp::Ge => c.rhs.clone().sub(c.lhs.clone()),
                };
                (c.op == CompareOp::Eq, Tape::compile(&expr))
            })
            .collect();
        Task {
            boxes: compiled.boxes.clone(),
            free: elim.free.clone(),
            elim,
            objective: Tape::compile(&compiled.objective),
            residuals,
            full: vec![0.0; n],
            g_full: vec![0.0; n],
        }
    }

    fn reconstruct(&mut self, free_vals: &[f64]) {
        let mut full = std::mem::take(&mut self.full);
        self.elim.reconstruct(free_vals, &mut full);
        self.full = full;
    }

    fn objective_value(&mut self) -> f64 {
        self.objective.eval(&self.full)
    }

    fn max_violation(&mut self) -> f64 {
        let mut worst: f64 = 0.0;
        for (is_eq, t) in self.residuals.iter_mut() {
            let v = t.eval(&self.full);
            worst = worst.max(if *is_eq { v.abs() } else { v });
        }
        for p in &self.elim.pinned {
            let (lo, hi) = self.boxes[p.var];
            worst = worst.max(lo - self.full[p.var]).max(self.full[p.var] - hi);
        }
        worst
    }

    fn penalty(&mut self, mu: f64) -> f64 {
        let mut v = self.objective.eval(&self.full);
        for (is_eq, t) in self.residuals.iter_mut() {
            let r = t.eval(&self.full);
            let viol = if *is_eq { r } else { r.max(0.0) };
            v -= mu * viol * viol;
        }
        for p in &self.elim.pinned {
            let (lo, hi) = self.boxes[p.var];
            let viol = (lo - self.full[p.var]).max(self.full[p.var] - hi).max(0.0);
            v -= mu * viol * viol;
        }
        v
    }

    /// Gradient of the penalized objective over free coordinates; the point
    /// must already be reconstructed.
    fn penalty_grad(&mut self, mu: f64, g_free: &mut [f64]) {
        let mut g_full = std::mem::take(&mut self.g_full);
        for g in g_full.iter_mut() {
            *g = 0.0;
        }
        self.objective.eval(&self.full);
        self.objective.grad(&self.full, 1.0, &mut g_full);
        for (is_eq, t) in self.residuals.iter_mut() {
            let r = t.eval(&self.full);
            let active = if *is_eq { r != 0.0 } else { r > 0.0 };
            if active {
                let viol = if *is_eq { r } else { r.max(0.0) };
                t.grad(&self.full, -2.0 * mu * viol, &mut g_full);
            }
        }
        for p in &self.elim.pinned {
            let (lo, hi) = self.boxes[p.var];
            let over = self.full[p.var] - hi;
            let under = lo - self.full[p.var];
            if over > 0.0 {
                g_full[p.var] -= 2.0 * mu * over;
            } else if under > 0.0 {
                g_full[p.var] += 2.0 * mu * under;
            }
        }
        self.elim.reduce_grad(&g_full, g_free);
        self.g_full = g_full;
    }

    fn free_boxes(&self) -> Vec<(f64, f64)> {
        self.free.iter().map(|&i| self.boxes[i]).collect()
    }
}

fn solve_disjunct(problem: &OptimizationProblem, disjunct: usize, cfg: &SolverConfig) -> DisjunctResult {
    let mut compiled = compile(problem, disjunct);
    let n = compiled.boxes.len();
    if n == 0 {
        let value = eval_expr(&compiled.objective, &[]);
        return DisjunctResult {
            value,
            point: vec![],
            status: SolveStatus::Converged,
            iterations: 0,
            restarts_used: 0,
        };
    }

    let eliminated = eliminate_objective_var(&mut compiled);
    let task = Task::build(&compiled);

    // global phase: independent differential-evolution runs (parallel,
    // distinct seeds) whose leaders seed the local starts
    let de_runs = if task.free.len() > 48 { 4 } else { 2 };
    let mut leaders: Vec<Vec<f64>> = (0..de_runs)
        .into_par_iter()
        .flat_map(|k| {
            let mut t = task.clone();
            differential_evolution(&mut t, cfg, disjunct ^ (k << 24))
        })
        .collect();
    // interleave runs so early restarts draw from every seed
    leaders = {
        let per = leaders.len() / de_runs.max(1);
        let mut out = Vec::with_capacity(leaders.len());
        for i in 0..per {
            for r in 0..de_runs {
                if let Some(x) = leaders.get(r * per + i) {
                    out.push(x.clone());
                }
            }
        }
        out
    };

    let runs: Vec<(f64, Vec<f64>, f64, usize)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut t = task.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed ^ (disjunct as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    ^ (restart as u64).wrapping_mul(0xc2b2_ae35),
            );
            let free_boxes = t.free_boxes();
            let mut free: Vec<f64> = if restart < leaders.len() {
                leaders[restart].clone()
            } else if restart % 3 == 0 && !leaders.is_empty() {
                // perturbed leader: local basin resampling
                let base = &leaders[restart % leaders.len()];
                base.iter()
                    .zip(&free_boxes)
                    .map(|(v, (lo, hi))| (v + rng.gen_range(-0.05..0.05) * (hi - lo)).clamp(*lo, *hi))
                    .collect()
            } else {
                free_boxes.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect()
            };
            let iters = ascend(&mut t, cfg, &mut free);
            t.reconstruct(&free);
            let violation = t.max_violation();
            let value = t.objective_value();
            (value, t.full.clone(), violation, iters)
        })
        .collect();

    // deterministic reduction: best feasible value, ties by restart order
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut any_nan = false;
    for (value, x, violation, iters) in runs {
        iterations += iters;
        if value.is_nan() || violation.is_nan() {
            any_nan = true;
            continue;
        }
        if let Some(e) = &eliminated {
            // below the eliminated variable's lower box: unsatisfiable
            if value < e.lo - cfg.tolerance * 10.0 {
                continue;
            }
        }
        if violation <= cfg.tolerance * 10.0
            && best.as_ref().map(|(bv, _)| value > *bv).unwrap_or(true)
        {
            best = Some((value, x));
        }
    }
    if let (Some(e), Some((value, x))) = (&eliminated, &mut best) {
        x[e.var] = value.clamp(e.lo, e.hi);
    }

    match best {
        Some((value, point)) => {
            let at_boundary = point
                .iter()
                .zip(&compiled.boxes)
                .any(|(v, (lo, hi))| (v - lo).abs() < 1e-9 || (v - hi).abs() < 1e-9);
            DisjunctResult {
                value,
                point,
                status: if at_boundary { SolveStatus::BoxBoundaryHit } else { SolveStatus::Converged },
                iterations,
                restarts_used: cfg.restarts,
            }
        }
        None => DisjunctResult {
            value: f64::NEG_INFINITY,
            point: vec![],
            status: if any_nan { SolveStatus::Failed } else { SolveStatus::Infeasible },
            iterations,
            restarts_used: cfg.restarts,
        },
    }
}

/// Differential evolution on the penalized objective with an annealed
/// penalty, plus shrinking-box refinement rounds around the incumbent.
/// Returns the best distinct members as leaders for the local phase.
fn differential_evolution(task: &mut Task, cfg: &SolverConfig, disjunct: usize) -> Vec<Vec<f64>> {
    let nf = task.free.len();
    if nf == 0 {
        return Vec::new();
    }
    let free_boxes = task.free_boxes();
    let mut rng = ChaCha8Rng::seed_from_u64(
        cfg.seed ^ 0xdeca_f000 ^ (disjunct as u64).wrapping_mul(0x9e37_79b9),
    );

    let pop_size = (8 + 4 * nf).clamp(24, 128);
    let generations = ((cfg.max_iterations / 3).max(200) * (1 + nf / 32)).min(3000);
    let rounds = 6usize;

    let mut sample_box = free_boxes.clone();
    let mut leaders: Vec<(f64, Vec<f64>)> = Vec::new();

    // one global pass, then shrinking refinements around the incumbent
    let passes = if nf > 32 { 4 } else { 3 };
    for pass in 0..passes {
        let mut pop: Vec<Vec<f64>> = (0..pop_size)
            .map(|_| sample_box.iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect())
            .collect();
        if let Some((_, incumbent)) = leaders.first() {
            pop[0] = incumbent.clone();
        }
        let mut mu = cfg.initial_penalty;
        let mut fit: Vec<f64> = pop
            .iter()
            .map(|x| {
                task.reconstruct(x);
                task.penalty(mu)
            })
            .collect();

        for g in 0..generations {
            if g > 0 && g % (generations / rounds).max(1) == 0 {
                mu *= cfg.penalty_growth;
                for (f, x) in fit.iter_mut().zip(&pop) {
                    task.reconstruct(x);
                    *f = task.penalty(mu);
                }
            }
            for i in 0..pop_size {
                let mut pick = || loop {
                    let k = rng.gen_range(0..pop_size);
                    if k != i {
                        return k;
                    }
                };
                let (r1, r2, r3) = (pick(), pick(), pick());
                let forced = rng.gen_range(0..nf);
                let scale = 0.5 + 0.4 * rng.gen::<f64>();
                let mut trial = pop[i].clone();
                for d in 0..nf {
                    if d == forced || rng.gen::<f64>() < 0.9 {
                        let v = pop[r1][d] + scale * (pop[r2][d] - pop[r3][d]);
                        trial[d] = v.clamp(free_boxes[d].0, free_boxes[d].1);
                    }
                }
                task.reconstruct(&trial);
                let tf = task.penalty(mu);
                if tf > fit[i] {
                    pop[i] = trial;
                    fit[i] = tf;
                }
            }
        }

        let mut order: Vec<usize> = (0..pop_size).collect();
        order.sort_by(|&a, &b| {
            fit[b].partial_cmp(&fit[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for &i in order.iter().take(4) {
            leaders.push((fit[i], pop[i].clone()));
        }
        leaders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        leaders.truncate(8);

        // shrink the sampling box around the incumbent for the next pass
        if pass + 1 < passes {
            let incumbent = leaders[0].1.clone();
            let shrink = [0.25, 0.1, 0.03][pass.min(2)];
            sample_box = incumbent
                .iter()
                .zip(&free_boxes)
                .map(|(v, (lo, hi))| {
                    let w = (hi - lo) * shrink;
                    ((v - w).max(*lo), (v + w).min(*hi))
                })
                .collect();
        }
    }

    leaders.into_iter().map(|(_, x)| x).collect()
}

/// One start: penalized projected ascent over a growing penalty schedule,
/// then a compass-search polish that walks nonsmooth kinks.
fn ascend(task: &mut Task, cfg: &SolverConfig, free: &mut Vec<f64>) -> usize {
    let nf = free.len();
    let free_boxes = task.free_boxes();
    let mut iterations = 0;

    let rounds: usize = 7;
    let budget = (cfg.max_iterations / rounds.max(1)).max(20);
    let mut mu = cfg.initial_penalty;
    let mut g = vec![0.0; nf];
    for round in 0..rounds {
        let mut step = 0.1;
        let mut stall = 0;
        for _ in 0..budget {
            iterations += 1;
            task.reconstruct(free);
            task.penalty_grad(mu, &mut g);
            let gnorm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-12 {
                break;
            }
            task.reconstruct(free);
            let before = task.penalty(mu);
            let mut s = step;
            let mut improved = false;
            for _ in 0..24 {
                let cand: Vec<f64> = free
                    .iter()
                    .zip(&g)
                    .zip(&free_boxes)
                    .map(|((xi, gi), (lo, hi))| (xi + s * gi / gnorm).clamp(*lo, *hi))
                    .collect();
                task.reconstruct(&cand);
                if task.penalty(mu) > before + 1e-16 {
                    *free = cand;
                    step = (s * 1.4).min(0.5);
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
            if !improved {
                stall += 1;
                if stall > 2 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if round + 1 < rounds {
            mu *= cfg.penalty_growth;
        }
    }

    // compass polish at the final penalty level
    let mut radius = 0.02;
    let mut polish_iters = 0;
    while radius > 1e-10 && polish_iters < 4 * cfg.max_iterations {
        task.reconstruct(free);
        let before = task.penalty(mu);
        let mut improved = false;
        for i in 0..nf {
            for dir in [1.0, -1.0] {
                polish_iters += 1;
                let old = free[i];
                free[i] = (old + dir * radius).clamp(free_boxes[i].0, free_boxes[i].1);
                task.reconstruct(free);
                if task.penalty(mu) > before + 1e-16 {
                    improved = true;
                    break;
                }
                free[i] = old;
            }
            if improved {
                break;
            }
        }
        if !improved {
            radius *= 0.4;
        }
    }
    iterations + polish_iters
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Comparison, Rational};
    use crate::optprob::{Disjunct, VarBox};
    use indexmap::IndexMap;

    fn problem_one(
        vars: &[(&str, f64, f64)],
        constraints: Vec<Comparison<String>>,
        objective: Expr<String>,
    ) -> OptimizationProblem {
        let variables: IndexMap<String, VarBox> = vars
            .iter()
            .map(|(n, lo, hi)| (n.to_string(), VarBox { lo: *lo, hi: *hi }))
            .collect();
        OptimizationProblem {
            variables,
            disjuncts: vec![Disjunct { constraints, objective }],
            delta_flag: false,
        }
    }

    #[test]
    fn unconstrained_box_maximum() {
        let p = problem_one(&[("a", 0.0, 1.0)], vec![], Expr::Atom("a".into()));
        let cert = solve_builtin(&p, &SolverConfig { restarts: 4, ..Default::default() });
        assert!((cert.bound - 1.0).abs() < 1e-9);
        assert_eq!(cert.per_disjunct[0].status, SolveStatus::BoxBoundaryHit);
    }

    #[test]
    fn linear_chain_constraint() {
        // maximize a subject to a <= b/2, b in [0,1] → 0.5
        let p = problem_one(
            &[("a", 0.0, 1.0), ("b", 0.0, 1.0)],
            vec![Comparison::le(
                Expr::Atom("a".into()),
                Expr::Atom("b".into()).div(Expr::Const(Rational::from_integer(2))),
            )],
            Expr::Atom("a".into()),
        );
        let cert = solve_builtin(&p, &SolverConfig { restarts: 8, ..Default::default() });
        assert!((cert.bound - 0.5).abs() < 1e-4, "bound {}", cert.bound);
    }

    #[test]
    fn equality_constraint_is_respected() {
        // maximize a subject to a = 1 - a → 0.5
        let p = problem_one(
            &[("a", 0.0, 1.0)],
            vec![Comparison::eq(
                Expr::Atom("a".into()),
                Expr::one().sub(Expr::Atom("a".into())),
            )],
            Expr::Atom("a".into()),
        );
        let cert = solve_builtin(&p, &SolverConfig { restarts: 8, ..Default::default() });
        assert!((cert.bound - 0.5).abs() < 1e-5, "bound {}", cert.bound);
    }

    #[test]
    fn infeasible_disjunct_is_vacuous() {
        let p = problem_one(
            &[("a", 0.0, 1.0)],
            vec![Comparison::ge(
                Expr::Atom("a".into()),
                Expr::Const(Rational::from_integer(2)),
            )],
            Expr::Atom("a".into()),
        );
        let cert = solve_builtin(&p, &SolverConfig { restarts: 4, ..Default::default() });
        assert!(cert.vacuous);
        assert_eq!(cert.per_disjunct[0].status, SolveStatus::Infeasible);
        assert!(cert.valid);
    }

    #[test]
    fn objective_variable_elimination_matches_direct_solve() {
        // maximize t s.t. t <= a, t <= 1 - a: optimum 0.5 at a = 0.5
        let cons = vec![
            Comparison::le(Expr::Atom("t".into()), Expr::Atom("a".into())),
            Comparison::le(Expr::Atom("t".into()), Expr::one().sub(Expr::Atom("a".into()))),
        ];
        let p = problem_one(&[("t", 0.0, 1.0), ("a", 0.0, 1.0)], cons, Expr::Atom("t".into()));
        let cert = solve_builtin(&p, &SolverConfig { restarts: 8, ..Default::default() });
        assert!((cert.bound - 0.5).abs() < 1e-6, "bound {}", cert.bound);
        // the eliminated variable is reported at its optimal value
        assert!((cert.per_disjunct[0].point[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn determinism_and_restart_monotonicity() {
        // nonconvex: maximize max{a*(1-a), b} with b <= a*a - a + 0.3
        let obj = Expr::Max(vec![
            Expr::Atom("a".to_string()).mul(Expr::one().sub(Expr::Atom("a".into()))),
            Expr::Atom("b".into()),
        ]);
        let cons = vec![Comparison::le(
            Expr::Atom("b".into()),
            Expr::Atom("a".into())
                .mul(Expr::Atom("a".into()))
                .sub(Expr::Atom("a".into()))
                .add(Expr::Const(Rational::new(3, 10))),
        )];
        let p = problem_one(&[("a", 0.0, 1.0), ("b", 0.0, 1.0)], cons.clone(), obj.clone());
        let c1 = solve_builtin(&p, &SolverConfig { restarts: 16, seed: 7, ..Default::default() });
        let c2 = solve_builtin(&p, &SolverConfig { restarts: 16, seed: 7, ..Default::default() });
        assert_eq!(c1.bound, c2.bound);
        let c3 = solve_builtin(&p, &SolverConfig { restarts: 4, seed: 7, ..Default::default() });
        assert!(c1.bound >= c3.bound - 1e-12, "more restarts never lose");
    }
}
