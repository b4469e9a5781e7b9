//! Explicit small games and the numeric subroutines used to execute blocks.

use crate::logic::PayoffCombo;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A normal-form game with payoff entries in [0,1], tensors stored flat in
/// row-major player order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcreteGame {
    pub players: usize,
    pub actions: Vec<usize>,
    /// One flat tensor per player.
    pub payoffs: Vec<Vec<f64>>,
}

impl ConcreteGame {
    pub fn random(players: usize, actions: &[usize], rng: &mut impl Rng) -> ConcreteGame {
        let size: usize = actions.iter().product();
        let payoffs = (0..players)
            .map(|_| (0..size).map(|_| rng.gen_range(0.0..=1.0)).collect())
            .collect();
        ConcreteGame { players, actions: actions.to_vec(), payoffs }
    }

    /// Corner cases probing normalization and tie-breaking: constant
    /// tensors, a coordination pattern, and duplicated rows.
    pub fn corner_games(players: usize, actions: &[usize]) -> Vec<ConcreteGame> {
        let size: usize = actions.iter().product();
        let constant = |v: f64| ConcreteGame {
            players,
            actions: actions.to_vec(),
            payoffs: vec![vec![v; size]; players],
        };
        let mut out = vec![constant(0.0), constant(1.0)];
        // coordination: everyone is paid when all actions match
        let mut coord = constant(0.0);
        let min_n = *actions.iter().min().unwrap();
        for a in 0..min_n {
            let profile: Vec<usize> = vec![a; players];
            let idx = flat_index(actions, &profile);
            for p in 0..players {
                coord.payoffs[p][idx] = 1.0;
            }
        }
        out.push(coord);
        // duplicated first two rows for player 1, probing argmax ties
        if actions[0] >= 2 {
            let mut dup = constant(0.0);
            for p in 0..players {
                for (idx, v) in dup.payoffs[p].iter_mut().enumerate() {
                    let profile = unflatten(actions, idx);
                    let canon = if profile[0] == 1 { 0 } else { profile[0] };
                    let mut canon_profile = profile.clone();
                    canon_profile[0] = canon;
                    // deterministic pseudo-random pattern from the profile
                    let h = canon_profile.iter().fold(p + 7, |acc, &a| acc * 31 + a);
                    *v = (h % 101) as f64 / 100.0;
                }
            }
            out.push(dup);
        }
        out
    }

    pub fn entry(&self, player: usize, profile: &[usize]) -> f64 {
        self.payoffs[player][flat_index(&self.actions, profile)]
    }

    /// Expected payoff of a mixed profile (multilinear extension).
    pub fn expected(&self, player: usize, strategies: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        let mut profile = vec![0usize; self.players];
        self.fold_profiles(&mut profile, 0, &mut |profile| {
            let mut p = 1.0;
            for (k, &a) in profile.iter().enumerate() {
                p *= strategies[k][a];
                if p == 0.0 {
                    return;
                }
            }
            total += p * self.entry(player, profile);
        });
        total
    }

    fn fold_profiles(&self, profile: &mut Vec<usize>, depth: usize, f: &mut impl FnMut(&[usize])) {
        if depth == self.players {
            f(profile);
            return;
        }
        for a in 0..self.actions[depth] {
            profile[depth] = a;
            self.fold_profiles(profile, depth + 1, f);
        }
    }

    /// Expected payoff of a linear combination of base payoffs.
    pub fn expected_combo(&self, combo: &PayoffCombo, strategies: &[Vec<f64>]) -> f64 {
        combo
            .coeffs()
            .map(|(p, c)| c.to_f64().unwrap_or(0.0) * self.expected(p, strategies))
            .sum()
    }

    /// `max_{x^p} u(x^p, rest)`: for a fixed opponent profile the expected
    /// payoff is linear in the player's strategy, so pure actions suffice.
    pub fn best_payoff_combo(&self, combo: &PayoffCombo, player: usize, strategies: &[Vec<f64>]) -> f64 {
        (0..self.actions[player])
            .map(|a| {
                let mut s = strategies.to_vec();
                s[player] = pure(self.actions[player], a);
                self.expected_combo(combo, &s)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pure best response; ties break toward the lowest action index.
    pub fn best_response(&self, player: usize, strategies: &[Vec<f64>]) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for a in 0..self.actions[player] {
            let mut s = strategies.to_vec();
            s[player] = pure(self.actions[player], a);
            let v = self.expected(player, &s);
            if v > best + 1e-12 {
                best = v;
                arg = a;
            }
        }
        pure(self.actions[player], arg)
    }

    /// Regret of `player` at the profile.
    pub fn regret(&self, player: usize, strategies: &[Vec<f64>]) -> f64 {
        let combo = PayoffCombo::base(player);
        self.best_payoff_combo(&combo, player, strategies) - self.expected(player, strategies)
    }

    pub fn max_regret(&self, strategies: &[Vec<f64>]) -> f64 {
        (0..self.players).map(|p| self.regret(p, strategies)).fold(0.0, f64::max)
    }

    /// The two-player game between `i` and `j` induced by fixing everyone
    /// else; returns `(payoff of i, payoff of j)` matrices indexed
    /// `[a_i][a_j]`, with an arbitrary payoff combination as entry source.
    pub fn induced_matrix(
        &self,
        combo: &PayoffCombo,
        i: usize,
        j: usize,
        strategies: &[Vec<f64>],
    ) -> Vec<Vec<f64>> {
        let (ni, nj) = (self.actions[i], self.actions[j]);
        let mut m = vec![vec![0.0; nj]; ni];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                let mut s = strategies.to_vec();
                s[i] = pure(ni, a);
                s[j] = pure(nj, b);
                *cell = self.expected_combo(combo, &s);
            }
        }
        m
    }
}

pub fn pure(n: usize, action: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[action] = 1.0;
    v
}

pub fn flat_index(actions: &[usize], profile: &[usize]) -> usize {
    let mut idx = 0;
    for (n, a) in actions.iter().zip(profile) {
        idx = idx * n + a;
    }
    idx
}

fn unflatten(actions: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0usize; actions.len()];
    for k in (0..actions.len()).rev() {
        out[k] = idx % actions[k];
        idx /= actions[k];
    }
    out
}

/// Uniform sample from the simplex (normalized exponentials).
pub fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -f64::ln(1.0 - rng.gen::<f64>())).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

pub fn is_simplex_point(v: &[f64], tol: f64) -> bool {
    v.iter().all(|&x| x >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Exact zero-sum solve of matrix `m` (row player minimizes, column player
/// maximizes) by support enumeration for small sizes, with a multiplicative
/// weights fallback.
pub fn solve_zero_sum(m: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let rows = m.len();
    let cols = m[0].len();
    if rows <= 5 && cols <= 5 {
        // zero-sum equilibria are exactly the general-sum equilibria of
        // (−m, m)
        let neg: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        if let Some((x, y)) = solve_bimatrix(&neg, m) {
            return (x, y);
        }
    }
    multiplicative_weights(m)
}

/// Support enumeration over a bimatrix game `(r, c)`; returns an exact
/// equilibrium when one is found on small supports.
pub fn solve_bimatrix(r: &[Vec<f64>], c: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = r.len();
    let n = r[0].len();
    let supports = |k: usize| -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for mask in 1u32..(1 << k) {
            out.push((0..k).filter(|i| mask & (1 << i) != 0).collect());
        }
        // smaller supports first: prefers pure and low-support equilibria
        out.sort_by_key(|s| s.len());
        out
    };
    for sa in supports(m) {
        for sb in supports(n) {
            if let Some((x, y)) = try_supports(r, c, &sa, &sb) {
                return Some((x, y));
            }
        }
    }
    None
}

/// Solve for an equilibrium with the given supports: the opponent must be
/// indifferent across the support and weakly worse off it.
fn try_supports(
    r: &[Vec<f64>],
    c: &[Vec<f64>],
    sa: &[usize],
    sb: &[usize],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = r.len();
    let n = r[0].len();

    // x on sa makes player 2 indifferent over sb; y on sb makes player 1
    // indifferent over sa
    let x = indifference_weights(sa, sb, &|a, b| c[a][b], m)?;
    let y = indifference_weights(sb, sa, &|b, a| r[a][b], n)?;

    // best-response checks off support
    let v1: f64 = sa.iter().map(|&a| x[a]).zip(sa).map(|_| 0.0).sum::<f64>(); // placeholder
    let _ = v1;
    let payoff1 = |a: usize| -> f64 { (0..n).map(|b| r[a][b] * y[b]).sum() };
    let payoff2 = |b: usize| -> f64 { (0..m).map(|a| c[a][b] * x[a]).sum() };
    let v_r = sa.iter().map(|&a| payoff1(a)).fold(f64::NEG_INFINITY, f64::max);
    let v_c = sb.iter().map(|&b| payoff2(b)).fold(f64::NEG_INFINITY, f64::max);
    for a in 0..m {
        if payoff1(a) > v_r + 1e-9 {
            return None;
        }
    }
    for b in 0..n {
        if payoff2(b) > v_c + 1e-9 {
            return None;
        }
    }
    Some((x, y))
}

/// Weights over `own_support` making the opponent indifferent across
/// `their_support` for payoff function `pay(own_action, their_action)`.
fn indifference_weights(
    own_support: &[usize],
    their_support: &[usize],
    pay: &dyn Fn(usize, usize) -> f64,
    own_total: usize,
) -> Option<Vec<f64>> {
    let k = own_support.len();
    // unknowns: weights w_1..w_k; equations: equal payoff across
    // their_support (|their|−1 equations) + Σw = 1
    let t = their_support.len();
    let mut a = vec![vec![0.0; k + 1]; t.max(1)];
    for (row, pair) in their_support.windows(2).enumerate() {
        for (col, &own) in own_support.iter().enumerate() {
            a[row][col] = pay(own, pair[0]) - pay(own, pair[1]);
        }
        a[row][k] = 0.0;
    }
    let sum_row = t.saturating_sub(1);
    for col in 0..k {
        a[sum_row][col] = 1.0;
    }
    a[sum_row][k] = 1.0;

    let w = gauss_solve(&mut a[..=sum_row], k)?;
    if w.iter().any(|&v| v < -1e-9) {
        return None;
    }
    let mut full = vec![0.0; own_total];
    for (&own, &wv) in own_support.iter().zip(&w) {
        full[own] = wv.max(0.0);
    }
    let s: f64 = full.iter().sum();
    if (s - 1.0).abs() > 1e-6 {
        return None;
    }
    for v in &mut full {
        *v /= s;
    }
    Some(full)
}

/// Dense Gaussian elimination for tiny square-ish systems.
fn gauss_solve(a: &mut [Vec<f64>], unknowns: usize) -> Option<Vec<f64>> {
    let rows = a.len();
    if rows < unknowns {
        return None;
    }
    let mut r = 0;
    let mut pivots = Vec::new();
    for col in 0..unknowns {
        let mut best = r;
        for i in r..rows {
            if a[i][col].abs() > a[best][col].abs() {
                best = i;
            }
        }
        if a[best][col].abs() < 1e-11 {
            return None;
        }
        a.swap(r, best);
        let piv = a[r][col];
        for j in col..=unknowns {
            a[r][j] /= piv;
        }
        for i in 0..rows {
            if i != r && a[i][col].abs() > 0.0 {
                let f = a[i][col];
                for j in col..=unknowns {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    if pivots.len() < unknowns {
        return None;
    }
    // consistency of any leftover rows
    for row in a.iter().skip(unknowns) {
        if row[..unknowns].iter().all(|v| v.abs() < 1e-9) && row[unknowns].abs() > 1e-7 {
            return None;
        }
    }
    Some((0..unknowns).map(|i| a[i][unknowns]).collect())
}

/// Multiplicative-weights play for larger zero-sum games (row minimizes).
fn multiplicative_weights(m: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let rows = m.len();
    let cols = m[0].len();
    let mut wx = vec![1.0; rows];
    let mut wy = vec![1.0; cols];
    let mut avg_x = vec![0.0; rows];
    let mut avg_y = vec![0.0; cols];
    let iters = 20_000;
    let eta = (8.0 * (rows.max(cols) as f64).ln() / iters as f64).sqrt();
    for _ in 0..iters {
        let sx: f64 = wx.iter().sum();
        let sy: f64 = wy.iter().sum();
        let x: Vec<f64> = wx.iter().map(|v| v / sx).collect();
        let y: Vec<f64> = wy.iter().map(|v| v / sy).collect();
        for (a, ax) in avg_x.iter_mut().enumerate() {
            *ax += x[a] / iters as f64;
        }
        for (b, ay) in avg_y.iter_mut().enumerate() {
            *ay += y[b] / iters as f64;
        }
        // row player minimizes, column player maximizes
        for a in 0..rows {
            let loss: f64 = (0..cols).map(|b| m[a][b] * y[b]).sum();
            wx[a] *= (-eta * loss).exp();
        }
        for b in 0..cols {
            let gain: f64 = (0..rows).map(|a| m[a][b] * x[a]).sum();
            wy[b] *= (eta * gain).exp();
        }
    }
    (avg_x, avg_y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matching_pennies_value() {
        // row minimizes; value 0.5 with uniform strategies
        let m = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (x, y) = solve_zero_sum(&m);
        assert!((x[0] - 0.5).abs() < 1e-6, "{:?}", x);
        assert!((y[0] - 0.5).abs() < 1e-6, "{:?}", y);
    }

    #[test]
    fn bimatrix_support_enumeration_finds_equilibria() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..150 {
            let n = 2 + (trial % 4);
            let g = ConcreteGame::random(2, &[n, n], &mut rng);
            let r = g.induced_matrix(&PayoffCombo::base(0), 0, 1, &[vec![0.0; n], vec![0.0; n]]);
            let c = g.induced_matrix(&PayoffCombo::base(1), 0, 1, &[vec![0.0; n], vec![0.0; n]]);
            let (x, y) = solve_bimatrix(&r, &c).expect("equilibrium exists on some support");
            let prof = vec![x, y];
            assert!(g.max_regret(&prof) < 1e-7, "regret {}", g.max_regret(&prof));
        }
    }

    #[test]
    fn zero_sum_fallback_reaches_low_regret() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m: Vec<Vec<f64>> = (0..8).map(|_| (0..8).map(|_| rng.gen::<f64>()).collect()).collect();
        let (x, y) = multiplicative_weights(&m);
        // saddle gap of the averaged strategies
        let max_col: f64 = (0..8)
            .map(|b| (0..8).map(|a| m[a][b] * x[a]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let min_row: f64 = (0..8)
            .map(|a| (0..8).map(|b| m[a][b] * y[b]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!(max_col - min_row < 0.02, "gap {}", max_col - min_row);
    }

    #[test]
    fn expected_payoff_is_multilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = ConcreteGame::random(3, &[2, 3, 2], &mut rng);
        let s = vec![
            random_simplex(2, &mut rng),
            random_simplex(3, &mut rng),
            random_simplex(2, &mut rng),
        ];
        // mixing player 0's strategy mixes the payoff linearly
        let mut s0 = s.clone();
        s0[0] = pure(2, 0);
        let mut s1 = s.clone();
        s1[0] = pure(2, 1);
        let blend = s[0][0] * g.expected(1, &s0) + s[0][1] * g.expected(1, &s1);
        assert!((blend - g.expected(1, &s)).abs() < 1e-12);
    }
}
