//! Zero-sum matrix games.
//!
//! Convention: the row player picks `p` to minimize `p^T A q`, the column
//! player picks `q` to maximize it. Every DEC in this crate has that shape
//! (rows are decisions, columns are models).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub value: f64,
    /// max_j (p^T A)_j - min_i (A q)_i, always >= 0 up to rounding.
    pub gap: f64,
}

fn check(a: &[Vec<f64>]) -> Result<(usize, usize)> {
    let m = a.len();
    if m == 0 || a[0].is_empty() {
        return Err(Error::Shape("empty payoff matrix".into()));
    }
    let n = a[0].len();
    for row in a {
        if row.len() != n {
            return Err(Error::Shape("ragged payoff matrix".into()));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape("non-finite payoff entry".into()));
        }
    }
    Ok((m, n))
}

/// Upper and lower values certified by a strategy pair.
pub fn certified_bounds(a: &[Vec<f64>], p: &[f64], q: &[f64]) -> (f64, f64) {
    let n = a[0].len();
    let mut upper = f64::NEG_INFINITY;
    for j in 0..n {
        let v: f64 = a.iter().zip(p).map(|(row, pi)| pi * row[j]).sum();
        upper = upper.max(v);
    }
    let lower = a
        .iter()
        .map(|row| row.iter().zip(q).map(|(x, qj)| x * qj).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (upper, lower)
}

const PIV_TOL: f64 = 1e-11;

/// Exact solve by the simplex method on the standard LP reformulation
/// max 1^T y s.t. B^T y <= 1, y >= 0, with B = A shifted to be positive.
/// The optimal y normalizes to p; the slack reduced costs give q.
pub fn solve_lp(a: &[Vec<f64>]) -> Result<GameSolution> {
    let (m, n) = check(a)?;
    let lo = a.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    // Constraints are indexed by columns j of A, variables by rows i.
    let cons = n;
    let vars = m;
    let width = vars + cons + 1;
    let mut t = vec![vec![0.0; width]; cons + 1];
    for j in 0..cons {
        for i in 0..vars {
            t[j][i] = a[i][j] + shift;
        }
        t[j][vars + j] = 1.0;
        t[j][width - 1] = 1.0;
    }
    // Objective row holds reduced costs -c.
    for i in 0..vars {
        t[cons][i] = -1.0;
    }
    let mut basis: Vec<usize> = (vars..vars + cons).collect();
    let mut degenerate_run = 0usize;
    let max_iter = 50 * (cons + vars) + 1000;
    for _ in 0..max_iter {
        let obj = &t[cons];
        let bland = degenerate_run > 2 * (cons + vars);
        let enter = if bland {
            (0..width - 1).find(|&c| obj[c] < -PIV_TOL)
        } else {
            let mut best = None;
            let mut best_v = -PIV_TOL;
            for (c, &v) in obj.iter().enumerate().take(width - 1) {
                if v < best_v {
                    best_v = v;
                    best = Some(c);
                }
            }
            best
        };
        let Some(e) = enter else { break };
        let mut leave = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..cons {
            let coef = t[r][e];
            if coef > PIV_TOL {
                let ratio = t[r][width - 1] / coef;
                let better = ratio < best_ratio - 1e-14
                    || (ratio <= best_ratio + 1e-14 && leave.is_some_and(|l: usize| basis[r] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(l) = leave else {
            return Err(Error::Degenerate("unbounded linear program".into()));
        };
        if best_ratio < 1e-14 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
        let piv = t[l][e];
        for x in t[l].iter_mut() {
            *x /= piv;
        }
        let prow = t[l].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != l {
                let f = row[e];
                if f != 0.0 {
                    for (x, y) in row.iter_mut().zip(&prow) {
                        *x -= f * y;
                    }
                }
            }
        }
        basis[l] = e;
    }
    let mut y = vec![0.0; vars];
    for (r, &b) in basis.iter().enumerate() {
        if b < vars {
            y[b] = t[r][width - 1].max(0.0);
        }
    }
    let sy: f64 = y.iter().sum();
    let mut qd: Vec<f64> = (0..cons).map(|j| t[cons][vars + j].max(0.0)).collect();
    let sq: f64 = qd.iter().sum();
    if sy <= 0.0 || sq <= 0.0 {
        return Err(Error::Degenerate("simplex failed to reach an optimal basis".into()));
    }
    let p: Vec<f64> = y.iter().map(|v| v / sy).collect();
    for v in qd.iter_mut() {
        *v /= sq;
    }
    let (upper, lower) = certified_bounds(a, &p, &qd);
    let value = 1.0 / sy - shift;
    let value = value.clamp(lower.min(upper), upper.max(lower));
    Ok(GameSolution { p, q: qd, value, gap: (upper - lower).max(0.0) })
}

/// Optimistic multiplicative-weights self-play. Returns averaged strategies
/// and the midpoint of their certified bounds. Stops once the certified gap
/// falls below `tol` or after `max_iter` rounds.
pub fn solve_mw(a: &[Vec<f64>], max_iter: usize, tol: f64) -> Result<GameSolution> {
    let (m, n) = check(a)?;
    let lo = a.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = a.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1e-12);
    let eta = 0.5 / range;
    let mut lp = vec![0.0f64; m];
    let mut lq = vec![0.0f64; n];
    let mut p_avg = vec![0.0; m];
    let mut q_avg = vec![0.0; n];
    let mut prev_row = vec![0.0; m];
    let mut prev_col = vec![0.0; n];
    let softmax = |logits: &[f64], sign: f64| -> Vec<f64> {
        let mx = logits.iter().map(|x| sign * x).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|x| (sign * x - mx).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    };
    let mut it = 0;
    while it < max_iter {
        // Optimistic step: predict the next loss by the last one.
        let opt_p: Vec<f64> = lp.iter().zip(&prev_row).map(|(l, g)| l + g).collect();
        let opt_q: Vec<f64> = lq.iter().zip(&prev_col).map(|(l, g)| l + g).collect();
        let p = softmax(&opt_p, -eta);
        let q = softmax(&opt_q, eta);
        let row_loss: Vec<f64> = a.iter().map(|row| row.iter().zip(&q).map(|(x, y)| x * y).sum()).collect();
        let mut col_gain = vec![0.0; n];
        for (row, pi) in a.iter().zip(&p) {
            for (c, x) in col_gain.iter_mut().zip(row) {
                *c += pi * x;
            }
        }
        for i in 0..m {
            lp[i] += row_loss[i];
            p_avg[i] += p[i];
        }
        for j in 0..n {
            lq[j] += col_gain[j];
            q_avg[j] += q[j];
        }
        prev_row = row_loss;
        prev_col = col_gain;
        it += 1;
        if it % 500 == 0 {
            let (pa, qa) = normalized(&p_avg, &q_avg);
            let (u, l) = certified_bounds(a, &pa, &qa);
            if u - l < tol {
                break;
            }
        }
    }
    let (p, q) = normalized(&p_avg, &q_avg);
    let (upper, lower) = certified_bounds(a, &p, &q);
    Ok(GameSolution { p, q, value: 0.5 * (upper + lower), gap: (upper - lower).max(0.0) })
}

fn normalized(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    (p.iter().map(|x| x / sp).collect(), q.iter().map(|x| x / sq).collect())
}

/// Min-max value of `a` with strategies: LP first, MW only if the LP
/// certificate is loose.
pub fn solve_matrix_game(a: &[Vec<f64>]) -> Result<GameSolution> {
    let lp = solve_lp(a)?;
    if lp.gap <= 1e-8 {
        return Ok(lp);
    }
    let mw = solve_mw(a, 200_000, 1e-9)?;
    Ok(if mw.gap < lp.gap { mw } else { lp })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one() {
        let s = solve_lp(&[vec![0.37]]).unwrap();
        assert!((s.value - 0.37).abs() < 1e-12);
    }

    #[test]
    fn matching_pennies() {
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let s = solve_lp(&a).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.p[0] - 0.5).abs() < 1e-12 && (s.q[0] - 0.5).abs() < 1e-12);
        let w = solve_mw(&a, 20_000, 1e-7).unwrap();
        assert!(w.value.abs() < 1e-6);
    }

    #[test]
    fn dominated_rows_and_columns() {
        // Row 1 dominates (smaller everywhere), column 0 dominates.
        let a = vec![vec![3.0, 1.0], vec![2.0, 0.5], vec![4.0, 4.0]];
        let s = solve_lp(&a).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(s.gap < 1e-10);
    }
}
