//! Equilibrium computation for a single known model.

use crate::dist::Dist;
use crate::game::solve_lp;
use crate::instance::{Instance, Kind};
use crate::linalg::solve;

/// A CCE or CE of model `m`, as the row strategy of a matrix game whose
/// columns are the linear deviation constraints. The game value is 0 at
/// any equilibrium, so the LP witness is one.
pub fn correlated_equilibrium(inst: &Instance, m: usize, kind: Kind) -> Option<Dist> {
    if !inst.kind.is_ma() || inst.n_rows() > 4096 {
        return None;
    }
    let n = inst.n_rows();
    let sizes = inst.sizes().to_vec();
    let strides = inst.strides().to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..inst.k {
        let tab = inst.reward_table(m, j);
        let (stride, size) = (strides[j], sizes[j]);
        match kind {
            Kind::Ce => {
                for b in 0..size {
                    for a in 0..size {
                        if a == b {
                            continue;
                        }
                        cols.push(
                            (0..n)
                                .map(|r| {
                                    let cur = (r / stride) % size;
                                    if cur != b {
                                        0.0
                                    } else {
                                        tab[r + a * stride - b * stride] - tab[r]
                                    }
                                })
                                .collect(),
                        );
                    }
                }
            }
            _ => {
                for a in 0..size {
                    cols.push(
                        (0..n)
                            .map(|r| {
                                let cur = (r / stride) % size;
                                tab[r + a * stride - cur * stride] - tab[r]
                            })
                            .collect(),
                    );
                }
            }
        }
    }
    if cols.is_empty() {
        return Some(Dist::uniform(n));
    }
    let a: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let sol = solve_lp(&a).ok()?;
    Dist::new(sol.p).ok()
}

/// Support enumeration for two-player games with small action sets.
pub fn nash_two_player(inst: &Instance, m: usize) -> Option<Vec<Dist>> {
    if inst.k != 2 || !inst.kind.is_ma() {
        return None;
    }
    let (n1, n2) = (inst.sizes()[0], inst.sizes()[1]);
    if n1 > 8 || n2 > 8 {
        return None;
    }
    let u1 = inst.reward_table(m, 0);
    let u2 = inst.reward_table(m, 1);
    let a = |i: usize, j: usize| u1[i * n2 + j];
    let b = |i: usize, j: usize| u2[i * n2 + j];
    let subsets = |n: usize, k: usize| -> Vec<Vec<usize>> {
        (0u32..(1 << n)).filter(|s| s.count_ones() as usize == k).map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect()).collect()
    };
    for k in 1..=n1.min(n2) {
        for s1 in subsets(n1, k) {
            for s2 in subsets(n2, k) {
                // y on s2 makes player 1 indifferent on s1; x on s1 does the
                // same for player 2 on s2. Unknowns: weights then the value.
                let mut my = vec![vec![0.0; k + 1]; k + 1];
                let mut mx = vec![vec![0.0; k + 1]; k + 1];
                for (r, &i) in s1.iter().enumerate() {
                    for (c, &j) in s2.iter().enumerate() {
                        my[r][c] = a(i, j);
                    }
                    my[r][k] = -1.0;
                }
                for (r, &j) in s2.iter().enumerate() {
                    for (c, &i) in s1.iter().enumerate() {
                        mx[r][c] = b(i, j);
                    }
                    mx[r][k] = -1.0;
                }
                for c in 0..k {
                    my[k][c] = 1.0;
                    mx[k][c] = 1.0;
                }
                let mut rhs = vec![0.0; k + 1];
                rhs[k] = 1.0;
                let (Some(y), Some(x)) = (solve(my, rhs.clone()), solve(mx, rhs)) else { continue };
                if y[..k].iter().chain(&x[..k]).any(|&w| w < -1e-12) {
                    continue;
                }
                let mut p1 = vec![0.0; n1];
                let mut p2 = vec![0.0; n2];
                for (c, &i) in s1.iter().enumerate() {
                    p1[i] = x[c].max(0.0);
                }
                for (c, &j) in s2.iter().enumerate() {
                    p2[j] = y[c].max(0.0);
                }
                let norm = |v: Vec<f64>| {
                    let s: f64 = v.iter().sum();
                    Dist::new(v.into_iter().map(|w| w / s).collect()).ok()
                };
                let (Some(d1), Some(d2)) = (norm(p1), norm(p2)) else { continue };
                let cand = vec![d1, d2];
                let h = inst.suboptimality_generic(m, &crate::instance::Decision::Ne(cand.clone())).ok()?;
                if h <= 1e-9 {
                    return Some(cand);
                }
            }
        }
    }
    None
}
