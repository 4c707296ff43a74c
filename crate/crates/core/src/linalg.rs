//! Small dense helpers shared by the solvers.

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the system is singular to working precision.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Euclidean projection of `v` onto {x : x_i >= lo, sum x = 1}.
pub fn project_floored_simplex(v: &mut [f64], lo: f64) {
    let n = v.len();
    let mass = 1.0 - lo * n as f64;
    debug_assert!(mass > 0.0);
    let mut u: Vec<f64> = v.iter().map(|x| x - lo).collect();
    let mut sorted = u.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - mass) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for (x, y) in v.iter_mut().zip(u.iter_mut()) {
        *x = (*y - theta).max(0.0) + lo;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn projection_lands_in_set() {
        let mut v = vec![0.9, -0.4, 0.3, 2.0];
        project_floored_simplex(&mut v, 0.01);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&x| x >= 0.01 - 1e-15));
        let mut w = vec![0.25; 4];
        project_floored_simplex(&mut w, 0.0);
        assert_eq!(w, vec![0.25; 4]);
    }
}
