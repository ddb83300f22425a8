//! Shared helpers for the integration suites: a dense quadratic-form oracle
//! assembled from energy evaluations (independent of the matrix-free solver
//! path) and small RNG utilities.

use wams_core::fields::{Grid, ScalarField};

/// Assembles the dense normal equations of a quadratic energy by evaluating
/// it on basis vectors, then solves by Gaussian elimination with partial
/// pivoting. The returned vector is the energy's unique minimizer.
pub fn dense_argmin(energy: &dyn Fn(&[f64]) -> f64, n: usize) -> Vec<f64> {
    let e0 = energy(&vec![0.0; n]);
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    let mut e_basis = vec![0.0; n];
    for i in 0..n {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        e_basis[i] = energy(&x);
        x[i] = 2.0;
        let e2 = energy(&x);
        a[i][i] = 0.5 * (e2 - 2.0 * e_basis[i] + e0);
        b[i] = 0.5 * (a[i][i] + e0 - e_basis[i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut x = vec![0.0; n];
            x[i] = 1.0;
            x[j] = 1.0;
            let off = 0.5 * (energy(&x) - e_basis[i] - e_basis[j] + e0);
            a[i][j] = off;
            a[j][i] = off;
        }
    }
    let mut m = a;
    let mut rhs = b;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        let d = m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / d;
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    x
}

pub fn field_from(grid: &Grid, samples: Vec<f64>) -> ScalarField {
    ScalarField::new(grid.clone(), samples).expect("finite samples")
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
