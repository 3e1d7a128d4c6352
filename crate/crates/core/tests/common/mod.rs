//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code path it is used to check.

#![allow(dead_code)]

use rand::Rng;

/// Kendall's tau-b from the pair counts of a 2×2 table of masses.
pub fn kendall_tau_b(cells: [f64; 4]) -> f64 {
    let [a, b, c, d] = cells;
    let n = a + b + c + d;
    let pairs = n * (n - 1.0) / 2.0;
    let tied = |x: f64| x * (x - 1.0) / 2.0;
    let row_ties = tied(a + b) + tied(c + d);
    let col_ties = tied(a + c) + tied(b + d);
    let concordant = a * d;
    let discordant = b * c;
    (concordant - discordant) / ((pairs - row_ties) * (pairs - col_ties)).sqrt()
}

/// Uniform-target standardized ID in closed form: the IPF limit is
/// `[x, ½−x; ½−x, x]` with `x² / (½−x)² = OR`.
pub fn closed_form_sid(odds_ratio: f64) -> f64 {
    let s = odds_ratio.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Plain Gauss-Jordan inverse.
fn invert(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 6]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m[i][j];
        }
        a[i][3 + i] = 1.0;
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= p);
        let pivot_row = a[col];
        for (i, row) in a.iter_mut().enumerate() {
            if i != col {
                let f = row[col];
                row.iter_mut()
                    .zip(pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = a[i][3 + j];
        }
    }
    inv
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// OLS of `y` on `[1, x, x²]` via raw normal equations, with the HC1
/// sandwich `n/(n−3) (XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹`.
pub fn naive_quadratic_ols(points: &[(f64, f64)]) -> ([f64; 3], [f64; 3]) {
    let n = points.len();
    let design: Vec<[f64; 3]> = points.iter().map(|(x, _)| [1.0, *x, x * x]).collect();
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (row, (_, y)) in design.iter().zip(points) {
        for i in 0..3 {
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * y;
        }
    }
    let inv = invert(&xtx);
    let mut beta = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            beta[i] += inv[i][j] * xty[j];
        }
    }
    let mut meat = [[0.0; 3]; 3];
    for (row, (_, y)) in design.iter().zip(points) {
        let fitted: f64 = (0..3).map(|k| row[k] * beta[k]).sum();
        let e2 = (y - fitted) * (y - fitted);
        for i in 0..3 {
            for j in 0..3 {
                meat[i][j] += e2 * row[i] * row[j];
            }
        }
    }
    let cov = matmul(&matmul(&inv, &meat), &inv);
    let dof = n as f64 / (n as f64 - 3.0);
    let ses = [0, 1, 2].map(|i| (cov[i][i] * dof).sqrt());
    (beta, ses)
}

/// Random positive 2×2 cells in `[lo, hi)`.
pub fn random_cells<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> [f64; 4] {
    [0; 4].map(|_| rng.gen_range(lo..hi))
}
