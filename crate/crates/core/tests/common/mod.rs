//! Brute-force references shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let k = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= k * m[col][c];
            }
            b[r] -= k * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// `min_d max_i |f_i − a_i·d|` by visiting every vertex of the epigraph
/// polyhedron `{(d, ε) : ±(f_i − a_i·d) ≤ ε}`. Needs `a` of full column rank.
pub fn vertex_minimax(a: &[Vec<f64>], f: &[f64]) -> f64 {
    let n = a[0].len();
    // rows g·(d, ε) ≤ h
    let mut g = Vec::new();
    let mut h = Vec::new();
    for (row, &fi) in a.iter().zip(f) {
        let mut up = row.clone();
        up.push(-1.0);
        g.push(up);
        h.push(fi);
        let mut down: Vec<f64> = row.iter().map(|v| -v).collect();
        down.push(-1.0);
        g.push(down);
        h.push(-fi);
    }
    let mut best = f64::INFINITY;
    combinations(g.len(), n + 1, &mut |idx| {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| g[i].clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        if let Some(z) = solve(m, b) {
            let feasible = g
                .iter()
                .zip(&h)
                .all(|(gi, hi)| gi.iter().zip(&z).map(|(p, q)| p * q).sum::<f64>() <= hi + 1e-9);
            if feasible {
                best = best.min(z[n]);
            }
        }
    });
    best
}

/// Random full-rank instance with `n` unknowns and `m ≥ n` rows.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let f: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    (a, f)
}
