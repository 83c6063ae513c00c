//! Dense simplex for the minimax (Chebyshev) fit
//! `min_d max_i |f_i − (A d)_i|`.
//!
//! The solver works on the dual problem
//!
//! ```text
//! min  −Σ f_i u_i + Σ f_i v_i
//! s.t. Σ_i A_ik (u_i − v_i) = 0   for every unknown k
//!      Σ_i (u_i + v_i) + s = 1
//!      u, v, s ≥ 0
//! ```
//!
//! which has far fewer rows than the primal when there are many targets. The
//! fitted coefficients are read back from the simplex multipliers.

use std::collections::HashSet;

use log::debug;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 1_000_000;
const TOL: f64 = 1e-10;
/// Degenerate pivots in a row before switching to the smallest-index rule.
const STALL: usize = 50;
/// Scale of the right-hand-side shift used to break degeneracy.
const PERTURB: f64 = 1e-7;
/// Basic values above `−FEAS` count as feasible once the shift is removed.
const FEAS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxSolution {
    pub d: Vec<f64>,
    /// `max_i |f_i − (A d)_i|` at the returned `d`.
    pub epsilon: f64,
    pub iterations: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.t[pr * w + pc];
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let factor = self.t[r * w + pc];
            if factor != 0.0 {
                for (v, p) in self.t[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.obj[pc];
        if factor != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[pr] = pc;
    }
}

/// Solves `min_d max_i |f_i − Σ_k a[i][k] d_k|` exactly (up to rounding).
///
/// Rows with identical coefficients and target are merged first. Unknowns the
/// rows cannot separate get some optimal split, not a canonical one.
pub fn simplex_minimax(a: &[Vec<f64>], f: &[f64]) -> Result<MinimaxSolution> {
    if a.len() != f.len() {
        return Err(Error::Domain(format!(
            "{} rows but {} targets",
            a.len(),
            f.len()
        )));
    }
    let n = a.first().map_or(0, Vec::len);
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Domain("design rows differ in length".into()));
    }
    if f.iter().chain(a.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in fit problem".into()));
    }
    if a.is_empty() {
        return Ok(MinimaxSolution {
            d: vec![0.0; n],
            epsilon: 0.0,
            iterations: 0,
        });
    }

    let mut seen = HashSet::new();
    let keep: Vec<usize> = (0..a.len())
        .filter(|&i| {
            let key: Vec<u64> = a[i].iter().chain([&f[i]]).map(|v| v.to_bits()).collect();
            seen.insert(key)
        })
        .collect();
    let m = keep.len();
    if m < a.len() {
        debug!("merged {} duplicate rows", a.len() - m);
    }

    // columns: u_0..u_m, v_0..v_m, s, artificial_0..artificial_n, rhs
    let s_col = 2 * m;
    let art = 2 * m + 1;
    let rhs = art + n;
    let rows = n + 1;
    let width = rhs + 1;
    let mut t = vec![0.0; rows * width];
    for (col, &i) in keep.iter().enumerate() {
        for k in 0..n {
            t[k * width + col] = a[i][k];
            t[k * width + m + col] = -a[i][k];
        }
        t[n * width + col] = 1.0;
        t[n * width + m + col] = 1.0;
    }
    for k in 0..n {
        t[k * width + art + k] = 1.0;
    }
    t[n * width + s_col] = 1.0;
    t[n * width + rhs] = 1.0;

    let cost = |c: usize| -> f64 {
        if c < m {
            -f[keep[c]]
        } else if c < 2 * m {
            f[keep[c - m]]
        } else {
            0.0
        }
    };
    let mut tab = Tableau {
        rows,
        width,
        t,
        obj: vec![0.0; width],
        basis: (0..n).map(|k| art + k).chain([s_col]).collect(),
    };

    // The starting point u = v = 0, s = 1 is feasible with every artificial at
    // zero, so the first phase reduces to pivoting the artificials out.
    for r in 0..n {
        let best = (0..art)
            .map(|c| (c, tab.at(r, c).abs()))
            .filter(|&(_, v)| v > 1e-9)
            .max_by(|x, y| x.1.total_cmp(&y.1));
        if let Some((c, _)) = best {
            tab.pivot(r, c);
        }
    }

    price(&mut tab, &cost, art);

    // Every row but the last has a zero right-hand side, so the start is
    // massively degenerate. Shift the basic values apart, solve, then restore
    // the true right-hand side and repair feasibility by dual simplex.
    for r in 0..rows {
        tab.t[r * width + rhs] += PERTURB * (1.0 + (r as f64 * 0.618_033_988_75).fract());
    }
    let mut iterations = primal(&mut tab, art, rhs, 0, m, n)?;
    for r in 0..rows {
        tab.t[r * width + rhs] = tab.at(r, s_col);
    }
    iterations = dual(&mut tab, art, rhs, iterations, m, n)?;
    price(&mut tab, &cost, art);
    iterations = primal(&mut tab, art, rhs, iterations, m, n)?;

    // reduced cost of artificial k is −y_k, and d_k = −y_k
    let d: Vec<f64> = (0..n).map(|k| tab.obj[art + k]).collect();
    let epsilon = a
        .iter()
        .zip(f)
        .map(|(row, fi)| (fi - row.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    debug!(
        "simplex: {iterations} pivots, ε = {epsilon:.6e}, dual objective {:.6e}",
        -tab.obj[rhs]
    );
    Ok(MinimaxSolution {
        d,
        epsilon,
        iterations,
    })
}

/// Recomputes the objective row from the current basis.
fn price(tab: &mut Tableau, cost: &dyn Fn(usize) -> f64, art: usize) {
    for c in 0..tab.width {
        let z: f64 = (0..tab.rows)
            .map(|r| cost(tab.basis[r]) * tab.at(r, c))
            .sum();
        tab.obj[c] = if c < art { cost(c) - z } else { -z };
    }
}

fn limit(m: usize, n: usize, tab: &Tableau, rhs: usize) -> Error {
    Error::SimplexLimit {
        iterations: MAX_ITERATIONS,
        detail: format!("{m} targets, {n} unknowns, objective {:.6e}", tab.obj[rhs]),
    }
}

/// Primal simplex from a feasible basis; returns the running pivot count.
fn primal(
    tab: &mut Tableau,
    art: usize,
    rhs: usize,
    mut iterations: usize,
    m: usize,
    n: usize,
) -> Result<usize> {
    let mut stalled = 0;
    loop {
        let bland = stalled >= STALL;
        let entering = if bland {
            (0..art).find(|&c| tab.obj[c] < -TOL)
        } else {
            (0..art)
                .filter(|&c| tab.obj[c] < -TOL)
                .min_by(|&x, &y| tab.obj[x].total_cmp(&tab.obj[y]))
        };
        let Some(pc) = entering else {
            return Ok(iterations);
        };
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(limit(m, n, tab, rhs));
        }
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..tab.rows {
            let p = tab.at(r, pc);
            if p > TOL {
                let ratio = tab.at(r, rhs).max(0.0) / p;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lv)) => {
                        let better = ratio < lv - 1e-12
                            || (ratio <= lv + 1e-12
                                && if bland {
                                    tab.basis[r] < tab.basis[lr]
                                } else {
                                    p > tab.at(lr, pc)
                                });
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((lr, lv))
                        }
                    }
                };
            }
        }
        let Some((pr, ratio)) = leave else {
            return Err(Error::Numerical("minimax dual is unbounded".into()));
        };
        if ratio <= 1e-12 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        tab.pivot(pr, pc);
    }
}

/// Dual simplex from a dual-feasible basis until every basic value is
/// nonnegative.
fn dual(
    tab: &mut Tableau,
    art: usize,
    rhs: usize,
    mut iterations: usize,
    m: usize,
    n: usize,
) -> Result<usize> {
    loop {
        let worst = (0..tab.rows)
            .map(|r| (r, tab.at(r, rhs)))
            .filter(|&(_, v)| v < -FEAS)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some((pr, _)) = worst else {
            return Ok(iterations);
        };
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(limit(m, n, tab, rhs));
        }
        let entering = (0..art)
            .filter(|&c| tab.at(pr, c) < -TOL)
            .map(|c| (c, tab.obj[c].max(0.0) / -tab.at(pr, c)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some((pc, _)) = entering else {
            return Err(Error::Numerical("minimax dual is infeasible".into()));
        };
        tab.pivot(pr, pc);
    }
}
