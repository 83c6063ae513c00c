//! Spin-basis coefficients from constrained free energies.
//!
//! With `H̄(σ̄) − H̄(+) = Σ_{Y∈𝕐} d(Y) Σ_t (σ̄(Y+t) − 1)`, each block configuration
//! `σ̄^X` contributes `f(X) ≈ Σ_Y d(Y) A[X,Y]` where `A[X,Y]` is minus twice
//! the number of translates of `Y` meeting `X` in an odd number of sites.

mod simplex;

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::{Basis, Interaction, Scope};
use crate::lattice::{canonical_translate, size, SiteSet};
use crate::table::FreeEnergyTable;

pub use simplex::{simplex_minimax, MinimaxSolution, MAX_ITERATIONS};

pub fn nearest_neighbor() -> SiteSet {
    SiteSet::from_coords(&[(0, 0), (1, 0)])
}

pub fn next_nearest_neighbor() -> SiteSet {
    SiteSet::from_coords(&[(0, 0), (1, 1)])
}

pub fn plaquette() -> SiteSet {
    SiteSet::from_coords(&[(0, 0), (1, 0), (0, 1), (1, 1)])
}

/// Translations `t` with `Y + t` meeting `X`.
fn meeting_translations(x: &SiteSet, y: &SiteSet) -> BTreeSet<(i32, i32)> {
    x.iter()
        .flat_map(|p| y.iter().map(move |q| (p.x - q.x, p.y - q.y)))
        .collect()
}

/// `A[X,Y] = −2 · #{t : |(Y+t) ∩ X| odd}`.
pub fn design_entry(x: &SiteSet, y: &SiteSet) -> Result<i64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("design entries need nonempty sets".into()));
    }
    let odd = meeting_translations(x, y)
        .into_iter()
        .filter(|&(dx, dy)| y.iter().filter(|q| x.contains(&q.offset(dx, dy))).count() % 2 == 1)
        .count();
    Ok(-2 * odd as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub rows: Vec<SiteSet>,
    pub cols: Vec<SiteSet>,
    entries: Vec<i64>,
}

impl DesignMatrix {
    pub fn build(rows: &[SiteSet], cols: &[SiteSet]) -> Result<Self> {
        let entries: Vec<Vec<i64>> = rows
            .par_iter()
            .map(|x| cols.iter().map(|y| design_entry(x, y)).collect())
            .collect::<Result<_>>()?;
        Ok(DesignMatrix {
            rows: rows.to_vec(),
            cols: cols.to_vec(),
            entries: entries.concat(),
        })
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols.len() + c]
    }

    pub fn row(&self, r: usize) -> &[i64] {
        let n = self.cols.len();
        &self.entries[r * n..(r + 1) * n]
    }

    /// `A d` for coefficients listed in column order.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| self.row(r).iter().zip(d).map(|(&a, &x)| a as f64 * x).sum())
            .collect()
    }
}

/// A fit of spin coefficients on the classes `𝕐` to free energies on `𝕏 ⊇ 𝕐`.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub y_classes: Vec<SiteSet>,
    pub x_classes: Vec<SiteSet>,
    pub targets: FreeEnergyTable,
}

impl FitProblem {
    pub fn new(
        y_classes: Vec<SiteSet>,
        x_classes: Vec<SiteSet>,
        targets: FreeEnergyTable,
    ) -> Result<Self> {
        let canon = |v: Vec<SiteSet>| -> Vec<SiteSet> {
            let set: BTreeSet<SiteSet> = v.iter().map(canonical_translate).collect();
            set.into_iter().collect()
        };
        let y_classes = canon(y_classes);
        let x_classes = canon(x_classes);
        if y_classes.iter().any(SiteSet::is_empty) || x_classes.iter().any(SiteSet::is_empty) {
            return Err(Error::Domain("fit classes must be nonempty".into()));
        }
        let xs: HashSet<&SiteSet> = x_classes.iter().collect();
        if let Some(y) = y_classes.iter().find(|y| !xs.contains(y)) {
            return Err(Error::Domain(format!("{y} is fitted but not a target")));
        }
        if let Some(x) = x_classes.iter().find(|x| !targets.contains(x)) {
            return Err(Error::MissingDependency(x.clone()));
        }
        Ok(FitProblem {
            y_classes,
            x_classes,
            targets,
        })
    }

    /// `𝕐 = {S ≤ c_hbar}`, `𝕏 = {S ≤ c_f}` over the keys of `table`.
    pub fn from_cutoffs(table: &FreeEnergyTable, c_hbar: f64, c_f: f64) -> Result<Self> {
        if c_hbar > c_f {
            return Err(Error::Config(format!(
                "C_hbar = {c_hbar} exceeds C_f = {c_f}; the fitted classes must be a subset of the targets"
            )));
        }
        let within = |c: f64| -> Result<Vec<SiteSet>> {
            let mut out = Vec::new();
            for (k, _) in table.iter() {
                if size(k)? <= c + 1e-9 {
                    out.push(k.clone());
                }
            }
            Ok(out)
        };
        FitProblem::new(within(c_hbar)?, within(c_f)?, table.clone())
    }

    pub fn design(&self) -> Result<DesignMatrix> {
        DesignMatrix::build(&self.x_classes, &self.y_classes)
    }

    fn target_vector(&self) -> Vec<f64> {
        self.x_classes
            .iter()
            .map(|x| self.targets.get(x).expect("checked at construction"))
            .collect()
    }

    /// `max_X |f(X) − Σ_Y d(Y) A[X,Y]|` for a spin table over `𝕐`.
    pub fn max_residual(&self, d: &Interaction) -> Result<f64> {
        let a = self.design()?;
        let coeffs: Vec<f64> = self.y_classes.iter().map(|y| d.get(y)).collect();
        Ok(a.apply(&coeffs)
            .iter()
            .zip(self.target_vector())
            .map(|(p, f)| (f - p).abs())
            .fold(0.0, f64::max))
    }
}

fn containing_translates(y: &SiteSet, z: &SiteSet) -> usize {
    let Some(first) = y.iter().next() else {
        return 0;
    };
    z.iter()
        .filter(|p| {
            let (dx, dy) = (p.x - first.x, p.y - first.y);
            y.iter().all(|q| z.contains(&q.offset(dx, dy)))
        })
        .count()
}

/// `d(Y) = (−1)^{|Y|} Σ_{Z ⊇ Y} c(Z) 2^{−|Z|}` where `Z` runs over every
/// translate of every class in `y_classes`. Classes missing from `c` count
/// as zero coefficients.
pub fn partially_exact(c: &Interaction, y_classes: &[SiteSet]) -> Result<Interaction> {
    if c.basis() != Basis::Gas {
        return Err(Error::BasisMismatch {
            expected: Basis::Gas,
            found: c.basis(),
        });
    }
    if c.scope() != Scope::PerTranslationClass {
        return Err(Error::Domain(
            "partially exact fit needs per-class coefficients".into(),
        ));
    }
    let classes: BTreeSet<SiteSet> = y_classes.iter().map(canonical_translate).collect();
    let mut d = Interaction::new(Basis::Spin, Scope::PerTranslationClass);
    for y in &classes {
        if y.is_empty() {
            continue;
        }
        let sum: f64 = classes
            .iter()
            .filter(|z| z.len() >= y.len())
            .map(|z| c.get(z) * 0.5f64.powi(z.len() as i32) * containing_translates(y, z) as f64)
            .sum();
        d.insert(y.clone(), if y.len() % 2 == 0 { sum } else { -sum });
    }
    Ok(d)
}

/// Gas coefficients of every key of `table` by Möbius inversion, one per
/// translation class.
pub fn gas_coefficients(table: &FreeEnergyTable) -> Result<Interaction> {
    let keys: Vec<&SiteSet> = table.iter().map(|(k, _)| k).collect();
    let values: Vec<f64> = keys
        .par_iter()
        .map(|k| crate::interaction::mobius_invert(table, k))
        .collect::<Result<_>>()?;
    let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
    for (k, v) in keys.into_iter().zip(values) {
        c.insert(k.clone(), v);
    }
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct UniformFit {
    pub d: Interaction,
    pub epsilon: f64,
    pub iterations: usize,
}

/// Spin coefficients on `𝕐` minimizing the largest error over `𝕏`.
pub fn uniformly_close(problem: &FitProblem) -> Result<UniformFit> {
    let a = problem.design()?;
    let rows: Vec<Vec<f64>> = (0..a.rows.len())
        .map(|r| a.row(r).iter().map(|&v| v as f64).collect())
        .collect();
    let sol = simplex_minimax(&rows, &problem.target_vector())?;
    let mut d = Interaction::new(Basis::Spin, Scope::PerTranslationClass);
    for (y, v) in problem.y_classes.iter().zip(&sol.d) {
        d.insert(y.clone(), *v);
    }
    Ok(UniformFit {
        d,
        epsilon: sol.epsilon,
        iterations: sol.iterations,
    })
}

/// Named couplings reported by coefficient sweeps.
pub fn named_couplings() -> [(&'static str, SiteSet); 3] {
    [
        ("nearest", nearest_neighbor()),
        ("next_nearest", next_nearest_neighbor()),
        ("plaquette", plaquette()),
    ]
}
