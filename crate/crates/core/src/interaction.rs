//! Multilinear interactions over site sets, in lattice-gas (`n ∈ {0,1}`) or
//! spin (`σ = ±1`) monomials, and the subset-lattice transforms between free
//! energies and gas coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{canonical_translate, SiteSet};
use crate::table::FreeEnergyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Gas,
    Spin,
}

/// Whether keys are literal sets or one canonical translate per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Absolute,
    PerTranslationClass,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Gas => "gas",
            Basis::Spin => "spin",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gas" => Ok(Basis::Gas),
            "spin" => Ok(Basis::Spin),
            _ => Err(Error::Parse(format!("unknown basis {s:?}"))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Absolute => "absolute",
            Scope::PerTranslationClass => "per_translation_class",
        })
    }
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(Scope::Absolute),
            "per_translation_class" => Ok(Scope::PerTranslationClass),
            _ => Err(Error::Parse(format!("unknown scope {s:?}"))),
        }
    }
}

/// Coefficient table `Y ↦ c(Y)`. Absent keys are zero; exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    basis: Basis,
    scope: Scope,
    terms: BTreeMap<SiteSet, f64>,
}

impl Interaction {
    pub fn new(basis: Basis, scope: Scope) -> Self {
        Interaction {
            basis,
            scope,
            terms: BTreeMap::new(),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<SiteSet, f64> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteSet, f64)> + '_ {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    fn key(&self, set: &SiteSet) -> SiteSet {
        match self.scope {
            Scope::Absolute => set.clone(),
            Scope::PerTranslationClass => canonical_translate(set),
        }
    }

    pub fn get(&self, set: &SiteSet) -> f64 {
        self.terms.get(&self.key(set)).copied().unwrap_or(0.0)
    }

    /// Adds `value` to the coefficient of `set`, dropping it if the sum is exactly zero.
    pub fn add(&mut self, set: SiteSet, value: f64) {
        let key = self.key(&set);
        let v = self.terms.entry(key.clone()).or_insert(0.0);
        *v += value;
        if *v == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn insert(&mut self, set: SiteSet, value: f64) {
        let key = self.key(&set);
        if value == 0.0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, value);
        }
    }

    fn expect(&self, basis: Basis, scope: Scope) -> Result<()> {
        if self.basis != basis {
            return Err(Error::BasisMismatch {
                expected: basis,
                found: self.basis,
            });
        }
        if self.scope != scope {
            return Err(Error::Domain(format!(
                "expected {scope} scope, found {}",
                self.scope
            )));
        }
        Ok(())
    }

    /// Sum of two interactions of the same basis and scope.
    pub fn plus(&self, other: &Interaction) -> Result<Interaction> {
        other.expect(self.basis, self.scope)?;
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.add(k.clone(), v);
        }
        Ok(out)
    }

    /// Value at the gas configuration that is 1 exactly on `ones`:
    /// `Σ_Y c(Y) [Y ⊆ ones]`.
    pub fn evaluate(&self, ones: &SiteSet) -> Result<f64> {
        self.expect(Basis::Gas, Scope::Absolute)?;
        Ok(self
            .terms
            .iter()
            .filter(|(k, _)| k.is_subset_of(ones))
            .map(|(_, v)| v)
            .sum())
    }

    /// Value of a spin interaction at `σ = 1 − 2n` with `n` equal to 1 on `ones`.
    pub fn evaluate_spin(&self, ones: &SiteSet) -> Result<f64> {
        self.expect(Basis::Spin, Scope::Absolute)?;
        Ok(self
            .terms
            .iter()
            .map(|(k, v)| {
                let flips = k.iter().filter(|s| ones.contains(s)).count();
                if flips % 2 == 0 {
                    *v
                } else {
                    -*v
                }
            })
            .sum())
    }

    /// Merges tables from independent jobs. Keys present in both must agree to 1e−9.
    pub fn merge(&mut self, other: &Interaction) -> Result<()> {
        other.expect(self.basis, self.scope)?;
        for (k, &v) in other.terms() {
            match self.terms.get(k) {
                Some(&old) if (old - v).abs() > 1e-9 => {
                    return Err(Error::Conflict {
                        set: k.clone(),
                        a: old,
                        b: v,
                    })
                }
                _ => {
                    self.terms.insert(k.clone(), v);
                }
            }
        }
        Ok(())
    }
}

/// `c(X) = Σ_{∅≠Y⊆X} (−1)^{|X|−|Y|} f(Y)`, looking `f` up by translation class.
pub fn mobius_invert(f: &FreeEnergyTable, x: &SiteSet) -> Result<f64> {
    mobius_invert_by(x, |y| f.get(y))
}

/// Same inversion with an arbitrary lookup for `f`; a missing value is an error
/// naming the canonical translate of the missing set.
pub fn mobius_invert_by(x: &SiteSet, lookup: impl Fn(&SiteSet) -> Option<f64>) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Domain(
            "c(∅) is not determined by free energies".into(),
        ));
    }
    if x.len() > 30 {
        return Err(Error::Domain(format!("{x} has more than 30 sites")));
    }
    let n = x.len();
    let mut c = 0.0;
    for mask in 1u64..1 << n {
        let y = x.subset(mask);
        let fy = lookup(&y).ok_or_else(|| Error::MissingDependency(canonical_translate(&y)))?;
        if (n - mask.count_ones() as usize) % 2 == 0 {
            c += fy;
        } else {
            c -= fy;
        }
    }
    Ok(c)
}

/// `f(X) = Σ_{∅≠Y⊆X} c(Y)` for an absolute gas interaction.
pub fn mobius_forward(c: &Interaction, x: &SiteSet) -> Result<f64> {
    c.expect(Basis::Gas, Scope::Absolute)?;
    Ok(c.terms
        .iter()
        .filter(|(k, _)| !k.is_empty() && k.is_subset_of(x))
        .map(|(_, v)| v)
        .sum())
}

/// Exact change of basis, `d(Y) = (−1)^{|Y|} Σ_{X⊇Y} c(X) 2^{−|X|}`.
pub fn gas_to_spin(h: &Interaction) -> Result<Interaction> {
    h.expect(Basis::Gas, Scope::Absolute)?;
    let mut acc: BTreeMap<SiteSet, f64> = BTreeMap::new();
    for (x, c) in h.iter() {
        let w = c * 0.5f64.powi(x.len() as i32);
        for y in x.subsets() {
            let sign = if y.len() % 2 == 0 { 1.0 } else { -1.0 };
            *acc.entry(y).or_insert(0.0) += sign * w;
        }
    }
    Ok(collect(Basis::Spin, acc))
}

/// Inverse of [`gas_to_spin`], from `σᵢ = 1 − 2nᵢ`.
pub fn spin_to_gas(h: &Interaction) -> Result<Interaction> {
    h.expect(Basis::Spin, Scope::Absolute)?;
    let mut acc: BTreeMap<SiteSet, f64> = BTreeMap::new();
    for (y, d) in h.iter() {
        for z in y.subsets() {
            let w = (-2.0f64).powi(z.len() as i32);
            *acc.entry(z).or_insert(0.0) += w * d;
        }
    }
    Ok(collect(Basis::Gas, acc))
}

fn collect(basis: Basis, acc: BTreeMap<SiteSet, f64>) -> Interaction {
    let mut out = Interaction::new(basis, Scope::Absolute);
    out.terms = acc.into_iter().filter(|(_, v)| *v != 0.0).collect();
    out
}
