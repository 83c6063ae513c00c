//! The nearest-neighbor Hamiltonian in lattice-gas form and the 2×2
//! majority-rule kernel.
//!
//! Gas variables are `n = (1 − σ)/2`, so a spin of `+1` is gas value `0`, and
//! the block variable `0` stands for block spin `+1`.

use crate::error::{Error, Result};
use crate::interaction::{Basis, Interaction, Scope};
use crate::lattice::{Site, SiteSet};

/// Inverse temperature, absorbed into the Hamiltonian `H = −β Σ σᵢσⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    beta: f64,
}

impl Coupling {
    pub fn new(beta: f64) -> Result<Self> {
        // zero coupling is allowed: it is the decoupled reference point
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        Ok(Coupling { beta })
    }

    pub fn critical() -> Self {
        Coupling {
            beta: critical_beta(),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::critical()
    }
}

/// `ln(1 + √2) / 2`, where `sinh(2β) = 1`.
pub fn critical_beta() -> f64 {
    (1.0 + std::f64::consts::SQRT_2).ln() / 2.0
}

/// A 2×2 block with index `(i, j)`; its sites are `(2i + a, 2j + b)` for
/// `a, b ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    pub i: i32,
    pub j: i32,
}

impl Block {
    pub const fn new(i: i32, j: i32) -> Self {
        Block { i, j }
    }

    /// Block containing `site`.
    pub fn of(site: Site) -> Self {
        Block::new(site.x.div_euclid(2), site.y.div_euclid(2))
    }

    pub fn origin(&self) -> Site {
        Site::new(2 * self.i, 2 * self.j)
    }

    /// Member sites; position `k` in this array is bit `k` of a block pattern.
    pub fn sites(&self) -> [Site; 4] {
        let o = self.origin();
        [o, o.offset(1, 0), o.offset(0, 1), o.offset(1, 1)]
    }

    /// Bit of `site` inside this block's 4-bit pattern, if it belongs here.
    pub fn bit(&self, site: Site) -> Option<u32> {
        let (a, b) = (site.x - 2 * self.i, site.y - 2 * self.j);
        ((0..2).contains(&a) && (0..2).contains(&b)).then(|| (a + 2 * b) as u32)
    }

    pub fn site_set(&self) -> SiteSet {
        SiteSet::new(self.sites().to_vec())
    }

    /// The block as a site of the renormalized lattice.
    pub fn as_site(&self) -> Site {
        Site::new(self.i, self.j)
    }
}

/// Lattice-gas form of the single edge term `−β σᵢ σⱼ`.
pub fn gas_edge_terms(beta: f64, a: Site, b: Site) -> Result<Interaction> {
    let d = (a.x - b.x).abs() + (a.y - b.y).abs();
    if d != 1 {
        return Err(Error::Domain(format!(
            "sites {a:?} and {b:?} are not nearest neighbors"
        )));
    }
    let mut h = Interaction::new(Basis::Gas, Scope::Absolute);
    h.add(SiteSet::empty(), -beta);
    h.add(SiteSet::singleton(a), 2.0 * beta);
    h.add(SiteSet::singleton(b), 2.0 * beta);
    h.add(SiteSet::new(vec![a, b]), -4.0 * beta);
    Ok(h)
}

/// Majority-rule weight of block variable `block_var` given the four gas
/// values packed in the low bits of `pattern`.
pub fn majority_kernel(block_var: u8, pattern: u8) -> f64 {
    debug_assert!(block_var <= 1 && pattern < 16);
    match (pattern & 0xf).count_ones() {
        2 => 0.5,
        k if k >= 3 => f64::from(block_var),
        _ => f64::from(1 - block_var),
    }
}

/// Same as [`majority_kernel`] with the four values given separately.
pub fn majority_kernel_config(block_var: u8, config: [u8; 4]) -> f64 {
    let pattern = config
        .iter()
        .enumerate()
        .fold(0u8, |acc, (k, &v)| acc | ((v & 1) << k));
    majority_kernel(block_var, pattern)
}
