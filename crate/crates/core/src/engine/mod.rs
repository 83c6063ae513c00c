//! Block-by-block summation of the constrained partition function.
//!
//! For a fixed block configuration `n̄` the engine sums out the original spins
//! one 2×2 block at a time. The not-yet-summed spins carry a boundary
//! interaction `Σ b(X) n(X)` in gas variables. Summing block `B` produces
//!
//! ```text
//! F(n) = ln Σ_{n_B} exp(Σ_{X∩B≠∅} b(X) n(X) + h(n)) t_B(n̄_B, n_B)
//! ```
//!
//! whose gas coefficients follow from the values `F(n^Y)` by Möbius
//! inversion. Coefficients on sets larger than the truncation policy allows
//! are dropped; the constant term accumulates into `ln Z`.

mod collection;
mod family;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::{Basis, Interaction, Scope};
use crate::lattice::{Site, SiteSet, SymmetryClass};
use crate::model::{majority_kernel, Block, Coupling};
use crate::table::{FreeEnergyTable, TableMeta};
use crate::ENGINE_VERSION;

pub use collection::{block_collection, block_collection_count, CollectionCount};
use family::FamilyCache;

/// Boundary coefficients smaller than this are dropped after each block.
pub const PRUNE: f64 = 1e-14;

/// Rectangle of blocks `i0 ≤ i ≤ i1`, `j0 ≤ j ≤ j1` with free boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Volume {
    pub i0: i32,
    pub i1: i32,
    pub j0: i32,
    pub j1: i32,
}

impl Volume {
    /// The `(2L+1)²` blocks with `−L ≤ i, j ≤ L`.
    pub fn square(l: u32) -> Self {
        let l = l as i32;
        Volume {
            i0: -l,
            i1: l,
            j0: -l,
            j1: l,
        }
    }

    pub fn rect(i0: i32, i1: i32, j0: i32, j1: i32) -> Result<Self> {
        if i1 < i0 || j1 < j0 {
            return Err(Error::Domain(format!(
                "empty volume [{i0},{i1}]x[{j0},{j1}]"
            )));
        }
        Ok(Volume { i0, i1, j0, j1 })
    }

    pub fn width(&self) -> usize {
        (self.i1 - self.i0 + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.j1 - self.j0 + 1) as usize
    }

    pub fn n_blocks(&self) -> usize {
        self.width() * self.height()
    }

    pub fn spin_count(&self) -> usize {
        4 * self.n_blocks()
    }

    pub fn contains_block(&self, b: Block) -> bool {
        (self.i0..=self.i1).contains(&b.i) && (self.j0..=self.j1).contains(&b.j)
    }

    pub fn contains_site(&self, s: Site) -> bool {
        self.contains_block(Block::of(s))
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        (self.j0..=self.j1).flat_map(move |j| (self.i0..=self.i1).map(move |i| Block::new(i, j)))
    }

    /// Blocks between `b` and the nearest edge, not counting `b` itself.
    pub fn margin(&self, b: Block) -> i32 {
        (b.i - self.i0)
            .min(self.i1 - b.i)
            .min(b.j - self.j0)
            .min(self.j1 - b.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SweepOrder {
    /// `j` outer ascending, `i` inner ascending.
    #[default]
    RowMajor,
    ColumnMajor,
}

#[derive(Debug, Clone, Copy)]
struct Sweep {
    volume: Volume,
    order: SweepOrder,
}

impl Sweep {
    fn index(&self, b: Block) -> usize {
        let (di, dj) = (
            (b.i - self.volume.i0) as usize,
            (b.j - self.volume.j0) as usize,
        );
        match self.order {
            SweepOrder::RowMajor => dj * self.volume.width() + di,
            SweepOrder::ColumnMajor => di * self.volume.height() + dj,
        }
    }

    fn block_at(&self, k: usize) -> Block {
        let (w, h) = (self.volume.width(), self.volume.height());
        let (di, dj) = match self.order {
            SweepOrder::RowMajor => (k % w, k / w),
            SweepOrder::ColumnMajor => (k / h, k % h),
        };
        Block::new(self.volume.i0 + di as i32, self.volume.j0 + dj as i32)
    }

    /// Number of blocks in one row (or column) of the sweep.
    fn stride(&self) -> usize {
        match self.order {
            SweepOrder::RowMajor => self.volume.width(),
            SweepOrder::ColumnMajor => self.volume.height(),
        }
    }

    fn consumer(&self, set: &[Site]) -> usize {
        set.iter()
            .map(|&s| self.index(Block::of(s)))
            .min()
            .expect("nonempty set")
    }
}

/// Which boundary terms survive each block summation: sets with size at most
/// `size_cutoff` and, optionally, at most `max_cardinality` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub size_cutoff: f64,
    pub max_cardinality: Option<usize>,
}

impl TruncationPolicy {
    pub fn new(size_cutoff: f64, max_cardinality: Option<usize>) -> Result<Self> {
        if size_cutoff.is_nan() || size_cutoff < 0.0 {
            return Err(Error::Domain(format!(
                "C_B must be nonnegative, got {size_cutoff}"
            )));
        }
        if max_cardinality == Some(0) {
            return Err(Error::Domain("max_cardinality must be positive".into()));
        }
        Ok(TruncationPolicy {
            size_cutoff,
            max_cardinality,
        })
    }

    /// Keeps every boundary term; exact, and only feasible on small volumes.
    pub fn none() -> Self {
        TruncationPolicy {
            size_cutoff: f64::INFINITY,
            max_cardinality: None,
        }
    }

    pub fn admits(&self, set: &SiteSet) -> bool {
        self.max_cardinality.map_or(true, |m| set.len() <= m)
            && (set.len() <= 1 || crate::lattice::size_of_sites(set.sites()) <= self.size_cutoff)
    }
}

/// Partial state of one summation run.
#[derive(Debug, Clone)]
pub struct EngineState {
    cursor: usize,
    accumulator: f64,
    /// Boundary terms bucketed by the sweep index of the block that consumes them.
    pending: Vec<BTreeMap<SiteSet, f64>>,
    block_config: SiteSet,
}

impl EngineState {
    /// Index of the next block to sum.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// `ln` of the weight summed out so far.
    pub fn accumulator(&self) -> f64 {
        self.accumulator
    }

    pub fn block_config(&self) -> &SiteSet {
        &self.block_config
    }

    /// The current boundary interaction `Σ b(X) n(X)` (log-weight sign).
    pub fn boundary_terms(&self) -> Interaction {
        let mut h = Interaction::new(Basis::Gas, Scope::Absolute);
        for bucket in &self.pending {
            for (k, &v) in bucket {
                h.insert(k.clone(), v);
            }
        }
        h
    }
}

struct Baseline {
    hbar: f64,
    /// States at the start of each sweep row.
    snapshots: Vec<EngineState>,
}

/// Summation engine for one (volume, policy, coupling, sweep order).
///
/// `H̄(∅)` and the intermediate states of its run are computed once and
/// reused: a run for `n̄^X` is identical to the reference run up to the first
/// block of `X`.
pub struct Engine {
    volume: Volume,
    policy: TruncationPolicy,
    coupling: Coupling,
    sweep: Sweep,
    families: FamilyCache,
    baseline: OnceLock<std::result::Result<Baseline, String>>,
}

impl Engine {
    pub fn new(volume: Volume, policy: TruncationPolicy, coupling: Coupling) -> Self {
        Self::with_order(volume, policy, coupling, SweepOrder::RowMajor)
    }

    pub fn with_order(
        volume: Volume,
        policy: TruncationPolicy,
        coupling: Coupling,
        order: SweepOrder,
    ) -> Self {
        Engine {
            volume,
            policy,
            coupling,
            sweep: Sweep { volume, order },
            families: FamilyCache::default(),
            baseline: OnceLock::new(),
        }
    }

    pub fn volume(&self) -> &Volume {
        &self.volume
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Fresh state for `block_config`, a set of block indices with `n̄ = 1`.
    pub fn start(&self, block_config: &SiteSet) -> Result<EngineState> {
        for s in block_config.iter() {
            if !self.volume.contains_block(Block::new(s.x, s.y)) {
                return Err(Error::Domain(format!(
                    "block {s:?} lies outside the volume"
                )));
            }
        }
        Ok(EngineState {
            cursor: 0,
            accumulator: 0.0,
            pending: vec![BTreeMap::new(); self.volume.n_blocks()],
            block_config: block_config.clone(),
        })
    }

    pub fn is_finished(&self, state: &EngineState) -> bool {
        state.cursor == self.volume.n_blocks()
    }

    /// Sums out the four spins of the block at `state.cursor`.
    pub fn sum_block(&self, state: &mut EngineState) -> Result<()> {
        let k = state.cursor;
        let block = self.sweep.block_at(k);
        let beta = self.coupling.beta();
        let terms = std::mem::take(&mut state.pending[k]);

        // Hamiltonian edges entering now: those touching B whose other end is unsummed
        let mut edges = Vec::with_capacity(12);
        for s in block.sites() {
            for (dx, dy) in [(1, 0), (0, 1), (-1, 0), (0, -1)] {
                let q = s.offset(dx, dy);
                if !self.volume.contains_site(q) {
                    continue;
                }
                let qb = Block::of(q);
                if qb == block {
                    if s < q {
                        edges.push((s, q));
                    }
                } else if self.sweep.index(qb) > k {
                    edges.push((s, q));
                }
            }
        }

        let mut outside: BTreeSet<Site> = BTreeSet::new();
        for x in terms.keys() {
            outside.extend(x.iter().filter(|s| block.bit(**s).is_none()));
        }
        outside.extend(
            edges
                .iter()
                .map(|e| e.1)
                .filter(|q| block.bit(*q).is_none()),
        );
        let local: Vec<Site> = outside.into_iter().collect();
        let origin = block.origin();
        let coords = local
            .iter()
            .map(|s| (s.x - origin.x, s.y - origin.y))
            .collect();
        let fam = self.families.get(coords, &self.policy)?;
        let local_bit =
            |s: &Site| -> u128 { 1u128 << local.binary_search(s).expect("site collected above") };

        let mut v = vec![[0.0f64; 16]; fam.len()];
        for (x, &c) in &terms {
            let (mut p, mut r) = (0usize, 0u128);
            for s in x.iter() {
                match block.bit(*s) {
                    Some(b) => p |= 1 << b,
                    None => r |= local_bit(s),
                }
            }
            let i = *fam.index.get(&r).ok_or_else(|| {
                Error::Numerical(format!(
                    "boundary term {x} is not admitted by the truncation policy"
                ))
            })?;
            v[i as usize][p] += c;
        }
        // log weight of an edge: β σ_s σ_q = β − 2β n_s − 2β n_q + 4β n_s n_q
        for &(s, q) in &edges {
            let bs = 1usize << block.bit(s).expect("edge starts in B");
            v[0][0] += beta;
            v[0][bs] -= 2.0 * beta;
            match block.bit(q) {
                Some(bq) => {
                    v[0][1 << bq] -= 2.0 * beta;
                    v[0][bs | 1 << bq] += 4.0 * beta;
                }
                None => {
                    let iq = fam.index[&local_bit(&q)] as usize;
                    v[iq][0] -= 2.0 * beta;
                    v[iq][bs] += 4.0 * beta;
                }
            }
        }

        // g(Y) = Σ_{R⊆Y} v(R)
        for pass in &fam.passes {
            for &(y, ys) in pass {
                let (y, ys) = (y as usize, ys as usize);
                let src = v[ys];
                for (a, b) in v[y].iter_mut().zip(src) {
                    *a += b;
                }
            }
        }

        let block_var = u8::from(state.block_config.contains(&block.as_site()));
        let log_t: [f64; 16] = std::array::from_fn(|m| majority_kernel(block_var, m as u8).ln());
        let mut f: Vec<f64> = v.iter().map(|g| log_block_sum(g, &log_t)).collect();
        if let Some(bad) = f.iter().find(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "block sum at {block:?} is not finite ({bad})"
            )));
        }

        // b'(X) = Σ_{Y⊆X} (−1)^{|X|−|Y|} F(n^Y)
        for pass in &fam.passes {
            for &(y, ys) in pass {
                f[y as usize] -= f[ys as usize];
            }
        }

        state.accumulator += f[0];
        for (mask, &b) in fam.masks.iter().zip(&f).skip(1) {
            if b.abs() < PRUNE {
                continue;
            }
            let mut sites = Vec::with_capacity(mask.count_ones() as usize);
            let mut rest = *mask;
            while rest != 0 {
                sites.push(local[rest.trailing_zeros() as usize]);
                rest &= rest - 1;
            }
            let consumer = self.sweep.consumer(&sites);
            *state.pending[consumer]
                .entry(SiteSet::from_sorted(sites))
                .or_insert(0.0) += b;
        }
        state.cursor += 1;

        debug_assert!(state.accumulator.is_finite());
        debug_assert!(state.pending[..state.cursor].iter().all(BTreeMap::is_empty));
        Ok(())
    }

    fn run_to_end(&self, state: &mut EngineState) -> Result<()> {
        while !self.is_finished(state) {
            self.sum_block(state)?;
        }
        Ok(())
    }

    fn baseline(&self) -> Result<&Baseline> {
        let b = self.baseline.get_or_init(|| {
            let t0 = Instant::now();
            let mut state = self.start(&SiteSet::empty()).map_err(|e| e.to_string())?;
            let stride = self.sweep.stride();
            let mut snapshots = Vec::new();
            while !self.is_finished(&state) {
                if state.cursor % stride == 0 {
                    snapshots.push(state.clone());
                }
                self.sum_block(&mut state).map_err(|e| e.to_string())?;
            }
            debug!(
                "reference run: {} blocks in {:.2?}, {} family shapes",
                self.volume.n_blocks(),
                t0.elapsed(),
                self.families.len()
            );
            Ok(Baseline {
                hbar: -state.accumulator,
                snapshots,
            })
        });
        b.as_ref().map_err(|e| Error::Numerical(e.clone()))
    }

    /// `H̄(n̄)` for the configuration equal to 1 on `block_config`.
    pub fn compute_hbar(&self, block_config: &SiteSet) -> Result<f64> {
        if block_config.is_empty() {
            return Ok(self.baseline()?.hbar);
        }
        let mut state = self.start(block_config)?;
        let first = block_config
            .iter()
            .map(|s| self.sweep.index(Block::new(s.x, s.y)))
            .min()
            .expect("nonempty");
        let base = self.baseline()?;
        let snap = &base.snapshots[first / self.sweep.stride()];
        state.cursor = snap.cursor;
        state.accumulator = snap.accumulator;
        state.pending = snap.pending.clone();
        self.run_to_end(&mut state)?;
        Ok(-state.accumulator)
    }

    /// `H̄` computed from scratch without reusing the reference run.
    pub fn compute_hbar_uncached(&self, block_config: &SiteSet) -> Result<f64> {
        let mut state = self.start(block_config)?;
        self.run_to_end(&mut state)?;
        Ok(-state.accumulator)
    }

    /// `f(X) = H̄(n̄^X) − H̄(n̄^∅)` with `X` given in absolute block coordinates.
    pub fn free_energy(&self, x: &SiteSet) -> Result<f64> {
        Ok(self.compute_hbar(x)? - self.compute_hbar(&SiteSet::empty())?)
    }

    /// Translate of `rep` centered near the origin of the volume.
    pub fn place(&self, rep: &SiteSet) -> SiteSet {
        let n = rep.len().max(1) as f64;
        let cx = rep.iter().map(|s| s.x as f64).sum::<f64>() / n;
        let cy = rep.iter().map(|s| s.y as f64).sum::<f64>() / n;
        let mx = (self.volume.i0 + self.volume.i1) as f64 / 2.0;
        let my = (self.volume.j0 + self.volume.j1) as f64 / 2.0;
        rep.translate((mx - cx).round() as i32, (my - cy).round() as i32)
    }

    pub fn metadata(&self) -> TableMeta {
        let mut m = TableMeta::default();
        if self.volume.i0 == -self.volume.i1
            && self.volume.j0 == -self.volume.j1
            && self.volume.i1 == self.volume.j1
        {
            m.set("L", self.volume.i1);
        } else {
            m.set(
                "volume",
                format!(
                    "[{},{}]x[{},{}]",
                    self.volume.i0, self.volume.i1, self.volume.j0, self.volume.j1
                ),
            );
        }
        m.set("C_B", self.policy.size_cutoff);
        if let Some(c) = self.policy.max_cardinality {
            m.set("max_cardinality", c);
        }
        m.set("beta", self.coupling.beta());
        if self.sweep.order == SweepOrder::ColumnMajor {
            m.set("sweep", "column-major");
        }
        m.set("version", ENGINE_VERSION);
        m
    }

    /// Free energies of every class representative. Entries that fail are
    /// logged and left out; the rest of the batch continues.
    pub fn free_energy_batch(&self, classes: &[SymmetryClass]) -> Result<FreeEnergyTable> {
        self.baseline()?;
        let t0 = Instant::now();
        let results: Vec<(SiteSet, Result<f64>)> = classes
            .par_iter()
            .map(|c| {
                let placed = self.place(&c.representative);
                let margin = placed
                    .iter()
                    .map(|s| self.volume.margin(Block::new(s.x, s.y)))
                    .min()
                    .unwrap_or(0);
                if margin < 2 {
                    warn!(
                        "{} sits {} block(s) from the volume edge",
                        c.representative, margin
                    );
                }
                let t = Instant::now();
                let r = self.free_energy(&placed);
                debug!("f{} in {:.2?}", c.representative, t.elapsed());
                (c.representative.clone(), r)
            })
            .collect();
        let mut table = FreeEnergyTable::new(self.metadata());
        for (rep, r) in results {
            match r {
                Ok(v) => table.insert(rep, v),
                Err(e) => warn!("f{rep} failed: {e}"),
            }
        }
        info!(
            "{} free energies (of {}) in {:.2?}",
            table.len(),
            classes.len(),
            t0.elapsed()
        );
        Ok(table)
    }
}

/// `ln Σ_m t(m) exp(E(m))` where `E(m) = Σ_{p⊆m} g(p)`.
fn log_block_sum(g: &[f64; 16], log_t: &[f64; 16]) -> f64 {
    let mut e = *g;
    for bit in [1usize, 2, 4, 8] {
        for m in 0..16 {
            if m & bit != 0 {
                e[m] += e[m ^ bit];
            }
        }
    }
    let mut top = f64::NEG_INFINITY;
    for m in 0..16 {
        top = top.max(e[m] + log_t[m]);
    }
    let sum: f64 = (0..16).map(|m| (e[m] + log_t[m] - top).exp()).sum();
    top + sum.ln()
}

/// One-off `H̄(n̄)`; prefer an [`Engine`] when computing many values.
pub fn compute_hbar(
    block_config: &SiteSet,
    volume: Volume,
    policy: TruncationPolicy,
    coupling: Coupling,
) -> Result<f64> {
    Engine::new(volume, policy, coupling).compute_hbar_uncached(block_config)
}
