//! Independent ground truth for the engine: exhaustive enumeration of the
//! constrained partition function on tiny volumes, and a Metropolis sampler.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::Volume;
use crate::error::{Error, Result};
use crate::lattice::{Site, SiteSet};
use crate::model::{majority_kernel, Block, Coupling};

pub const MAX_ORACLE_SPINS: usize = 28;

/// Any finite set of blocks with free boundaries: only edges with both ends
/// inside appear in the Hamiltonian, and every block carries its kernel factor.
#[derive(Debug, Clone)]
pub struct OracleVolume {
    blocks: Vec<Block>,
    spins: Vec<Site>,
    edges: Vec<(usize, usize)>,
    /// Spin indices of each block in kernel bit order.
    members: Vec<[usize; 4]>,
}

impl OracleVolume {
    pub fn new(mut blocks: Vec<Block>) -> Self {
        blocks.sort();
        blocks.dedup();
        let spins: Vec<Site> = blocks.iter().flat_map(|b| b.sites()).collect();
        let index: HashMap<Site, usize> = spins.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let mut edges = Vec::new();
        for (k, s) in spins.iter().enumerate() {
            for q in [s.offset(1, 0), s.offset(0, 1)] {
                if let Some(&m) = index.get(&q) {
                    edges.push((k, m));
                }
            }
        }
        let members = blocks
            .iter()
            .map(|b| b.sites().map(|s| index[&s]))
            .collect();
        OracleVolume {
            blocks,
            spins,
            edges,
            members,
        }
    }

    pub fn spin_count(&self) -> usize {
        self.spins.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    fn block_position(&self, s: &Site) -> Option<usize> {
        self.blocks.binary_search(&Block::new(s.x, s.y)).ok()
    }

    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.spins.len()];
        for &(a, b) in &self.edges {
            nb[a].push(b);
            nb[b].push(a);
        }
        nb
    }
}

impl From<Volume> for OracleVolume {
    fn from(v: Volume) -> Self {
        OracleVolume::new(v.blocks().collect())
    }
}

fn block_vars(config: &SiteSet, volume: &OracleVolume) -> Result<Vec<u8>> {
    let mut vars = vec![0u8; volume.blocks.len()];
    for s in config.iter() {
        let k = volume
            .block_position(s)
            .ok_or_else(|| Error::Domain(format!("block {s:?} is not in the oracle volume")))?;
        vars[k] = 1;
    }
    Ok(vars)
}

/// `H̄(n̄) = −ln Σ_n Π_B t_B(n̄_B, n_B) e^{−H(n)}` by summing all `2^N` spin
/// configurations.
pub fn exact_hbar(
    block_config: &SiteSet,
    volume: &OracleVolume,
    coupling: Coupling,
) -> Result<f64> {
    let n = volume.spin_count();
    if n > MAX_ORACLE_SPINS {
        return Err(Error::OracleTooLarge(n));
    }
    let vars = block_vars(block_config, volume)?;
    let beta = coupling.beta();
    // −H ≤ β·#edges, so shifting by it keeps every exponential ≤ 1
    let shift = beta * volume.edges.len() as f64;
    let total: u64 = 1 << n;
    let chunks = 64.min(total);
    let per = total / chunks;
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = 0.0;
            'config: for cfg in c * per..(c + 1) * per {
                let mut t = 1.0;
                for (b, m) in volume.members.iter().enumerate() {
                    let pattern = m
                        .iter()
                        .enumerate()
                        .fold(0u8, |acc, (k, &s)| acc | (((cfg >> s) & 1) as u8) << k);
                    let w = majority_kernel(vars[b], pattern);
                    if w == 0.0 {
                        continue 'config;
                    }
                    t *= w;
                }
                let mut aligned = 0i64;
                for &(a, b) in &volume.edges {
                    aligned += if (cfg >> a ^ cfg >> b) & 1 == 0 {
                        1
                    } else {
                        -1
                    };
                }
                sum += t * (beta * aligned as f64 - shift).exp();
            }
            sum
        })
        .collect();
    // pairwise reduction in a fixed order
    let mut level = partial;
    while level.len() > 1 {
        level = level.chunks(2).map(|p| p.iter().sum()).collect();
    }
    let z = level[0];
    if !(z > 0.0) {
        return Err(Error::Numerical(
            "constrained partition function vanished".into(),
        ));
    }
    Ok(-(z.ln() + shift))
}

/// `f(Y) = H̄(n̄^Y) − H̄(n̄^∅)` by exhaustive enumeration.
pub fn exact_f(y: &SiteSet, volume: &OracleVolume, coupling: Coupling) -> Result<f64> {
    Ok(exact_hbar(y, volume, coupling)? - exact_hbar(&SiteSet::empty(), volume, coupling)?)
}

#[derive(Debug, Clone, Copy)]
pub struct MonteCarloOptions {
    /// Recorded samples per chain; each sample follows one sweep of `N` attempted flips.
    pub samples: usize,
    pub seed: u64,
    pub chains: usize,
    /// Sweeps discarded at the start of each chain.
    pub burn_in: usize,
    /// Batches per chain for batch-means error bars.
    pub batches: usize,
}

impl MonteCarloOptions {
    pub fn new(samples: usize, seed: u64) -> Self {
        MonteCarloOptions {
            samples,
            seed,
            chains: 1,
            burn_in: 1000,
            batches: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEntry {
    pub set: SiteSet,
    /// `None` when the configuration was never observed.
    pub estimate: Option<f64>,
    pub std_error: f64,
}

struct ChainTally {
    /// Per batch, per subset of the window: mean kernel weight.
    batch_means: Vec<Vec<f64>>,
}

/// Single-spin-flip Metropolis estimate of `f(Y)` for every `Y ⊆ X`.
///
/// Blocks of the volume outside `X` carry the kernel factor for block value 0;
/// blocks of `X` carry none. Each sample adds, for every `Y ⊆ X`, the product
/// of the window kernel factors at block values `1_Y`, whose average is
/// proportional to the weight of `n̄^Y`.
pub fn metropolis_f(
    x: &SiteSet,
    volume: &OracleVolume,
    coupling: Coupling,
    opts: MonteCarloOptions,
) -> Result<Vec<MonteCarloEntry>> {
    if x.is_empty() || x.len() > 10 {
        return Err(Error::Domain(
            "window must hold between 1 and 10 blocks".into(),
        ));
    }
    if opts.samples < opts.batches || opts.batches < 2 || opts.chains == 0 {
        return Err(Error::Domain(
            "need at least two batches and one sample per batch".into(),
        ));
    }
    let window: Vec<usize> = x
        .iter()
        .map(|s| {
            volume
                .block_position(s)
                .ok_or_else(|| Error::Domain(format!("block {s:?} is not in the volume")))
        })
        .collect::<Result<_>>()?;
    let tallies: Vec<ChainTally> = (0..opts.chains)
        .into_par_iter()
        .map(|c| {
            run_chain(
                volume,
                &window,
                coupling,
                opts,
                opts.seed.wrapping_add(c as u64),
            )
        })
        .collect();

    let nsub = 1usize << window.len();
    let batches: Vec<&Vec<f64>> = tallies.iter().flat_map(|t| t.batch_means.iter()).collect();
    let nb = batches.len() as f64;
    let mean: Vec<f64> = (0..nsub)
        .map(|y| batches.iter().map(|b| b[y]).sum::<f64>() / nb)
        .collect();
    let mut out = Vec::with_capacity(nsub - 1);
    for y in 1..nsub {
        let set = x.subset(y as u64);
        if mean[y] <= 0.0 || mean[0] <= 0.0 {
            out.push(MonteCarloEntry {
                set,
                estimate: None,
                std_error: f64::INFINITY,
            });
            continue;
        }
        // delta method on f = −ln(m_Y / m_∅) over batch means
        let g: Vec<f64> = batches
            .iter()
            .map(|b| b[0] / mean[0] - b[y] / mean[y])
            .collect();
        let gm = g.iter().sum::<f64>() / nb;
        let var = g.iter().map(|v| (v - gm).powi(2)).sum::<f64>() / (nb - 1.0);
        out.push(MonteCarloEntry {
            set,
            estimate: Some(-(mean[y] / mean[0]).ln()),
            std_error: (var / nb).sqrt(),
        });
    }
    Ok(out)
}

fn run_chain(
    volume: &OracleVolume,
    window: &[usize],
    coupling: Coupling,
    opts: MonteCarloOptions,
    seed: u64,
) -> ChainTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = coupling.beta();
    let n = volume.spin_count();
    let neighbors = volume.neighbors();
    let mut block_of = vec![0usize; n];
    let mut bit_of = vec![0u8; n];
    for (b, m) in volume.members.iter().enumerate() {
        for (k, &s) in m.iter().enumerate() {
            block_of[s] = b;
            bit_of[s] = k as u8;
        }
    }
    let mut in_window = vec![false; volume.blocks.len()];
    for &w in window {
        in_window[w] = true;
    }
    // all spins up (gas 0) satisfies every block-0 kernel
    let mut sigma = vec![1i8; n];
    let mut pattern = vec![0u8; volume.blocks.len()];
    let nsub = 1usize << window.len();
    let per_batch = opts.samples / opts.batches;
    let mut batch_means = Vec::with_capacity(opts.batches);
    let mut acc = vec![0.0; nsub];

    let sweep = |sigma: &mut Vec<i8>, pattern: &mut Vec<u8>, rng: &mut ChaCha8Rng| {
        for _ in 0..n {
            let s = rng.gen_range(0..n);
            let field: i32 = neighbors[s].iter().map(|&q| i32::from(sigma[q])).sum();
            // log-weight change β Σ σ'_s σ_q − β Σ σ_s σ_q with σ'_s = −σ_s
            let dlog = -2.0 * beta * f64::from(sigma[s]) * f64::from(field);
            let b = block_of[s];
            let new_pattern = pattern[b] ^ (1 << bit_of[s]);
            let mut ratio = dlog.exp();
            if !in_window[b] {
                let t_new = majority_kernel(0, new_pattern);
                if t_new == 0.0 {
                    continue;
                }
                ratio *= t_new / majority_kernel(0, pattern[b]);
            }
            if ratio >= 1.0 || rng.gen::<f64>() < ratio {
                sigma[s] = -sigma[s];
                pattern[b] = new_pattern;
            }
        }
    };

    for _ in 0..opts.burn_in {
        sweep(&mut sigma, &mut pattern, &mut rng);
    }
    for _ in 0..opts.batches {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for _ in 0..per_batch {
            sweep(&mut sigma, &mut pattern, &mut rng);
            for (y, a) in acc.iter_mut().enumerate() {
                let mut w = 1.0;
                for (k, &b) in window.iter().enumerate() {
                    w *= majority_kernel(((y >> k) & 1) as u8, pattern[b]);
                }
                *a += w;
            }
        }
        batch_means.push(acc.iter().map(|a| a / per_batch as f64).collect());
    }
    ChainTally { batch_means }
}
