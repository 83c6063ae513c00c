//! Block-by-block summation against brute-force enumeration on a 2×2 block
//! square (16 spins), with and without truncation.
//!
//!     cargo run --release --example engine_vs_oracle

use latgas_rg::engine::{Engine, TruncationPolicy, Volume};
use latgas_rg::model::Coupling;
use latgas_rg::oracle::{exact_hbar, OracleVolume};
use latgas_rg::SiteSet;

fn main() -> latgas_rg::Result<()> {
    let volume = Volume::rect(0, 1, 0, 1)?;
    let oracle = OracleVolume::from(volume);
    let coupling = Coupling::critical();
    let blocks = SiteSet::new(volume.blocks().map(|b| b.as_site()).collect());

    println!(
        "{:<22} {:>20} {:>12} {:>12}",
        "block config", "exact H̄", "C_B=∞", "C_B=0.5"
    );
    let exact_engine = Engine::new(volume, TruncationPolicy::none(), coupling);
    let cut_engine = Engine::new(volume, TruncationPolicy::new(0.5, None)?, coupling);
    for cfg in blocks.subsets() {
        let want = exact_hbar(&cfg, &oracle, coupling)?;
        let full = exact_engine.compute_hbar(&cfg)?;
        let cut = cut_engine.compute_hbar(&cfg)?;
        println!(
            "{:<22} {want:>20.14} {:>12.1e} {:>12.1e}",
            cfg.to_string(),
            full - want,
            cut - want
        );
    }
    Ok(())
}
