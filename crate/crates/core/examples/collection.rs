//! Boundary sets kept after summing one block, for a few cutoffs.
//!
//!     cargo run --release --example collection

use latgas_rg::engine::{block_collection, block_collection_count, TruncationPolicy};
use latgas_rg::model::Block;

fn main() -> latgas_rg::Result<()> {
    let block = Block::new(0, 0);
    for c_b in [0.0, 0.5, 1.0, 2.0] {
        let sets = block_collection(block, &TruncationPolicy::new(c_b, None)?)?;
        println!("C_B = {c_b}: {} sets", sets.len());
        if sets.len() <= 16 {
            for s in &sets {
                println!("    {s}");
            }
        }
    }
    // large cutoffs are only counted, and only up to a limit
    for (c_b, cap) in [(8.0, Some(3)), (30.0, Some(3)), (30.0, None)] {
        let policy = TruncationPolicy::new(c_b, cap)?;
        let count = block_collection_count(&policy, 200_000)?;
        println!("C_B = {c_b}, max cardinality {cap:?}: {count:?}");
    }
    Ok(())
}
