//! The truncation collection around one block.

use crate::error::{Error, Result};
use crate::lattice::{grow_sets, SiteSet};
use crate::model::Block;

use super::TruncationPolicy;

/// Outcome of a bounded count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollectionCount {
    Exact(usize),
    /// Enumeration stopped after exceeding the given limit.
    MoreThan(usize),
}

fn seeds(block: Block) -> Vec<SiteSet> {
    block
        .sites()
        .iter()
        .map(|&s| SiteSet::singleton(s))
        .collect()
}

fn check(policy: &TruncationPolicy) -> Result<()> {
    if !policy.size_cutoff.is_finite() && policy.max_cardinality.is_none() {
        return Err(Error::Domain(
            "the untruncated collection is infinite".into(),
        ));
    }
    Ok(())
}

/// All sets meeting `block` that the policy admits, sorted. The result for any
/// other block is a translate of this one.
pub fn block_collection(block: Block, policy: &TruncationPolicy) -> Result<Vec<SiteSet>> {
    check(policy)?;
    let mut sets = grow_sets(
        seeds(block),
        policy.size_cutoff,
        policy.max_cardinality,
        |s| s.clone(),
        None,
    )
    .expect("unbounded growth has no limit");
    sets.sort();
    Ok(sets)
}

/// Size of [`block_collection`], giving up once it exceeds `limit`.
pub fn block_collection_count(policy: &TruncationPolicy, limit: usize) -> Result<CollectionCount> {
    check(policy)?;
    Ok(
        match grow_sets(
            seeds(Block::new(0, 0)),
            policy.size_cutoff,
            policy.max_cardinality,
            |s| s.clone(),
            Some(limit),
        ) {
            Some(sets) => CollectionCount::Exact(sets.len()),
            None => CollectionCount::MoreThan(limit),
        },
    )
}
