//! Downward-closed families of subsets of a small local site list, with the
//! index structure needed for in-place zeta and Möbius transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

use super::TruncationPolicy;

/// Hard limit on the family size; beyond this a single block summation would
/// not fit in memory anyway.
const MAX_FAMILY: usize = 4_000_000;

pub(crate) struct Family {
    /// Subsets as bitmasks over the local sites; index 0 is the empty set.
    pub masks: Vec<u128>,
    pub index: HashMap<u128, u32>,
    /// For each local site `s`, the pairs `(Y, Y∖{s})` over members `Y ∋ s`.
    pub passes: Vec<Vec<(u32, u32)>>,
}

impl Family {
    /// All subsets of `coords` admitted by `policy`. Relies on the policy being
    /// downward closed: every subset of an admitted set is admitted.
    pub fn build(coords: &[(i32, i32)], policy: &TruncationPolicy) -> Result<Family> {
        let n = coords.len();
        if n > 128 {
            return Err(Error::Numerical(format!(
                "{n} boundary sites around one block exceeds the 128-site limit"
            )));
        }
        // running sums (count, Σx, Σy, Σ|y|²) let the size be checked in O(1)
        struct Node {
            mask: u128,
            last: usize,
            sums: (i64, i64, i64, i64),
        }
        let mut masks = vec![0u128];
        let mut stack = vec![Node {
            mask: 0,
            last: 0,
            sums: (0, 0, 0, 0),
        }];
        while let Some(node) = stack.pop() {
            let (cnt, sx, sy, sq) = node.sums;
            if policy.max_cardinality.is_some_and(|m| cnt as usize >= m) {
                continue;
            }
            let start = if node.mask == 0 { 0 } else { node.last + 1 };
            for (k, &(x, y)) in coords.iter().enumerate().skip(start) {
                let (x, y) = (x as i64, y as i64);
                let sums = (cnt + 1, sx + x, sy + y, sq + x * x + y * y);
                let size =
                    (sums.0 * sums.3 - sums.1 * sums.1 - sums.2 * sums.2) as f64 / sums.0 as f64;
                if size > policy.size_cutoff {
                    continue;
                }
                let mask = node.mask | 1u128 << k;
                masks.push(mask);
                if masks.len() > MAX_FAMILY {
                    return Err(Error::Numerical(format!(
                        "more than {MAX_FAMILY} boundary subsets around one block; lower C_B or set max_cardinality"
                    )));
                }
                stack.push(Node {
                    mask,
                    last: k,
                    sums,
                });
            }
        }
        masks.sort_unstable_by_key(|m| (m.count_ones(), *m));
        let index: HashMap<u128, u32> = masks
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();
        let mut passes = vec![Vec::new(); n];
        for (i, &m) in masks.iter().enumerate() {
            let mut rest = m;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                passes[s].push((i as u32, index[&(m & !(1u128 << s))]));
            }
        }
        Ok(Family {
            masks,
            index,
            passes,
        })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }
}

type FamilyKey = (Vec<(i32, i32)>, u64, Option<usize>);

/// Families depend only on the shape of the local site list, which repeats
/// across blocks and across runs.
#[derive(Default)]
pub(crate) struct FamilyCache {
    map: Mutex<HashMap<FamilyKey, Arc<Family>>>,
}

impl FamilyCache {
    pub fn get(&self, coords: Vec<(i32, i32)>, policy: &TruncationPolicy) -> Result<Arc<Family>> {
        let key = (coords, policy.size_cutoff.to_bits(), policy.max_cardinality);
        if let Some(f) = self.map.lock().expect("family cache poisoned").get(&key) {
            return Ok(Arc::clone(f));
        }
        let fam = Arc::new(Family::build(&key.0, policy)?);
        self.map
            .lock()
            .expect("family cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&fam));
        Ok(fam)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("family cache poisoned").len()
    }
}
