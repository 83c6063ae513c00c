//! Geometry of the square lattice: finite site sets, translation and dihedral
//! canonical forms, the size function and class enumeration.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A site of the 2D integer lattice. Ordered lexicographically, `x` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub x: i32,
    pub y: i32,
}

impl Site {
    pub const fn new(x: i32, y: i32) -> Self {
        Site { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Site::new(self.x + dx, self.y + dy)
    }
}

impl From<(i32, i32)> for Site {
    fn from((x, y): (i32, i32)) -> Self {
        Site::new(x, y)
    }
}

/// A finite set of sites, stored sorted and without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteSet(Vec<Site>);

impl SiteSet {
    pub fn empty() -> Self {
        SiteSet(Vec::new())
    }

    pub fn new(mut sites: Vec<Site>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        SiteSet(sites)
    }

    /// Wraps an already sorted, duplicate-free vector.
    pub(crate) fn from_sorted(sites: Vec<Site>) -> Self {
        debug_assert!(sites.windows(2).all(|w| w[0] < w[1]));
        SiteSet(sites)
    }

    pub fn from_coords(coords: &[(i32, i32)]) -> Self {
        Self::new(coords.iter().map(|&c| Site::from(c)).collect())
    }

    pub fn singleton(site: Site) -> Self {
        SiteSet(vec![site])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Site> + '_ {
        self.0.iter()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.0.binary_search(site).is_ok()
    }

    pub fn is_subset_of(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|s| other.contains(s))
    }

    pub fn intersects(&self, other: &SiteSet) -> bool {
        self.0.iter().any(|s| other.contains(s))
    }

    pub fn with(&self, site: Site) -> SiteSet {
        match self.0.binary_search(&site) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, site);
                SiteSet(v)
            }
        }
    }

    pub fn translate(&self, dx: i32, dy: i32) -> SiteSet {
        // translation preserves lexicographic order
        SiteSet(self.0.iter().map(|s| s.offset(dx, dy)).collect())
    }

    /// The subset selected by the bits of `mask` (bit `k` ↔ `k`-th site).
    pub fn subset(&self, mask: u64) -> SiteSet {
        SiteSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, s)| *s)
                .collect(),
        )
    }

    /// All subsets, including the empty set and the set itself, in bitmask order.
    pub fn subsets(&self) -> impl Iterator<Item = SiteSet> + '_ {
        assert!(self.len() < 64, "subset enumeration limited to 63 sites");
        (0..1u64 << self.len()).map(move |m| self.subset(m))
    }

    /// Smallest `x` and `y` over the sites (not necessarily a site).
    pub fn min_corner(&self) -> Option<(i32, i32)> {
        let mx = self.0.iter().map(|s| s.x).min()?;
        let my = self.0.iter().map(|s| s.y).min()?;
        Some((mx, my))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", s.x, s.y)?;
        }
        f.write_str("}")
    }
}

impl FromStr for SiteSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed site set {text:?}"));
        let inner = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(bad)?;
        if inner.trim().is_empty() {
            return Ok(SiteSet::empty());
        }
        let mut sites = Vec::new();
        let mut rest = inner.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(bad)?;
            let close = body.find(')').ok_or_else(bad)?;
            let (xs, ys) = body[..close].split_once(',').ok_or_else(bad)?;
            let x = xs.trim().parse::<i32>().map_err(|_| bad())?;
            let y = ys.trim().parse::<i32>().map_err(|_| bad())?;
            sites.push(Site::new(x, y));
            rest = body[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
                if rest.is_empty() {
                    return Err(bad());
                }
            } else if !rest.is_empty() {
                return Err(bad());
            }
        }
        let n = sites.len();
        let set = SiteSet::new(sites);
        if set.len() != n {
            return Err(Error::Parse(format!("duplicate sites in {text:?}")));
        }
        Ok(set)
    }
}

/// Numerator and denominator of the size function, `S = num / n`.
///
/// `n·Σ|y|² − |Σy|²` is an exact integer, so comparisons between sizes and
/// against cutoffs are free of accumulated round-off.
fn size_parts(sites: &[Site]) -> (i64, i64) {
    let n = sites.len() as i64;
    let (mut sx, mut sy, mut sq) = (0i64, 0i64, 0i64);
    for s in sites {
        let (x, y) = (s.x as i64, s.y as i64);
        sx += x;
        sy += y;
        sq += x * x + y * y;
    }
    (n * sq - sx * sx - sy * sy, n)
}

/// Sum of squared distances of the sites to their center of mass (no square root).
pub fn size(set: &SiteSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Domain("size of the empty set is undefined".into()));
    }
    Ok(size_of_sites(set.sites()))
}

pub(crate) fn size_of_sites(sites: &[Site]) -> f64 {
    let (num, n) = size_parts(sites);
    num as f64 / n as f64
}

/// Translate of `set` with minimum `x` and minimum `y` both equal to zero.
pub fn canonical_translate(set: &SiteSet) -> SiteSet {
    match set.min_corner() {
        Some((mx, my)) => set.translate(-mx, -my),
        None => SiteSet::empty(),
    }
}

/// The eight elements of the square's point group acting on a site.
pub const DIHEDRAL: [fn(Site) -> Site; 8] = [
    |s| Site::new(s.x, s.y),
    |s| Site::new(-s.y, s.x),
    |s| Site::new(-s.x, -s.y),
    |s| Site::new(s.y, -s.x),
    |s| Site::new(-s.x, s.y),
    |s| Site::new(s.x, -s.y),
    |s| Site::new(s.y, s.x),
    |s| Site::new(-s.y, -s.x),
];

pub fn apply_dihedral(g: usize, set: &SiteSet) -> SiteSet {
    SiteSet::new(set.iter().map(|&s| DIHEDRAL[g](s)).collect())
}

/// Canonical translates of the eight dihedral images, duplicates removed, sorted.
pub fn dihedral_orbit(set: &SiteSet) -> Vec<SiteSet> {
    let orbit: BTreeSet<SiteSet> = (0..8)
        .map(|g| canonical_translate(&apply_dihedral(g, set)))
        .collect();
    orbit.into_iter().collect()
}

/// Lexicographically smallest canonical translate over the dihedral orbit.
pub fn canonical_dihedral(set: &SiteSet) -> SiteSet {
    (0..8)
        .map(|g| canonical_translate(&apply_dihedral(g, set)))
        .min()
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryMode {
    Translation,
    Dihedral,
}

impl SymmetryMode {
    pub fn canonicalize(self, set: &SiteSet) -> SiteSet {
        match self {
            SymmetryMode::Translation => canonical_translate(set),
            SymmetryMode::Dihedral => canonical_dihedral(set),
        }
    }
}

impl FromStr for SymmetryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "translation" => Ok(SymmetryMode::Translation),
            "dihedral" => Ok(SymmetryMode::Dihedral),
            other => Err(Error::Parse(format!("unknown symmetry mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryClass {
    pub representative: SiteSet,
    /// Number of translation classes in the orbit; 1 in translation mode.
    pub orbit_size: usize,
    pub size: f64,
}

/// Largest Chebyshev offset a site can have from another member of a set with
/// size at most `cutoff`: any pair inside the set has `|p − q|²/2 ≤ cutoff`.
pub(crate) fn reach(cutoff: f64) -> i32 {
    (2.0 * cutoff).sqrt().floor() as i32
}

/// Grows sets by one site at a time from `seeds`, keeping every set whose size
/// is within `cutoff` and (optionally) whose cardinality is within `max_len`.
/// Candidate sites are drawn from `allowed` when given. Each grown set is
/// passed through `canon` before deduplication. Stops early once more than
/// `limit` sets have been found, returning `None`.
pub(crate) fn grow_sets(
    seeds: Vec<SiteSet>,
    cutoff: f64,
    max_len: Option<usize>,
    canon: impl Fn(&SiteSet) -> SiteSet,
    limit: Option<usize>,
) -> Option<Vec<SiteSet>> {
    let r = reach(cutoff);
    let mut seen: HashSet<SiteSet> = seeds.iter().cloned().collect();
    let mut all: Vec<SiteSet> = seeds.clone();
    let mut frontier = seeds;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for set in &frontier {
            if max_len.is_some_and(|m| set.len() >= m) {
                continue;
            }
            let mut candidates = BTreeSet::new();
            for s in set.iter() {
                for dx in -r..=r {
                    for dy in -r..=r {
                        let q = s.offset(dx, dy);
                        if !set.contains(&q) {
                            candidates.insert(q);
                        }
                    }
                }
            }
            for q in candidates {
                let grown = set.with(q);
                if size_of_sites(grown.sites()) > cutoff {
                    continue;
                }
                let grown = canon(&grown);
                if seen.insert(grown.clone()) {
                    all.push(grown.clone());
                    next.push(grown);
                    if limit.is_some_and(|l| all.len() > l) {
                        return None;
                    }
                }
            }
        }
        frontier = next;
    }
    Some(all)
}

/// One representative per symmetry class of nonempty sets with `S ≤ cutoff`,
/// ordered by (size, cardinality, representative).
pub fn enumerate_classes(cutoff: f64, mode: SymmetryMode) -> Vec<SymmetryClass> {
    assert!(cutoff >= 0.0, "cutoff must be nonnegative");
    let seed = vec![SiteSet::singleton(Site::new(0, 0))];
    let sets =
        grow_sets(seed, cutoff, None, |s| mode.canonicalize(s), None).expect("no limit given");
    let mut classes: Vec<SymmetryClass> = sets
        .into_iter()
        .map(|rep| {
            let orbit_size = match mode {
                SymmetryMode::Translation => 1,
                SymmetryMode::Dihedral => dihedral_orbit(&rep).len(),
            };
            let size = size_of_sites(rep.sites());
            SymmetryClass {
                representative: rep,
                orbit_size,
                size,
            }
        })
        .collect();
    sort_classes(&mut classes);
    classes
}

pub(crate) fn sort_classes(classes: &mut [SymmetryClass]) {
    classes.sort_by(|a, b| {
        let (na, da) = size_parts(a.representative.sites());
        let (nb, db) = size_parts(b.representative.sites());
        (na * db)
            .cmp(&(nb * da))
            .then(a.representative.len().cmp(&b.representative.len()))
            .then_with(|| a.representative.cmp(&b.representative))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(c: &[(i32, i32)]) -> SiteSet {
        SiteSet::from_coords(c)
    }

    #[test]
    fn size_examples() {
        assert_eq!(size(&set(&[(0, 0)])).unwrap(), 0.0);
        assert_eq!(size(&set(&[(0, 0), (1, 0)])).unwrap(), 0.5);
        let s = size(&set(&[(0, 0), (1, 0), (0, 1)])).unwrap();
        assert!((s - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(size(&SiteSet::empty()), Err(Error::Domain(_))));
    }

    #[test]
    fn translate_examples() {
        assert_eq!(
            canonical_translate(&set(&[(3, 4), (4, 4)])),
            set(&[(0, 0), (1, 0)])
        );
        assert_eq!(canonical_translate(&set(&[(0, 0)])), set(&[(0, 0)]));
        assert_eq!(
            canonical_translate(&set(&[(-1, 2), (-1, 3), (0, 2)])),
            set(&[(0, 0), (0, 1), (1, 0)])
        );
        assert_eq!(canonical_translate(&SiteSet::empty()), SiteSet::empty());
    }

    #[test]
    fn dihedral_examples() {
        // sites order by x first, so the vertical pair is the smaller one
        assert_eq!(
            canonical_dihedral(&set(&[(0, 0), (0, 1)])),
            set(&[(0, 0), (0, 1)])
        );
        assert_eq!(
            canonical_dihedral(&set(&[(0, 0), (1, 0)])),
            set(&[(0, 0), (0, 1)])
        );
        let knight = set(&[(0, 0), (2, 1)]);
        let canon = canonical_dihedral(&knight);
        for g in 0..8 {
            assert_eq!(canonical_dihedral(&apply_dihedral(g, &knight)), canon);
        }
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(dihedral_orbit(&set(&[(0, 0)])).len(), 1);
        assert_eq!(
            dihedral_orbit(&set(&[(0, 0), (1, 0)])),
            vec![set(&[(0, 0), (0, 1)]), set(&[(0, 0), (1, 0)])]
        );
        assert_eq!(dihedral_orbit(&set(&[(0, 0), (1, 0), (0, 1)])).len(), 4);
        assert_eq!(dihedral_orbit(&set(&[(0, 0), (2, 1)])).len(), 4);
        assert_eq!(dihedral_orbit(&set(&[(0, 0), (1, 0), (3, 1)])).len(), 8);
    }

    #[test]
    fn text_encoding() {
        let s = set(&[(1, -2), (0, 3)]);
        assert_eq!(s.to_string(), "{(0,3),(1,-2)}");
        assert_eq!("{(0,3),(1,-2)}".parse::<SiteSet>().unwrap(), s);
        assert_eq!("{}".parse::<SiteSet>().unwrap(), SiteSet::empty());
        assert!("{(0,0),}".parse::<SiteSet>().is_err());
        assert!("{(0,0),(0,0)}".parse::<SiteSet>().is_err());
        assert!("(0,0)".parse::<SiteSet>().is_err());
    }

    /// Brute-force window enumeration of translation classes with S ≤ cutoff.
    fn window_classes(cutoff: f64, mode: SymmetryMode) -> BTreeSet<SiteSet> {
        // every class has a translate inside the box [0, w) x [0, w)
        let w = reach(cutoff) + 1;
        let sites: Vec<Site> = (0..w)
            .flat_map(|x| (0..w).map(move |y| Site::new(x, y)))
            .collect();
        assert!(sites.len() <= 20);
        let all = SiteSet::new(sites);
        all.subsets()
            .filter(|s| !s.is_empty() && size(s).unwrap() <= cutoff)
            .map(|s| mode.canonicalize(&s))
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        let c0 = enumerate_classes(0.0, SymmetryMode::Translation);
        assert_eq!(c0.len(), 1);
        assert_eq!(c0[0].representative, set(&[(0, 0)]));

        let c = enumerate_classes(0.5, SymmetryMode::Translation);
        let reps: Vec<_> = c.iter().map(|c| c.representative.clone()).collect();
        assert_eq!(
            reps,
            vec![
                set(&[(0, 0)]),
                set(&[(0, 0), (0, 1)]),
                set(&[(0, 0), (1, 0)])
            ]
        );
        let d = enumerate_classes(0.5, SymmetryMode::Dihedral);
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].orbit_size, 2);
    }

    #[test]
    fn enumeration_matches_window_oracle() {
        for &cutoff in &[0.5, 1.0, 2.0, 2.5, 4.0, 5.0] {
            for mode in [SymmetryMode::Translation, SymmetryMode::Dihedral] {
                let got: BTreeSet<SiteSet> = enumerate_classes(cutoff, mode)
                    .into_iter()
                    .map(|c| c.representative)
                    .collect();
                assert_eq!(
                    got,
                    window_classes(cutoff, mode),
                    "cutoff {cutoff} {mode:?}"
                );
            }
        }
    }

    #[test]
    fn enumeration_is_downward_closed_and_sorted() {
        let classes = enumerate_classes(6.0, SymmetryMode::Translation);
        let reps: HashSet<SiteSet> = classes.iter().map(|c| c.representative.clone()).collect();
        for c in &classes {
            assert!(c.size <= 6.0);
            for sub in c.representative.subsets().filter(|s| !s.is_empty()) {
                assert!(reps.contains(&canonical_translate(&sub)));
            }
        }
        for w in classes.windows(2) {
            assert!(w[0].size <= w[1].size);
        }
        assert_eq!(classes.len(), 308);
    }

    #[test]
    fn dihedral_orbit_sizes_divide_eight() {
        for c in enumerate_classes(6.0, SymmetryMode::Dihedral) {
            assert!(8 % c.orbit_size == 0, "{c:?}");
            assert_eq!(canonical_dihedral(&c.representative), c.representative);
        }
    }

    fn arb_set() -> impl Strategy<Value = SiteSet> {
        prop::collection::vec((-6i32..6, -6i32..6), 1..8).prop_map(|v| SiteSet::from_coords(&v))
    }

    proptest! {
        #[test]
        fn size_is_subset_monotone(s in arb_set(), mask in any::<u64>()) {
            let sub = s.subset(mask);
            prop_assume!(!sub.is_empty());
            prop_assert!(size(&sub).unwrap() <= size(&s).unwrap() + 1e-12);
        }

        #[test]
        fn canonical_forms_are_idempotent_and_orbit_constant(
            s in arb_set(), dx in -20i32..20, dy in -20i32..20, g in 0usize..8
        ) {
            let t = canonical_translate(&s);
            prop_assert_eq!(canonical_translate(&t), t.clone());
            prop_assert_eq!(canonical_translate(&s.translate(dx, dy)), t);
            let d = canonical_dihedral(&s);
            prop_assert_eq!(canonical_dihedral(&d), d.clone());
            prop_assert_eq!(canonical_dihedral(&apply_dihedral(g, &s).translate(dx, dy)), d);
        }

        #[test]
        fn text_round_trip(s in arb_set()) {
            prop_assert_eq!(s.to_string().parse::<SiteSet>().unwrap(), s);
        }
    }
}
