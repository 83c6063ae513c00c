//! Accuracy gauges for coefficient and free-energy tables: decay ordering,
//! norms, dihedral symmetry breaking, finite-volume and cutoff convergence.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use log::warn;

use crate::error::{Error, Result};
use crate::interaction::{mobius_invert_by, Interaction};
use crate::lattice::{canonical_dihedral, dihedral_orbit, SiteSet, SymmetryMode};
use crate::table::{format_value, FreeEnergyTable, TableMeta};

/// Classes ordered by decreasing `|c|` with suffix sums of the magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub ordered: Vec<(SiteSet, f64)>,
    /// `tails[n] = Σ_{i≥n} |c(Y_i)|`.
    pub tails: Vec<f64>,
}

/// Value per dihedral class: the mean over the orbit's translation classes,
/// with classes absent from `values` counted as zero.
fn orbit_means(values: &BTreeMap<SiteSet, f64>) -> BTreeMap<SiteSet, f64> {
    let reps: BTreeSet<SiteSet> = values.keys().map(canonical_dihedral).collect();
    reps.into_iter()
        .map(|r| {
            let orbit = dihedral_orbit(&r);
            let sum: f64 = orbit
                .iter()
                .map(|s| values.get(s).copied().unwrap_or(0.0))
                .sum();
            (r, sum / orbit.len() as f64)
        })
        .collect()
}

pub fn decay_report(c: &Interaction, mode: SymmetryMode) -> DecayReport {
    let values: BTreeMap<SiteSet, f64> = c
        .iter()
        .filter(|(k, _)| !k.is_empty())
        .map(|(k, v)| (crate::lattice::canonical_translate(k), v))
        .collect();
    let values = match mode {
        SymmetryMode::Translation => values,
        SymmetryMode::Dihedral => orbit_means(&values),
    };
    let mut ordered: Vec<(SiteSet, f64)> = values.into_iter().map(|(k, v)| (k, v.abs())).collect();
    // stable sort over keys already in lexicographic order breaks ties by key
    ordered.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut tails = vec![0.0; ordered.len()];
    let mut acc = 0.0;
    for (n, (_, v)) in ordered.iter().enumerate().rev() {
        acc += v;
        tails[n] = acc;
    }
    DecayReport { ordered, tails }
}

/// Number of classes with magnitude strictly above each threshold.
pub fn threshold_counts(report: &DecayReport, thresholds: &[f64]) -> Vec<usize> {
    thresholds
        .iter()
        .map(|&t| report.ordered.iter().take_while(|(_, v)| *v > t).count())
        .collect()
}

/// `Σ_{Y∋0} |c(Y)|`: each translation class appears once per site.
pub fn norm_tail(c: &Interaction) -> f64 {
    c.iter().map(|(k, v)| v.abs() * k.len() as f64).sum()
}

/// Dihedral averages of the classes whose whole orbit is present.
fn complete_orbit_means(values: &BTreeMap<SiteSet, f64>) -> BTreeMap<SiteSet, f64> {
    let mut out = BTreeMap::new();
    let mut skipped = 0;
    for k in values.keys() {
        let orbit = dihedral_orbit(k);
        let present: Vec<f64> = orbit
            .iter()
            .filter_map(|s| values.get(s).copied())
            .collect();
        if present.len() == orbit.len() {
            out.insert(k.clone(), present.iter().sum::<f64>() / orbit.len() as f64);
        } else {
            skipped += 1;
        }
    }
    if skipped > 0 {
        warn!("{skipped} entries skipped: dihedral orbit incomplete");
    }
    out
}

/// `(1/N) Σ_Y |v(Y) − v̄(Y)|` over the entries whose dihedral orbit is complete.
pub fn dihedral_error(values: &BTreeMap<SiteSet, f64>) -> Result<f64> {
    let means = complete_orbit_means(values);
    if means.is_empty() {
        return Err(Error::Domain(
            "no entry has its whole dihedral orbit".into(),
        ));
    }
    let total: f64 = means.iter().map(|(k, m)| (values[k] - m).abs()).sum();
    Ok(total / means.len() as f64)
}

fn common_keys<'a>(tables: &[&'a BTreeMap<SiteSet, f64>]) -> BTreeSet<&'a SiteSet> {
    let mut keys: BTreeSet<&SiteSet> = tables[0].keys().collect();
    for t in &tables[1..] {
        keys.retain(|k| t.contains_key(*k));
    }
    let largest = tables.iter().map(|t| t.len()).max().unwrap_or(0);
    if keys.len() < largest {
        warn!("comparing {} shared entries out of {largest}", keys.len());
    }
    keys
}

/// `(1/N) Σ_Y |f_L(Y) − f_{L−1}(Y)|` over the shared keys.
pub fn finite_volume_error(a: &FreeEnergyTable, b: &FreeEnergyTable) -> Result<f64> {
    let keys = common_keys(&[a.entries(), b.entries()]);
    if keys.is_empty() {
        return Err(Error::Domain("tables share no entries".into()));
    }
    let total: f64 = keys
        .iter()
        .map(|k| (a.entries()[*k] - b.entries()[*k]).abs())
        .sum();
    Ok(total / keys.len() as f64)
}

/// The four averages `|f − f^∞|`, `|f̄ − f̄^∞|`, `|c − c^∞|`, `|c̄ − c̄^∞|` at one `C_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub c_b: f64,
    pub f: f64,
    pub f_bar: f64,
    pub c: f64,
    pub c_bar: f64,
}

fn mean_abs_diff(a: &BTreeMap<SiteSet, f64>, b: &BTreeMap<SiteSet, f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().map(|(k, v)| (v - b[k]).abs()).sum::<f64>() / a.len() as f64
}

/// Compares each table against the one with the largest `C_B`, on the keys
/// all tables share.
pub fn convergence_metrics(tables: &[(f64, FreeEnergyTable)]) -> Result<Vec<ConvergenceRow>> {
    if tables.is_empty() {
        return Err(Error::Domain("no tables to compare".into()));
    }
    let maps: Vec<&BTreeMap<SiteSet, f64>> = tables.iter().map(|(_, t)| t.entries()).collect();
    let keys = common_keys(&maps);
    if keys.is_empty() {
        return Err(Error::Domain("tables share no entries".into()));
    }
    let series: Vec<[BTreeMap<SiteSet, f64>; 4]> = tables
        .iter()
        .map(|(_, t)| {
            let f: BTreeMap<SiteSet, f64> = keys
                .iter()
                .map(|k| ((*k).clone(), t.entries()[*k]))
                .collect();
            let c = keys
                .iter()
                .map(|k| Ok(((*k).clone(), mobius_invert_by(k, |y| t.get(y))?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let f_bar = complete_orbit_means(&f);
            let c_bar = complete_orbit_means(&c);
            Ok([f, f_bar, c, c_bar])
        })
        .collect::<Result<_>>()?;
    let reference = tables
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(i, _)| i)
        .expect("nonempty");
    Ok(tables
        .iter()
        .zip(&series)
        .map(|((c_b, _), s)| {
            let r = &series[reference];
            ConvergenceRow {
                c_b: *c_b,
                f: mean_abs_diff(&s[0], &r[0]),
                f_bar: mean_abs_diff(&s[1], &r[1]),
                c: mean_abs_diff(&s[2], &r[2]),
                c_bar: mean_abs_diff(&s[3], &r[3]),
            }
        })
        .collect())
}

/// `n,abs,tail` rows of a decay report.
pub fn write_decay<W: Write>(mut out: W, report: &DecayReport, meta: &TableMeta) -> Result<()> {
    let meta = meta.clone().with("tie_break", "lexicographic");
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "set", "abs", "tail"])?;
    for (n, ((set, v), tail)) in report.ordered.iter().zip(&report.tails).enumerate() {
        w.write_record([
            n.to_string(),
            set.to_string(),
            format_value(*v),
            format_value(*tail),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready numeric series with a header row.
pub fn write_series<W: Write>(
    mut out: W,
    meta: &TableMeta,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format_value(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn convergence_rows(rows: &[ConvergenceRow]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| vec![r.c_b, r.f, r.f_bar, r.c, r.c_bar])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{Basis, Scope};
    use crate::lattice::apply_dihedral;
    use proptest::prelude::*;

    fn set(c: &[(i32, i32)]) -> SiteSet {
        SiteSet::from_coords(c)
    }

    fn synthetic() -> Interaction {
        let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
        c.insert(set(&[(0, 0)]), 0.3);
        c.insert(set(&[(0, 0), (1, 0)]), -0.5);
        c.insert(set(&[(0, 0), (2, 0)]), 0.1);
        c
    }

    #[test]
    fn decay_order_and_tails() {
        let r = decay_report(&synthetic(), SymmetryMode::Translation);
        let keys: Vec<&SiteSet> = r.ordered.iter().map(|(k, _)| k).collect();
        assert_eq!(
            keys,
            [
                &set(&[(0, 0), (1, 0)]),
                &set(&[(0, 0)]),
                &set(&[(0, 0), (2, 0)])
            ]
        );
        for (t, want) in r.tails.iter().zip([0.9, 0.4, 0.1]) {
            assert!((t - want).abs() < 1e-15);
        }
        assert_eq!(threshold_counts(&r, &[0.2, 1.0]), [2, 0]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
        c.insert(set(&[(0, 0), (0, 1)]), 0.5);
        c.insert(set(&[(0, 0), (1, 0)]), -0.5);
        let r = decay_report(&c, SymmetryMode::Translation);
        assert!(r.ordered[0].0 < r.ordered[1].0);
    }

    #[test]
    fn dihedral_decay_collapses_orbits() {
        let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
        let l = set(&[(0, 0), (1, 0), (0, 1)]);
        for s in dihedral_orbit(&l) {
            c.insert(s, 0.25);
        }
        let r = decay_report(&c, SymmetryMode::Dihedral);
        assert_eq!(r.ordered.len(), 1);
        assert!((r.ordered[0].1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn norm_counts_cardinality() {
        let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
        c.insert(set(&[(0, 0)]), 0.5);
        assert_eq!(norm_tail(&c), 0.5);
        let mut p = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
        p.insert(set(&[(0, 0), (1, 0)]), 0.3);
        assert!((norm_tail(&p) - 0.6).abs() < 1e-15);
        assert!((norm_tail(&c.plus(&p).unwrap()) - norm_tail(&c) - norm_tail(&p)).abs() < 1e-15);
    }

    #[test]
    fn dihedral_error_examples() {
        let mut v = BTreeMap::new();
        v.insert(set(&[(0, 0), (1, 0)]), 1.0);
        v.insert(set(&[(0, 0), (0, 1)]), 0.0);
        assert!((dihedral_error(&v).unwrap() - 0.5).abs() < 1e-15);
        v.insert(set(&[(0, 0), (0, 1)]), 1.0);
        assert_eq!(dihedral_error(&v).unwrap(), 0.0);
        let mut lonely = BTreeMap::new();
        lonely.insert(set(&[(0, 0), (1, 1)]), 1.0);
        assert!(dihedral_error(&lonely).is_err());
    }

    fn table(entries: &[(SiteSet, f64)]) -> FreeEnergyTable {
        let mut t = FreeEnergyTable::new(TableMeta::default());
        for (k, v) in entries {
            t.insert(k.clone(), *v);
        }
        t
    }

    #[test]
    fn finite_volume_examples() {
        let keys = [
            set(&[(0, 0)]),
            set(&[(0, 0), (1, 0)]),
            set(&[(0, 0), (0, 1)]),
            set(&[(0, 0), (1, 1)]),
        ];
        let a = table(&keys.iter().map(|k| (k.clone(), 1.0)).collect::<Vec<_>>());
        let b = table(&keys.iter().map(|k| (k.clone(), 1.1)).collect::<Vec<_>>());
        assert_eq!(finite_volume_error(&a, &a).unwrap(), 0.0);
        assert!((finite_volume_error(&a, &b).unwrap() - 0.1).abs() < 1e-12);
        let c = table(&[(set(&[(0, 0), (5, 0)]), 1.0)]);
        assert!(finite_volume_error(&a, &c).is_err());
    }

    #[test]
    fn convergence_two_levels() {
        let single = set(&[(0, 0)]);
        let h = set(&[(0, 0), (1, 0)]);
        let v = set(&[(0, 0), (0, 1)]);
        let coarse = table(&[(single.clone(), 1.0), (h.clone(), 2.0), (v.clone(), 2.4)]);
        let fine = table(&[(single, 1.0), (h, 2.2), (v, 2.2)]);
        let rows = convergence_metrics(&[(2.0, coarse), (8.0, fine)]).unwrap();
        assert_eq!(
            rows[1],
            ConvergenceRow {
                c_b: 8.0,
                f: 0.0,
                f_bar: 0.0,
                c: 0.0,
                c_bar: 0.0
            }
        );
        // f differs by 0.2 on both pairs, c likewise; the orbit means agree
        assert!((rows[0].f - 0.4 / 3.0).abs() < 1e-12);
        assert!((rows[0].c - 0.4 / 3.0).abs() < 1e-12);
        assert!(rows[0].f_bar.abs() < 1e-12);
        assert!(rows[0].c_bar.abs() < 1e-12);
    }

    #[test]
    fn decay_csv() {
        let r = decay_report(&synthetic(), SymmetryMode::Translation);
        let mut buf = Vec::new();
        write_decay(&mut buf, &r, &TableMeta::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# tie_break=lexicographic");
        assert_eq!(lines[1], "n,set,abs,tail");
        assert!(lines[2].starts_with("0,\"{(0,0),(1,0)}\",5.0000000000000000e-1,"));
    }

    fn arb_values() -> impl Strategy<Value = BTreeMap<SiteSet, f64>> {
        let sets = [
            set(&[(0, 0), (1, 0)]),
            set(&[(0, 0), (0, 1)]),
            set(&[(0, 0), (1, 1)]),
            set(&[(0, 1), (1, 0)]),
            set(&[(0, 0), (1, 0), (0, 1)]),
            set(&[(0, 0), (1, 0), (1, 1)]),
            set(&[(0, 0), (0, 1), (1, 1)]),
            set(&[(0, 1), (1, 0), (1, 1)]),
        ];
        proptest::collection::vec(-1.0f64..1.0, sets.len())
            .prop_map(move |v| sets.iter().cloned().zip(v).collect())
    }

    proptest! {
        #[test]
        fn dihedral_error_is_symmetric(values in arb_values(), g in 0usize..8) {
            let moved: BTreeMap<SiteSet, f64> = values
                .iter()
                .map(|(k, v)| (crate::lattice::canonical_translate(&apply_dihedral(g, k)), *v))
                .collect();
            let a = dihedral_error(&values).unwrap();
            let b = dihedral_error(&moved).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn decay_tails_are_exact(vals in proptest::collection::vec(-1.0f64..1.0, 1..20)) {
            let mut c = Interaction::new(Basis::Gas, Scope::PerTranslationClass);
            for (i, v) in vals.iter().enumerate() {
                c.insert(set(&[(0, 0), (i as i32 + 1, 0)]), *v);
            }
            let r = decay_report(&c, SymmetryMode::Translation);
            for n in 0..r.ordered.len() {
                let next = r.tails.get(n + 1).copied().unwrap_or(0.0);
                prop_assert_eq!(r.tails[n], next + r.ordered[n].1);
                if n > 0 {
                    prop_assert!(r.ordered[n - 1].1 >= r.ordered[n].1);
                }
            }
            let counts = threshold_counts(&r, &[0.1, 0.3, 0.6]);
            prop_assert!(counts[0] >= counts[1] && counts[1] >= counts[2]);
        }

        #[test]
        fn finite_volume_metric(
            a in proptest::collection::vec(-1.0f64..1.0, 4),
            b in proptest::collection::vec(-1.0f64..1.0, 4),
            c in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let keys = [set(&[(0, 0)]), set(&[(0, 0), (1, 0)]), set(&[(0, 0), (0, 1)]), set(&[(0, 0), (2, 0)])];
            let mk = |v: &Vec<f64>| table(&keys.iter().cloned().zip(v.iter().copied()).collect::<Vec<_>>());
            let (ta, tb, tc) = (mk(&a), mk(&b), mk(&c));
            let ab = finite_volume_error(&ta, &tb).unwrap();
            prop_assert_eq!(ab, finite_volume_error(&tb, &ta).unwrap());
            let ac = finite_volume_error(&ta, &tc).unwrap();
            let bc = finite_volume_error(&tb, &tc).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
