//! Free-energy tables and the shared CSV format.
//!
//! Files look like
//!
//! ```text
//! # L=6
//! # C_B=30
//! set,value
//! "{(0,0),(1,0)}",-1.2345678901234567e-1
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::interaction::{Basis, Interaction, Scope};
use crate::lattice::{canonical_translate, SiteSet};

/// Run metadata carried by every table, rendered as `# key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableMeta {
    pub entries: BTreeMap<String, String>,
}

impl TableMeta {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes metadata comments, the `set,value` header and the rows.
pub fn write_rows<'a, W: Write>(
    mut out: W,
    meta: &TableMeta,
    rows: impl IntoIterator<Item = (&'a SiteSet, f64)>,
) -> Result<()> {
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["set", "value"])?;
    for (set, v) in rows {
        w.write_record([set.to_string(), format_value(v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads metadata and rows written by [`write_rows`].
pub fn read_rows<R: Read>(input: R) -> Result<(TableMeta, Vec<(SiteSet, f64)>)> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut meta = TableMeta::default();
    for line in text.as_bytes().lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.set(k.trim(), v.trim());
            }
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "set" || &headers[1] != "value" {
        return Err(Error::Parse(format!(
            "expected header set,value, found {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let set: SiteSet = rec[0].parse()?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {:?}", &rec[1])))?;
        rows.push((set, v));
    }
    Ok((meta, rows))
}

/// `X ↦ f(X)` with one canonical translate per class; `f(∅) = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyTable {
    pub meta: TableMeta,
    entries: BTreeMap<SiteSet, f64>,
}

impl FreeEnergyTable {
    pub fn new(meta: TableMeta) -> Self {
        FreeEnergyTable {
            meta,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<SiteSet, f64> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SiteSet, f64)> + '_ {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    /// Looks up any translate of `set`. The empty set maps to zero.
    pub fn get(&self, set: &SiteSet) -> Option<f64> {
        if set.is_empty() {
            return Some(0.0);
        }
        self.entries.get(&canonical_translate(set)).copied()
    }

    pub fn contains(&self, set: &SiteSet) -> bool {
        set.is_empty() || self.entries.contains_key(&canonical_translate(set))
    }

    pub fn insert(&mut self, set: SiteSet, value: f64) {
        if !set.is_empty() {
            self.entries.insert(canonical_translate(&set), value);
        }
    }

    /// Keeps only entries accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&SiteSet) -> bool) -> FreeEnergyTable {
        FreeEnergyTable {
            meta: self.meta.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Sorted-key merge; values for a shared key must agree to 1e−9.
    pub fn merge(&mut self, other: &FreeEnergyTable) -> Result<()> {
        for (k, &v) in &other.entries {
            if let Some(&old) = self.entries.get(k) {
                if (old - v).abs() > 1e-9 {
                    return Err(Error::Conflict {
                        set: k.clone(),
                        a: old,
                        b: v,
                    });
                }
            }
            self.entries.insert(k.clone(), v);
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.meta, self.iter())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let (meta, rows) = read_rows(input)?;
        let mut t = FreeEnergyTable::new(meta);
        for (k, v) in rows {
            t.insert(k, v);
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        write_atomic(path, &buf)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(fs::File::open(path)?)
    }
}

/// Coefficient tables use the same format with `basis` and `scope` in the metadata.
pub fn write_interaction<W: Write>(out: W, h: &Interaction, meta: &TableMeta) -> Result<()> {
    let meta = meta
        .clone()
        .with("basis", h.basis())
        .with("scope", h.scope());
    write_rows(out, &meta, h.iter())
}

pub fn read_interaction<R: Read>(input: R) -> Result<(Interaction, TableMeta)> {
    let (meta, rows) = read_rows(input)?;
    let basis: Basis = meta.get("basis").unwrap_or("gas").parse()?;
    let scope: Scope = meta.get("scope").unwrap_or("absolute").parse()?;
    let mut h = Interaction::new(basis, scope);
    for (k, v) in rows {
        h.insert(k, v);
    }
    Ok((h, meta))
}

/// Writes through a temporary file so readers never see a partial table.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Ok(existing) = fs::read(path) {
        if existing == bytes {
            return Ok(());
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
