//! Command-line front end: every pipeline stage as a subcommand, a
//! `key=value` configuration file with flag overrides, and resumable output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::diagnostics::{
    convergence_metrics, convergence_rows, decay_report, dihedral_error, finite_volume_error,
    threshold_counts, write_decay, write_series,
};
use crate::engine::{Engine, TruncationPolicy, Volume};
use crate::error::{Error, Result};
use crate::interaction::Scope;
use crate::lattice::{enumerate_classes, size, SiteSet, SymmetryMode};
use crate::model::Coupling;
use crate::oracle::{exact_hbar, metropolis_f, MonteCarloOptions, OracleVolume};
use crate::spinfit::{
    gas_coefficients, named_couplings, partially_exact, uniformly_close, FitProblem,
};
use crate::table::{
    format_value, read_interaction, write_atomic, write_interaction, FreeEnergyTable, TableMeta,
};
use crate::ENGINE_VERSION;

/// Settings shared by all subcommands. Unset values fall back to the config
/// file, then to the defaults in [`RunConfig`].
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key=value` file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Half-width of the square block volume.
    #[arg(long = "L", global = true)]
    pub l: Option<u32>,
    /// Boundary-term size cutoff.
    #[arg(long = "cb", global = true)]
    pub c_b: Option<f64>,
    #[arg(long, global = true)]
    pub max_cardinality: Option<usize>,
    /// Size cutoff for the classes whose free energies are computed.
    #[arg(long = "cutoff", global = true)]
    pub classes_cutoff: Option<f64>,
    #[arg(long = "chbar", global = true)]
    pub c_hbar: Option<f64>,
    #[arg(long = "cf", global = true)]
    pub c_f: Option<f64>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "out-dir", global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta: f64,
    pub l: u32,
    pub c_b: f64,
    pub max_cardinality: Option<usize>,
    pub classes_cutoff: f64,
    pub c_hbar: f64,
    pub c_f: f64,
    pub jobs: usize,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: Coupling::critical().beta(),
            l: 4,
            c_b: 8.0,
            max_cardinality: None,
            classes_cutoff: 6.0,
            c_hbar: 2.0,
            c_f: 6.0,
            jobs: 0,
            seed: 1,
            output: PathBuf::from("."),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse {key}={v}")))
}

impl RunConfig {
    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "beta" => self.beta = parse_value(key, v)?,
            "L" => self.l = parse_value(key, v)?,
            "C_B" => self.c_b = parse_value(key, v)?,
            "max_cardinality" => {
                self.max_cardinality = if v == "none" {
                    None
                } else {
                    Some(parse_value(key, v)?)
                }
            }
            "C" => self.classes_cutoff = parse_value(key, v)?,
            "C_hbar" => self.c_hbar = parse_value(key, v)?,
            "C_f" => self.c_f = parse_value(key, v)?,
            "jobs" => self.jobs = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "output" => self.output = PathBuf::from(v),
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key {other:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        macro_rules! over {
            ($field:ident) => {
                if let Some(v) = args.$field.clone() {
                    cfg.$field = v;
                }
            };
        }
        over!(beta);
        over!(l);
        over!(c_b);
        over!(classes_cutoff);
        over!(c_hbar);
        over!(c_f);
        over!(jobs);
        over!(seed);
        over!(output);
        if args.max_cardinality.is_some() {
            cfg.max_cardinality = args.max_cardinality;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!(
                "beta must be a nonnegative number, got {}",
                self.beta
            )));
        }
        if !(self.c_b >= 0.0) {
            return Err(Error::Config("C_B must be nonnegative".into()));
        }
        if self.max_cardinality == Some(0) {
            return Err(Error::Config("max_cardinality must be at least 1".into()));
        }
        if self.c_hbar > self.c_f {
            return Err(Error::Config(format!(
                "C_hbar = {} exceeds C_f = {}: lower C_hbar or raise C_f",
                self.c_hbar, self.c_f
            )));
        }
        if self.c_f > self.classes_cutoff {
            return Err(Error::Config(format!(
                "C_f = {} exceeds the class cutoff C = {}: raise C or lower C_f",
                self.c_f, self.classes_cutoff
            )));
        }
        Ok(())
    }

    pub fn policy(&self) -> Result<TruncationPolicy> {
        TruncationPolicy::new(self.c_b, self.max_cardinality)
    }

    pub fn coupling(&self) -> Result<Coupling> {
        Coupling::new(self.beta)
    }

    /// Provenance lines written into every output.
    pub fn meta(&self) -> TableMeta {
        let mut m = TableMeta::default()
            .with("beta", self.beta)
            .with("L", self.l)
            .with("C_B", self.c_b)
            .with("C", self.classes_cutoff)
            .with("C_hbar", self.c_hbar)
            .with("C_f", self.c_f)
            .with("seed", self.seed)
            .with("version", ENGINE_VERSION);
        m.set(
            "max_cardinality",
            self.max_cardinality
                .map_or("none".to_string(), |c| c.to_string()),
        );
        m
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "latgas-rg",
    version,
    about = "Majority-rule renormalization of the 2D Ising model"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constrained free energies of every class up to the class cutoff.
    FreeEnergies {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gas coefficients from a free-energy table.
    GasCoeffs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spin coefficients by the partially exact or uniformly close method.
    SpinCoeffs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Partial)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the named couplings for every method and cutoff pair instead.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_delimiter = ',')]
        chbar_list: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        cf_list: Vec<f64>,
    },
    #[command(subcommand)]
    Diagnostics(DiagnosticsCommand),
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Partial,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum DiagnosticsCommand {
    /// Coefficients ordered by magnitude with tail sums.
    Decay {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "translation")]
        mode: SymmetryMode,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
        thresholds: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dihedral symmetry breaking of each table, keyed by its `C_B`.
    Dihedral {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean change of the free energies between consecutive volumes.
    Fve {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance of each table from the one with the largest `C_B`.
    Convergence {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Free energies by exhaustive enumeration on a small block rectangle.
    Exact {
        /// Block rectangle `i0,i1,j0,j1`.
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metropolis estimates of `f(Y)` for every `Y` inside a window.
    Mc {
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<i32>,
        /// Window blocks, e.g. `{(0,0)}`.
        #[arg(long)]
        window: SiteSet,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Holds `<dir>/.lock` for the lifetime of a command.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Config(format!(
                "{} exists: another run is writing to this directory",
                path.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn output_path(cfg: &RunConfig, given: &Option<PathBuf>, default: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| cfg.output.join(default))
}

fn save_bytes(path: &Path, bytes: Vec<u8>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_atomic(path, &bytes)
}

/// Computes the free energies of all translation classes with size at most
/// `C`, skipping classes already present in `out`.
pub fn cmd_free_energies(cfg: &RunConfig, out: &Path) -> Result<FreeEnergyTable> {
    let engine = Engine::new(Volume::square(cfg.l), cfg.policy()?, cfg.coupling()?);
    let mut meta = cfg.meta();
    for (k, v) in engine.metadata().entries {
        meta.set(&k, v);
    }
    let mut table = FreeEnergyTable::new(meta.clone());
    if out.exists() {
        let old = FreeEnergyTable::load(out)?;
        for key in ["beta", "L", "C_B", "max_cardinality"] {
            if old.meta.get(key) != meta.get(key) {
                return Err(Error::Config(format!(
                    "{} was computed with {key}={}, this run has {key}={}",
                    out.display(),
                    old.meta.get(key).unwrap_or("?"),
                    meta.get(key).unwrap_or("?")
                )));
            }
        }
        table.merge(&old)?;
    }
    let todo: Vec<_> = enumerate_classes(cfg.classes_cutoff, SymmetryMode::Translation)
        .into_iter()
        .filter(|c| !table.contains(&c.representative))
        .collect();
    info!(
        "{} classes to compute, {} already present",
        todo.len(),
        table.len()
    );
    if !todo.is_empty() {
        let fresh = engine.free_energy_batch(&todo)?;
        table.merge(&fresh)?;
    }
    let mut buf = Vec::new();
    table.write(&mut buf)?;
    save_bytes(out, buf)?;
    Ok(table)
}

pub fn cmd_gas_coeffs(cfg: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let table = FreeEnergyTable::load(input)?;
    let c = gas_coefficients(&table)?;
    let mut meta = table.meta.clone();
    meta.set("version", ENGINE_VERSION);
    meta.set("seed", cfg.seed);
    let mut buf = Vec::new();
    write_interaction(&mut buf, &c, &meta)?;
    save_bytes(out, buf)
}

fn restrict_to(table: &FreeEnergyTable, cutoff: f64) -> FreeEnergyTable {
    table.restrict(|k| size(k).is_ok_and(|s| s <= cutoff + 1e-9))
}

/// Fits spin coefficients; returns them with the largest error over `𝕏`.
pub fn fit(
    table: &FreeEnergyTable,
    method: Method,
    c_hbar: f64,
    c_f: f64,
) -> Result<(crate::interaction::Interaction, f64)> {
    let problem = FitProblem::from_cutoffs(table, c_hbar, c_f)?;
    match method {
        Method::Partial => {
            let c = gas_coefficients(&restrict_to(table, c_hbar))?;
            let d = partially_exact(&c, &problem.y_classes)?;
            let eps = problem.max_residual(&d)?;
            Ok((d, eps))
        }
        Method::Uniform => {
            let fit = uniformly_close(&problem)?;
            Ok((fit.d, fit.epsilon))
        }
    }
}

pub fn cmd_spin_coeffs(cfg: &RunConfig, input: &Path, method: Method, out: &Path) -> Result<f64> {
    let table = FreeEnergyTable::load(input)?;
    let (d, eps) = fit(&table, method, cfg.c_hbar, cfg.c_f)?;
    let mut meta = table.meta.clone();
    meta.set("version", ENGINE_VERSION);
    meta.set("C_hbar", cfg.c_hbar);
    meta.set("C_f", cfg.c_f);
    meta.set("method", format!("{method:?}").to_lowercase());
    meta.set("epsilon", format_value(eps));
    let mut buf = Vec::new();
    write_interaction(&mut buf, &d, &meta)?;
    save_bytes(out, buf)?;
    Ok(eps)
}

/// One row per `(method, C_hbar, C_f)` with the named couplings and the error.
pub fn cmd_spin_sweep(input: &Path, chbar_list: &[f64], cf_list: &[f64], out: &Path) -> Result<()> {
    let table = FreeEnergyTable::load(input)?;
    let mut meta = table.meta.clone();
    meta.set("version", ENGINE_VERSION);
    let mut buf = Vec::new();
    for (k, v) in &meta.entries {
        use std::io::Write;
        writeln!(buf, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(&mut buf);
    let named = named_couplings();
    let mut header = vec!["method", "C_hbar", "C_f"];
    header.extend(named.iter().map(|(n, _)| *n));
    header.push("epsilon");
    w.write_record(&header)?;
    for method in [Method::Partial, Method::Uniform] {
        for &ch in chbar_list {
            for &cf in cf_list {
                if ch > cf {
                    continue;
                }
                let (d, eps) = fit(&table, method, ch, cf)?;
                let mut rec = vec![
                    format!("{method:?}").to_lowercase(),
                    ch.to_string(),
                    cf.to_string(),
                ];
                rec.extend(named.iter().map(|(_, s)| format_value(d.get(s))));
                rec.push(format_value(eps));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    drop(w);
    save_bytes(out, buf)
}

fn load_tables(inputs: &[PathBuf], key: &str) -> Result<Vec<(f64, FreeEnergyTable)>> {
    let mut out = Vec::new();
    for p in inputs {
        let t = FreeEnergyTable::load(p)?;
        let v = t.meta.get_f64(key).ok_or_else(|| {
            Error::Config(format!("{} has no {key} in its metadata", p.display()))
        })?;
        out.push((v, t));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

pub fn cmd_diagnostics(cfg: &RunConfig, cmd: &DiagnosticsCommand) -> Result<PathBuf> {
    let meta = TableMeta::default().with("version", ENGINE_VERSION);
    match cmd {
        DiagnosticsCommand::Decay {
            input,
            mode,
            thresholds,
            out,
        } => {
            let (c, cmeta) = read_interaction(fs::File::open(input)?)?;
            if c.scope() == Scope::Absolute {
                return Err(Error::Domain(
                    "decay needs a per-class coefficient table".into(),
                ));
            }
            let report = decay_report(&c, *mode);
            let mut meta = cmeta;
            meta.set("mode", format!("{mode:?}").to_lowercase());
            for (t, n) in thresholds.iter().zip(threshold_counts(&report, thresholds)) {
                meta.set(&format!("count_above_{t:e}"), n);
            }
            let path = output_path(cfg, out, "decay.csv");
            let mut buf = Vec::new();
            write_decay(&mut buf, &report, &meta)?;
            save_bytes(&path, buf)?;
            Ok(path)
        }
        DiagnosticsCommand::Dihedral { inputs, out } => {
            let rows = load_tables(inputs, "C_B")?
                .iter()
                .map(|(cb, t)| Ok(vec![*cb, dihedral_error(t.entries())?]))
                .collect::<Result<Vec<_>>>()?;
            let path = output_path(cfg, out, "dihedral_error.csv");
            let mut buf = Vec::new();
            write_series(&mut buf, &meta, &["C_B", "value"], &rows)?;
            save_bytes(&path, buf)?;
            Ok(path)
        }
        DiagnosticsCommand::Fve { inputs, out } => {
            let tables = load_tables(inputs, "L")?;
            let rows = tables
                .windows(2)
                .map(|w| Ok(vec![w[1].0, finite_volume_error(&w[1].1, &w[0].1)?]))
                .collect::<Result<Vec<_>>>()?;
            let path = output_path(cfg, out, "fve.csv");
            let mut buf = Vec::new();
            write_series(&mut buf, &meta, &["L", "value"], &rows)?;
            save_bytes(&path, buf)?;
            Ok(path)
        }
        DiagnosticsCommand::Convergence { inputs, out } => {
            let rows = convergence_metrics(&load_tables(inputs, "C_B")?)?;
            let path = output_path(cfg, out, "convergence.csv");
            let mut buf = Vec::new();
            write_series(
                &mut buf,
                &meta,
                &["C_B", "f", "f_bar", "c", "c_bar"],
                &convergence_rows(&rows),
            )?;
            save_bytes(&path, buf)?;
            Ok(path)
        }
    }
}

fn block_rect(blocks: &[i32]) -> Result<Volume> {
    match blocks {
        &[i0, i1, j0, j1] => Volume::rect(i0, i1, j0, j1),
        _ => Err(Error::Config(
            "--blocks takes four integers i0,i1,j0,j1".into(),
        )),
    }
}

fn oracle_volume(blocks: &[i32]) -> Result<(Volume, OracleVolume)> {
    let v = block_rect(blocks)?;
    let ov = OracleVolume::from(v);
    if ov.spin_count() > crate::oracle::MAX_ORACLE_SPINS {
        return Err(Error::OracleTooLarge(ov.spin_count()));
    }
    Ok((v, ov))
}

pub fn cmd_oracle(cfg: &RunConfig, cmd: &OracleCommand) -> Result<PathBuf> {
    let coupling = cfg.coupling()?;
    let mut meta = cfg.meta().with("source", "oracle");
    match cmd {
        OracleCommand::Exact { blocks, out } => {
            let (v, ov) = oracle_volume(blocks)?;
            meta.set(
                "blocks",
                format!("{},{},{},{}", blocks[0], blocks[1], blocks[2], blocks[3]),
            );
            let engine = Engine::new(v, TruncationPolicy::none(), coupling);
            let base = exact_hbar(&SiteSet::empty(), &ov, coupling)?;
            let mut table = FreeEnergyTable::new(meta);
            for class in enumerate_classes(cfg.classes_cutoff, SymmetryMode::Translation) {
                let placed = engine.place(&class.representative);
                if placed
                    .iter()
                    .all(|s| v.contains_block(crate::model::Block::new(s.x, s.y)))
                {
                    table.insert(
                        class.representative,
                        exact_hbar(&placed, &ov, coupling)? - base,
                    );
                }
            }
            let path = output_path(cfg, out, "oracle_exact.csv");
            let mut buf = Vec::new();
            table.write(&mut buf)?;
            save_bytes(&path, buf)?;
            Ok(path)
        }
        OracleCommand::Mc {
            blocks,
            window,
            samples,
            chains,
            out,
        } => {
            let ov = OracleVolume::from(block_rect(blocks)?);
            let mut opts = MonteCarloOptions::new(*samples, cfg.seed);
            opts.chains = *chains;
            let est = metropolis_f(window, &ov, coupling, opts)?;
            meta.set("samples", samples);
            meta.set("chains", chains);
            meta.set("window", window);
            let absent: Vec<String> = est
                .iter()
                .filter(|e| e.estimate.is_none())
                .map(|e| e.set.to_string())
                .collect();
            if !absent.is_empty() {
                warn!("never observed: {}", absent.join(" "));
                meta.set("absent", absent.join(" "));
            }
            let path = output_path(cfg, out, "oracle_mc.csv");
            let mut buf = Vec::new();
            {
                use std::io::Write;
                for (k, v) in &meta.entries {
                    writeln!(buf, "# {k}={v}")?;
                }
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(["set", "value", "std_error"])?;
                for e in &est {
                    if let Some(f) = e.estimate {
                        w.write_record([
                            e.set.to_string(),
                            format_value(f),
                            format_value(e.std_error),
                        ])?;
                    }
                }
                w.flush()?;
            }
            save_bytes(&path, buf)?;
            Ok(path)
        }
    }
}

/// Exit status for an error: 1 for invalid input or configuration, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) => 1,
        _ => 2,
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.config)?;
    if cfg.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
        {
            warn!("thread pool already configured: {e}");
        }
    }
    let _lock = OutputLock::acquire(&cfg.output)?;
    let t0 = Instant::now();
    match &cli.command {
        Command::FreeEnergies { out } => {
            let path = output_path(&cfg, out, "free_energies.csv");
            let t = cmd_free_energies(&cfg, &path)?;
            info!("{} entries in {}", t.len(), path.display());
        }
        Command::GasCoeffs { input, out } => {
            cmd_gas_coeffs(&cfg, input, &output_path(&cfg, out, "gas_coeffs.csv"))?;
        }
        Command::SpinCoeffs {
            input,
            method,
            out,
            sweep,
            chbar_list,
            cf_list,
        } => {
            if *sweep {
                let ch = if chbar_list.is_empty() {
                    vec![cfg.c_hbar]
                } else {
                    chbar_list.clone()
                };
                let cf = if cf_list.is_empty() {
                    vec![cfg.c_f]
                } else {
                    cf_list.clone()
                };
                cmd_spin_sweep(input, &ch, &cf, &output_path(&cfg, out, "spin_sweep.csv"))?;
            } else {
                let name = format!("spin_coeffs_{}.csv", format!("{method:?}").to_lowercase());
                let eps = cmd_spin_coeffs(&cfg, input, *method, &output_path(&cfg, out, &name))?;
                println!("epsilon={}", format_value(eps));
            }
        }
        Command::Diagnostics(d) => {
            let p = cmd_diagnostics(&cfg, d)?;
            info!("wrote {}", p.display());
        }
        Command::Oracle(o) => {
            let p = cmd_oracle(&cfg, o)?;
            info!("wrote {}", p.display());
        }
    }
    info!("done in {:.2?}", t0.elapsed());
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Every key accepted in a configuration file.
pub const CONFIG_KEYS: [&str; 10] = [
    "beta",
    "L",
    "C_B",
    "max_cardinality",
    "C",
    "C_hbar",
    "C_f",
    "jobs",
    "seed",
    "output",
];
