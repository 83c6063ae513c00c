//! Constrained free energies on a small volume, their gas coefficients, and
//! the largest coefficients by magnitude.
//!
//!     cargo run --release --example free_energies -- [L] [C_B] [C]

use latgas_rg::diagnostics::{decay_report, norm_tail, threshold_counts};
use latgas_rg::engine::{Engine, TruncationPolicy, Volume};
use latgas_rg::lattice::{enumerate_classes, SymmetryMode};
use latgas_rg::model::Coupling;
use latgas_rg::spinfit::gas_coefficients;

fn arg<T: std::str::FromStr>(n: usize, default: T) -> T {
    std::env::args()
        .nth(n)
        .and_then(|a| a.parse().ok())
        .unwrap_or(default)
}

fn main() -> latgas_rg::Result<()> {
    env_logger::init();
    let (l, c_b, c) = (arg(1, 3u32), arg(2, 8.0), arg(3, 4.0));
    let engine = Engine::new(
        Volume::square(l),
        TruncationPolicy::new(c_b, None)?,
        Coupling::critical(),
    );
    let classes = enumerate_classes(c, SymmetryMode::Translation);
    let table = engine.free_energy_batch(&classes)?;
    println!("{} free energies at L={l}, C_B={c_b}", table.len());

    let coeffs = gas_coefficients(&table)?;
    let report = decay_report(&coeffs, SymmetryMode::Translation);
    for ((set, v), tail) in report.ordered.iter().zip(&report.tails).take(10) {
        println!("  |c{set}| = {v:.6e}   tail {tail:.3e}");
    }
    println!("norm {:.6}", norm_tail(&coeffs));
    println!(
        "above 1e-2, 1e-3, 1e-4: {:?}",
        threshold_counts(&report, &[1e-2, 1e-3, 1e-4])
    );

    let mut out = std::io::stdout().lock();
    if std::env::var_os("PRINT_TABLE").is_some() {
        table.write(&mut out)?;
    }
    Ok(())
}
