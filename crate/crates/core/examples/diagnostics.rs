//! Finite-volume and truncation diagnostics on free-energy tables.
//!
//!     cargo run --release --example diagnostics

use latgas_rg::diagnostics::{convergence_metrics, dihedral_error, finite_volume_error};
use latgas_rg::engine::{Engine, TruncationPolicy, Volume};
use latgas_rg::lattice::{enumerate_classes, SymmetryMode};
use latgas_rg::model::Coupling;
use latgas_rg::table::FreeEnergyTable;

fn run(l: u32, c_b: f64, cutoff: f64) -> latgas_rg::Result<FreeEnergyTable> {
    let engine = Engine::new(
        Volume::square(l),
        TruncationPolicy::new(c_b, None)?,
        Coupling::critical(),
    );
    engine.free_energy_batch(&enumerate_classes(cutoff, SymmetryMode::Translation))
}

fn main() -> latgas_rg::Result<()> {
    let cutoff = 4.0;
    println!("finite-volume error at C_B = 8");
    let mut prev = run(1, 8.0, cutoff)?;
    for l in 2..=5 {
        let t = run(l, 8.0, cutoff)?;
        println!("  L={l}: {:.3e}", finite_volume_error(&t, &prev)?);
        prev = t;
    }

    println!("dihedral error and convergence at L = 4");
    let mut tables = Vec::new();
    for c_b in [0.5, 2.0, 8.0, 30.0] {
        let t = run(4, c_b, cutoff)?;
        println!(
            "  C_B={c_b}: dihedral error {:.3e}",
            dihedral_error(t.entries())?
        );
        tables.push((c_b, t));
    }
    for r in convergence_metrics(&tables)? {
        println!(
            "  C_B={}: |f−f∞| {:.2e}  |f̄−f̄∞| {:.2e}  |c−c∞| {:.2e}  |c̄−c̄∞| {:.2e}",
            r.c_b, r.f, r.f_bar, r.c, r.c_bar
        );
    }
    Ok(())
}
