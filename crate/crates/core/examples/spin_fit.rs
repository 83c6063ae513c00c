//! Spin couplings from the same free energies by the two fitting methods.
//!
//!     cargo run --release --example spin_fit

use latgas_rg::engine::{Engine, TruncationPolicy, Volume};
use latgas_rg::lattice::{enumerate_classes, SymmetryMode};
use latgas_rg::model::Coupling;
use latgas_rg::spinfit::{
    gas_coefficients, named_couplings, partially_exact, uniformly_close, FitProblem,
};

fn main() -> latgas_rg::Result<()> {
    let engine = Engine::new(
        Volume::square(4),
        TruncationPolicy::new(8.0, None)?,
        Coupling::critical(),
    );
    let table = engine.free_energy_batch(&enumerate_classes(6.0, SymmetryMode::Translation))?;

    println!(
        "{:<9} {:>6} {:>5} {:>12} {:>12} {:>12} {:>10}",
        "method", "C_hbar", "C_f", "nearest", "next", "plaquette", "max err"
    );
    for (c_hbar, c_f) in [(2.0, 2.0), (2.0, 4.0), (2.0, 6.0), (4.0, 6.0)] {
        let problem = FitProblem::from_cutoffs(&table, c_hbar, c_f)?;
        let c = gas_coefficients(&table.restrict(|k| problem.y_classes.contains(k)))?;
        let partial = partially_exact(&c, &problem.y_classes)?;
        let uniform = uniformly_close(&problem)?;
        for (name, d, err) in [
            ("partial", &partial, problem.max_residual(&partial)?),
            ("uniform", &uniform.d, uniform.epsilon),
        ] {
            let [a, b, p] = named_couplings().map(|(_, s)| d.get(&s));
            println!("{name:<9} {c_hbar:>6} {c_f:>5} {a:>12.6} {b:>12.6} {p:>12.6} {err:>10.2e}");
        }
    }
    Ok(())
}
