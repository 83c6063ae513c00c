//! Metropolis estimates of the free energies of a two-block window, checked
//! against exact enumeration of the same 24-spin volume.
//!
//!     cargo run --release --example monte_carlo -- [samples] [seed]

use latgas_rg::engine::Volume;
use latgas_rg::model::Coupling;
use latgas_rg::oracle::{exact_f, metropolis_f, MonteCarloOptions, OracleVolume};
use latgas_rg::SiteSet;

fn main() -> latgas_rg::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples = args.next().and_then(|a| a.parse().ok()).unwrap_or(200_000);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let volume = OracleVolume::from(Volume::rect(0, 2, 0, 1)?);
    let coupling = Coupling::critical();
    let window = SiteSet::from_coords(&[(1, 0), (1, 1)]);
    let estimates = metropolis_f(
        &window,
        &volume,
        coupling,
        MonteCarloOptions::new(samples, seed),
    )?;
    for e in estimates {
        let exact = exact_f(&e.set, &volume, coupling)?;
        match e.estimate {
            Some(v) => println!(
                "f{:<14} {v:>9.5} ± {:.5}   exact {exact:.5}   ({:+.1}σ)",
                e.set.to_string(),
                e.std_error,
                (v - exact) / e.std_error
            ),
            None => println!(
                "f{:<14} never observed   exact {exact:.5}",
                e.set.to_string()
            ),
        }
    }
    Ok(())
}
