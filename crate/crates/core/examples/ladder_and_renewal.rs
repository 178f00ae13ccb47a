//! Strict descending ladder structure: simulate (tau, chi) pairs, estimate
//! the renewal function h by Monte Carlo, and compare with the exact
//! oracle value h(x) = x + 1 for the simple walk.
//!
//! Run: cargo run --release --example ladder_and_renewal

use stablewalk::increments::IncrementModel;
use stablewalk::ladder::{estimate_renewal_h, harmonicity_residual, simulate_ladder};
use stablewalk::oracle::exact_h_for;
use stablewalk::rng::RngStream;

fn main() -> stablewalk::Result<()> {
    let m = IncrementModel::rademacher();
    let mut rng = RngStream::new(5, 0).rng();
    println!("first ladder epochs of the simple walk:");
    for _ in 0..8 {
        let rec = simulate_ladder(&m, 1 << 20, &mut rng);
        println!("  tau = {:>5}, chi = {:?}", rec.tau, rec.chi);
    }

    let grid: Vec<f64> = (0..=12).map(f64::from).collect();
    let table = estimate_renewal_h(&m, &grid, 20_000, 1 << 22, RngStream::new(3, 1))?;
    let exact = exact_h_for(m.as_lattice().unwrap(), 12)?;
    println!("\n  x   MC h(x)   exact");
    for (i, &x) in grid.iter().enumerate() {
        println!(
            "{:>3}  {:>8.4}  {:>6}",
            x,
            table.values[i],
            exact.value(x as u64)
        );
    }

    // h is harmonic for the walk killed below zero.
    let worst = (0..=8)
        .map(|x| harmonicity_residual(&m, &exact, x).unwrap().abs())
        .fold(0.0f64, f64::max);
    println!("\nmax harmonicity residual over x <= 8: {worst:.2e}");
    Ok(())
}
