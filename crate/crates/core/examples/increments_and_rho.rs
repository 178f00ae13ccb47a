//! Step-distribution basics: build the three model families, inspect the
//! positivity index rho, the truncated second moment mu, and the norming
//! sequence c, and check an empirical positivity frequency against rho.
//!
//! Run: cargo run --release --example increments_and_rho

use stablewalk::increments::IncrementModel;
use stablewalk::ladder::spitzer_positivity;
use stablewalk::rng::RngStream;

fn main() -> stablewalk::Result<()> {
    let models = vec![
        ("rademacher lattice", IncrementModel::rademacher()),
        ("stable(1.5, 1)", IncrementModel::stable(1.5, 1.0, 1.0)?),
        ("pareto tails (1.5, 0.5)", IncrementModel::pareto(1.5, 0.5)?),
    ];
    for (name, m) in &models {
        println!("{name}: alpha = {}, rho = {:.4}", m.alpha(), m.rho()?);
        for x in [10.0, 100.0, 1000.0] {
            println!("  c({x:>6}) = {:.3}", m.norming_c(x)?);
        }
    }

    // P(S_n >= 0) at large n estimates rho.
    let m = IncrementModel::stable(1.5, 1.0, 1.0)?;
    let est = spitzer_positivity(&m, 2000, 20_000, RngStream::new(7, 0));
    println!(
        "stable(1.5, 1): P(S_2000 >= 0) = {:.4} +/- {:.4} (rho = {:.4})",
        est.value,
        est.stderr,
        m.rho()?
    );
    Ok(())
}
