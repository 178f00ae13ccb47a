//! The central ratio P(T_g > n) / P(T_0 > n) for a slowly growing
//! boundary, computed DP-exactly, next to the Monte Carlo V(g) trace that
//! should share its limit.
//!
//! Run: cargo run --release --example passage_ratio

use stablewalk::boundary::Boundary;
use stablewalk::increments::IncrementModel;
use stablewalk::ladder::HFun;
use stablewalk::oracle::{dp_survival, exact_h_for};
use stablewalk::passage::{estimate_v, PassageKind, VgVariant};
use stablewalk::rng::RngStream;

fn main() -> stablewalk::Result<()> {
    let m = IncrementModel::rademacher();
    let l = m.as_lattice().unwrap();
    let g = Boundary::power(1.0, 0.25, 1.0); // g(n) = 1 + n^{1/4}
    let n_max = 1u64 << 12;

    let num = dp_survival(l, &g, PassageKind::LowerCurve, n_max)?;
    let den = dp_survival(l, &Boundary::zero(), PassageKind::ConstantZero, n_max)?;

    let h = exact_h_for(l, n_max + 16)?;
    let hf = HFun::from_exact(&h, 1.0);
    let grid: Vec<u64> = (4..=12).map(|k| 1u64 << k).collect();
    let trace = estimate_v(
        &m,
        &g,
        VgVariant::Sub,
        &hf,
        &grid,
        50_000,
        RngStream::new(9, 0),
    )?;

    println!("    n   P(T_g>n)/P(T_0>n)   V-trace (MC)");
    for (i, &n) in grid.iter().enumerate() {
        let r = num.prob[n as usize] / den.prob[n as usize];
        println!(
            "{n:>6}   {r:>12.4}        {:>7.4} +/- {:.4}",
            trace.value[i], trace.stderr[i]
        );
    }
    println!("\nboth columns approach the same constant V(g).");
    Ok(())
}
