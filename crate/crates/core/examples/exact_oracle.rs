//! The exact machinery behind every Monte Carlo check: survival DP for
//! lattice walks in f64 and in exact rational arithmetic, the binomial
//! closed form for the zero boundary, and the renewal function from the
//! ladder-height distribution.
//!
//! Run: cargo run --release --example exact_oracle

use num_rational::BigRational;
use stablewalk::boundary::Boundary;
use stablewalk::increments::IncrementModel;
use stablewalk::oracle::{
    dp_survival, dp_survival_rational, exact_h_for, ratio_to_f64,
    simple_walk_survival_closed_form,
};
use stablewalk::passage::PassageKind;

fn main() -> stablewalk::Result<()> {
    let m = IncrementModel::rademacher();
    let l = m.as_lattice().unwrap();

    let f = dp_survival(l, &Boundary::zero(), PassageKind::ConstantZero, 64)?;
    let q: Vec<BigRational> =
        dp_survival_rational(l, &Boundary::zero(), PassageKind::ConstantZero, 64)?;
    println!("   n    DP (f64)       DP (exact)      binomial closed form");
    for n in [1usize, 2, 4, 8, 16, 32, 64] {
        println!(
            "{n:>4}  {:>12.9}  {:>12.9}  {:>12.9}",
            f.prob[n],
            ratio_to_f64(&q[n]),
            simple_walk_survival_closed_form(n as u64)
        );
    }

    let h = exact_h_for(l, 10)?;
    println!("\nrenewal function from the ladder-height law:");
    for x in 0..=10u64 {
        print!(" h({x})={}", h.value(x));
    }
    println!();
    Ok(())
}
