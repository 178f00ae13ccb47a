//! The factorization-based upper bound q_n for P(T_g > n), computed with
//! exact rational arithmetic, sandwiched against the true DP survival
//! probability, plus the R(1) constant controlling its tightness.
//!
//! Run: cargo run --release --example wiener_hopf_bound

use stablewalk::boundary::Boundary;
use stablewalk::increments::IncrementModel;
use stablewalk::whbound::bound_check;

fn main() -> stablewalk::Result<()> {
    let m = IncrementModel::rademacher();
    // kneed boundary: flat at 0 for ten steps, then linear growth
    let g = Boundary::Tabulated {
        grid: (0..=256u64).collect(),
        values: (0..=256u64).map(|n| n.saturating_sub(10) as f64).collect(),
    };
    let report = bound_check(m.as_lattice().unwrap(), &g, 256)?;

    println!("   n        b_n        r_n        q_n     P(T_g>n)");
    for row in report.rows.iter().filter(|r| r.n.is_power_of_two()) {
        println!(
            "{:>4}  {:>9.5}  {:>9.5}  {:>9.5}  {:>10.5}",
            row.n, row.b, row.r, row.q, row.p_tg
        );
    }
    println!(
        "\nviolations of q_n >= P(T_g>n): {}",
        report.violations.len()
    );
    println!("max q_n / P(T_g>n): {:.3}", report.max_sandwich_ratio);
    match report.r1.divergent {
        false => println!(
            "R(1) = {:.4} (truncation upper bound {:.4})",
            report.r1.value, report.r1.upper
        ),
        true => println!("R(1) diverges for this boundary"),
    }
    Ok(())
}
