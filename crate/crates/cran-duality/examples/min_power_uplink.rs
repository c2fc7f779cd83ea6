//! Minimize uplink sum power for per-user rate targets with the fixed-point
//! algorithm, then show an infeasible target being detected.
//!
//! ```bash
//! cargo run --example min_power_uplink
//! ```

use cran_duality::model::ChannelMatrix;
use cran_duality::optimizer::{fixed_point_solve, RateTargets, SolverOptions};
use cran_duality::verify::{instance_rng, random_channel};
use num_complex::Complex64;

fn main() -> cran_duality::Result<()> {
    // Scalar instance with a closed-form answer: the map is
    // Gamma(p) = (p + 2) / 3, whose fixed point is p = 1.
    let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0)]])?;
    let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()])?;
    let result = fixed_point_solve(&ch, &targets, &[1.0], 1.0, &SolverOptions::default())?;
    let design = result.design.as_ref().unwrap();
    println!("scalar instance (target log2(4/3) over a 1-bit fronthaul)");
    println!("  converged in {} iterations", result.iterations);
    println!("  p* = {:.12}, q* = {:.12}", design.powers[0], design.quant_noise[0]);

    // A random multi-user instance: at the optimum, the achieved rates sit
    // on the targets and the fronthaul caps are used exactly.
    let mut rng = instance_rng(7, 0);
    let ch = random_channel(3, 2, &mut rng);
    let caps = [2.0, 3.0, 2.5];
    let targets = RateTargets::new(vec![0.9, 0.6])?;
    let result = fixed_point_solve(&ch, &targets, &caps, 1.0, &SolverOptions::default())?;
    let report = result.report.as_ref().unwrap();
    println!("\nrandom 3-RRH, 2-user instance");
    println!("  iterations {}", result.iterations);
    println!("  sum power  {:.9}", report.sum_power);
    for (k, (rate, target)) in report.user_rates.iter().zip(&targets.targets).enumerate() {
        println!("  user {} rate {rate:.9} (target {target})", k + 1);
    }
    for (m, (got, cap)) in report.fronthaul_rates.iter().zip(&caps).enumerate() {
        println!("  RRH {} fronthaul {got:.9} (cap {cap}, saturated)", m + 1);
    }

    // A 1-bit fronthaul limits the SINR to 1 and therefore the rate to one
    // bit; asking for 1.1 bits diverges and is flagged.
    let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0)]])?;
    let targets = RateTargets::new(vec![1.1])?;
    let result = fixed_point_solve(&ch, &targets, &[1.0], 1.0, &SolverOptions::default())?;
    println!("\ninfeasible instance");
    println!("  infeasible = {}", result.infeasible);
    println!("  {}", result.diagnostic.as_deref().unwrap_or("-"));
    Ok(())
}
