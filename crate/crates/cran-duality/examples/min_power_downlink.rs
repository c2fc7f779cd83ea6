//! Minimize downlink sum power: solve the uplink problem, then construct the
//! optimal downlink design through the duality transform. The downlink
//! optimum costs exactly as much power as the uplink one.
//!
//! ```bash
//! cargo run --example min_power_downlink
//! ```

use cran_duality::optimizer::{
    fixed_point_solve, solve_downlink_min_power, RateTargets, SolverOptions,
};
use cran_duality::verify::{instance_rng, random_channel};

fn main() -> cran_duality::Result<()> {
    let mut rng = instance_rng(11, 0);
    let ch = random_channel(4, 3, &mut rng);
    let caps = [2.5, 2.0, 3.0, 2.2];
    let targets = RateTargets::new(vec![0.8, 0.5, 1.0])?;
    let opts = SolverOptions::default();

    let ul = fixed_point_solve(&ch, &targets, &caps, 1.0, &opts)?;
    let dl = solve_downlink_min_power(&ch, &targets, &caps, 1.0, &opts)?;
    let ul_report = ul.report.as_ref().unwrap();
    let dl_report = dl.report.as_ref().unwrap();
    let design = dl.design.as_ref().unwrap();

    println!("4-RRH, 3-user downlink sum-power minimization");
    println!("  uplink optimum   {:.12}", ul_report.sum_power);
    println!("  downlink optimum {:.12}", dl_report.sum_power);
    println!();
    for (k, (rate, target)) in dl_report.user_rates.iter().zip(&targets.targets).enumerate() {
        println!("  user {}: rate {rate:.9} (target {target}), power {:.6}", k + 1, design.powers[k]);
    }
    for (m, (got, cap)) in dl_report.fronthaul_rates.iter().zip(&caps).enumerate() {
        println!(
            "  RRH {}: fronthaul {got:.9} (cap {cap}), quantization noise {:.6}",
            m + 1,
            design.quant_noise[m]
        );
    }
    println!();
    println!(
        "  power split: users {:.6} + quantization {:.6} = {:.6}",
        design.powers.iter().sum::<f64>(),
        design.quant_noise.iter().sum::<f64>(),
        dl_report.sum_power
    );
    Ok(())
}
