//! Evaluate a hand-built design in both directions: per-user rates, per-RRH
//! fronthaul usage, total power, and feasibility against system constraints.
//!
//! ```bash
//! cargo run --example evaluate_design
//! ```

use cran_duality::model::{
    check_feasible, evaluate_downlink, evaluate_uplink, ChannelMatrix, DesignRef, DownlinkDesign,
    PowerBudget, SystemParams, UplinkDesign,
};
use num_complex::Complex64;

fn main() -> cran_duality::Result<()> {
    // Two RRHs serving two users over a fixed complex channel.
    let ch = ChannelMatrix::from_rows(&[
        vec![Complex64::new(0.9, 0.1), Complex64::new(0.3, -0.2)],
        vec![Complex64::new(-0.4, 0.5), Complex64::new(1.1, 0.0)],
    ])?;
    let params = SystemParams {
        noise_power: 1.0,
        fronthaul_caps: vec![2.0, 3.0],
        power_budget: PowerBudget::Finite(6.0),
    };

    // An uplink design: user powers, receive beamformers (normalized by the
    // constructor), and per-RRH quantization noise.
    let uplink = UplinkDesign::new(
        vec![1.0, 1.5],
        vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.1)],
            vec![Complex64::new(0.1, -0.3), Complex64::new(1.0, 0.0)],
        ],
        vec![1.2, 1.0],
    )?;

    let perf = evaluate_uplink(&ch, &uplink, params.noise_power)?;
    println!("uplink design");
    for (k, rate) in perf.user_rates.iter().enumerate() {
        println!("  user {} rate      {rate:.6} bits/use", k + 1);
    }
    for (m, c) in perf.fronthaul_rates.iter().enumerate() {
        println!("  RRH {} fronthaul  {c:.6} bits/use (cap {})", m + 1, params.fronthaul_caps[m]);
    }
    println!("  sum power        {:.6}", perf.sum_power);

    let verdict = check_feasible(&ch, &params, DesignRef::Uplink(&uplink))?;
    println!("  feasible         {}", verdict.feasible);
    println!("  power slack      {:+.6}", verdict.power_slack);

    // The same exercise for a downlink design; note that quantization noise
    // is transmitted by the RRHs, so it counts toward the sum power.
    let downlink = DownlinkDesign::new(
        vec![0.8, 1.1],
        vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(-0.1, 0.2)],
            vec![Complex64::new(0.3, 0.1), Complex64::new(1.0, 0.0)],
        ],
        vec![0.4, 0.5],
    )?;
    let perf = evaluate_downlink(&ch, &downlink, params.noise_power)?;
    println!("\ndownlink design");
    for (k, rate) in perf.user_rates.iter().enumerate() {
        println!("  user {} rate      {rate:.6} bits/use", k + 1);
    }
    for (m, c) in perf.fronthaul_rates.iter().enumerate() {
        println!("  RRH {} fronthaul  {c:.6} bits/use (cap {})", m + 1, params.fronthaul_caps[m]);
    }
    println!("  sum power        {:.6} (includes quantization noise)", perf.sum_power);

    let verdict = check_feasible(&ch, &params, DesignRef::Downlink(&downlink))?;
    println!("  feasible         {}", verdict.feasible);
    for (m, slack) in verdict.fronthaul_slacks.iter().enumerate() {
        println!("  RRH {} cap slack  {slack:+.6}", m + 1);
    }
    Ok(())
}
