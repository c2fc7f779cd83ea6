//! Map designs between the uplink and the downlink and watch the three
//! preserved quantities: per-user rates, per-RRH fronthaul rates, and sum
//! power.
//!
//! ```bash
//! cargo run --example duality_transform
//! ```

use cran_duality::duality::{dl_to_ul, ul_to_dl};
use cran_duality::model::{
    evaluate_downlink, evaluate_uplink, ChannelMatrix, PowerBudget, SystemParams, UplinkDesign,
};
use cran_duality::verify::{instance_rng, random_channel, random_uplink_design};
use num_complex::Complex64;

fn main() -> cran_duality::Result<()> {
    // The worked one-RRH one-user instance: uplink (p=1, w=1, q=2) maps to
    // downlink (p=0.5, q=0.5), both with rate log2(4/3), fronthaul 1 bit,
    // and sum power 1.
    let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0)]])?;
    let ul = UplinkDesign::new(vec![1.0], vec![vec![Complex64::new(1.0, 0.0)]], vec![2.0])?;
    let dl = ul_to_dl(&ch, 1.0, &ul)?;
    println!("worked scalar instance");
    println!("  uplink   p = {:.3}, q = {:.3}", ul.powers[0], ul.quant_noise[0]);
    println!("  downlink p = {:.3}, q = {:.3}", dl.powers[0], dl.quant_noise[0]);

    let up = evaluate_uplink(&ch, &ul, 1.0)?;
    let dp = evaluate_downlink(&ch, &dl, 1.0)?;
    println!("  rate       {:.9} -> {:.9}", up.user_rates[0], dp.user_rates[0]);
    println!("  fronthaul  {:.9} -> {:.9}", up.fronthaul_rates[0], dp.fronthaul_rates[0]);
    println!("  sum power  {:.9} -> {:.9}", up.sum_power, dp.sum_power);

    // And back: the reverse transform returns to the original design.
    let back = dl_to_ul(&ch, 1.0, &dl)?;
    println!("  round trip p = {:.12}, q = {:.12}", back.powers[0], back.quant_noise[0]);

    // A larger random instance.
    let mut rng = instance_rng(2024, 0);
    let ch = random_channel(4, 6, &mut rng);
    let params = SystemParams {
        noise_power: 1.0,
        fronthaul_caps: vec![1.5, 2.0, 2.5, 3.0],
        power_budget: PowerBudget::Unbounded,
    };
    let ul = random_uplink_design(&ch, &params, &mut rng)?;
    let dl = ul_to_dl(&ch, 1.0, &ul)?;
    let up = evaluate_uplink(&ch, &ul, 1.0)?;
    let dp = evaluate_downlink(&ch, &dl, 1.0)?;

    println!("\nrandom 4-RRH, 6-user instance");
    println!("  {:>10} {:>14} {:>14}", "user", "uplink rate", "downlink rate");
    for k in 0..6 {
        println!("  {:>10} {:>14.9} {:>14.9}", k + 1, up.user_rates[k], dp.user_rates[k]);
    }
    println!("  {:>10} {:>14.9} {:>14.9}", "sum power", up.sum_power, dp.sum_power);
    Ok(())
}
