//! Sample the achievable rate regions of both directions under the same
//! sum-power budget and fronthaul caps. Every uplink sample transfers to the
//! downlink through the duality transform and stays feasible, which is the
//! empirical face of the region-equality theorem.
//!
//! ```bash
//! cargo run --example rate_region
//! ```

use cran_duality::duality::ul_to_dl;
use cran_duality::model::{check_feasible, DesignRef, Direction, PowerBudget, SystemParams};
use cran_duality::verify::{
    instance_rng, random_channel, random_uplink_design, sample_rate_region,
};

fn main() -> cran_duality::Result<()> {
    let mut rng = instance_rng(404, 0);
    let ch = random_channel(3, 2, &mut rng);
    let params = SystemParams {
        noise_power: 1.0,
        fronthaul_caps: vec![2.0, 2.5, 3.0],
        power_budget: PowerBudget::Finite(8.0),
    };

    let n = 500;
    let ul_sample = sample_rate_region(&ch, &params, Direction::Uplink, n, 99)?;
    let dl_sample = sample_rate_region(&ch, &params, Direction::Downlink, n, 99)?;

    let best = |tuples: &[Vec<f64>]| {
        tuples
            .iter()
            .map(|t| t.iter().sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    println!("sampled {n} feasible designs per direction (budget {}, caps {:?})",
             params.power_budget, params.fronthaul_caps);
    println!("  best uplink sum rate   {:.6} bits/use", best(&ul_sample.tuples));
    println!("  best downlink sum rate {:.6} bits/use", best(&dl_sample.tuples));

    // Cross-direction dominance: every sampled uplink design transfers.
    let mut transferred = 0usize;
    for i in 0..n as u64 {
        let mut rng = instance_rng(99, i);
        let ul = random_uplink_design(&ch, &params, &mut rng)?;
        let dl = ul_to_dl(&ch, params.noise_power, &ul)?;
        if check_feasible(&ch, &params, DesignRef::Downlink(&dl))?.feasible {
            transferred += 1;
        }
    }
    println!("  uplink samples feasible downlink after transform: {transferred}/{n}");
    Ok(())
}
