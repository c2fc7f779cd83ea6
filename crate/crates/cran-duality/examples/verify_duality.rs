//! Batch-check the duality transform over random instances: every strictly
//! feasible design must map to the other direction with the same rates,
//! fronthaul usage, and sum power.
//!
//! ```bash
//! cargo run --example verify_duality
//! ```

use cran_duality::model::{DesignRef, PowerBudget, SystemParams};
use cran_duality::verify::{
    instance_rng, random_channel, random_downlink_design, random_uplink_design, validate_duality,
};
use rand::Rng;

fn main() -> cran_duality::Result<()> {
    const INSTANCES: u64 = 200;
    const TOL: f64 = 1e-8;
    let mut worst: f64 = 0.0;
    let mut passed = 0usize;
    for i in 0..INSTANCES {
        let mut rng = instance_rng(0xBEEF, i);
        let m = 1 + (rng.random::<u32>() % 8) as usize;
        let k = 1 + (rng.random::<u32>() % 8) as usize;
        let ch = random_channel(m, k, &mut rng);
        let params = SystemParams {
            noise_power: 1.0,
            fronthaul_caps: (0..m).map(|_| 0.5 + 5.0 * rng.random::<f64>()).collect(),
            power_budget: PowerBudget::Unbounded,
        };

        let ul = random_uplink_design(&ch, &params, &mut rng)?;
        let r1 = validate_duality(&ch, 1.0, DesignRef::Uplink(&ul), TOL)?;

        let dl = random_downlink_design(&ch, &params, &mut rng)?;
        let r2 = validate_duality(&ch, 1.0, DesignRef::Downlink(&dl), TOL)?;

        for r in [&r1, &r2] {
            worst = worst
                .max(r.max_rate_gap)
                .max(r.max_fronthaul_gap)
                .max(r.power_gap);
        }
        passed += usize::from(r1.pass) + usize::from(r2.pass);
    }
    println!("{passed}/{} transforms preserved all quantities at tol {TOL:e}", 2 * INSTANCES);
    println!("worst relative gap observed: {worst:.3e}");
    Ok(())
}
