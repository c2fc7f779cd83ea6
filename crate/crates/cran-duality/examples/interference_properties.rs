//! The fixed-point solver converges because its power-update map is a
//! standard interference function: positive, monotone, and scalable. This
//! example checks the three axioms on random power vectors and shows the
//! closed-form scalar case.
//!
//! ```bash
//! cargo run --example interference_properties
//! ```

use cran_duality::model::ChannelMatrix;
use cran_duality::optimizer::{interference_map, RateTargets};
use cran_duality::verify::{instance_rng, interference_function_properties, random_channel};
use num_complex::Complex64;

fn main() -> cran_duality::Result<()> {
    // Scalar case with a 1-bit fronthaul and target log2(4/3): the map is
    // Gamma(p) = (p + 2) / 3, so all three axioms are visible by hand.
    let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(1.0, 0.0)]])?;
    let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()])?;
    println!("scalar map Gamma(p) = (p + 2) / 3:");
    for p in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let g = interference_map(&ch, &[p], &targets, &[1.0], 1.0)?;
        println!("  Gamma({p:.1}) = {:.6}", g[0]);
    }
    let alpha = 1.7;
    let g1 = interference_map(&ch, &[1.0], &targets, &[1.0], 1.0)?[0];
    let ga = interference_map(&ch, &[alpha], &targets, &[1.0], 1.0)?[0];
    println!("  scalability: {alpha} * Gamma(1) - Gamma({alpha}) = {:.6} > 0", alpha * g1 - ga);

    // Randomized check across instances.
    let mut verified = 0usize;
    for i in 0..100u64 {
        let mut rng = instance_rng(0xFACE, i);
        let m = 1 + (i % 4) as usize;
        let k = 1 + (i % 3) as usize;
        let ch = random_channel(m, k, &mut rng);
        let caps: Vec<f64> = (0..m).map(|j| 1.0 + (j as f64) * 0.5).collect();
        let targets = RateTargets::new(vec![0.5; k])?;
        let verdict = interference_function_properties(&ch, &targets, &caps, 1.0, 20, i)?;
        assert!(verdict.holds, "{:?}", verdict.counterexample);
        verified += verdict.samples;
    }
    println!("\nrandomized axioms: {verified} sample pairs across 100 instances, no counterexamples");
    Ok(())
}
