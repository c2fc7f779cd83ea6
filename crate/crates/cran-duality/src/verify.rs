//! Independent oracles and property harnesses for the duality and optimality
//! claims, plus seeded random instance generation.
//!
//! Everything here is deterministic given `(seed, index)`: each sampled
//! instance draws from its own ChaCha12 stream, so results are reproducible
//! bit-for-bit and independent of evaluation order.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::duality::{dl_to_ul, quantization_from_fronthaul_dl, quantization_from_fronthaul_ul, ul_to_dl};
use crate::error::{Error, Result};
use crate::model::{
    check_feasible, downlink_fronthaul_rates, downlink_sum_power, downlink_user_rates,
    uplink_fronthaul_rates, uplink_sum_power, uplink_user_rates, ChannelMatrix, DesignRef,
    Direction, DownlinkDesign, PowerBudget, SystemParams, UplinkDesign,
};
use crate::optimizer::{interference_map, mmse_receivers, RateTargets};

/// Name and version of the seeded generator scheme, recorded in report
/// headers for reproducibility across releases.
pub const GENERATOR_ID: &str = "chacha12.v1";

/// Independent generator stream for instance `index` of a seeded run.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard complex Gaussian sample (unit variance: real and imaginary
/// parts are N(0, 1/2)).
pub fn standard_complex_gaussian(rng: &mut ChaCha12Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random M x K channel with i.i.d. standard complex Gaussian entries
/// (Rayleigh fading convention).
pub fn random_channel(num_rrhs: usize, num_users: usize, rng: &mut ChaCha12Rng) -> ChannelMatrix {
    let rows: Vec<Vec<Complex64>> = (0..num_rrhs)
        .map(|_| (0..num_users).map(|_| standard_complex_gaussian(rng)).collect())
        .collect();
    ChannelMatrix::from_rows(&rows).expect("generated channel is well-formed")
}

/// Random unit-norm complex beamformer of length `m`.
pub fn random_unit_beamformer(m: usize, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..m).map(|_| standard_complex_gaussian(rng)).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn eta_from_caps(caps: &[f64]) -> Vec<f64> {
    caps.iter().map(|c| c.exp2() - 1.0).collect()
}

/// Random strictly feasible uplink design: random unit receive beamformers,
/// strictly positive powers scaled into the budget when one is set, and
/// quantization noise saturating every fronthaul cap.
pub fn random_uplink_design(
    ch: &ChannelMatrix,
    params: &SystemParams,
    rng: &mut ChaCha12Rng,
) -> Result<UplinkDesign> {
    params.validate(ch.num_rrhs())?;
    let k = ch.num_users();
    let beamformers: Vec<Vec<Complex64>> =
        (0..k).map(|_| random_unit_beamformer(ch.num_rrhs(), rng)).collect();
    let mut powers: Vec<f64> = (0..k).map(|_| 0.05 + 0.95 * rng.random::<f64>()).collect();
    match params.power_budget {
        PowerBudget::Finite(budget) => {
            let fill = 0.05 + 0.9 * rng.random::<f64>();
            let total: f64 = powers.iter().sum();
            let scale = fill * budget / total;
            for p in &mut powers {
                *p *= scale;
            }
        }
        PowerBudget::Unbounded => {
            let scale = 2.0 * params.noise_power;
            for p in &mut powers {
                *p *= scale;
            }
        }
    }
    let eta = eta_from_caps(&params.fronthaul_caps);
    let quant_noise = quantization_from_fronthaul_ul(ch, &powers, &eta, params.noise_power)?;
    Ok(UplinkDesign {
        powers,
        beamformers,
        quant_noise,
    })
}

/// Random strictly feasible downlink design; the power scaling accounts for
/// the quantization noise, which counts toward the downlink sum power.
pub fn random_downlink_design(
    ch: &ChannelMatrix,
    params: &SystemParams,
    rng: &mut ChaCha12Rng,
) -> Result<DownlinkDesign> {
    params.validate(ch.num_rrhs())?;
    let k = ch.num_users();
    let beamformers: Vec<Vec<Complex64>> =
        (0..k).map(|_| random_unit_beamformer(ch.num_rrhs(), rng)).collect();
    let mut powers: Vec<f64> = (0..k).map(|_| 0.05 + 0.95 * rng.random::<f64>()).collect();
    let eta = eta_from_caps(&params.fronthaul_caps);
    // Per-user loading 1 + sum_m |v_{k,m}|^2 / eta_m converts user power into
    // total transmit power.
    let loading: Vec<f64> = beamformers
        .iter()
        .map(|v| {
            1.0 + v
                .iter()
                .zip(&eta)
                .map(|(w, e)| w.norm_sqr() / e)
                .sum::<f64>()
        })
        .collect();
    let total: f64 = powers.iter().zip(&loading).map(|(p, l)| p * l).sum();
    let scale = match params.power_budget {
        PowerBudget::Finite(budget) => (0.05 + 0.9 * rng.random::<f64>()) * budget / total,
        PowerBudget::Unbounded => 2.0 * params.noise_power / total * k as f64,
    };
    for p in &mut powers {
        *p *= scale;
    }
    let quant = quantization_from_fronthaul_dl(&powers, &beamformers, &eta)?;
    Ok(DownlinkDesign {
        powers,
        beamformers,
        quant_noise: quant.quant_noise,
    })
}

// ---------------------------------------------------------------------------
// Duality validation
// ---------------------------------------------------------------------------

/// Measured preservation gaps of a duality transform, all relative.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub max_rate_gap: f64,
    pub max_fronthaul_gap: f64,
    pub power_gap: f64,
    pub pass: bool,
    pub tol: f64,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / a.abs().max(b.abs())
    }
}

/// Apply the direction-appropriate transform and report the three
/// preservation gaps, measured purely through the closed-form evaluators.
///
/// The fronthaul comparison covers the RRHs that actually carry signal for
/// some active user; an RRH no beamformer touches has downlink rate 0 by
/// construction while the uplink side always compresses its noise floor, so
/// the comparison there would be vacuous (the destination design trivially
/// fits any cap the source satisfied).
pub fn validate_duality(
    ch: &ChannelMatrix,
    noise_power: f64,
    design: DesignRef<'_>,
    tol: f64,
) -> Result<DualityReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let (src_rates, dst_rates, src_fronthaul, dst_fronthaul, src_power, dst_power, used_rrh) =
        match design {
            DesignRef::Uplink(d) => {
                let dual = ul_to_dl(ch, noise_power, d)?;
                let used = used_rrhs(&d.powers, &d.beamformers, ch.num_rrhs());
                (
                    uplink_user_rates(ch, d, noise_power)?,
                    downlink_user_rates(ch, &dual, noise_power)?,
                    uplink_fronthaul_rates(ch, &d.powers, &d.quant_noise, noise_power)?,
                    downlink_fronthaul_rates(&dual)?,
                    uplink_sum_power(&d.powers),
                    downlink_sum_power(&dual),
                    used,
                )
            }
            DesignRef::Downlink(d) => {
                let dual = dl_to_ul(ch, noise_power, d)?;
                let used = used_rrhs(&d.powers, &d.beamformers, ch.num_rrhs());
                (
                    downlink_user_rates(ch, d, noise_power)?,
                    uplink_user_rates(ch, &dual, noise_power)?,
                    downlink_fronthaul_rates(d)?,
                    uplink_fronthaul_rates(ch, &dual.powers, &dual.quant_noise, noise_power)?,
                    downlink_sum_power(d),
                    uplink_sum_power(&dual.powers),
                    used,
                )
            }
        };

    let max_rate_gap = src_rates
        .iter()
        .zip(&dst_rates)
        .map(|(a, b)| rel_gap(*a, *b))
        .fold(0.0, f64::max);
    let max_fronthaul_gap = src_fronthaul
        .iter()
        .zip(&dst_fronthaul)
        .zip(&used_rrh)
        .filter(|(_, used)| **used)
        .map(|((a, b), _)| rel_gap(*a, *b))
        .fold(0.0, f64::max);
    let power_gap = rel_gap(src_power, dst_power);
    let pass = max_rate_gap <= tol && max_fronthaul_gap <= tol && power_gap <= tol;
    Ok(DualityReport {
        max_rate_gap,
        max_fronthaul_gap,
        power_gap,
        pass,
        tol,
    })
}

fn used_rrhs(powers: &[f64], beamformers: &[Vec<Complex64>], num_rrhs: usize) -> Vec<bool> {
    (0..num_rrhs)
        .map(|m| {
            powers
                .iter()
                .zip(beamformers)
                .any(|(p, b)| *p > 0.0 && b[m].norm_sqr() > 0.0)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Interference function properties
// ---------------------------------------------------------------------------

/// Outcome of a randomized property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyVerdict {
    pub holds: bool,
    pub samples: usize,
    pub counterexample: Option<String>,
}

/// Sample random power vectors and verify the standard-interference-function
/// axioms of the solver's map at the given targets: positivity,
/// monotonicity, and strict scalability.
pub fn interference_function_properties(
    ch: &ChannelMatrix,
    targets: &RateTargets,
    fronthaul_caps: &[f64],
    noise_power: f64,
    n_samples: usize,
    seed: u64,
) -> Result<PropertyVerdict> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    if !targets.targets.iter().all(|r| *r > 0.0) {
        return Err(Error::InvalidInput(
            "interference-function properties require strictly positive targets".into(),
        ));
    }
    let k = ch.num_users();
    for i in 0..n_samples {
        let mut rng = instance_rng(seed, i as u64);
        // Log-uniform powers across four decades around the noise floor.
        let p: Vec<f64> = (0..k)
            .map(|_| noise_power * 10f64.powf(4.0 * rng.random::<f64>() - 2.0))
            .collect();
        let p_smaller: Vec<f64> = p.iter().map(|v| v * rng.random::<f64>()).collect();
        let alpha = 1.02 + 3.0 * rng.random::<f64>();
        let p_scaled: Vec<f64> = p.iter().map(|v| alpha * v).collect();

        let g = interference_map(ch, &p, targets, fronthaul_caps, noise_power)?;
        let g_smaller = interference_map(ch, &p_smaller, targets, fronthaul_caps, noise_power)?;
        let g_scaled = interference_map(ch, &p_scaled, targets, fronthaul_caps, noise_power)?;

        for uk in 0..k {
            if g[uk].is_nan() || g[uk] <= 0.0 {
                return Ok(PropertyVerdict {
                    holds: false,
                    samples: i + 1,
                    counterexample: Some(format!(
                        "positivity failed at sample {i}, user {}: Gamma = {}",
                        uk + 1,
                        g[uk]
                    )),
                });
            }
            if g[uk] < g_smaller[uk] * (1.0 - 1e-12) {
                return Ok(PropertyVerdict {
                    holds: false,
                    samples: i + 1,
                    counterexample: Some(format!(
                        "monotonicity failed at sample {i}, user {}: Gamma(p) = {} < Gamma(p') = {}",
                        uk + 1,
                        g[uk],
                        g_smaller[uk]
                    )),
                });
            }
            let excess = alpha * g[uk] - g_scaled[uk];
            if excess.is_nan() || excess <= 0.0 {
                return Ok(PropertyVerdict {
                    holds: false,
                    samples: i + 1,
                    counterexample: Some(format!(
                        "scalability failed at sample {i}, user {}: alpha Gamma(p) = {} vs Gamma(alpha p) = {}",
                        uk + 1,
                        alpha * g[uk],
                        g_scaled[uk]
                    )),
                });
            }
        }
    }
    Ok(PropertyVerdict {
        holds: true,
        samples: n_samples,
        counterexample: None,
    })
}

// ---------------------------------------------------------------------------
// Brute-force minimum power
// ---------------------------------------------------------------------------

// Grid scans stop at this multiple of the noise power.
const GRID_POWER_CAP: f64 = 2e3;

/// Grid-search oracle for the uplink sum-power minimum, for K <= 2 users.
///
/// Candidate powers live on the grid `{0, g, 2g, ...}`; at each point the
/// fronthaul-saturating quantization noise and the MMSE receivers are
/// materialized and feasibility is read off the closed-form rate
/// expressions, independently of the fixed-point route. Returns the minimal
/// feasible grid sum power (accuracy bounded by the grid step), or `None`
/// when no grid point up to the internal power cap is feasible.
pub fn brute_force_min_power(
    ch: &ChannelMatrix,
    targets: &RateTargets,
    fronthaul_caps: &[f64],
    noise_power: f64,
    grid_step: f64,
) -> Result<Option<f64>> {
    let k = ch.num_users();
    if k > 2 {
        return Err(Error::InvalidInput(
            "brute_force_min_power supports at most 2 users".into(),
        ));
    }
    if targets.len() != k {
        return Err(Error::DimensionMismatch {
            context: "brute_force_min_power::targets",
            expected: k,
            actual: targets.len(),
        });
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidInput("grid step must be positive".into()));
    }
    let eta = eta_from_caps(fronthaul_caps);
    let cap_index = (GRID_POWER_CAP * noise_power / grid_step) as u64;

    let rates_at = |p: &[f64]| -> Result<Vec<f64>> {
        let quant = quantization_from_fronthaul_ul(ch, p, &eta, noise_power)?;
        let beams = mmse_receivers(ch, p, &quant, noise_power)?;
        let design = UplinkDesign {
            powers: p.to_vec(),
            beamformers: beams,
            quant_noise: quant,
        };
        uplink_user_rates(ch, &design, noise_power)
    };
    let user_ok = |p: &[f64], user: usize| -> Result<bool> {
        Ok(rates_at(p)?[user] + 1e-12 >= targets.targets[user])
    };
    let all_ok = |p: &[f64]| -> Result<bool> {
        let rates = rates_at(p)?;
        Ok(rates
            .iter()
            .zip(&targets.targets)
            .all(|(r, t)| r + 1e-12 >= *t))
    };

    // Minimal grid index where `user`'s own-power constraint holds with the
    // other powers fixed; the rate is increasing in the user's own power.
    let min_own_index = |others: &dyn Fn(u64) -> Vec<f64>, user: usize| -> Result<Option<u64>> {
        if user_ok(&others(0), user)? {
            return Ok(Some(0));
        }
        let mut hi = 1u64;
        while !user_ok(&others(hi), user)? {
            hi *= 2;
            if hi > cap_index {
                return Ok(None);
            }
        }
        let mut lo = hi / 2; // fails at lo, holds at hi
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if user_ok(&others(mid), user)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    };

    if k == 1 {
        let place = |i: u64| vec![i as f64 * grid_step];
        return match min_own_index(&place, 0)? {
            Some(i) => Ok(Some(i as f64 * grid_step)),
            None => Ok(None),
        };
    }

    // K = 2: scan user 1 on the grid; for each point find the minimal
    // feasible power of user 2, then verify user 1's constraint there
    // (raising user 2's power only hurts user 1, so nothing further along
    // that column can help).
    let mut best: Option<f64> = None;
    let mut i1 = 0u64;
    loop {
        let p1 = i1 as f64 * grid_step;
        if let Some(b) = best {
            if p1 > b {
                break;
            }
        }
        if i1 > cap_index {
            break;
        }
        let place = |i2: u64| vec![p1, i2 as f64 * grid_step];
        if let Some(i2) = min_own_index(&place, 1)? {
            let p = place(i2);
            if all_ok(&p)? {
                let sum = p[0] + p[1];
                if best.is_none_or(|b| sum < b) {
                    best = Some(sum);
                }
            }
        }
        i1 += 1;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Rate region sampling
// ---------------------------------------------------------------------------

/// A batch of rate tuples achieved by random feasible designs.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub direction: Direction,
    pub tuples: Vec<Vec<f64>>,
    pub seed: u64,
    pub count: usize,
}

/// Draw `n` random feasible designs (powers scaled into the budget, random
/// unit beamformers, quantization at fronthaul saturation) and record their
/// rate tuples. Deterministic per seed.
pub fn sample_rate_region(
    ch: &ChannelMatrix,
    params: &SystemParams,
    direction: Direction,
    n: usize,
    seed: u64,
) -> Result<RegionSample> {
    if n == 0 {
        return Err(Error::InvalidInput("region sampling requires n >= 1".into()));
    }
    params.validate(ch.num_rrhs())?;
    if params.power_budget.as_finite().is_none() {
        return Err(Error::InvalidInput(
            "region sampling requires a finite power budget".into(),
        ));
    }
    let mut tuples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = instance_rng(seed, i as u64);
        let rates = match direction {
            Direction::Uplink => {
                let d = random_uplink_design(ch, params, &mut rng)?;
                debug_assert!(check_feasible(ch, params, DesignRef::Uplink(&d))?.feasible);
                uplink_user_rates(ch, &d, params.noise_power)?
            }
            Direction::Downlink => {
                let d = random_downlink_design(ch, params, &mut rng)?;
                debug_assert!(check_feasible(ch, params, DesignRef::Downlink(&d))?.feasible);
                downlink_user_rates(ch, &d, params.noise_power)?
            }
        };
        tuples.push(rates);
    }
    Ok(RegionSample {
        direction,
        tuples,
        seed,
        count: n,
    })
}
