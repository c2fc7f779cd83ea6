//! Sum-power minimization under per-user rate targets and per-RRH fronthaul
//! caps.
//!
//! The uplink problem is solved globally by a standard-interference-function
//! fixed point: with the fronthaul fully used (`eta_m = 2^{C_m} - 1`,
//! quantization noise tied to the powers) and MMSE receivers, the minimal
//! power satisfying user `k`'s target is
//!
//! ```text
//! Gamma_k(p) = (2^{R_k} - 1) / (h_k^H Sigma_k(p)^{-1} h_k)
//! Sigma_k(p) = sum_{j != k} p_j h_j h_j^H + Q(p) + sigma^2 I
//! Q(p)_m     = (sum_i p_i |h_{m,i}|^2 + sigma^2) / eta_m
//! ```
//!
//! and the iteration `p <- Gamma(p)` from `p = 0` climbs monotonically to
//! the unique minimal fixed point whenever the targets are feasible.
//! Unbounded growth past a divergence threshold certifies infeasibility.
//!
//! The downlink problem is solved by taking the uplink optimum through the
//! duality transform, which preserves rates, fronthaul usage and sum power.

use num_complex::Complex64;

use crate::duality::{quantization_from_fronthaul_ul, ul_to_dl};
use crate::error::{Error, Result};
use crate::linalg::{cdot, cnorm_sqr, solve_complex};
use crate::model::{
    evaluate_downlink, evaluate_uplink, ChannelMatrix, DownlinkDesign, PerformanceReport,
    SystemParams, UplinkDesign,
};

/// Per-user rate requirements in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTargets {
    pub targets: Vec<f64>,
}

impl RateTargets {
    pub fn new(targets: Vec<f64>) -> Result<Self> {
        if !targets.iter().all(|r| r.is_finite() && *r >= 0.0) {
            return Err(Error::InvalidInput(
                "rate targets must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Fixed-point solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative per-component power-update tolerance.
    pub tolerance: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Any iterate component above this certifies infeasibility. `None`
    /// resolves to `1e12 * noise_power` at solve time.
    pub divergence_power: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iters: 10_000,
            divergence_power: None,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidInput("solver tolerance must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a solve: a design with its performance report on convergence,
/// an infeasibility verdict on certified divergence, or an indeterminate
/// flag when the iteration cap was hit first. `converged` and `infeasible`
/// are mutually exclusive.
#[derive(Debug, Clone)]
pub struct SolveResult<D> {
    pub design: Option<D>,
    pub iterations: usize,
    pub converged: bool,
    pub infeasible: bool,
    pub diagnostic: Option<String>,
    pub report: Option<PerformanceReport>,
}

impl<D> SolveResult<D> {
    fn carry_over<E>(self) -> SolveResult<E> {
        SolveResult {
            design: None,
            iterations: self.iterations,
            converged: false,
            infeasible: self.infeasible,
            diagnostic: self.diagnostic,
            report: None,
        }
    }
}

/// `eta_m = 2^{C_m} - 1` from the capacity caps.
fn eta_from_caps(caps: &[f64]) -> Result<Vec<f64>> {
    let mut eta = Vec::with_capacity(caps.len());
    for (m, &c) in caps.iter().enumerate() {
        if !(c.is_finite() && c > 0.0 && c <= SystemParams::MAX_FRONTHAUL_CAP) {
            return Err(Error::InvalidInput(format!(
                "fronthaul capacity must be positive (RRH {}, got {})",
                m + 1,
                c
            )));
        }
        eta.push(c.exp2() - 1.0);
    }
    Ok(eta)
}

/// Interference-plus-noise covariance common term `sum_j p_j h_j h_j^H +
/// diag(q) + sigma^2 I` (row-major M x M). Per-user covariances subtract the
/// user's own rank-one term.
fn covariance_base(
    ch: &ChannelMatrix,
    powers: &[f64],
    quant_noise: &[f64],
    noise_power: f64,
) -> Vec<Complex64> {
    let m_rrhs = ch.num_rrhs();
    let mut cov = vec![Complex64::ZERO; m_rrhs * m_rrhs];
    for (j, &p) in powers.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for a in 0..m_rrhs {
            let ha = ch.entry(a, j);
            for b in 0..m_rrhs {
                cov[a * m_rrhs + b] += p * ha * ch.entry(b, j).conj();
            }
        }
    }
    for m in 0..m_rrhs {
        cov[m * m_rrhs + m] += Complex64::new(quant_noise[m] + noise_power, 0.0);
    }
    cov
}

fn covariance_without_user(
    base: &[Complex64],
    ch: &ChannelMatrix,
    user: usize,
    power: f64,
) -> Vec<Complex64> {
    let m_rrhs = ch.num_rrhs();
    let mut cov = base.to_vec();
    if power > 0.0 {
        for a in 0..m_rrhs {
            let ha = ch.entry(a, user);
            for b in 0..m_rrhs {
                cov[a * m_rrhs + b] -= power * ha * ch.entry(b, user).conj();
            }
        }
    }
    cov
}

/// Rotate so the largest-magnitude entry is real positive; deterministic
/// output for reproducible reports.
fn canonicalize_phase(w: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, v) in w.iter().enumerate() {
        let mag = v.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = w[best] / w[best].norm();
    let rot = phase.conj();
    for v in w.iter_mut() {
        *v *= rot;
    }
}

/// MMSE receive beamformers `w_k` proportional to `Sigma_k^{-1} h_k`,
/// normalized to unit norm with a canonical phase. Among all unit-norm
/// receivers, `w_k` maximizes user k's uplink SINR. A user with a zero
/// channel gets the canonical first-RRH beamformer (its rate is zero
/// regardless).
pub fn mmse_receivers(
    ch: &ChannelMatrix,
    powers: &[f64],
    quant_noise: &[f64],
    noise_power: f64,
) -> Result<Vec<Vec<Complex64>>> {
    if powers.len() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            context: "mmse_receivers::powers",
            expected: ch.num_users(),
            actual: powers.len(),
        });
    }
    if quant_noise.len() != ch.num_rrhs() {
        return Err(Error::DimensionMismatch {
            context: "mmse_receivers::quant_noise",
            expected: ch.num_rrhs(),
            actual: quant_noise.len(),
        });
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }
    if !quant_noise.iter().all(|q| q.is_finite() && *q >= 0.0) {
        return Err(Error::InvalidInput(
            "quantization noise must be finite and nonnegative".into(),
        ));
    }
    let m_rrhs = ch.num_rrhs();
    let base = covariance_base(ch, powers, quant_noise, noise_power);
    let mut receivers = Vec::with_capacity(ch.num_users());
    for (k, &pk) in powers.iter().enumerate() {
        let hk = ch.user_channel(k);
        if cnorm_sqr(&hk) == 0.0 {
            let mut w = vec![Complex64::ZERO; m_rrhs];
            w[0] = Complex64::new(1.0, 0.0);
            receivers.push(w);
            continue;
        }
        let cov = covariance_without_user(&base, ch, k, pk);
        let mut w = solve_complex(m_rrhs, &cov, &hk, "mmse_receivers")?;
        let norm = cnorm_sqr(&w).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonFinite { context: "mmse_receivers" });
        }
        for v in w.iter_mut() {
            *v /= norm;
        }
        canonicalize_phase(&mut w);
        receivers.push(w);
    }
    Ok(receivers)
}

/// The interference map `Gamma(p)` of the power-control problem at the given
/// rate targets, with the fronthaul caps fully used. Component `k` is the
/// minimal power for user `k`'s target against the interference, fronthaul
/// quantization, and noise produced by `p`; it is zero where the target is
/// zero.
pub fn interference_map(
    ch: &ChannelMatrix,
    powers: &[f64],
    targets: &RateTargets,
    fronthaul_caps: &[f64],
    noise_power: f64,
) -> Result<Vec<f64>> {
    if targets.len() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            context: "interference_map::targets",
            expected: ch.num_users(),
            actual: targets.len(),
        });
    }
    if powers.len() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            context: "interference_map::powers",
            expected: ch.num_users(),
            actual: powers.len(),
        });
    }
    let eta = eta_from_caps(fronthaul_caps)?;
    if eta.len() != ch.num_rrhs() {
        return Err(Error::DimensionMismatch {
            context: "interference_map::fronthaul_caps",
            expected: ch.num_rrhs(),
            actual: eta.len(),
        });
    }
    for k in 0..ch.num_users() {
        if targets.targets[k] > 0.0 && cnorm_sqr(&ch.user_channel(k)) == 0.0 {
            return Err(Error::ZeroChannel { user: k + 1 });
        }
    }

    let quant = quantization_from_fronthaul_ul(ch, powers, &eta, noise_power)?;
    let base = covariance_base(ch, powers, &quant, noise_power);
    let m_rrhs = ch.num_rrhs();
    let mut gamma = Vec::with_capacity(ch.num_users());
    for (k, &target) in targets.targets.iter().enumerate() {
        if target == 0.0 {
            gamma.push(0.0);
            continue;
        }
        let hk = ch.user_channel(k);
        let cov = covariance_without_user(&base, ch, k, powers[k]);
        let x = solve_complex(m_rrhs, &cov, &hk, "interference_map")?;
        let qform = cdot(&hk, &x).re;
        if !(qform.is_finite() && qform > 0.0) {
            return Err(Error::NonFinite { context: "interference_map quadratic form" });
        }
        gamma.push((target.exp2() - 1.0) / qform);
    }
    Ok(gamma)
}

/// Globally solve the uplink sum-power minimization by iterating the
/// interference map from zero power. On convergence the returned design
/// saturates every fronthaul cap and meets every rate target; divergence
/// past the threshold is an infeasibility verdict.
pub fn fixed_point_solve(
    ch: &ChannelMatrix,
    targets: &RateTargets,
    fronthaul_caps: &[f64],
    noise_power: f64,
    opts: &SolverOptions,
) -> Result<SolveResult<UplinkDesign>> {
    opts.validate()?;
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }
    let divergence_power = opts.divergence_power.unwrap_or(1e12 * noise_power);
    let k_users = ch.num_users();
    let mut p = vec![0.0; k_users];

    for iteration in 1..=opts.max_iters {
        let next = interference_map(ch, &p, targets, fronthaul_caps, noise_power)?;
        if let Some(k) = next.iter().position(|v| !v.is_finite() || *v > divergence_power) {
            return Ok(SolveResult {
                design: None,
                iterations: iteration,
                converged: false,
                infeasible: true,
                diagnostic: Some(format!(
                    "power of user {} exceeded the divergence threshold {:e} at iteration {}; rate targets are infeasible under the fronthaul caps",
                    k + 1,
                    divergence_power,
                    iteration
                )),
                report: None,
            });
        }
        let converged = next.iter().zip(&p).all(|(a, b)| {
            let delta = (a - b).abs();
            delta <= opts.tolerance * a.abs() || delta <= noise_power * 1e-15
        });
        p = next;
        if converged {
            // The detection tolerance leaves an O(tol / (1 - c)) residual for
            // contraction ratio c; polish the contraction to numerical stall
            // so the returned powers sit on the fixed point itself.
            for _ in 0..256 {
                let next = interference_map(ch, &p, targets, fronthaul_caps, noise_power)?;
                let moved = next
                    .iter()
                    .zip(&p)
                    .any(|(a, b)| (a - b).abs() > 1e-15 * (a.abs() + noise_power));
                p = next;
                if !moved {
                    break;
                }
            }
            let eta = eta_from_caps(fronthaul_caps)?;
            let quant_noise = quantization_from_fronthaul_ul(ch, &p, &eta, noise_power)?;
            let beamformers = mmse_receivers(ch, &p, &quant_noise, noise_power)?;
            let design = UplinkDesign {
                powers: p,
                beamformers,
                quant_noise,
            };
            let report = evaluate_uplink(ch, &design, noise_power)?;
            return Ok(SolveResult {
                design: Some(design),
                iterations: iteration,
                converged: true,
                infeasible: false,
                diagnostic: None,
                report: Some(report),
            });
        }
    }

    Ok(SolveResult {
        design: None,
        iterations: opts.max_iters,
        converged: false,
        infeasible: false,
        diagnostic: Some(format!(
            "no convergence after {} iterations (tolerance {:e}); result indeterminate",
            opts.max_iters, opts.tolerance
        )),
        report: None,
    })
}

/// Solve the downlink sum-power minimization: solve the uplink problem, then
/// map the optimum through the duality transform. The result meets every
/// rate target and saturates every fronthaul cap with the same sum power as
/// the uplink optimum.
pub fn solve_downlink_min_power(
    ch: &ChannelMatrix,
    targets: &RateTargets,
    fronthaul_caps: &[f64],
    noise_power: f64,
    opts: &SolverOptions,
) -> Result<SolveResult<DownlinkDesign>> {
    let ul = fixed_point_solve(ch, targets, fronthaul_caps, noise_power, opts)?;
    if !ul.converged {
        return Ok(ul.carry_over());
    }
    let iterations = ul.iterations;
    let ul_design = ul.design.expect("converged solve carries a design");
    let dl_design = ul_to_dl(ch, noise_power, &ul_design)?;
    let report = evaluate_downlink(ch, &dl_design, noise_power)?;
    Ok(SolveResult {
        design: Some(dl_design),
        iterations,
        converged: true,
        infeasible: false,
        diagnostic: None,
        report: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::uplink_sinrs;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_channel() -> ChannelMatrix {
        ChannelMatrix::from_rows(&[vec![c(1.0)]]).unwrap()
    }

    fn random_channel(m: usize, k: usize, rng: &mut ChaCha12Rng) -> ChannelMatrix {
        let rows: Vec<Vec<Complex64>> = (0..m)
            .map(|_| {
                (0..k)
                    .map(|_| {
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 2.0
                    })
                    .collect()
            })
            .collect();
        ChannelMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn mmse_single_rrh_is_unity() {
        let ch = ChannelMatrix::from_rows(&[vec![Complex64::new(-0.4, 0.9), c(1.3)]]).unwrap();
        let w = mmse_receivers(&ch, &[0.5, 0.7], &[0.3], 1.0).unwrap();
        for wk in &w {
            assert!((wk[0] - c(1.0)).norm() < 1e-12, "phase-canonical scalar receiver");
        }
    }

    #[test]
    fn mmse_single_user_no_quantization_is_matched_filter() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.6, -0.2)],
            vec![Complex64::new(-0.3, 0.8)],
        ])
        .unwrap();
        let w = mmse_receivers(&ch, &[2.0], &[0.0, 0.0], 1.0).unwrap();
        let h = ch.user_channel(0);
        // w proportional to h: |w^H h|^2 == ||w||^2 ||h||^2.
        let cross = cdot(&w[0], &h).norm_sqr();
        assert!((cross - cnorm_sqr(&h)).abs() < 1e-12);
    }

    #[test]
    fn mmse_maximizes_sinr_over_random_receivers() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let ch = random_channel(2, 2, &mut rng);
        let powers = vec![0.8, 1.6];
        let quant = vec![0.4, 0.7];
        let receivers = mmse_receivers(&ch, &powers, &quant, 1.0).unwrap();
        let design = UplinkDesign {
            powers: powers.clone(),
            beamformers: receivers.clone(),
            quant_noise: quant.clone(),
        };
        let best = uplink_sinrs(&ch, &design, 1.0).unwrap();
        for _ in 0..1000 {
            let mut trial = design.clone();
            for wk in trial.beamformers.iter_mut() {
                for v in wk.iter_mut() {
                    *v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                }
                let norm = cnorm_sqr(wk).sqrt();
                for v in wk.iter_mut() {
                    *v /= norm;
                }
            }
            let got = uplink_sinrs(&ch, &trial, 1.0).unwrap();
            for k in 0..2 {
                assert!(
                    best[k] + 1e-12 >= got[k],
                    "random receiver beat MMSE for user {k}: {} > {}",
                    got[k],
                    best[k]
                );
            }
        }
    }

    #[test]
    fn interference_map_scalar_closed_form() {
        // eta = 1, q = p + 1, Gamma(p) = (1/3)(p + 2).
        let ch = scalar_channel();
        let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()]).unwrap();
        for p in [0.0, 0.5, 1.0, 3.0] {
            let g = interference_map(&ch, &[p], &targets, &[1.0], 1.0).unwrap();
            assert!((g[0] - (p + 2.0) / 3.0).abs() < 1e-12, "Gamma({p})");
        }
    }

    #[test]
    fn interference_map_zero_target_is_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let ch = random_channel(3, 2, &mut rng);
        let targets = RateTargets::new(vec![0.0, 0.0]).unwrap();
        let g = interference_map(&ch, &[0.3, 0.9], &targets, &[2.0, 2.0, 2.0], 1.0).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn interference_map_matches_rate_inversion_oracle() {
        // Independent route: materialize the MMSE receivers, then invert the
        // rate expression for the power that meets the target exactly.
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        for _ in 0..25 {
            let m = 2 + (rng.random::<u32>() % 3) as usize;
            let k = 1 + (rng.random::<u32>() % 3) as usize;
            let ch = random_channel(m, k, &mut rng);
            let caps: Vec<f64> = (0..m).map(|_| 1.0 + 3.0 * rng.random::<f64>()).collect();
            let targets =
                RateTargets::new((0..k).map(|_| 0.2 + rng.random::<f64>()).collect()).unwrap();
            let powers: Vec<f64> = (0..k).map(|_| 2.0 * rng.random::<f64>()).collect();

            let gamma = interference_map(&ch, &powers, &targets, &caps, 1.0).unwrap();

            let eta = eta_from_caps(&caps).unwrap();
            let quant = quantization_from_fronthaul_ul(&ch, &powers, &eta, 1.0).unwrap();
            let receivers = mmse_receivers(&ch, &powers, &quant, 1.0).unwrap();
            for uk in 0..k {
                let w = &receivers[uk];
                let mut interference = 0.0;
                for j in 0..k {
                    if j != uk {
                        interference +=
                            powers[j] * cdot(w, &ch.user_channel(j)).norm_sqr();
                    }
                }
                let quant_term: f64 =
                    (0..m).map(|r| quant[r] * w[r].norm_sqr()).sum();
                let denom = interference + quant_term + cnorm_sqr(w);
                let direct = cdot(w, &ch.user_channel(uk)).norm_sqr();
                let inverted = (targets.targets[uk].exp2() - 1.0) * denom / direct;
                assert!(
                    (gamma[uk] - inverted).abs() <= 1e-10 * inverted.max(1e-30),
                    "user {uk}: map {} vs inversion {}",
                    gamma[uk],
                    inverted
                );
            }
        }
    }

    #[test]
    fn fixed_point_worked_scalar() {
        let ch = scalar_channel();
        let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()]).unwrap();
        let res = fixed_point_solve(&ch, &targets, &[1.0], 1.0, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert!(!res.infeasible);
        let d = res.design.unwrap();
        assert!((d.powers[0] - 1.0).abs() < 1e-9);
        assert!((d.quant_noise[0] - 2.0).abs() < 1e-9);
        let report = res.report.unwrap();
        assert!((report.sum_power - 1.0).abs() < 1e-9);
        assert!((report.fronthaul_rates[0] - 1.0).abs() < 1e-12, "cap saturated");
    }

    #[test]
    fn fixed_point_zero_targets() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let ch = random_channel(2, 3, &mut rng);
        let targets = RateTargets::new(vec![0.0, 0.0, 0.0]).unwrap();
        let res =
            fixed_point_solve(&ch, &targets, &[1.5, 2.5], 1.0, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        let d = res.design.unwrap();
        assert_eq!(d.powers, vec![0.0, 0.0, 0.0]);
        assert_eq!(res.report.unwrap().user_rates, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn fixed_point_detects_infeasible_target() {
        // Fronthaul cap of 1 bit limits the SINR to eta = 1, so the rate can
        // never reach 1.1 bits.
        let ch = scalar_channel();
        let targets = RateTargets::new(vec![1.1]).unwrap();
        let res = fixed_point_solve(&ch, &targets, &[1.0], 1.0, &SolverOptions::default()).unwrap();
        assert!(res.infeasible);
        assert!(!res.converged);
        assert!(res.design.is_none());
        assert!(res.diagnostic.unwrap().contains("infeasible"));
    }

    #[test]
    fn iterates_from_zero_are_monotone() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let ch = random_channel(3, 2, &mut rng);
        let targets = RateTargets::new(vec![0.8, 0.5]).unwrap();
        let caps = [2.0, 3.0, 2.5];
        let mut p = vec![0.0, 0.0];
        for _ in 0..50 {
            let next = interference_map(&ch, &p, &targets, &caps, 1.0).unwrap();
            for (a, b) in next.iter().zip(&p) {
                assert!(a + 1e-15 >= *b, "iterates must be nondecreasing");
            }
            p = next;
        }
    }

    #[test]
    fn solution_meets_targets_and_saturates_fronthaul() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let ch = random_channel(3, 2, &mut rng);
        let targets = RateTargets::new(vec![0.9, 0.6]).unwrap();
        let caps = [2.0, 3.0, 2.5];
        let res = fixed_point_solve(&ch, &targets, &caps, 1.0, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        let report = res.report.unwrap();
        for (rate, target) in report.user_rates.iter().zip(&targets.targets) {
            assert!((rate - target).abs() <= 1e-6, "rate {rate} vs target {target}");
        }
        for (achieved, cap) in report.fronthaul_rates.iter().zip(&caps) {
            assert!((achieved - cap).abs() <= 1e-9, "fronthaul {achieved} vs cap {cap}");
        }
    }

    #[test]
    fn shrinking_any_power_violates_a_target() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let ch = random_channel(2, 2, &mut rng);
        let targets = RateTargets::new(vec![0.7, 0.4]).unwrap();
        let caps = [2.2, 2.8];
        let res = fixed_point_solve(&ch, &targets, &caps, 1.0, &SolverOptions::default()).unwrap();
        let d = res.design.unwrap();
        let eta = eta_from_caps(&caps).unwrap();
        for k in 0..2 {
            let mut p = d.powers.clone();
            p[k] *= 0.99;
            let quant = quantization_from_fronthaul_ul(&ch, &p, &eta, 1.0).unwrap();
            let beams = mmse_receivers(&ch, &p, &quant, 1.0).unwrap();
            let perturbed = UplinkDesign {
                powers: p,
                beamformers: beams,
                quant_noise: quant,
            };
            let rates = crate::model::uplink_user_rates(&ch, &perturbed, 1.0).unwrap();
            let violated = rates
                .iter()
                .zip(&targets.targets)
                .any(|(r, t)| *r < t - 1e-6);
            assert!(violated, "perturbing user {k} down 1% must break a target");
        }
    }

    #[test]
    fn downlink_solver_worked_scalar() {
        let ch = scalar_channel();
        let targets = RateTargets::new(vec![(4.0f64 / 3.0).log2()]).unwrap();
        let res =
            solve_downlink_min_power(&ch, &targets, &[1.0], 1.0, &SolverOptions::default())
                .unwrap();
        assert!(res.converged);
        let d = res.design.unwrap();
        assert!((d.powers[0] - 0.5).abs() < 1e-9);
        assert!((d.quant_noise[0] - 0.5).abs() < 1e-9);
        assert!((res.report.unwrap().sum_power - 1.0).abs() < 1e-9);
    }

    #[test]
    fn downlink_solver_zero_targets() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let ch = random_channel(2, 2, &mut rng);
        let targets = RateTargets::new(vec![0.0, 0.0]).unwrap();
        let res =
            solve_downlink_min_power(&ch, &targets, &[2.0, 2.0], 1.0, &SolverOptions::default())
                .unwrap();
        assert!(res.converged);
        let d = res.design.unwrap();
        assert_eq!(d.powers, vec![0.0, 0.0]);
        assert_eq!(d.quant_noise, vec![0.0, 0.0]);
        assert_eq!(res.report.unwrap().sum_power, 0.0);
    }

    #[test]
    fn downlink_solver_propagates_infeasibility() {
        let ch = scalar_channel();
        let targets = RateTargets::new(vec![1.1]).unwrap();
        let res =
            solve_downlink_min_power(&ch, &targets, &[1.0], 1.0, &SolverOptions::default())
                .unwrap();
        assert!(res.infeasible);
        assert!(res.design.is_none());
    }
}
