//! Constructive uplink-downlink duality for compression-based C-RAN.
//!
//! Given any strictly feasible design in one direction, the transform here
//! builds a design for the other direction that preserves, exactly:
//!
//! - every user's achievable rate,
//! - every (used) RRH's fronthaul rate,
//! - the total transmit power.
//!
//! The construction follows the SINR balancing route. Writing
//! `eta_m = 2^{C_m} - 1` for the achieved fronthaul rates and `gamma_k =
//! 2^{R_k} - 1` for the achieved SINRs of the source design, the uplink
//! SINR constraints take the matrix form
//!
//! ```text
//! (I - D A) p_ul = sigma^2 D (1 + tau),   tau_k = sum_m |w_{k,m}|^2 / eta_m
//! ```
//!
//! and the downlink constraints, with the same beamformers, the form
//!
//! ```text
//! (I - D A^T) p_dl = sigma^2 D 1.
//! ```
//!
//! Both systems share the diagonal `D = diag(gamma_k / |w_k^H h_k|^2)` and
//! the nonnegative coupling matrix `A`, so a feasible source design
//! (spectral radius of `D A` below one) certifies the destination solve, and
//! the quantization-noise accounting makes the two sum powers telescope to
//! the same value.
//!
//! Users with zero power decouple: their rows and columns are removed before
//! the solve and restored as zeros afterwards.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg::{cdot, solve_real, SquareMatrix};
use crate::model::{downlink_sinrs, uplink_sinrs, ChannelMatrix, DownlinkDesign, UplinkDesign};

// ---------------------------------------------------------------------------
// Quantization noise from fronthaul usage
// ---------------------------------------------------------------------------

/// Uplink quantization noise that makes RRH `m` use exactly
/// `log2(1 + eta_m)` bits: `q_m = (sum_i p_i |h_{m,i}|^2 + sigma^2) / eta_m`.
pub fn quantization_from_fronthaul_ul(
    ch: &ChannelMatrix,
    powers: &[f64],
    eta: &[f64],
    noise_power: f64,
) -> Result<Vec<f64>> {
    if powers.len() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            context: "quantization_from_fronthaul_ul::powers",
            expected: ch.num_users(),
            actual: powers.len(),
        });
    }
    if eta.len() != ch.num_rrhs() {
        return Err(Error::DimensionMismatch {
            context: "quantization_from_fronthaul_ul::eta",
            expected: ch.num_rrhs(),
            actual: eta.len(),
        });
    }
    let mut q = Vec::with_capacity(ch.num_rrhs());
    for (m, &eta_m) in eta.iter().enumerate() {
        if !(eta_m.is_finite() && eta_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "eta must be positive and finite (RRH {}, got {eta_m})",
                m + 1
            )));
        }
        let signal: f64 = (0..ch.num_users()).map(|i| powers[i] * ch.gain_sq(m, i)).sum();
        q.push((signal + noise_power) / eta_m);
    }
    Ok(q)
}

/// Downlink quantization noise that makes RRH `m` use exactly
/// `log2(1 + eta_m)` bits: `q_m = sum_i p_i |v_{i,m}|^2 / eta_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkQuantization {
    pub quant_noise: Vec<f64>,
    /// RRHs that carry no beamformed signal; their quantization noise is 0
    /// and their fronthaul rate is 0, not `log2(1 + eta_m)`.
    pub degenerate: Vec<bool>,
}

pub fn quantization_from_fronthaul_dl(
    powers: &[f64],
    beamformers: &[Vec<Complex64>],
    eta: &[f64],
) -> Result<DownlinkQuantization> {
    if beamformers.len() != powers.len() {
        return Err(Error::DimensionMismatch {
            context: "quantization_from_fronthaul_dl::beamformers",
            expected: powers.len(),
            actual: beamformers.len(),
        });
    }
    let m_rrhs = eta.len();
    let mut quant_noise = Vec::with_capacity(m_rrhs);
    let mut degenerate = Vec::with_capacity(m_rrhs);
    for (m, &eta_m) in eta.iter().enumerate() {
        if eta_m.is_nan() || eta_m <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "eta must be positive (RRH {}, got {eta_m})",
                m + 1
            )));
        }
        let signal: f64 = powers
            .iter()
            .zip(beamformers)
            .map(|(p, v)| p * v[m].norm_sqr())
            .sum();
        degenerate.push(signal == 0.0);
        quant_noise.push(signal / eta_m);
    }
    Ok(DownlinkQuantization {
        quant_noise,
        degenerate,
    })
}

// ---------------------------------------------------------------------------
// SINR coupling system
// ---------------------------------------------------------------------------

/// The matrix form of the SINR constraints: diagonal `D`, nonnegative
/// coupling matrix `A`, fronthaul loading vector `tau`, and the `eta` /
/// `gamma` values they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSystem {
    pub d: Vec<f64>,
    pub a: SquareMatrix,
    pub tau: Vec<f64>,
    pub eta: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl CouplingSystem {
    pub fn size(&self) -> usize {
        self.d.len()
    }

    /// `D * A`.
    pub fn d_a(&self) -> SquareMatrix {
        let n = self.size();
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.d[i] * self.a.get(i, j));
            }
        }
        m
    }

    /// `D * A^T`.
    pub fn d_a_transposed(&self) -> SquareMatrix {
        let n = self.size();
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.d[i] * self.a.get(j, i));
            }
        }
        m
    }
}

fn check_coupling_inputs(
    ch: &ChannelMatrix,
    beamformers: &[Vec<Complex64>],
    eta: &[f64],
    gammas: &[f64],
    context: &'static str,
) -> Result<()> {
    if beamformers.len() != ch.num_users() || gammas.len() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            context,
            expected: ch.num_users(),
            actual: beamformers.len(),
        });
    }
    if eta.len() != ch.num_rrhs() || beamformers.iter().any(|b| b.len() != ch.num_rrhs()) {
        return Err(Error::DimensionMismatch {
            context,
            expected: ch.num_rrhs(),
            actual: eta.len(),
        });
    }
    // eta = +inf is the infinite-fronthaul limit and removes the 1/eta terms.
    if !eta.iter().all(|e| *e > 0.0) {
        return Err(Error::InvalidInput(format!("{context}: eta must be positive")));
    }
    if !gammas.iter().all(|g| g.is_finite() && *g > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{context}: SINR targets must be positive and finite (inactive users must be removed first)"
        )));
    }
    Ok(())
}

/// Quantization loading `sum_m |b_{k,m}|^2 / eta_m` per user.
fn tau_vector(beamformers: &[Vec<Complex64>], eta: &[f64]) -> Vec<f64> {
    beamformers
        .iter()
        .map(|b| {
            b.iter()
                .zip(eta)
                .map(|(w, e)| {
                    let w2 = w.norm_sqr();
                    if w2 == 0.0 {
                        0.0
                    } else {
                        w2 / e
                    }
                })
                .sum()
        })
        .collect()
}

/// Build the uplink SINR coupling system for receive beamformers `w` and
/// SINR values `gamma`:
///
/// ```text
/// A[k,k] = sum_m |h_{m,k}|^2 |w_{k,m}|^2 / eta_m
/// A[k,j] = |w_k^H h_j|^2 + sum_m |h_{m,j}|^2 |w_{k,m}|^2 / eta_m   (j != k)
/// D[k]   = gamma_k / |w_k^H h_k|^2
/// ```
pub fn build_coupling_ul(
    ch: &ChannelMatrix,
    beamformers: &[Vec<Complex64>],
    eta: &[f64],
    gammas: &[f64],
) -> Result<CouplingSystem> {
    check_coupling_inputs(ch, beamformers, eta, gammas, "build_coupling_ul")?;
    let k_users = ch.num_users();
    let mut a = SquareMatrix::zeros(k_users);
    let mut d = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let w = &beamformers[k];
        for j in 0..k_users {
            let mut quant = 0.0;
            for (m, (wm, eta_m)) in w.iter().zip(eta).enumerate() {
                let w2 = wm.norm_sqr();
                if w2 > 0.0 {
                    quant += ch.gain_sq(m, j) * w2 / eta_m;
                }
            }
            if j == k {
                a.set(k, j, quant);
            } else {
                let cross = cdot(w, &ch.user_channel(j)).norm_sqr();
                a.set(k, j, cross + quant);
            }
        }
        let direct = cdot(w, &ch.user_channel(k)).norm_sqr();
        if direct == 0.0 {
            return Err(Error::OrthogonalBeamformer { user: k + 1 });
        }
        d.push(gammas[k] / direct);
    }
    Ok(CouplingSystem {
        d,
        a,
        tau: tau_vector(beamformers, eta),
        eta: eta.to_vec(),
        gammas: gammas.to_vec(),
    })
}

/// Build the downlink SINR coupling system for transmit beamformers `v`:
///
/// ```text
/// A[k,k] = sum_m |h_{m,k}|^2 |v_{k,m}|^2 / eta_m
/// A[k,j] = |v_j^H h_k|^2 + sum_m |h_{m,k}|^2 |v_{j,m}|^2 / eta_m   (j != k)
/// D[k]   = gamma_k / |v_k^H h_k|^2
/// ```
///
/// With `v_k = w_k` this is exactly the transpose of the uplink coupling
/// matrix with the same `D`.
pub fn build_coupling_dl(
    ch: &ChannelMatrix,
    beamformers: &[Vec<Complex64>],
    eta: &[f64],
    gammas: &[f64],
) -> Result<CouplingSystem> {
    check_coupling_inputs(ch, beamformers, eta, gammas, "build_coupling_dl")?;
    let k_users = ch.num_users();
    let mut a = SquareMatrix::zeros(k_users);
    let mut d = Vec::with_capacity(k_users);
    for k in 0..k_users {
        let hk = ch.user_channel(k);
        for (j, vj) in beamformers.iter().enumerate() {
            let mut quant = 0.0;
            for (m, (vm, eta_m)) in vj.iter().zip(eta).enumerate() {
                let v2 = vm.norm_sqr();
                if v2 > 0.0 {
                    quant += ch.gain_sq(m, k) * v2 / eta_m;
                }
            }
            if j == k {
                a.set(k, j, quant);
            } else {
                let cross = cdot(vj, &hk).norm_sqr();
                a.set(k, j, cross + quant);
            }
        }
        let direct = cdot(&beamformers[k], &hk).norm_sqr();
        if direct == 0.0 {
            return Err(Error::OrthogonalBeamformer { user: k + 1 });
        }
        d.push(gammas[k] / direct);
    }
    Ok(CouplingSystem {
        d,
        a,
        tau: tau_vector(beamformers, eta),
        eta: eta.to_vec(),
        gammas: gammas.to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Spectral radius
// ---------------------------------------------------------------------------

const POWER_ITER_TOL: f64 = 1e-12;
const POWER_ITER_RESIDUAL_TOL: f64 = 1e-11;
const POWER_ITER_MAX: usize = 10_000;
// Rayleigh-quotient stagnation without a small residual means the iterate is
// cycling (imprimitive matrix); bail out to the shifted retry.
const POWER_ITER_STAGNATION_LIMIT: usize = 64;

fn power_iteration(a: &SquareMatrix, shift: f64) -> Option<(f64, Vec<f64>)> {
    let n = a.n();
    let mut rng = ChaCha12Rng::seed_from_u64(0x5eed_cab1e);
    let mut x: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut x {
        *v /= norm;
    }

    let mut lambda_prev = f64::INFINITY;
    let mut stagnation = 0usize;
    for _ in 0..POWER_ITER_MAX {
        let mut y = a.mul_vec(&x);
        if shift != 0.0 {
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += shift * xi;
            }
        }
        // Rayleigh quotient with ||x|| = 1.
        let lambda: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let scale = lambda.abs().max(1.0);
        let residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| {
                let r = yi - lambda * xi;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        if (lambda - lambda_prev).abs() <= POWER_ITER_TOL * scale {
            if residual <= POWER_ITER_RESIDUAL_TOL * scale {
                return Some((lambda, x));
            }
            stagnation += 1;
            if stagnation > POWER_ITER_STAGNATION_LIMIT {
                return None;
            }
        } else {
            stagnation = 0;
        }
        lambda_prev = lambda;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ny == 0.0 {
            // Iterate annihilated: only the zero eigenvalue is reachable.
            return Some((shift, x));
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    None
}

// One-sided Rayleigh quotients are only first-order accurate in the
// eigenvector error for nonsymmetric matrices. Combining the dominant right
// and left eigenvectors, lambda = y^T B x / y^T x, is second-order accurate
// and comfortably reaches the 1e-10 contract.
fn two_sided_estimate(a: &SquareMatrix, shift: f64) -> Option<f64> {
    let (lambda_right, x) = power_iteration(a, shift)?;
    let (_, y) = power_iteration(&a.transposed(), shift)?;
    let den: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
    if den.abs() < 1e-8 {
        // Near-defective dominant pair; keep the one-sided value.
        return Some(lambda_right);
    }
    let bx = a.mul_vec(&x);
    let mut num: f64 = y.iter().zip(&bx).map(|(a, b)| a * b).sum();
    num += shift * den;
    Some(num / den)
}

// Characteristic polynomial coefficients (monic, ascending order a[0] +
// a[1] x + ... + x^n) via the Faddeev-LeVerrier recursion.
fn char_poly_coeffs(a: &SquareMatrix) -> Vec<f64> {
    let n = a.n();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = SquareMatrix::zeros(n); // M_0 = 0
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += a.get(i, t) * m.get(t, j);
                }
                next.set(i, j, acc);
            }
        }
        for i in 0..n {
            next.set(i, i, next.get(i, i) + coeffs[n - k + 1]);
        }
        // c_{n-k} = -tr(A M_k) / k
        let mut trace = 0.0;
        for i in 0..n {
            for t in 0..n {
                trace += a.get(i, t) * next.get(t, i);
            }
        }
        coeffs[n - k] = -trace / k as f64;
        m = next;
    }
    coeffs
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * z + Complex64::new(c, 0.0);
    }
    acc
}

// Durand-Kerner simultaneous root iteration for a monic real polynomial.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..degree).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom == Complex64::ZERO {
                denom = Complex64::new(1e-30, 0.0);
            }
            let step = poly_eval(coeffs, roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    roots
}

fn char_poly_spectral_radius(a: &SquareMatrix) -> f64 {
    let n = a.n();
    let coeffs = char_poly_coeffs(a);
    match n {
        1 => coeffs[0].abs(),
        2 => {
            // x^2 + b x + c
            let b = coeffs[1];
            let c = coeffs[0];
            let disc = b * b - 4.0 * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                ((-b + s) / 2.0).abs().max(((-b - s) / 2.0).abs())
            } else {
                // Conjugate pair, |root|^2 = c.
                c.abs().sqrt()
            }
        }
        _ => poly_roots(&coeffs)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
    }
}

/// Spectral radius of a nonnegative square matrix with relative accuracy
/// around 1e-10.
///
/// Power iteration on the row-sum-normalized matrix, retried on a shifted
/// copy when the plain iteration cycles (the shift makes any irreducible
/// nonnegative matrix aperiodic and moves the radius by exactly the shift).
/// If both fail, matrices up to 4x4 fall back to characteristic-polynomial
/// roots; larger ones report non-convergence.
pub fn spectral_radius(a: &SquareMatrix) -> Result<f64> {
    if !a.is_nonnegative_finite() {
        return Err(Error::InvalidInput(
            "spectral_radius requires a nonnegative finite matrix".into(),
        ));
    }
    let n = a.n();
    if n == 0 {
        return Ok(0.0);
    }
    let scale = a.max_abs_row_sum();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let b = a.scaled(1.0 / scale);
    if let Some(r) = two_sided_estimate(&b, 0.0) {
        return Ok(r.max(0.0) * scale);
    }
    if let Some(r) = two_sided_estimate(&b, 0.5) {
        return Ok((r - 0.5).max(0.0) * scale);
    }
    if n <= 4 {
        return Ok(char_poly_spectral_radius(&b) * scale);
    }
    Err(Error::SpectralRadiusNoConvergence {
        size: n,
        iterations: POWER_ITER_MAX,
    })
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

fn active_users(powers: &[f64]) -> Vec<usize> {
    powers
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(k, _)| k)
        .collect()
}

fn select<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

/// Solve `(I - D A^T) x = rhs` for the given coupling system, requiring the
/// system to be contractive and the solution strictly positive.
fn solve_dual_powers(cs: &CouplingSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = cs.size();
    let rho = spectral_radius(&cs.d_a())?;
    if !rho.is_finite() || rho >= 1.0 {
        return Err(Error::CouplingNotContractive { rho });
    }
    let mut system = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            system.set(i, j, delta - cs.d[i] * cs.a.get(j, i));
        }
    }
    let x = solve_real(&system, rhs, "dual power solve")?;
    if !x.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::InvalidInput(
            "dual power solve produced a non-positive component; input design is inconsistent"
                .into(),
        ));
    }
    Ok(x)
}

/// Map a strictly feasible uplink design to the downlink design that
/// achieves the same per-user rates and per-RRH fronthaul rates with the
/// same sum power. The downlink beamformers are the uplink receive
/// beamformers.
pub fn ul_to_dl(
    ch: &ChannelMatrix,
    noise_power: f64,
    ul: &UplinkDesign,
) -> Result<DownlinkDesign> {
    ul.validate(ch.num_rrhs(), ch.num_users())?;
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }

    // eta_m = 2^{C_m^ul} - 1 for the achieved fronthaul rates, computed via
    // the defining ratio (exactly equivalent, better conditioned).
    let mut eta = Vec::with_capacity(ch.num_rrhs());
    for m in 0..ch.num_rrhs() {
        let signal: f64 = (0..ch.num_users())
            .map(|i| ul.powers[i] * ch.gain_sq(m, i))
            .sum();
        eta.push((signal + noise_power) / ul.quant_noise[m]);
    }

    let active = active_users(&ul.powers);
    if active.is_empty() {
        return Ok(DownlinkDesign {
            powers: vec![0.0; ch.num_users()],
            beamformers: ul.beamformers.clone(),
            quant_noise: vec![0.0; ch.num_rrhs()],
        });
    }

    // gamma_k = 2^{R_k^ul} - 1 is the achieved SINR.
    let sinrs = uplink_sinrs(ch, ul, noise_power)?;
    for &k in &active {
        if sinrs[k] <= 0.0 {
            return Err(Error::OrthogonalBeamformer { user: k + 1 });
        }
    }

    let sub_ch = ch.select_users(&active);
    let sub_beams = select(&ul.beamformers, &active);
    let sub_gammas = select(&sinrs, &active);
    let cs = build_coupling_ul(&sub_ch, &sub_beams, &eta, &sub_gammas)?;

    let rhs: Vec<f64> = cs.d.iter().map(|d| noise_power * d).collect();
    let x = solve_dual_powers(&cs, &rhs)?;

    let mut powers = vec![0.0; ch.num_users()];
    for (slot, &k) in active.iter().enumerate() {
        powers[k] = x[slot];
    }
    let quant = quantization_from_fronthaul_dl(&powers, &ul.beamformers, &eta)?;
    Ok(DownlinkDesign {
        powers,
        beamformers: ul.beamformers.clone(),
        quant_noise: quant.quant_noise,
    })
}

/// Map a strictly feasible downlink design to the uplink design that
/// achieves the same per-user rates and per-RRH fronthaul rates with the
/// same sum power (symmetric completion of the forward construction):
/// `w_k = v_k` and
///
/// ```text
/// (I - D (A^dl)^T) p_ul = sigma^2 D (1 + tau),
/// q_m^ul = (sum_i p_i^ul |h_{m,i}|^2 + sigma^2) / eta_m.
/// ```
pub fn dl_to_ul(
    ch: &ChannelMatrix,
    noise_power: f64,
    dl: &DownlinkDesign,
) -> Result<UplinkDesign> {
    dl.validate(ch.num_rrhs(), ch.num_users())?;
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::InvalidInput("noise power must be positive".into()));
    }

    let m_rrhs = ch.num_rrhs();
    let active = active_users(&dl.powers);
    if active.is_empty() {
        if let Some(m) = dl.quant_noise.iter().position(|q| *q > 0.0) {
            return Err(Error::DegenerateRrh { rrh: m + 1 });
        }
        return Ok(UplinkDesign {
            powers: vec![0.0; ch.num_users()],
            beamformers: dl.beamformers.clone(),
            quant_noise: vec![noise_power; m_rrhs],
        });
    }

    // eta_m = 2^{C_m^dl} - 1 via the defining ratio. Idle RRHs (no
    // beamformed signal) have fronthaul rate 0; if they also carry no
    // quantization power the uplink side may ignore them, otherwise no
    // power-preserving dual exists.
    let mut eta = vec![0.0f64; m_rrhs];
    let mut idle = vec![false; m_rrhs];
    for m in 0..m_rrhs {
        let signal = dl.rrh_signal_power(m);
        if signal == 0.0 {
            if dl.quant_noise[m] > 0.0 {
                return Err(Error::DegenerateRrh { rrh: m + 1 });
            }
            idle[m] = true;
        } else {
            // validate() has already rejected q == 0 with signal present.
            eta[m] = signal / dl.quant_noise[m];
        }
    }

    let sinrs = downlink_sinrs(ch, dl, noise_power)?;
    for &k in &active {
        if sinrs[k] <= 0.0 {
            return Err(Error::OrthogonalBeamformer { user: k + 1 });
        }
    }

    // Active users place no signal on idle RRHs, so every coupling term that
    // would divide by eta there carries a zero weight; +inf makes the term
    // vanish exactly.
    let eta_coupling: Vec<f64> = eta
        .iter()
        .zip(&idle)
        .map(|(e, is_idle)| if *is_idle { f64::INFINITY } else { *e })
        .collect();

    let sub_ch = ch.select_users(&active);
    let sub_beams = select(&dl.beamformers, &active);
    let sub_gammas = select(&sinrs, &active);
    let cs = build_coupling_dl(&sub_ch, &sub_beams, &eta_coupling, &sub_gammas)?;

    let rhs: Vec<f64> = cs
        .d
        .iter()
        .zip(&cs.tau)
        .map(|(d, t)| noise_power * d * (1.0 + t))
        .collect();
    let x = solve_dual_powers(&cs, &rhs)?;

    let mut powers = vec![0.0; ch.num_users()];
    for (slot, &k) in active.iter().enumerate() {
        powers[k] = x[slot];
    }
    let mut quant_noise = Vec::with_capacity(m_rrhs);
    for m in 0..m_rrhs {
        if idle[m] {
            // Unused by every beamformer; any positive value is valid and
            // does not affect rates or sum power. Noise-level is canonical.
            quant_noise.push(noise_power);
        } else {
            let signal: f64 = (0..ch.num_users())
                .map(|i| powers[i] * ch.gain_sq(m, i))
                .sum();
            quant_noise.push((signal + noise_power) / eta[m]);
        }
    }
    Ok(UplinkDesign {
        powers,
        beamformers: dl.beamformers.clone(),
        quant_noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        downlink_fronthaul_rates, downlink_sum_power, downlink_user_rates,
        uplink_fronthaul_rates, uplink_sum_power, uplink_user_rates,
    };

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_channel() -> ChannelMatrix {
        ChannelMatrix::from_rows(&[vec![c(1.0)]]).unwrap()
    }

    #[test]
    fn quantization_ul_worked_values() {
        let ch = scalar_channel();
        let q = quantization_from_fronthaul_ul(&ch, &[1.0], &[1.0], 1.0).unwrap();
        assert!((q[0] - 2.0).abs() < 1e-15);

        let q = quantization_from_fronthaul_ul(&ch, &[0.0], &[1.0], 1.0).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-15);

        let ch2 = ChannelMatrix::from_rows(&[vec![c(1.0), c(1.0)]]).unwrap();
        let q = quantization_from_fronthaul_ul(&ch2, &[1.0, 1.0], &[3.0], 1.0).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quantization_ul_feeds_back_to_eta() {
        // Feeding the result back into the fronthaul expression must give
        // exactly log2(1 + eta).
        let ch = ChannelMatrix::from_rows(&[
            vec![c(0.9), Complex64::new(0.2, -0.7)],
            vec![Complex64::new(-0.4, 0.1), c(1.3)],
        ])
        .unwrap();
        let eta = vec![2.5, 0.75];
        let powers = vec![0.8, 1.7];
        let q = quantization_from_fronthaul_ul(&ch, &powers, &eta, 1.0).unwrap();
        let rates = uplink_fronthaul_rates(&ch, &powers, &q, 1.0).unwrap();
        for (r, e) in rates.iter().zip(&eta) {
            assert!((r - (1.0 + e).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn quantization_dl_worked_values() {
        let q = quantization_from_fronthaul_dl(&[0.5], &[vec![c(1.0)]], &[1.0]).unwrap();
        assert!((q.quant_noise[0] - 0.5).abs() < 1e-15);
        assert!(!q.degenerate[0]);

        let q = quantization_from_fronthaul_dl(&[0.0], &[vec![c(1.0)]], &[1.0]).unwrap();
        assert_eq!(q.quant_noise, vec![0.0]);
        assert!(q.degenerate[0]);

        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let q = quantization_from_fronthaul_dl(
            &[2.0],
            &[vec![c(inv_sqrt2), c(inv_sqrt2)]],
            &[1.0, 1.0],
        )
        .unwrap();
        assert!((q.quant_noise[0] - 1.0).abs() < 1e-12);
        assert!((q.quant_noise[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_ul_worked_scalar() {
        let ch = scalar_channel();
        let cs = build_coupling_ul(&ch, &[vec![c(1.0)]], &[1.0], &[1.0 / 3.0]).unwrap();
        assert!((cs.d[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((cs.a.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((cs.tau[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coupling_infinite_fronthaul_limit() {
        let ch = ChannelMatrix::from_rows(&[
            vec![c(0.9), Complex64::new(0.2, -0.7)],
            vec![Complex64::new(-0.4, 0.1), c(1.3)],
        ])
        .unwrap();
        let beams = vec![
            vec![c(1.0), c(0.0)],
            vec![c(0.0), c(1.0)],
        ];
        let eta = vec![f64::INFINITY, f64::INFINITY];
        let cs = build_coupling_ul(&ch, &beams, &eta, &[0.5, 0.5]).unwrap();
        assert_eq!(cs.a.get(0, 0), 0.0);
        assert_eq!(cs.a.get(1, 1), 0.0);
        let w0_h1 = cdot(&beams[0], &ch.user_channel(1)).norm_sqr();
        assert!((cs.a.get(0, 1) - w0_h1).abs() < 1e-15);
        assert_eq!(cs.tau, vec![0.0, 0.0]);
    }

    #[test]
    fn coupling_entries_match_direct_formula() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.8, -0.3), Complex64::new(0.1, 0.4)],
            vec![Complex64::new(-0.2, 0.5), Complex64::new(1.1, 0.0)],
        ])
        .unwrap();
        let beams = vec![
            vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.7)],
            vec![Complex64::new(0.1, -0.9), Complex64::new(0.4, 0.1)],
        ];
        let eta = vec![1.7, 0.9];
        let gammas = vec![0.4, 0.8];
        let cs = build_coupling_ul(&ch, &beams, &eta, &gammas).unwrap();
        // Entry-by-entry re-evaluation, written out independently.
        for i in 0..2 {
            for j in 0..2 {
                let mut expect = 0.0;
                for m in 0..2 {
                    expect +=
                        ch.gain_sq(m, j) * beams[i][m].norm_sqr() / eta[m];
                }
                if i != j {
                    let mut dot = Complex64::ZERO;
                    for m in 0..2 {
                        dot += beams[i][m].conj() * ch.entry(m, j);
                    }
                    expect += dot.norm_sqr();
                }
                assert!(
                    (cs.a.get(i, j) - expect).abs() < 1e-14,
                    "A[{i}][{j}]"
                );
            }
        }
    }

    #[test]
    fn coupling_dl_is_transpose_of_ul_for_shared_beamformers() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.8, -0.3), Complex64::new(0.1, 0.4)],
            vec![Complex64::new(-0.2, 0.5), Complex64::new(1.1, 0.0)],
        ])
        .unwrap();
        let beams = vec![
            vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.7)],
            vec![Complex64::new(0.1, -0.9), Complex64::new(0.4, 0.1)],
        ];
        let eta = vec![1.7, 0.9];
        let gammas = vec![0.4, 0.8];
        let ul = build_coupling_ul(&ch, &beams, &eta, &gammas).unwrap();
        let dl = build_coupling_dl(&ch, &beams, &eta, &gammas).unwrap();
        for i in 0..2 {
            assert!((ul.d[i] - dl.d[i]).abs() < 1e-15);
            for j in 0..2 {
                assert!((dl.a.get(i, j) - ul.a.get(j, i)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectral_radius_trivial_cases() {
        let a = SquareMatrix::from_rows(&[vec![2.0]]).unwrap();
        assert!((spectral_radius(&a).unwrap() - 2.0).abs() < 1e-12);

        // Permutation matrix: eigenvalues are +1 and -1; the plain power
        // iteration cycles and the shifted retry must recover rho = 1.
        let a = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((spectral_radius(&a).unwrap() - 1.0).abs() < 1e-10);

        let zero = SquareMatrix::zeros(3);
        assert_eq!(spectral_radius(&zero).unwrap(), 0.0);

        // Nilpotent: rho = 0.
        let a = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(spectral_radius(&a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_matches_char_poly_on_small_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 2 + (rng.random::<u32>() % 3) as usize; // 2..=4
            let mut rows = Vec::new();
            for _ in 0..n {
                rows.push((0..n).map(|_| rng.random::<f64>() * 2.0).collect::<Vec<_>>());
            }
            let a = SquareMatrix::from_rows(&rows).unwrap();
            let by_power = spectral_radius(&a).unwrap();
            let scale = a.max_abs_row_sum();
            let by_poly = char_poly_spectral_radius(&a.scaled(1.0 / scale)) * scale;
            assert!(
                (by_power - by_poly).abs() <= 1e-8 * by_poly.max(1.0),
                "power {by_power} vs poly {by_poly}"
            );
        }
    }

    #[test]
    fn char_poly_coeffs_2x2() {
        // lambda^2 - tr lambda + det
        let a = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let coeffs = char_poly_coeffs(&a);
        assert!((coeffs[2] - 1.0).abs() < 1e-12);
        assert!((coeffs[1] + 5.0).abs() < 1e-12);
        assert!((coeffs[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn ul_to_dl_worked_scalar() {
        let ch = scalar_channel();
        let ul = UplinkDesign::new(vec![1.0], vec![vec![c(1.0)]], vec![2.0]).unwrap();
        let dl = ul_to_dl(&ch, 1.0, &ul).unwrap();
        assert!((dl.powers[0] - 0.5).abs() < 1e-12);
        assert!((dl.quant_noise[0] - 0.5).abs() < 1e-12);
        assert!((dl.beamformers[0][0] - c(1.0)).norm() < 1e-12);

        // All three preserved quantities.
        let r_ul = uplink_user_rates(&ch, &ul, 1.0).unwrap();
        let r_dl = downlink_user_rates(&ch, &dl, 1.0).unwrap();
        assert!((r_ul[0] - r_dl[0]).abs() < 1e-12);
        let f_ul = uplink_fronthaul_rates(&ch, &ul.powers, &ul.quant_noise, 1.0).unwrap();
        let f_dl = downlink_fronthaul_rates(&dl).unwrap();
        assert!((f_ul[0] - f_dl[0]).abs() < 1e-12);
        assert!((uplink_sum_power(&ul.powers) - downlink_sum_power(&dl)).abs() < 1e-12);
    }

    #[test]
    fn dl_to_ul_worked_scalar() {
        let ch = scalar_channel();
        let dl = DownlinkDesign::new(vec![0.5], vec![vec![c(1.0)]], vec![0.5]).unwrap();
        let ul = dl_to_ul(&ch, 1.0, &dl).unwrap();
        assert!((ul.powers[0] - 1.0).abs() < 1e-12);
        assert!((ul.quant_noise[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ul_to_dl_zero_power_user_decouples() {
        let ch = ChannelMatrix::from_rows(&[
            vec![c(0.9), Complex64::new(0.2, -0.7)],
            vec![Complex64::new(-0.4, 0.1), c(1.3)],
        ])
        .unwrap();
        let ul = UplinkDesign::new(
            vec![1.2, 0.0],
            vec![
                vec![Complex64::new(0.8, 0.1), Complex64::new(0.2, -0.4)],
                vec![Complex64::new(0.1, 0.5), Complex64::new(0.7, 0.0)],
            ],
            vec![0.9, 1.1],
        )
        .unwrap();
        let dl = ul_to_dl(&ch, 1.0, &ul).unwrap();
        assert_eq!(dl.powers[1], 0.0);
        assert!(dl.powers[0] > 0.0);
        let r_ul = uplink_user_rates(&ch, &ul, 1.0).unwrap();
        let r_dl = downlink_user_rates(&ch, &dl, 1.0).unwrap();
        assert!((r_ul[0] - r_dl[0]).abs() < 1e-10);
        assert_eq!(r_ul[1], 0.0);
        assert_eq!(r_dl[1], 0.0);
        assert!(
            (uplink_sum_power(&ul.powers) - downlink_sum_power(&dl)).abs()
                < 1e-10 * uplink_sum_power(&ul.powers)
        );
    }

    #[test]
    fn zero_power_designs_map_to_zero_power_designs() {
        let ch = scalar_channel();
        let ul = UplinkDesign::new(vec![0.0], vec![vec![c(1.0)]], vec![0.7]).unwrap();
        let dl = ul_to_dl(&ch, 1.0, &ul).unwrap();
        assert_eq!(dl.powers, vec![0.0]);
        assert_eq!(dl.quant_noise, vec![0.0]);

        let back = dl_to_ul(&ch, 1.0, &dl).unwrap();
        assert_eq!(back.powers, vec![0.0]);
        assert!(back.quant_noise[0] > 0.0);
    }

    #[test]
    fn dl_to_ul_rejects_wasted_quantization_power() {
        let ch = scalar_channel();
        let dl = DownlinkDesign {
            powers: vec![0.0],
            beamformers: vec![vec![c(1.0)]],
            quant_noise: vec![0.25],
        };
        assert!(matches!(
            dl_to_ul(&ch, 1.0, &dl),
            Err(Error::DegenerateRrh { rrh: 1 })
        ));
    }

    #[test]
    fn round_trip_reproduces_design() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.8, -0.3), Complex64::new(0.1, 0.4)],
            vec![Complex64::new(-0.2, 0.5), Complex64::new(1.1, 0.0)],
            vec![Complex64::new(0.3, 0.3), Complex64::new(-0.6, 0.2)],
        ])
        .unwrap();
        let ul = UplinkDesign::new(
            vec![0.7, 1.9],
            vec![
                vec![
                    Complex64::new(0.6, 0.2),
                    Complex64::new(-0.3, 0.7),
                    Complex64::new(0.2, -0.1),
                ],
                vec![
                    Complex64::new(0.1, -0.9),
                    Complex64::new(0.4, 0.1),
                    Complex64::new(-0.5, 0.3),
                ],
            ],
            vec![1.4, 0.8, 2.2],
        )
        .unwrap();
        let dl = ul_to_dl(&ch, 1.0, &ul).unwrap();
        let back = dl_to_ul(&ch, 1.0, &dl).unwrap();
        for (a, b) in back.powers.iter().zip(&ul.powers) {
            assert!((a - b).abs() <= 1e-10 * b.max(1.0), "powers {a} vs {b}");
        }
        for (a, b) in back.quant_noise.iter().zip(&ul.quant_noise) {
            assert!((a - b).abs() <= 1e-10 * b.max(1.0), "quant {a} vs {b}");
        }
    }

    #[test]
    fn constructed_powers_are_strictly_positive() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.8, -0.3), Complex64::new(0.1, 0.4)],
            vec![Complex64::new(-0.2, 0.5), Complex64::new(1.1, 0.0)],
        ])
        .unwrap();
        let ul = UplinkDesign::new(
            vec![0.9, 1.4],
            vec![
                vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.7)],
                vec![Complex64::new(0.1, -0.9), Complex64::new(0.4, 0.1)],
            ],
            vec![0.8, 0.6],
        )
        .unwrap();
        let dl = ul_to_dl(&ch, 1.0, &ul).unwrap();
        for p in &dl.powers {
            assert!(*p > 0.0);
        }
    }

    #[test]
    fn rho_equal_for_a_and_a_transposed() {
        let ch = ChannelMatrix::from_rows(&[
            vec![Complex64::new(0.8, -0.3), Complex64::new(0.1, 0.4)],
            vec![Complex64::new(-0.2, 0.5), Complex64::new(1.1, 0.0)],
        ])
        .unwrap();
        let beams = vec![
            vec![Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.7)],
            vec![Complex64::new(0.1, -0.9), Complex64::new(0.4, 0.1)],
        ];
        let cs = build_coupling_ul(&ch, &beams, &[1.7, 0.9], &[0.4, 0.8]).unwrap();
        let r1 = spectral_radius(&cs.d_a()).unwrap();
        let r2 = spectral_radius(&cs.d_a_transposed()).unwrap();
        assert!((r1 - r2).abs() <= 1e-10 * r1.max(1.0));
    }
}
