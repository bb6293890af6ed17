//! Spectrum efficiency and the closed-form rate results used as oracles:
//! the single-path ZF rate through the Gram inverse, the interference-free
//! capacity it approaches, the equalized three-user bound, and the
//! tridiagonal gamma recurrence behind the linear-placement bound.

use crate::array::{ArrayGeometry, Location};
use crate::channel::{path_response, ChannelRealization, PropagationModel};
use crate::correlation::exact_correlation;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_inverse, inner, CMat};
use crate::precoding::PrecodingSolution;
use num_complex::Complex64;

/// Sum and per-user downlink spectrum efficiency (bit/s/Hz):
/// R_k = log2(1 + p_k |h_k^H c_k|^2 / (sigma^2 + sum_{l!=k} p_l |h_k^H c_l|^2))
/// with c_l the composite precoder columns.
pub fn spectrum_efficiency(
    channels: &[ChannelRealization],
    solution: &PrecodingSolution,
    powers: &[f64],
    noise_variance: f64,
) -> (f64, Vec<f64>) {
    let cols = solution.effective_columns();
    let k = channels.len();
    let mut per_user = Vec::with_capacity(k);
    for ki in 0..k {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for li in 0..k {
            let g = inner(&channels[ki].vector, &cols.column(li)).norm_sqr();
            if li == ki {
                signal = powers[li] * g;
            } else {
                interference += powers[li] * g;
            }
        }
        per_user.push((1.0 + signal / (noise_variance + interference)).log2());
    }
    (per_user.iter().sum(), per_user)
}

/// Interference-free capacity with equal power split:
/// sum_k log2(1 + P N |alpha_k|^2 / (K sigma^2)).
pub fn ideal_capacity(n: usize, gains: &[Complex64], total_power: f64, sigma2: f64) -> f64 {
    let k = gains.len() as f64;
    gains
        .iter()
        .map(|a| (1.0 + total_power * n as f64 * a.norm_sqr() / (k * sigma2)).log2())
        .sum()
}

/// Closed-form sum rate of the single-path perfect-CSI ZF pipeline with the
/// exact per-user beams as the analog stage:
/// sum_k log2(1 + P N |alpha_k|^2 / (K sigma^2 [(B^H B)^{-1}]_kk)).
pub fn single_path_zf_rate(
    beam_columns: &CMat,
    gains: &[Complex64],
    total_power: f64,
    sigma2: f64,
) -> Result<f64> {
    let k = beam_columns.cols;
    if gains.len() != k {
        return Err(Error::Config("one gain per beam column required".into()));
    }
    let n = beam_columns.rows as f64;
    let gram = beam_columns.hermitian_transpose().mul(beam_columns);
    let gram_inv = hermitian_inverse(&gram)?;
    let mut rate = 0.0;
    for ki in 0..k {
        let denom = gram_inv[(ki, ki)].re;
        rate += (1.0 + total_power * n * gains[ki].norm_sqr() / (k as f64 * sigma2 * denom)).log2();
    }
    Ok(rate)
}

/// Diagonal of the inverse of the K x K unit-diagonal tridiagonal Toeplitz
/// correlation matrix with adjacent magnitude |delta|, via the second-order
/// recurrence on leading minors:
/// theta_i = theta_{i-1} - |delta|^2 theta_{i-2}, gamma_k = theta_{k-1} theta_{K-k} / theta_K.
pub fn equal_adjacent_gammas(user_count: usize, delta_abs: f64) -> Result<Vec<f64>> {
    if user_count == 0 {
        return Err(Error::Config("need at least one user".into()));
    }
    let u = delta_abs * delta_abs;
    if !(0.0..=0.5 + 1e-12).contains(&u) {
        return Err(Error::Domain(format!(
            "|delta|^2 = {u:.6} outside [0, 1/2]; the tridiagonal model degenerates"
        )));
    }
    // theta[i] holds the determinant of the leading i x i block.
    let mut theta = vec![0.0f64; user_count + 2];
    theta[0] = 0.0; // theta_{-1}
    theta[1] = 1.0; // theta_0
    for i in 2..user_count + 2 {
        theta[i] = theta[i - 1] - u * theta[i - 2];
    }
    let det = theta[user_count + 1];
    if det.abs() < 1e-300 {
        return Err(Error::Singular(
            "tridiagonal correlation matrix is singular".into(),
        ));
    }
    Ok((1..=user_count)
        .map(|k| theta[k] * theta[user_count + 1 - k] / det)
        .collect())
}

/// Equalized three-user rate bound.
///
/// `g` maps an inverse-distance offset to the adjacent-pair correlation
/// magnitude; the middle user's offset x_hat balances g(x) = g(r0 - x),
/// solved by bisection on the non-increasing envelope of `g`. Returns
/// (x_hat, bound) where the bound evaluates the tridiagonal rate at the
/// balanced squared correlation:
/// 2 log2(1 + tau (1-2g)/(1-g)) + log2(1 + tau (1-2g)), tau = P N alpha^2 / (K sigma^2).
pub fn three_user_equalized_bound(
    g: impl Fn(f64) -> f64,
    r0: f64,
    n: usize,
    alpha_abs: f64,
    total_power: f64,
    power_split_users: usize,
    sigma2: f64,
) -> Result<(f64, f64)> {
    if !(r0 > 0.0) {
        return Err(Error::Domain("offset span must be positive".into()));
    }
    // Non-increasing envelope of g on a dense offset grid.
    let samples = 4000usize;
    let lo = r0 * 1e-9;
    let hi = r0 * (1.0 - 1e-9);
    let step = (hi - lo) / samples as f64;
    let mut env: Vec<f64> = (0..=samples).map(|i| g(lo + i as f64 * step)).collect();
    let mut run = 0.0f64;
    for v in env.iter_mut().rev() {
        run = run.max(*v);
        *v = run;
    }
    let env_at = |x: f64| -> f64 {
        let pos = ((x - lo) / step).clamp(0.0, samples as f64);
        let i = (pos as usize).min(samples - 1);
        let frac = pos - i as f64;
        env[i] * (1.0 - frac) + env[i + 1] * frac
    };

    let h = |x: f64| env_at(x) - env_at(r0 - x);
    let (mut a, mut b) = (lo, hi);
    let (ha, hb) = (h(a), h(b));
    if ha < 0.0 || hb > 0.0 {
        return Err(Error::NoConvergence(
            "balance equation has no sign change in the bracket".into(),
        ));
    }
    let mut x_hat = 0.5 * (a + b);
    for _ in 0..200 {
        let hm = h(x_hat);
        if hm == 0.0 || (b - a) < 1e-13 * r0 {
            break;
        }
        if hm > 0.0 {
            a = x_hat;
        } else {
            b = x_hat;
        }
        x_hat = 0.5 * (a + b);
    }

    let g_sq = g(x_hat).powi(2);
    if g_sq > 0.5 {
        return Err(Error::Domain(format!(
            "balanced correlation^2 = {g_sq:.4} exceeds 1/2"
        )));
    }
    let tau =
        total_power * n as f64 * alpha_abs * alpha_abs / (power_split_users as f64 * sigma2);
    let bound = 2.0 * (1.0 + tau * (1.0 - 2.0 * g_sq) / (1.0 - g_sq)).log2()
        + (1.0 + tau * (1.0 - 2.0 * g_sq)).log2();
    Ok((x_hat, bound))
}

/// Outcome of the equalized linear-placement bound.
#[derive(Debug, Clone)]
pub struct LinearBoundOutcome {
    /// Equalized adjacent-pair correlation magnitude.
    pub delta_abs: f64,
    /// Tridiagonal inverse diagonal at that correlation.
    pub gammas: Vec<f64>,
    /// The rate bound sum_k log2(1 + tau / gamma_k).
    pub rate_bound: f64,
    /// The equalized user radii (descending correlation order, ascending r).
    pub radii: Vec<f64>,
}

/// Complex correlation of two same-angle focusing vectors of the given
/// geometry, as a function of the two radii.
fn adjacent_correlation(
    geom: &ArrayGeometry,
    theta: f64,
    phi: f64,
    r_a: f64,
    r_b: f64,
) -> Result<f64> {
    let va = path_response(geom, &Location::new(r_a, theta, phi)?, PropagationModel::NearField)?;
    let vb = path_response(geom, &Location::new(r_b, theta, phi)?, PropagationModel::NearField)?;
    exact_correlation(&va, &vb)
}

/// Rate bound for K users placed on one ray: interior radii are adjusted by
/// coordinate-wise bisection until all adjacent-pair correlations match
/// (max-min gap below 1e-4), giving the min-max correlation |delta|; the
/// bound is then sum_k log2(1 + P N alpha^2 / (K sigma^2 gamma_k)).
pub fn linear_equalized_bound(
    geom: &ArrayGeometry,
    user_count: usize,
    theta: f64,
    phi: f64,
    r_min: f64,
    r_max: f64,
    total_power: f64,
    sigma2: f64,
    alpha_abs: f64,
) -> Result<LinearBoundOutcome> {
    if user_count == 0 {
        return Err(Error::Config("need at least one user".into()));
    }
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(Error::Config("need 0 < r_min < r_max".into()));
    }
    let n = geom.total_elements();
    let tau_of = |gamma: f64| {
        total_power * n as f64 * alpha_abs * alpha_abs / (user_count as f64 * sigma2 * gamma)
    };
    if user_count == 1 {
        return Ok(LinearBoundOutcome {
            delta_abs: 0.0,
            gammas: vec![1.0],
            rate_bound: (1.0 + tau_of(1.0)).log2(),
            radii: vec![r_max],
        });
    }

    // Work in inverse distance, endpoints pinned at the range limits; the
    // correlation of a same-angle pair depends only on the u-gap, so equal
    // gaps equalize the correlations exactly.
    let u_hi = 1.0 / r_min;
    let u_lo = 1.0 / r_max;
    let mut u: Vec<f64> = (0..user_count)
        .map(|i| u_hi - (u_hi - u_lo) * i as f64 / (user_count - 1) as f64)
        .collect();

    let corr_of = |u: &[f64], i: usize| -> Result<f64> {
        adjacent_correlation(geom, theta, phi, 1.0 / u[i], 1.0 / u[i + 1])
    };

    let mut delta = 0.0;
    let mut converged = false;
    for _sweep in 0..100 {
        for i in 1..user_count - 1 {
            // Bisect u_i between its neighbors. The raw correlation is a
            // single oscillating function of the u-gap alone, so its
            // envelope ordering is the gap ordering: balance the gaps and
            // the raw adjacent correlations balance with them. Comparing
            // raw values directly is ill-posed (every envelope level is
            // crossed by many lobes).
            let (mut lo, mut hi) = (u[i + 1], u[i - 1]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                u[i] = mid;
                let left_gap = u[i - 1] - u[i];
                let right_gap = u[i] - u[i + 1];
                // A small left gap means the left pair is too correlated;
                // move u_i away from u_{i-1}.
                if left_gap < right_gap {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if (hi - lo) < 1e-14 * u_hi {
                    break;
                }
            }
        }
        let corrs: Result<Vec<f64>> = (0..user_count - 1).map(|i| corr_of(&u, i)).collect();
        let corrs = corrs?;
        let max = corrs.iter().cloned().fold(f64::MIN, f64::max);
        let min = corrs.iter().cloned().fold(f64::MAX, f64::min);
        delta = max;
        if max - min < 1e-4 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "adjacent-correlation equalization stalled for K={user_count} on [{r_min}, {r_max}]"
        )));
    }

    let gammas = equal_adjacent_gammas(user_count, delta)?;
    let rate_bound = gammas.iter().map(|&gm| (1.0 + tau_of(gm)).log2()).sum();
    Ok(LinearBoundOutcome {
        delta_abs: delta,
        gammas,
        rate_bound,
        radii: u.iter().map(|&x| 1.0 / x).collect(),
    })
}
