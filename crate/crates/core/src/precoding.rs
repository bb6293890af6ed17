//! The hybrid precoding pipeline: beam sweeping against a codebook, the
//! effective channel seen through the analog stage, and the digital stage
//! (zero-forcing or WMMSE), plus the fully-digital ZF baseline.
//!
//! Multiple-access schemes differ in exactly one input: the codebook handed
//! to [`beam_sweep_assign`] (angle-only DFT for SDMA, angle-plus-distance
//! rings for LDMA). Everything downstream of the analog precoder is scheme
//! agnostic.

use crate::channel::{path_response, ChannelRealization};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, CMat, CVec, Lu};
use crate::rng::SeededStream;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderKind {
    HybridZf,
    HybridWmmse,
    FullyDigitalZf,
}

#[derive(Debug, Clone)]
pub struct PrecodingSolution {
    /// Analog stage, N x K constant-modulus columns. None for fully-digital.
    pub analog: Option<CMat>,
    /// Digital stage: K x K for hybrid schemes, N x K for fully-digital.
    pub digital: CMat,
    /// Per-user normalization applied to the digital columns (the power
    /// diagonal for ZF).
    pub power_scale: Vec<f64>,
    pub kind: PrecoderKind,
}

impl PrecodingSolution {
    pub fn user_count(&self) -> usize {
        self.digital.cols
    }

    /// The N x K matrix whose column k carries user k's signal:
    /// F_A F_D for hybrids, F_D itself for fully-digital.
    pub fn effective_columns(&self) -> CMat {
        match &self.analog {
            Some(fa) => fa.mul(&self.digital),
            None => self.digital.clone(),
        }
    }
}

/// Pick one distinct codeword per user, each maximizing |w^H h_k|.
///
/// Contested codewords go to the user with the higher gain; losers move on
/// to their next-best unused codeword. Returns flat codeword indices in the
/// codebook's enumeration order.
pub fn beam_sweep_assign(
    channels: &[ChannelRealization],
    cb: &Codebook,
) -> Result<Vec<usize>> {
    let k_users = channels.len();
    let m = cb.len();
    if k_users > m {
        return Err(Error::Config(format!(
            "{k_users} users cannot get distinct codewords from a {m}-entry codebook"
        )));
    }
    // Gain table: generate each codeword once, dot against every user.
    let mut gains = vec![vec![0.0f64; m]; k_users];
    for (mi, cw) in cb.codewords().enumerate() {
        let w = cw.vector(&cb.geom)?;
        for (ki, ch) in channels.iter().enumerate() {
            gains[ki][mi] = inner(&w, &ch.vector).norm();
        }
    }

    let mut assigned: Vec<Option<usize>> = vec![None; k_users];
    let mut used = vec![false; m];
    loop {
        // Every still-unassigned user proposes its best unused codeword.
        let mut proposals: Vec<(usize, usize, f64)> = Vec::new();
        for ki in 0..k_users {
            if assigned[ki].is_some() {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for mi in 0..m {
                if used[mi] {
                    continue;
                }
                let g = gains[ki][mi];
                if best.map_or(true, |(_, bg)| g > bg) {
                    best = Some((mi, g));
                }
            }
            let (mi, g) = best.expect("k_users <= m leaves an unused codeword");
            proposals.push((ki, mi, g));
        }
        if proposals.is_empty() {
            break;
        }
        // Resolve per-codeword: the strongest proposer wins this round.
        proposals.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        for (ki, mi, _) in proposals {
            if assigned[ki].is_none() && !used[mi] {
                assigned[ki] = Some(mi);
                used[mi] = true;
            }
        }
    }
    Ok(assigned.into_iter().map(|a| a.unwrap()).collect())
}

/// Analog precoder from assigned codewords.
pub fn analog_from_codebook(cb: &Codebook, indices: &[usize]) -> Result<CMat> {
    let cols: Result<Vec<CVec>> = indices
        .iter()
        .map(|&i| cb.codeword(i).vector(&cb.geom))
        .collect();
    Ok(CMat::from_columns(&cols?))
}

/// Infinite-codebook analog precoder: each user's column is the exact array
/// response at its line-of-sight location (no quantization).
pub fn analog_from_los(
    geom: &crate::array::ArrayGeometry,
    channels: &[ChannelRealization],
) -> Result<CMat> {
    let cols: Result<Vec<CVec>> = channels
        .iter()
        .map(|ch| path_response(geom, &ch.los().location, ch.model))
        .collect();
    Ok(CMat::from_columns(&cols?))
}

/// Effective channel after the analog stage: row k is
/// (F_A^H h_k + F_A^H n_k)^H, i.e. entry (k, l) = h_k^H f_l + n_k^H f_l.
/// With zero noise variance the stream is untouched.
pub fn effective_channel(
    channels: &[ChannelRealization],
    analog: &CMat,
    noise_variance: f64,
    stream: &mut SeededStream,
) -> CMat {
    let k_users = channels.len();
    let cols = analog.cols;
    let mut h = CMat::zeros(k_users, cols);
    let sigma = noise_variance.sqrt();
    for (ki, ch) in channels.iter().enumerate() {
        let observed: CVec = if noise_variance > 0.0 {
            ch.vector
                .iter()
                .map(|&v| v + sigma * stream.complex_gaussian())
                .collect()
        } else {
            ch.vector.clone()
        };
        for l in 0..cols {
            let col = analog.column(l);
            h[(ki, l)] = inner(&observed, &col);
        }
    }
    h
}

/// Zero-forcing digital stage F_D = Hbar^H (Hbar Hbar^H)^{-1} Lambda with
/// the diagonal Lambda sized so every composite column F_A f_k has unit
/// norm.
pub fn zf_digital(effective: &CMat, analog: &CMat) -> Result<PrecodingSolution> {
    let k = effective.rows;
    let gram = effective.mul(&effective.hermitian_transpose());
    let gram_inv = crate::linalg::invert(&gram, 1e12).map_err(|e| {
        Error::Singular(format!(
            "effective channel Gram not invertible ({e}); users or codewords coincide"
        ))
    })?;
    let base = effective.hermitian_transpose().mul(&gram_inv);
    let mut digital = base.clone();
    let mut power_scale = Vec::with_capacity(k);
    for col in 0..k {
        let composite = analog.mul_vec(&base.column(col));
        let nrm = norm(&composite);
        if nrm == 0.0 {
            return Err(Error::Singular(format!("zero composite column {col}")));
        }
        let lambda = 1.0 / nrm;
        digital.scale_column(col, Complex64::new(lambda, 0.0));
        power_scale.push(lambda);
    }
    Ok(PrecodingSolution {
        analog: Some(analog.clone()),
        digital,
        power_scale,
        kind: PrecoderKind::HybridZf,
    })
}

/// One WMMSE run: the converged solution plus the per-iteration sum-rate
/// trace of the internal (total-power) problem.
pub struct WmmseOutcome {
    pub solution: PrecodingSolution,
    pub objective_trace: Vec<f64>,
}

/// Alternating WMMSE on the K x K effective channel under total power
/// K * per_user_power: MMSE receive scalars, MSE weights, then the
/// regularized transmit-filter update with the multiplier bisected to meet
/// the power budget. The returned precoder is renormalized to the hybrid
/// per-user constraint ||F_A f_k|| = 1; the trace reports the internal
/// objective, which is non-decreasing under exact updates.
pub fn wmmse_digital(
    effective: &CMat,
    analog: &CMat,
    per_user_power: f64,
    noise_variance: f64,
    max_iters: usize,
    tol: f64,
) -> Result<WmmseOutcome> {
    if max_iters < 1 || !(tol > 0.0) {
        return Err(Error::Config("wmmse needs max_iters >= 1 and tol > 0".into()));
    }
    let k = effective.rows;
    let p_total = k as f64 * per_user_power;
    let sigma2 = noise_variance.max(1e-30);

    // a_k = conjugate of row k, as a column: a_k^H v = (Hbar v)_k.
    let a: Vec<CVec> = (0..k)
        .map(|ki| effective.row(ki).iter().map(|z| z.conj()).collect())
        .collect();

    // Start from ZF directions when they exist (the high-SNR fixed point),
    // otherwise matched filtering.
    let mut v: Vec<CVec> = match zf_digital(effective, analog) {
        Ok(sol) => (0..k).map(|ki| sol.digital.column(ki)).collect(),
        Err(_) => a.clone(),
    };
    let scale = (p_total / v.iter().map(|c| norm(c).powi(2)).sum::<f64>()).sqrt();
    for col in v.iter_mut() {
        for z in col.iter_mut() {
            *z *= scale;
        }
    }

    let sum_rate = |v: &[CVec]| -> f64 {
        let mut rate = 0.0;
        for ki in 0..k {
            let mut sig = 0.0;
            let mut tot = 0.0;
            for (li, vl) in v.iter().enumerate() {
                let t = inner(&a[ki], vl).norm_sqr();
                tot += t;
                if li == ki {
                    sig = t;
                }
            }
            rate += (1.0 + sig / (sigma2 + (tot - sig)).max(1e-300)).log2();
        }
        rate
    };

    let mut trace = vec![sum_rate(&v)];
    let mut best_v = v.clone();
    let mut best_rate = trace[0];

    for _ in 0..max_iters {
        // Receive scalars and MSE weights.
        let mut u = vec![Complex64::new(0.0, 0.0); k];
        let mut w = vec![0.0f64; k];
        for ki in 0..k {
            let mut tot = sigma2;
            let mut tkk = Complex64::new(0.0, 0.0);
            for (li, vl) in v.iter().enumerate() {
                let t = inner(&a[ki], vl);
                tot += t.norm_sqr();
                if li == ki {
                    tkk = t;
                }
            }
            u[ki] = tkk / tot;
            let e = (1.0 - (u[ki].conj() * tkk).re).max(1e-18);
            w[ki] = (1.0 / e).min(1e16);
        }

        // A = sum_k w_k |u_k|^2 a_k a_k^H.
        let mut base = CMat::zeros(k, k);
        for ki in 0..k {
            let c = w[ki] * u[ki].norm_sqr();
            for i in 0..k {
                for j in 0..k {
                    base[(i, j)] += c * a[ki][i] * a[ki][j].conj();
                }
            }
        }

        let solve_all = |mu: f64| -> Option<(Vec<CVec>, f64)> {
            let mut m = base.clone();
            for i in 0..k {
                m[(i, i)] += Complex64::new(mu, 0.0);
            }
            let lu = Lu::factor(&m).ok()?;
            let mut cols = Vec::with_capacity(k);
            let mut power = 0.0;
            for li in 0..k {
                let rhs: CVec = a[li].iter().map(|&z| w[li] * u[li] * z).collect();
                let col = lu.solve(&rhs);
                power += col.iter().map(|z| z.norm_sqr()).sum::<f64>();
                cols.push(col);
            }
            power.is_finite().then_some((cols, power))
        };

        // Multiplier for the power budget: 0 if already feasible, else
        // bisected on the (decreasing) power curve.
        let next_v = match solve_all(0.0) {
            Some((cols, power)) if power <= p_total => cols,
            first => {
                let mut lo = 0.0;
                let mut hi = 1e-12;
                let mut hi_cols = loop {
                    match solve_all(hi) {
                        Some((cols, power)) if power <= p_total => break cols,
                        _ => {
                            lo = hi;
                            hi *= 8.0;
                            if hi > 1e30 {
                                return Err(Error::NoConvergence(
                                    "wmmse power multiplier diverged".into(),
                                ));
                            }
                        }
                    }
                };
                let _ = first;
                for _ in 0..90 {
                    let mid = 0.5 * (lo + hi);
                    match solve_all(mid) {
                        Some((cols, power)) if power <= p_total => {
                            hi = mid;
                            hi_cols = cols;
                        }
                        _ => lo = mid,
                    }
                    if hi - lo <= 1e-14 * hi.max(1.0) {
                        break;
                    }
                }
                hi_cols
            }
        };
        v = next_v;

        let r = sum_rate(&v);
        let prev = *trace.last().unwrap();
        trace.push(r);
        if r > best_rate {
            best_rate = r;
            best_v = v.clone();
        }
        if (r - prev).abs() <= tol * r.abs().max(1.0) {
            break;
        }
    }

    // Renormalize the best iterate to the hybrid per-user power constraint.
    let mut digital = CMat::from_columns(&best_v);
    let mut power_scale = Vec::with_capacity(k);
    for col in 0..k {
        let composite = analog.mul_vec(&digital.column(col));
        let nrm = norm(&composite);
        if nrm == 0.0 {
            return Err(Error::Singular(format!("wmmse produced a dead column {col}")));
        }
        digital.scale_column(col, Complex64::new(1.0 / nrm, 0.0));
        power_scale.push(1.0 / nrm);
    }
    Ok(WmmseOutcome {
        solution: PrecodingSolution {
            analog: Some(analog.clone()),
            digital,
            power_scale,
            kind: PrecoderKind::HybridWmmse,
        },
        objective_trace: trace,
    })
}

/// Fully-digital zero forcing on the true N-dimensional channels, columns
/// normalized per user (equal power split happens at rate evaluation).
pub fn fully_digital_zf(channels: &[ChannelRealization]) -> Result<PrecodingSolution> {
    let k = channels.len();
    if k == 0 {
        return Err(Error::Config("no users".into()));
    }
    let n = channels[0].vector.len();
    if k > n {
        return Err(Error::Config(format!(
            "fully-digital ZF needs K <= N, got K={k} N={n}"
        )));
    }
    // H has rows h_k^H; Gram[i][j] = h_i^H h_j.
    let mut gram = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = inner(&channels[i].vector, &channels[j].vector);
        }
    }
    let gram_inv = crate::linalg::invert(&gram, 1e12)
        .map_err(|e| Error::Singular(format!("channel matrix rank-deficient ({e})")))?;
    // F = H^H Gram^{-1}: column k = sum_j h_j * inv[j][k].
    let mut digital = CMat::zeros(n, k);
    for col in 0..k {
        for j in 0..k {
            let c = gram_inv[(j, col)];
            for row in 0..n {
                digital[(row, col)] += channels[j].vector[row] * c;
            }
        }
    }
    let mut power_scale = Vec::with_capacity(k);
    for col in 0..k {
        let nrm = norm(&digital.column(col));
        if nrm == 0.0 {
            return Err(Error::Singular(format!("zero ZF column {col}")));
        }
        digital.scale_column(col, Complex64::new(1.0 / nrm, 0.0));
        power_scale.push(1.0 / nrm);
    }
    Ok(PrecodingSolution {
        analog: None,
        digital,
        power_scale,
        kind: PrecoderKind::FullyDigitalZf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{ula_focusing, ArrayGeometry, Location};
    use crate::channel::{ChannelRealization, PropagationModel};
    use crate::codebook::build_polar_codebook;
    use crate::rng::seeded_stream;

    const LAMBDA: f64 = 0.01;

    fn single_path_channels(
        geom: &ArrayGeometry,
        locs: &[Location],
        gains: &[Complex64],
    ) -> Vec<ChannelRealization> {
        locs.iter()
            .zip(gains)
            .map(|(loc, &g)| {
                ChannelRealization::single_path(geom, loc, g, PropagationModel::NearField)
                    .unwrap()
            })
            .collect()
    }

    fn spread_locations(_geom: &ArrayGeometry, k: usize, seed: u64) -> Vec<Location> {
        let mut s = seeded_stream(seed, 0);
        (0..k)
            .map(|_| {
                Location::polar(s.uniform_in(4.0, 100.0), s.uniform_in(-1.0, 1.0)).unwrap()
            })
            .collect()
    }

    #[test]
    fn sweep_picks_the_matched_codeword() {
        let geom = ArrayGeometry::ula(128, LAMBDA).unwrap();
        let cb = build_polar_codebook(&geom, 0.55, 4.0).unwrap();
        // Put a single-path user exactly on a ring-2 focus point.
        let target = cb
            .codewords()
            .enumerate()
            .find(|(_, c)| c.ring == 2)
            .expect("ladder reaches ring 2");
        let loc = Location::new(target.1.r, target.1.theta, target.1.phi).unwrap();
        let ch = single_path_channels(&geom, &[loc], &[Complex64::new(1.0, 0.0)]);
        let assigned = beam_sweep_assign(&ch, &cb).unwrap();
        assert_eq!(assigned[0], target.0);
    }

    #[test]
    fn sweep_keeps_assignments_distinct() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let cb = build_polar_codebook(&geom, 0.55, 4.0).unwrap();
        let loc = Location::polar(20.0, 0.3).unwrap();
        let chans = single_path_channels(
            &geom,
            &[loc, loc],
            &[Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.1)],
        );
        let assigned = beam_sweep_assign(&chans, &cb).unwrap();
        assert_ne!(assigned[0], assigned[1]);
    }

    #[test]
    fn sweep_rejects_more_users_than_codewords() {
        let geom = ArrayGeometry::ula(4, LAMBDA).unwrap();
        let cb = crate::codebook::build_dft_codebook(&geom).unwrap();
        let locs = spread_locations(&geom, 5, 3);
        let gains = vec![Complex64::new(1.0, 0.0); 5];
        let chans = single_path_channels(&geom, &locs, &gains);
        assert!(beam_sweep_assign(&chans, &cb).is_err());
    }

    #[test]
    fn sweep_total_gain_near_exhaustive_optimum() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let full = build_polar_codebook(&geom, 0.55, 4.0).unwrap();
        // 32-codeword sub-codebook: stride over the full book.
        let stride = full.len() / 32;
        let picks: Vec<usize> = (0..32).map(|i| i * stride).collect();
        let k = 4;
        let locs = spread_locations(&geom, k, 11);
        let gains: Vec<Complex64> = (0..k).map(|i| Complex64::new(1.0 + i as f64 * 0.1, 0.2)).collect();
        let chans = single_path_channels(&geom, &locs, &gains);

        let mut gain_table = vec![vec![0.0f64; picks.len()]; k];
        for (mi, &flat) in picks.iter().enumerate() {
            let w = full.codeword(flat).vector(&geom).unwrap();
            for (ki, ch) in chans.iter().enumerate() {
                gain_table[ki][mi] = inner(&w, &ch.vector).norm();
            }
        }
        // Exhaustive distinct assignment over 32 P 4 options.
        let mut best = 0.0f64;
        for a in 0..32 {
            for b in 0..32 {
                if b == a {
                    continue;
                }
                for c in 0..32 {
                    if c == a || c == b {
                        continue;
                    }
                    for d in 0..32 {
                        if d == a || d == b || d == c {
                            continue;
                        }
                        let total = gain_table[0][a] + gain_table[1][b] + gain_table[2][c]
                            + gain_table[3][d];
                        best = best.max(total);
                    }
                }
            }
        }

        // Greedy on the same sub-codebook.
        let sub_chans = chans;
        let mut assigned = vec![None::<usize>; k];
        let mut used = vec![false; picks.len()];
        loop {
            let mut props: Vec<(usize, usize, f64)> = Vec::new();
            for ki in 0..k {
                if assigned[ki].is_some() {
                    continue;
                }
                let (mi, g) = (0..picks.len())
                    .filter(|&mi| !used[mi])
                    .map(|mi| (mi, gain_table[ki][mi]))
                    .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                    .unwrap();
                props.push((ki, mi, g));
            }
            if props.is_empty() {
                break;
            }
            props.sort_by(|x, y| y.2.partial_cmp(&x.2).unwrap().then(x.0.cmp(&y.0)));
            for (ki, mi, _) in props {
                if assigned[ki].is_none() && !used[mi] {
                    assigned[ki] = Some(mi);
                    used[mi] = true;
                }
            }
        }
        let greedy: f64 = assigned
            .iter()
            .enumerate()
            .map(|(ki, mi)| gain_table[ki][mi.unwrap()])
            .sum();
        assert!(greedy >= 0.95 * best, "greedy {greedy} vs optimum {best}");
        let _ = sub_chans;
    }

    #[test]
    fn effective_channel_is_near_diagonal_for_matched_orthogonal_beams() {
        let geom = ArrayGeometry::ula(256, LAMBDA).unwrap();
        // Users on far-apart DFT angles, far enough to be quasi-far-field.
        let angles = [-0.8f64, 0.0, 0.8];
        let locs: Vec<Location> = angles
            .iter()
            .map(|&a| Location::polar(3000.0, a).unwrap())
            .collect();
        let gains = vec![Complex64::new(1.0, 0.0); 3];
        let chans = single_path_channels(&geom, &locs, &gains);
        let analog = analog_from_los(&geom, &chans).unwrap();
        let mut stream = seeded_stream(0, 0);
        let h = effective_channel(&chans, &analog, 0.0, &mut stream);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(h[(i, j)].norm() < 0.05 * h[(i, i)].norm());
                }
            }
        }
    }

    #[test]
    fn effective_noise_is_deterministic_and_scales_right() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let locs = spread_locations(&geom, 4, 21);
        let gains = vec![Complex64::new(1.0, 0.0); 4];
        let chans = single_path_channels(&geom, &locs, &gains);
        let analog = analog_from_los(&geom, &chans).unwrap();

        let mut s1 = seeded_stream(5, 2);
        let mut s2 = seeded_stream(5, 2);
        let h1 = effective_channel(&chans, &analog, 0.3, &mut s1);
        let h2 = effective_channel(&chans, &analog, 0.3, &mut s2);
        assert_eq!(h1, h2);

        // E ||error||_F^2 = K * K * sigma^2 for unit-norm analog columns.
        let noise_var = 0.5;
        let mut acc = 0.0;
        let draws = 500;
        let mut sn = seeded_stream(5, 3);
        let clean = {
            let mut s0 = seeded_stream(0, 0);
            effective_channel(&chans, &analog, 0.0, &mut s0)
        };
        for _ in 0..draws {
            let noisy = effective_channel(&chans, &analog, noise_var, &mut sn);
            let mut err = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    err += (noisy[(i, j)] - clean[(i, j)]).norm_sqr();
                }
            }
            acc += err;
        }
        let mean = acc / draws as f64;
        let want = 16.0 * noise_var;
        assert!((mean - want).abs() < 0.1 * want, "mean {mean} want {want}");
    }

    #[test]
    fn zf_identity_case() {
        let analog = CMat::identity(3);
        let h = CMat::identity(3);
        let sol = zf_digital(&h, &analog).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((sol.digital[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!(sol.power_scale.iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zf_diagonalizes_and_meets_power_constraint() {
        let geom = ArrayGeometry::ula(128, LAMBDA).unwrap();
        let locs = spread_locations(&geom, 5, 33);
        let gains: Vec<Complex64> = (0..5).map(|i| Complex64::new(1.0, 0.1 * i as f64)).collect();
        let chans = single_path_channels(&geom, &locs, &gains);
        let analog = analog_from_los(&geom, &chans).unwrap();
        let mut s = seeded_stream(0, 0);
        let effective = effective_channel(&chans, &analog, 0.0, &mut s);
        let sol = zf_digital(&effective, &analog).unwrap();

        let product = effective.mul(&sol.digital);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(
                        product[(i, j)].norm() <= 1e-8 * product[(i, i)].norm(),
                        "interference at ({i},{j})"
                    );
                }
            }
        }
        for col in 0..5 {
            let c = sol.effective_columns().column(col);
            assert!((norm(&c) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zf_gain_matches_gram_inverse_closed_form() {
        let geom = ArrayGeometry::ula(128, LAMBDA).unwrap();
        let n = geom.total_elements() as f64;
        let locs = spread_locations(&geom, 4, 44);
        let gains: Vec<Complex64> = [1.0, 0.7, 1.3, 0.9]
            .iter()
            .map(|&g| Complex64::from_polar(g, 0.4 * g))
            .collect();
        let chans = single_path_channels(&geom, &locs, &gains);
        let b_cols: Vec<CVec> = locs.iter().map(|l| ula_focusing(&geom, l).unwrap()).collect();
        let b = CMat::from_columns(&b_cols);
        let analog = b.clone();
        let mut s = seeded_stream(0, 0);
        let effective = effective_channel(&chans, &analog, 0.0, &mut s);
        let sol = zf_digital(&effective, &analog).unwrap();

        let gram_inv = crate::linalg::hermitian_inverse(&b.hermitian_transpose().mul(&b)).unwrap();
        let product = effective.mul(&sol.digital);
        for k in 0..4 {
            let want = (n / gram_inv[(k, k)].re).sqrt() * gains[k].norm();
            let got = product[(k, k)].norm();
            assert!(
                (got - want).abs() < 1e-8 * want.max(1.0),
                "user {k}: gain {got} vs closed form {want}"
            );
        }
    }

    #[test]
    fn zf_rejects_coincident_users() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let loc = Location::polar(20.0, 0.1).unwrap();
        let chans = single_path_channels(
            &geom,
            &[loc, loc],
            &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        );
        let analog = analog_from_los(&geom, &chans).unwrap();
        let mut s = seeded_stream(0, 0);
        let effective = effective_channel(&chans, &analog, 0.0, &mut s);
        assert!(matches!(
            zf_digital(&effective, &analog),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn wmmse_single_user_reaches_scalar_capacity() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let loc = Location::polar(15.0, 0.2).unwrap();
        let chans = single_path_channels(&geom, &[loc], &[Complex64::new(0.9, 0.3)]);
        let analog = analog_from_los(&geom, &chans).unwrap();
        let mut s = seeded_stream(0, 0);
        let effective = effective_channel(&chans, &analog, 0.0, &mut s);
        let (p, sigma2) = (2.0, 0.5);
        let out = wmmse_digital(&effective, &analog, p, sigma2, 100, 1e-9).unwrap();

        let col = out.solution.effective_columns().column(0);
        let gain = inner(&chans[0].vector, &col).norm_sqr();
        let rate = (1.0 + p * gain / sigma2).log2();
        let capacity = (1.0 + p * effective[(0, 0)].norm_sqr() / sigma2).log2();
        assert!((rate - capacity).abs() < 1e-9, "rate {rate} capacity {capacity}");
    }

    #[test]
    fn wmmse_objective_is_monotone() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        for seed in 0..50u64 {
            let locs = spread_locations(&geom, 4, 100 + seed);
            let gains: Vec<Complex64> = (0..4)
                .map(|i| Complex64::from_polar(0.6 + 0.2 * i as f64, i as f64))
                .collect();
            let chans = single_path_channels(&geom, &locs, &gains);
            let analog = analog_from_los(&geom, &chans).unwrap();
            let mut s = seeded_stream(0, 0);
            let effective = effective_channel(&chans, &analog, 0.0, &mut s);
            let out = wmmse_digital(&effective, &analog, 1.0, 0.1, 60, 1e-12).unwrap();
            for w in out.objective_trace.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-9,
                    "seed {seed}: objective dropped {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn wmmse_matches_zf_at_vanishing_noise() {
        let geom = ArrayGeometry::ula(128, LAMBDA).unwrap();
        let locs = spread_locations(&geom, 4, 77);
        let gains = vec![Complex64::new(1.0, 0.0); 4];
        let chans = single_path_channels(&geom, &locs, &gains);
        let analog = analog_from_los(&geom, &chans).unwrap();
        let mut s = seeded_stream(0, 0);
        let effective = effective_channel(&chans, &analog, 0.0, &mut s);
        let sigma2 = 1e-8;
        let p = 1.0;

        let zf = zf_digital(&effective, &analog).unwrap();
        let wm = wmmse_digital(&effective, &analog, p, sigma2, 200, 1e-12)
            .unwrap()
            .solution;

        let rate_of = |sol: &PrecodingSolution| {
            let cols = sol.effective_columns();
            let mut rate = 0.0;
            for k in 0..4 {
                let mut sig = 0.0;
                let mut intf = 0.0;
                for l in 0..4 {
                    let g = inner(&chans[k].vector, &cols.column(l)).norm_sqr();
                    if l == k {
                        sig = g;
                    } else {
                        intf += g;
                    }
                }
                rate += (1.0 + p * sig / (sigma2 + p * intf)).log2();
            }
            rate
        };
        let (rz, rw) = (rate_of(&zf), rate_of(&wm));
        assert!(rw >= rz - 1e-6, "wmmse {rw} vs zf {rz}");
    }

    #[test]
    fn fully_digital_zf_nulls_interference() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let locs = spread_locations(&geom, 3, 55);
        let gains = vec![Complex64::new(1.0, 0.0); 3];
        let chans = single_path_channels(&geom, &locs, &gains);
        let sol = fully_digital_zf(&chans).unwrap();
        let cols = sol.effective_columns();
        for k in 0..3 {
            assert!((norm(&cols.column(k)) - 1.0).abs() < 1e-9);
            for l in 0..3 {
                if l != k {
                    assert!(inner(&chans[k].vector, &cols.column(l)).norm() < 1e-8);
                }
            }
        }

        // Single user: matched filter up to scale.
        let single = fully_digital_zf(&chans[..1].to_vec()).unwrap();
        let f = single.effective_columns().column(0);
        let h = &chans[0].vector;
        let corr = inner(&f, h).norm() / (norm(&f) * norm(h));
        assert!((corr - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fully_digital_zf_rejects_rank_deficiency() {
        let geom = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let loc = Location::polar(30.0, 0.0).unwrap();
        let chans = single_path_channels(
            &geom,
            &[loc, loc],
            &[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)],
        );
        assert!(fully_digital_zf(&chans).is_err());
    }
}
