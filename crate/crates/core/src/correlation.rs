//! Beam correlation analysis: exact inner products, their Fresnel-integral
//! closed forms, and the finite-sweep trends that certify asymptotic
//! orthogonality numerically.
//!
//! Two focusing vectors aimed at the same angle but different distances
//! correlate like |G(beta)| where G(beta) = (C(beta) + j S(beta)) / beta and
//! beta collects geometry and the inverse-distance gap |1/r_l - 1/r_m|. The
//! kernel decays like 1/beta, so the correlation vanishes as the array
//! grows; the sweep helpers below evaluate the exact sums so that decay can
//! be asserted rather than assumed.

use crate::array::{
    ula_focusing, upa_focusing, ArrayGeometry, Layout, Location,
};
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::special::{fresnel_c, fresnel_s, sine_integral_ratio};

/// |v1^H v2| for unit-norm vectors of equal length.
pub fn exact_correlation(v1: &[num_complex::Complex64], v2: &[num_complex::Complex64]) -> Result<f64> {
    if v1.len() != v2.len() {
        return Err(Error::Domain(format!(
            "correlation needs equal lengths, got {} and {}",
            v1.len(),
            v2.len()
        )));
    }
    Ok(inner(v1, v2).norm())
}

/// |G(beta)| = |C(beta) + j S(beta)| / beta, with the removable singularity
/// at beta = 0 filled by series: |G| = 1 - pi^2 beta^4 / 90 + O(beta^8).
pub fn fresnel_ratio_mag(beta: f64) -> f64 {
    let b = beta.abs();
    if b < 1e-4 {
        return 1.0 - (std::f64::consts::PI * std::f64::consts::PI) * b.powi(4) / 90.0;
    }
    let c = fresnel_c(b).expect("finite beta");
    let s = fresnel_s(b).expect("finite beta");
    (c * c + s * s).sqrt() / b
}

/// The beta argument of the distance-correlation kernel for a ULA:
/// beta = N sqrt(d^2 cos^2(phi) / (2 lambda) * |1/r_l - 1/r_m|).
pub fn ula_distance_beta(geom: &ArrayGeometry, r_l: f64, r_m: f64, phi: f64) -> f64 {
    let du = (1.0 / r_l - 1.0 / r_m).abs();
    let d = geom.spacing_d;
    geom.n1 as f64 * (d * d * phi.cos().powi(2) / (2.0 * geom.wavelength) * du).sqrt()
}

/// Closed-form correlation of two same-angle ULA focusing vectors.
pub fn ula_distance_correlation_approx(
    geom: &ArrayGeometry,
    r_l: f64,
    r_m: f64,
    phi: f64,
) -> Result<f64> {
    if !(r_l > 0.0 && r_m > 0.0) {
        return Err(Error::Domain("distances must be positive".into()));
    }
    Ok(fresnel_ratio_mag(ula_distance_beta(geom, r_l, r_m, phi)))
}

/// Exact correlations of two ULA focusing vectors across an antenna-count
/// sweep (spacing and wavelength held fixed), for convergence certification.
pub fn ula_correlation_trend(
    geom: &ArrayGeometry,
    loc1: &Location,
    loc2: &Location,
    n_sweep: &[usize],
) -> Result<Vec<f64>> {
    n_sweep
        .iter()
        .map(|&n| {
            let g = ArrayGeometry::new(Layout::Ula, n, 1, geom.spacing_d, geom.wavelength)?;
            let v1 = ula_focusing(&g, loc1)?;
            let v2 = ula_focusing(&g, loc2)?;
            exact_correlation(&v1, &v2)
        })
        .collect()
}

/// Exact correlations of two same-angle UPA focusing vectors (full phase,
/// bilinear term included) as the z-axis element count grows.
pub fn upa_distance_correlation_trend(
    geom: &ArrayGeometry,
    n1_sweep: &[usize],
    r_l: f64,
    r_m: f64,
    theta: f64,
    phi: f64,
) -> Result<Vec<f64>> {
    n1_sweep
        .iter()
        .map(|&n1| {
            let g = ArrayGeometry::new(Layout::Upa, n1, geom.n2, geom.spacing_d, geom.wavelength)?;
            let v1 = upa_focusing(&g, &Location::new(r_l, theta, phi)?, false)?;
            let v2 = upa_focusing(&g, &Location::new(r_m, theta, phi)?, false)?;
            exact_correlation(&v1, &v2)
        })
        .collect()
}

/// Gain retained when the bilinear n1*n2 phase term is dropped from a UPA
/// focusing vector: |Si(eta)/eta| with
/// eta = N1 N2 k d^2 cos(theta) sin(theta) sin(phi) / (4 r).
pub fn bilinear_drop_gain(geom: &ArrayGeometry, loc: &Location) -> Result<f64> {
    if geom.layout != Layout::Upa {
        return Err(Error::Config("bilinear term exists only for UPA layouts".into()));
    }
    let eta = bilinear_eta(geom, loc);
    Ok(sine_integral_ratio(eta)?.abs())
}

pub fn bilinear_eta(geom: &ArrayGeometry, loc: &Location) -> f64 {
    let n = geom.total_elements() as f64;
    let d = geom.spacing_d;
    n * geom.wavenumber() * d * d * loc.theta.cos() * loc.theta.sin() * loc.phi.sin()
        / (4.0 * loc.r)
}

/// The two kernel arguments of the separable UPA distance correlation:
/// beta_i = N_i beta0 s_i with beta0 = sqrt(d^2 / (2 lambda) |1/r_l - 1/r_m|),
/// s_1 = sqrt(1 - cos^2 theta), s_2 = sqrt(1 - sin^2 theta sin^2 phi).
pub fn upa_beta_pair(geom: &ArrayGeometry, r_l: f64, r_m: f64, theta: f64, phi: f64) -> (f64, f64) {
    let du = (1.0 / r_l - 1.0 / r_m).abs();
    let d = geom.spacing_d;
    let beta0 = (d * d / (2.0 * geom.wavelength) * du).sqrt();
    let s1 = (1.0 - theta.cos().powi(2)).max(0.0).sqrt();
    let s2 = (1.0 - (theta.sin() * phi.sin()).powi(2)).max(0.0).sqrt();
    (geom.n1 as f64 * beta0 * s1, geom.n2 as f64 * beta0 * s2)
}

/// Closed-form correlation of two same-direction bilinear-free UPA focusing
/// vectors: |G(beta_1) G(beta_2)|.
pub fn upa_distance_correlation_approx(
    geom: &ArrayGeometry,
    r_l: f64,
    r_m: f64,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    if !(r_l > 0.0 && r_m > 0.0) {
        return Err(Error::Domain("distances must be positive".into()));
    }
    let (b1, b2) = upa_beta_pair(geom, r_l, r_m, theta, phi);
    Ok(fresnel_ratio_mag(b1) * fresnel_ratio_mag(b2))
}

/// Product kernel |Gbar(beta0)| = |G(N1 beta0 s1)| |G(N2 beta0 s2)| at the
/// given angle, as a function of the normalized inverse-distance gap beta0.
pub fn upa_gbar_mag(geom: &ArrayGeometry, theta: f64, phi: f64, beta0: f64) -> f64 {
    let s1 = (1.0 - theta.cos().powi(2)).max(0.0).sqrt();
    let s2 = (1.0 - (theta.sin() * phi.sin()).powi(2)).max(0.0).sqrt();
    fresnel_ratio_mag(geom.n1 as f64 * beta0 * s1) * fresnel_ratio_mag(geom.n2 as f64 * beta0 * s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ula_steering;
    use crate::special::dirichlet_sinc;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.01;

    #[test]
    fn self_and_orthogonal_cases() {
        let g = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let v = ula_steering(&g, 0.22).unwrap();
        assert!((exact_correlation(&v, &v).unwrap() - 1.0).abs() < 1e-12);

        // Adjacent DFT-grid beams: sin(phi) spaced by 2/N nulls the kernel.
        let p1 = (3.0f64 / 64.0).asin();
        let p2 = (5.0f64 / 64.0).asin();
        let a = ula_steering(&g, p1).unwrap();
        let b = ula_steering(&g, p2).unwrap();
        assert!(exact_correlation(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let g8 = ArrayGeometry::ula(8, LAMBDA).unwrap();
        let g16 = ArrayGeometry::ula(16, LAMBDA).unwrap();
        let a = ula_steering(&g8, 0.1).unwrap();
        let b = ula_steering(&g16, 0.1).unwrap();
        assert!(exact_correlation(&a, &b).is_err());
    }

    #[test]
    fn steering_pair_matches_dirichlet() {
        let g = ArrayGeometry::ula(128, LAMBDA).unwrap();
        let (p1, p2) = (0.17, 0.41);
        let a = ula_steering(&g, p1).unwrap();
        let b = ula_steering(&g, p2).unwrap();
        let alpha = g.wavenumber() * g.spacing_d * (p2.sin() - p1.sin());
        let want = dirichlet_sinc(128, alpha).unwrap().abs();
        assert!((exact_correlation(&a, &b).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn invariance_to_global_phase_and_symmetry() {
        let g = ArrayGeometry::ula(32, LAMBDA).unwrap();
        let a = ula_focusing(&g, &Location::polar(9.0, 0.2).unwrap()).unwrap();
        let b = ula_focusing(&g, &Location::polar(25.0, 0.2).unwrap()).unwrap();
        let rotated: Vec<_> = a
            .iter()
            .map(|z| z * num_complex::Complex64::from_polar(1.0, 1.234))
            .collect();
        let c1 = exact_correlation(&a, &b).unwrap();
        let c2 = exact_correlation(&rotated, &b).unwrap();
        let c3 = exact_correlation(&b, &a).unwrap();
        assert!((c1 - c2).abs() < 1e-12);
        assert!((c1 - c3).abs() < 1e-12);
    }

    #[test]
    fn fresnel_kernel_approximates_exact_ula_correlation() {
        let g = ArrayGeometry::ula(512, LAMBDA).unwrap();
        let phi = PI / 6.0;
        let v1 = ula_focusing(&g, &Location::polar(5.0, phi).unwrap()).unwrap();
        let v2 = ula_focusing(&g, &Location::polar(15.0, phi).unwrap()).unwrap();
        let exact = exact_correlation(&v1, &v2).unwrap();
        let approx = ula_distance_correlation_approx(&g, 5.0, 15.0, phi).unwrap();
        assert!((exact - approx).abs() < 0.05, "exact {exact} approx {approx}");
    }

    #[test]
    fn equal_radii_give_unit_kernel() {
        let g = ArrayGeometry::ula(512, LAMBDA).unwrap();
        assert_eq!(ula_distance_correlation_approx(&g, 7.0, 7.0, 0.3).unwrap(), 1.0);
        let gu = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        assert_eq!(
            upa_distance_correlation_approx(&gu, 7.0, 7.0, 1.0, 0.2).unwrap(),
            1.0
        );
    }

    #[test]
    fn kernel_vanishes_for_huge_arrays() {
        let g = ArrayGeometry::ula(16384, LAMBDA).unwrap();
        let v = ula_distance_correlation_approx(&g, 5.0, 15.0, PI / 6.0).unwrap();
        assert!(v < 0.05, "kernel {v}");
    }

    #[test]
    fn ula_trend_decays() {
        let g = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let l1 = Location::polar(5.0, PI / 6.0).unwrap();
        let l2 = Location::polar(15.0, PI / 6.0).unwrap();
        let sweep = [64usize, 128, 256, 512, 1024, 2048, 4096];
        let trend = ula_correlation_trend(&g, &l1, &l2, &sweep).unwrap();
        assert!(trend.last().unwrap() < &0.25);
        assert!(trend.last().unwrap() < &trend[0]);

        let same = ula_correlation_trend(&g, &l1, &l1, &sweep).unwrap();
        for v in same {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ula_angular_trend_decays() {
        let g = ArrayGeometry::ula(64, LAMBDA).unwrap();
        let l1 = Location::polar(10.0, 0.0).unwrap();
        let l2 = Location::polar(10.0, PI / 7.0).unwrap();
        let trend = ula_correlation_trend(&g, &l1, &l2, &[2048]).unwrap();
        assert!(trend[0] < 0.1, "angular correlation {}", trend[0]);
    }

    #[test]
    fn upa_trend_decays_and_is_symmetric() {
        let g = ArrayGeometry::upa(64, 16, LAMBDA).unwrap();
        let sweep = [64usize, 128, 256, 512];
        let t1 = upa_distance_correlation_trend(&g, &sweep, 5.0, 15.0, PI / 3.0, PI / 6.0).unwrap();
        assert!(t1.last().unwrap() < &0.3);
        assert!(t1.last().unwrap() < &t1[0]);

        let t2 = upa_distance_correlation_trend(&g, &sweep, 15.0, 5.0, PI / 3.0, PI / 6.0).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            assert!((a - b).abs() < 1e-12);
        }

        let same = upa_distance_correlation_trend(&g, &sweep, 5.0, 5.0, PI / 3.0, PI / 6.0).unwrap();
        for v in same {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_gain_is_one_at_zero_azimuth() {
        let g = ArrayGeometry::upa(256, 16, LAMBDA).unwrap();
        let loc = Location::new(10.0, PI / 3.0, 0.0).unwrap();
        assert_eq!(bilinear_drop_gain(&g, &loc).unwrap(), 1.0);
    }

    #[test]
    fn bilinear_gain_tracks_exact_correlation() {
        let g = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        let mut state = 0x51c3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..25 {
            let r = 5.0 + 45.0 * next();
            let theta = 0.7 + 1.7 * next();
            let phi = -1.2 + 2.4 * next();
            let loc = Location::new(r, theta, phi).unwrap();
            let full = upa_focusing(&g, &loc, false).unwrap();
            let dropped = upa_focusing(&g, &loc, true).unwrap();
            let exact = exact_correlation(&full, &dropped).unwrap();
            let gain = bilinear_drop_gain(&g, &loc).unwrap();
            assert!(
                (exact - gain).abs() < 0.02,
                "trial {trial} (r={r:.2} theta={theta:.2} phi={phi:.2}): \
                 exact {exact} vs Si kernel {gain}"
            );
        }
    }

    #[test]
    fn upa_separable_kernel_tracks_exact_correlation() {
        let g = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        let (theta, phi) = (PI / 3.0, PI / 6.0);
        let cases = [(5.0, 9.0), (6.0, 20.0), (4.5, 7.0)];
        for &(r1, r2) in &cases {
            let v1 = upa_focusing(&g, &Location::new(r1, theta, phi).unwrap(), true).unwrap();
            let v2 = upa_focusing(&g, &Location::new(r2, theta, phi).unwrap(), true).unwrap();
            let exact = exact_correlation(&v1, &v2).unwrap();
            let approx = upa_distance_correlation_approx(&g, r1, r2, theta, phi).unwrap();
            assert!(
                (exact - approx).abs() < 0.05,
                "r=({r1},{r2}): exact {exact} vs kernel {approx}"
            );
        }
    }

    #[test]
    fn closed_forms_track_exact_on_random_instances() {
        // Randomized agreement check across the validity region.
        let mut state = 0xfeed_5eedu64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let g = ArrayGeometry::ula(256, LAMBDA).unwrap();
        let mut ula_hits = 0;
        let mut upa_hits = 0;
        let total = 200;
        let gu = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        for _ in 0..total {
            let r1 = 4.0 + 60.0 * next();
            let r2 = 4.0 + 60.0 * next();
            let phi = -1.0 + 2.0 * next();
            let v1 = ula_focusing(&g, &Location::polar(r1, phi).unwrap()).unwrap();
            let v2 = ula_focusing(&g, &Location::polar(r2, phi).unwrap()).unwrap();
            let exact = exact_correlation(&v1, &v2).unwrap();
            let approx = ula_distance_correlation_approx(&g, r1, r2, phi).unwrap();
            if (exact - approx).abs() <= 0.05 {
                ula_hits += 1;
            }

            let theta = 1.0 + 1.0 * next();
            let phiu = -0.5 + 1.0 * next();
            let u1 = upa_focusing(&gu, &Location::new(r1, theta, phiu).unwrap(), true).unwrap();
            let u2 = upa_focusing(&gu, &Location::new(r2, theta, phiu).unwrap(), true).unwrap();
            let exact = exact_correlation(&u1, &u2).unwrap();
            let approx = upa_distance_correlation_approx(&gu, r1, r2, theta, phiu).unwrap();
            if (exact - approx).abs() <= 0.05 {
                upa_hits += 1;
            }
        }
        assert!(ula_hits * 100 >= 95 * total, "ULA kernel hits {ula_hits}/{total}");
        assert!(upa_hits * 100 >= 95 * total, "UPA kernel hits {upa_hits}/{total}");
    }
}
