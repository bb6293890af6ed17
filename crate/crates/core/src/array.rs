//! Array geometry plus steering and focusing vector synthesis.
//!
//! Conventions: the planar array lives in the yz-plane. For a UPA the first
//! index n1 runs along the z-axis and pairs with cos(theta), the second
//! index n2 runs along the y-axis and pairs with sin(theta) sin(phi). A ULA
//! is the n2-only special case (theta = pi/2). Element indices are symmetric
//! about the array center, which keeps the quadratic phase algebra valid for
//! even element counts (half-integer indices) as well as odd ones.
//!
//! Steering vectors carry the angle-only linear phase of a planar wavefront.
//! Focusing vectors carry the spherical-wavefront phase, retained to second
//! order in (element offset / distance); exact-distance variants without the
//! Taylor step are provided as in-repo oracles for every approximation.

use crate::error::{Error, Result};
use crate::linalg::CVec;
use num_complex::Complex64;
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Ula,
    Upa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub layout: Layout,
    /// Element count along the z-axis for a UPA; the full count for a ULA.
    pub n1: usize,
    /// Element count along the y-axis for a UPA; 1 for a ULA.
    pub n2: usize,
    /// Element spacing in meters.
    pub spacing_d: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
}

impl ArrayGeometry {
    /// Half-wavelength spaced ULA.
    pub fn ula(n: usize, wavelength: f64) -> Result<Self> {
        Self::new(Layout::Ula, n, 1, wavelength / 2.0, wavelength)
    }

    /// Half-wavelength spaced UPA with n1 elements on z and n2 on y.
    pub fn upa(n1: usize, n2: usize, wavelength: f64) -> Result<Self> {
        Self::new(Layout::Upa, n1, n2, wavelength / 2.0, wavelength)
    }

    pub fn new(
        layout: Layout,
        n1: usize,
        n2: usize,
        spacing_d: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if n1 * n2 == 0 {
            return Err(Error::Config("antenna counts must be >= 1".into()));
        }
        if layout == Layout::Ula && n2 != 1 {
            return Err(Error::Config("a ULA has n2 = 1".into()));
        }
        if !(spacing_d > 0.0) || !(wavelength > 0.0) {
            return Err(Error::Config(
                "spacing and wavelength must be positive".into(),
            ));
        }
        Ok(ArrayGeometry {
            layout,
            n1,
            n2,
            spacing_d,
            wavelength,
        })
    }

    pub fn total_elements(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Aperture: diagonal extent of the array.
    pub fn aperture(&self) -> f64 {
        let d1 = (self.n1 as f64 - 1.0) * self.spacing_d;
        match self.layout {
            Layout::Ula => d1,
            Layout::Upa => {
                let d2 = (self.n2 as f64 - 1.0) * self.spacing_d;
                (d1 * d1 + d2 * d2).sqrt()
            }
        }
    }

    /// Far-field boundary 2 D^2 / lambda.
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture();
        2.0 * d * d / self.wavelength
    }

    /// Validity boundary of the second-order phase expansion,
    /// (D/2) (D/lambda)^(1/3).
    pub fn fresnel_boundary(&self) -> f64 {
        let d = self.aperture();
        0.5 * d * (d / self.wavelength).cbrt()
    }
}

/// Spherical coordinate of a user or scatterer relative to the array center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Location {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Config(format!("distance must be positive, got {r}")));
        }
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::Config(format!(
                "elevation must lie in (0, pi), got {theta}"
            )));
        }
        if !(phi > -PI / 2.0 && phi < PI / 2.0) {
            return Err(Error::Config(format!(
                "azimuth must lie in (-pi/2, pi/2), got {phi}"
            )));
        }
        Ok(Location { r, theta, phi })
    }

    /// Broadside-elevation location for ULA scenarios.
    pub fn polar(r: f64, phi: f64) -> Result<Self> {
        Self::new(r, PI / 2.0, phi)
    }
}

/// Element offsets {m - (count-1)/2}, symmetric about zero. Half-integers
/// for even counts.
pub fn symmetric_indices(count: usize) -> Vec<f64> {
    let off = (count as f64 - 1.0) / 2.0;
    (0..count).map(|m| m as f64 - off).collect()
}

fn require_layout(geom: &ArrayGeometry, want: Layout, what: &str) -> Result<()> {
    if geom.layout != want {
        return Err(Error::Config(format!(
            "{what} requires a {:?} layout, geometry is {:?}",
            want, geom.layout
        )));
    }
    Ok(())
}

/// ULA steering vector: entry n is e^{j k n d sin(phi)} / sqrt(N).
pub fn ula_steering(geom: &ArrayGeometry, phi: f64) -> Result<CVec> {
    require_layout(geom, Layout::Ula, "ula_steering")?;
    let n = geom.n1;
    let scale = 1.0 / (n as f64).sqrt();
    let step = geom.wavenumber() * geom.spacing_d * phi.sin();
    Ok(symmetric_indices(n)
        .into_iter()
        .map(|idx| Complex64::from_polar(scale, idx * step))
        .collect())
}

/// The two ULA factors whose Kronecker product is the UPA steering vector:
/// z-axis factor over n1 with cos(theta), y-axis factor over n2 with
/// sin(theta) sin(phi). Each factor has unit-magnitude entries.
pub fn upa_steering_factors(geom: &ArrayGeometry, theta: f64, phi: f64) -> (CVec, CVec) {
    let kd = geom.wavenumber() * geom.spacing_d;
    let step1 = kd * theta.cos();
    let step2 = kd * theta.sin() * phi.sin();
    let f1 = symmetric_indices(geom.n1)
        .into_iter()
        .map(|i| Complex64::from_polar(1.0, i * step1))
        .collect();
    let f2 = symmetric_indices(geom.n2)
        .into_iter()
        .map(|i| Complex64::from_polar(1.0, i * step2))
        .collect();
    (f1, f2)
}

fn kron_scaled(f1: &[Complex64], f2: &[Complex64], scale: f64) -> CVec {
    let mut out = Vec::with_capacity(f1.len() * f2.len());
    for a in f1 {
        let a = a * scale;
        for b in f2 {
            out.push(a * b);
        }
    }
    out
}

/// UPA steering vector: entry (n1, n2) has phase
/// k d (n1 cos(theta) + n2 sin(theta) sin(phi)), laid out n1-major.
pub fn upa_steering(geom: &ArrayGeometry, theta: f64, phi: f64) -> Result<CVec> {
    require_layout(geom, Layout::Upa, "upa_steering")?;
    let (f1, f2) = upa_steering_factors(geom, theta, phi);
    let scale = 1.0 / (geom.total_elements() as f64).sqrt();
    Ok(kron_scaled(&f1, &f2, scale))
}

/// ULA focusing vector with the second-order phase expansion:
/// entry n is e^{-j k psi(n)} / sqrt(N) with
/// psi(n) = -n d sin(phi) + n^2 d^2 cos^2(phi) / (2 r).
pub fn ula_focusing(geom: &ArrayGeometry, loc: &Location) -> Result<CVec> {
    require_layout(geom, Layout::Ula, "ula_focusing")?;
    if !(loc.r > 0.0) {
        return Err(Error::Config("focus distance must be positive".into()));
    }
    let n = geom.n1;
    let scale = 1.0 / (n as f64).sqrt();
    let k = geom.wavenumber();
    let d = geom.spacing_d;
    let sin_phi = loc.phi.sin();
    let cos2 = loc.phi.cos().powi(2);
    Ok(symmetric_indices(n)
        .into_iter()
        .map(|i| {
            let psi = -i * d * sin_phi + i * i * d * d * cos2 / (2.0 * loc.r);
            Complex64::from_polar(scale, -k * psi)
        })
        .collect())
}

/// ULA focusing vector from the exact element distances (no Taylor step).
///
/// The per-element distance difference is evaluated as
/// (r_n^2 - r^2) / (r_n + r), which stays accurate when r dwarfs the
/// aperture.
pub fn ula_focusing_exact(geom: &ArrayGeometry, loc: &Location) -> Result<CVec> {
    require_layout(geom, Layout::Ula, "ula_focusing_exact")?;
    if !(loc.r > 0.0) {
        return Err(Error::Config("focus distance must be positive".into()));
    }
    let n = geom.n1;
    let scale = 1.0 / (n as f64).sqrt();
    let k = geom.wavenumber();
    let d = geom.spacing_d;
    let sin_phi = loc.phi.sin();
    Ok(symmetric_indices(n)
        .into_iter()
        .map(|i| {
            // r_n^2 = r^2 - 2 n d r sin(phi) + n^2 d^2
            let delta_sq = -2.0 * i * d * loc.r * sin_phi + i * i * d * d;
            let rn = (loc.r * loc.r + delta_sq).sqrt();
            let diff = delta_sq / (rn + loc.r);
            Complex64::from_polar(scale, -k * diff)
        })
        .collect())
}

/// The two separable factors of the bilinear-free UPA focusing phase at a
/// given focus point. Their Kronecker product (scaled by 1/sqrt(N)) is the
/// codebook form of the focusing vector.
pub fn upa_focusing_factors(geom: &ArrayGeometry, loc: &Location) -> (CVec, CVec) {
    let k = geom.wavenumber();
    let d = geom.spacing_d;
    let cos_t = loc.theta.cos();
    let sin_t_sin_p = loc.theta.sin() * loc.phi.sin();
    let curv1 = (1.0 - cos_t * cos_t) / (2.0 * loc.r);
    let curv2 = (1.0 - sin_t_sin_p * sin_t_sin_p) / (2.0 * loc.r);
    let f1 = symmetric_indices(geom.n1)
        .into_iter()
        .map(|i| {
            let psi = -i * d * cos_t + i * i * d * d * curv1;
            Complex64::from_polar(1.0, -k * psi)
        })
        .collect();
    let f2 = symmetric_indices(geom.n2)
        .into_iter()
        .map(|i| {
            let psi = -i * d * sin_t_sin_p + i * i * d * d * curv2;
            Complex64::from_polar(1.0, -k * psi)
        })
        .collect();
    (f1, f2)
}

/// UPA focusing vector from the second-order phase expansion.
///
/// With `drop_bilinear` the n1*n2 cross term is omitted, which makes the
/// phase separable across the two axes (the codebook construction relies on
/// this); otherwise the full expansion is used.
pub fn upa_focusing(geom: &ArrayGeometry, loc: &Location, drop_bilinear: bool) -> Result<CVec> {
    require_layout(geom, Layout::Upa, "upa_focusing")?;
    if !(loc.r > 0.0) {
        return Err(Error::Config("focus distance must be positive".into()));
    }
    let scale = 1.0 / (geom.total_elements() as f64).sqrt();
    if drop_bilinear {
        let (f1, f2) = upa_focusing_factors(geom, loc);
        return Ok(kron_scaled(&f1, &f2, scale));
    }
    let k = geom.wavenumber();
    let d = geom.spacing_d;
    let cos_t = loc.theta.cos();
    let sin_t_sin_p = loc.theta.sin() * loc.phi.sin();
    let curv1 = (1.0 - cos_t * cos_t) / (2.0 * loc.r);
    let curv2 = (1.0 - sin_t_sin_p * sin_t_sin_p) / (2.0 * loc.r);
    let cross = cos_t * loc.theta.sin() * loc.phi.sin() / loc.r;
    let idx1 = symmetric_indices(geom.n1);
    let idx2 = symmetric_indices(geom.n2);
    let mut out = Vec::with_capacity(geom.total_elements());
    for &i1 in &idx1 {
        for &i2 in &idx2 {
            let psi = -i1 * d * cos_t - i2 * d * sin_t_sin_p
                + i1 * i1 * d * d * curv1
                + i2 * i2 * d * d * curv2
                - i1 * i2 * d * d * cross;
            out.push(Complex64::from_polar(scale, -k * psi));
        }
    }
    Ok(out)
}

/// UPA focusing vector from exact element distances (oracle variant).
pub fn upa_focusing_exact(geom: &ArrayGeometry, loc: &Location) -> Result<CVec> {
    require_layout(geom, Layout::Upa, "upa_focusing_exact")?;
    if !(loc.r > 0.0) {
        return Err(Error::Config("focus distance must be positive".into()));
    }
    let scale = 1.0 / (geom.total_elements() as f64).sqrt();
    let k = geom.wavenumber();
    let d = geom.spacing_d;
    let cos_t = loc.theta.cos();
    let sin_t_sin_p = loc.theta.sin() * loc.phi.sin();
    let idx1 = symmetric_indices(geom.n1);
    let idx2 = symmetric_indices(geom.n2);
    let mut out = Vec::with_capacity(geom.total_elements());
    for &i1 in &idx1 {
        for &i2 in &idx2 {
            // r_{n1,n2}^2 = r^2 - 2 r d (n1 cos t + n2 sin t sin p) + (n1^2 + n2^2) d^2
            let delta_sq = -2.0 * loc.r * d * (i1 * cos_t + i2 * sin_t_sin_p)
                + (i1 * i1 + i2 * i2) * d * d;
            let rn = (loc.r * loc.r + delta_sq).sqrt();
            let diff = delta_sq / (rn + loc.r);
            out.push(Complex64::from_polar(scale, -k * diff));
        }
    }
    Ok(out)
}
