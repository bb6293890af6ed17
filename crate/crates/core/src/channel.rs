//! Multipath Rician channel generation.
//!
//! A channel is one line-of-sight path plus L non-line-of-sight paths
//! scattered over a configurable region:
//!
//!   h = sqrt(N) g0 v(user) + sqrt(N/L) sum_l g_l v(scatterer_l)
//!
//! where v is the steering (far-field) or focusing (near-field) response,
//! |g0| = sqrt(kappa / (kappa + 1)) and g_l ~ CN(0, 1 / (kappa + 1)).
//! Large-scale fading is deliberately left out; E||h||^2 = N.

use crate::array::{ula_focusing, ula_steering, upa_focusing, upa_steering, ArrayGeometry, Layout, Location};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::rng::SeededStream;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagationModel {
    FarField,
    NearField,
}

#[derive(Debug, Clone)]
pub struct PathComponent {
    pub gain: Complex64,
    pub location: Location,
    pub is_los: bool,
}

/// Region the NLoS scatterers are drawn from, uniform in every coordinate.
#[derive(Debug, Clone, Copy)]
pub struct ScatterRegion {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl ScatterRegion {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max >= self.r_min) {
            return Err(Error::Config("scatter region radii invalid".into()));
        }
        if self.theta_min > self.theta_max || self.phi_min > self.phi_max {
            return Err(Error::Config("scatter region angles invalid".into()));
        }
        Ok(())
    }

    fn draw(&self, stream: &mut SeededStream) -> Result<Location> {
        Location::new(
            stream.uniform_in(self.r_min, self.r_max),
            stream.uniform_in(self.theta_min, self.theta_max),
            stream.uniform_in(self.phi_min, self.phi_max),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub vector: CVec,
    pub paths: Vec<PathComponent>,
    pub model: PropagationModel,
}

/// Array response for one path under the given propagation model. Near-field
/// UPA responses keep the full second-order phase including the bilinear term.
pub fn path_response(geom: &ArrayGeometry, loc: &Location, model: PropagationModel) -> Result<CVec> {
    match (model, geom.layout) {
        (PropagationModel::FarField, Layout::Ula) => ula_steering(geom, loc.phi),
        (PropagationModel::FarField, Layout::Upa) => upa_steering(geom, loc.theta, loc.phi),
        (PropagationModel::NearField, Layout::Ula) => ula_focusing(geom, loc),
        (PropagationModel::NearField, Layout::Upa) => upa_focusing(geom, loc, false),
    }
}

/// Combine stored path components into the channel vector.
pub fn synthesize(
    geom: &ArrayGeometry,
    paths: &[PathComponent],
    model: PropagationModel,
) -> Result<CVec> {
    let n = geom.total_elements();
    let num_nlos = paths.iter().filter(|p| !p.is_los).count();
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for p in paths {
        let weight = if p.is_los {
            (n as f64).sqrt()
        } else {
            (n as f64 / num_nlos as f64).sqrt()
        };
        let v = path_response(geom, &p.location, model)?;
        for (acc, e) in h.iter_mut().zip(&v) {
            *acc += weight * p.gain * e;
        }
    }
    Ok(h)
}

impl ChannelRealization {
    /// Single-path channel h = sqrt(N) g b(loc), used by the analysis
    /// scenarios and oracle tests.
    pub fn single_path(
        geom: &ArrayGeometry,
        loc: &Location,
        gain: Complex64,
        model: PropagationModel,
    ) -> Result<Self> {
        let paths = vec![PathComponent {
            gain,
            location: *loc,
            is_los: true,
        }];
        Ok(ChannelRealization {
            vector: synthesize(geom, &paths, model)?,
            paths,
            model,
        })
    }

    /// Rebuild the vector from the stored paths (reconstruction invariant).
    pub fn rebuild(&self, geom: &ArrayGeometry) -> Result<CVec> {
        synthesize(geom, &self.paths, self.model)
    }

    pub fn los(&self) -> &PathComponent {
        self.paths
            .iter()
            .find(|p| p.is_los)
            .expect("channel always stores its LoS path")
    }
}

/// Draw one multipath Rician channel realization.
pub fn generate_channel(
    geom: &ArrayGeometry,
    user_loc: &Location,
    num_nlos: usize,
    rician_kappa: f64,
    region: &ScatterRegion,
    stream: &mut SeededStream,
    model: PropagationModel,
) -> Result<ChannelRealization> {
    if rician_kappa < 0.0 {
        return Err(Error::Config("rician kappa must be >= 0".into()));
    }
    if num_nlos == 0 && rician_kappa == 0.0 {
        return Err(Error::Config(
            "empty channel: no NLoS paths and zero LoS power".into(),
        ));
    }
    region.validate()?;

    let los_gain = (rician_kappa / (rician_kappa + 1.0)).sqrt();
    let mut paths = Vec::with_capacity(num_nlos + 1);
    paths.push(PathComponent {
        gain: Complex64::new(los_gain, 0.0),
        location: *user_loc,
        is_los: true,
    });
    let nlos_sigma = (1.0 / (rician_kappa + 1.0)).sqrt();
    for _ in 0..num_nlos {
        let location = region.draw(stream)?;
        let gain = nlos_sigma * stream.complex_gaussian();
        paths.push(PathComponent {
            gain,
            location,
            is_los: false,
        });
    }

    Ok(ChannelRealization {
        vector: synthesize(geom, &paths, model)?,
        paths,
        model,
    })
}
