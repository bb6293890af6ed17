//! Scenario configuration and per-drop user/channel generation.
//!
//! Configs are TOML with five sections ([geometry], [scenario], [channel],
//! [precoding], [run]); every field of the resolved struct round-trips into
//! the result sidecar so a run is reproducible from its outputs alone.
//! Defaults mirror the standard evaluation setup: 30 GHz carrier,
//! half-wavelength spacing, 512-element ULA or 256x16 UPA, users in a
//! sector between 4 m and 100 m, five NLoS paths with Rician factor 8.

use crate::array::{ArrayGeometry, Layout, Location};
use crate::channel::{generate_channel, ChannelRealization, PropagationModel, ScatterRegion};
use crate::error::{Error, Result};
use crate::rng::{seeded_stream, SeededStream};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

/// Rounded propagation speed: 30 GHz resolves to a 1 cm wavelength and the
/// half-wavelength spacing to exactly 0.5 cm.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Streams are partitioned per drop: purpose p of drop i is stream i*8 + p.
const STREAMS_PER_DROP: u64 = 8;
pub const STREAM_LOCATIONS: u64 = 0;
pub const STREAM_PATHS: u64 = 1;
pub const STREAM_EFFECTIVE_NOISE: u64 = 2;

fn default_n2() -> usize {
    1
}
fn default_spacing() -> f64 {
    0.0 // resolved to lambda/2
}
fn default_theta_range() -> [f64; 2] {
    [FRAC_PI_2, FRAC_PI_2]
}
fn default_linear_theta() -> f64 {
    FRAC_PI_2
}
fn default_kappa() -> f64 {
    8.0
}
fn default_nlos() -> usize {
    5
}
fn default_delta() -> f64 {
    0.55
}
fn default_wmmse_iters() -> usize {
    100
}
fn default_wmmse_tol() -> f64 {
    1e-6
}
fn default_drops() -> usize {
    100
}
fn default_snr() -> Vec<f64> {
    vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub layout: String,
    pub n1: usize,
    #[serde(default = "default_n2")]
    pub n2: usize,
    pub frequency_ghz: f64,
    /// Element spacing in meters; 0 (the default) resolves to lambda/2.
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserPlacement {
    pub users: usize,
    /// "uniform-sector" or "linear-at-angle".
    pub distribution: String,
    pub r_min_m: f64,
    pub r_max_m: f64,
    /// Elevation range (radians) for uniform-sector UPA scenarios.
    #[serde(default = "default_theta_range")]
    pub theta_range_rad: [f64; 2],
    /// Azimuth range (radians) for uniform-sector scenarios.
    #[serde(default)]
    pub phi_range_rad: [f64; 2],
    /// Fixed ray for linear-at-angle scenarios.
    #[serde(default = "default_linear_theta")]
    pub linear_theta_rad: f64,
    #[serde(default)]
    pub linear_phi_rad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// "near" or "far".
    #[serde(default = "near_model")]
    pub model: String,
    #[serde(default = "default_nlos")]
    pub nlos_paths: usize,
    #[serde(default = "default_kappa")]
    pub rician_kappa: f64,
    /// Scatterer angle ranges; default: the user sector (or the standard
    /// sector when users sit on a single ray).
    #[serde(default)]
    pub scatter_theta_range_rad: Option<[f64; 2]>,
    #[serde(default)]
    pub scatter_phi_range_rad: Option<[f64; 2]>,
}

fn near_model() -> String {
    "near".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrecodingConfig {
    /// "ldma", "sdma", or "uniform-rings" (UPA comparison baseline).
    pub scheme: String,
    #[serde(default = "default_delta")]
    pub codebook_delta: f64,
    /// Deepest codebook focus distance; defaults to the scenario r_min.
    #[serde(default)]
    pub codebook_rho_min_m: Option<f64>,
    /// Skip the codebook sweep and use each user's exact LoS beam.
    #[serde(default)]
    pub infinite_codebook: bool,
    /// "zf", "wmmse", or "fully-digital-zf".
    pub digital: String,
    /// Variance of the pilot noise folded into the effective channel.
    #[serde(default)]
    pub effective_noise_variance: f64,
    #[serde(default = "default_wmmse_iters")]
    pub wmmse_max_iters: usize,
    #[serde(default = "default_wmmse_tol")]
    pub wmmse_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// SNR points in dB; SNR = P / sigma^2 with sigma^2 = 1 and p_k = P/K.
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_drops")]
    pub drops: usize,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub scenario: UserPlacement,
    pub channel: ChannelConfig,
    pub precoding: PrecodingConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    UniformSector,
    LinearAtAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Ldma,
    Sdma,
    UniformRings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitalScheme {
    Zf,
    Wmmse,
    FullyDigitalZf,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse failed: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let wavelength = SPEED_OF_LIGHT / (self.geometry.frequency_ghz * 1e9);
        let spacing = if self.geometry.spacing_m > 0.0 {
            self.geometry.spacing_m
        } else {
            wavelength / 2.0
        };
        let layout = match self.geometry.layout.as_str() {
            "ula" => Layout::Ula,
            "upa" => Layout::Upa,
            other => return Err(Error::Config(format!("unknown layout {other:?}"))),
        };
        ArrayGeometry::new(layout, self.geometry.n1, self.geometry.n2, spacing, wavelength)
    }

    pub fn distribution(&self) -> Result<Distribution> {
        match self.scenario.distribution.as_str() {
            "uniform-sector" => Ok(Distribution::UniformSector),
            "linear-at-angle" => Ok(Distribution::LinearAtAngle),
            other => Err(Error::Config(format!("unknown distribution {other:?}"))),
        }
    }

    pub fn scheme(&self) -> Result<Scheme> {
        match self.precoding.scheme.as_str() {
            "ldma" => Ok(Scheme::Ldma),
            "sdma" => Ok(Scheme::Sdma),
            "uniform-rings" => Ok(Scheme::UniformRings),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }

    pub fn digital(&self) -> Result<DigitalScheme> {
        match self.precoding.digital.as_str() {
            "zf" => Ok(DigitalScheme::Zf),
            "wmmse" => Ok(DigitalScheme::Wmmse),
            "fully-digital-zf" => Ok(DigitalScheme::FullyDigitalZf),
            other => Err(Error::Config(format!("unknown digital scheme {other:?}"))),
        }
    }

    pub fn propagation(&self) -> Result<PropagationModel> {
        match self.channel.model.as_str() {
            "near" => Ok(PropagationModel::NearField),
            "far" => Ok(PropagationModel::FarField),
            other => Err(Error::Config(format!("unknown channel model {other:?}"))),
        }
    }

    pub fn rho_min(&self) -> f64 {
        self.precoding
            .codebook_rho_min_m
            .unwrap_or(self.scenario.r_min_m)
    }

    /// Scatterer region: user radii, user angle sector where non-degenerate,
    /// otherwise the standard sector around the linear ray.
    pub fn scatter_region(&self) -> Result<ScatterRegion> {
        let dist = self.distribution()?;
        let (theta_range, phi_range) = match dist {
            Distribution::UniformSector => {
                (self.scenario.theta_range_rad, self.scenario.phi_range_rad)
            }
            Distribution::LinearAtAngle => {
                let geom_is_upa = self.geometry.layout == "upa";
                let theta = if geom_is_upa {
                    [PI / 3.0, 2.0 * PI / 3.0]
                } else {
                    [FRAC_PI_2, FRAC_PI_2]
                };
                let phi = if geom_is_upa {
                    [-PI / 6.0, PI / 6.0]
                } else {
                    [-PI / 3.0, PI / 3.0]
                };
                (theta, phi)
            }
        };
        let region = ScatterRegion {
            r_min: self.scenario.r_min_m,
            r_max: self.scenario.r_max_m,
            theta_min: self
                .channel
                .scatter_theta_range_rad
                .map_or(theta_range[0], |r| r[0]),
            theta_max: self
                .channel
                .scatter_theta_range_rad
                .map_or(theta_range[1], |r| r[1]),
            phi_min: self
                .channel
                .scatter_phi_range_rad
                .map_or(phi_range[0], |r| r[0]),
            phi_max: self
                .channel
                .scatter_phi_range_rad
                .map_or(phi_range[1], |r| r[1]),
        };
        region.validate()?;
        Ok(region)
    }

    /// Full validation; returns non-fatal warnings (e.g. users inside the
    /// quadratic-expansion validity boundary).
    pub fn validate(&self) -> Result<Vec<String>> {
        let geom = self.geometry()?;
        self.distribution()?;
        self.scheme()?;
        self.digital()?;
        self.propagation()?;
        self.scatter_region()?;
        if self.scenario.users == 0 {
            return Err(Error::Config("need at least one user".into()));
        }
        if !(self.scenario.r_min_m > 0.0 && self.scenario.r_max_m >= self.scenario.r_min_m) {
            return Err(Error::Config("invalid user radius range".into()));
        }
        if self.scenario.theta_range_rad[0] > self.scenario.theta_range_rad[1]
            || self.scenario.phi_range_rad[0] > self.scenario.phi_range_rad[1]
        {
            return Err(Error::Config("invalid user angle ranges".into()));
        }
        if self.run.drops == 0 {
            return Err(Error::Config("need at least one drop".into()));
        }
        if self.run.snr_db.is_empty() {
            return Err(Error::Config("need at least one SNR point".into()));
        }
        if self.channel.nlos_paths == 0 && self.channel.rician_kappa == 0.0 {
            return Err(Error::Config(
                "no NLoS paths and zero LoS power leaves an empty channel".into(),
            ));
        }
        let mut warnings = Vec::new();
        let boundary = geom.fresnel_boundary();
        if self.scenario.r_min_m < boundary {
            warnings.push(format!(
                "r_min = {} m is inside the quadratic-expansion boundary {:.2} m; \
                 focusing phases lose accuracy there",
                self.scenario.r_min_m, boundary
            ));
        }
        Ok(warnings)
    }
}

/// The stream for one purpose of one drop.
pub fn drop_stream(master_seed: u64, drop_index: usize, purpose: u64) -> SeededStream {
    seeded_stream(master_seed, drop_index as u64 * STREAMS_PER_DROP + purpose)
}

/// Draw the user locations of one drop.
pub fn generate_user_locations(
    config: &ScenarioConfig,
    drop_index: usize,
) -> Result<Vec<Location>> {
    let mut stream = drop_stream(config.run.master_seed, drop_index, STREAM_LOCATIONS);
    let s = &config.scenario;
    let dist = config.distribution()?;
    (0..s.users)
        .map(|_| {
            let r = stream.uniform_in(s.r_min_m, s.r_max_m);
            match dist {
                Distribution::LinearAtAngle => {
                    Location::new(r, s.linear_theta_rad, s.linear_phi_rad)
                }
                Distribution::UniformSector => {
                    let theta = stream.uniform_in(s.theta_range_rad[0], s.theta_range_rad[1]);
                    let phi = stream.uniform_in(s.phi_range_rad[0], s.phi_range_rad[1]);
                    Location::new(r, theta, phi)
                }
            }
        })
        .collect()
}

/// Draw the full multiuser channel of one drop (locations plus multipath).
pub fn generate_scenario(
    config: &ScenarioConfig,
    drop_index: usize,
) -> Result<Vec<ChannelRealization>> {
    let geom = config.geometry()?;
    let model = config.propagation()?;
    let region = config.scatter_region()?;
    let locations = generate_user_locations(config, drop_index)?;
    let mut path_stream = drop_stream(config.run.master_seed, drop_index, STREAM_PATHS);
    locations
        .iter()
        .map(|loc| {
            generate_channel(
                &geom,
                loc,
                config.channel.nlos_paths,
                config.channel.rician_kappa,
                &region,
                &mut path_stream,
                model,
            )
        })
        .collect()
}

/// Canned config: the standard ULA evaluation scenario.
pub fn default_ula_config() -> ScenarioConfig {
    ScenarioConfig {
        geometry: GeometryConfig {
            layout: "ula".into(),
            n1: 512,
            n2: 1,
            frequency_ghz: 30.0,
            spacing_m: 0.0,
        },
        scenario: UserPlacement {
            users: 10,
            distribution: "uniform-sector".into(),
            r_min_m: 4.0,
            r_max_m: 100.0,
            theta_range_rad: [FRAC_PI_2, FRAC_PI_2],
            phi_range_rad: [-PI / 3.0, PI / 3.0],
            linear_theta_rad: FRAC_PI_2,
            linear_phi_rad: 0.0,
        },
        channel: ChannelConfig {
            model: "near".into(),
            nlos_paths: 5,
            rician_kappa: 8.0,
            scatter_theta_range_rad: None,
            scatter_phi_range_rad: None,
        },
        precoding: PrecodingConfig {
            scheme: "ldma".into(),
            codebook_delta: 0.55,
            codebook_rho_min_m: None,
            infinite_codebook: false,
            digital: "zf".into(),
            effective_noise_variance: 0.0,
            wmmse_max_iters: 100,
            wmmse_tol: 1e-6,
        },
        run: RunConfig {
            snr_db: default_snr(),
            drops: 100,
            master_seed: 1,
        },
    }
}

/// Canned config: the standard UPA evaluation scenario.
pub fn default_upa_config() -> ScenarioConfig {
    let mut cfg = default_ula_config();
    cfg.geometry.layout = "upa".into();
    cfg.geometry.n1 = 256;
    cfg.geometry.n2 = 16;
    cfg.scenario.users = 4;
    cfg.scenario.r_max_m = 50.0;
    cfg.scenario.theta_range_rad = [PI / 3.0, 2.0 * PI / 3.0];
    cfg.scenario.phi_range_rad = [-PI / 6.0, PI / 6.0];
    cfg
}
