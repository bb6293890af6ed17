//! Near-field multi-user communications for extremely large antenna arrays.
//!
//! The library models the physical layer of a base station whose aperture is
//! large enough that served users sit inside the radiating near field: array
//! responses become beam *focusing* vectors parameterized by angle and
//! distance, not just angle. On top of that it provides
//!
//! - steering/focusing vector synthesis and Rician multipath channels
//!   ([`array`], [`channel`]),
//! - closed-form Fresnel-integral approximations of beam correlations and
//!   their brute-force oracles ([`special`], [`correlation`]),
//! - far-field DFT, polar-domain (ULA) and spherical-domain (UPA) codebooks
//!   with non-uniform distance rings ([`codebook`]),
//! - the hybrid precoding pipeline: beam sweeping, effective channels, and
//!   zero-forcing / WMMSE digital stages ([`precoding`]),
//! - spectrum-efficiency metrics and analytic rate bounds ([`metrics`]),
//! - a deterministic Monte-Carlo harness with figure-reproduction recipes
//!   ([`scenario`], [`experiment`], [`figures`]).
//!
//! Location-division multiple access (LDMA) and classical angle-only SDMA
//! differ in exactly one place: the codebook handed to the beam sweep.

pub mod array;
pub mod channel;
pub mod codebook;
pub mod correlation;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod rng;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
