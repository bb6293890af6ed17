//! Beam codebooks: the far-field DFT grid, the ULA polar-domain codebook,
//! and the UPA spherical-domain codebook with non-uniform distance rings.
//!
//! Construction follows one recipe. Angles are sampled uniformly in
//! cos(theta) and sin(theta) sin(phi) (the DFT grid, mutually orthogonal at
//! half-wavelength spacing). Distances are sampled per angle on the ladder
//! r_s = r_1 / s, whose inverse-distance gaps are all equal; the gap is
//! sized so the Fresnel correlation kernel of any two adjacent rings sits at
//! a threshold Delta. Because the kernel magnitude oscillates, the threshold
//! equation is resolved on its non-increasing upper envelope, which makes
//! "correlation <= Delta for every coarser spacing" an actual guarantee
//! rather than a trend.
//!
//! Ring 0 always holds the plain steering grid, so the far-field codebook is
//! a subset of every near-field codebook built here.

use crate::array::{
    ula_focusing, ula_steering, upa_focusing, upa_steering, ArrayGeometry, Layout, Location,
};
use crate::correlation::fresnel_ratio_mag;
use crate::error::{Error, Result};
use crate::linalg::CVec;
use std::f64::consts::FRAC_PI_2;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// Hard cap on distance rings per angle. Operating thresholds produce a few
/// dozen rings at most; the cap keeps near-degenerate thresholds (Delta very
/// close to 1) from exploding the codebook.
pub const MAX_RINGS_PER_ANGLE: usize = 256;

/// One point of the angular sampling grid.
#[derive(Debug, Clone, Copy)]
pub struct GridAngle {
    pub n1: usize,
    pub n2: usize,
    pub theta: f64,
    pub phi: f64,
}

/// Uniform angular grid in cos(theta) (index n1) and sin(theta) sin(phi)
/// (index n2). Grid pairs whose implied |sin(phi)| reaches 1 are skipped;
/// the skip count is returned alongside.
pub fn angular_grid(geom: &ArrayGeometry) -> (Vec<GridAngle>, usize) {
    match geom.layout {
        Layout::Ula => {
            let n = geom.n1;
            let grid = (0..n)
                .map(|i| {
                    let sin_phi = (2.0 * i as f64 - n as f64 + 1.0) / n as f64;
                    GridAngle {
                        n1: i,
                        n2: 0,
                        theta: FRAC_PI_2,
                        phi: sin_phi.asin(),
                    }
                })
                .collect();
            (grid, 0)
        }
        Layout::Upa => {
            let mut grid = Vec::with_capacity(geom.n1 * geom.n2);
            let mut skipped = 0usize;
            for i1 in 0..geom.n1 {
                let cos_theta = (2.0 * i1 as f64 - geom.n1 as f64 + 1.0) / geom.n1 as f64;
                let theta = cos_theta.acos();
                let sin_theta = theta.sin();
                for i2 in 0..geom.n2 {
                    let v2 = (2.0 * i2 as f64 - geom.n2 as f64 + 1.0) / geom.n2 as f64;
                    let sin_phi = v2 / sin_theta;
                    if sin_phi.abs() >= 1.0 - 1e-12 {
                        skipped += 1;
                        continue;
                    }
                    grid.push(GridAngle {
                        n1: i1,
                        n2: i2,
                        theta,
                        phi: sin_phi.asin(),
                    });
                }
            }
            (grid, skipped)
        }
    }
}

/// Sampled |G| lookup so the per-angle threshold searches reuse one pass of
/// Fresnel evaluations.
struct KernelTable {
    step: f64,
    mags: Vec<f64>,
}

impl KernelTable {
    fn build() -> Self {
        let step = 5e-4;
        let max = 60.0;
        let n = (max / step) as usize + 2;
        let mags = (0..n).map(|i| fresnel_ratio_mag(i as f64 * step)).collect();
        KernelTable { step, mags }
    }

    fn mag(&self, beta: f64) -> f64 {
        let b = beta.abs();
        let pos = b / self.step;
        let i = pos as usize;
        if i + 1 >= self.mags.len() {
            return fresnel_ratio_mag(b);
        }
        let frac = pos - i as f64;
        self.mags[i] * (1.0 - frac) + self.mags[i + 1] * frac
    }
}

/// Smallest argument beyond which the non-increasing upper envelope of
/// `eval` stays at or below `delta`. `tail_bound` must over-estimate `eval`
/// on `[b, inf)` so the envelope can be closed off on the right.
fn envelope_crossing(
    eval: impl Fn(f64) -> f64,
    tail_bound: impl Fn(f64) -> f64,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "threshold must lie in (0, 1), got {delta}"
        )));
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while tail_bound(hi) > 0.5 * delta {
        hi *= 2.0;
        guard += 1;
        if guard > 120 {
            return Err(Error::NoConvergence(
                "correlation envelope never fell below the threshold".into(),
            ));
        }
    }

    let samples = 6000usize;
    let step = hi / samples as f64;
    let mut vals: Vec<f64> = (0..=samples).map(|i| eval(i as f64 * step)).collect();
    // Non-increasing majorant, swept from the right.
    let mut run = tail_bound(hi);
    for v in vals.iter_mut().rev() {
        run = run.max(*v);
        *v = run;
    }
    let cross = vals.iter().position(|&v| v <= delta).unwrap_or(samples);
    if cross == 0 {
        return Ok(0.0);
    }
    // Linear interpolation between the bracketing envelope samples.
    let (b0, e0) = ((cross - 1) as f64 * step, vals[cross - 1]);
    let (b1, e1) = (cross as f64 * step, vals[cross]);
    if e0 <= e1 + 1e-15 {
        return Ok(b1);
    }
    Ok(b0 + (e0 - delta) / (e0 - e1) * (b1 - b0))
}

/// Threshold argument for the single-factor ULA kernel: the smallest
/// beta_Delta with envelope |G(beta)| <= Delta for all beta >= beta_Delta.
/// Independent of the angle (the angle scales beta, not the kernel).
pub fn beta_threshold_ula(delta: f64) -> Result<f64> {
    let table = KernelTable::build();
    envelope_crossing(|b| table.mag(b), |b| (1.2 / b).min(1.0), delta)
}

/// Threshold beta_0 for the UPA product kernel
/// |G(N1 b0 s1)| |G(N2 b0 s2)| at one grid angle.
pub fn beta_threshold_upa(geom: &ArrayGeometry, delta: f64, theta: f64, phi: f64) -> Result<f64> {
    let table = KernelTable::build();
    beta_threshold_upa_with(&table, geom, delta, theta, phi)
}

fn beta_threshold_upa_with(
    table: &KernelTable,
    geom: &ArrayGeometry,
    delta: f64,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    let a1 = geom.n1 as f64 * (1.0 - theta.cos().powi(2)).max(0.0).sqrt();
    let a2 = geom.n2 as f64 * (1.0 - (theta.sin() * phi.sin()).powi(2)).max(0.0).sqrt();
    let dominant = a1.max(a2);
    if dominant == 0.0 {
        return Err(Error::Domain(
            "degenerate grid angle: both kernel factors collapse".into(),
        ));
    }
    envelope_crossing(
        |b0| table.mag(a1 * b0) * table.mag(a2 * b0),
        |b0| (1.2 / (dominant * b0)).min(1.0),
        delta,
    )
}

/// First (widest) ring radius of the UPA ladder: r_1 = d^2 / (2 lambda beta_Delta^2).
pub fn upa_first_ring_radius(geom: &ArrayGeometry, beta_delta0: f64) -> f64 {
    let d = geom.spacing_d;
    d * d / (2.0 * geom.wavelength * beta_delta0 * beta_delta0)
}

/// First ring radius of the ULA polar ladder at azimuth phi:
/// r_1 = N^2 d^2 cos^2(phi) / (2 lambda beta_Delta^2).
pub fn ula_first_ring_radius(geom: &ArrayGeometry, beta_delta: f64, phi: f64) -> f64 {
    let nd = geom.n1 as f64 * geom.spacing_d;
    nd * nd * phi.cos().powi(2) / (2.0 * geom.wavelength * beta_delta * beta_delta)
}

/// Distance ladder r_s = r_1 / s for s = 1, 2, ... while r_s >= rho_min.
/// Consecutive rings have equal inverse-distance gaps, so every adjacent
/// pair meets the sampling-density condition with equality.
pub fn distance_rings(first_radius: f64, rho_min: f64) -> Vec<f64> {
    if !(rho_min > 0.0) || first_radius < rho_min {
        return Vec::new();
    }
    let count = if first_radius.is_finite() {
        ((first_radius / rho_min) as usize).min(MAX_RINGS_PER_ANGLE)
    } else {
        MAX_RINGS_PER_ANGLE
    };
    (1..=count).map(|s| first_radius / s as f64).collect()
}

/// One codeword: a constant-modulus beam aimed at its focus point. Ring 0
/// focuses at infinity (plain steering); vectors materialize on demand.
#[derive(Debug, Clone)]
pub struct Codeword {
    pub ring: usize,
    pub angle_n1: usize,
    pub angle_n2: usize,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Codeword {
    pub fn vector(&self, geom: &ArrayGeometry) -> Result<CVec> {
        match geom.layout {
            Layout::Ula => {
                if self.ring == 0 {
                    ula_steering(geom, self.phi)
                } else {
                    ula_focusing(geom, &Location::new(self.r, self.theta, self.phi)?)
                }
            }
            Layout::Upa => {
                if self.ring == 0 {
                    upa_steering(geom, self.theta, self.phi)
                } else {
                    upa_focusing(geom, &Location::new(self.r, self.theta, self.phi)?, true)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSampling {
    /// No rings: the far-field DFT grid alone.
    FarFieldOnly,
    /// Inverse-distance ladder r_s = r_1 / s.
    InverseDistance,
    /// Same per-angle ring count as the inverse-distance ladder, radii
    /// uniform in distance (comparison baseline).
    UniformDistance,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    pub geom: ArrayGeometry,
    pub delta: f64,
    pub rho_min: f64,
    pub sampling: DistanceSampling,
    /// rings[s] lists the codewords of ring s; ring 0 covers every feasible
    /// grid angle, deeper rings only the angles whose ladder reaches them.
    pub rings: Vec<Vec<Codeword>>,
    /// Infeasible angular grid pairs (|sin phi| >= 1) skipped at build time.
    pub skipped_angles: usize,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat deterministic enumeration: ring-major, then grid order.
    pub fn codewords(&self) -> impl Iterator<Item = &Codeword> {
        self.rings.iter().flatten()
    }

    pub fn codeword(&self, flat_index: usize) -> &Codeword {
        let mut idx = flat_index;
        for ring in &self.rings {
            if idx < ring.len() {
                return &ring[idx];
            }
            idx -= ring.len();
        }
        panic!("codeword index {flat_index} out of range {}", self.len());
    }
}

fn ladder_radii(sampling: DistanceSampling, first_radius: f64, rho_min: f64) -> Vec<f64> {
    match sampling {
        DistanceSampling::FarFieldOnly => Vec::new(),
        DistanceSampling::InverseDistance => distance_rings(first_radius, rho_min),
        DistanceSampling::UniformDistance => {
            let n = distance_rings(first_radius, rho_min).len();
            if n == 0 {
                return Vec::new();
            }
            if n == 1 {
                return vec![first_radius];
            }
            // Uniform in radius over the same span, widest first.
            (0..n)
                .map(|i| first_radius - (first_radius - rho_min) * i as f64 / (n - 1) as f64)
                .collect()
        }
    }
}

fn assemble(
    geom: &ArrayGeometry,
    delta: f64,
    rho_min: f64,
    sampling: DistanceSampling,
    grid: Vec<GridAngle>,
    skipped: usize,
    mut first_radius: impl FnMut(&GridAngle) -> Result<f64>,
) -> Result<Codebook> {
    let mut rings: Vec<Vec<Codeword>> = vec![Vec::new()];
    for ga in &grid {
        rings[0].push(Codeword {
            ring: 0,
            angle_n1: ga.n1,
            angle_n2: ga.n2,
            r: f64::INFINITY,
            theta: ga.theta,
            phi: ga.phi,
        });
        if sampling == DistanceSampling::FarFieldOnly {
            continue;
        }
        let r1 = first_radius(ga)?;
        for (i, r) in ladder_radii(sampling, r1, rho_min).into_iter().enumerate() {
            let s = i + 1;
            if rings.len() <= s {
                rings.resize_with(s + 1, Vec::new);
            }
            rings[s].push(Codeword {
                ring: s,
                angle_n1: ga.n1,
                angle_n2: ga.n2,
                r,
                theta: ga.theta,
                phi: ga.phi,
            });
        }
    }
    Ok(Codebook {
        geom: *geom,
        delta,
        rho_min,
        sampling,
        rings,
        skipped_angles: skipped,
    })
}

/// Far-field DFT codebook: the angular grid only. This is the classical
/// angle-division (SDMA) codebook for either layout.
pub fn build_dft_codebook(geom: &ArrayGeometry) -> Result<Codebook> {
    let (grid, skipped) = angular_grid(geom);
    assemble(
        geom,
        1.0,
        f64::INFINITY,
        DistanceSampling::FarFieldOnly,
        grid,
        skipped,
        |_| Ok(f64::INFINITY),
    )
}

/// Spherical-domain codebook for a UPA: DFT angular grid plus per-angle
/// distance rings sized by the product-kernel envelope at threshold `delta`.
pub fn build_spherical_codebook(geom: &ArrayGeometry, delta: f64, rho_min: f64) -> Result<Codebook> {
    build_upa_codebook(geom, delta, rho_min, DistanceSampling::InverseDistance)
}

/// Size-matched comparison baseline: identical angular grid and per-angle
/// ring counts, radii uniform in distance instead of inverse distance.
pub fn build_uniform_ring_codebook(
    geom: &ArrayGeometry,
    delta: f64,
    rho_min: f64,
) -> Result<Codebook> {
    build_upa_codebook(geom, delta, rho_min, DistanceSampling::UniformDistance)
}

fn build_upa_codebook(
    geom: &ArrayGeometry,
    delta: f64,
    rho_min: f64,
    sampling: DistanceSampling,
) -> Result<Codebook> {
    if geom.layout != Layout::Upa {
        return Err(Error::Config("spherical codebook requires a UPA".into()));
    }
    if !(rho_min > 0.0) {
        return Err(Error::Config("rho_min must be positive".into()));
    }
    let table = KernelTable::build();
    let (grid, skipped) = angular_grid(geom);
    assemble(geom, delta, rho_min, sampling, grid, skipped, |ga| {
        let bd = beta_threshold_upa_with(&table, geom, delta, ga.theta, ga.phi)?;
        if bd == 0.0 {
            return Ok(f64::INFINITY); // ladder capped by MAX_RINGS_PER_ANGLE
        }
        Ok(upa_first_ring_radius(geom, bd))
    })
}

/// Polar-domain codebook for a ULA: DFT angular grid plus distance rings on
/// the single-factor kernel. One envelope search covers all angles; only the
/// ladder start r_1 depends on cos^2(phi).
pub fn build_polar_codebook(geom: &ArrayGeometry, delta: f64, rho_min: f64) -> Result<Codebook> {
    if geom.layout != Layout::Ula {
        return Err(Error::Config("polar codebook requires a ULA".into()));
    }
    if !(rho_min > 0.0) {
        return Err(Error::Config("rho_min must be positive".into()));
    }
    let beta_delta = beta_threshold_ula(delta)?;
    let (grid, skipped) = angular_grid(geom);
    assemble(
        geom,
        delta,
        rho_min,
        DistanceSampling::InverseDistance,
        grid,
        skipped,
        |ga| {
            if beta_delta == 0.0 {
                return Ok(f64::INFINITY);
            }
            Ok(ula_first_ring_radius(geom, beta_delta, ga.phi))
        },
    )
}

const FILE_TAG: &str = "NFCB1";

/// Write a codebook in the versioned line-oriented text format (see README:
/// header line, then one record per codeword with the ring index, grid
/// indices, focus coordinates, and the interleaved re/im vector entries).
pub fn export_codebook<W: Write>(cb: &Codebook, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let layout = match cb.geom.layout {
        Layout::Ula => "ula",
        Layout::Upa => "upa",
    };
    let sampling = match cb.sampling {
        DistanceSampling::FarFieldOnly => "far",
        DistanceSampling::InverseDistance => "inverse",
        DistanceSampling::UniformDistance => "uniform",
    };
    writeln!(
        w,
        "{FILE_TAG} layout={layout} n1={} n2={} spacing={:.17e} wavelength={:.17e} delta={:.17e} rho_min={:.17e} sampling={sampling} skipped={} count={}",
        cb.geom.n1,
        cb.geom.n2,
        cb.geom.spacing_d,
        cb.geom.wavelength,
        cb.delta,
        cb.rho_min,
        cb.skipped_angles,
        cb.len()
    )?;
    for cw in cb.codewords() {
        write!(
            w,
            "{} {} {} {} {:.17e} {:.17e}",
            cw.ring,
            cw.angle_n1,
            cw.angle_n2,
            if cw.r.is_finite() {
                format!("{:.17e}", cw.r)
            } else {
                "inf".to_string()
            },
            cw.theta,
            cw.phi
        )?;
        for z in cw.vector(&cb.geom)? {
            write!(w, " {:.17e} {:.17e}", z.re, z.im)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_codebook_to_path(cb: &Codebook, path: &Path) -> Result<()> {
    export_codebook(cb, std::fs::File::create(path)?)
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what}: {tok:?}"),
    })
}

fn header_value<'a>(fields: &'a [&str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(&format!("{key}=")))
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing header field {key}"),
        })
}

/// Read a codebook back. The version tag is checked first; every record is
/// validated for field count and finite values, with the line number carried
/// in any error.
pub fn import_codebook<R: BufRead>(reader: R) -> Result<Codebook> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&FILE_TAG) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "unsupported codebook version {:?}, expected {FILE_TAG}",
                fields.first().copied().unwrap_or("")
            ),
        });
    }
    let layout = match header_value(&fields, "layout")? {
        "ula" => Layout::Ula,
        "upa" => Layout::Upa,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("unknown layout {other:?}"),
            })
        }
    };
    let n1: usize = parse_field(header_value(&fields, "n1")?, 1, "n1")?;
    let n2: usize = parse_field(header_value(&fields, "n2")?, 1, "n2")?;
    let spacing: f64 = parse_field(header_value(&fields, "spacing")?, 1, "spacing")?;
    let wavelength: f64 = parse_field(header_value(&fields, "wavelength")?, 1, "wavelength")?;
    let delta: f64 = parse_field(header_value(&fields, "delta")?, 1, "delta")?;
    let rho_min: f64 = parse_field(header_value(&fields, "rho_min")?, 1, "rho_min")?;
    let sampling = match header_value(&fields, "sampling")? {
        "far" => DistanceSampling::FarFieldOnly,
        "inverse" => DistanceSampling::InverseDistance,
        "uniform" => DistanceSampling::UniformDistance,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("unknown sampling {other:?}"),
            })
        }
    };
    let skipped: usize = parse_field(header_value(&fields, "skipped")?, 1, "skipped")?;
    let count: usize = parse_field(header_value(&fields, "count")?, 1, "count")?;
    let geom =
        ArrayGeometry::new(layout, n1, n2, spacing, wavelength).map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad geometry: {e}"),
        })?;
    let n_entries = geom.total_elements();

    let mut rings: Vec<Vec<Codeword>> = Vec::new();
    let mut seen = 0usize;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = 6 + 2 * n_entries;
        if toks.len() != want {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {want} fields, found {}", toks.len()),
            });
        }
        let ring: usize = parse_field(toks[0], lineno, "ring index")?;
        let a1: usize = parse_field(toks[1], lineno, "angle index n1")?;
        let a2: usize = parse_field(toks[2], lineno, "angle index n2")?;
        let r: f64 = if toks[3] == "inf" {
            f64::INFINITY
        } else {
            parse_field(toks[3], lineno, "focus distance")?
        };
        let theta: f64 = parse_field(toks[4], lineno, "focus theta")?;
        let phi: f64 = parse_field(toks[5], lineno, "focus phi")?;
        for (j, tok) in toks[6..].iter().enumerate() {
            let v: f64 = parse_field(tok, lineno, "vector entry")?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite vector entry at position {j}"),
                });
            }
        }
        if rings.len() <= ring {
            rings.resize_with(ring + 1, Vec::new);
        }
        rings[ring].push(Codeword {
            ring,
            angle_n1: a1,
            angle_n2: a2,
            r,
            theta,
            phi,
        });
        seen += 1;
    }
    if seen != count {
        return Err(Error::Parse {
            line: seen + 1,
            message: format!("header promised {count} codewords, file holds {seen}"),
        });
    }
    Ok(Codebook {
        geom,
        delta,
        rho_min,
        sampling,
        rings,
        skipped_angles: skipped,
    })
}

pub fn import_codebook_from_path(path: &Path) -> Result<Codebook> {
    import_codebook(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{exact_correlation, upa_gbar_mag};
    use crate::linalg::inner;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 0.01;

    #[test]
    fn angular_grid_formula_and_orthogonality() {
        let g = ArrayGeometry::upa(2, 2, LAMBDA).unwrap();
        let (grid, skipped) = angular_grid(&g);
        assert_eq!(skipped, 0);
        assert_eq!(grid.len(), 4);
        for ga in &grid {
            assert!((ga.theta.cos().abs() - 0.5).abs() < 1e-12);
            assert!(((ga.theta.sin() * ga.phi.sin()).abs() - 0.5).abs() < 1e-12);
        }

        let g = ArrayGeometry::upa(8, 4, LAMBDA).unwrap();
        let (grid, skipped) = angular_grid(&g);
        assert!(grid.len() + skipped == 32);
        for (i, a) in grid.iter().enumerate() {
            let va = upa_steering(&g, a.theta, a.phi).unwrap();
            for b in grid.iter().skip(i + 1) {
                let vb = upa_steering(&g, b.theta, b.phi).unwrap();
                assert!(
                    exact_correlation(&va, &vb).unwrap() < 1e-9,
                    "grid beams ({},{}) and ({},{}) not orthogonal",
                    a.n1,
                    a.n2,
                    b.n1,
                    b.n2
                );
            }
        }
    }

    #[test]
    fn threshold_search_is_self_consistent() {
        let g = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        let (theta, phi) = (PI / 3.0, PI / 6.0);
        let bd = beta_threshold_upa(&g, 0.55, theta, phi).unwrap();
        assert!(bd > 0.0);
        let back = upa_gbar_mag(&g, theta, phi, bd);
        assert!((0.5..=0.6).contains(&back), "kernel at beta_delta: {back}");
    }

    #[test]
    fn threshold_monotone_in_delta() {
        let g = ArrayGeometry::upa(64, 64, LAMBDA).unwrap();
        let (theta, phi) = (PI / 3.0, PI / 6.0);
        let b04 = beta_threshold_upa(&g, 0.4, theta, phi).unwrap();
        let b06 = beta_threshold_upa(&g, 0.6, theta, phi).unwrap();
        assert!(b04 >= b06);
        assert!(beta_threshold_upa(&g, 1.2, theta, phi).is_err());
    }

    #[test]
    fn near_unity_threshold_gives_tiny_beta() {
        // Near beta = 0 the kernel is 1 - pi^2 beta^4 / 90, so the crossing
        // for Delta = 1 - eps sits at (90 eps / pi^2)^(1/4).
        let delta = 0.999999;
        let bd = beta_threshold_ula(delta).unwrap();
        let want = (90.0 * (1.0 - delta) / (PI * PI)).powf(0.25);
        assert!((bd - want).abs() < 0.15 * want, "beta_delta {bd}, series {want}");
    }

    #[test]
    fn ring_ladder_shape() {
        let radii = distance_rings(40.0, 4.0);
        assert_eq!(radii.len(), 10);
        assert!((radii[0] - 40.0).abs() < 1e-12);
        assert!((radii[1] - 20.0).abs() < 1e-12); // doubling s halves r
        assert!(radii.iter().all(|&r| r >= 4.0));
        // Equal inverse-distance gaps.
        for w in radii.windows(2) {
            assert!(((1.0 / w[1] - 1.0 / w[0]) - 1.0 / 40.0).abs() < 1e-12);
        }
        assert!(distance_rings(3.0, 4.0).is_empty());
        assert_eq!(
            distance_rings(f64::INFINITY, 4.0).len(),
            MAX_RINGS_PER_ANGLE
        );
    }

    #[test]
    fn spherical_codebook_structure() {
        let g = ArrayGeometry::upa(16, 8, LAMBDA).unwrap();
        let cb = build_spherical_codebook(&g, 0.55, 0.05).unwrap();
        let (grid, skipped) = angular_grid(&g);
        assert_eq!(cb.skipped_angles, skipped);
        assert_eq!(cb.rings[0].len(), grid.len());

        // Size = sum over angles of (rings at that angle + 1).
        let table = KernelTable::build();
        let mut expected = 0usize;
        for ga in &grid {
            let bd = beta_threshold_upa_with(&table, &g, 0.55, ga.theta, ga.phi).unwrap();
            expected += 1 + distance_rings(upa_first_ring_radius(&g, bd), 0.05).len();
        }
        assert_eq!(cb.len(), expected);
        assert!(cb.rings.len() > 1, "expected at least one distance ring");

        // Every codeword is unit-norm with constant-modulus entries.
        let scale = 1.0 / (g.total_elements() as f64).sqrt();
        for cw in cb.codewords() {
            let v = cw.vector(&g).unwrap();
            for e in &v {
                assert!((e.norm() - scale).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ring0_equals_far_field_grid() {
        let g = ArrayGeometry::upa(16, 8, LAMBDA).unwrap();
        let cb = build_spherical_codebook(&g, 0.55, 0.05).unwrap();
        for cw in &cb.rings[0] {
            let v = cw.vector(&g).unwrap();
            let want = upa_steering(&g, cw.theta, cw.phi).unwrap();
            for (a, b) in v.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn adjacent_rings_meet_density_guarantee() {
        let g = ArrayGeometry::upa(16, 8, LAMBDA).unwrap();
        let delta = 0.55;
        let cb = build_spherical_codebook(&g, delta, 0.05).unwrap();
        let table = KernelTable::build();
        for cw0 in &cb.rings[0] {
            let bd = beta_threshold_upa_with(&table, &g, delta, cw0.theta, cw0.phi).unwrap();
            let want_gap = 2.0 * g.wavelength * bd * bd / (g.spacing_d * g.spacing_d);
            let mut ladder: Vec<f64> = cb
                .codewords()
                .filter(|c| {
                    c.ring > 0 && c.angle_n1 == cw0.angle_n1 && c.angle_n2 == cw0.angle_n2
                })
                .map(|c| c.r)
                .collect();
            ladder.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for w in ladder.windows(2) {
                let gap = 1.0 / w[1] - 1.0 / w[0];
                assert!(gap >= want_gap * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn sparse_threshold_degenerates_to_dft() {
        // A tight threshold pushes the first ring below rho_min, leaving the
        // far-field codebook alone.
        let g = ArrayGeometry::upa(16, 8, LAMBDA).unwrap();
        let cb = build_spherical_codebook(&g, 0.02, 4.0).unwrap();
        assert_eq!(cb.rings.len(), 1);
        let dft = build_dft_codebook(&g).unwrap();
        assert_eq!(cb.len(), dft.len());
    }

    #[test]
    fn polar_codebook_rings_and_dft_degeneration() {
        let g = ArrayGeometry::ula(512, LAMBDA).unwrap();
        let cb = build_polar_codebook(&g, 0.55, 4.0).unwrap();
        assert!(cb.rings.len() > 10);

        // Ring-0 beams pairwise orthogonal (spot check a stride).
        let ring0 = &cb.rings[0];
        for i in (0..ring0.len()).step_by(97) {
            for j in (i + 1..ring0.len()).step_by(61) {
                let a = ring0[i].vector(&g).unwrap();
                let b = ring0[j].vector(&g).unwrap();
                assert!(exact_correlation(&a, &b).unwrap() < 1e-9);
            }
        }

        // Sparse threshold: no ladder survives rho_min.
        let sparse = build_polar_codebook(&g, 0.02, 4.0).unwrap();
        assert_eq!(sparse.rings.len(), 1);
        assert_eq!(sparse.len(), 512);
    }

    #[test]
    fn polar_adjacent_ring_correlation_near_threshold() {
        let g = ArrayGeometry::ula(512, LAMBDA).unwrap();
        let delta = 0.55;
        let cb = build_polar_codebook(&g, delta, 4.0).unwrap();
        // Center angle has the deepest ladder; walk it.
        let center = &cb.rings[0][256];
        let ladder: Vec<&Codeword> = cb
            .codewords()
            .filter(|c| c.angle_n1 == center.angle_n1)
            .collect();
        assert!(ladder.len() > 2);
        for w in ladder.windows(2) {
            let a = w[0].vector(&g).unwrap();
            let b = w[1].vector(&g).unwrap();
            let corr = exact_correlation(&a, &b).unwrap();
            assert!(
                corr <= delta + 0.1,
                "rings {} and {} correlate at {corr}",
                w[0].ring,
                w[1].ring
            );
        }
    }

    #[test]
    fn uniform_baseline_is_size_matched() {
        let g = ArrayGeometry::upa(16, 8, LAMBDA).unwrap();
        let sph = build_spherical_codebook(&g, 0.55, 0.05).unwrap();
        let uni = build_uniform_ring_codebook(&g, 0.55, 0.05).unwrap();
        assert_eq!(sph.len(), uni.len());
        assert!(uni.codewords().filter(|c| c.ring > 0).all(|c| c.r >= 0.05));
    }

    #[test]
    fn export_import_round_trip_is_byte_identical() {
        let g = ArrayGeometry::upa(8, 4, LAMBDA).unwrap();
        let cb = build_spherical_codebook(&g, 0.55, 0.05).unwrap();
        let mut buf = Vec::new();
        export_codebook(&cb, &mut buf).unwrap();
        let back = import_codebook(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(back.len(), cb.len());
        let mut buf2 = Vec::new();
        export_codebook(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);

        for (a, b) in cb.codewords().zip(back.codewords()) {
            assert_eq!(a.r.to_bits(), b.r.to_bits());
            assert_eq!(a.theta.to_bits(), b.theta.to_bits());
            assert_eq!(a.phi.to_bits(), b.phi.to_bits());
            let va = a.vector(&g).unwrap();
            let vb = b.vector(&g).unwrap();
            assert!((inner(&va, &vb).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn truncated_and_mislabeled_files_error_cleanly() {
        let g = ArrayGeometry::upa(4, 4, LAMBDA).unwrap();
        let cb = build_spherical_codebook(&g, 0.55, 0.05).unwrap();
        let mut buf = Vec::new();
        export_codebook(&cb, &mut buf).unwrap();

        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(3).collect::<Vec<_>>().join("\n");
        let err = import_codebook(std::io::BufReader::new(truncated.as_bytes()));
        assert!(matches!(err, Err(Error::Parse { .. })), "{err:?}");

        let wrong_tag = text.replacen(FILE_TAG, "NFCB9", 1);
        let err = import_codebook(std::io::BufReader::new(wrong_tag.as_bytes()));
        match err {
            Err(Error::Parse { line: 1, message }) => {
                assert!(message.contains("unsupported"), "{message}")
            }
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
