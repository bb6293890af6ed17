//! Canned sweep recipes that regenerate the headline comparison curves as
//! CSV files: correlation-vs-array-size, the distance-sampling kernel, SNR
//! sweeps of LDMA vs SDMA under several placements, and the analytic
//! linear-placement bounds with their search oracles.
//!
//! Every recipe writes its data CSV(s) plus a JSON metadata sidecar carrying
//! the resolved configuration and method notes, so a CSV can be traced back
//! to the exact run that produced it.

use crate::array::{ula_focusing, ArrayGeometry, Location};
use crate::codebook::build_spherical_codebook;
use crate::correlation::{
    ula_correlation_trend, ula_distance_correlation_approx, upa_gbar_mag,
};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentResult};
use crate::linalg::{inner, CMat, CVec};
use crate::metrics::{linear_equalized_bound, single_path_zf_rate};
use crate::rng::seeded_stream;
use crate::scenario::{default_ula_config, default_upa_config, ScenarioConfig};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub drops: Option<usize>,
    pub seed: Option<u64>,
}

/// The multipath comparison sweeps estimate the effective channel from
/// noisy uplink pilots at the data-noise level; without it, zero forcing on
/// a perfectly known effective channel removes all inter-user interference
/// and the far-field baseline never saturates with SNR.
pub const PILOT_NOISE: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct FigureRecipe {
    pub id: &'static str,
    pub description: &'static str,
    pub outputs: &'static [&'static str],
}

pub const FIGURE_IDS: [&str; 10] = [
    "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12a", "fig12b",
];

pub fn figure_recipe(id: &str) -> Result<FigureRecipe> {
    let r = match id {
        "fig4" => FigureRecipe {
            id: "fig4",
            description: "ULA distance-domain correlation vs antenna count: exact focusing-vector \
                          inner product against the Fresnel-kernel closed form, radii 5 m / 15 m \
                          at azimuth pi/6, 30 GHz",
            outputs: &["fig4.csv"],
        },
        "fig5" => FigureRecipe {
            id: "fig5",
            description: "Distance-sampling kernel |Gbar(beta0)| of a 64x64 UPA at \
                          theta = pi/3, phi = pi/6, plus the first-ring focus shell of the \
                          Delta = 0.55 spherical codebook",
            outputs: &["fig5_gbar.csv", "fig5_shell.csv"],
        },
        "fig6" => FigureRecipe {
            id: "fig6",
            description: "Sum rate vs SNR, 512-element ULA, 4 users on the phi = 0 ray, 5 NLoS \
                          paths: LDMA vs SDMA with ZF/WMMSE digital stages plus the fully-digital \
                          ZF upper baseline",
            outputs: &["fig6.csv"],
        },
        "fig7" => FigureRecipe {
            id: "fig7",
            description: "Sum rate vs user count for single-path users on the phi = 0 ray at \
                          12 dB: equalized-placement bound without non-adjacent interference, the \
                          reachable rate at the same positions, the best placement found by \
                          search, random placements, and the single-beam far-field baseline",
            outputs: &["fig7.csv"],
        },
        "fig8" => FigureRecipe {
            id: "fig8",
            description: "Sum rate vs SNR, 512-element ULA, 10 users uniform in the sector \
                          [4, 100] m x [-pi/3, pi/3], 5 NLoS paths, Rician factor 8: LDMA vs SDMA \
                          with ZF/WMMSE",
            outputs: &["fig8.csv"],
        },
        "fig9" => FigureRecipe {
            id: "fig9",
            description: "Sum rate vs NLoS path count at 12 dB for the uniform ULA scenario",
            outputs: &["fig9.csv"],
        },
        "fig10" => FigureRecipe {
            id: "fig10",
            description: "Sum rate vs Rician factor at 12 dB for the uniform ULA scenario",
            outputs: &["fig10.csv"],
        },
        "fig11" => FigureRecipe {
            id: "fig11",
            description: "Sum rate vs ULA element count (64..512) at 12 dB for the uniform \
                          scenario",
            outputs: &["fig11.csv"],
        },
        "fig12a" => FigureRecipe {
            id: "fig12a",
            description: "Sum rate vs SNR, 256x16 UPA, 4 users on one ray: LDMA (spherical \
                          codebook) vs SDMA (DFT) vs the size-matched uniform-distance ring \
                          baseline",
            outputs: &["fig12a.csv"],
        },
        "fig12b" => FigureRecipe {
            id: "fig12b",
            description: "Sum rate vs SNR, 256x16 UPA, 4 users uniform in the sector: LDMA vs \
                          SDMA vs the uniform-distance ring baseline",
            outputs: &["fig12b.csv"],
        },
        other => {
            return Err(Error::Config(format!(
                "unknown figure id {other:?}; valid ids: {}",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    Ok(r)
}

fn write_metadata(
    out_dir: &Path,
    id: &str,
    notes: &[(&str, String)],
    configs: &[(&str, &ScenarioConfig)],
) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Meta<'a> {
        id: &'a str,
        description: &'static str,
        outputs: &'static [&'static str],
        notes: Vec<(&'a str, String)>,
        configs: Vec<(&'a str, &'a ScenarioConfig)>,
    }
    let recipe = figure_recipe(id)?;
    let path = out_dir.join(format!("{id}.meta.json"));
    let file = std::fs::File::create(&path)?;
    serde_json::to_writer_pretty(
        file,
        &Meta {
            id,
            description: recipe.description,
            outputs: recipe.outputs,
            notes: notes.to_vec(),
            configs: configs.iter().map(|&(n, c)| (n, c)).collect(),
        },
    )
    .map_err(|e| Error::Config(format!("metadata serialization failed: {e}")))?;
    Ok(path)
}

/// Run a batch of labelled experiments sharing the SNR grid and merge the
/// mean/std sum rates into one CSV keyed by SNR.
fn merged_snr_csv(
    path: &Path,
    runs: &[(&str, ExperimentResult)],
) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "snr_db")?;
    for (label, _) in runs {
        write!(f, ",{label},{label}_std")?;
    }
    writeln!(f)?;
    let snrs = &runs[0].1.snr_db;
    for (i, snr) in snrs.iter().enumerate() {
        write!(f, "{snr}")?;
        for (_, res) in runs {
            write!(f, ",{},{}", res.mean_sum_rate[i], res.std_sum_rate[i])?;
        }
        writeln!(f)?;
    }
    Ok(())
}

fn apply_overrides(cfg: &mut ScenarioConfig, opts: &SweepOptions) {
    if let Some(d) = opts.drops {
        cfg.run.drops = d;
    }
    if let Some(s) = opts.seed {
        cfg.run.master_seed = s;
    }
}

// ---------------------------------------------------------------------------
// Linear-placement analysis helpers (the user-count sweep)
// ---------------------------------------------------------------------------

/// Complex same-angle correlation table over a uniform inverse-distance
/// grid: entry d is b(u_i)^H b(u_j) for u_i - u_j = d * step at phi = 0.
fn correlation_table(geom: &ArrayGeometry, step: f64, len: usize) -> Vec<Complex64> {
    let a = geom.wavenumber() * geom.spacing_d * geom.spacing_d / 2.0;
    let idx = crate::array::symmetric_indices(geom.n1);
    (0..len)
        .map(|d| {
            let du = d as f64 * step;
            let sum: Complex64 = idx
                .iter()
                .map(|&n| Complex64::from_polar(1.0, a * n * n * du))
                .sum();
            sum / geom.n1 as f64
        })
        .collect()
}

/// Sum rate of single-path unit-gain users at the given grid indices, full
/// Gram interference, computed from the correlation table.
fn gram_rate(table: &[Complex64], picks: &[usize], tau: f64) -> Option<f64> {
    let k = picks.len();
    let mut t = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let d = picks[i] as i64 - picks[j] as i64;
            t[(i, j)] = if d >= 0 {
                table[d as usize]
            } else {
                table[(-d) as usize].conj()
            };
        }
    }
    let inv = crate::linalg::invert(&t, 1e14).ok()?;
    let mut rate = 0.0;
    for i in 0..k {
        let g = inv[(i, i)].re;
        if g <= 0.0 {
            return None;
        }
        rate += (1.0 + tau / g).log2();
    }
    Some(rate)
}

/// Exhaustive search over sorted placements on a `grid_points`-point uniform
/// inverse-distance grid (K <= 4; the combination count explodes beyond).
pub fn exhaustive_linear_max(
    geom: &ArrayGeometry,
    users: usize,
    r_min: f64,
    r_max: f64,
    total_power: f64,
    sigma2: f64,
    grid_points: usize,
) -> Result<f64> {
    if !(1..=4).contains(&users) {
        return Err(Error::Config(
            "exhaustive placement search supports 1..=4 users".into(),
        ));
    }
    let step = (1.0 / r_min - 1.0 / r_max) / (grid_points - 1) as f64;
    let table = correlation_table(geom, step, grid_points);
    let tau = total_power * geom.total_elements() as f64 / (users as f64 * sigma2);
    if users == 1 {
        return Ok((1.0 + tau).log2());
    }

    let best = (0..grid_points)
        .into_par_iter()
        .map(|a| {
            let mut local: f64 = f64::MIN;
            let mut picks = [0usize; 4];
            picks[0] = a;
            match users {
                2 => {
                    for b in a + 1..grid_points {
                        picks[1] = b;
                        if let Some(r) = gram_rate(&table, &picks[..2], tau) {
                            local = local.max(r);
                        }
                    }
                }
                3 => {
                    for b in a + 1..grid_points {
                        picks[1] = b;
                        for c in b + 1..grid_points {
                            picks[2] = c;
                            if let Some(r) = gram_rate(&table, &picks[..3], tau) {
                                local = local.max(r);
                            }
                        }
                    }
                }
                _ => {
                    for b in a + 1..grid_points {
                        picks[1] = b;
                        for c in b + 1..grid_points {
                            picks[2] = c;
                            for d in c + 1..grid_points {
                                picks[3] = d;
                                if let Some(r) = gram_rate(&table, &picks[..4], tau) {
                                    local = local.max(r);
                                }
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(|| f64::MIN, f64::max);
    Ok(best)
}

/// Deterministic coordinate-ascent placement search on the same grid, for
/// user counts where exhaustive enumeration is infeasible.
pub fn coordinate_ascent_linear_max(
    geom: &ArrayGeometry,
    users: usize,
    r_min: f64,
    r_max: f64,
    total_power: f64,
    sigma2: f64,
    grid_points: usize,
) -> Result<f64> {
    let step = (1.0 / r_min - 1.0 / r_max) / (grid_points - 1) as f64;
    let table = correlation_table(geom, step, grid_points);
    let tau = total_power * geom.total_elements() as f64 / (users as f64 * sigma2);
    // Start from the even spread.
    let mut picks: Vec<usize> = (0..users)
        .map(|i| i * (grid_points - 1) / (users.max(2) - 1).max(1))
        .collect();
    picks.dedup();
    while picks.len() < users {
        picks.push(picks.last().unwrap() + 1);
    }
    let mut best = gram_rate(&table, &picks, tau).unwrap_or(f64::MIN);
    for _ in 0..20 {
        let mut improved = false;
        for i in 0..users {
            let mut candidate = picks.clone();
            for g in 0..grid_points {
                if picks.contains(&g) && picks[i] != g {
                    continue;
                }
                candidate[i] = g;
                if let Some(r) = gram_rate(&table, &candidate, tau) {
                    if r > best + 1e-12 {
                        best = r;
                        picks[i] = g;
                        improved = true;
                    }
                }
                candidate[i] = picks[i];
            }
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

/// Mean rate of uniformly drawn single-path placements on the ray.
///
/// Random draws can land users nearly on top of each other, where the beam
/// Gram is numerically singular and those users' rates vanish; a tiny ridge
/// keeps the inverse defined and rounds exactly those rates down to their
/// limiting zero (never up).
pub fn random_linear_mean(
    geom: &ArrayGeometry,
    users: usize,
    r_min: f64,
    r_max: f64,
    total_power: f64,
    sigma2: f64,
    drops: usize,
    seed: u64,
) -> Result<f64> {
    let mut stream = seeded_stream(seed, 0);
    let tau = total_power * geom.total_elements() as f64 / (users as f64 * sigma2);
    let mut acc = 0.0;
    for _ in 0..drops {
        let cols: Result<Vec<CVec>> = (0..users)
            .map(|_| {
                let r = stream.uniform_in(r_min, r_max);
                ula_focusing(geom, &Location::polar(r, 0.0)?)
            })
            .collect();
        let cols = cols?;
        let b = CMat::from_columns(&cols);
        let mut gram = b.hermitian_transpose().mul(&b);
        for i in 0..users {
            gram[(i, i)] += Complex64::new(1e-9, 0.0);
        }
        let inv = crate::linalg::invert(&gram, 1e15)?;
        for i in 0..users {
            let gamma = inv[(i, i)].re.max(1.0);
            acc += (1.0 + tau / gamma).log2();
        }
    }
    Ok(acc / drops as f64)
}

/// Far-field baseline on a ray of single-path users: every user's channel
/// shares one steering direction, so only one beam carries signal; the best
/// user gets the whole budget.
pub fn far_field_single_beam_rate(
    geom: &ArrayGeometry,
    radii: &[f64],
    total_power: f64,
    sigma2: f64,
) -> Result<f64> {
    let dft = crate::codebook::build_dft_codebook(geom)?;
    let n = geom.total_elements() as f64;
    let mut best_gain: f64 = 0.0;
    for &r in radii {
        let h = ula_focusing(geom, &Location::polar(r, 0.0)?)?;
        for cw in dft.codewords() {
            let w = cw.vector(geom)?;
            // |w^H h|^2 with the sqrt(N) channel amplitude restored.
            let g = n * inner(&w, &h).norm_sqr();
            best_gain = best_gain.max(g);
        }
    }
    Ok((1.0 + total_power * best_gain / sigma2).log2())
}

// ---------------------------------------------------------------------------
// Recipe runners
// ---------------------------------------------------------------------------

fn run_fig4(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let geom = ArrayGeometry::ula(512, 0.01)?;
    let (r1, r2, phi) = (5.0, 15.0, PI / 6.0);
    let sweep = [64usize, 128, 256, 512, 1024, 2048, 4096];
    let exact = ula_correlation_trend(
        &geom,
        &Location::polar(r1, phi)?,
        &Location::polar(r2, phi)?,
        &sweep,
    )?;
    let path = out_dir.join("fig4.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "n,exact,fresnel_approx")?;
    for (&n, e) in sweep.iter().zip(&exact) {
        let g = ArrayGeometry::ula(n, geom.wavelength)?;
        let approx = ula_distance_correlation_approx(&g, r1, r2, phi)?;
        writeln!(f, "{n},{e},{approx}")?;
    }
    let meta = write_metadata(
        out_dir,
        "fig4",
        &[("radii_m", format!("{r1}, {r2}")), ("phi_rad", phi.to_string())],
        &[],
    )?;
    Ok(vec![path, meta])
}

fn run_fig5(out_dir: &Path) -> Result<Vec<PathBuf>> {
    let geom = ArrayGeometry::upa(64, 64, 0.01)?;
    let (theta, phi) = (PI / 3.0, PI / 6.0);
    let gbar_path = out_dir.join("fig5_gbar.csv");
    let mut f = std::fs::File::create(&gbar_path)?;
    writeln!(f, "beta0,gbar")?;
    let samples = 600;
    for i in 0..=samples {
        let beta0 = 0.06 * i as f64 / samples as f64;
        writeln!(f, "{beta0},{}", upa_gbar_mag(&geom, theta, phi, beta0))?;
    }

    // First-ring focus shell of the Delta = 0.55 codebook across the grid;
    // ring 1 of the built codebook is exactly that shell.
    let delta = 0.55;
    let shell_path = out_dir.join("fig5_shell.csv");
    let mut f = std::fs::File::create(&shell_path)?;
    writeln!(f, "n1,n2,theta,phi,r1")?;
    let cb = build_spherical_codebook(&geom, delta, 1.0)?;
    for cw in &cb.rings[1] {
        writeln!(f, "{},{},{},{},{}", cw.angle_n1, cw.angle_n2, cw.theta, cw.phi, cw.r)?;
    }
    let meta = write_metadata(
        out_dir,
        "fig5",
        &[
            ("geometry", "64x64 UPA at 30 GHz".into()),
            ("angle", format!("theta={theta}, phi={phi}")),
            ("delta", delta.to_string()),
        ],
        &[],
    )?;
    Ok(vec![gbar_path, shell_path, meta])
}

fn linear_multipath_base(opts: &SweepOptions) -> ScenarioConfig {
    let mut cfg = default_ula_config();
    cfg.scenario.users = 4;
    cfg.scenario.distribution = "linear-at-angle".into();
    cfg.precoding.effective_noise_variance = PILOT_NOISE;
    cfg.run.drops = 100;
    apply_overrides(&mut cfg, opts);
    cfg
}

fn run_scheme_batch(
    base: &ScenarioConfig,
    schemes: &[(&'static str, &str, &str)],
) -> Result<Vec<(&'static str, ExperimentResult)>> {
    let mut out = Vec::new();
    for &(label, scheme, digital) in schemes {
        let mut cfg = base.clone();
        cfg.precoding.scheme = scheme.into();
        cfg.precoding.digital = digital.into();
        out.push((label, run_experiment(&cfg)?));
    }
    Ok(out)
}

fn run_fig6(out_dir: &Path, opts: &SweepOptions) -> Result<Vec<PathBuf>> {
    let base = linear_multipath_base(opts);
    let runs = run_scheme_batch(
        &base,
        &[
            ("ldma_zf", "ldma", "zf"),
            ("ldma_wmmse", "ldma", "wmmse"),
            ("sdma_zf", "sdma", "zf"),
            ("sdma_wmmse", "sdma", "wmmse"),
            ("fully_digital_zf", "ldma", "fully-digital-zf"),
        ],
    )?;
    let path = out_dir.join("fig6.csv");
    merged_snr_csv(&path, &runs)?;
    let meta = write_metadata(
        out_dir,
        "fig6",
        &[(
            "note",
            "fully_digital_zf assumes perfect CSI and ignores the codebook".into(),
        )],
        &[("base", &base)],
    )?;
    Ok(vec![path, meta])
}

fn run_fig7(out_dir: &Path, opts: &SweepOptions) -> Result<Vec<PathBuf>> {
    let geom = ArrayGeometry::ula(512, 0.01)?;
    let (r_min, r_max) = (4.0, 150.0);
    let snr_db = 12.0;
    let p = 10f64.powf(snr_db / 10.0);
    let sigma2 = 1.0;
    let grid_points = 200;
    let drops = opts.drops.unwrap_or(200);
    let seed = opts.seed.unwrap_or(1);

    let path = out_dir.join("fig7.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(
        f,
        "k,aub_no_na,reachable_same_positions,exhaustive_max,random_linear,far_field_sdma"
    )?;
    for k in 1..=14usize {
        let bound = linear_equalized_bound(
            &geom, k, FRAC_PI_2, 0.0, r_min, r_max, p, sigma2, 1.0,
        )?;
        let gains = vec![Complex64::new(1.0, 0.0); k];
        let cols: Result<Vec<CVec>> = bound
            .radii
            .iter()
            .map(|&r| ula_focusing(&geom, &Location::polar(r, 0.0)?))
            .collect();
        let reachable = single_path_zf_rate(&CMat::from_columns(&cols?), &gains, p, sigma2)?;
        let best = if k <= 4 {
            exhaustive_linear_max(&geom, k, r_min, r_max, p, sigma2, grid_points)?
        } else {
            coordinate_ascent_linear_max(&geom, k, r_min, r_max, p, sigma2, grid_points)?
        };
        let random = random_linear_mean(&geom, k, r_min, r_max, p, sigma2, drops, seed)?;
        let sdma = far_field_single_beam_rate(&geom, &bound.radii, p, sigma2)?;
        writeln!(f, "{k},{},{reachable},{best},{random},{sdma}", bound.rate_bound)?;
    }
    let meta = write_metadata(
        out_dir,
        "fig7",
        &[
            ("snr_db", snr_db.to_string()),
            ("range_m", format!("[{r_min}, {r_max}]")),
            (
                "exhaustive_max",
                format!(
                    "exhaustive over sorted {grid_points}-point inverse-distance grid for K <= 4; \
                     deterministic coordinate ascent on the same grid for K >= 5"
                ),
            ),
            ("random_linear_drops", drops.to_string()),
        ],
        &[],
    )?;
    Ok(vec![path, meta])
}

fn run_fig8(out_dir: &Path, opts: &SweepOptions) -> Result<Vec<PathBuf>> {
    let mut base = default_ula_config();
    base.precoding.effective_noise_variance = PILOT_NOISE;
    apply_overrides(&mut base, opts);
    let runs = run_scheme_batch(
        &base,
        &[
            ("ldma_zf", "ldma", "zf"),
            ("ldma_wmmse", "ldma", "wmmse"),
            ("sdma_zf", "sdma", "zf"),
            ("sdma_wmmse", "sdma", "wmmse"),
        ],
    )?;
    let path = out_dir.join("fig8.csv");
    merged_snr_csv(&path, &runs)?;
    let meta = write_metadata(out_dir, "fig8", &[], &[("base", &base)])?;
    Ok(vec![path, meta])
}

/// Shared runner for the parameter sweeps (NLoS count, Rician factor,
/// element count) at a fixed SNR.
fn parameter_sweep<T: std::fmt::Display + Copy>(
    out_dir: &Path,
    id: &str,
    column: &str,
    values: &[T],
    mut tweak: impl FnMut(&mut ScenarioConfig, T),
    opts: &SweepOptions,
) -> Result<Vec<PathBuf>> {
    let schemes: [(&str, &str, &str); 4] = [
        ("ldma_zf", "ldma", "zf"),
        ("ldma_wmmse", "ldma", "wmmse"),
        ("sdma_zf", "sdma", "zf"),
        ("sdma_wmmse", "sdma", "wmmse"),
    ];
    let path = out_dir.join(format!("{id}.csv"));
    let mut f = std::fs::File::create(&path)?;
    write!(f, "{column}")?;
    for (label, _, _) in &schemes {
        write!(f, ",{label},{label}_std")?;
    }
    writeln!(f)?;

    let mut base = default_ula_config();
    base.precoding.effective_noise_variance = PILOT_NOISE;
    base.run.snr_db = vec![12.0];
    base.run.drops = 50;
    apply_overrides(&mut base, opts);

    for &v in values {
        write!(f, "{v}")?;
        for &(_, scheme, digital) in &schemes {
            let mut cfg = base.clone();
            tweak(&mut cfg, v);
            cfg.precoding.scheme = scheme.into();
            cfg.precoding.digital = digital.into();
            let res = run_experiment(&cfg)?;
            write!(f, ",{},{}", res.mean_sum_rate[0], res.std_sum_rate[0])?;
        }
        writeln!(f)?;
    }
    let meta = write_metadata(out_dir, id, &[("snr_db", "12".into())], &[("base", &base)])?;
    Ok(vec![path, meta])
}

fn run_fig12(out_dir: &Path, id: &str, linear: bool, opts: &SweepOptions) -> Result<Vec<PathBuf>> {
    let mut base = default_upa_config();
    if linear {
        base.scenario.distribution = "linear-at-angle".into();
    }
    base.precoding.effective_noise_variance = PILOT_NOISE;
    base.run.drops = 30;
    apply_overrides(&mut base, opts);
    let runs = run_scheme_batch(
        &base,
        &[
            ("ldma_zf", "ldma", "zf"),
            ("ldma_wmmse", "ldma", "wmmse"),
            ("sdma_zf", "sdma", "zf"),
            ("sdma_wmmse", "sdma", "wmmse"),
            ("uniform_rings_zf", "uniform-rings", "zf"),
        ],
    )?;
    let path = out_dir.join(format!("{id}.csv"));
    merged_snr_csv(&path, &runs)?;
    let meta = write_metadata(
        out_dir,
        id,
        &[(
            "uniform_rings",
            "size-matched codebook with per-angle ring counts of the spherical design but radii \
             uniform in distance"
                .into(),
        )],
        &[("base", &base)],
    )?;
    Ok(vec![path, meta])
}

/// Run one figure recipe, writing its CSVs and metadata under `out_dir`.
pub fn run_figure(id: &str, out_dir: &Path, opts: &SweepOptions) -> Result<Vec<PathBuf>> {
    figure_recipe(id)?; // validate the id up front
    std::fs::create_dir_all(out_dir)?;
    match id {
        "fig4" => run_fig4(out_dir),
        "fig5" => run_fig5(out_dir),
        "fig6" => run_fig6(out_dir, opts),
        "fig7" => run_fig7(out_dir, opts),
        "fig8" => run_fig8(out_dir, opts),
        "fig9" => parameter_sweep(
            out_dir,
            "fig9",
            "nlos_paths",
            &[1usize, 2, 3, 4, 5, 6, 7, 8],
            |cfg, l| cfg.channel.nlos_paths = l,
            opts,
        ),
        "fig10" => parameter_sweep(
            out_dir,
            "fig10",
            "rician_kappa",
            &[0.0f64, 2.0, 4.0, 8.0, 12.0, 16.0],
            |cfg, k| cfg.channel.rician_kappa = k,
            opts,
        ),
        "fig11" => parameter_sweep(
            out_dir,
            "fig11",
            "n",
            &[64usize, 128, 256, 512],
            |cfg, n| cfg.geometry.n1 = n,
            opts,
        ),
        "fig12a" => run_fig12(out_dir, "fig12a", true, opts),
        "fig12b" => run_fig12(out_dir, "fig12b", false, opts),
        _ => unreachable!("validated above"),
    }
}
