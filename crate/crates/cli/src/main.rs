//! `ldma` — near-field multi-user simulation CLI.
//!
//! Subcommands: `codebook` (build / inspect), `correlate` (correlation
//! sweeps), `simulate` (Monte-Carlo experiment from a TOML config), `bound`
//! (linear-placement rate bounds), `sweep` (figure-reproduction recipes).
//! Exit codes: 0 success, 1 configuration error, 2 numeric failure.

use ldma_core::array::{ArrayGeometry, Location};
use ldma_core::codebook::{export_codebook_to_path, import_codebook_from_path};
use ldma_core::correlation::{ula_correlation_trend, ula_distance_correlation_approx};
use ldma_core::error::Error;
use ldma_core::experiment::{build_scheme_codebook, run_experiment};
use ldma_core::figures::{figure_recipe, run_figure, SweepOptions, FIGURE_IDS};
use ldma_core::metrics::linear_equalized_bound;
use ldma_core::scenario::ScenarioConfig;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
ldma - near-field multi-user communications simulator

USAGE:
  ldma <SUBCOMMAND> [FLAGS]

SUBCOMMANDS:
  codebook build --config <cfg.toml> --out <file>
      Build the codebook the config's scheme calls for and export it.
  codebook inspect <file>
      Print a summary of an exported codebook.
  correlate [--n-list 64,128,...,4096] [--r1 M] [--r2 M] [--phi RAD] --out <dir>
      Distance-domain correlation sweep: exact vs closed form, CSV (n, exact, approx).
  simulate --config <cfg.toml> --out <dir> [--seed U64] [--drops N] [--threads N]
      Run the configured Monte-Carlo experiment; writes results.csv + results.meta.json.
  bound [--k-min N] [--k-max N] [--n N] [--snr-db DB] [--r-min M] [--r-max M]
        [--phi RAD] --out <dir>
      Equalized linear-placement rate bounds, CSV (k, delta, gammas, r_aub).
  sweep <figure-id> --out <dir> [--drops N] [--seed U64] [--threads N]
      Reproduce a canned figure sweep. Valid ids:
      fig4 fig5 fig6 fig7 fig8 fig9 fig10 fig11 fig12a fig12b

COMMON FLAGS:
  --out <dir|file>   Output location (default: LDMA_OUT_DIR env var or '.')
  --seed <u64>       Master seed override
  --drops <n>        Monte-Carlo drop count override
  --threads <n>      Worker thread count (results never depend on it)
  --help             This text
";

fn fail_usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n\n{USAGE}");
    ExitCode::from(1)
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) => ExitCode::from(1),
        Error::Domain(_) | Error::Singular(_) | Error::NoConvergence(_) => ExitCode::from(2),
    }
}

#[derive(Default)]
struct Flags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    drops: Option<usize>,
    threads: Option<usize>,
    n_list: Option<Vec<usize>>,
    r1: Option<f64>,
    r2: Option<f64>,
    phi: Option<f64>,
    k_min: Option<usize>,
    k_max: Option<usize>,
    n: Option<usize>,
    snr_db: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    positional: Vec<String>,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut f = Flags::default();
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        let mut grab = |name: &str| -> Result<String, String> {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--config" => f.config = Some(PathBuf::from(grab("--config")?)),
            "--out" => f.out = Some(PathBuf::from(grab("--out")?)),
            "--seed" => {
                f.seed = Some(grab("--seed")?.parse().map_err(|e| format!("--seed: {e}"))?)
            }
            "--drops" => {
                f.drops = Some(grab("--drops")?.parse().map_err(|e| format!("--drops: {e}"))?)
            }
            "--threads" => {
                f.threads =
                    Some(grab("--threads")?.parse().map_err(|e| format!("--threads: {e}"))?)
            }
            "--n-list" => {
                let list = grab("--n-list")?;
                let parsed: Result<Vec<usize>, _> =
                    list.split(',').map(|t| t.trim().parse()).collect();
                f.n_list = Some(parsed.map_err(|e| format!("--n-list: {e}"))?);
            }
            "--r1" => f.r1 = Some(grab("--r1")?.parse().map_err(|e| format!("--r1: {e}"))?),
            "--r2" => f.r2 = Some(grab("--r2")?.parse().map_err(|e| format!("--r2: {e}"))?),
            "--phi" => f.phi = Some(grab("--phi")?.parse().map_err(|e| format!("--phi: {e}"))?),
            "--k-min" => {
                f.k_min = Some(grab("--k-min")?.parse().map_err(|e| format!("--k-min: {e}"))?)
            }
            "--k-max" => {
                f.k_max = Some(grab("--k-max")?.parse().map_err(|e| format!("--k-max: {e}"))?)
            }
            "--n" => f.n = Some(grab("--n")?.parse().map_err(|e| format!("--n: {e}"))?),
            "--snr-db" => {
                f.snr_db = Some(grab("--snr-db")?.parse().map_err(|e| format!("--snr-db: {e}"))?)
            }
            "--r-min" => {
                f.r_min = Some(grab("--r-min")?.parse().map_err(|e| format!("--r-min: {e}"))?)
            }
            "--r-max" => {
                f.r_max = Some(grab("--r-max")?.parse().map_err(|e| format!("--r-max: {e}"))?)
            }
            "--help" | "-h" => return Err("help".into()),
            other if other.starts_with('-') => return Err(format!("unknown flag {other}")),
            other => f.positional.push(other.to_string()),
        }
    }
    Ok(f)
}

fn out_dir(flags: &Flags) -> PathBuf {
    flags
        .out
        .clone()
        .or_else(|| std::env::var_os("LDMA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_codebook(flags: &Flags) -> Result<(), Error> {
    match flags.positional.first().map(String::as_str) {
        Some("build") => {
            let cfg_path = flags
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("codebook build needs --config".into()))?;
            let cfg = ScenarioConfig::from_path(cfg_path)?;
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            let cb = build_scheme_codebook(&cfg)?.ok_or_else(|| {
                Error::Config(
                    "this config bypasses codebooks (infinite codebook or fully-digital)".into(),
                )
            })?;
            let out = flags
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("codebook.nfcb"));
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            export_codebook_to_path(&cb, &out)?;
            println!(
                "wrote {} codewords across {} rings to {}",
                cb.len(),
                cb.rings.len(),
                out.display()
            );
            Ok(())
        }
        Some("inspect") => {
            let path = flags
                .positional
                .get(1)
                .map(PathBuf::from)
                .ok_or_else(|| Error::Config("codebook inspect needs a file".into()))?;
            let cb = import_codebook_from_path(&path)?;
            println!(
                "layout {:?}  elements {}x{}  spacing {:.4} m  wavelength {:.4} m",
                cb.geom.layout, cb.geom.n1, cb.geom.n2, cb.geom.spacing_d, cb.geom.wavelength
            );
            println!(
                "delta {}  rho_min {} m  skipped angles {}  codewords {}",
                cb.delta,
                cb.rho_min,
                cb.skipped_angles,
                cb.len()
            );
            for (s, ring) in cb.rings.iter().enumerate() {
                let rmin = ring.iter().map(|c| c.r).fold(f64::INFINITY, f64::min);
                let rmax = ring.iter().map(|c| c.r).fold(0.0, f64::max);
                if ring.is_empty() {
                    continue;
                }
                if s == 0 {
                    println!("ring 0: {} far-field beams", ring.len());
                } else {
                    println!("ring {s}: {} beams, focus {:.2}..{:.2} m", ring.len(), rmin, rmax);
                }
            }
            Ok(())
        }
        _ => Err(Error::Config(
            "codebook needs a 'build' or 'inspect' action".into(),
        )),
    }
}

fn cmd_correlate(flags: &Flags) -> Result<(), Error> {
    let n_list = flags
        .n_list
        .clone()
        .unwrap_or_else(|| vec![64, 128, 256, 512, 1024, 2048, 4096]);
    let r1 = flags.r1.unwrap_or(5.0);
    let r2 = flags.r2.unwrap_or(15.0);
    let phi = flags.phi.unwrap_or(PI / 6.0);
    let dir = out_dir(flags);
    std::fs::create_dir_all(&dir)?;
    let geom = ArrayGeometry::ula(n_list[0].max(1), 0.01)?;
    let exact = ula_correlation_trend(
        &geom,
        &Location::polar(r1, phi)?,
        &Location::polar(r2, phi)?,
        &n_list,
    )?;
    let path = dir.join("correlate.csv");
    let mut body = String::from("n,exact,approx\n");
    for (&n, e) in n_list.iter().zip(&exact) {
        let g = ArrayGeometry::ula(n, geom.wavelength)?;
        let approx = ula_distance_correlation_approx(&g, r1, r2, phi)?;
        body.push_str(&format!("{n},{e},{approx}\n"));
    }
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(flags: &Flags) -> Result<(), Error> {
    let cfg_path = flags
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs --config <path>".into()))?;
    let mut cfg = ScenarioConfig::from_path(cfg_path)?;
    if let Some(seed) = flags.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(drops) = flags.drops {
        cfg.run.drops = drops;
    }
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let dir = out_dir(flags);
    std::fs::create_dir_all(&dir)?;
    let result = run_experiment(&cfg)?;
    let csv = dir.join("results.csv");
    let meta = dir.join("results.meta.json");
    result.write_files(&csv, &meta)?;
    for (snr, mean) in result.snr_db.iter().zip(&result.mean_sum_rate) {
        println!("snr {snr:>6.1} dB  mean sum rate {mean:.4} bit/s/Hz");
    }
    println!("wrote {} and {}", csv.display(), meta.display());
    Ok(())
}

fn cmd_bound(flags: &Flags) -> Result<(), Error> {
    let k_min = flags.k_min.unwrap_or(1);
    let k_max = flags.k_max.unwrap_or(8);
    if k_min == 0 || k_max < k_min {
        return Err(Error::Config("need 1 <= k-min <= k-max".into()));
    }
    let n = flags.n.unwrap_or(512);
    let snr_db = flags.snr_db.unwrap_or(12.0);
    let p = 10f64.powf(snr_db / 10.0);
    let r_min = flags.r_min.unwrap_or(4.0);
    let r_max = flags.r_max.unwrap_or(150.0);
    let phi = flags.phi.unwrap_or(0.0);
    let geom = ArrayGeometry::ula(n, 0.01)?;
    let dir = out_dir(flags);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("bound.csv");
    let mut body = String::from("k,delta,gammas,r_aub\n");
    for k in k_min..=k_max {
        let out = linear_equalized_bound(&geom, k, FRAC_PI_2, phi, r_min, r_max, p, 1.0, 1.0)?;
        let gammas = out
            .gammas
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        body.push_str(&format!("{k},{},\"{gammas}\",{}\n", out.delta_abs, out.rate_bound));
    }
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(flags: &Flags) -> Result<(), Error> {
    let id = flags
        .positional
        .first()
        .ok_or_else(|| {
            Error::Config(format!(
                "sweep needs a figure id (one of: {})",
                FIGURE_IDS.join(", ")
            ))
        })?
        .clone();
    let recipe = figure_recipe(&id)?;
    eprintln!("{}: {}", recipe.id, recipe.description);
    let dir = out_dir(flags);
    let opts = SweepOptions {
        drops: flags.drops,
        seed: flags.seed,
    };
    let files = run_figure(&id, &dir, &opts)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return fail_usage("missing subcommand");
    }
    let sub = args[0].clone();
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) if e == "help" => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail_usage(&e),
    };
    if let Some(t) = flags.threads {
        // Thread count only affects wall time; outputs are reduced in a
        // fixed order regardless.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let outcome = match sub.as_str() {
        "codebook" => cmd_codebook(&flags),
        "correlate" => cmd_correlate(&flags),
        "simulate" => cmd_simulate(&flags),
        "bound" => cmd_bound(&flags),
        "sweep" => cmd_sweep(&flags),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => return fail_usage(&format!("unknown subcommand {other:?}")),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
