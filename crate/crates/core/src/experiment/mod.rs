//! Parameter sweeps, purity runs and simulation-versus-theory comparisons.
//!
//! Every command writes its CSV output plus a `manifest.txt` into the
//! configured output directory. Angles, in configs and in the `theta` CSV
//! column, are in units of pi.

pub mod config;
pub mod manifest;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::channel::{gbar33_closed, spectral_check, spreading_rate_closed, QuadratureGrid};
use crate::error::QwalkError;
use crate::noise::{mix64, purity_exact_bitflip, run_ensemble, EnsembleConfig, NoiseModel};
use crate::walk::CoinAngle;

pub use config::{Command, NoiseKind, PurityMethod, RunConfig};
pub use manifest::{Manifest, MANIFEST_FILE};

/// Environment variable overriding the master seed of a config file.
pub const SEED_ENV: &str = "QWALK_SEED";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerical(#[from] QwalkError),
    #[error("{failed} of {checked} comparisons exceed the relative tolerance {tolerance}")]
    Tolerance { failed: usize, checked: usize, tolerance: f64 },
}

impl ExperimentError {
    /// 2 for configuration and setup problems, 3 for a failed comparison,
    /// 4 for a numerical guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io(_) => 2,
            ExperimentError::Tolerance { .. } => 3,
            ExperimentError::Numerical(e) => match e {
                QwalkError::AngleOutOfRange(_)
                | QwalkError::InvalidProbability(_)
                | QwalkError::NotNormalized(_)
                | QwalkError::TooFewTrajectories(_)
                | QwalkError::InvalidConfig(_) => 2,
                _ => 4,
            },
        }
    }

    pub(crate) fn message(&self) -> String {
        match self {
            ExperimentError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// Output files, manifest last.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Largest relative deviation among the non-excluded compare rows.
    pub max_deviation: Option<f64>,
}

/// Floats in CSV output: 17 significant digits, `nan`/`inf` spelled in
/// lowercase.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// Builds the effective configuration: defaults, then the file, then
/// `QWALK_SEED` (if `env_seed` is given), then `--set` overrides, then an
/// explicit seed.
pub fn resolve_config<'a>(
    command: Command,
    file_text: Option<&str>,
    env_seed: Option<&str>,
    overrides: impl IntoIterator<Item = &'a str>,
    seed: Option<u64>,
) -> Result<RunConfig, ExperimentError> {
    let mut cfg = match file_text {
        Some(text) => RunConfig::parse(command, text)?,
        None => RunConfig::defaults(command),
    };
    if let Some(s) = env_seed {
        cfg.seed = s
            .trim()
            .parse()
            .map_err(|_| ExperimentError::Config(format!("{SEED_ENV} must be an unsigned integer, got `{s}`")))?;
    }
    cfg.apply_overrides(overrides)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs `command` and writes its outputs and manifest.
///
/// A failed comparison still writes everything before returning
/// [`ExperimentError::Tolerance`].
pub fn run(command: Command, config: &RunConfig) -> Result<RunOutcome, ExperimentError> {
    config.validate(command)?;
    let started = Instant::now();
    fs::create_dir_all(&config.out_dir).map_err(|e| {
        ExperimentError::Config(format!("cannot create output directory {}: {e}", config.out_dir.display()))
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    let mut out = Output::new(&config.out_dir);
    let verdict = pool.install(|| match command {
        Command::AnalyticSweep => analytic_sweep(config, &mut out),
        Command::SimSweep => sim_sweep(config, &mut out),
        Command::Purity => purity(config, &mut out),
        Command::Compare => compare(config, &mut out),
    })?;

    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        duration_secs: started.elapsed().as_secs_f64(),
        config: config.clone(),
        checksums: out.checksums.clone(),
    };
    out.write(MANIFEST_FILE, manifest.render().as_bytes(), false)?;

    let outcome = RunOutcome {
        out_dir: config.out_dir.clone(),
        files: out.files,
        warnings: out.warnings,
        max_deviation: verdict.max_deviation,
    };
    if verdict.failed > 0 {
        return Err(ExperimentError::Tolerance {
            failed: verdict.failed,
            checked: verdict.checked,
            tolerance: config.tolerance,
        });
    }
    Ok(outcome)
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
    checksums: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new(), checksums: Vec::new(), warnings: Vec::new() }
    }

    fn write(&mut self, name: &str, bytes: &[u8], checksum: bool) -> Result<(), ExperimentError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        if checksum {
            self.checksums.push((name.to_string(), manifest::sha256_hex(bytes)));
        }
        self.files.push(path);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
    }
}

#[derive(Default)]
struct Verdict {
    checked: usize,
    failed: usize,
    max_deviation: Option<f64>,
}

fn grid(config: &RunConfig) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
    config
        .theta
        .iter()
        .flat_map(move |&t| config.p.iter().map(move |&p| (t, p)))
        .enumerate()
        .map(|(i, (t, p))| (i, t, p))
}

fn analytic_sweep(config: &RunConfig, out: &mut Output) -> Result<Verdict, ExperimentError> {
    let quad = QuadratureGrid::new(config.nodes)?;
    let mut csv = String::from("theta,p,dq_closed,gbar33,max_eig\n");
    for (_, t, p) in grid(config) {
        let coin = CoinAngle::from_pi_units(t)?;
        let (dq, gbar) = match spreading_rate_closed(coin, p) {
            Ok(rate) => (rate.dq, gbar33_closed(coin, p)?),
            Err(QwalkError::Divergent(_)) => {
                out.warn(format!("theta = {t} pi, p = {p}: spreading rate diverges, written as inf"));
                (f64::INFINITY, f64::INFINITY)
            }
            Err(e) => return Err(e.into()),
        };
        let max_eig = spectral_check(coin, p, &quad)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            format_float(t),
            format_float(p),
            format_float(dq),
            format_float(gbar),
            format_float(max_eig)
        ));
    }
    out.write("analytic_sweep.csv", csv.as_bytes(), true)?;
    Ok(Verdict::default())
}

/// Closed-form rate the simulation is held against. Broken links are
/// compared with the bit-flip formula at the same rate.
fn reference_dq(noise: NoiseKind, coin: CoinAngle, p: f64) -> Result<f64, QwalkError> {
    match noise {
        NoiseKind::Coherent => Ok(f64::NAN),
        NoiseKind::BitFlip | NoiseKind::BrokenLinks => match spreading_rate_closed(coin, p) {
            Ok(rate) => Ok(rate.dq),
            Err(QwalkError::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        },
    }
}

struct SimRow {
    theta: f64,
    p: f64,
    seed: u64,
    dq_sim: f64,
    dq_stderr: f64,
    dq_closed: f64,
}

fn simulate(config: &RunConfig, out: &mut Output) -> Result<Vec<SimRow>, ExperimentError> {
    let mut rows = Vec::new();
    for (i, t, p) in grid(config) {
        let coin = CoinAngle::from_pi_units(t)?;
        let noise = config.noise.model(p);
        let seed = mix64(config.seed, i as u64);
        let ens = EnsembleConfig {
            initial: config.initial,
            variance_mode: config.variance,
            window: config.window(),
            ..EnsembleConfig::new(coin, noise)
        }
        .with_size(config.walkers, config.steps)
        .with_seed(seed);
        let result = run_ensemble(&ens)?;
        let (dq_sim, dq_stderr) = match (&result.dq, noise) {
            (Some(est), _) => (est.slope, est.stderr),
            (None, NoiseModel::Coherent) => {
                out.warn(format!("theta = {t} pi: coherent walk spreads ballistically, no spreading rate"));
                (f64::NAN, f64::NAN)
            }
            (None, _) => {
                let why = match config.window().bounds(noise.rate(), config.steps) {
                    Err(e) => e.to_string(),
                    Ok(_) => "fit failed".into(),
                };
                out.warn(format!("theta = {t} pi, p = {p}: no spreading-rate fit ({why})"));
                (f64::NAN, f64::NAN)
            }
        };
        let dq_closed = reference_dq(config.noise, coin, p)?;
        if dq_closed.is_infinite() {
            out.warn(format!("theta = {t} pi, p = {p}: closed-form spreading rate diverges"));
        }
        rows.push(SimRow { theta: t, p, seed, dq_sim, dq_stderr, dq_closed });
    }
    Ok(rows)
}

fn sim_sweep(config: &RunConfig, out: &mut Output) -> Result<Verdict, ExperimentError> {
    let mut config = config.clone();
    if config.noise == NoiseKind::Coherent {
        // the noise rate is meaningless here, so one row per angle
        config.p = vec![0.0];
    }
    let rows = simulate(&config, out)?;
    let noise = config.noise.model(0.0).name();
    let mut csv = String::from("theta,p,noise,dq_sim,dq_stderr,dq_closed_or_nan,walkers,steps,seed\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{noise},{},{},{},{},{},{}\n",
            format_float(r.theta),
            format_float(r.p),
            format_float(r.dq_sim),
            format_float(r.dq_stderr),
            format_float(r.dq_closed),
            config.walkers,
            config.steps,
            r.seed
        ));
    }
    out.write("sim_sweep.csv", csv.as_bytes(), true)?;
    Ok(Verdict::default())
}

fn near_half_pi(config: &RunConfig, theta: f64) -> bool {
    config.exclude_near_half_pi && 0.5 - theta.abs() <= config.exclusion_width + 1e-12
}

fn compare(config: &RunConfig, out: &mut Output) -> Result<Verdict, ExperimentError> {
    if config.noise == NoiseKind::Coherent {
        return Err(ExperimentError::Config("compare needs a noise model with a finite spreading rate".into()));
    }
    let rows = simulate(config, out)?;
    let mut verdict = Verdict::default();
    let mut csv = String::from("theta,p,noise,dq_closed,dq_sim,dq_stderr,rel_dev,excluded,pass\n");
    let noise = config.noise.model(0.0).name();
    for r in &rows {
        let rel = (r.dq_sim - r.dq_closed) / r.dq_closed;
        let excluded = near_half_pi(config, r.theta) || !r.dq_closed.is_finite();
        let pass = rel.abs() <= config.tolerance;
        if !excluded {
            verdict.checked += 1;
            if !pass {
                verdict.failed += 1;
            }
            if rel.is_finite() {
                verdict.max_deviation = Some(verdict.max_deviation.map_or(rel.abs(), |m: f64| m.max(rel.abs())));
            }
        }
        csv.push_str(&format!(
            "{},{},{noise},{},{},{},{},{excluded},{}\n",
            format_float(r.theta),
            format_float(r.p),
            format_float(r.dq_closed),
            format_float(r.dq_sim),
            format_float(r.dq_stderr),
            format_float(rel),
            pass || excluded
        ));
    }
    out.write("compare.csv", csv.as_bytes(), true)?;
    Ok(verdict)
}

fn purity(config: &RunConfig, out: &mut Output) -> Result<Verdict, ExperimentError> {
    let coin = CoinAngle::from_pi_units(config.theta[0])?;
    let p = config.p[0];
    let series: Vec<(usize, f64)> = match config.purity_method {
        PurityMethod::Exact => {
            purity_exact_bitflip(coin, p, config.initial, config.t_final, config.dimension_guard)?
                .into_iter()
                .enumerate()
                .collect()
        }
        PurityMethod::MonteCarlo => {
            let ens = EnsembleConfig {
                initial: config.initial,
                record_purity: true,
                purity_times: config.purity_times.clone(),
                ..EnsembleConfig::new(coin, config.noise.model(p))
            }
            .with_size(config.walkers, config.t_final)
            .with_seed(config.seed);
            let result = run_ensemble(&ens)?;
            result.purity.unwrap_or_default().into_iter().map(|pt| (pt.t, pt.estimate.value)).collect()
        }
    };
    let method = config.purity_method.name();
    let mut csv = String::from("t,purity,method\n");
    for &(t, value) in &series {
        csv.push_str(&format!("{t},{},{method}\n", format_float(value)));
    }
    out.write("purity.csv", csv.as_bytes(), true)?;

    if config.svg {
        let data: Vec<(f64, f64)> = series.iter().filter(|(t, _)| *t > 0).map(|&(t, v)| (t as f64, v)).collect();
        let guide = match (data.first(), data.last()) {
            (Some(&(t0, _)), Some(&(t1, v1))) if v1 > 0.0 => {
                let g = |t: f64| v1 * (t1 / t).sqrt();
                vec![(t0, g(t0)), (t1, v1)]
            }
            _ => Vec::new(),
        };
        let doc = svg::loglog_plot(
            &format!("purity, theta = {} pi, p = {p}", config.theta[0]),
            "t",
            "Tr rho^2",
            &[svg::Series::solid(method, data), svg::Series::dashed("t^-1/2", guide)],
        );
        out.write("purity.svg", doc.as_bytes(), true)?;
    }
    Ok(Verdict::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn seed_precedence() {
        let file = "seed = 1\n";
        let cfg = resolve_config(Command::Compare, Some(file), None, [], None).unwrap();
        assert_eq!(cfg.seed, 1);
        let cfg = resolve_config(Command::Compare, Some(file), Some("2"), [], None).unwrap();
        assert_eq!(cfg.seed, 2);
        let cfg = resolve_config(Command::Compare, Some(file), Some("2"), [], Some(3)).unwrap();
        assert_eq!(cfg.seed, 3);
        assert!(resolve_config(Command::Compare, None, Some("x"), [], None).is_err());
    }

    #[test]
    fn exclusion_band() {
        let cfg = RunConfig::defaults(Command::Compare);
        assert!(near_half_pi(&cfg, 0.45));
        assert!(near_half_pi(&cfg, -0.5));
        assert!(!near_half_pi(&cfg, 0.44));
        let off = RunConfig { exclude_near_half_pi: false, ..cfg };
        assert!(!near_half_pi(&off, 0.5));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Config("x".into()).exit_code(), 2);
        assert_eq!(ExperimentError::Tolerance { failed: 1, checked: 2, tolerance: 0.1 }.exit_code(), 3);
        assert_eq!(ExperimentError::from(QwalkError::DimensionGuard { dim: 5000, guard: 4096 }).exit_code(), 4);
        assert_eq!(ExperimentError::from(QwalkError::InvalidProbability(2.0)).exit_code(), 2);
    }
}
