//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. List values are
//! comma-separated items, each a number, a ratio `a/b`, or an inclusive
//! linear range `start:stop:count`. Angles are in units of pi, so
//! `theta = 1/4` is the Hadamard coin.

use std::collections::BTreeSet;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::noise::{NoiseModel, VarianceMode, WindowSpec};
use crate::walk::InitialCoinState;

use super::ExperimentError;

/// Sub-commands of the experiment driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    AnalyticSweep,
    SimSweep,
    Purity,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AnalyticSweep => "analytic-sweep",
            Command::SimSweep => "sim-sweep",
            Command::Purity => "purity",
            Command::Compare => "compare",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Command::AnalyticSweep, Command::SimSweep, Command::Purity, Command::Compare]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Coherent,
    BitFlip,
    BrokenLinks,
}

impl NoiseKind {
    pub fn model(self, p: f64) -> NoiseModel {
        match self {
            NoiseKind::Coherent => NoiseModel::Coherent,
            NoiseKind::BitFlip => NoiseModel::BitFlip { p },
            NoiseKind::BrokenLinks => NoiseModel::BrokenLinks { p_tilde: p },
        }
    }

    fn name(self) -> &'static str {
        match self {
            NoiseKind::Coherent => "coherent",
            NoiseKind::BitFlip => "bitflip",
            NoiseKind::BrokenLinks => "broken-links",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurityMethod {
    Exact,
    MonteCarlo,
}

impl PurityMethod {
    pub fn name(self) -> &'static str {
        match self {
            PurityMethod::Exact => "exact",
            PurityMethod::MonteCarlo => "mc",
        }
    }
}

/// Every parameter of a run, with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Coin angles in units of pi.
    pub theta: Vec<f64>,
    pub p: Vec<f64>,
    pub noise: NoiseKind,
    pub walkers: usize,
    pub steps: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub initial: InitialCoinState,
    pub variance: VarianceMode,
    pub window_multiplier: f64,
    pub window_min_start: usize,
    pub window_min_span: usize,
    pub nodes: usize,
    pub t_final: usize,
    pub purity_method: PurityMethod,
    pub purity_times: Vec<usize>,
    pub dimension_guard: usize,
    pub svg: bool,
    pub tolerance: f64,
    pub exclude_near_half_pi: bool,
    /// Half-width, in units of pi, of the excluded band around `|theta| = pi/2`.
    pub exclusion_width: f64,
}

const KEYS: &[&str] = &[
    "theta",
    "p",
    "noise",
    "walkers",
    "steps",
    "seed",
    "workers",
    "out_dir",
    "initial",
    "variance",
    "window_multiplier",
    "window_min_start",
    "window_min_span",
    "nodes",
    "t_final",
    "purity_method",
    "purity_times",
    "dimension_guard",
    "svg",
    "tolerance",
    "exclude_near_half_pi",
    "exclusion_width",
];

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

impl RunConfig {
    /// Defaults for `command`; the grids reproduce the published sweeps.
    pub fn defaults(command: Command) -> Self {
        let window = WindowSpec::default();
        let mut cfg = Self {
            theta: vec![1.0 / 6.0, 0.25, 1.0 / 3.0],
            p: vec![0.01, 0.02, 0.1],
            noise: NoiseKind::BitFlip,
            walkers: 1000,
            steps: 1000,
            seed: 2008,
            workers: 0,
            out_dir: PathBuf::from("qwalk-out"),
            initial: InitialCoinState::default(),
            variance: VarianceMode::Mixture,
            window_multiplier: window.multiplier,
            window_min_start: window.min_start,
            window_min_span: window.min_span,
            nodes: crate::channel::DEFAULT_NODES,
            t_final: 500,
            purity_method: PurityMethod::Exact,
            purity_times: Vec::new(),
            dimension_guard: crate::noise::DEFAULT_DIMENSION_GUARD,
            svg: true,
            tolerance: 0.10,
            exclude_near_half_pi: true,
            exclusion_width: 0.05,
        };
        match command {
            Command::AnalyticSweep => {
                cfg.theta = linspace(-0.5, 0.5, 41);
                cfg.p = vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
            }
            Command::SimSweep | Command::Compare => {}
            Command::Purity => {
                cfg.theta = vec![0.25];
                cfg.p = vec![0.1];
                cfg.walkers = 200;
            }
        }
        cfg
    }

    /// Parses `text` on top of the defaults for `command`.
    pub fn parse(command: Command, text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = Self::defaults(command);
        let mut seen = BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(config_err(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value.trim())
                .map_err(|e| config_err(format!("line {}: {}", lineno + 1, e.message())))?;
        }
        Ok(cfg)
    }

    /// Sets one parameter from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        match key {
            "theta" => self.theta = parse_list(value)?,
            "p" => self.p = parse_list(value)?,
            "noise" => {
                self.noise = match value {
                    "coherent" => NoiseKind::Coherent,
                    "bitflip" | "bit-flip" => NoiseKind::BitFlip,
                    "broken-links" | "brokenlinks" => NoiseKind::BrokenLinks,
                    other => return Err(config_err(format!("unknown noise model `{other}`"))),
                }
            }
            "walkers" => self.walkers = parse_int(key, value)?,
            "steps" => self.steps = parse_int(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "workers" => self.workers = parse_int(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "initial" => self.initial = parse_initial(value)?,
            "variance" => {
                self.variance = match value {
                    "mixture" => VarianceMode::Mixture,
                    "trajectory-mean" => VarianceMode::TrajectoryMean,
                    other => return Err(config_err(format!("unknown variance mode `{other}`"))),
                }
            }
            "window_multiplier" => self.window_multiplier = parse_number(value)?,
            "window_min_start" => self.window_min_start = parse_int(key, value)?,
            "window_min_span" => self.window_min_span = parse_int(key, value)?,
            "nodes" => self.nodes = parse_int(key, value)?,
            "t_final" => self.t_final = parse_int(key, value)?,
            "purity_method" => {
                self.purity_method = match value {
                    "exact" => PurityMethod::Exact,
                    "mc" => PurityMethod::MonteCarlo,
                    other => return Err(config_err(format!("unknown purity method `{other}`"))),
                }
            }
            "purity_times" => {
                self.purity_times = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|v| parse_int("purity_times", v.trim())).collect::<Result<_, _>>()?
                }
            }
            "dimension_guard" => self.dimension_guard = parse_int(key, value)?,
            "svg" => self.svg = parse_bool(key, value)?,
            "tolerance" => self.tolerance = parse_number(value)?,
            "exclude_near_half_pi" => self.exclude_near_half_pi = parse_bool(key, value)?,
            "exclusion_width" => self.exclusion_width = parse_number(value)?,
            other => return Err(config_err(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<(), ExperimentError> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| config_err(format!("override `{pair}` is not `key=value`")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Checks the cross-field invariants.
    pub fn validate(&self, command: Command) -> Result<(), ExperimentError> {
        if self.theta.is_empty() || self.p.is_empty() {
            return Err(config_err("theta and p grids must be non-empty"));
        }
        if let Some(t) = self.theta.iter().find(|t| !(-0.5..=0.5).contains(*t)) {
            return Err(config_err(format!("theta = {t} (units of pi) outside [-1/2, 1/2]")));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(config_err(format!("p = {p} outside [0, 1]")));
        }
        if self.walkers == 0 || self.steps == 0 {
            return Err(config_err("walkers and steps must be positive"));
        }
        if !(self.window_multiplier > 0.0) {
            return Err(config_err("window_multiplier must be positive"));
        }
        if self.nodes == 0 || !self.nodes.is_multiple_of(4) {
            return Err(config_err("nodes must be a positive multiple of 4"));
        }
        if !(self.tolerance > 0.0) {
            return Err(config_err("tolerance must be positive"));
        }
        if command == Command::Purity {
            if self.theta.len() != 1 || self.p.len() != 1 {
                return Err(config_err("purity takes a single theta and a single p"));
            }
            if self.purity_method == PurityMethod::Exact && self.noise != NoiseKind::BitFlip {
                return Err(config_err("exact purity is only available for bit-flip noise"));
            }
            if self.purity_method == PurityMethod::MonteCarlo && self.walkers < 2 {
                return Err(config_err("Monte Carlo purity needs at least 2 walkers"));
            }
            if self.t_final == 0 {
                return Err(config_err("t_final must be positive"));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> WindowSpec {
        WindowSpec {
            multiplier: self.window_multiplier,
            min_start: self.window_min_start,
            min_span: self.window_min_span,
        }
    }

    /// Every effective parameter as `(key, value)`, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        let ints = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let (a, b) = (self.initial.a0(), self.initial.b0());
        KEYS.iter()
            .map(|&key| {
                let value = match key {
                    "theta" => list(&self.theta),
                    "p" => list(&self.p),
                    "noise" => self.noise.name().to_string(),
                    "walkers" => self.walkers.to_string(),
                    "steps" => self.steps.to_string(),
                    "seed" => self.seed.to_string(),
                    "workers" => self.workers.to_string(),
                    "out_dir" => self.out_dir.display().to_string(),
                    "initial" => format!("{}, {}, {}, {}", a.re, a.im, b.re, b.im),
                    "variance" => match self.variance {
                        VarianceMode::Mixture => "mixture".into(),
                        VarianceMode::TrajectoryMean => "trajectory-mean".into(),
                    },
                    "window_multiplier" => format!("{}", self.window_multiplier),
                    "window_min_start" => self.window_min_start.to_string(),
                    "window_min_span" => self.window_min_span.to_string(),
                    "nodes" => self.nodes.to_string(),
                    "t_final" => self.t_final.to_string(),
                    "purity_method" => self.purity_method.name().to_string(),
                    "purity_times" => ints(&self.purity_times),
                    "dimension_guard" => self.dimension_guard.to_string(),
                    "svg" => self.svg.to_string(),
                    "tolerance" => format!("{}", self.tolerance),
                    "exclude_near_half_pi" => self.exclude_near_half_pi.to_string(),
                    "exclusion_width" => format!("{}", self.exclusion_width),
                    _ => unreachable!("key list and match out of sync"),
                };
                (key, value)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn parse_number(s: &str) -> Result<f64, ExperimentError> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num.trim().parse().map_err(|_| config_err(format!("bad number `{s}`")))?;
            let d: f64 = den.trim().parse().map_err(|_| config_err(format!("bad number `{s}`")))?;
            n / d
        }
        None => s.parse().map_err(|_| config_err(format!("bad number `{s}`")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(config_err(format!("non-finite number `{s}`")))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, ExperimentError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(parse_number(single)?),
            [start, stop, count] => {
                let count: usize = count.trim().parse().map_err(|_| config_err(format!("bad range count in `{item}`")))?;
                out.extend(linspace(parse_number(start)?, parse_number(stop)?, count));
            }
            _ => return Err(config_err(format!("bad list item `{item}`"))),
        }
    }
    Ok(out)
}

fn parse_int<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, ExperimentError> {
    s.trim().parse().map_err(|_| config_err(format!("`{key}` expects a non-negative integer, got `{s}`")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool, ExperimentError> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("`{key}` expects true or false, got `{s}`"))),
    }
}

fn parse_initial(s: &str) -> Result<InitialCoinState, ExperimentError> {
    match s {
        "symmetric" => return Ok(InitialCoinState::symmetric()),
        "right" => return Ok(InitialCoinState::right()),
        "left" => return Ok(InitialCoinState::left()),
        _ => {}
    }
    let parts: Vec<f64> = s.split(',').map(parse_number).collect::<Result<_, _>>()?;
    let [ar, ai, br, bi] = parts[..] else {
        return Err(config_err(format!(
            "initial expects symmetric, right, left or `a_re, a_im, b_re, b_im`, got `{s}`"
        )));
    };
    InitialCoinState::new(Complex64::new(ar, ai), Complex64::new(br, bi)).map_err(|e| config_err(e.to_string()))
}
