//! Seeded trajectory ensembles.
//!
//! Trajectory `i` draws from its own generator seeded with
//! `mix64(master_seed, i)`. Trajectories run in parallel in fixed-size
//! chunks and their moment series are summed in index order, so a result
//! depends only on the configuration, never on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::purity::{pairwise_purity_flat, PurityEstimate};
use super::regression::{estimate_dq, DqEstimate, WindowSpec};
use super::{step_bitflip_trajectory, step_broken_links, trajectory_rng, LinkMask, NoiseModel};
use crate::error::{QwalkError, Result};
use crate::walk::{CoinAngle, InitialCoinState, WalkerState};

const CHUNK: usize = 64;

/// How the ensemble variance is formed from per-trajectory moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// Variance of the noise-averaged distribution, `E[<x^2>] - E[<x>]^2`.
    #[default]
    Mixture,
    /// Average of the per-trajectory variances, `E[<x^2> - <x>^2]`.
    TrajectoryMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub coin: CoinAngle,
    pub noise: NoiseModel,
    pub initial: InitialCoinState,
    pub steps: usize,
    pub walkers: usize,
    pub master_seed: u64,
    pub record_purity: bool,
    /// Times at which the pairwise purity is estimated. Empty means a
    /// log-spaced default.
    pub purity_times: Vec<usize>,
    pub variance_mode: VarianceMode,
    pub window: WindowSpec,
}

impl EnsembleConfig {
    /// 1000 walkers for 1000 steps from the symmetric coin state.
    pub fn new(coin: CoinAngle, noise: NoiseModel) -> Self {
        Self {
            coin,
            noise,
            initial: InitialCoinState::default(),
            steps: 1000,
            walkers: 1000,
            master_seed: 0,
            record_purity: false,
            purity_times: Vec::new(),
            variance_mode: VarianceMode::Mixture,
            window: WindowSpec::default(),
        }
    }

    pub fn with_size(mut self, walkers: usize, steps: usize) -> Self {
        self.walkers = walkers;
        self.steps = steps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.walkers == 0 {
            return Err(QwalkError::InvalidConfig("walkers must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(QwalkError::InvalidConfig("steps must be at least 1".into()));
        }
        if self.record_purity && self.walkers < 2 {
            return Err(QwalkError::TooFewTrajectories(self.walkers));
        }
        if let Some(&t) = self.purity_times.iter().find(|&&t| t > self.steps) {
            return Err(QwalkError::InvalidConfig(format!("purity time {t} beyond {} steps", self.steps)));
        }
        self.noise.validate()
    }

    fn checkpoints(&self) -> Vec<usize> {
        if !self.record_purity {
            return Vec::new();
        }
        let mut times = if self.purity_times.is_empty() {
            let n = 12;
            (0..n)
                .map(|i| (self.steps as f64).powf(i as f64 / (n - 1) as f64).round() as usize)
                .collect()
        } else {
            self.purity_times.clone()
        };
        times.sort_unstable();
        times.dedup();
        times
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityPoint {
    pub t: usize,
    pub estimate: PurityEstimate,
}

/// Ensemble time series for `t = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub mean_x: Vec<f64>,
    pub var_x: Vec<f64>,
    pub purity: Option<Vec<PurityPoint>>,
    pub dq: Option<DqEstimate>,
}

impl EnsembleResult {
    pub fn from_series(mean_x: Vec<f64>, var_x: Vec<f64>) -> Self {
        Self { mean_x, var_x, purity: None, dq: None }
    }

    pub fn steps(&self) -> usize {
        self.var_x.len().saturating_sub(1)
    }
}

struct Trajectory {
    mean: Vec<f64>,
    second: Vec<f64>,
    snapshots: Vec<Vec<Complex64>>,
}

/// Light-cone amplitudes `(a_x, b_x)` interleaved.
fn snapshot(state: &WalkerState) -> Vec<Complex64> {
    let t = state.t() as i64;
    (-t..=t)
        .flat_map(|x| {
            let (a, b) = state.amplitude(x);
            [a, b]
        })
        .collect()
}

fn advance(
    state: &mut WalkerState,
    config: &EnsembleConfig,
    rng: &mut super::TrajectoryRng,
    mask: &mut Option<LinkMask>,
) -> Result<()> {
    match config.noise {
        NoiseModel::Coherent => state.step(config.coin),
        NoiseModel::BitFlip { p } => step_bitflip_trajectory(state, config.coin, p, rng),
        NoiseModel::BrokenLinks { p_tilde } => {
            let mask = mask.get_or_insert_with(|| LinkMask::intact(state.t_max()));
            // only links the amplitude can reach this step
            let t = state.t() as i64;
            mask.resample(p_tilde, -t - 1, t, rng)?;
            step_broken_links(state, config.coin, mask)
        }
    }
}

fn run_trajectory(config: &EnsembleConfig, index: usize, checkpoints: &[usize]) -> Result<Trajectory> {
    let mut rng = trajectory_rng(config.master_seed, index as u64);
    let mut state = WalkerState::localized(config.initial, config.steps);
    let mut mask = None;
    let mut mean = Vec::with_capacity(config.steps + 1);
    let mut second = Vec::with_capacity(config.steps + 1);
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().peekable();
    for t in 0..=config.steps {
        if t > 0 {
            advance(&mut state, config, &mut rng, &mut mask)?;
        }
        let m = state.moments();
        mean.push(m.mean);
        second.push(m.second);
        if next_cp.next_if_eq(&&t).is_some() {
            snapshots.push(snapshot(&state));
        }
    }
    Ok(Trajectory { mean, second, snapshots })
}

/// Evolves `config.walkers` trajectories and averages their moments.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleResult> {
    config.validate()?;
    let checkpoints = config.checkpoints();
    let len = config.steps + 1;
    let mut sum_mean = vec![0.0; len];
    let mut sum_second = vec![0.0; len];
    let mut sum_var = vec![0.0; len];
    let mut snapshots: Vec<Vec<Vec<Complex64>>> = vec![Vec::new(); checkpoints.len()];

    for start in (0..config.walkers).step_by(CHUNK) {
        let end = (start + CHUNK).min(config.walkers);
        let chunk: Vec<Trajectory> = (start..end)
            .into_par_iter()
            .map(|i| run_trajectory(config, i, &checkpoints))
            .collect::<Result<_>>()?;
        for traj in chunk {
            for t in 0..len {
                let (m, s) = (traj.mean[t], traj.second[t]);
                sum_mean[t] += m;
                sum_second[t] += s;
                sum_var[t] += (s - m * m).max(0.0);
            }
            for (slot, snap) in snapshots.iter_mut().zip(traj.snapshots) {
                slot.push(snap);
            }
        }
    }

    let n = config.walkers as f64;
    let mean_x: Vec<f64> = sum_mean.iter().map(|s| s / n).collect();
    let var_x: Vec<f64> = match config.variance_mode {
        VarianceMode::Mixture => {
            sum_second.iter().zip(&mean_x).map(|(s, m)| (s / n - m * m).max(0.0)).collect()
        }
        VarianceMode::TrajectoryMean => sum_var.iter().map(|s| s / n).collect(),
    };

    let purity = if config.record_purity {
        let points = checkpoints
            .iter()
            .zip(&snapshots)
            .map(|(&t, states)| pairwise_purity_flat(states).map(|estimate| PurityPoint { t, estimate }))
            .collect::<Result<Vec<_>>>()?;
        Some(points)
    } else {
        None
    };

    let mut result = EnsembleResult { mean_x, var_x, purity, dq: None };
    let rate = config.noise.rate();
    if rate > 0.0 {
        result.dq = estimate_dq(&result, rate, &config.window).ok();
    }
    Ok(result)
}

/// [`run_ensemble`] on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers(config: &EnsembleConfig, workers: usize) -> Result<EnsembleResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| QwalkError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(config))
}

/// Final states of every trajectory, in index order.
pub fn final_states(config: &EnsembleConfig) -> Result<Vec<WalkerState>> {
    config.validate()?;
    (0..config.walkers)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(config.master_seed, i as u64);
            let mut state = WalkerState::localized(config.initial, config.steps);
            let mut mask = None;
            for _ in 0..config.steps {
                advance(&mut state, config, &mut rng, &mut mask)?;
            }
            Ok(state)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::evolve_coherent;

    #[test]
    fn coherent_ensemble_matches_single_walk() {
        let coin = CoinAngle::new(0.5).unwrap();
        let config = EnsembleConfig::new(coin, NoiseModel::Coherent).with_size(5, 40);
        let result = run_ensemble(&config).unwrap();
        let walk = evolve_coherent(InitialCoinState::default(), coin, 40).unwrap().moments();
        assert!((result.mean_x[40] - walk.mean).abs() < 1e-12);
        assert!((result.var_x[40] - walk.variance).abs() < 1e-10);
        assert!(result.dq.is_none());
        assert_eq!(result.var_x[0], 0.0);
    }

    #[test]
    fn trajectory_mean_variance_is_smaller() {
        let config = EnsembleConfig {
            variance_mode: VarianceMode::TrajectoryMean,
            ..EnsembleConfig::new(CoinAngle::hadamard(), NoiseModel::BitFlip { p: 0.1 }).with_size(20, 100)
        };
        let per_traj = run_ensemble(&config).unwrap();
        let mixture = run_ensemble(&EnsembleConfig { variance_mode: VarianceMode::Mixture, ..config }).unwrap();
        for t in 0..=100 {
            assert!(per_traj.var_x[t] <= mixture.var_x[t] + 1e-9);
        }
    }

    #[test]
    fn invalid_configs() {
        let base = EnsembleConfig::new(CoinAngle::hadamard(), NoiseModel::BitFlip { p: 0.1 });
        assert!(run_ensemble(&base.clone().with_size(0, 10)).is_err());
        assert!(run_ensemble(&base.clone().with_size(3, 0)).is_err());
        let bad = EnsembleConfig::new(CoinAngle::hadamard(), NoiseModel::BrokenLinks { p_tilde: -0.1 });
        assert_eq!(run_ensemble(&bad), Err(QwalkError::InvalidProbability(-0.1)));
    }

    #[test]
    fn default_checkpoints_are_log_spaced() {
        let config = EnsembleConfig { record_purity: true, ..EnsembleConfig::new(CoinAngle::hadamard(), NoiseModel::Coherent).with_size(2, 1000) };
        let cps = config.checkpoints();
        assert_eq!(cps.first(), Some(&1));
        assert_eq!(cps.last(), Some(&1000));
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coherent_purity_is_one() {
        let config = EnsembleConfig {
            record_purity: true,
            purity_times: vec![0, 5, 20],
            ..EnsembleConfig::new(CoinAngle::new(0.3).unwrap(), NoiseModel::Coherent).with_size(4, 20)
        };
        let result = run_ensemble(&config).unwrap();
        for pt in result.purity.unwrap() {
            assert!((pt.estimate.value - 1.0).abs() < 1e-12, "t={} {:?}", pt.t, pt.estimate);
        }
    }
}
