//! Stochastic-trajectory simulation of noisy walks.
//!
//! Both noise models are unitary per realization: a bit flip swaps the two
//! chiralities after the step, and a broken link `(x, x+1)` bounces the flux
//! that would cross it back into the other chirality at the same site. The
//! noise-averaged state is recovered by ensembles of independently seeded
//! trajectories ([`run_ensemble`]).

mod ensemble;
mod purity;
mod regression;

pub use ensemble::{
    final_states, run_ensemble, run_ensemble_with_workers, EnsembleConfig, EnsembleResult, PurityPoint,
    VarianceMode,
};
pub use purity::{
    purity_exact_bitflip, purity_mc_pairwise, purity_symmetry_check, purity_symmetry_gap, DensityMatrix,
    PurityEstimate, DEFAULT_DIMENSION_GUARD,
};
pub use regression::{estimate_dq, fit_line, DqEstimate, LineFit, WindowSpec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{check_probability, QwalkError, Result};
use crate::walk::{CoinAngle, WalkerState};

/// Per-trajectory generator.
pub type TrajectoryRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Coherent,
    /// Chirality flip after each step with probability `p`.
    BitFlip { p: f64 },
    /// Every link is broken independently with probability `p_tilde` per step.
    BrokenLinks { p_tilde: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Coherent => Ok(()),
            NoiseModel::BitFlip { p } => check_probability(p).map(drop),
            NoiseModel::BrokenLinks { p_tilde } => check_probability(p_tilde).map(drop),
        }
    }

    /// Rate of decoherent events per step; zero for coherent walks.
    pub fn rate(&self) -> f64 {
        match *self {
            NoiseModel::Coherent => 0.0,
            NoiseModel::BitFlip { p } => p,
            NoiseModel::BrokenLinks { p_tilde } => p_tilde,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Coherent => "coherent",
            NoiseModel::BitFlip { .. } => "bitflip",
            NoiseModel::BrokenLinks { .. } => "broken-links",
        }
    }
}

/// Mixes a master seed with a trajectory index (splitmix64 finalizer).
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator of trajectory `index` under `master` seed.
pub fn trajectory_rng(master: u64, index: u64) -> TrajectoryRng {
    ChaCha8Rng::seed_from_u64(mix64(master, index))
}

/// One step `U`, followed by `I_P (x) X` with probability `p`.
pub fn step_bitflip_trajectory<R: Rng + ?Sized>(
    state: &mut WalkerState,
    coin: CoinAngle,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    check_probability(p)?;
    state.step(coin)?;
    if rng.random_bool(p) {
        state.swap_chirality();
    }
    Ok(())
}

/// Broken/intact flags for the links `(x, x+1)`, `x` in `[-t_max, t_max - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkMask {
    t_max: usize,
    broken: Vec<bool>,
}

impl LinkMask {
    pub fn intact(t_max: usize) -> Self {
        Self { t_max, broken: vec![false; 2 * t_max] }
    }

    pub fn all_broken(t_max: usize) -> Self {
        Self { t_max, broken: vec![true; 2 * t_max] }
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.broken.len()
    }

    pub fn is_empty(&self) -> bool {
        self.broken.is_empty()
    }

    fn index(&self, x: i64) -> Option<usize> {
        let i = x + self.t_max as i64;
        (0..self.broken.len() as i64).contains(&i).then_some(i as usize)
    }

    /// Whether link `(x, x+1)` is broken; links off the lattice count as intact.
    pub fn is_broken(&self, x: i64) -> bool {
        self.index(x).is_some_and(|i| self.broken[i])
    }

    pub fn set(&mut self, x: i64, broken: bool) {
        if let Some(i) = self.index(x) {
            self.broken[i] = broken;
        }
    }

    pub fn broken_count(&self) -> usize {
        self.broken.iter().filter(|&&b| b).count()
    }

    /// Redraws the links `(x, x+1)` for `x` in `[x_lo, x_hi]`, each broken with
    /// probability `p_tilde`. Gaps between broken links are drawn from a
    /// geometric law, so the cost scales with the number of broken links.
    pub fn resample<R: Rng + ?Sized>(&mut self, p_tilde: f64, x_lo: i64, x_hi: i64, rng: &mut R) -> Result<()> {
        check_probability(p_tilde)?;
        let (Some(lo), Some(hi)) = (self.index(x_lo), self.index(x_hi)) else {
            return Err(QwalkError::InvalidConfig(format!(
                "link range [{x_lo}, {x_hi}] outside mask of half-width {}",
                self.t_max
            )));
        };
        let window = &mut self.broken[lo..=hi];
        if p_tilde == 0.0 {
            window.fill(false);
            return Ok(());
        }
        if p_tilde == 1.0 {
            window.fill(true);
            return Ok(());
        }
        window.fill(false);
        let gaps = Geometric::new(p_tilde).expect("p_tilde in (0, 1)");
        let mut i = gaps.sample(rng);
        while (i as usize) < window.len() {
            window[i as usize] = true;
            i = i.saturating_add(1).saturating_add(gaps.sample(rng));
        }
        Ok(())
    }
}

/// Fresh mask over the whole lattice, each link broken with probability `p_tilde`.
pub fn sample_link_mask<R: Rng + ?Sized>(p_tilde: f64, t_max: usize, rng: &mut R) -> Result<LinkMask> {
    let mut mask = LinkMask::intact(t_max);
    if t_max > 0 {
        mask.resample(p_tilde, -(t_max as i64), t_max as i64 - 1, rng)?;
    }
    Ok(mask)
}

/// Coin everywhere, then shift with flux across broken links diverted into
/// the other chirality at the same site.
///
/// Link `(x, x+1)` carries `a'_x` right and `b'_{x+1}` left. When it is
/// broken they land in `b_x` and `a_{x+1}` instead, which after the ordinary
/// shift is a swap of `a_{x+1}` and `b_x`.
pub fn step_broken_links(state: &mut WalkerState, coin: CoinAngle, mask: &LinkMask) -> Result<()> {
    if mask.t_max() != state.t_max() {
        return Err(QwalkError::InvalidConfig(format!(
            "link mask half-width {} does not match lattice half-width {}",
            mask.t_max(),
            state.t_max()
        )));
    }
    let t = state.t() as i64;
    state.step(coin)?;
    let off = state.t_max() as i64;
    let (a, b) = state.chiralities_mut();
    for x in -t - 1..=t {
        if mask.is_broken(x) {
            let i = (x + off) as usize;
            std::mem::swap(&mut a[i + 1], &mut b[i]);
        }
    }
    Ok(())
}
