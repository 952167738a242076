use thiserror::Error;

/// Errors raised by the walk, channel and ensemble routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QwalkError {
    #[error("coin angle {0} rad outside [-pi/2, pi/2]")]
    AngleOutOfRange(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("initial coin state not normalized: |a0|^2 + |b0|^2 = {0}")]
    NotNormalized(f64),

    #[error("light cone at t = {t} would leave a lattice of half-width {t_max}")]
    LatticeBounds { t: usize, t_max: usize },

    #[error("spreading rate diverges for p = {0} (coherent regime)")]
    Divergent(f64),

    #[error("I - M_k is singular at quadrature node k = {0}")]
    QuadratureSingular(f64),

    #[error("regression window [{t_lo}, {t_hi}] holds fewer than {min} samples")]
    WindowTooShort { t_lo: usize, t_hi: usize, min: usize },

    #[error("density matrix dimension {dim} exceeds guard {guard}")]
    DimensionGuard { dim: usize, guard: usize },

    #[error("pairwise purity needs at least 2 trajectories, got {0}")]
    TooFewTrajectories(usize),

    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, QwalkError>;

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(QwalkError::InvalidProbability(p))
    }
}
