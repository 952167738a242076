//! Decoherent discrete-time quantum walks on a line.
//!
//! The walker carries a two-level coin, `|R>` and `|L>`, and moves one site
//! per step. The coin is the one-parameter family
//!
//! ```text
//! U_C(theta) = [[cos theta,  sin theta],
//!               [sin theta, -cos theta]]      theta in [-pi/2, pi/2]
//! ```
//!
//! which contains Z (`theta = 0`), the Hadamard coin (`theta = pi/4`) and
//! X (`theta = pi/2`).
//!
//! The crate is split by job:
//!
//! * [`walk`] holds the coherent state on a bounded lattice, the coin and
//!   shift, and position moments.
//! * [`channel`] is the k-space machinery for the bit-flip channel: the
//!   3x3 Pauli transfer matrix `M_k`, its resolvent, quadrature, the closed
//!   form of the spreading rate `D_q(theta, p)` and exact finite-time moments.
//! * [`noise`] simulates noisy trajectories (bit flips and randomly broken
//!   links), runs seeded ensembles, fits `D_q` by regression and measures
//!   purity, exactly for bit flips and by a pairwise estimator otherwise.
//! * [`experiment`] drives parameter sweeps and writes CSV, SVG and run
//!   manifests. The `qwalk` binary is a thin wrapper around it.
//!
//! ```
//! use qwalk::{channel, walk::CoinAngle};
//!
//! let hadamard = CoinAngle::hadamard();
//! let rate = channel::spreading_rate_closed(hadamard, 0.1).unwrap();
//! assert!((rate.dq - 1.64 / 0.36).abs() < 1e-12);
//! ```

pub mod channel;
pub mod error;
pub mod experiment;
pub mod noise;
mod numeric;
pub mod walk;

pub use error::{QwalkError, Result};
pub use num_complex::Complex64;
