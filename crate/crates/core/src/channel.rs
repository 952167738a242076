//! k-space superoperator machinery for the bit-flip channel.
//!
//! The coin-reduced density operator at wavenumber `k` is written as
//! `chi = I/2 + r1 X + r2 Y + r3 Z`. One noisy step, flip then `U_k`, acts on
//! `(r1, r2, r3)` as the real 3x3 transfer matrix `M_k` built by
//! [`transfer_matrix_bitflip`]. With `q = 1 - 2p` the long-time spreading
//! rate is `D_q = 1 + 2 Gbar_33`, where `Gbar` is the k-average of the
//! resolvent `G_k = (I - M_k)^-1 M_k`; the closed form of `Gbar_33` is in
//! [`gbar33_closed`] and the quadrature route in [`gbar_numeric`].

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{check_probability, QwalkError, Result};
use crate::numeric::CompensatedSum;
use crate::walk::{CoinAngle, InitialCoinState};

/// Below this `|cos 2theta|` (or `|sin 2theta|`) the closed form switches to
/// its exact limit values.
const DEGENERATE_EPS: f64 = 1e-9;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 2048;

/// Bloch components `(r1, r2, r3)` of a coin state, `|r| <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliVector(Vector3<f64>);

impl PauliVector {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        let r = Vector3::new(r1, r2, r3);
        if r.norm_squared() <= 0.25 + 1e-12 {
            Ok(Self(r))
        } else {
            Err(QwalkError::InvalidConfig(format!(
                "Pauli vector ({r1}, {r2}, {r3}) lies outside the Bloch ball of radius 1/2"
            )))
        }
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    /// `r_j = tr(chi sigma_j) / 2` for `chi = |chi0><chi0|`.
    pub fn from_coin_state(state: &InitialCoinState) -> Self {
        let (a, b) = (state.a0(), state.b0());
        let ab = a.conj() * b;
        Self(Vector3::new(ab.re, ab.im, 0.5 * (a.norm_sqr() - b.norm_sqr())))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// `M_k` for given `k`, `theta` and `q = 1 - 2p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m: Matrix3<f64>,
    pub k: f64,
    pub theta: f64,
    pub q: f64,
}

impl TransferMatrix {
    pub fn apply(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.m * r
    }

    /// Moduli of the three eigenvalues, largest first.
    pub fn eigenvalue_moduli(&self) -> [f64; 3] {
        let ev = self.m.complex_eigenvalues();
        let mut out = [ev[0].norm(), ev[1].norm(), ev[2].norm()];
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }
}

pub fn transfer_matrix_bitflip(k: f64, coin: CoinAngle, p: f64) -> Result<TransferMatrix> {
    let q = 1.0 - 2.0 * check_probability(p)?;
    let theta = coin.theta();
    let (s2t, c2t) = (2.0 * theta).sin_cos();
    let (s2k, c2k) = (2.0 * k).sin_cos();
    #[rustfmt::skip]
    let m = Matrix3::new(
        -c2t * c2k,  q * s2k,   q * s2t * c2k,
        -c2t * s2k, -q * c2k,   q * s2t * s2k,
         s2t,        0.0,       q * c2t,
    );
    Ok(TransferMatrix { m, k, theta, q })
}

/// `R' = M_k R`.
pub fn step_channel(chi: PauliVector, tm: &TransferMatrix) -> PauliVector {
    PauliVector(tm.apply(&chi.0))
}

/// `1 - q^2 = 4 p (1 - p)`, without the cancellation of the left side.
fn one_minus_q2(p: f64) -> f64 {
    4.0 * p * (1.0 - p)
}

/// `det(I - M_k) = (1 - q^2)(1 + cos 2theta cos 2k)`.
pub fn det_resolvent(k: f64, coin: CoinAngle, p: f64) -> f64 {
    one_minus_q2(p) * (1.0 + (2.0 * coin.theta()).cos() * (2.0 * k).cos())
}

/// Which branch of the closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Generic,
    /// `|theta| = pi/4`: the coin-dependent term vanishes.
    HadamardLimit,
    /// `theta = 0`: the walker reverses with probability `p`.
    ThetaZero,
    /// `|theta| = pi/2`: the walker keeps its direction with probability `p`.
    ThetaHalfPi,
    /// `p = 1/2`: classical diffusion, `D_q = 1`.
    ClassicalPHalf,
}

/// `(1 - |sin 2theta|) / cos 2theta` with its removable singularity filled in.
fn coin_term(coin: CoinAngle) -> (f64, Regime) {
    let (s2t, c2t) = (2.0 * coin.theta()).sin_cos();
    if c2t.abs() < DEGENERATE_EPS {
        (0.0, Regime::HadamardLimit)
    } else if s2t.abs() < DEGENERATE_EPS {
        if c2t > 0.0 {
            (1.0, Regime::ThetaZero)
        } else {
            (-1.0, Regime::ThetaHalfPi)
        }
    } else {
        ((1.0 - s2t.abs()) / c2t, Regime::Generic)
    }
}

fn check_open_interval(p: f64) -> Result<f64> {
    check_probability(p)?;
    if p == 0.0 || p == 1.0 {
        Err(QwalkError::Divergent(p))
    } else {
        Ok(p)
    }
}

/// `Gbar_33 = q/(1 - q^2) [q + (1 - |sin 2theta|)/cos 2theta]`.
pub fn gbar33_closed(coin: CoinAngle, p: f64) -> Result<f64> {
    let p = check_open_interval(p)?;
    let q = 1.0 - 2.0 * p;
    let (term, _) = coin_term(coin);
    Ok(q / one_minus_q2(p) * (q + term))
}

/// Long-time slope of the position variance under bit-flip noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingRate {
    pub dq: f64,
    pub regime: Regime,
}

pub fn spreading_rate_closed(coin: CoinAngle, p: f64) -> Result<SpreadingRate> {
    let gbar = gbar33_closed(coin, p)?;
    let regime = if p == 0.5 { Regime::ClassicalPHalf } else { coin_term(coin).1 };
    Ok(SpreadingRate { dq: 1.0 + 2.0 * gbar, regime })
}

/// Uniform trapezoid on `[-pi, pi)` with nodes at half-step offsets,
/// `k_j = -pi + (j + 1/2) 2pi/n`.
///
/// `n` must be a multiple of 4: odd `n` puts a node on `k = 0` and
/// `n = 2 mod 4` puts nodes on `k = +-pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureGrid {
    n: usize,
}

impl QuadratureGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(4) {
            return Err(QwalkError::InvalidConfig(format!(
                "quadrature node count {n} must be a positive multiple of 4"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Weight of each node in the normalized measure `dk / 2pi`.
    pub fn weight(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = 2.0 * PI / self.n as f64;
        (0..self.n).map(move |j| -PI + (j as f64 + 0.5) * h)
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self { n: DEFAULT_NODES }
    }
}

/// `G_k = (I - M_k)^-1 M_k`.
pub fn resolvent(tm: &TransferMatrix) -> Option<Matrix3<f64>> {
    (Matrix3::identity() - tm.m).lu().solve(&tm.m)
}

/// k-average of the resolvent, `Gbar`.
pub fn gbar_numeric(coin: CoinAngle, p: f64, grid: &QuadratureGrid) -> Result<Matrix3<f64>> {
    let p = check_open_interval(p)?;
    let mut acc = [CompensatedSum::default(); 9];
    for k in grid.nodes() {
        // The closed-form determinant flags singular nodes more reliably than LU pivots.
        if det_resolvent(k, coin, p).abs() < 1e-14 {
            return Err(QwalkError::QuadratureSingular(k));
        }
        let tm = transfer_matrix_bitflip(k, coin, p)?;
        let g = resolvent(&tm).ok_or(QwalkError::QuadratureSingular(k))?;
        for (sum, v) in acc.iter_mut().zip(g.iter()) {
            sum.add(*v);
        }
    }
    let w = grid.weight();
    Ok(Matrix3::from_iterator(acc.iter().map(|s| s.value() * w)))
}

/// Exact moment series `<x>(t)` and `<x^2>(t)` for `t = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTimeMoments {
    pub mean: Vec<f64>,
    pub second: Vec<f64>,
}

impl FiniteTimeMoments {
    pub fn variance(&self) -> Vec<f64> {
        self.mean.iter().zip(&self.second).map(|(m, s)| s - m * m).collect()
    }

    /// `<x^2>(t) - <x^2>(t - 1)` for `t = 1..=steps`.
    pub fn second_increments(&self) -> Vec<f64> {
        self.second.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Finite-time position moments of the bit-flip walk, with the flip applied
/// after each coin-and-shift step:
///
/// ```text
/// <x>   = 2 sum_{j=1..t} avg_k [M_k^(j-1) U_k R]_3
/// <x^2> = t + 2 sum_{j=1..t} sum_{m=1..j-1} avg_k [M_k^m e3]_3
/// ```
///
/// where `U_k` is `M_k` at `p = 0`. Flipping before the step instead would
/// give `M_k^j R` in the first sum; the two agree whenever `R_3 = 0`.
///
/// Powers are carried as running vectors per node, so the cost is
/// `O(nodes * steps)`.
pub fn moments_finite_time(
    initial: PauliVector,
    coin: CoinAngle,
    p: f64,
    steps: usize,
    grid: &QuadratureGrid,
) -> Result<FiniteTimeMoments> {
    let p = check_open_interval(p)?;
    if steps == 0 {
        return Err(QwalkError::InvalidConfig("finite-time moments need at least one step".into()));
    }
    // first[j] = avg_k [M^(j-1) U R]_3, corr[m] = avg_k [M^m e3]_3
    let mut first = vec![CompensatedSum::default(); steps + 1];
    let mut corr = vec![CompensatedSum::default(); steps + 1];
    for k in grid.nodes() {
        let tm = transfer_matrix_bitflip(k, coin, p)?;
        // the first displacement happens before any flip
        let mut r = transfer_matrix_bitflip(k, coin, 0.0)?.m * initial.as_vector();
        let mut v = Vector3::z();
        for j in 1..=steps {
            if j > 1 {
                r = tm.m * r;
            }
            v = tm.m * v;
            first[j].add(r.z);
            corr[j].add(v.z);
        }
    }
    let w = grid.weight();
    let mut mean = Vec::with_capacity(steps + 1);
    let mut second = Vec::with_capacity(steps + 1);
    let (mut m1, mut m2, mut inner) = (0.0, 0.0, 0.0);
    mean.push(0.0);
    second.push(0.0);
    for j in 1..=steps {
        m1 += 2.0 * w * first[j].value();
        // inner = sum_{m=1}^{j-1} corr[m]
        if j > 1 {
            inner += w * corr[j - 1].value();
        }
        m2 += 1.0 + 2.0 * inner;
        mean.push(m1);
        second.push(m2);
    }
    Ok(FiniteTimeMoments { mean, second })
}

/// Largest eigenvalue modulus of `M_k` over the grid nodes.
pub fn spectral_check(coin: CoinAngle, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    check_probability(p)?;
    let mut worst = 0.0f64;
    for k in grid.nodes() {
        let tm = transfer_matrix_bitflip(k, coin, p)?;
        worst = worst.max(tm.eigenvalue_moduli()[0]);
    }
    Ok(worst)
}
