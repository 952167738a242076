//! Purity `tr(rho^2)` of the noise-averaged walker.
//!
//! For bit flips the full position (x) coin density matrix is small enough
//! to evolve exactly at moderate times. Otherwise purity is estimated from
//! independent trajectories by the pairwise U-statistic
//! `1/(N(N-1)) sum_{i != j} |<psi_i|psi_j>|^2`, whose expectation is
//! `tr(rho^2)` for `rho = E[|psi><psi|]`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_probability, QwalkError, Result};
use crate::walk::{CoinAngle, InitialCoinState, Moments, WalkerState};

/// Largest density-matrix dimension `2 (2 t_max + 1)` evolved by default.
pub const DEFAULT_DIMENSION_GUARD: usize = 4096;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density matrix on `[-t_max, t_max] (x) {R, L}`.
///
/// Basis index of `(x, c)` is `2 (x + t_max) + c` with `c = 0` for `R`.
/// Entries outside the light cone `|x|, |y| <= t` stay zero.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    t_max: usize,
    t: usize,
    dim: usize,
    rho: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn localized(initial: InitialCoinState, t_max: usize, guard: usize) -> Result<Self> {
        let dim = 2 * (2 * t_max + 1);
        if dim > guard {
            return Err(QwalkError::DimensionGuard { dim, guard });
        }
        let mut rho = vec![ZERO; dim * dim];
        let o = 2 * t_max;
        let v = [initial.a0(), initial.b0()];
        for c in 0..2 {
            for d in 0..2 {
                rho[(o + c) * dim + o + d] = v[c] * v[d].conj();
            }
        }
        Ok(Self { t_max, t: 0, dim, rho, scratch: vec![ZERO; dim * dim] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `<x, c| rho |y, d>`, chirality 0 = R.
    pub fn entry(&self, x: i64, c: usize, y: i64, d: usize) -> Complex64 {
        let off = self.t_max as i64;
        let (i, j) = (x + off, y + off);
        if i < 0 || j < 0 || i > 2 * off || j > 2 * off {
            return ZERO;
        }
        self.rho[(2 * i as usize + c) * self.dim + 2 * j as usize + d]
    }

    fn cone_indices(&self) -> std::ops::Range<usize> {
        2 * (self.t_max - self.t)..2 * (self.t_max + self.t + 1)
    }

    /// One step `rho -> (1 - p) U rho U^+ + p U' rho U'^+` with `U' = (I (x) X) U`.
    pub fn step_bitflip(&mut self, coin: CoinAngle, p: f64) -> Result<()> {
        check_probability(p)?;
        if self.t >= self.t_max {
            return Err(QwalkError::LatticeBounds { t: self.t + 1, t_max: self.t_max });
        }
        let (c, s) = coin.cos_sin();
        let dim = self.dim;
        let cone = self.cone_indices();

        // rho -> C rho C, C real symmetric, on every 2x2 site block
        for r in cone.clone().step_by(2) {
            let (top, bottom) = self.rho.split_at_mut((r + 1) * dim);
            let row0 = &mut top[r * dim..];
            let row1 = &mut bottom[..dim];
            for col in cone.clone() {
                let (u, v) = (row0[col], row1[col]);
                row0[col] = u * c + v * s;
                row1[col] = u * s - v * c;
            }
        }
        for r in cone.clone() {
            let row = &mut self.rho[r * dim..(r + 1) * dim];
            for col in cone.clone().step_by(2) {
                let (u, v) = (row[col], row[col + 1]);
                row[col] = u * c + v * s;
                row[col + 1] = u * s - v * c;
            }
        }

        // shift (R: +1 site, L: -1 site) and flip mixing into scratch
        let new_cone = cone.start - 2..cone.end + 2;
        for r in new_cone.clone() {
            self.scratch[r * dim + new_cone.start..r * dim + new_cone.end].fill(ZERO);
        }
        let shifted = |idx: usize| if idx.is_multiple_of(2) { idx + 2 } else { idx - 2 };
        let (keep, flip) = (1.0 - p, p);
        for r in cone.clone() {
            let (r_keep, r_flip) = (shifted(r), shifted(r) ^ 1);
            let src = &self.rho[r * dim..(r + 1) * dim];
            for col in cone.clone() {
                let v = src[col];
                let c_keep = shifted(col);
                self.scratch[r_keep * dim + c_keep] += v * keep;
                if flip != 0.0 {
                    self.scratch[r_flip * dim + (c_keep ^ 1)] += v * flip;
                }
            }
        }
        std::mem::swap(&mut self.rho, &mut self.scratch);
        // old cone in scratch is stale but fully overwritten before next use
        self.t += 1;
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.cone_indices().map(|i| self.rho[i * self.dim + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        let cone = self.cone_indices();
        cone.clone()
            .map(|r| self.rho[r * self.dim + cone.start..r * self.dim + cone.end].iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let cone = self.cone_indices();
        let mut worst = 0.0f64;
        for i in cone.clone() {
            for j in cone.clone() {
                worst = worst.max((self.rho[i * self.dim + j] - self.rho[j * self.dim + i].conj()).norm());
            }
        }
        worst
    }

    pub fn position_moments(&self) -> Moments {
        let off = self.t_max as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in self.cone_indices() {
            let x = (i / 2) as f64 - off;
            let px = self.rho[i * self.dim + i].re;
            m1 += x * px;
            m2 += x * x * px;
        }
        Moments::from_raw(m1, m2)
    }

    /// Dense copy of the light-cone block, row-major, with its side length.
    pub fn cone_block(&self) -> (usize, Vec<Complex64>) {
        let cone = self.cone_indices();
        let n = cone.len();
        let mut out = Vec::with_capacity(n * n);
        for r in cone.clone() {
            out.extend_from_slice(&self.rho[r * self.dim + cone.start..r * self.dim + cone.end]);
        }
        (n, out)
    }
}

/// `Pi(t)` for `t = 0..=t_final` under bit-flip noise, by exact evolution.
pub fn purity_exact_bitflip(
    coin: CoinAngle,
    p: f64,
    initial: InitialCoinState,
    t_final: usize,
    guard: usize,
) -> Result<Vec<f64>> {
    check_probability(p)?;
    let mut rho = DensityMatrix::localized(initial, t_final, guard)?;
    let mut out = Vec::with_capacity(t_final + 1);
    out.push(rho.purity());
    for _ in 0..t_final {
        rho.step_bitflip(coin, p)?;
        out.push(rho.purity());
    }
    Ok(out)
}

/// Largest `|Pi_p(t) - Pi_{1-p}(t)|` over `t <= t_final`.
pub fn purity_symmetry_gap(coin: CoinAngle, p: f64, initial: InitialCoinState, t_final: usize) -> Result<f64> {
    let a = purity_exact_bitflip(coin, p, initial, t_final, DEFAULT_DIMENSION_GUARD)?;
    let b = purity_exact_bitflip(coin, 1.0 - p, initial, t_final, DEFAULT_DIMENSION_GUARD)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Whether the purity series for `p` and `1 - p` agree within `1e-10`.
///
/// The symmetry holds for the Hadamard coin; other angles break it.
pub fn purity_symmetry_check(coin: CoinAngle, p: f64, initial: InitialCoinState, t_final: usize) -> Result<bool> {
    Ok(purity_symmetry_gap(coin, p, initial, t_final)? < 1e-10)
}

/// Pairwise purity estimate with the standard error of the U-statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityEstimate {
    pub value: f64,
    pub stderr: f64,
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

/// Pairwise estimator over states flattened to a common basis.
pub(crate) fn pairwise_purity_flat(states: &[Vec<Complex64>]) -> Result<PurityEstimate> {
    let n = states.len();
    if n < 2 {
        return Err(QwalkError::TooFewTrajectories(n));
    }
    // row i holds |<psi_i|psi_j>|^2 for j > i
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| states[i + 1..].iter().map(|s| dot(&states[i], s).norm_sqr()).collect())
        .collect();
    let mut per_state = vec![0.0; n];
    let mut total = 0.0;
    for (i, row) in rows.iter().enumerate() {
        for (k, &h) in row.iter().enumerate() {
            per_state[i] += h;
            per_state[i + 1 + k] += h;
            total += h;
        }
    }
    let nf = n as f64;
    let value = 2.0 * total / (nf * (nf - 1.0));
    let h_bar: Vec<f64> = per_state.iter().map(|s| s / (nf - 1.0)).collect();
    let var = h_bar.iter().map(|h| (h - value) * (h - value)).sum::<f64>() / (nf - 1.0);
    Ok(PurityEstimate { value, stderr: (4.0 * var / nf).sqrt() })
}

/// Pairwise purity estimate from trajectories at a common time.
pub fn purity_mc_pairwise(trajectories: &[WalkerState]) -> Result<PurityEstimate> {
    if trajectories.len() < 2 {
        return Err(QwalkError::TooFewTrajectories(trajectories.len()));
    }
    let t = trajectories.iter().map(WalkerState::t).max().unwrap_or(0) as i64;
    let flat: Vec<Vec<Complex64>> = trajectories
        .iter()
        .map(|s| {
            (-t..=t)
                .flat_map(|x| {
                    let (a, b) = s.amplitude(x);
                    [a, b]
                })
                .collect()
        })
        .collect();
    pairwise_purity_flat(&flat)
}
