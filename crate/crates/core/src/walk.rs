//! Coherent walker state on a bounded lattice.
//!
//! Amplitudes live in two flat arrays, one per chirality, indexed by
//! `x + t_max` for `x` in `[-t_max, t_max]`. Every routine only touches the
//! light cone `|x| <= t`, outside of which the amplitudes are exactly zero.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{QwalkError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The angle `theta` of the coin `[[cos, sin], [sin, -cos]]`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoinAngle(f64);

impl CoinAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && (-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(QwalkError::AngleOutOfRange(theta))
        }
    }

    /// Builds the angle `units * pi`, so `0.25` is the Hadamard coin.
    pub fn from_pi_units(units: f64) -> Result<Self> {
        // Exact multiples keep cos/sin of the special angles as clean as f64 allows.
        let theta = match units {
            u if u == 0.5 => FRAC_PI_2,
            u if u == -0.5 => -FRAC_PI_2,
            u if u == 0.25 => FRAC_PI_4,
            u if u == -0.25 => -FRAC_PI_4,
            u => u * PI,
        };
        Self::new(theta)
    }

    pub fn hadamard() -> Self {
        Self(FRAC_PI_4)
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn pi_units(self) -> f64 {
        self.0 / PI
    }

    pub fn mirrored(self) -> Self {
        Self(-self.0)
    }

    /// `(cos theta, sin theta)`.
    pub fn cos_sin(self) -> (f64, f64) {
        (self.0.cos(), self.0.sin())
    }
}

pub fn coin_matrix(coin: CoinAngle) -> Matrix2<Complex64> {
    let (c, s) = coin.cos_sin();
    Matrix2::new(c, s, s, -c).map(|v| Complex64::new(v, 0.0))
}

/// Coin state `(a0, b0)` of the walker placed at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCoinState {
    a0: Complex64,
    b0: Complex64,
}

impl InitialCoinState {
    pub fn new(a0: Complex64, b0: Complex64) -> Result<Self> {
        let norm = a0.norm_sqr() + b0.norm_sqr();
        if (norm - 1.0).abs() <= 1e-12 {
            Ok(Self { a0, b0 })
        } else {
            Err(QwalkError::NotNormalized(norm))
        }
    }

    /// `(|R> + i|L>) / sqrt 2`, the default.
    pub fn symmetric() -> Self {
        Self {
            a0: Complex64::new(FRAC_1_SQRT_2, 0.0),
            b0: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    pub fn right() -> Self {
        Self { a0: Complex64::new(1.0, 0.0), b0: ZERO }
    }

    pub fn left() -> Self {
        Self { a0: ZERO, b0: Complex64::new(1.0, 0.0) }
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }
}

impl Default for InitialCoinState {
    fn default() -> Self {
        Self::symmetric()
    }
}

/// First two position moments and the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second: f64,
    pub variance: f64,
}

impl Moments {
    pub fn from_raw(mean: f64, second: f64) -> Self {
        Self { mean, second, variance: (second - mean * mean).max(0.0) }
    }
}

/// `P(x, t)` over `[-t_max, t_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    t_max: usize,
    p: Vec<f64>,
}

impl PositionDistribution {
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn prob(&self, x: i64) -> f64 {
        let idx = x + self.t_max as i64;
        if idx < 0 {
            return 0.0;
        }
        self.p.get(idx as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let off = self.t_max as i64;
        self.p.iter().enumerate().map(move |(i, &p)| (i as i64 - off, p))
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Pure walker state `sum_x |x> (a_x |R> + b_x |L>)` after `t` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    t_max: usize,
    t: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl WalkerState {
    /// Walker at the origin with coin state `initial`, room for `t_max` steps.
    pub fn localized(initial: InitialCoinState, t_max: usize) -> Self {
        let len = 2 * t_max + 1;
        let mut a = vec![ZERO; len];
        let mut b = vec![ZERO; len];
        a[t_max] = initial.a0;
        b[t_max] = initial.b0;
        Self { t_max, t: 0, a, b }
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `(a_x, b_x)`, zero outside the lattice.
    pub fn amplitude(&self, x: i64) -> (Complex64, Complex64) {
        match self.index(x) {
            Some(i) => (self.a[i], self.b[i]),
            None => (ZERO, ZERO),
        }
    }

    fn index(&self, x: i64) -> Option<usize> {
        let i = x + self.t_max as i64;
        (0..self.a.len() as i64).contains(&i).then_some(i as usize)
    }

    /// Index range of the light cone `|x| <= t`.
    pub(crate) fn cone(&self) -> std::ops::RangeInclusive<usize> {
        self.t_max - self.t..=self.t_max + self.t
    }

    pub fn right_movers(&self) -> &[Complex64] {
        &self.a
    }

    pub fn left_movers(&self) -> &[Complex64] {
        &self.b
    }

    pub(crate) fn chiralities_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.a, &mut self.b)
    }

    pub fn norm_sqr(&self) -> f64 {
        let cone = self.cone();
        self.a[cone.clone()]
            .iter()
            .zip(&self.b[cone])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum()
    }

    /// `I_P (x) U_C` on every site of the light cone.
    pub fn apply_coin(&mut self, coin: CoinAngle) {
        let (c, s) = coin.cos_sin();
        let cone = self.cone();
        for (a, b) in self.a[cone.clone()].iter_mut().zip(&mut self.b[cone]) {
            let (ax, bx) = (*a, *b);
            *a = ax * c + bx * s;
            *b = ax * s - bx * c;
        }
    }

    /// Conditional shift: right movers to `x + 1`, left movers to `x - 1`.
    pub fn apply_shift(&mut self) -> Result<()> {
        if self.t >= self.t_max {
            return Err(QwalkError::LatticeBounds { t: self.t + 1, t_max: self.t_max });
        }
        let (lo, hi) = (self.t_max - self.t, self.t_max + self.t);
        self.a.copy_within(lo..=hi, lo + 1);
        self.a[lo] = ZERO;
        self.b.copy_within(lo..=hi, lo - 1);
        self.b[hi] = ZERO;
        self.t += 1;
        Ok(())
    }

    /// One coherent step `U = S_0 (I_P (x) U_C)`.
    pub fn step(&mut self, coin: CoinAngle) -> Result<()> {
        if self.t >= self.t_max {
            return Err(QwalkError::LatticeBounds { t: self.t + 1, t_max: self.t_max });
        }
        self.apply_coin(coin);
        self.apply_shift()
    }

    /// `I_P (x) X`: swaps the chiralities at every site.
    pub fn swap_chirality(&mut self) {
        std::mem::swap(&mut self.a, &mut self.b);
    }

    pub fn distribution(&self) -> PositionDistribution {
        let p = self.a.iter().zip(&self.b).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        PositionDistribution { t_max: self.t_max, p }
    }

    pub fn moments(&self) -> Moments {
        let off = self.t_max as f64;
        let cone = self.cone();
        let start = *cone.start();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (i, (a, b)) in self.a[cone.clone()].iter().zip(&self.b[cone]).enumerate() {
            let x = (start + i) as f64 - off;
            let px = a.norm_sqr() + b.norm_sqr();
            m1 += x * px;
            m2 += x * x * px;
        }
        Moments::from_raw(m1, m2)
    }

    /// `<self|other>`; both states must share `t_max`.
    pub fn overlap(&self, other: &WalkerState) -> Complex64 {
        debug_assert_eq!(self.t_max, other.t_max);
        let t = self.t.max(other.t);
        let cone = self.t_max - t..=self.t_max + t;
        let mut acc = ZERO;
        for i in cone {
            acc += self.a[i].conj() * other.a[i] + self.b[i].conj() * other.b[i];
        }
        acc
    }
}

/// Evolves the origin-localized state `steps` times with the coherent step.
pub fn evolve_coherent(initial: InitialCoinState, coin: CoinAngle, steps: usize) -> Result<WalkerState> {
    let mut state = WalkerState::localized(initial, steps);
    for _ in 0..steps {
        state.step(coin)?;
    }
    Ok(state)
}
