//! Closed form against a direct k-space average, plus the spectral bound and
//! the finite-time approach to the asymptotic slope.

use qwalk::channel::{
    gbar33_closed, gbar_numeric, moments_finite_time, spectral_check, PauliVector, QuadratureGrid,
};
use qwalk::walk::{CoinAngle, InitialCoinState};

fn main() -> qwalk::Result<()> {
    let grid = QuadratureGrid::default();
    println!("{:>8} {:>6} {:>14} {:>10} {:>10}", "theta/pi", "p", "Gbar33", "|err|", "max|eig|");
    for units in [-1.0 / 3.0, 1.0 / 8.0, 0.25, 0.4] {
        let coin = CoinAngle::from_pi_units(units)?;
        for p in [0.01, 0.1, 0.5] {
            let closed = gbar33_closed(coin, p)?;
            let numeric = gbar_numeric(coin, p, &grid)?[(2, 2)];
            let eig = spectral_check(coin, p, &grid)?;
            println!("{units:>8.4} {p:>6} {closed:>14.8} {:>10.1e} {eig:>10.6}", (closed - numeric).abs());
        }
    }

    let coin = CoinAngle::hadamard();
    let p = 0.05;
    let chi = PauliVector::from_coin_state(&InitialCoinState::symmetric());
    let moments = moments_finite_time(chi, coin, p, 400, &grid)?;
    let inc = moments.second_increments();
    let dq = 1.0 + 2.0 * gbar33_closed(coin, p)?;
    println!("\nHadamard, p = {p}: D_q = {dq:.6}");
    for t in [10, 50, 100, 200, 400] {
        println!("  t = {t:>3}: d<x^2>/dt = {:.6}", inc[t - 1]);
    }
    Ok(())
}
