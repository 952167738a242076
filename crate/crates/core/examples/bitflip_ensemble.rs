//! Monte Carlo bit-flip trajectories and the fitted spreading rate.
//!
//! `cargo run --release --example bitflip_ensemble -- [theta/pi] [p] [walkers]`

use qwalk::channel::spreading_rate_closed;
use qwalk::noise::{run_ensemble, EnsembleConfig, NoiseModel};
use qwalk::walk::CoinAngle;

fn main() -> qwalk::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let units = args.first().copied().unwrap_or(0.25);
    let p = args.get(1).copied().unwrap_or(0.05);
    let walkers = args.get(2).map_or(400, |&w| w as usize);

    let coin = CoinAngle::from_pi_units(units)?;
    let config = EnsembleConfig::new(coin, NoiseModel::BitFlip { p }).with_size(walkers, 1000).with_seed(17);
    let result = run_ensemble(&config)?;
    for t in [10, 100, 500, 1000] {
        println!("t = {t:>4}: var = {:.2}", result.var_x[t]);
    }
    let closed = spreading_rate_closed(coin, p)?.dq;
    match result.dq {
        Some(est) => println!(
            "fit over {:?}: D = {:.3} +- {:.3}, closed form {closed:.3}, relative {:+.3}",
            est.window,
            est.slope,
            est.stderr,
            est.slope / closed - 1.0
        ),
        None => println!("fit window too short for p = {p}"),
    }
    Ok(())
}
