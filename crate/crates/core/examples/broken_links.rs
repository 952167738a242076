//! Dynamically broken links: each step every link of the light cone is
//! broken with probability p. At theta = 0 the spreading rate matches the
//! bit-flip value (1 - p) / p; away from it the two models part ways.

use qwalk::channel::spreading_rate_closed;
use qwalk::noise::{run_ensemble, sample_link_mask, step_broken_links, trajectory_rng, EnsembleConfig, NoiseModel};
use qwalk::walk::{CoinAngle, InitialCoinState, WalkerState};

fn main() -> qwalk::Result<()> {
    // a single step through a fixed mask
    let mut rng = trajectory_rng(1, 0);
    let mask = sample_link_mask(0.3, 8, &mut rng)?;
    let mut state = WalkerState::localized(InitialCoinState::symmetric(), 8);
    step_broken_links(&mut state, CoinAngle::hadamard(), &mask)?;
    println!("{} of {} links broken, norm {:.15}", mask.broken_count(), mask.len(), state.norm_sqr());

    let p = 0.05;
    for units in [0.0, 0.1, 0.25] {
        let coin = CoinAngle::from_pi_units(units)?;
        let config = EnsembleConfig::new(coin, NoiseModel::BrokenLinks { p_tilde: p }).with_size(300, 800).with_seed(3);
        let result = run_ensemble(&config)?;
        let bitflip = spreading_rate_closed(coin, p)?.dq;
        if let Some(est) = result.dq {
            println!("theta = {units:.2} pi: D = {:.3}, bit-flip closed form {bitflip:.3}", est.slope);
        }
    }
    Ok(())
}
