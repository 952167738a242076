//! Purity of the noise-averaged state: exact density-matrix evolution
//! against the pairwise trajectory estimator.

use qwalk::noise::{purity_exact_bitflip, run_ensemble, EnsembleConfig, NoiseModel, DEFAULT_DIMENSION_GUARD};
use qwalk::walk::{CoinAngle, InitialCoinState};

fn main() -> qwalk::Result<()> {
    let coin = CoinAngle::hadamard();
    let p = 0.1;
    let exact = purity_exact_bitflip(coin, p, InitialCoinState::symmetric(), 300, DEFAULT_DIMENSION_GUARD)?;

    let config = EnsembleConfig {
        record_purity: true,
        purity_times: vec![10, 30, 100, 300],
        ..EnsembleConfig::new(coin, NoiseModel::BitFlip { p })
    }
    .with_size(400, 300)
    .with_seed(11);
    let mc = run_ensemble(&config)?.purity.unwrap_or_default();

    println!("{:>4} {:>10} {:>18}", "t", "exact", "pairwise");
    for pt in &mc {
        println!("{:>4} {:>10.5} {:>10.5} +- {:.5}", pt.t, exact[pt.t], pt.estimate.value, pt.estimate.stderr);
    }
    let slope = (exact[300].ln() - exact[150].ln()) / (300f64.ln() - 150f64.ln());
    println!("log-log slope over [150, 300]: {slope:.3}");
    Ok(())
}
