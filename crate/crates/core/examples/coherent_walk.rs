//! Noise-free Hadamard walk: ballistic spreading and the two-peaked profile.

use qwalk::walk::{evolve_coherent, CoinAngle, InitialCoinState};

fn main() -> qwalk::Result<()> {
    let coin = CoinAngle::hadamard();
    let state = evolve_coherent(InitialCoinState::symmetric(), coin, 200)?;
    let dist = state.distribution();
    println!("norm after 200 steps: {:.15}", state.norm_sqr());

    let m = state.moments();
    println!("<x> = {:.6}, var = {:.3}, var / t^2 = {:.5}", m.mean, m.variance, m.variance / 200.0f64.powi(2));

    // coarse histogram in bins of 20 sites
    for lo in (-200..200).step_by(20) {
        let mass: f64 = (lo..lo + 20).map(|x| dist.prob(x)).sum();
        println!("{lo:>5} {:<60} {mass:.4}", "#".repeat((mass * 200.0) as usize));
    }
    Ok(())
}
