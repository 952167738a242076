//! Closed-form spreading rate of the bit-flip walk across coin angles.

use qwalk::channel::spreading_rate_closed;
use qwalk::walk::CoinAngle;

fn main() -> qwalk::Result<()> {
    let ps = [0.01, 0.05, 0.1, 0.3, 0.5];
    print!("{:>8}", "theta/pi");
    for p in ps {
        print!("{:>12}", format!("p={p}"));
    }
    println!();
    for i in -8..=8 {
        let units = i as f64 / 16.0;
        let coin = CoinAngle::from_pi_units(units)?;
        print!("{units:>8.4}");
        for p in ps {
            print!("{:>12.4}", spreading_rate_closed(coin, p)?.dq);
        }
        println!();
    }
    println!("classical limit p = 1/2 gives D = 1 for every coin");
    Ok(())
}
