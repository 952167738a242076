use nalgebra::DMatrix;
use num_complex::Complex64;
use qwalk::noise::{
    final_states, purity_exact_bitflip, purity_mc_pairwise, run_ensemble, run_ensemble_with_workers,
    sample_link_mask, step_bitflip_trajectory, step_broken_links, trajectory_rng, DensityMatrix, EnsembleConfig,
    NoiseModel, DEFAULT_DIMENSION_GUARD,
};
use qwalk::walk::{evolve_coherent, CoinAngle, InitialCoinState, WalkerState};

fn generic_state() -> InitialCoinState {
    InitialCoinState::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap()
}

#[test]
fn trajectories_conserve_norm_for_a_thousand_steps() {
    let coin = CoinAngle::from_pi_units(0.3).unwrap();
    for index in 0..4 {
        let mut rng = trajectory_rng(5, index);
        let mut flip = WalkerState::localized(generic_state(), 1000);
        let mut links = WalkerState::localized(generic_state(), 1000);
        for _ in 0..1000 {
            step_bitflip_trajectory(&mut flip, coin, 0.2, &mut rng).unwrap();
            let mask = sample_link_mask(0.2, 1000, &mut rng).unwrap();
            step_broken_links(&mut links, coin, &mask).unwrap();
        }
        assert!((flip.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((links.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

/// Mixture over all 2^t flip histories, weighted by their probability.
fn enumerated_mixture(init: InitialCoinState, coin: CoinAngle, p: f64, t: usize) -> DMatrix<Complex64> {
    let dim = 2 * (2 * t + 1);
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for hist in 0..(1u32 << t) {
        let mut state = WalkerState::localized(init, t);
        let mut weight = 1.0;
        for j in 0..t {
            state.step(coin).unwrap();
            if (hist >> j) & 1 == 1 {
                state.swap_chirality();
                weight *= p;
            } else {
                weight *= 1.0 - p;
            }
        }
        let psi: Vec<Complex64> = (-(t as i64)..=t as i64)
            .flat_map(|x| {
                let (a, b) = state.amplitude(x);
                [a, b]
            })
            .collect();
        for i in 0..dim {
            for k in 0..dim {
                rho[(i, k)] += psi[i] * psi[k].conj() * weight;
            }
        }
    }
    rho
}

#[test]
fn density_matrix_equals_mixture_over_histories() {
    let coin = CoinAngle::from_pi_units(0.2).unwrap();
    let t = 7;
    let oracle = enumerated_mixture(generic_state(), coin, 0.3, t);
    let mut rho = DensityMatrix::localized(generic_state(), t, DEFAULT_DIMENSION_GUARD).unwrap();
    for _ in 0..t {
        rho.step_bitflip(coin, 0.3).unwrap();
    }
    let ti = t as i64;
    let mut worst = 0.0f64;
    for x in -ti..=ti {
        for y in -ti..=ti {
            for c in 0..2 {
                for d in 0..2 {
                    let i = 2 * (x + ti) as usize + c;
                    let k = 2 * (y + ti) as usize + d;
                    worst = worst.max((rho.entry(x, c, y, d) - oracle[(i, k)]).norm());
                }
            }
        }
    }
    assert!(worst < 1e-14, "{worst}");
    let oracle_purity = (&oracle * &oracle).trace().re;
    assert!((rho.purity() - oracle_purity).abs() < 1e-14);
}

#[test]
fn density_matrix_is_a_state() {
    let coin = CoinAngle::from_pi_units(1.0 / 3.0).unwrap();
    let mut rho = DensityMatrix::localized(generic_state(), 16, DEFAULT_DIMENSION_GUARD).unwrap();
    for _ in 0..16 {
        rho.step_bitflip(coin, 0.2).unwrap();
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(rho.hermiticity_error() < 1e-14);
        let (n, block) = rho.cone_block();
        let eig = DMatrix::from_row_slice(n, n, &block).symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-12);
        let purity: f64 = eig.eigenvalues.iter().map(|l| l * l).sum();
        assert!((purity - rho.purity()).abs() < 1e-12);
    }
}

#[test]
fn pairwise_purity_tracks_exact() {
    let coin = CoinAngle::hadamard();
    let (p, t) = (0.1, 300);
    let exact = purity_exact_bitflip(coin, p, InitialCoinState::symmetric(), t, DEFAULT_DIMENSION_GUARD).unwrap()[t];
    let config = EnsembleConfig::new(coin, NoiseModel::BitFlip { p }).with_size(2000, t).with_seed(21);
    let est = purity_mc_pairwise(&final_states(&config).unwrap()).unwrap();
    assert!((est.value - exact).abs() < 3.0 * est.stderr, "{} +- {} vs {exact}", est.value, est.stderr);
    assert!(est.stderr < 0.05 * exact);
}

#[test]
fn zero_rate_reproduces_the_coherent_walk() {
    let coin = CoinAngle::from_pi_units(0.2).unwrap();
    let coherent = evolve_coherent(InitialCoinState::symmetric(), coin, 200).unwrap().moments();
    for noise in [NoiseModel::BitFlip { p: 0.0 }, NoiseModel::BrokenLinks { p_tilde: 0.0 }] {
        let result = run_ensemble(&EnsembleConfig::new(coin, noise).with_size(3, 200)).unwrap();
        assert!((result.var_x[200] - coherent.variance).abs() < 1e-9);
        assert!(result.dq.is_none());
    }
}

#[test]
fn ensembles_are_bit_exact_across_worker_counts() {
    let coin = CoinAngle::from_pi_units(0.3).unwrap();
    for noise in [NoiseModel::BitFlip { p: 0.05 }, NoiseModel::BrokenLinks { p_tilde: 0.05 }] {
        let config = EnsembleConfig { record_purity: true, ..EnsembleConfig::new(coin, noise) }
            .with_size(150, 300)
            .with_seed(99);
        let one = run_ensemble_with_workers(&config, 1).unwrap();
        let eight = run_ensemble_with_workers(&config, 8).unwrap();
        assert_eq!(one, eight);
        let other_seed = run_ensemble_with_workers(&config.clone().with_seed(100), 1).unwrap();
        assert_ne!(one.var_x, other_seed.var_x);
    }
}
