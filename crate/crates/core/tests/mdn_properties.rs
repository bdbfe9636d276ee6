use mdn_inverse::mdn::{
    marginal_grid, nll_loss, predict_modes, trapezoid, weighted_marginal_pdf, MdnHead, MixtureParams,
    LOSS_CEILING, STABILIZER,
};
use mdn_inverse::rng::seeded;
use ndarray::Array2;
use proptest::prelude::*;

fn mixture_strategy(max_k: usize, n: usize) -> impl Strategy<Value = MixtureParams> {
    (1..=max_k).prop_flat_map(move |k| {
        (
            prop::collection::vec(-4.0f64..4.0, k),
            prop::collection::vec(-0.5f64..1.5, k * n),
            prop::collection::vec(0.005f64..0.5, k * n),
        )
            .prop_map(move |(logits, mu, sigma)| {
                let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
                let s: f64 = e.iter().sum();
                MixtureParams::new(
                    e.iter().map(|v| v / s).collect(),
                    Array2::from_shape_vec((k, n), mu).unwrap(),
                    Array2::from_shape_vec((k, n), sigma).unwrap(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn head_outputs_are_valid_mixtures(seed in any::<u64>(), k in 1usize..8, features in prop::collection::vec(-30.0f64..30.0, 12)) {
        let head = MdnHead::new(12, k, 5, &mut seeded(seed)).unwrap();
        let mix = head.forward(&features).unwrap();
        let sum: f64 = mix.pi().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(mix.pi().iter().all(|&p| p > 0.0));
        prop_assert!(mix.sigma().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn loss_never_exceeds_ceiling(mix in mixture_strategy(6, 5), y in prop::collection::vec(-1e3f64..1e3, 5)) {
        let l = nll_loss(&mix, &y).unwrap();
        prop_assert!(l.is_finite());
        prop_assert!(l <= LOSS_CEILING);
    }

    #[test]
    fn loss_is_permutation_invariant(mix in mixture_strategy(6, 5), y in prop::collection::vec(-0.5f64..1.5, 5), rot in 0usize..6) {
        let k = mix.k();
        let order: Vec<usize> = (0..k).map(|i| (i + rot) % k).rev().collect();
        let permuted = mix.permuted(&order).unwrap();
        let (a, b) = (nll_loss(&mix, &y).unwrap(), nll_loss(&permuted, &y).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn single_component_is_shifted_diagonal_gaussian(mix in mixture_strategy(1, 5), y in prop::collection::vec(-0.5f64..1.5, 5)) {
        let mut log_phi = 0.0;
        for c in 0..5 {
            let s = mix.sigma()[[0, c]] + STABILIZER;
            let r = (y[c] - mix.mu()[[0, c]]) / s;
            log_phi += -0.5 * r * r - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        }
        let expected = -(log_phi.exp() + STABILIZER).ln();
        let got = nll_loss(&mix, &y).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0));
    }

    #[test]
    fn loss_bounded_by_every_weighted_component(mix in mixture_strategy(5, 3), y in prop::collection::vec(0.0f64..1.0, 3)) {
        let l = nll_loss(&mix, &y).unwrap();
        for j in 0..mix.k() {
            let single = MixtureParams::new(
                vec![1.0],
                mix.mu().slice(ndarray::s![j..j + 1, ..]).to_owned(),
                mix.sigma().slice(ndarray::s![j..j + 1, ..]).to_owned(),
            ).unwrap();
            // -ln(pi_j phi_j + eps) from the single-component loss.
            let phi = (-nll_loss(&single, &y).unwrap()).exp() - STABILIZER;
            let bound = -(mix.pi()[j] * phi + STABILIZER).ln();
            prop_assert!(l <= bound + 1e-12);
        }
    }

    #[test]
    fn modes_are_sorted_by_weight(mix in mixture_strategy(8, 5), m in 1usize..8) {
        let m = m.min(mix.k());
        let modes = predict_modes(&mix, m).unwrap();
        prop_assert_eq!(modes.len(), m);
        for w in modes.windows(2) {
            prop_assert!(w[0].pi > w[1].pi || (w[0].pi == w[1].pi && w[0].component < w[1].component));
        }
        prop_assert!(predict_modes(&mix, mix.k() + 1).is_err());
    }

    #[test]
    fn marginals_integrate_to_one(mix in mixture_strategy(10, 5), c in 0usize..5) {
        let grid = marginal_grid(&mix, c, 801);
        let pdf = weighted_marginal_pdf(&mix, c, &grid).unwrap();
        prop_assert!((trapezoid(&grid, &pdf) - 1.0).abs() <= 1e-3);
    }
}
