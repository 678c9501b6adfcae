use altzeta::determinants::{
    alternating_sum, delta_sequence, delta_tilde_sequence, eta_contfrac, eta_det, eta_tridiag, gen_vandermonde_ratio,
    tridiag_coeffs, OrderedGrid,
};
use altzeta::ensembles::{density_eval, laguerre_norm, selberg_value, EnsembleSpec};
use altzeta::eta::{eta_series, eta_series_exact, WeightTable};
use altzeta::exact_linalg::*;
use altzeta::oracle::cofactor_det;
use altzeta::sampling::{dixon_anderson_gibbs, eta_mc, sample_polynomial_density, SamplerConfig};
use altzeta::{Rational, SParam};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=9).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn node_set(max: usize) -> impl Strategy<Value = NodeSet<Rational>> {
    prop::collection::vec(rational(), 1..=max).prop_filter_map("distinct", |v| NodeSet::new(v).ok())
}

/// `s` away from the guard disks around `0, −2, …, −22`.
fn s_param() -> impl Strategy<Value = SParam> {
    (-6.0f64..6.0, -6.0f64..6.0)
        .prop_filter("guard", |&(re, im)| (0..12).all(|k| (re + 2.0 * k as f64).hypot(im) > 0.25))
        .prop_map(|(re, im)| SParam::new(re, im).unwrap())
}

fn grid(max: usize) -> impl Strategy<Value = OrderedGrid> {
    (0.05f64..1.0, prop::collection::vec(0.1f64..2.0, 1..max)).prop_map(|(first, steps)| {
        let mut u = vec![first];
        for d in steps {
            u.push(u.last().unwrap() + d);
        }
        OrderedGrid::new(u).unwrap()
    })
}

fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vandermonde_det_matches_cofactor(nodes in node_set(6)) {
        prop_assert_eq!(vandermonde_det(&nodes), cofactor_det(&vandermonde_matrix(&nodes)).unwrap());
    }

    #[test]
    fn vandermonde_inverse_is_exact(nodes in node_set(6)) {
        prop_assert!(vandermonde_matrix(&nodes).mul(&vandermonde_inverse(&nodes)).is_identity());
    }

    #[test]
    fn partial_fractions_reconstruct(nodes in node_set(5), raw in prop::collection::vec(rational(), 5), x in rational()) {
        prop_assume!(!nodes.as_slice().contains(&x));
        let p = PolyCoeffs::new(raw[..nodes.len()].to_vec());
        let c = partial_fraction_coeffs(&p, &nodes).unwrap();
        let q = nodes.as_slice().iter().fold(Rational::one(), |acc, xn| acc * (&x - xn));
        prop_assert_eq!(partial_fraction_eval(&c, &nodes, &x), p.eval(&x) / q);
    }

    #[test]
    fn rank_one_det_and_singularity(mut lambdas in prop::collection::vec(nonzero_rational(), 1..=5), singular in any::<bool>()) {
        if singular {
            let k = lambdas.len() - 1;
            let partial = lambdas[..k].iter().fold(Rational::one(), |acc, l| acc + l.recip());
            prop_assume!(!partial.is_zero());
            lambdas[k] = -partial.recip();
        }
        let det = rank_one_perturbed_det(&lambdas).unwrap();
        prop_assert_eq!(&det, &cofactor_det(&rank_one_perturbed_matrix(&lambdas)).unwrap());
        let sum = lambdas.iter().fold(Rational::zero(), |acc, l| acc + l.recip());
        prop_assert_eq!(det.is_zero(), sum == -Rational::one());
        if !det.is_zero() {
            let inv = rank_one_perturbed_inverse(&lambdas).unwrap();
            prop_assert!(rank_one_perturbed_matrix(&lambdas).mul(&inv).is_identity());
        }
    }

    #[test]
    fn weights_sum_to_half_and_alternate(n in 1usize..=64) {
        let w = WeightTable::new(n).unwrap();
        prop_assert_eq!(w.sum(), Rational::new(BigInt::from(1), BigInt::from(2)));
        prop_assert!(w.signs_alternate());
    }

    #[test]
    fn trivial_zeros_are_exact(n in 2usize..=16, k in 1usize..16) {
        prop_assume!(k < n);
        prop_assert!(eta_series_exact(-2 * k as i64, n).unwrap().is_zero());
    }

    #[test]
    fn representations_agree(s in s_param(), n in 2usize..=12) {
        let series = eta_series(s, n).unwrap().value;
        for other in [eta_det(s, n), eta_tridiag(s, n), eta_contfrac(s, n)] {
            prop_assert!(rel(series, other.unwrap().value) < 1e-7);
        }
    }

    #[test]
    fn tridiagonal_sequences(s in s_param(), n in 2usize..=12) {
        let c = tridiag_coeffs(s, n).unwrap();
        let d = delta_sequence(&c);
        let t = delta_tilde_sequence(&c);
        let eta = eta_series(s, n).unwrap().value;
        let scale = d[n].norm().max(1.0);
        prop_assert!((d[n] + t[n] - 1.0).norm() / scale < 1e-12);
        prop_assert!((t[n] - (1.0 - eta * 2.0)).norm() / scale < 1e-10);
    }

    #[test]
    fn ratio_identity(u in grid(8), re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let s = SParam::new(re, im).unwrap();
        prop_assume!((0..8).all(|k| s.distance_to(-2.0 * k as f64, 0.0) > 0.25));
        prop_assert!(rel(gen_vandermonde_ratio(s, &u).unwrap(), alternating_sum(s, &u)) < 1e-9);
    }

    #[test]
    fn polynomial_sampler_stays_in_unit_interval(p in prop::collection::vec(0.0f64..3.0, 1..6), seed in any::<u64>()) {
        prop_assume!(p.iter().any(|&c| c > 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let t = sample_polynomial_density(&p, &mut rng);
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn gibbs_samples_interlace(u in grid(5), seed in any::<u64>()) {
        let cfg = SamplerConfig { burn_in: 5, ..SamplerConfig::with_seed(seed) };
        for sample in dixon_anderson_gibbs(&u, &cfg).unwrap().take(50) {
            prop_assert!(sample.is_interlaced());
        }
    }

    #[test]
    fn normalizations_are_positive_and_scale(n in 1usize..=6, a in 0.2f64..4.0, b in 0.2f64..4.0, theta in 0.2f64..4.0) {
        prop_assert!(selberg_value(n, a, b).unwrap() > 0.0);
        let ratio = laguerre_norm(n, a, theta).unwrap() / laguerre_norm(n, a, 1.0).unwrap();
        let expected = theta.powf(n as f64 * (a + n as f64 - 1.0));
        prop_assert!((ratio - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn density_outside_support(a in 0.2f64..4.0, b in 0.2f64..4.0, x in 1.0f64..3.0) {
        let spec = EnsembleSpec::jacobi(2, a, b).unwrap();
        let outside = OrderedGrid::new(vec![0.5, x + 0.01]).unwrap();
        prop_assert!(!density_eval(&spec, &outside).unwrap().in_support);
        let inside = OrderedGrid::new(vec![0.2, 0.7]).unwrap();
        prop_assert!(density_eval(&spec, &inside).unwrap().log_density.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mc_is_a_function_of_the_seed(seed in any::<u64>(), n in 2usize..=5) {
        let cfg = SamplerConfig { chunk: 500, ..SamplerConfig::with_seed(seed) };
        let s = SParam::real(1.5);
        let a = eta_mc(s, n, &cfg, 2_000).unwrap();
        let b = eta_mc(s, n, &cfg, 2_000).unwrap();
        prop_assert_eq!(a.mean.re.to_bits(), b.mean.re.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
