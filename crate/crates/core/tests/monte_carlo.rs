use altzeta::determinants::OrderedGrid;
use altzeta::ensembles::*;
use altzeta::eta::eta_series;
use altzeta::quadrature::{integrate, Tolerance};
use altzeta::sampling::*;
use altzeta::{SParam, C64};

const Z: f64 = 4.0;

fn cfg(seed: u64) -> SamplerConfig {
    SamplerConfig { thinning: 2, ..SamplerConfig::with_seed(seed) }
}

#[test]
fn jacobi_pair_mean_matches_quadrature() {
    let spec = EnsembleSpec::jacobi(2, 1.0, 1.0).unwrap();
    // density 2·6·(u2 − u1)² on 0 < u1 < u2 < 1
    let tol = Tolerance::new(1e-12, 0.0);
    let expect: f64 =
        integrate(|u1| integrate(|u2| Ok(12.0 * (u2 - u1) * (u2 - u1) * (u1 + u2)), u1, 1.0, tol), 0.0, 1.0, tol)
            .unwrap();
    let est = monte_carlo(100_000, &cfg(21), "sum", |rng, count, out| {
        let mut chain = EnsembleChain::from_rng(&spec, rng.clone(), &cfg(21))?;
        for _ in 0..count {
            let u = chain.next_u();
            out.push(C64::new(u[0] + u[1], 0.0));
        }
        Ok(())
    })
    .unwrap();
    assert!(est.z_score(C64::new(expect, 0.0)) < Z, "{est:?} vs {expect}");
}

#[test]
fn laguerre_pair_max_matches_quadrature() {
    let spec = EnsembleSpec::laguerre(2, 1.0, 1.0).unwrap();
    // density 2/W_2 · (u2 − u1)² e^{−u1−u2}, W_2(1, 1) = 2
    let tol = Tolerance::new(1e-12, 0.0);
    let expect: f64 =
        integrate(|u1| integrate(|u2| Ok((u2 - u1).powi(2) * (-u1 - u2).exp() * u2), u1, 60.0, tol), 0.0, 60.0, tol)
            .unwrap();
    let est = monte_carlo(100_000, &cfg(22), "max", |rng, count, out| {
        let mut chain = EnsembleChain::from_rng(&spec, rng.clone(), &cfg(22))?;
        for _ in 0..count {
            out.push(C64::new(chain.next_u()[1], 0.0));
        }
        Ok(())
    })
    .unwrap();
    assert!(est.z_score(C64::new(expect, 0.0)) < Z, "{est:?} vs {expect}");
}

#[test]
fn averaged_ratio_estimators_agree_with_theorem() {
    let cases = [
        (EnsembleSpec::jacobi(2, 3.0, 2.0).unwrap(), SParam::real(2.0)),
        (EnsembleSpec::laguerre(2, 3.0, 1.0).unwrap(), SParam::real(1.0)),
        (EnsembleSpec::jacobi(3, 2.5, 1.5).unwrap(), SParam::new(1.0, 2.0).unwrap()),
    ];
    for (k, (spec, s)) in cases.into_iter().enumerate() {
        let closed = avg_ratio_closed(&spec, s).unwrap();
        let est = avg_ratio_mc(&spec, s, &cfg(30 + k as u64), 100_000).unwrap();
        assert!(est.direct.z_score(closed) < Z, "{spec:?} direct {:?} vs {closed}", est.direct);
        assert!(est.joint.z_score(closed) < Z, "{spec:?} joint {:?} vs {closed}", est.joint);
        assert!(est.disagreement() < Z);
    }
}

#[test]
fn eta_mc_complex_s() {
    let s = SParam::new(0.5, 3.0).unwrap();
    let target = eta_series(s, 6).unwrap().value;
    let est = eta_mc(s, 6, &cfg(40), 100_000).unwrap();
    assert!(est.z_score(target) < Z, "{est:?} vs {target}");
}

#[test]
fn psi_mc_matches_closed_forms() {
    let s = SParam::real(1.5);
    for x in 1..=4 {
        let closed = psi_closed(x, 4, s).unwrap();
        let est = psi_mc(x, 4, s, &cfg(50 + x as u64), 100_000).unwrap();
        assert!(est.z_score(closed) < Z, "x={x}: {est:?} vs {closed}");
        if x == 1 {
            let shown = psi_closed_displayed(1, 4, s).unwrap();
            assert!(est.z_score(shown) > 10.0 * Z, "{est:?} vs {shown}");
        }
    }
    let zero = psi_zero_closed(4, s).unwrap();
    let est = psi_mc(0, 4, s, &cfg(59), 100_000).unwrap();
    assert!(est.z_score(zero) < Z, "{est:?} vs {zero}");
}

#[test]
fn exponential_lemma() {
    let u = OrderedGrid::new(vec![0.5, 1.5, 2.0, 4.0]).unwrap();
    for s in [SParam::real(1.0), SParam::real(-3.0), SParam::new(0.7, -1.1).unwrap()] {
        let closed = exp_moment_closed(&u, s).unwrap();
        let est = exp_moment_mc(&u, s, &cfg(60), 100_000).unwrap();
        assert!(est.z_score(closed) < Z, "s={s}: {est:?} vs {closed}");
    }
}

#[test]
fn ratio_mc_matches_alternating_sum() {
    let u = OrderedGrid::new(vec![0.3, 1.0, 1.7, 3.2]).unwrap();
    let s = SParam::new(1.2, 0.8).unwrap();
    let exact = altzeta::determinants::alternating_sum(s, &u);
    let est = ratio_mc(&u, s, &cfg(70), 100_000).unwrap();
    assert!(est.z_score(exact) < Z, "{est:?} vs {exact}");
}

#[test]
fn standard_error_halves_for_four_times_the_samples() {
    let s = SParam::real(2.0);
    let small = eta_mc(s, 4, &cfg(80), 50_000).unwrap();
    let large = eta_mc(s, 4, &cfg(81), 200_000).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "{ratio}");
}
