use csbp::lamperti::inverse_transform;
use csbp::simulate::{
    dsbp_approximation, exponent_gap, sample_compound_poisson, sample_csbp_sde_logged, sample_dsbp,
    sample_levy, DsbpSpec, RngStream,
};
use csbp::stats::{
    extinction_estimate, ks_one_sample, ks_two_sample, marginal, Estimate, ALPHA,
};
use csbp::{LevyTriplet, Mechanism, PathEnsemble};

const SEED: u64 = 2024;

fn lifetimes(ens: &PathEnsemble) -> Vec<f64> {
    ens.paths
        .iter()
        .map(|p| p.hitting_time_zero().expect("absorbed"))
        .collect()
}

#[test]
fn brownian_levy_moments() {
    let t = LevyTriplet::new(0.0, 1.0, Vec::new()).unwrap();
    let ens: PathEnsemble = PathEnsemble::generate("bm", SEED, 0, 4000, |rng| {
        sample_levy(&t, 10.0, 1.0, 0.01, rng)
    })
    .unwrap();
    let xs = marginal(&ens, 0.999).unwrap();
    let mean = Estimate::from_samples(&xs).unwrap();
    assert!((mean.value - 10.0).abs() < 4.0 * mean.stderr, "{mean:?}");
    let var = xs.iter().map(|x| (x - mean.value).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    // variance of the sample variance of a normal is 2σ⁴/(n-1)
    assert!((var - 0.999).abs() < 4.0 * (2.0 / 3999.0f64).sqrt(), "{var}");
}

#[test]
fn pure_death_lifetime_is_exponential() {
    let spec = DsbpSpec::new(&[(0, 1.0)], 0.0).unwrap();
    let ens: PathEnsemble = PathEnsemble::generate("death", SEED, 1, 4000, |rng| {
        Ok(sample_dsbp(&spec, 1, 1e6, rng))
    })
    .unwrap();
    let t0 = lifetimes(&ens);
    let mean = Estimate::from_samples(&t0).unwrap();
    assert!((mean.value - 1.0).abs() < 4.0 * mean.stderr, "{mean:?}");
    let ks = ks_one_sample(&t0, |x| 1.0 - (-x).exp()).unwrap();
    assert!(!ks.rejects(ALPHA), "{ks:?}");
}

#[test]
fn compound_poisson_lifetime_is_gamma_and_inverse_gives_dsbp() {
    let spec = DsbpSpec::new(&[(0, 1.0)], 0.0).unwrap();
    let walk: PathEnsemble = PathEnsemble::generate("cp", SEED, 2, 4000, |rng| {
        Ok(sample_compound_poisson(&spec, 2, 1e6, rng))
    })
    .unwrap();
    let gamma2 = |x: f64| 1.0 - (-x).exp() * (1.0 + x);
    let ks = ks_one_sample(&lifetimes(&walk), gamma2).unwrap();
    assert!(!ks.rejects(ALPHA), "{ks:?}");

    // L⁻¹ divides each holding time by the current value: Exp(1)/2 + Exp(1)
    let branching = walk.map_paths(inverse_transform).unwrap();
    let direct: PathEnsemble = PathEnsemble::generate("dsbp", SEED, 3, 4000, |rng| {
        Ok(sample_dsbp(&spec, 2, 1e6, rng))
    })
    .unwrap();
    let (a, b) = (lifetimes(&branching), lifetimes(&direct));
    let mean = Estimate::from_samples(&a).unwrap();
    assert!((mean.value - 1.5).abs() < 4.0 * mean.stderr, "{mean:?}");
    let ks = ks_two_sample(&a, &b).unwrap();
    assert!(!ks.rejects(ALPHA), "{ks:?}");
}

#[test]
fn feller_zero_probability() {
    // P(Z_t = 0) = exp(-x u_t(∞)) with u_t(∞) = 2/(σ²t)
    let t = LevyTriplet::new(0.0, 1.0, Vec::new()).unwrap();
    let ens: PathEnsemble = PathEnsemble::generate("feller", SEED, 4, 4000, |rng| {
        Ok(sample_csbp_sde_logged(&t, 1.0, 1.0, 1e-3, 100, rng)?.path)
    })
    .unwrap();
    let zeros: Vec<f64> = marginal(&ens, 0.9999)
        .unwrap()
        .iter()
        .map(|x| if *x == 0.0 { 1.0 } else { 0.0 })
        .collect();
    let p = Estimate::from_samples(&zeros).unwrap();
    let exact = (-2.0f64 / 0.9999).exp();
    assert!((p.value - exact).abs() < 4.0 * p.stderr + 0.01, "{p:?} vs {exact}");
}

#[test]
fn extinction_of_supercritical_birth_death() {
    // P(Z_t = 0 | Z_0 = 1) = d(e^{rt} - 1) / (b e^{rt} - d), r = b - d
    let (b, d, t) = (2.0f64, 1.0f64, 8.0f64);
    let spec = DsbpSpec::birth_death(b, d).unwrap();
    let ens: PathEnsemble = PathEnsemble::generate("ext", SEED, 5, 4000, |rng| {
        Ok(sample_dsbp(&spec, 1, t, rng))
    })
    .unwrap();
    let q = extinction_estimate(&ens).unwrap();
    let e = ((b - d) * t).exp();
    let exact = d * (e - 1.0) / (b * e - d);
    assert!((q.value - exact).abs() < 4.0 * q.stderr, "{q:?} vs {exact}");
}

#[test]
fn skeleton_exponent_converges_at_least_first_order() {
    let t = LevyTriplet::from_pairs(0.3, 0.8, &[(0.4, 1.0), (2.0, 0.5)], 0.1).unwrap();
    let m = Mechanism::Triplet(t);
    let gaps: Vec<f64> = [5u64, 10, 20, 40]
        .iter()
        .map(|&n| {
            let approx = dsbp_approximation(&m, n, 1.0).unwrap();
            exponent_gap(&approx.psi_n, &m, 4.0, 200).unwrap()
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[1] <= w[0] / 1.5, "{gaps:?}");
    }
    assert!(gaps[3] < 0.1, "{gaps:?}");
}

#[test]
fn skeleton_uses_the_scaling_identity() {
    let m = Mechanism::quadratic(0.5);
    let approx = dsbp_approximation(&m, 8, 1.5).unwrap();
    assert_eq!(approx.x_n, 12);
    assert_eq!(approx.a_n, 64.0);
    assert_eq!(approx.dsbp_time_scale(), 8.0);
    assert_eq!(approx.space_scale(), 8.0);
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let draw = |seed, stream| {
        let mut r = RngStream::new(seed, stream);
        (0..8).map(|_| r.uniform()).collect::<Vec<_>>()
    };
    assert_eq!(draw(1, 5), draw(1, 5));
    assert_ne!(draw(1, 5), draw(1, 6));
    assert_ne!(draw(1, 5), draw(2, 5));
}
