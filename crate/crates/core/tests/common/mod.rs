#![allow(dead_code)]

use mixtopo::{Component, Mixture};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::Rng;
use rand_distr::StandardNormal;

/// Fixed-seed proptest configuration so failures reproduce across runs.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// `QΛQ'` with `Q` orthogonal from the QR factor of `raw`.
pub fn spd_from(raw: &[f64], eigs: &[f64]) -> DMatrix<f64> {
    let d = eigs.len();
    let q = DMatrix::from_column_slice(d, d, raw).qr().q();
    &q * DMatrix::from_diagonal(&DVector::from_column_slice(eigs)) * q.transpose()
}

pub fn arb_spd(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (
        proptest::collection::vec(-1.0f64..1.0, d * d),
        proptest::collection::vec(0.05f64..2.0, d),
    )
        .prop_map(|(raw, eigs)| spd_from(&raw, &eigs))
}

pub fn arb_mean(d: usize) -> impl Strategy<Value = DVector<f64>> {
    proptest::collection::vec(-3.0f64..3.0, d).prop_map(DVector::from_vec)
}

/// Means in `[-3, 3]^D`, covariance eigenvalues in `[0.05, 2]`, weights in `[0.05, 0.95]`.
pub fn arb_mixture_kd(k: usize, d: usize) -> impl Strategy<Value = Mixture> {
    (
        proptest::collection::vec(arb_mean(d), k),
        proptest::collection::vec(arb_spd(d), k),
        proptest::collection::vec(0.05f64..0.95, k),
    )
        .prop_map(|(means, covs, w)| {
            let total: f64 = w.iter().sum();
            let w = w.iter().map(|v| v / total).collect();
            Mixture::from_parts(means, covs, w).expect("valid by construction")
        })
}

pub fn arb_mixture(
    k: std::ops::RangeInclusive<usize>,
    d: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Mixture> {
    (k, d).prop_flat_map(|(k, d)| arb_mixture_kd(k, d))
}

/// Random instance from an explicit RNG, for seeded loops.
pub fn random_spd<R: Rng>(rng: &mut R, d: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let raw: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let eigs: Vec<f64> = (0..d).map(|_| rng.random_range(lo..hi)).collect();
    spd_from(&raw, &eigs)
}

pub fn random_mixture<R: Rng>(rng: &mut R, k: usize, d: usize) -> Mixture {
    let means = (0..k)
        .map(|_| DVector::from_iterator(d, (0..d).map(|_| rng.random_range(-3.0..3.0))))
        .collect();
    let covs = (0..k).map(|_| random_spd(rng, d, 0.05, 2.0)).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    let total: f64 = w.iter().sum();
    Mixture::from_parts(means, covs, w.iter().map(|v| v / total).collect()).expect("valid by construction")
}

/// A pair with `Σ_2 = σ²Σ_1` and `(μ_2 - μ_1)'Σ_1⁻¹(μ_2 - μ_1) = mu2`.
pub fn proportional_pair<R: Rng>(rng: &mut R, d: usize, sigma2: f64, mu2: f64) -> Mixture {
    let s1 = random_spd(rng, d, 0.1, 2.0);
    let dir = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let m2 = dir.dot(&(s1.clone().cholesky().unwrap().solve(&dir)));
    let delta = dir * (mu2 / m2).sqrt();
    let mu1 = DVector::from_iterator(d, (0..d).map(|_| rng.random_range(-1.0..1.0)));
    let mu2v = &mu1 + delta;
    let c1 = Component::new(mu1, s1.clone(), 0).unwrap();
    let c2 = Component::new(mu2v, s1 * sigma2, 1).unwrap();
    Mixture::new(vec![c1, c2], vec![0.5, 0.5]).unwrap()
}
