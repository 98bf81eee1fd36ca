mod common;

use cavity_exciton::observables::{
    channel_current, global_entanglement, pair_entanglement, photon_number, site_entropy,
    transport_currents,
};
use cavity_exciton::{
    build_jump_channels, lab_hamiltonian_ev, sample_disorder, BasisIndex, ChannelKind,
    DensityMatrix, ModelParams,
};
use common::*;
use faer::Mat;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 4;

fn particle(k: usize) -> BasisIndex {
    if k == 0 {
        BasisIndex::Photon
    } else {
        BasisIndex::Site(k)
    }
}

#[test]
fn concurrence_and_formation_match_wootters() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let (mut err_c, mut err_f) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let rho = random_density(&mut rng, N + 2, true);
        let a = rng.random_range(0..=N);
        let mut b = rng.random_range(0..=N);
        while b == a {
            b = rng.random_range(0..=N);
        }
        let full = embed(&rho);
        let pair = partial_trace(&full, N + 1, &[a, b]);
        let cw = wootters_concurrence(&pair);
        let fw = h2(0.5 + 0.5 * (1.0 - cw * cw).sqrt());
        let (cc, fc) = pair_entanglement(&rho, particle(a), particle(b));
        err_c = err_c.max((cc - cw).abs());
        err_f = err_f.max((fc - fw).abs());
    }
    assert!(err_c <= 1e-10, "concurrence error {err_c:e}");
    assert!(err_f <= 1e-10, "formation error {err_f:e}");
}

#[test]
fn site_entropy_matches_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut err = 0.0f64;
    for k in 0..1000 {
        // Half of the draws keep vacuum coherences to exercise |C_Ag|.
        let rho = random_density(&mut rng, N + 2, k % 2 == 0);
        let a = rng.random_range(0..=N);
        let single = partial_trace(&embed(&rho), N + 1, &[a]);
        let s = von_neumann(&single);
        err = err.max((site_entropy(&rho, particle(a)) - s).abs());
    }
    assert!(err <= 1e-10, "entropy error {err:e}");
}

#[test]
fn relative_entropy_matches_direct_minimization() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut err = 0.0f64;
    for _ in 0..1000 {
        let rho = random_density(&mut rng, N + 2, true);
        let direct = relative_entropy_by_minimization(&rho);
        err = err.max((global_entanglement(&rho).unwrap() - direct).abs());
    }
    assert!(err <= 1e-6, "relative entropy error {err:e}");
}

#[test]
fn entropy_bounds_and_photon_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..200 {
        let rho = random_density(&mut rng, N + 2, true);
        for a in 0..=N {
            let s = site_entropy(&rho, particle(a));
            assert!((0.0..=2f64.ln() + 1e-15).contains(&s));
        }
        let er = global_entanglement(&rho).unwrap();
        assert!(er >= 0.0 && er <= ((N + 2) as f64).ln());
        // ⟨a†a⟩ from the register: the photon qubit's excited population.
        let single = partial_trace(&embed(&rho), N + 1, &[0]);
        assert_eq!(photon_number(&rho), rho.population(BasisIndex::Photon));
        assert!((single[(1, 1)].re - photon_number(&rho)).abs() < 1e-15);
    }
}

fn reference(n: usize) -> (ModelParams, Mat<Complex64>) {
    let p = ModelParams::reference(n).with_coupling(0.4).with_disorder(0.211);
    let r = sample_disorder(&p, 17);
    let h = lab_hamiltonian_ev(&p, &r).unwrap();
    (p, h)
}

#[test]
fn closed_form_ratio_matches_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = 6;
    let (p, h) = reference(n);
    let r = sample_disorder(&p, 17);
    let ch = build_jump_channels(&p);
    for _ in 0..100 {
        let rho = random_density(&mut rng, n + 2, true);
        let cur = transport_currents(&h, &ch, &rho).unwrap();
        let g = p.coupling_g / (n as f64).sqrt();
        let s = |a, b| rho.get(a, b);
        let out = r.omegas[n - 1] * s(BasisIndex::Site(n), BasisIndex::Site(n)).re
            + p.hopping_j * s(BasisIndex::Site(n), BasisIndex::Site(n - 1)).re
            + g * s(BasisIndex::Site(n), BasisIndex::Photon).re;
        let closed = (p.gamma_out / p.gamma_in) * out / (r.omegas[0] * rho.population(BasisIndex::Vacuum));
        let ratio = cur.ratio.unwrap();
        assert!((ratio - closed).abs() <= 1e-9 * closed.abs().max(1.0), "{ratio} vs {closed}");
        let drain = cur.get(ChannelKind::Drain).unwrap();
        assert!((drain + p.gamma_out * out).abs() <= 1e-9);
    }
}

#[test]
fn offset_leaves_currents_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (p, h) = reference(5);
    let shifted = Mat::from_fn(7, 7, |i, j| if i == j { h[(i, j)] + c(1e3, 0.0) } else { h[(i, j)] });
    for _ in 0..20 {
        let rho = random_density(&mut rng, 7, false);
        for ch in build_jump_channels(&p) {
            let a = channel_current(&h, &ch, &rho);
            let b = channel_current(&shifted, &ch, &rho);
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{}: {a} vs {b}", ch.label());
        }
    }
}

#[test]
fn formation_increases_with_coherence() {
    let mut prev = -1.0;
    for k in 1..500 {
        let x = 0.5 * k as f64 / 500.0;
        let mut m = Mat::<Complex64>::zeros(4, 4);
        m[(1, 1)] = c(0.5, 0.0);
        m[(2, 2)] = c(0.5, 0.0);
        m[(1, 2)] = c(x, 0.0);
        m[(2, 1)] = c(x, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let (_, ef) = pair_entanglement(&rho, BasisIndex::Photon, BasisIndex::Site(1));
        assert!(ef > prev, "E_F not increasing at |C| = {x}");
        prev = ef;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_entanglement_bounds(seed in any::<u64>(), a in 0usize..=N, b in 0usize..=N) {
        prop_assume!(a != b);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, N + 2, true);
        let (ec, ef) = pair_entanglement(&rho, particle(a), particle(b));
        prop_assert!((0.0..=1.0).contains(&ec));
        prop_assert!((0.0..=2f64.ln() + 1e-15).contains(&ef));
        let (ec2, ef2) = pair_entanglement(&rho, particle(b), particle(a));
        prop_assert!((ec - ec2).abs() <= 1e-15);
        prop_assert!((ef - ef2).abs() <= 1e-15);
    }
}
