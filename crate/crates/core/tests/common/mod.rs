#![allow(dead_code)]

use cavity_exciton::{
    build_hamiltonian, build_jump_channels, build_liouvillian, sample_disorder, DensityMatrix,
    ModelParams, Superoperator,
};
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ginibre density matrix; `subspace` zeroes the vacuum-excited coherences.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, subspace: bool) -> DensityMatrix {
    let g = Mat::<Complex64>::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    if subspace {
        for k in 1..dim {
            rho[(0, k)] = ZERO;
            rho[(k, 0)] = ZERO;
        }
    }
    let tr: f64 = (0..dim).map(|k| rho[(k, k)].re).sum();
    DensityMatrix::new(rho.map(|z| z / tr)).unwrap()
}

pub fn liouvillian(p: &ModelParams, seed: u64) -> Superoperator {
    let r = sample_disorder(p, seed);
    let h = build_hamiltonian(p, &r).unwrap();
    build_liouvillian(&h, &build_jump_channels(p)).unwrap()
}

pub fn max_abs_diff(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Embeds a single-excitation state into the full register of N+1 qubits
/// (photon first, then sites). Qubit k is bit k of the register index.
pub fn embed(rho: &DensityMatrix) -> Mat<Complex64> {
    let d = rho.dim();
    let m = d - 1;
    let index = |a: usize| if a == 0 { 0usize } else { 1usize << (a - 1) };
    let mut full = Mat::<Complex64>::zeros(1 << m, 1 << m);
    for j in 0..d {
        for i in 0..d {
            full[(index(i), index(j))] = rho.matrix()[(i, j)];
        }
    }
    full
}

/// Partial trace of a register state onto the listed qubits. The reduced
/// basis index has `keep[0]` as its most significant bit.
pub fn partial_trace(full: &Mat<Complex64>, n_qubits: usize, keep: &[usize]) -> Mat<Complex64> {
    let k = keep.len();
    let dim = 1usize << n_qubits;
    let reduced_index = |x: usize| {
        keep.iter()
            .fold(0usize, |acc, &q| (acc << 1) | ((x >> q) & 1))
    };
    let mask: usize = keep.iter().map(|&q| 1usize << q).sum();
    let mut out = Mat::<Complex64>::zeros(1 << k, 1 << k);
    for x in 0..dim {
        for y in 0..dim {
            if x & !mask == y & !mask {
                out[(reduced_index(x), reduced_index(y))] += full[(x, y)];
            }
        }
    }
    out
}

/// Hermitian eigenvalues, ascending.
pub fn eigvals(m: &Mat<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
    v.sort_by(f64::total_cmp);
    v
}

pub fn von_neumann(m: &Mat<Complex64>) -> f64 {
    eigvals(m)
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// Wootters concurrence of a two-qubit state from the eigenvalues of
/// R = √(√ρ ρ̃ √ρ), with ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ).
pub fn wootters_concurrence(rho: &Mat<Complex64>) -> f64 {
    let evd = rho.self_adjoint_eigen(Side::Lower).unwrap();
    let u = evd.U();
    let s = evd.S().column_vector();
    let sqrt_rho = Mat::<Complex64>::from_fn(4, 4, |i, j| {
        (0..4)
            .map(|k| u[(i, k)] * s[k].re.max(0.0).sqrt() * u[(j, k)].conj())
            .sum()
    });
    let mut yy = Mat::<Complex64>::zeros(4, 4);
    yy[(0, 3)] = c(-1.0, 0.0);
    yy[(1, 2)] = c(1.0, 0.0);
    yy[(2, 1)] = c(1.0, 0.0);
    yy[(3, 0)] = c(-1.0, 0.0);
    let conj = rho.map(|z| z.conj());
    let tilde = &yy * &conj * &yy;
    let m = &sqrt_rho * &tilde * &sqrt_rho;
    let herm = Mat::<Complex64>::from_fn(4, 4, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut lam: Vec<f64> = eigvals(&herm).into_iter().map(|v| v.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

pub fn h2(x: f64) -> f64 {
    let t = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    t(x) + t(1.0 - x)
}

/// min over diagonal σ of S(ρ‖σ), by exponentiated-gradient descent on the
/// probability simplex.
pub fn relative_entropy_by_minimization(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let neg_s: f64 = eigvals(rho.matrix())
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l * l.ln())
        .sum();
    let diag: Vec<f64> = (0..d).map(|k| rho.matrix()[(k, k)].re).collect();
    let objective = |s: &[f64]| neg_s - diag.iter().zip(s).map(|(p, q)| p * q.ln()).sum::<f64>();
    let mut sigma = vec![1.0 / d as f64; d];
    let eta = 0.5;
    for _ in 0..5000 {
        let grad: Vec<f64> = diag.iter().zip(&sigma).map(|(p, q)| -p / q).collect();
        for (q, g) in sigma.iter_mut().zip(&grad) {
            *q *= (-eta * g).exp();
        }
        let z: f64 = sigma.iter().sum();
        sigma.iter_mut().for_each(|q| *q /= z);
    }
    objective(&sigma)
}
