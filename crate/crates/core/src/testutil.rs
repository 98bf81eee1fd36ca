use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Random density matrix from a square Ginibre matrix. With `subspace` the
/// vacuum-to-excited coherences are zero.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, subspace: bool) -> Mat<Complex64> {
    let mut g = Mat::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = Complex64::new(re, im);
        }
    }
    let mut rho = &g * g.adjoint();
    if subspace {
        for k in 1..dim {
            rho[(0, k)] = Complex64::new(0.0, 0.0);
            rho[(k, 0)] = Complex64::new(0.0, 0.0);
        }
    }
    let tr: f64 = (0..dim).map(|k| rho[(k, k)].re).sum();
    rho.map(|z| z / tr)
}
