//! Fixtures shared by the benchmarks.

use cavity_exciton::{
    build_hamiltonian, build_jump_channels, build_liouvillian, sample_disorder, ModelParams,
    Superoperator,
};

/// Liouvillian of a disordered chain with the reference rates.
pub fn liouvillian(n_sites: usize, w_over_omega_m: f64, g: f64, seed: u64) -> Superoperator {
    let p = ModelParams::reference(n_sites)
        .with_disorder(w_over_omega_m * 2.11)
        .with_coupling(g);
    let r = sample_disorder(&p, seed);
    let h = build_hamiltonian(&p, &r).expect("valid reference parameters");
    build_liouvillian(&h, &build_jump_channels(&p)).expect("consistent dimensions")
}
