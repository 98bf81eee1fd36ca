//! Classical Markov-chain counterpart of the transport model.
//!
//! Same topology as the quantum chain (vacuum, photon, N sites) but with
//! incoherent hops whose rates fall off as a Gaussian in the energy
//! mismatch. Used as a negative control for disorder-enhanced transport.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::expm;
use crate::ensemble::{run_grid, GridPoint, RealizationRecord, SteadyRecord, SweepConfig, SweepMode};
use crate::error::{Error, Result};
use crate::model::{sample_disorder, DisorderRealization, ModelParams};
use crate::observables::CurrentReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalParams {
    /// Site-to-site prefactor, ps⁻¹ eV⁻².
    pub k_ee: f64,
    /// Photon exchange prefactor, ps⁻¹ eV⁻².
    pub k_pe: f64,
    /// Energy acceptance width of site hops, eV.
    pub sigma_ee: f64,
    /// Energy acceptance width of photon exchange, eV.
    pub sigma_pe: f64,
    #[serde(default = "yes")]
    pub include_decay: bool,
    #[serde(default = "yes")]
    pub include_cavity_loss: bool,
    pub model: ModelParams,
}

fn yes() -> bool {
    true
}

impl ClassicalParams {
    /// The three default panels `(k_ee, k_pe, sigma_ee, sigma_pe)`.
    ///
    /// The prefactors are not published; these triples are chosen so the
    /// hop and exchange rates at the reference parameters land between
    /// 10 and 1000 ps⁻¹, with one balanced panel, one dominated by the
    /// cavity and one dominated by site hopping.
    pub const PANELS: [(f64, f64, f64, f64); 3] = [
        (3.0e4, 3.0e4, 0.1, 0.1),
        (3.0e3, 3.0e5, 0.05, 0.2),
        (3.0e5, 3.0e3, 0.2, 0.05),
    ];

    pub fn panel(index: usize, model: ModelParams) -> Self {
        let (k_ee, k_pe, sigma_ee, sigma_pe) = Self::PANELS[index];
        Self {
            k_ee,
            k_pe,
            sigma_ee,
            sigma_pe,
            include_decay: true,
            include_cavity_loss: true,
            model,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let ok = |v: f64| v.is_finite();
        if !(ok(self.sigma_ee) && self.sigma_ee > 0.0 && ok(self.sigma_pe) && self.sigma_pe > 0.0)
        {
            return Err(Error::InvalidParams("classical widths must be > 0".into()));
        }
        if !(ok(self.k_ee) && self.k_ee >= 0.0 && ok(self.k_pe) && self.k_pe >= 0.0) {
            return Err(Error::InvalidParams("classical prefactors must be >= 0".into()));
        }
        Ok(())
    }
}

/// Rate of a hop between sites i and i+1 with energies `wi`, `wj`.
pub fn hop_rate(cp: &ClassicalParams, wi: f64, wj: f64) -> f64 {
    cp.k_ee * cp.model.hopping_j.powi(2) * (-((wj - wi) / cp.sigma_ee).powi(2)).exp()
}

/// Rate of photon exchange with a site of energy `wi`.
pub fn exchange_rate(cp: &ClassicalParams, wi: f64) -> f64 {
    let g = cp.model.coupling_g / (cp.model.n_sites as f64).sqrt();
    cp.k_pe * g * g * (-((cp.model.omega_c - wi) / cp.sigma_pe).powi(2)).exp()
}

/// Generator Q over {g, p, 1..N} acting on column probability vectors,
/// dP/dt = Q P. `Q[(to, from)]` is the rate from `from` to `to`.
pub fn build_classical_generator(cp: &ClassicalParams, real: &DisorderRealization) -> Result<Mat<f64>> {
    cp.validate()?;
    let m = &cp.model;
    let n = m.n_sites;
    if real.omegas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: real.omegas.len(),
        });
    }
    let d = n + 2;
    let (g, p) = (0, 1);
    let site = |i: usize| i + 1;
    let mut q = Mat::<f64>::zeros(d, d);
    let mut add = |to: usize, from: usize, rate: f64| q[(to, from)] += rate;
    for i in 1..n {
        let k = hop_rate(cp, real.omegas[i - 1], real.omegas[i]);
        add(site(i + 1), site(i), k);
        add(site(i), site(i + 1), k);
    }
    for i in 1..=n {
        let k = exchange_rate(cp, real.omegas[i - 1]);
        add(p, site(i), k);
        add(site(i), p, k);
        if cp.include_decay {
            add(g, site(i), m.gamma_decay);
        }
    }
    if cp.include_cavity_loss {
        add(g, p, m.kappa);
    }
    add(site(1), g, m.gamma_in);
    add(g, site(n), m.gamma_out);
    for c in 0..d {
        let out: f64 = (0..d).filter(|&r| r != c).map(|r| q[(r, c)]).sum();
        q[(c, c)] = -out;
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSteady {
    /// Probabilities of g, p, 1..N.
    pub distribution: Vec<f64>,
    pub i_in: f64,
    pub i_out: f64,
    pub ratio: Option<f64>,
}

/// Stationary distribution of `q` and the source/drain energy currents,
/// I_in = γ_in ω₁ P_g and I_out = γ_out ω_N P_N.
pub fn classical_steady_currents(
    q: &Mat<f64>,
    cp: &ClassicalParams,
    real: &DisorderRealization,
) -> Result<ClassicalSteady> {
    let d = q.nrows();
    let scale = q.norm_l2().max(1.0);
    let sv = q
        .singular_values()
        .map_err(|e| Error::Linalg(format!("svd failed: {e:?}")))?;
    let threshold = 1e-12 * scale;
    if d >= 2 && sv[d - 2] < threshold {
        return Err(Error::NonUniqueSteadyState {
            first: sv[d - 1],
            second: sv[d - 2],
            threshold,
        });
    }
    // Columns sum to zero, so any one row is redundant; swap it for
    // normalisation.
    let mut a = q.clone();
    let mut rhs = Col::<f64>::zeros(d);
    for c in 0..d {
        a[(0, c)] = scale;
    }
    rhs[0] = scale;
    let x = a.partial_piv_lu().solve(&rhs);
    if !x.as_ref().is_all_finite() {
        return Err(Error::NonFinite("classical steady state"));
    }
    let mut dist: Vec<f64> = (0..d).map(|k| x[k].max(0.0)).collect();
    let total: f64 = dist.iter().sum();
    dist.iter_mut().for_each(|v| *v /= total);
    let m = &cp.model;
    let n = m.n_sites;
    let i_in = m.gamma_in * real.omegas[0] * dist[0];
    let i_out = m.gamma_out * real.omegas[n - 1] * dist[n + 1];
    Ok(ClassicalSteady {
        ratio: (i_in != 0.0).then(|| i_out / i_in),
        distribution: dist,
        i_in,
        i_out,
    })
}

/// One-step transfer matrix exp(Q dt). Squaring round-off is removed from
/// the column sums by resetting each diagonal entry to one minus the
/// off-diagonal mass.
pub fn transfer_matrix(q: &Mat<f64>, dt: f64) -> Result<Mat<f64>> {
    let z = Mat::<Complex64>::from_fn(q.nrows(), q.ncols(), |i, j| Complex64::new(q[(i, j)] * dt, 0.0));
    let e = expm(&z)?;
    let mut t = Mat::from_fn(e.nrows(), e.ncols(), |i, j| e[(i, j)].re);
    for c in 0..t.ncols() {
        let off: f64 = (0..t.nrows()).filter(|&r| r != c).map(|r| t[(r, c)]).sum();
        t[(c, c)] = 1.0 - off;
    }
    Ok(t)
}

/// Distributions at t = 0, dt, .., n_steps·dt by repeated application of
/// the transfer matrix.
pub fn classical_propagate(q: &Mat<f64>, p0: &[f64], dt: f64, n_steps: usize) -> Result<Vec<Vec<f64>>> {
    if p0.len() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: q.nrows(),
            found: p0.len(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidGrid(format!("step {dt} must be positive")));
    }
    let t = transfer_matrix(q, dt)?;
    let mut cur = Col::<f64>::from_fn(p0.len(), |i| p0[i]);
    let mut out = vec![p0.to_vec()];
    for _ in 0..n_steps {
        cur = &t * &cur;
        out.push((0..cur.nrows()).map(|i| cur[i]).collect());
    }
    Ok(out)
}

/// Steady-state realisation in the same record format as the quantum path.
pub fn classical_realization(cp: &ClassicalParams, seed: u64) -> RealizationRecord {
    let real = sample_disorder(&cp.model, seed);
    let mut record = RealizationRecord {
        seed,
        min_energy: real.min_energy(),
        steady: None,
        tracks: None,
        failure: None,
    };
    match build_classical_generator(cp, &real).and_then(|q| classical_steady_currents(&q, cp, &real)) {
        Ok(s) => {
            record.steady = Some(SteadyRecord {
                currents: CurrentReport {
                    per_channel: Vec::new(),
                    i_in: s.i_in,
                    i_out: s.i_out,
                    ratio: s.ratio,
                },
                populations: s.distribution,
            })
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    record
}

/// Disorder sweep of the classical chain. `config.w_grid` holds σ_ω/ω_m and
/// `config.g_grid` the couplings; the statistics match the quantum sweep.
pub fn classical_sweep(
    cp: &ClassicalParams,
    config: &SweepConfig,
    threads: Option<usize>,
) -> Result<Vec<GridPoint>> {
    cp.validate()?;
    if config.mode != SweepMode::SteadyState {
        return Err(Error::InvalidParams("classical sweeps are steady-state only".into()));
    }
    run_grid(config, threads, |wi, gi, seed| {
        let mut c = cp.clone();
        c.model = c
            .model
            .with_disorder(config.w_grid[wi] * cp.model.omega_m)
            .with_coupling(config.g_grid[gi]);
        classical_realization(&c, seed)
    })
}
