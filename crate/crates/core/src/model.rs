//! Model parameters, static disorder and the single-excitation operators.
//!
//! The Hilbert space is truncated to at most one excitation. Its basis is
//! ordered `g, p, 1..N`: the vacuum, one cavity photon, and one exciton on
//! site `i`. Energies are stored in eV and times in ps; the Hamiltonian
//! returned by [`build_hamiltonian`] is divided by [`HBAR_EV_PS`] so that it
//! is an angular frequency in rad/ps and enters the master equation directly.

use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV·ps.
pub const HBAR_EV_PS: f64 = 6.582119569e-4;

/// Physical constants of one simulation.
///
/// Rates are in ps⁻¹ (1 THz is taken as 1 ps⁻¹), energies in eV. Missing
/// fields deserialize to [`ModelParams::default`], the 40-site reference
/// chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub n_sites: usize,
    pub omega_m: f64,
    pub omega_c: f64,
    pub hopping_j: f64,
    pub coupling_g: f64,
    pub disorder_w: f64,
    pub gamma_decay: f64,
    pub gamma_dephasing: f64,
    pub kappa: f64,
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub rotating_frame: bool,
}

impl ModelParams {
    /// Resonant chain with the reference rates used throughout: ω_m = ω_c =
    /// 2.11 eV, J = 60 meV, γ_decay = 1.67, κ = 20, γ_dephasing = 40,
    /// γ_in = γ_out = 1 (ps⁻¹). Coupling and disorder start at zero.
    pub fn reference(n_sites: usize) -> Self {
        Self {
            n_sites,
            omega_m: 2.11,
            omega_c: 2.11,
            hopping_j: 0.060,
            coupling_g: 0.0,
            disorder_w: 0.0,
            gamma_decay: 1.67,
            gamma_dephasing: 40.0,
            kappa: 20.0,
            gamma_in: 1.0,
            gamma_out: 1.0,
            rotating_frame: false,
        }
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.coupling_g = g;
        self
    }

    pub fn with_disorder(mut self, w: f64) -> Self {
        self.disorder_w = w;
        self
    }

    /// Hilbert-space dimension N + 2.
    pub fn dim(&self) -> usize {
        self.n_sites + 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 1 {
            return Err(Error::InvalidParams("n_sites must be at least 1".into()));
        }
        let energies = [
            ("omega_m", self.omega_m),
            ("omega_c", self.omega_c),
            ("hopping_j", self.hopping_j),
            ("coupling_g", self.coupling_g),
            ("disorder_w", self.disorder_w),
        ];
        for (name, v) in energies {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.disorder_w < 0.0 {
            return Err(Error::InvalidParams("disorder_w must be >= 0".into()));
        }
        if self.coupling_g < 0.0 {
            return Err(Error::InvalidParams("coupling_g must be >= 0".into()));
        }
        let rates = [
            ("gamma_decay", self.gamma_decay),
            ("gamma_dephasing", self.gamma_dephasing),
            ("kappa", self.kappa),
            ("gamma_in", self.gamma_in),
            ("gamma_out", self.gamma_out),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference(40)
    }
}

/// One draw of the static on-site energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub omegas: Vec<f64>,
    pub seed: u64,
}

impl DisorderRealization {
    /// Homogeneous chain with every site at `omega`.
    pub fn uniform(n_sites: usize, omega: f64) -> Self {
        Self {
            omegas: vec![omega; n_sites],
            seed: 0,
        }
    }

    /// Lowest drawn site energy. Draws are not truncated, so large `w` can
    /// produce negative energies; this is recorded rather than rejected.
    pub fn min_energy(&self) -> f64 {
        self.omegas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Draws `N` site energies from Normal(ω_m, w²), deterministically in `seed`.
pub fn sample_disorder(params: &ModelParams, seed: u64) -> DisorderRealization {
    let n = params.n_sites;
    if params.disorder_w == 0.0 {
        return DisorderRealization {
            omegas: vec![params.omega_m; n],
            seed,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(params.omega_m, params.disorder_w)
        .expect("disorder width validated as finite and non-negative");
    DisorderRealization {
        omegas: (0..n).map(|_| normal.sample(&mut rng)).collect(),
        seed,
    }
}

/// Basis label in the single-excitation subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisIndex {
    Vacuum,
    Photon,
    /// 1-based site number.
    Site(usize),
}

impl BasisIndex {
    pub fn index(self) -> usize {
        match self {
            BasisIndex::Vacuum => 0,
            BasisIndex::Photon => 1,
            BasisIndex::Site(i) => i + 1,
        }
    }

    pub fn from_index(idx: usize) -> Self {
        match idx {
            0 => BasisIndex::Vacuum,
            1 => BasisIndex::Photon,
            i => BasisIndex::Site(i - 1),
        }
    }

    pub fn is_excited(self) -> bool {
        !matches!(self, BasisIndex::Vacuum)
    }

    /// Whether the label addresses a valid state for a chain of `n_sites`.
    pub fn is_valid(self, n_sites: usize) -> bool {
        match self {
            BasisIndex::Site(i) => (1..=n_sites).contains(&i),
            _ => true,
        }
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisIndex::Vacuum => write!(f, "g"),
            BasisIndex::Photon => write!(f, "p"),
            BasisIndex::Site(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    CavityLoss,
    Decay(usize),
    Dephasing(usize),
    Pump,
    Drain,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::CavityLoss => write!(f, "cavity_loss"),
            ChannelKind::Decay(i) => write!(f, "decay({i})"),
            ChannelKind::Dephasing(i) => write!(f, "dephasing({i})"),
            ChannelKind::Pump => write!(f, "pump"),
            ChannelKind::Drain => write!(f, "drain"),
        }
    }
}

/// A Lindblad jump operator projected onto the truncated space, with its rate.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub operator: Mat<Complex64>,
    pub rate: f64,
    pub kind: ChannelKind,
}

impl JumpChannel {
    fn transition(dim: usize, to: BasisIndex, from: BasisIndex, rate: f64, kind: ChannelKind) -> Self {
        let mut operator = Mat::zeros(dim, dim);
        operator[(to.index(), from.index())] = Complex64::new(1.0, 0.0);
        Self {
            operator,
            rate,
            kind,
        }
    }

    pub fn label(&self) -> String {
        self.kind.to_string()
    }
}

/// Single-excitation Tavis-Cummings Hamiltonian in rad/ps.
///
/// Constant offsets are dropped so the vacuum row and column are zero. When
/// `params.rotating_frame` is set, ω_c/ħ is removed from every excited
/// diagonal entry.
pub fn build_hamiltonian(params: &ModelParams, real: &DisorderRealization) -> Result<Mat<Complex64>> {
    let frame_shift = if params.rotating_frame {
        params.omega_c
    } else {
        0.0
    };
    Ok(energy_matrix(params, real, frame_shift)?.map(|z| z / HBAR_EV_PS))
}

/// Lab-frame Hamiltonian in eV, used for energy currents regardless of frame.
pub fn lab_hamiltonian_ev(params: &ModelParams, real: &DisorderRealization) -> Result<Mat<Complex64>> {
    energy_matrix(params, real, 0.0)
}

fn energy_matrix(
    params: &ModelParams,
    real: &DisorderRealization,
    frame_shift: f64,
) -> Result<Mat<Complex64>> {
    let n = params.n_sites;
    if real.omegas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: real.omegas.len(),
        });
    }
    if !(params.omega_c.is_finite() && params.hopping_j.is_finite() && params.coupling_g.is_finite()) {
        return Err(Error::NonFinite("model energies"));
    }
    if real.omegas.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("site energies"));
    }
    let dim = n + 2;
    let p = BasisIndex::Photon.index();
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut h = Mat::zeros(dim, dim);
    h[(p, p)] = c(params.omega_c - frame_shift);
    let per_site = params.coupling_g / (n as f64).sqrt();
    for (k, &omega) in real.omegas.iter().enumerate() {
        let s = BasisIndex::Site(k + 1).index();
        h[(s, s)] = c(omega - frame_shift);
        h[(p, s)] = c(per_site);
        h[(s, p)] = c(per_site);
    }
    for k in 1..n {
        let a = BasisIndex::Site(k).index();
        let b = BasisIndex::Site(k + 1).index();
        h[(a, b)] = c(params.hopping_j);
        h[(b, a)] = c(params.hopping_j);
    }
    Ok(h)
}

/// The 2N + 3 dissipative channels: cavity loss, per-site decay, per-site
/// dephasing, pump into site 1 and drain out of site N.
///
/// Dephasing uses the projector |i⟩⟨i|, which differs from σᶻ/2 by a multiple
/// of the identity and therefore generates the same dissipator.
pub fn build_jump_channels(params: &ModelParams) -> Vec<JumpChannel> {
    let n = params.n_sites;
    let dim = n + 2;
    let g = BasisIndex::Vacuum;
    let mut channels = Vec::with_capacity(2 * n + 3);
    channels.push(JumpChannel::transition(
        dim,
        g,
        BasisIndex::Photon,
        params.kappa,
        ChannelKind::CavityLoss,
    ));
    for i in 1..=n {
        channels.push(JumpChannel::transition(
            dim,
            g,
            BasisIndex::Site(i),
            params.gamma_decay,
            ChannelKind::Decay(i),
        ));
    }
    for i in 1..=n {
        channels.push(JumpChannel::transition(
            dim,
            BasisIndex::Site(i),
            BasisIndex::Site(i),
            params.gamma_dephasing,
            ChannelKind::Dephasing(i),
        ));
    }
    channels.push(JumpChannel::transition(
        dim,
        BasisIndex::Site(1),
        g,
        params.gamma_in,
        ChannelKind::Pump,
    ));
    channels.push(JumpChannel::transition(
        dim,
        g,
        BasisIndex::Site(n),
        params.gamma_out,
        ChannelKind::Drain,
    ));
    channels
}
