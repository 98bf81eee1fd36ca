//! Measured quantities: coherences, energy currents, diffusion, entropy and
//! entanglement in the single-excitation subspace.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::liouvillian::DensityMatrix;
use crate::model::{BasisIndex, ChannelKind, JumpChannel};

/// Window of the moving average applied to log-log derivatives.
pub const EXPONENT_SMOOTHING_WINDOW: usize = 5;

/// C_{a,b}: the (a, b) entry of ρ in the `g, p, 1..N` ordering.
#[inline]
pub fn coherence(rho: &DensityMatrix, a: BasisIndex, b: BasisIndex) -> Complex64 {
    rho.get(a, b)
}

/// ⟨a†a⟩, which equals C_pp in the truncated space.
pub fn photon_number(rho: &DensityMatrix) -> f64 {
    rho.population(BasisIndex::Photon)
}

/// Binary Shannon entropy in nats, with h(0) = h(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// Hermitian operator K with γ Tr(K ρ) = γ Tr(H D_X[ρ]):
/// K = X†HX − ½(H X†X + X†X H).
fn current_operator(h: &Mat<Complex64>, x: &Mat<Complex64>) -> Mat<Complex64> {
    let xdx = x.adjoint() * x;
    let sandwich = x.adjoint() * h * x;
    let anti = h * &xdx + &xdx * h;
    sandwich - anti.map(|z| z * 0.5)
}

fn trace_product(k: &Mat<Complex64>, rho: &Mat<Complex64>) -> f64 {
    let d = k.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            let kij = k[(i, j)];
            if kij.re != 0.0 || kij.im != 0.0 {
                acc += kij * rho[(j, i)];
            }
        }
    }
    acc.re
}

/// Energy current γ_X Tr(H_lab D_X[ρ]) through one channel, in eV/ps.
///
/// `h_lab` is the lab-frame Hamiltonian in eV.
pub fn channel_current(h_lab: &Mat<Complex64>, ch: &JumpChannel, rho: &DensityMatrix) -> f64 {
    ch.rate * trace_product(&current_operator(h_lab, &ch.operator), rho.matrix())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCurrent {
    pub channel: ChannelKind,
    pub current: f64,
}

/// Energy currents of one state, in eV/ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentReport {
    /// Signed currents, one per channel, in channel order.
    pub per_channel: Vec<ChannelCurrent>,
    pub i_in: f64,
    /// Energy leaving through the drain, stored as a positive magnitude.
    pub i_out: f64,
    /// I_out / I_in; absent when I_in = 0.
    pub ratio: Option<f64>,
}

impl CurrentReport {
    pub fn total(&self) -> f64 {
        self.per_channel.iter().map(|c| c.current).sum()
    }

    pub fn get(&self, kind: ChannelKind) -> Option<f64> {
        self.per_channel
            .iter()
            .find(|c| c.channel == kind)
            .map(|c| c.current)
    }
}

/// Precomputed current operators for repeated evaluation along trajectories.
#[derive(Debug, Clone)]
pub struct CurrentEvaluator {
    ops: Vec<(ChannelKind, f64, Mat<Complex64>)>,
}

impl CurrentEvaluator {
    pub fn new(h_lab: &Mat<Complex64>, channels: &[JumpChannel]) -> Result<Self> {
        let has = |k: ChannelKind| channels.iter().any(|c| c.kind == k);
        if !has(ChannelKind::Pump) || !has(ChannelKind::Drain) {
            return Err(Error::InvalidParams(
                "pump and drain channels are required for transport currents".into(),
            ));
        }
        for ch in channels {
            if ch.operator.nrows() != h_lab.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: h_lab.nrows(),
                    found: ch.operator.nrows(),
                });
            }
        }
        Ok(Self {
            ops: channels
                .iter()
                .map(|ch| (ch.kind, ch.rate, current_operator(h_lab, &ch.operator)))
                .collect(),
        })
    }

    fn current(&self, kind: ChannelKind, rho: &DensityMatrix) -> f64 {
        self.ops
            .iter()
            .find(|(k, _, _)| *k == kind)
            .map(|(_, rate, op)| rate * trace_product(op, rho.matrix()))
            .unwrap_or(0.0)
    }

    /// (I_in, I_out) only.
    pub fn in_out(&self, rho: &DensityMatrix) -> (f64, f64) {
        (
            self.current(ChannelKind::Pump, rho),
            -self.current(ChannelKind::Drain, rho),
        )
    }

    pub fn report(&self, rho: &DensityMatrix) -> CurrentReport {
        let per_channel: Vec<ChannelCurrent> = self
            .ops
            .iter()
            .map(|(kind, rate, op)| ChannelCurrent {
                channel: *kind,
                current: rate * trace_product(op, rho.matrix()),
            })
            .collect();
        let find = |k: ChannelKind| {
            per_channel
                .iter()
                .find(|c| c.channel == k)
                .map(|c| c.current)
                .unwrap_or(0.0)
        };
        let i_in = find(ChannelKind::Pump);
        let i_out = -find(ChannelKind::Drain);
        CurrentReport {
            ratio: (i_in != 0.0).then(|| i_out / i_in),
            per_channel,
            i_in,
            i_out,
        }
    }
}

/// Per-channel currents, I_in, I_out and their ratio.
pub fn transport_currents(
    h_lab: &Mat<Complex64>,
    channels: &[JumpChannel],
    rho: &DensityMatrix,
) -> Result<CurrentReport> {
    Ok(CurrentEvaluator::new(h_lab, channels)?.report(rho))
}

/// Σ_i i² C_ii, or the same divided by the excited-site population when
/// `normalized` is set.
pub fn msd(rho: &DensityMatrix, normalized: bool) -> f64 {
    let n = rho.dim() - 2;
    let mut acc = 0.0;
    let mut pop = 0.0;
    for i in 1..=n {
        let c = rho.population(BasisIndex::Site(i));
        acc += (i * i) as f64 * c;
        pop += c;
    }
    if normalized {
        if pop > 0.0 {
            acc / pop
        } else {
            0.0
        }
    } else {
        acc
    }
}

/// Σ_i i C_ii (not normalised by the excited population).
pub fn mean_position(rho: &DensityMatrix) -> f64 {
    let n = rho.dim() - 2;
    (1..=n)
        .map(|i| i as f64 * rho.population(BasisIndex::Site(i)))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdSeries {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
    /// ½ d ln(MSD)/d ln t; `None` where undefined.
    pub nu: Vec<Option<f64>>,
    pub smoothing_window: usize,
}

/// MSD along a trajectory and its diffusion exponent.
pub fn msd_and_exponent(traj: &Trajectory) -> MsdSeries {
    let msd_track: Vec<f64> = traj.states.iter().map(|s| msd(s, false)).collect();
    exponent_series(traj.times(), &msd_track)
}

/// ν(t) = ½ d ln(MSD)/d ln t by centred differences in log-log space,
/// followed by a centred moving average over `EXPONENT_SMOOTHING_WINDOW`
/// points. Endpoints and points with t = 0 or MSD = 0 are undefined.
pub fn exponent_series(times: &[f64], msd_track: &[f64]) -> MsdSeries {
    let n = times.len().min(msd_track.len());
    let usable = |k: usize| times[k] > 0.0 && msd_track[k] > 0.0;
    let mut raw = vec![None; n];
    for k in 1..n.saturating_sub(1) {
        if usable(k - 1) && usable(k) && usable(k + 1) {
            let dy = msd_track[k + 1].ln() - msd_track[k - 1].ln();
            let dx = times[k + 1].ln() - times[k - 1].ln();
            raw[k] = Some(0.5 * dy / dx);
        }
    }
    let half = EXPONENT_SMOOTHING_WINDOW / 2;
    let nu = (0..n)
        .map(|k| {
            raw[k]?;
            let lo = k.saturating_sub(half);
            let hi = (k + half).min(n - 1);
            let vals: Vec<f64> = (lo..=hi).filter_map(|j| raw[j]).collect();
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    MsdSeries {
        times: times[..n].to_vec(),
        msd: msd_track[..n].to_vec(),
        nu,
        smoothing_window: EXPONENT_SMOOTHING_WINDOW,
    }
}

/// First-order Rényi entropy of particle `a`: h(p_A) with
/// p_A = ½ − √((½ − C_AA)² + |C_Ag|²).
pub fn site_entropy(rho: &DensityMatrix, a: BasisIndex) -> f64 {
    let caa = rho.population(a);
    let cag = rho.get(a, BasisIndex::Vacuum).norm();
    let p = 0.5 - ((0.5 - caa).powi(2) + cag * cag).sqrt();
    binary_entropy(p)
}

/// Concurrence 2|C_AB| and entanglement of formation
/// h(½ + ½√(1 − E_C²)) of the pair (A, B).
pub fn pair_entanglement(rho: &DensityMatrix, a: BasisIndex, b: BasisIndex) -> (f64, f64) {
    let concurrence = (2.0 * rho.get(a, b).norm()).min(1.0);
    (concurrence, formation_from_concurrence(concurrence))
}

pub fn formation_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy(0.5 + 0.5 * (1.0 - c * c).sqrt())
}

/// Relative entropy of entanglement Tr(ρ ln ρ) − Σ_α C_αα ln C_αα, in nats.
pub fn global_entanglement(rho: &DensityMatrix) -> Result<f64> {
    let eig = rho.eigenvalues()?;
    if let Some(&min) = eig.first() {
        if min < -1e-10 {
            return Err(Error::NegativeEigenvalue(min));
        }
    }
    let xlnx = |x: f64| {
        if x > 0.0 {
            x * x.max(1e-300).ln()
        } else {
            0.0
        }
    };
    let neg_entropy: f64 = eig.iter().map(|&l| xlnx(l)).sum();
    let diag: f64 = (0..rho.dim())
        .map(|k| xlnx(rho.matrix()[(k, k)].re))
        .sum();
    let er = neg_entropy - diag;
    Ok(if er.abs() <= 1e-12 { 0.0 } else { er })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalTimeMethod {
    /// Crossing time of each realisation, averaged over those that cross.
    PerRealizationMean,
    /// Crossing time of the ensemble-mean track.
    MeanTrajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTime {
    pub time: Option<f64>,
    pub censored_fraction: f64,
}

/// First time a track reaches `threshold`, linearly interpolated.
pub fn first_crossing(times: &[f64], track: &[f64], threshold: f64) -> Option<f64> {
    let k = track.iter().position(|&v| v >= threshold)?;
    if k == 0 {
        return Some(times[0]);
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (v0, v1) = (track[k - 1], track[k]);
    Some(t0 + (threshold - v0) * (t1 - t0) / (v1 - v0))
}

/// Time for the terminal-site population to reach `p_cri`.
pub fn critical_time(
    times: &[f64],
    tracks: &[Vec<f64>],
    p_cri: f64,
    method: CriticalTimeMethod,
) -> Result<CriticalTime> {
    if !(p_cri > 0.0 && p_cri < 1.0) {
        return Err(Error::InvalidParams(format!("P_cri must lie in (0, 1), got {p_cri}")));
    }
    if tracks.is_empty() {
        return Err(Error::InvalidParams("no tracks".into()));
    }
    for tr in tracks {
        if tr.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: tr.len(),
            });
        }
    }
    match method {
        CriticalTimeMethod::PerRealizationMean => {
            let crossings: Vec<f64> = tracks
                .iter()
                .filter_map(|tr| first_crossing(times, tr, p_cri))
                .collect();
            let censored = 1.0 - crossings.len() as f64 / tracks.len() as f64;
            let time = (!crossings.is_empty())
                .then(|| crossings.iter().sum::<f64>() / crossings.len() as f64);
            Ok(CriticalTime {
                time,
                censored_fraction: censored,
            })
        }
        CriticalTimeMethod::MeanTrajectory => {
            let m = tracks.len() as f64;
            let mean: Vec<f64> = (0..times.len())
                .map(|k| tracks.iter().map(|tr| tr[k]).sum::<f64>() / m)
                .collect();
            let time = first_crossing(times, &mean, p_cri);
            Ok(CriticalTime {
                censored_fraction: if time.is_some() { 0.0 } else { 1.0 },
                time,
            })
        }
    }
}
