//! Disorder ensembles, (w, G) sweeps and the statistics pipeline.
//!
//! Every realisation gets its own seed derived from the master seed and its
//! (w, G, sample) indices, and results are gathered into an index-ordered
//! table. Output therefore does not depend on scheduling or worker count.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate, propagate_with_fallback, steady_state, Method, TimeGrid};
use crate::error::{Error, Result};
use crate::liouvillian::{build_liouvillian, DensityMatrix};
use crate::model::{
    build_hamiltonian, build_jump_channels, lab_hamiltonian_ev, sample_disorder, BasisIndex,
    ModelParams,
};
use crate::observables::{
    critical_time, exponent_series, CriticalTime, CriticalTimeMethod, global_entanglement, mean_position, msd, pair_entanglement, photon_number,
    site_entropy, CurrentEvaluator, CurrentReport, MsdSeries,
};

/// Realisations per grid point when none is configured.
pub const DEFAULT_SAMPLES: usize = 256;

/// Number of histogram bins in [`ObservableStats`].
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    SteadyState,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Disorder widths as fractions of ω_m.
    pub w_grid: Vec<f64>,
    /// Collective couplings in eV.
    pub g_grid: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub mode: SweepMode,
    /// Sample times for trajectory mode.
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    /// Terminal-site population threshold for critical times (trajectory
    /// mode).
    #[serde(default)]
    pub p_cri: Option<f64>,
    /// Fixed propagation method; unset means the stepped exponential.
    /// Spectral falls back to stepped when its eigenbasis is ill-conditioned.
    #[serde(default)]
    pub method: Option<Method>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl SweepConfig {
    pub fn steady(w_grid: Vec<f64>, g_grid: Vec<f64>, samples: usize, master_seed: u64) -> Self {
        Self {
            w_grid,
            g_grid,
            samples,
            master_seed,
            mode: SweepMode::SteadyState,
            grid: None,
            p_cri: None,
            method: None,
        }
    }

    pub fn trajectory(
        w_grid: Vec<f64>,
        g_grid: Vec<f64>,
        samples: usize,
        master_seed: u64,
        grid: TimeGrid,
    ) -> Self {
        Self {
            w_grid,
            g_grid,
            samples,
            master_seed,
            mode: SweepMode::Trajectory,
            grid: Some(grid),
            p_cri: None,
            method: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParams("samples must be >= 1".into()));
        }
        if self.w_grid.is_empty() || self.g_grid.is_empty() {
            return Err(Error::InvalidParams("w_grid and g_grid must be non-empty".into()));
        }
        if self.w_grid.iter().chain(&self.g_grid).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParams("grid values must be finite and >= 0".into()));
        }
        if let Some(p) = self.p_cri {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParams(format!("p_cri must lie in (0, 1), got {p}")));
            }
        }
        if self.mode == SweepMode::Trajectory && self.grid.is_none() {
            return Err(Error::InvalidParams("trajectory mode needs a time grid".into()));
        }
        let mut seen = HashSet::with_capacity(self.total_realizations());
        for wi in 0..self.w_grid.len() {
            for gi in 0..self.g_grid.len() {
                for si in 0..self.samples {
                    if !seen.insert(realization_seed(self.master_seed, wi, gi, si)) {
                        return Err(Error::InvalidParams(format!(
                            "seed collision at (w={wi}, G={gi}, sample={si})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn total_realizations(&self) -> usize {
        self.w_grid.len() * self.g_grid.len() * self.samples
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one realisation, a splitmix64 chain over the master seed and the
/// (w, G, sample) indices.
pub fn realization_seed(master: u64, w_index: usize, g_index: usize, sample: usize) -> u64 {
    [w_index, g_index, sample]
        .iter()
        .fold(splitmix64(master), |acc, &v| splitmix64(acc ^ splitmix64(v as u64)))
}

/// Steady-state quantities of one realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyRecord {
    pub currents: CurrentReport,
    /// Populations C_gg, C_pp, C_11 .. C_NN.
    pub populations: Vec<f64>,
}

/// Observables of one realisation along the time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub i_in: Vec<f64>,
    pub i_out: Vec<f64>,
    pub msd: Vec<f64>,
    pub mean_position: Vec<f64>,
    pub photon_number: Vec<f64>,
    /// `site_populations[k][i]` is C_{i+1,i+1} at grid point k.
    pub site_populations: Vec<Vec<f64>>,
    pub entropy_last_site: Vec<f64>,
    pub formation_last_pair: Vec<f64>,
    pub formation_last_photon: Vec<f64>,
    pub relative_entropy: Vec<f64>,
    /// Propagation method actually used.
    pub method: String,
}

impl TrackRecord {
    /// C_NN along the grid.
    pub fn last_site_population(&self) -> Vec<f64> {
        self.site_populations
            .iter()
            .map(|p| *p.last().unwrap_or(&0.0))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub seed: u64,
    pub min_energy: f64,
    pub steady: Option<SteadyRecord>,
    pub tracks: Option<TrackRecord>,
    /// Set when a solver failed; the record is then excluded from statistics.
    pub failure: Option<String>,
}

impl RealizationRecord {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs one realisation. Solver failures are captured in the record.
pub fn run_realization(
    params: &ModelParams,
    seed: u64,
    mode: SweepMode,
    grid: Option<&TimeGrid>,
) -> RealizationRecord {
    run_realization_with(params, seed, mode, grid, None)
}

/// [`run_realization`] with an optional fixed propagation method.
pub fn run_realization_with(
    params: &ModelParams,
    seed: u64,
    mode: SweepMode,
    grid: Option<&TimeGrid>,
    method: Option<Method>,
) -> RealizationRecord {
    let real = sample_disorder(params, seed);
    let min_energy = real.min_energy();
    let mut record = RealizationRecord {
        seed,
        min_energy,
        steady: None,
        tracks: None,
        failure: None,
    };
    let result = (|| -> Result<()> {
        params.validate()?;
        let h = build_hamiltonian(params, &real)?;
        let h_lab = lab_hamiltonian_ev(params, &real)?;
        let channels = build_jump_channels(params);
        let l = build_liouvillian(&h, &channels)?;
        let currents = CurrentEvaluator::new(&h_lab, &channels)?;
        match mode {
            SweepMode::SteadyState => {
                let rho = steady_state(&l)?;
                record.steady = Some(SteadyRecord {
                    currents: currents.report(&rho),
                    populations: (0..rho.dim()).map(|k| rho.matrix()[(k, k)].re).collect(),
                });
            }
            SweepMode::Trajectory => {
                let grid = grid.ok_or_else(|| {
                    Error::InvalidParams("trajectory mode needs a time grid".into())
                })?;
                let rho0 = DensityMatrix::vacuum(params.dim());
                let (traj, method) = match method {
                    Some(Method::Spectral) => propagate_with_fallback(&l, &rho0, grid)?,
                    Some(m) => (propagate(&l, &rho0, grid, m)?, m),
                    None => {
                        let m = Method::SteppedExponential;
                        (propagate(&l, &rho0, grid, m)?, m)
                    }
                };
                record.tracks = Some(collect_tracks(params.n_sites, &traj.states, &currents, method)?);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        record.failure = Some(e.to_string());
    }
    record
}

fn collect_tracks(
    n: usize,
    states: &[DensityMatrix],
    currents: &CurrentEvaluator,
    method: Method,
) -> Result<TrackRecord> {
    let len = states.len();
    let mut t = TrackRecord {
        i_in: Vec::with_capacity(len),
        i_out: Vec::with_capacity(len),
        msd: Vec::with_capacity(len),
        mean_position: Vec::with_capacity(len),
        photon_number: Vec::with_capacity(len),
        site_populations: Vec::with_capacity(len),
        entropy_last_site: Vec::with_capacity(len),
        formation_last_pair: Vec::with_capacity(len),
        formation_last_photon: Vec::with_capacity(len),
        relative_entropy: Vec::with_capacity(len),
        method: match method {
            Method::Spectral => "spectral",
            Method::SteppedExponential => "stepped_exponential",
            Method::AdaptiveIntegrator => "adaptive_integrator",
        }
        .to_string(),
    };
    let last = BasisIndex::Site(n);
    for rho in states {
        let (i_in, i_out) = currents.in_out(rho);
        t.i_in.push(i_in);
        t.i_out.push(i_out);
        t.msd.push(msd(rho, false));
        t.mean_position.push(mean_position(rho));
        t.photon_number.push(photon_number(rho));
        t.site_populations
            .push((1..=n).map(|i| rho.population(BasisIndex::Site(i))).collect());
        t.entropy_last_site.push(site_entropy(rho, last));
        t.formation_last_pair.push(if n >= 2 {
            pair_entanglement(rho, last, BasisIndex::Site(n - 1)).1
        } else {
            0.0
        });
        t.formation_last_photon
            .push(pair_entanglement(rho, last, BasisIndex::Photon).1);
        t.relative_entropy.push(global_entanglement(rho)?);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Summary of one scalar observable across realisations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (zero for a single sample).
    pub std: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub histogram: Histogram,
    /// exp(mean(ln x)) over strictly positive samples.
    pub geometric: Option<f64>,
    /// Samples excluded from the geometric mean for being ≤ 0.
    pub geometric_excluded: usize,
}

/// Arithmetic and geometric statistics with a fixed-bin histogram.
pub fn summarize(values: &[f64]) -> ObservableStats {
    let n = values.len();
    if n == 0 {
        return ObservableStats {
            count: 0,
            mean: f64::NAN,
            median: f64::NAN,
            std: f64::NAN,
            sem: f64::NAN,
            histogram: Histogram {
                edges: vec![],
                counts: vec![],
            },
            geometric: None,
            geometric_excluded: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    let std = if n > 1 && hi > lo {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let histogram = if hi > lo {
        let width = (hi - lo) / HISTOGRAM_BINS as f64;
        let mut counts = vec![0usize; HISTOGRAM_BINS];
        for &v in values {
            let b = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[b] += 1;
        }
        Histogram {
            edges: (0..=HISTOGRAM_BINS).map(|k| lo + width * k as f64).collect(),
            counts,
        }
    } else {
        Histogram {
            edges: vec![lo, hi],
            counts: vec![n],
        }
    };
    let positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    let geometric = (!positive.is_empty())
        .then(|| (positive.iter().map(|v| v.ln()).sum::<f64>() / positive.len() as f64).exp());
    ObservableStats {
        count: n,
        mean,
        median,
        std,
        sem: std / (n as f64).sqrt(),
        histogram,
        geometric,
        geometric_excluded: n - positive.len(),
    }
}

/// Ensemble-averaged tracks in trajectory mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTracks {
    pub times: Vec<f64>,
    pub i_in: Vec<f64>,
    pub i_out: Vec<f64>,
    pub msd: Vec<f64>,
    pub mean_position: Vec<f64>,
    pub photon_number: Vec<f64>,
    pub site_populations: Vec<Vec<f64>>,
    pub entropy_last_site: Vec<f64>,
    pub formation_last_pair: Vec<f64>,
    pub formation_last_photon: Vec<f64>,
    pub relative_entropy: Vec<f64>,
    /// Diffusion exponent of the ensemble-mean MSD.
    pub exponent: MsdSeries,
}

fn mean_of(tracks: &[&TrackRecord], f: impl Fn(&TrackRecord) -> &Vec<f64>) -> Vec<f64> {
    let m = tracks.len() as f64;
    let len = f(tracks[0]).len();
    (0..len)
        .map(|k| tracks.iter().map(|t| f(t)[k]).sum::<f64>() / m)
        .collect()
}

fn mean_tracks(times: &[f64], tracks: &[&TrackRecord]) -> MeanTracks {
    let m = tracks.len() as f64;
    let msd = mean_of(tracks, |t| &t.msd);
    let site_populations = (0..times.len())
        .map(|k| {
            let n = tracks[0].site_populations[k].len();
            (0..n)
                .map(|i| tracks.iter().map(|t| t.site_populations[k][i]).sum::<f64>() / m)
                .collect()
        })
        .collect();
    MeanTracks {
        times: times.to_vec(),
        i_in: mean_of(tracks, |t| &t.i_in),
        i_out: mean_of(tracks, |t| &t.i_out),
        exponent: exponent_series(times, &msd),
        msd,
        mean_position: mean_of(tracks, |t| &t.mean_position),
        photon_number: mean_of(tracks, |t| &t.photon_number),
        site_populations,
        entropy_last_site: mean_of(tracks, |t| &t.entropy_last_site),
        formation_last_pair: mean_of(tracks, |t| &t.formation_last_pair),
        formation_last_photon: mean_of(tracks, |t| &t.formation_last_photon),
        relative_entropy: mean_of(tracks, |t| &t.relative_entropy),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub samples_requested: usize,
    pub samples_used: usize,
    pub failures: usize,
    /// Scalar observables keyed by name (steady mode: `i_in`, `i_out`,
    /// `ratio`, `photon_number`, `last_site_population`).
    pub observables: BTreeMap<String, ObservableStats>,
    /// Mean steady populations C_gg, C_pp, C_11 .. C_NN.
    pub mean_populations: Option<Vec<f64>>,
    pub mean_tracks: Option<MeanTracks>,
    /// Critical time averaged over crossing realisations, with the fraction
    /// that never crossed.
    pub critical_time_per_realization: Option<CriticalTime>,
    /// Critical time of the ensemble-mean C_NN track.
    pub critical_time_mean_track: Option<CriticalTime>,
}

impl EnsembleStats {
    pub fn get(&self, name: &str) -> Option<&ObservableStats> {
        self.observables.get(name)
    }
}

/// Statistics over the records of one grid point.
pub fn aggregate(
    records: &[RealizationRecord],
    times: Option<&[f64]>,
    p_cri: Option<f64>,
) -> EnsembleStats {
    let good: Vec<&RealizationRecord> = records.iter().filter(|r| r.ok()).collect();
    let mut observables = BTreeMap::new();
    let steady: Vec<&SteadyRecord> = good.iter().filter_map(|r| r.steady.as_ref()).collect();
    let mut mean_populations = None;
    if !steady.is_empty() {
        let col = |f: &dyn Fn(&SteadyRecord) -> Option<f64>| -> Vec<f64> {
            steady.iter().filter_map(|s| f(s)).collect()
        };
        observables.insert("i_in".into(), summarize(&col(&|s| Some(s.currents.i_in))));
        observables.insert("i_out".into(), summarize(&col(&|s| Some(s.currents.i_out))));
        observables.insert("ratio".into(), summarize(&col(&|s| s.currents.ratio)));
        observables.insert("photon_number".into(), summarize(&col(&|s| Some(s.populations[1]))));
        observables.insert(
            "last_site_population".into(),
            summarize(&col(&|s| s.populations.last().copied())),
        );
        let m = steady.len() as f64;
        let d = steady[0].populations.len();
        mean_populations = Some(
            (0..d)
                .map(|k| steady.iter().map(|s| s.populations[k]).sum::<f64>() / m)
                .collect(),
        );
    }
    let tracks: Vec<&TrackRecord> = good.iter().filter_map(|r| r.tracks.as_ref()).collect();
    let mean_tracks = match (times, tracks.is_empty()) {
        (Some(times), false) => Some(mean_tracks(times, &tracks)),
        _ => None,
    };
    let (mut ct_each, mut ct_mean) = (None, None);
    if let (Some(times), Some(p), false) = (times, p_cri, tracks.is_empty()) {
        let last: Vec<Vec<f64>> = tracks.iter().map(|t| t.last_site_population()).collect();
        ct_each = critical_time(times, &last, p, CriticalTimeMethod::PerRealizationMean).ok();
        ct_mean = critical_time(times, &last, p, CriticalTimeMethod::MeanTrajectory).ok();
    }
    EnsembleStats {
        samples_requested: records.len(),
        samples_used: good.len(),
        failures: records.len() - good.len(),
        observables,
        mean_populations,
        mean_tracks,
        critical_time_per_realization: ct_each,
        critical_time_mean_track: ct_mean,
    }
}

/// One (w, G) grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub w_over_omega_m: f64,
    pub g_ev: f64,
    pub records: Vec<RealizationRecord>,
    pub stats: EnsembleStats,
}

/// Runs every realisation of `config` on top of `base` (whose `disorder_w`
/// and `coupling_g` are overridden by the grid). `threads = None` uses the
/// current rayon pool.
pub fn run_ensemble(
    base: &ModelParams,
    config: &SweepConfig,
    threads: Option<usize>,
) -> Result<Vec<GridPoint>> {
    base.validate()?;
    let grid = config.grid.as_ref();
    run_grid(config, threads, |wi, gi, seed| {
        let p = base
            .clone()
            .with_disorder(config.w_grid[wi] * base.omega_m)
            .with_coupling(config.g_grid[gi]);
        run_realization_with(&p, seed, config.mode, grid, config.method)
    })
}

/// Evaluates `realize(w_index, g_index, seed)` over the whole grid of
/// `config` and aggregates each grid point.
///
/// Zero-disorder points are seed independent, so they are realised once and
/// the record is copied with each sample's seed.
pub fn run_grid<F>(config: &SweepConfig, threads: Option<usize>, realize: F) -> Result<Vec<GridPoint>>
where
    F: Fn(usize, usize, u64) -> RealizationRecord + Sync,
{
    config.validate()?;
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(|| Ok(run_grid_inner(config, &realize))),
        None => Ok(run_grid_inner(config, &realize)),
    }
}

fn run_grid_inner<F>(config: &SweepConfig, realize: &F) -> Vec<GridPoint>
where
    F: Fn(usize, usize, u64) -> RealizationRecord + Sync,
{
    let (nw, ng, ns) = (config.w_grid.len(), config.g_grid.len(), config.samples);
    let tasks: Vec<(usize, usize, usize)> = (0..nw)
        .flat_map(|wi| (0..ng).flat_map(move |gi| (0..ns).map(move |si| (wi, gi, si))))
        .filter(|&(wi, _, si)| config.w_grid[wi] != 0.0 || si == 0)
        .collect();
    let done: Vec<RealizationRecord> = tasks
        .par_iter()
        .map(|&(wi, gi, si)| realize(wi, gi, realization_seed(config.master_seed, wi, gi, si)))
        .collect();
    let mut by_point: BTreeMap<(usize, usize), Vec<RealizationRecord>> = BTreeMap::new();
    for (&(wi, gi, _), rec) in tasks.iter().zip(done) {
        by_point.entry((wi, gi)).or_default().push(rec);
    }
    let times = config.grid.as_ref().map(|g| g.points());
    let mut out = Vec::with_capacity(nw * ng);
    for wi in 0..nw {
        for gi in 0..ng {
            let mut records = by_point.remove(&(wi, gi)).unwrap_or_default();
            if config.w_grid[wi] == 0.0 {
                let template = records.pop().expect("one zero-disorder realisation");
                records = (0..ns)
                    .map(|si| RealizationRecord {
                        seed: realization_seed(config.master_seed, wi, gi, si),
                        ..template.clone()
                    })
                    .collect();
            }
            let stats = aggregate(&records, times, config.p_cri);
            out.push(GridPoint {
                w_over_omega_m: config.w_grid[wi],
                g_ev: config.g_grid[gi],
                records,
                stats,
            });
        }
    }
    out
}

/// One row of the steady-state sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w_over_omega_m: f64,
    pub g_ev: f64,
    pub i_out_mean: f64,
    pub i_out_median: f64,
    pub i_out_std: f64,
    pub i_in_mean: f64,
    pub ratio_arith: f64,
    pub ratio_geom: f64,
    pub samples_used: usize,
    /// Realisations excluded from the statistics (solver failures or an
    /// undefined ratio).
    pub censored: usize,
}

impl SweepRow {
    pub fn from_point(p: &GridPoint) -> Self {
        let s = &p.stats;
        let field = |name: &str, f: fn(&ObservableStats) -> f64| s.get(name).map(f).unwrap_or(f64::NAN);
        let ratio_count = s.get("ratio").map(|r| r.count).unwrap_or(0);
        Self {
            w_over_omega_m: p.w_over_omega_m,
            g_ev: p.g_ev,
            i_out_mean: field("i_out", |o| o.mean),
            i_out_median: field("i_out", |o| o.median),
            i_out_std: field("i_out", |o| o.std),
            i_in_mean: field("i_in", |o| o.mean),
            ratio_arith: field("ratio", |o| o.mean),
            ratio_geom: field("ratio", |o| o.geometric.unwrap_or(f64::NAN)),
            samples_used: s.samples_used,
            censored: s.samples_requested - ratio_count,
        }
    }
}

/// Steady-state sweep over the (w, G) grid, one row per grid point
/// (w-major order).
pub fn sweep_grid(
    base: &ModelParams,
    config: &SweepConfig,
    threads: Option<usize>,
) -> Result<(Vec<SweepRow>, Vec<GridPoint>)> {
    if config.mode != SweepMode::SteadyState {
        return Err(Error::InvalidParams("sweep_grid needs steady_state mode".into()));
    }
    let points = run_ensemble(base, config, threads)?;
    Ok((points.iter().map(SweepRow::from_point).collect(), points))
}

/// Location of the maximum of `values` sampled at `xs`, refined by the
/// vertex of the parabola through the largest sample and its neighbours.
/// Falls back to the grid point at the ends of the grid.
pub fn peak_location(xs: &[f64], values: &[f64]) -> Option<f64> {
    let k = (0..values.len())
        .filter(|&k| values[k].is_finite())
        .max_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    if k == 0 || k + 1 == values.len() {
        return Some(xs[k]);
    }
    let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !den.is_finite() {
        return Some(x1);
    }
    Some(x1 - 0.5 * num / den)
}
