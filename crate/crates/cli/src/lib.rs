//! Command-line driver: configuration, experiment subcommands and
//! deterministic result files.
//!
//! Every command writes its data files plus `metadata.json` into the output
//! directory. Data files depend only on the configuration, so rerunning a
//! command reproduces them byte for byte; wall time and the timestamp live
//! in the metadata only.

pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use cavity_exciton::classical::classical_sweep;
use cavity_exciton::ensemble::{
    realization_seed, run_ensemble, run_realization_with, EnsembleStats, GridPoint, SweepConfig,
    SweepMode, SweepRow,
};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{ExperimentConfig, Format};
pub use error::CliError;
use output::{sweep_table, track_table, write_json, Table};

/// The four reference cases as (label, w/ω_m, G in eV).
pub const CASES: [(&str, f64, f64); 4] = [
    ("A", 0.0, 0.0),
    ("B", 0.1, 0.0),
    ("C", 0.0, 0.4),
    ("D", 0.1, 0.4),
];

#[derive(Debug, Parser)]
#[command(name = "cavity-exciton", version, about = "Exciton transport in a lossy cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time evolution of one disorder realisation from the vacuum.
    Dynamics(Args),
    /// Steady state and currents of one disorder realisation.
    Steady(Args),
    /// Steady-state ensemble statistics over the (w, G) grid.
    Sweep(Args),
    /// Disorder sweep of the classical Markov chain.
    Classical(Args),
    /// Ensemble statistics with histograms at one (w, G) point.
    Stats(Args),
    /// Ensemble trajectories of the four reference cases A to D.
    Cases(Args),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dynamics(_) => "dynamics",
            Command::Steady(_) => "steady",
            Command::Sweep(_) => "sweep",
            Command::Classical(_) => "classical",
            Command::Stats(_) => "stats",
            Command::Cases(_) => "cases",
        }
    }

    fn args(&self) -> &Args {
        match self {
            Command::Dynamics(a)
            | Command::Steady(a)
            | Command::Sweep(a)
            | Command::Classical(a)
            | Command::Stats(a)
            | Command::Cases(a) => a,
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Realisations per grid point.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Disorder width as a fraction of ω_m.
    #[arg(long)]
    pub w: Option<f64>,
    /// Collective coupling in eV.
    #[arg(long = "G")]
    pub g: Option<f64>,
    /// Last sample time, ps.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of nonzero sample times.
    #[arg(long)]
    pub points: Option<usize>,
    /// Terminal-site population threshold for critical times.
    #[arg(long)]
    pub pcri: Option<f64>,
}

impl Args {
    /// Config file (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            c.sweep.master_seed = s;
        }
        if let Some(n) = self.samples {
            c.sweep.samples = n;
        }
        if let Some(d) = &self.out {
            c.output.dir = d.clone();
        }
        if let Some(f) = self.format {
            c.output.format = f;
        }
        if let Some(w) = self.w {
            c.sweep.w_grid = vec![w];
            c.model.disorder_w = w * c.model.omega_m;
        }
        if let Some(g) = self.g {
            c.sweep.g_grid = vec![g];
            c.model.coupling_g = g;
        }
        if let Some(t) = self.tmax {
            c.time.t_max = t;
        }
        if let Some(n) = self.points {
            c.time.points = n;
        }
        if let Some(p) = self.pcri {
            c.dynamics.p_cri = Some(p);
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Failures are reported on stderr as one
/// JSON object.
pub fn run_experiment<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(dir) => {
            eprintln!("wrote {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}

/// Runs one command and returns its output directory.
pub fn run(command: &Command) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let args = command.args();
    let cfg = args.resolve()?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let (files, summary) = match command {
        Command::Dynamics(_) => cmd_dynamics(&cfg, &dir, args.threads)?,
        Command::Steady(_) => cmd_steady(&cfg, &dir, args.threads)?,
        Command::Sweep(_) => cmd_sweep(&cfg, &dir, args.threads)?,
        Command::Classical(_) => cmd_classical(&cfg, &dir, args.threads)?,
        Command::Stats(_) => cmd_stats(&cfg, &dir, args.threads)?,
        Command::Cases(_) => cmd_cases(&cfg, &dir, args.threads)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let meta = json!({
        "schema_version": output::SCHEMA_VERSION,
        "command": command.name(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "master_seed": cfg.sweep.master_seed,
        "threads": args.threads,
        "config": serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?,
        "files": files,
        "summary": summary,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "timestamp_unix_s": timestamp,
    });
    write_json(&dir, "metadata.json", &meta)?;
    Ok(dir)
}

type CommandOutput = (Vec<String>, Value);

/// Single (w, G) point: the flags if given, otherwise the model section.
fn point_params(cfg: &ExperimentConfig) -> (f64, f64) {
    (cfg.model.disorder_w / cfg.model.omega_m, cfg.model.coupling_g)
}

fn point_config(cfg: &ExperimentConfig, mode: SweepMode, samples: usize) -> Result<SweepConfig, CliError> {
    let (w, g) = point_params(cfg);
    let mut s = cfg.sweep_config(mode)?;
    s.w_grid = vec![w];
    s.g_grid = vec![g];
    s.samples = samples;
    Ok(s)
}

fn failed(point: &GridPoint) -> Option<&str> {
    point.records.iter().find_map(|r| r.failure.as_deref())
}

fn cmd_dynamics(cfg: &ExperimentConfig, dir: &Path, _threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let s = point_config(cfg, SweepMode::Trajectory, 1)?;
    let (w, g) = point_params(cfg);
    let params = cfg.model.clone().with_disorder(w * cfg.model.omega_m).with_coupling(g);
    let seed = realization_seed(s.master_seed, 0, 0, 0);
    let record = run_realization_with(&params, seed, SweepMode::Trajectory, s.grid.as_ref(), s.method);
    if let Some(f) = &record.failure {
        return Err(CliError::Solver(f.clone()));
    }
    let times = s.grid.as_ref().map(|g| g.points());
    let stats = cavity_exciton::ensemble::aggregate(std::slice::from_ref(&record), times, s.p_cri);
    let tracks = stats.mean_tracks.as_ref().expect("trajectory record");
    let name = track_table(tracks, &cfg.observables).write(dir, "dynamics", cfg.output.format)?;
    let summary = json!({
        "w_over_omega_m": w,
        "G_eV": g,
        "seed": seed,
        "min_site_energy_eV": record.min_energy,
        "method": record.tracks.as_ref().map(|t| t.method.clone()),
        "critical_time": stats.critical_time_mean_track,
    });
    Ok((vec![name], summary))
}

fn cmd_steady(cfg: &ExperimentConfig, dir: &Path, threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let s = point_config(cfg, SweepMode::SteadyState, 1)?;
    let points = run_ensemble(&cfg.model, &s, threads)?;
    let p = &points[0];
    if let Some(f) = failed(p) {
        return Err(CliError::Solver(f.to_string()));
    }
    let steady = p.records[0].steady.as_ref().expect("steady record");
    let mut files = vec![sweep_table(&[SweepRow::from_point(p)]).write(dir, "steady", cfg.output.format)?];

    let mut pops = Table::new(&["index", "label", "population"]);
    for (k, &v) in steady.populations.iter().enumerate() {
        let label = cavity_exciton::BasisIndex::from_index(k).to_string();
        pops.push(vec![k.into(), label.as_str().into(), v.into()]);
    }
    files.push(pops.write(dir, "populations", cfg.output.format)?);

    let mut cur = Table::new(&["channel", "current_eV_per_ps"]);
    for c in &steady.currents.per_channel {
        cur.push(vec![c.channel.to_string().as_str().into(), c.current.into()]);
    }
    files.push(cur.write(dir, "currents", cfg.output.format)?);
    let summary = json!({
        "w_over_omega_m": p.w_over_omega_m,
        "G_eV": p.g_ev,
        "seed": p.records[0].seed,
        "I_in": steady.currents.i_in,
        "I_out": steady.currents.i_out,
        "ratio": steady.currents.ratio,
    });
    Ok((files, summary))
}

fn sweep_summary(points: &[GridPoint]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| {
                json!({
                    "w_over_omega_m": p.w_over_omega_m,
                    "G_eV": p.g_ev,
                    "failures": p.stats.failures,
                    "first_failure": failed(p),
                })
            })
            .collect(),
    )
}

fn cmd_sweep(cfg: &ExperimentConfig, dir: &Path, threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let s = cfg.sweep_config(SweepMode::SteadyState)?;
    let points = run_ensemble(&cfg.model, &s, threads)?;
    let rows: Vec<SweepRow> = points.iter().map(SweepRow::from_point).collect();
    let files = vec![
        sweep_table(&rows).write(dir, "sweep", cfg.output.format)?,
        write_stats(dir, "sweep_stats.json", &points)?,
    ];
    Ok((files, sweep_summary(&points)))
}

fn write_stats(dir: &Path, name: &str, points: &[GridPoint]) -> Result<String, CliError> {
    let stats: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "w_over_omega_m": p.w_over_omega_m,
                "G_eV": p.g_ev,
                "stats": stats_without_tracks(&p.stats),
            })
        })
        .collect();
    write_json(dir, name, &stats)?;
    Ok(name.to_string())
}

fn stats_without_tracks(s: &EnsembleStats) -> EnsembleStats {
    EnsembleStats {
        mean_tracks: None,
        ..s.clone()
    }
}

fn cmd_classical(cfg: &ExperimentConfig, dir: &Path, threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let s = cfg.sweep_config(SweepMode::SteadyState)?;
    let panels: Vec<(String, cavity_exciton::classical::ClassicalParams)> = match &cfg.classical {
        Some(c) => vec![("classical".into(), c.params(&cfg.model)?)],
        None => (0..cavity_exciton::classical::ClassicalParams::PANELS.len())
            .map(|k| {
                (
                    format!("classical_panel{k}"),
                    cavity_exciton::classical::ClassicalParams::panel(k, cfg.model.clone()),
                )
            })
            .collect(),
    };
    let mut files = Vec::new();
    let mut summary = serde_json::Map::new();
    for (stem, cp) in panels {
        let points = classical_sweep(&cp, &s, threads)?;
        let rows: Vec<SweepRow> = points.iter().map(SweepRow::from_point).collect();
        files.push(sweep_table(&rows).write(dir, &stem, cfg.output.format)?);
        files.push(write_stats(dir, &format!("{stem}_stats.json"), &points)?);
        summary.insert(
            stem,
            json!({
                "k_ee": cp.k_ee,
                "k_pe": cp.k_pe,
                "sigma_ee": cp.sigma_ee,
                "sigma_pe": cp.sigma_pe,
                "include_decay": cp.include_decay,
                "include_cavity_loss": cp.include_cavity_loss,
                "points": sweep_summary(&points),
            }),
        );
    }
    Ok((files, Value::Object(summary)))
}

fn histogram_table(stats: &EnsembleStats) -> Table {
    let mut t = Table::new(&["observable", "bin_lo", "bin_hi", "count"]);
    for (name, o) in &stats.observables {
        for (k, &c) in o.histogram.counts.iter().enumerate() {
            t.push(vec![
                name.as_str().into(),
                o.histogram.edges[k].into(),
                o.histogram.edges[k + 1].into(),
                c.into(),
            ]);
        }
    }
    t
}

fn summary_table(stats: &EnsembleStats) -> Table {
    let mut t = Table::new(&[
        "observable",
        "count",
        "mean",
        "median",
        "std",
        "sem",
        "geometric",
        "geometric_excluded",
    ]);
    for (name, o) in &stats.observables {
        t.push(vec![
            name.as_str().into(),
            o.count.into(),
            o.mean.into(),
            o.median.into(),
            o.std.into(),
            o.sem.into(),
            o.geometric.into(),
            o.geometric_excluded.into(),
        ]);
    }
    t
}

fn cmd_stats(cfg: &ExperimentConfig, dir: &Path, threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let s = point_config(cfg, SweepMode::SteadyState, cfg.sweep.samples)?;
    let points = run_ensemble(&cfg.model, &s, threads)?;
    let p = &points[0];
    let mut files = vec![
        summary_table(&p.stats).write(dir, "stats_summary", cfg.output.format)?,
        histogram_table(&p.stats).write(dir, "stats_histogram", cfg.output.format)?,
    ];
    let mut summary = json!({
        "w_over_omega_m": p.w_over_omega_m,
        "G_eV": p.g_ev,
        "samples_used": p.stats.samples_used,
        "failures": p.stats.failures,
    });
    if cfg.dynamics.p_cri.is_some() {
        let t = point_config(cfg, SweepMode::Trajectory, cfg.sweep.samples)?;
        let tp = run_ensemble(&cfg.model, &t, threads)?;
        let st = &tp[0].stats;
        if let Some(tracks) = &st.mean_tracks {
            files.push(track_table(tracks, &cfg.observables).write(dir, "stats_tracks", cfg.output.format)?);
        }
        summary["critical_time_per_realization"] = json!(st.critical_time_per_realization);
        summary["critical_time_mean_track"] = json!(st.critical_time_mean_track);
    }
    Ok((files, summary))
}

fn cmd_cases(cfg: &ExperimentConfig, dir: &Path, threads: Option<usize>) -> Result<CommandOutput, CliError> {
    let mut s = cfg.sweep_config(SweepMode::Trajectory)?;
    s.w_grid = vec![0.0, 0.1];
    s.g_grid = vec![0.0, 0.4];
    let points = run_ensemble(&cfg.model, &s, threads)?;
    let mut files = Vec::new();
    let mut cmp = Table::new(&[
        "case",
        "w_over_omega_m",
        "G_eV",
        "samples_used",
        "I_in_final",
        "I_out_final",
        "ratio_final",
        "nu_final",
        "t_cri_per_realization",
        "t_cri_mean_track",
        "censored_fraction",
    ]);
    for (label, w, g) in CASES {
        let p = points
            .iter()
            .find(|p| p.w_over_omega_m == w && p.g_ev == g)
            .expect("case on grid");
        let tracks = p.stats.mean_tracks.as_ref().ok_or_else(|| {
            CliError::Solver(failed(p).unwrap_or("no successful realisation").to_string())
        })?;
        files.push(track_table(tracks, &cfg.observables).write(dir, &format!("case_{label}"), cfg.output.format)?);
        let last = tracks.times.len() - 1;
        let (i_in, i_out) = (tracks.i_in[last], tracks.i_out[last]);
        let ct_each = p.stats.critical_time_per_realization.as_ref();
        let ct_mean = p.stats.critical_time_mean_track.as_ref();
        cmp.push(vec![
            label.into(),
            w.into(),
            g.into(),
            p.stats.samples_used.into(),
            i_in.into(),
            i_out.into(),
            (i_in != 0.0).then(|| i_out / i_in).into(),
            tracks.exponent.nu[last].into(),
            ct_each.and_then(|c| c.time).into(),
            ct_mean.and_then(|c| c.time).into(),
            ct_each.map(|c| c.censored_fraction).into(),
        ]);
    }
    files.push(cmp.write(dir, "cases", cfg.output.format)?);
    Ok((files, sweep_summary(&points)))
}
