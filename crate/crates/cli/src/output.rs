//! Result tables and metadata records.
//!
//! Floats are written with 17 significant digits so that identical runs give
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cavity_exciton::ensemble::{MeanTracks, SweepRow};
use serde_json::{json, Value};

use crate::config::Format;
use crate::error::CliError;

/// Version of the CSV column layouts and the metadata schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Column groups selectable through `observables` in the config.
pub const OBSERVABLE_NAMES: &[&str] = &[
    "i_in",
    "i_out",
    "ratio",
    "msd",
    "nu",
    "mean_position",
    "photon_number",
    "populations",
    "entropy_last_site",
    "formation_last_pair",
    "formation_last_photon",
    "relative_entropy",
];

pub const SWEEP_COLUMNS: &[&str] = &[
    "w_over_omega_m",
    "G_eV",
    "I_out_mean",
    "I_out_median",
    "I_out_std",
    "I_in_mean",
    "ratio_arith",
    "ratio_geom",
    "samples_used",
    "censored",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::F)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => format_f64(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(v) if v.is_finite() => json!(v),
            Cell::F(_) | Cell::Empty => Value::Null,
            Cell::U(v) => json!(v),
            Cell::S(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({
            "schema_version": SCHEMA_VERSION,
            "columns": self.columns,
            "rows": rows,
        }))
        .expect("table serializes");
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv` or `<stem>.json` into `dir`, returning the file
    /// name.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<String, CliError> {
        let (name, body) = match format {
            Format::Csv => (format!("{stem}.csv"), self.to_csv()),
            Format::Json => (format!("{stem}.json"), self.to_json()),
        };
        write_file(dir, &name, &body)?;
        Ok(name)
    }
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_file(dir, name, &s)
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            r.w_over_omega_m.into(),
            r.g_ev.into(),
            r.i_out_mean.into(),
            r.i_out_median.into(),
            r.i_out_std.into(),
            r.i_in_mean.into(),
            r.ratio_arith.into(),
            r.ratio_geom.into(),
            r.samples_used.into(),
            r.censored.into(),
        ]);
    }
    t
}

/// Time series table; `selection` empty means every observable.
pub fn track_table(tracks: &MeanTracks, selection: &[String]) -> Table {
    let want = |name: &str| selection.is_empty() || selection.iter().any(|s| s == name);
    let n_sites = tracks.site_populations.first().map_or(0, Vec::len);
    let mut columns = vec!["t_ps".to_string()];
    for &name in OBSERVABLE_NAMES {
        if !want(name) {
            continue;
        }
        if name == "populations" {
            columns.extend((1..=n_sites).map(|i| format!("pop_{i}")));
        } else {
            columns.push(name.to_string());
        }
    }
    let mut t = Table::new(&columns);
    for (k, &time) in tracks.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![time.into()];
        for &name in OBSERVABLE_NAMES {
            if !want(name) {
                continue;
            }
            match name {
                "i_in" => row.push(tracks.i_in[k].into()),
                "i_out" => row.push(tracks.i_out[k].into()),
                "ratio" => row.push(
                    (tracks.i_in[k] != 0.0)
                        .then(|| tracks.i_out[k] / tracks.i_in[k])
                        .into(),
                ),
                "msd" => row.push(tracks.msd[k].into()),
                "nu" => row.push(tracks.exponent.nu[k].into()),
                "mean_position" => row.push(tracks.mean_position[k].into()),
                "photon_number" => row.push(tracks.photon_number[k].into()),
                "populations" => {
                    row.extend(tracks.site_populations[k].iter().map(|&p| Cell::F(p)))
                }
                "entropy_last_site" => row.push(tracks.entropy_last_site[k].into()),
                "formation_last_pair" => row.push(tracks.formation_last_pair[k].into()),
                "formation_last_photon" => row.push(tracks.formation_last_photon[k].into()),
                "relative_entropy" => row.push(tracks.relative_entropy[k].into()),
                _ => unreachable!("name comes from OBSERVABLE_NAMES"),
            }
        }
        t.push(row);
    }
    t
}
