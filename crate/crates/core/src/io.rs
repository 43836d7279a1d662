//! Configuration files, run manifests and CSV/JSON output.
//!
//! Config grammar, one entry per line:
//!
//! ```text
//! # comment
//! key = value [unit]
//! ```
//!
//! Frequencies (`detuning`, `reference_rabi`, `peak`, `peak_pump`,
//! `peak_stokes`) are ordinary frequencies with unit `Hz`, `kHz`, `MHz` or
//! `GHz` (bare numbers are Hz) and are stored as angular frequencies 2πν.
//! Times (`total_time`, `width`, `delay`) take `s`, `ms`, `us` or `ns` (bare
//! numbers are seconds). `laser_phase` is in radians. Campaign keys:
//! `intervals`, `tolerance`, `max_refinements`, `fidelity_target`, `cycles`.
//! Width and delay default to T/6 and T/10 of the final total time.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{BlochComparison, CycleRecord, RunOptions, SpeedupReport, DEFAULT_FIDELITY_TARGET};
use crate::pulse::PulseTable;
use crate::types::{
    validate_config, BlochVector, ConfigSnapshot, Convergence, PulseConfig, SweepResult, SystemConfig, Trajectory,
};

/// Default protocol duration, 0.4 ms.
pub const DEFAULT_TOTAL_TIME: f64 = 0.4e-3;

/// Campaign settings read from a config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub run: RunOptions,
    pub fidelity_target: f64,
    pub cycles: usize,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            run: RunOptions::default(),
            fidelity_target: DEFAULT_FIDELITY_TARGET,
            cycles: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedConfig {
    pub pulse: PulseConfig,
    pub system: SystemConfig,
    pub campaign: CampaignOptions,
}

impl Default for ParsedConfig {
    fn default() -> Self {
        let system = SystemConfig::default();
        Self {
            pulse: PulseConfig::new(system.reference_rabi, DEFAULT_TOTAL_TIME),
            system,
            campaign: CampaignOptions::default(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Frequency,
    Time,
    Plain,
    Count,
}

const KEYS: &[(&str, Kind)] = &[
    ("detuning", Kind::Frequency),
    ("reference_rabi", Kind::Frequency),
    ("peak", Kind::Frequency),
    ("peak_pump", Kind::Frequency),
    ("peak_stokes", Kind::Frequency),
    ("total_time", Kind::Time),
    ("width", Kind::Time),
    ("delay", Kind::Time),
    ("laser_phase", Kind::Plain),
    ("intervals", Kind::Count),
    ("tolerance", Kind::Plain),
    ("max_refinements", Kind::Count),
    ("fidelity_target", Kind::Plain),
    ("cycles", Kind::Count),
];

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_value(kind: Kind, raw: &str, line: usize) -> Result<f64> {
    let mut parts = raw.split_whitespace();
    let number = parts.next().ok_or_else(|| parse_error(line, "missing value"))?;
    let unit = parts.next();
    if parts.next().is_some() {
        return Err(parse_error(line, format!("unexpected trailing text in '{raw}'")));
    }
    // allow "5MHz" as well as "5 MHz"
    let split = number
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .filter(|_| unit.is_none());
    let (number, unit) = match split {
        Some(i) => (&number[..i], Some(&number[i..])),
        None => (number, unit),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| parse_error(line, format!("malformed number '{number}'")))?;
    if !value.is_finite() {
        return Err(parse_error(line, format!("non-finite number '{number}'")));
    }
    let factor = match (kind, unit) {
        (Kind::Frequency, None | Some("Hz")) => TAU,
        (Kind::Frequency, Some("kHz")) => TAU * 1e3,
        (Kind::Frequency, Some("MHz")) => TAU * 1e6,
        (Kind::Frequency, Some("GHz")) => TAU * 1e9,
        (Kind::Time, None | Some("s")) => 1.0,
        (Kind::Time, Some("ms")) => 1e-3,
        (Kind::Time, Some("us")) => 1e-6,
        (Kind::Time, Some("ns")) => 1e-9,
        (Kind::Plain, None) => 1.0,
        (Kind::Count, None) => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(parse_error(line, format!("expected a non-negative integer, got '{number}'")));
            }
            1.0
        }
        (_, Some(u)) => return Err(parse_error(line, format!("unit '{u}' does not fit this key"))),
    };
    Ok(value * factor)
}

/// Parses a config file; see the module docs for the grammar.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut entries: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let kind = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, kind)| *kind)
            .ok_or_else(|| parse_error(line, format!("unknown key '{key}'")))?;
        let value = parse_value(kind, value.trim(), line)?;
        if entries.insert(KEYS.iter().find(|(k, _)| *k == key).unwrap().0, (value, line)).is_some() {
            return Err(parse_error(line, format!("duplicate key '{key}'")));
        }
    }
    build(&entries)
}

fn build(entries: &BTreeMap<&str, (f64, usize)>) -> Result<ParsedConfig> {
    let get = |k: &str| entries.get(k).map(|&(v, _)| v);
    let line_of = |k: &str| entries.get(k).map_or(0, |&(_, l)| l);
    let defaults = ParsedConfig::default();

    let system = SystemConfig {
        detuning: get("detuning").unwrap_or(defaults.system.detuning),
        reference_rabi: get("reference_rabi").unwrap_or(defaults.system.reference_rabi),
    };
    let peak = get("peak").unwrap_or(system.reference_rabi);
    let total_time = get("total_time").unwrap_or(DEFAULT_TOTAL_TIME);
    let mut pulse = PulseConfig::new(peak, total_time);
    pulse.peak_pump = get("peak_pump").unwrap_or(peak);
    pulse.peak_stokes = get("peak_stokes").unwrap_or(peak);
    pulse.width = get("width").unwrap_or(pulse.width);
    pulse.delay = get("delay").unwrap_or(pulse.delay);
    pulse.laser_phase = get("laser_phase").unwrap_or(0.0);

    let report = validate_config(&pulse, &system);
    if let Some(check) = report.failures().next() {
        let key = match check.name.as_str() {
            "width_below_total" => "width",
            "finite" => "total_time",
            other => other,
        };
        return Err(parse_error(line_of(key), check.message.clone()));
    }

    let mut campaign = defaults.campaign;
    if let Some(v) = get("intervals") {
        campaign.run.intervals = v as usize;
    }
    if let Some(v) = get("max_refinements") {
        campaign.run.propagation.max_refinements = v as u32;
    }
    if let Some(v) = get("cycles") {
        campaign.cycles = v as usize;
    }
    if let Some(v) = get("tolerance") {
        campaign.run.propagation.tolerance = v;
    }
    if let Some(v) = get("fidelity_target") {
        campaign.fidelity_target = v;
    }
    if campaign.run.intervals == 0 {
        return Err(parse_error(line_of("intervals"), "intervals must be positive"));
    }
    if campaign.cycles == 0 {
        return Err(parse_error(line_of("cycles"), "cycles must be positive"));
    }
    if campaign.run.propagation.tolerance.is_nan() || campaign.run.propagation.tolerance <= 0.0 {
        return Err(parse_error(line_of("tolerance"), "tolerance must be positive"));
    }
    if !(0.0..=1.0).contains(&campaign.fidelity_target) {
        return Err(parse_error(line_of("fidelity_target"), "fidelity target must lie in [0, 1]"));
    }
    Ok(ParsedConfig {
        pulse,
        system,
        campaign,
    })
}

/// Applies `key=value` overrides on top of a config text.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ParsedConfig> {
    let mut merged: Vec<String> = Vec::new();
    let override_keys: Vec<&str> = overrides
        .iter()
        .map(|o| o.split_once('=').map_or(o.as_str(), |(k, _)| k).trim())
        .collect();
    for line in text.lines() {
        let key = line.split('#').next().unwrap_or("").split_once('=').map(|(k, _)| k.trim());
        // overridden lines are blanked so line numbers keep pointing at the file
        merged.push(match key {
            Some(k) if override_keys.contains(&k) => String::new(),
            _ => line.to_string(),
        });
    }
    merged.extend(overrides.iter().cloned());
    parse_config(&merged.join("\n"))
}

/// What was run, with which inputs, by which build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub output_dir: PathBuf,
    /// Always true: no computation draws random numbers.
    pub seedless: bool,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_path: Option<PathBuf>, overrides: Vec<String>, output_dir: PathBuf) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            command: command.into(),
            config_path,
            overrides,
            output_dir,
            seedless: true,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Metadata written next to every campaign CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignMetadata {
    pub manifest: Option<RunManifest>,
    pub config: ConfigSnapshot,
    pub campaign: CampaignOptions,
    pub wall_time_seconds: f64,
    pub convergence: Option<Convergence>,
    /// Campaign-specific summary values.
    pub summary: serde_json::Value,
}

/// Numeric table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Contract(format!(
                "row has {} fields, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// CSV text; floats use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_error(1, "missing header"))?;
        let mut table = CsvTable {
            header: header.split(',').map(str::to_string).collect(),
            rows: Vec::new(),
        };
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|_| parse_error(i + 1, format!("bad field '{f}'"))))
                .collect::<Result<Vec<_>>>()?;
            table.push(row).map_err(|_| parse_error(i + 1, "wrong number of fields"))?;
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Contract(format!("'{}' has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`; returns the CSV path.
pub fn write_campaign(dir: &Path, name: &str, table: &CsvTable, metadata: &CampaignMetadata) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    write_atomic(&csv, table.to_csv().as_bytes())?;
    let mut json = serde_json::to_string_pretty(metadata)?;
    json.push('\n');
    write_atomic(&dir.join(format!("{name}.json")), json.as_bytes())?;
    Ok(csv)
}

/// t, p1, p2, [p3], [nx, ny, nz], [bx_hat, by_hat, bz_hat].
pub fn trajectory_table(traj: &Trajectory, field: Option<&[BlochVector]>) -> Result<CsvTable> {
    let mut header = vec!["t", "p1", "p2"];
    if traj.dim() == 3 {
        header.push("p3");
    }
    if traj.bloch.is_some() {
        header.extend(["nx", "ny", "nz"]);
    }
    if let Some(f) = field {
        if f.len() != traj.len() {
            return Err(Error::Contract("field track does not match the trajectory".into()));
        }
        header.extend(["bx_hat", "by_hat", "bz_hat"]);
    }
    let mut table = CsvTable::new(&header);
    for i in 0..traj.len() {
        let mut row = vec![traj.times[i]];
        row.extend(&traj.populations[i]);
        if let Some(b) = &traj.bloch {
            row.extend([b[i].x, b[i].y, b[i].z]);
        }
        if let Some(f) = field {
            row.extend([f[i].x, f[i].y, f[i].z]);
        }
        table.push(row)?;
    }
    Ok(table)
}

/// t, omega_p, omega_s, omega_a, omega_p_tilde, omega_s_tilde (rad/s).
pub fn pulse_table(pulses: &PulseTable) -> CsvTable {
    let mut table = CsvTable::new(&["t", "omega_p", "omega_s", "omega_a", "omega_p_tilde", "omega_s_tilde"]);
    table.rows = pulses
        .rows
        .iter()
        .map(|r| vec![r.t, r.omega_p, r.omega_s, r.omega_a, r.omega_p_tilde, r.omega_s_tilde])
        .collect();
    table
}

/// Parameter column followed by one efficiency column per sweep.
pub fn sweep_table(sweeps: &[SweepResult]) -> Result<CsvTable> {
    let first = sweeps
        .first()
        .ok_or_else(|| Error::Contract("no sweeps to tabulate".into()))?;
    if sweeps.iter().any(|s| s.parameter_values != first.parameter_values) {
        return Err(Error::Contract("sweeps do not share a parameter grid".into()));
    }
    let names: Vec<String> = sweeps
        .iter()
        .map(|s| format!("efficiency_{}", s.protocol.tag().to_ascii_lowercase()))
        .collect();
    let mut header = vec![first.parameter_name.as_str()];
    header.extend(names.iter().map(String::as_str));
    let mut table = CsvTable::new(&header);
    for (i, &v) in first.parameter_values.iter().enumerate() {
        let mut row = vec![v];
        row.extend(sweeps.iter().map(|s| s.efficiencies[i]));
        table.push(row)?;
    }
    Ok(table)
}

/// peak (Ω₀), t_ap (s), t_sa (s), ratio, difference (T₀).
pub fn speedup_table(report: &SpeedupReport) -> CsvTable {
    let mut table = CsvTable::new(&["peak", "t_ap", "t_sa", "ratio", "difference"]);
    table.rows = (0..report.peaks.len())
        .map(|i| {
            vec![
                report.peaks[i],
                report.t_ap[i],
                report.t_sa[i],
                report.ratio[i],
                report.difference[i],
            ]
        })
        .collect();
    table
}

pub fn cycles_table(records: &[CycleRecord]) -> CsvTable {
    let mut table = CsvTable::new(&["cycle", "p1", "p2"]);
    table.rows = records.iter().map(|r| vec![r.cycle as f64, r.p1, r.p2]).collect();
    table
}

/// t, the three spin polarizations and the two field directions.
pub fn bloch_table(cmp: &BlochComparison) -> CsvTable {
    let mut table = CsvTable::new(&[
        "t", "n0x", "n0y", "n0z", "nx", "ny", "nz", "ntx", "nty", "ntz", "b0x", "b0y", "b0z", "bx", "by", "bz",
    ]);
    let spins = |t: &Trajectory| t.bloch.clone().unwrap_or_default();
    let (bare, short, tilde) = (spins(&cmp.bare), spins(&cmp.shortcut), spins(&cmp.transformed));
    for i in 0..cmp.times.len().min(bare.len()).min(short.len()).min(tilde.len()) {
        let mut row = vec![cmp.times[i]];
        for v in [bare[i], short[i], tilde[i], cmp.field_bare[i], cmp.field_total[i]] {
            row.extend([v.x, v.y, v.z]);
        }
        table.rows.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ParsedConfig::default());
        assert!((c.system.detuning - TAU * 2.5e9).abs() < 1e-3);
        assert!((c.pulse.peak_pump - TAU * 5e6).abs() < 1e-6);
        assert_eq!(c.pulse.total_time, 0.4e-3);
        assert_eq!(c.pulse.laser_phase, 0.0);
    }

    #[test]
    fn total_time_rederives_shape() {
        let c = parse_config("# longer run\ntotal_time = 1 ms\n").unwrap();
        assert_eq!(c.pulse.total_time, 1e-3);
        assert!((c.pulse.width - 1e-3 / 6.0).abs() < 1e-18);
        assert!((c.pulse.delay - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn units_scale_values() {
        let c = parse_config("detuning = 1.5 GHz\nreference_rabi = 2MHz\npeak_pump = 300 kHz\nwidth = 50 us\ndelay = 20000 ns")
            .unwrap();
        assert!((c.system.detuning - TAU * 1.5e9).abs() < 1e-3);
        assert!((c.system.reference_rabi - TAU * 2e6).abs() < 1e-6);
        assert!((c.pulse.peak_pump - TAU * 3e5).abs() < 1e-6);
        assert_eq!(c.pulse.peak_stokes, c.system.reference_rabi);
        assert!((c.pulse.width - 5e-5).abs() < 1e-18);
        assert!((c.pulse.delay - 2e-5).abs() < 1e-18);
    }

    #[test]
    fn zero_width_cites_invariant_and_line() {
        match parse_config("total_time = 1 ms\nwidth = 0 ms\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("width must be positive"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_lines_report_their_number() {
        let line = |text: &str| match parse_config(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line("\n\ncolour = blue"), 3);
        assert_eq!(line("total_time = fast"), 1);
        assert_eq!(line("total_time = 3 MHz"), 1);
        assert_eq!(line("detuning = 1 GHz\ndetuning = 2 GHz"), 2);
        assert_eq!(line("just words"), 1);
        assert_eq!(line("cycles = 2.5"), 1);
    }

    #[test]
    fn overrides_replace_file_entries() {
        let c = parse_config_with_overrides("total_time = 1 ms\n", &["total_time = 2 ms".to_string()]).unwrap();
        assert_eq!(c.pulse.total_time, 2e-3);
    }

    #[test]
    fn csv_round_trips_exactly() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![0.1 + 0.2, 1e-300]).unwrap();
        t.push(vec![-3.0, std::f64::consts::PI]).unwrap();
        let text = t.to_csv();
        assert!(text.starts_with("a,b\n"));
        assert_eq!(CsvTable::parse(&text).unwrap(), t);
        assert!(t.push(vec![1.0]).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_atomic(&path, b"a\n1.0\n").unwrap();
        write_atomic(&path, b"a\n2.0\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a\n2.0\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn manifest_round_trips(
            command in "[a-z-]{1,12}",
            overrides in prop::collection::vec("[a-z_]{1,8} = [0-9]{1,4} ms", 0..4),
            timestamp in any::<u64>(),
            with_path in any::<bool>(),
        ) {
            let mut m = RunManifest::new(command, with_path.then(|| PathBuf::from("cfg/run.conf")), overrides, PathBuf::from("out"));
            m.timestamp = timestamp;
            let json = m.to_json().unwrap();
            let back = RunManifest::from_json(&json).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_json().unwrap(), json);
        }

        #[test]
        fn csv_floats_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20)) {
            let mut t = CsvTable::new(&["v"]);
            for v in &values {
                t.push(vec![*v]).unwrap();
            }
            let back = CsvTable::parse(&t.to_csv()).unwrap();
            let col = back.column("v").unwrap();
            for (a, b) in values.iter().zip(col) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
