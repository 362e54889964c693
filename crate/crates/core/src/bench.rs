//! Experiment driver: pairwise, grouped, and multi-array runs with per-task
//! time limits, producing CSV and JSON reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::array::{Exclusivity, GridSpec};
use crate::baseline::{compile_merged, compile_sequential, delta_stages, rpr, speedup};
use crate::circuit::{layer_dag, load_circuit, Circuit, CircuitFormat, LoadError};
use crate::compiler::{ArrayCompilation, ArrayJob, Budget, CompileError, CompileOptions};
use crate::placer::{schedule_all, Placement, PlacementError, PlacementRequest};
use crate::validator::validate_joint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pairwise,
    Grouped,
    #[serde(alias = "multi-resource")]
    Multi,
}

pub const DEFAULT_TIME_LIMIT: f64 = 10_000.0;

fn default_arrays() -> usize {
    1
}
fn default_time_limit() -> f64 {
    DEFAULT_TIME_LIMIT
}
fn default_window() -> usize {
    2
}
fn default_jobs() -> usize {
    1
}
fn on() -> bool {
    true
}

fn parse_grid<'de, D: Deserializer<'de>>(d: D) -> Result<GridSpec, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

/// Accepts `true`/`false` or `"on"`/`"off"`.
fn parse_switch<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Bool(bool),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Bool(b) => Ok(b),
        Repr::Text(t) => parse_on_off(&t).map_err(serde::de::Error::custom),
    }
}

pub fn parse_on_off(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

/// One experiment. Field names match the command-line flags.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Circuit files, or directories scanned for `.qasm` and `.json` files.
    pub circuits: Vec<PathBuf>,
    #[serde(default = "default_arrays")]
    pub arrays: usize,
    /// Placer capacity; defaults to the number of grid sites.
    #[serde(default)]
    pub wmax: Option<usize>,
    #[serde(deserialize_with = "parse_grid")]
    pub grid: GridSpec,
    /// Seconds per compilation task.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "on", deserialize_with = "parse_switch")]
    pub strict_exclusivity: bool,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Zero every timing field so reports are byte-identical across runs.
    #[serde(default)]
    pub deterministic: bool,
    /// Delay each circuit's first gate to its placer start time.
    #[serde(default = "on", deserialize_with = "parse_switch")]
    pub start_offsets: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, circuits: Vec<PathBuf>, grid: GridSpec) -> Self {
        ExperimentConfig {
            mode,
            circuits,
            arrays: default_arrays(),
            wmax: None,
            grid,
            time_limit: DEFAULT_TIME_LIMIT,
            window: default_window(),
            strict_exclusivity: true,
            jobs: default_jobs(),
            seed: 0,
            out: None,
            deterministic: false,
            start_offsets: true,
        }
    }

    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let bad = |msg: String| ConfigError::Invalid(format!("{}: {msg}", path.display()));
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))?
        };
        // Relative circuit paths are relative to the config file.
        if let Some(dir) = path.parent() {
            for p in &mut cfg.circuits {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.arrays == 0 {
            return bad("arrays must be at least 1");
        }
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            return bad("time limit must be a positive number of seconds");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        if self.wmax == Some(0) {
            return bad("wmax must be at least 1");
        }
        if self.circuits.is_empty() {
            return bad("no circuits given");
        }
        if self.mode == Mode::Multi && self.arrays < 2 {
            return bad("multi mode needs at least 2 arrays");
        }
        Ok(())
    }

    pub fn time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit)
    }

    pub fn capacity(&self) -> usize {
        self.wmax.unwrap_or(self.grid.sites())
    }

    pub fn compile_options(&self) -> CompileOptions {
        CompileOptions {
            window: self.window,
            exclusivity: if self.strict_exclusivity {
                Exclusivity::Strengthened
            } else {
                Exclusivity::Literal
            },
            seed: self.seed,
            ..CompileOptions::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
}

/// Expands directories to their circuit files, sorted by path.
pub fn circuit_paths(entries: &[PathBuf]) -> Result<Vec<PathBuf>, ConfigError> {
    let mut out = Vec::new();
    for e in entries {
        if e.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(e)
                .map_err(|err| ConfigError::Io(e.clone(), err))?
                .filter_map(|d| d.ok().map(|d| d.path()))
                .filter(|p| p.is_file() && CircuitFormat::from_path(p).is_some())
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(e.clone());
        }
    }
    Ok(out)
}

pub fn load_workload(cfg: &ExperimentConfig) -> Result<Vec<Circuit>, ConfigError> {
    let circuits = circuit_paths(&cfg.circuits)?
        .iter()
        .map(|p| load_circuit(p))
        .collect::<Result<Vec<_>, _>>()?;
    if circuits.is_empty() {
        return Err(ConfigError::Invalid("no circuit files found".into()));
    }
    Ok(circuits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Timeout,
    Error,
}

impl RowStatus {
    fn of(e: &CompileError) -> Self {
        match e {
            CompileError::Timeout { .. } => RowStatus::Timeout,
            _ => RowStatus::Error,
        }
    }

    /// Keeps the more severe of the two; a timeout outranks an error.
    fn worsen(&mut self, other: RowStatus) {
        let rank = |s: RowStatus| match s {
            RowStatus::Ok => 0,
            RowStatus::Error => 1,
            RowStatus::Timeout => 2,
        };
        if rank(other) > rank(*self) {
            *self = other;
        }
    }
}

/// One two-circuit workload against both baselines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    #[serde(rename = "C_map")]
    pub c_map: String,
    #[serde(rename = "C_space")]
    pub c_space: String,
    #[serde(rename = "Depth_map")]
    pub depth_map: usize,
    #[serde(rename = "Depth_space")]
    pub depth_space: usize,
    pub status: RowStatus,
    #[serde(rename = "T_DYNAMO")]
    pub t_dynamo: Option<f64>,
    #[serde(rename = "T_DPQA_c")]
    pub t_merged: Option<f64>,
    #[serde(rename = "T_DPQA_s")]
    pub t_sequential: Option<f64>,
    #[serde(rename = "Speedup_c")]
    pub speedup_merged: Option<f64>,
    #[serde(rename = "Speedup_s")]
    pub speedup_sequential: Option<f64>,
    #[serde(rename = "L_DYNAMO")]
    pub l_dynamo: Option<usize>,
    #[serde(rename = "L_DPQA_c")]
    pub l_merged: Option<usize>,
    #[serde(rename = "L_DPQA_s")]
    pub l_sequential: Option<usize>,
    #[serde(rename = "RPR_c")]
    pub rpr_merged: Option<f64>,
    #[serde(rename = "RPR_s")]
    pub rpr_sequential: Option<f64>,
    pub violations: Option<usize>,
    pub detail: String,
}

/// One circuit's share of an array, or the array total when `order` is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitRow {
    #[serde(rename = "QPU")]
    pub qpu: usize,
    pub order: Option<usize>,
    pub circuit: String,
    pub depth: usize,
    pub start: Option<usize>,
    pub status: RowStatus,
    #[serde(rename = "dL_DYNAMO")]
    pub delta_l: Option<usize>,
    #[serde(rename = "dT_DYNAMO")]
    pub delta_t: Option<f64>,
    #[serde(rename = "L_DPQA_s")]
    pub l_sequential: Option<usize>,
    #[serde(rename = "T_DPQA_s")]
    pub t_sequential: Option<f64>,
    #[serde(rename = "RPR_s")]
    pub rpr_sequential: Option<f64>,
    #[serde(rename = "Speedup_s")]
    pub speedup_sequential: Option<f64>,
    pub violations: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub mode: Mode,
    pub grid: String,
    pub pairs: Vec<PairRow>,
    pub circuits: Vec<CircuitRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<serde_json::Value>,
}

impl BenchReport {
    fn new(mode: Mode, grid: GridSpec) -> Self {
        BenchReport {
            mode,
            grid: grid.to_string(),
            pairs: Vec::new(),
            circuits: Vec::new(),
            placement: None,
        }
    }

    fn statuses(&self) -> impl Iterator<Item = RowStatus> + '_ {
        self.pairs
            .iter()
            .map(|r| r.status)
            .chain(self.circuits.iter().map(|r| r.status))
    }

    pub fn has_timeouts(&self) -> bool {
        self.statuses().any(|s| s == RowStatus::Timeout)
    }

    pub fn is_complete(&self) -> bool {
        self.statuses().all(|s| s == RowStatus::Ok)
    }

    /// 0 when every row completed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_complete() {
            0
        } else {
            2
        }
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self.mode {
            Mode::Pairwise => {
                for r in &self.pairs {
                    w.serialize(r)?;
                }
                if self.pairs.is_empty() {
                    w.write_record(PAIR_HEADERS)?;
                }
            }
            Mode::Grouped | Mode::Multi => {
                for r in &self.circuits {
                    w.serialize(r)?;
                }
                if self.circuits.is_empty() {
                    w.write_record(CIRCUIT_HEADERS)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes the CSV to `path` and the full report next to it as JSON.
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let csv = self.to_csv().map_err(std::io::Error::other)?;
        fs::write(path, csv)?;
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(path.with_extension("json"), json + "\n")
    }

    fn zero_timings(&mut self) {
        let zero = |t: &mut Option<f64>| {
            if t.is_some() {
                *t = Some(0.0);
            }
        };
        for r in &mut self.pairs {
            zero(&mut r.t_dynamo);
            zero(&mut r.t_merged);
            zero(&mut r.t_sequential);
            r.speedup_merged = None;
            r.speedup_sequential = None;
        }
        for r in &mut self.circuits {
            zero(&mut r.delta_t);
            zero(&mut r.t_sequential);
            r.speedup_sequential = None;
        }
    }
}

const PAIR_HEADERS: [&str; 17] = [
    "C_map", "C_space", "Depth_map", "Depth_space", "status", "T_DYNAMO", "T_DPQA_c", "T_DPQA_s", "Speedup_c",
    "Speedup_s", "L_DYNAMO", "L_DPQA_c", "L_DPQA_s", "RPR_c", "RPR_s", "violations", "detail",
];

const CIRCUIT_HEADERS: [&str; 14] = [
    "QPU", "order", "circuit", "depth", "start", "status", "dL_DYNAMO", "dT_DYNAMO", "L_DPQA_s", "T_DPQA_s",
    "RPR_s", "Speedup_s", "violations", "detail",
];

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Every unordered pair, deeper circuit first.
pub fn run_pairwise(cfg: &ExperimentConfig, circuits: &[Circuit]) -> Result<BenchReport, ConfigError> {
    cfg.validate()?;
    if circuits.len() < 2 {
        return Err(ConfigError::Invalid("pairwise mode needs at least 2 circuits".into()));
    }
    let opts = cfg.compile_options();
    let mut report = BenchReport::new(Mode::Pairwise, cfg.grid);
    for i in 0..circuits.len() {
        for j in i + 1..circuits.len() {
            let (a, b) = (&circuits[i], &circuits[j]);
            let (map, space) = if b.depth() > a.depth() { (b, a) } else { (a, b) };
            report.pairs.push(run_pair(cfg, &opts, map, space));
        }
    }
    if cfg.deterministic {
        report.zero_timings();
    }
    Ok(report)
}

fn run_pair(cfg: &ExperimentConfig, opts: &CompileOptions, map: &Circuit, space: &Circuit) -> PairRow {
    let mut row = PairRow {
        c_map: map.name.clone(),
        c_space: space.name.clone(),
        depth_map: map.depth(),
        depth_space: space.depth(),
        status: RowStatus::Ok,
        t_dynamo: None,
        t_merged: None,
        t_sequential: None,
        speedup_merged: None,
        speedup_sequential: None,
        l_dynamo: None,
        l_merged: None,
        l_sequential: None,
        rpr_merged: None,
        rpr_sequential: None,
        violations: None,
        detail: String::new(),
    };
    let mut notes = Vec::new();

    // The shallower circuit is committed first; the deeper one fills around it.
    let mut joint = ArrayCompilation::new(cfg.grid);
    let budget = Budget::with_limit(cfg.time_limit());
    for c in [space, map] {
        let job = ArrayJob {
            circuit: c,
            start_offset: 0,
        };
        if let Err(e) = joint.compile_next(&job, &budget, opts) {
            row.status = RowStatus::of(&e);
            row.detail = format!("multi-program: {e}; baselines skipped");
            return row;
        }
    }
    let l_dyn = joint.stage_count();
    let t_dyn = secs(joint.total_time());
    row.l_dynamo = Some(l_dyn);
    row.t_dynamo = Some(t_dyn);
    row.violations = Some(validate_joint(&joint.occupancy).len());

    let budget = Budget::with_limit(cfg.time_limit());
    match compile_sequential(&[map, space], cfg.grid, &budget, opts) {
        Ok(run) => {
            let (l, t) = (run.total_stages(), secs(run.total_time()));
            row.l_sequential = Some(l);
            row.t_sequential = Some(t);
            row.rpr_sequential = rpr(l_dyn, l).ok();
            row.speedup_sequential = speedup(t_dyn, t).ok();
        }
        Err(e) => {
            row.status.worsen(RowStatus::of(&e.source));
            notes.push(format!("sequential: {e}"));
        }
    }

    let budget = Budget::with_limit(cfg.time_limit());
    match compile_merged(&[map, space], cfg.grid, &budget, opts) {
        Ok(run) => {
            let (l, t) = (run.stages(), secs(run.solve_time));
            row.l_merged = Some(l);
            row.t_merged = Some(t);
            row.rpr_merged = rpr(l_dyn, l).ok();
            row.speedup_merged = speedup(t_dyn, t).ok();
        }
        Err(e) => {
            row.status.worsen(RowStatus::of(&e));
            notes.push(format!("merged: {e}"));
        }
    }
    row.detail = notes.join("; ");
    row
}

/// Compiles the circuits of one array in placer order, one time-limited task
/// per circuit, carrying on past failures.
fn compile_array(
    cfg: &ExperimentConfig,
    opts: &CompileOptions,
    qpu: usize,
    jobs: &[(usize, ArrayJob)],
) -> Vec<CircuitRow> {
    let mut joint = ArrayCompilation::new(cfg.grid);
    let mut rows = Vec::new();
    let mut done = Vec::new();
    for (order, (_, job)) in jobs.iter().enumerate() {
        let c = job.circuit;
        let mut row = CircuitRow {
            qpu,
            order: Some(order),
            circuit: c.name.clone(),
            depth: c.depth(),
            start: cfg.start_offsets.then_some(job.start_offset),
            status: RowStatus::Ok,
            delta_l: None,
            delta_t: None,
            l_sequential: None,
            t_sequential: None,
            rpr_sequential: None,
            speedup_sequential: None,
            violations: None,
            detail: String::new(),
        };
        let budget = Budget::with_limit(cfg.time_limit());
        match joint.compile_next(job, &budget, opts) {
            Ok(()) => done.push(rows.len()),
            Err(e) => {
                row.status = RowStatus::of(&e);
                row.detail = format!("multi-program: {e}; baseline skipped");
                rows.push(row);
                continue;
            }
        }
        let budget = Budget::with_limit(cfg.time_limit());
        match compile_sequential(&[c], cfg.grid, &budget, opts) {
            Ok(run) => {
                row.l_sequential = Some(run.total_stages());
                row.t_sequential = Some(secs(run.total_time()));
            }
            Err(e) => {
                row.status = RowStatus::of(&e.source);
                row.detail = format!("sequential: {e}");
            }
        }
        rows.push(row);
    }

    for ((&i, dl), t) in done.iter().zip(delta_stages(&joint.horizons)).zip(&joint.solve_times) {
        let r = &mut rows[i];
        r.delta_l = Some(dl);
        r.delta_t = Some(secs(*t));
        if let (Some(l), Some(ts)) = (r.l_sequential, r.t_sequential) {
            r.rpr_sequential = rpr(dl, l).ok();
            r.speedup_sequential = speedup(secs(*t), ts).ok();
        }
    }

    let sum_opt = |f: &dyn Fn(&CircuitRow) -> Option<f64>| -> Option<f64> {
        rows.iter().map(f).sum::<Option<f64>>()
    };
    let l_dyn = joint.stage_count();
    let t_dyn = secs(joint.total_time());
    let l_seq = sum_opt(&|r| r.l_sequential.map(|l| l as f64)).map(|l| l as usize);
    let t_seq = sum_opt(&|r| r.t_sequential);
    let mut status = RowStatus::Ok;
    for r in &rows {
        status.worsen(r.status);
    }
    let complete = status == RowStatus::Ok;
    let total = CircuitRow {
        qpu,
        order: None,
        circuit: "total".into(),
        depth: jobs.iter().map(|(_, j)| j.circuit.depth()).sum(),
        start: None,
        status,
        delta_l: Some(l_dyn),
        delta_t: Some(t_dyn),
        l_sequential: l_seq,
        t_sequential: t_seq,
        rpr_sequential: l_seq.filter(|_| complete).and_then(|l| rpr(l_dyn, l).ok()),
        speedup_sequential: t_seq.filter(|_| complete).and_then(|t| speedup(t_dyn, t).ok()),
        violations: Some(validate_joint(&joint.occupancy).len()),
        detail: String::new(),
    };
    rows.push(total);
    rows
}

fn place(cfg: &ExperimentConfig, circuits: &[Circuit], arrays: usize) -> Result<(Placement, serde_json::Value), ConfigError> {
    let req = PlacementRequest {
        circuits: circuits.iter().map(layer_dag).collect(),
        num_arrays: arrays,
        capacity: cfg.capacity(),
    };
    let placement = schedule_all(&req)?;
    let summary = placement.to_json(&req.circuits);
    Ok((placement, summary))
}

fn jobs_for<'a>(
    cfg: &ExperimentConfig,
    circuits: &'a [Circuit],
    placement: &Placement,
    array: usize,
) -> Vec<(usize, ArrayJob<'a>)> {
    placement.arrays[array]
        .assigned
        .iter()
        .map(|a| {
            (
                a.circuit,
                ArrayJob {
                    circuit: &circuits[a.circuit],
                    start_offset: if cfg.start_offsets { a.start } else { 0 },
                },
            )
        })
        .collect()
}

/// The whole group on one array in placer-refined order.
pub fn run_grouped(cfg: &ExperimentConfig, circuits: &[Circuit]) -> Result<BenchReport, ConfigError> {
    cfg.validate()?;
    let (placement, summary) = place(cfg, circuits, 1)?;
    let opts = cfg.compile_options();
    let mut report = BenchReport::new(Mode::Grouped, cfg.grid);
    report.circuits = compile_array(cfg, &opts, 0, &jobs_for(cfg, circuits, &placement, 0));
    report.placement = Some(summary);
    if cfg.deterministic {
        report.zero_timings();
    }
    Ok(report)
}

/// Placement over `cfg.arrays` arrays, then one compile per array. Arrays run
/// on up to `cfg.jobs` threads; rows are emitted in array order.
pub fn run_multiresource(cfg: &ExperimentConfig, circuits: &[Circuit]) -> Result<BenchReport, ConfigError> {
    cfg.validate()?;
    let (placement, summary) = place(cfg, circuits, cfg.arrays)?;
    let opts = cfg.compile_options();
    let per_array: Vec<Vec<(usize, ArrayJob)>> = (0..cfg.arrays)
        .map(|a| jobs_for(cfg, circuits, &placement, a))
        .collect();
    let results: Mutex<Vec<Option<Vec<CircuitRow>>>> = Mutex::new(vec![None; cfg.arrays]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.min(cfg.arrays) {
            s.spawn(|| loop {
                let a = next.fetch_add(1, Ordering::SeqCst);
                if a >= cfg.arrays {
                    break;
                }
                let rows = if per_array[a].is_empty() {
                    Vec::new()
                } else {
                    compile_array(cfg, &opts, a, &per_array[a])
                };
                results.lock().expect("no worker panicked")[a] = Some(rows);
            });
        }
    });
    let mut report = BenchReport::new(Mode::Multi, cfg.grid);
    for rows in results.into_inner().expect("no worker panicked") {
        report.circuits.extend(rows.expect("every array was compiled"));
    }
    report.placement = Some(summary);
    if cfg.deterministic {
        report.zero_timings();
    }
    Ok(report)
}

/// Dispatches on `cfg.mode`.
pub fn run(cfg: &ExperimentConfig, circuits: &[Circuit]) -> Result<BenchReport, ConfigError> {
    match cfg.mode {
        Mode::Pairwise => run_pairwise(cfg, circuits),
        Mode::Grouped => run_grouped(cfg, circuits),
        Mode::Multi => run_multiresource(cfg, circuits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(name: &str, n: usize, pairs: &[(usize, usize)]) -> Circuit {
        Circuit::from_pairs(name, n, pairs).unwrap()
    }

    fn cfg(mode: Mode) -> ExperimentConfig {
        ExperimentConfig::new(mode, vec![PathBuf::from("unused")], GridSpec::new(4, 4))
    }

    #[test]
    fn toml_config_uses_flag_names() {
        let text = r#"
            mode = "multi-resource"
            circuits = ["a.qasm"]
            arrays = 3
            grid = "6x6:4x4"
            time-limit = 2.5
            strict-exclusivity = "off"
            start-offsets = false
        "#;
        let c: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(c.mode, Mode::Multi);
        assert_eq!(c.grid.aod_rows, 4);
        assert!(!c.strict_exclusivity);
        assert!(!c.start_offsets);
        assert_eq!(c.window, 2);
        assert_eq!(c.time_limit, 2.5);
        assert!(toml::from_str::<ExperimentConfig>("mode = \"pairwise\"\ncircuits = []\ngrid = \"2x2\"\nbogus = 1").is_err());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let mut c = cfg(Mode::Pairwise);
        c.time_limit = 0.0;
        assert!(c.validate().is_err());
        let c = cfg(Mode::Multi);
        assert!(c.validate().is_err());
    }

    #[test]
    fn pairwise_needs_two_circuits() {
        let c = cfg(Mode::Pairwise);
        assert!(run_pairwise(&c, &[gate("a", 2, &[(0, 1)])]).is_err());
    }

    #[test]
    fn two_circuits_make_one_row() {
        let mut c = cfg(Mode::Pairwise);
        c.deterministic = true;
        let circuits = [gate("a", 2, &[(0, 1)]), gate("b", 2, &[(0, 1), (0, 1)])];
        let r = run_pairwise(&c, &circuits).unwrap();
        assert_eq!(r.pairs.len(), 1);
        let row = &r.pairs[0];
        assert_eq!(row.c_map, "b");
        assert_eq!(row.status, RowStatus::Ok, "{}", row.detail);
        assert_eq!(row.l_sequential, Some(3));
        assert_eq!(row.violations, Some(0));
        assert!(row.l_dynamo.unwrap() <= 3);
        assert_eq!(r.exit_code(), 0);
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("C_map,C_space,Depth_map,Depth_space,status,T_DYNAMO,T_DPQA_c"));
    }

    #[test]
    fn grouped_reports_deltas_and_total() {
        let mut c = cfg(Mode::Grouped);
        c.deterministic = true;
        let circuits = [gate("a", 2, &[(0, 1)]), gate("b", 2, &[(0, 1)]), gate("c", 2, &[(0, 1)])];
        let r = run_grouped(&c, &circuits).unwrap();
        assert_eq!(r.circuits.len(), 4);
        let total = r.circuits.last().unwrap();
        assert_eq!(total.order, None);
        assert_eq!(total.l_sequential, Some(3));
        let sum: usize = r.circuits[..3].iter().map(|r| r.delta_l.unwrap()).sum();
        assert_eq!(Some(sum), total.delta_l);
        assert_eq!(total.violations, Some(0));
    }

    #[test]
    fn multi_with_one_circuit_per_array() {
        let mut c = cfg(Mode::Multi);
        c.arrays = 2;
        c.jobs = 2;
        c.deterministic = true;
        let circuits = [gate("a", 2, &[(0, 1)]), gate("b", 3, &[(0, 1), (1, 2)])];
        let r = run_multiresource(&c, &circuits).unwrap();
        let rows: Vec<&CircuitRow> = r.circuits.iter().filter(|r| r.order.is_some()).collect();
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert_eq!(row.delta_l, row.l_sequential);
        }
        assert_eq!(r.to_csv().unwrap(), {
            let again = run_multiresource(&c, &circuits).unwrap();
            again.to_csv().unwrap()
        });
    }
}
