//! Parameter sweeps over the `(q, gamma)` plane: dominance maps by apparent
//! hashrate, the lead-stubborn versus trailing comparison map, flat key-value
//! sweep configs, and machine-readable CSV/JSON output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::params::{NetworkParams, StrategyId};
use crate::simulator;

/// How cell values are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    Analytic,
    Simulation { n_cycles: u64, master_seed: u64 },
}

/// Which map to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapMode {
    /// Argmax of apparent hashrate over the configured strategy set.
    Dominance,
    /// Lead-stubborn versus the best trailing strategy with `A >= 2`.
    Fig1,
}

/// A rectangular grid over `(q, gamma)` with the strategy set to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    /// Trail thresholds used by the fig1 map.
    pub a_values: Vec<u32>,
    /// Strategies compared by the dominance map.
    pub strategies: Vec<StrategyId>,
    pub backend: Backend,
}

impl Default for GridSpec {
    fn default() -> Self {
        let mut strategies = vec![StrategyId::Honest];
        strategies.extend((1..=7).map(StrategyId::TrailStubborn));
        Self {
            q_min: 0.001,
            q_max: 0.499,
            q_steps: 101,
            gamma_min: 0.0,
            gamma_max: 1.0,
            gamma_steps: 101,
            a_values: (1..=7).collect(),
            strategies,
            backend: Backend::Analytic,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGrid(msg.to_string()));
        if !(0.0..0.5).contains(&self.q_min) || !(0.0..0.5).contains(&self.q_max) || self.q_min > self.q_max {
            return bad("q range must satisfy 0 <= q_min <= q_max < 0.5");
        }
        if !(0.0..=1.0).contains(&self.gamma_min)
            || !(0.0..=1.0).contains(&self.gamma_max)
            || self.gamma_min > self.gamma_max
        {
            return bad("gamma range must satisfy 0 <= gamma_min <= gamma_max <= 1");
        }
        if self.q_steps < 1 || self.gamma_steps < 1 {
            return bad("step counts must be at least 1");
        }
        if self.a_values.contains(&0) {
            return bad("trail thresholds must be at least 1");
        }
        if self.strategies.is_empty() {
            return bad("the strategy set is empty");
        }
        let mut sorted = self.strategies.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.strategies.len() {
            return bad("the strategy set contains duplicates");
        }
        if let Backend::Simulation { n_cycles, .. } = self.backend {
            if n_cycles == 0 {
                return bad("simulation backend needs at least one cycle");
            }
        }
        Ok(())
    }
}

/// Evenly spaced axis with exact endpoints.
fn axis(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            (min + (max - min) * t).clamp(min, max)
        })
        .collect()
}

/// One grid point: per-strategy apparent hashrates, the winner and its lead
/// over the runner-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCell {
    pub q: f64,
    pub gamma: f64,
    pub values: Vec<(StrategyId, f64)>,
    pub best: StrategyId,
    pub margin: f64,
}

impl DominanceCell {
    /// Build a cell from per-strategy values. Values are kept in canonical
    /// strategy order and exact ties go to the earliest strategy. Cells with
    /// a single strategy report a zero margin.
    pub fn from_values(q: f64, gamma: f64, mut values: Vec<(StrategyId, f64)>) -> Self {
        assert!(!values.is_empty(), "a cell needs at least one value");
        values.sort_by_key(|v| v.0);
        let mut best = values[0];
        for &v in &values[1..] {
            if v.1 > best.1 {
                best = v;
            }
        }
        let runner_up = values
            .iter()
            .filter(|v| v.0 != best.0)
            .map(|v| v.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = if runner_up.is_finite() { best.1 - runner_up } else { 0.0 };
        Self { q, gamma, values, best: best.0, margin }
    }
}

fn mix_seed(master_seed: u64, stream: u64) -> u64 {
    let mut state = master_seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn strategy_value(
    strategy: StrategyId,
    q: f64,
    gamma: f64,
    backend: Backend,
    stream: u64,
) -> Result<f64> {
    match backend {
        Backend::Analytic => match strategy {
            StrategyId::Honest => Ok(analytic::apparent_hashrate_honest(q)),
            // gamma = 0 is guaranteed by the backend pre-check
            StrategyId::SelfishMining => Ok(analytic::apparent_hashrate_sm_gamma0(q)),
            StrategyId::TrailStubborn(a) => {
                let params = NetworkParams::unit(q, gamma)?;
                Ok(analytic::apparent_hashrate_tsm(&params, a))
            }
        },
        Backend::Simulation { n_cycles, master_seed } => {
            let params = NetworkParams::unit(q, gamma)?;
            let summary =
                simulator::estimate_metrics(strategy, &params, n_cycles, mix_seed(master_seed, stream))?;
            Ok(summary.apparent_hashrate.mean)
        }
    }
}

fn evaluate_grid(grid: &GridSpec, strategies: &[StrategyId]) -> Result<Vec<DominanceCell>> {
    let qs = axis(grid.q_min, grid.q_max, grid.q_steps);
    let gammas = axis(grid.gamma_min, grid.gamma_max, grid.gamma_steps);
    // row-major by q, then gamma; cells are independent, so parallel
    // evaluation keeps the deterministic output order
    let points: Vec<(usize, f64, f64)> = qs
        .iter()
        .flat_map(|&q| gammas.iter().map(move |&g| (q, g)))
        .enumerate()
        .map(|(i, (q, g))| (i, q, g))
        .collect();
    points
        .par_iter()
        .map(|&(index, q, gamma)| {
            let values = strategies
                .iter()
                .enumerate()
                .map(|(j, &s)| {
                    let stream = (index * strategies.len() + j) as u64;
                    strategy_value(s, q, gamma, grid.backend, stream).map(|v| (s, v))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DominanceCell::from_values(q, gamma, values))
        })
        .collect()
}

/// Evaluate the dominance map over the configured strategy set.
pub fn sweep(grid: &GridSpec) -> Result<Vec<DominanceCell>> {
    grid.validate()?;
    if matches!(grid.backend, Backend::Analytic)
        && grid.strategies.contains(&StrategyId::SelfishMining)
        && axis(grid.gamma_min, grid.gamma_max, grid.gamma_steps).iter().any(|&g| g > 0.0)
    {
        return Err(Error::BackendMismatch);
    }
    evaluate_grid(grid, &grid.strategies)
}

/// Compare lead-stubborn mining against every trailing strategy with
/// `A >= 2` from the grid's threshold set; the winner column tells which side
/// of the comparison each cell falls on.
pub fn fig1_map(grid: &GridSpec) -> Result<Vec<DominanceCell>> {
    grid.validate()?;
    if !matches!(grid.backend, Backend::Analytic) {
        return Err(Error::InvalidGrid("the fig1 map is analytic-only".to_string()));
    }
    let mut strategies = vec![StrategyId::TrailStubborn(1)];
    strategies.extend(grid.a_values.iter().filter(|&&a| a >= 2).map(|&a| StrategyId::TrailStubborn(a)));
    strategies.dedup();
    if strategies.len() < 2 {
        return Err(Error::InvalidGrid("the fig1 map needs a trail threshold above 1".to_string()));
    }
    evaluate_grid(grid, &strategies)
}

/// Floats are printed with 17 significant digits so that parsing them back
/// recovers the exact bit pattern.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write cells as CSV: a long `q,gamma,strategy,value` table, a blank line,
/// then a `q,gamma,best,margin` table with one row per cell.
pub fn emit_csv(cells: &[DominanceCell], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("q,gamma,strategy,value\n");
    for cell in cells {
        for (strategy, value) in &cell.values {
            let _ = writeln!(out, "{},{},{strategy},{}", fmt17(cell.q), fmt17(cell.gamma), fmt17(*value));
        }
    }
    out.push('\n');
    out.push_str("q,gamma,best,margin\n");
    for cell in cells {
        let _ = writeln!(out, "{},{},{},{}", fmt17(cell.q), fmt17(cell.gamma), cell.best, fmt17(cell.margin));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parse a CSV file written by [`emit_csv`] back into cells, bit-exactly.
pub fn parse_csv(path: &Path) -> Result<Vec<DominanceCell>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("q,gamma,strategy,value") {
        return Err(Error::Parse("missing value-table header".to_string()));
    }
    let parse_f64 = |s: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::Parse(format!("bad float {s:?}")))
    };
    // group consecutive value rows per (q, gamma) key, textual so the
    // grouping is exact
    type Group = (String, String, Vec<(StrategyId, f64)>);
    let mut groups: Vec<Group> = Vec::new();
    for line in lines.by_ref() {
        if line.is_empty() {
            break;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [q, gamma, strategy, value] = fields[..] else {
            return Err(Error::Parse(format!("bad value row {line:?}")));
        };
        let entry = (strategy.parse::<StrategyId>()?, parse_f64(value)?);
        match groups.last_mut() {
            Some((gq, gg, values)) if gq == q && gg == gamma => values.push(entry),
            _ => groups.push((q.to_string(), gamma.to_string(), vec![entry])),
        }
    }
    if lines.next() != Some("q,gamma,best,margin") {
        return Err(Error::Parse("missing best-table header".to_string()));
    }
    let mut cells = Vec::with_capacity(groups.len());
    for (gq, gg, values) in groups {
        let Some(row) = lines.next() else {
            return Err(Error::Parse("best table shorter than value table".to_string()));
        };
        let fields: Vec<&str> = row.split(',').collect();
        let [q, gamma, best, margin] = fields[..] else {
            return Err(Error::Parse(format!("bad best row {row:?}")));
        };
        if q != gq || gamma != gg {
            return Err(Error::Parse(format!("best row {row:?} does not match its cell")));
        }
        cells.push(DominanceCell {
            q: parse_f64(q)?,
            gamma: parse_f64(gamma)?,
            values,
            best: best.parse()?,
            margin: parse_f64(margin)?,
        });
    }
    match lines.next() {
        None | Some("") => Ok(cells),
        Some(extra) => Err(Error::Parse(format!("trailing content {extra:?}"))),
    }
}

/// Write cells as a JSON array mirroring the cell records.
pub fn emit_json(cells: &[DominanceCell], path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), cells)?;
    Ok(())
}

/// Parse a JSON file written by [`emit_json`].
pub fn parse_json(path: &Path) -> Result<Vec<DominanceCell>> {
    let file = fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

/// A sweep configuration: the grid plus the map mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: GridSpec,
    pub mode: MapMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { grid: GridSpec::default(), mode: MapMode::Dominance }
    }
}

/// Parse a flat `key = value` config. Keys mirror the sweep command-line
/// flags; `#` starts a comment; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut config = SweepConfig::default();
    let mut backend_kind = "analytic".to_string();
    let mut cycles: u64 = 1_000_000;
    let mut seed: u64 = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::InvalidGrid(format!("line {}: {msg}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let grid = &mut config.grid;
        match key {
            "q_min" => grid.q_min = parse_num(value).map_err(bad)?,
            "q_max" => grid.q_max = parse_num(value).map_err(bad)?,
            "q_steps" => grid.q_steps = parse_num(value).map_err(bad)?,
            "gamma_min" => grid.gamma_min = parse_num(value).map_err(bad)?,
            "gamma_max" => grid.gamma_max = parse_num(value).map_err(bad)?,
            "gamma_steps" => grid.gamma_steps = parse_num(value).map_err(bad)?,
            "a_values" => {
                grid.a_values = value
                    .split(',')
                    .map(|v| parse_num::<u32>(v.trim()))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(bad)?
            }
            "strategies" => {
                grid.strategies = value
                    .split(',')
                    .map(|v| v.trim().parse::<StrategyId>())
                    .collect::<Result<_>>()?
            }
            "backend" => backend_kind = value.to_string(),
            "cycles" => cycles = parse_num(value).map_err(bad)?,
            "seed" => seed = parse_num(value).map_err(bad)?,
            "mode" => {
                config.mode = match value {
                    "dominance" => MapMode::Dominance,
                    "fig1" => MapMode::Fig1,
                    other => return Err(bad(format!("unknown mode {other:?}"))),
                }
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    config.grid.backend = match backend_kind.as_str() {
        "analytic" => Backend::Analytic,
        "simulation" => Backend::Simulation { n_cycles: cycles, master_seed: seed },
        other => return Err(Error::InvalidGrid(format!("unknown backend {other:?}"))),
    };
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse::<T>().map_err(|_| format!("bad number {value:?}"))
}
