//! Declarative scenario ingestion, run orchestration, size sweeps, and
//! persistence of series and bound reports.
//!
//! Configs are strict JSON: unknown fields are rejected, defaults are filled
//! on load, and identical configs always produce bitwise-identical outputs.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoundsReport, ScenarioData, ScenarioEvaluator};
use crate::error::{Error, Result};
use crate::evolve::{
    finite_time_average, make_context, running_time_average, EvolutionContext, TimeGrid,
};
use crate::info::EntropyConvention;
use crate::linalg::{hermitian_eig, BipartitionSpec};
use crate::spin::{
    basis_state_from_bits, build_ising, build_xxz, cdw_state, gap_degeneracy_report, GapReport,
    IsingParams, LocalHamiltonian, XXZParams,
};

/// Threshold under which g(0) counts as exactly zero for normalization.
const G0_FLOOR: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Xxz,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ising => "ising",
            ModelKind::Xxz => "xxz",
        }
    }
}

/// Raw coupling record; which fields must be present depends on the model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "h_x", skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    #[serde(rename = "h_z", skip_serializing_if = "Option::is_none")]
    pub h_z: Option<f64>,
    #[serde(rename = "U", skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(rename = "J_nnn", skip_serializing_if = "Option::is_none")]
    pub j_nnn: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Keyword(String),
    Bitstring { bitstring: String },
    Eigenstate { eigenstate: usize },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Keyword("cdw".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
}

fn default_t_max() -> f64 {
    20.0
}

fn default_n_points() -> usize {
    2001
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t_max: default_t_max(),
            n_points: default_n_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_degeneracy_tol")]
    pub degeneracy_tol: f64,
    #[serde(default = "default_support_floor")]
    pub support_floor: f64,
}

fn default_degeneracy_tol() -> f64 {
    1e-10
}

fn default_support_floor() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degeneracy_tol: default_degeneracy_tol(),
            support_floor: default_support_floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Series,
    Bounds,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Series, OutputKind::Bounds]
}

fn default_l_s() -> usize {
    1
}

fn default_averaging_t() -> f64 {
    2000.0
}

/// One experiment: model, couplings, sizes, initial state, grid and
/// tolerances.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "L_S", default = "default_l_s")]
    pub l_s: usize,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(rename = "averaging_T", default = "default_averaging_t")]
    pub averaging_t: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.l > 12 {
            return Err(Error::Config(format!("L: expected 2..=12, got {}", self.l)));
        }
        if self.l_s < 1 || self.l_s >= self.l {
            return Err(Error::Config(format!(
                "L_S: expected 1 <= L_S < L = {}, got {}",
                self.l, self.l_s
            )));
        }
        match self.model {
            ModelKind::Ising => {
                if self.params.h_x.is_none() || self.params.h_z.is_none() {
                    return Err(Error::Config(
                        "params: ising model needs J, h_x and h_z".into(),
                    ));
                }
                if self.params.u.is_some() || self.params.j_nnn.is_some() {
                    return Err(Error::Config(
                        "params: U / J_nnn are not ising parameters".into(),
                    ));
                }
            }
            ModelKind::Xxz => {
                if self.params.u.is_none() {
                    return Err(Error::Config("params: xxz model needs J and U".into()));
                }
                if self.params.h_x.is_some() || self.params.h_z.is_some() {
                    return Err(Error::Config(
                        "params: h_x / h_z are not xxz parameters".into(),
                    ));
                }
            }
        }
        match &self.initial_state {
            InitialState::Keyword(k) if k == "cdw" => {}
            InitialState::Keyword(k) => {
                return Err(Error::Config(format!(
                    "initial_state: unknown keyword {k:?} (expected \"cdw\")"
                )))
            }
            InitialState::Bitstring { bitstring } => {
                if bitstring.len() != self.l {
                    return Err(Error::Config(format!(
                        "initial_state.bitstring: length {} does not match L = {}",
                        bitstring.len(),
                        self.l
                    )));
                }
                if !bitstring.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::Config(
                        "initial_state.bitstring: only 0 and 1 allowed".into(),
                    ));
                }
            }
            InitialState::Eigenstate { eigenstate } => {
                if *eigenstate >= (1usize << self.l) {
                    return Err(Error::Config(format!(
                        "initial_state.eigenstate: index {} out of range for dim {}",
                        eigenstate,
                        1usize << self.l
                    )));
                }
            }
        }
        if !(self.grid.t_max > 0.0) || !self.grid.t_max.is_finite() {
            return Err(Error::Config(format!(
                "grid.t_max: expected a positive finite value, got {}",
                self.grid.t_max
            )));
        }
        if self.grid.n_points < 2 {
            return Err(Error::Config(format!(
                "grid.n_points: expected >= 2, got {}",
                self.grid.n_points
            )));
        }
        if !(self.averaging_t > 0.0) || !self.averaging_t.is_finite() {
            return Err(Error::Config(format!(
                "averaging_T: expected a positive finite value, got {}",
                self.averaging_t
            )));
        }
        if !(self.tolerances.degeneracy_tol > 0.0) || !(self.tolerances.support_floor > 0.0) {
            return Err(Error::Config("tolerances: must be positive".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("outputs: must not be empty".into()));
        }
        Ok(())
    }

    pub fn scenario_id(&self) -> String {
        let mut id = format!("{}_L{}", self.model.as_str(), self.l);
        if self.l_s != 1 {
            id.push_str(&format!("_LS{}", self.l_s));
        }
        match &self.initial_state {
            InitialState::Keyword(_) => {}
            InitialState::Bitstring { bitstring } => id.push_str(&format!("_b{bitstring}")),
            InitialState::Eigenstate { eigenstate } => id.push_str(&format!("_eig{eigenstate}")),
        }
        id
    }

    pub fn build_model(&self) -> Result<LocalHamiltonian> {
        match self.model {
            ModelKind::Ising => build_ising(&IsingParams {
                l: self.l,
                j: self.params.j,
                h_x: self.params.h_x.unwrap_or(0.0),
                h_z: self.params.h_z.unwrap_or(0.0),
            }),
            ModelKind::Xxz => build_xxz(&XXZParams {
                l: self.l,
                j: self.params.j,
                u_aniso: self.params.u.unwrap_or(0.0),
                j_nnn: self.params.j_nnn.unwrap_or(0.0),
            }),
        }
    }
}

/// Sweep over system size with every other knob shared.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub sweep: SweepAxes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(rename = "L")]
    pub l: Vec<usize>,
}

impl SweepConfig {
    /// Expand into per-size scenario configs (base.L is replaced).
    pub fn expand(&self) -> Result<Vec<ScenarioConfig>> {
        if self.sweep.l.is_empty() {
            return Err(Error::Config("sweep.L: must not be empty".into()));
        }
        let mut out = Vec::with_capacity(self.sweep.l.len());
        for &l in &self.sweep.l {
            let mut cfg = self.base.clone();
            cfg.l = l;
            cfg.validate()?;
            out.push(cfg);
        }
        Ok(out)
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: SweepConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })?;
    cfg.base.validate()?;
    Ok(cfg)
}

/// The plotted quantities, aligned to one grid.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesBundle {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub g_norm: Vec<f64>,
    pub avg_g_tau: Vec<f64>,
    pub speed_abs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub code_version: String,
    pub notes: Vec<String>,
}

/// Everything one scenario run produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub scenario_id: String,
    pub scenario: ScenarioConfig,
    pub grid_effective: TimeGrid,
    #[serde(skip)]
    pub series: SeriesBundle,
    pub bounds: BoundsReport,
    pub gap_report: GapReport,
    pub gap_report_occupied: GapReport,
    pub provenance: Provenance,
    #[serde(skip)]
    pub wall_time_ms: u128,
}

/// Build the evolution context for a config (shared by run and check).
pub fn build_context(cfg: &ScenarioConfig) -> Result<(EvolutionContext, LocalHamiltonian)> {
    let model = cfg.build_model()?;
    let h = model.matrix();
    let spec = hermitian_eig(&h)?;
    let psi0 = match &cfg.initial_state {
        InitialState::Keyword(_) => cdw_state(cfg.l)?,
        InitialState::Bitstring { bitstring } => basis_state_from_bits(cfg.l, bitstring)?,
        InitialState::Eigenstate { eigenstate } => spec.eigenvectors.column(*eigenstate).to_owned(),
    };
    let split = BipartitionSpec::new(cfg.l, cfg.l_s)?;
    let ctx = make_context(spec, psi0, split)?;
    Ok((ctx, model))
}

/// Run one scenario end to end: diagonalize, evolve, evaluate every bound.
/// Deterministic given the config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let t_start = std::time::Instant::now();
    let mut notes = Vec::new();
    let (ctx, model) = build_context(cfg)?;
    let gap_report = gap_degeneracy_report(ctx.spectrum(), cfg.tolerances.degeneracy_tol)?;
    let gap_report_occupied = ctx.occupied_gap_report(cfg.tolerances.degeneracy_tol)?;
    let grid = ctx.guarded_grid(cfg.grid.t_max, cfg.grid.n_points)?;
    if grid.n_points != cfg.grid.n_points {
        notes.push(format!(
            "grid n_points raised {} -> {} to satisfy the sampling guard",
            cfg.grid.n_points, grid.n_points
        ));
    }
    let split_norms = model.split_norms(cfg.l_s)?;
    let conv = EntropyConvention {
        support_floor: cfg.tolerances.support_floor,
    };
    let data = ScenarioData::new(ctx, Some(split_norms), conv)?;
    let evaluator = ScenarioEvaluator::new(data, grid)?;

    // analytic infinite-time average when the occupied gaps allow it
    let (g_infty, g_infty_method, g_infty_avg_t) = match evaluator
        .data
        .ctx
        .infinite_average_g_analytic(cfg.tolerances.degeneracy_tol)
    {
        Ok(v) => (v, "analytic", None),
        Err(Error::DegenerateGaps {
            min_spacing,
            min_collision,
            ..
        }) => {
            notes.push(format!(
                "occupied-level gaps degenerate at tol {:.1e} (min spacing {:.3e}, min gap \
                 collision {:.3e}); <g>_inf reported as a finite-T average",
                cfg.tolerances.degeneracy_tol, min_spacing, min_collision
            ));
            let value = if cfg.averaging_t <= grid.t_max {
                finite_time_average(&evaluator.g, cfg.averaging_t)?
            } else {
                let long_grid = evaluator.data.ctx.guarded_grid(cfg.averaging_t, 2)?;
                let g_long = evaluator.data.ctx.figure_of_merit_series(&long_grid)?;
                finite_time_average(&g_long, cfg.averaging_t)?
            };
            (value, "finite_t_fallback", Some(cfg.averaging_t))
        }
        Err(e) => return Err(e),
    };

    let g0 = evaluator.g.values[0];
    if g0 < G0_FLOOR {
        notes.push("g(0) = 0; g_norm emitted as zeros".into());
    }
    let bounds = evaluator.bounds_report(
        grid.t_max,
        g_infty,
        g_infty_method,
        g_infty_avg_t,
        notes.clone(),
    )?;

    let avg_g = running_time_average(&evaluator.g);
    let series = SeriesBundle {
        t: (0..grid.n_points).map(|i| grid.time(i)).collect(),
        f: evaluator.f.values.clone(),
        g: evaluator.g.values.clone(),
        g_norm: evaluator
            .g
            .values
            .iter()
            .map(|&g| if g0 < G0_FLOOR { 0.0 } else { g / g0 })
            .collect(),
        avg_g_tau: avg_g.values,
        speed_abs: evaluator.rate_abs.values.clone(),
    };

    Ok(RunResult {
        scenario_id: cfg.scenario_id(),
        scenario: cfg.clone(),
        grid_effective: grid,
        series,
        bounds,
        gap_report,
        gap_report_occupied,
        provenance: Provenance {
            code_version: env!("CARGO_PKG_VERSION").into(),
            notes: bounds_notes(&evaluator, g_infty_method),
        },
        wall_time_ms: t_start.elapsed().as_millis(),
    })
}

fn bounds_notes(evaluator: &ScenarioEvaluator, g_infty_method: &str) -> Vec<String> {
    let mut notes = vec![format!("g_infty method: {g_infty_method}")];
    if !evaluator.srel.values.iter().all(|v| v.is_finite()) {
        notes.push("relative entropy to the product steady state is infinite somewhere on the grid".into());
    }
    notes
}

/// Run a list of scenarios (a sweep) concurrently; results keep input order.
pub fn sweep(cfgs: &[ScenarioConfig]) -> Vec<Result<RunResult>> {
    cfgs.par_iter().map(run_scenario).collect()
}

/// One row of the sweep summary table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scenario_id: String,
    pub l: usize,
    pub g0: f64,
    pub avg_g_tau: f64,
    pub avg_g_norm: f64,
    pub delta_tau: f64,
    pub tau_qsl: f64,
    pub dominant_tau_index: usize,
    pub tau_eq_unified: f64,
    pub dominant_tau_eq_index: usize,
}

impl SummaryRow {
    pub fn from_result(r: &RunResult) -> Self {
        let g0 = r.series.g[0];
        let avg_g_tau = *r.series.avg_g_tau.last().unwrap_or(&0.0);
        Self {
            scenario_id: r.scenario_id.clone(),
            l: r.scenario.l,
            g0,
            avg_g_tau,
            avg_g_norm: if g0 < G0_FLOOR { 0.0 } else { avg_g_tau / g0 },
            delta_tau: r.bounds.delta_tau,
            tau_qsl: r.bounds.tau_qsl.0,
            dominant_tau_index: r.bounds.dominant_tau_index,
            tau_eq_unified: r.bounds.tau_eq_unified.0,
            dominant_tau_eq_index: r.bounds.dominant_tau_eq_index,
        }
    }
}

fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "inf".into()
    }
}

/// series.csv with the exact column contract
/// `t,f,g,g_norm,avg_g_tau,speed_abs` and 17-significant-digit floats.
pub fn write_series_csv<W: Write>(result: &RunResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "t,f,g,g_norm,avg_g_tau,speed_abs")?;
    let s = &result.series;
    for i in 0..s.t.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt17(s.t[i]),
            fmt17(s.f[i]),
            fmt17(s.g[i]),
            fmt17(s.g_norm[i]),
            fmt17(s.avg_g_tau[i]),
            fmt17(s.speed_abs[i]),
        )?;
    }
    Ok(())
}

/// summary.csv for sweeps, one row per scenario.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "scenario_id,L,g0,avg_g_tau,avg_g_norm,delta_tau,tau_qsl,dominant_tau_index,tau_eq_unified,dominant_tau_eq_index"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scenario_id,
            r.l,
            fmt17(r.g0),
            fmt17(r.avg_g_tau),
            fmt17(r.avg_g_norm),
            fmt17(r.delta_tau),
            fmt17(r.tau_qsl),
            r.dominant_tau_index,
            fmt17(r.tau_eq_unified),
            r.dominant_tau_eq_index,
        )?;
    }
    Ok(())
}

/// bounds.json text: the full report with floats at 17 significant digits.
pub fn bounds_json_string(result: &RunResult) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter::new());
    result.serialize(&mut ser).map_err(|source| Error::Json {
        path: "<bounds.json>".into(),
        source,
    })?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits utf8"))
}

/// Pretty JSON formatter that renders every float with 17 significant digits,
/// so emitted values re-parse bit-exactly.
struct SciFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{value:.7e}")
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.inner, writer)
    }

    fn end_array<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.inner, writer)
    }

    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.inner, writer, first)
    }

    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.inner, writer)
    }

    fn begin_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.inner, writer)
    }

    fn end_object<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.inner, writer)
    }

    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.inner, writer, first)
    }

    fn end_object_key<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_key(&mut self.inner, writer)
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.inner, writer)
    }

    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.inner, writer)
    }
}

/// Metadata that intentionally varies between runs; kept out of bounds.json
/// so the deterministic outputs stay bitwise comparable.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub timestamp_unix_ms: u128,
    pub wall_time_ms: u128,
}

/// Write the requested artifacts under `out_dir/<scenario-id>/`.
///
/// `format_filter` of None writes everything the config asked for; Some
/// restricts to that format.
pub fn write_outputs(
    result: &RunResult,
    out_dir: &Path,
    format_filter: Option<OutputKind>,
) -> Result<std::path::PathBuf> {
    let dir = out_dir.join(&result.scenario_id);
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let wants = |kind: OutputKind| {
        result.scenario.outputs.contains(&kind) && format_filter.map_or(true, |f| f == kind)
    };
    if wants(OutputKind::Series) {
        let path = dir.join("series.csv");
        let file = std::fs::File::create(&path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        write_series_csv(result, std::io::BufWriter::new(file)).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    if wants(OutputKind::Bounds) {
        let path = dir.join("bounds.json");
        std::fs::write(&path, bounds_json_string(result)?).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let meta = RunMeta {
        timestamp_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        wall_time_ms: result.wall_time_ms,
    };
    let meta_path = dir.join("run_meta.json");
    std::fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
    )
    .map_err(|source| Error::Io {
        path: meta_path.display().to_string(),
        source,
    })?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_ising_json() -> &'static str {
        r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05}}"#
    }

    #[test]
    fn defaults_fill_on_parse() {
        let cfg: ScenarioConfig = serde_json::from_str(minimal_ising_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.l_s, 1);
        assert_eq!(cfg.grid.t_max, 20.0);
        assert_eq!(cfg.grid.n_points, 2001);
        assert_eq!(cfg.averaging_t, 2000.0);
        assert_eq!(cfg.tolerances.degeneracy_tol, 1e-10);
        assert_eq!(cfg.tolerances.support_floor, 1e-12);
        assert_eq!(cfg.outputs.len(), 2);
        assert_eq!(cfg.scenario_id(), "ising_L4");
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05},"bogus":1}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(bad).is_err());
        let bad_params = r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05,"q":2}}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(bad_params).is_err());
    }

    #[test]
    fn bitstring_length_checked() {
        let ok = r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05},
                     "initial_state":{"bitstring":"1010"}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(ok).unwrap();
        cfg.validate().unwrap();
        let short = r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05},
                        "initial_state":{"bitstring":"10"}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(short).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn model_param_mismatch_rejected() {
        let xxz_with_field = r#"{"model":"xxz","L":4,"params":{"J":1.0,"U":2.0,"h_x":0.1}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(xxz_with_field).unwrap();
        assert!(cfg.validate().is_err());
        let ising_missing = r#"{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5}}"#;
        let cfg: ScenarioConfig = serde_json::from_str(ising_missing).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_roundtrip_identical() {
        let text = r#"{"model":"xxz","L":6,"params":{"J":1.0,"U":2.0,"J_nnn":0.2},
                       "grid":{"t_max":50.0,"n_points":1001},"averaging_T":100.0}"#;
        let cfg: ScenarioConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let cfg2: ScenarioConfig = serde_json::from_str(&json).unwrap();
        let json2 = serde_json::to_string(&cfg2).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn sweep_expansion_overrides_l() {
        let text = r#"{"base":{"model":"ising","L":4,"params":{"J":1.0,"h_x":0.5,"h_z":-1.05}},
                       "sweep":{"L":[4,6]}}"#;
        let sw: SweepConfig = serde_json::from_str(text).unwrap();
        let cfgs = sw.expand().unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!(cfgs[0].l, 4);
        assert_eq!(cfgs[1].l, 6);
    }
}
