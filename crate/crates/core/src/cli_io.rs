//! Run configuration, orchestration and file output.
//!
//! Configuration text is `key = value` lines, optionally grouped under
//! `[section]` headers that prefix the keys (`[time]` + `dt` is `time.dt`).
//! `#` starts a comment. Every key is validated; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::benchmarks::model2d::{default_probes, MODEL2D_EXPLICIT_DT};
use crate::benchmarks::{
    run_accuracy, run_icf, run_model2d, scheme_label, AccuracyConfig, BenchmarkReport, BoundsRecord, History, IcfConfig,
    Model2dConfig, ProbeLine, ProbeSeries, Simulation, TimeScheme,
};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, BoundarySpec, Species, SpeciesField, StructuredGrid, TemperatureState};
use crate::materials::{MaterialModel, RegionMaterial};
use crate::operator::SpatialOperator;
use crate::reconstruction::Scheme;
use crate::time_integration::{DualTimeConfig, ResidualKind, SolutionState};

const AXES: [&str; 3] = ["x", "y", "z"];
const SIDES: [&str; 2] = ["low", "high"];
const SPECIES_KEYS: [&str; 3] = ["e", "i", "r"];

/// A non-analytic boundary condition as written in a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcSpec {
    Dirichlet(f64),
    /// Outward normal derivative.
    Neumann(f64),
}

impl BcSpec {
    fn condition(self) -> BoundaryCondition {
        match self {
            BcSpec::Dirichlet(v) => BoundaryCondition::Dirichlet(v),
            BcSpec::Neumann(g) => BoundaryCondition::Neumann(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    /// One of the built-in models: `linear-mms`, `model2d`, `icf`.
    Preset(String),
    /// Uniform material with constant coefficients and linear energies.
    Constant {
        conductivity: [f64; 3],
        exchange: [f64; 2],
        capacity: [f64; 3],
    },
}

impl ModelChoice {
    pub fn build(&self) -> Result<MaterialModel> {
        match self {
            ModelChoice::Preset(name) => match name.as_str() {
                "linear-mms" => Ok(MaterialModel::linear_mms()),
                "model2d" => Ok(MaterialModel::model2d()),
                "icf" => Ok(MaterialModel::icf()),
                other => Err(Error::config(format!("material.model: unknown model '{other}'"))),
            },
            ModelChoice::Constant {
                conductivity,
                exchange,
                capacity,
            } => MaterialModel::custom(RegionMaterial::constant(*conductivity, *exchange, *capacity)),
        }
    }
}

/// A problem assembled from configuration pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub cells: [usize; 3],
    pub model: ModelChoice,
    pub initial: [f64; 3],
    /// Indexed `[axis][side][species]`.
    pub boundary: [[[BcSpec; 3]; 2]; 3],
}

impl CustomSpec {
    pub fn boundary_spec(&self) -> BoundarySpec {
        let mut spec = BoundarySpec::insulated();
        for axis in 0..3 {
            for side in 0..2 {
                for s in Species::ALL {
                    spec.set(axis, side, s, self.boundary[axis][side][s.index()].condition());
                }
            }
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Accuracy { meshes: Vec<usize>, cfl: f64 },
    Model2d { spacing: f64, initial: f64, wall: f64 },
    Icf { spacing: f64, initial: f64, wall: f64 },
    Custom(CustomSpec),
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Accuracy { .. } => "accuracy",
            ProblemSpec::Model2d { .. } => "model2d",
            ProblemSpec::Icf { .. } => "icf",
            ProblemSpec::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitSpec {
    pub dtau: f64,
    pub orders: f64,
    pub max_inner: usize,
    pub residual: ResidualKind,
    pub jacobian_lag: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSpec {
    /// Physical step; absent for the accuracy study, which derives it from the CFL number.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Dual-time settings; `None` selects the explicit midpoint scheme.
    pub implicit: Option<ImplicitSpec>,
}

impl TimeSpec {
    fn scheme(&self, dt: f64) -> TimeScheme {
        match self.implicit {
            None => TimeScheme::Rk2,
            Some(i) => TimeScheme::Implicit(i.dual_time(dt)),
        }
    }
}

impl ImplicitSpec {
    fn dual_time(&self, dt: f64) -> DualTimeConfig {
        DualTimeConfig {
            dt,
            dt_pseudo: self.dtau,
            drop_orders: self.orders,
            max_inner_iters: self.max_inner,
            residual: self.residual,
            jacobian_lag: self.jacobian_lag,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub snapshots: Vec<f64>,
    pub probes: Vec<ProbeLine>,
    pub histories: Vec<(String, [f64; 3])>,
    pub volume: bool,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub scheme: Scheme,
    pub time: TimeSpec,
    pub output: OutputSpec,
    /// Recorded for reproducibility; the solver itself is deterministic.
    pub seed: u64,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Raw key/value table with usage tracking, so leftovers can be reported.
struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: "unterminated section header".into(),
                    })?
                    .trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(Error::Parse {
                        line,
                        message: format!("invalid section name '{name}'"),
                    });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid key '{key}'"),
                });
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            let entry = Entry {
                value: value.trim().to_string(),
                line,
                used: false,
            };
            if let Some(prev) = entries.insert(full.clone(), entry) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key '{full}' (first set on line {})", prev.line),
                });
            }
        }
        Ok(Table { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Entries under `prefix.` in key order, marked used.
    fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, String, usize)> {
        let p = format!("{prefix}.");
        self.entries
            .iter_mut()
            .filter(|(k, _)| k.starts_with(&p))
            .map(|(k, e)| {
                e.used = true;
                (k[p.len()..].to_string(), e.value.clone(), e.line)
            })
            .collect()
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => parse(&v).map(Some).ok_or_else(|| Error::Parse {
                line,
                message: format!("{key}: expected {what}, found '{v}'"),
            }),
        }
    }

    fn get_or<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        Ok(self.get(key, parse, what)?.unwrap_or(default))
    }

    fn require<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<T> {
        self.get(key, parse, what)?
            .ok_or_else(|| Error::config(format!("{key} is required")))
    }

    fn reject_unused(&self, problem: &str) -> Result<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            None => Ok(()),
            Some((k, e)) => Err(Error::Parse {
                line: e.line,
                message: format!("unknown key '{k}' for problem {problem}"),
            }),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|p| item(p.trim())).collect()
}

fn parse_f64_list(s: &str) -> Option<Vec<f64>> {
    parse_list(s, parse_f64)
}

fn parse_array<const N: usize, T: Copy + Default>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<[T; N]> {
    let v = parse_list(s, item)?;
    if v.len() != N {
        return None;
    }
    let mut out = [T::default(); N];
    out.copy_from_slice(&v);
    Some(out)
}

fn parse_f3(s: &str) -> Option<[f64; 3]> {
    parse_array(s, parse_f64)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_bc(s: &str) -> Option<BcSpec> {
    let mut it = s.split_whitespace();
    let kind = it.next()?;
    let value = parse_f64(it.next()?)?;
    if it.next().is_some() {
        return None;
    }
    match kind {
        "dirichlet" => Some(BcSpec::Dirichlet(value)),
        "neumann" => Some(BcSpec::Neumann(value)),
        _ => None,
    }
}

/// `<axis> @ x, y, z`, e.g. `y @ 1.5, 0, 4.5`.
fn parse_probe(name: &str, s: &str) -> Option<ProbeLine> {
    let (axis, point) = s.split_once('@')?;
    let axis = AXES.iter().position(|a| *a == axis.trim())?;
    Some(ProbeLine::new(name, axis, parse_f3(point)?))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_list<T>(v: &[T], f: impl Fn(&T) -> String) -> String {
    v.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn fmt_bc(bc: &BcSpec) -> String {
    match bc {
        BcSpec::Dirichlet(v) => format!("dirichlet {}", fmt_f64(*v)),
        BcSpec::Neumann(g) => format!("neumann {}", fmt_f64(*g)),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(format!("{key} must be positive, got {v}")))
    }
}

/// Parse and validate configuration text, filling in the problem's defaults.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let mut t = Table::parse(text)?;
    let problem_name = t.require("problem", |s| Some(s.to_string()), "a problem name")?;
    let seed = t.get_or("seed", 0u64, |s| s.parse().ok(), "an unsigned integer")?;
    let scheme = t.get_or("scheme.reconstruction", Scheme::Geno, Scheme::parse, "geno, linear4 or central2")?;

    let (problem, defaults) = match problem_name.as_str() {
        "accuracy" => {
            let d = AccuracyConfig::default();
            let meshes = t.get_or("grid.meshes", d.meshes, |s| parse_list(s, |p| p.parse().ok()), "a list of cell counts")?;
            if meshes.is_empty() || meshes.contains(&0) {
                return Err(Error::config("grid.meshes must list positive cell counts"));
            }
            let cfl = positive("time.cfl", t.get_or("time.cfl", d.cfl, parse_f64, "a number")?)?;
            (ProblemSpec::Accuracy { meshes, cfl }, Defaults::accuracy(d.t_end))
        }
        "model2d" => {
            let d = Model2dConfig::default();
            let spacing = positive("grid.spacing", t.get_or("grid.spacing", d.spacing, parse_f64, "a number")?)?;
            let initial = positive("initial.temperature", t.get_or("initial.temperature", d.initial, parse_f64, "a number")?)?;
            let wall = positive("boundary.wall", t.get_or("boundary.wall", d.wall_temperature, parse_f64, "a number")?)?;
            let defaults = Defaults {
                dt: Some(d.dt),
                t_end: d.t_end,
                implicit: None,
                snapshots: d.snapshot_times.clone(),
                probes: default_probes(spacing),
                histories: Vec::new(),
            };
            (ProblemSpec::Model2d { spacing, initial, wall }, defaults)
        }
        "icf" => {
            let d = IcfConfig::desk();
            let spacing = positive("grid.spacing", t.get_or("grid.spacing", d.spacing, parse_f64, "a number")?)?;
            let initial = positive("initial.temperature", t.get_or("initial.temperature", d.initial, parse_f64, "a number")?)?;
            let wall = positive("boundary.wall", t.get_or("boundary.wall", d.wall_temperature, parse_f64, "a number")?)?;
            let dt = t.get("time.dt", parse_f64, "a number")?.unwrap_or(d.dt);
            let defaults = Defaults {
                dt: Some(d.dt),
                t_end: d.t_end,
                implicit: Some(ImplicitSpec {
                    dtau: d.dtau_factor * dt,
                    orders: d.drop_orders,
                    max_inner: d.max_inner_iters,
                    residual: ResidualKind::Unsteady,
                    jacobian_lag: 1,
                }),
                snapshots: d.snapshot_times.clone(),
                probes: d.probes.clone(),
                histories: d.locations.clone(),
            };
            (ProblemSpec::Icf { spacing, initial, wall }, defaults)
        }
        "custom" => (ProblemSpec::Custom(parse_custom(&mut t)?), Defaults::custom()),
        other => {
            return Err(Error::config(format!(
                "problem: unknown problem '{other}' (expected accuracy, model2d, icf or custom)"
            )))
        }
    };

    let time = parse_time(&mut t, &problem, &defaults)?;
    let output = parse_output(&mut t, &problem, &defaults)?;
    t.reject_unused(problem.name())?;
    Ok(RunSpec {
        problem,
        scheme,
        time,
        output,
        seed,
    })
}

/// Problem-dependent defaults for the shared sections.
struct Defaults {
    dt: Option<f64>,
    t_end: f64,
    implicit: Option<ImplicitSpec>,
    snapshots: Vec<f64>,
    probes: Vec<ProbeLine>,
    histories: Vec<(String, [f64; 3])>,
}

impl Defaults {
    fn accuracy(t_end: f64) -> Self {
        Defaults {
            dt: None,
            t_end,
            implicit: None,
            snapshots: Vec::new(),
            probes: Vec::new(),
            histories: Vec::new(),
        }
    }

    fn custom() -> Self {
        Defaults {
            dt: None,
            t_end: 0.0,
            implicit: None,
            snapshots: Vec::new(),
            probes: Vec::new(),
            histories: Vec::new(),
        }
    }
}

fn parse_custom(t: &mut Table) -> Result<CustomSpec> {
    let lo = t.require("grid.lo", parse_f3, "three numbers")?;
    let hi = t.require("grid.hi", parse_f3, "three numbers")?;
    let cells = t.require("grid.cells", |s| parse_array(s, |p| p.parse::<usize>().ok()), "three cell counts")?;
    for a in 0..3 {
        if !(hi[a] > lo[a]) {
            return Err(Error::config("grid.hi must exceed grid.lo on every axis"));
        }
        if cells[a] == 0 {
            return Err(Error::config("grid.cells must be positive"));
        }
    }
    let model_name = t.require("material.model", |s| Some(s.to_string()), "a model name")?;
    let model = if model_name == "constant" {
        ModelChoice::Constant {
            conductivity: t.require("material.conductivity", parse_f3, "three numbers")?,
            exchange: t.require("material.exchange", |s| parse_array(s, parse_f64), "two numbers")?,
            capacity: t.require("material.capacity", parse_f3, "three numbers")?,
        }
    } else {
        ModelChoice::Preset(model_name)
    };
    model.build()?;
    let initial = t.require("initial.temperature", parse_f3, "three numbers")?;
    for v in initial {
        positive("initial.temperature", v)?;
    }
    let default = t.get_or("boundary.default", BcSpec::Neumann(0.0), parse_bc, "'dirichlet <v>' or 'neumann <g>'")?;
    let mut boundary = [[[default; 3]; 2]; 3];
    for axis in 0..3 {
        for side in 0..2 {
            for s in 0..3 {
                let key = format!("boundary.{}.{}.{}", AXES[axis], SIDES[side], SPECIES_KEYS[s]);
                if let Some(bc) = t.get(&key, parse_bc, "'dirichlet <v>' or 'neumann <g>'")? {
                    boundary[axis][side][s] = bc;
                }
            }
        }
    }
    Ok(CustomSpec {
        lo,
        hi,
        cells,
        model,
        initial,
        boundary,
    })
}

fn parse_time(t: &mut Table, problem: &ProblemSpec, d: &Defaults) -> Result<TimeSpec> {
    let explicit_scheme = t.get("time.scheme", |s| Some(s.to_string()), "rk2 or implicit")?;
    let implicit = match explicit_scheme.as_deref() {
        None => d.implicit.is_some(),
        Some("rk2") => false,
        Some("implicit") => true,
        Some(other) => return Err(Error::config(format!("time.scheme: expected rk2 or implicit, found '{other}'"))),
    };
    match (problem, implicit) {
        (ProblemSpec::Accuracy { .. }, true) => {
            return Err(Error::config("time.scheme: the accuracy study runs with rk2 only"))
        }
        (ProblemSpec::Icf { .. }, false) => return Err(Error::config("time.scheme: the icf problem runs implicit only")),
        _ => {}
    }
    let dt = match problem {
        ProblemSpec::Accuracy { .. } => None,
        _ => {
            let dt = match (t.get("time.dt", parse_f64, "a number")?, d.dt) {
                (Some(v), _) | (None, Some(v)) => v,
                (None, None) => return Err(Error::config("time.dt is required")),
            };
            Some(positive("time.dt", dt)?)
        }
    };
    let t_end = match t.get("time.t_end", parse_f64, "a number")? {
        Some(v) => v,
        None if d.t_end > 0.0 => d.t_end,
        None => return Err(Error::config("time.t_end is required")),
    };
    positive("time.t_end", t_end)?;
    let implicit = if implicit {
        let base = d.implicit.filter(|_| explicit_scheme.is_none());
        let dtau = match (t.get("time.dtau", parse_f64, "a number")?, base) {
            (Some(v), _) => v,
            (None, Some(b)) => b.dtau,
            (None, None) => return Err(Error::config("time.dtau is required when time.scheme = implicit")),
        };
        let fallback = base.or(d.implicit).unwrap_or(ImplicitSpec {
            dtau,
            orders: 3.0,
            max_inner: 200,
            residual: ResidualKind::Unsteady,
            jacobian_lag: 1,
        });
        let spec = ImplicitSpec {
            dtau,
            orders: t.get_or("time.orders", fallback.orders, parse_f64, "a number")?,
            max_inner: t.get_or("time.max_inner", fallback.max_inner, |s| s.parse().ok(), "an iteration count")?,
            residual: t.get_or("time.residual", fallback.residual, ResidualKind::parse, "unsteady or update")?,
            jacobian_lag: t.get_or("time.jacobian_lag", fallback.jacobian_lag, |s| s.parse().ok(), "an iteration count")?,
        };
        spec.dual_time(dt.unwrap_or(1.0)).validate()?;
        Some(spec)
    } else {
        for key in ["time.dtau", "time.orders", "time.max_inner", "time.residual", "time.jacobian_lag"] {
            if t.has(key) {
                return Err(Error::config(format!("{key} applies only when time.scheme = implicit")));
            }
        }
        None
    };
    Ok(TimeSpec { dt, t_end, implicit })
}

fn parse_output(t: &mut Table, problem: &ProblemSpec, d: &Defaults) -> Result<OutputSpec> {
    let dir = t.get_or("output.dir", PathBuf::from("out"), |s| Some(PathBuf::from(s)), "a path")?;
    let volume = t.get_or("output.volume", false, parse_bool, "true or false")?;
    let accuracy = matches!(problem, ProblemSpec::Accuracy { .. });
    let snapshots = t.get_or("output.snapshots", d.snapshots.clone(), parse_f64_list, "a list of times")?;
    if snapshots.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::config("output.snapshots must be positive times"));
    }
    let mut probes = Vec::new();
    for (name, value, line) in t.take_prefixed("output.probe") {
        let probe = parse_probe(&name, &value).ok_or_else(|| Error::Parse {
            line,
            message: format!("output.probe.{name}: expected '<x|y|z> @ x, y, z', found '{value}'"),
        })?;
        probes.push(probe);
    }
    if probes.is_empty() {
        probes = d.probes.clone();
    }
    let mut histories = Vec::new();
    for (name, value, line) in t.take_prefixed("output.history") {
        let point = parse_f3(&value).ok_or_else(|| Error::Parse {
            line,
            message: format!("output.history.{name}: expected three coordinates, found '{value}'"),
        })?;
        histories.push((name, point));
    }
    if histories.is_empty() {
        histories = d.histories.clone();
    }
    if accuracy && (!snapshots.is_empty() || !probes.is_empty() || !histories.is_empty()) {
        return Err(Error::config("output.snapshots, output.probe and output.history do not apply to the accuracy study"));
    }
    if !histories.is_empty() && matches!(problem, ProblemSpec::Model2d { .. }) {
        return Err(Error::config("output.history does not apply to problem model2d"));
    }
    if probes.iter().any(|p| p.name.is_empty()) {
        return Err(Error::config("output.probe: probe names must not be empty"));
    }
    Ok(OutputSpec {
        dir,
        snapshots,
        probes,
        histories,
        volume,
    })
}

/// The configuration text that [`parse_config`] maps back to `spec`.
pub fn emit_config(spec: &RunSpec) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("problem", spec.problem.name().to_string());
    kv("seed", spec.seed.to_string());
    kv("scheme.reconstruction", spec.scheme.name().to_string());
    match &spec.problem {
        ProblemSpec::Accuracy { meshes, cfl } => {
            kv("grid.meshes", fmt_list(meshes, |m| m.to_string()));
            kv("time.cfl", fmt_f64(*cfl));
        }
        ProblemSpec::Model2d { spacing, initial, wall } | ProblemSpec::Icf { spacing, initial, wall } => {
            kv("grid.spacing", fmt_f64(*spacing));
            kv("initial.temperature", fmt_f64(*initial));
            kv("boundary.wall", fmt_f64(*wall));
        }
        ProblemSpec::Custom(c) => {
            kv("grid.lo", fmt_list(&c.lo, |v| fmt_f64(*v)));
            kv("grid.hi", fmt_list(&c.hi, |v| fmt_f64(*v)));
            kv("grid.cells", fmt_list(&c.cells, |v| v.to_string()));
            match &c.model {
                ModelChoice::Preset(name) => kv("material.model", name.clone()),
                ModelChoice::Constant {
                    conductivity,
                    exchange,
                    capacity,
                } => {
                    kv("material.model", "constant".into());
                    kv("material.conductivity", fmt_list(conductivity, |v| fmt_f64(*v)));
                    kv("material.exchange", fmt_list(exchange, |v| fmt_f64(*v)));
                    kv("material.capacity", fmt_list(capacity, |v| fmt_f64(*v)));
                }
            }
            kv("initial.temperature", fmt_list(&c.initial, |v| fmt_f64(*v)));
            for axis in 0..3 {
                for side in 0..2 {
                    for s in 0..3 {
                        let key = format!("boundary.{}.{}.{}", AXES[axis], SIDES[side], SPECIES_KEYS[s]);
                        kv(&key, fmt_bc(&c.boundary[axis][side][s]));
                    }
                }
            }
        }
    }
    let tm = &spec.time;
    kv("time.scheme", if tm.implicit.is_some() { "implicit" } else { "rk2" }.into());
    if let Some(dt) = tm.dt {
        kv("time.dt", fmt_f64(dt));
    }
    kv("time.t_end", fmt_f64(tm.t_end));
    if let Some(i) = &tm.implicit {
        kv("time.dtau", fmt_f64(i.dtau));
        kv("time.orders", fmt_f64(i.orders));
        kv("time.max_inner", i.max_inner.to_string());
        kv("time.residual", i.residual.name().into());
        kv("time.jacobian_lag", i.jacobian_lag.to_string());
    }
    let o = &spec.output;
    kv("output.dir", o.dir.display().to_string());
    kv("output.volume", o.volume.to_string());
    if !matches!(spec.problem, ProblemSpec::Accuracy { .. }) {
        kv("output.snapshots", fmt_list(&o.snapshots, |v| fmt_f64(*v)));
    }
    for p in &o.probes {
        kv(
            &format!("output.probe.{}", p.name),
            format!("{} @ {}", AXES[p.axis], fmt_list(&p.point, |v| fmt_f64(*v))),
        );
    }
    for (name, point) in &o.histories {
        kv(&format!("output.history.{name}"), fmt_list(point, |v| fmt_f64(*v)));
    }
    out
}

/// Switch an ICF configuration to the full-resolution, full-length run.
pub fn apply_long_running(spec: &mut RunSpec) -> Result<()> {
    let ProblemSpec::Icf { spacing, .. } = &mut spec.problem else {
        return Err(Error::config("--long-running applies only to problem = icf"));
    };
    let full = IcfConfig::long_running();
    *spacing = full.spacing;
    spec.time.dt = Some(full.dt);
    spec.time.t_end = full.t_end;
    if let Some(i) = spec.time.implicit.as_mut() {
        i.dtau = full.dtau_factor * full.dt;
    }
    spec.output.snapshots = full.snapshot_times;
    Ok(())
}

/// Write `bytes` next to `path` and rename into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn series_csv(series: &ProbeSeries) -> String {
    let mut out = String::from("coord,Te,Ti,Tr\n");
    for (x, v) in series.coords.iter().zip(&series.values) {
        let _ = writeln!(out, "{x:.16e},{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2]);
    }
    out
}

/// Temperatures along `line` as CSV with header `coord,Te,Ti,Tr`.
pub fn write_probe_csv(state: &SolutionState, grid: &StructuredGrid, line: &ProbeLine, path: &Path) -> Result<()> {
    if line.name.is_empty() {
        return Err(Error::config("probe line has no name"));
    }
    let series = line.sample(state, grid)?;
    write_atomic(path, series_csv(&series).as_bytes())
}

fn history_csv(h: &History) -> String {
    let mut out = String::from("t,Te,Ti,Tr\n");
    for (t, v) in h.times.iter().zip(&h.values) {
        let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2]);
    }
    out
}

/// Legacy ASCII VTK structured-points text with cell data `Te`, `Ti`, `Tr`.
pub fn volume_vtk(temperature: &TemperatureState, grid: &StructuredGrid, time: f64) -> String {
    let n = grid.n_cells();
    let (lo, h) = (grid.lo(), grid.spacing());
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "temperatures at t = {time:?}");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", n[0] + 1, n[1] + 1, n[2] + 1);
    let _ = writeln!(out, "ORIGIN {:?} {:?} {:?}", lo[0], lo[1], lo[2]);
    let _ = writeln!(out, "SPACING {:?} {:?} {:?}", h[0], h[1], h[2]);
    let _ = writeln!(out, "CELL_DATA {}", grid.interior_count());
    for s in Species::ALL {
        let _ = writeln!(out, "SCALARS {} double 1", s.label());
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for c in grid.interior_cells() {
            let _ = writeln!(out, "{:.16e}", temperature.get(grid, c)[s.index()]);
        }
    }
    out
}

pub fn write_volume(temperature: &TemperatureState, grid: &StructuredGrid, time: f64, path: &Path) -> Result<()> {
    write_atomic(path, volume_vtk(temperature, grid, time).as_bytes())
}

/// One line per physical step of every solver run.
pub fn run_log(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    for run in &report.runs {
        for s in &run.steps {
            let _ = writeln!(
                out,
                "{} step {} t {:?} inner {} residual {:.6e} {:.6e} {:.6e} converged {} wall {:.6}",
                run.label, s.step, s.time, s.inner_iters, s.residual[0], s.residual[1], s.residual[2], s.converged, s.wall
            );
        }
    }
    out
}

pub fn report_text(spec: &RunSpec, report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", spec.seed);
    for (k, v) in report.key_values() {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Short human-readable table for the terminal.
pub fn summary(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}, {})", report.problem, report.scheme, report.time_scheme);
    if !report.mesh_errors.is_empty() {
        let _ = writeln!(out, "{:>8} {:>12} {:>7} {:>12} {:>7}", "h", "L1(Te)", "order", "Linf(Te)", "order");
        let orders = report.orders();
        for (i, m) in report.mesh_errors.iter().enumerate() {
            let (o1, oi) = if i == 0 {
                ("-".to_string(), "-".to_string())
            } else {
                (format!("{:.2}", orders[i - 1].0[0]), format!("{:.2}", orders[i - 1].1[0]))
            };
            let _ = writeln!(out, "{:>8} {:>12.4e} {:>7} {:>12.4e} {:>7}", format!("1/{}", m.cells[0]), m.l1[0], o1, m.linf[0], oi);
        }
    }
    for b in &report.bounds {
        let _ = writeln!(
            out,
            "{:<8} t = {:<8} min {:.6e} {:.6e} {:.6e}  max {:.6e} {:.6e} {:.6e}",
            b.label, b.time, b.min[0], b.min[1], b.min[2], b.max[0], b.max[1], b.max[2]
        );
    }
    let _ = writeln!(out, "wall time {:.2} s", report.wall_seconds);
    out
}

/// Run a custom problem: uniform initial data, configured boundaries, no source.
pub fn run_custom(c: &CustomSpec, spec: &RunSpec) -> Result<BenchmarkReport> {
    let start = Instant::now();
    let model = c.model.build()?;
    let grid = StructuredGrid::new(c.lo, c.hi, c.cells, |p| model.region_of(p))?;
    let boundary = c.boundary_spec();
    let temp = SpeciesField::uniform(&grid, c.initial);
    let state = SolutionState::from_temperature(&model, &grid, temp, 0.0);
    let op = SpatialOperator::new(grid.clone(), model, boundary, spec.scheme);
    let dt = spec.time.dt.ok_or_else(|| Error::config("time.dt is required"))?;
    let time = spec.time.scheme(dt);
    let mut sim = Simulation::new(op, state, time, dt, format!("{}-{}", spec.scheme.name(), time.name()));
    let mut report = BenchmarkReport {
        problem: "custom".into(),
        scheme: scheme_label(spec.scheme),
        time_scheme: time.name().into(),
        ..Default::default()
    };
    let mut histories = Vec::new();
    for (name, point) in &spec.output.histories {
        let cell = grid
            .locate(*point)
            .ok_or_else(|| Error::config(format!("output.history.{name} lies outside the domain")))?;
        histories.push(History {
            name: name.clone(),
            cell,
            center: grid.cell_center(cell),
            times: vec![0.0],
            values: vec![sim.state.temperature.get(&grid, cell)],
        });
    }
    let mut running = BoundsRecord::from_state("running", &sim.state, &grid);
    let t_end = spec.time.t_end;
    let mut times: Vec<f64> = spec.output.snapshots.iter().copied().filter(|&t| t < t_end).collect();
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();
    for (i, &t) in times.iter().enumerate() {
        sim.advance_to_with(t, |state, grid| {
            running.merge(&BoundsRecord::from_state("", state, grid));
            for h in histories.iter_mut() {
                h.times.push(state.time);
                h.values.push(state.temperature.get(grid, h.cell));
            }
        })?;
        report.bounds.push(BoundsRecord::from_state(format!("t{i}"), &sim.state, &grid));
        for p in &spec.output.probes {
            let mut series = p.sample(&sim.state, &grid)?;
            series.name = format!("{}_t{i}", p.name);
            report.probes.push(series);
        }
    }
    running.time = sim.state.time;
    report.bounds.push(running);
    report.histories = histories;
    report.final_grid = Some(grid);
    report.final_temperature = Some(sim.state.temperature.clone());
    report.runs.push(sim.log);
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Execute the configured problem without writing anything.
pub fn execute(spec: &RunSpec) -> Result<BenchmarkReport> {
    match &spec.problem {
        ProblemSpec::Accuracy { meshes, cfl } => run_accuracy(&AccuracyConfig {
            meshes: meshes.clone(),
            t_end: spec.time.t_end,
            cfl: *cfl,
            scheme: spec.scheme,
        }),
        ProblemSpec::Model2d { spacing, initial, wall } => {
            let dt = spec.time.dt.unwrap_or(MODEL2D_EXPLICIT_DT);
            run_model2d(&Model2dConfig {
                spacing: *spacing,
                scheme: spec.scheme,
                time: spec.time.scheme(dt),
                dt,
                t_end: spec.time.t_end,
                snapshot_times: spec.output.snapshots.clone(),
                probes: spec.output.probes.clone(),
                initial: *initial,
                wall_temperature: *wall,
            })
        }
        ProblemSpec::Icf { spacing, initial, wall } => {
            let d = IcfConfig::desk();
            let dt = spec.time.dt.unwrap_or(d.dt);
            let imp = spec
                .time
                .implicit
                .ok_or_else(|| Error::config("time.scheme: the icf problem runs implicit only"))?;
            run_icf(&IcfConfig {
                spacing: *spacing,
                scheme: spec.scheme,
                dt,
                t_end: spec.time.t_end,
                dtau_factor: imp.dtau / dt,
                drop_orders: imp.orders,
                max_inner_iters: imp.max_inner,
                snapshot_times: spec.output.snapshots.clone(),
                locations: spec.output.histories.clone(),
                probes: spec.output.probes.clone(),
                initial: *initial,
                wall_temperature: *wall,
                ..d
            })
        }
        ProblemSpec::Custom(c) => run_custom(c, spec),
    }
}

/// Result of [`run`]: the report and the files written.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: BenchmarkReport,
    pub files: Vec<PathBuf>,
}

/// Execute `spec` and write the effective configuration, run log, report,
/// probe and history CSVs and the optional volume dump into `spec.output.dir`.
/// Nothing is written if the run fails.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    let report = execute(spec)?;
    let dir = &spec.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut put = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        files.push(path);
        Ok(())
    };
    put("effective.cfg".into(), emit_config(spec))?;
    put("run.log".into(), run_log(&report))?;
    put("report.txt".into(), report_text(spec, &report))?;
    for series in &report.probes {
        put(format!("probe_{}.csv", series.name), series_csv(series))?;
    }
    for h in &report.histories {
        put(format!("history_{}.csv", h.name), history_csv(h))?;
    }
    if spec.output.volume {
        if let (Some(grid), Some(temp)) = (&report.final_grid, &report.final_temperature) {
            put("volume.vtk".into(), volume_vtk(temp, grid, spec.time.t_end))?;
        }
    }
    Ok(RunOutcome { report, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_defaults() {
        let spec = parse_config("problem = accuracy\n").unwrap();
        assert_eq!(
            spec.problem,
            ProblemSpec::Accuracy {
                meshes: vec![5, 10, 20, 40],
                cfl: 0.1
            }
        );
        assert_eq!(spec.time.t_end, 1.0);
        assert_eq!(spec.time.dt, None);
        assert!(spec.time.implicit.is_none());
    }

    #[test]
    fn sections_prefix_keys() {
        let text = "problem = model2d\n[time]\ndt = 1e-4 # comment\nt_end = 0.5\n";
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.time.dt, Some(1e-4));
        assert_eq!(spec.time.t_end, 0.5);
    }

    #[test]
    fn implicit_without_dtau_names_key() {
        let err = parse_config("problem = model2d\ntime.scheme = implicit\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("time.dtau")), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("problem = model2d\n\ngrid.spacnig = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_value_reports_line() {
        let err = parse_config("problem = model2d\ntime.dt = fast\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_key_rejected() {
        let err = parse_config("problem = icf\n[time]\ndt = 1e-4\n[time]\ndt = 2e-4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn unknown_problem() {
        let err = parse_config("problem = sedov\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("problem")));
    }

    #[test]
    fn icf_preset_is_implicit() {
        let spec = parse_config("problem = icf\n").unwrap();
        let imp = spec.time.implicit.unwrap();
        assert_eq!(imp.dtau, 10.0 * spec.time.dt.unwrap());
        assert_eq!(imp.orders, 3.0);
        assert!(parse_config("problem = icf\ntime.scheme = rk2\n").is_err());
    }

    #[test]
    fn custom_boundaries() {
        let text = "problem = custom\n[grid]\nlo = 0, 0, 0\nhi = 1, 1, 1\ncells = 4, 4, 1\n\
                    [material]\nmodel = constant\nconductivity = 1, 1, 1\nexchange = 1, 1\ncapacity = 1, 1, 1\n\
                    [initial]\ntemperature = 1, 1, 1\n[boundary]\nx.low.r = dirichlet 2\n\
                    [time]\ndt = 0.01\nt_end = 0.1\n";
        let spec = parse_config(text).unwrap();
        let ProblemSpec::Custom(c) = &spec.problem else { panic!() };
        assert_eq!(c.boundary[0][0][2], BcSpec::Dirichlet(2.0));
        assert_eq!(c.boundary[0][0][0], BcSpec::Neumann(0.0));
        assert_eq!(parse_config(&emit_config(&spec)).unwrap(), spec);
    }

    #[test]
    fn probe_syntax() {
        let p = parse_probe("a", "y @ 1.5, 0, 4.5").unwrap();
        assert_eq!((p.axis, p.point), (1, [1.5, 0.0, 4.5]));
        assert!(parse_probe("a", "w @ 1, 2, 3").is_none());
        assert!(parse_probe("a", "x @ 1, 2").is_none());
    }

    #[test]
    fn vtk_header() {
        // point dimensions are cell counts plus one
        let grid = StructuredGrid::new([0.0; 3], [1.0; 3], [3, 3, 4], |_| crate::grid::RegionId(0)).unwrap();
        let t = SpeciesField::uniform(&grid, [1.0, 2.0, 3.0]);
        let text = volume_vtk(&t, &grid, 0.0);
        assert!(text.contains("DIMENSIONS 4 4 5"));
        assert!(text.contains("CELL_DATA 36"));
        assert_eq!(text.matches("SCALARS").count(), 3);
    }
}
