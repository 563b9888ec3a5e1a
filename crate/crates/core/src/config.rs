//! Flat `section.key = value` configuration.
//!
//! A config file is TOML restricted to one level of sections: `design`,
//! `wind`, `control`, `scenario`, `year` and `output`. Either
//! `design.bess_mw = 30` at the top level or a `[design]` table works.
//! Every key has a default, so an empty file is the initial design on the
//! reference wind. Unknown sections and keys are rejected with the line they
//! appear on.
//!
//! `design.preset` replaces the whole design section with a named preset
//! before the file's other design keys apply; it is an input-only key and
//! does not appear in [`Config::echo`].

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;
use toml::{Table, Value};

use crate::engine::{
    short_term_wind_field, suite_cases, AnnualInput, DesignSpec, EngineError, EventKind, EventSpec, EventTime,
    Scenario, WindSetup, ANNUAL_DT_S, ANNUAL_ELY_RAMP_S, ANNUAL_SEED, REFERENCE_DURATION_S,
};
use crate::plants::PlatformLoad;
use crate::pms::{Allocation, ControlConfig};
use crate::wind::{read_annual_means, read_wind_field, WindField};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// TOML syntax; the message carries line and column.
    #[error("{origin}: {message}")]
    Syntax { origin: String, message: String },
    #[error("{origin}: `{key}`: {message}")]
    Key { origin: String, key: String, message: String },
    #[error("inconsistent configuration: {0}")]
    Invalid(String),
}

const SECTIONS: [&str; 6] = ["design", "wind", "control", "scenario", "year", "output"];

/// Which short-term case `run` simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// One of S1..S7 (index 0..7): fixes ramp, allocation and event.
    Suite(usize),
    /// Design, control and `scenario.event*` as configured.
    Custom,
}

impl Case {
    fn parse(s: &str) -> Option<Self> {
        if s.eq_ignore_ascii_case("custom") {
            return Some(Case::Custom);
        }
        suite_cases()
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(s))
            .map(Case::Suite)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Case::Suite(i) => suite_cases()[*i].name,
            Case::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindConfig {
    pub setup: WindSetup,
    /// Per-turbine speeds to replay instead of synthesizing.
    pub field_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Output folder name; empty means the case name.
    pub name: String,
    pub case: Case,
    pub dt: f64,
    pub duration: f64,
    /// Custom case only.
    pub event: Option<EventSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearConfig {
    /// `initial`, `design1`, `design2`, or `custom` for the design section.
    pub preset: String,
    /// Electrolyzer ramp applied to presets (not to `custom`).
    pub ely_ramp_s: f64,
    pub dt: f64,
    /// Hourly mean series; `None` uses the bundled year.
    pub means_csv: Option<PathBuf>,
    pub seed: u64,
    pub turbulence_intensity: f64,
    pub factors: Vec<f64>,
    /// Write every n-th row of the year trace (60 at one-minute steps is hourly).
    pub trace_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every n-th trace row.
    pub trace_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub design: DesignSpec,
    pub wind: WindConfig,
    pub control: ControlConfig,
    pub scenario: ScenarioConfig,
    pub year: YearConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            design: DesignSpec::initial(),
            wind: WindConfig {
                setup: WindSetup::reference(),
                field_csv: None,
            },
            control: ControlConfig::default(),
            scenario: ScenarioConfig {
                name: String::new(),
                case: Case::Suite(0),
                dt: 1.0,
                duration: REFERENCE_DURATION_S,
                event: None,
            },
            year: YearConfig {
                preset: "design1".into(),
                ely_ramp_s: ANNUAL_ELY_RAMP_S,
                dt: ANNUAL_DT_S,
                means_csv: None,
                seed: ANNUAL_SEED,
                turbulence_intensity: crate::wind::AnnualWindSpec::default().turbulence_intensity,
                factors: vec![1.0, 1.6, 1.8, 2.0],
                trace_stride: 60,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                trace_stride: 1,
            },
        }
    }
}

/// Where a key was set, for error messages.
struct Source<'a> {
    name: &'a str,
    text: Option<&'a str>,
}

impl Source<'_> {
    fn locate(&self, section: &str, key: &str) -> String {
        let Some(text) = self.text else {
            return self.name.to_string();
        };
        let dotted = format!("{section}.{key}");
        let mut current = String::new();
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if let Some(h) = l.strip_prefix('[') {
                current = h.trim_end_matches(']').trim().to_string();
                continue;
            }
            let lhs = l.split('=').next().unwrap_or("").trim();
            let lhs: String = lhs.chars().filter(|c| !c.is_whitespace()).collect();
            let hit = if current.is_empty() { lhs == dotted } else { current == section && lhs == key };
            if hit {
                return format!("{}:{}", self.name, i + 1);
            }
        }
        self.name.to_string()
    }
}

fn type_err(what: &str, v: &Value) -> String {
    format!("expected {what}, got {}", v.type_str())
}

fn as_f64(v: &Value) -> Result<f64, String> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_err("a number", v)),
    }
}

fn as_u64(v: &Value) -> Result<u64, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(type_err("a non-negative integer", v)),
    }
}

fn as_usize(v: &Value) -> Result<usize, String> {
    as_u64(v).map(|x| x as usize)
}

fn as_bool(v: &Value) -> Result<bool, String> {
    v.as_bool().ok_or_else(|| type_err("true or false", v))
}

fn as_str(v: &Value) -> Result<&str, String> {
    v.as_str().ok_or_else(|| type_err("a string", v))
}

fn as_array<T>(v: &Value, each: impl Fn(&Value) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.as_array()
        .ok_or_else(|| type_err("an array", v))?
        .iter()
        .map(each)
        .collect()
}

fn positive(x: f64) -> Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn non_negative(x: f64) -> Result<f64, String> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be >= 0, got {x}"))
    }
}

fn fraction(x: f64) -> Result<f64, String> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("must lie in [0, 1], got {x}"))
    }
}

fn allocation(v: &Value) -> Result<Allocation, String> {
    let s = as_str(v)?;
    Allocation::parse(s).ok_or_else(|| format!("expected `sequence` or `synchronized`, got `{s}`"))
}

fn optional_path(v: &Value) -> Result<Option<PathBuf>, String> {
    let s = as_str(v)?;
    Ok((!s.is_empty()).then(|| PathBuf::from(s)))
}

fn path_value(p: &Option<PathBuf>) -> Value {
    Value::String(p.as_ref().map(|p| p.display().to_string()).unwrap_or_default())
}

/// Replace the per-platform column selected by `set`, keeping the others;
/// a new length resizes the cluster with default pf 0.8 / priority 1.
fn set_platform_column(loads: &mut Vec<PlatformLoad>, n: usize, mut set: impl FnMut(&mut PlatformLoad, usize)) {
    loads.resize(n, PlatformLoad::new(0.0, 0.8, 1));
    for (i, l) in loads.iter_mut().enumerate() {
        set(l, i);
    }
}

impl Config {
    /// Defaults plus `path` (if any) plus `--set` overrides, in that order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Self::from_toml_str(&text, &p.display().to_string())?
            }
            None => Self::default(),
        };
        for o in overrides {
            cfg.apply_override(o)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a whole file onto the defaults. `origin` names it in errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
            origin: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        let mut cfg = Self::default();
        cfg.apply_table(
            &table,
            &Source {
                name: origin,
                text: Some(text),
            },
        )?;
        Ok(cfg)
    }

    /// Apply one `section.key=value`. A value that is not valid TOML is
    /// taken as a bare string, so `--set year.preset=design2` works unquoted.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let origin = format!("--set {assignment}");
        let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError::Syntax {
            origin: origin.clone(),
            message: "expected KEY=VALUE".into(),
        })?;
        let key = key.trim();
        let (section, name) = key.split_once('.').ok_or_else(|| ConfigError::Key {
            origin: origin.clone(),
            key: key.to_string(),
            message: "expected `section.key`".into(),
        })?;
        let raw = raw.trim();
        let value = match format!("v = {raw}").parse::<Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.to_string()),
        };
        let src = Source {
            name: &origin,
            text: None,
        };
        if !SECTIONS.contains(&section) {
            return Err(ConfigError::Key {
                origin,
                key: key.to_string(),
                message: format!("unknown section; expected one of {}", SECTIONS.join(", ")),
            });
        }
        if section == "design" && name == "preset" {
            return self.apply_design_preset(&value, &src);
        }
        self.set(section, name, &value, &src)
    }

    fn apply_table(&mut self, table: &Table, src: &Source) -> Result<(), ConfigError> {
        for (section, body) in table {
            let Some(body) = body.as_table() else {
                return Err(ConfigError::Key {
                    origin: src.locate("", section),
                    key: section.clone(),
                    message: format!("top-level keys must be sections: {}", SECTIONS.join(", ")),
                });
            };
            if !SECTIONS.contains(&section.as_str()) {
                let origin = body
                    .keys()
                    .next()
                    .map(|k| src.locate(section, k))
                    .unwrap_or_else(|| src.name.to_string());
                return Err(ConfigError::Key {
                    origin,
                    key: section.clone(),
                    message: format!("unknown section; expected one of {}", SECTIONS.join(", ")),
                });
            }
            if let Some(p) = body.get("preset").filter(|_| section == "design") {
                self.apply_design_preset(p, src)?;
            }
            for (key, value) in body {
                if section == "design" && key == "preset" {
                    continue;
                }
                self.set(section, key, value, src)?;
            }
        }
        Ok(())
    }

    fn apply_design_preset(&mut self, v: &Value, src: &Source) -> Result<(), ConfigError> {
        let err = |message: String| ConfigError::Key {
            origin: src.locate("design", "preset"),
            key: "design.preset".into(),
            message,
        };
        let name = as_str(v).map_err(err)?;
        self.design = DesignSpec::preset(name)
            .ok_or_else(|| err(format!("unknown preset `{name}`; expected initial, design1 or design2")))?;
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, v: &Value, src: &Source) -> Result<(), ConfigError> {
        self.set_inner(section, key, v).map_err(|message| ConfigError::Key {
            origin: src.locate(section, key),
            key: format!("{section}.{key}"),
            message,
        })
    }

    fn set_inner(&mut self, section: &str, key: &str, v: &Value) -> Result<(), String> {
        let f = || as_f64(v);
        let d = &mut self.design;
        let w = &mut self.wind.setup;
        let c = &mut self.control;
        let s = &mut self.scenario;
        let y = &mut self.year;
        match (section, key) {
            ("design", "name") => d.name = as_str(v)?.to_string(),
            ("design", "n_turbines") => d.n_turbines = as_usize(v)?,
            ("design", "turbine_rated_mw") => d.turbine.rated_power_mw = positive(f()?)?,
            ("design", "turbine_cut_in_mps") => d.turbine.cut_in_mps = non_negative(f()?)?,
            ("design", "turbine_rated_speed_mps") => d.turbine.rated_speed_mps = positive(f()?)?,
            ("design", "turbine_cut_out_mps") => d.turbine.cut_out_mps = positive(f()?)?,
            ("design", "rotor_diameter_m") => d.turbine.rotor_diameter_m = positive(f()?)?,
            ("design", "layout_rows") => d.layout_rows = as_usize(v)?,
            ("design", "spacing_diameters") => d.spacing_diameters = positive(f()?)?,
            ("design", "ely_trains") => d.ely_trains = as_usize(v)?,
            ("design", "ely_train_mw") => d.ely_train_mw = positive(f()?)?,
            ("design", "ely_ramp_s") => d.ely_ramp_s = positive(f()?)?,
            ("design", "ely_nominal_nm3h") => d.ely_nominal_nm3h = positive(f()?)?,
            ("design", "fc_blocks") => d.fc_blocks = as_usize(v)?,
            ("design", "fc_block_mw") => d.fc_block_mw = positive(f()?)?,
            ("design", "fc_ramp_s") => d.fc_ramp_s = positive(f()?)?,
            ("design", "fc_specific_consumption") => d.fc_specific_consumption = positive(f()?)?,
            ("design", "afe_mva") => d.afe_mva = positive(f()?)?,
            ("design", "bess_mw") => d.bess_mw = positive(f()?)?,
            ("design", "bess_mwh") => d.bess_mwh = positive(f()?)?,
            ("design", "bess_mva") => d.bess_mva = positive(f()?)?,
            ("design", "soc_initial") => d.soc_initial = fraction(f()?)?,
            ("design", "soc_min") => d.soc_min = fraction(f()?)?,
            ("design", "soc_max") => d.soc_max = fraction(f()?)?,
            ("design", "bess_efficiency") => {
                d.bess_efficiency = fraction(f()?)?;
                positive(d.bess_efficiency)?;
            }
            ("design", "tank_capacity_kg") => {
                d.tank_capacity_kg = match v {
                    Value::String(s) if s == "unbounded" => None,
                    _ => Some(positive(as_f64(v).map_err(|_| type_err("a number or \"unbounded\"", v))?)?),
                }
            }
            ("design", "tank_initial_kg") => d.tank_initial_kg = as_f64(v)?,
            ("design", "tank_reserve_kg") => d.tank_reserve_kg = non_negative(f()?)?,
            ("design", "platform_mw") => {
                let p = as_array(v, |x| as_f64(x).and_then(non_negative))?;
                set_platform_column(&mut d.loads, p.len(), |l, i| l.active_power_mw = p[i]);
            }
            ("design", "platform_pf") => {
                let p = as_array(v, as_f64)?;
                if p.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                    return Err("power factors must lie in (0, 1]".into());
                }
                set_platform_column(&mut d.loads, p.len(), |l, i| l.power_factor = p[i]);
            }
            ("design", "platform_priority") => {
                let p = as_array(v, |x| as_u64(x).map(|u| u as u32))?;
                set_platform_column(&mut d.loads, p.len(), |l, i| l.priority = p[i]);
            }

            ("wind", "mean_speed") => w.turbulence.mean_speed = non_negative(f()?)?,
            ("wind", "turbulence_intensity") => w.turbulence.turbulence_intensity = non_negative(f()?)?,
            ("wind", "length_scale") => w.turbulence.length_scale = positive(f()?)?,
            ("wind", "coherence_decay") => w.turbulence.coherence_decay = non_negative(f()?)?,
            ("wind", "seed") => w.turbulence.seed = as_u64(v)?,
            ("wind", "rotor_gamma") => w.rotor_gamma = non_negative(f()?)?,
            ("wind", "wake") => w.wake.enabled = as_bool(v)?,
            ("wind", "thrust_coefficient") => w.wake.thrust_coefficient = fraction(f()?)?,
            ("wind", "wake_decay") => w.wake.decay = positive(f()?)?,
            ("wind", "wake_direction_deg") => w.wake.direction_deg = f()?,
            ("wind", "field_csv") => self.wind.field_csv = optional_path(v)?,

            ("control", "soc_target") => c.soc_target = fraction(f()?)?,
            ("control", "soc_gain") => c.soc_gain = non_negative(f()?)?,
            ("control", "soc_cap_fraction") => c.soc_cap_fraction = non_negative(f()?)?,
            ("control", "ely_allocation") => c.ely_allocation = allocation(v)?,
            ("control", "fc_allocation") => c.fc_allocation = allocation(v)?,
            ("control", "freq_droop") => c.freq_droop = positive(f()?)?,
            ("control", "freq_lag") => c.freq_lag = positive(f()?)?,
            ("control", "nominal_hz") => c.nominal_hz = positive(f()?)?,
            ("control", "hysteresis_mw") => c.hysteresis_mw = non_negative(f()?)?,
            ("control", "warm_start") => c.warm_start = as_bool(v)?,
            ("control", "ely_pf_knee_loading") => c.ely_pf.knee_loading = fraction(f()?)?,
            ("control", "ely_pf_at_knee") => c.ely_pf.pf_at_knee = fraction(f()?)?,
            ("control", "ely_pf_at_full") => c.ely_pf.pf_at_full = fraction(f()?)?,

            ("scenario", "name") => s.name = as_str(v)?.to_string(),
            ("scenario", "case") => {
                let name = as_str(v)?;
                s.case = Case::parse(name).ok_or_else(|| format!("expected S1..S7 or custom, got `{name}`"))?;
            }
            ("scenario", "dt") => s.dt = positive(f()?)?,
            ("scenario", "duration") => s.duration = positive(f()?)?,
            ("scenario", "event") => {
                let time = s.event.map(|e| e.time);
                let kind = match as_str(v)? {
                    "none" => None,
                    "trip_turbine" => Some(EventKind::TripWindTurbine(None)),
                    "trip_load" => Some(EventKind::TripLoad(None)),
                    other => return Err(format!("expected none, trip_turbine or trip_load, got `{other}`")),
                };
                s.event = kind.map(|kind| EventSpec {
                    kind,
                    time: match time {
                        Some(EventTime::At(t)) => EventTime::At(t),
                        _ => EventTime::Worst(kind.worst_direction()),
                    },
                });
            }
            ("scenario", "event_time") => {
                let e = s.event.as_mut().ok_or("set scenario.event before scenario.event_time")?;
                e.time = match v {
                    Value::String(t) if t == "worst" => EventTime::Worst(e.kind.worst_direction()),
                    _ => EventTime::At(non_negative(as_f64(v).map_err(|_| type_err("seconds or \"worst\"", v))?)?),
                };
            }
            ("scenario", "event_unit") => {
                let e = s.event.as_mut().ok_or("set scenario.event before scenario.event_unit")?;
                let unit = match v {
                    Value::String(t) if t == "largest" => None,
                    _ => Some(as_usize(v).map_err(|_| type_err("an index or \"largest\"", v))?),
                };
                e.kind = match e.kind {
                    EventKind::TripWindTurbine(_) => EventKind::TripWindTurbine(unit),
                    EventKind::TripLoad(_) => EventKind::TripLoad(unit),
                };
            }

            ("year", "preset") => {
                let p = as_str(v)?;
                if p != "custom" && DesignSpec::preset(p).is_none() {
                    return Err(format!("expected initial, design1, design2 or custom, got `{p}`"));
                }
                y.preset = p.to_string();
            }
            ("year", "ely_ramp_s") => y.ely_ramp_s = positive(f()?)?,
            ("year", "dt") => y.dt = positive(f()?)?,
            ("year", "means_csv") => y.means_csv = optional_path(v)?,
            ("year", "seed") => y.seed = as_u64(v)?,
            ("year", "turbulence_intensity") => y.turbulence_intensity = non_negative(f()?)?,
            ("year", "factors") => {
                let fs = as_array(v, as_f64)?;
                if fs.is_empty() || fs.iter().any(|x| !(*x >= 1.0 && x.is_finite())) {
                    return Err("factors must be a non-empty list of numbers >= 1".into());
                }
                y.factors = fs;
            }
            ("year", "trace_stride") => {
                y.trace_stride = as_usize(v)?;
                if y.trace_stride == 0 {
                    return Err("must be at least 1".into());
                }
            }

            ("output", "dir") => self.output.dir = PathBuf::from(as_str(v)?),
            ("output", "trace_stride") => {
                self.output.trace_stride = as_usize(v)?;
                if self.output.trace_stride == 0 {
                    return Err("must be at least 1".into());
                }
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Cross-field checks that a single key cannot catch.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.design
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("design: {e}")))?;
        self.control
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("control: {e}")))?;
        if self.scenario.duration < self.scenario.dt {
            return Err(ConfigError::Invalid(format!(
                "scenario.duration {} s is shorter than scenario.dt {} s",
                self.scenario.duration, self.scenario.dt
            )));
        }
        if let Some(EventSpec {
            time: EventTime::At(t),
            ..
        }) = self.scenario.event
        {
            if t >= self.scenario.duration {
                return Err(ConfigError::Invalid(format!(
                    "scenario.event_time {t} s is past the end of the run"
                )));
            }
        }
        if self.year.preset == "custom" {
            self.design
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("year design: {e}")))?;
        }
        Ok(())
    }

    /// Effective configuration as flat `section.key = value` lines that parse
    /// back to an identical `Config`.
    pub fn echo(&self) -> String {
        let d = &self.design;
        let w = &self.wind.setup;
        let c = &self.control;
        let s = &self.scenario;
        let y = &self.year;
        let fl = Value::Float;
        let int = |x: u64| Value::Integer(x as i64);
        let st = |x: &str| Value::String(x.to_string());
        let arr = |xs: Vec<Value>| Value::Array(xs);
        let (event, event_time, event_unit) = match s.event {
            None => ("none", st("worst"), st("largest")),
            Some(e) => {
                let (name, unit) = match e.kind {
                    EventKind::TripWindTurbine(u) => ("trip_turbine", u),
                    EventKind::TripLoad(u) => ("trip_load", u),
                };
                let time = match e.time {
                    EventTime::At(t) => fl(t),
                    EventTime::Worst(_) => st("worst"),
                };
                (name, time, unit.map(|u| int(u as u64)).unwrap_or_else(|| st("largest")))
            }
        };
        let mut rows: Vec<(&str, Value)> = vec![
            ("design.name", st(&d.name)),
            ("design.n_turbines", int(d.n_turbines as u64)),
            ("design.turbine_rated_mw", fl(d.turbine.rated_power_mw)),
            ("design.turbine_cut_in_mps", fl(d.turbine.cut_in_mps)),
            ("design.turbine_rated_speed_mps", fl(d.turbine.rated_speed_mps)),
            ("design.turbine_cut_out_mps", fl(d.turbine.cut_out_mps)),
            ("design.rotor_diameter_m", fl(d.turbine.rotor_diameter_m)),
            ("design.layout_rows", int(d.layout_rows as u64)),
            ("design.spacing_diameters", fl(d.spacing_diameters)),
            ("design.ely_trains", int(d.ely_trains as u64)),
            ("design.ely_train_mw", fl(d.ely_train_mw)),
            ("design.ely_ramp_s", fl(d.ely_ramp_s)),
            ("design.ely_nominal_nm3h", fl(d.ely_nominal_nm3h)),
            ("design.fc_blocks", int(d.fc_blocks as u64)),
            ("design.fc_block_mw", fl(d.fc_block_mw)),
            ("design.fc_ramp_s", fl(d.fc_ramp_s)),
            ("design.fc_specific_consumption", fl(d.fc_specific_consumption)),
            ("design.afe_mva", fl(d.afe_mva)),
            ("design.bess_mw", fl(d.bess_mw)),
            ("design.bess_mwh", fl(d.bess_mwh)),
            ("design.bess_mva", fl(d.bess_mva)),
            ("design.soc_initial", fl(d.soc_initial)),
            ("design.soc_min", fl(d.soc_min)),
            ("design.soc_max", fl(d.soc_max)),
            ("design.bess_efficiency", fl(d.bess_efficiency)),
            (
                "design.tank_capacity_kg",
                d.tank_capacity_kg.map(fl).unwrap_or_else(|| st("unbounded")),
            ),
            ("design.tank_initial_kg", fl(d.tank_initial_kg)),
            ("design.tank_reserve_kg", fl(d.tank_reserve_kg)),
            ("design.platform_mw", arr(d.loads.iter().map(|l| fl(l.active_power_mw)).collect())),
            ("design.platform_pf", arr(d.loads.iter().map(|l| fl(l.power_factor)).collect())),
            (
                "design.platform_priority",
                arr(d.loads.iter().map(|l| int(l.priority as u64)).collect()),
            ),
            ("wind.mean_speed", fl(w.turbulence.mean_speed)),
            ("wind.turbulence_intensity", fl(w.turbulence.turbulence_intensity)),
            ("wind.length_scale", fl(w.turbulence.length_scale)),
            ("wind.coherence_decay", fl(w.turbulence.coherence_decay)),
            ("wind.seed", int(w.turbulence.seed)),
            ("wind.rotor_gamma", fl(w.rotor_gamma)),
            ("wind.wake", Value::Boolean(w.wake.enabled)),
            ("wind.thrust_coefficient", fl(w.wake.thrust_coefficient)),
            ("wind.wake_decay", fl(w.wake.decay)),
            ("wind.wake_direction_deg", fl(w.wake.direction_deg)),
            ("wind.field_csv", path_value(&self.wind.field_csv)),
            ("control.soc_target", fl(c.soc_target)),
            ("control.soc_gain", fl(c.soc_gain)),
            ("control.soc_cap_fraction", fl(c.soc_cap_fraction)),
            ("control.ely_allocation", st(c.ely_allocation.as_str())),
            ("control.fc_allocation", st(c.fc_allocation.as_str())),
            ("control.freq_droop", fl(c.freq_droop)),
            ("control.freq_lag", fl(c.freq_lag)),
            ("control.nominal_hz", fl(c.nominal_hz)),
            ("control.hysteresis_mw", fl(c.hysteresis_mw)),
            ("control.warm_start", Value::Boolean(c.warm_start)),
            ("control.ely_pf_knee_loading", fl(c.ely_pf.knee_loading)),
            ("control.ely_pf_at_knee", fl(c.ely_pf.pf_at_knee)),
            ("control.ely_pf_at_full", fl(c.ely_pf.pf_at_full)),
            ("scenario.name", st(&s.name)),
            ("scenario.case", st(s.case.name())),
            ("scenario.dt", fl(s.dt)),
            ("scenario.duration", fl(s.duration)),
            ("scenario.event", st(event)),
        ];
        if s.event.is_some() {
            rows.push(("scenario.event_time", event_time));
            rows.push(("scenario.event_unit", event_unit));
        }
        rows.extend([
            ("year.preset", st(&y.preset)),
            ("year.ely_ramp_s", fl(y.ely_ramp_s)),
            ("year.dt", fl(y.dt)),
            ("year.means_csv", path_value(&y.means_csv)),
            ("year.seed", int(y.seed)),
            ("year.turbulence_intensity", fl(y.turbulence_intensity)),
            ("year.factors", arr(y.factors.iter().map(|x| fl(*x)).collect())),
            ("year.trace_stride", int(y.trace_stride as u64)),
            ("output.dir", st(&self.output.dir.display().to_string())),
            ("output.trace_stride", int(self.output.trace_stride as u64)),
        ]);
        rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Folder name for `run` output.
    pub fn run_name(&self) -> String {
        if self.scenario.name.is_empty() {
            self.scenario.case.name().to_string()
        } else {
            self.scenario.name.clone()
        }
    }

    /// Replayed CSV if configured, otherwise synthesized at `scenario.dt`.
    pub fn short_term_wind(&self) -> Result<WindField, EngineError> {
        match &self.wind.field_csv {
            Some(p) => {
                let file = File::open(p).map_err(|e| EngineError::Io(format!("{}: {e}", p.display())))?;
                Ok(read_wind_field(file)?)
            }
            None => short_term_wind_field(&self.design, &self.wind.setup, self.scenario.dt, self.scenario.duration),
        }
    }

    /// The scenario `run` executes on `wind`.
    pub fn run_scenario(&self, wind: Arc<WindField>) -> Scenario {
        let mut sc = match self.scenario.case {
            Case::Suite(i) => {
                let case = suite_cases()[i];
                let mut sc = case.scenario(&self.design, &self.control, wind);
                if let Some(kind) = case.event {
                    sc.events.push(EventSpec {
                        time: EventTime::Worst(kind.worst_direction()),
                        kind,
                    });
                }
                sc
            }
            Case::Custom => {
                let mut sc = Scenario::new(self.run_name(), self.design.clone(), self.control.clone(), wind);
                sc.events.extend(self.scenario.event);
                sc
            }
        };
        sc.name = self.run_name();
        sc.dt = self.scenario.dt;
        sc.duration = self.scenario.duration;
        sc.seed = self.wind.setup.turbulence.seed;
        sc
    }

    /// Design for `year`: a preset with `year.ely_ramp_s`, or the design section.
    pub fn year_design(&self) -> DesignSpec {
        match DesignSpec::preset(&self.year.preset) {
            Some(mut d) => {
                d.ely_ramp_s = self.year.ely_ramp_s;
                d
            }
            None => self.design.clone(),
        }
    }

    /// Annual wind input for `year` and `sweep`.
    pub fn annual_input(&self) -> Result<AnnualInput, EngineError> {
        let mut input = match &self.year.means_csv {
            Some(p) => {
                let file = File::open(p).map_err(|e| EngineError::Io(format!("{}: {e}", p.display())))?;
                AnnualInput::new(read_annual_means(file)?, self.year.seed)
            }
            None => AnnualInput {
                seed: self.year.seed,
                ..AnnualInput::bundled()
            },
        };
        input.spec.turbulence_intensity = self.year.turbulence_intensity;
        input.spec.length_scale = self.wind.setup.turbulence.length_scale;
        input.spec.coherence_decay = self.wind.setup.turbulence.coherence_decay;
        input.wake = self.wind.setup.wake;
        input.rotor_gamma = self.wind.setup.rotor_gamma;
        Ok(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_initial_design_on_the_reference_case() {
        let c = Config::load(None, &[]).unwrap();
        assert_eq!(c.design, DesignSpec::initial());
        assert_eq!(c.scenario.case, Case::Suite(0));
        assert_eq!(c.run_name(), "S1");
        assert_eq!(c.wind.setup.turbulence.seed, crate::REFERENCE_SEED);
    }

    #[test]
    fn override_reaches_the_echo() {
        let c = Config::load(None, &["design.bess_mw=30".into()]).unwrap();
        assert_eq!(c.design.bess_mw, 30.0);
        assert!(c.echo().contains("design.bess_mw = 30.0\n"));
    }

    #[test]
    fn echo_round_trips() {
        let sets: Vec<String> = [
            "design.preset=design2",
            "design.tank_capacity_kg=5000",
            "design.platform_mw=[5, 5, 4.5]",
            "wind.seed=7",
            "control.ely_allocation=synchronized",
            "scenario.case=custom",
            "scenario.event=trip_load",
            "scenario.event_time=1234.5",
            "scenario.event_unit=1",
            "year.factors=[1.0, 1.25]",
            "output.dir=some dir/out",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let c = Config::load(None, &sets).unwrap();
        assert_eq!(c.design.loads.len(), 3);
        assert_eq!(c.design.fc_blocks, 5);
        let back = Config::from_toml_str(&c.echo(), "echo").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.echo(), c.echo());
        let d = Config::default();
        assert_eq!(Config::from_toml_str(&d.echo(), "echo").unwrap(), d);
    }

    #[test]
    fn sections_and_dotted_keys_both_parse() {
        let a = Config::from_toml_str("[design]\nbess_mw = 20\n[year]\npreset = \"design2\"\n", "a").unwrap();
        let b = Config::from_toml_str("design.bess_mw = 20.0\nyear.preset = \"design2\"\n", "b").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.design.bess_mw, 20.0);
    }

    #[test]
    fn preset_applies_before_other_design_keys() {
        let c = Config::from_toml_str("[design]\nbess_mwh = 50\npreset = \"design2\"\n", "f").unwrap();
        assert_eq!(c.design.name, "design2");
        assert_eq!(c.design.bess_mwh, 50.0);
    }

    #[test]
    fn unknown_keys_name_their_line() {
        let e = Config::from_toml_str("[design]\nbess_mw = 20\nbogus = 1\n", "cfg.toml").unwrap_err();
        assert_eq!(e.to_string(), "cfg.toml:3: `design.bogus`: unknown key");
        let e = Config::from_toml_str("\nfoo.bar = 1\n", "cfg.toml").unwrap_err();
        assert!(e.to_string().starts_with("cfg.toml:2: `foo`"), "{e}");
        let e = Config::from_toml_str("design.bess_mw = \"x\"\n", "cfg.toml").unwrap_err();
        assert!(e.to_string().starts_with("cfg.toml:1: `design.bess_mw`: expected a number"), "{e}");
        let e = Config::from_toml_str("design.bess_mw = = 3\n", "cfg.toml").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { .. }));
        assert!(e.to_string().contains("line 1"), "{e}");
    }

    #[test]
    fn bad_overrides_are_rejected() {
        for s in ["design.bess_mw", "bess_mw=3", "nope.x=1", "design.bess_mw=-3", "design.bess_mw=abc"] {
            assert!(Config::load(None, &[s.to_string()]).is_err(), "{s}");
        }
        let e = Config::load(None, &["scenario.dt=10".into(), "scenario.duration=5".into()]).unwrap_err();
        assert!(matches!(e, ConfigError::Invalid(_)));
    }

    #[test]
    fn year_presets_take_the_annual_ramp() {
        let c = Config::load(None, &["year.preset=design2".into(), "design.ely_ramp_s=50".into()]).unwrap();
        let d = c.year_design();
        assert_eq!((d.name.as_str(), d.ely_ramp_s, d.bess_mwh), ("design2", ANNUAL_ELY_RAMP_S, 300.0));
        let c = Config::load(None, &["year.preset=custom".into(), "design.ely_ramp_s=50".into()]).unwrap();
        assert_eq!(c.year_design().ely_ramp_s, 50.0);
    }

    #[test]
    fn suite_case_scenarios_carry_their_event() {
        let c = Config::load(None, &["scenario.case=S6".into()]).unwrap();
        let sc = c.run_scenario(Arc::new(WindField::constant(8, 10, 1.0, 8.0)));
        assert_eq!(sc.design.ely_ramp_s, 706.0);
        assert_eq!(sc.events.len(), 1);
        assert!(matches!(sc.events[0].kind, EventKind::TripLoad(None)));
    }
}
