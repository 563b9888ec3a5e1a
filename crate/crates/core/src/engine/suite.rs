//! The seven short-term cases: slow/fast electrolyzers, sequenced or
//! synchronized, with and without N-1 trips.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::pms::{Allocation, ControlConfig};
use crate::wind::WindField;

use super::{contingency_on, run, DesignSpec, EngineError, EventKind, RunResult, Scenario};

pub const SLOW_ELY_RAMP_S: f64 = 706.0;
pub const FAST_ELY_RAMP_S: f64 = 11.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteCase {
    pub name: &'static str,
    pub ely_ramp_s: f64,
    pub allocation: Allocation,
    pub event: Option<EventKind>,
    /// Event-free case whose worst instant times the event.
    pub baseline: Option<&'static str>,
}

pub fn suite_cases() -> [SuiteCase; 7] {
    let case = |name, ely_ramp_s, allocation, event, baseline| SuiteCase {
        name,
        ely_ramp_s,
        allocation,
        event,
        baseline,
    };
    let wt = Some(EventKind::TripWindTurbine(None));
    let load = Some(EventKind::TripLoad(None));
    [
        case("S1", SLOW_ELY_RAMP_S, Allocation::Sequence, None, None),
        case("S2", SLOW_ELY_RAMP_S, Allocation::Synchronized, None, None),
        case("S3", FAST_ELY_RAMP_S, Allocation::Sequence, None, None),
        case("S4", SLOW_ELY_RAMP_S, Allocation::Sequence, wt, Some("S1")),
        case("S5", FAST_ELY_RAMP_S, Allocation::Sequence, wt, Some("S3")),
        case("S6", SLOW_ELY_RAMP_S, Allocation::Sequence, load, Some("S1")),
        case("S7", FAST_ELY_RAMP_S, Allocation::Sequence, load, Some("S3")),
    ]
}

impl SuiteCase {
    pub fn scenario(&self, design: &DesignSpec, control: &ControlConfig, wind: Arc<WindField>) -> Scenario {
        let mut d = design.clone();
        d.ely_ramp_s = self.ely_ramp_s;
        let mut c = control.clone();
        c.ely_allocation = self.allocation;
        Scenario::new(self.name, d, c, wind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub case: &'static str,
    pub max_charge_mw: f64,
    pub max_discharge_mw: f64,
    pub max_abs_freq_hz: f64,
    pub event_time_s: Option<f64>,
}

impl SuiteRow {
    pub fn peak_mw(&self) -> f64 {
        self.max_charge_mw.max(self.max_discharge_mw)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub results: Vec<RunResult>,
}

impl SuiteReport {
    pub fn row(&self, case: &str) -> Option<&SuiteRow> {
        self.rows.iter().find(|r| r.case == case)
    }

    pub fn result(&self, case: &str) -> Option<&RunResult> {
        self.results.iter().find(|r| r.name == case)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("case  max_charge_mw  max_discharge_mw  max_abs_freq_hz  event_t_s\n");
        for r in &self.rows {
            let t = r.event_time_s.map(|t| format!("{t}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<4}  {:>13.3}  {:>16.3}  {:>15.3}  {:>9}",
                r.case, r.max_charge_mw, r.max_discharge_mw, r.max_abs_freq_hz, t
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,max_charge_mw,max_discharge_mw,max_abs_freq_hz,event_t_s\n");
        for r in &self.rows {
            let t = r.event_time_s.map(|t| format!("{t}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.case, r.max_charge_mw, r.max_discharge_mw, r.max_abs_freq_hz, t
            );
        }
        out
    }
}

/// Run S1-S7 on one wind field. Event-free cases run first, then each trip
/// case is timed from its baseline's worst instant.
pub fn run_suite(design: &DesignSpec, control: &ControlConfig, wind: Arc<WindField>) -> Result<SuiteReport, EngineError> {
    let cases = suite_cases();
    let (base, trips): (Vec<&SuiteCase>, Vec<&SuiteCase>) = cases.iter().partition(|c| c.event.is_none());
    let baselines = base
        .par_iter()
        .map(|c| run(&c.scenario(design, control, wind.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let contingencies = trips
        .par_iter()
        .map(|c| {
            let kind = c.event.expect("trip case");
            let baseline = baselines
                .iter()
                .find(|b| Some(b.name.as_str()) == c.baseline)
                .expect("baseline case present");
            contingency_on(&c.scenario(design, control, wind.clone()), baseline, kind, kind.worst_direction())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for r in baselines {
        rows.push(row(&r, None));
        results.push(r);
    }
    for (r, t) in contingencies {
        rows.push(row(&r, Some(t)));
        results.push(r);
    }
    Ok(SuiteReport { rows, results })
}

fn row(r: &RunResult, event_time_s: Option<f64>) -> SuiteRow {
    let case = suite_cases()
        .iter()
        .find(|c| c.name == r.name)
        .map(|c| c.name)
        .unwrap_or("?");
    SuiteRow {
        case,
        max_charge_mw: r.kpis.bess.max_charge_mw,
        max_discharge_mw: r.kpis.bess.max_discharge_mw,
        max_abs_freq_hz: r.kpis.max_abs_freq_dev_hz,
        event_time_s,
    }
}
