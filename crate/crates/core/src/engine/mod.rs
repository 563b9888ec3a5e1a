//! Fixed-step scenario runner, event injection, worst-instant contingencies
//! and year-long runs.

mod annual;
mod design;
mod output;
mod suite;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::metrics::KpiReport;
use crate::plants::{Bess, ElectrolyzerTrain, FuelCellBlock, HydrogenTank, PlantError, PlatformLoad};
use crate::pms::{
    self, allocate_into, dispatch_targets, electrolyzer_reactive_demand, frequency_step,
    reactive_dispatch, soc_regulation_power, step_units, ControlConfig, DispatchInputs,
    FrequencyState, HydrogenStatus, Mode, PlantRatings,
};
use crate::wind::{
    self, apply_wake, rotor_average, synthesize_wind_field, TurbulenceSpec, WakeModel, WindError,
    WindField,
};

pub use annual::{
    annual_wind_field, neutrality_crossing, run_year, run_year_on, sweep, AnnualInput, SweepPoint,
    SweepResult, ANNUAL_DT_S, ANNUAL_ELY_RAMP_S, ANNUAL_SEED, BUNDLED_ANNUAL_MEANS,
};
pub use design::{DesignSpec, BASE_PLATFORM_LOAD_MW};
pub use output::{summary_text, write_kpi_csv, write_trace_csv, TRACE_HEADER};
pub use suite::{run_suite, suite_cases, SuiteCase, SuiteReport, SuiteRow};

/// Power balance tolerance per step, MW.
pub const BALANCE_TOLERANCE_MW: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Wind(#[from] WindError),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("power balance violated at t = {t} s: residual {residual:e} MW")]
    Balance { t: f64, residual: f64 },
    #[error("empty trace")]
    EmptyTrace,
    #[error("sweep: {0}")]
    Sweep(String),
    #[error("I/O: {0}")]
    Io(String),
}

impl EngineError {
    /// Runtime invariant failures, as opposed to bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, EngineError::Balance { .. } | EngineError::Sweep(_))
    }
}

/// How short-term wind is synthesized for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSetup {
    pub turbulence: TurbulenceSpec,
    pub wake: WakeModel,
    /// Rotor-averaging lag factor (time constant `gamma * R / V`); 0 disables.
    pub rotor_gamma: f64,
}

impl Default for WindSetup {
    fn default() -> Self {
        Self {
            turbulence: TurbulenceSpec::default(),
            wake: WakeModel::default(),
            rotor_gamma: 2.0,
        }
    }
}

impl WindSetup {
    /// Default turbulence on the bundled reference seed.
    pub fn reference() -> Self {
        let mut s = Self::default();
        s.turbulence.seed = crate::REFERENCE_SEED;
        s
    }
}

/// Two-hour reference realization at 1 s for `design`'s layout.
pub fn reference_wind_field(design: &DesignSpec) -> Result<WindField, EngineError> {
    short_term_wind_field(design, &WindSetup::reference(), 1.0, REFERENCE_DURATION_S)
}

pub const REFERENCE_DURATION_S: f64 = 7200.0;

/// Rotor-averaged, waked per-turbine speeds for `design`'s layout.
pub fn short_term_wind_field(
    design: &DesignSpec,
    setup: &WindSetup,
    dt: f64,
    duration: f64,
) -> Result<WindField, EngineError> {
    let layout = design.layout();
    let raw = synthesize_wind_field(&layout, &setup.turbulence, dt, duration)?;
    let smooth = rotor_average(&raw, &design.turbine, setup.rotor_gamma);
    Ok(apply_wake(&smooth, &layout, &design.turbine, &setup.wake)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Charge,
    Discharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// `None` trips the turbine with the highest available power at the event.
    TripWindTurbine(Option<usize>),
    /// `None` trips the largest connected platform.
    TripLoad(Option<usize>),
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::TripWindTurbine(_) => "wt_trip",
            EventKind::TripLoad(_) => "load_trip",
        }
    }

    /// The direction in which this event stresses the battery.
    pub fn worst_direction(&self) -> Direction {
        match self {
            EventKind::TripWindTurbine(_) => Direction::Discharge,
            EventKind::TripLoad(_) => Direction::Charge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventTime {
    At(f64),
    Worst(Direction),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSpec {
    pub time: EventTime,
    pub kind: EventKind,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub design: DesignSpec,
    pub control: ControlConfig,
    pub wind: Arc<WindField>,
    pub dt: f64,
    pub duration: f64,
    pub events: Vec<EventSpec>,
    /// Echoed in results; the wind field already carries its randomness.
    pub seed: u64,
}

impl Scenario {
    /// A scenario spanning the whole wind field at its own time step.
    pub fn new(name: impl Into<String>, design: DesignSpec, control: ControlConfig, wind: Arc<WindField>) -> Self {
        Self {
            name: name.into(),
            design,
            control,
            dt: wind.dt,
            duration: wind.duration(),
            wind,
            events: Vec::new(),
            seed: 0,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.design.validate()?;
        self.control.validate().map_err(EngineError::Config)?;
        self.wind.validate()?;
        if !(self.dt > 0.0) || !(self.duration >= self.dt) {
            return Err(EngineError::Config(format!(
                "need dt > 0 and duration >= dt, got dt = {} s, duration = {} s",
                self.dt, self.duration
            )));
        }
        if (self.wind.dt - self.dt).abs() > 1e-9 * self.dt {
            return Err(EngineError::Config(format!(
                "wind field step {} s differs from scenario dt {} s",
                self.wind.dt, self.dt
            )));
        }
        if self.n_steps() > self.wind.n_steps() {
            return Err(EngineError::Config(format!(
                "duration {} s exceeds the wind field ({} s)",
                self.duration,
                self.wind.duration()
            )));
        }
        if self.wind.n_turbines() != self.design.n_turbines {
            return Err(EngineError::Config(format!(
                "wind field has {} turbines, design has {}",
                self.wind.n_turbines(),
                self.design.n_turbines
            )));
        }
        for e in &self.events {
            if let EventTime::At(t) = e.time {
                if !(t >= 0.0 && t < self.duration) {
                    return Err(EngineError::Config(format!("event time {t} s outside the run")));
                }
            }
            match e.kind {
                EventKind::TripWindTurbine(Some(i)) if i >= self.design.n_turbines => {
                    return Err(EngineError::Config(format!("no turbine {i} to trip")))
                }
                EventKind::TripLoad(Some(i)) if i >= self.design.loads.len() => {
                    return Err(EngineError::Config(format!("no platform {i} to trip")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One step of the trace. Powers in MW, reactive power in MVAr; `bess_p` is
/// positive when discharging.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRecord {
    pub t: f64,
    pub wind_avail: f64,
    pub wind_actual: f64,
    pub ely_p: f64,
    pub fc_p: f64,
    /// Demand of connected (untripped) platforms, before shedding.
    pub load_p: f64,
    pub bess_p: f64,
    /// Slack demand before the battery's limits were applied.
    pub bess_requested: f64,
    pub q_load: f64,
    pub q_ely: f64,
    pub q_afe: f64,
    pub q_bess: f64,
    pub soc: f64,
    pub h2_level: f64,
    pub freq_dev: f64,
    pub curtailed: f64,
    pub shed: f64,
    pub clipped: bool,
}

impl StepRecord {
    /// Supply minus demand; zero when the step balances.
    pub fn balance_residual(&self) -> f64 {
        self.wind_actual + self.fc_p + self.bess_p - (self.load_p - self.shed + self.ely_p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEvent {
    pub step: usize,
    pub t: f64,
    pub kind: EventKind,
    /// Turbine or platform actually disconnected.
    pub index: usize,
    /// Power it carried at the instant, MW.
    pub lost_mw: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub design: DesignSpec,
    pub control: ControlConfig,
    pub seed: u64,
    pub dt: f64,
    pub trace: Vec<StepRecord>,
    pub kpis: KpiReport,
    pub events: Vec<ResolvedEvent>,
    /// Steps at which a unit was cut faster than its ramp allows because the
    /// battery could not absorb the mismatch.
    pub forced_steps: Vec<usize>,
    /// Fraction of steps each unit ran above the shutdown threshold.
    pub ely_unit_utilization: Vec<f64>,
    pub fc_unit_utilization: Vec<f64>,
    pub h2_produced_kg: f64,
    pub h2_consumed_kg: f64,
    pub h2_spilled_kg: f64,
}

/// Live operating point of every unit.
#[derive(Debug, Clone)]
pub struct PlantState {
    pub ely: Vec<ElectrolyzerTrain>,
    pub fc: Vec<FuelCellBlock>,
    pub bess: Bess,
    pub tank: HydrogenTank,
    pub loads: Vec<PlatformLoad>,
    pub tripped_turbines: Vec<bool>,
    pub freq: FrequencyState,
    pub mode: Mode,
    pub shed_priorities: BTreeSet<u32>,
}

/// What the secondary controller saw at the end of the previous step.
#[derive(Debug, Clone)]
struct Measurements {
    wind_avail: f64,
    soc: f64,
    loads: Vec<PlatformLoad>,
}

/// Step-by-step driver; [`run`] wraps it.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    state: PlantState,
    meas: Option<Measurements>,
    events: Vec<(usize, EventKind)>,
    resolved: Vec<ResolvedEvent>,
    k: usize,
    n_steps: usize,
    dt_h: f64,
    eps_mw: f64,
    // scratch
    per_turbine: Vec<f64>,
    turbine_set: Vec<f64>,
    ely_ratings: Vec<f64>,
    fc_ratings: Vec<f64>,
    alloc: Vec<f64>,
    fc_powers: Vec<f64>,
    afe: Vec<f64>,
    // tallies
    forced: Vec<usize>,
    ely_on: Vec<u64>,
    fc_on: Vec<u64>,
    produced: f64,
    consumed: f64,
    spilled: f64,
}


/// Threshold below which a unit counts as off, MW.
pub const SHUTDOWN_EPS_MW: f64 = 1e-3;

impl PlantState {
    fn fresh(d: &DesignSpec) -> Self {
        Self {
            ely: d.electrolyzers(),
            fc: d.fuel_cells(),
            bess: d.bess(d.soc_initial),
            tank: d.tank(),
            loads: d.loads.clone(),
            tripped_turbines: vec![false; d.n_turbines],
            freq: FrequencyState::default(),
            mode: Mode::Surplus,
            shed_priorities: BTreeSet::new(),
        }
    }
}

impl<'a> Simulation<'a> {
    /// Events must already carry explicit times.
    pub fn new(scenario: &'a Scenario) -> Result<Self, EngineError> {
        scenario.validate()?;
        let d = &scenario.design;
        let mut events = Vec::with_capacity(scenario.events.len());
        for e in &scenario.events {
            match e.time {
                EventTime::At(t) => events.push(((t / scenario.dt).round() as usize, e.kind)),
                EventTime::Worst(_) => {
                    return Err(EngineError::Config(
                        "worst-instant events must be resolved before stepping".into(),
                    ))
                }
            }
        }
        events.sort_by_key(|e| e.0);
        let state = PlantState::fresh(d);
        let (n_ely, n_fc) = (state.ely.len(), state.fc.len());
        Ok(Self {
            scenario,
            ely_ratings: state.ely.iter().map(|u| u.rating_mw).collect(),
            fc_ratings: state.fc.iter().map(|u| u.rating_mw).collect(),
            state,
            meas: None,
            events,
            resolved: Vec::new(),
            k: 0,
            n_steps: scenario.n_steps(),
            dt_h: scenario.dt / 3600.0,
            eps_mw: SHUTDOWN_EPS_MW,
            per_turbine: vec![0.0; d.n_turbines],
            turbine_set: vec![0.0; d.n_turbines],
            alloc: vec![0.0; n_ely.max(n_fc)],
            fc_powers: vec![0.0; n_fc],
            afe: vec![d.afe_mva; n_fc],
            forced: Vec::new(),
            ely_on: vec![0; n_ely],
            fc_on: vec![0; n_fc],
            produced: 0.0,
            consumed: 0.0,
            spilled: 0.0,
        })
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn finished(&self) -> bool {
        self.k >= self.n_steps
    }

    /// Index of the next step to run.
    pub fn step_index(&self) -> usize {
        self.k
    }

    /// Whether the last completed step needed a forced unit cut.
    pub fn last_step_forced(&self) -> bool {
        self.k > 0 && self.forced.last() == Some(&(self.k - 1))
    }

    fn apply_events(&mut self) {
        let k = self.k;
        let wind = &self.scenario.wind;
        let turbine = &self.scenario.design.turbine;
        while let Some(&(step, kind)) = self.events.first() {
            if step > k {
                break;
            }
            self.events.remove(0);
            let (index, lost) = match kind {
                EventKind::TripWindTurbine(idx) => {
                    let power = |i: usize| {
                        if self.state.tripped_turbines[i] {
                            -1.0
                        } else {
                            turbine.power_at(wind.speeds[i][k])
                        }
                    };
                    let i = idx.unwrap_or_else(|| {
                        // highest output, lowest index on ties
                        (0..self.state.tripped_turbines.len())
                            .fold(0, |best, i| if power(i) > power(best) { i } else { best })
                    });
                    let lost = power(i).max(0.0);
                    self.state.tripped_turbines[i] = true;
                    (i, lost)
                }
                EventKind::TripLoad(idx) => {
                    let loads = &self.state.loads;
                    let i = idx.unwrap_or_else(|| {
                        (0..loads.len()).fold(0, |best, i| {
                            let p = |j: usize| if loads[j].connected { loads[j].active_power_mw } else { -1.0 };
                            if p(i) > p(best) {
                                i
                            } else {
                                best
                            }
                        })
                    });
                    let lost = if loads[i].connected { loads[i].active_power_mw } else { 0.0 };
                    self.state.loads[i].connected = false;
                    (i, lost)
                }
            };
            self.resolved.push(ResolvedEvent {
                step: k,
                t: k as f64 * self.scenario.dt,
                kind,
                index,
                lost_mw: lost,
            });
        }
    }

    /// Advance one step and return its record.
    pub fn step(&mut self) -> StepRecord {
        let sc = self.scenario;
        let cfg = &sc.control;
        let d = &sc.design;
        let dt = sc.dt;
        let k = self.k;

        // (1) events
        self.apply_events();

        // (2) available wind
        for (i, p) in self.per_turbine.iter_mut().enumerate() {
            *p = if self.state.tripped_turbines[i] {
                0.0
            } else {
                d.turbine.power_at(sc.wind.speeds[i][k])
            };
        }
        let wind_avail: f64 = self.per_turbine.iter().sum();

        // (3) dispatch on last step's measurements
        let first = self.meas.is_none();
        let meas = self.meas.get_or_insert_with(|| Measurements {
            wind_avail,
            soc: self.state.bess.soc,
            loads: self.state.loads.clone(),
        });
        let bias = soc_regulation_power(meas.soc, cfg, cfg.soc_cap_fraction * d.bess_mw);
        let hydrogen = HydrogenStatus {
            level_kg: self.state.tank.level_kg,
            bounded: self.state.tank.is_bounded(),
            reserve_kg: d.tank_reserve_kg,
        };
        if first {
            let load: f64 = meas.loads.iter().filter(|l| l.connected).map(|l| l.active_power_mw).sum();
            self.state.mode = if wind_avail - load - bias >= 0.0 {
                Mode::Surplus
            } else {
                Mode::Deficit
            };
        }
        let decision = dispatch_targets(
            &DispatchInputs {
                wind_available_mw: meas.wind_avail,
                loads: &meas.loads,
                soc_bias_mw: bias,
                hydrogen,
                previous_mode: self.state.mode,
                previous_shed: &self.state.shed_priorities,
            },
            &PlantRatings {
                ely_mw: d.ely_mw(),
                fc_mw: d.fc_mw(),
            },
            cfg,
        );
        let curtail_cmd = decision.curtailing(meas.wind_avail);

        // (4) allocation and ramps
        let n_ely = self.state.ely.len();
        allocate_into(cfg.ely_allocation, decision.ely_plant_target, &self.ely_ratings, &mut self.alloc[..n_ely]);
        for (u, t) in self.state.ely.iter_mut().zip(&self.alloc) {
            u.target = (t / u.rating_mw).clamp(0.0, 1.0);
        }
        let n_fc = self.state.fc.len();
        allocate_into(cfg.fc_allocation, decision.fc_plant_target, &self.fc_ratings, &mut self.alloc[..n_fc]);
        for (u, t) in self.state.fc.iter_mut().zip(&self.alloc) {
            u.target = (t / u.rating_mw).clamp(0.0, 1.0);
        }
        if first && cfg.warm_start {
            for u in &mut self.state.ely {
                u.load = u.target;
            }
            for u in &mut self.state.fc {
                u.load = u.target;
            }
        } else {
            step_units(&mut self.state.ely, cfg.ely_allocation, dt);
            step_units(&mut self.state.fc, cfg.fc_allocation, dt);
        }

        // wind output under the farm limit, spread over turbines
        let limit = if curtail_cmd { decision.wind_setpoint } else { f64::INFINITY };
        let mut wind_actual = wind::distribute_curtailment_into(limit.min(wind_avail), &self.per_turbine, &mut self.turbine_set)
            .unwrap_or(wind_avail);

        let load_p: f64 = self.state.loads.iter().filter(|l| l.connected).map(|l| l.active_power_mw).sum();
        let mut served = self
            .state
            .loads
            .iter()
            .filter(|l| l.connected && !decision.shed_priorities_active.contains(&l.priority))
            .map(|l| l.active_power_mw)
            .sum::<f64>();
        let planned_served = served;
        let mut ely_p = pms::plant_power(&self.state.ely);
        let mut fc_p = pms::plant_power(&self.state.fc);

        // (5) battery as slack, with fallbacks when it saturates
        let requested = served + ely_p - wind_actual - fc_p;
        let (max_dis, max_chg) = self.state.bess.limits(self.dt_h);
        let mut forced = false;
        let mut extra_curtail = 0.0;
        if requested > max_dis {
            let mut short = requested - max_dis;
            let shed_now = short.min(served);
            served -= shed_now;
            short -= shed_now;
            if short > 0.0 {
                forced = true;
                ely_p -= cut_units(&mut self.state.ely, short);
            }
        } else if -requested > max_chg {
            let mut excess = -requested - max_chg;
            let cut = excess.min(wind_actual);
            if cut > 0.0 {
                wind_actual = wind::distribute_curtailment_into(wind_actual - cut, &self.per_turbine, &mut self.turbine_set)
                    .unwrap_or(wind_actual - cut);
                extra_curtail = cut;
                excess -= cut;
            }
            if excess > 0.0 {
                forced = true;
                fc_p -= cut_units(&mut self.state.fc, excess);
            }
        }
        if forced {
            self.forced.push(k);
            ely_p = pms::plant_power(&self.state.ely);
            fc_p = pms::plant_power(&self.state.fc);
        }
        let slack = served + ely_p - wind_actual - fc_p;
        let outcome = self.state.bess.apply(slack, self.dt_h);
        let bess_p = outcome.actual_mw;

        // (6) hydrogen
        let mut produced = 0.0;
        for (i, u) in self.state.ely.iter().enumerate() {
            let p = u.power_mw();
            produced += u.kg_per_mwh() * p * self.dt_h;
            if p > self.eps_mw {
                self.ely_on[i] += 1;
            }
        }
        let mut consumed = 0.0;
        for (i, u) in self.state.fc.iter().enumerate() {
            let p = u.power_mw();
            self.fc_powers[i] = p;
            consumed += p * self.dt_h * u.specific_consumption;
            if p > self.eps_mw {
                self.fc_on[i] += 1;
            }
        }
        let flow = self.state.tank.update(produced, consumed);
        self.produced += produced;
        self.consumed += consumed;
        self.spilled += flow.spilled_kg;

        // (7) reactive power
        let q_connected: f64 = self
            .state
            .loads
            .iter()
            .filter(|l| l.connected && !decision.shed_priorities_active.contains(&l.priority))
            .map(|l| l.reactive_mvar())
            .sum();
        let q_load = if planned_served > 0.0 {
            q_connected * served / planned_served
        } else {
            0.0
        };
        let q_ely: f64 = self
            .state
            .ely
            .iter()
            .map(|u| electrolyzer_reactive_demand(u.load, u.rating_mw, &cfg.ely_pf))
            .sum();
        let (q_afe, q_bess) = reactive_dispatch(&self.fc_powers, q_load, q_ely, &self.afe);

        // (8) frequency
        self.state.freq = frequency_step(self.state.freq, requested, d.bess_mw, cfg, dt);

        let curtailed = if curtail_cmd || extra_curtail > 0.0 {
            (wind_avail - wind_actual).max(0.0)
        } else {
            0.0
        };
        let rec = StepRecord {
            t: k as f64 * dt,
            wind_avail,
            wind_actual,
            ely_p,
            fc_p,
            load_p,
            bess_p,
            bess_requested: requested,
            q_load,
            q_ely,
            q_afe,
            q_bess,
            soc: outcome.soc,
            h2_level: self.state.tank.level_kg,
            freq_dev: self.state.freq.deviation_hz,
            curtailed,
            shed: load_p - served,
            clipped: requested > max_dis || -requested > max_chg,
        };

        self.state.mode = decision.mode;
        self.state.shed_priorities = decision.shed_priorities_active;
        let meas = self.meas.as_mut().expect("set above");
        meas.wind_avail = wind_avail;
        meas.soc = self.state.bess.soc;
        meas.loads.clone_from(&self.state.loads);
        self.k += 1;
        rec
    }

    fn finish(self, trace: Vec<StepRecord>) -> RunResult {
        let sc = self.scenario;
        let n = trace.len().max(1) as f64;
        let kpis = KpiReport::from_trace(&trace, &sc.design, &sc.control, sc.dt);
        RunResult {
            name: sc.name.clone(),
            design: sc.design.clone(),
            control: sc.control.clone(),
            seed: sc.seed,
            dt: sc.dt,
            kpis,
            trace,
            events: self.resolved,
            forced_steps: self.forced,
            ely_unit_utilization: self.ely_on.iter().map(|c| *c as f64 / n).collect(),
            fc_unit_utilization: self.fc_on.iter().map(|c| *c as f64 / n).collect(),
            h2_produced_kg: self.produced,
            h2_consumed_kg: self.consumed,
            h2_spilled_kg: self.spilled,
        }
    }
}

/// Emergency reduction of unit output by `mw`, highest index first.
/// Returns the power actually removed.
fn cut_units<U: pms::RampUnit>(units: &mut [U], mw: f64) -> f64 {
    let mut left = mw;
    for u in units.iter_mut().rev() {
        if left <= 0.0 {
            break;
        }
        let p = u.load() * u.rating_mw();
        let take = p.min(left);
        u.set_load(((p - take) / u.rating_mw()).max(0.0));
        left -= take;
    }
    mw - left.max(0.0)
}

fn run_resolved(scenario: &Scenario) -> Result<RunResult, EngineError> {
    let mut sim = Simulation::new(scenario)?;
    let mut trace = Vec::with_capacity(sim.n_steps);
    while !sim.finished() {
        let rec = sim.step();
        let residual = rec.balance_residual();
        if !(residual.abs() <= BALANCE_TOLERANCE_MW) {
            return Err(EngineError::Balance { t: rec.t, residual });
        }
        trace.push(rec);
    }
    Ok(sim.finish(trace))
}

/// Run a scenario to completion.
///
/// Events timed at a worst instant are resolved against a baseline run of
/// the same scenario without any events.
pub fn run(scenario: &Scenario) -> Result<RunResult, EngineError> {
    if scenario.events.iter().all(|e| matches!(e.time, EventTime::At(_))) {
        return run_resolved(scenario);
    }
    let baseline = run_resolved(&Scenario {
        events: Vec::new(),
        ..scenario.clone()
    })?;
    let resolved = resolve_events(scenario, &baseline)?;
    run_resolved(&resolved)
}

fn resolve_events(scenario: &Scenario, baseline: &RunResult) -> Result<Scenario, EngineError> {
    let mut events = Vec::with_capacity(scenario.events.len());
    for e in &scenario.events {
        let time = match e.time {
            EventTime::Worst(dir) => EventTime::At(find_worst_instant(&baseline.trace, dir)?),
            t => t,
        };
        events.push(EventSpec { time, kind: e.kind });
    }
    Ok(Scenario {
        events,
        ..scenario.clone()
    })
}

/// Time of the largest battery request in `direction`; earliest on ties.
pub fn find_worst_instant(trace: &[StepRecord], direction: Direction) -> Result<f64, EngineError> {
    let sign = match direction {
        Direction::Discharge => 1.0,
        Direction::Charge => -1.0,
    };
    let first = trace.first().ok_or(EngineError::EmptyTrace)?;
    let best = trace.iter().fold(first, |best, r| {
        if sign * r.bess_requested > sign * best.bess_requested {
            r
        } else {
            best
        }
    });
    Ok(best.t)
}

#[derive(Debug, Clone)]
pub struct ContingencyResult {
    pub baseline: RunResult,
    pub contingency: RunResult,
    pub event_time: f64,
    pub direction: Direction,
}

/// Baseline run, then the same scenario with `kind` injected at the baseline's
/// worst instant in `direction`.
pub fn run_contingency(
    scenario: &Scenario,
    kind: EventKind,
    direction: Direction,
) -> Result<ContingencyResult, EngineError> {
    let baseline = run_resolved(&Scenario {
        events: Vec::new(),
        ..scenario.clone()
    })?;
    let (contingency, event_time) = contingency_on(scenario, &baseline, kind, direction)?;
    Ok(ContingencyResult {
        baseline,
        contingency,
        event_time,
        direction,
    })
}

/// The contingency half of [`run_contingency`] against an existing baseline;
/// returns the run and the event time.
pub fn contingency_on(
    scenario: &Scenario,
    baseline: &RunResult,
    kind: EventKind,
    direction: Direction,
) -> Result<(RunResult, f64), EngineError> {
    let event_time = find_worst_instant(&baseline.trace, direction)?;
    let mut sc = scenario.clone();
    sc.events = vec![EventSpec {
        time: EventTime::At(event_time),
        kind,
    }];
    Ok((run_resolved(&sc)?, event_time))
}
