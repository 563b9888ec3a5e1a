//! Power management system: secondary-control dispatch, unit allocation and
//! ramping, reactive power sharing and the battery-driven frequency proxy.

use std::collections::BTreeSet;

use crate::plants::{ElectrolyzerTrain, FuelCellBlock, PlatformLoad};

/// How a plant target is spread over its units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Allocation {
    /// Fill units one at a time in index order; units start and stop one by one.
    #[default]
    Sequence,
    /// Every unit runs at the same loading fraction and ramps concurrently.
    Synchronized,
}

impl Allocation {
    pub fn as_str(self) -> &'static str {
        match self {
            Allocation::Sequence => "sequence",
            Allocation::Synchronized => "synchronized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sequence" => Some(Allocation::Sequence),
            "synchronized" | "synch" | "sync" => Some(Allocation::Synchronized),
            _ => None,
        }
    }
}

/// Thyristor rectifier power factor, linear in loading between a low-load knee
/// and full load, constant below the knee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfLaw {
    pub knee_loading: f64,
    pub pf_at_knee: f64,
    pub pf_at_full: f64,
}

impl Default for PfLaw {
    fn default() -> Self {
        Self {
            knee_loading: 0.1,
            pf_at_knee: 0.5,
            pf_at_full: 0.9,
        }
    }
}

impl PfLaw {
    pub fn power_factor(&self, loading: f64) -> f64 {
        if loading <= self.knee_loading {
            return self.pf_at_knee;
        }
        let x = (loading - self.knee_loading) / (1.0 - self.knee_loading);
        self.pf_at_knee + x.min(1.0) * (self.pf_at_full - self.pf_at_knee)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub soc_target: f64,
    /// MW of bias per unit of SOC error.
    pub soc_gain: f64,
    /// Bias cap as a fraction of the BESS power rating.
    pub soc_cap_fraction: f64,
    pub ely_allocation: Allocation,
    pub fc_allocation: Allocation,
    /// Per-unit frequency droop of the grid-forming BESS.
    pub freq_droop: f64,
    /// Time constant of the frequency proxy, seconds.
    pub freq_lag: f64,
    pub nominal_hz: f64,
    /// Band around zero net power inside which the surplus/deficit mode holds.
    pub hysteresis_mw: f64,
    pub ely_pf: PfLaw,
    /// Initialise units at the dispatch equilibrium of the first step.
    pub warm_start: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            soc_target: 0.5,
            soc_gain: 20.0,
            soc_cap_fraction: 0.5,
            ely_allocation: Allocation::Sequence,
            fc_allocation: Allocation::Sequence,
            freq_droop: 0.04,
            freq_lag: 2.0,
            nominal_hz: 50.0,
            hysteresis_mw: 0.5,
            ely_pf: PfLaw::default(),
            warm_start: true,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.soc_target > 0.0 && self.soc_target < 1.0) {
            return Err(format!("soc_target {} outside (0, 1)", self.soc_target));
        }
        if !(self.freq_droop > 0.0) {
            return Err("freq_droop must be positive".into());
        }
        if !(self.freq_lag > 0.0) {
            return Err("freq_lag must be positive".into());
        }
        if !(self.soc_gain >= 0.0 && self.soc_cap_fraction >= 0.0 && self.hysteresis_mw >= 0.0) {
            return Err("soc_gain, soc_cap_fraction and hysteresis_mw must be non-negative".into());
        }
        Ok(())
    }
}

/// Extra demand (MW, positive means charge the battery) that steers SOC to target.
pub fn soc_regulation_power(soc: f64, cfg: &ControlConfig, cap_mw: f64) -> f64 {
    (cfg.soc_gain * (cfg.soc_target - soc)).clamp(-cap_mw, cap_mw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Surplus,
    Deficit,
    Blackout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantRatings {
    pub ely_mw: f64,
    pub fc_mw: f64,
}

/// Hydrogen as seen by the dispatcher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenStatus {
    pub level_kg: f64,
    pub bounded: bool,
    /// Below this level (bounded tanks only) the fuel cells are withdrawn.
    pub reserve_kg: f64,
}

impl HydrogenStatus {
    pub fn unbounded() -> Self {
        Self {
            level_kg: 0.0,
            bounded: false,
            reserve_kg: 0.0,
        }
    }

    pub fn available(&self) -> bool {
        !self.bounded || self.level_kg > self.reserve_kg
    }
}

/// Measurements the dispatcher works from (previous step).
#[derive(Debug, Clone, Copy)]
pub struct DispatchInputs<'a> {
    pub wind_available_mw: f64,
    /// Platforms; tripped ones carry `connected = false`.
    pub loads: &'a [PlatformLoad],
    pub soc_bias_mw: f64,
    pub hydrogen: HydrogenStatus,
    pub previous_mode: Mode,
    pub previous_shed: &'a BTreeSet<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchDecision {
    pub ely_plant_target: f64,
    pub fc_plant_target: f64,
    pub wind_setpoint: f64,
    /// Load priorities currently disconnected by the shedding scheme.
    pub shed_priorities_active: BTreeSet<u32>,
    pub mode: Mode,
}

impl DispatchDecision {
    pub fn curtailing(&self, wind_available_mw: f64) -> bool {
        self.wind_setpoint < wind_available_mw
    }
}

fn served_load(loads: &[PlatformLoad], shed: &BTreeSet<u32>) -> f64 {
    loads
        .iter()
        .filter(|l| l.connected && !shed.contains(&l.priority))
        .map(|l| l.active_power_mw)
        .sum()
}

fn class_load(loads: &[PlatformLoad], priority: u32) -> f64 {
    loads
        .iter()
        .filter(|l| l.connected && l.priority == priority)
        .map(|l| l.active_power_mw)
        .sum()
}

/// Shedding when the fuel cells cannot run: disconnect priority classes
/// (lowest first) until the wind covers what is left; reconnect in reverse
/// once the wind covers a class plus the hysteresis band.
fn shedding(inputs: &DispatchInputs, hysteresis: f64) -> BTreeSet<u32> {
    if inputs.hydrogen.available() {
        return BTreeSet::new();
    }
    let classes: BTreeSet<u32> = inputs
        .loads
        .iter()
        .filter(|l| l.connected)
        .map(|l| l.priority)
        .collect();
    let supply = inputs.wind_available_mw - inputs.soc_bias_mw.max(0.0);
    let mut shed: BTreeSet<u32> = inputs
        .previous_shed
        .intersection(&classes)
        .copied()
        .collect();
    for p in &classes {
        if served_load(inputs.loads, &shed) <= supply {
            break;
        }
        shed.insert(*p);
    }
    while let Some(&top) = shed.iter().next_back() {
        let restored = served_load(inputs.loads, &shed) + class_load(inputs.loads, top);
        if restored + hysteresis <= supply {
            shed.remove(&top);
        } else {
            break;
        }
    }
    shed
}

/// Secondary control: split the net wind surplus between electrolyzers,
/// fuel cells and curtailment.
///
/// Surplus goes to the electrolyzers; only once their target sits at plant
/// rating is the farm given an upper limit. Deficit goes to the fuel cells
/// while hydrogen is available, otherwise loads are shed by priority. The
/// two plants never receive non-zero targets at the same time.
pub fn dispatch_targets(
    inputs: &DispatchInputs,
    ratings: &PlantRatings,
    cfg: &ControlConfig,
) -> DispatchDecision {
    let wind = inputs.wind_available_mw.max(0.0);
    let shed = shedding(inputs, cfg.hysteresis_mw);
    let load = served_load(inputs.loads, &shed);
    let any_connected = inputs.loads.iter().any(|l| l.connected);
    let net = wind - load - inputs.soc_bias_mw;

    let mut mode = match inputs.previous_mode {
        Mode::Surplus if net < -cfg.hysteresis_mw => Mode::Deficit,
        Mode::Surplus => Mode::Surplus,
        Mode::Deficit | Mode::Blackout if net > cfg.hysteresis_mw => Mode::Surplus,
        Mode::Deficit | Mode::Blackout => Mode::Deficit,
    };

    let mut decision = DispatchDecision {
        ely_plant_target: 0.0,
        fc_plant_target: 0.0,
        wind_setpoint: wind,
        shed_priorities_active: shed,
        mode,
    };
    match mode {
        Mode::Surplus => {
            decision.ely_plant_target = net.clamp(0.0, ratings.ely_mw);
            if net > ratings.ely_mw {
                decision.wind_setpoint = (wind - (net - ratings.ely_mw)).max(0.0);
            }
        }
        Mode::Deficit | Mode::Blackout => {
            if inputs.hydrogen.available() {
                decision.fc_plant_target = (-net).clamp(0.0, ratings.fc_mw);
            }
        }
    }
    if any_connected && load == 0.0 && !decision.shed_priorities_active.is_empty() {
        mode = Mode::Blackout;
        decision.mode = mode;
    }
    decision
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub targets: Vec<f64>,
    /// The plant target exceeded the summed unit ratings.
    pub clamped: bool,
}

/// Fill units in index order, each to rating before the next starts.
pub fn allocate_sequence(plant_target: f64, ratings: &[f64]) -> AllocationResult {
    let mut targets = vec![0.0; ratings.len()];
    let clamped = allocate_into(Allocation::Sequence, plant_target, ratings, &mut targets);
    AllocationResult { targets, clamped }
}

/// Equal loading fraction on every unit.
pub fn allocate_synchronized(plant_target: f64, ratings: &[f64]) -> AllocationResult {
    let mut targets = vec![0.0; ratings.len()];
    let clamped = allocate_into(Allocation::Synchronized, plant_target, ratings, &mut targets);
    AllocationResult { targets, clamped }
}

/// Per-unit MW targets into `out`; returns whether the target was clamped.
pub fn allocate_into(mode: Allocation, plant_target: f64, ratings: &[f64], out: &mut [f64]) -> bool {
    let total: f64 = ratings.iter().sum();
    let clamped = plant_target > total;
    let target = plant_target.clamp(0.0, total);
    match mode {
        Allocation::Sequence => {
            let mut remaining = target;
            for (o, r) in out.iter_mut().zip(ratings) {
                let take = remaining.min(*r);
                *o = take;
                remaining -= take;
            }
        }
        Allocation::Synchronized => {
            let frac = if total > 0.0 { target / total } else { 0.0 };
            for (o, r) in out.iter_mut().zip(ratings) {
                *o = frac * r;
            }
        }
    }
    clamped
}

/// A ramp-limited unit whose state is a loading fraction.
pub trait RampUnit {
    fn rating_mw(&self) -> f64;
    fn ramp_time_full_s(&self) -> f64;
    fn load(&self) -> f64;
    fn set_load(&mut self, load: f64);
    fn target(&self) -> f64;
    fn set_target(&mut self, target: f64);
}

macro_rules! impl_ramp_unit {
    ($t:ty) => {
        impl RampUnit for $t {
            fn rating_mw(&self) -> f64 {
                self.rating_mw
            }
            fn ramp_time_full_s(&self) -> f64 {
                self.ramp_time_full_s
            }
            fn load(&self) -> f64 {
                self.load
            }
            fn set_load(&mut self, load: f64) {
                self.load = load;
            }
            fn target(&self) -> f64 {
                self.target
            }
            fn set_target(&mut self, target: f64) {
                self.target = target;
            }
        }
    };
}

impl_ramp_unit!(ElectrolyzerTrain);
impl_ramp_unit!(FuelCellBlock);

/// Advance every unit toward its target by one step of `dt` seconds.
///
/// Synchronized units ramp independently. Sequenced units share one ramp
/// "clock": shutting down runs from the highest index, starting up from the
/// lowest, and a unit only moves once its predecessors have arrived, so at
/// any instant at most one unit per direction is in transit (several may
/// finish within one long step).
pub fn step_units<U: RampUnit>(units: &mut [U], mode: Allocation, dt: f64) {
    match mode {
        Allocation::Synchronized => {
            for u in units.iter_mut() {
                let next = crate::plants::ramp_toward(u.load(), u.target(), u.ramp_time_full_s(), dt);
                u.set_load(next);
            }
        }
        Allocation::Sequence => {
            let mut budget = dt;
            for u in units.iter_mut().rev() {
                if u.load() > u.target() {
                    if budget <= 0.0 {
                        break;
                    }
                    budget -= move_unit(u, budget);
                }
            }
            let mut budget = dt;
            for u in units.iter_mut() {
                if u.load() < u.target() {
                    if budget <= 0.0 {
                        break;
                    }
                    budget -= move_unit(u, budget);
                }
            }
        }
    }
}

/// Move toward target using at most `budget` seconds; returns seconds used.
fn move_unit<U: RampUnit>(u: &mut U, budget: f64) -> f64 {
    let ramp = u.ramp_time_full_s();
    let gap = u.target() - u.load();
    let need = gap.abs() * ramp;
    if need <= budget {
        u.set_load(u.target());
        need
    } else {
        u.set_load((u.load() + gap.signum() * budget / ramp).clamp(0.0, 1.0));
        budget
    }
}

/// Sum of unit power.
pub fn plant_power<U: RampUnit>(units: &[U]) -> f64 {
    units.iter().map(|u| u.load() * u.rating_mw()).sum()
}

/// Reactive power drawn by a thyristor-fed train at `loading`.
pub fn electrolyzer_reactive_demand(loading: f64, rating_mw: f64, law: &PfLaw) -> f64 {
    if loading <= 0.0 {
        return 0.0;
    }
    let pf = law.power_factor(loading);
    loading * rating_mw * pf.acos().tan()
}

/// Split reactive demand between fuel-cell AFEs and the BESS.
///
/// Each AFE offers what is left of its apparent-power circle after its
/// block's active power; the BESS covers only the remainder.
pub fn reactive_dispatch(
    fc_block_power_mw: &[f64],
    q_load_mvar: f64,
    q_ely_mvar: f64,
    afe_ratings_mva: &[f64],
) -> (f64, f64) {
    let headroom: f64 = afe_ratings_mva
        .iter()
        .zip(fc_block_power_mw.iter().chain(std::iter::repeat(&0.0)))
        .map(|(s, p)| {
            let p = p.abs().min(*s);
            (s * s - p * p).max(0.0).sqrt()
        })
        .sum();
    let demand = (q_load_mvar + q_ely_mvar).max(0.0);
    let q_afe = demand.min(headroom);
    (q_afe, demand - q_afe)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrequencyState {
    pub deviation_hz: f64,
}

/// First-order droop response to the BESS per-unit active power request.
pub fn frequency_step(
    state: FrequencyState,
    bess_requested_mw: f64,
    bess_rating_mw: f64,
    cfg: &ControlConfig,
    dt: f64,
) -> FrequencyState {
    let target = -cfg.freq_droop * cfg.nominal_hz * bess_requested_mw / bess_rating_mw;
    let decay = (-dt / cfg.freq_lag).exp();
    FrequencyState {
        deviation_hz: target + (state.deviation_hz - target) * decay,
    }
}
