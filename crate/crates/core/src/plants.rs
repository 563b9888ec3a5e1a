//! Dispatchable units: electrolyzer trains, fuel-cell blocks, the battery,
//! the hydrogen store and the platform loads.

use thiserror::Error;

/// Molar mass of H2 over the molar volume at 0 degC / 1 atm, kg/Nm3.
pub const H2_NORMAL_DENSITY: f64 = 2.016 / 22.414;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("power {power} MW outside [0, {rating}] MW")]
    PowerOutOfRange { power: f64, rating: f64 },
    #[error("invalid plant parameter: {0}")]
    Invalid(String),
}

/// Move `load` toward `target` at `1 / ramp_time_full` per second.
#[inline]
pub fn ramp_toward(load: f64, target: f64, ramp_time_full: f64, dt: f64) -> f64 {
    let max_step = dt / ramp_time_full;
    let delta = (target - load).clamp(-max_step, max_step);
    (load + delta).clamp(0.0, 1.0)
}

fn check_power(power: f64, rating: f64) -> Result<(), PlantError> {
    // small tolerance for allocator round-off
    if !(power >= 0.0) || power > rating * (1.0 + 1e-12) {
        return Err(PlantError::PowerOutOfRange { power, rating });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectrolyzerTrain {
    pub rating_mw: f64,
    pub ramp_time_full_s: f64,
    pub load: f64,
    pub target: f64,
    /// Hydrogen output at rated power, Nm3/h.
    pub nominal_production_nm3h: f64,
}

impl ElectrolyzerTrain {
    pub fn new(rating_mw: f64, ramp_time_full_s: f64, nominal_production_nm3h: f64) -> Self {
        Self {
            rating_mw,
            ramp_time_full_s,
            load: 0.0,
            target: 0.0,
            nominal_production_nm3h,
        }
    }

    pub fn power_mw(&self) -> f64 {
        self.load * self.rating_mw
    }

    /// Hydrogen production in kg/h, linear in power.
    pub fn hydrogen_rate(&self, power_mw: f64) -> Result<f64, PlantError> {
        check_power(power_mw, self.rating_mw)?;
        Ok(self.kg_per_mwh() * power_mw)
    }

    pub(crate) fn kg_per_mwh(&self) -> f64 {
        self.nominal_production_nm3h * H2_NORMAL_DENSITY / self.rating_mw
    }
}

/// Hydrogen production of a train at `power`, kg/h.
pub fn ely_hydrogen_rate(power_mw: f64, train: &ElectrolyzerTrain) -> Result<f64, PlantError> {
    train.hydrogen_rate(power_mw)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuelCellBlock {
    pub rating_mw: f64,
    pub ramp_time_full_s: f64,
    pub load: f64,
    pub target: f64,
    /// kg of H2 per MWh delivered.
    pub specific_consumption: f64,
}

impl FuelCellBlock {
    pub fn new(rating_mw: f64, ramp_time_full_s: f64, specific_consumption: f64) -> Self {
        Self {
            rating_mw,
            ramp_time_full_s,
            load: 0.0,
            target: 0.0,
            specific_consumption,
        }
    }

    pub fn power_mw(&self) -> f64 {
        self.load * self.rating_mw
    }
}

/// Hydrogen burnt by a block delivering `power_mw` for `dt_h` hours, kg.
pub fn fc_hydrogen_consumption(
    power_mw: f64,
    block: &FuelCellBlock,
    dt_h: f64,
) -> Result<f64, PlantError> {
    check_power(power_mw, block.rating_mw)?;
    Ok(power_mw * dt_h * block.specific_consumption)
}

/// Default specific consumption: 1 MWh / (33.33 kWh/kg LHV x 0.5 efficiency).
pub const DEFAULT_FC_SPECIFIC_CONSUMPTION: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Bess {
    pub power_rating_mw: f64,
    pub energy_capacity_mwh: f64,
    pub soc: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub round_trip_efficiency: f64,
    pub apparent_rating_mva: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BessOutcome {
    /// Delivered power, positive when discharging.
    pub actual_mw: f64,
    pub soc: f64,
    pub clipped: bool,
}

impl Bess {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.power_rating_mw > 0.0 && self.energy_capacity_mwh > 0.0) {
            return Err(PlantError::Invalid("BESS power and energy ratings must be positive".into()));
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err(PlantError::Invalid(format!(
                "need 0 <= soc_min ({}) < soc_max ({}) <= 1",
                self.soc_min, self.soc_max
            )));
        }
        if !(self.soc_min..=self.soc_max).contains(&self.soc) {
            return Err(PlantError::Invalid(format!("initial SOC {} outside limits", self.soc)));
        }
        if !(self.round_trip_efficiency > 0.0 && self.round_trip_efficiency <= 1.0) {
            return Err(PlantError::Invalid("round-trip efficiency must be in (0, 1]".into()));
        }
        Ok(())
    }

    /// Largest discharge (`.0`) and charge (`.1`) magnitudes available over `dt_h`.
    pub fn limits(&self, dt_h: f64) -> (f64, f64) {
        let leg = self.round_trip_efficiency.sqrt();
        let discharge = ((self.soc - self.soc_min).max(0.0) * self.energy_capacity_mwh * leg / dt_h)
            .min(self.power_rating_mw);
        let charge = ((self.soc_max - self.soc).max(0.0) * self.energy_capacity_mwh / (leg * dt_h))
            .min(self.power_rating_mw);
        (discharge, charge)
    }

    /// Serve `requested_mw` (positive discharge) for `dt_h` hours and update SOC.
    ///
    /// Losses are split evenly: `sqrt(eta)` on the way in and on the way out.
    pub fn apply(&mut self, requested_mw: f64, dt_h: f64) -> BessOutcome {
        let (max_dis, max_chg) = self.limits(dt_h);
        let actual = requested_mw.clamp(-max_chg, max_dis);
        let leg = self.round_trip_efficiency.sqrt();
        let delta = if actual >= 0.0 {
            -actual * dt_h / (leg * self.energy_capacity_mwh)
        } else {
            -actual * dt_h * leg / self.energy_capacity_mwh
        };
        self.soc = (self.soc + delta).clamp(self.soc_min, self.soc_max);
        BessOutcome {
            actual_mw: actual,
            soc: self.soc,
            clipped: actual != requested_mw,
        }
    }
}

pub fn bess_apply(requested_mw: f64, bess: &Bess, dt_h: f64) -> BessOutcome {
    bess.clone().apply(requested_mw, dt_h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenTank {
    /// Stored mass; negative values track net import in unbounded mode.
    pub level_kg: f64,
    pub capacity_kg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TankFlow {
    pub spilled_kg: f64,
}

impl HydrogenTank {
    pub fn unbounded(level_kg: f64) -> Self {
        Self {
            level_kg,
            capacity_kg: None,
        }
    }

    pub fn bounded(level_kg: f64, capacity_kg: f64) -> Self {
        Self {
            level_kg: level_kg.min(capacity_kg),
            capacity_kg: Some(capacity_kg),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.capacity_kg.is_some()
    }

    pub fn update(&mut self, produced_kg: f64, consumed_kg: f64) -> TankFlow {
        let next = self.level_kg + produced_kg - consumed_kg;
        match self.capacity_kg {
            Some(cap) if next > cap => {
                self.level_kg = cap;
                TankFlow { spilled_kg: next - cap }
            }
            _ => {
                self.level_kg = next;
                TankFlow::default()
            }
        }
    }
}

pub fn tank_update(tank: &HydrogenTank, produced_kg: f64, consumed_kg: f64) -> (HydrogenTank, TankFlow) {
    let mut next = tank.clone();
    let flow = next.update(produced_kg, consumed_kg);
    (next, flow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformLoad {
    pub active_power_mw: f64,
    pub power_factor: f64,
    /// Lower sheds first.
    pub priority: u32,
    pub connected: bool,
}

impl PlatformLoad {
    pub fn new(active_power_mw: f64, power_factor: f64, priority: u32) -> Self {
        Self {
            active_power_mw,
            power_factor,
            priority,
            connected: true,
        }
    }

    pub fn reactive_mvar(&self) -> f64 {
        self.active_power_mw * self.power_factor.acos().tan()
    }

    /// Six platforms, 27.5 MW at pf 0.8; the 4 MW ones shed first.
    pub fn default_cluster() -> Vec<PlatformLoad> {
        let mut v = vec![PlatformLoad::new(5.75, 0.8, 2), PlatformLoad::new(5.75, 0.8, 2)];
        v.extend((0..4).map(|_| PlatformLoad::new(4.0, 0.8, 1)));
        v
    }
}

/// Active and reactive demand of the connected platforms.
pub fn total_load(platforms: &[PlatformLoad]) -> (f64, f64) {
    platforms
        .iter()
        .filter(|p| p.connected)
        .fold((0.0, 0.0), |(p, q), l| (p + l.active_power_mw, q + l.reactive_mvar()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bess(soc: f64) -> Bess {
        Bess {
            power_rating_mw: 10.0,
            energy_capacity_mwh: 10.0,
            soc,
            soc_min: 0.1,
            soc_max: 0.9,
            round_trip_efficiency: 1.0,
            apparent_rating_mva: 10.0,
        }
    }

    #[test]
    fn ramp_examples() {
        assert_eq!(ramp_toward(0.0, 1.0, 706.0, 706.0), 1.0);
        assert_eq!(ramp_toward(0.0, 1.0, 706.0, 353.0), 0.5);
        assert_eq!(ramp_toward(0.4, 0.4, 11.0, 1.0), 0.4);
        assert_relative_eq!(ramp_toward(1.0, 0.0, 10.0, 1.0), 0.9);
        assert_eq!(ramp_toward(0.95, 1.0, 10.0, 1.0), 1.0);
    }

    #[test]
    fn electrolyzer_production() {
        let train = ElectrolyzerTrain::new(5.0, 11.0, 1000.0);
        let oracle = 1000.0 * 2.016 / 22.414;
        assert_relative_eq!(train.hydrogen_rate(5.0).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(oracle, 89.94, max_relative = 1e-3);
        assert_eq!(train.hydrogen_rate(0.0).unwrap(), 0.0);
        assert_relative_eq!(ely_hydrogen_rate(2.5, &train).unwrap(), oracle / 2.0, max_relative = 1e-12);
        assert!(train.hydrogen_rate(5.5).is_err());
        assert!(train.hydrogen_rate(-0.1).is_err());
    }

    #[test]
    fn fuel_cell_consumption() {
        let block = FuelCellBlock::new(5.0, 10.0, DEFAULT_FC_SPECIFIC_CONSUMPTION);
        let lhv_oracle = 1000.0 / (33.333_333_333_333_336 * 0.5);
        assert_relative_eq!(lhv_oracle, 60.0, max_relative = 1e-12);
        assert_relative_eq!(fc_hydrogen_consumption(5.0, &block, 1.0).unwrap(), 300.0, max_relative = 1e-12);
        assert_eq!(fc_hydrogen_consumption(0.0, &block, 1.0).unwrap(), 0.0);
        assert_relative_eq!(fc_hydrogen_consumption(2.0, &block, 0.5).unwrap(), 60.0, max_relative = 1e-12);
        assert!(fc_hydrogen_consumption(6.0, &block, 1.0).is_err());
    }

    #[test]
    fn bess_charge_bookkeeping() {
        let out = bess_apply(-5.0, &bess(0.5), 0.1);
        assert_eq!(out.actual_mw, -5.0);
        assert_relative_eq!(out.soc, 0.55, max_relative = 1e-12);
        assert!(!out.clipped);
    }

    #[test]
    fn bess_clips_power_and_energy() {
        let out = bess_apply(-18.8, &bess(0.5), 1.0 / 3600.0);
        assert_eq!(out.actual_mw, -10.0);
        assert!(out.clipped);

        let empty = bess_apply(1.0, &bess(0.1), 1.0 / 3600.0);
        assert_eq!(empty.actual_mw, 0.0);
        assert!(empty.clipped);

        // 8 MW for an hour from 0.5 would pass soc_max
        let mut b = bess(0.5);
        let out = b.apply(-8.0, 1.0);
        assert_relative_eq!(out.actual_mw, -4.0, max_relative = 1e-12);
        assert_relative_eq!(out.soc, 0.9, max_relative = 1e-12);
    }

    #[test]
    fn bess_efficiency_split() {
        let mut b = Bess {
            round_trip_efficiency: 0.81,
            ..bess(0.5)
        };
        b.apply(-1.0, 1.0);
        assert_relative_eq!(b.soc, 0.5 + 0.09, max_relative = 1e-12);
        b.apply(0.81, 1.0);
        assert_relative_eq!(b.soc, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn tank_modes() {
        let (t, _) = tank_update(&HydrogenTank::unbounded(0.0), 89.9, 0.0);
        assert_eq!(t.level_kg, 89.9);
        let (t, _) = tank_update(&HydrogenTank::unbounded(100.0), 0.0, 300.0);
        assert_eq!(t.level_kg, -200.0);
        let (t, flow) = tank_update(&HydrogenTank::bounded(90.0, 100.0), 25.0, 5.0);
        assert_eq!(t.level_kg, 100.0);
        assert_eq!(flow.spilled_kg, 10.0);
    }

    #[test]
    fn platform_totals() {
        let mut cluster = PlatformLoad::default_cluster();
        let (p, q) = total_load(&cluster);
        assert_relative_eq!(p, 27.5, max_relative = 1e-12);
        assert_relative_eq!(0.8_f64.acos().tan(), 0.75, max_relative = 1e-12);
        assert_relative_eq!(q, 27.5 * 0.75, max_relative = 1e-12);
        cluster.iter_mut().for_each(|l| l.connected = false);
        assert_eq!(total_load(&cluster), (0.0, 0.0));
    }
}
