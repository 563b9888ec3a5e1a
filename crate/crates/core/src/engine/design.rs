//! Component ratings of one hub design and the named presets.

use crate::plants::{
    Bess, ElectrolyzerTrain, FuelCellBlock, HydrogenTank, PlatformLoad,
    DEFAULT_FC_SPECIFIC_CONSUMPTION,
};
use crate::wind::{FarmLayout, TurbineSpec};

use super::EngineError;

/// Platform load that the sweep adds to `f x` electrolyzer rating when sizing
/// the wind farm.
pub const BASE_PLATFORM_LOAD_MW: f64 = 27.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub name: String,
    pub turbine: TurbineSpec,
    pub n_turbines: usize,
    pub layout_rows: usize,
    pub spacing_diameters: f64,

    pub ely_trains: usize,
    pub ely_train_mw: f64,
    pub ely_ramp_s: f64,
    /// Per-train production at rated power, Nm3/h.
    pub ely_nominal_nm3h: f64,

    pub fc_blocks: usize,
    pub fc_block_mw: f64,
    pub fc_ramp_s: f64,
    pub fc_specific_consumption: f64,
    /// Apparent rating of each fuel-cell AFE converter.
    pub afe_mva: f64,

    pub bess_mw: f64,
    pub bess_mwh: f64,
    pub bess_mva: f64,
    pub soc_initial: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub bess_efficiency: f64,

    /// `None` tracks net hydrogen with negative levels allowed.
    pub tank_capacity_kg: Option<f64>,
    pub tank_initial_kg: f64,
    /// Bounded tanks only: fuel cells are withdrawn at or below this level.
    pub tank_reserve_kg: f64,

    pub loads: Vec<PlatformLoad>,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self::initial()
    }
}

impl DesignSpec {
    /// 64 MW wind, 7 x 5 MW electrolyzers and fuel cells, 10 MW / 10 MWh BESS.
    pub fn initial() -> Self {
        Self {
            name: "initial".into(),
            turbine: TurbineSpec::default(),
            n_turbines: 8,
            layout_rows: 2,
            spacing_diameters: 5.0,
            ely_trains: 7,
            ely_train_mw: 5.0,
            ely_ramp_s: 706.0,
            ely_nominal_nm3h: 1000.0,
            fc_blocks: 7,
            fc_block_mw: 5.0,
            fc_ramp_s: 10.0,
            fc_specific_consumption: DEFAULT_FC_SPECIFIC_CONSUMPTION,
            afe_mva: 5.0,
            bess_mw: 10.0,
            bess_mwh: 10.0,
            bess_mva: 10.0,
            soc_initial: 0.5,
            soc_min: 0.1,
            soc_max: 0.9,
            bess_efficiency: 1.0,
            tank_capacity_kg: None,
            tank_initial_kg: 0.0,
            tank_reserve_kg: 0.0,
            loads: PlatformLoad::default_cluster(),
        }
    }

    /// Initial design with a 30 MW fuel-cell plant.
    pub fn design1() -> Self {
        Self {
            name: "design1".into(),
            fc_blocks: 6,
            ..Self::initial()
        }
    }

    /// 25 MW fuel cells and a 300 MWh battery.
    pub fn design2() -> Self {
        Self {
            name: "design2".into(),
            fc_blocks: 5,
            bess_mwh: 300.0,
            ..Self::initial()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "initial" => Some(Self::initial()),
            "design1" => Some(Self::design1()),
            "design2" => Some(Self::design2()),
            _ => None,
        }
    }

    /// Electrolyzer plant scaled by `factor` (same train count, larger trains)
    /// with the farm resized to platform load plus the new electrolyzer peak,
    /// rounded to the nearest whole turbine.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.name = format!("{}_x{factor:.2}", self.name);
        d.ely_train_mw = self.ely_train_mw * factor;
        d.ely_nominal_nm3h = self.ely_nominal_nm3h * factor;
        let wind = BASE_PLATFORM_LOAD_MW + factor * self.ely_mw();
        d.n_turbines = ((wind / self.turbine.rated_power_mw).round() as usize).max(1);
        d
    }

    pub fn wind_mw(&self) -> f64 {
        self.n_turbines as f64 * self.turbine.rated_power_mw
    }

    pub fn ely_mw(&self) -> f64 {
        self.ely_trains as f64 * self.ely_train_mw
    }

    pub fn fc_mw(&self) -> f64 {
        self.fc_blocks as f64 * self.fc_block_mw
    }

    pub fn layout(&self) -> FarmLayout {
        FarmLayout::rows(
            self.n_turbines,
            self.layout_rows,
            self.spacing_diameters * self.turbine.rotor_diameter_m,
        )
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        self.turbine.validate()?;
        if self.n_turbines == 0 || self.layout_rows == 0 {
            return bad("design needs at least one turbine and one row".into());
        }
        self.layout().validate(self.turbine.rotor_diameter_m)?;
        for (what, v) in [
            ("ely_train_mw", self.ely_train_mw),
            ("ely_ramp_s", self.ely_ramp_s),
            ("ely_nominal_nm3h", self.ely_nominal_nm3h),
            ("fc_block_mw", self.fc_block_mw),
            ("fc_ramp_s", self.fc_ramp_s),
            ("fc_specific_consumption", self.fc_specific_consumption),
            ("afe_mva", self.afe_mva),
            ("bess_mva", self.bess_mva),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{what} must be positive, got {v}"));
            }
        }
        self.bess(self.soc_initial).validate()?;
        if let Some(cap) = self.tank_capacity_kg {
            if !(cap > 0.0) || self.tank_initial_kg > cap || self.tank_initial_kg < 0.0 {
                return bad(format!(
                    "bounded tank needs 0 <= initial ({}) <= capacity ({cap})",
                    self.tank_initial_kg
                ));
            }
        }
        for (i, l) in self.loads.iter().enumerate() {
            if !(l.power_factor > 0.0 && l.power_factor <= 1.0) || !(l.active_power_mw >= 0.0) {
                return bad(format!("platform {i}: need P >= 0 and 0 < pf <= 1"));
            }
        }
        Ok(())
    }

    pub(crate) fn electrolyzers(&self) -> Vec<ElectrolyzerTrain> {
        (0..self.ely_trains)
            .map(|_| ElectrolyzerTrain::new(self.ely_train_mw, self.ely_ramp_s, self.ely_nominal_nm3h))
            .collect()
    }

    pub(crate) fn fuel_cells(&self) -> Vec<FuelCellBlock> {
        (0..self.fc_blocks)
            .map(|_| FuelCellBlock::new(self.fc_block_mw, self.fc_ramp_s, self.fc_specific_consumption))
            .collect()
    }

    pub(crate) fn bess(&self, soc: f64) -> Bess {
        Bess {
            power_rating_mw: self.bess_mw,
            energy_capacity_mwh: self.bess_mwh,
            soc,
            soc_min: self.soc_min,
            soc_max: self.soc_max,
            round_trip_efficiency: self.bess_efficiency,
            apparent_rating_mva: self.bess_mva,
        }
    }

    pub(crate) fn tank(&self) -> HydrogenTank {
        match self.tank_capacity_kg {
            Some(cap) => HydrogenTank::bounded(self.tank_initial_kg, cap),
            None => HydrogenTank::unbounded(self.tank_initial_kg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_rating_table() {
        let i = DesignSpec::initial();
        assert_eq!((i.wind_mw(), i.ely_mw(), i.fc_mw(), i.bess_mw, i.bess_mwh), (64.0, 35.0, 35.0, 10.0, 10.0));
        assert_eq!(DesignSpec::design1().fc_mw(), 30.0);
        let d2 = DesignSpec::design2();
        assert_eq!((d2.fc_mw(), d2.bess_mw, d2.bess_mwh), (25.0, 10.0, 300.0));
        for d in [i, DesignSpec::design1(), d2] {
            d.validate().unwrap();
        }
    }

    #[test]
    fn scaling_resizes_wind_to_match_electrolyzers() {
        let d = DesignSpec::design1();
        let s = d.scaled(1.8);
        assert!((s.ely_mw() - 63.0).abs() < 1e-9);
        assert_eq!(s.wind_mw(), 88.0);
        assert_eq!(d.scaled(1.0).wind_mw(), 64.0);
        assert_eq!(d.scaled(2.0).wind_mw(), 96.0);
        assert_eq!(s.ely_trains, 7);
        s.validate().unwrap();
    }

    #[test]
    fn invalid_designs_rejected() {
        let mut d = DesignSpec::initial();
        d.bess_mwh = 0.0;
        assert!(d.validate().is_err());
        let mut d = DesignSpec::initial();
        d.ely_ramp_s = -1.0;
        assert!(d.validate().is_err());
        let mut d = DesignSpec::initial();
        d.spacing_diameters = 0.5;
        assert!(d.validate().is_err());
    }
}
