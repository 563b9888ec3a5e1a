//! Year-long runs and the electrolyzer/wind upscaling sweep.

use std::sync::Arc;

use rayon::prelude::*;

use crate::metrics::KpiReport;
use crate::pms::ControlConfig;
use crate::wind::{
    apply_wake, assemble_annual, read_annual_means, rotor_average, AnnualWindSpec, WakeModel, WindField,
};

use super::{run, DesignSpec, EngineError, RunResult, Scenario, WindSetup};

/// Synthetic hourly mean-wind year shipped with the crate; see
/// `assets/annual_calibration.md` for how it was produced.
pub const BUNDLED_ANNUAL_MEANS: &str = include_str!("../../assets/annual_mean_wind.csv");

/// Seed of the bundled year, used both for the hourly means and for the
/// turbulent blocks laid over them.
pub const ANNUAL_SEED: u64 = 2024;

/// Electrolyzer ramp used for year runs. At one-minute steps the slow 706 s
/// ramp leaves a 10 MWh battery carrying most of each wind swing.
pub const ANNUAL_ELY_RAMP_S: f64 = 11.0;

pub const ANNUAL_DT_S: f64 = 60.0;

/// Hourly mean-wind year plus the turbulence laid on top of it.
#[derive(Debug, Clone)]
pub struct AnnualInput {
    pub means: Arc<Vec<f64>>,
    pub spec: AnnualWindSpec,
    pub wake: WakeModel,
    pub rotor_gamma: f64,
    pub seed: u64,
}

impl AnnualInput {
    pub fn new(means: Vec<f64>, seed: u64) -> Self {
        let setup = WindSetup::default();
        Self {
            means: Arc::new(means),
            spec: AnnualWindSpec::default(),
            wake: setup.wake,
            rotor_gamma: setup.rotor_gamma,
            seed,
        }
    }

    pub fn bundled() -> Self {
        let means = read_annual_means(BUNDLED_ANNUAL_MEANS.as_bytes()).expect("bundled annual series is valid");
        Self::new(means, ANNUAL_SEED)
    }
}

/// Per-turbine year at `dt_long` for `design`'s layout.
pub fn annual_wind_field(design: &DesignSpec, input: &AnnualInput, dt_long: f64) -> Result<WindField, EngineError> {
    let layout = design.layout();
    let raw = assemble_annual(&input.means, &layout, &input.spec, dt_long, input.seed)?;
    let smooth = rotor_average(&raw, &design.turbine, input.rotor_gamma);
    Ok(apply_wake(&smooth, &layout, &design.turbine, &input.wake)?)
}

/// One design over the whole annual series at `dt_long`.
pub fn run_year(
    design: &DesignSpec,
    input: &AnnualInput,
    dt_long: f64,
    control: &ControlConfig,
) -> Result<RunResult, EngineError> {
    design.validate()?;
    let field = Arc::new(annual_wind_field(design, input, dt_long)?);
    run_year_on(design, field, control, input.seed)
}

/// As [`run_year`] on a prepared field (designs sharing a layout can share it).
pub fn run_year_on(
    design: &DesignSpec,
    field: Arc<WindField>,
    control: &ControlConfig,
    seed: u64,
) -> Result<RunResult, EngineError> {
    let mut sc = Scenario::new(design.name.clone(), design.clone(), control.clone(), field);
    sc.seed = seed;
    run(&sc)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub factor: f64,
    pub design: DesignSpec,
    pub kpis: KpiReport,
}

impl SweepPoint {
    pub fn net_h2_kg(&self) -> f64 {
        self.kpis.h2_net_kg
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Sorted by factor.
    pub points: Vec<SweepPoint>,
    /// Factor at which year-end net hydrogen crosses zero, if bracketed.
    pub neutrality_factor: Option<f64>,
}

/// Linear interpolation of the first sign change from negative to
/// non-negative net hydrogen; `points` must be sorted by factor.
pub fn neutrality_crossing(points: &[(f64, f64)]) -> Option<f64> {
    if let Some(&(f, h)) = points.first() {
        if h >= 0.0 {
            return Some(f);
        }
    }
    points.windows(2).find_map(|w| {
        let ((f0, h0), (f1, h1)) = (w[0], w[1]);
        (h0 < 0.0 && h1 >= 0.0).then(|| f0 + (f1 - f0) * (-h0) / (h1 - h0))
    })
}

/// Annual runs with the electrolyzer plant scaled by each factor and the farm
/// resized to match. Runs in parallel on the current rayon pool.
///
/// Fails with [`EngineError::Sweep`] if year-end net hydrogen decreases with
/// the factor.
pub fn sweep(
    base: &DesignSpec,
    factors: &[f64],
    input: &AnnualInput,
    dt_long: f64,
    control: &ControlConfig,
) -> Result<SweepResult, EngineError> {
    if factors.is_empty() {
        return Err(EngineError::Config("sweep needs at least one factor".into()));
    }
    if let Some(f) = factors.iter().find(|f| !(**f >= 1.0 && f.is_finite())) {
        return Err(EngineError::Config(format!("sweep factors must be >= 1, got {f}")));
    }
    let mut sorted = factors.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let points = sorted
        .par_iter()
        .map(|&f| {
            let design = base.scaled(f);
            run_year(&design, input, dt_long, control).map(|r| SweepPoint {
                factor: f,
                design,
                kpis: r.kpis,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    for w in points.windows(2) {
        let (a, b) = (w[0].net_h2_kg(), w[1].net_h2_kg());
        if b < a {
            return Err(EngineError::Sweep(format!(
                "net hydrogen fell from {a:.0} kg at x{} to {b:.0} kg at x{}",
                w[0].factor, w[1].factor
            )));
        }
    }
    let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.factor, p.net_h2_kg())).collect();
    Ok(SweepResult {
        neutrality_factor: neutrality_crossing(&curve),
        points,
    })
}
