//! Wind farm model: turbine power curve, farm layout, correlated turbulence
//! synthesis, wakes, rotor averaging and annual series assembly.

mod annual;
mod io;
mod turbulence;
mod wake;

pub use annual::{
    assemble_annual, calibrate_weibull_scale, farm_capacity_factor, synthetic_mean_year,
    AnnualWindSpec, MeanYearSpec, BLOCK_SECONDS, HOURS_PER_YEAR,
};
pub use io::{read_annual_means, read_wind_field, write_annual_means, write_wind_field};
pub use turbulence::{kaimal_psd, rotor_average, synthesize_wind_field, TurbulenceSpec};
pub use wake::{apply_wake, jensen_deficit, WakeModel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WindError {
    #[error("wind speed must be non-negative, got {0} m/s")]
    NegativeSpeed(f64),
    #[error("curtailment setpoint must be non-negative, got {0} MW")]
    NegativeSetpoint(f64),
    #[error("invalid turbine spec: {0}")]
    Turbine(String),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("invalid wind configuration: {0}")]
    Config(String),
    #[error("time index {index} out of range for a field of {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("wind data I/O: {0}")]
    Io(String),
}

/// Quasi-steady description of one turbine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineSpec {
    pub rated_power_mw: f64,
    pub cut_in_mps: f64,
    pub rated_speed_mps: f64,
    pub cut_out_mps: f64,
    pub rotor_diameter_m: f64,
}

impl Default for TurbineSpec {
    fn default() -> Self {
        Self {
            rated_power_mw: 8.0,
            cut_in_mps: 4.0,
            rated_speed_mps: 10.0,
            cut_out_mps: 25.0,
            rotor_diameter_m: 164.0,
        }
    }
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<(), WindError> {
        let ok_speeds = self.cut_in_mps > 0.0
            && self.cut_in_mps < self.rated_speed_mps
            && self.rated_speed_mps < self.cut_out_mps;
        if !ok_speeds {
            return Err(WindError::Turbine(format!(
                "need 0 < cut_in ({}) < rated ({}) < cut_out ({})",
                self.cut_in_mps, self.rated_speed_mps, self.cut_out_mps
            )));
        }
        if !(self.rated_power_mw > 0.0) {
            return Err(WindError::Turbine("rated power must be positive".into()));
        }
        if !(self.rotor_diameter_m > 0.0) {
            return Err(WindError::Turbine("rotor diameter must be positive".into()));
        }
        Ok(())
    }

    pub fn rotor_radius_m(&self) -> f64 {
        0.5 * self.rotor_diameter_m
    }

    /// Power at speed `v`, treating negative speeds as calm air.
    ///
    /// Between cut-in and rated the curve is cubic in speed,
    /// `P = P_r (v^3 - v_in^3) / (v_r^3 - v_in^3)`.
    #[inline]
    pub fn power_at(&self, v: f64) -> f64 {
        if v < self.cut_in_mps || v >= self.cut_out_mps {
            0.0
        } else if v >= self.rated_speed_mps {
            self.rated_power_mw
        } else {
            let lo = self.cut_in_mps.powi(3);
            let hi = self.rated_speed_mps.powi(3);
            self.rated_power_mw * (v.powi(3) - lo) / (hi - lo)
        }
    }
}

/// Checked power curve.
pub fn power_curve(v: f64, spec: &TurbineSpec) -> Result<f64, WindError> {
    if v < 0.0 || v.is_nan() {
        return Err(WindError::NegativeSpeed(v));
    }
    Ok(spec.power_at(v))
}

/// Turbine hub positions in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct FarmLayout {
    pub positions: Vec<(f64, f64)>,
}

impl FarmLayout {
    pub fn new(positions: Vec<(f64, f64)>) -> Self {
        Self { positions }
    }

    /// `n` turbines in `rows` rows along x, rows stacked along y, uniform spacing.
    ///
    /// Rows are filled front to back; row 0 sits at `y = 0`.
    pub fn rows(n: usize, rows: usize, spacing_m: f64) -> Self {
        let rows = rows.max(1);
        let per_row = n.div_ceil(rows);
        let positions = (0..n)
            .map(|i| {
                let row = i / per_row;
                let col = i % per_row;
                (col as f64 * spacing_m, row as f64 * spacing_m)
            })
            .collect();
        Self { positions }
    }

    pub fn n_turbines(&self) -> usize {
        self.positions.len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (xi, yi) = self.positions[i];
        let (xj, yj) = self.positions[j];
        (xi - xj).hypot(yi - yj)
    }

    pub fn validate(&self, rotor_diameter_m: f64) -> Result<(), WindError> {
        if self.positions.is_empty() {
            return Err(WindError::Layout("layout has no turbines".into()));
        }
        for i in 0..self.positions.len() {
            for j in (i + 1)..self.positions.len() {
                let d = self.distance(i, j);
                if d < rotor_diameter_m {
                    return Err(WindError::Layout(format!(
                        "turbines {} and {} are {:.1} m apart (< one rotor diameter)",
                        i + 1,
                        j + 1,
                        d
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-turbine rotor-averaged speed series, `speeds[turbine][step]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindField {
    pub dt: f64,
    pub speeds: Vec<Vec<f64>>,
}

impl WindField {
    pub fn constant(n_turbines: usize, n_steps: usize, dt: f64, speed: f64) -> Self {
        Self {
            dt,
            speeds: vec![vec![speed; n_steps]; n_turbines],
        }
    }

    pub fn n_turbines(&self) -> usize {
        self.speeds.len()
    }

    pub fn n_steps(&self) -> usize {
        self.speeds.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps() as f64
    }

    pub fn validate(&self) -> Result<(), WindError> {
        if !(self.dt > 0.0) {
            return Err(WindError::Config(format!("field dt must be positive, got {}", self.dt)));
        }
        let n = self.n_steps();
        if self.speeds.iter().any(|s| s.len() != n) {
            return Err(WindError::Config("turbine series have unequal lengths".into()));
        }
        if let Some(v) = self.speeds.iter().flatten().find(|v| !(**v >= 0.0)) {
            return Err(WindError::NegativeSpeed(*v));
        }
        Ok(())
    }
}

/// Farm total and per-turbine available power at step `t_index`.
pub fn available_farm_power(
    field: &WindField,
    spec: &TurbineSpec,
    t_index: usize,
) -> Result<(f64, Vec<f64>), WindError> {
    let len = field.n_steps();
    if t_index >= len {
        return Err(WindError::IndexOutOfRange { index: t_index, len });
    }
    let per_turbine: Vec<f64> = field
        .speeds
        .iter()
        .map(|s| spec.power_at(s[t_index]))
        .collect();
    Ok((per_turbine.iter().sum(), per_turbine))
}

/// Split a farm setpoint over turbines in proportion to their available power.
pub fn distribute_curtailment(
    farm_setpoint: f64,
    per_turbine_available: &[f64],
) -> Result<Vec<f64>, WindError> {
    let mut out = vec![0.0; per_turbine_available.len()];
    distribute_curtailment_into(farm_setpoint, per_turbine_available, &mut out)?;
    Ok(out)
}

pub(crate) fn distribute_curtailment_into(
    farm_setpoint: f64,
    available: &[f64],
    out: &mut [f64],
) -> Result<f64, WindError> {
    if farm_setpoint < 0.0 || farm_setpoint.is_nan() {
        return Err(WindError::NegativeSetpoint(farm_setpoint));
    }
    let total: f64 = available.iter().sum();
    if farm_setpoint >= total || total <= 0.0 {
        out.copy_from_slice(available);
        return Ok(total);
    }
    let ratio = farm_setpoint / total;
    for (o, a) in out.iter_mut().zip(available) {
        *o = a * ratio;
    }
    Ok(farm_setpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_curve_anchor_speeds() {
        let spec = TurbineSpec::default();
        assert_eq!(power_curve(4.0, &spec).unwrap(), 0.0);
        assert_eq!(power_curve(10.0, &spec).unwrap(), 8.0);
        assert_eq!(power_curve(24.999, &spec).unwrap(), 8.0);
        assert_eq!(power_curve(25.0, &spec).unwrap(), 0.0);
        assert_eq!(power_curve(26.0, &spec).unwrap(), 0.0);
        assert_eq!(power_curve(0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn power_curve_cubic_section() {
        let spec = TurbineSpec::default();
        let expected = 8.0 * (343.0 - 64.0) / (1000.0 - 64.0);
        assert_relative_eq!(power_curve(7.0, &spec).unwrap(), expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 2.384_615_384_615_384_6, max_relative = 1e-12);
    }

    #[test]
    fn power_curve_rejects_negative_speed() {
        assert_eq!(
            power_curve(-0.1, &TurbineSpec::default()),
            Err(WindError::NegativeSpeed(-0.1))
        );
    }

    #[test]
    fn turbine_spec_validation() {
        assert!(TurbineSpec::default().validate().is_ok());
        let bad = TurbineSpec {
            rated_speed_mps: 3.0,
            ..TurbineSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn layout_rows_and_spacing() {
        let layout = FarmLayout::rows(8, 2, 5.0 * 164.0);
        assert_eq!(layout.n_turbines(), 8);
        assert_eq!(layout.positions[4], (0.0, 820.0));
        assert!(layout.validate(164.0).is_ok());

        let cramped = FarmLayout::new(vec![(0.0, 0.0), (100.0, 0.0)]);
        assert!(cramped.validate(164.0).is_err());
        let odd = FarmLayout::rows(11, 2, 820.0);
        assert_eq!(odd.positions.iter().filter(|p| p.1 == 0.0).count(), 6);
    }

    #[test]
    fn farm_power_at_rated_and_below_cut_in() {
        let spec = TurbineSpec::default();
        let rated = WindField::constant(8, 3, 1.0, 10.0);
        let (total, per) = available_farm_power(&rated, &spec, 1).unwrap();
        assert_eq!(total, 64.0);
        assert_eq!(per.len(), 8);

        let calm = WindField::constant(8, 3, 1.0, 3.0);
        assert_eq!(available_farm_power(&calm, &spec, 0).unwrap().0, 0.0);
        assert!(matches!(
            available_farm_power(&calm, &spec, 3),
            Err(WindError::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn farm_power_is_additive() {
        let spec = TurbineSpec::default();
        let speeds = [3.0, 5.5, 7.0, 9.9, 10.0, 18.0, 25.0, 6.1];
        let field = WindField {
            dt: 1.0,
            speeds: speeds.iter().map(|v| vec![*v]).collect(),
        };
        let (total, _) = available_farm_power(&field, &spec, 0).unwrap();
        let independent: f64 = speeds.iter().map(|v| power_curve(*v, &spec).unwrap()).sum();
        assert_relative_eq!(total, independent, max_relative = 1e-15);
    }

    #[test]
    fn curtailment_distribution_cases() {
        let avail = [8.0; 8];
        assert_eq!(distribute_curtailment(64.0, &avail).unwrap(), avail.to_vec());
        assert_eq!(distribute_curtailment(100.0, &avail).unwrap(), avail.to_vec());
        assert_eq!(distribute_curtailment(32.0, &avail).unwrap(), vec![4.0; 8]);
        let exact = distribute_curtailment(30.0, &[8.0, 8.0, 8.0, 6.0]).unwrap();
        assert_eq!(exact, vec![8.0, 8.0, 8.0, 6.0]);
        let partial = distribute_curtailment(15.0, &[8.0, 8.0, 8.0, 6.0]).unwrap();
        assert_relative_eq!(partial.iter().sum::<f64>(), 15.0, max_relative = 1e-12);
        assert_relative_eq!(partial[3], 3.0, max_relative = 1e-12);
        assert!(distribute_curtailment(-1.0, &avail).is_err());
    }
}
