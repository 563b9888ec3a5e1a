//! Jensen (top-hat) wake deficits along a fixed mean wind direction.

use super::{FarmLayout, TurbineSpec, WindError, WindField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeModel {
    pub enabled: bool,
    pub thrust_coefficient: f64,
    /// Wake expansion coefficient `k`.
    pub decay: f64,
    /// Direction the wind blows towards, degrees counter-clockwise from +x.
    /// The default (90) carries the front row's wakes onto the back row.
    pub direction_deg: f64,
}

impl Default for WakeModel {
    fn default() -> Self {
        Self {
            enabled: true,
            thrust_coefficient: 0.8,
            decay: 0.05,
            direction_deg: 90.0,
        }
    }
}

/// Fractional speed deficit a distance `x` behind a rotor of radius `r`,
/// for a downstream rotor fully inside the wake.
pub fn jensen_deficit(thrust_coefficient: f64, decay: f64, x: f64, r: f64) -> f64 {
    (1.0 - (1.0 - thrust_coefficient).sqrt()) / (1.0 + decay * x / r).powi(2)
}

/// Area of intersection of two circles with radii `r1`, `r2` and centre distance `d`.
fn overlap_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let (small, large) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if d <= large - small {
        return std::f64::consts::PI * small * small;
    }
    let a1 = r1 * r1 * ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = r2 * r2 * ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    a1 + a2 - 0.5 * k.sqrt()
}

/// Combined steady deficit per turbine (root-sum-square of upstream wakes,
/// each weighted by the swept-area overlap).
pub(crate) fn turbine_deficits(layout: &FarmLayout, spec: &TurbineSpec, wake: &WakeModel) -> Vec<f64> {
    let n = layout.n_turbines();
    if !wake.enabled {
        return vec![0.0; n];
    }
    let r = spec.rotor_radius_m();
    let (uy, ux) = wake.direction_deg.to_radians().sin_cos();
    let rotor_area = std::f64::consts::PI * r * r;
    (0..n)
        .map(|j| {
            let (xj, yj) = layout.positions[j];
            let sum_sq: f64 = (0..n)
                .filter(|&i| i != j)
                .map(|i| {
                    let (xi, yi) = layout.positions[i];
                    let (dx, dy) = (xj - xi, yj - yi);
                    let along = dx * ux + dy * uy;
                    if along <= 1e-9 {
                        return 0.0;
                    }
                    let lateral = (dx * uy - dy * ux).abs();
                    let wake_radius = r + wake.decay * along;
                    let frac = overlap_area(wake_radius, r, lateral) / rotor_area;
                    let d = jensen_deficit(wake.thrust_coefficient, wake.decay, along, r) * frac;
                    d * d
                })
                .sum();
            sum_sq.sqrt().min(1.0)
        })
        .collect()
}

/// Scale every turbine series by its steady wake deficit.
pub fn apply_wake(
    field: &WindField,
    layout: &FarmLayout,
    spec: &TurbineSpec,
    wake: &WakeModel,
) -> Result<WindField, WindError> {
    if field.n_turbines() != layout.n_turbines() {
        return Err(WindError::Config(format!(
            "field has {} turbines but layout has {}",
            field.n_turbines(),
            layout.n_turbines()
        )));
    }
    let deficits = turbine_deficits(layout, spec, wake);
    let speeds = field
        .speeds
        .iter()
        .zip(&deficits)
        .map(|(series, d)| {
            if *d == 0.0 {
                series.clone()
            } else {
                series.iter().map(|v| v * (1.0 - d)).collect()
            }
        })
        .collect();
    Ok(WindField { dt: field.dt, speeds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn deficit_five_diameters_downstream() {
        let spec = TurbineSpec::default();
        let d = spec.rotor_diameter_m;
        let layout = FarmLayout::new(vec![(0.0, 0.0), (0.0, 5.0 * d)]);
        let field = WindField::constant(2, 4, 1.0, 10.0);
        let waked = apply_wake(&field, &layout, &spec, &WakeModel::default()).unwrap();
        let expected = (1.0 - 0.2_f64.sqrt()) / 2.25;
        assert_relative_eq!(expected, 0.245_682_846_444_463_2, max_relative = 1e-12);
        assert_eq!(waked.speeds[0], vec![10.0; 4]);
        assert_relative_eq!(waked.speeds[1][0], 10.0 * (1.0 - expected), max_relative = 1e-12);
    }

    #[test]
    fn single_turbine_and_disabled_wake_pass_through() {
        let spec = TurbineSpec::default();
        let field = WindField::constant(1, 3, 1.0, 11.0);
        let one = FarmLayout::new(vec![(0.0, 0.0)]);
        assert_eq!(apply_wake(&field, &one, &spec, &WakeModel::default()).unwrap(), field);

        let farm = FarmLayout::rows(8, 2, 820.0);
        let field8 = WindField::constant(8, 3, 1.0, 11.0);
        let off = WakeModel {
            enabled: false,
            ..WakeModel::default()
        };
        assert_eq!(apply_wake(&field8, &farm, &spec, &off).unwrap(), field8);
    }

    #[test]
    fn default_layout_wakes_only_back_row() {
        let spec = TurbineSpec::default();
        let farm = FarmLayout::rows(8, 2, 820.0);
        let deficits = turbine_deficits(&farm, &spec, &WakeModel::default());
        assert!(deficits[..4].iter().all(|d| *d == 0.0));
        for d in &deficits[4..] {
            assert_relative_eq!(*d, 0.245_682_846_444_463_2, max_relative = 1e-12);
        }
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let spec = TurbineSpec::default();
        let field = WindField::constant(3, 3, 1.0, 11.0);
        let farm = FarmLayout::rows(8, 2, 820.0);
        assert!(apply_wake(&field, &farm, &spec, &WakeModel::default()).is_err());
    }

    #[test]
    fn overlap_area_limits() {
        let pi = std::f64::consts::PI;
        assert_eq!(overlap_area(1.0, 1.0, 3.0), 0.0);
        assert_relative_eq!(overlap_area(2.0, 1.0, 0.5), pi, max_relative = 1e-12);
        // two unit circles one radius apart: 2*pi/3 - sqrt(3)/2
        assert_relative_eq!(
            overlap_area(1.0, 1.0, 1.0),
            2.0 * pi / 3.0 - 3f64.sqrt() / 2.0,
            max_relative = 1e-12
        );
    }
}
