//! Year-long and short-term KPIs computed from a trace, plus side-by-side
//! design reports.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{DesignSpec, StepRecord, SHUTDOWN_EPS_MW};
use crate::pms::ControlConfig;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("empty series")]
    Empty,
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Fraction of (equal-length) steps with output above `eps`.
pub fn utilization_rate(series: &[f64], eps: f64) -> Result<f64, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(series.iter().filter(|p| **p > eps).count() as f64 / series.len() as f64)
}

/// Mean output over rated output.
pub fn capacity_factor(series: &[f64], rated: f64) -> f64 {
    if series.is_empty() || rated <= 0.0 {
        return 0.0;
    }
    (series.iter().sum::<f64>() / (rated * series.len() as f64)).clamp(0.0, 1.0)
}

/// Consumed energy over rated energy for the whole period (the same ratio as
/// [`capacity_factor`], used for consuming plants).
pub fn load_factor(series: &[f64], rated: f64) -> f64 {
    capacity_factor(series, rated)
}

/// Longest contiguous run with output at or below `eps`, in days.
pub fn longest_shutdown(series: &[f64], eps: f64, dt_s: f64) -> f64 {
    let mut best = 0usize;
    let mut run = 0usize;
    for p in series {
        if *p <= eps {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best as f64 * dt_s / 86_400.0
}

/// Energy lost to curtailment, GWh.
pub fn curtailed_energy(avail: &[f64], actual: &[f64], dt_s: f64) -> Result<f64, MetricsError> {
    if avail.len() != actual.len() {
        return Err(MetricsError::LengthMismatch(avail.len(), actual.len()));
    }
    let mwh: f64 = avail
        .iter()
        .zip(actual)
        .map(|(a, b)| (a - b).max(0.0))
        .sum::<f64>()
        * dt_s
        / 3600.0;
    Ok(mwh / 1000.0)
}

/// Largest requested charge and discharge, as positive magnitudes.
pub fn bess_peaks(trace: &[StepRecord]) -> (f64, f64) {
    trace.iter().fold((0.0, 0.0), |(c, d), r| {
        (c.max(-r.bess_requested), d.max(r.bess_requested))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindKpi {
    pub utilization_rate: f64,
    pub longest_shutdown_days: f64,
    /// Delivered energy over rated energy.
    pub capacity_factor: f64,
    /// Available (uncurtailed) energy over rated energy.
    pub available_capacity_factor: f64,
    pub curtailed_gwh: f64,
    pub available_gwh: f64,
    pub curtailed_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantKpi {
    pub utilization_rate: f64,
    pub longest_shutdown_days: f64,
    pub capacity_factor: f64,
    pub load_factor: f64,
    pub energy_gwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BessKpi {
    pub max_charge_mw: f64,
    pub max_discharge_mw: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    /// Share of steps with SOC within 0.05 of target.
    pub soc_in_band: f64,
    /// Deepest SOC excursion below target.
    pub max_soc_below_target: f64,
    pub clipped_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KpiReport {
    pub duration_h: f64,
    pub wind: WindKpi,
    pub ely: PlantKpi,
    pub fc: PlantKpi,
    pub bess: BessKpi,
    pub h2_net_kg: f64,
    pub h2_min_level_kg: f64,
    pub max_abs_freq_dev_hz: f64,
    pub shed_mwh: f64,
}

fn plant_kpi(series: &[f64], rated: f64, dt: f64) -> PlantKpi {
    let cf = capacity_factor(series, rated);
    PlantKpi {
        utilization_rate: utilization_rate(series, SHUTDOWN_EPS_MW).unwrap_or(0.0),
        longest_shutdown_days: longest_shutdown(series, SHUTDOWN_EPS_MW, dt),
        capacity_factor: cf,
        load_factor: cf,
        energy_gwh: series.iter().sum::<f64>() * dt / 3.6e6,
    }
}

impl KpiReport {
    pub fn from_trace(trace: &[StepRecord], design: &DesignSpec, control: &ControlConfig, dt: f64) -> Self {
        if trace.is_empty() {
            return Self::default();
        }
        let col = |f: fn(&StepRecord) -> f64| trace.iter().map(f).collect::<Vec<f64>>();
        let avail = col(|r| r.wind_avail);
        let actual = col(|r| r.wind_actual);
        let wind_rated = design.wind_mw();
        let curtailed_gwh = curtailed_energy(&avail, &actual, dt).unwrap_or(0.0);
        let available_gwh = avail.iter().sum::<f64>() * dt / 3.6e6;
        let wind = WindKpi {
            utilization_rate: utilization_rate(&actual, SHUTDOWN_EPS_MW).unwrap_or(0.0),
            longest_shutdown_days: longest_shutdown(&actual, SHUTDOWN_EPS_MW, dt),
            capacity_factor: capacity_factor(&actual, wind_rated),
            available_capacity_factor: capacity_factor(&avail, wind_rated),
            curtailed_gwh,
            available_gwh,
            curtailed_fraction: if available_gwh > 0.0 { curtailed_gwh / available_gwh } else { 0.0 },
        };
        let (max_charge_mw, max_discharge_mw) = bess_peaks(trace);
        let target = control.soc_target;
        let bess = BessKpi {
            max_charge_mw,
            max_discharge_mw,
            soc_min: trace.iter().map(|r| r.soc).fold(f64::INFINITY, f64::min),
            soc_max: trace.iter().map(|r| r.soc).fold(f64::NEG_INFINITY, f64::max),
            soc_in_band: trace.iter().filter(|r| (r.soc - target).abs() <= 0.05 + 1e-12).count() as f64
                / trace.len() as f64,
            max_soc_below_target: trace.iter().map(|r| target - r.soc).fold(0.0, f64::max),
            clipped_steps: trace.iter().filter(|r| r.clipped).count(),
        };
        KpiReport {
            duration_h: trace.len() as f64 * dt / 3600.0,
            wind,
            ely: plant_kpi(&col(|r| r.ely_p), design.ely_mw(), dt),
            fc: plant_kpi(&col(|r| r.fc_p), design.fc_mw(), dt),
            bess,
            h2_net_kg: trace.last().map(|r| r.h2_level).unwrap_or(0.0) - design.tank_initial_kg,
            h2_min_level_kg: trace.iter().map(|r| r.h2_level).fold(f64::INFINITY, f64::min),
            max_abs_freq_dev_hz: trace.iter().map(|r| r.freq_dev.abs()).fold(0.0, f64::max),
            shed_mwh: trace.iter().map(|r| r.shed).sum::<f64>() * dt / 3600.0,
        }
    }

    /// Flat `(key, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("duration_h", self.duration_h),
            ("wpp.utilization_rate", self.wind.utilization_rate),
            ("wpp.longest_shutdown_days", self.wind.longest_shutdown_days),
            ("wpp.capacity_factor", self.wind.capacity_factor),
            ("wpp.available_capacity_factor", self.wind.available_capacity_factor),
            ("wpp.curtailed_energy_gwh", self.wind.curtailed_gwh),
            ("wpp.available_energy_gwh", self.wind.available_gwh),
            ("wpp.curtailed_fraction", self.wind.curtailed_fraction),
            ("ely.utilization_rate", self.ely.utilization_rate),
            ("ely.longest_shutdown_days", self.ely.longest_shutdown_days),
            ("ely.load_factor", self.ely.load_factor),
            ("ely.energy_gwh", self.ely.energy_gwh),
            ("fc.utilization_rate", self.fc.utilization_rate),
            ("fc.longest_shutdown_days", self.fc.longest_shutdown_days),
            ("fc.capacity_factor", self.fc.capacity_factor),
            ("fc.energy_gwh", self.fc.energy_gwh),
            ("bess.max_charge_mw", self.bess.max_charge_mw),
            ("bess.max_discharge_mw", self.bess.max_discharge_mw),
            ("bess.soc_min", self.bess.soc_min),
            ("bess.soc_max", self.bess.soc_max),
            ("bess.soc_in_band", self.bess.soc_in_band),
            ("bess.max_soc_below_target", self.bess.max_soc_below_target),
            ("bess.clipped_steps", self.bess.clipped_steps as f64),
            ("h2.net_kg", self.h2_net_kg),
            ("h2.min_level_kg", self.h2_min_level_kg),
            ("freq.max_abs_dev_hz", self.max_abs_freq_dev_hz),
            ("load.shed_mwh", self.shed_mwh),
        ]
    }
}

/// Aligned text table, one column per design.
pub fn summarize_designs(reports: &[(&str, &KpiReport)]) -> String {
    let keys: Vec<&str> = KpiReport::default().entries().iter().map(|e| e.0).collect();
    let width = keys.iter().map(|k| k.len()).max().unwrap_or(0);
    let cols: Vec<Vec<String>> = reports
        .iter()
        .map(|(_, r)| r.entries().iter().map(|(_, v)| format_value(*v)).collect())
        .collect();
    let col_w: Vec<usize> = reports
        .iter()
        .zip(&cols)
        .map(|((name, _), c)| c.iter().map(|s| s.len()).max().unwrap_or(0).max(name.len()))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:width$}", "kpi");
    for ((name, _), w) in reports.iter().zip(&col_w) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for (row, key) in keys.iter().enumerate() {
        let _ = write!(out, "{key:width$}");
        for (c, w) in cols.iter().zip(&col_w) {
            let _ = write!(out, "  {:>w$}", c[row]);
        }
        out.push('\n');
    }
    out
}

/// CSV with a `kpi` column and one column per design.
pub fn summarize_designs_csv(reports: &[(&str, &KpiReport)]) -> String {
    let mut out = String::from("kpi");
    for (name, _) in reports {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let entries: Vec<_> = reports.iter().map(|(_, r)| r.entries()).collect();
    for (row, (key, _)) in KpiReport::default().entries().iter().enumerate() {
        out.push_str(key);
        for e in &entries {
            out.push(',');
            out.push_str(&format_value(e[row].1));
        }
        out.push('\n');
    }
    out
}

pub(crate) fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn utilization_examples() {
        assert_eq!(utilization_rate(&[3.0; 10], 1e-3).unwrap(), 1.0);
        let square: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 5.0 } else { 0.0 }).collect();
        assert_eq!(utilization_rate(&square, 1e-3).unwrap(), 0.5);
        assert_eq!(utilization_rate(&[], 1e-3), Err(MetricsError::Empty));
    }

    #[test]
    fn capacity_and_load_factor_examples() {
        assert_eq!(capacity_factor(&[64.0; 5], 64.0), 1.0);
        assert_eq!(capacity_factor(&[0.0; 5], 64.0), 0.0);
        assert_eq!(load_factor(&[17.5; 4], 35.0), 0.5);
    }

    #[test]
    fn shutdown_examples() {
        assert_eq!(longest_shutdown(&[1.0; 48], 1e-3, 3600.0), 0.0);
        let mut s = vec![1.0; 100];
        s[10..46].fill(0.0);
        s[60..70].fill(0.0);
        assert_relative_eq!(longest_shutdown(&s, 1e-3, 3600.0), 1.5);
    }

    #[test]
    fn curtailment_examples() {
        let a = vec![10.0; 8760];
        assert_eq!(curtailed_energy(&a, &a, 3600.0).unwrap(), 0.0);
        let b = vec![8.5; 8760];
        assert_relative_eq!(curtailed_energy(&a, &b, 3600.0).unwrap(), 13.14, max_relative = 1e-12);
        assert!(curtailed_energy(&a, &b[..10], 3600.0).is_err());
    }

    #[test]
    fn peaks_use_requested_power() {
        let mut trace = vec![StepRecord::default(); 5];
        assert_eq!(bess_peaks(&trace), (0.0, 0.0));
        trace[1].bess_requested = 18.8;
        trace[1].bess_p = 10.0;
        trace[3].bess_requested = -13.1;
        assert_eq!(bess_peaks(&trace), (13.1, 18.8));
        trace.reverse();
        assert_eq!(bess_peaks(&trace), (13.1, 18.8));
    }

    #[test]
    fn tables_have_one_column_per_design() {
        let r = KpiReport {
            duration_h: 2.0,
            ..Default::default()
        };
        let text = summarize_designs(&[("design1", &r)]);
        assert!(text.lines().next().unwrap().ends_with("design1"));
        assert_eq!(text.lines().count(), r.entries().len() + 1);
        let csv = summarize_designs_csv(&[("a", &r), ("b", &r)]);
        assert!(csv.starts_with("kpi,a,b\nduration_h,2,2\n"));
        for line in csv.lines().skip(1) {
            let cells: Vec<_> = line.split(',').collect();
            assert_eq!(cells[1], cells[2]);
        }
    }
}
