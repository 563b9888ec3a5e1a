//! Trace CSV, `key = value` summaries and KPI rows.

use std::fmt::Write as _;
use std::io::Write;

use crate::metrics::format_value;

use super::{EngineError, RunResult, StepRecord};

pub const TRACE_HEADER: &str = "t_s,wind_avail_mw,wind_actual_mw,ely_p_mw,fc_p_mw,load_p_mw,bess_p_mw,\
bess_requested_mw,q_load_mvar,q_ely_mvar,q_afe_mvar,q_bess_mvar,soc,h2_level_kg,freq_dev_hz,\
curtailed_mw,shed_mw,clipped";

fn io(e: std::io::Error) -> EngineError {
    EngineError::Io(e.to_string())
}

/// Every `stride`-th record (1 writes all), shortest round-trip formatting.
pub fn write_trace_csv<W: Write>(trace: &[StepRecord], stride: usize, out: W) -> Result<(), EngineError> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "{TRACE_HEADER}").map_err(io)?;
    for r in trace.iter().step_by(stride.max(1)) {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.wind_avail,
            r.wind_actual,
            r.ely_p,
            r.fc_p,
            r.load_p,
            r.bess_p,
            r.bess_requested,
            r.q_load,
            r.q_ely,
            r.q_afe,
            r.q_bess,
            r.soc,
            r.h2_level,
            r.freq_dev,
            r.curtailed,
            r.shed,
            u8::from(r.clipped)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Machine-parseable `key = value` block describing one run.
pub fn summary_text(r: &RunResult) -> String {
    let d = &r.design;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("run.name", r.name.clone());
    kv("run.seed", r.seed.to_string());
    kv("run.dt_s", format_value(r.dt));
    kv("run.steps", r.trace.len().to_string());
    kv("design.name", d.name.clone());
    kv("design.wind_mw", format_value(d.wind_mw()));
    kv("design.n_turbines", d.n_turbines.to_string());
    kv("design.ely_mw", format_value(d.ely_mw()));
    kv("design.ely_trains", d.ely_trains.to_string());
    kv("design.ely_ramp_s", format_value(d.ely_ramp_s));
    kv("design.fc_mw", format_value(d.fc_mw()));
    kv("design.fc_blocks", d.fc_blocks.to_string());
    kv("design.bess_mw", format_value(d.bess_mw));
    kv("design.bess_mwh", format_value(d.bess_mwh));
    kv("control.ely_allocation", r.control.ely_allocation.as_str().into());
    for (k, v) in r.kpis.entries() {
        kv(&format!("kpi.{k}"), format_value(v));
    }
    kv("h2.produced_kg", format_value(r.h2_produced_kg));
    kv("h2.consumed_kg", format_value(r.h2_consumed_kg));
    kv("h2.spilled_kg", format_value(r.h2_spilled_kg));
    kv("run.forced_steps", r.forced_steps.len().to_string());
    for (i, e) in r.events.iter().enumerate() {
        kv(
            &format!("event.{i}"),
            format!("{} index={} t_s={} lost_mw={}", e.kind.label(), e.index, e.t, format_value(e.lost_mw)),
        );
    }
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    kv("ely.unit_utilization", join(&r.ely_unit_utilization));
    kv("fc.unit_utilization", join(&r.fc_unit_utilization));
    s
}

/// Header plus one row per run.
pub fn write_kpi_csv<W: Write>(results: &[&RunResult], out: W) -> Result<(), EngineError> {
    let mut w = std::io::BufWriter::new(out);
    let keys: Vec<&str> = crate::metrics::KpiReport::default().entries().iter().map(|e| e.0).collect();
    writeln!(w, "name,{}", keys.join(",")).map_err(io)?;
    for r in results {
        let vals: Vec<String> = r.kpis.entries().iter().map(|(_, v)| format_value(*v)).collect();
        writeln!(w, "{},{}", r.name, vals.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}
