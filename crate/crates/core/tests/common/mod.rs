//! Randomized scenarios and the per-step invariant checks shared by the
//! property tests and the acceptance run.

#![allow(dead_code)]

use std::sync::Arc;

use offhub_core::engine::{
    run, short_term_wind_field, DesignSpec, EventKind, EventSpec, EventTime, Scenario, Simulation, WindSetup,
    BALANCE_TOLERANCE_MW,
};
use offhub_core::plants::H2_NORMAL_DENSITY;
use offhub_core::pms::{Allocation, ControlConfig};
use offhub_core::wind::TurbulenceSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_STEPS: usize = 1000;

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> T {
    xs[rng.random_range(0..xs.len())]
}

/// A random but valid hub with at least [`MIN_STEPS`] steps of turbulent wind.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DesignSpec::initial();
    d.name = format!("random_{seed}");
    d.n_turbines = rng.random_range(2..=12);
    d.layout_rows = pick(&mut rng, &[1, 2]);
    d.ely_trains = rng.random_range(1..=8);
    d.ely_train_mw = rng.random_range(1.0..10.0);
    let any_ramp = rng.random_range(2.0..1000.0);
    d.ely_ramp_s = pick(&mut rng, &[11.0, 60.0, 706.0, any_ramp]);
    d.ely_nominal_nm3h = d.ely_train_mw * rng.random_range(150.0..250.0);
    d.fc_blocks = rng.random_range(1..=8);
    d.fc_block_mw = rng.random_range(1.0..10.0);
    d.fc_ramp_s = rng.random_range(2.0..30.0);
    d.fc_specific_consumption = rng.random_range(50.0..80.0);
    d.afe_mva = d.fc_block_mw * rng.random_range(1.0..1.5);
    d.bess_mw = rng.random_range(2.0..40.0);
    d.bess_mwh = rng.random_range(0.5..300.0);
    d.bess_mva = d.bess_mw;
    d.soc_min = rng.random_range(0.0..0.3);
    d.soc_max = rng.random_range(0.7..1.0);
    d.soc_initial = rng.random_range(d.soc_min..=d.soc_max);
    d.bess_efficiency = pick(&mut rng, &[1.0, 0.9]);
    if rng.random_bool(0.3) {
        let cap = rng.random_range(50.0..5000.0);
        d.tank_capacity_kg = Some(cap);
        d.tank_initial_kg = rng.random_range(0.0..cap);
        d.tank_reserve_kg = rng.random_range(0.0..0.2) * cap;
    } else {
        d.tank_initial_kg = rng.random_range(-1000.0..1000.0);
    }
    for l in &mut d.loads {
        l.active_power_mw *= rng.random_range(0.5..1.5);
        l.priority = rng.random_range(1..=3);
    }

    let mut control = ControlConfig::default();
    control.ely_allocation = pick(&mut rng, &[Allocation::Sequence, Allocation::Synchronized]);
    control.fc_allocation = pick(&mut rng, &[Allocation::Sequence, Allocation::Synchronized]);
    control.soc_gain = rng.random_range(0.0..50.0);
    control.hysteresis_mw = rng.random_range(0.0..2.0);
    control.warm_start = rng.random_bool(0.5);

    let dt = pick(&mut rng, &[0.5, 1.0, 2.0, 10.0]);
    let steps = rng.random_range(MIN_STEPS..MIN_STEPS + 500);
    let setup = WindSetup {
        turbulence: TurbulenceSpec {
            mean_speed: rng.random_range(2.0..18.0),
            turbulence_intensity: rng.random_range(0.02..0.25),
            seed: rng.random(),
            ..TurbulenceSpec::default()
        },
        ..WindSetup::default()
    };
    let wind = short_term_wind_field(&d, &setup, dt, steps as f64 * dt).expect("valid random wind");
    let mut sc = Scenario::new(d.name.clone(), d, control, Arc::new(wind));
    sc.seed = seed;
    for _ in 0..rng.random_range(0..=2) {
        let kind = if rng.random_bool(0.5) {
            EventKind::TripWindTurbine(None)
        } else {
            EventKind::TripLoad(None)
        };
        let time = if rng.random_bool(0.5) {
            EventTime::Worst(kind.worst_direction())
        } else {
            EventTime::At(rng.random_range(0..steps) as f64 * dt)
        };
        sc.events.push(EventSpec { time, kind });
    }
    sc
}

/// Step the scenario by hand and check every exact invariant; then rerun
/// through [`run`] twice and require bit-identical traces.
pub fn check_invariants(sc: &Scenario) -> Result<usize, String> {
    let first = run(sc).map_err(|e| format!("run failed: {e}"))?;
    let second = run(sc).map_err(|e| format!("rerun failed: {e}"))?;
    if first.trace != second.trace {
        return Err("reruns differ".into());
    }
    // replay on the resolved event times so the Simulation API can step it
    let mut resolved = sc.clone();
    resolved.events = first
        .events
        .iter()
        .map(|e| EventSpec {
            time: EventTime::At(e.t),
            kind: e.kind,
        })
        .collect();

    let d = &sc.design;
    let dt_h = sc.dt / 3600.0;
    let kg_per_mwh = d.ely_nominal_nm3h * H2_NORMAL_DENSITY / d.ely_train_mw;
    let mut sim = Simulation::new(&resolved).map_err(|e| e.to_string())?;
    let mut level = d.tank_initial_kg;
    let mut throughput = d.tank_initial_kg.abs();
    let mut k = 0;
    while !sim.finished() {
        let before: Vec<f64> = sim.state().ely.iter().map(|u| u.load).collect();
        let before_fc: Vec<f64> = sim.state().fc.iter().map(|u| u.load).collect();
        let rec = sim.step();
        if rec != first.trace[k] {
            return Err(format!("step {k}: stepped record differs from run()"));
        }
        let r = rec.balance_residual();
        if !(r.abs() <= BALANCE_TOLERANCE_MW) {
            return Err(format!("step {k}: balance residual {r:e} MW"));
        }
        if rec.soc < d.soc_min - 1e-12 || rec.soc > d.soc_max + 1e-12 {
            return Err(format!("step {k}: soc {} outside [{}, {}]", rec.soc, d.soc_min, d.soc_max));
        }
        if rec.bess_p.abs() > d.bess_mw * (1.0 + 1e-12) {
            return Err(format!("step {k}: bess {} beyond rating", rec.bess_p));
        }
        let warm = k == 0 && sc.control.warm_start;
        if !warm && !sim.last_step_forced() {
            let st = sim.state();
            for (i, (u, b)) in st.ely.iter().zip(&before).enumerate() {
                if (u.load - b).abs() > sc.dt / u.ramp_time_full_s + 1e-12 {
                    return Err(format!("step {k}: electrolyzer {i} moved {} > ramp", u.load - b));
                }
            }
            for (i, (u, b)) in st.fc.iter().zip(&before_fc).enumerate() {
                if (u.load - b).abs() > sc.dt / u.ramp_time_full_s + 1e-12 {
                    return Err(format!("step {k}: fuel cell {i} moved {} > ramp", u.load - b));
                }
            }
        }
        let produced = kg_per_mwh * rec.ely_p * dt_h;
        let consumed = d.fc_specific_consumption * rec.fc_p * dt_h;
        throughput += produced + consumed;
        match d.tank_capacity_kg {
            None => {
                level += produced - consumed;
                if (rec.h2_level - level).abs() > 1e-9 * throughput.max(1.0) {
                    return Err(format!("step {k}: h2 level {} vs mass balance {level}", rec.h2_level));
                }
            }
            Some(cap) => {
                if rec.h2_level < -1e-9 || rec.h2_level > cap * (1.0 + 1e-12) {
                    return Err(format!("step {k}: bounded tank level {} outside [0, {cap}]", rec.h2_level));
                }
            }
        }
        k += 1;
    }
    let end = first.trace.last().map(|r| r.h2_level).unwrap_or(d.tank_initial_kg);
    let books = d.tank_initial_kg + first.h2_produced_kg - first.h2_consumed_kg - first.h2_spilled_kg;
    if (end - books).abs() > 1e-9 * throughput.max(1.0) {
        return Err(format!("hydrogen books {books} vs final level {end}"));
    }
    Ok(k)
}
