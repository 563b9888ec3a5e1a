mod common;

use offhub_core::pms::{allocate_sequence, allocate_synchronized};
use offhub_core::plants::{bess_apply, ramp_toward, Bess};
use offhub_core::wind::{distribute_curtailment, TurbineSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_hubs_keep_every_invariant(seed in any::<u64>()) {
        let sc = common::random_scenario(seed);
        let steps = common::check_invariants(&sc).map_err(TestCaseError::fail)?;
        prop_assert!(steps >= common::MIN_STEPS);
    }
}

proptest! {
    #[test]
    fn allocation_conserves_power(
        target in -10.0f64..120.0,
        ratings in prop::collection::vec(0.5f64..15.0, 1..10),
    ) {
        let total: f64 = ratings.iter().sum();
        let want = target.clamp(0.0, total);
        for res in [allocate_sequence(target, &ratings), allocate_synchronized(target, &ratings)] {
            let sum: f64 = res.targets.iter().sum();
            prop_assert!((sum - want).abs() <= 1e-9 * want.max(1.0));
            prop_assert_eq!(res.clamped, target > total);
            for (t, r) in res.targets.iter().zip(&ratings) {
                prop_assert!(*t >= 0.0 && *t <= r * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn ramps_never_overshoot(load in 0.0f64..=1.0, target in 0.0f64..=1.0, ramp in 1.0f64..1000.0, dt in 0.1f64..100.0) {
        let next = ramp_toward(load, target, ramp, dt);
        prop_assert!((next - load).abs() <= dt / ramp + 1e-15);
        prop_assert!((next - target).abs() <= (load - target).abs() + 1e-15);
    }

    #[test]
    fn battery_respects_rating_and_soc(
        requested in -60.0f64..60.0,
        soc in 0.1f64..=0.9,
        mwh in 0.5f64..300.0,
        eff in prop::sample::select(vec![1.0, 0.9]),
        dt_s in 0.5f64..600.0,
    ) {
        let b = Bess {
            power_rating_mw: 10.0,
            energy_capacity_mwh: mwh,
            soc,
            soc_min: 0.1,
            soc_max: 0.9,
            round_trip_efficiency: eff,
            apparent_rating_mva: 10.0,
        };
        let out = bess_apply(requested, &b, dt_s / 3600.0);
        prop_assert!(out.actual_mw.abs() <= 10.0 + 1e-12);
        prop_assert!(out.soc >= 0.1 - 1e-12 && out.soc <= 0.9 + 1e-12);
        prop_assert_eq!(out.clipped, out.actual_mw != requested);
        prop_assert!(out.actual_mw * requested >= 0.0);
    }

    #[test]
    fn curtailment_stays_under_both_bounds(
        setpoint in 0.0f64..80.0,
        speeds in prop::collection::vec(0.0f64..30.0, 1..12),
    ) {
        let t = TurbineSpec::default();
        let avail: Vec<f64> = speeds.iter().map(|v| t.power_at(*v)).collect();
        let total: f64 = avail.iter().sum();
        let set = distribute_curtailment(setpoint, &avail).unwrap();
        let sum: f64 = set.iter().sum();
        let bound = setpoint.min(total);
        prop_assert!((sum - bound).abs() <= 1e-9 * bound.max(1.0));
        for (s, a) in set.iter().zip(&avail) {
            prop_assert!(*s <= a + 1e-12 && *s >= 0.0);
        }
    }
}
