use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use offhub_core::engine::{
    annual_wind_field, reference_wind_field, run, run_suite, run_year_on, AnnualInput, DesignSpec, Scenario,
    ANNUAL_DT_S, ANNUAL_ELY_RAMP_S,
};
use offhub_core::ControlConfig;

fn short_term(c: &mut Criterion) {
    let design = DesignSpec::initial();
    let wind = Arc::new(reference_wind_field(&design).unwrap());
    let control = ControlConfig::default();
    let sc = Scenario::new("S1", design.clone(), control.clone(), wind.clone());

    let mut g = c.benchmark_group("short_term");
    g.sample_size(20);
    g.bench_function("wind_field", |b| b.iter(|| reference_wind_field(&design).unwrap()));
    g.bench_function("s1_run", |b| b.iter(|| run(&sc).unwrap()));
    g.bench_function("suite", |b| b.iter(|| run_suite(&design, &control, wind.clone()).unwrap()));
    g.finish();
}

fn annual(c: &mut Criterion) {
    let mut design = DesignSpec::design1();
    design.ely_ramp_s = ANNUAL_ELY_RAMP_S;
    let input = AnnualInput::bundled();
    let field = Arc::new(annual_wind_field(&design, &input, ANNUAL_DT_S).unwrap());
    let control = ControlConfig::default();

    let mut g = c.benchmark_group("annual");
    g.sample_size(10);
    g.bench_function("wind_field", |b| b.iter(|| annual_wind_field(&design, &input, ANNUAL_DT_S).unwrap()));
    g.bench_function("design1_year", |b| {
        b.iter(|| run_year_on(&design, field.clone(), &control, input.seed).unwrap())
    });
    g.finish();
}

criterion_group!(benches, short_term, annual);
criterion_main!(benches);
