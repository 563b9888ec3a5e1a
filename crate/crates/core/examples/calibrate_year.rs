//! Regenerates `assets/annual_mean_wind.csv`.
//!
//! The Weibull scale of the hourly means is bisected until the Design 1 farm,
//! with turbulence and wakes laid over the year, reaches the target capacity
//! factor. Run with `cargo run --release -p offhub-core --example calibrate_year`.

use std::fs::File;
use std::io::BufWriter;

use offhub_core::engine::{annual_wind_field, AnnualInput, DesignSpec, ANNUAL_DT_S, ANNUAL_SEED};
use offhub_core::wind::{
    calibrate_weibull_scale, farm_capacity_factor, read_annual_means, write_annual_means, MeanYearSpec, WindError,
};

const TARGET_CF: f64 = 0.51;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = DesignSpec::design1();
    let template = MeanYearSpec {
        seed: ANNUAL_SEED,
        ..MeanYearSpec::default()
    };
    let cf_of = |means: &[f64]| -> Result<f64, WindError> {
        let input = AnnualInput::new(means.to_vec(), ANNUAL_SEED);
        let field = annual_wind_field(&design, &input, ANNUAL_DT_S).map_err(|e| WindError::Config(e.to_string()))?;
        Ok(farm_capacity_factor(&field, &design.turbine))
    };
    let (scale, cf) = calibrate_weibull_scale(&template, TARGET_CF, (9.0, 14.0), 5e-4, cf_of)?;
    let means = offhub_core::wind::synthetic_mean_year(&MeanYearSpec {
        weibull_scale: scale,
        ..template
    });

    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");
    let path = format!("{dir}/annual_mean_wind.csv");
    write_annual_means(&means, BufWriter::new(File::create(&path)?))?;
    // the file stores 4 decimals; report the factor of what was written
    let stored = read_annual_means(File::open(&path)?)?;
    let stored_cf = cf_of(&stored)?;
    let mean = stored.iter().sum::<f64>() / stored.len() as f64;
    println!("weibull scale {scale:.4} m/s, bisection cf {cf:.4}, stored cf {stored_cf:.4}, mean {mean:.3} m/s");
    Ok(())
}
