//! Year-long wind: hourly mean series, 2-hour turbulent blocks and their joins.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erfc;

use super::turbulence::Synthesizer;
use super::{FarmLayout, TurbineSpec, TurbulenceSpec, WindError, WindField};

pub const HOURS_PER_YEAR: usize = 8760;
pub const BLOCK_SECONDS: f64 = 7200.0;

/// Turbulence template used for every 2-hour block of an annual series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnualWindSpec {
    pub turbulence_intensity: f64,
    pub length_scale: f64,
    pub coherence_decay: f64,
    /// Linear cross-fade between consecutive blocks, seconds.
    pub crossfade_s: f64,
}

impl Default for AnnualWindSpec {
    fn default() -> Self {
        let t = TurbulenceSpec::default();
        Self {
            turbulence_intensity: t.turbulence_intensity,
            length_scale: t.length_scale,
            coherence_decay: t.coherence_decay,
            crossfade_s: 60.0,
        }
    }
}

/// Join 2-hour turbulent blocks whose means follow an hourly mean-speed series.
///
/// Block `b` covers hours `2b` and `2b + 1` and is centred on their average.
/// Each block gets its own random stream derived from `seed`, so the result
/// does not depend on how many blocks precede it. The first `crossfade_s`
/// seconds of a block blend linearly from the previous block's (periodic)
/// continuation into the new block.
pub fn assemble_annual(
    mean_speeds: &[f64],
    layout: &FarmLayout,
    spec: &AnnualWindSpec,
    dt_long: f64,
    seed: u64,
) -> Result<WindField, WindError> {
    if mean_speeds.len() < 2 {
        return Err(WindError::Config(format!(
            "annual mean series needs at least 2 hourly values, got {}",
            mean_speeds.len()
        )));
    }
    if let Some(v) = mean_speeds.iter().find(|v| !(**v >= 0.0)) {
        return Err(WindError::NegativeSpeed(*v));
    }
    if !(dt_long > 0.0) {
        return Err(WindError::Config(format!("dt_long must be positive, got {dt_long}")));
    }
    let steps_per_hour = (3600.0 / dt_long).round() as usize;
    if steps_per_hour == 0 || (steps_per_hour as f64 * dt_long - 3600.0).abs() > 1e-9 {
        return Err(WindError::Config(format!("dt_long {dt_long} s must divide one hour")));
    }
    if layout.positions.is_empty() {
        return Err(WindError::Layout("layout has no turbines".into()));
    }
    let n = layout.n_turbines();
    let n_steps = mean_speeds.len() * steps_per_hour;
    let mut speeds = vec![Vec::with_capacity(n_steps); n];
    let fade = if spec.crossfade_s > 0.0 {
        ((spec.crossfade_s / dt_long).round() as usize).max(1)
    } else {
        0
    };

    let template = TurbulenceSpec {
        mean_speed: 0.0,
        turbulence_intensity: spec.turbulence_intensity,
        length_scale: spec.length_scale,
        coherence_decay: spec.coherence_decay,
        seed,
    };
    template.validate()?;

    let full_len = 2 * steps_per_hour;
    let mut synth_full = Synthesizer::new(layout, full_len, dt_long);
    let mut synth_half: Option<Synthesizer> = None;
    let mut prev: Option<(f64, Vec<Vec<f64>>)> = None;

    for (b, hours) in mean_speeds.chunks(2).enumerate() {
        let mean = hours.iter().sum::<f64>() / hours.len() as f64;
        let len = hours.len() * steps_per_hour;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let fluct = if mean > 0.0 {
            let synth = if len == full_len {
                &mut synth_full
            } else {
                synth_half.get_or_insert_with(|| Synthesizer::new(layout, len, dt_long))
            };
            synth.fluctuations(&template, mean, &mut rng)
        } else {
            vec![vec![0.0; len]; n]
        };
        for (i, series) in speeds.iter_mut().enumerate() {
            for j in 0..len {
                let own = mean + fluct[i][j];
                let v = match &prev {
                    Some((pmean, pfluct)) if j < fade => {
                        let w = (j + 1) as f64 / (fade + 1) as f64;
                        let plen = pfluct[i].len();
                        let carried = pmean + pfluct[i][j % plen];
                        (1.0 - w) * carried + w * own
                    }
                    _ => own,
                };
                series.push(v.max(0.0));
            }
        }
        prev = Some((mean, fluct));
    }
    Ok(WindField { dt: dt_long, speeds })
}

/// Parameters of the synthetic hourly mean-wind year.
///
/// Hourly means are a Gaussian AR(1) process mapped through the normal CDF
/// onto a Weibull marginal (a Gaussian copula), so the year has both the
/// target speed distribution and multi-day calm and storm spells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanYearSpec {
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    /// e-folding time of the hourly autocorrelation.
    pub correlation_hours: f64,
    pub hours: usize,
    pub seed: u64,
}

impl Default for MeanYearSpec {
    fn default() -> Self {
        Self {
            weibull_shape: 2.0,
            weibull_scale: 11.5,
            correlation_hours: 30.0,
            hours: HOURS_PER_YEAR,
            seed: 2024,
        }
    }
}

pub fn synthetic_mean_year(spec: &MeanYearSpec) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phi = (-1.0 / spec.correlation_hours).exp();
    let innovation = (1.0 - phi * phi).sqrt();
    let mut z: f64 = StandardNormal.sample(&mut rng);
    (0..spec.hours)
        .map(|h| {
            if h > 0 {
                let e: f64 = StandardNormal.sample(&mut rng);
                z = phi * z + innovation * e;
            }
            // upper-tail probability, kept away from 0 so the log stays finite
            let tail = (0.5 * erfc(z / std::f64::consts::SQRT_2)).max(1e-300);
            spec.weibull_scale * (-tail.ln()).powf(1.0 / spec.weibull_shape)
        })
        .collect()
}

/// Mean farm output over the field as a fraction of installed power.
pub fn farm_capacity_factor(field: &WindField, turbine: &TurbineSpec) -> f64 {
    let steps = field.n_steps();
    if steps == 0 || field.n_turbines() == 0 {
        return 0.0;
    }
    let energy: f64 = field
        .speeds
        .iter()
        .flat_map(|s| s.iter())
        .map(|v| turbine.power_at(*v))
        .sum();
    energy / (steps as f64 * field.n_turbines() as f64 * turbine.rated_power_mw)
}

/// Bisect the Weibull scale so that `capacity_factor(year)` hits `target`.
///
/// `capacity_factor` receives the hourly series and must be non-decreasing in
/// the scale over `[lo, hi]`.
pub fn calibrate_weibull_scale<F>(
    template: &MeanYearSpec,
    target: f64,
    (mut lo, mut hi): (f64, f64),
    tolerance: f64,
    mut capacity_factor: F,
) -> Result<(f64, f64), WindError>
where
    F: FnMut(&[f64]) -> Result<f64, WindError>,
{
    let mut eval = |scale: f64| {
        let year = synthetic_mean_year(&MeanYearSpec {
            weibull_scale: scale,
            ..*template
        });
        capacity_factor(&year)
    };
    let (cf_lo, cf_hi) = (eval(lo)?, eval(hi)?);
    if !(cf_lo <= target && target <= cf_hi) {
        return Err(WindError::Config(format!(
            "target capacity factor {target} not bracketed by [{cf_lo:.4}, {cf_hi:.4}]"
        )));
    }
    let mut best = (lo, cf_lo);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let cf = eval(mid)?;
        best = (mid, cf);
        if (cf - target).abs() <= tolerance {
            break;
        }
        if cf < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
