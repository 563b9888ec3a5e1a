//! Multivariate spectral synthesis of correlated turbine inflow.
//!
//! Each turbine sees the same one-point Kaimal spectrum; the cross-spectral
//! matrix is that spectrum scaled by an exponential (Davenport) coherence
//! `exp(-a f d / V)`. Per frequency bin the coherence matrix is factorised
//! and driven by independent random phases, then the series are recovered
//! with one inverse FFT per turbine.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{FarmLayout, TurbineSpec, WindError, WindField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceSpec {
    pub mean_speed: f64,
    pub turbulence_intensity: f64,
    /// Kaimal integral length scale in metres.
    pub length_scale: f64,
    /// Coherence decay `a` in `exp(-a f d / V)`.
    pub coherence_decay: f64,
    pub seed: u64,
}

impl Default for TurbulenceSpec {
    fn default() -> Self {
        Self {
            mean_speed: 10.0,
            turbulence_intensity: 0.12,
            length_scale: 340.0,
            coherence_decay: 12.0,
            seed: 0,
        }
    }
}

impl TurbulenceSpec {
    pub fn validate(&self) -> Result<(), WindError> {
        if !(self.mean_speed >= 0.0) {
            return Err(WindError::Config(format!("mean speed {} < 0", self.mean_speed)));
        }
        if !(0.0..1.0).contains(&self.turbulence_intensity) {
            return Err(WindError::Config(format!(
                "turbulence intensity {} outside [0, 1)",
                self.turbulence_intensity
            )));
        }
        if !(self.length_scale > 0.0) {
            return Err(WindError::Config("length scale must be positive".into()));
        }
        if !(self.coherence_decay >= 0.0) {
            return Err(WindError::Config("coherence decay must be non-negative".into()));
        }
        Ok(())
    }
}

/// One-sided Kaimal spectrum of the longitudinal component, (m/s)^2/Hz.
pub fn kaimal_psd(f: f64, sigma: f64, length_scale: f64, mean_speed: f64) -> f64 {
    let tl = length_scale / mean_speed;
    4.0 * sigma * sigma * tl / (1.0 + 6.0 * f * tl).powf(5.0 / 3.0)
}

/// Synthesize a correlated per-turbine speed field.
///
/// The zero-frequency bin is left empty, so every series has a sample mean of
/// exactly `mean_speed` before negative excursions are clipped to zero.
pub fn synthesize_wind_field(
    layout: &FarmLayout,
    turb: &TurbulenceSpec,
    dt: f64,
    duration: f64,
) -> Result<WindField, WindError> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(WindError::Config(format!(
            "dt ({dt}) and duration ({duration}) must be positive"
        )));
    }
    if duration < dt {
        return Err(WindError::Config(format!("duration {duration} s is shorter than dt {dt} s")));
    }
    turb.validate()?;
    if layout.positions.is_empty() {
        return Err(WindError::Layout("layout has no turbines".into()));
    }
    let n_steps = (duration / dt + 1e-9).floor() as usize;
    let mut synth = Synthesizer::new(layout, n_steps, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(turb.seed);
    let fluct = synth.fluctuations(turb, turb.mean_speed, &mut rng);
    let speeds = fluct
        .into_iter()
        .map(|u| u.into_iter().map(|x| (turb.mean_speed + x).max(0.0)).collect())
        .collect();
    Ok(WindField { dt, speeds })
}

/// Reusable synthesis state for a fixed layout and block length.
pub(crate) struct Synthesizer {
    distances: Vec<f64>,
    n_turbines: usize,
    n_steps: usize,
    dt: f64,
    ifft: Arc<dyn Fft<f64>>,
    spectrum: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
}

impl Synthesizer {
    pub(crate) fn new(layout: &FarmLayout, n_steps: usize, dt: f64) -> Self {
        let n = layout.n_turbines();
        let mut distances = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                distances[i * n + j] = layout.distance(i, j);
            }
        }
        let ifft = FftPlanner::new().plan_fft_inverse(n_steps.max(1));
        let scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
        Self {
            distances,
            n_turbines: n,
            n_steps,
            dt,
            ifft,
            spectrum: vec![vec![Complex64::default(); n_steps.max(1)]; n],
            scratch,
        }
    }

    /// Zero-mean fluctuation series, one per turbine, for the given mean speed.
    pub(crate) fn fluctuations(
        &mut self,
        turb: &TurbulenceSpec,
        mean_speed: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Vec<f64>> {
        let n = self.n_turbines;
        let sigma = turb.turbulence_intensity * mean_speed;
        if sigma <= 0.0 || self.n_steps < 2 {
            return vec![vec![0.0; self.n_steps]; n];
        }
        let df = 1.0 / (self.n_steps as f64 * self.dt);
        let n_bins = self.n_steps / 2;
        for row in &mut self.spectrum {
            row.fill(Complex64::default());
        }
        let mut coherence = DMatrix::<f64>::zeros(n, n);
        let mut phases = vec![Complex64::default(); n];
        for k in 1..=n_bins {
            let f = k as f64 * df;
            let amp = (2.0 * kaimal_psd(f, sigma, turb.length_scale, mean_speed) * df).sqrt();
            for i in 0..n {
                for j in 0..n {
                    let d = self.distances[i * n + j];
                    coherence[(i, j)] = (-turb.coherence_decay * f * d / mean_speed).exp();
                }
            }
            let lower = cholesky_lower(&coherence);
            for p in phases.iter_mut() {
                let theta = rng.random::<f64>() * 2.0 * PI;
                *p = Complex64::from_polar(1.0, theta);
            }
            for i in 0..n {
                let mut z = Complex64::default();
                for (m, p) in phases.iter().enumerate().take(i + 1) {
                    z += *p * lower[(i, m)];
                }
                self.spectrum[i][k] = z * amp;
            }
        }
        let mut out = Vec::with_capacity(n);
        for row in &mut self.spectrum {
            self.ifft.process_with_scratch(row, &mut self.scratch);
            out.push(row.iter().map(|c| c.re).collect());
        }
        out
    }
}

fn cholesky_lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut jitter = 0.0;
    loop {
        let mut a = m.clone();
        if jitter > 0.0 {
            for i in 0..a.nrows() {
                a[(i, i)] += jitter;
            }
        }
        if let Some(ch) = a.cholesky() {
            return ch.l();
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
    }
}

/// Rotor-effective low-pass filter on every turbine series.
///
/// First-order lag with time constant `gamma * R / v`, evaluated on the
/// filtered speed (floored at 3 m/s). `gamma = 0` returns the field unchanged.
pub fn rotor_average(field: &WindField, spec: &TurbineSpec, gamma: f64) -> WindField {
    if gamma <= 0.0 {
        return field.clone();
    }
    let radius = spec.rotor_radius_m();
    let speeds = field
        .speeds
        .iter()
        .map(|series| {
            let mut y = series.first().copied().unwrap_or(0.0);
            series
                .iter()
                .map(|&x| {
                    let tau = gamma * radius / y.max(3.0);
                    let alpha = (-field.dt / tau).exp();
                    y = alpha * y + (1.0 - alpha) * x;
                    y
                })
                .collect()
        })
        .collect();
    WindField { dt: field.dt, speeds }
}
