//! Pulse synthesis, multipath propagation and additive white Gaussian noise.
//!
//! The transmitted pulse is a linear FM chirp with raised-cosine edges:
//!
//! ```text
//! s[n] = w[n] · sin(2π(a·n² + b·n)),   0 ≤ n < n_sig
//! a    = (f2 − f1) / (2·n_sig),        b = f1
//! ```
//!
//! A received record is the superposition `r[n] = Σ_k a_k s[n − τ_k] + ω[n]`.
//! Integer delays are realised as plain shifts; fractional delays go through a
//! phase ramp on the zero-padded pulse spectrum, which makes them circular in
//! the record length (the same periodic model the error functions assume).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;

use crate::error::{domain, Result};

/// Parameters of the windowed linear-FM pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpSpec {
    /// Pulse length in samples.
    pub n_sig: usize,
    /// Length of each raised-cosine ramp in samples.
    pub n_w: usize,
    /// Start frequency, cycles/sample.
    pub f1: f64,
    /// End frequency, cycles/sample.
    pub f2: f64,
}

impl Default for ChirpSpec {
    fn default() -> Self {
        Self {
            n_sig: 750,
            n_w: 75,
            f1: 0.1,
            f2: 0.15,
        }
    }
}

impl ChirpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sig == 0 {
            return domain("chirp.n_sig must be positive");
        }
        if self.n_w == 0 || 2 * self.n_w > self.n_sig {
            return domain(format!(
                "chirp.n_w must satisfy 0 < n_w <= n_sig/2 (n_w = {}, n_sig = {})",
                self.n_w, self.n_sig
            ));
        }
        if !(self.f1 > 0.0 && self.f1 < self.f2 && self.f2 < 0.5) {
            return domain(format!(
                "chirp frequencies must satisfy 0 < f1 < f2 < 0.5 (f1 = {}, f2 = {})",
                self.f1, self.f2
            ));
        }
        Ok(())
    }

    /// Quadratic phase coefficient `a = (f2 − f1) / (2·n_sig)`.
    pub fn sweep_rate(&self) -> f64 {
        (self.f2 - self.f1) / (2.0 * self.n_sig as f64)
    }
}

/// A real, uniformly sampled record.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    t_s: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, t_s: f64) -> Result<Self> {
        if samples.is_empty() {
            return domain("a sampled signal needs at least one sample");
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return domain(format!("sample {i} is not finite"));
        }
        if !(t_s.is_finite() && t_s > 0.0) {
            return domain(format!("sampling interval must be positive, got {t_s}"));
        }
        Ok(Self { samples, t_s })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Record duration `T = len · t_s`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.t_s
    }

    /// Mean power `(1/len) Σ x²`.
    pub fn power(&self) -> f64 {
        self.energy() / self.samples.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

/// Path amplitudes and delays. Delays are expressed in samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    pub amplitudes: Vec<f64>,
    pub delays: Vec<f64>,
}

impl MultipathChannel {
    pub fn new(amplitudes: Vec<f64>, delays: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return domain("a channel needs at least one path");
        }
        if amplitudes.len() != delays.len() {
            return domain(format!(
                "{} amplitudes but {} delays",
                amplitudes.len(),
                delays.len()
            ));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return domain("channel amplitudes must be finite");
        }
        if delays.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return domain("channel delays must be finite and nonnegative");
        }
        Ok(Self { amplitudes, delays })
    }

    pub fn num_paths(&self) -> usize {
        self.amplitudes.len()
    }

    /// The three-path reference scenario: `s[n−200] − 0.8·s[n−204] + 0.4·s[n−220]`.
    pub fn reference_three_path() -> Self {
        Self {
            amplitudes: vec![1.0, -0.8, 0.4],
            delays: vec![200.0, 204.0, 220.0],
        }
    }

    /// Returns a copy with paths ordered by ascending delay.
    pub fn sorted_by_delay(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.num_paths()).collect();
        idx.sort_by(|&i, &j| self.delays[i].total_cmp(&self.delays[j]));
        Self {
            amplitudes: idx.iter().map(|&i| self.amplitudes[i]).collect(),
            delays: idx.iter().map(|&i| self.delays[i]).collect(),
        }
    }
}

/// Noise injection settings. `snr_db = +∞` means noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl AwgnSpec {
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Raised-cosine edge window evaluated at sample `n`.
pub fn window_value(n: usize, spec: &ChirpSpec) -> Result<f64> {
    if n >= spec.n_sig {
        return domain(format!("window index {n} outside [0, {})", spec.n_sig));
    }
    let (n_sig, n_w) = (spec.n_sig as f64, spec.n_w as f64);
    let x = n as f64;
    let w = if n < spec.n_w {
        0.5 - 0.5 * (PI * x / n_w).cos()
    } else if n < spec.n_sig - spec.n_w {
        1.0
    } else {
        0.5 - 0.5 * (PI * (x - n_sig) / n_w).cos()
    };
    Ok(w)
}

/// Samples the windowed chirp. The result has exactly `n_sig` samples and `t_s = 1`.
pub fn generate_chirp(spec: &ChirpSpec) -> Result<SampledSignal> {
    spec.validate()?;
    let a = spec.sweep_rate();
    let b = spec.f1;
    let samples = (0..spec.n_sig)
        .map(|n| {
            let x = n as f64;
            let w = window_value(n, spec)?;
            Ok(w * (2.0 * PI * (a * x * x + b * x)).sin())
        })
        .collect::<Result<Vec<_>>>()?;
    SampledSignal::new(samples, 1.0)
}

/// Passes `pulse` through the multipath channel, producing `out_len` samples.
///
/// Integer delays shift the pulse directly; anything that falls past
/// `out_len` is dropped. Fractional delays use [`fractional_delay`].
pub fn apply_channel(
    pulse: &SampledSignal,
    channel: &MultipathChannel,
    out_len: usize,
) -> Result<SampledSignal> {
    if channel.num_paths() == 0 {
        return domain("empty channel");
    }
    if channel.amplitudes.len() != channel.delays.len() {
        return domain("channel amplitudes and delays differ in length");
    }
    if out_len == 0 {
        return domain("output length must be positive");
    }
    let mut out = vec![0.0; out_len];
    for (&amp, &tau) in channel.amplitudes.iter().zip(&channel.delays) {
        if !(tau.is_finite() && tau >= 0.0 && tau < out_len as f64) {
            return domain(format!("delay {tau} outside [0, {out_len})"));
        }
        if tau.fract() == 0.0 {
            let shift = tau as usize;
            for (o, &s) in out[shift..].iter_mut().zip(pulse.samples()) {
                *o += amp * s;
            }
        } else {
            let delayed = fractional_delay(pulse, tau, out_len)?;
            for (o, s) in out.iter_mut().zip(delayed.samples()) {
                *o += amp * s;
            }
        }
    }
    SampledSignal::new(out, pulse.t_s())
}

/// Delays `pulse` by `tau` samples (any real value) with a spectral phase ramp
/// `exp(−j·τ·2πn/out_len)` over signed frequencies `n ∈ [−out_len/2, out_len/2)`.
/// The shift is circular modulo `out_len`.
pub fn fractional_delay(pulse: &SampledSignal, tau: f64, out_len: usize) -> Result<SampledSignal> {
    if pulse.len() > out_len {
        return domain(format!(
            "pulse length {} exceeds output length {out_len}",
            pulse.len()
        ));
    }
    let mut buf: Vec<Complex64> = pulse
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(out_len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(out_len).process(&mut buf);
    let nf = out_len as f64;
    for (k, bin) in buf.iter_mut().enumerate() {
        let freq = signed_frequency(k, out_len) as f64;
        *bin *= Complex64::from_polar(1.0, -tau * 2.0 * PI * freq / nf);
    }
    planner.plan_fft_inverse(out_len).process(&mut buf);
    let samples = buf.iter().map(|c| c.re / nf).collect();
    SampledSignal::new(samples, pulse.t_s())
}

/// Maps DFT bin `k` of an `n`-point transform to its signed frequency in `[−n/2, n/2)`.
pub(crate) fn signed_frequency(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) && !(n.is_multiple_of(2) && k == n / 2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Variance that brings `signal` to `snr_db` relative to its own mean power.
pub fn noise_variance(signal: &SampledSignal, snr_db: f64) -> Result<f64> {
    let power = signal.power();
    if power <= 0.0 {
        return domain("signal has zero power; SNR is undefined");
    }
    if !snr_db.is_finite() {
        return domain(format!("SNR must be finite, got {snr_db}"));
    }
    Ok(power / 10f64.powf(snr_db / 10.0))
}

/// Adds seeded i.i.d. zero-mean Gaussian noise at the requested SNR.
pub fn add_awgn(signal: &SampledSignal, spec: &AwgnSpec) -> Result<SampledSignal> {
    if spec.is_noiseless() {
        return Ok(signal.clone());
    }
    let variance = noise_variance(signal, spec.snr_db)?;
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| crate::Error::Domain(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let samples = signal
        .samples()
        .iter()
        .map(|&x| x + normal.sample(&mut rng))
        .collect();
    SampledSignal::new(samples, signal.t_s())
}
