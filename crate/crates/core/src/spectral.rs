//! DFTs, thresholded band selection and the steering / projection matrices.
//!
//! DFT convention: unnormalised forward transform,
//! `X[n] = Σ_m x[m]·exp(−j2πnm/N)`, so Parseval reads `Σ|X|² = N·Σx²`.
//!
//! On the retained bins `q_1 … q_L` the model spectrum is `p̃(λ)·a` with
//! `p̃(λ) = diag(S[q_l]) · A(λ)` and `A(λ)_{l,k} = exp(j·λ_k·q_l)`,
//! where `λ_k = −τ_k·2π/(N·T_s)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::signal::SampledSignal;

/// Default threshold as a fraction of the peak pulse-spectrum magnitude.
pub const DEFAULT_THRESHOLD_FRAC: f64 = 0.1;

/// Complex DFT bins of a record.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// The bins whose pulse magnitude clears the threshold, with the matching
/// received (`r̃`) and pulse (`S` diagonal) values.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedSupport {
    pub indices: Vec<usize>,
    pub threshold: f64,
    pub r_tilde: Vec<Complex64>,
    pub s_diag: Vec<Complex64>,
    pub n_fft: usize,
}

impl ThresholdedSupport {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Replaces `r̃` with the received spectrum sampled on the same bins.
    pub fn with_received(mut self, received: &Spectrum) -> Result<Self> {
        if received.len() != self.n_fft {
            return domain(format!(
                "received spectrum has {} bins, support was built for {}",
                received.len(),
                self.n_fft
            ));
        }
        self.r_tilde = self.indices.iter().map(|&q| received.bins[q]).collect();
        Ok(self)
    }

    /// `‖r̃‖²`, the error of the all-zero model.
    pub fn received_energy(&self) -> f64 {
        self.r_tilde.iter().map(|r| r.norm_sqr()).sum()
    }
}

/// `L × M` matrix of unit-modulus phase ramps.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringMatrix {
    pub entries: DMatrix<Complex64>,
}

/// Forward DFT of `signal` zero-padded to `n_fft` points.
pub fn dft(signal: &SampledSignal, n_fft: usize) -> Result<Spectrum> {
    if n_fft < signal.len() {
        return domain(format!(
            "DFT length {n_fft} shorter than the signal ({} samples)",
            signal.len()
        ));
    }
    if !n_fft.is_multiple_of(2) {
        return domain(format!("DFT length must be even, got {n_fft}"));
    }
    let mut bins: Vec<Complex64> = signal
        .samples()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    bins.resize(n_fft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut bins);
    Ok(Spectrum { bins })
}

/// Keeps the positive-half bins `0 ≤ n < N/2` with `|S[n]| > frac · max|S|`.
///
/// `received`, when given, fills `r̃`; otherwise `r̃` is all zeros and can be
/// populated later with [`ThresholdedSupport::with_received`].
pub fn select_support(
    pulse_spectrum: &Spectrum,
    received: Option<&Spectrum>,
    threshold_frac: f64,
) -> Result<ThresholdedSupport> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return domain(format!(
            "threshold fraction must lie in (0, 1), got {threshold_frac}"
        ));
    }
    let n_fft = pulse_spectrum.len();
    if n_fft < 2 || !n_fft.is_multiple_of(2) {
        return domain(format!(
            "spectrum length must be even and >= 2, got {n_fft}"
        ));
    }
    let half = &pulse_spectrum.bins[..n_fft / 2];
    let peak = half.iter().map(|b| b.norm()).fold(0.0, f64::max);
    let threshold = threshold_frac * peak;
    let indices: Vec<usize> = half
        .iter()
        .enumerate()
        .filter(|(_, b)| b.norm() > threshold)
        .map(|(i, _)| i)
        .collect();
    if indices.is_empty() {
        return Err(Error::NoUsableBand { threshold });
    }
    let s_diag = indices.iter().map(|&q| pulse_spectrum.bins[q]).collect();
    let support = ThresholdedSupport {
        r_tilde: vec![Complex64::new(0.0, 0.0); indices.len()],
        indices,
        threshold,
        s_diag,
        n_fft,
    };
    match received {
        Some(r) => support.with_received(r),
        None => Ok(support),
    }
}

/// `λ_k = −τ_k·2π/(n_fft·t_s)` for delays given in seconds.
pub fn tau_to_lambda(tau: &[f64], n_fft: usize, t_s: f64) -> Vec<f64> {
    let scale = -2.0 * PI / (n_fft as f64 * t_s);
    tau.iter().map(|&t| t * scale).collect()
}

/// Inverse of [`tau_to_lambda`].
pub fn lambda_to_tau(lambda: &[f64], n_fft: usize, t_s: f64) -> Vec<f64> {
    let scale = -(n_fft as f64 * t_s) / (2.0 * PI);
    lambda.iter().map(|&l| l * scale).collect()
}

pub fn steering_matrix(lambda: &[f64], support: &ThresholdedSupport) -> Result<SteeringMatrix> {
    if support.is_empty() {
        return Err(Error::NoUsableBand {
            threshold: support.threshold,
        });
    }
    let entries = DMatrix::from_fn(support.len(), lambda.len(), |l, k| {
        // Reduce the phase before calling exp so large λ·q stays accurate.
        let phase = (lambda[k] * support.indices[l] as f64).rem_euclid(2.0 * PI);
        Complex64::from_polar(1.0, phase)
    });
    Ok(SteeringMatrix { entries })
}

/// `p̃ = diag(s_diag) · A`.
pub fn build_p(support: &ThresholdedSupport, a: &SteeringMatrix) -> Result<DMatrix<Complex64>> {
    let m = &a.entries;
    if m.nrows() != support.s_diag.len() {
        return domain(format!(
            "steering matrix has {} rows, support has {} bins",
            m.nrows(),
            support.s_diag.len()
        ));
    }
    let mut p = m.clone();
    for (mut row, s) in p.row_iter_mut().zip(&support.s_diag) {
        row *= *s;
    }
    Ok(p)
}
