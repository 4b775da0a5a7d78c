//! Frequency-domain least-squares error functions.
//!
//! For a candidate `(a, τ)` the per-bin residual is
//!
//! ```text
//! e[n] = R[n] − S[n] · Σ_k a_k · exp(−j·τ_k·2πn/(N·T_s))
//! ```
//!
//! * [`raef`] sums `|e[n]|²` over every bin (signed frequencies `−N/2 … N/2−1`)
//!   and only accepts real amplitudes.
//! * [`caef_full`] sums over the positive half `0 … N/2−1`; amplitudes may be complex.
//! * [`caef_thresholded`] sums over the thresholded support only and is evaluated
//!   in matrix form `‖r̃ − p̃(λ)·a‖²`.
//!
//! The two full-spectrum functions use direct summation while the thresholded one
//! goes through the steering matrix, so the routes can check each other.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::signal::signed_frequency;
use crate::spectral::{build_p, steering_matrix, tau_to_lambda, Spectrum, ThresholdedSupport};

/// Largest acceptable condition number of `p̃(λ)` in [`ls_amplitudes`].
pub const MAX_CONDITION: f64 = 1e10;

/// A candidate parameter point. Delays are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub amplitudes: Vec<Complex64>,
    pub delays: Vec<f64>,
}

impl ParamVector {
    pub fn new(amplitudes: Vec<Complex64>, delays: Vec<f64>) -> Result<Self> {
        let p = Self { amplitudes, delays };
        p.validate()?;
        Ok(p)
    }

    pub fn real(amplitudes: &[f64], delays: &[f64]) -> Result<Self> {
        Self::new(
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            delays.to_vec(),
        )
    }

    pub fn num_paths(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|a| a.im == 0.0)
    }

    fn validate(&self) -> Result<()> {
        if self.amplitudes.is_empty() || self.amplitudes.len() != self.delays.len() {
            return domain(format!(
                "parameter vector needs M >= 1 matching amplitudes/delays (got {} and {})",
                self.amplitudes.len(),
                self.delays.len()
            ));
        }
        if self.amplitudes.iter().any(|a| !a.is_finite())
            || self.delays.iter().any(|d| !d.is_finite())
        {
            return domain("parameter vector contains non-finite values");
        }
        Ok(())
    }
}

fn check_spectra(r: &Spectrum, s: &Spectrum) -> Result<usize> {
    let n = r.len();
    if n != s.len() {
        return domain(format!("spectrum lengths differ ({} vs {})", n, s.len()));
    }
    if n == 0 || !n.is_multiple_of(2) {
        return domain(format!("spectrum length must be even and nonzero, got {n}"));
    }
    Ok(n)
}

/// Residual `e[n]` at bin `k`, evaluated by direct summation over paths.
fn bin_residual(r: &Spectrum, s: &Spectrum, p: &ParamVector, t_s: f64, k: usize) -> Complex64 {
    let n_fft = r.len();
    let freq = signed_frequency(k, n_fft) as f64;
    let n = n_fft as f64;
    let model: Complex64 = p
        .amplitudes
        .iter()
        .zip(&p.delays)
        .map(|(a, tau)| {
            // phase = −2π·(τ/T_s · f / N), reduced to one turn first
            let turns = (tau / t_s * freq).rem_euclid(n) / n;
            a * Complex64::from_polar(1.0, -2.0 * PI * turns)
        })
        .sum();
    r.bins[k] - s.bins[k] * model
}

/// Residual vector over bins `0 … N−1` (bin `k ≥ N/2` carries frequency `k − N`).
pub fn residuals(r: &Spectrum, s: &Spectrum, p: &ParamVector, t_s: f64) -> Result<Vec<Complex64>> {
    let n = check_spectra(r, s)?;
    p.validate()?;
    Ok((0..n).map(|k| bin_residual(r, s, p, t_s, k)).collect())
}

/// Real-amplitude error function: full-spectrum sum of squared residuals.
pub fn raef(r: &Spectrum, s: &Spectrum, p: &ParamVector, t_s: f64) -> Result<f64> {
    let n = check_spectra(r, s)?;
    p.validate()?;
    if !p.is_real() {
        return domain("the real-amplitude error function only accepts real amplitudes");
    }
    Ok((0..n)
        .map(|k| bin_residual(r, s, p, t_s, k).norm_sqr())
        .sum())
}

/// Complex-amplitude error function over the positive half-spectrum.
pub fn caef_full(r: &Spectrum, s: &Spectrum, p: &ParamVector, t_s: f64) -> Result<f64> {
    let n = check_spectra(r, s)?;
    p.validate()?;
    Ok((0..n / 2)
        .map(|k| bin_residual(r, s, p, t_s, k).norm_sqr())
        .sum())
}

fn projection(support: &ThresholdedSupport, lambda: &[f64]) -> Result<DMatrix<Complex64>> {
    let a = steering_matrix(lambda, support)?;
    build_p(support, &a)
}

/// `‖r̃ − p̃(λ)·a‖²` over the thresholded support.
pub fn caef_thresholded(
    support: &ThresholdedSupport,
    p: &ParamVector,
    n_fft: usize,
    t_s: f64,
) -> Result<f64> {
    p.validate()?;
    if support.is_empty() {
        return Err(Error::NoUsableBand {
            threshold: support.threshold,
        });
    }
    let lambda = tau_to_lambda(&p.delays, n_fft, t_s);
    let pm = projection(support, &lambda)?;
    let a = DVector::from_column_slice(&p.amplitudes);
    let r = DVector::from_column_slice(&support.r_tilde);
    Ok((r - pm * a).norm_squared())
}

/// Least-squares complex amplitudes for fixed delays (given as `λ`).
///
/// Fails with [`Error::IllConditioned`] when `p̃(λ)` is numerically rank
/// deficient, e.g. for duplicate delays.
pub fn ls_amplitudes(support: &ThresholdedSupport, lambda: &[f64]) -> Result<Vec<Complex64>> {
    let fit = ls_fit(support, lambda)?;
    if fit.condition > MAX_CONDITION {
        return Err(Error::IllConditioned {
            condition: fit.condition,
        });
    }
    Ok(fit.amplitudes)
}

/// Result of a linear least-squares fit for fixed delays.
#[derive(Debug, Clone, PartialEq)]
pub struct LsFit {
    pub amplitudes: Vec<Complex64>,
    /// `‖r̃ − p̃·a*‖²`.
    pub residual: f64,
    /// `σ_max / σ_min` of `p̃(λ)` (infinite when singular).
    pub condition: f64,
}

/// Minimum-norm least-squares fit that never fails on rank deficiency.
///
/// Singular values below `MAX_CONDITION⁻¹·σ_max` are truncated, so the
/// residual is still the true minimum over the span of `p̃(λ)`.
pub fn ls_fit(support: &ThresholdedSupport, lambda: &[f64]) -> Result<LsFit> {
    if lambda.is_empty() {
        return domain("at least one path is required");
    }
    if support.len() < lambda.len() {
        return Err(Error::TooManyPaths {
            paths: lambda.len(),
            bins: support.len(),
        });
    }
    let pm = projection(support, lambda)?;
    let r = DVector::from_column_slice(&support.r_tilde);
    let svd = pm.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let a = svd
        .solve(&r, s_max / MAX_CONDITION)
        .map_err(|e| Error::Domain(format!("least-squares solve: {e}")))?;
    let residual = (r - pm * &a).norm_squared();
    Ok(LsFit {
        amplitudes: a.iter().copied().collect(),
        residual,
        condition,
    })
}

/// Least-squares fit with the amplitudes constrained to be real.
///
/// Solves `min_{a ∈ ℝ^M} ‖r̃ − p̃(λ)·a‖²` through the stacked real system
/// `[Re p̃; Im p̃]·a = [Re r̃; Im r̃]`, truncating singular values like [`ls_fit`].
pub fn ls_fit_real(support: &ThresholdedSupport, lambda: &[f64]) -> Result<LsFit> {
    if lambda.is_empty() {
        return domain("at least one path is required");
    }
    if 2 * support.len() < lambda.len() {
        return Err(Error::TooManyPaths {
            paths: lambda.len(),
            bins: support.len(),
        });
    }
    let pm = projection(support, lambda)?;
    let l = pm.nrows();
    let stacked = DMatrix::from_fn(2 * l, pm.ncols(), |i, k| {
        if i < l {
            pm[(i, k)].re
        } else {
            pm[(i - l, k)].im
        }
    });
    let rhs = DVector::from_fn(2 * l, |i, _| {
        if i < l {
            support.r_tilde[i].re
        } else {
            support.r_tilde[i - l].im
        }
    });
    let svd = stacked.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    let a = svd
        .solve(&rhs, s_max / MAX_CONDITION)
        .map_err(|e| Error::Domain(format!("least-squares solve: {e}")))?;
    let residual = (rhs - stacked * &a).norm_squared();
    Ok(LsFit {
        amplitudes: a.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        residual,
        condition,
    })
}

/// Fast evaluator for the real-amplitude variable-projection residual.
///
/// Equivalent to [`ls_fit_real`] but forms the `M × M` normal equations
/// `Re(p̃ᴴp̃)·a = Re(p̃ᴴr̃)` directly from per-bin phase factors and solves them by
/// Cholesky. Falls back to the SVD route when the Gram matrix is not
/// comfortably positive definite.
#[derive(Debug, Clone)]
pub struct RealLsProjector<'a> {
    support: &'a ThresholdedSupport,
    bins: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> RealLsProjector<'a> {
    /// Pivot ratio below which the normal equations are not trusted.
    const MIN_PIVOT_RATIO: f64 = 1e-7;

    pub fn new(support: &'a ThresholdedSupport) -> Self {
        Self {
            support,
            bins: support.indices.iter().map(|&q| q as f64).collect(),
            weights: support.s_diag.iter().map(|s| s.norm_sqr()).collect(),
        }
    }

    pub fn fit(&self, lambda: &[f64]) -> Result<LsFit> {
        let m = lambda.len();
        if m == 0 || 2 * self.support.len() < m {
            return ls_fit_real(self.support, lambda);
        }
        // Columns of p̃: S_l · exp(jλ_k q_l). The phase factors are advanced by
        // repeated multiplication across consecutive bins; the accumulated
        // rounding is O(L·ε).
        let cols: Vec<Vec<Complex64>> = lambda
            .iter()
            .map(|&lam| {
                let step = Complex64::from_polar(1.0, lam);
                let mut prev = self.bins[0];
                let mut phase = Complex64::from_polar(1.0, (lam * prev).rem_euclid(2.0 * PI));
                self.bins
                    .iter()
                    .zip(&self.support.s_diag)
                    .map(|(&q, s)| {
                        if q - prev == 1.0 {
                            phase *= step;
                        } else if q != prev {
                            phase = Complex64::from_polar(1.0, (lam * q).rem_euclid(2.0 * PI));
                        }
                        prev = q;
                        s * phase
                    })
                    .collect()
            })
            .collect();
        let mut gram = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        let w_total: f64 = self.weights.iter().sum();
        for j in 0..m {
            gram[(j, j)] = w_total;
            rhs[j] = cols[j]
                .iter()
                .zip(&self.support.r_tilde)
                .map(|(p, r)| (p.conj() * r).re)
                .sum();
            for k in j + 1..m {
                let g: f64 = cols[j]
                    .iter()
                    .zip(&cols[k])
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum();
                gram[(j, k)] = g;
                gram[(k, j)] = g;
            }
        }
        let Some(chol) = gram.cholesky() else {
            return ls_fit_real(self.support, lambda);
        };
        let diag = chol.l_dirty().diagonal();
        if diag.min() < Self::MIN_PIVOT_RATIO * diag.max() {
            return ls_fit_real(self.support, lambda);
        }
        let a = chol.solve(&rhs);
        let residual = self
            .support
            .r_tilde
            .iter()
            .enumerate()
            .map(|(l, r)| {
                let model: Complex64 = (0..m).map(|k| cols[k][l] * a[k]).sum();
                (r - model).norm_sqr()
            })
            .sum();
        let ratio = diag.max() / diag.min();
        Ok(LsFit {
            amplitudes: a.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            residual,
            condition: ratio * ratio,
        })
    }
}

/// Abscissa of the vertex of the parabola through three points.
pub fn quadratic_vertex(x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let [x0, x1, x2] = x;
    let [y0, y1, y2] = y;
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !den.is_finite() {
        return domain("the three points are collinear; no vertex");
    }
    Ok(x1 - 0.5 * num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{apply_channel, generate_chirp, ChirpSpec, MultipathChannel};
    use crate::spectral::{dft, select_support};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        pulse: Vec<f64>,
        received: Vec<f64>,
        r: Spectrum,
        s: Spectrum,
        support: ThresholdedSupport,
    }

    fn reference(frac: f64) -> Setup {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let rec = apply_channel(&pulse, &MultipathChannel::reference_three_path(), 1000).unwrap();
        let s = dft(&pulse, 1000).unwrap();
        let r = dft(&rec, 1000).unwrap();
        let support = select_support(&s, Some(&r), frac).unwrap();
        Setup {
            pulse: pulse.into_samples(),
            received: rec.into_samples(),
            r,
            s,
            support,
        }
    }

    fn truth() -> ParamVector {
        ParamVector::real(&[1.0, -0.8, 0.4], &[200.0, 204.0, 220.0]).unwrap()
    }

    /// Naive O(N²) DFT of a real sequence; shares nothing with the FFT path.
    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(m, &v)| {
                        let turns = ((k * m) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, -2.0 * PI * turns)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn errors_vanish_at_truth() {
        let st = reference(0.1);
        let e_r = raef(&st.r, &st.s, &truth(), 1.0).unwrap();
        let e_c = caef_full(&st.r, &st.s, &truth(), 1.0).unwrap();
        let e_t = caef_thresholded(&st.support, &truth(), 1000, 1.0).unwrap();
        let scale = st.r.energy();
        assert!(e_r < 1e-6 * scale);
        assert!(e_c < 1e-6 * scale);
        assert!(e_t < 1e-6 * st.support.received_energy());
    }

    #[test]
    fn zero_model_returns_received_energy() {
        let st = reference(0.1);
        let p = ParamVector::real(&[0.0], &[123.4]).unwrap();
        let e = raef(&st.r, &st.s, &p, 1.0).unwrap();
        assert!((e - st.r.energy()).abs() <= 1e-12 * st.r.energy());
    }

    #[test]
    fn doubled_amplitudes_match_naive_oracle() {
        let st = reference(0.1);
        let p = ParamVector::real(&[2.0, -1.6, 0.8], &[200.0, 204.0, 220.0]).unwrap();
        let e = raef(&st.r, &st.s, &p, 1.0).unwrap();
        // time-domain residual r − 2·r = −r, transformed by the naive DFT
        let resid: Vec<f64> = (0..1000)
            .map(|n| {
                let model: f64 = [(2.0, 200), (-1.6, 204), (0.8, 220)]
                    .iter()
                    .map(|&(a, d)| {
                        if n >= d && n - d < 750 {
                            a * st.pulse[n - d]
                        } else {
                            0.0
                        }
                    })
                    .sum();
                st.received[n] - model
            })
            .collect();
        let oracle: f64 = naive_dft(&resid).iter().map(|z| z.norm_sqr()).sum();
        assert!(((e - oracle) / oracle).abs() < 1e-9, "{e} vs {oracle}");
    }

    #[test]
    fn raef_rejects_complex_amplitudes() {
        let st = reference(0.1);
        let p = ParamVector::new(vec![Complex64::new(1.0, 0.1)], vec![200.0]).unwrap();
        assert!(raef(&st.r, &st.s, &p, 1.0).is_err());
        assert!(caef_full(&st.r, &st.s, &p, 1.0).is_ok());
    }

    #[test]
    fn mismatched_spectra_rejected() {
        let st = reference(0.1);
        let short = Spectrum {
            bins: st.s.bins[..500].to_vec(),
        };
        assert!(raef(&st.r, &short, &truth(), 1.0).is_err());
        assert!(caef_full(&st.r, &short, &truth(), 1.0).is_err());
    }

    #[test]
    fn raef_caef_conjugate_identity() {
        let st = reference(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1000.0)).collect();
            let p = ParamVector::real(&a, &d).unwrap();
            let res = residuals(&st.r, &st.s, &p, 1.0).unwrap();
            let scale = res.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for n in 1..500 {
                assert!((res[1000 - n] - res[n].conj()).norm() <= 1e-9 * scale);
            }
            let e_r = raef(&st.r, &st.s, &p, 1.0).unwrap();
            let e_c = caef_full(&st.r, &st.s, &p, 1.0).unwrap();
            let rhs = 2.0 * e_c - res[0].norm_sqr() + res[500].norm_sqr();
            assert!(((e_r - rhs) / e_r).abs() < 1e-9);
        }
    }

    #[test]
    fn caef_full_periodic_in_each_delay() {
        let st = reference(0.1);
        let base = ParamVector::real(&[0.9, -0.7, 0.3], &[199.3, 207.1, 221.8]).unwrap();
        let e0 = caef_full(&st.r, &st.s, &base, 1.0).unwrap();
        for k in 0..3 {
            let mut p = base.clone();
            p.delays[k] += 1000.0;
            let e1 = caef_full(&st.r, &st.s, &p, 1.0).unwrap();
            assert!(((e1 - e0) / e0).abs() < 1e-9);
        }
    }

    #[test]
    fn thresholded_matches_full_when_every_bin_kept() {
        let st = reference(1e-12);
        assert_eq!(st.support.len(), 500);
        let p = ParamVector::real(&[0.5, 1.5], &[13.25, 640.0]).unwrap();
        let full = caef_full(&st.r, &st.s, &p, 1.0).unwrap();
        let thr = caef_thresholded(&st.support, &p, 1000, 1.0).unwrap();
        assert!(((full - thr) / full).abs() < 1e-9);
    }

    #[test]
    fn thresholded_is_partial_sum_over_support() {
        let st = reference(0.1);
        let p = ParamVector::new(
            vec![Complex64::new(0.3, -0.2), Complex64::new(-1.0, 0.5)],
            vec![201.7, 215.0],
        )
        .unwrap();
        let res = residuals(&st.r, &st.s, &p, 1.0).unwrap();
        let partial: f64 = st.support.indices.iter().map(|&q| res[q].norm_sqr()).sum();
        let thr = caef_thresholded(&st.support, &p, 1000, 1.0).unwrap();
        assert!(((partial - thr) / partial).abs() < 1e-12);
    }

    #[test]
    fn tau1_sweep_has_global_min_at_truth_and_oscillates() {
        let st = reference(0.1);
        let slice = |tau1: f64| {
            let p = ParamVector::real(&[1.0, -0.8, 0.4], &[tau1, 204.0, 220.0]).unwrap();
            caef_thresholded(&st.support, &p, 1000, 1.0).unwrap()
        };
        let values: Vec<f64> = (0..1000).map(|t| slice(t as f64)).collect();
        let argmin = (0..1000)
            .min_by(|&i, &j| values[i].total_cmp(&values[j]))
            .unwrap();
        assert_eq!(argmin, 200);

        // strict local minima on a fine grid within ±20 samples of the truth
        let grid: Vec<f64> = (0..=400).map(|i| slice(180.0 + i as f64 * 0.1)).collect();
        let minima = grid
            .windows(3)
            .filter(|w| w[1] < w[0] && w[1] < w[2])
            .count();
        assert!(minima >= 3, "only {minima} local minima");
    }

    #[test]
    fn ls_recovers_reference_amplitudes() {
        let st = reference(0.1);
        let lambda = tau_to_lambda(&[200.0, 204.0, 220.0], 1000, 1.0);
        let a = ls_amplitudes(&st.support, &lambda).unwrap();
        for (est, want) in a.iter().zip([1.0, -0.8, 0.4]) {
            assert_abs_diff_eq!(est.re, want, epsilon = 1e-6);
            assert!(est.im.abs() < 1e-6);
        }
    }

    #[test]
    fn ls_single_path() {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let ch = MultipathChannel::new(vec![0.6], vec![37.0]).unwrap();
        let rec = apply_channel(&pulse, &ch, 1000).unwrap();
        let s = dft(&pulse, 1000).unwrap();
        let r = dft(&rec, 1000).unwrap();
        let sup = select_support(&s, Some(&r), 0.1).unwrap();
        let a = ls_amplitudes(&sup, &tau_to_lambda(&[37.0], 1000, 1.0)).unwrap();
        assert_abs_diff_eq!(a[0].re, 0.6, epsilon = 1e-6);
        assert!(a[0].im.abs() < 1e-6);
    }

    #[test]
    fn ls_residual_is_orthogonal_to_columns() {
        let st = reference(0.1);
        let lambda = tau_to_lambda(&[150.2, 333.0, 901.7], 1000, 1.0);
        let a = ls_amplitudes(&st.support, &lambda).unwrap();
        let pm = projection(&st.support, &lambda).unwrap();
        let r = DVector::from_column_slice(&st.support.r_tilde);
        let res = &r - &pm * DVector::from_column_slice(&a);
        for col in pm.column_iter() {
            let ip = col.dotc(&res).norm();
            assert!(ip < 1e-8 * col.norm() * r.norm(), "inner product {ip}");
        }
    }

    #[test]
    fn ls_flags_duplicate_delays() {
        let st = reference(0.1);
        let lambda = tau_to_lambda(&[200.0, 200.0], 1000, 1.0);
        match ls_amplitudes(&st.support, &lambda) {
            Err(Error::IllConditioned { condition }) => assert!(condition > MAX_CONDITION),
            other => panic!("expected conditioning error, got {other:?}"),
        }
        // the truncated fit still produces the minimal residual
        let fit = ls_fit(&st.support, &lambda).unwrap();
        let single = ls_fit(&st.support, &lambda[..1]).unwrap();
        assert!((fit.residual - single.residual).abs() <= 1e-9 * single.residual);
    }

    #[test]
    fn ls_rejects_more_paths_than_bins() {
        let mut bins = vec![Complex64::new(0.0, 0.0); 16];
        bins[3] = Complex64::new(1.0, 0.0);
        let sup = select_support(&Spectrum { bins }, None, 0.5).unwrap();
        assert!(matches!(
            ls_amplitudes(&sup, &[0.1, 0.2]),
            Err(Error::TooManyPaths { paths: 2, bins: 1 })
        ));
    }

    #[test]
    fn ls_beats_random_amplitudes() {
        let st = reference(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1000.0)).collect();
            let lambda = tau_to_lambda(&d, 1000, 1.0);
            let Ok(best) = ls_amplitudes(&st.support, &lambda) else {
                continue;
            };
            let e_best = caef_thresholded(
                &st.support,
                &ParamVector::new(best, d.clone()).unwrap(),
                1000,
                1.0,
            )
            .unwrap();
            let a: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let e =
                caef_thresholded(&st.support, &ParamVector::new(a, d).unwrap(), 1000, 1.0).unwrap();
            assert!(e_best <= e);
        }
    }

    #[test]
    fn amplitude_slices_are_quadratic_with_vertex_at_truth() {
        let st = reference(0.1);
        let want = [1.0, -0.8, 0.4];
        for k in 0..3 {
            let slice = |v: f64| {
                let mut a = want;
                a[k] = v;
                let p = ParamVector::real(&a, &[200.0, 204.0, 220.0]).unwrap();
                caef_thresholded(&st.support, &p, 1000, 1.0).unwrap()
            };
            let xs = [-1.5, 0.1, 1.7];
            let v = quadratic_vertex(xs, xs.map(slice)).unwrap();
            assert_abs_diff_eq!(v, want[k], epsilon = 1e-6);
        }
    }

    #[test]
    fn quadratic_vertex_cases() {
        let f = |x: f64| 3.0 * (x - 0.25).powi(2) + 1.0;
        assert_abs_diff_eq!(
            quadratic_vertex([0.0, 1.0, 3.0], [f(0.0), f(1.0), f(3.0)]).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert!(quadratic_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn parseval_bridge_on_integer_delays() {
        let st = reference(0.1);
        let p = ParamVector::real(&[0.7, -0.2], &[12.0, 305.0]).unwrap();
        let e = raef(&st.r, &st.s, &p, 1.0).unwrap();
        let sse: f64 = (0..1000usize)
            .map(|n| {
                let model: f64 = [(0.7, 12usize), (-0.2, 305)]
                    .iter()
                    .map(|&(a, d)| {
                        let m = (n + 1000 - d) % 1000;
                        if m < 750 {
                            a * st.pulse[m]
                        } else {
                            0.0
                        }
                    })
                    .sum();
                (st.received[n] - model).powi(2)
            })
            .sum();
        assert!(((e - 1000.0 * sse) / e).abs() < 1e-9);
    }

    #[test]
    fn param_vector_validation() {
        assert!(ParamVector::real(&[], &[]).is_err());
        assert!(ParamVector::real(&[1.0], &[1.0, 2.0]).is_err());
        assert!(ParamVector::real(&[f64::NAN], &[1.0]).is_err());
    }
}
