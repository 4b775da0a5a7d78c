//! End-to-end estimation pipeline and Monte-Carlo error metrics.
//!
//! `estimate` zero-pads the pulse to the record length, transforms both,
//! keeps the thresholded band and hands the thresholded complex-amplitude
//! error to the GA. Two search modes exist:
//!
//! * [`Mode::FullGa`] searches all `2M` amplitudes and delays jointly.
//! * [`Mode::HybridGaLs`] searches the `M` delays only; for every delay
//!   hypothesis the amplitudes come from the linear least-squares solve
//!   (variable projection).

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::error_fn::{caef_thresholded, ls_fit, ls_fit_real, ParamVector, RealLsProjector};
use crate::ga::{
    GaConfig, GaOutcome, Gene, GeneLayout, GenerationStats, GeneticAlgorithm, Termination,
};
use crate::seed::derive_seed;
use crate::signal::{MultipathChannel, SampledSignal};
use crate::spectral::{
    dft, select_support, tau_to_lambda, ThresholdedSupport, DEFAULT_THRESHOLD_FRAC,
};

/// `‖Im a‖ / ‖a‖` above which an estimate carries a quality warning.
pub const IMAG_WARNING_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    FullGa,
    HybridGaLs,
}

/// Gene widths and amplitude bounds for the search box. Delays always span
/// one record period `[0, N·T_s]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    pub delay_bits: u32,
    pub amplitude_bits: u32,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            delay_bits: 16,
            amplitude_bits: 12,
            amplitude_min: -2.0,
            amplitude_max: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationTask {
    pub received: SampledSignal,
    pub pulse: SampledSignal,
    pub num_paths: usize,
    pub threshold_frac: f64,
    pub mode: Mode,
    pub ga: GaConfig,
    pub search: SearchSpace,
    /// Independent GA runs; the lowest final objective wins. Run `r > 0`
    /// is seeded from `ga.seed` and `r`.
    pub restarts: usize,
    /// When set, the GA sees `scale · E / ‖r̃‖²` instead of the raw error `E`,
    /// which fixes the selection pressure of `1 / (1 + objective)`.
    pub objective_scale: Option<f64>,
    /// Hybrid mode only: polish the GA's delays with [`refine_delays`].
    pub refine: bool,
}

impl EstimationTask {
    pub fn new(received: SampledSignal, pulse: SampledSignal, num_paths: usize) -> Self {
        Self {
            received,
            pulse,
            num_paths,
            threshold_frac: DEFAULT_THRESHOLD_FRAC,
            mode: Mode::default(),
            ga: GaConfig::default(),
            search: SearchSpace::default(),
            restarts: 1,
            objective_scale: None,
            refine: false,
        }
    }

    /// Hybrid search with the settings that recover the reference
    /// three-path channel reliably: a larger, more mutable population,
    /// a normalised objective, three restarts and delay refinement.
    pub fn recommended(received: SampledSignal, pulse: SampledSignal, num_paths: usize) -> Self {
        Self {
            mode: Mode::HybridGaLs,
            ga: GaConfig {
                population_size: 100,
                mutation_prob: 0.01,
                termination: Termination::MaxGenerations(400),
                max_generations: 400,
                ..GaConfig::default()
            },
            restarts: 3,
            objective_scale: Some(100.0),
            refine: true,
            ..Self::new(received, pulse, num_paths)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return domain("the number of paths must be at least 1");
        }
        if self.pulse.len() > self.received.len() {
            return domain(format!(
                "pulse ({} samples) is longer than the received record ({})",
                self.pulse.len(),
                self.received.len()
            ));
        }
        if self.pulse.energy() == 0.0 {
            return domain("pulse is identically zero");
        }
        if self.pulse.t_s() != self.received.t_s() {
            return domain("pulse and received record have different sampling intervals");
        }
        self.ga.validate()?;
        if !(self.threshold_frac > 0.0 && self.threshold_frac < 1.0) {
            return domain(format!(
                "threshold fraction must lie in (0, 1), got {}",
                self.threshold_frac
            ));
        }
        if self.restarts == 0 {
            return domain("restarts must be at least 1");
        }
        if self.refine && self.mode != Mode::HybridGaLs {
            return domain("delay refinement needs hybrid mode");
        }
        if let Some(k) = self.objective_scale {
            if !(k.is_finite() && k > 0.0) {
                return domain(format!(
                    "objective scale must be positive and finite, got {k}"
                ));
            }
        }
        Gene::new(
            self.search.amplitude_min,
            self.search.amplitude_max,
            self.search.amplitude_bits,
        )?;
        Gene::new(0.0, 1.0, self.search.delay_bits)?;
        Ok(())
    }

    /// Transforms both records and selects the thresholded support.
    pub fn support(&self) -> Result<ThresholdedSupport> {
        let n_fft = self.received.len();
        let s = dft(&self.pulse, n_fft)?;
        let r = dft(&self.received, n_fft)?;
        select_support(&s, Some(&r), self.threshold_frac)
    }
}

/// Outcome of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Estimated paths sorted by ascending delay (delays in samples).
    pub channel: MultipathChannel,
    /// Thresholded error re-evaluated at `channel`.
    pub objective_at_estimate: f64,
    /// `‖r̃‖²` on the same support, the error of the empty model.
    pub received_energy: f64,
    /// `‖Im a‖ / ‖a‖` of the least-squares amplitudes (0 in full-GA mode).
    pub residual_imag_norm: f64,
    pub quality_warning: Option<String>,
    /// History of the winning GA run, in unscaled error units.
    pub history: Vec<GenerationStats>,
}

impl ChannelEstimate {
    pub fn generations(&self) -> usize {
        self.history.len()
    }
}

/// Thresholded error of a real-amplitude channel (delays in samples).
pub fn channel_objective(
    support: &ThresholdedSupport,
    channel: &MultipathChannel,
    t_s: f64,
) -> Result<f64> {
    let delays: Vec<f64> = channel.delays.iter().map(|d| d * t_s).collect();
    let p = ParamVector::real(&channel.amplitudes, &delays)?;
    caef_thresholded(support, &p, support.n_fft, t_s)
}

pub fn estimate(task: &EstimationTask) -> Result<ChannelEstimate> {
    task.validate()?;
    let support = task.support()?;
    let m = task.num_paths;
    if m > support.len() {
        return Err(Error::TooManyPaths {
            paths: m,
            bins: support.len(),
        });
    }
    let n_fft = support.n_fft;
    let t_s = task.received.t_s();
    let period = n_fft as f64 * t_s;
    let delay_gene = Gene::new(0.0, period, task.search.delay_bits)?;
    let amp_gene = Gene::new(
        task.search.amplitude_min,
        task.search.amplitude_max,
        task.search.amplitude_bits,
    )?;

    let energy = support.received_energy();
    let scale = match task.objective_scale {
        Some(k) if energy > 0.0 => k / energy,
        _ => 1.0,
    };
    let best_of =
        |layout: GeneLayout, objective: &(dyn Fn(&[f64]) -> f64 + Sync)| -> Result<GaOutcome> {
            let mut best: Option<GaOutcome> = None;
            for r in 0..task.restarts {
                let mut config = task.ga.clone();
                if r > 0 {
                    config.seed = derive_seed(task.ga.seed, &[r as u64]);
                }
                let outcome = GeneticAlgorithm::new(layout.clone(), config)?.run(objective)?;
                if best
                    .as_ref()
                    .is_none_or(|b| outcome.best_objective < b.best_objective)
                {
                    best = Some(outcome);
                }
            }
            Ok(best.expect("at least one restart"))
        };

    let (amplitudes, delays_s, imag_ratio, outcome): (Vec<f64>, Vec<f64>, f64, GaOutcome) =
        match task.mode {
            Mode::FullGa => {
                let mut genes = vec![amp_gene; m];
                genes.extend(std::iter::repeat_n(delay_gene, m));
                let outcome = best_of(GeneLayout::new(genes)?, &|x| {
                    let p = ParamVector::real(&x[..m], &x[m..]).expect("decoded genes are finite");
                    caef_thresholded(&support, &p, n_fft, t_s).map_or(f64::NAN, |e| e * scale)
                })?;
                let (a, d) = outcome.best.split_at(m);
                (a.to_vec(), d.to_vec(), 0.0, outcome)
            }
            Mode::HybridGaLs => {
                let projector = RealLsProjector::new(&support);
                let outcome = best_of(GeneLayout::uniform(m, delay_gene)?, &|x| {
                    projector
                        .fit(&tau_to_lambda(x, n_fft, t_s))
                        .map_or(f64::NAN, |fit| fit.residual * scale)
                })?;
                let mut best = outcome.best.clone();
                if task.refine {
                    let resolution = period / ((1u64 << task.search.delay_bits) - 1) as f64 / t_s;
                    let samples: Vec<f64> = best.iter().map(|d| d / t_s).collect();
                    let cost = |d: &[f64]| {
                        let taus: Vec<f64> = d.iter().map(|x| x * t_s).collect();
                        projector
                            .fit(&tau_to_lambda(&taus, n_fft, t_s))
                            .map_or(f64::INFINITY, |f| f.residual)
                    };
                    best = refine_delays(cost, &samples, resolution)
                        .iter()
                        .map(|d| d * t_s)
                        .collect();
                }
                let lambda = tau_to_lambda(&best, n_fft, t_s);
                let ratio = imag_ratio(&ls_fit(&support, &lambda)?.amplitudes);
                let re = ls_fit_real(&support, &lambda)?
                    .amplitudes
                    .iter()
                    .map(|a| a.re)
                    .collect();
                (re, best, ratio, outcome)
            }
        };

    // Delays live on the closed period [0, N·T_s]; fold the endpoint back.
    let delays: Vec<f64> = delays_s
        .iter()
        .map(|d| (d / t_s).rem_euclid(n_fft as f64))
        .collect();
    let channel = MultipathChannel::new(amplitudes, delays)?.sorted_by_delay();
    let objective_at_estimate = channel_objective(&support, &channel, t_s)?;
    let quality_warning = (imag_ratio > IMAG_WARNING_RATIO).then(|| {
        format!(
            "least-squares amplitudes have a large imaginary part (|Im a|/|a| = {imag_ratio:.3})"
        )
    });
    Ok(ChannelEstimate {
        channel,
        objective_at_estimate,
        received_energy: energy,
        residual_imag_norm: imag_ratio,
        quality_warning,
        history: outcome
            .history
            .into_iter()
            .map(|h| GenerationStats {
                best_objective: h.best_objective / scale,
                mean_objective: h.mean_objective / scale,
                best_ever_objective: h.best_ever_objective / scale,
                ..h
            })
            .collect(),
    })
}

const COARSE_SINGLE_REACH: i32 = 32;
const COARSE_PAIR_REACH: i32 = 12;
const COARSE_MAX_SWEEPS: usize = 10;

/// Deterministic local polish of a delay vector (in samples).
///
/// A coarse stage snaps all delays to whole samples, then rescans each
/// delay on the half-sample lattice within ±32 samples and each delay pair
/// jointly within ±12 samples, until a sweep brings no improvement. A fine stage then
/// runs a coordinate pattern search whose step halves from 0.5 sample down
/// to `resolution`. Only strict improvements are accepted, so the result
/// never scores worse than `start`.
pub fn refine_delays<F>(cost: F, start: &[f64], resolution: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let m = start.len();
    let mut d = start.to_vec();
    let mut cur = cost(&d);
    let snapped = |d: &[f64]| d.iter().map(|x| x.round()).collect::<Vec<f64>>();
    let try_move = |t: Vec<f64>, d: &mut Vec<f64>, cur: &mut f64| {
        let v = cost(&t);
        let better = v < *cur;
        if better {
            *cur = v;
            *d = t;
        }
        better
    };

    for _ in 0..COARSE_MAX_SWEEPS {
        let mut moved = false;
        for k in 0..m {
            for j in -2 * COARSE_SINGLE_REACH..=2 * COARSE_SINGLE_REACH {
                let mut t = snapped(&d);
                t[k] += 0.5 * j as f64;
                moved |= try_move(t, &mut d, &mut cur);
            }
        }
        for k in 0..m {
            for l in k + 1..m {
                for i in -COARSE_PAIR_REACH..=COARSE_PAIR_REACH {
                    for j in -COARSE_PAIR_REACH..=COARSE_PAIR_REACH {
                        let mut t = snapped(&d);
                        t[k] += i as f64;
                        t[l] += j as f64;
                        moved |= try_move(t, &mut d, &mut cur);
                    }
                }
            }
        }
        if !moved {
            break;
        }
    }

    let mut step = 0.5;
    while step >= resolution {
        let mut moved = false;
        for k in 0..m {
            for s in [-step, step] {
                let mut t = d.clone();
                t[k] += s;
                moved |= try_move(t, &mut d, &mut cur);
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    d
}

fn imag_ratio(a: &[Complex64]) -> f64 {
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let imag: f64 = a.iter().map(|z| z.im * z.im).sum();
    (imag / total).sqrt()
}

/// Per-parameter mean squared error over a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMse {
    pub amplitudes: Vec<f64>,
    /// In squared samples.
    pub delays: Vec<f64>,
    pub runs: usize,
}

impl ParameterMse {
    /// `(name, mse)` pairs in the order `a1 … aM, tau1 … tauM`.
    pub fn named(&self) -> Vec<(String, f64)> {
        let amps = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, v)| (format!("a{}", k + 1), *v));
        let taus = self
            .delays
            .iter()
            .enumerate()
            .map(|(k, v)| (format!("tau{}", k + 1), *v));
        amps.chain(taus).collect()
    }
}

/// Squared errors of one estimate against the truth, paths paired in sorted-delay order.
pub fn squared_errors(
    estimate: &MultipathChannel,
    truth: &MultipathChannel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if estimate.num_paths() != truth.num_paths() {
        return domain(format!(
            "estimate has {} paths, truth has {}",
            estimate.num_paths(),
            truth.num_paths()
        ));
    }
    let est = estimate.sorted_by_delay();
    let tru = truth.sorted_by_delay();
    let amp = est
        .amplitudes
        .iter()
        .zip(&tru.amplitudes)
        .map(|(a, b)| (a - b).powi(2))
        .collect();
    let del = est
        .delays
        .iter()
        .zip(&tru.delays)
        .map(|(a, b)| (a - b).powi(2))
        .collect();
    Ok((amp, del))
}

pub fn parameter_mse(
    estimates: &[ChannelEstimate],
    truth: &MultipathChannel,
) -> Result<ParameterMse> {
    let channels: Vec<&MultipathChannel> = estimates.iter().map(|e| &e.channel).collect();
    channel_mse(&channels, truth)
}

/// [`parameter_mse`] on bare channels.
pub fn channel_mse(
    estimates: &[&MultipathChannel],
    truth: &MultipathChannel,
) -> Result<ParameterMse> {
    if estimates.is_empty() {
        return domain("no estimates to average");
    }
    let m = truth.num_paths();
    let mut amplitudes = vec![0.0; m];
    let mut delays = vec![0.0; m];
    for est in estimates {
        let (a, d) = squared_errors(est, truth)?;
        amplitudes.iter_mut().zip(a).for_each(|(acc, v)| *acc += v);
        delays.iter_mut().zip(d).for_each(|(acc, v)| *acc += v);
    }
    let runs = estimates.len() as f64;
    amplitudes.iter_mut().for_each(|v| *v /= runs);
    delays.iter_mut().for_each(|v| *v /= runs);
    Ok(ParameterMse {
        amplitudes,
        delays,
        runs: estimates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{apply_channel, generate_chirp, ChirpSpec};

    fn chan(a: &[f64], d: &[f64]) -> MultipathChannel {
        MultipathChannel::new(a.to_vec(), d.to_vec()).unwrap()
    }

    fn est(a: &[f64], d: &[f64]) -> ChannelEstimate {
        ChannelEstimate {
            channel: chan(a, d),
            objective_at_estimate: 0.0,
            received_energy: 0.0,
            residual_imag_norm: 0.0,
            quality_warning: None,
            history: vec![],
        }
    }

    fn short_ga(seed: u64, gens: usize) -> GaConfig {
        GaConfig {
            termination: Termination::MaxGenerations(gens),
            seed,
            ..GaConfig::default()
        }
    }

    #[test]
    fn mse_exact_and_offset() {
        let truth = MultipathChannel::reference_three_path();
        let m = parameter_mse(&[est(&[1.0, -0.8, 0.4], &[200.0, 204.0, 220.0])], &truth).unwrap();
        assert!(m.amplitudes.iter().chain(&m.delays).all(|&v| v == 0.0));
        let m = parameter_mse(&[est(&[1.0, -0.8, 0.4], &[202.0, 204.0, 220.0])], &truth).unwrap();
        assert_eq!(m.delays, vec![4.0, 0.0, 0.0]);
        assert_eq!(m.named()[3], ("tau1".to_string(), 4.0));
    }

    #[test]
    fn mse_ignores_path_order() {
        let truth = MultipathChannel::reference_three_path();
        let a = est(&[1.1, -0.8, 0.45], &[200.5, 204.0, 219.0]);
        let b = est(&[0.45, 1.1, -0.8], &[219.0, 200.5, 204.0]);
        assert_eq!(
            parameter_mse(&[a], &truth).unwrap(),
            parameter_mse(&[b], &truth).unwrap()
        );
    }

    #[test]
    fn mse_rejects_path_mismatch() {
        let truth = MultipathChannel::reference_three_path();
        assert!(parameter_mse(&[est(&[1.0], &[200.0])], &truth).is_err());
        assert!(parameter_mse(&[], &truth).is_err());
    }

    #[test]
    fn identity_channel_is_recovered_in_both_modes() {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        for mode in [Mode::HybridGaLs, Mode::FullGa] {
            let mut task = EstimationTask::recommended(pulse.clone(), pulse.clone(), 1);
            task.mode = mode;
            task.refine = false;
            task.ga.termination = Termination::MaxGenerations(300);
            let e = estimate(&task).unwrap();
            let d = e.channel.delays[0];
            let dist = d.min(750.0 - d);
            assert!(dist <= 0.5, "{mode:?}: delay {d}");
            assert!(
                (e.channel.amplitudes[0] - 1.0).abs() <= 0.02,
                "{mode:?}: {:?}",
                e.channel
            );
        }
    }

    #[test]
    fn zero_record_gives_zero_estimate() {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let zeros = SampledSignal::new(vec![0.0; 1000], 1.0).unwrap();
        let mut task = EstimationTask::new(zeros, pulse, 2);
        task.mode = Mode::HybridGaLs;
        task.ga = short_ga(1, 5);
        let e = estimate(&task).unwrap();
        assert!(e.channel.amplitudes.iter().all(|a| a.abs() < 1e-12));
        assert_eq!(e.objective_at_estimate, 0.0);
        assert_eq!(e.received_energy, 0.0);
    }

    #[test]
    fn self_consistent_objective() {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let rec = apply_channel(&pulse, &MultipathChannel::reference_three_path(), 1000).unwrap();
        let mut task = EstimationTask::new(rec, pulse, 3);
        task.ga = short_ga(2, 20);
        let e = estimate(&task).unwrap();
        let again = channel_objective(&task.support().unwrap(), &e.channel, 1.0).unwrap();
        assert!(
            (again - e.objective_at_estimate).abs() <= 1e-12 * e.objective_at_estimate.max(1.0)
        );
        assert!(e.channel.delays.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(e.generations(), 20);
    }

    #[test]
    fn task_validation() {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let short = SampledSignal::new(vec![1.0; 100], 1.0).unwrap();
        assert!(EstimationTask::new(short, pulse.clone(), 1)
            .validate()
            .is_err());
        let rec = SampledSignal::new(vec![1.0; 1000], 1.0).unwrap();
        assert!(EstimationTask::new(rec.clone(), pulse.clone(), 0)
            .validate()
            .is_err());
        let zero_pulse = SampledSignal::new(vec![0.0; 10], 1.0).unwrap();
        assert!(estimate(&EstimationTask::new(rec, zero_pulse, 1)).is_err());
    }

    #[test]
    fn too_many_paths() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        // a pure tone: one usable bin
        let tone: Vec<f64> = (0..16)
            .map(|n| (2.0 * std::f64::consts::PI * 3.0 * n as f64 / 16.0).cos())
            .collect();
        let pulse = SampledSignal::new(tone, 1.0).unwrap();
        let rec = SampledSignal::new(x, 1.0).unwrap();
        let mut task = EstimationTask::new(rec, pulse, 2);
        task.threshold_frac = 0.5;
        assert!(matches!(
            estimate(&task),
            Err(Error::TooManyPaths { paths: 2, bins: 1 })
        ));
    }

    fn reference_task() -> EstimationTask {
        let pulse = generate_chirp(&ChirpSpec::default()).unwrap();
        let rec = apply_channel(&pulse, &MultipathChannel::reference_three_path(), 1000).unwrap();
        EstimationTask::recommended(rec, pulse, 3)
    }

    #[test]
    fn refinement_escapes_half_period_trap() {
        let task = reference_task();
        let support = task.support().unwrap();
        let projector = RealLsProjector::new(&support);
        let cost = |d: &[f64]| {
            projector
                .fit(&tau_to_lambda(d, 1000, 1.0))
                .unwrap()
                .residual
        };
        for start in [
            [196.0, 200.0, 224.0],
            [200.0152, 207.9652, 215.9762],
            [199.9695, 208.0564, 216.0365],
        ] {
            let d = refine_delays(cost, &start, 1e-3);
            for (got, want) in d.iter().zip([200.0, 204.0, 220.0]) {
                assert!((got - want).abs() < 1e-3, "{start:?} -> {d:?}");
            }
        }
    }

    #[test]
    fn refinement_keeps_a_minimum() {
        let cost = |d: &[f64]| (d[0] - 3.25).powi(2) + (d[1] + 1.5).powi(2);
        assert_eq!(refine_delays(cost, &[3.25, -1.5], 1e-4), vec![3.25, -1.5]);
    }

    #[test]
    fn extra_restarts_never_hurt() {
        let mut task = reference_task();
        task.refine = false;
        task.ga = short_ga(5, 30);
        task.restarts = 1;
        let one = estimate(&task).unwrap();
        task.restarts = 3;
        let three = estimate(&task).unwrap();
        let ga_best = |e: &ChannelEstimate| e.history.last().unwrap().best_ever_objective;
        assert!(ga_best(&three) <= ga_best(&one));
        assert_eq!(estimate(&task).unwrap(), three);
    }

    #[test]
    fn recommended_settings_recover_reference_channel() {
        let e = estimate(&reference_task()).unwrap();
        let truth = MultipathChannel::reference_three_path();
        for (got, want) in e.channel.delays.iter().zip(&truth.delays) {
            assert!((got - want).abs() <= 0.5, "{:?}", e.channel);
        }
        for (got, want) in e.channel.amplitudes.iter().zip(&truth.amplitudes) {
            assert!((got - want).abs() <= 0.02, "{:?}", e.channel);
        }
        assert!(e.quality_warning.is_none());
    }

    #[test]
    fn search_settings_validation() {
        let base = reference_task();
        for bad in [
            EstimationTask {
                restarts: 0,
                ..base.clone()
            },
            EstimationTask {
                threshold_frac: 1.0,
                ..base.clone()
            },
            EstimationTask {
                objective_scale: Some(0.0),
                ..base.clone()
            },
            EstimationTask {
                objective_scale: Some(f64::NAN),
                ..base.clone()
            },
            EstimationTask {
                mode: Mode::FullGa,
                ..base.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Domain(_))));
        }
        assert!(base.validate().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn refinement_never_worsens(start in proptest::collection::vec(-20.0f64..20.0, 1..4)) {
            let cost = |d: &[f64]| d.iter().enumerate().map(|(k, x)| (x * (0.7 + k as f64)).cos() + 0.01 * x * x).sum::<f64>();
            let d = refine_delays(cost, &start, 1e-2);
            proptest::prop_assert!(cost(&d) <= cost(&start));
            proptest::prop_assert_eq!(d.len(), start.len());
        }
    }

    #[test]
    fn imag_ratio_cases() {
        assert_eq!(imag_ratio(&[Complex64::new(0.0, 0.0)]), 0.0);
        assert_eq!(imag_ratio(&[Complex64::new(3.0, 4.0)]), 0.8);
    }
}
