//! Monte-Carlo MSE-vs-SNR benchmark.
//!
//! Every trial draws its noise and GA seeds from `(master_seed, snr_index,
//! trial)`, so results do not depend on how rayon schedules the trials.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::estimator::{estimate, squared_errors, EstimationTask, ParameterMse};
use crate::seed::derive_seed;
use crate::signal::{add_awgn, AwgnSpec, MultipathChannel};

const NOISE_STREAM: u64 = 0;
const GA_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    /// Estimation settings; `received` must hold the noiseless record.
    pub template: EstimationTask,
    pub truth: MultipathChannel,
    /// `f64::INFINITY` marks a noiseless entry.
    pub snr_list: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub noise_seed: u64,
    pub ga_seed: u64,
    pub estimate: MultipathChannel,
    pub objective: f64,
    pub amplitude_sq_errors: Vec<f64>,
    pub delay_sq_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrResult {
    pub snr_db: f64,
    pub mse: ParameterMse,
    /// Sorted by trial index.
    pub trials: Vec<TrialOutcome>,
}

impl SnrResult {
    /// Median over trials of the squared delay error, per path.
    pub fn median_delay_sq_error(&self) -> Vec<f64> {
        let m = self.mse.delays.len();
        (0..m)
            .map(|k| median(self.trials.iter().map(|t| t.delay_sq_errors[k]).collect()))
            .collect()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Seeds for the noise draw and the GA of one trial.
pub fn trial_seeds(master_seed: u64, snr_index: usize, trial: usize) -> (u64, u64) {
    let path = [snr_index as u64, trial as u64];
    let noise = derive_seed(master_seed, &[path[0], path[1], NOISE_STREAM]);
    let ga = derive_seed(master_seed, &[path[0], path[1], GA_STREAM]);
    (noise, ga)
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.snr_list.is_empty() {
            return domain("snr_list is empty");
        }
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if let Some(bad) = self
            .snr_list
            .iter()
            .find(|s| s.is_nan() || **s == f64::NEG_INFINITY)
        {
            return domain(format!("invalid SNR {bad}"));
        }
        if self.template.num_paths != self.truth.num_paths() {
            return domain(format!(
                "MSE needs matching path counts: estimating {}, truth has {}",
                self.template.num_paths,
                self.truth.num_paths()
            ));
        }
        self.template.validate()
    }

    fn run_trial(&self, snr_index: usize, trial: usize) -> Result<TrialOutcome> {
        let (noise_seed, ga_seed) = trial_seeds(self.master_seed, snr_index, trial);
        let awgn = AwgnSpec {
            snr_db: self.snr_list[snr_index],
            seed: noise_seed,
        };
        let mut task = self.template.clone();
        task.received = add_awgn(&self.template.received, &awgn)?;
        task.ga.seed = ga_seed;
        let est = estimate(&task)?;
        let (amplitude_sq_errors, delay_sq_errors) = squared_errors(&est.channel, &self.truth)?;
        Ok(TrialOutcome {
            trial,
            noise_seed,
            ga_seed,
            estimate: est.channel,
            objective: est.objective_at_estimate,
            amplitude_sq_errors,
            delay_sq_errors,
        })
    }
}

pub fn run_bench(plan: &BenchPlan) -> Result<Vec<SnrResult>> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = (0..plan.snr_list.len())
        .flat_map(|s| (0..plan.trials).map(move |t| (s, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = jobs
        .par_iter()
        .map(|&(s, t)| plan.run_trial(s, t))
        .collect::<Result<_>>()?;

    let m = plan.truth.num_paths();
    Ok(outcomes
        .chunks(plan.trials)
        .zip(&plan.snr_list)
        .map(|(chunk, &snr_db)| {
            let runs = chunk.len() as f64;
            let mean = |pick: fn(&TrialOutcome) -> &Vec<f64>| -> Vec<f64> {
                (0..m)
                    .map(|k| chunk.iter().map(|t| pick(t)[k]).sum::<f64>() / runs)
                    .collect()
            };
            SnrResult {
                snr_db,
                mse: ParameterMse {
                    amplitudes: mean(|t| &t.amplitude_sq_errors),
                    delays: mean(|t| &t.delay_sq_errors),
                    runs: chunk.len(),
                },
                trials: chunk.to_vec(),
            }
        })
        .collect())
}
