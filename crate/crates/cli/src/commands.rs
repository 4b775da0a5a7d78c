//! The four subcommands. Each validates the whole configuration before
//! computing anything and returns the lines it wants printed.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use multipath_core::bench::run_bench;
use multipath_core::estimator::{channel_objective, estimate};
use multipath_core::signal::MultipathChannel;

use crate::config::ScenarioConfig;
use crate::csvio::{fmt_f64, write_csv, Metadata};
use crate::CliError;

/// What a command wrote and what it wants to tell the user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

fn metadata(cfg: &ScenarioConfig, command: &str) -> Metadata {
    Metadata {
        master_seed: cfg.seed,
        config_hash: cfg.hash(),
        extra: vec![("command".into(), command.into())],
    }
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

fn indexed_rows(values: &[f64]) -> impl Iterator<Item = Vec<String>> + '_ {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
}

pub fn synth(cfg: &ScenarioConfig, out: &Path) -> Result<Report, CliError> {
    cfg.validate()?;
    prepare_out(out)?;
    let pulse = cfg.pulse()?;
    let clean = cfg.clean_record()?;
    let received = cfg.received()?;
    let meta = metadata(cfg, "synth");
    let pulse_path = out.join("pulse.csv");
    let received_path = out.join("received.csv");
    write_csv(
        &pulse_path,
        &meta,
        &["index", "value"],
        indexed_rows(pulse.samples()),
    )?;
    write_csv(
        &received_path,
        &meta,
        &["index", "value"],
        indexed_rows(received.samples()),
    )?;

    let mut lines = vec![format!("record power: {:.6e}", received.power())];
    if let Some(snr_db) = cfg.noise.snr_db.filter(|s| s.is_finite()) {
        let noise_power = received
            .samples()
            .iter()
            .zip(clean.samples())
            .map(|(r, c)| (r - c).powi(2))
            .sum::<f64>()
            / received.len() as f64;
        let empirical = 10.0 * (clean.power() / noise_power).log10();
        lines.push(format!(
            "requested SNR: {snr_db} dB, realised SNR: {empirical:.3} dB"
        ));
    }
    Ok(Report {
        files: vec![pulse_path, received_path],
        lines,
        warnings: vec![],
    })
}

/// A sweepable channel parameter, 1-based as in `tau1` or `a2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Delay(usize),
    Amplitude(usize),
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("unknown parameter `{s}` (expected tau<k> or a<k>)"));
        let (ctor, digits): (fn(usize) -> SweepParam, &str) = if let Some(d) = s.strip_prefix("tau")
        {
            (SweepParam::Delay, d)
        } else if let Some(d) = s.strip_prefix('a') {
            (SweepParam::Amplitude, d)
        } else {
            return Err(bad());
        };
        match digits.parse::<usize>() {
            Ok(k) if k >= 1 && !digits.starts_with('+') => Ok(ctor(k)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepParam::Delay(k) => write!(f, "tau{k}"),
            SweepParam::Amplitude(k) => write!(f, "a{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepRange {
    /// One record period in whole samples for delays, `[-2, 2]` for amplitudes.
    pub fn default_for(param: SweepParam, cfg: &ScenarioConfig) -> Self {
        match param {
            SweepParam::Delay(_) => Self {
                from: 0.0,
                to: (cfg.record.len - 1) as f64,
                steps: cfg.record.len,
            },
            SweepParam::Amplitude(_) => Self {
                from: -2.0,
                to: 2.0,
                steps: 401,
            },
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps).map(move |i| {
            if i + 1 == self.steps {
                self.to
            } else {
                self.from + h * i as f64
            }
        })
    }
}

/// Error-surface slice: every parameter but one held at the configured truth.
pub fn sweep(
    cfg: &ScenarioConfig,
    out: &Path,
    param: SweepParam,
    range: SweepRange,
) -> Result<Report, CliError> {
    cfg.validate()?;
    let m = cfg.channel.amplitudes.len();
    let k = match param {
        SweepParam::Delay(k) | SweepParam::Amplitude(k) => k,
    };
    if k > m {
        return Err(CliError::Config(format!(
            "parameter `{param}` does not exist for {m} paths"
        )));
    }
    if range.steps < 2
        || !(range.from.is_finite() && range.to.is_finite())
        || range.from >= range.to
    {
        return Err(CliError::Config(format!(
            "sweep range needs finite from < to and at least 2 steps, got {} to {} in {}",
            range.from, range.to, range.steps
        )));
    }
    prepare_out(out)?;
    let truth = cfg.channel()?;
    let task = cfg.task(cfg.received()?)?;
    let support = task.support()?;
    let t_s = task.received.t_s();

    let mut rows = Vec::with_capacity(range.steps);
    for x in range.points() {
        let mut ch: MultipathChannel = truth.clone();
        match param {
            SweepParam::Delay(k) => ch.delays[k - 1] = x,
            SweepParam::Amplitude(k) => ch.amplitudes[k - 1] = x,
        }
        rows.push((x, channel_objective(&support, &ch, t_s)?));
    }
    let (arg, min) = rows
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two sweep points");

    let path = out.join(format!("sweep_{param}.csv"));
    let mut meta = metadata(cfg, "sweep");
    meta.extra.push(("parameter".into(), param.to_string()));
    write_csv(
        &path,
        &meta,
        &["parameter_value", "E_c"],
        rows.iter().map(|(x, e)| vec![fmt_f64(*x), fmt_f64(*e)]),
    )?;
    Ok(Report {
        files: vec![path],
        lines: vec![format!("argmin {param} = {arg} (E_c = {min:.6e})")],
        warnings: vec![],
    })
}

pub fn estimate_once(cfg: &ScenarioConfig, out: &Path) -> Result<Report, CliError> {
    cfg.validate()?;
    prepare_out(out)?;
    let task = cfg.task(cfg.received()?)?;
    let started = Instant::now();
    let est = estimate(&task)?;
    let wall = started.elapsed();

    let ch = &est.channel;
    let mut rows: Vec<(String, String)> = Vec::new();
    for (k, a) in ch.amplitudes.iter().enumerate() {
        rows.push((format!("a{}", k + 1), fmt_f64(*a)));
    }
    for (k, d) in ch.delays.iter().enumerate() {
        rows.push((format!("tau{}", k + 1), fmt_f64(*d)));
    }
    rows.push(("objective".into(), fmt_f64(est.objective_at_estimate)));
    rows.push(("received_energy".into(), fmt_f64(est.received_energy)));
    rows.push(("residual_imag_norm".into(), fmt_f64(est.residual_imag_norm)));
    rows.push(("generations".into(), est.generations().to_string()));

    let meta = metadata(cfg, "estimate");
    let report_path = out.join("estimate.csv");
    let history_path = out.join("history.csv");
    write_csv(
        &report_path,
        &meta,
        &["parameter", "value"],
        rows.iter().map(|(k, v)| vec![k.clone(), v.clone()]),
    )?;
    write_csv(
        &history_path,
        &meta,
        &["generation", "best_E_c", "mean_E_c"],
        est.history.iter().map(|h| {
            vec![
                h.generation.to_string(),
                fmt_f64(h.best_objective),
                fmt_f64(h.mean_objective),
            ]
        }),
    )?;

    let mut lines: Vec<String> = ch
        .amplitudes
        .iter()
        .zip(&ch.delays)
        .enumerate()
        .map(|(k, (a, d))| format!("path {}: a = {a:.6}, tau = {d:.4} samples", k + 1))
        .collect();
    lines.push(format!(
        "objective {:.6e} ({:.3e} of received energy), {} generations",
        est.objective_at_estimate,
        est.objective_at_estimate / est.received_energy.max(f64::MIN_POSITIVE),
        est.generations()
    ));
    lines.push(format!("wall time {:.3} s", wall.as_secs_f64()));
    Ok(Report {
        files: vec![report_path, history_path],
        lines,
        warnings: est.quality_warning.into_iter().collect(),
    })
}

pub fn bench(cfg: &ScenarioConfig, out: &Path) -> Result<Report, CliError> {
    cfg.validate()?;
    let plan = cfg.bench_plan()?;
    prepare_out(out)?;
    let started = Instant::now();
    let results = run_bench(&plan)?;
    let wall = started.elapsed();

    let meta = metadata(cfg, "bench");
    let mse_path = out.join("bench.csv");
    let trials_path = out.join("bench_trials.csv");
    let mut mse_rows = Vec::new();
    for r in &results {
        for (name, mse) in r.mse.named() {
            mse_rows.push(vec![
                fmt_f64(r.snr_db),
                name,
                fmt_f64(mse),
                r.mse.runs.to_string(),
            ]);
        }
    }
    write_csv(
        &mse_path,
        &meta,
        &["snr_db", "parameter_name", "mse", "trials"],
        mse_rows,
    )?;

    let m = plan.truth.num_paths();
    let mut header: Vec<String> = ["snr_db", "trial", "noise_seed", "ga_seed", "objective"]
        .map(String::from)
        .to_vec();
    header.extend((1..=m).map(|k| format!("a{k}")));
    header.extend((1..=m).map(|k| format!("tau{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let trial_rows = results.iter().flat_map(|r| {
        r.trials.iter().map(move |t| {
            let mut row = vec![
                fmt_f64(r.snr_db),
                t.trial.to_string(),
                t.noise_seed.to_string(),
                t.ga_seed.to_string(),
                fmt_f64(t.objective),
            ];
            row.extend(
                t.estimate
                    .amplitudes
                    .iter()
                    .chain(&t.estimate.delays)
                    .map(|v| fmt_f64(*v)),
            );
            row
        })
    });
    write_csv(&trials_path, &meta, &header_refs, trial_rows)?;

    let mut lines: Vec<String> = results
        .iter()
        .map(|r| {
            let med: Vec<String> = r
                .median_delay_sq_error()
                .iter()
                .map(|v| format!("{v:.3e}"))
                .collect();
            format!(
                "SNR {} dB: median squared delay error [{}]",
                r.snr_db,
                med.join(", ")
            )
        })
        .collect();
    lines.push(format!("wall time {:.3} s", wall.as_secs_f64()));
    Ok(Report {
        files: vec![mse_path, trials_path],
        lines,
        warnings: vec![],
    })
}
