//! Scenario configuration: a TOML file with dotted sections, overridable
//! key by key from the command line.

use std::path::Path;

use multipath_core::bench::{trial_seeds, BenchPlan};
use multipath_core::estimator::{EstimationTask, Mode, SearchSpace};
use multipath_core::ga::{CrossoverKind, GaConfig, Termination};
use multipath_core::signal::{
    add_awgn, apply_channel, generate_chirp, AwgnSpec, ChirpSpec, MultipathChannel, SampledSignal,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Master seed; every noise draw and GA run derives from it.
    pub seed: u64,
    pub chirp: ChirpSection,
    pub channel: ChannelSection,
    pub record: RecordSection,
    pub noise: NoiseSection,
    pub estimator: EstimatorSection,
    pub ga: GaSection,
    pub bench: BenchSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChirpSection {
    pub n_sig: usize,
    /// Defaults to `n_sig / 10`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_w: Option<usize>,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub amplitudes: Vec<f64>,
    /// In samples.
    pub delays: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordSection {
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Absent means noiseless.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Full,
    Hybrid,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Full => Mode::FullGa,
            ModeName::Hybrid => Mode::HybridGaLs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub mode: ModeName,
    /// Defaults to the number of configured channel paths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_paths: Option<usize>,
    pub threshold_frac: f64,
    pub restarts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_scale: Option<f64>,
    pub refine: bool,
    pub delay_bits: u32,
    pub amplitude_bits: u32,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverName {
    #[default]
    OnePoint,
    NPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationName {
    #[default]
    MaxGenerations,
    FitnessPlateau,
    UniformPopulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub population_size: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub crossover: CrossoverName,
    /// Cut points for `n_point` crossover.
    pub crossover_points: usize,
    pub termination: TerminationName,
    pub plateau_window: usize,
    pub plateau_epsilon: f64,
    /// Run length for `max_generations`, hard cap for the other rules.
    pub max_generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub snr_list: Vec<f64>,
    pub trials: usize,
}

impl Default for ChirpSection {
    fn default() -> Self {
        let c = ChirpSpec::default();
        Self {
            n_sig: c.n_sig,
            n_w: None,
            f1: c.f1,
            f2: c.f2,
        }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = MultipathChannel::reference_three_path();
        Self {
            amplitudes: c.amplitudes,
            delays: c.delays,
        }
    }
}

impl Default for RecordSection {
    fn default() -> Self {
        Self { len: 1000 }
    }
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let s = SearchSpace::default();
        Self {
            mode: ModeName::default(),
            num_paths: None,
            threshold_frac: multipath_core::spectral::DEFAULT_THRESHOLD_FRAC,
            restarts: 1,
            objective_scale: None,
            refine: false,
            delay_bits: s.delay_bits,
            amplitude_bits: s.amplitude_bits,
            amplitude_min: s.amplitude_min,
            amplitude_max: s.amplitude_max,
        }
    }
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaConfig::default();
        Self {
            population_size: g.population_size,
            crossover_prob: g.crossover_prob,
            mutation_prob: g.mutation_prob,
            elitism_count: g.elitism_count,
            crossover: CrossoverName::OnePoint,
            crossover_points: 2,
            termination: TerminationName::MaxGenerations,
            plateau_window: 50,
            plateau_epsilon: 1e-9,
            max_generations: g.max_generations,
        }
    }
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            snr_list: vec![20.0, 10.0, 0.0, -10.0],
            trials: 50,
        }
    }
}

/// Parses a command-line override value as a TOML literal, falling back to
/// a bare string so `--estimator.mode hybrid` works without quotes.
fn override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::Config(format!("bad key `{key}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{p}` in `{key}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl ScenarioConfig {
    /// Parses `text`, then applies `(dotted.key, value)` overrides in order.
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> Result<Self, CliError> {
        // Parse the file on its own first so errors carry its line numbers.
        let parsed: Self =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if overrides.is_empty() {
            return Ok(parsed);
        }
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        for (key, raw) in overrides {
            set_dotted(&mut table, key, override_value(raw))?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Config(format!("override: {e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML form of the effective configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn chirp_spec(&self) -> ChirpSpec {
        ChirpSpec {
            n_sig: self.chirp.n_sig,
            n_w: self.chirp.n_w.unwrap_or(self.chirp.n_sig / 10),
            f1: self.chirp.f1,
            f2: self.chirp.f2,
        }
    }

    pub fn channel(&self) -> Result<MultipathChannel, CliError> {
        MultipathChannel::new(self.channel.amplitudes.clone(), self.channel.delays.clone())
            .map_err(config_err("channel"))
    }

    pub fn num_paths(&self) -> usize {
        self.estimator
            .num_paths
            .unwrap_or(self.channel.amplitudes.len())
    }

    pub fn pulse(&self) -> Result<SampledSignal, CliError> {
        generate_chirp(&self.chirp_spec()).map_err(config_err("chirp"))
    }

    pub fn clean_record(&self) -> Result<SampledSignal, CliError> {
        apply_channel(&self.pulse()?, &self.channel()?, self.record.len)
            .map_err(config_err("record"))
    }

    pub fn awgn(&self) -> AwgnSpec {
        let (noise_seed, _) = trial_seeds(self.seed, 0, 0);
        match self.noise.snr_db {
            Some(snr_db) => AwgnSpec {
                snr_db,
                seed: noise_seed,
            },
            None => AwgnSpec::noiseless(),
        }
    }

    /// The configured record, noisy if `noise.snr_db` is set.
    pub fn received(&self) -> Result<SampledSignal, CliError> {
        add_awgn(&self.clean_record()?, &self.awgn()).map_err(config_err("noise"))
    }

    pub fn ga_config(&self) -> GaConfig {
        let g = &self.ga;
        GaConfig {
            population_size: g.population_size,
            crossover_prob: g.crossover_prob,
            mutation_prob: g.mutation_prob,
            elitism_count: g.elitism_count,
            termination: match g.termination {
                TerminationName::MaxGenerations => Termination::MaxGenerations(g.max_generations),
                TerminationName::FitnessPlateau => Termination::FitnessPlateau {
                    window: g.plateau_window,
                    epsilon: g.plateau_epsilon,
                },
                TerminationName::UniformPopulation => Termination::UniformPopulation,
            },
            max_generations: g.max_generations,
            crossover: match g.crossover {
                CrossoverName::OnePoint => CrossoverKind::OnePoint,
                CrossoverName::NPoint => CrossoverKind::NPoint(g.crossover_points),
            },
            seed: trial_seeds(self.seed, 0, 0).1,
        }
    }

    /// Estimation task on `received` with every configured setting.
    pub fn task(&self, received: SampledSignal) -> Result<EstimationTask, CliError> {
        let e = &self.estimator;
        let task = EstimationTask {
            received,
            pulse: self.pulse()?,
            num_paths: self.num_paths(),
            threshold_frac: e.threshold_frac,
            mode: e.mode.into(),
            ga: self.ga_config(),
            search: SearchSpace {
                delay_bits: e.delay_bits,
                amplitude_bits: e.amplitude_bits,
                amplitude_min: e.amplitude_min,
                amplitude_max: e.amplitude_max,
            },
            restarts: e.restarts,
            objective_scale: e.objective_scale,
            refine: e.refine,
        };
        task.validate().map_err(config_err("estimator/ga"))?;
        Ok(task)
    }

    pub fn bench_plan(&self) -> Result<BenchPlan, CliError> {
        let plan = BenchPlan {
            template: self.task(self.clean_record()?)?,
            truth: self.channel()?,
            snr_list: self.bench.snr_list.clone(),
            trials: self.bench.trials,
            master_seed: self.seed,
        };
        plan.validate().map_err(config_err("bench"))?;
        Ok(plan)
    }

    /// Checks everything the synth, sweep and estimate commands depend on.
    /// The bench command additionally needs [`Self::bench_plan`].
    pub fn validate(&self) -> Result<(), CliError> {
        self.chirp_spec().validate().map_err(config_err("chirp"))?;
        if let Some(snr) = self.noise.snr_db {
            if snr.is_nan() || snr == f64::NEG_INFINITY {
                return Err(CliError::Config(format!(
                    "noise.snr_db: invalid value {snr}"
                )));
            }
        }
        self.task(self.received()?)?;
        Ok(())
    }
}

fn config_err(section: &'static str) -> impl Fn(multipath_core::Error) -> CliError {
    move |e| CliError::Config(format!("{section}: {e}"))
}
