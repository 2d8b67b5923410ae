//! Config and plan files.
//!
//! Both use TOML syntax. System keys are the [`SystemConfig`] field names; a
//! scalar given for a per-device field is broadcast to all devices. The AWGN
//! power may be given directly (`awgn_power`, watts) or derived from
//! `noise_psd_dbm_hz`, `noise_figure_db` and `bandwidth_hz`.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use crane_core::baselines::Scheme;
use crane_core::model::noise_power_watts;
use crane_core::scenario::GeometryParams;
use crane_core::SystemConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PerDevice {
    One(f64),
    Many(Vec<f64>),
}

impl PerDevice {
    fn expand(&self, field: &str, devices: usize) -> Result<Vec<f64>> {
        match self {
            PerDevice::One(v) => Ok(vec![*v; devices]),
            PerDevice::Many(v) if v.len() == devices => Ok(v.clone()),
            PerDevice::Many(v) => bail!("`{field}` has {} entries but devices = {devices}", v.len()),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    devices: Option<usize>,
    rrhs: Option<usize>,
    antennas: Option<usize>,
    dims: Option<usize>,
    classes: Option<usize>,
    fronthaul_capacity: Option<f64>,
    max_precoding_power: Option<PerDevice>,
    energy_budget: Option<f64>,
    slot_duration: Option<f64>,
    signal_second_moment: Option<PerDevice>,
    awgn_power: Option<f64>,
    noise_psd_dbm_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    bandwidth_hz: Option<f64>,
    sensing_noise_power: Option<PerDevice>,
    rng_seed: Option<u64>,

    sweep_axis: Option<String>,
    sweep_values: Option<Vec<f64>>,
    schemes: Option<Vec<String>>,
    n_trials: Option<usize>,
    n_inference_samples: Option<usize>,
    output: Option<PathBuf>,
    separation: Option<f64>,
    inner_radius: Option<f64>,
    outer_radius: Option<f64>,
    features_csv: Option<PathBuf>,
    timing: Option<bool>,
    sample_dump: Option<PathBuf>,
    dump_samples: Option<usize>,
}

impl RawFile {
    fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    fn system(&self) -> Result<SystemConfig> {
        let mut cfg = SystemConfig::desk();
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.devices, self.devices);
        set(&mut cfg.rrhs, self.rrhs);
        set(&mut cfg.antennas, self.antennas);
        set(&mut cfg.dims, self.dims);
        set(&mut cfg.classes, self.classes);
        let k = cfg.devices;
        let defaults = SystemConfig::uniform(k, cfg.rrhs, cfg.antennas, cfg.dims, cfg.classes);
        cfg.max_precoding_power = defaults.max_precoding_power;
        cfg.signal_second_moment = defaults.signal_second_moment;
        cfg.sensing_noise_power = defaults.sensing_noise_power;
        if let Some(v) = self.fronthaul_capacity {
            cfg.fronthaul_capacity = v;
        }
        if let Some(v) = self.energy_budget {
            cfg.energy_budget = v;
        }
        if let Some(v) = self.slot_duration {
            cfg.slot_duration = v;
        }
        if let Some(v) = self.rng_seed {
            cfg.rng_seed = v;
        }
        if let Some(v) = &self.max_precoding_power {
            cfg.max_precoding_power = v.expand("max_precoding_power", k)?;
        }
        if let Some(v) = &self.signal_second_moment {
            cfg.signal_second_moment = v.expand("signal_second_moment", k)?;
        }
        if let Some(v) = &self.sensing_noise_power {
            cfg.sensing_noise_power = v.expand("sensing_noise_power", k)?;
        }
        let derived = self.noise_psd_dbm_hz.is_some() || self.noise_figure_db.is_some() || self.bandwidth_hz.is_some();
        match (self.awgn_power, derived) {
            (Some(_), true) => bail!("give either `awgn_power` or the noise PSD keys, not both"),
            (Some(v), false) => cfg.awgn_power = v,
            (None, true) => {
                cfg.awgn_power = noise_power_watts(
                    self.noise_psd_dbm_hz.unwrap_or(-169.0),
                    self.noise_figure_db.unwrap_or(7.0),
                    self.bandwidth_hz.unwrap_or(1e6),
                )
            }
            (None, false) => {}
        }
        cfg.validate().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// Parses a system config; plan keys are accepted and ignored.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    RawFile::parse(text)?.system()
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

/// The budget varied by a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    FronthaulCapacity,
    EnergyBudget,
    /// Broadcast value of `max_precoding_power`.
    Power,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::FronthaulCapacity => "fronthaul_capacity",
            SweepAxis::EnergyBudget => "energy_budget",
            SweepAxis::Power => "power",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "fronthaul_capacity" => SweepAxis::FronthaulCapacity,
            "energy_budget" => SweepAxis::EnergyBudget,
            "power" => SweepAxis::Power,
            _ => bail!("unknown sweep_axis `{s}` (expected fronthaul_capacity, energy_budget or power)"),
        })
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = base.clone();
        match self {
            SweepAxis::FronthaulCapacity => cfg.fronthaul_capacity = value,
            SweepAxis::EnergyBudget => cfg.energy_budget = value,
            SweepAxis::Power => cfg.max_precoding_power = vec![value; cfg.devices],
        }
        cfg.validate().map_err(|e| anyhow::anyhow!("sweep value {value}: {e}"))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: SystemConfig,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub n_trials: usize,
    pub n_inference_samples: usize,
    pub output: PathBuf,
    /// Target RMS class-mean separation of synthetic mixtures.
    pub separation: f64,
    pub geometry: GeometryParams,
    /// Labelled features to fit the mixture from, instead of synthesizing one per trial.
    pub features_csv: Option<PathBuf>,
    /// Record wall-clock times. Off by default so result files are reproducible.
    pub timing: bool,
    pub sample_dump: Option<PathBuf>,
    pub dump_samples: usize,
}

impl ExperimentPlan {
    /// Parses a plan. Relative paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw = RawFile::parse(text)?;
        let base = raw.system()?;
        let sweep_axis = SweepAxis::parse(raw.sweep_axis.as_deref().unwrap_or("fronthaul_capacity"))?;
        let sweep_values = match &raw.sweep_values {
            Some(v) if !v.is_empty() => v.clone(),
            Some(_) => bail!("`sweep_values` must not be empty"),
            None => vec![match sweep_axis {
                SweepAxis::FronthaulCapacity => base.fronthaul_capacity,
                SweepAxis::EnergyBudget => base.energy_budget,
                SweepAxis::Power => base.max_precoding_power[0],
            }],
        };
        for &v in &sweep_values {
            sweep_axis.apply(&base, v)?;
        }
        let schemes = match &raw.schemes {
            None => Scheme::ALL.to_vec(),
            Some(names) if names.is_empty() => bail!("`schemes` must not be empty"),
            Some(names) => names
                .iter()
                .map(|n| Scheme::from_name(n).with_context(|| format!("unknown scheme `{n}`")))
                .collect::<Result<_>>()?,
        };
        let n_trials = raw.n_trials.unwrap_or(10);
        if n_trials == 0 {
            bail!("`n_trials` must be at least 1");
        }
        let separation = raw.separation.unwrap_or(1.0);
        if !(separation.is_finite() && separation > 0.0) {
            bail!("`separation` must be finite and positive");
        }
        let defaults = GeometryParams::default();
        let geometry = GeometryParams {
            inner_radius: raw.inner_radius.unwrap_or(defaults.inner_radius),
            outer_radius: raw.outer_radius.unwrap_or(defaults.outer_radius),
        };
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base_dir.join(p) };
        Ok(Self {
            base,
            sweep_axis,
            sweep_values,
            schemes,
            n_trials,
            n_inference_samples: raw.n_inference_samples.unwrap_or(10_000),
            output: resolve(raw.output.as_ref().unwrap_or(&PathBuf::from("results.csv"))),
            separation,
            geometry,
            features_csv: raw.features_csv.as_ref().map(resolve),
            timing: raw.timing.unwrap_or(false),
            sample_dump: raw.sample_dump.as_ref().map(resolve),
            dump_samples: raw.dump_samples.unwrap_or(100),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, dir).with_context(|| format!("in {}", path.display()))
    }

    /// Sweep values in increasing order with their positions in the plan.
    pub fn ascending_sweep(&self) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.sweep_values.iter().copied().enumerate().collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_broadcast_to_devices() {
        let cfg = parse_config("devices = 3\nmax_precoding_power = 0.5\nsensing_noise_power = [0.1, 0.2, 0.3]\n").unwrap();
        assert_eq!(cfg.max_precoding_power, vec![0.5; 3]);
        assert_eq!(cfg.sensing_noise_power, vec![0.1, 0.2, 0.3]);
        assert_eq!(cfg.signal_second_moment, vec![1.0; 3]);
    }

    #[test]
    fn wrong_vector_length_names_the_field() {
        let err = parse_config("devices = 2\nsensing_noise_power = [0.1, 0.2, 0.3]\n").unwrap_err();
        assert!(format!("{err:#}").contains("sensing_noise_power"));
    }

    #[test]
    fn invalid_budget_is_rejected() {
        let err = parse_config("energy_budget = 0.0\n").unwrap_err();
        assert!(format!("{err:#}").contains("energy_budget"));
        assert!(parse_config("bogus = 1\n").is_err());
    }

    #[test]
    fn noise_power_from_psd() {
        let cfg = parse_config("noise_psd_dbm_hz = -169.0\nnoise_figure_db = 7.0\nbandwidth_hz = 1e6\n").unwrap();
        assert_eq!(cfg.awgn_power, noise_power_watts(-169.0, 7.0, 1e6));
        assert!(parse_config("awgn_power = 1.0\nbandwidth_hz = 1e6\n").is_err());
    }

    #[test]
    fn plan_defaults_and_validation() {
        let plan = ExperimentPlan::parse("sweep_values = [4.0, 2.0]\nschemes = [\"proposed\"]\n", Path::new("/tmp")).unwrap();
        assert_eq!(plan.sweep_axis, SweepAxis::FronthaulCapacity);
        assert_eq!(plan.schemes, vec![Scheme::Proposed]);
        assert_eq!(plan.ascending_sweep(), vec![(1, 2.0), (0, 4.0)]);
        assert_eq!(plan.output, PathBuf::from("/tmp/results.csv"));
        assert!(ExperimentPlan::parse("sweep_values = []\n", Path::new(".")).is_err());
        assert!(ExperimentPlan::parse("n_trials = 0\n", Path::new(".")).is_err());
        assert!(ExperimentPlan::parse("schemes = [\"nope\"]\n", Path::new(".")).is_err());
        assert!(ExperimentPlan::parse("sweep_axis = \"energy_budget\"\nsweep_values = [-1.0]\n", Path::new(".")).is_err());
    }
}
