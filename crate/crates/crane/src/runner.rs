//! Batch runner: trials x sweep values x schemes, one CSV row per cell.
//!
//! Trial `t` draws its geometry, channels and (unless fitted from data) its
//! mixture from a stream seeded with `seed + t`; every sweep value and scheme
//! of the trial reuses them. Sweep values are processed in increasing order so
//! each scheme can start from its own design at the previous, tighter budget,
//! and baselines run before the proposed method, which also starts from the
//! best baseline design of the cell.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use crane_core::baselines::{run_scheme, Scheme};
use crane_core::inference::{estimate_accuracy, Classifier};
use crane_core::metrics::received_discriminant_gain;
use crane_core::sca::{ScaOptions, ScaState};
use crane_core::scenario::{generate_channels, random_instance, sample_geometry};
use crane_core::simulate::{audit_solution, ForwardChain};
use crane_core::{ChannelSet, DesignSolution, Error as CoreError, FeatureStatistics, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentPlan, SweepAxis};
use crate::dataset::{fit_statistics, load_labelled};

pub const RESULT_HEADER: [&str; 10] =
    ["trial", "sweep_axis", "sweep_value", "scheme", "disc_gain", "accuracy", "acc_stderr", "iterations", "wall_ms", "status"];

pub const SAMPLE_HEADER: [&str; 4] = ["trial", "class", "d", "s_hat"];

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// A subproblem could not be certified; the last accepted point is reported.
    Stalled(String),
    Failed(String),
}

impl CellStatus {
    pub fn succeeded(&self) -> bool {
        !matches!(self, CellStatus::Failed(_))
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Stalled(m) => write!(f, "stalled: {m}"),
            CellStatus::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trial: usize,
    pub sweep_axis: SweepAxis,
    /// Position of the sweep value in the plan.
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub scheme: Scheme,
    /// Position of the scheme in the plan.
    pub scheme_index: usize,
    pub disc_gain: Option<f64>,
    pub accuracy: Option<f64>,
    pub acc_stderr: Option<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub status: CellStatus,
}

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        vec![
            self.trial.to_string(),
            self.sweep_axis.to_string(),
            self.sweep_value.to_string(),
            self.scheme.name().to_string(),
            opt(self.disc_gain),
            opt(self.accuracy),
            opt(self.acc_stderr),
            self.iterations.to_string(),
            self.wall_ms.to_string(),
            self.status.to_string(),
        ]
    }

    fn sort_key(&self) -> (usize, usize, usize) {
        (self.trial, self.sweep_index, self.scheme_index)
    }
}

/// Everything the runner produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Rows in canonical order: trial, then sweep value and scheme in plan order.
    pub rows: Vec<ResultRow>,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub workers: usize,
    pub sca: ScaOptions,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, workers: 1, sca: ScaOptions::default() }
    }
}

/// Channels and mixture of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub channels: ChannelSet,
    pub stats: FeatureStatistics,
}

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

pub fn trial_data(plan: &ExperimentPlan, fitted: Option<&FeatureStatistics>, seed: u64, trial: usize) -> Result<TrialData> {
    let mut rng = trial_rng(seed, trial);
    let to_any = |e: CoreError| anyhow::anyhow!("{e}");
    Ok(match fitted {
        Some(stats) => {
            let p = sample_geometry(&plan.base, &plan.geometry, &mut rng).map_err(to_any)?;
            TrialData { channels: generate_channels(&p, &plan.base, &mut rng).map_err(to_any)?, stats: stats.clone() }
        }
        None => {
            let inst = random_instance(&plan.base, &plan.geometry, plan.separation, &mut rng).map_err(to_any)?;
            TrialData { channels: inst.channels, stats: inst.stats }
        }
    })
}

/// Mixture fitted from the plan's feature table, if it names one.
pub fn fitted_statistics(plan: &ExperimentPlan) -> Result<Option<FeatureStatistics>> {
    let Some(path) = &plan.features_csv else { return Ok(None) };
    let table = load_labelled(path)?;
    if table.label_names.len() != plan.base.classes {
        bail!("{} has {} classes but the plan sets classes = {}", path.display(), table.label_names.len(), plan.base.classes);
    }
    Ok(Some(fit_statistics(&table, plan.base.dims)?))
}

/// Stream id of the inference draws of one cell.
fn cell_stream(sweep_index: usize, scheme: Scheme) -> u64 {
    let code = Scheme::ALL.iter().position(|s| *s == scheme).unwrap_or(0) as u64;
    1 + sweep_index as u64 * Scheme::ALL.len() as u64 + code
}

/// Schemes in execution order: baselines first.
fn execution_order(plan: &ExperimentPlan) -> Vec<(usize, Scheme)> {
    let mut v: Vec<(usize, Scheme)> = plan.schemes.iter().copied().enumerate().collect();
    v.sort_by_key(|(i, s)| (*s == Scheme::Proposed, *i));
    v
}

/// Runs one scheme on one cell; the design is returned when it is usable as a warm start.
pub fn run_cell(
    scheme: Scheme,
    cfg: &SystemConfig,
    data: &TrialData,
    candidates: &[&DesignSolution],
    sca: &ScaOptions,
) -> (Option<DesignSolution>, Option<ScaState>, CellStatus) {
    match run_scheme(scheme, None, cfg, &data.channels, &data.stats, candidates, sca) {
        Ok((sol, state)) => (Some(sol), Some(state), CellStatus::Ok),
        Err(f) => {
            let usable = f.state.iteration > 0
                && matches!(f.error, CoreError::Solver { .. })
                && audit_solution(&f.state.solution, &data.channels, cfg).is_ok_and(|a| a.feasible());
            if usable {
                (Some(f.state.solution.clone()), Some(f.state.clone()), CellStatus::Stalled(f.error.to_string()))
            } else {
                (None, Some(f.state), CellStatus::Failed(f.error.to_string()))
            }
        }
    }
}

/// All cells of one trial. `emit` receives each row as soon as it is complete,
/// and `dump` the received samples of the designated cell.
pub fn run_trial(
    plan: &ExperimentPlan,
    fitted: Option<&FeatureStatistics>,
    trial: usize,
    opts: &RunOptions,
    mut emit: impl FnMut(ResultRow),
    mut dump: impl FnMut(Vec<Vec<String>>),
) {
    let data = match trial_data(plan, fitted, opts.seed, trial) {
        Ok(d) => Some(d),
        Err(e) => {
            for (si, value) in plan.ascending_sweep() {
                for (ci, scheme) in execution_order(plan) {
                    emit(failed_row(plan, trial, si, value, ci, scheme, format!("{e:#}")));
                }
            }
            None
        }
    };
    let Some(data) = data else { return };
    let mut previous: HashMap<Scheme, DesignSolution> = HashMap::new();
    let dump_cell = plan.sample_dump.as_ref().map(|_| {
        let first = plan.ascending_sweep()[0].0;
        let scheme = if plan.schemes.contains(&Scheme::Proposed) { Scheme::Proposed } else { plan.schemes[0] };
        (first, scheme)
    });
    for (si, value) in plan.ascending_sweep() {
        let cfg = match plan.sweep_axis.apply(&plan.base, value) {
            Ok(c) => c,
            Err(e) => {
                for (ci, scheme) in execution_order(plan) {
                    emit(failed_row(plan, trial, si, value, ci, scheme, format!("{e:#}")));
                }
                continue;
            }
        };
        let mut cell_designs: Vec<DesignSolution> = Vec::new();
        for (ci, scheme) in execution_order(plan) {
            let start = Instant::now();
            let mut cands: Vec<&DesignSolution> = previous.get(&scheme).into_iter().collect();
            if scheme == Scheme::Proposed {
                cands.extend(cell_designs.iter());
            }
            let (sol, state, mut status) = run_cell(scheme, &cfg, &data, &cands, &opts.sca);
            let iterations = state.as_ref().map_or(0, |s| s.iteration);
            let mut row = ResultRow {
                trial,
                sweep_axis: plan.sweep_axis,
                sweep_index: si,
                sweep_value: value,
                scheme,
                scheme_index: ci,
                disc_gain: None,
                accuracy: None,
                acc_stderr: None,
                iterations,
                wall_ms: 0.0,
                status: CellStatus::Ok,
            };
            if let Some(sol) = sol {
                row.disc_gain = Some(received_discriminant_gain(&sol, &data.stats, &cfg));
                if plan.n_inference_samples > 0 {
                    let mut rng = trial_rng(opts.seed, trial);
                    rng.set_stream(cell_stream(si, scheme));
                    let clf = Classifier::map_aggregate(&sol, &data.stats, &cfg);
                    match estimate_accuracy(&clf, &sol, &data.stats, &data.channels, &cfg, plan.n_inference_samples, &mut rng) {
                        Ok(a) => {
                            row.accuracy = Some(a.accuracy);
                            row.acc_stderr = Some(a.stderr);
                        }
                        Err(e) => status = CellStatus::Failed(e.to_string()),
                    }
                }
                if dump_cell == Some((si, scheme)) {
                    dump(sample_rows(trial, &sol, &data, &cfg, plan.dump_samples, opts.seed));
                }
                if scheme != Scheme::Proposed {
                    cell_designs.push(sol.clone());
                }
                previous.insert(scheme, sol);
            }
            if plan.timing {
                row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            row.status = status;
            emit(row);
        }
    }
}

fn failed_row(plan: &ExperimentPlan, trial: usize, si: usize, value: f64, ci: usize, scheme: Scheme, msg: String) -> ResultRow {
    ResultRow {
        trial,
        sweep_axis: plan.sweep_axis,
        sweep_index: si,
        sweep_value: value,
        scheme,
        scheme_index: ci,
        disc_gain: None,
        accuracy: None,
        acc_stderr: None,
        iterations: 0,
        wall_ms: 0.0,
        status: CellStatus::Failed(msg),
    }
}

fn sample_rows(trial: usize, sol: &DesignSolution, data: &TrialData, cfg: &SystemConfig, n: usize, seed: u64) -> Vec<Vec<String>> {
    let Ok(chain) = ForwardChain::new(sol, &data.channels, cfg) else { return Vec::new() };
    let mut rng = trial_rng(seed, trial);
    rng.set_stream(0);
    let mut out = Vec::with_capacity(n * cfg.dims);
    for i in 0..n {
        let class = i % data.stats.classes();
        let s = chain.sample(&data.stats, &cfg.sensing_noise_power, class, &mut rng);
        for (d, v) in s.received.iter().enumerate() {
            out.push(vec![trial.to_string(), class.to_string(), d.to_string(), v.to_string()]);
        }
    }
    out
}

enum Message {
    Row(ResultRow),
    Samples(Vec<Vec<String>>),
}

fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    w.flush()?;
    Ok(w)
}

/// Runs the plan with a pool of `opts.workers` threads, writing rows to
/// `out` as cells finish and rewriting the file in canonical order at the end.
pub fn run_plan(plan: &ExperimentPlan, out: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let fitted = fitted_statistics(plan)?;
    let mut writer = csv_writer(out, &RESULT_HEADER)?;
    let mut dump_writer = match &plan.sample_dump {
        Some(p) => Some(csv_writer(p, &SAMPLE_HEADER)?),
        None => None,
    };
    let next = AtomicUsize::new(0);
    let workers = opts.workers.clamp(1, plan.n_trials);
    let (tx, rx) = mpsc::channel::<Message>();
    let mut rows = Vec::new();
    let mut samples: Vec<(usize, Vec<Vec<String>>)> = Vec::new();
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, fitted) = (&next, fitted.as_ref());
            scope.spawn(move || loop {
                let trial = next.fetch_add(1, Ordering::Relaxed);
                if trial >= plan.n_trials {
                    break;
                }
                let rows_tx = tx.clone();
                run_trial(
                    plan,
                    fitted,
                    trial,
                    opts,
                    |row| {
                        let _ = rows_tx.send(Message::Row(row));
                    },
                    |s| {
                        let _ = tx.send(Message::Samples(s));
                    },
                );
            });
        }
        drop(tx);
        for msg in rx {
            match msg {
                Message::Row(row) => {
                    writer.write_record(row.record())?;
                    writer.flush()?;
                    rows.push(row);
                }
                Message::Samples(s) => {
                    if let Some(w) = dump_writer.as_mut() {
                        for r in &s {
                            w.write_record(r)?;
                        }
                        w.flush()?;
                    }
                    let trial = s.first().and_then(|r| r[0].parse().ok()).unwrap_or(0);
                    samples.push((trial, s));
                }
            }
        }
        Ok(())
    })?;
    drop(writer);
    rows.sort_by_key(|r| r.sort_key());
    let mut canonical = csv_writer(out, &RESULT_HEADER)?;
    for r in &rows {
        canonical.write_record(r.record())?;
    }
    canonical.flush()?;
    if let Some(p) = &plan.sample_dump {
        samples.sort_by_key(|(t, _)| *t);
        let mut w = csv_writer(p, &SAMPLE_HEADER)?;
        for (_, s) in &samples {
            for r in s {
                w.write_record(r)?;
            }
        }
        w.flush()?;
    }
    let failures = rows.iter().filter(|r| !r.status.succeeded()).count();
    Ok(RunOutcome { rows, failures })
}

/// Convergence traces of every scheme of the plan on one trial at the first sweep value.
pub fn write_trace<W: Write>(plan: &ExperimentPlan, trial: usize, opts: &RunOptions, out: W) -> Result<bool> {
    let fitted = fitted_statistics(plan)?;
    let data = trial_data(plan, fitted.as_ref(), opts.seed, trial)?;
    let cfg = plan.sweep_axis.apply(&plan.base, plan.sweep_values[0])?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "iter", "half", "objective", "subproblem", "newton_steps", "violation"])?;
    let mut all_ok = true;
    for &scheme in &plan.schemes {
        let (_, state, status) = run_cell(scheme, &cfg, &data, &[], &opts.sca);
        all_ok &= status.succeeded();
        for r in state.iter().flat_map(|s| &s.trace) {
            w.write_record([
                scheme.name().to_string(),
                r.iter.to_string(),
                r.half.to_string(),
                r.objective.to_string(),
                r.subproblem.to_string(),
                r.newton_steps.to_string(),
                r.violation.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(all_ok)
}
