//! Event-triggered state estimation with the dual trigger: state
//! transmissions when the prediction error crosses `delta_noise`, model
//! transmissions when the true state leaves the active local region.
//!
//! Monte-Carlo runs are embarrassingly parallel; run `r` derives its seed as
//! `base + r` and every predictor inside a run consumes the same sampled
//! true path, so comparisons are paired.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::VectorField;
use crate::integrate::{euler_maruyama, rk4_step, NoiseSpec, Trajectory};
use crate::io::format_float;
use crate::mieds::Encoding;
use crate::taylor::LocalModel;

/// Spatial partition induced by the encoder's switch states.
#[derive(Debug, Clone)]
pub enum RegionSet {
    /// One-dimensional case: interval thresholds in segment order. With
    /// `descending` the reference trajectory moves downward, so region `i`
    /// is everything at or above threshold `i`.
    Intervals { thresholds: Vec<f64>, descending: bool },
    /// Higher dimensions: representative reference samples per segment;
    /// membership is nearest-representative.
    Points { representatives: Vec<Vec<Vec<f64>>> },
}

impl RegionSet {
    /// Build the partition from an encoding and the deterministic reference
    /// trajectory it was computed on.
    pub fn from_encoding(encoding: &Encoding, reference: &Trajectory) -> Result<Self> {
        if reference.dim() != encoding.dim {
            return Err(Error::DimensionMismatch {
                expected: encoding.dim,
                got: reference.dim(),
            });
        }
        if encoding.dim == 1 {
            let thresholds: Vec<f64> = encoding.switch_states.iter().map(|s| s[0]).collect();
            let first = reference.states[0][0];
            let last = reference.states[reference.steps()][0];
            Ok(RegionSet::Intervals {
                thresholds,
                descending: last < first,
            })
        } else {
            let boundary = |t: f64| ((t - encoding.t0) / encoding.dt).round() as usize;
            let last_index = reference.steps();
            let mut representatives = Vec::with_capacity(encoding.segments.len());
            for (i, segment) in encoding.segments.iter().enumerate() {
                let start = boundary(segment.t_start);
                let stop = if i + 1 == encoding.segments.len() {
                    last_index + 1
                } else {
                    boundary(segment.t_stop)
                };
                representatives.push(reference.states[start..stop].to_vec());
            }
            Ok(RegionSet::Points { representatives })
        }
    }

    pub fn len(&self) -> usize {
        match self {
            RegionSet::Intervals { thresholds, .. } => thresholds.len() + 1,
            RegionSet::Points { representatives } => representatives.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Segment index owning the state `x` (0-based, total function).
    /// A state exactly on a threshold belongs to the lower index, and
    /// nearest-representative ties also break toward the lower index.
    pub fn region_of(&self, x: &[f64]) -> usize {
        match self {
            RegionSet::Intervals { thresholds, descending } => {
                for (i, &threshold) in thresholds.iter().enumerate() {
                    let inside = if *descending {
                        x[0] >= threshold
                    } else {
                        x[0] <= threshold
                    };
                    if inside {
                        return i;
                    }
                }
                thresholds.len()
            }
            RegionSet::Points { representatives } => {
                let mut best = (0usize, f64::INFINITY);
                for (i, reps) in representatives.iter().enumerate() {
                    for rep in reps {
                        let d2: f64 = rep
                            .iter()
                            .zip(x)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        if d2 < best.1 {
                            best = (i, d2);
                        }
                    }
                }
                best.0
            }
        }
    }
}

/// Remote-side prediction strategy.
#[derive(Debug, Clone)]
pub enum Predictor {
    /// Zero-order hold on the last transmitted state.
    SendOnDelta { dim: usize },
    /// Integrates the true vector field.
    Analytical(VectorField),
    /// Integrates the encoder's local models, switching on region changes.
    Smieds {
        models: Vec<LocalModel>,
        regions: RegionSet,
    },
}

impl Predictor {
    pub fn send_on_delta(dim: usize) -> Self {
        Predictor::SendOnDelta { dim }
    }

    pub fn analytical(field: VectorField) -> Self {
        Predictor::Analytical(field)
    }

    pub fn smieds(encoding: &Encoding, reference: &Trajectory) -> Result<Self> {
        let regions = RegionSet::from_encoding(encoding, reference)?;
        let models: Vec<LocalModel> = encoding.segments.iter().map(|s| s.model.clone()).collect();
        if models.len() != regions.len() {
            return Err(Error::Config(format!(
                "{} models for {} regions",
                models.len(),
                regions.len()
            )));
        }
        Ok(Predictor::Smieds { models, regions })
    }

    pub fn dim(&self) -> usize {
        match self {
            Predictor::SendOnDelta { dim } => *dim,
            Predictor::Analytical(field) => field.dim(),
            Predictor::Smieds { models, .. } => models[0].dim(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Predictor::SendOnDelta { .. } => "SoD",
            Predictor::Analytical(_) => "Analytical",
            Predictor::Smieds { .. } => "sMIEDS",
        }
    }
}

/// Noise-trigger threshold and check cadence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerConfig {
    pub delta_noise: f64,
    /// Samples between trigger checks; 1 checks at every sample.
    pub check_every: usize,
}

impl TriggerConfig {
    pub fn new(delta_noise: f64, check_every: usize) -> Result<Self> {
        if !(delta_noise > 0.0) {
            return Err(Error::Config(format!(
                "delta_noise must be positive, got {}",
                delta_noise
            )));
        }
        if check_every == 0 {
            return Err(Error::Config("check_every must be at least 1".into()));
        }
        Ok(TriggerConfig {
            delta_noise,
            check_every,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// State transmission caused by the noise trigger.
    State,
    /// Model transmission (initial handshake or dynamics trigger).
    Model,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::State => "state",
            EventKind::Model => "model",
        }
    }
}

/// One transmission: when, what, and how many scalars went over the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommEvent {
    pub time: f64,
    pub kind: EventKind,
    pub payload_scalars: usize,
}

/// Timestamped transmission record of one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct CommLog {
    pub events: Vec<CommEvent>,
    t0: f64,
}

impl CommLog {
    fn new(t0: f64) -> Self {
        CommLog {
            events: Vec::new(),
            t0,
        }
    }

    fn push(&mut self, time: f64, kind: EventKind, payload_scalars: usize) {
        self.events.push(CommEvent {
            time,
            kind,
            payload_scalars,
        });
    }

    /// Number of noise-trigger firings.
    pub fn state_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::State)
            .count()
    }

    /// Number of dynamics-trigger firings. The initial model handshake at
    /// `t0` is logged but not counted here; it is reported separately.
    pub fn model_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Model && e.time > self.t0)
            .count()
    }

    /// Scalars of the initial model handshake, if one was logged.
    pub fn initial_model_scalars(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Model && e.time == self.t0)
            .map(|e| e.payload_scalars)
            .sum()
    }

    /// Total scalars over the link, handshake included.
    pub fn total_scalars(&self) -> usize {
        self.events.iter().map(|e| e.payload_scalars).sum()
    }

    /// CSV export: `time,kind,payload`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time,kind,payload")?;
        for e in &self.events {
            writeln!(
                w,
                "{},{},{}",
                format_float(e.time),
                e.kind.as_str(),
                e.payload_scalars
            )?;
        }
        Ok(())
    }
}

/// Walk a true path with one predictor and both triggers.
///
/// At each sample the prediction advances one RK4 step of the active model
/// (hold, for send-on-delta); the dynamics trigger is then checked on the
/// true state, switching the active model without touching the prediction;
/// finally the noise trigger compares prediction and truth, and on a firing
/// logs a state transmission and resets the prediction.
pub fn simulate_etse(
    true_path: &Trajectory,
    predictor: &Predictor,
    trig: &TriggerConfig,
) -> Result<(Trajectory, CommLog)> {
    let n = true_path.dim();
    if predictor.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: predictor.dim(),
        });
    }
    let dt = true_path.dt;
    let mut log = CommLog::new(true_path.t0);
    let mut predicted: Vec<Vec<f64>> = Vec::with_capacity(true_path.states.len());
    predicted.push(true_path.states[0].clone());

    let mut active = match predictor {
        Predictor::Smieds { models, regions } => {
            let region = regions.region_of(&true_path.states[0]);
            log.push(
                true_path.t0,
                EventKind::Model,
                models[region].weight_count(),
            );
            region
        }
        _ => 0,
    };

    for j in 1..true_path.states.len() {
        let time = true_path.time(j);
        let previous = &predicted[j - 1];
        let mut estimate = match predictor {
            Predictor::SendOnDelta { .. } => previous.clone(),
            Predictor::Analytical(field) => {
                rk4_step(field, previous, dt).map_err(|e| Error::Integration {
                    time,
                    reason: e.to_string(),
                })?
            }
            Predictor::Smieds { models, .. } => {
                rk4_step(&models[active], previous, dt).map_err(|e| Error::Integration {
                    time,
                    reason: e.to_string(),
                })?
            }
        };

        let truth = &true_path.states[j];
        let check = j % trig.check_every == 0;

        if check {
            if let Predictor::Smieds { models, regions } = predictor {
                let region = regions.region_of(truth);
                if region != active {
                    active = region;
                    log.push(time, EventKind::Model, models[region].weight_count());
                }
            }
        }

        if check {
            let err: f64 = estimate
                .iter()
                .zip(truth)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if err >= trig.delta_noise {
                log.push(time, EventKind::State, n);
                estimate = truth.clone();
            }
        }
        predicted.push(estimate);
    }

    Ok((Trajectory::new(true_path.t0, dt, predicted)?, log))
}

/// Everything one Monte-Carlo run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub truth: Trajectory,
    /// Predicted path and log per predictor, in input order.
    pub results: Vec<(Trajectory, CommLog)>,
}

/// Aggregate communication counts for one predictor.
#[derive(Debug, Clone)]
pub struct PredictorStats {
    pub label: String,
    pub mean_state_events: f64,
    pub std_state_events: f64,
    pub mean_model_events: f64,
    pub std_model_events: f64,
    pub mean_total_scalars: f64,
}

/// Simulation window for Monte-Carlo runs.
#[derive(Debug, Clone)]
pub struct SimWindow {
    pub x0: Vec<f64>,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
}

/// Sample `runs` true paths (seed `base + r` for run `r`) and simulate every
/// predictor against each of them.
pub fn simulate_runs(
    field: &VectorField,
    noise: &NoiseSpec,
    runs: usize,
    predictors: &[Predictor],
    trig: &TriggerConfig,
    window: &SimWindow,
) -> Result<Vec<RunOutput>> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let seed = noise.seed.wrapping_add(r);
            let run_noise = NoiseSpec {
                sigma: noise.sigma,
                seed,
            };
            let truth = euler_maruyama(
                field,
                &window.x0,
                window.t0,
                window.horizon,
                window.dt,
                &run_noise,
            )?;
            let results = predictors
                .iter()
                .map(|p| simulate_etse(&truth, p, trig))
                .collect::<Result<Vec<_>>>()?;
            Ok(RunOutput {
                seed,
                truth,
                results,
            })
        })
        .collect()
}

/// Per-predictor mean and sample standard deviation of the communication
/// counts over a batch of runs.
pub fn aggregate(outputs: &[RunOutput], predictors: &[Predictor]) -> Vec<PredictorStats> {
    let runs = outputs.len();
    predictors
        .iter()
        .enumerate()
        .map(|(p, predictor)| {
            let states: Vec<f64> = outputs
                .iter()
                .map(|o| o.results[p].1.state_count() as f64)
                .collect();
            let models: Vec<f64> = outputs
                .iter()
                .map(|o| o.results[p].1.model_count() as f64)
                .collect();
            let scalars: Vec<f64> = outputs
                .iter()
                .map(|o| o.results[p].1.total_scalars() as f64)
                .collect();
            let (mean_state, std_state) = mean_std(&states);
            let (mean_model, std_model) = mean_std(&models);
            let (mean_scalars, _) = mean_std(&scalars);
            let _ = runs;
            PredictorStats {
                label: predictor.label().to_string(),
                mean_state_events: mean_state,
                std_state_events: std_state,
                mean_model_events: mean_model,
                std_model_events: std_model,
                mean_total_scalars: mean_scalars,
            }
        })
        .collect()
}

/// Monte-Carlo aggregate: run the batch and reduce to per-predictor stats.
pub fn monte_carlo(
    field: &VectorField,
    noise: &NoiseSpec,
    runs: usize,
    predictors: &[Predictor],
    trig: &TriggerConfig,
    window: &SimWindow,
) -> Result<Vec<PredictorStats>> {
    let outputs = simulate_runs(field, noise, runs, predictors, trig, window)?;
    Ok(aggregate(&outputs, predictors))
}

/// Compensated (Kahan) mean plus sample standard deviation.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let mean = kahan_sum(values.iter().copied()) / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (values.len() - 1) as f64).sqrt())
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// CSV export of aggregate statistics:
/// `predictor,mean_state_events,std_state_events,mean_model_events,mean_total_scalars`.
pub fn write_aggregate_csv<W: Write>(stats: &[PredictorStats], mut w: W) -> Result<()> {
    writeln!(
        w,
        "predictor,mean_state_events,std_state_events,mean_model_events,mean_total_scalars"
    )?;
    for s in stats {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.label,
            format_float(s.mean_state_events),
            format_float(s.std_state_events),
            format_float(s.mean_model_events),
            format_float(s.mean_total_scalars)
        )?;
    }
    Ok(())
}
