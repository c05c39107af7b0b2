//! The MIEDS encoder: equidistant time partitioning, per-segment optimal
//! Taylor order under the description-length cost `lambda * k + deviation`,
//! search over the number of partitions, and decoding back to a trajectory.

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::VectorField;
use crate::integrate::{deviation, rk4_solve, Trajectory};
use crate::taylor::LocalModel;

/// Parameters of one encoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    /// Complexity weight in the per-segment cost.
    pub lambda: f64,
    /// Largest admissible Taylor degree.
    pub k_max: usize,
    /// Largest number of time partitions to try.
    pub m_max: usize,
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub x0: Vec<f64>,
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if self.m_max == 0 {
            return Err(Error::Config("m_max must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !(self.dt > 0.0) {
            return Err(Error::Config(format!(
                "horizon and dt must be positive, got {} and {}",
                self.horizon, self.dt
            )));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 || steps < 1.0 {
            return Err(Error::Config(format!(
                "dt {} does not divide horizon {}",
                self.dt, self.horizon
            )));
        }
        if self.x0.is_empty() {
            return Err(Error::Config("x0 must not be empty".into()));
        }
        Ok(())
    }
}

/// One segment of the optimal partition.
#[derive(Debug, Clone)]
pub struct Segment {
    pub index: usize,
    pub t_start: f64,
    pub t_stop: f64,
    pub model: LocalModel,
    pub k_star: usize,
    pub local_cost: f64,
    /// Reference-trajectory state at `t_start`; also the model's expansion
    /// center.
    pub entry_state: Vec<f64>,
}

/// Result of an encoding run.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub m_star: usize,
    pub segments: Vec<Segment>,
    /// Reference states at the interior segment boundaries; these induce the
    /// spatial partition used by the event-triggered simulator.
    pub switch_states: Vec<Vec<f64>>,
    pub total_cost: f64,
    /// `(m, L_total(m))` for every partition count that was evaluated.
    pub cost_curve: Vec<(usize, f64)>,
    pub dim: usize,
    pub t0: f64,
    pub dt: f64,
}

/// Description-length cost of one segment: `lambda * k` plus the deviation
/// between the reference slice and the model reconstruction started from the
/// slice's first state. A reconstruction that blows up yields `+inf`, which
/// rejects the (segment, order) combination.
pub fn local_cost(reference: &Trajectory, model: &LocalModel, lambda: f64) -> Result<f64> {
    let horizon = reference.steps() as f64 * reference.dt;
    let reconstruction = match rk4_solve(
        model,
        &reference.states[0],
        reference.t0,
        horizon,
        reference.dt,
    ) {
        Ok(t) => t,
        Err(Error::Integration { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(lambda * model.degree() as f64 + deviation(reference, &reconstruction)?)
}

/// Optimal Taylor order for one segment: evaluates `local_cost` for every
/// degree `k` in `1..=k_max` of the field's jet about `center` and returns
/// the minimizer. Ties break toward the smaller degree.
pub fn best_local_order(
    reference: &Trajectory,
    center: &[f64],
    field: &VectorField,
    lambda: f64,
    k_max: usize,
) -> Result<(usize, LocalModel, f64)> {
    let infeasible = || Error::SegmentInfeasible {
        t_start: reference.t0,
        t_stop: reference.t0 + reference.steps() as f64 * reference.dt,
    };
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    // Every lower-order jet is a prefix of the k_max jet, so one expansion
    // serves all candidate orders.
    let full = match field.local_model(center, k_max) {
        Ok(m) => m,
        Err(Error::Singular { .. }) => return Err(infeasible()),
        Err(e) => return Err(e),
    };
    let mut best: Option<(usize, LocalModel, f64)> = None;
    for k in 1..=k_max {
        let model = full.truncate(k);
        let cost = local_cost(reference, &model, lambda)?;
        if best.as_ref().map_or(true, |(_, _, c)| cost < *c) {
            best = Some((k, model, cost));
        }
    }
    let (k, model, cost) = best.unwrap();
    if !cost.is_finite() {
        return Err(infeasible());
    }
    Ok((k, model, cost))
}

/// Sample indices of the segment boundaries for `m` equidistant partitions
/// of `steps` grid intervals. Boundaries snap to the nearest grid index;
/// `None` if that would create an empty segment.
fn boundaries(m: usize, steps: usize) -> Option<Vec<usize>> {
    let bounds: Vec<usize> = (0..=m)
        .map(|i| ((i * steps) as f64 / m as f64).round() as usize)
        .collect();
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    Some(bounds)
}

fn segments_for_partition(
    reference: &Trajectory,
    bounds: &[usize],
    field: &VectorField,
    config: &EncoderConfig,
) -> Result<(Vec<Segment>, f64)> {
    let mut segments = Vec::with_capacity(bounds.len() - 1);
    let mut total = 0.0;
    for i in 0..bounds.len() - 1 {
        let slice = reference.slice(bounds[i], bounds[i + 1]);
        let entry = slice.states[0].clone();
        let (k_star, model, cost) =
            best_local_order(&slice, &entry, field, config.lambda, config.k_max)?;
        total += cost;
        segments.push(Segment {
            index: i,
            t_start: slice.t0,
            t_stop: reference.time(bounds[i + 1]),
            model,
            k_star,
            local_cost: cost,
            entry_state: entry,
        });
    }
    Ok((segments, total))
}

/// Run the full encoder: reference trajectory, per-partition optimal orders,
/// and the argmin over the number of partitions (ties toward fewer
/// segments).
pub fn encode(field: &VectorField, config: &EncoderConfig) -> Result<Encoding> {
    config.validate()?;
    if config.x0.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: config.x0.len(),
        });
    }
    let reference = rk4_solve(field, &config.x0, config.t0, config.horizon, config.dt)?;
    let steps = reference.steps();

    let candidates: Vec<Option<(usize, Vec<Segment>, f64)>> = (1..=config.m_max)
        .into_par_iter()
        .map(|m| match boundaries(m, steps) {
            Some(bounds) => {
                let (segments, total) = segments_for_partition(&reference, &bounds, field, config)?;
                Ok(Some((m, segments, total)))
            }
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cost_curve = Vec::new();
    let mut best: Option<(usize, Vec<Segment>, f64)> = None;
    for candidate in candidates.into_iter() {
        let Some((m, segments, total)) = candidate else {
            continue;
        };
        cost_curve.push((m, total));
        if best.as_ref().map_or(true, |(_, _, c)| total < *c) {
            best = Some((m, segments, total));
        }
    }
    if cost_curve.len() < config.m_max {
        warn!(
            "skipped {} partition counts whose segments collapse on the dt grid",
            config.m_max - cost_curve.len()
        );
    }
    let (m_star, segments, total_cost) =
        best.ok_or_else(|| Error::Config("no feasible partition count".into()))?;

    let bounds = boundaries(m_star, steps).unwrap();
    let switch_states = bounds[1..bounds.len() - 1]
        .iter()
        .map(|&b| reference.states[b].clone())
        .collect();

    Ok(Encoding {
        m_star,
        segments,
        switch_states,
        total_cost,
        cost_curve,
        dim: field.dim(),
        t0: config.t0,
        dt: config.dt,
    })
}

/// Encoder entry point for stochastic systems. The partition must reflect
/// the deterministic drift, not the noise, so this is `encode` on the
/// noiseless dynamics; the triggers absorb the noise at simulation time.
pub fn stochastic_encode(field: &VectorField, config: &EncoderConfig) -> Result<Encoding> {
    encode(field, config)
}

/// Reconstruct the trajectory an encoding describes: integrate each
/// segment's model from its transmitted center over its time window. The
/// state resets to the center at every segment boundary, matching the cost
/// the encoder measured.
pub fn decode(encoding: &Encoding, x0: &[f64], dt: f64) -> Result<Trajectory> {
    let first = encoding
        .segments
        .first()
        .ok_or_else(|| Error::Config("encoding has no segments".into()))?;
    if x0.len() != encoding.dim {
        return Err(Error::DimensionMismatch {
            expected: encoding.dim,
            got: x0.len(),
        });
    }
    if first
        .entry_state
        .iter()
        .zip(x0)
        .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::Config(
            "x0 does not match the encoding's first entry state".into(),
        ));
    }
    let mut states: Vec<Vec<f64>> = Vec::new();
    let last = encoding.segments.len() - 1;
    for (i, segment) in encoding.segments.iter().enumerate() {
        let start = if i == 0 {
            x0.to_vec()
        } else {
            segment.entry_state.clone()
        };
        let horizon = segment.t_stop - segment.t_start;
        let piece = rk4_solve(&segment.model, &start, segment.t_start, horizon, dt)?;
        // the boundary sample belongs to the next segment's reset
        let keep = if i == last {
            piece.states.len()
        } else {
            piece.states.len() - 1
        };
        states.extend_from_slice(&piece.states[..keep]);
    }
    Trajectory::new(encoding.t0, dt, states)
}
