//! The four CLI commands and their file outputs.

use std::fs;
use std::path::Path;

use mieds::etse::{aggregate, simulate_runs, write_aggregate_csv, Predictor, SimWindow};
use mieds::integrate::{rk4_solve, Trajectory};
use mieds::io::{self, format_float};
use mieds::mieds::{decode, encode, stochastic_encode, Encoding};
use mieds::{Error, Result};

use crate::config::Resolved;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents)
        .map_err(|e| Error::Io(format!("cannot write {}: {}", dir.join(name).display(), e)))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {}", dir.display(), e)))
}

fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// `encode`: write the encoding document, the cost curve, and the
/// reference/decoded trajectory pair.
pub fn cmd_encode(resolved: &Resolved, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let encoding = encode(&resolved.field, &resolved.encoder)?;
    let reference = rk4_solve(
        &resolved.field,
        &resolved.encoder.x0,
        resolved.encoder.t0,
        resolved.encoder.horizon,
        resolved.encoder.dt,
    )?;
    let decoded = decode(&encoding, &resolved.encoder.x0, resolved.encoder.dt)?;
    write_file(out, "encoding.json", &io::encoding_to_json(&encoding)?)?;
    write_file(out, "cost_curve.csv", &io::cost_curve_csv(&encoding.cost_curve))?;
    write_file(out, "reference.csv", &trajectory_csv(&reference)?)?;
    write_file(out, "decoded.csv", &trajectory_csv(&decoded)?)?;
    println!(
        "m_star = {}, degrees = [{}], total cost = {}",
        encoding.m_star,
        encoding
            .segments
            .iter()
            .map(|s| s.k_star.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        format_float(encoding.total_cost)
    );
    Ok(())
}

/// `decode`: reconstruct the trajectory described by an encoding document.
pub fn cmd_decode(encoding_path: &Path, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let text = fs::read_to_string(encoding_path)
        .map_err(|e| Error::Io(format!("cannot read {}: {}", encoding_path.display(), e)))?;
    let encoding: Encoding = io::encoding_from_json(&text)?;
    let x0 = encoding.segments[0].entry_state.clone();
    let decoded = decode(&encoding, &x0, encoding.dt)?;
    write_file(out, "decoded.csv", &trajectory_csv(&decoded)?)?;
    println!(
        "decoded {} samples from {} segments",
        decoded.states.len(),
        encoding.segments.len()
    );
    Ok(())
}

fn build_predictors(resolved: &Resolved) -> Result<(Vec<Predictor>, Encoding)> {
    let encoding = stochastic_encode(&resolved.field, &resolved.encoder)?;
    let reference = rk4_solve(
        &resolved.field,
        &resolved.encoder.x0,
        resolved.encoder.t0,
        resolved.encoder.horizon,
        resolved.encoder.dt,
    )?;
    let predictors = vec![
        Predictor::send_on_delta(resolved.field.dim()),
        Predictor::analytical(resolved.field.clone()),
        Predictor::smieds(&encoding, &reference)?,
    ];
    Ok((predictors, encoding))
}

fn window_of(resolved: &Resolved) -> SimWindow {
    SimWindow {
        x0: resolved.encoder.x0.clone(),
        t0: resolved.encoder.t0,
        horizon: resolved.encoder.horizon,
        dt: resolved.encoder.dt,
    }
}

/// `etse`: Monte-Carlo event-triggered estimation with the three standard
/// predictors, per-run logs and paths plus the aggregate table.
pub fn cmd_etse(resolved: &Resolved, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    if resolved.runs > 1 && resolved.noise.sigma == 0.0 {
        return Err(Error::Config(
            "repeated runs need sigma > 0; a noiseless run is deterministic".into(),
        ));
    }
    let (predictors, _) = build_predictors(resolved)?;
    let window = window_of(resolved);
    let outputs = simulate_runs(
        &resolved.field,
        &resolved.noise,
        resolved.runs,
        &predictors,
        &resolved.trigger,
        &window,
    )?;
    let stats = aggregate(&outputs, &predictors);

    let mut buf = Vec::new();
    write_aggregate_csv(&stats, &mut buf)?;
    write_file(
        out,
        "aggregate.csv",
        &String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?,
    )?;

    for (r, output) in outputs.iter().enumerate() {
        for (predictor, (predicted, log)) in predictors.iter().zip(&output.results) {
            let tag = predictor.label().to_lowercase();
            let mut events = Vec::new();
            log.write_csv(&mut events)?;
            write_file(
                out,
                &format!("run_{}_events_{}.csv", r, tag),
                &String::from_utf8(events).map_err(|e| Error::Io(e.to_string()))?,
            )?;
            write_file(
                out,
                &format!("run_{}_paths_{}.csv", r, tag),
                &paired_paths_csv(&output.truth, predicted),
            )?;
        }
    }
    for s in &stats {
        println!(
            "{}: mean state events = {}, mean model events = {}",
            s.label,
            format_float(s.mean_state_events),
            format_float(s.mean_model_events)
        );
    }
    Ok(())
}

/// CSV with the true and predicted paths side by side:
/// `t,x0..,xhat0..`.
fn paired_paths_csv(truth: &Trajectory, predicted: &Trajectory) -> String {
    let n = truth.dim();
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",x{}", i));
    }
    for i in 0..n {
        out.push_str(&format!(",xhat{}", i));
    }
    out.push('\n');
    for (j, (a, b)) in truth.states.iter().zip(&predicted.states).enumerate() {
        out.push_str(&format_float(truth.time(j)));
        for v in a.iter().chain(b.iter()) {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    out
}

/// `sweep`: re-run the encoder or the Monte-Carlo study over a parameter
/// grid, one row per value.
pub fn cmd_sweep(resolved: &Resolved, parameter: &str, values: &str, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    let values: Vec<f64> = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad sweep value '{}'", v)))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }

    let csv = match parameter {
        "lambda" | "m_max" | "k_max" => {
            let mut csv = String::from("parameter,value,m_star,degrees\n");
            for &value in &values {
                let mut variant = resolved.clone();
                match parameter {
                    "lambda" => variant.encoder.lambda = value,
                    "m_max" => variant.encoder.m_max = as_count(parameter, value)?,
                    _ => variant.encoder.k_max = as_count(parameter, value)?,
                }
                let encoding = encode(&variant.field, &variant.encoder)?;
                let degrees = encoding
                    .segments
                    .iter()
                    .map(|s| s.k_star.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    parameter,
                    format_float(value),
                    encoding.m_star,
                    degrees
                ));
            }
            csv
        }
        "delta_noise" | "sigma" => {
            let mut csv = String::from(
                "parameter,value,mean_state_sod,mean_state_analytical,mean_state_smieds\n",
            );
            let (predictors, _) = build_predictors(resolved)?;
            let window = window_of(resolved);
            for &value in &values {
                let mut noise = resolved.noise;
                let mut trigger = resolved.trigger;
                match parameter {
                    "delta_noise" => trigger.delta_noise = value,
                    _ => noise.sigma = value,
                }
                let stats = mieds::etse::monte_carlo(
                    &resolved.field,
                    &noise,
                    resolved.runs,
                    &predictors,
                    &trigger,
                    &window,
                )?;
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    parameter,
                    format_float(value),
                    format_float(stats[0].mean_state_events),
                    format_float(stats[1].mean_state_events),
                    format_float(stats[2].mean_state_events)
                ));
            }
            csv
        }
        other => {
            return Err(Error::Config(format!(
                "unknown sweep parameter '{}' (expected lambda, delta_noise, m_max, k_max or sigma)",
                other
            )));
        }
    };
    write_file(out, "sweep.csv", &csv)?;
    println!("swept {} over {} values", parameter, values.len());
    Ok(())
}

fn as_count(parameter: &str, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || value < 1.0 {
        return Err(Error::Config(format!(
            "{} sweep values must be positive integers, got {}",
            parameter, value
        )));
    }
    Ok(value as usize)
}
