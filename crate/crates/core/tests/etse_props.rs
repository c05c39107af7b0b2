//! Behavioral properties of the event-triggered simulator: trigger
//! invariants, limit cases of the threshold, and the value of the dynamics
//! trigger.

use mieds::etse::{
    monte_carlo, simulate_etse, EventKind, Predictor, RegionSet, SimWindow, TriggerConfig,
};
use mieds::integrate::{euler_maruyama, rk4_solve, NoiseSpec, Trajectory};
use mieds::mieds::encode;
use mieds::systems;

struct TanhSetup {
    field: mieds::VectorField,
    predictors: Vec<Predictor>,
    trig: TriggerConfig,
    window: SimWindow,
}

fn tanh_setup() -> TanhSetup {
    let (field, config, _, trig) = systems::tanh_system();
    let encoding = encode(&field, &config).unwrap();
    let reference = rk4_solve(&field, &config.x0, config.t0, config.horizon, config.dt).unwrap();
    let predictors = vec![
        Predictor::send_on_delta(1),
        Predictor::analytical(field.clone()),
        Predictor::smieds(&encoding, &reference).unwrap(),
    ];
    let window = SimWindow {
        x0: config.x0.clone(),
        t0: config.t0,
        horizon: config.horizon,
        dt: config.dt,
    };
    TanhSetup {
        field,
        predictors,
        trig,
        window,
    }
}

fn sample_of(truth: &Trajectory, time: f64) -> usize {
    ((time - truth.t0) / truth.dt).round() as usize
}

/// Criterion-style trigger audit: zero error right after every state event,
/// and no violation of the delta bound at any non-event check sample.
fn audit_run(truth: &Trajectory, predicted: &Trajectory, log: &mieds::CommLog, delta: f64) {
    let event_samples: Vec<usize> = log
        .events
        .iter()
        .filter(|e| e.kind == EventKind::State)
        .map(|e| sample_of(truth, e.time))
        .collect();
    for &j in &event_samples {
        assert_eq!(
            predicted.states[j], truth.states[j],
            "post-reset error must be exactly zero"
        );
    }
    for j in 1..truth.states.len() {
        if event_samples.contains(&j) {
            continue;
        }
        let err: f64 = predicted.states[j]
            .iter()
            .zip(&truth.states[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(
            err < delta,
            "sample {} violates the delta bound without an event: {} >= {}",
            j,
            err,
            delta
        );
    }
}

#[test]
fn trigger_invariants_hold_on_every_logged_run() {
    let setup = tanh_setup();
    for seed in 0..20u64 {
        let noise = NoiseSpec {
            sigma: 0.1,
            seed: 100 + seed,
        };
        let truth = euler_maruyama(
            &setup.field,
            &setup.window.x0,
            setup.window.t0,
            setup.window.horizon,
            setup.window.dt,
            &noise,
        )
        .unwrap();
        for predictor in &setup.predictors {
            let (predicted, log) = simulate_etse(&truth, predictor, &setup.trig).unwrap();
            audit_run(&truth, &predicted, &log, setup.trig.delta_noise);
        }
    }
}

#[test]
fn huge_delta_suppresses_all_state_events() {
    let setup = tanh_setup();
    let noise = NoiseSpec { sigma: 0.1, seed: 7 };
    let truth = euler_maruyama(&setup.field, &[6.0], 0.0, 10.0, 0.01, &noise).unwrap();
    let trig = TriggerConfig {
        delta_noise: 1e9,
        check_every: 1,
    };
    for predictor in &setup.predictors {
        let (_, log) = simulate_etse(&truth, predictor, &trig).unwrap();
        assert_eq!(log.state_count(), 0, "{}", predictor.label());
    }
}

#[test]
fn vanishing_delta_fires_whenever_the_state_moves() {
    let setup = tanh_setup();
    let noise = NoiseSpec { sigma: 0.1, seed: 8 };
    let truth = euler_maruyama(&setup.field, &[6.0], 0.0, 10.0, 0.01, &noise).unwrap();
    let trig = TriggerConfig {
        delta_noise: 1e-12,
        check_every: 1,
    };
    let (_, log) = simulate_etse(&truth, &Predictor::send_on_delta(1), &trig).unwrap();
    let moved = truth
        .states
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count();
    assert_eq!(log.state_count(), moved);
    assert_eq!(moved, truth.steps());
}

#[test]
fn model_events_never_exceed_region_crossings_of_the_truth() {
    let setup = tanh_setup();
    let smieds = &setup.predictors[2];
    let Predictor::Smieds { regions, .. } = smieds else {
        panic!("expected the smieds predictor");
    };
    for seed in 0..20u64 {
        let noise = NoiseSpec {
            sigma: 0.1,
            seed: 200 + seed,
        };
        let truth = euler_maruyama(&setup.field, &[6.0], 0.0, 10.0, 0.01, &noise).unwrap();
        let (_, log) = simulate_etse(&truth, smieds, &setup.trig).unwrap();
        let crossings = truth
            .states
            .windows(2)
            .filter(|w| regions.region_of(&w[0]) != regions.region_of(&w[1]))
            .count();
        assert!(
            log.model_count() <= crossings,
            "seed {}: {} model events for {} crossings",
            seed,
            log.model_count(),
            crossings
        );
    }
}

#[test]
fn a_typical_run_switches_the_model_once() {
    let setup = tanh_setup();
    let smieds = &setup.predictors[2];
    let mut single_switch = 0;
    let runs = 20;
    for seed in 0..runs {
        let noise = NoiseSpec {
            sigma: 0.1,
            seed: 300 + seed,
        };
        let truth = euler_maruyama(&setup.field, &[6.0], 0.0, 10.0, 0.01, &noise).unwrap();
        let (_, log) = simulate_etse(&truth, smieds, &setup.trig).unwrap();
        assert!(log.model_count() >= 1, "the threshold must be crossed");
        if log.model_count() == 1 {
            single_switch += 1;
        }
    }
    assert!(
        single_switch * 2 > runs,
        "only {}/{} runs had exactly one model event",
        single_switch,
        runs
    );
}

#[test]
fn freezing_the_first_model_does_not_reduce_communication() {
    // removing the dynamics trigger (one region, segment-1 model forever)
    // must not beat the full dual-trigger predictor on average
    let (field, config, noise, trig) = systems::tanh_system();
    let encoding = encode(&field, &config).unwrap();
    let reference = rk4_solve(&field, &config.x0, config.t0, config.horizon, config.dt).unwrap();
    let full = Predictor::smieds(&encoding, &reference).unwrap();
    let frozen = Predictor::Smieds {
        models: vec![encoding.segments[0].model.clone()],
        regions: RegionSet::Intervals {
            thresholds: vec![],
            descending: true,
        },
    };
    let window = SimWindow {
        x0: config.x0.clone(),
        t0: config.t0,
        horizon: config.horizon,
        dt: config.dt,
    };
    let stats = monte_carlo(
        &field,
        &noise,
        100,
        &[full, frozen],
        &trig,
        &window,
    )
    .unwrap();
    assert!(
        stats[1].mean_state_events >= stats[0].mean_state_events,
        "frozen {} vs dual-trigger {}",
        stats[1].mean_state_events,
        stats[0].mean_state_events
    );
}

#[test]
fn paired_runs_expose_the_communication_gap() {
    // small-scale version of the headline comparison: same paths for every
    // predictor, send-on-delta needs several times more transmissions
    let setup = tanh_setup();
    let noise = NoiseSpec { sigma: 0.1, seed: 42 };
    let stats = monte_carlo(
        &setup.field,
        &noise,
        25,
        &setup.predictors,
        &setup.trig,
        &setup.window,
    )
    .unwrap();
    assert!(stats[0].mean_state_events > 3.0 * stats[2].mean_state_events);
    assert!((stats[1].mean_state_events - stats[2].mean_state_events).abs() < 5.0);
}
