//! Run configuration: the strict JSON config file, its merge with command
//! line overrides, and resolution into the concrete module parameters.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mieds::etse::TriggerConfig;
use mieds::integrate::NoiseSpec;
use mieds::mieds::EncoderConfig;
use mieds::systems::{self, QuadrotorParams};
use mieds::{Error, VectorField};

/// Flat key-value configuration. Every key is optional; unknown keys are
/// rejected. Values left unset fall back to the selected system's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Named benchmark system (`pendulum`, `quadrotor`, `tanh`).
    pub system: Option<String>,
    /// Inline field description (one component per line); alternative to
    /// `system`.
    pub field: Option<String>,
    pub lambda: Option<f64>,
    pub k_max: Option<usize>,
    pub m_max: Option<usize>,
    pub t0: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub delta_noise: Option<f64>,
    pub check_every: Option<usize>,
    pub runs: Option<usize>,
    // quadrotor parameter overrides
    pub i_x: Option<f64>,
    pub i_y: Option<f64>,
    pub i_z: Option<f64>,
    pub mass: Option<f64>,
    pub gravity: Option<f64>,
    pub f_wx: Option<f64>,
    pub f_wy: Option<f64>,
    pub f_wz: Option<f64>,
    pub f_t: Option<f64>,
    pub tau_wx: Option<f64>,
    pub tau_wy: Option<f64>,
    pub tau_wz: Option<f64>,
    pub tau_x: Option<f64>,
    pub tau_y: Option<f64>,
    pub tau_z: Option<f64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {}", path.display(), e)))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config {}: {}", path.display(), e)))
    }

    /// Overlay `other`'s set values on top of `self`.
    pub fn merged_with(mut self, other: &RunConfig) -> Self {
        macro_rules! take {
            ($($key:ident),*) => {
                $(if other.$key.is_some() { self.$key = other.$key.clone(); })*
            };
        }
        take!(
            system, field, lambda, k_max, m_max, t0, horizon, dt, x0, sigma, seed, delta_noise,
            check_every, runs, i_x, i_y, i_z, mass, gravity, f_wx, f_wy, f_wz, f_t, tau_wx,
            tau_wy, tau_wz, tau_x, tau_y, tau_z
        );
        self
    }

    fn quadrotor_params(&self) -> QuadrotorParams {
        let mut p = QuadrotorParams::default();
        let set = |slot: &mut f64, value: Option<f64>| {
            if let Some(v) = value {
                *slot = v;
            }
        };
        set(&mut p.inertia[0], self.i_x);
        set(&mut p.inertia[1], self.i_y);
        set(&mut p.inertia[2], self.i_z);
        set(&mut p.mass, self.mass);
        set(&mut p.gravity, self.gravity);
        set(&mut p.wind_force[0], self.f_wx);
        set(&mut p.wind_force[1], self.f_wy);
        set(&mut p.wind_force[2], self.f_wz);
        set(&mut p.disturbance, self.f_t);
        set(&mut p.wind_torque[0], self.tau_wx);
        set(&mut p.wind_torque[1], self.tau_wy);
        set(&mut p.wind_torque[2], self.tau_wz);
        set(&mut p.control_torque[0], self.tau_x);
        set(&mut p.control_torque[1], self.tau_y);
        set(&mut p.control_torque[2], self.tau_z);
        p
    }

    /// Resolve into concrete parameters, filling unset keys from the system
    /// defaults.
    pub fn resolve(&self) -> Result<Resolved, Error> {
        let (field, mut encoder, mut noise, mut trigger) = match (&self.system, &self.field) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either `system` or `field`, not both".into(),
                ));
            }
            (Some(name), None) => match name.as_str() {
                "pendulum" => {
                    let (f, c) = systems::pendulum();
                    (f, c, default_noise(), default_trigger())
                }
                "quadrotor" => {
                    let (f, c) = systems::quadrotor(&self.quadrotor_params())?;
                    (f, c, default_noise(), default_trigger())
                }
                "tanh" => {
                    let (f, c, n, t) = systems::tanh_system();
                    (f, c, n, t)
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown system '{}' (expected pendulum, quadrotor or tanh)",
                        other
                    )));
                }
            },
            (None, Some(text)) => {
                let field = VectorField::parse(text)?;
                let missing = |key: &str| {
                    Error::Config(format!("inline fields require the `{}` key", key))
                };
                let encoder = EncoderConfig {
                    lambda: self.lambda.ok_or_else(|| missing("lambda"))?,
                    k_max: self.k_max.unwrap_or(3),
                    m_max: self.m_max.unwrap_or(3),
                    t0: self.t0.unwrap_or(0.0),
                    horizon: self.horizon.ok_or_else(|| missing("horizon"))?,
                    dt: self.dt.ok_or_else(|| missing("dt"))?,
                    x0: self.x0.clone().ok_or_else(|| missing("x0"))?,
                };
                (field, encoder, default_noise(), default_trigger())
            }
            (None, None) => {
                return Err(Error::Config(
                    "config needs a `system` name or an inline `field`".into(),
                ));
            }
        };

        // config keys override the system defaults
        if let Some(v) = self.lambda {
            encoder.lambda = v;
        }
        if let Some(v) = self.k_max {
            encoder.k_max = v;
        }
        if let Some(v) = self.m_max {
            encoder.m_max = v;
        }
        if let Some(v) = self.t0 {
            encoder.t0 = v;
        }
        if let Some(v) = self.horizon {
            encoder.horizon = v;
        }
        if let Some(v) = self.dt {
            encoder.dt = v;
        }
        if let Some(v) = &self.x0 {
            encoder.x0 = v.clone();
        }
        if let Some(v) = self.sigma {
            noise.sigma = v;
        }
        if let Some(v) = self.seed {
            noise.seed = v;
        }
        if let Some(v) = self.delta_noise {
            trigger.delta_noise = v;
        }
        if let Some(v) = self.check_every {
            trigger.check_every = v;
        }

        if noise.sigma < 0.0 {
            return Err(Error::Config(format!(
                "sigma must be >= 0, got {}",
                noise.sigma
            )));
        }
        TriggerConfig::new(trigger.delta_noise, trigger.check_every)?;
        encoder.validate()?;

        Ok(Resolved {
            field,
            encoder,
            noise,
            trigger,
            runs: self.runs.unwrap_or(1),
        })
    }
}

fn default_noise() -> NoiseSpec {
    NoiseSpec {
        sigma: 0.0,
        seed: 42,
    }
}

fn default_trigger() -> TriggerConfig {
    TriggerConfig {
        delta_noise: 0.075,
        check_every: 1,
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub field: VectorField,
    pub encoder: EncoderConfig,
    pub noise: NoiseSpec,
    pub trigger: TriggerConfig,
    pub runs: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"system": "tanh", "lambdaa": 1.0}"#);
        assert!(err.is_err());
    }

    #[test]
    fn system_defaults_fill_unset_keys() {
        let config: RunConfig = serde_json::from_str(r#"{"system": "tanh"}"#).unwrap();
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.encoder.x0, vec![6.0]);
        assert_eq!(resolved.encoder.m_max, 3);
        assert_eq!(resolved.noise.sigma, 0.1);
        assert_eq!(resolved.trigger.delta_noise, 0.075);
    }

    #[test]
    fn config_keys_override_defaults() {
        let config: RunConfig =
            serde_json::from_str(r#"{"system": "tanh", "lambda": 0.5, "seed": 7}"#).unwrap();
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.encoder.lambda, 0.5);
        assert_eq!(resolved.noise.seed, 7);
    }

    #[test]
    fn inline_fields_require_core_keys() {
        let config: RunConfig = serde_json::from_str(r#"{"field": "-1*x0"}"#).unwrap();
        assert!(config.resolve().is_err());
        let full: RunConfig = serde_json::from_str(
            r#"{"field": "-1*x0", "lambda": 0.1, "horizon": 1.0, "dt": 0.01, "x0": [1.0]}"#,
        )
        .unwrap();
        let resolved = full.resolve().unwrap();
        assert_eq!(resolved.field.dim(), 1);
    }

    #[test]
    fn quadrotor_keys_reach_the_builder() {
        let config: RunConfig =
            serde_json::from_str(r#"{"system": "quadrotor", "i_x": 2.0, "mass": 3.0}"#).unwrap();
        let resolved = config.resolve().unwrap();
        // p' = (tau_x + tau_wx) / i_x = 1 at rest with i_x = 2
        let rest = resolved.field.eval(&[0.0; 8]).unwrap();
        assert!((rest[2] - 1.0).abs() < 1e-12);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            proptest::option::of(0.001f64..10.0),
            proptest::option::of(1usize..6),
            proptest::option::of(proptest::collection::vec(-5.0f64..5.0, 1..4)),
            proptest::option::of(0u64..1000),
        )
            .prop_map(|(lambda, k_max, x0, seed)| RunConfig {
                system: Some("tanh".into()),
                lambda,
                k_max,
                x0,
                seed,
                ..RunConfig::default()
            })
    }

    proptest! {
        #[test]
        fn config_round_trips_through_json(config in arb_config()) {
            let text = serde_json::to_string(&config).unwrap();
            let back: RunConfig = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, config);
        }
    }
}
