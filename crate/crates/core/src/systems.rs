//! Canned benchmark systems with their standard parameters and encoder
//! configurations.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::expr::{cos, sin, tan, tanh, var, Expr, VectorField};
use crate::integrate::NoiseSpec;
use crate::mieds::EncoderConfig;
use crate::etse::TriggerConfig;

/// Damped pendulum: `x0` angular position, `x1` angular velocity.
///
/// `x0' = x1`, `x1' = -x1 - 9.81 sin(x0)`.
pub fn pendulum() -> (VectorField, EncoderConfig) {
    let field = VectorField::new(vec![var(1), -var(1) - 9.81 * sin(var(0))]).unwrap();
    let config = EncoderConfig {
        lambda: 2.0,
        k_max: 3,
        m_max: 4,
        t0: 0.0,
        horizon: 2.0,
        dt: 0.01,
        x0: vec![FRAC_PI_4, 0.0],
    };
    (field, config)
}

/// Physical parameters of the quad-rotor attitude/velocity model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorParams {
    pub inertia: [f64; 3],
    pub mass: f64,
    pub gravity: f64,
    /// Wind forces along the body axes.
    pub wind_force: [f64; 3],
    /// Time-varying thrust disturbance.
    pub disturbance: f64,
    pub wind_torque: [f64; 3],
    pub control_torque: [f64; 3],
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        // Inertias are not part of the standard parameter set; unit values
        // keep the gyroscopic difference terms zero.
        QuadrotorParams {
            inertia: [1.0, 1.0, 1.0],
            mass: 1.0,
            gravity: 9.81,
            wind_force: [1.0, 1.0, 1.0],
            disturbance: 0.0,
            wind_torque: [1.0, 1.0, 1.0],
            control_torque: [1.0, 1.0, 1.0],
        }
    }
}

/// Quad-rotor UAV body dynamics, state order `[phi, theta, p, q, r, u, v, w]`
/// (roll, pitch, angular rates, body-frame velocities).
///
/// The pitch terms go through `tan(theta)`, so integration fails cleanly if
/// the pitch reaches an odd multiple of pi/2.
pub fn quadrotor(params: &QuadrotorParams) -> Result<(VectorField, EncoderConfig)> {
    if params.inertia.iter().any(|i| *i <= 0.0) {
        return Err(Error::Config("inertias must be positive".into()));
    }
    if params.mass <= 0.0 {
        return Err(Error::Config("mass must be positive".into()));
    }
    let [ix, iy, iz] = params.inertia;
    let m = params.mass;
    let g = params.gravity;
    let [fwx, fwy, fwz] = params.wind_force;
    let ft = params.disturbance;
    let [twx, twy, twz] = params.wind_torque;
    let [tx, ty, tz] = params.control_torque;

    let phi = || var(0);
    let theta = || var(1);
    let p = || var(2);
    let q = || var(3);
    let r = || var(4);
    let u = || var(5);
    let v = || var(6);
    let w = || var(7);
    let c = Expr::Const;

    let components = vec![
        // phi' = p + r cos(phi) tan(theta) + q sin(phi) tan(theta)
        p() + r() * (cos(phi()) * tan(theta())) + q() * (sin(phi()) * tan(theta())),
        // theta' = q cos(theta) - r sin(phi)
        q() * cos(theta()) - r() * sin(phi()),
        // p' = ((Iy - Iz)/Ix) r q + (tau_x + tau_wx)/Ix
        c((iy - iz) / ix) * (r() * q()) + c((tx + twx) / ix),
        // q' = ((Iz - Ix)/Iy) p r + (tau_y + tau_wy)/Iy
        c((iz - ix) / iy) * (p() * r()) + c((ty + twy) / iy),
        // r' = ((Ix - Iy)/Iz) p q + (tau_z + tau_wz)/Iz
        c((ix - iy) / iz) * (p() * q()) + c((tz + twz) / iz),
        // u' = r v - q w - g sin(theta) + f_wx / m
        r() * v() - q() * w() - c(g) * sin(theta()) + c(fwx / m),
        // v' = p w - r u + g sin(phi) cos(theta) + f_wy / m
        p() * w() - r() * u() + c(g) * (sin(phi()) * cos(theta())) + c(fwy / m),
        // w' = q u - p v + g cos(theta) cos(phi) + (f_wz - f_t) / m
        q() * u() - p() * v() + c(g) * (cos(theta()) * cos(phi())) + c((fwz - ft) / m),
    ];
    let field = VectorField::new(components)?;
    let config = EncoderConfig {
        lambda: 2.0,
        k_max: 5,
        m_max: 5,
        t0: 0.0,
        horizon: 2.0,
        dt: 0.01,
        x0: vec![-2.0, -3.0, 1.0, 3.0, 1.0, 4.0, 2.0, 1.0],
    };
    Ok((field, config))
}

/// Scalar saturating system `x' = -tanh(x)` with its stochastic experiment
/// defaults: unit-variance white noise scaled by 0.1 and a 0.075 trigger
/// threshold.
pub fn tanh_system() -> (VectorField, EncoderConfig, NoiseSpec, TriggerConfig) {
    let field = VectorField::new(vec![-tanh(var(0))]).unwrap();
    let config = EncoderConfig {
        lambda: 0.01,
        k_max: 3,
        m_max: 3,
        t0: 0.0,
        horizon: 10.0,
        dt: 0.01,
        x0: vec![6.0],
    };
    let noise = NoiseSpec {
        sigma: 0.1,
        seed: 42,
    };
    let trigger = TriggerConfig {
        delta_noise: 0.075,
        check_every: 1,
    };
    (field, config, noise, trigger)
}
