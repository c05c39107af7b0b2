//! Trajectory generation (deterministic RK4, stochastic Euler-Maruyama) and
//! the trajectory-deviation integral that drives the encoder cost.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::expr::VectorField;
use crate::io::format_float;
use crate::taylor::LocalModel;

/// Right-hand side of an autonomous ODE. Implemented by both the exact
/// vector field and its local polynomial models, so the same integrators
/// drive reference trajectories and reconstructions.
pub trait Dynamics {
    fn dim(&self) -> usize;
    fn rhs(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl Dynamics for VectorField {
    fn dim(&self) -> usize {
        VectorField::dim(self)
    }

    fn rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

impl Dynamics for LocalModel {
    fn dim(&self) -> usize {
        LocalModel::dim(self)
    }

    fn rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

/// A uniformly sampled state path over `[t0, t0 + N*dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64, states: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", dt)));
        }
        if states.len() < 2 {
            return Err(Error::Config("a trajectory needs at least two samples".into()));
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(Error::Config("trajectory states have mixed dimensions".into()));
        }
        Ok(Trajectory { t0, dt, states })
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Number of integration steps (`states.len() - 1`).
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.dt
    }

    /// Sub-trajectory covering the sample indices `start..=stop`.
    pub fn slice(&self, start: usize, stop: usize) -> Trajectory {
        assert!(start < stop && stop < self.states.len());
        Trajectory {
            t0: self.time(start),
            dt: self.dt,
            states: self.states[start..=stop].to_vec(),
        }
    }

    fn check_same_grid(&self, other: &Trajectory) -> Result<()> {
        if (self.t0 - other.t0).abs() > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "t0 {} vs {}",
                self.t0, other.t0
            )));
        }
        if (self.dt - other.dt).abs() > 1e-15 {
            return Err(Error::GridMismatch(format!(
                "dt {} vs {}",
                self.dt, other.dt
            )));
        }
        if self.states.len() != other.states.len() {
            return Err(Error::GridMismatch(format!(
                "length {} vs {}",
                self.states.len(),
                other.states.len()
            )));
        }
        if self.dim() != other.dim() {
            return Err(Error::GridMismatch(format!(
                "dimension {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// CSV export: header `t,x0,...,x{n-1}`, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for i in 0..self.dim() {
            write!(w, ",x{}", i)?;
        }
        writeln!(w)?;
        for (j, state) in self.states.iter().enumerate() {
            write!(w, "{}", format_float(self.time(j)))?;
            for v in state {
                write!(w, ",{}", format_float(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Diffusion scale and generator seed for the stochastic simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(Error::Config(format!("sigma must be >= 0, got {}", sigma)));
        }
        Ok(NoiseSpec { sigma, seed })
    }
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::Config(format!(
            "horizon and dt must be positive, got {} and {}",
            horizon, dt
        )));
    }
    let steps = (horizon / dt).round();
    if (steps * dt - horizon).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "dt {} does not divide horizon {}",
            dt, horizon
        )));
    }
    Ok(steps as usize)
}

fn check_finite(x: &[f64], time: f64) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration {
            time,
            reason: "state is not finite".into(),
        });
    }
    Ok(())
}

/// One classical Runge-Kutta step of size `dt` from `x`.
pub fn rk4_step<D: Dynamics + ?Sized>(rhs: &D, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let k1 = rhs.rhs(x)?;
    let mut stage = vec![0.0; n];
    for i in 0..n {
        stage[i] = x[i] + 0.5 * dt * k1[i];
    }
    let k2 = rhs.rhs(&stage)?;
    for i in 0..n {
        stage[i] = x[i] + 0.5 * dt * k2[i];
    }
    let k3 = rhs.rhs(&stage)?;
    for i in 0..n {
        stage[i] = x[i] + dt * k3[i];
    }
    let k4 = rhs.rhs(&stage)?;
    let mut out = vec![0.0; n];
    for i in 0..n {
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrate `xdot = rhs(x)` with fixed-step classical RK4.
pub fn rk4_solve<D: Dynamics + ?Sized>(
    rhs: &D,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    if x0.len() != rhs.dim() {
        return Err(Error::DimensionMismatch {
            expected: rhs.dim(),
            got: x0.len(),
        });
    }
    let steps = step_count(horizon, dt)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.to_vec());
    for j in 0..steps {
        let time = t0 + j as f64 * dt;
        let next = rk4_step(rhs, &states[j], dt).map_err(|e| match e {
            Error::Integration { .. } => e,
            other => Error::Integration {
                time,
                reason: other.to_string(),
            },
        })?;
        check_finite(&next, time + dt)?;
        states.push(next);
    }
    Trajectory::new(t0, dt, states)
}

/// Sample `xdot = f(x) + sigma * xi(t)` with the Euler-Maruyama scheme:
/// `x_{j+1} = x_j + f(x_j) dt + sigma sqrt(dt) xi_j`, one independent
/// standard normal draw per component and step. Bit-reproducible for a
/// fixed seed.
pub fn euler_maruyama(
    field: &VectorField,
    x0: &[f64],
    t0: f64,
    horizon: f64,
    dt: f64,
    noise: &NoiseSpec,
) -> Result<Trajectory> {
    if x0.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: x0.len(),
        });
    }
    let steps = step_count(horizon, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let scale = noise.sigma * dt.sqrt();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.to_vec());
    for j in 0..steps {
        let time = t0 + j as f64 * dt;
        let drift = field.eval(&states[j]).map_err(|e| Error::Integration {
            time,
            reason: e.to_string(),
        })?;
        let mut next = states[j].clone();
        for (i, v) in next.iter_mut().enumerate() {
            let xi: f64 = StandardNormal.sample(&mut rng);
            *v += drift[i] * dt + scale * xi;
        }
        check_finite(&next, time + dt)?;
        states.push(next);
    }
    Trajectory::new(t0, dt, states)
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Left Riemann sum of the pointwise L2 distance:
/// `dt * sum_j ||a_j - b_j||` over every sample except the last.
pub fn deviation(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    a.check_same_grid(b)?;
    let sum: f64 = a
        .states
        .iter()
        .zip(&b.states)
        .take(a.steps())
        .map(|(x, y)| l2_distance(x, y))
        .sum();
    Ok(a.dt * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{var, VectorField};
    use approx::assert_abs_diff_eq;

    fn linear_decay() -> VectorField {
        VectorField::new(vec![-var(0)]).unwrap()
    }

    #[test]
    fn rk4_reproduces_exponential_decay() {
        let traj = rk4_solve(&linear_decay(), &[1.0], 0.0, 1.0, 0.01).unwrap();
        assert_eq!(traj.states.len(), 101);
        assert_abs_diff_eq!(traj.states[100][0], (-1.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn zero_field_stays_constant() {
        let field = VectorField::new(vec![crate::expr::constant(0.0), crate::expr::constant(0.0)])
            .unwrap();
        let traj = rk4_solve(&field, &[1.5, -2.0], 0.0, 1.0, 0.1).unwrap();
        for s in &traj.states {
            assert_eq!(s, &vec![1.5, -2.0]);
        }
    }

    #[test]
    fn rk4_rejects_nondivisible_grids() {
        assert!(rk4_solve(&linear_decay(), &[1.0], 0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn euler_maruyama_without_noise_is_explicit_euler() {
        let field = linear_decay();
        let noise = NoiseSpec::new(0.0, 7).unwrap();
        let traj = euler_maruyama(&field, &[1.0], 0.0, 1.0, 0.01, &noise).unwrap();
        // independent explicit Euler
        let mut x = 1.0;
        for _ in 0..100 {
            x += -x * 0.01;
        }
        assert_abs_diff_eq!(traj.states[100][0], x, epsilon = 1e-14);
    }

    #[test]
    fn euler_maruyama_is_reproducible_per_seed() {
        let field = linear_decay();
        let noise = NoiseSpec::new(0.1, 42).unwrap();
        let a = euler_maruyama(&field, &[6.0], 0.0, 1.0, 0.01, &noise).unwrap();
        let b = euler_maruyama(&field, &[6.0], 0.0, 1.0, 0.01, &noise).unwrap();
        assert_eq!(a, b);
        let other = NoiseSpec::new(0.1, 43).unwrap();
        let c = euler_maruyama(&field, &[6.0], 0.0, 1.0, 0.01, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn deviation_of_identical_paths_is_zero() {
        let traj = rk4_solve(&linear_decay(), &[1.0], 0.0, 1.0, 0.01).unwrap();
        assert_eq!(deviation(&traj, &traj).unwrap(), 0.0);
    }

    #[test]
    fn deviation_of_constant_offset_is_exact() {
        let a = Trajectory::new(0.0, 0.25, vec![vec![0.0]; 9]).unwrap();
        let b = Trajectory::new(0.0, 0.25, vec![vec![0.5]; 9]).unwrap();
        // constant integrand: c * T with T = 2
        assert_abs_diff_eq!(deviation(&a, &b).unwrap(), 0.5 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn deviation_rejects_mismatched_grids() {
        let a = Trajectory::new(0.0, 0.25, vec![vec![0.0]; 9]).unwrap();
        let b = Trajectory::new(0.0, 0.5, vec![vec![0.0]; 9]).unwrap();
        assert!(deviation(&a, &b).is_err());
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let traj = Trajectory::new(0.0, 0.5, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x0,x1");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}
