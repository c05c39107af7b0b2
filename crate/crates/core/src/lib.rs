//! Encode known nonlinear dynamical systems as sequences of local Taylor
//! models selected by a description-length objective, and simulate
//! event-triggered remote state estimation to measure the communication the
//! encoding saves.
//!
//! The pipeline: [`expr`] represents the vector field and computes exact
//! jets, [`taylor`] is the truncated polynomial algebra behind them,
//! [`integrate`] produces trajectories, [`mieds`] searches partitions and
//! per-segment model orders, [`etse`] runs the dual-trigger estimation
//! simulation, and [`systems`] ships the standard benchmark fields.

pub mod error;
pub mod etse;
pub mod expr;
pub mod integrate;
pub mod io;
pub mod mieds;
pub mod systems;
pub mod taylor;

pub use error::{Error, Result};
pub use etse::{CommEvent, CommLog, EventKind, Predictor, PredictorStats, RegionSet, TriggerConfig};
pub use expr::{Expr, VectorField};
pub use integrate::{deviation, euler_maruyama, rk4_solve, Dynamics, NoiseSpec, Trajectory};
pub use mieds::{decode, encode, stochastic_encode, EncoderConfig, Encoding, Segment};
pub use taylor::{LocalModel, MultiIndex, TruncatedPoly};
