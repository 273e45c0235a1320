//! Continuous-time random walks on Z^d with a drift along a fixed direction
//! and an attraction to the clusters of a subcritical Bernoulli site
//! percolation.
//!
//! The crate simulates the walk on a lazily-materialized infinite
//! environment, estimates its long-time statistics (speed, escape exponent,
//! mean squared displacement, the environment seen from the walker, the
//! cluster tail rate) from replica ensembles, and cross-validates every
//! estimate against closed-form predictions. See the `examples/` directory
//! for one runnable program per capability, and the `percowalk` binary for
//! the config-driven experiment harness.

pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod theory;
pub mod validate;

pub use dynamics::{
    build_kernel, jump_rate, log_jump_rate, simulate, simulate_coupled, CoupledTrajectorySet,
    Horizon, SkeletonKernel, Step, Termination, Trajectory,
};
pub use env::{sample_cluster_sizes, Environment, Params, SiteState};
pub use error::{DynamicsError, EnvError, EstimatorError, LatticeError, ParamsError};
pub use lattice::{Direction, Site};
