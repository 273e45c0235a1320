//! Error types shared across the crate.

use thiserror::Error;

use crate::lattice::Site;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("coordinate {value} on axis {axis} exceeds the packed range +-{bound}")]
    CoordRangeExceeded { axis: usize, value: i32, bound: i32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("dimension must be in 1..={max}, got {got}")]
    BadDimension { got: usize, max: usize },
    #[error("site-open probability must lie strictly inside (0,1), got {0}")]
    BadProbability(f64),
    #[error("ell must have length d = {d}, got {got}")]
    BadEllLength { d: usize, got: usize },
    #[error("ell must be a unit vector (|ell| = 1 within 1e-12), got |ell| = {0}")]
    NotUnitVector(f64),
    #[error("drift intensity lambda must be >= 0 and finite, got {0}")]
    BadLambda(f64),
    #[error("attraction strength beta must be >= 0 and finite, got {0}")]
    BadBeta(f64),
    #[error("cluster_cap must be >= 1")]
    BadClusterCap,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    /// Cluster exploration visited more than `cluster_cap` sites. The model
    /// requires subcritical percolation; hitting the cap means p is too close
    /// to criticality or the cap is badly configured. Callers must abort.
    #[error("cluster exploration from {site} exceeded cluster_cap = {cap}")]
    ClusterCapExceeded { site: Site, cap: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    /// A holding time or clock value left the representable range
    /// (exp(beta * C) above ~1e300, or a non-finite clock sum).
    #[error("clock overflow at step {step}: log holding scale {log_scale} exceeds the representable range")]
    HorizonOverflow { step: u64, log_scale: f64 },
    #[error("queried time {t} is at or beyond the last recorded jump time {final_time}")]
    OutOfHorizon { t: f64, final_time: f64 },
    #[error("horizon must set max_steps and/or max_time, both positive")]
    BadHorizon,
    #[error("beta list must be nonempty with every beta >= 0 and finite")]
    BadBetaList,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("need at least {need} replicas, got {got}")]
    InsufficientReplicas { need: usize, got: usize },
    #[error("time grid must be strictly increasing with ratio > 1 and count >= 2")]
    BadGrid,
    #[error("exponent fit is degenerate: no usable points in the fit window")]
    DegenerateFit,
    #[error("tail window has only {points} usable points (need >= 4)")]
    InsufficientTail { points: usize },
    #[error("need at least {need} cluster samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("estimator not applicable: {0}")]
    Unsupported(String),
}
