//! The walk itself: skeleton steps, exponential holding times scaled by
//! e^{beta * C}, the clock process and its inverse, and the monotone
//! coupling of several attraction strengths over shared randomness.
//!
//! Trajectories do not hold full paths in memory. The simulation records a
//! checkpoint (position, compensated clock, both RNG states) every
//! `stride` steps; any query between checkpoints replays the deterministic
//! core loop from the nearest one, which is bit-identical to the original
//! pass because the skeleton and holding variates come from separate
//! substreams and cluster sizes are pure functions of the environment.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{Environment, Params};
use crate::error::{DynamicsError, EnvError};
use crate::lattice::{Direction, Site};
use crate::rng::{derive_seed, exp_from_uniform, KahanSum, StreamTag};

/// Checkpoint spacing in skeleton steps.
pub const DEFAULT_CHECKPOINT_STRIDE: u64 = 1024;

/// Holding scales above this are rejected: exp(beta * C) would exceed ~1e300.
const MAX_LOG_HOLD: f64 = 690.775527898213;

/// Skeleton transition probabilities over the 2d signed unit vectors,
/// p_e = exp(lambda ell.e) / sum_e' exp(lambda ell.e'), with the cumulative
/// table used for sampling and the normalizer K = 1 / sum_e exp(lambda ell.e).
#[derive(Clone, Debug)]
pub struct SkeletonKernel {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    log_normalizer: f64,
    dim: usize,
}

/// Kernel for drift intensity `lambda` along the unit vector `ell`.
pub fn build_kernel(lambda: f64, ell: &[f64]) -> SkeletonKernel {
    let dim = ell.len();
    let weights: Vec<f64> = Direction::all(dim)
        .map(|e| (lambda * e.dot(ell)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    // Guard the top of the table against rounding in the partial sums.
    *cumulative.last_mut().unwrap() = 1.0;
    SkeletonKernel {
        probs,
        cumulative,
        log_normalizer: -total.ln(),
        dim,
    }
}

impl SkeletonKernel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// p_e indexed as `+e_1, -e_1, +e_2, -e_2, ...`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// ln K with K the generator normalizer.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Direction {
        let u: f64 = rng.random();
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1);
        Direction(idx as u8)
    }
}

/// Jump rate of the walk at x along the signed unit vector `dir`, in log
/// space: ln K + lambda ell.dir - beta C_x.
pub fn log_jump_rate(
    env: &Environment,
    params: &Params,
    x: &Site,
    dir: Direction,
) -> Result<f64, EnvError> {
    let total: f64 = Direction::all(params.d())
        .map(|e| (params.lambda() * e.dot(params.ell())).exp())
        .sum();
    let cluster = env.cluster_size(x)? as f64;
    Ok(-total.ln() + params.lambda() * dir.dot(params.ell()) - params.beta() * cluster)
}

/// K exp(lambda ell.dir - beta C_x). Underflows to 0 for very deep traps;
/// use [`log_jump_rate`] where exactness matters.
pub fn jump_rate(
    env: &Environment,
    params: &Params,
    x: &Site,
    dir: Direction,
) -> Result<f64, EnvError> {
    Ok(log_jump_rate(env, params, x, dir)?.exp())
}

/// Stopping rule: a step budget, a time budget, or whichever hits first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Horizon {
    max_steps: Option<u64>,
    max_time: Option<f64>,
}

impl Horizon {
    pub fn steps(n: u64) -> Result<Self, DynamicsError> {
        if n == 0 {
            return Err(DynamicsError::BadHorizon);
        }
        Ok(Horizon {
            max_steps: Some(n),
            max_time: None,
        })
    }

    pub fn time(t: f64) -> Result<Self, DynamicsError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(DynamicsError::BadHorizon);
        }
        Ok(Horizon {
            max_steps: None,
            max_time: Some(t),
        })
    }

    pub fn steps_or_time(n: u64, t: f64) -> Result<Self, DynamicsError> {
        if n == 0 || !(t > 0.0 && t.is_finite()) {
            return Err(DynamicsError::BadHorizon);
        }
        Ok(Horizon {
            max_steps: Some(n),
            max_time: Some(t),
        })
    }

    pub fn max_steps(&self) -> Option<u64> {
        self.max_steps
    }

    pub fn max_time(&self) -> Option<f64> {
        self.max_time
    }
}

/// What stopped the simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxSteps,
    MaxTime,
}

/// One skeleton step with its holding interval: the walk sits at `site`
/// (= X_index) from `start` (= S_index) for `hold` = eps * exp(beta * C).
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub index: u64,
    pub site: Site,
    /// S_index, the jump time into this site.
    pub start: f64,
    /// The recorded unit exponential for this step.
    pub eps: f64,
    /// eps * exp(beta * C_site); S_{index+1} = S_index + hold.
    pub hold: f64,
    pub cluster: u64,
}

/// The deterministic core state: everything needed to continue (or replay)
/// the walk from a given step.
#[derive(Clone)]
struct Walker {
    site: Site,
    clock: KahanSum,
    step: u64,
    /// max_{i <= step} |X_i|
    run_max: f64,
    skeleton_rng: ChaCha8Rng,
    holding_rng: ChaCha8Rng,
}

impl Walker {
    fn start(dim: usize, traj_seed: u64) -> Self {
        Walker {
            site: Site::origin(dim),
            clock: KahanSum::zero(),
            step: 0,
            run_max: 0.0,
            skeleton_rng: ChaCha8Rng::seed_from_u64(derive_seed(
                traj_seed,
                0,
                StreamTag::Skeleton,
            )),
            holding_rng: ChaCha8Rng::seed_from_u64(derive_seed(
                traj_seed,
                0,
                StreamTag::Holding,
            )),
        }
    }

    fn advance(
        &mut self,
        env: &Environment,
        kernel: &SkeletonKernel,
        beta: f64,
    ) -> Result<Step, DynamicsError> {
        let cluster = env.cluster_size(&self.site)?;
        let log_scale = beta * cluster as f64;
        if log_scale > MAX_LOG_HOLD {
            return Err(DynamicsError::HorizonOverflow {
                step: self.step,
                log_scale,
            });
        }
        let eps = exp_from_uniform(self.holding_rng.random());
        let hold = eps * log_scale.exp();
        let step = Step {
            index: self.step,
            site: self.site,
            start: self.clock.value(),
            eps,
            hold,
            cluster,
        };
        self.clock.add(hold);
        if !self.clock.value().is_finite() {
            return Err(DynamicsError::HorizonOverflow {
                step: self.step,
                log_scale,
            });
        }
        let dir = kernel.sample(&mut self.skeleton_rng);
        self.site = self.site.neighbor(dir)?;
        self.step += 1;
        self.run_max = self.run_max.max(self.site.norm());
        Ok(step)
    }
}

/// A simulated walk: skeleton positions and jump times at checkpoint
/// resolution, with exact replay between checkpoints.
pub struct Trajectory {
    env: Arc<Environment>,
    kernel: SkeletonKernel,
    beta: f64,
    seed: u64,
    stride: u64,
    checkpoints: Vec<Walker>,
    /// Steps since the last checkpoint (the recent-steps ring).
    tail: Vec<Step>,
    len: u64,
    final_site: Site,
    final_clock: f64,
    termination: Termination,
}

/// Simulate with the attraction strength taken from the environment's
/// parameters. The skeleton directions and holding exponentials come from
/// two independent substreams of `traj_seed`, so trajectories across
/// different beta on the same seed share all randomness.
pub fn simulate(
    env: &Arc<Environment>,
    kernel: &SkeletonKernel,
    horizon: Horizon,
    traj_seed: u64,
) -> Result<Trajectory, DynamicsError> {
    simulate_with_beta(env, kernel, env.params().beta(), horizon, traj_seed)
}

fn simulate_with_beta(
    env: &Arc<Environment>,
    kernel: &SkeletonKernel,
    beta: f64,
    horizon: Horizon,
    traj_seed: u64,
) -> Result<Trajectory, DynamicsError> {
    let dim = env.params().d();
    debug_assert_eq!(kernel.dim(), dim);
    let stride = DEFAULT_CHECKPOINT_STRIDE;
    let mut walker = Walker::start(dim, traj_seed);
    let mut checkpoints = vec![walker.clone()];
    let mut tail: Vec<Step> = Vec::new();
    let termination = loop {
        if let Some(t) = horizon.max_time {
            if walker.clock.value() >= t {
                break Termination::MaxTime;
            }
        }
        if let Some(n) = horizon.max_steps {
            if walker.step >= n {
                break Termination::MaxSteps;
            }
        }
        if walker.step > 0 && walker.step % stride == 0 {
            checkpoints.push(walker.clone());
            tail.clear();
        }
        tail.push(walker.advance(env, kernel, beta)?);
    };
    Ok(Trajectory {
        env: Arc::clone(env),
        kernel: kernel.clone(),
        beta,
        seed: traj_seed,
        stride,
        checkpoints,
        tail,
        len: walker.step,
        final_site: walker.site,
        final_clock: walker.clock.value(),
        termination,
    })
}

/// A point of the path located by a time query.
#[derive(Clone, Copy, Debug)]
pub struct Located {
    /// n = S^{-1}(t).
    pub step: u64,
    /// X_n; the walk is right-continuous, so Y_t = X_n for t in [S_n, S_{n+1}).
    pub site: Site,
    /// S_n.
    pub jump_time: f64,
    /// max_{i <= n} |X_i|.
    pub run_max: f64,
}

impl Trajectory {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn env(&self) -> &Arc<Environment> {
        &self.env
    }

    pub fn params(&self) -> &Params {
        self.env.params()
    }

    /// Number of completed jumps N; jump times are recorded through S_N.
    pub fn len_steps(&self) -> u64 {
        self.len
    }

    /// S_N, the last recorded jump time. Time queries must stay below it.
    pub fn final_time(&self) -> f64 {
        self.final_clock
    }

    pub fn final_position(&self) -> Site {
        self.final_site
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// The clock process inverse: the unique n with S_n <= t < S_{n+1}.
    pub fn clock_inverse(&self, t: f64) -> Result<u64, DynamicsError> {
        Ok(self.locate(t)?.step)
    }

    /// Y_t = X_{S^{-1}(t)}.
    pub fn position_at(&self, t: f64) -> Result<Site, DynamicsError> {
        Ok(self.locate(t)?.site)
    }

    /// Resolve a time query by replaying from the nearest checkpoint.
    pub fn locate(&self, t: f64) -> Result<Located, DynamicsError> {
        if !(t >= 0.0) || t >= self.final_clock {
            return Err(DynamicsError::OutOfHorizon {
                t,
                final_time: self.final_clock,
            });
        }
        // The recent-steps ring answers tail queries without replay.
        if let Some(first) = self.tail.first() {
            if t >= first.start {
                let mut run_max = self.checkpoints.last().unwrap().run_max;
                for step in &self.tail {
                    run_max = run_max.max(step.site.norm());
                    if t < step.start + step.hold {
                        return Ok(Located {
                            step: step.index,
                            site: step.site,
                            jump_time: step.start,
                            run_max,
                        });
                    }
                }
                unreachable!("tail covers [tail start, final time)");
            }
        }
        // Binary search the checkpoints for the last one at or before t.
        let idx = match self
            .checkpoints
            .partition_point(|w| w.clock.value() <= t)
        {
            0 => 0,
            n => n - 1,
        };
        let mut walker = self.checkpoints[idx].clone();
        loop {
            // Walker state is at step i here, so run_max = max_{k <= i} |X_k|.
            let run_max = walker.run_max;
            let step = walker
                .advance(&self.env, &self.kernel, self.beta)
                .expect("deterministic replay of a completed trajectory");
            if t < step.start + step.hold {
                return Ok(Located {
                    step: step.index,
                    site: step.site,
                    jump_time: step.start,
                    run_max,
                });
            }
        }
    }

    /// Positions at several query times; times must be nondecreasing.
    pub fn positions_at(&self, times: &[f64]) -> Result<Vec<Site>, DynamicsError> {
        debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        times.iter().map(|&t| self.position_at(t)).collect()
    }

    /// sup_{s <= t_j} |Y_s| for each query time; times must be nondecreasing.
    pub fn running_max_at(&self, times: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        times.iter().map(|&t| Ok(self.locate(t)?.run_max)).collect()
    }

    /// Replay the whole path: one [`Step`] per completed jump, in order.
    pub fn iter_steps(&self) -> StepIter<'_> {
        StepIter {
            traj: self,
            walker: self.checkpoints[0].clone(),
        }
    }

    /// (n, S_n, X_n) at checkpoint resolution plus the final state; the
    /// stream record format of the simulate command.
    pub fn checkpoint_records(&self) -> Vec<(u64, f64, Site)> {
        let mut out: Vec<(u64, f64, Site)> = self
            .checkpoints
            .iter()
            .map(|w| (w.step, w.clock.value(), w.site))
            .collect();
        if out.last().map(|r| r.0) != Some(self.len) {
            out.push((self.len, self.final_clock, self.final_site));
        }
        out
    }

    pub fn checkpoint_stride(&self) -> u64 {
        self.stride
    }
}

/// Full-path iterator by replay from the first checkpoint.
pub struct StepIter<'a> {
    traj: &'a Trajectory,
    walker: Walker,
}

impl Iterator for StepIter<'_> {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        if self.walker.step >= self.traj.len {
            return None;
        }
        Some(
            self.walker
                .advance(&self.traj.env, &self.traj.kernel, self.traj.beta)
                .expect("deterministic replay of a completed trajectory"),
        )
    }
}

/// Walks for several attraction strengths driven by one skeleton and one
/// exponential stream: identical X across members, and clock processes
/// pathwise ordered in beta.
pub struct CoupledTrajectorySet {
    members: Vec<Trajectory>,
}

/// Run one member per beta, all on the same trajectory seed. Substream
/// separation makes the shared-randomness coupling exact by construction:
/// the beta = b member is bit-identical to a standalone `simulate` at b.
pub fn simulate_coupled(
    env: &Arc<Environment>,
    kernel: &SkeletonKernel,
    betas: &[f64],
    horizon: Horizon,
    traj_seed: u64,
) -> Result<CoupledTrajectorySet, DynamicsError> {
    if betas.is_empty() || betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(DynamicsError::BadBetaList);
    }
    let members = betas
        .iter()
        .map(|&beta| simulate_with_beta(env, kernel, beta, horizon, traj_seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoupledTrajectorySet { members })
}

impl CoupledTrajectorySet {
    pub fn members(&self) -> &[Trajectory] {
        &self.members
    }

    pub fn betas(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.beta()).collect()
    }

    /// Largest time at which every member can answer queries.
    pub fn min_final_time(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.final_time())
            .fold(f64::INFINITY, f64::min)
    }

    /// S^{-1}(beta; t) per member.
    pub fn clock_inverses_at(&self, t: f64) -> Result<Vec<u64>, DynamicsError> {
        self.members.iter().map(|m| m.clock_inverse(t)).collect()
    }
}
