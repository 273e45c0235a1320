//! Deterministic, unbounded, lazily-materialized Bernoulli(p) site
//! percolation on Z^d with an on-demand, memoized cluster-size oracle.
//!
//! Sites are never pre-generated: the state of a site is a pure function of
//! (seed, coordinates), so any query order, process, or thread count sees the
//! same configuration. Cluster sizes are discovered by breadth-first
//! exploration over open nearest neighbors and cached for every site of the
//! explored cluster, since the walk revisits clusters heavily.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Mutex;

use crate::error::{EnvError, ParamsError};
use crate::lattice::{Site, MAX_DIM};
use crate::rng::{derive_seed, mix64, StreamTag};

/// Default safety bound on cluster exploration. At subcritical p the
/// probability of a cluster this large is astronomically small; hitting the
/// cap turns a pathological configuration into a loud failure.
pub const DEFAULT_CLUSTER_CAP: u64 = 1_000_000;

/// Approximate site-percolation thresholds used as subcriticality guards.
/// Standard literature values; overridable per run.
fn default_guard(d: usize) -> f64 {
    match d {
        1 => 0.99,
        2 => 0.59,
        3 => 0.31,
        4 => 0.20,
        5 => 0.14,
        6 => 0.11,
        7 => 0.09,
        _ => 0.08,
    }
}

/// Model parameters plus the reproducibility seed: the single source of
/// truth for a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    d: usize,
    p: f64,
    lambda: f64,
    ell: Vec<f64>,
    beta: f64,
    cluster_cap: u64,
    seed: u64,
    guard_override: Option<f64>,
}

impl Params {
    pub fn new(
        d: usize,
        p: f64,
        lambda: f64,
        ell: Vec<f64>,
        beta: f64,
        seed: u64,
    ) -> Result<Self, ParamsError> {
        Self::with_cluster_cap(d, p, lambda, ell, beta, DEFAULT_CLUSTER_CAP, seed)
    }

    pub fn with_cluster_cap(
        d: usize,
        p: f64,
        lambda: f64,
        ell: Vec<f64>,
        beta: f64,
        cluster_cap: u64,
        seed: u64,
    ) -> Result<Self, ParamsError> {
        if d < 1 || d > MAX_DIM {
            return Err(ParamsError::BadDimension { got: d, max: MAX_DIM });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(ParamsError::BadProbability(p));
        }
        if ell.len() != d {
            return Err(ParamsError::BadEllLength { d, got: ell.len() });
        }
        let norm = ell.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(ParamsError::NotUnitVector(norm));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ParamsError::BadLambda(lambda));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(ParamsError::BadBeta(beta));
        }
        if cluster_cap < 1 {
            return Err(ParamsError::BadClusterCap);
        }
        Ok(Params {
            d,
            p,
            lambda,
            ell,
            beta,
            cluster_cap,
            seed,
            guard_override: None,
        })
    }

    /// Override the subcriticality guard threshold for this run.
    pub fn with_subcritical_guard(mut self, guard: f64) -> Self {
        self.guard_override = Some(guard);
        self
    }

    /// Same parameters under a different seed (replica derivation).
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        out
    }

    /// Same parameters with a different attraction strength (coupled runs).
    pub fn with_beta(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.beta = beta;
        out
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn ell(&self) -> &[f64] {
        &self.ell
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn cluster_cap(&self) -> u64 {
        self.cluster_cap
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Present when p is at or above the subcriticality guard for this
    /// dimension. The model requires p < p_c; cluster exploration diverges
    /// otherwise. Warns rather than rejects: guard values are approximate.
    pub fn subcritical_guard_warning(&self) -> Option<String> {
        let guard = self.guard_override.unwrap_or_else(|| default_guard(self.d));
        if self.p >= guard {
            Some(format!(
                "p = {} is at or above the subcriticality guard {} for d = {}; \
                 cluster exploration may hit cluster_cap",
                self.p, guard, self.d
            ))
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteState {
    Open,
    Closed,
}

/// Cluster-size cache. Packed 64-bit keys for d <= 3 (hot path); Site keys
/// above that.
enum ClusterCache {
    Packed(HashMap<u64, u64>),
    Wide(HashMap<Site, u64>),
}

impl ClusterCache {
    fn new(d: usize) -> Self {
        if d <= 3 {
            ClusterCache::Packed(HashMap::new())
        } else {
            ClusterCache::Wide(HashMap::new())
        }
    }

    fn get(&self, site: &Site) -> Result<Option<u64>, EnvError> {
        match self {
            ClusterCache::Packed(m) => Ok(m.get(&site.packed_key()?).copied()),
            ClusterCache::Wide(m) => Ok(m.get(site).copied()),
        }
    }

    fn insert_all(&mut self, sites: &[Site], size: u64) -> Result<(), EnvError> {
        match self {
            ClusterCache::Packed(m) => {
                for s in sites {
                    m.insert(s.packed_key()?, size);
                }
            }
            ClusterCache::Wide(m) => {
                for s in sites {
                    m.insert(*s, size);
                }
            }
        }
        Ok(())
    }

    fn clear(&mut self) {
        match self {
            ClusterCache::Packed(m) => m.clear(),
            ClusterCache::Wide(m) => m.clear(),
        }
    }

    fn len(&self) -> usize {
        match self {
            ClusterCache::Packed(m) => m.len(),
            ClusterCache::Wide(m) => m.len(),
        }
    }
}

/// A percolation environment: site states as a pure function of the seed,
/// plus the memoized cluster-size oracle C_x.
///
/// Shareable across threads for reads; the cache is internally synchronized
/// and only ever memoizes values that a fresh exploration would also return,
/// so results are bit-identical regardless of thread count or query order.
pub struct Environment {
    params: Params,
    site_seed: u64,
    /// Open iff site hash < threshold; threshold = round(p * 2^64).
    threshold: u64,
    cache: Mutex<ClusterCache>,
}

impl Environment {
    pub fn new(params: Params) -> Self {
        let threshold = probability_threshold(params.p());
        Self::with_threshold(params, threshold)
    }

    /// Construction with a forced open-threshold; `u64::MAX` forces every
    /// site open, `0` forces every site closed. Degenerate-limit test hook.
    pub(crate) fn with_threshold(params: Params, threshold: u64) -> Self {
        let site_seed = derive_seed(params.seed(), 0, StreamTag::Environment);
        Environment {
            site_seed,
            threshold,
            cache: Mutex::new(ClusterCache::new(params.d())),
            params,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// State of site x: a pure deterministic function of (seed, coordinates),
    /// marginally Bernoulli(p) and independent across sites.
    pub fn site_state(&self, site: &Site) -> SiteState {
        debug_assert_eq!(site.dim(), self.params.d());
        if site_hash(self.site_seed, site) < self.threshold {
            SiteState::Open
        } else {
            SiteState::Closed
        }
    }

    pub fn is_open(&self, site: &Site) -> bool {
        self.site_state(site) == SiteState::Open
    }

    /// Size of the maximal connected open component containing x
    /// (nearest-neighbor adjacency); 0 iff x is closed.
    ///
    /// The whole explored cluster is cached in one pass. Exploration past
    /// `cluster_cap` sites aborts with `ClusterCapExceeded`: p is too close
    /// to criticality or the cap is misconfigured, and truncating silently
    /// would corrupt every downstream estimate.
    pub fn cluster_size(&self, site: &Site) -> Result<u64, EnvError> {
        if !self.is_open(site) {
            return Ok(0);
        }
        if let Some(size) = self.cache.lock().unwrap().get(site)? {
            return Ok(size);
        }
        let members = self.explore_cluster(site)?;
        let size = members.len() as u64;
        // Idempotent: a racing exploration of the same cluster inserts the
        // same value.
        self.cache.lock().unwrap().insert_all(&members, size)?;
        Ok(size)
    }

    /// Breadth-first exploration of the open cluster containing `start`
    /// (which must be open). Pure with respect to the cache.
    fn explore_cluster(&self, start: &Site) -> Result<Vec<Site>, EnvError> {
        let cap = self.params.cluster_cap();
        let mut members = Vec::new();
        let mut queue = VecDeque::new();
        match ClusterCache::new(self.params.d()) {
            // Re-dispatch on key width for the visited set as well.
            ClusterCache::Packed(_) => {
                let mut visited: HashSet<u64> = HashSet::new();
                visited.insert(start.packed_key()?);
                queue.push_back(*start);
                while let Some(site) = queue.pop_front() {
                    members.push(site);
                    for n in site.neighbors_unchecked() {
                        if self.is_open(&n) && visited.insert(n.packed_key()?) {
                            if visited.len() as u64 > cap {
                                return Err(EnvError::ClusterCapExceeded { site: *start, cap });
                            }
                            queue.push_back(n);
                        }
                    }
                }
            }
            ClusterCache::Wide(_) => {
                let mut visited: HashSet<Site> = HashSet::new();
                visited.insert(*start);
                queue.push_back(*start);
                while let Some(site) = queue.pop_front() {
                    members.push(site);
                    for n in site.neighbors_unchecked() {
                        if self.is_open(&n) && visited.insert(n) {
                            if visited.len() as u64 > cap {
                                return Err(EnvError::ClusterCapExceeded { site: *start, cap });
                            }
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        Ok(members)
    }

    /// Drop all memoized cluster sizes. Never changes any return value.
    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    pub fn cached_cluster_count(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

fn probability_threshold(p: f64) -> u64 {
    // p in (0,1) maps to [1, u64::MAX]; the cast saturates at the top.
    let t = p * 18_446_744_073_709_551_616.0; // 2^64
    (t as u64).max(1)
}

/// Counter-based site hash: fold each coordinate into a SplitMix64 chain.
/// Branch-free for fixed d; identical across call order and thread count.
#[inline]
fn site_hash(seed: u64, site: &Site) -> u64 {
    let mut h = seed;
    for &c in site.coords() {
        let zz = ((c as i64) << 1) ^ ((c as i64) >> 63);
        h = mix64(h ^ (zz as u64).wrapping_add(0x9E37_79B9_7F4A_7C15));
    }
    h
}

/// M independent draws of C_0, each from a fresh environment whose seed is
/// derived from (params.seed, replica index). Feeds tail-rate and MGF
/// estimation.
pub fn sample_cluster_sizes(params: &Params, replicas: u64) -> Result<Vec<u64>, EnvError> {
    debug_assert!(replicas >= 1);
    let origin = Site::origin(params.d());
    let mut out = Vec::with_capacity(replicas as usize);
    for i in 0..replicas {
        let env = Environment::new(
            params.reseeded(derive_seed(params.seed(), i, StreamTag::ClusterSample)),
        );
        out.push(env.cluster_size(&origin)?);
    }
    Ok(out)
}
