//! Closed-form predictions: drift vector, speed, the d=1 cluster law and its
//! exponential-moment generating function, escape exponents by regime, the
//! diffusion matrix of the driftless case, and the reversible weight.

use crate::env::{Environment, Params};
use crate::error::EnvError;
use crate::lattice::Site;

/// Asymptotic regime of the walk at a given (lambda, beta, d, xi).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Ballistic,
    SubballisticDrift,
    SubdiffusiveIsotropicD1,
    SubdiffusiveIsotropicDGe2,
    Diffusive,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Ballistic => "ballistic",
            Regime::SubballisticDrift => "subballistic-drift",
            Regime::SubdiffusiveIsotropicD1 => "subdiffusive-isotropic-d1",
            Regime::SubdiffusiveIsotropicDGe2 => "subdiffusive-isotropic-dge2",
            Regime::Diffusive => "diffusive",
        }
    }
}

/// Whether the predicted exponent is a full limit of ln|Y_t|/ln t or only a
/// limsup (the liminf differs in the recurrent isotropic cases).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Limit,
    Limsup,
}

impl LimitKind {
    pub fn label(self) -> &'static str {
        match self {
            LimitKind::Limit => "limit",
            LimitKind::Limsup => "limsup",
        }
    }
}

/// Predicted algebraic escape rate: |Y_t| ~ t^exponent on the log scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EscapeExponent {
    pub exponent: f64,
    pub regime: Regime,
    pub kind: LimitKind,
}

/// Drift of the skeleton walk: component k is
/// sinh(lambda ell_k) / sum_j cosh(lambda ell_j).
pub fn drift_vector(lambda: f64, ell: &[f64]) -> Vec<f64> {
    let denom: f64 = ell.iter().map(|&l| (lambda * l).cosh()).sum();
    ell.iter().map(|&l| (lambda * l).sinh() / denom).collect()
}

/// Exact tail rate of the d=1 cluster law: xi = -ln p.
pub fn xi_exact_1d(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    -p.ln()
}

/// Exact d=1 cluster-size law: the cluster of the origin is a run of open
/// sites, so P(C_0 = n) = n p^n (1-p)^2 for n >= 1 and P(C_0 = 0) = 1 - p.
pub fn cluster_pmf_1d(p: f64, n: u64) -> f64 {
    if n == 0 {
        1.0 - p
    } else {
        n as f64 * p.powi(n as i32) * (1.0 - p) * (1.0 - p)
    }
}

/// Exact d=1 tail P(C_0 >= n) = p^n (n(1-p) + p) for n >= 1, summing the pmf.
pub fn cluster_tail_1d(p: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else {
        p.powi(n as i32) * (n as f64 * (1.0 - p) + p)
    }
}

/// E[exp(beta C_0)] in d=1, closed form. With q = p e^beta:
/// (1-p) + (1-p)^2 q / (1-q)^2 for q < 1, and +infinity for q >= 1
/// (infinity is a value here, not an error).
pub fn mgf_1d(p: f64, beta: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0 && beta >= 0.0);
    let q = p * beta.exp();
    if q >= 1.0 {
        f64::INFINITY
    } else {
        let one_minus_p = 1.0 - p;
        one_minus_p + one_minus_p * one_minus_p * q / ((1.0 - q) * (1.0 - q))
    }
}

/// Monte Carlo estimate of E[exp(beta C_0)] from i.i.d. cluster samples.
#[derive(Clone, Copy, Debug)]
pub struct MgfEstimate {
    pub estimate: f64,
    /// Jackknife standard error; for the sample mean the leave-one-out
    /// algebra collapses to s / sqrt(M).
    pub stderr: f64,
    /// Cleared when the top 1% of samples carries more than half the mass:
    /// the empirical mean is then dominated by rare deep traps and should
    /// not be trusted.
    pub reliable: bool,
}

pub fn mgf_monte_carlo(samples: &[u64], beta: f64) -> MgfEstimate {
    debug_assert!(!samples.is_empty());
    let m = samples.len();
    let values: Vec<f64> = samples.iter().map(|&c| (beta * c as f64).exp()).collect();
    let total: f64 = values.iter().sum();
    let mean = total / m as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let stderr = if m > 1 {
        (ss / ((m - 1) as f64 * m as f64)).sqrt()
    } else {
        0.0
    };
    // Heavy-tail guard: mass share of the largest percentile.
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let top = (m / 100).max(1);
    let top_mass: f64 = sorted[m - top..].iter().sum();
    let reliable = top_mass <= 0.5 * total;
    MgfEstimate {
        estimate: mean,
        stderr,
        reliable,
    }
}

/// v(lambda, beta) = drift / E[exp(beta C_0)]; the zero vector when the
/// moment is infinite.
pub fn speed(params: &Params, mgf_value: f64) -> Vec<f64> {
    debug_assert!(mgf_value > 0.0);
    let drift = drift_vector(params.lambda(), params.ell());
    if mgf_value.is_infinite() {
        vec![0.0; params.d()]
    } else {
        drift.iter().map(|d| d / mgf_value).collect()
    }
}

/// The regime table for ln|Y_t| / ln t. At the border beta = xi the
/// subballistic rows apply.
pub fn escape_exponent(params: &Params, xi: f64) -> EscapeExponent {
    debug_assert!(xi > 0.0);
    let beta = params.beta();
    let lambda = params.lambda();
    if lambda > 0.0 {
        if beta < xi {
            EscapeExponent {
                exponent: 1.0,
                regime: Regime::Ballistic,
                kind: LimitKind::Limit,
            }
        } else {
            EscapeExponent {
                exponent: xi / beta,
                regime: Regime::SubballisticDrift,
                kind: LimitKind::Limit,
            }
        }
    } else if beta >= xi {
        if params.d() == 1 {
            // (1/2) (beta/(2 xi) + 1/2)^{-1} simplifies to xi / (beta + xi).
            EscapeExponent {
                exponent: xi / (beta + xi),
                regime: Regime::SubdiffusiveIsotropicD1,
                kind: LimitKind::Limsup,
            }
        } else {
            EscapeExponent {
                exponent: xi / (2.0 * beta),
                regime: Regime::SubdiffusiveIsotropicDGe2,
                kind: LimitKind::Limsup,
            }
        }
    } else {
        EscapeExponent {
            exponent: 0.5,
            regime: Regime::Diffusive,
            kind: LimitKind::Limsup,
        }
    }
}

/// Diffusion matrix of the rescaled driftless walk: (d E[exp(beta C_0)])^{-1}
/// times the identity. `None` when lambda > 0 or the moment is infinite.
pub fn diffusion_matrix(params: &Params, mgf_value: f64) -> Option<Vec<Vec<f64>>> {
    if params.lambda() > 0.0 || !mgf_value.is_finite() {
        return None;
    }
    let d = params.d();
    let scale = 1.0 / (d as f64 * mgf_value);
    let mut m = vec![vec![0.0; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = scale;
    }
    Some(m)
}

/// log mu(x) = 2 lambda ell.x + beta C_x, the reversible weight in log space.
pub fn mu_weight_log(env: &Environment, params: &Params, x: &Site) -> Result<f64, EnvError> {
    let dot: f64 = x
        .coords()
        .iter()
        .zip(params.ell())
        .map(|(&c, &l)| c as f64 * l)
        .sum();
    let cluster = env.cluster_size(x)? as f64;
    Ok(2.0 * params.lambda() * dot + params.beta() * cluster)
}

/// Where the tail rate in a prediction came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiSource {
    Exact1d,
    Supplied,
}

impl XiSource {
    pub fn label(self) -> &'static str {
        match self {
            XiSource::Exact1d => "exact",
            XiSource::Supplied => "supplied",
        }
    }
}

/// All closed-form predictions for one parameter point, as consumed by the
/// theory command and the acceptance suite.
#[derive(Clone, Debug)]
pub struct TheoryPrediction {
    pub drift: Vec<f64>,
    pub xi: f64,
    pub xi_source: XiSource,
    pub mgf: f64,
    pub speed: Vec<f64>,
    pub escape: EscapeExponent,
    pub diffusion: Option<Vec<Vec<f64>>>,
    /// Set when beta sits at the tail rate within rounding: the speed there
    /// depends on whether E[exp(xi C_0)] is finite, which the theory leaves
    /// open for d >= 2.
    pub tail_boundary: bool,
}

/// Assemble a prediction from an explicitly supplied tail rate and MGF value
/// (the only option above d = 1, where no closed forms exist).
pub fn predict(params: &Params, xi: f64, xi_source: XiSource, mgf: f64) -> TheoryPrediction {
    TheoryPrediction {
        drift: drift_vector(params.lambda(), params.ell()),
        xi,
        xi_source,
        mgf,
        speed: speed(params, mgf),
        escape: escape_exponent(params, xi),
        diffusion: diffusion_matrix(params, mgf),
        tail_boundary: (params.beta() - xi).abs() <= 1e-9 * xi,
    }
}

/// Prediction for d = 1 from the exact cluster law alone.
pub fn predict_1d(params: &Params) -> TheoryPrediction {
    debug_assert_eq!(params.d(), 1);
    let xi = xi_exact_1d(params.p());
    let mgf = mgf_1d(params.p(), params.beta());
    predict(params, xi, XiSource::Exact1d, mgf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{jump_rate, log_jump_rate};
    use crate::env::sample_cluster_sizes;
    use crate::lattice::Direction;

    fn params(d: usize, p: f64, lambda: f64, ell: Vec<f64>, beta: f64, seed: u64) -> Params {
        Params::new(d, p, lambda, ell, beta, seed).unwrap()
    }

    #[test]
    fn drift_vanishes_without_intensity() {
        assert_eq!(drift_vector(0.0, &[1.0]), vec![0.0]);
        assert_eq!(drift_vector(0.0, &[0.6, 0.8]), vec![0.0, 0.0]);
    }

    #[test]
    fn drift_matches_direct_evaluation() {
        let d1 = drift_vector(1.0, &[1.0]);
        assert!((d1[0] - 1.0f64.tanh()).abs() < 1e-15);
        assert!((d1[0] - 0.7615941559557649).abs() < 1e-15);
        let d2 = drift_vector(1.0, &[1.0, 0.0]);
        assert!((d2[0] - 0.46211715726000974).abs() < 1e-15);
        assert_eq!(d2[1], 0.0);
    }

    #[test]
    fn drift_projection_grows_with_intensity() {
        for ell in [vec![1.0], vec![0.6, 0.8], vec![0.0, 1.0, 0.0]] {
            let mut prev = -1.0;
            let mut lambda = 0.0;
            while lambda <= 5.0 {
                let d = drift_vector(lambda, &ell);
                let proj: f64 = d.iter().zip(&ell).map(|(a, b)| a * b).sum();
                assert!(proj >= 0.0);
                if lambda > 0.0 {
                    assert!(proj > prev, "projection must increase at lambda={lambda}");
                }
                prev = proj;
                lambda += 0.25;
            }
        }
    }

    #[test]
    fn xi_is_minus_log_p() {
        assert!((xi_exact_1d(0.3) - 1.2039728043259361).abs() < 1e-15);
        assert!((xi_exact_1d((-1.0f64).exp()) - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let p = k as f64 / 100.0;
            let xi = xi_exact_1d(p);
            assert!(xi > 0.0);
            assert!(xi < prev, "xi must decrease toward 0 as p -> 1");
            prev = xi;
        }
    }

    #[test]
    fn cluster_law_is_a_probability_law() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            let total: f64 = (0..400).map(|n| cluster_pmf_1d(p, n)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for n in 1..12 {
                let tail_from_pmf: f64 = (n..400).map(|k| cluster_pmf_1d(p, k)).sum();
                assert!((tail_from_pmf - cluster_tail_1d(p, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mgf_closed_form_matches_truncated_series() {
        // Series oracle: sum_{n<=N} e^{beta n} n p^n (1-p)^2 + (1-p) with the
        // cutoff chosen so the geometric tail is below 1e-12.
        for p in [0.1, 0.3, 0.5] {
            let xi = xi_exact_1d(p);
            for frac in [0.0, 0.2, 0.5, 0.8, 0.95] {
                let beta = frac * xi;
                let series: f64 = (1..600)
                    .map(|n| (beta * n as f64).exp() * cluster_pmf_1d(p, n))
                    .sum::<f64>()
                    + (1.0 - p);
                let closed = mgf_1d(p, beta);
                assert!(
                    (series - closed).abs() < 1e-10,
                    "p={p} beta={beta}: {series} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn mgf_reference_values() {
        assert_eq!(mgf_1d(0.3, 0.0), 1.0);
        assert_eq!(mgf_1d(0.7, 0.0), 1.0);
        assert!((mgf_1d(0.3, 0.5) - 1.6489039489872086).abs() < 1e-12);
        // q = 1 exactly at beta = xi.
        assert!(mgf_1d(0.3, xi_exact_1d(0.3)).is_infinite());
        assert!(mgf_1d(0.3, 2.0).is_infinite());
    }

    #[test]
    fn mgf_finite_iff_below_the_tail_rate() {
        for p in [0.2, 0.3, 0.6] {
            let xi = xi_exact_1d(p);
            assert!(mgf_1d(p, 0.999 * xi).is_finite());
            assert!(mgf_1d(p, xi).is_infinite());
            assert!(mgf_1d(p, 1.001 * xi).is_infinite());
        }
    }

    #[test]
    fn monte_carlo_mgf_is_exact_at_beta_zero() {
        let est = mgf_monte_carlo(&[0, 3, 1, 7, 2], 0.0);
        assert_eq!(est.estimate, 1.0);
        assert_eq!(est.stderr, 0.0);
        assert!(est.reliable);
    }

    #[test]
    fn monte_carlo_mgf_matches_the_closed_form() {
        let params = params(1, 0.3, 0.0, vec![1.0], 0.0, 20_260_810);
        let samples = sample_cluster_sizes(&params, 1_000_000).unwrap();
        let est = mgf_monte_carlo(&samples, 0.5);
        let closed = mgf_1d(0.3, 0.5);
        assert!(
            (est.estimate - closed).abs() < 3.0 * est.stderr,
            "estimate {} +- {} vs {}",
            est.estimate,
            est.stderr,
            closed
        );
        assert!(est.reliable);
    }

    #[test]
    fn monte_carlo_mgf_in_two_dimensions_is_finite_and_reliable() {
        let params = params(2, 0.2, 0.0, vec![1.0, 0.0], 0.0, 4711);
        let samples = sample_cluster_sizes(&params, 100_000).unwrap();
        let est = mgf_monte_carlo(&samples, 0.1);
        assert!(est.estimate.is_finite());
        assert!(est.estimate > 1.0);
        assert!(est.reliable);
        assert!(est.stderr < 0.01 * est.estimate);
    }

    #[test]
    fn unreliable_flag_trips_on_dominated_means() {
        // One enormous trap carries essentially all of the mass.
        let mut samples = vec![0u64; 999];
        samples.push(200);
        let est = mgf_monte_carlo(&samples, 1.0);
        assert!(!est.reliable);
    }

    #[test]
    fn speed_reduces_to_drift_and_vanishes_past_the_tail_rate() {
        let pr = params(1, 0.3, 1.0, vec![1.0], 0.0, 1);
        assert_eq!(speed(&pr, 1.0), drift_vector(1.0, &[1.0]));
        let pr = params(1, 0.3, 1.0, vec![1.0], 3.0, 1);
        assert_eq!(speed(&pr, f64::INFINITY), vec![0.0]);
        let pr = params(1, 0.3, 1.0, vec![1.0], 0.5, 1);
        let v = speed(&pr, mgf_1d(0.3, 0.5));
        assert!((v[0] - 0.46187902965697425).abs() < 1e-12);
    }

    #[test]
    fn speed_direction_characterizes_ballisticity() {
        // v . ell > 0 iff beta < xi and lambda != 0; v = 0 if beta > xi or
        // lambda = 0.
        let xi = xi_exact_1d(0.3);
        for (lambda, beta_frac, positive) in [
            (1.0, 0.5, true),
            (0.2, 0.9, true),
            (1.0, 1.5, false),
            (0.0, 0.5, false),
            (0.0, 1.5, false),
        ] {
            let beta = beta_frac * xi;
            let pr = params(1, 0.3, lambda, vec![1.0], beta, 1);
            let v = speed(&pr, mgf_1d(0.3, beta));
            assert_eq!(v[0] > 0.0, positive, "lambda={lambda} beta={beta}");
        }
    }

    #[test]
    fn escape_exponent_regime_table() {
        let xi = 1.2;
        let e = escape_exponent(&params(1, 0.3, 1.0, vec![1.0], 0.5, 1), xi);
        assert_eq!(e.regime, Regime::Ballistic);
        assert_eq!(e.exponent, 1.0);
        assert_eq!(e.kind, LimitKind::Limit);

        let e = escape_exponent(&params(1, 0.3, 1.0, vec![1.0], 2.4, 1), xi);
        assert_eq!(e.regime, Regime::SubballisticDrift);
        assert!((e.exponent - 0.5).abs() < 1e-15);
        assert_eq!(e.kind, LimitKind::Limit);

        let e = escape_exponent(&params(2, 0.3, 0.0, vec![1.0, 0.0], 2.4, 1), xi);
        assert_eq!(e.regime, Regime::SubdiffusiveIsotropicDGe2);
        assert!((e.exponent - 0.25).abs() < 1e-15);
        assert_eq!(e.kind, LimitKind::Limsup);

        let e = escape_exponent(&params(1, 0.3, 0.0, vec![1.0], 1.2, 1), xi);
        assert_eq!(e.regime, Regime::SubdiffusiveIsotropicD1);
        assert!((e.exponent - 0.5).abs() < 1e-15, "continuous at beta = xi");

        let e = escape_exponent(&params(1, 0.3, 0.0, vec![1.0], 0.5, 1), xi);
        assert_eq!(e.regime, Regime::Diffusive);
        assert_eq!(e.exponent, 0.5);
        assert_eq!(e.kind, LimitKind::Limsup);
    }

    #[test]
    fn escape_exponent_is_non_increasing_in_beta() {
        let xi = 1.2039728043259361;
        for (d, lambda, ell) in [
            (1, 1.0, vec![1.0]),
            (1, 0.0, vec![1.0]),
            (3, 0.0, vec![0.0, 0.0, 1.0]),
        ] {
            let mut prev = f64::INFINITY;
            let mut beta = 0.0;
            while beta <= 4.0 * xi {
                let e = escape_exponent(&params(d, 0.3, lambda, ell.clone(), beta, 1), xi);
                assert!(
                    e.exponent <= prev + 1e-15,
                    "d={d} lambda={lambda} beta={beta}: {} after {prev}",
                    e.exponent
                );
                assert!((0.0..=1.0).contains(&e.exponent));
                prev = e.exponent;
                beta += xi / 8.0;
            }
        }
    }

    #[test]
    fn diffusion_matrix_is_scaled_identity_or_absent() {
        let pr = params(2, 0.3, 0.0, vec![1.0, 0.0], 0.0, 1);
        let m = diffusion_matrix(&pr, 1.0).unwrap();
        assert_eq!(m, vec![vec![0.5, 0.0], vec![0.0, 0.5]]);

        let pr = params(1, 0.3, 0.0, vec![1.0], 0.5, 1);
        let m = diffusion_matrix(&pr, mgf_1d(0.3, 0.5)).unwrap();
        assert!((m[0][0] - 0.6064634635717993).abs() < 1e-12);

        let pr = params(1, 0.3, 1.0, vec![1.0], 0.5, 1);
        assert!(diffusion_matrix(&pr, 1.2).is_none());
        let pr = params(1, 0.3, 0.0, vec![1.0], 2.0, 1);
        assert!(diffusion_matrix(&pr, f64::INFINITY).is_none());
    }

    #[test]
    fn mu_weight_special_cases() {
        // A closed origin has log mu = 0 for any lambda (x = 0 kills the
        // drift term, C = 0 kills the cluster term).
        let pr = params(1, 0.3, 1.5, vec![1.0], 0.8, 31);
        let closed_seed = (0..500u64)
            .find(|&s| {
                let e = Environment::new(pr.reseeded(s));
                !e.is_open(&Site::origin(1))
            })
            .unwrap();
        let pr_closed = pr.reseeded(closed_seed);
        let env_closed = Environment::new(pr_closed.clone());
        assert_eq!(
            mu_weight_log(&env_closed, &pr_closed, &Site::origin(1)).unwrap(),
            0.0
        );
        // lambda = 0: log mu = beta C_x.
        let pr0 = params(1, 0.3, 0.0, vec![1.0], 0.8, 31);
        let env0 = Environment::new(pr0.clone());
        for a in -20..20 {
            let x = Site::from_coords(&[a]);
            let c = env0.cluster_size(&x).unwrap() as f64;
            assert_eq!(mu_weight_log(&env0, &pr0, &x).unwrap(), 0.8 * c);
        }
    }

    #[test]
    fn detailed_balance_holds_at_sampled_edges() {
        // mu(x) rate(x -> y) = mu(y) rate(y -> x), as an identity in log space.
        use crate::rng::{mix64, prf};
        let mut worst = 0.0f64;
        for trial in 0..200u64 {
            let d = 1 + (prf(9, trial) % 3) as usize;
            let lambda = (prf(11, trial) % 1000) as f64 / 500.0;
            let beta = (prf(13, trial) % 1000) as f64 / 500.0;
            let p = match d {
                1 => 0.3,
                2 => 0.25,
                _ => 0.15,
            };
            let mut ell = vec![0.0; d];
            ell[trial as usize % d] = 1.0;
            let pr = params(d, p, lambda, ell, beta, mix64(trial));
            let env = Environment::new(pr.clone());
            for edge in 0..50u64 {
                let coords: Vec<i32> = (0..d)
                    .map(|k| ((prf(trial, edge * 8 + k as u64) % 401) as i32) - 200)
                    .collect();
                let x = Site::from_coords(&coords);
                let dir = Direction((prf(trial ^ 1, edge) % (2 * d as u64)) as u8);
                let y = x.neighbor(dir).unwrap();
                let back = Direction(dir.index() as u8 ^ 1);
                let lhs = mu_weight_log(&env, &pr, &x).unwrap()
                    + log_jump_rate(&env, &pr, &x, dir).unwrap();
                let rhs = mu_weight_log(&env, &pr, &y).unwrap()
                    + log_jump_rate(&env, &pr, &y, back).unwrap();
                worst = worst.max((lhs - rhs).abs());
            }
        }
        assert!(worst < 1e-12, "worst detailed-balance violation {worst}");
        // The plain-rate form agrees wherever rates stay well scaled.
        let pr = params(1, 0.3, 0.5, vec![1.0], 0.4, 77);
        let env = Environment::new(pr.clone());
        let x = Site::from_coords(&[3]);
        let y = x.neighbor(Direction(0)).unwrap();
        let lhs = mu_weight_log(&env, &pr, &x).unwrap().exp()
            * jump_rate(&env, &pr, &x, Direction(0)).unwrap();
        let rhs = mu_weight_log(&env, &pr, &y).unwrap().exp()
            * jump_rate(&env, &pr, &y, Direction(1)).unwrap();
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn predictions_assemble_consistently() {
        let pr = params(1, 0.3, 1.0, vec![1.0], 0.5, 1);
        let t = predict_1d(&pr);
        assert_eq!(t.xi_source, XiSource::Exact1d);
        assert!((t.speed[0] - 0.46187902965697425).abs() < 1e-12);
        assert_eq!(t.escape.regime, Regime::Ballistic);
        assert!(t.diffusion.is_none());
        assert!(!t.tail_boundary);

        let at_boundary = params(1, 0.3, 1.0, vec![1.0], xi_exact_1d(0.3), 1);
        let t = predict_1d(&at_boundary);
        assert!(t.tail_boundary);
        assert_eq!(t.speed, vec![0.0]);
        assert_eq!(t.escape.regime, Regime::SubballisticDrift);

        let supplied = params(2, 0.2, 0.0, vec![1.0, 0.0], 0.1, 1);
        let t = predict(&supplied, 0.9, XiSource::Supplied, 1.1);
        assert_eq!(t.xi_source, XiSource::Supplied);
        assert_eq!(t.escape.regime, Regime::Diffusive);
        assert!(t.diffusion.is_some());
    }
}
