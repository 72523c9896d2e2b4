//! Distributions on `[0, 1]` for item values and for the highest rival bid.
//!
//! Every family exposes a right-continuous CDF, a generalized inverse
//! `inf { x : F(x) >= q }`, an inverse-transform sampler and, for the
//! continuous families, a density.

mod beta;
mod parse;

use rand::Rng;
use thiserror::Error;

pub use parse::parse_dist_spec;

/// Absolute tolerance accepted on masses / mixture weights summing to one.
const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error("distribution has no density (atomic family)")]
    NoDensity,
    #[error("empirical CDF needs at least one observation")]
    EmptyObservations,
    #[error("log-concavity grid needs at least 16 points, got {0}")]
    GridTooSmall(usize),
    #[error("cannot parse distribution spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
    #[error("{path}:{line}: {reason}")]
    File {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A distribution supported on `[0, 1]`.
///
/// Build through the checked constructors ([`DistModel::beta`],
/// [`DistModel::mixture`], ...) to get the support/mass invariants enforced.
#[derive(Debug, Clone, PartialEq)]
pub enum DistModel {
    Uniform,
    Beta {
        alpha: f64,
        beta: f64,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<DistModel>,
    },
    /// Exponential with the given rate, conditioned on `[0, 1]`.
    TruncatedExponential {
        rate: f64,
    },
    /// Finite support (ascending) with positive masses.
    DiscreteAtoms {
        support: Vec<f64>,
        masses: Vec<f64>,
    },
    /// CDF interpolating `(x_i, F_i)` linearly; zero left of the first knot.
    PiecewiseLinearCdf {
        knots: Vec<(f64, f64)>,
    },
    /// Sorted sample; the CDF is the right-continuous empirical CDF.
    EmpiricalSamples {
        values: Vec<f64>,
    },
}

/// Sufficient condition that established log-concavity of `F` analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticRule {
    Uniform,
    /// Beta with `alpha + beta < alpha * beta`.
    BetaSumBelowProduct,
    /// Beta(alpha, 1) with `alpha > 1`: density `C x^(alpha-1)`.
    BetaPowerLeft,
    /// Beta(1, beta) with `beta > 1`: density `C (1-x)^(beta-1)`.
    BetaPowerRight,
    TruncatedExponential,
}

impl std::fmt::Display for AnalyticRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AnalyticRule::Uniform => "uniform",
            AnalyticRule::BetaSumBelowProduct => "beta:a+b<ab",
            AnalyticRule::BetaPowerLeft => "beta:Cx^(a-1)",
            AnalyticRule::BetaPowerRight => "beta:C(1-x)^(b-1)",
            AnalyticRule::TruncatedExponential => "texp",
        };
        f.write_str(s)
    }
}

/// Outcome of the numerical check that `f / F` is strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityVerdict {
    pub is_log_concave: bool,
    /// Largest increase of `ln(f/F)` between consecutive grid points (0 when
    /// strictly decreasing everywhere, `inf` when the density vanishes inside
    /// the support).
    pub max_violation: f64,
    pub grid_size: usize,
    pub analytic_rule_applied: Option<AnalyticRule>,
}

impl DistModel {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self, DistError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(DistError::Invalid(format!(
                "beta parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(DistModel::Beta { alpha, beta })
    }

    pub fn truncated_exponential(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DistError::Invalid(format!(
                "truncated exponential rate must be positive, got {rate}"
            )));
        }
        Ok(DistModel::TruncatedExponential { rate })
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<DistModel>) -> Result<Self, DistError> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(DistError::Invalid(
                "mixture needs one weight per component".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(DistError::Invalid("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DistError::Invalid(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(DistModel::Mixture {
            weights,
            components,
        })
    }

    /// Point masses; `support` need not be sorted, duplicates are merged.
    pub fn discrete(support: Vec<f64>, masses: Vec<f64>) -> Result<Self, DistError> {
        if support.is_empty() || support.len() != masses.len() {
            return Err(DistError::Invalid(
                "discrete distribution needs one mass per support point".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(masses).collect();
        for &(x, m) in &pairs {
            if !(0.0..=1.0).contains(&x) {
                return Err(DistError::Invalid(format!("atom {x} outside [0, 1]")));
            }
            if !(m > 0.0) {
                return Err(DistError::Invalid(format!("atom {x} has non-positive mass {m}")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut masses: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, m) in pairs {
            if support.last() == Some(&x) {
                *masses.last_mut().unwrap() += m;
            } else {
                support.push(x);
                masses.push(m);
            }
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(DistError::Invalid(format!(
                "discrete masses sum to {total}, expected 1"
            )));
        }
        Ok(DistModel::DiscreteAtoms { support, masses })
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self, DistError> {
        if knots.is_empty() {
            return Err(DistError::Invalid("piecewise-linear CDF needs knots".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(DistError::Invalid("knot abscissae must be strictly ascending".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(DistError::Invalid("knot CDF values must be nondecreasing".into()));
            }
        }
        let (x0, f0) = knots[0];
        let (xn, fn_) = knots[knots.len() - 1];
        if x0 < 0.0 || xn > 1.0 || f0 < 0.0 {
            return Err(DistError::Invalid("knots must lie in [0, 1] x [0, 1]".into()));
        }
        if (fn_ - 1.0).abs() > 1e-12 {
            return Err(DistError::Invalid(format!("final CDF value is {fn_}, expected 1")));
        }
        Ok(DistModel::PiecewiseLinearCdf { knots })
    }

    pub fn empirical(mut values: Vec<f64>) -> Result<Self, DistError> {
        if values.is_empty() {
            return Err(DistError::EmptyObservations);
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DistError::Invalid(format!("sample {bad} outside [0, 1]")));
        }
        values.sort_by(f64::total_cmp);
        Ok(DistModel::EmpiricalSamples { values })
    }

    /// Bernoulli(p) as atoms on {0, 1}.
    pub fn bernoulli(p: f64) -> Result<Self, DistError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DistError::Invalid(format!("Bernoulli mean {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Self::discrete(vec![0.0], vec![1.0]);
        }
        if p == 1.0 {
            return Self::discrete(vec![1.0], vec![1.0]);
        }
        Self::discrete(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    /// True for families without a density (point masses somewhere).
    pub fn is_atomic(&self) -> bool {
        match self {
            DistModel::DiscreteAtoms { .. } | DistModel::EmpiricalSamples { .. } => true,
            DistModel::Mixture { components, .. } => components.iter().any(Self::is_atomic),
            DistModel::PiecewiseLinearCdf { knots } => knots[0].1 > 0.0,
            _ => false,
        }
    }

    /// P(M <= x), clamped to 0 below the support and 1 from x = 1 on.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let p = match self {
            DistModel::Uniform => x.max(0.0),
            DistModel::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else {
                    beta::cdf(*alpha, *beta, x)
                }
            }
            DistModel::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.cdf(x))
                .sum(),
            DistModel::TruncatedExponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-rate * x).exp_m1() / (-rate).exp_m1()
                }
            }
            DistModel::DiscreteAtoms { support, masses } => {
                let k = support.partition_point(|s| *s <= x);
                if k == support.len() {
                    1.0
                } else {
                    masses[..k].iter().sum()
                }
            }
            DistModel::PiecewiseLinearCdf { knots } => plinear_cdf(knots, x),
            DistModel::EmpiricalSamples { values } => {
                values.partition_point(|v| *v <= x) as f64 / values.len() as f64
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// Density `f = F'`; the right derivative at the kinks of a
    /// piecewise-linear CDF.
    pub fn pdf(&self, x: f64) -> Result<f64, DistError> {
        if self.is_atomic() {
            return Err(DistError::NoDensity);
        }
        if !(0.0..=1.0).contains(&x) {
            return Ok(0.0);
        }
        Ok(match self {
            DistModel::Uniform => 1.0,
            DistModel::Beta { alpha, beta } => beta::pdf(*alpha, *beta, x),
            DistModel::Mixture {
                weights,
                components,
            } => {
                let mut acc = 0.0;
                for (w, c) in weights.iter().zip(components) {
                    acc += w * c.pdf(x)?;
                }
                acc
            }
            DistModel::TruncatedExponential { rate } => {
                rate * (-rate * x).exp() / -(-rate).exp_m1()
            }
            DistModel::PiecewiseLinearCdf { knots } => plinear_pdf(knots, x),
            DistModel::DiscreteAtoms { .. } | DistModel::EmpiricalSamples { .. } => {
                unreachable!("atomic families rejected above")
            }
        })
    }

    /// Generalized inverse `inf { x in [0, 1] : F(x) >= q }`.
    ///
    /// `q <= 0` maps to the lower end of the support. Families without a
    /// closed form are inverted by bisection down to float resolution
    /// (at most 60 halvings).
    pub fn inv_cdf(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        match self {
            DistModel::Uniform => q,
            DistModel::Beta { alpha, beta } => beta::inv_cdf(*alpha, *beta, q),
            DistModel::TruncatedExponential { rate } => {
                // F(x) = (1 - e^{-rx}) / (1 - e^{-r})
                let x = -(q * (-rate).exp_m1()).ln_1p() / rate;
                x.clamp(0.0, 1.0)
            }
            DistModel::DiscreteAtoms { support, masses } => {
                let mut cum = 0.0;
                for (x, m) in support.iter().zip(masses) {
                    cum += m;
                    if cum >= q - 1e-12 {
                        return *x;
                    }
                }
                *support.last().unwrap()
            }
            DistModel::EmpiricalSamples { values } => {
                let n = values.len();
                let k = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
                values[k.min(n) - 1]
            }
            DistModel::PiecewiseLinearCdf { knots } => plinear_inv(knots, q),
            DistModel::Mixture { .. } => {
                if q <= 0.0 {
                    return self.support_min();
                }
                bisect_quantile(|x| self.cdf(x), q)
            }
        }
    }

    /// One draw by inverse transform. Mixtures consume exactly two uniforms
    /// (component, then quantile); every other family consumes one.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistModel::Mixture {
                weights,
                components,
            } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let u2: f64 = rng.random();
                components[pick].inv_cdf(u2)
            }
            _ => {
                let u: f64 = rng.random();
                self.inv_cdf(u)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistModel::Uniform => 0.5,
            DistModel::Beta { alpha, beta } => alpha / (alpha + beta),
            DistModel::Mixture {
                weights,
                components,
            } => weights.iter().zip(components).map(|(w, c)| w * c.mean()).sum(),
            DistModel::TruncatedExponential { rate } => {
                1.0 / rate - (-rate).exp() / -(-rate).exp_m1()
            }
            DistModel::DiscreteAtoms { support, masses } => {
                support.iter().zip(masses).map(|(x, m)| x * m).sum()
            }
            DistModel::EmpiricalSamples { values } => {
                values.iter().sum::<f64>() / values.len() as f64
            }
            DistModel::PiecewiseLinearCdf { knots } => {
                // E[M] = integral of 1 - F over [0, 1]
                let mut acc = knots[0].0;
                for w in knots.windows(2) {
                    let ((x0, f0), (x1, f1)) = (w[0], w[1]);
                    acc += (x1 - x0) * (1.0 - 0.5 * (f0 + f1));
                }
                acc
            }
        }
    }

    fn support_min(&self) -> f64 {
        match self {
            DistModel::DiscreteAtoms { support, .. } => support[0],
            DistModel::EmpiricalSamples { values } => values[0],
            DistModel::PiecewiseLinearCdf { knots } => knots[0].0,
            DistModel::Mixture { components, .. } => components
                .iter()
                .map(Self::support_min)
                .fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    /// Points where the CDF jumps or changes slope: atoms of discrete and
    /// empirical families, knots of piecewise-linear CDFs. Sorted, deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match self {
            DistModel::DiscreteAtoms { support, .. } => support.clone(),
            DistModel::EmpiricalSamples { values } => values.clone(),
            DistModel::PiecewiseLinearCdf { knots } => knots.iter().map(|k| k.0).collect(),
            DistModel::Mixture { components, .. } => {
                components.iter().flat_map(Self::breakpoints).collect()
            }
            _ => Vec::new(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn analytic_log_concavity_rule(&self) -> Option<AnalyticRule> {
        match *self {
            DistModel::Uniform => Some(AnalyticRule::Uniform),
            DistModel::TruncatedExponential { .. } => Some(AnalyticRule::TruncatedExponential),
            DistModel::Beta { alpha, beta } => {
                if alpha == 1.0 && beta == 1.0 {
                    Some(AnalyticRule::Uniform)
                } else if alpha == 1.0 && beta > 1.0 {
                    Some(AnalyticRule::BetaPowerRight)
                } else if beta == 1.0 && alpha > 1.0 {
                    Some(AnalyticRule::BetaPowerLeft)
                } else if alpha + beta < alpha * beta {
                    Some(AnalyticRule::BetaSumBelowProduct)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

fn plinear_cdf(knots: &[(f64, f64)], x: f64) -> f64 {
    let k = knots.partition_point(|(kx, _)| *kx <= x);
    if k == 0 {
        return 0.0;
    }
    if k == knots.len() {
        return knots[k - 1].1;
    }
    let (x0, f0) = knots[k - 1];
    let (x1, f1) = knots[k];
    f0 + (f1 - f0) * (x - x0) / (x1 - x0)
}

fn plinear_pdf(knots: &[(f64, f64)], x: f64) -> f64 {
    let n = knots.len();
    let mut k = knots.partition_point(|(kx, _)| *kx <= x);
    // x on the last knot: use the slope of the last segment
    if k == n && n >= 2 && x == knots[n - 1].0 {
        k = n - 1;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    let (x0, f0) = knots[k - 1];
    let (x1, f1) = knots[k];
    (f1 - f0) / (x1 - x0)
}

fn plinear_inv(knots: &[(f64, f64)], q: f64) -> f64 {
    if q <= knots[0].1 {
        return knots[0].0;
    }
    let i = knots.partition_point(|(_, f)| *f < q);
    if i >= knots.len() {
        return knots[knots.len() - 1].0;
    }
    let (x0, f0) = knots[i - 1];
    let (x1, f1) = knots[i];
    x0 + (q - f0) * (x1 - x0) / (f1 - f0)
}

/// Smallest `x` in `[0, 1]` with `cdf(x) >= q`, for a nondecreasing `cdf`.
pub(crate) fn bisect_quantile(cdf: impl Fn(f64) -> f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if cdf(lo) >= q {
        return lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Right-continuous empirical CDF `#{obs <= b} / n` of an ascending sample.
pub fn empirical_cdf(sorted_obs: &[f64], b: f64) -> Result<f64, DistError> {
    if sorted_obs.is_empty() {
        return Err(DistError::EmptyObservations);
    }
    Ok(sorted_obs.partition_point(|m| *m <= b) as f64 / sorted_obs.len() as f64)
}

/// Number of grid points placed geometrically inside each boundary 1 %.
const EDGE_POINTS: usize = 100;
const STRICT_DECREASE_TOL: f64 = 1e-12;

/// Checks numerically that `f / F` is strictly decreasing on the interior of
/// the support (log-concavity of `F`).
///
/// The grid is `grid_n` equispaced points on `[0.01, 0.99]` plus
/// [`EDGE_POINTS`] geometrically spaced points in each of `(0, 0.01)` and
/// `(0.99, 1)`, where `f/F` varies fastest. The comparison runs on
/// `ln f - ln F` so that tails with tiny densities stay resolvable.
pub fn check_log_concavity(model: &DistModel, grid_n: usize) -> Result<RegularityVerdict, DistError> {
    if grid_n < 16 {
        return Err(DistError::GridTooSmall(grid_n));
    }
    if model.is_atomic() {
        return Err(DistError::NoDensity);
    }
    let grid = log_concavity_grid(grid_n);
    let mut prev: Option<f64> = None;
    let mut max_violation = 0.0_f64;
    let mut strictly_decreasing = true;
    for &x in &grid {
        let big_f = model.cdf(x);
        if !(big_f > 0.0 && big_f < 1.0) {
            continue;
        }
        let f = model.pdf(x)?;
        if !(f > 0.0) {
            // flat stretch strictly inside the support
            strictly_decreasing = false;
            max_violation = f64::INFINITY;
            prev = None;
            continue;
        }
        let h = f.ln() - big_f.ln();
        if let Some(p) = prev {
            let diff = h - p;
            if !(diff < -STRICT_DECREASE_TOL) {
                strictly_decreasing = false;
            }
            max_violation = max_violation.max(diff);
        }
        prev = Some(h);
    }
    Ok(RegularityVerdict {
        is_log_concave: strictly_decreasing,
        max_violation,
        grid_size: grid.len(),
        analytic_rule_applied: model.analytic_log_concavity_rule(),
    })
}

fn log_concavity_grid(grid_n: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity(grid_n + 2 * EDGE_POINTS);
    // (1e-6, 0.01) geometric
    let lo_exp = -6.0_f64;
    let hi_exp = -2.0_f64;
    for k in 0..EDGE_POINTS {
        let e = lo_exp + (hi_exp - lo_exp) * k as f64 / EDGE_POINTS as f64;
        grid.push(10f64.powf(e));
    }
    for i in 0..grid_n {
        grid.push(0.01 + 0.98 * i as f64 / (grid_n - 1) as f64);
    }
    for k in (0..EDGE_POINTS).rev() {
        let e = lo_exp + (hi_exp - lo_exp) * k as f64 / EDGE_POINTS as f64;
        grid.push(1.0 - 10f64.powf(e));
    }
    grid
}
