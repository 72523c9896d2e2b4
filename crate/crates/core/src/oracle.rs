//! Exact first-price utility and optimal-bid oracles.
//!
//! With value mean `v` and rival max-bid CDF `F`, bidding `b` earns
//! `U(b) = (v - b) F(b)` per round in expectation. The oracle returns the
//! largest maximizer of `U` on `[0, 1]`, which defines ground truth for the
//! pseudo-regret accounting in [`crate::simulator`].

use thiserror::Error;

use crate::distributions::{DistError, DistModel};

/// A bid in `[0, 1]`.
pub type Bid = f64;

/// Grid size used when the oracle defines ground-truth regret.
pub const DEFAULT_ORACLE_GRID: usize = 100_000;
/// Relative tie tolerance: values within `tol * max(1, |u*|)` of the best are tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;
/// `F(b*)` below this is treated as zero.
pub const HOPELESS_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("hopeless instance: F(b*) = {q_star} at b* = {b_star}; rivals always outbid the value")]
    HopelessInstance { b_star: f64, q_star: f64 },
    #[error("quantile utility needs a continuous increasing CDF")]
    NotInvertible,
    #[error("density vanishes at b = {0}")]
    ZeroDensity(f64),
    #[error("density vanishes inside the window around b*")]
    ZeroDensityInWindow,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("lower-bound construction needs T > 16, got {0}")]
    InvalidHorizon(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// The (largest) optimal bid with its win probability and utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalBid {
    pub b_star: Bid,
    pub q_star: f64,
    pub u_star: f64,
}

/// Local regularity constants around `b*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    /// Minimum of the density over the window.
    pub c_f: f64,
    /// Maximum of the density over the window.
    pub big_c_f: f64,
    /// Largest finite-difference slope of `phi` on `[b*, b* + delta]`.
    pub lambda: f64,
    pub delta: f64,
    /// `v / (v - b*)`.
    pub alpha: f64,
    pub window: (f64, f64),
}

/// `U_{v,F}(b) = (v - b) F(b)`; negative when `b > v`.
pub fn utility(v: f64, dist: &DistModel, b: Bid) -> f64 {
    (v - b) * dist.cdf(b)
}

/// `W(q) = U(F^{-1}(q))`, the utility as a function of the win probability.
pub fn quantile_utility(v: f64, dist: &DistModel, q: f64) -> Result<f64, OracleError> {
    if dist.is_atomic() {
        return Err(OracleError::NotInvertible);
    }
    Ok(utility(v, dist, dist.inv_cdf(q)))
}

/// Bids with their precomputed CDF values: an equispaced grid on `[0, 1]`
/// merged with the breakpoints (atoms, knots) of the distribution.
///
/// Reused across many `v` when scanning (strategies, lemma checks).
#[derive(Debug, Clone)]
pub struct UtilityGrid {
    bids: Vec<f64>,
    cdf: Vec<f64>,
    continuous: bool,
}

impl UtilityGrid {
    pub fn new(dist: &DistModel, grid_n: usize) -> Self {
        let n = grid_n.max(1);
        let mut bids: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let bp = dist.breakpoints();
        if !bp.is_empty() {
            bids.extend(bp.into_iter().filter(|b| (0.0..=1.0).contains(b)));
            bids.sort_by(f64::total_cmp);
            bids.dedup();
        }
        let cdf = bids.iter().map(|&b| dist.cdf(b)).collect();
        UtilityGrid {
            bids,
            cdf,
            continuous: !dist.is_atomic(),
        }
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Index and value of the largest grid maximizer of `(v - b) F(b)`.
    pub fn argmax(&self, v: f64, tol: f64) -> (usize, f64) {
        let mut best = f64::NEG_INFINITY;
        for (b, f) in self.bids.iter().zip(&self.cdf) {
            let u = (v - b) * f;
            if u > best {
                best = u;
            }
        }
        let thr = best - tol * best.abs().max(1.0);
        let idx = (0..self.bids.len())
            .rev()
            .find(|&i| (v - self.bids[i]) * self.cdf[i] >= thr)
            .unwrap_or(0);
        (idx, best)
    }

    /// Largest maximizer, refined by golden-section search on the
    /// neighbouring cells when the CDF is continuous.
    pub fn optimal_bid(&self, v: f64, dist: &DistModel, tol: f64) -> Result<OptimalBid, OracleError> {
        let (idx, u_grid) = self.argmax(v, tol);
        let mut b_star = self.bids[idx];
        let mut u_star = u_grid;
        if self.continuous {
            let lo = self.bids[idx.saturating_sub(1)];
            let hi = self.bids[(idx + 1).min(self.bids.len() - 1)];
            let refined = golden_section_max(|b| utility(v, dist, b), lo, hi);
            let u_ref = utility(v, dist, refined);
            if u_ref > u_star {
                b_star = refined;
                u_star = u_ref;
            }
        }
        let q_star = dist.cdf(b_star);
        if q_star < HOPELESS_THRESHOLD {
            return Err(OracleError::HopelessInstance { b_star, q_star });
        }
        Ok(OptimalBid {
            b_star,
            q_star,
            u_star,
        })
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-13 {
            break;
        }
        // `>=` keeps the right part on ties, matching the largest-maximizer rule
        if f2 >= f1 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Largest maximizer of `U_{v,F}` on `[0, 1]`: grid scan over `grid_n + 1`
/// equispaced bids plus the atoms of `F`, then golden-section refinement.
pub fn optimal_bid(v: f64, dist: &DistModel, grid_n: usize, tol: f64) -> Result<OptimalBid, OracleError> {
    if grid_n < 1000 {
        return Err(OracleError::InvalidArgument(format!(
            "oracle grid needs at least 1000 cells, got {grid_n}"
        )));
    }
    UtilityGrid::new(dist, grid_n).optimal_bid(v, dist, tol)
}

/// `phi_F(b) = b + F(b) / f(b)`.
pub fn phi(dist: &DistModel, b: Bid) -> Result<f64, OracleError> {
    let f = dist.pdf(b)?;
    if !(f > 0.0) {
        return Err(OracleError::ZeroDensity(b));
    }
    Ok(b + dist.cdf(b) / f)
}

fn phi_or_inf(dist: &DistModel, b: f64) -> Result<f64, OracleError> {
    match phi(dist, b) {
        Ok(p) => Ok(p),
        Err(OracleError::ZeroDensity(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `psi_F(v)`: the optimal bid as the solution of `phi_F(b) = v`, by bisection.
///
/// Requires `phi_F` increasing (log-concave `F`); a probe over 200 points
/// reports `AssumptionViolated` otherwise.
pub fn psi(dist: &DistModel, v: f64) -> Result<Bid, OracleError> {
    if dist.is_atomic() {
        return Err(OracleError::AssumptionViolated("F has atoms".into()));
    }
    const PROBES: usize = 200;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..PROBES {
        let b = (i as f64 + 0.5) / PROBES as f64;
        let p = phi_or_inf(dist, b)?;
        if p.is_finite() && p < prev {
            return Err(OracleError::AssumptionViolated(format!(
                "phi_F decreases near b = {b:.4}"
            )));
        }
        prev = prev.max(p);
    }
    if phi_or_inf(dist, 0.0)? >= v {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if phi_or_inf(dist, hi)? <= v {
        return Ok(hi);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi_or_inf(dist, mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Density bounds and the `phi` slope bound on a window of half-width `delta`
/// around `b*`.
pub fn regularity_constants(
    v: f64,
    dist: &DistModel,
    delta: f64,
    grid_n: usize,
) -> Result<RegularityReport, OracleError> {
    if !(delta > 0.0) || grid_n == 0 {
        return Err(OracleError::InvalidArgument("need delta > 0 and grid_n >= 1".into()));
    }
    if dist.is_atomic() {
        return Err(OracleError::Dist(DistError::NoDensity));
    }
    let opt = optimal_bid(v, dist, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL)?;
    let b = opt.b_star;
    let window = ((b - delta).max(0.0), (b + delta).min(1.0));
    let mut c_f = f64::INFINITY;
    let mut big_c_f = 0.0_f64;
    for i in 0..=grid_n {
        let x = window.0 + (window.1 - window.0) * i as f64 / grid_n as f64;
        let f = dist.pdf(x)?;
        c_f = c_f.min(f);
        big_c_f = big_c_f.max(f);
    }
    if !(c_f > 0.0) {
        return Err(OracleError::ZeroDensityInWindow);
    }
    let h = delta / grid_n as f64;
    let right = window.1;
    let mut lambda = f64::NEG_INFINITY;
    for i in 0..=grid_n {
        let x = b + (right - b) * i as f64 / grid_n as f64;
        let (xl, xr) = ((x - h).max(0.0), (x + h).min(1.0));
        if xr <= xl {
            continue;
        }
        let slope = (phi(dist, xr)? - phi(dist, xl)?) / (xr - xl);
        lambda = lambda.max(slope);
    }
    Ok(RegularityReport {
        c_f,
        big_c_f,
        lambda,
        delta,
        alpha: v / (v - b),
        window,
    })
}

/// Parameters of the continuous two-maximizer construction.
pub mod two_max {
    /// Item value.
    pub const V: f64 = 0.5;
    /// First slope change at `A1 * V`.
    pub const A1: f64 = 29.0 / 32.0;
    /// CDF flat from `A2 * V` ...
    pub const A2: f64 = 15.0 / 16.0;
    /// ... to `A3 * V`.
    pub const A3: f64 = 1.5;
    /// `F(A2 * V)`. The ratio `B2 / B1 = 128 / 29` equalizes the two peaks;
    /// `B2` is set to 1/2 so that it is a valid CDF value.
    pub const B2: f64 = 0.5;
    /// `F(A1 * V)`.
    pub const B1: f64 = B2 * 29.0 / 128.0;
}

/// Value and piecewise-linear CDF whose utility has two global maximizers,
/// at `v/2` and `a2 v`.
///
/// `F` is linear through `(0, 0)`, `(a1 v, b1)`, `(a2 v, b2)`, flat up to
/// `a3 v`, then linear to `(1, 1)`.
pub fn make_two_max_instance() -> (f64, DistModel) {
    use two_max::*;
    let knots = vec![
        (0.0, 0.0),
        (A1 * V, B1),
        (A2 * V, B2),
        (A3 * V, B2),
        (1.0, 1.0),
    ];
    (
        V,
        DistModel::piecewise_linear(knots).expect("two-maximizer knots are valid"),
    )
}

/// Hard pair of environments sharing one max-bid distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundInstance {
    pub v: f64,
    /// `v - delta_t`; flips the optimal bid from `2v/3` to `v/3`.
    pub v_prime: f64,
    pub delta_t: f64,
    /// Regret paid per round for bidding on the wrong side of `2v/3`.
    pub gap: f64,
    pub dist: DistModel,
}

/// Three-atom distribution on `{v/3, 2v/3, 1}` with `F(v/3) = A`,
/// `F(2v/3) = 2A + 3 gap / v`, `delta_t = sqrt(v (1 - v) / T)` and
/// `gap = A delta_t / (2 - 3 delta_t / v)`.
pub fn make_lower_bound_instance(horizon: usize, a: f64, v: f64) -> Result<LowerBoundInstance, OracleError> {
    if horizon <= 16 {
        return Err(OracleError::InvalidHorizon(horizon));
    }
    if !(v > 0.0 && v < 1.0) || !(a > 0.0) {
        return Err(OracleError::InvalidArgument(format!("need 0 < v < 1 and A > 0, got v = {v}, A = {a}")));
    }
    let delta_t = (v * (1.0 - v) / horizon as f64).sqrt();
    let gap = a * delta_t / (2.0 - 3.0 * delta_t / v);
    let f_mid = 2.0 * a + 3.0 * gap / v;
    if !(f_mid < 1.0) {
        return Err(OracleError::InvalidArgument(format!(
            "F(2v/3) = {f_mid} leaves no mass at 1"
        )));
    }
    let dist = DistModel::discrete(
        vec![v / 3.0, 2.0 * v / 3.0, 1.0],
        vec![a, f_mid - a, 1.0 - f_mid],
    )?;
    Ok(LowerBoundInstance {
        v,
        v_prime: v - delta_t,
        delta_t,
        gap,
        dist,
    })
}

/// The discrete max-bid distribution of the simulated discrete experiment:
/// mass 0.51 at 0.1 and 0.01 at each `i/50`, `i in {1..4, 6..50}`.
pub fn discrete_bid_instance() -> DistModel {
    let mut support = vec![0.1];
    let mut masses = vec![0.51];
    for i in (1..=50).filter(|i| *i != 5) {
        support.push(i as f64 / 50.0);
        masses.push(0.01);
    }
    DistModel::discrete(support, masses).expect("discrete instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta16() -> DistModel {
        DistModel::beta(1.0, 6.0).unwrap()
    }

    /// Root of phi(b) = b + (1-(1-b)^6) / (6 (1-b)^5) = v, by bisection on
    /// the closed form (independent of the grid oracle).
    fn beta16_root(v: f64) -> f64 {
        let phi = |b: f64| b + (1.0 - (1.0 - b).powi(6)) / (6.0 * (1.0 - b).powi(5));
        let (mut lo, mut hi) = (0.0, 0.99);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < v {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn utility_examples() {
        assert!((utility(0.5, &DistModel::Uniform, 0.25) - 0.0625).abs() < 1e-15);
        assert_eq!(utility(0.5, &beta16(), 0.5), 0.0);
        let expected = 0.4 * (1.0 - 0.9_f64.powi(6));
        assert!((utility(0.5, &beta16(), 0.1) - expected).abs() < 1e-15);
    }

    #[test]
    fn quantile_utility_examples() {
        assert!((quantile_utility(0.5, &DistModel::Uniform, 0.25).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(quantile_utility(0.5, &DistModel::Uniform, 0.0).unwrap(), 0.0);
        let b = 1.0 - 0.5_f64.powf(1.0 / 6.0);
        let expected = (0.5 - b) * 0.5;
        assert!((quantile_utility(0.5, &beta16(), 0.5).unwrap() - expected).abs() < 1e-12);
        assert!(matches!(
            quantile_utility(0.5, &discrete_bid_instance(), 0.5),
            Err(OracleError::NotInvertible)
        ));
    }

    #[test]
    fn optimal_bid_uniform() {
        let ob = optimal_bid(0.5, &DistModel::Uniform, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL).unwrap();
        assert!((ob.b_star - 0.25).abs() < 1e-9);
        assert!((ob.u_star - 0.0625).abs() < 1e-15);
        assert!((ob.q_star - 0.25).abs() < 1e-9);
    }

    #[test]
    fn optimal_bid_beta16_matches_closed_form_root_and_dense_scan() {
        let root = beta16_root(0.5);
        let ob = optimal_bid(0.5, &beta16(), DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL).unwrap();
        assert!((ob.b_star - root).abs() < 1e-7, "{} vs {root}", ob.b_star);
        // brute-force 10^6-point scan with the closed-form CDF
        let (mut best_b, mut best_u) = (0.0, f64::NEG_INFINITY);
        for i in 0..=1_000_000 {
            let b = i as f64 / 1e6;
            let u = (0.5 - b) * (1.0 - (1.0 - b).powi(6));
            if u >= best_u {
                best_u = u;
                best_b = b;
            }
        }
        assert!((ob.b_star - best_b).abs() < 2e-6);
        assert!(ob.u_star >= best_u - 1e-15);
        assert!((psi(&beta16(), 0.5).unwrap() - root).abs() < 1e-9);
    }

    #[test]
    fn optimal_bid_takes_largest_of_two_maximizers() {
        let (v, f) = make_two_max_instance();
        let ob = optimal_bid(v, &f, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL).unwrap();
        assert!((ob.b_star - 15.0 / 32.0).abs() < 1e-7, "{}", ob.b_star);
        assert!((ob.u_star - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn two_max_instance_geometry() {
        let (v, f) = make_two_max_instance();
        assert_eq!(v, 0.5);
        assert!((f.cdf(29.0 / 64.0) - two_max::B1).abs() < 1e-15);
        assert!((f.cdf(15.0 / 32.0) - two_max::B2).abs() < 1e-15);
        let u_left = utility(v, &f, v / 2.0);
        let u_right = utility(v, &f, two_max::A2 * v);
        assert!((u_left - u_right).abs() < 1e-9);
        // the interior stationary point of the middle piece lies right of a2 v
        let (a1, a2, b1, b2) = (two_max::A1, two_max::A2, two_max::B1, two_max::B2);
        assert!(a2 * v > v / 2.0);
        assert!(a2 * v <= (v + a1 * v) / 2.0 - (a2 * v - a1 * v) / (b2 - b1) * b1 / 2.0);
    }

    #[test]
    fn hopeless_when_all_atoms_exceed_value() {
        let f = DistModel::discrete(vec![0.4, 0.8], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            optimal_bid(0.3, &f, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL),
            Err(OracleError::HopelessInstance { .. })
        ));
    }

    #[test]
    fn phi_examples() {
        assert!((phi(&DistModel::Uniform, 0.3).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(phi(&DistModel::Uniform, 0.0).unwrap(), 0.0);
        let expected = 0.2 + (1.0 - 0.8_f64.powi(6)) / (6.0 * 0.8_f64.powi(5));
        assert!((phi(&beta16(), 0.2).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn psi_examples() {
        assert!((psi(&DistModel::Uniform, 0.5).unwrap() - 0.25).abs() < 1e-12);
        assert!((psi(&DistModel::Uniform, 1.0).unwrap() - 0.5).abs() < 1e-12);
        let ob = optimal_bid(0.5, &beta16(), DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL).unwrap();
        assert!((psi(&beta16(), 0.5).unwrap() - ob.b_star).abs() < 1e-7);
    }

    #[test]
    fn psi_rejects_non_log_concave() {
        let (_, f) = make_two_max_instance();
        assert!(matches!(psi(&f, 0.5), Err(OracleError::AssumptionViolated(_))));
    }

    #[test]
    fn regularity_uniform() {
        let r = regularity_constants(0.5, &DistModel::Uniform, 0.1, 1000).unwrap();
        assert!((r.c_f - 1.0).abs() < 1e-12 && (r.big_c_f - 1.0).abs() < 1e-12);
        assert!((r.lambda - 2.0).abs() < 1e-6);
        assert!((r.alpha - 2.0).abs() < 1e-7);
    }

    #[test]
    fn regularity_beta16_density_bounds_at_window_ends() {
        let delta = 0.05;
        let r = regularity_constants(0.5, &beta16(), delta, 1000).unwrap();
        let b = beta16_root(0.5);
        let lo = 6.0 * (1.0 - (b + delta)).powi(5);
        let hi = 6.0 * (1.0 - (b - delta)).powi(5);
        assert!((r.c_f - lo).abs() < 1e-6, "{} vs {lo}", r.c_f);
        assert!((r.big_c_f - hi).abs() < 1e-6, "{} vs {hi}", r.big_c_f);
        assert!(r.lambda >= 1.0);
        assert!(r.alpha > 1.0);
    }

    #[test]
    fn lower_bound_instance_formulas() {
        let lb = make_lower_bound_instance(10_000, 0.25, 0.5).unwrap();
        assert!((lb.delta_t - 0.005).abs() < 1e-15);
        // 2 - 3 * 0.005 / 0.5 = 1.97
        assert!((lb.gap - 0.00125 / 1.97).abs() < 1e-15);
        assert!((lb.v_prime - 0.495).abs() < 1e-15);
        assert!(matches!(
            make_lower_bound_instance(16, 0.25, 0.5),
            Err(OracleError::InvalidHorizon(16))
        ));
    }

    #[test]
    fn lower_bound_instance_argmax_flips() {
        let lb = make_lower_bound_instance(10_000, 0.25, 0.5).unwrap();
        let grid = UtilityGrid::new(&lb.dist, 100_000);
        let (i, _) = grid.argmax(lb.v, DEFAULT_TIE_TOL);
        assert!((grid.bids()[i] - 2.0 * lb.v / 3.0).abs() < 1e-15);
        let (i, _) = grid.argmax(lb.v_prime, DEFAULT_TIE_TOL);
        assert!((grid.bids()[i] - lb.v / 3.0).abs() < 1e-15);
    }

    #[test]
    fn discrete_instance_optimum_is_heavy_atom() {
        let f = discrete_bid_instance();
        let ob = optimal_bid(0.5, &f, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(ob.b_star, 0.1);
        assert!((ob.u_star - 0.4 * 0.55).abs() < 1e-12);
    }
}
