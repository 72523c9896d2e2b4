//! Empirical-CDF concentration bounds, Monte-Carlo coverage experiments and
//! numerical checks of the structural properties of the optimal bid.

use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::{check_log_concavity, DistModel};
use crate::oracle::{self, OracleError, UtilityGrid};
use crate::rng::{self, COVERAGE_STREAM};

#[derive(Debug, Error, PartialEq)]
pub enum ConcentrationError {
    #[error("interval has no probability mass: F(b) - F(a) = {0}")]
    DegenerateInterval(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn check_eta(eta: f64) -> Result<(), ConcentrationError> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(ConcentrationError::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")))
    }
}

/// Uniform deviation bound `sqrt(ln(2 / eta) / (2 t))` for `t` samples.
pub fn dkw_bound(t: usize, eta: f64) -> f64 {
    ((2.0 / eta).ln() / (2.0 * t as f64)).sqrt()
}

/// Deviation bound for the empirical CDF increment over an interval of mass
/// `p = pb - pa`:
///
/// `sqrt(2 p ln(e sqrt(t) / (eta sqrt(2 p))) / t) + ln(t / (2 p eta^2)) / (6 t)`.
pub fn local_dkw_bound(t: usize, pa: f64, pb: f64, eta: f64) -> Result<f64, ConcentrationError> {
    check_eta(eta)?;
    if t < 2 {
        return Err(ConcentrationError::InvalidArgument("t must be at least 2".into()));
    }
    let p = pb - pa;
    if !(p > 0.0) {
        return Err(ConcentrationError::DegenerateInterval(p));
    }
    let t = t as f64;
    let first = (2.0 * p * (std::f64::consts::E * t.sqrt() / (eta * (2.0 * p).sqrt())).ln() / t).sqrt();
    let second = (t / (2.0 * p * eta * eta)).ln() / (6.0 * t);
    Ok(first + second)
}

/// One draw of the local deviation statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub bound: f64,
    pub empirical_sup: f64,
    pub covered: bool,
    pub eta: f64,
    pub t: usize,
    pub interval: (f64, f64),
    pub prob_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSummary {
    /// Fraction of repetitions with `empirical_sup <= bound`.
    pub coverage: f64,
    pub reps: usize,
    pub bound: f64,
    pub prob_mass: f64,
    pub mean_sup: f64,
}

pub const COVERAGE_GRID: usize = 1000;

/// `sup_{x in [a, b]} |F_hat(x) - F(x) - (F_hat(a) - F(a))|` for sorted samples.
///
/// Evaluated on a `COVERAGE_GRID`-point grid plus every sample inside
/// `[a, b]`, on both sides of its jump.
pub fn local_deviation(dist: &DistModel, sorted: &[f64], a: f64, b: f64) -> f64 {
    let n = sorted.len() as f64;
    let f_hat = |x: f64| sorted.partition_point(|s| *s <= x) as f64 / n;
    let base = f_hat(a) - dist.cdf(a);
    let mut sup = 0.0_f64;
    for i in 0..COVERAGE_GRID {
        let x = a + (b - a) * i as f64 / (COVERAGE_GRID - 1) as f64;
        sup = sup.max((f_hat(x) - dist.cdf(x) - base).abs());
    }
    let start = sorted.partition_point(|s| *s < a);
    let end = sorted.partition_point(|s| *s <= b);
    for j in start..end {
        let x = sorted[j];
        let fx = dist.cdf(x);
        let right = sorted.partition_point(|s| *s <= x) as f64 / n;
        let left = sorted.partition_point(|s| *s < x) as f64 / n;
        sup = sup.max((right - fx - base).abs()).max((left - fx - base).abs());
    }
    sup
}

/// Runs `reps` independent draws of `t` samples from `dist` and reports how
/// often the local bound covers the deviation over `[a, b]`.
pub fn coverage_experiment(
    dist: &DistModel,
    a: f64,
    b: f64,
    t: usize,
    eta: f64,
    reps: usize,
    seed: u64,
) -> Result<CoverageSummary, ConcentrationError> {
    if !(a < b) || reps == 0 {
        return Err(ConcentrationError::InvalidArgument("need a < b and reps >= 1".into()));
    }
    let (pa, pb) = (dist.cdf(a), dist.cdf(b));
    let bound = local_dkw_bound(t, pa, pb, eta)?;
    let sups: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(seed, &[COVERAGE_STREAM, rep as u64]);
            let mut xs: Vec<f64> = (0..t).map(|_| dist.sample(&mut rng)).collect();
            xs.sort_by(f64::total_cmp);
            local_deviation(dist, &xs, a, b)
        })
        .collect();
    let covered = sups.iter().filter(|s| **s <= bound).count();
    Ok(CoverageSummary {
        coverage: covered as f64 / reps as f64,
        reps,
        bound,
        prob_mass: pb - pa,
        mean_sup: sups.iter().sum::<f64>() / reps as f64,
    })
}

/// Single repetition with the full report.
pub fn coverage_draw(
    dist: &DistModel,
    a: f64,
    b: f64,
    t: usize,
    eta: f64,
    seed: u64,
) -> Result<ConcentrationReport, ConcentrationError> {
    let summary = coverage_experiment(dist, a, b, t, eta, 1, seed)?;
    Ok(ConcentrationReport {
        bound: summary.bound,
        empirical_sup: summary.mean_sup,
        covered: summary.coverage == 1.0,
        eta,
        t,
        interval: (a, b),
        prob_mass: summary.prob_mass,
    })
}

/// Lower edge of the acceptance band for a coverage estimate from `reps` draws:
/// `1 - eta - 3 sqrt(eta (1 - eta) / reps)`.
pub fn coverage_floor(eta: f64, reps: usize) -> f64 {
    1.0 - eta - 3.0 * (eta * (1.0 - eta) / reps as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable(String),
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail => f.write_str("fail"),
            Verdict::NotApplicable(why) => write!(f, "n/a ({why})"),
        }
    }
}

/// Outcome of one numerical check. `slack` is the worst margin found;
/// negative means violated.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instance: String,
    pub slack: f64,
    pub verdict: Verdict,
}

impl CheckResult {
    fn from_slack(name: &'static str, instance: &str, slack: f64) -> Self {
        CheckResult {
            name,
            instance: instance.to_string(),
            slack,
            verdict: if slack >= 0.0 { Verdict::Pass } else { Verdict::Fail },
        }
    }

    fn not_applicable(name: &'static str, instance: &str, why: impl Into<String>) -> Self {
        CheckResult {
            name,
            instance: instance.to_string(),
            slack: f64::NAN,
            verdict: Verdict::NotApplicable(why.into()),
        }
    }
}

pub const SUITE_VALUE_GRID: usize = 50;
pub const SUITE_QUANTILE_GRID: usize = 200;
/// Half-width of the window used for the local upper bound on the quantile utility.
pub const SUITE_WINDOW: f64 = 0.05;
const PSI_TOL: f64 = 1e-7;
const PHI_SLOPE_TOL: f64 = 1e-6;

/// Numerical checks of the optimal-bid structure at value `v`.
///
/// Returned checks, in order:
///
/// - `psi-monotone`: the largest optimal bid is nondecreasing in the value
///   (over a 50-point value grid);
/// - `unique-maximizer`: grid bids within `tol` of the maximum form one
///   contiguous run;
/// - `psi-lipschitz`: the optimal bid moves no faster than the value;
/// - `win-prob-floor`: `F(b*) >= F(v) / e` over the value grid;
/// - `quantile-gap-lower`: `W(q*) - W(q) >= (q* - q)^2 W(q*) / 4`;
/// - `quantile-gap-upper`: `W(q*) - W(q) <= (lambda / c_f) (q* - q)^2` near `q*`;
/// - `phi-slope`: finite-difference slopes of `phi_F` exceed 1.
///
/// All but the first need a log-concave `F` with a density and are reported
/// as not applicable otherwise.
pub fn lemma_suite(v: f64, dist: &DistModel, grid_n: usize, tol: f64) -> Result<Vec<CheckResult>, OracleError> {
    let label = format!("v={v}");
    let grid = UtilityGrid::new(dist, grid_n);
    let mut out = Vec::new();

    let v_grid: Vec<f64> = (1..=SUITE_VALUE_GRID).map(|i| i as f64 / SUITE_VALUE_GRID as f64).collect();
    let mut bids = Vec::new();
    for &w in &v_grid {
        match grid.optimal_bid(w, dist, oracle::DEFAULT_TIE_TOL) {
            Ok(o) => bids.push((w, o)),
            Err(OracleError::HopelessInstance { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mono = bids
        .windows(2)
        .map(|p| p[1].1.b_star - p[0].1.b_star + PSI_TOL)
        .fold(f64::INFINITY, f64::min);
    out.push(CheckResult::from_slack("psi-monotone", &label, mono));

    let regular = if dist.is_atomic() {
        Err("F has atoms".to_string())
    } else {
        let verdict = check_log_concavity(dist, 2000)?;
        if verdict.is_log_concave {
            Ok(())
        } else {
            Err(format!("F is not log-concave (violation {:.3e})", verdict.max_violation))
        }
    };
    const REGULAR: [&str; 6] = [
        "unique-maximizer",
        "psi-lipschitz",
        "win-prob-floor",
        "quantile-gap-lower",
        "quantile-gap-upper",
        "phi-slope",
    ];
    if let Err(why) = regular {
        for name in REGULAR {
            out.push(CheckResult::not_applicable(name, &label, why.clone()));
        }
        return Ok(out);
    }

    let opt = grid.optimal_bid(v, dist, oracle::DEFAULT_TIE_TOL)?;

    // near-maximal grid points must form one run
    let us: Vec<f64> = grid
        .bids()
        .iter()
        .zip(grid.cdf_values())
        .map(|(b, q)| (v - b) * q)
        .collect();
    let top: Vec<usize> = (0..us.len()).filter(|&i| us[i] >= opt.u_star - tol).collect();
    let runs = 1 + top.windows(2).filter(|w| w[1] != w[0] + 1).count();
    out.push(CheckResult::from_slack("unique-maximizer", &label, if runs == 1 { 0.0 } else { -((runs - 1) as f64) }));

    let mut lip = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for &w in &v_grid {
        let p = oracle::psi(dist, w)?;
        if let Some((w0, p0)) = prev {
            lip = lip.min((w - w0) + PSI_TOL - (p - p0).abs());
        }
        prev = Some((w, p));
    }
    out.push(CheckResult::from_slack("psi-lipschitz", &label, lip));

    let floor = bids
        .iter()
        .map(|(w, o)| o.q_star - dist.cdf(*w) / std::f64::consts::E)
        .fold(f64::INFINITY, f64::min);
    out.push(CheckResult::from_slack("win-prob-floor", &label, floor));

    let w_star = opt.u_star;
    let q_star = opt.q_star;
    let mut lower = f64::INFINITY;
    for i in 0..SUITE_QUANTILE_GRID {
        let q = i as f64 / (SUITE_QUANTILE_GRID - 1) as f64;
        let w_q = oracle::quantile_utility(v, dist, q)?;
        lower = lower.min(w_star - w_q - 0.25 * (q_star - q).powi(2) * w_star + tol);
    }
    out.push(CheckResult::from_slack("quantile-gap-lower", &label, lower));

    match oracle::regularity_constants(v, dist, SUITE_WINDOW, 1000) {
        Ok(rep) => {
            let hi = (q_star + rep.big_c_f * SUITE_WINDOW).min(1.0);
            let mut upper = f64::INFINITY;
            for i in 0..SUITE_QUANTILE_GRID {
                let q = q_star + (hi - q_star) * i as f64 / (SUITE_QUANTILE_GRID - 1) as f64;
                let w_q = oracle::quantile_utility(v, dist, q)?;
                upper = upper.min(rep.lambda / rep.c_f * (q_star - q).powi(2) + tol - (w_star - w_q));
            }
            out.push(CheckResult::from_slack("quantile-gap-upper", &label, upper));
        }
        Err(e @ (OracleError::ZeroDensityInWindow | OracleError::ZeroDensity(_))) => {
            out.push(CheckResult::not_applicable("quantile-gap-upper", &label, e.to_string()));
        }
        Err(e) => return Err(e),
    }

    let n = grid_n.clamp(2, 10_000);
    let h = 1.0 / n as f64;
    let mut slope_min = f64::INFINITY;
    let mut last: Option<f64> = None;
    for i in 1..n {
        let b = i as f64 * h;
        let p = match oracle::phi(dist, b) {
            Ok(p) => p,
            Err(OracleError::ZeroDensity(_)) => {
                last = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let (Some(p0), true) = (last, p.is_finite()) {
            slope_min = slope_min.min((p - p0) / h);
        }
        last = p.is_finite().then_some(p);
    }
    out.push(CheckResult::from_slack("phi-slope", &label, slope_min - (1.0 - PHI_SLOPE_TOL)));
    Ok(out)
}

/// Coverage checks of the local bound on a few fixed configurations.
pub fn concentration_suite(reps: usize, seed: u64) -> Result<Vec<CheckResult>, ConcentrationError> {
    let beta16 = DistModel::beta(1.0, 6.0).map_err(|e| ConcentrationError::InvalidArgument(e.to_string()))?;
    let configs: [(&str, DistModel, f64, f64, usize, f64); 4] = [
        ("uniform [0.4,0.5] t=1000 eta=0.05", DistModel::Uniform, 0.4, 0.5, 1000, 0.05),
        ("uniform [0.4,0.5] t=1000 eta=0.5", DistModel::Uniform, 0.4, 0.5, 1000, 0.5),
        ("uniform [0,1] t=200 eta=0.1", DistModel::Uniform, 0.0, 1.0, 200, 0.1),
        ("beta(1,6) [0.05,0.2] t=500 eta=0.05", beta16, 0.05, 0.2, 500, 0.05),
    ];
    let mut out = Vec::new();
    for (i, (label, dist, a, b, t, eta)) in configs.into_iter().enumerate() {
        let s = coverage_experiment(&dist, a, b, t, eta, reps, rng::derive_seed(seed, &[i as u64]))?;
        out.push(CheckResult::from_slack("local-dkw-coverage", label, s.coverage - coverage_floor(eta, reps)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_two_max_instance;
    use proptest::prelude::*;

    #[test]
    fn dkw_examples() {
        let eta = 2.0 * (-4.0f64).exp();
        assert!((dkw_bound(50, eta) - 0.2).abs() < 1e-15);
        assert!((dkw_bound(200, eta) - 0.1).abs() < 1e-15);
        assert!((dkw_bound(1000, 0.05) - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn local_bound_examples() {
        let t = 1000.0f64;
        let p = 0.1f64;
        let eta = 0.05f64;
        let expected = (2.0 * p * (std::f64::consts::E * t.sqrt() / (eta * (2.0 * p).sqrt())).ln() / t).sqrt()
            + (t / (2.0 * p * eta * eta)).ln() / (6.0 * t);
        let got = local_dkw_bound(1000, 0.4, 0.5, 0.05).unwrap();
        assert!((got - expected).abs() < 1e-15);

        let b: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|p| local_dkw_bound(1000, 0.0, *p, 0.05).unwrap()).collect();
        assert!(b[0] > b[1] && b[1] > b[2], "{b:?}");

        assert!(local_dkw_bound(10_000, 0.5, 0.51, 0.05).unwrap() < dkw_bound(10_000, 0.05));

        let first = (2.0 * (std::f64::consts::E * t.sqrt() / (eta * 2f64.sqrt())).ln() / t).sqrt();
        let full = local_dkw_bound(1000, 0.0, 1.0, eta).unwrap();
        let second = (t / (2.0 * eta * eta)).ln() / (6.0 * t);
        assert!((full - second - first).abs() < 1e-15);

        assert_eq!(local_dkw_bound(100, 0.5, 0.5, 0.1), Err(ConcentrationError::DegenerateInterval(0.0)));
    }

    proptest! {
        #[test]
        fn local_bound_decreases_in_t_and_eta(
            t in 2usize..100_000,
            pa in 0.0f64..0.9,
            width in 0.001f64..0.1,
            eta in 0.001f64..0.9,
        ) {
            let pb = pa + width;
            let here = local_dkw_bound(t, pa, pb, eta).unwrap();
            prop_assert!(local_dkw_bound(t + 1, pa, pb, eta).unwrap() < here);
            prop_assert!(local_dkw_bound(t, pa, pb, eta * 1.05).unwrap() < here);
        }
    }

    #[test]
    fn local_deviation_matches_brute_force() {
        let xs = vec![0.1, 0.42, 0.45, 0.45, 0.48, 0.9];
        let got = local_deviation(&DistModel::Uniform, &xs, 0.4, 0.5);
        // base = F_hat(0.4) - 0.4 = 1/6 - 0.4; the sup is at x = 0.48 on the right
        let base: f64 = 1.0 / 6.0 - 0.4;
        let expected = (5.0 / 6.0 - 0.48 - base).abs();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn coverage_examples() {
        let one = coverage_experiment(&DistModel::Uniform, 0.4, 0.5, 1000, 0.05, 1, 3).unwrap();
        assert!(one.coverage == 0.0 || one.coverage == 1.0);
        let half = coverage_experiment(&DistModel::Uniform, 0.4, 0.5, 1000, 0.5, 400, 4).unwrap();
        assert!(half.coverage >= 0.5);
        let s = coverage_experiment(&DistModel::Uniform, 0.4, 0.5, 1000, 0.05, 2000, 5).unwrap();
        assert!(s.coverage >= coverage_floor(0.05, 2000), "{}", s.coverage);
        assert!(coverage_experiment(&DistModel::Uniform, 2.0, 3.0, 100, 0.1, 10, 0).is_err());
    }

    #[test]
    fn coverage_is_reproducible() {
        let a = coverage_experiment(&DistModel::Uniform, 0.2, 0.6, 300, 0.1, 64, 11).unwrap();
        let b = coverage_experiment(&DistModel::Uniform, 0.2, 0.6, 300, 0.1, 64, 11).unwrap();
        assert_eq!(a, b);
    }

    fn verdicts(checks: &[CheckResult]) -> Vec<(&'static str, Verdict)> {
        checks.iter().map(|c| (c.name, c.verdict.clone())).collect()
    }

    #[test]
    fn suite_passes_on_regular_instances() {
        for dist in [DistModel::Uniform, DistModel::beta(1.0, 6.0).unwrap()] {
            let checks = lemma_suite(0.5, &dist, 10_000, 1e-9).unwrap();
            assert_eq!(checks.len(), 7);
            for c in &checks {
                assert_eq!(c.verdict, Verdict::Pass, "{dist:?}: {c:?}");
            }
        }
    }

    #[test]
    fn suite_flags_two_maximizer_instance() {
        let (v, dist) = make_two_max_instance();
        let checks = lemma_suite(v, &dist, 10_000, 1e-9).unwrap();
        let vs = verdicts(&checks);
        let unique = vs.iter().find(|(n, _)| *n == "unique-maximizer").unwrap();
        assert!(matches!(unique.1, Verdict::NotApplicable(_)), "{vs:?}");
        assert_eq!(vs[0].1, Verdict::Pass);
    }
}
