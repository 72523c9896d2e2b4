//! Maximization over the empirical CDF of the rival maxima.
//!
//! With `F_hat(b) = #{m_s <= b} / n`, the map `b -> (x - b) F_hat(b)` is
//! decreasing between consecutive atoms, so its supremum on `[0, x]` is
//! attained at `0` or at an atom.

/// Largest maximizer of `(x - b) F_hat(b)` over `{0} ∪ {atoms <= x}`.
///
/// `sorted` must be ascending and nonempty. Returns `(bid, value)`; values
/// within `tol * max(1, |best|)` of the best count as ties.
pub fn empirical_argmax(sorted: &[f64], x: f64, tol: f64) -> (f64, f64) {
    let n = sorted.len() as f64;
    let zero_rank = sorted.partition_point(|m| *m <= 0.0);
    let mut candidates = vec![(0.0, x * zero_rank as f64 / n)];
    for (b, rank) in distinct_atoms(sorted) {
        if b > x {
            break;
        }
        if b > 0.0 {
            candidates.push((b, (x - b) * rank as f64 / n));
        }
    }
    let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let thr = best - tol * best.abs().max(1.0);
    candidates
        .into_iter()
        .rev()
        .find(|c| c.1 >= thr)
        .unwrap_or((0.0, best))
}

/// Distinct atoms with the number of observations `<=` each.
fn distinct_atoms(sorted: &[f64]) -> impl Iterator<Item = (f64, usize)> + '_ {
    (0..sorted.len())
        .filter(move |&i| i + 1 == sorted.len() || sorted[i + 1] != sorted[i])
        .map(move |i| (sorted[i], i + 1))
}

/// Optimistic bid: the largest `b` in `[0, min(1, v_hat + eps)]` whose
/// empirical utility `(v_hat - b) F_hat(b)` is within `2 eps` of its maximum.
pub fn oucbid1_bid(sorted: &[f64], v_hat: f64, eps: f64) -> f64 {
    let n = sorted.len() as f64;
    let u_hat = |b: f64| (v_hat - b) * sorted.partition_point(|m| *m <= b) as f64 / n;
    let (_, best) = empirical_argmax(sorted, v_hat, 0.0);
    let thr = best - 2.0 * eps;
    let hi = (v_hat + eps).min(1.0);
    // slack for thresholds hit exactly by an in-piece root
    let ok = |b: f64| u_hat(b) >= thr - 1e-12 * thr.abs().max(1.0);

    if ok(hi) {
        return hi;
    }
    // On each piece [s_j, s_{j+1}) F_hat is constant, so u_hat is linear and
    // decreasing there; the largest feasible point of a piece is the root of
    // u_hat = thr, clipped to the piece.
    let mut starts = vec![(0.0, sorted.partition_point(|m| *m <= 0.0))];
    starts.extend(distinct_atoms(sorted).filter(|(d, _)| *d > 0.0 && *d <= hi));
    let mut best_b: Option<f64> = None;
    for (j, &(s, rank)) in starts.iter().enumerate() {
        let right = starts.get(j + 1).map_or(hi, |a| a.0);
        let c = rank as f64 / n;
        let root = if c > 0.0 { v_hat - thr / c } else if thr <= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        let cand = if root >= right {
            if right > s { right.next_down() } else { s }
        } else if root >= s {
            root
        } else {
            s
        };
        if ok(cand) {
            best_b = Some(best_b.map_or(cand, |x: f64| x.max(cand)));
        }
    }
    best_b.unwrap_or(0.0)
}

/// Lower median: the order statistic of rank `ceil(n / 2)`.
pub fn lower_median(sorted: &[f64]) -> Option<f64> {
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}
