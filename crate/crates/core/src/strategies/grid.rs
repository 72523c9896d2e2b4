//! Finite-arm baselines on an equispaced bid grid.

use rand::Rng;

use super::{rescale_reward, Observation};
use crate::rng::StreamRng;

fn arm_grid(k: usize) -> Vec<f64> {
    (0..k).map(|i| i as f64 / (k - 1) as f64).collect()
}

/// UCB1 over the arms `i / (K - 1)`.
#[derive(Debug, Clone)]
pub struct UcbGrid {
    arms: Vec<f64>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    pending: Option<usize>,
}

impl UcbGrid {
    pub fn new(k: usize) -> Self {
        UcbGrid {
            arms: arm_grid(k),
            counts: vec![0; k],
            sums: vec![0.0; k],
            pending: None,
        }
    }

    pub fn arms(&self) -> &[f64] {
        &self.arms
    }

    pub fn select(&mut self, t: usize) -> f64 {
        let k = self.arms.len();
        let i = if t <= k {
            t - 1
        } else {
            let log_t = (t as f64).ln();
            let mut best = 0;
            let mut best_idx = f64::NEG_INFINITY;
            for i in 0..k {
                let n = self.counts[i] as f64;
                let idx = self.sums[i] / n + (2.0 * log_t / n).sqrt();
                if idx >= best_idx {
                    best_idx = idx;
                    best = i;
                }
            }
            best
        };
        self.pending = Some(i);
        self.arms[i]
    }

    pub fn update(&mut self, reward: f64) {
        if let Some(i) = self.pending.take() {
            self.counts[i] += 1;
            self.sums[i] += rescale_reward(reward);
        }
    }
}

/// Exponential weights over `K` grid bids with importance-weighted rewards.
///
/// With `M_t` revealed, every arm `b_i >= M_t` would have won; its reward
/// `V_t - b_i` is observable only when the played arm won, so such arms get
/// `(V_t - b_i) 1{won} / P(win)` where `P(win)` sums the probabilities of the
/// winning arms. Arms below `M_t` would have lost and get 0.
#[derive(Debug, Clone)]
pub struct WinExp {
    arms: Vec<f64>,
    eta: f64,
    cum: Vec<f64>,
    probs: Vec<f64>,
    rng: StreamRng,
}

impl WinExp {
    pub fn new(k: usize, eta: f64, rng: StreamRng) -> Self {
        WinExp {
            arms: arm_grid(k),
            eta,
            cum: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            rng,
        }
    }

    /// `sqrt(2 ln K / (K T))`.
    pub fn default_eta(k: usize, horizon: usize) -> f64 {
        (2.0 * (k as f64).ln() / (k as f64 * horizon as f64)).sqrt()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Current sampling distribution.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn refresh_probs(&mut self) {
        let top = self.cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, s) in self.probs.iter_mut().zip(&self.cum) {
            *p = (self.eta * (s - top)).exp();
            total += *p;
        }
        for p in &mut self.probs {
            *p /= total;
        }
    }

    pub fn select(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let last = self.arms.len() - 1;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return self.arms[i];
            }
        }
        self.arms[last]
    }

    pub fn update(&mut self, obs: &Observation) {
        let Some(m) = obs.max_rival_bid else { return };
        if let (true, Some(v)) = (obs.won, obs.value) {
            let p_win: f64 = self
                .arms
                .iter()
                .zip(&self.probs)
                .filter(|(b, _)| **b >= m)
                .map(|(_, p)| p)
                .sum();
            if p_win > 0.0 {
                for (s, b) in self.cum.iter_mut().zip(&self.arms) {
                    if *b >= m {
                        *s += (v - b) / p_win;
                    }
                }
            }
        }
        self.refresh_probs();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn ucbgrid_round_robin_then_largest_tie() {
        let mut g = UcbGrid::new(10);
        for t in 1..=10 {
            let b = g.select(t);
            assert!((b - (t - 1) as f64 / 9.0).abs() < 1e-15);
            if t == 3 {
                assert!((b - 2.0 / 9.0).abs() < 1e-15);
            }
            g.update(0.0);
        }
        assert_eq!(g.select(11), 1.0);
    }

    #[test]
    fn ucbgrid_prefers_better_arm() {
        let mut g = UcbGrid::new(3);
        for t in 1..=3 {
            let b = g.select(t);
            g.update(if b == 0.5 { 0.5 } else { 0.0 });
        }
        assert_eq!(g.select(4), 0.5);
    }

    #[test]
    fn winexp_uniform_start_and_zero_eta() {
        let mut w = WinExp::new(2, 0.0, rng::stream(3, &[1]));
        assert_eq!(w.probabilities(), &[0.5, 0.5]);
        let mut ones = 0;
        for _ in 0..4000 {
            let b = w.select();
            if b == 1.0 {
                ones += 1;
            }
            w.update(&Observation { round: 0, won: true, max_rival_bid: Some(0.2), value: Some(1.0) });
            assert_eq!(w.probabilities(), &[0.5, 0.5]);
        }
        assert!((ones as f64 / 4000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn winexp_shifts_mass_toward_profitable_arms() {
        let mut w = WinExp::new(11, 0.5, rng::stream(5, &[2]));
        for _ in 0..300 {
            let b = w.select();
            let m = 0.3;
            let won = b >= m;
            w.update(&Observation { round: 0, won, max_rival_bid: Some(m), value: won.then_some(0.8) });
        }
        let p = w.probabilities();
        let best = (0..11).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap();
        assert_eq!(best, 3, "{p:?}");
    }

    #[test]
    fn default_eta_value() {
        let eta = WinExp::default_eta(50, 10_000);
        assert!((eta - (2.0 * 50f64.ln() / 500_000.0).sqrt()).abs() < 1e-15);
    }
}
