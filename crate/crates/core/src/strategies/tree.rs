//! Optimistic tree search over the dyadic partition of `[0, 1]`.
//!
//! A node at depth `h` with index `i` covers `[i / 2^h, (i + 1) / 2^h]` and is
//! played at its midpoint. Children are always created after their parent,
//! so a reverse scan over the node vector visits children before parents.

use super::rescale_reward;

#[derive(Debug, Clone)]
struct Node {
    depth: usize,
    lo: f64,
    hi: f64,
    count: u64,
    sum: f64,
    children: [Option<usize>; 2],
    b_value: f64,
}

impl Node {
    fn new(depth: usize, lo: f64, hi: f64) -> Self {
        Node {
            depth,
            lo,
            hi,
            count: 0,
            sum: 0.0,
            children: [None, None],
            b_value: f64::INFINITY,
        }
    }

    fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn child_cell(&self, side: usize) -> (f64, f64) {
        let mid = self.mid();
        if side == 0 {
            (self.lo, mid)
        } else {
            (mid, self.hi)
        }
    }
}

/// Hierarchical optimistic optimization.
#[derive(Debug, Clone)]
pub struct Hoo {
    rho: f64,
    nu1: f64,
    depth_cap: usize,
    nodes: Vec<Node>,
    path: Vec<usize>,
    plays: u64,
}

impl Hoo {
    pub fn new(rho: f64, nu1: f64, depth_cap: usize) -> Self {
        Hoo {
            rho,
            nu1,
            depth_cap,
            nodes: Vec::new(),
            path: Vec::new(),
            plays: 0,
        }
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn select(&mut self) -> f64 {
        self.path.clear();
        if self.nodes.is_empty() {
            self.nodes.push(Node::new(0, 0.0, 1.0));
            self.path.push(0);
            return self.nodes[0].mid();
        }
        let mut cur = 0;
        self.path.push(cur);
        while self.nodes[cur].depth < self.depth_cap {
            let b = |c: Option<usize>| c.map_or(f64::INFINITY, |i| self.nodes[i].b_value);
            let [l, r] = self.nodes[cur].children;
            let side = if b(r) >= b(l) { 1 } else { 0 };
            match self.nodes[cur].children[side] {
                Some(next) => {
                    cur = next;
                    self.path.push(cur);
                }
                None => {
                    let (lo, hi) = self.nodes[cur].child_cell(side);
                    let depth = self.nodes[cur].depth + 1;
                    let id = self.nodes.len();
                    self.nodes.push(Node::new(depth, lo, hi));
                    self.nodes[cur].children[side] = Some(id);
                    self.path.push(id);
                    cur = id;
                    break;
                }
            }
        }
        self.nodes[cur].mid()
    }

    pub fn update(&mut self, reward: f64) {
        if self.path.is_empty() {
            return;
        }
        let r = rescale_reward(reward);
        for &i in &self.path {
            self.nodes[i].count += 1;
            self.nodes[i].sum += r;
        }
        self.path.clear();
        self.plays += 1;
        let log_t = (self.plays as f64).ln();
        for i in (0..self.nodes.len()).rev() {
            let n = &self.nodes[i];
            let u = n.mean() + (2.0 * log_t / n.count as f64).sqrt() + self.nu1 * self.rho.powi(n.depth as i32);
            let b = if n.depth >= self.depth_cap {
                u
            } else {
                let child_b = |c: Option<usize>| c.map_or(f64::INFINITY, |j| self.nodes[j].b_value);
                u.min(child_b(n.children[0]).max(child_b(n.children[1])))
            };
            self.nodes[i].b_value = b;
        }
    }
}

/// Stochastic simultaneous optimistic optimization.
///
/// Each sweep walks the depths from the root down. At every depth the leaf
/// with the largest b-value is evaluated once more if it has fewer than `k`
/// samples; otherwise it is expanded when its b-value is at least the largest
/// one expanded earlier in the sweep. Leaves at the depth limit cannot be
/// expanded and are evaluated instead.
#[derive(Debug, Clone)]
pub struct StoSoo {
    k: u64,
    depth_limit: usize,
    log_term: f64,
    nodes: Vec<Node>,
    depth: usize,
    v_max: f64,
    pending: Option<usize>,
}

impl StoSoo {
    pub fn new(horizon: usize) -> Self {
        let t = horizon.max(2) as f64;
        let k = Self::samples_per_node(horizon);
        let by_k = (t / k as f64).sqrt().floor() as usize;
        StoSoo {
            k,
            depth_limit: super::floor_log2(horizon).min(by_k),
            log_term: (t * t).ln(),
            nodes: vec![Node::new(0, 0.0, 1.0)],
            depth: 0,
            v_max: f64::NEG_INFINITY,
            pending: None,
        }
    }

    /// `ceil(T / ln^3 T)`.
    pub fn samples_per_node(horizon: usize) -> u64 {
        let t = horizon.max(2) as f64;
        (t / t.ln().powi(3)).ceil().max(1.0) as u64
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    fn b_value(&self, n: &Node) -> f64 {
        if n.count == 0 {
            f64::INFINITY
        } else {
            n.mean() + (self.log_term / (2.0 * n.count as f64)).sqrt()
        }
    }

    fn best_leaf(&self, depth: usize) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.depth != depth || n.children[0].is_some() {
                continue;
            }
            let b = self.b_value(n);
            // ties go to the cell further right
            if best.is_none_or(|(j, bb)| b > bb || (b == bb && n.lo > self.nodes[j].lo)) {
                best = Some((i, b));
            }
        }
        best
    }

    pub fn select(&mut self) -> f64 {
        loop {
            if self.depth > self.max_depth().min(self.depth_limit) {
                self.depth = 0;
                self.v_max = f64::NEG_INFINITY;
            }
            let Some((i, b)) = self.best_leaf(self.depth) else {
                self.depth += 1;
                continue;
            };
            let node = &self.nodes[i];
            if node.count < self.k || (node.depth >= self.depth_limit && b >= self.v_max) {
                self.pending = Some(i);
                return node.mid();
            }
            if b < self.v_max {
                self.depth += 1;
                continue;
            }
            let depth = node.depth + 1;
            let cells = [node.child_cell(0), node.child_cell(1)];
            for (side, (lo, hi)) in cells.into_iter().enumerate() {
                let id = self.nodes.len();
                self.nodes.push(Node::new(depth, lo, hi));
                self.nodes[i].children[side] = Some(id);
            }
            self.v_max = b;
            self.depth += 1;
        }
    }

    pub fn update(&mut self, reward: f64) {
        if let Some(i) = self.pending.take() {
            self.nodes[i].count += 1;
            self.nodes[i].sum += rescale_reward(reward);
            self.depth += 1;
        }
    }
}
