use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::reduced::{Candidates, ReducedProblem};

/// Depth-first branch and bound. The bound at a node is the partial energy
/// minus `|g_c|` for every unassigned variable `c` (its field including
/// couplings to assigned variables) minus `|w|` for every coupling between two
/// unassigned variables; it never exceeds the best completion.
pub(crate) fn search(p: &ReducedProblem, window: f64) -> Vec<u64> {
    let n = p.n_vars;
    let order = variable_order(p);
    let mut position = vec![0usize; n];
    for (k, &a) in order.iter().enumerate() {
        position[a] = k;
    }
    // free_pairs[k]: sum of |w| over couplings whose endpoints both sit at positions >= k
    let mut free_pairs = vec![0.0; n + 1];
    for &(a, b, w) in &p.pairs {
        free_pairs[position[a].min(position[b])] += w.abs();
    }
    for k in (0..n).rev() {
        free_pairs[k] += free_pairs[k + 1];
    }

    let mut state = Search {
        p,
        order,
        free_pairs,
        effective: p.fields.clone(),
        found: Candidates::new(window),
    };
    state.descend(0, p.constant, 0);
    state.found.into_masks()
}

struct Search<'a> {
    p: &'a ReducedProblem,
    order: Vec<usize>,
    free_pairs: Vec<f64>,
    effective: Vec<f64>,
    found: Candidates,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, partial: f64, mask: u64) {
        let n = self.p.n_vars;
        if depth == n {
            self.found.offer(partial, mask);
            return;
        }
        let a = self.order[depth];
        let g = self.effective[a];
        let first = if g < 0.0 { -1.0 } else { 1.0 };
        let values: &[f64] = if depth == 0 && self.p.symmetric { &[1.0] } else { &[first, -first] };
        for &value in values {
            let energy = partial - g * value;
            for &(c, w) in self.p.neighbors(a) {
                self.effective[c] += w * value;
            }
            let slack: f64 = self.order[depth + 1..].iter().map(|&c| self.effective[c].abs()).sum();
            let bound = energy - slack - self.free_pairs[depth + 1];
            if bound <= self.found.threshold() {
                let next = if value < 0.0 { mask | 1 << a } else { mask };
                self.descend(depth + 1, energy, next);
            }
            for &(c, w) in self.p.neighbors(a) {
                self.effective[c] -= w * value;
            }
        }
    }
}

/// Breadth-first from the most strongly coupled variable, so each newly
/// assigned variable tends to touch already assigned ones.
fn variable_order(p: &ReducedProblem) -> Vec<usize> {
    let n = p.n_vars;
    let weight = |a: usize| p.fields[a].abs() + p.neighbors(a).iter().map(|&(_, w)| w.abs()).sum::<f64>();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&a| !seen[a])
            .max_by(|&a, &b| weight(a).total_cmp(&weight(b)).then(b.cmp(&a)))
            .unwrap_or(0);
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            order.push(a);
            let mut next: Vec<(usize, f64)> = p.neighbors(a).iter().filter(|&&(b, _)| !seen[b]).copied().collect();
            next.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()).then(x.0.cmp(&y.0)));
            for (b, _) in next {
                if !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    order
}
