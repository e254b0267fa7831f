use alloc::vec;
use alloc::vec::Vec;

use super::reduced::{Candidates, ReducedProblem};

/// Steps between full recomputations of the running energy and local fields.
const RESYNC: u64 = 1 << 12;

/// Gray-code enumeration of every assignment (variable 0 pinned to `+1` when
/// the problem is flip-symmetric). Returns bitmasks of near-optimal assignments.
pub(crate) fn enumerate(p: &ReducedProblem, window: f64) -> Vec<u64> {
    let n = p.n_vars;
    let mut found = Candidates::new(window);
    let mut x = vec![1.0; n];
    let mut energy = p.energy(&x);
    found.offer(energy, 0);
    if n == 0 {
        return found.into_masks();
    }
    let pinned = usize::from(p.symmetric);
    let free = (n - pinned) as u32;
    let mut local = p.local_fields(&x);
    let mut mask = 0u64;
    for k in 1..(1u64 << free) {
        let a = pinned + k.trailing_zeros() as usize;
        energy += 2.0 * x[a] * local[a];
        x[a] = -x[a];
        mask ^= 1 << a;
        let twice = 2.0 * x[a];
        for &(b, w) in p.neighbors(a) {
            local[b] += twice * w;
        }
        if k % RESYNC == 0 {
            energy = p.energy(&x);
            local = p.local_fields(&x);
        }
        found.offer(energy, mask);
    }
    found.into_masks()
}
