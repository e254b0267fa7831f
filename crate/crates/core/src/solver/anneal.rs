use alloc::vec::Vec;

use super::reduced::ReducedProblem;
use super::AnnealSchedule;
use crate::rng::CounterRng;

/// Metropolis single-spin-flip annealing along a geometric temperature
/// ladder, followed by a zero-temperature quench.
pub(crate) fn anneal_once(p: &ReducedProblem, schedule: &AnnealSchedule, rng: &mut CounterRng) -> Vec<f64> {
    let n = p.n_vars;
    let mut x: Vec<f64> = (0..n).map(|_| f64::from(rng.sign())).collect();
    if n == 0 {
        return x;
    }
    let mut local = p.local_fields(&x);
    let ratio = schedule.t_final / schedule.t_init;
    for sweep in 0..schedule.sweeps {
        let frac = if schedule.sweeps > 1 { sweep as f64 / (schedule.sweeps - 1) as f64 } else { 0.0 };
        let beta = 1.0 / (schedule.t_init * libm::pow(ratio, frac));
        for a in 0..n {
            let cost = 2.0 * x[a] * local[a];
            if cost <= 0.0 || rng.uniform() < libm::exp(-beta * cost) {
                flip(p, &mut x, &mut local, a);
            }
        }
    }
    quench(p, &mut x, &mut local);
    x
}

/// Greedy descent until no single flip lowers the energy.
pub(crate) fn quench(p: &ReducedProblem, x: &mut [f64], local: &mut [f64]) {
    loop {
        let mut improved = false;
        for a in 0..p.n_vars {
            if 2.0 * x[a] * local[a] < -1e-12 {
                flip(p, x, local, a);
                improved = true;
            }
        }
        if !improved {
            return;
        }
    }
}

#[inline]
fn flip(p: &ReducedProblem, x: &mut [f64], local: &mut [f64], a: usize) {
    x[a] = -x[a];
    let twice = 2.0 * x[a];
    for &(b, w) in p.neighbors(a) {
        local[b] += twice * w;
    }
}
