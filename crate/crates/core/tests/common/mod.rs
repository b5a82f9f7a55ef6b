//! Reference checks shared by the integration and acceptance tests.
#![allow(dead_code)]

use poussin::{Dd, EnvelopeFn, ThetaTable};

/// Outcome of a dense scan of `g(x) − |θ(x) − x|`.
#[derive(Debug)]
pub struct Scan {
    /// First sample point where the bound is violated.
    pub violation: Option<f64>,
    /// Smallest `g(x) − |θ(x) − x|` over all samples.
    pub min_margin: f64,
    /// Sample point attaining `min_margin`.
    pub argmin: f64,
}

/// Tests the surplus condition at every prime in `[lo, hi]` and the
/// deficit condition at `per_gap` equally spaced points of every prime gap,
/// including both gap endpoints (the right one as a left limit).
pub fn dense_scan(env: &EnvelopeFn, lo: f64, hi: f64, table: &ThetaTable, per_gap: usize) -> Scan {
    let primes = table.primes();
    let theta = table.theta();
    let mut scan = Scan {
        violation: None,
        min_margin: f64::INFINITY,
        argmin: lo,
    };
    let probe = |x: f64, lhs: f64, scan: &mut Scan| {
        let margin = env.eval(x).value - lhs;
        if margin < scan.min_margin {
            scan.min_margin = margin;
            scan.argmin = x;
        }
        if margin <= 0.0 && scan.violation.is_none() {
            scan.violation = Some(x);
        }
    };
    let k_lo = table.index_at(lo).unwrap();
    let k_hi = table.index_at(hi).unwrap();
    for k in k_lo..=k_hi {
        let t = theta[k];
        let u = if k == k_lo { lo } else { primes[k] as f64 };
        let v = if k == k_hi { hi } else { primes[k + 1] as f64 };
        probe(u, (t - u).abs(), &mut scan);
        for i in 1..=per_gap {
            let x = u + (v - u) * i as f64 / per_gap as f64;
            probe(x, (x - t).abs(), &mut scan);
        }
    }
    scan
}

/// `|θ(w) − w| ≥ g(w)` recomputed in double-double with an independently
/// summed θ.
pub fn witness_fails_extended(env: &EnvelopeFn, table: &ThetaTable, w: f64) -> bool {
    let t = match table.index_at(w) {
        Some(k) => poussin::theta::extended_theta_of_primes(&table.primes()[..=k]),
        None => Dd::ZERO,
    };
    let x = Dd::from_f64(w);
    (t - x).abs() >= env.eval_dd(x)
}

pub fn trial_division_primes(n: u64) -> Vec<u32> {
    (2..=n)
        .filter(|&k| (2..).take_while(|d| d * d <= k).all(|d| k % d != 0))
        .map(|k| k as u32)
        .collect()
}
