//! Segmented sieve of Eratosthenes over odd numbers.
//!
//! `[0, limit]` is cut into fixed segments of `segment_odds` odd numbers;
//! each segment is sieved independently by the base primes up to
//! `√limit`, so segments can be processed in any order or concurrently.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::exec::Exec;

/// Odd numbers per segment (2^20 odds span 2 MiB of integers).
pub const DEFAULT_SEGMENT_ODDS: usize = 1 << 20;

/// Largest supported limit; primes are stored as `u32`.
pub const MAX_LIMIT: u64 = u32::MAX as u64;

#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub segment_odds: usize,
    /// Upper bound on the bytes a theta table may occupy.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_odds: DEFAULT_SEGMENT_ODDS,
            memory_budget: 4 << 30,
        }
    }
}

/// Upper bound on π(x), valid for x > 1 (Rosser–Schoenfeld).
pub fn prime_count_upper(x: u64) -> u64 {
    if x < 17 {
        return 6;
    }
    let xf = x as f64;
    (1.25506 * xf / xf.ln()).ceil() as u64
}

pub(crate) fn check_limit(limit: u64, bytes_per_prime: u64, cfg: &SieveConfig) -> Result<()> {
    if limit < 2 {
        return Err(Error::Range(format!("sieve limit {limit} is below 2")));
    }
    if limit > MAX_LIMIT {
        return Err(Error::Resource(format!(
            "sieve limit {limit} exceeds the supported maximum {MAX_LIMIT}"
        )));
    }
    let need = prime_count_upper(limit) * bytes_per_prime + 2 * cfg.segment_odds as u64;
    if need > cfg.memory_budget {
        return Err(Error::Resource(format!(
            "sieve limit {limit} needs about {need} bytes, over the budget of {} bytes",
            cfg.memory_budget
        )));
    }
    Ok(())
}

/// Primes `≤ n` by a plain sieve; used for the base primes.
pub(crate) fn simple_primes(n: u64) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Integer ranges `[lo, hi)` covering `[0, limit]` in sieve order.
pub fn segments(limit: u64, segment_odds: usize) -> Vec<Range<u64>> {
    let span = 2 * segment_odds.max(1) as u64;
    let end = limit + 1;
    (0..end.div_ceil(span))
        .map(|j| j * span..((j + 1) * span).min(end))
        .collect()
}

/// Primes in `[range.start, range.end)`, given every prime up to
/// `√(range.end − 1)` in `base`.
pub fn sieve_range(range: Range<u64>, base: &[u32]) -> Vec<u32> {
    let Range { start, end } = range;
    let mut out = Vec::new();
    if end <= start {
        return out;
    }
    if start <= 2 && 2 < end {
        out.push(2);
    }
    // Slot i stands for the odd number first + 2i.
    let first = if start % 2 == 1 { start } else { start + 1 };
    if first >= end {
        return out;
    }
    let slots = ((end - first).div_ceil(2)) as usize;
    let mut composite = vec![false; slots];
    if first == 1 {
        composite[0] = true;
    }
    for &p in base.iter().skip_while(|&&p| p == 2) {
        let p = p as u64;
        let sq = p * p;
        if sq >= end {
            break;
        }
        let mut m = if sq >= first {
            sq
        } else {
            let k = first.div_ceil(p);
            let m = k * p;
            if m.is_multiple_of(2) {
                m + p
            } else {
                m
            }
        };
        while m < end {
            composite[((m - first) / 2) as usize] = true;
            m += 2 * p;
        }
    }
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (first + 2 * i as u64) as u32),
    );
    out
}

/// Base primes for sieving up to `limit`.
pub fn base_primes(limit: u64) -> Vec<u32> {
    simple_primes((limit as f64).sqrt() as u64 + 1)
}

/// Every prime `≤ limit`, one vector per segment, in ascending order.
pub fn segmented_primes(limit: u64, cfg: &SieveConfig, exec: &Exec) -> Result<Vec<Vec<u32>>> {
    check_limit(limit, 4, cfg)?;
    let base = base_primes(limit);
    let segs = segments(limit, cfg.segment_odds);
    Ok(exec.map(&segs, |r| sieve_range(r.clone(), &base)))
}

pub fn primes_up_to(limit: u64, exec: &Exec) -> Result<Vec<u32>> {
    Ok(segmented_primes(limit, &SieveConfig::default(), exec)?.concat())
}

/// π(limit).
pub fn count_primes(limit: u64, exec: &Exec) -> Result<u64> {
    if limit < 2 {
        return Ok(0);
    }
    let cfg = SieveConfig::default();
    check_limit(limit, 0, &cfg)?;
    let base = base_primes(limit);
    let segs = segments(limit, cfg.segment_odds);
    Ok(exec
        .map(&segs, |r| sieve_range(r.clone(), &base).len() as u64)
        .into_iter()
        .sum())
}
