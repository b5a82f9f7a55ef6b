//! The first Chebyshev function θ(x) = Σ_{p ≤ x} ln p.
//!
//! [`ThetaTable`] stores θ at every prime up to a limit, accumulated in
//! `f64` with compensated summation, plus a per-entry bound on the
//! absolute rounding error. [`extended_theta`] recomputes θ(x) in
//! double-double arithmetic from an independent sieve and is used to
//! validate the budget and to settle comparisons too close to call in
//! `f64`.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sieve::{self, SieveConfig};
use crate::sum::Compensated;

/// Unit roundoff of `f64` (half an ulp at 1).
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Budget multiplier: compensated summation of correctly-rounded-to-1-ulp
/// logarithms stays within about 3u·θ; 8u·θ is what the table records.
const BUDGET_FACTOR: f64 = 8.0 * UNIT_ROUNDOFF;

/// Default cap for [`extended_theta`].
pub const EXTENDED_CAP: f64 = 1e8;

const CACHE_MAGIC: &[u8; 5] = b"THET1";

/// Bytes per stored prime: the prime, θ and its error bound.
const BYTES_PER_PRIME: u64 = 4 + 8 + 8;

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTable {
    limit: u64,
    primes: Vec<u32>,
    theta: Vec<f64>,
    err: Vec<f64>,
}

/// θ at a query point with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: f64,
    pub err: f64,
    pub x: f64,
}

/// Convenience wrapper: default sieve configuration, parallel execution.
pub fn build_theta_table(limit: u64) -> Result<ThetaTable> {
    ThetaTable::build(limit, &SieveConfig::default(), &Exec::parallel(0))
}

pub fn theta_at(table: &ThetaTable, x: f64) -> Result<ThetaValue> {
    table.theta_at(x)
}

struct SegmentFill<'a> {
    primes: &'a [u32],
    offset: Compensated,
    out: &'a mut [f64],
}

impl ThetaTable {
    /// Sieves `[2, limit]` and accumulates θ. The output is bit-identical
    /// for any [`Exec`]: segments are fixed by `cfg`, per-segment partial
    /// sums are combined strictly left to right.
    pub fn build(limit: u64, cfg: &SieveConfig, exec: &Exec) -> Result<ThetaTable> {
        sieve::check_limit(limit, BYTES_PER_PRIME, cfg)?;
        let per_segment = sieve::segmented_primes(limit, cfg, exec)?;

        let totals: Vec<Compensated> = exec.map(&per_segment, |ps| {
            ps.iter().map(|&p| (p as f64).ln()).collect()
        });
        let mut offsets = Vec::with_capacity(totals.len());
        let mut running = Compensated::new();
        for t in &totals {
            offsets.push(running);
            running = running.merge(*t);
        }

        let primes = per_segment.concat();
        let mut theta = vec![0.0; primes.len()];
        {
            let mut fills = Vec::with_capacity(per_segment.len());
            let mut rest_primes: &[u32] = &primes;
            let mut rest_out: &mut [f64] = &mut theta;
            for (seg, offset) in per_segment.iter().zip(offsets) {
                let (p, pr) = rest_primes.split_at(seg.len());
                let (o, or) = std::mem::take(&mut rest_out).split_at_mut(seg.len());
                rest_primes = pr;
                rest_out = or;
                fills.push(SegmentFill {
                    primes: p,
                    offset,
                    out: o,
                });
            }
            exec.for_each_mut(&mut fills, |fill| {
                let mut local = Compensated::new();
                for (slot, &p) in fill.out.iter_mut().zip(fill.primes) {
                    local.add((p as f64).ln());
                    *slot = fill.offset.merge(local).value();
                }
            });
        }
        let err = theta.iter().map(|&t| BUDGET_FACTOR * t).collect();
        Ok(ThetaTable {
            limit,
            primes,
            theta,
            err,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn err_budget(&self) -> &[f64] {
        &self.err
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Index of the largest prime `≤ x`, if any.
    pub fn index_at(&self, x: f64) -> Option<usize> {
        let n = self.primes.partition_point(|&p| (p as f64) <= x);
        n.checked_sub(1)
    }

    /// θ(x) for `0 < x ≤ limit`; right-continuous, so θ(p) includes ln p.
    pub fn theta_at(&self, x: f64) -> Result<ThetaValue> {
        if !(x > 0.0) || x > self.limit as f64 {
            return Err(Error::Range(format!(
                "θ query x = {x} outside (0, {}]",
                self.limit
            )));
        }
        Ok(match self.index_at(x) {
            Some(k) => ThetaValue {
                value: self.theta[k],
                err: self.err[k],
                x,
            },
            None => ThetaValue {
                value: 0.0,
                err: 0.0,
                x,
            },
        })
    }

    /// θ at `primes[k]` recomputed in double-double.
    pub fn extended_at_index(&self, k: usize) -> Dd {
        extended_theta_of_primes(&self.primes[..=k])
    }

    /// `|θ[k] − θ[k−1] − ln p_k|` in units of `ulp(θ[k])`.
    pub fn telescoping_ulps(&self, k: usize) -> f64 {
        let t = self.theta[k];
        let step = if k == 0 { t } else { t - self.theta[k - 1] };
        let ulp = t.next_up() - t;
        (step - (self.primes[k] as f64).ln()).abs() / ulp
    }

    /// Writes the binary cache: magic `THET1`, little-endian `u64` limit and
    /// count, `u16` prime deltas, then the raw `f64` θ and error arrays.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&self.limit.to_le_bytes())?;
        w.write_all(&(self.primes.len() as u64).to_le_bytes())?;
        let mut prev = 0u32;
        for &p in &self.primes {
            let delta = u16::try_from(p - prev)
                .map_err(|_| Error::Cache(format!("prime gap after {prev} does not fit u16")))?;
            w.write_all(&delta.to_le_bytes())?;
            prev = p;
        }
        for &t in &self.theta {
            w.write_all(&t.to_le_bytes())?;
        }
        for &e in &self.err {
            w.write_all(&e.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache written by [`ThetaTable::save`], re-validating structure
    /// and the telescoping invariant on 1000 evenly spaced entries.
    pub fn load(path: &Path) -> Result<ThetaTable> {
        let mut r = BufReader::new(fs::File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let limit = read_u64(&mut r)?;
        let count = read_u64(&mut r)?;
        if !(2..=sieve::MAX_LIMIT).contains(&limit) || count > sieve::prime_count_upper(limit) {
            return Err(Error::Cache(format!(
                "implausible header: limit {limit}, count {count}"
            )));
        }
        let count = count as usize;
        let mut buf = vec![0u8; count * 2];
        r.read_exact(&mut buf)?;
        let mut primes = Vec::with_capacity(count);
        let mut prev = 0u64;
        for d in buf.chunks_exact(2) {
            let d = u16::from_le_bytes([d[0], d[1]]) as u64;
            if d == 0 {
                return Err(Error::Cache("primes not strictly increasing".into()));
            }
            prev += d;
            primes.push(prev as u32);
        }
        if primes.first() != Some(&2) || prev > limit {
            return Err(Error::Cache(
                "prime list does not start at 2 or exceeds limit".into(),
            ));
        }
        let theta = read_f64s(&mut r, count)?;
        let err = read_f64s(&mut r, count)?;
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::Cache("trailing bytes".into()));
        }
        if err.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Cache(
                "error budget must be finite and nonnegative".into(),
            ));
        }
        let table = ThetaTable {
            limit,
            primes,
            theta,
            err,
        };
        let samples = 1000.min(count);
        for i in 0..samples {
            let k = if samples > 1 {
                i * (count - 1) / (samples - 1)
            } else {
                0
            };
            if !(table.telescoping_ulps(k) <= 4.0) {
                return Err(Error::Cache(format!(
                    "telescoping check failed at entry {k}"
                )));
            }
        }
        Ok(table)
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// File name used for a cached table of the given limit.
pub fn cache_path(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("theta-{limit}.thet"))
}

/// Loads the cached table for `limit` from `dir`, or builds and stores it.
/// An unreadable or mismatched cache file is rebuilt and overwritten.
pub fn load_or_build(dir: &Path, limit: u64, cfg: &SieveConfig, exec: &Exec) -> Result<ThetaTable> {
    let path = cache_path(dir, limit);
    if path.exists() {
        if let Ok(t) = ThetaTable::load(&path) {
            if t.limit == limit {
                return Ok(t);
            }
        }
    }
    let table = ThetaTable::build(limit, cfg, exec)?;
    fs::create_dir_all(dir)?;
    table.save(&path)?;
    Ok(table)
}

/// Products of consecutive primes stay below this so they convert to a
/// double-double exactly.
const PRODUCT_CAP: u128 = 1 << 100;

/// Σ ln p over `primes` in double-double, taking one logarithm per block of
/// primes whose product fits in 100 bits.
pub fn extended_theta_of_primes(primes: &[u32]) -> Dd {
    let mut sum = Dd::ZERO;
    let mut product: u128 = 1;
    for &p in primes {
        let p = p as u128;
        if product * p >= PRODUCT_CAP {
            sum += Dd::from_u128(product).ln();
            product = 1;
        }
        product *= p;
    }
    if product > 1 {
        sum += Dd::from_u128(product).ln();
    }
    sum
}

/// θ at every entry of `primes`, each in double-double.
pub fn extended_prefix(primes: &[u32]) -> Vec<Dd> {
    let mut sum = Dd::ZERO;
    primes
        .iter()
        .map(|&p| {
            sum += Dd::from_u64(p as u64).ln();
            sum
        })
        .collect()
}

/// θ(x) by direct double-double summation over a plain sieve, independent
/// of [`ThetaTable`]. Fails above [`EXTENDED_CAP`].
pub fn extended_theta(x: f64) -> Result<Dd> {
    extended_theta_capped(x, EXTENDED_CAP)
}

pub fn extended_theta_capped(x: f64, cap: f64) -> Result<Dd> {
    if x.is_nan() {
        return Err(Error::Range("θ query is NaN".into()));
    }
    if x > cap {
        return Err(Error::Resource(format!(
            "extended θ requested at {x}, above the cap {cap}"
        )));
    }
    if x < 2.0 {
        return Ok(Dd::ZERO);
    }
    let n = x.floor() as u64;
    Ok(extended_theta_of_primes(&sieve::simple_primes(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(s: &str) -> Dd {
        s.parse().unwrap()
    }

    #[test]
    fn small_tables() {
        let t = build_theta_table(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        assert!((t.theta()[3] - 210f64.ln()).abs() <= t.err_budget()[3]);

        let t = build_theta_table(2).unwrap();
        assert_eq!(t.primes(), &[2]);
        assert_eq!(t.theta()[0], 2f64.ln());

        // θ(100) from a 45-digit reference sum over the 25 primes.
        let t = build_theta_table(100).unwrap();
        assert_eq!(t.len(), 25);
        let reference = dd("83.72839039906392294502692284987910");
        assert!((Dd::from_f64(t.theta()[24]) - reference).abs().to_f64() <= t.err_budget()[24]);
    }

    #[test]
    fn theta_at_step_semantics() {
        let t = build_theta_table(10).unwrap();
        let v = t.theta_at(1.5).unwrap();
        assert_eq!((v.value, v.err), (0.0, 0.0));
        assert_eq!(
            t.theta_at(7.0).unwrap().value,
            t.theta_at(10.0).unwrap().value
        );
        assert_eq!(t.theta_at(6.999).unwrap().value, t.theta()[2]);
        assert_eq!(t.theta_at(2.0).unwrap().value, 2f64.ln());
        assert!(matches!(t.theta_at(10.5), Err(Error::Range(_))));
        assert!(matches!(t.theta_at(0.0), Err(Error::Range(_))));
    }

    #[test]
    fn extended_theta_examples() {
        let v = extended_theta(10.0).unwrap();
        assert!(
            (v - dd("5.34710753071746868051858943505006964"))
                .abs()
                .to_f64()
                < 1e-29
        );
        let v = extended_theta(2.0).unwrap();
        assert!(
            (v - dd("0.693147180559945309417232121458176568"))
                .abs()
                .to_f64()
                < 1e-31
        );
        assert_eq!(extended_theta(1.0).unwrap(), Dd::ZERO);
        assert!(matches!(extended_theta(2e8), Err(Error::Resource(_))));
        let v = extended_theta(100.0).unwrap();
        assert!(
            (v - dd("83.7283903990639229450269228498790999"))
                .abs()
                .to_f64()
                < 1e-28
        );
    }

    #[test]
    fn table_within_budget_at_one_million() {
        let t = build_theta_table(1_000_000).unwrap();
        let v = t.theta_at(1e6).unwrap();
        let exact = extended_theta(1e6).unwrap();
        assert!((Dd::from_f64(v.value) - exact).abs().to_f64() <= v.err);
    }

    #[test]
    fn extended_prefix_matches_grouped_sum() {
        let t = build_theta_table(5000).unwrap();
        let prefix = extended_prefix(t.primes());
        for k in [0, 1, 10, 100, t.len() - 1] {
            let d = (prefix[k] - t.extended_at_index(k)).abs().to_f64();
            assert!(d < 1e-27, "k={k} d={d}");
        }
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let t = build_theta_table(100_000).unwrap();
        let path = cache_path(dir.path(), 100_000);
        t.save(&path).unwrap();
        assert_eq!(ThetaTable::load(&path).unwrap(), t);

        let mut bytes = fs::read(&path).unwrap();
        let theta_start = 5 + 16 + 2 * t.len();
        let bad = dir.path().join("bad.thet");
        for j in 0..t.len() {
            let o = theta_start + 8 * j;
            bytes[o..o + 8].copy_from_slice(&(t.theta()[j] * 1.001).to_le_bytes());
        }
        fs::write(&bad, &bytes).unwrap();
        assert!(matches!(ThetaTable::load(&bad), Err(Error::Cache(_))));

        fs::write(&bad, b"NOPE1").unwrap();
        assert!(ThetaTable::load(&bad).is_err());

        let loaded = load_or_build(
            dir.path(),
            100_000,
            &SieveConfig::default(),
            &Exec::sequential(),
        )
        .unwrap();
        assert_eq!(loaded, t);
    }
}
