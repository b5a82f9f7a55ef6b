//! Rigorous verification of `|θ(x) − x| < g(x)` for every real `x` in a
//! range.
//!
//! θ is constant on each prime-gap piece `[p_k, p_{k+1})`, with value `T`.
//! On such a piece:
//!
//! * surplus side: `T − x` decreases while `g` increases, so the condition
//!   holds on the whole piece iff it holds at the left endpoint;
//! * deficit side: `x − T` and `g` both increase. A subinterval `[u, v]` is
//!   cleared when `v − T < g(u)`; otherwise its midpoint is probed and the
//!   two halves are examined in turn, up to a fixed depth.
//!
//! Every `f64` comparison carries the θ error budget and the envelope
//! evaluation budget. Comparisons whose margin falls inside the budget are
//! repeated in double-double; if they are still too close the result is
//! `Inconclusive`, never a guess.

use std::cell::OnceCell;
use std::sync::{Arc, Mutex};

use crate::bounds::BoundFamily;
use crate::dd::Dd;
use crate::envelope::EnvelopeFn;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::theta::{extended_prefix, ThetaTable, UNIT_ROUNDOFF};

/// Relative margin below which a double-double comparison is a tie.
pub const TIE_TOLERANCE: f64 = 1e-25;

/// Default bisection depth per prime gap.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Prime-gap pieces per work unit.
const CHUNK_GAPS: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrecisionPolicy {
    /// `f64` with budgets; escalate only comparisons inside the budget.
    #[default]
    Fast,
    /// Decide every comparison in double-double.
    Rigorous,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub precision: PrecisionPolicy,
    pub max_depth: u32,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            precision: PrecisionPolicy::Fast,
            max_depth: DEFAULT_MAX_DEPTH,
            exec: Exec::parallel(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails => "Fails",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

/// Result of a range verification.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub status: Verdict,
    pub lo: f64,
    pub hi: f64,
    /// Offending (or undecidable) point for `Fails` / `Inconclusive`.
    pub witness_x: Option<f64>,
    /// `|θ(w) − w|` at the witness.
    pub lhs: Option<f64>,
    /// `g(w)` at the witness.
    pub rhs: Option<f64>,
    /// For `Holds`: a certified lower bound on `min (g(x) − |θ(x) − x|)`.
    pub slack: Option<f64>,
    /// Some gap was only closed by the limit condition at its open end.
    pub limit_touch: bool,
    /// Largest θ error budget used.
    pub theta_err: f64,
    /// Largest envelope evaluation budget used.
    pub envelope_err: f64,
    /// Comparisons re-evaluated in double-double.
    pub escalations: u64,
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        self.status == Verdict::Holds
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// `T − x`
    Surplus,
    /// `x − T`
    Deficit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Below,
    Above,
    Tie,
}

#[derive(Clone, Copy, Debug)]
struct Witness {
    x: f64,
    status: Verdict,
}

#[derive(Clone, Debug)]
struct ChunkReport {
    fail: Option<Witness>,
    inconclusive: Option<Witness>,
    slack: f64,
    limit_touch: bool,
    theta_err: f64,
    envelope_err: f64,
    escalations: u64,
}

impl ChunkReport {
    fn new() -> Self {
        ChunkReport {
            fail: None,
            inconclusive: None,
            slack: f64::INFINITY,
            limit_touch: false,
            theta_err: 0.0,
            envelope_err: 0.0,
            escalations: 0,
        }
    }

    fn record(&mut self, w: Witness) {
        match w.status {
            Verdict::Fails if self.fail.is_none() => self.fail = Some(w),
            Verdict::Inconclusive if self.inconclusive.is_none() => self.inconclusive = Some(w),
            _ => {}
        }
    }
}

/// One prime-gap piece: θ equals `theta[k]` on `[u, v)` (or `[u, v]`).
struct Piece {
    u: f64,
    v: f64,
    v_closed: bool,
}

struct PieceCtx<'a> {
    env: &'a EnvelopeFn,
    t: f64,
    t_err: f64,
    t_dd: OnceCell<Dd>,
    verifier: &'a Verifier<'a>,
    prefix: Option<&'a [Dd]>,
    k: usize,
    report: &'a mut ChunkReport,
}

impl PieceCtx<'_> {
    fn theta_dd(&self) -> Dd {
        *self.t_dd.get_or_init(|| match self.prefix {
            Some(p) => p[self.k],
            None => self.verifier.table.extended_at_index(self.k),
        })
    }

    /// Sign of `lhs(x_lhs) − g(x_env)`.
    fn compare(&mut self, side: Side, x_lhs: f64, x_env: f64) -> Cmp {
        let g = self.env.eval(x_env);
        self.report.envelope_err = self.report.envelope_err.max(g.err);
        self.report.theta_err = self.report.theta_err.max(self.t_err);
        if self.verifier.opts.precision == PrecisionPolicy::Fast {
            let lhs = match side {
                Side::Surplus => self.t - x_lhs,
                Side::Deficit => x_lhs - self.t,
            };
            let d = lhs - g.value;
            let budget = self.t_err
                + g.err
                + 2.0 * UNIT_ROUNDOFF * (self.t.abs() + x_lhs.abs() + lhs.abs() + g.value);
            if d < -budget {
                return Cmp::Below;
            }
            if d > budget {
                return Cmp::Above;
            }
        }
        self.report.escalations += 1;
        let t = self.theta_dd();
        let x = Dd::from_f64(x_lhs);
        let lhs = match side {
            Side::Surplus => t - x,
            Side::Deficit => x - t,
        };
        let g = self.env.eval_dd(Dd::from_f64(x_env));
        let d = lhs - g;
        let scale = lhs.abs().max(g.abs()).to_f64();
        if d.abs().to_f64() <= TIE_TOLERANCE * scale {
            Cmp::Tie
        } else if d.is_sign_negative() {
            Cmp::Below
        } else {
            Cmp::Above
        }
    }

    fn margin(&self, side: Side, x_lhs: f64, x_env: f64) -> f64 {
        let lhs = match side {
            Side::Surplus => self.t - x_lhs,
            Side::Deficit => x_lhs - self.t,
        };
        let g = self.env.eval(x_env);
        let budget = self.t_err
            + g.err
            + 2.0 * UNIT_ROUNDOFF * (self.t.abs() + x_lhs.abs() + lhs.abs() + g.value);
        (g.value - lhs - budget).max(0.0)
    }

    /// Checks `|T − x| < g(x)` at an attained point.
    fn point(&mut self, x: f64) -> Option<Witness> {
        for side in [Side::Surplus, Side::Deficit] {
            match self.compare(side, x, x) {
                Cmp::Below => {
                    let m = self.margin(side, x, x);
                    self.report.slack = self.report.slack.min(m);
                }
                Cmp::Above => {
                    return Some(Witness {
                        x,
                        status: Verdict::Fails,
                    })
                }
                Cmp::Tie => {
                    return Some(Witness {
                        x,
                        status: Verdict::Inconclusive,
                    })
                }
            }
        }
        None
    }

    /// Returns a failure witness, recording inconclusive points on the way.
    fn run(&mut self, piece: &Piece) -> Option<Witness> {
        // The surplus side is decided at `u`; the deficit side at points.
        if let Some(w) = self.point(piece.u) {
            if w.status == Verdict::Fails {
                return Some(w);
            }
            self.report.record(w);
        }
        if piece.v_closed && piece.v > piece.u {
            if let Some(w) = self.point(piece.v) {
                if w.status == Verdict::Fails {
                    return Some(w);
                }
                self.report.record(w);
            }
        }
        if piece.v > piece.u {
            return self.bisect(piece);
        }
        None
    }

    fn bisect(&mut self, piece: &Piece) -> Option<Witness> {
        let max_depth = self.verifier.opts.max_depth;
        let mut stack = vec![(piece.u, piece.v, 0u32)];
        while let Some((u, v, depth)) = stack.pop() {
            if self.compare(Side::Deficit, v, u) == Cmp::Below {
                let m = self.margin(Side::Deficit, v, u);
                self.report.slack = self.report.slack.min(m);
                continue;
            }
            let mid = 0.5 * (u + v);
            if depth >= max_depth || !(mid > u && mid < v) {
                let open_end = v == piece.v && !piece.v_closed;
                // At the open end of the gap the supremum is not attained:
                // `v − T ≤ g(v)` together with `g' < 1` on `[u, v]` makes
                // `x − T − g(x)` increasing towards a nonpositive limit.
                if open_end
                    && self.compare(Side::Deficit, v, v) != Cmp::Above
                    && self.verifier.slope_ok(self.env, u, v)
                {
                    self.report.limit_touch = true;
                    self.report.slack = self.report.slack.min(0.0);
                    continue;
                }
                self.report.record(Witness {
                    x: u,
                    status: Verdict::Inconclusive,
                });
                continue;
            }
            match self.compare(Side::Deficit, mid, mid) {
                Cmp::Above => {
                    return Some(Witness {
                        x: mid,
                        status: Verdict::Fails,
                    })
                }
                Cmp::Tie => self.report.record(Witness {
                    x: mid,
                    status: Verdict::Inconclusive,
                }),
                Cmp::Below => {
                    let m = self.margin(Side::Deficit, mid, mid);
                    self.report.slack = self.report.slack.min(m);
                }
            }
            stack.push((mid, v, depth + 1));
            stack.push((u, mid, depth + 1));
        }
        None
    }
}

/// Shared state for repeated verifications against one table.
pub struct Verifier<'a> {
    table: &'a ThetaTable,
    opts: VerifyOptions,
    prefix: Mutex<Arc<Vec<Dd>>>,
}

impl<'a> Verifier<'a> {
    pub fn new(table: &'a ThetaTable, opts: VerifyOptions) -> Verifier<'a> {
        Verifier {
            table,
            opts,
            prefix: Mutex::new(Arc::new(Vec::new())),
        }
    }

    pub fn table(&self) -> &ThetaTable {
        self.table
    }

    pub fn options(&self) -> &VerifyOptions {
        &self.opts
    }

    fn slope_ok(&self, env: &EnvelopeFn, u: f64, v: f64) -> bool {
        env.slope_upper(u, v) < 1.0
    }

    /// Double-double θ prefix covering index `k`, grown on demand.
    fn prefix_upto(&self, k: usize) -> Arc<Vec<Dd>> {
        let mut guard = self.prefix.lock().expect("prefix lock");
        if guard.len() <= k {
            let want = (k + 1).max(guard.len() * 2).min(self.table.len());
            *guard = Arc::new(extended_prefix(&self.table.primes()[..want]));
        }
        Arc::clone(&guard)
    }

    fn validate_range(&self, env: &EnvelopeFn, lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
            return Err(Error::Range(format!("empty or invalid range [{lo}, {hi}]")));
        }
        if lo < 2.0 {
            return Err(Error::Range(format!("range start {lo} is below 2")));
        }
        if lo < env.monotone_from() {
            return Err(Error::Range(format!(
                "range start {lo} is below {}, where the envelope is certified increasing",
                env.monotone_from()
            )));
        }
        if hi > self.table.limit() as f64 {
            return Err(Error::Range(format!(
                "range end {hi} exceeds the sieve limit {}",
                self.table.limit()
            )));
        }
        Ok(())
    }

    /// Decides whether `|θ(x) − x| < g(x)` for all real `x ∈ [lo, hi]`.
    pub fn check_range(&self, env: &EnvelopeFn, lo: f64, hi: f64) -> Result<CheckOutcome> {
        self.validate_range(env, lo, hi)?;
        let table = self.table;
        let primes = table.primes();
        let k_lo = table.index_at(lo).expect("lo >= 2");
        let k_hi = table.index_at(hi).expect("hi >= 2");

        let prefix = match self.opts.precision {
            PrecisionPolicy::Rigorous => Some(self.prefix_upto(k_hi)),
            PrecisionPolicy::Fast => None,
        };
        let prefix_slice = prefix.as_ref().map(|p| p.as_slice());

        let chunks: Vec<(usize, usize)> = (k_lo..=k_hi)
            .step_by(CHUNK_GAPS)
            .map(|s| (s, (s + CHUNK_GAPS - 1).min(k_hi)))
            .collect();

        let run_chunk = |&(first, last): &(usize, usize)| -> ChunkReport {
            let mut report = ChunkReport::new();
            for k in first..=last {
                let piece = Piece {
                    u: if k == k_lo { lo } else { primes[k] as f64 },
                    v: if k == k_hi { hi } else { primes[k + 1] as f64 },
                    v_closed: k == k_hi,
                };
                let mut ctx = PieceCtx {
                    env,
                    t: table.theta()[k],
                    t_err: table.err_budget()[k],
                    t_dd: OnceCell::new(),
                    verifier: self,
                    prefix: prefix_slice,
                    k,
                    report: &mut report,
                };
                if let Some(w) = ctx.run(&piece) {
                    report.record(w);
                    break;
                }
            }
            report
        };

        let reports = if self.opts.exec.is_parallel() && chunks.len() > 1 {
            self.opts.exec.map(&chunks, run_chunk)
        } else {
            // Sequentially, stop at the first failing chunk; the merge below
            // never looks past it, so the outcome is the same.
            let mut out = Vec::new();
            for c in &chunks {
                let r = run_chunk(c);
                let failed = r.fail.is_some();
                out.push(r);
                if failed {
                    break;
                }
            }
            out
        };
        Ok(self.merge(env, lo, hi, reports))
    }

    fn merge(&self, env: &EnvelopeFn, lo: f64, hi: f64, reports: Vec<ChunkReport>) -> CheckOutcome {
        let mut acc = ChunkReport::new();
        for r in reports {
            acc.slack = acc.slack.min(r.slack);
            acc.limit_touch |= r.limit_touch;
            acc.theta_err = acc.theta_err.max(r.theta_err);
            acc.envelope_err = acc.envelope_err.max(r.envelope_err);
            acc.escalations += r.escalations;
            if acc.inconclusive.is_none() {
                acc.inconclusive = r.inconclusive;
            }
            if let Some(f) = r.fail {
                acc.fail = Some(f);
                break;
            }
        }
        let witness = acc.fail.or(acc.inconclusive);
        let (status, slack) = match witness {
            Some(w) => (w.status, None),
            None => (Verdict::Holds, Some(acc.slack)),
        };
        let (lhs, rhs) = match witness {
            Some(w) => {
                let t = self.table.theta_at(w.x).map(|v| v.value).unwrap_or(0.0);
                (Some((t - w.x).abs()), Some(env.eval(w.x).value))
            }
            None => (None, None),
        };
        CheckOutcome {
            status,
            lo,
            hi,
            witness_x: witness.map(|w| w.x),
            lhs,
            rhs,
            slack,
            limit_touch: acc.limit_touch,
            theta_err: acc.theta_err,
            envelope_err: acc.envelope_err,
            escalations: acc.escalations,
        }
    }

    /// Least integer `m ≥ 2` such that the bound holds on `[m, x0]` while
    /// failing somewhere on `[m − 1, m]` (or `m = 2`). Validity for
    /// `x ≥ x0` is taken from the parent bound, not verified.
    pub fn find_x_star(&self, env: &EnvelopeFn, x0: f64) -> Result<XStar> {
        if !(x0 >= 2.0) || x0 > self.table.limit() as f64 {
            return Err(Error::Range(format!(
                "x0 = {x0} must lie in [2, {}]",
                self.table.limit()
            )));
        }
        if env.monotone_from() > 2.0 {
            return Err(Error::Range(format!(
                "envelope is only certified increasing from {}",
                env.monotone_from()
            )));
        }
        let primes = self.table.primes();
        let conclude = |m: u64| -> XStar {
            XStar {
                x_star: m,
                x0,
                not_extendable: x0 > 2.0 && m as f64 >= x0,
            }
        };
        let settle = |out: CheckOutcome| -> Result<bool> {
            match out.status {
                Verdict::Holds => Ok(true),
                Verdict::Fails => Ok(false),
                Verdict::Inconclusive => Err(Error::Inconclusive(Box::new(out))),
            }
        };

        // Walk down one prime gap at a time.
        let mut upper = x0;
        let failing_gap_top = loop {
            if upper <= 2.0 {
                return Ok(conclude(2));
            }
            let below = primes.partition_point(|&p| (p as f64) < upper);
            let p = primes[below - 1] as f64;
            if settle(self.check_range(env, p, upper)?)? {
                upper = p;
            } else {
                break upper;
            }
        };

        // Refine to the integer boundary inside the failing gap.
        let mut m = failing_gap_top.ceil() as u64;
        while m > 2 {
            if settle(self.check_range(env, (m - 1) as f64, m as f64)?)? {
                m -= 1;
            } else {
                break;
            }
        }
        Ok(conclude(m))
    }

    /// Smallest prefactor (to relative tolerance 1e−9) for which the
    /// de la Vallée Poussin envelope with decay `tilde_c` holds on
    /// `[lo, hi]`. The returned `value` is one that verifiably holds.
    pub fn min_prefactor(&self, tilde_c: Dd, lo: f64, hi: f64) -> Result<MinPrefactor> {
        const REL_TOL: f64 = 1e-9;
        let shape = EnvelopeFn::poussin(Dd::ONE, tilde_c)?;
        self.validate_range(&shape, lo, hi)?;
        let check = |a: f64| self.check_range(&shape.with_amp(Dd::from_f64(a))?, lo, hi);

        let mut upper = 1.0f64;
        let mut upper_out = check(upper)?;
        while !upper_out.holds() {
            upper *= 2.0;
            if upper > 1e18 {
                return Err(Error::Range(
                    "no prefactor below 1e18 makes the bound hold".into(),
                ));
            }
            upper_out = check(upper)?;
        }
        let mut lower = upper;
        loop {
            lower *= 0.5;
            if lower < 1e-300 {
                return Err(Error::Range(
                    "bound holds for every tested prefactor".into(),
                ));
            }
            let out = check(lower)?;
            if !out.holds() {
                break;
            }
            upper = lower;
            upper_out = out;
        }
        while upper - lower > REL_TOL * upper {
            let mid = 0.5 * (lower + upper);
            let out = check(mid)?;
            if out.holds() {
                upper = mid;
                upper_out = out;
            } else {
                lower = mid;
            }
        }
        Ok(MinPrefactor {
            value: upper,
            lower,
            outcome: upper_out,
        })
    }

    /// Checks a source family's own envelope `a·x·(ln x)^b·exp(−c√ln x)`.
    pub fn verify_parent(&self, family: &BoundFamily, lo: f64, hi: f64) -> Result<CheckOutcome> {
        let x0 = family.x0().as_f64().ok_or_else(|| {
            Error::Range(format!("threshold {} is beyond desk scale", family.x0()))
        })?;
        if lo < x0 {
            return Err(Error::Range(format!(
                "range start {lo} is below the family threshold {x0}"
            )));
        }
        self.check_range(&EnvelopeFn::from_family(family), lo, hi)
    }
}

/// Result of [`Verifier::find_x_star`].
#[derive(Clone, Debug, PartialEq)]
pub struct XStar {
    pub x_star: u64,
    /// Upper end of the computationally verified interval `[x_star, x0]`.
    pub x0: f64,
    /// The bound could not be extended below `x0`.
    pub not_extendable: bool,
}

impl XStar {
    pub fn provenance(&self) -> String {
        format!(
            "verified for all real x in [{}, {}]; validity for x >= {} rests on the parent bound",
            self.x_star, self.x0, self.x0
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinPrefactor {
    /// Certified: the bound with this prefactor holds on the range.
    pub value: f64,
    /// Largest tested prefactor that did not verify.
    pub lower: f64,
    pub outcome: CheckOutcome,
}

pub fn check_range(
    env: &EnvelopeFn,
    lo: f64,
    hi: f64,
    table: &ThetaTable,
    opts: &VerifyOptions,
) -> Result<CheckOutcome> {
    Verifier::new(table, opts.clone()).check_range(env, lo, hi)
}

pub fn find_x_star(
    env: &EnvelopeFn,
    x0: f64,
    table: &ThetaTable,
    opts: &VerifyOptions,
) -> Result<XStar> {
    Verifier::new(table, opts.clone()).find_x_star(env, x0)
}

pub fn min_prefactor(
    tilde_c: Dd,
    lo: f64,
    hi: f64,
    table: &ThetaTable,
    opts: &VerifyOptions,
) -> Result<MinPrefactor> {
    Verifier::new(table, opts.clone()).min_prefactor(tilde_c, lo, hi)
}

pub fn verify_parent(
    family: &BoundFamily,
    lo: f64,
    hi: f64,
    table: &ThetaTable,
    opts: &VerifyOptions,
) -> Result<CheckOutcome> {
    Verifier::new(table, opts.clone()).verify_parent(family, lo, hi)
}
