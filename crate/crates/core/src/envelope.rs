//! The envelope `g(x) = amp·x·(ln x)^pow·exp(−decay·√ln x)`.

use crate::bounds::{BoundFamily, DerivedBound};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::theta::UNIT_ROUNDOFF;

/// Right-hand side of a bound, with the point beyond which it is
/// certified strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFn {
    amp: Dd,
    pow: Dd,
    decay: Dd,
    amp_f: f64,
    pow_f: f64,
    decay_f: f64,
    monotone_from: f64,
}

/// An `f64` evaluation of `g` together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    pub err: f64,
}

/// Smallest `x ≥ 1` beyond which `ln x + pow − (decay/2)·√ln x > 0`, so
/// that `g` is strictly increasing there.
///
/// With `u = √ln x` the condition is `u² − (decay/2)·u + pow > 0`; when the
/// discriminant is negative it holds for every `x > 1`. The amplitude does
/// not enter. The returned float is rounded upward.
pub fn envelope_monotone_from(_amp: f64, pow: f64, decay: f64) -> f64 {
    monotone_from_dd(Dd::from_f64(pow), Dd::from_f64(decay))
}

fn monotone_from_dd(pow: Dd, decay: Dd) -> f64 {
    let half = decay.mul_pow2(0.5);
    let disc = half.sqr() - pow.mul_f64(4.0);
    if disc.is_sign_negative() {
        return 1.0;
    }
    let root = (half + disc.sqrt()).mul_pow2(0.5);
    let x = root.sqr().exp();
    // Round outward past any double-double error.
    x.to_f64().next_up().next_up().max(1.0)
}

impl EnvelopeFn {
    pub fn new(amp: Dd, pow: Dd, decay: Dd) -> Result<EnvelopeFn> {
        if !(amp > Dd::ZERO) || !amp.is_finite() {
            return Err(Error::Domain("envelope amplitude must be positive".into()));
        }
        if pow.is_sign_negative() || !pow.is_finite() {
            return Err(Error::Domain(
                "envelope log power must be nonnegative".into(),
            ));
        }
        if !(decay > Dd::ZERO) || !decay.is_finite() {
            return Err(Error::Domain("envelope decay must be positive".into()));
        }
        Ok(EnvelopeFn {
            amp,
            pow,
            decay,
            amp_f: amp.to_f64(),
            pow_f: pow.to_f64(),
            decay_f: decay.to_f64(),
            monotone_from: monotone_from_dd(pow, decay),
        })
    }

    /// The de la Vallée Poussin form `ã·x·exp(−c̃√ln x)`.
    pub fn poussin(tilde_a: Dd, tilde_c: Dd) -> Result<EnvelopeFn> {
        EnvelopeFn::new(tilde_a, Dd::ZERO, tilde_c)
    }

    pub fn from_f64(amp: f64, pow: f64, decay: f64) -> Result<EnvelopeFn> {
        EnvelopeFn::new(amp.into(), pow.into(), decay.into())
    }

    pub fn from_family(family: &BoundFamily) -> EnvelopeFn {
        EnvelopeFn::new(family.a().value(), family.b().value(), family.c().value())
            .expect("bound families are validated on construction")
    }

    pub fn from_derived(bound: &DerivedBound) -> EnvelopeFn {
        EnvelopeFn::poussin(bound.tilde_a(), bound.tilde_c())
            .expect("derived bounds carry positive constants")
    }

    /// Same shape with a different amplitude.
    pub fn with_amp(&self, amp: Dd) -> Result<EnvelopeFn> {
        EnvelopeFn::new(amp, self.pow, self.decay)
    }

    pub fn amp(&self) -> Dd {
        self.amp
    }

    pub fn pow(&self) -> Dd {
        self.pow
    }

    pub fn decay(&self) -> Dd {
        self.decay
    }

    pub fn monotone_from(&self) -> f64 {
        self.monotone_from
    }

    /// `g(x)` in `f64` for `x > 1`, with a first-order bound on the combined
    /// rounding of the parameters, `ln`, `sqrt`, `exp`, `powf` and the
    /// products (each libm call taken as accurate to one ulp).
    pub fn eval(&self, x: f64) -> EnvelopeValue {
        let l = x.ln();
        let s = l.sqrt();
        let mut value = self.amp_f * x * (-self.decay_f * s).exp();
        let mut rel = 12.0 + 4.0 * self.decay_f * s;
        if self.pow_f != 0.0 {
            value *= l.powf(self.pow_f);
            rel += self.pow_f * (2.0 + l.ln().abs()) + 2.0;
        }
        EnvelopeValue {
            value,
            err: 2.0 * UNIT_ROUNDOFF * rel * value,
        }
    }

    /// `g(x)` in double-double.
    pub fn eval_dd(&self, x: Dd) -> Dd {
        let l = x.ln();
        let mut exponent = -(self.decay * l.sqrt());
        if !self.pow.is_zero() {
            exponent += self.pow * l.ln();
        }
        self.amp * x * exponent.exp()
    }

    /// Upper bound on `g'` over `[u, v]` (`u > 1`), from
    /// `g' = (g/x)·(1 + pow/ln x − decay/(2√ln x)) ≤ (g(v)/u)·(1 + pow/ln u)`.
    pub fn slope_upper(&self, u: f64, v: f64) -> f64 {
        let gv = self.eval(v);
        let factor = 1.0 + self.pow_f / u.ln();
        (gv.value + gv.err) / u * factor * (1.0 + 1e-12)
    }
}
