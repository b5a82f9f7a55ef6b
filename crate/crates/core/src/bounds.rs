//! Bound families of the generalized form
//! `|θ(x) − x| < a·x·(ln x)^b·exp(−c·√ln x)` for `x ≥ x0`, the built-in
//! catalog of published families, and the transformation that trades the
//! `(ln x)^b` factor for a smaller decay rate:
//!
//! ```text
//! (ln x)^b·exp(−c√ln x) ≤ { (2b/(c−c̃))^{2b}·e^{−2b} }·exp(−c̃√ln x),   0 < c̃ < c
//! ```
//!
//! The braced factor is the global maximum of `u^{2b}·e^{−(c−c̃)u}` over
//! `u = √ln x ≥ 0`, attained at `u = 2b/(c−c̃)`. All arithmetic here runs in
//! double-double precision.

use std::borrow::Cow;
use std::fmt;

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Version of the embedded catalog data.
pub const CATALOG_VERSION: u32 = 1;

/// A number as printed in a source table, together with its value.
///
/// The text is kept verbatim so that catalog entries re-serialize to the
/// exact published digits (`0.2196138920`, `1/4`, `9.40`).
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    text: Cow<'static, str>,
    value: Dd,
}

impl Coefficient {
    pub fn parse(text: impl Into<Cow<'static, str>>) -> Result<Coefficient> {
        let text = text.into();
        let value = parse_number(&text)?;
        Ok(Coefficient { text, value })
    }

    /// A coefficient with no printed form; rendered with 32 significant digits.
    pub fn from_value(value: Dd) -> Coefficient {
        Coefficient {
            text: Cow::Owned(value.to_string()),
            value,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn value(&self) -> Dd {
        self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Accepts decimals, fractions and integer powers `B^E` (as in `10^10`).
fn parse_number(text: &str) -> Result<Dd> {
    let t = text.trim();
    if let Some((base, exp)) = t.split_once('^') {
        let base: Dd = base.trim().parse()?;
        let exp: i32 = exp
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent in {text:?}")))?;
        if base == Dd::from_f64(10.0) {
            return Ok(Dd::pow10(exp));
        }
        return Ok(base.powf(Dd::from_f64(exp as f64)));
    }
    t.parse()
}

/// A validity threshold. Thresholds such as `exp(10^10)` overflow every
/// hardware float, so they are kept symbolically as a power of `e`.
#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    Finite(Coefficient),
    /// `exp(exponent)`.
    ExpOf(Coefficient),
}

impl Threshold {
    pub fn parse(text: &str) -> Result<Threshold> {
        let t = text.trim();
        match t.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => Ok(Threshold::ExpOf(Coefficient::parse(
                inner.trim().to_owned(),
            )?)),
            None => Ok(Threshold::Finite(Coefficient::parse(t.to_owned())?)),
        }
    }

    pub fn finite(x: f64) -> Threshold {
        Threshold::Finite(Coefficient::from_value(Dd::from_f64(x)))
    }

    /// Natural logarithm of the threshold.
    pub fn ln(&self) -> Dd {
        match self {
            Threshold::Finite(v) => v.value().ln(),
            Threshold::ExpOf(e) => e.value(),
        }
    }

    /// The threshold as a machine float, when it is one the sieve could reach.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Threshold::Finite(v) => Some(v.to_f64()),
            Threshold::ExpOf(e) => {
                let x = e.value().exp().to_f64();
                (x.is_finite() && x < 1e18).then_some(x)
            }
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(v) => write!(f, "{v}"),
            Threshold::ExpOf(e) => write!(f, "exp({e})"),
        }
    }
}

/// A source bound `|θ(x) − x| < a·x·(ln x)^b·exp(−c√ln x)` for `x ≥ x0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundFamily {
    a: Coefficient,
    b: Coefficient,
    c: Coefficient,
    x0: Threshold,
    source: String,
}

impl BoundFamily {
    pub fn new(
        a: Coefficient,
        b: Coefficient,
        c: Coefficient,
        x0: Threshold,
        source: impl Into<String>,
    ) -> Result<BoundFamily> {
        if !(a.value() > Dd::ZERO) {
            return Err(Error::Domain(format!("prefactor a = {a} must be positive")));
        }
        if b.value() < Dd::ZERO || !b.value().is_finite() {
            return Err(Error::Domain(format!(
                "log power b = {b} must be nonnegative"
            )));
        }
        if !(c.value() > Dd::ZERO) {
            return Err(Error::Domain(format!("decay c = {c} must be positive")));
        }
        if !(x0.ln() >= Dd::from_f64(2.0).ln()) {
            return Err(Error::Domain(format!(
                "threshold x0 = {x0} must be at least 2"
            )));
        }
        Ok(BoundFamily {
            a,
            b,
            c,
            x0,
            source: source.into(),
        })
    }

    /// Convenience constructor from printed strings.
    pub fn parse(a: &str, b: &str, c: &str, x0: &str, source: &str) -> Result<BoundFamily> {
        BoundFamily::new(
            Coefficient::parse(a.to_owned())?,
            Coefficient::parse(b.to_owned())?,
            Coefficient::parse(c.to_owned())?,
            Threshold::parse(x0)?,
            source,
        )
    }

    pub fn a(&self) -> &Coefficient {
        &self.a
    }

    pub fn b(&self) -> &Coefficient {
        &self.b
    }

    pub fn c(&self) -> &Coefficient {
        &self.c
    }

    pub fn x0(&self) -> &Threshold {
        &self.x0
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

// (source, a, b, c, x0), digits as published.
const CATALOG_ROWS: [(&str, &str, &str, &str, &str); 18] = [
    ("Schoenfeld", "0.2196138920", "1/4", "0.3219796502", "101"),
    ("Trudgian", "0.2428127763", "1/4", "0.3935970880", "149"),
    (
        "Fiori-Kadiri-Swidinsky",
        "9.220226",
        "3/2",
        "0.8476836",
        "2",
    ),
    ("Johnston-Yang", "9.40", "1.515", "0.8274", "2"),
    (
        "Johnston-Yang exp(3000)",
        "8.87",
        "1.514",
        "0.8288",
        "exp(3000)",
    ),
    (
        "Johnston-Yang exp(4000)",
        "8.16",
        "1.512",
        "0.8309",
        "exp(4000)",
    ),
    (
        "Johnston-Yang exp(5000)",
        "7.66",
        "1.511",
        "0.8324",
        "exp(5000)",
    ),
    (
        "Johnston-Yang exp(6000)",
        "7.23",
        "1.510",
        "0.8335",
        "exp(6000)",
    ),
    (
        "Johnston-Yang exp(7000)",
        "7.00",
        "1.510",
        "0.8345",
        "exp(7000)",
    ),
    (
        "Johnston-Yang exp(8000)",
        "6.79",
        "1.509",
        "0.8353",
        "exp(8000)",
    ),
    (
        "Johnston-Yang exp(9000)",
        "6.59",
        "1.509",
        "0.8359",
        "exp(9000)",
    ),
    (
        "Johnston-Yang exp(10000)",
        "6.73",
        "1.509",
        "0.8359",
        "exp(10000)",
    ),
    (
        "Johnston-Yang exp(10^5)",
        "23.14",
        "1.503",
        "0.8659",
        "exp(10^5)",
    ),
    (
        "Johnston-Yang exp(10^6)",
        "38.58",
        "1.502",
        "1.0318",
        "exp(10^6)",
    ),
    (
        "Johnston-Yang exp(10^7)",
        "42.91",
        "1.501",
        "1.0706",
        "exp(10^7)",
    ),
    (
        "Johnston-Yang exp(10^8)",
        "44.42",
        "1.501",
        "1.0839",
        "exp(10^8)",
    ),
    (
        "Johnston-Yang exp(10^9)",
        "44.98",
        "1.501",
        "1.0886",
        "exp(10^9)",
    ),
    (
        "Johnston-Yang exp(10^10)",
        "45.18",
        "1.501",
        "1.0903",
        "exp(10^10)",
    ),
];

/// The four widely applicable families followed by the fourteen
/// restricted-range Johnston–Yang families.
pub fn catalog() -> Vec<BoundFamily> {
    CATALOG_ROWS
        .iter()
        .map(|&(source, a, b, c, x0)| {
            BoundFamily::new(
                Coefficient::parse(a).expect("catalog a"),
                Coefficient::parse(b).expect("catalog b"),
                Coefficient::parse(c).expect("catalog c"),
                Threshold::parse(x0).expect("catalog x0"),
                source,
            )
            .expect("catalog entry")
        })
        .collect()
}

/// Finds a catalog family by source label (exact match first, then
/// case-insensitive).
pub fn lookup(source: &str) -> Result<BoundFamily> {
    let all = catalog();
    if let Some(f) = all.iter().find(|f| f.source == source) {
        return Ok(f.clone());
    }
    all.into_iter()
        .find(|f| f.source.eq_ignore_ascii_case(source.trim()))
        .ok_or_else(|| Error::UnknownFamily(source.to_owned()))
}

fn check_decay(c: Dd, tilde_c: Dd) -> Result<()> {
    if !(tilde_c > Dd::ZERO) || !(tilde_c < c) {
        return Err(Error::Domain(format!(
            "decay c̃ = {} must lie strictly between 0 and c = {}",
            tilde_c.to_sig_string(17),
            c.to_sig_string(17)
        )));
    }
    Ok(())
}

/// `(2b/d)^{2b}·e^{−2b}` with `d = c − c̃`; equals 1 for `b = 0`.
fn lemma_factor(b: Dd, gap: Dd) -> Dd {
    if b.is_zero() {
        return Dd::ONE;
    }
    let two_b = b.mul_pow2(2.0);
    (two_b * (two_b / gap).ln() - two_b).exp()
}

/// Prefactor `ã = a·(2b/(c−c̃))^{2b}·e^{−2b}` of the de la Vallée Poussin
/// form bound implied by `family` at decay rate `tilde_c`.
pub fn derive_prefactor(family: &BoundFamily, tilde_c: Dd) -> Result<Dd> {
    let c = family.c.value();
    check_decay(c, tilde_c)?;
    Ok(family.a.value() * lemma_factor(family.b.value(), c - tilde_c))
}

/// Location of the maximum of `(ln x)^b·exp(−(c−c̃)√ln x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakLocation {
    /// `ln x_peak = (2b/(c−c̃))²`.
    pub ln_x: Dd,
}

impl PeakLocation {
    /// `√ln x_peak = 2b/(c−c̃)`.
    pub fn u(&self) -> Dd {
        self.ln_x.sqrt()
    }

    /// `x_peak`, which overflows to infinity for large exponents.
    pub fn x(&self) -> f64 {
        self.ln_x.exp().to_f64()
    }
}

pub fn peak_location(b: Dd, c: Dd, tilde_c: Dd) -> Result<PeakLocation> {
    if !(b > Dd::ZERO) {
        return Err(Error::Domain(
            "peak location needs b > 0; for b = 0 the factor is constant".into(),
        ));
    }
    if !(c > Dd::ZERO) {
        return Err(Error::Domain("decay c must be positive".into()));
    }
    check_decay(c, tilde_c)?;
    let u = b.mul_pow2(2.0) / (c - tilde_c);
    Ok(PeakLocation { ln_x: u.sqr() })
}

/// Inverse of [`derive_prefactor`] in `c̃`: the decay rate whose derived
/// prefactor equals `target`. The prefactor is strictly increasing in `c̃`,
/// so the root is unique and found by bisection.
pub fn solve_decay(family: &BoundFamily, target: Dd) -> Result<Dd> {
    const EDGE: f64 = 1e-9;
    const MAX_ITER: usize = 200;

    let b = family.b.value();
    let c = family.c.value();
    if !(b > Dd::ZERO) {
        return Err(Error::Domain(
            "for b = 0 the prefactor does not depend on c̃".into(),
        ));
    }
    let a = family.a.value();
    let infimum = a * lemma_factor(b, c);
    if !(target > infimum) {
        return Err(Error::Range(format!(
            "target {} is at or below the infimum {} reached as c̃ → 0",
            target.to_sig_string(12),
            infimum.to_sig_string(12)
        )));
    }
    let edge = Dd::from_f64(EDGE);
    let mut hi = c - edge;
    if target > a * lemma_factor(b, c - hi) {
        return Err(Error::Range(format!(
            "target {} needs c̃ within {EDGE} of c",
            target.to_sig_string(12)
        )));
    }
    let mut lo = if target < a * lemma_factor(b, c - edge) {
        Dd::ZERO
    } else {
        edge
    };
    for _ in 0..MAX_ITER {
        let mid = (lo + hi).mul_pow2(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if a * lemma_factor(b, c - mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < c.mul_f64(1e-31) {
            break;
        }
    }
    Ok((lo + hi).mul_pow2(0.5))
}

/// An effective bound `|θ(x) − x| < ã·x·exp(−c̃√ln x)` for `x ≥ x_*`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedBound {
    tilde_a: Dd,
    tilde_c: Dd,
    x_star: Option<u64>,
    parent: BoundFamily,
}

impl DerivedBound {
    /// The bound produced by the lemma, valid for `x ≥ parent.x0`.
    pub fn from_lemma(parent: &BoundFamily, tilde_c: Dd) -> Result<DerivedBound> {
        let tilde_a = derive_prefactor(parent, tilde_c)?;
        Ok(DerivedBound {
            tilde_a,
            tilde_c,
            x_star: None,
            parent: parent.clone(),
        })
    }

    /// A bound with a relaxed prefactor; `tilde_a` must not undercut the lemma.
    pub fn relaxed(parent: &BoundFamily, tilde_c: Dd, tilde_a: Dd) -> Result<DerivedBound> {
        let minimal = derive_prefactor(parent, tilde_c)?;
        if tilde_a < minimal {
            return Err(Error::Domain(format!(
                "prefactor {} is below the lemma value {}",
                tilde_a.to_sig_string(12),
                minimal.to_sig_string(12)
            )));
        }
        Ok(DerivedBound {
            tilde_a,
            tilde_c,
            x_star: None,
            parent: parent.clone(),
        })
    }

    pub fn with_x_star(mut self, x_star: u64) -> DerivedBound {
        self.x_star = Some(x_star.max(2));
        self
    }

    pub fn tilde_a(&self) -> Dd {
        self.tilde_a
    }

    pub fn tilde_c(&self) -> Dd {
        self.tilde_c
    }

    pub fn x_star(&self) -> Option<u64> {
        self.x_star
    }

    pub fn parent(&self) -> &BoundFamily {
        &self.parent
    }
}

/// Published derived bounds, kept as reference data for reproduction reports.
pub mod published {
    /// `(parent source, c̃, ã, x_*)` rows of the widely applicable derived bounds.
    pub const WIDELY_APPLICABLE: [(&str, &str, &str, u64); 5] = [
        ("Schoenfeld", "1/4", "0.3510691792", 59),
        ("Trudgian", "1/4", "0.2748124978", 101),
        ("Trudgian", "1/3", "0.4242102935", 59),
        ("Fiori-Kadiri-Swidinsky", "1/2", "295", 2),
        ("Johnston-Yang", "1/2", "385", 2),
    ];

    /// `(parent source, c̃, ã, x_*)` rows of the asymptotically stringent bounds.
    pub const ASYMPTOTIC: [(&str, &str, &str, &str); 19] = [
        ("Johnston-Yang exp(3000)", "1/2", "357", "exp(3000)"),
        ("Johnston-Yang exp(4000)", "1/2", "320", "exp(4000)"),
        ("Johnston-Yang exp(5000)", "1/2", "295", "exp(5000)"),
        ("Johnston-Yang exp(6000)", "1/2", "274", "exp(6000)"),
        ("Johnston-Yang exp(7000)", "1/2", "263", "exp(7000)"),
        ("Johnston-Yang exp(8000)", "1/2", "252", "exp(8000)"),
        ("Johnston-Yang exp(9000)", "1/2", "244", "exp(9000)"),
        ("Johnston-Yang exp(10000)", "1/2", "249", "exp(10000)"),
        ("Johnston-Yang exp(10^5)", "1/2", "644", "exp(10^5)"),
        ("Johnston-Yang exp(10^6)", "1/2", "348", "exp(10^6)"),
        ("Johnston-Yang exp(10^7)", "1/2", "312", "exp(10^7)"),
        ("Johnston-Yang exp(10^8)", "1/2", "301", "exp(10^8)"),
        ("Johnston-Yang exp(10^9)", "1/2", "298", "exp(10^9)"),
        ("Johnston-Yang exp(10^10)", "1/2", "297", "exp(10^10)"),
        ("Johnston-Yang exp(10^6)", "1", "1642333", "exp(10^6)"),
        ("Johnston-Yang exp(10^7)", "1", "165152", "exp(10^7)"),
        ("Johnston-Yang exp(10^8)", "1", "101831", "exp(10^8)"),
        ("Johnston-Yang exp(10^9)", "1", "87551", "exp(10^9)"),
        ("Johnston-Yang exp(10^10)", "1", "83063", "exp(10^10)"),
    ];
}
