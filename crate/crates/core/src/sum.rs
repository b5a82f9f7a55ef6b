//! Compensated (Neumaier) summation.

use crate::dd::two_sum;

/// Running sum `sum + comp`, where `comp` collects the rounding error of
/// every addition. Unlike plain Kahan summation the compensation stays
/// correct when an addend is larger than the running total.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.comp += e;
    }

    /// Combines two partial sums. The result does not depend on how the
    /// addends were split as long as the merge order is fixed.
    #[inline]
    pub fn merge(self, other: Compensated) -> Compensated {
        let (s, e) = two_sum(self.sum, other.sum);
        Compensated {
            sum: s,
            comp: self.comp + other.comp + e,
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
