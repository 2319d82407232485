//! Extended reals: a finite `f64` or `+inf` as a dedicated sentinel.

use core::cmp::Ordering;
use core::fmt;

/// A value in `R ∪ {+inf}` with a total order.
///
/// Finite payloads are never infinite or NaN; the constructor folds an
/// overflowing `f64` into [`ExtReal::PosInf`].
#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// Lossy conversion for arithmetic (`+inf` maps to `f64::INFINITY`).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `x <= self` without ever routing through float infinity.
    pub fn ge_f64(self, x: f64) -> bool {
        match self {
            ExtReal::Finite(y) => x <= y,
            ExtReal::PosInf => true,
        }
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Ordering::Less,
            (ExtReal::PosInf, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::PosInf, ExtReal::PosInf) => Ordering::Equal,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::finite(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_above_every_finite_value() {
        assert!(ExtReal::PosInf > ExtReal::Finite(f64::MAX));
        assert_eq!(ExtReal::PosInf, ExtReal::PosInf);
        assert!(ExtReal::PosInf.ge_f64(1e308));
        assert!(!ExtReal::Finite(2.0).ge_f64(3.0));
    }

    #[test]
    fn overflow_folds_into_sentinel() {
        assert_eq!(ExtReal::finite(f64::INFINITY), ExtReal::PosInf);
        assert!(ExtReal::finite(1.0).is_finite());
    }
}
