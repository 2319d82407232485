//! Right-hand sides `Δ²u = f(u)` handled by the radial machinery.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// The nonlinearity `f` together with its potential `F' = f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = |u|^{p-1} u`.
    LaneEmden { p: f64 },
    /// `f(u) = λ (1+u)^p`, the Navier boundary-value problem on the ball.
    Navier { lambda: f64, p: f64 },
    /// `f(u) = -u^{-p}` for positive `u`.
    NegativePower { p: f64 },
}

impl Nonlinearity {
    pub fn p(&self) -> f64 {
        match *self {
            Nonlinearity::LaneEmden { p } | Nonlinearity::Navier { p, .. } | Nonlinearity::NegativePower { p } => p,
        }
    }

    pub fn f(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::LaneEmden { p } => signed_pow(u, p),
            Nonlinearity::Navier { lambda, p } => lambda * signed_pow(1.0 + u, p),
            Nonlinearity::NegativePower { p } => -u.powf(-p),
        }
    }

    pub fn df(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::LaneEmden { p } => p * u.abs().powf(p - 1.0),
            Nonlinearity::Navier { lambda, p } => lambda * p * (1.0 + u).abs().powf(p - 1.0),
            Nonlinearity::NegativePower { p } => p * u.powf(-p - 1.0),
        }
    }

    /// The potential `F` with `F' = f`.
    pub fn potential(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::LaneEmden { p } => u.abs().powf(p + 1.0) / (p + 1.0),
            Nonlinearity::Navier { lambda, p } => lambda * (1.0 + u).abs().powf(p + 1.0) / (p + 1.0),
            Nonlinearity::NegativePower { p } => u.powf(1.0 - p) / (p - 1.0),
        }
    }

    /// Degree `d` with `u^λ(r) = λ^d u(λr)` mapping solutions to solutions,
    /// when the equation has one.
    pub fn scaling_degree(&self) -> Result<f64> {
        match *self {
            Nonlinearity::LaneEmden { p } => Ok(4.0 / (p - 1.0)),
            Nonlinearity::NegativePower { p } => Ok(-4.0 / (p + 1.0)),
            Nonlinearity::Navier { .. } => Err(Error::Domain("the Navier right-hand side is not scale invariant")),
        }
    }

    /// Whether `u` lies in the domain of `f`.
    pub fn admits(&self, u: f64) -> bool {
        match self {
            Nonlinearity::NegativePower { .. } => u > 0.0,
            _ => u.is_finite(),
        }
    }
}

fn signed_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn potential_differentiates_to_f() {
        let cases = [
            (Nonlinearity::LaneEmden { p: 3.0 }, -0.7),
            (Nonlinearity::LaneEmden { p: 2.5 }, 1.3),
            (Nonlinearity::Navier { lambda: 4.0, p: 3.0 }, 0.4),
            (Nonlinearity::NegativePower { p: 2.0 }, 0.8),
        ];
        for (nl, u) in cases {
            let h = 1e-5;
            let dfdu = (nl.potential(u + h) - nl.potential(u - h)) / (2.0 * h);
            assert_relative_eq!(dfdu, nl.f(u), max_relative = 1e-8);
            let ddf = (nl.f(u + h) - nl.f(u - h)) / (2.0 * h);
            assert_relative_eq!(ddf, nl.df(u), max_relative = 1e-8);
        }
    }

    #[test]
    fn odd_lane_emden() {
        let nl = Nonlinearity::LaneEmden { p: 2.5 };
        assert_eq!(nl.f(0.0), 0.0);
        assert_relative_eq!(nl.f(-2.0), -nl.f(2.0));
        assert!(nl.scaling_degree().is_ok());
        assert!(Nonlinearity::Navier { lambda: 1.0, p: 3.0 }.scaling_degree().is_err());
    }
}
