//! Scaling diagnostics: the rescaling `u^λ(r) = λ^γ u(λr)`, the homogeneity
//! defect, the Pohozaev identity on balls and the growth of
//! `∫_{B_R} v² + |u|^{p+1}`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{FieldColumns, RadialField};
use crate::numerics::{fit_line, gauss5};

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledField {
    pub base: RadialField,
    pub lambda: f64,
    pub field: RadialField,
}

/// `u^λ(r) = λ^γ u(λr)` on the grid `radii / λ`.
///
/// Derivatives pick up the matching powers of `λ` and the volume integrals
/// transform exactly (`V^λ(r) = λ^{2γ+4-n} V(λr)`), so no resampling is
/// involved.
pub fn rescale(field: &RadialField, lambda: f64) -> Result<RescaledField> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain("lambda must be a finite positive real"));
    }
    let g = field.nonlinearity().scaling_degree()?;
    let n = field.params().nf();
    let scale = |k: f64| lambda.powf(g + k);
    let (s0, s1, s2, s3) = (scale(0.0), scale(1.0), scale(2.0), scale(3.0));
    let vol = lambda.powf(2.0 * g + 4.0 - n);
    let cols = FieldColumns {
        radii: field.radii().iter().map(|r| r / lambda).collect(),
        u: field.u().iter().map(|x| s0 * x).collect(),
        du: field.du().iter().map(|x| s1 * x).collect(),
        v: field.v().iter().map(|x| s2 * x).collect(),
        dv: field.dv().iter().map(|x| s3 * x).collect(),
    };
    let mut scaled = RadialField::with_integrals(
        field.params(),
        field.nonlinearity(),
        cols,
        field.vol_v2().iter().map(|x| vol * x).collect(),
        field.vol_f().iter().map(|x| vol * x).collect(),
        field.is_regular_at_origin(),
        field.tolerance(),
    )?;
    if let Some(r0) = field.taylor_start() {
        scaled = scaled.with_taylor_start(r0 / lambda);
    }
    Ok(RescaledField {
        base: field.clone(),
        lambda,
        field: scaled,
    })
}

fn check_window(field: &RadialField, r1: f64, r2: f64) -> Result<()> {
    if !(r1 < r2) {
        return Err(Error::Domain("window must satisfy r1 < r2"));
    }
    for r in [r1, r2] {
        if !(r >= field.r_min() && r <= field.r_max()) {
            return Err(Error::OutOfGrid {
                r,
                lo: field.r_min(),
                hi: field.r_max(),
            });
        }
    }
    Ok(())
}

/// `∫_{r1}^{r2} (γu/r + u')² r^{2+2γ-n} ω r^{n-1} dr`, which vanishes
/// exactly when `u` is homogeneous on the annulus.
pub fn homogeneity_deviation(field: &RadialField, r1: f64, r2: f64) -> Result<f64> {
    check_window(field, r1, r2)?;
    let g = field.nonlinearity().scaling_degree()?;
    let omega = field.params().derived().omega;
    let mut cuts: Vec<f64> = field.radii().iter().copied().filter(|&r| r > r1 && r < r2).collect();
    cuts.insert(0, r1);
    cuts.push(r2);
    let mut failure = None;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += gauss5(w[0], w[1], |r| match field.sample(r) {
            Ok(s) => {
                let d = g * s.u / r + s.du;
                d * d * r.powf(2.0 * g + 1.0)
            }
            Err(e) => {
                failure = Some(e);
                0.0
            }
        });
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(omega * total),
    }
}

/// Homogeneity defect of `u^λ` on `[r1, r2]` for each `λ`.
pub fn blowdown_trend(field: &RadialField, lambdas: &[f64], r1: f64, r2: f64) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&l| Ok((l, homogeneity_deviation(&rescale(field, l)?.field, r1, r2)?)))
        .collect()
}

/// Both sides of the Pohozaev identity on `B_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    pub radius: f64,
    /// `∫_{B_R} (n-4)/2 (Δu)² - n F(u)`.
    pub lhs: f64,
    /// `ω R^{n-1} (R v²/2 - R F(u) + R u'v' - v (u' + R u''))`.
    pub rhs: f64,
}

impl PohozaevReport {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, or `0` when both vanish.
    pub fn relative(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.residual().abs() / scale
        }
    }
}

/// Evaluates the Pohozaev identity for a field smooth at the origin.
pub fn pohozaev_residual(field: &RadialField, radius: f64) -> Result<PohozaevReport> {
    if !field.is_regular_at_origin() {
        return Err(Error::Domain("Pohozaev identity needs a field smooth at the origin"));
    }
    let lo = 2.0 * field.taylor_start().unwrap_or(field.r_min()).max(field.r_min());
    if !(radius >= lo && radius <= field.r_max()) {
        return Err(Error::OutOfGrid {
            r: radius,
            lo,
            hi: field.r_max(),
        });
    }
    let s = field.sample(radius)?;
    let n = field.params().nf();
    let omega = field.params().derived().omega;
    let big_f = field.nonlinearity().potential(s.u);
    let lhs = omega * (0.5 * (n - 4.0) * s.vol_v2 - n * s.vol_f);
    let r = radius;
    let rhs = omega * r.powf(n - 1.0) * (0.5 * r * s.v * s.v - r * big_f + r * s.du * s.dv - s.v * (s.du + r * s.d2u));
    Ok(PohozaevReport { radius, lhs, rhs })
}

/// Outcome of the log-log fit of `∫_{B_R} v² + |u|^{p+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthFit {
    Fitted {
        constant: f64,
        exponent: f64,
    },
    /// The integral vanishes at some radius, so no fit exists.
    Degenerate,
}

/// `∫_{B_R} v² + |u|^{p+1}` at each radius.
pub fn growth_integrals(field: &RadialField, radii: &[f64]) -> Result<Vec<f64>> {
    let p = field.params().p();
    let omega = field.params().derived().omega;
    radii
        .iter()
        .map(|&r| {
            let s = field.sample(r)?;
            Ok(omega * (s.vol_v2 + (p + 1.0) * s.vol_f))
        })
        .collect()
}

/// Least-squares fit `∫_{B_R} v² + |u|^{p+1} ≈ C R^k` over `radii`.
pub fn growth_bound_check(field: &RadialField, radii: &[f64]) -> Result<GrowthFit> {
    if radii.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: radii.len(),
        });
    }
    let values = growth_integrals(field, radii)?;
    if values.iter().any(|&v| !(v > 0.0)) {
        return Ok(GrowthFit::Degenerate);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    Ok(match fit_line(&xs, &ys) {
        Some((c, k)) => GrowthFit::Fitted {
            constant: c.exp(),
            exponent: k,
        },
        None => GrowthFit::Degenerate,
    })
}
