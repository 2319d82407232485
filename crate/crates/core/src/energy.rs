//! The monotonicity energy `E(r; 0, u)` for radial fields.
//!
//! With `γ` the scaling degree of the equation (`4/(p-1)` for
//! `Δ²u = |u|^{p-1}u`), `w = γu/r + u'` and `A = (γ/2)(n-2-γ)`, the boundary
//! integrals over spheres reduce to `ω r^{n-1}` times pointwise values, the
//! tangential-gradient terms vanish, and the energy becomes
//!
//! ```text
//! E(r) = r^{2γ+4-n} ∫_{B_r} (½ v² - F(u))
//!      + A ω r^{2γ} ((2γ+2) u² + 2 r u u')
//!      + ω r^{2γ+2} (γ w² + r w w')
//! ```
//!
//! The same expression with `γ = -4/(p+1)` and `F(u) = u^{1-p}/(p-1)` is the
//! energy for `Δ²u = -u^{-p}`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponents::{negative_exponent_condition, ProblemParams};
use crate::field::RadialField;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{fornberg_weights, neville_at_zero, stencil_window};

/// `E`, its centred derivative and the quantitative lower bound on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    pub radii: Vec<f64>,
    pub e: Vec<f64>,
    pub de: Vec<f64>,
    /// `c ω r^{2γ+1} (γu/r + u')²`.
    pub lower_bound: Vec<f64>,
    /// Allowed differentiation noise in `de` at each radius.
    pub slack: Vec<f64>,
}

impl EnergyProfile {
    /// `min (dE - lowerBound + slack)`; nonnegative when the profile is
    /// monotone with the quantitative bound.
    pub fn min_defect(&self) -> f64 {
        (0..self.radii.len())
            .map(|i| self.de[i] - self.lower_bound[i] + self.slack[i])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_monotone(&self) -> bool {
        self.de.iter().zip(&self.slack).all(|(d, s)| *d >= -s)
    }

    pub fn satisfies_lower_bound(&self) -> bool {
        self.min_defect() >= 0.0
    }

    /// Largest `|E - E(r_0)|` relative to `max |E|`.
    pub fn relative_variation(&self) -> f64 {
        let scale = self.e.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        self.e.iter().fold(0.0f64, |m, e| m.max((e - self.e[0]).abs())) / scale
    }
}

/// Small-radius extrapolation of `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub center: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
}

impl DensityEstimate {
    /// `extrapolated <= min(values) + tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        self.extrapolated <= min + tol
    }
}

fn check_radius(field: &RadialField, r: f64) -> Result<()> {
    let lo = field
        .taylor_start()
        .map_or(field.r_min(), |r0| field.r_min().max(2.0 * r0));
    if !(r >= lo && r <= field.r_max()) {
        return Err(Error::OutOfGrid {
            r,
            lo,
            hi: field.r_max(),
        });
    }
    Ok(())
}

fn energy_with_degree(field: &RadialField, r: f64, gamma: f64) -> Result<f64> {
    check_radius(field, r)?;
    let s = field.sample(r)?;
    let n = field.params().nf();
    let omega = field.params().derived().omega;
    let a = 0.5 * gamma * (n - 2.0 - gamma);
    let w = gamma * s.u / r + s.du;
    let dw = gamma * s.du / r - gamma * s.u / (r * r) + s.d2u;
    let volume = r.powf(2.0 * gamma + 4.0 - n) * omega * (0.5 * s.vol_v2 - s.vol_f);
    let sphere_u = a * omega * r.powf(2.0 * gamma) * ((2.0 * gamma + 2.0) * s.u * s.u + 2.0 * r * s.u * s.du);
    let sphere_w = omega * r.powf(2.0 * gamma + 2.0) * (gamma * w * w + r * w * dw);
    Ok(volume + sphere_u + sphere_w)
}

fn lane_emden_degree(field: &RadialField) -> Result<f64> {
    field.params().require_supercritical()?;
    match field.nonlinearity() {
        Nonlinearity::LaneEmden { .. } => Ok(field.params().gamma()),
        _ => Err(Error::Domain("energy requires the Lane-Emden right-hand side")),
    }
}

fn negative_degree(field: &RadialField) -> Result<f64> {
    let p = match field.nonlinearity() {
        Nonlinearity::NegativePower { p } => p,
        _ => return Err(Error::Domain("negative-exponent energy requires f(u) = -u^{-p}")),
    };
    if !negative_exponent_condition(field.params().n(), p)? {
        return Err(Error::Domain("negative-exponent monotonicity condition fails"));
    }
    if field.u().iter().any(|&u| !(u > 0.0)) {
        return Err(Error::Domain("negative-exponent energy requires u > 0"));
    }
    Ok(-4.0 / (p + 1.0))
}

/// `E(r; 0, u)` for a solution of `Δ²u = |u|^{p-1}u`.
pub fn energy_radial(field: &RadialField, r: f64) -> Result<f64> {
    energy_with_degree(field, r, lane_emden_degree(field)?)
}

/// `Ẽ(r; 0, u)` for a positive solution of `Δ²u = -u^{-p}`.
pub fn negative_energy_radial(field: &RadialField, r: f64) -> Result<f64> {
    energy_with_degree(field, r, negative_degree(field)?)
}

/// `c = 2(α - β - 1)` for the scaling degree `γ`.
fn lower_bound_constant(n: f64, gamma: f64) -> f64 {
    let alpha = n - 1.0 - 2.0 * gamma;
    let beta = gamma * (gamma - n + 2.0);
    2.0 * alpha - 2.0 * beta - 2.0
}

fn profile_with_degree(field: &RadialField, radii: &[f64], gamma: f64) -> Result<EnergyProfile> {
    let len = radii.len();
    if len < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: len });
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("radii must be strictly increasing"));
    }
    let e = radii
        .iter()
        .map(|&r| energy_with_degree(field, r, gamma))
        .collect::<Result<Vec<_>>>()?;
    let n = field.params().nf();
    let omega = field.params().derived().omega;
    let c = lower_bound_constant(n, gamma);
    let e_scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let noise = field.tolerance().max(f64::EPSILON) * e_scale;
    let mut de = Vec::with_capacity(len);
    let mut lower_bound = Vec::with_capacity(len);
    let mut slack = Vec::with_capacity(len);
    for (i, &r) in radii.iter().enumerate() {
        let win = stencil_window(i, len, 5);
        let w = fornberg_weights(r, &radii[win.clone()], 1);
        de.push(w[1].iter().zip(&e[win]).map(|(c, y)| c * y).sum());
        let s = field.sample(r)?;
        let defect = gamma * s.u / r + s.du;
        lower_bound.push(c * omega * r.powf(2.0 * gamma + 1.0) * defect * defect);
        let spacing = if i == 0 {
            radii[1] - r
        } else if i + 1 == len {
            r - radii[i - 1]
        } else {
            (radii[i + 1] - r).min(r - radii[i - 1])
        };
        slack.push(10.0 * noise / spacing);
    }
    Ok(EnergyProfile {
        radii: radii.to_vec(),
        e,
        de,
        lower_bound,
        slack,
    })
}

/// Samples `E`, `dE/dr` and the lower bound on `radii` (at least five).
pub fn energy_profile(field: &RadialField, radii: &[f64]) -> Result<EnergyProfile> {
    profile_with_degree(field, radii, lane_emden_degree(field)?)
}

/// [`energy_profile`] for the negative-exponent energy `Ẽ`.
pub fn negative_energy_profile(field: &RadialField, radii: &[f64]) -> Result<EnergyProfile> {
    profile_with_degree(field, radii, negative_degree(field)?)
}

/// Energy of the homogeneous solution `r^{-γ} w` with constant `w`:
/// `(½ - 1/(p+1)) ω |w|^{p+1} / (n - 4(p+1)/(p-1))`.
pub fn homogeneous_energy(params: ProblemParams, w: f64) -> Result<f64> {
    params.require_supercritical()?;
    let p = params.p();
    let denom = params.energy_scaling_exponent();
    if denom == 0.0 {
        return Err(Error::Domain("n = 4(p+1)/(p-1)"));
    }
    Ok((0.5 - 1.0 / (p + 1.0)) * params.derived().omega * w.abs().powf(p + 1.0) / denom)
}

/// The same energy written through `∫_{B_1} (Δu)²` and `∫_{∂B_1} u²`; it
/// agrees with [`homogeneous_energy`] when `w^{p-1} = J2`.
pub fn homogeneous_energy_laplacian_form(params: ProblemParams, w: f64) -> Result<f64> {
    params.require_supercritical()?;
    let p = params.p();
    let n = params.nf();
    let g = params.gamma();
    let denom = params.energy_scaling_exponent();
    if denom == 0.0 {
        return Err(Error::Domain("n = 4(p+1)/(p-1)"));
    }
    let omega = params.derived().omega;
    let lap = g * (n - 2.0 - g);
    let bulk = omega * lap * lap * w * w / denom;
    Ok((0.5 - 1.0 / (p + 1.0)) * bulk + 4.0 / (p + 1.0) * (n - 2.0 - g) * omega * w * w)
}

/// Extrapolates `E(r)` to `r = 0` from samples at decreasing radii, as a
/// polynomial in `t = r^{2γ}`.
pub fn density_estimate(field: &RadialField, radii_descending: &[f64]) -> Result<DensityEstimate> {
    let gamma = lane_emden_degree(field)?;
    let len = radii_descending.len();
    if len < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: len });
    }
    if radii_descending.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("radii must be strictly decreasing"));
    }
    let values = radii_descending
        .iter()
        .map(|&r| energy_with_degree(field, r, gamma))
        .collect::<Result<Vec<_>>>()?;
    let ts: Vec<f64> = radii_descending.iter().map(|r| r.powf(2.0 * gamma)).collect();
    let extrapolated = neville_at_zero(&ts, &values);
    Ok(DensityEstimate {
        center: 0.0,
        radii: radii_descending.to_vec(),
        values,
        extrapolated,
    })
}

/// `u = C r^{4/(p+1)}` with `C^{p+1} = -1/Q`, the homogeneous solution of
/// `Δ²u = -u^{-p}` (`Q` is the coefficient of `Δ²r^q = Q r^{q-4}`).
pub fn negative_homogeneous_profile(params: ProblemParams, grid: &[f64]) -> Result<RadialField> {
    let p = params.p();
    let n = params.nf();
    let q = 4.0 / (p + 1.0);
    let coeff = q * (q + n - 2.0) * (q - 2.0) * (q + n - 4.0);
    if !(coeff < 0.0) {
        return Err(Error::Domain("no positive homogeneous solution for these n, p"));
    }
    let amplitude = (-1.0 / coeff).powf(1.0 / (p + 1.0));
    crate::radialode::power_law_field(params, Nonlinearity::NegativePower { p }, amplitude, q, grid)
}
