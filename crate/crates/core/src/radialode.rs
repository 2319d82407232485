//! Radial solutions of `Δ²u = f(u)`: integration from the origin, the exact
//! singular solution, shooting for entire decaying solutions, and two
//! independent checks (a finite-difference residual and the second
//! variation of the energy).
//!
//! The radial equation is integrated as the first-order system
//!
//! ```text
//! u' = du,  du' = v - (n-1) du / r,  v' = dv,  dv' = f(u) - (n-1) dv / r
//! ```
//!
//! augmented with `V2' = v² r^{n-1}` and `VF' = F(u) r^{n-1}`. The `(n-1)/r`
//! terms are singular at `r = 0`, so integration starts at a small radius
//! from the Taylor expansion `u ≈ a + b r²/(2n)`, `v ≈ b + f(a) r²/(2n)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::field::{FieldColumns, RadialField};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{fit_line, fornberg_weights, stencil_window};
use crate::ode::{self, Flow, StepControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    /// Radius where the Taylor start hands over to the integrator.
    pub origin_start: f64,
    /// `|u|` or `|v|` above this ends the run as a blow-up. `None` means
    /// `10⁶ · |u(0)|` (or `10⁶` when `u(0) = 0`).
    pub blowup_threshold: Option<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub r_max: f64,
    /// Upper bound on `h / r` for the adaptive steps.
    pub max_step_ratio: f64,
    /// Radius up to which trial runs are followed while shooting.
    pub shoot_horizon: f64,
    /// End the run when `u` changes sign.
    pub stop_on_crossing: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            origin_start: 1e-6,
            blowup_threshold: None,
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            r_max: 100.0,
            max_step_ratio: 0.02,
            shoot_horizon: 1e5,
            stop_on_crossing: true,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.origin_start > 0.0 && self.origin_start < 1e-2) {
            return Err(Error::Domain("origin_start must lie in (0, 1e-2)"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive"));
        }
        if !(self.r_max > 2.0 * self.origin_start) || !self.r_max.is_finite() {
            return Err(Error::Domain("r_max must exceed 2 * origin_start"));
        }
        if !(self.max_step_ratio > 0.0 && self.max_step_ratio <= 1.0) {
            return Err(Error::Domain("max_step_ratio must lie in (0, 1]"));
        }
        if let Some(t) = self.blowup_threshold {
            if !(t > 0.0) {
                return Err(Error::Domain("blowup_threshold must be positive"));
            }
        }
        Ok(())
    }

    fn threshold(&self, a: f64) -> f64 {
        self.blowup_threshold
            .unwrap_or(if a == 0.0 { 1e6 } else { 1e6 * a.abs() })
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step_ratio: self.max_step_ratio,
        }
    }
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    ReachedEnd,
    /// `u` changed sign (or, for `f = -u^{-p}`, touched zero).
    Crossing {
        r: f64,
    },
    BlowUp {
        r: f64,
    },
}

impl Termination {
    pub fn radius(&self) -> Option<f64> {
        match *self {
            Termination::ReachedEnd => None,
            Termination::Crossing { r } | Termination::BlowUp { r } => Some(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub field: RadialField,
    pub termination: Termination,
}

fn taylor_start(params: &ProblemParams, nl: &Nonlinearity, a: f64, b: f64, r0: f64) -> [f64; 6] {
    let n = params.nf();
    let fa = nl.f(a);
    let rn = r0.powf(n);
    [
        a + b * r0 * r0 / (2.0 * n),
        b * r0 / n,
        b + fa * r0 * r0 / (2.0 * n),
        fa * r0 / n,
        b * b * rn / n,
        nl.potential(a) * rn / n,
    ]
}

/// Runs the augmented system and hands every accepted state to `record`.
fn run<R: FnMut(f64, &[f64; 6])>(
    params: &ProblemParams,
    nl: &Nonlinearity,
    a: f64,
    b: f64,
    cfg: &IntegrationConfig,
    r_end: f64,
    mut record: R,
) -> Result<Termination> {
    let nm1 = params.nf() - 1.0;
    let nl = *nl;
    let rhs = move |r: f64, y: &[f64; 6]| {
        if !nl.admits(y[0]) {
            return [f64::NAN; 6];
        }
        let w = r.powf(nm1);
        [
            y[1],
            y[2] - nm1 * y[1] / r,
            y[3],
            nl.f(y[0]) - nm1 * y[3] / r,
            y[2] * y[2] * w,
            nl.potential(y[0]) * w,
        ]
    };
    let threshold = cfg.threshold(a);
    let sign = if !cfg.stop_on_crossing {
        0.0
    } else if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    };
    let mut termination = Termination::ReachedEnd;
    let y0 = taylor_start(params, &nl, a, b, cfg.origin_start);
    let outcome = ode::integrate(&rhs, cfg.origin_start, y0, r_end, cfg.step_control(), |r, y| {
        record(r, y);
        if sign != 0.0 && sign * y[0] <= 0.0 {
            termination = Termination::Crossing { r };
            Flow::Stop
        } else if y[0].abs() > threshold || y[2].abs() > threshold {
            termination = Termination::BlowUp { r };
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    match outcome {
        Ok(_) => Ok(termination),
        // f = -u^{-p} leaves its domain when u reaches zero
        Err(Error::Integration { r, .. }) if matches!(nl, Nonlinearity::NegativePower { .. }) => {
            Ok(Termination::Crossing { r })
        }
        Err(e) => Err(e),
    }
}

/// Integrates `Δ²u = |u|^{p-1}u` from `u(0) = a`, `Δu(0) = b`.
pub fn integrate(params: ProblemParams, a: f64, b: f64, cfg: &IntegrationConfig) -> Result<Integration> {
    integrate_with(params, Nonlinearity::LaneEmden { p: params.p() }, a, b, cfg)
}

/// Same as [`integrate`] for any supported right-hand side.
pub fn integrate_with(
    params: ProblemParams,
    nonlinearity: Nonlinearity,
    a: f64,
    b: f64,
    cfg: &IntegrationConfig,
) -> Result<Integration> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain("initial data must be finite"));
    }
    if !nonlinearity.admits(a) {
        return Err(Error::Domain("u(0) outside the domain of the nonlinearity"));
    }
    let mut cols = FieldColumns::default();
    let mut vol_v2 = Vec::new();
    let mut vol_f = Vec::new();
    let termination = run(&params, &nonlinearity, a, b, cfg, cfg.r_max, |r, y| {
        cols.radii.push(r);
        cols.u.push(y[0]);
        cols.du.push(y[1]);
        cols.v.push(y[2]);
        cols.dv.push(y[3]);
        vol_v2.push(y[4]);
        vol_f.push(y[5]);
    })?;
    if cols.len() < 2 {
        return Err(Error::Integration {
            r: cfg.origin_start,
            reason: "event at the starting radius",
        });
    }
    let field = RadialField::with_integrals(params, nonlinearity, cols, vol_v2, vol_f, true, cfg.rel_tol)?
        .with_taylor_start(cfg.origin_start);
    Ok(Integration { field, termination })
}

/// Samples `u = K r^m` exactly, with closed-form volume integrals.
///
/// Works for right-hand sides whose potential is a power of `u`
/// (`F(K r^m) = F(K) r^{m d}`).
pub fn power_law_field(
    params: ProblemParams,
    nonlinearity: Nonlinearity,
    amplitude: f64,
    exponent: f64,
    grid: &[f64],
) -> Result<RadialField> {
    let n = params.nf();
    let p = nonlinearity.p();
    let degree = match nonlinearity {
        Nonlinearity::LaneEmden { .. } => p + 1.0,
        Nonlinearity::NegativePower { .. } => 1.0 - p,
        Nonlinearity::Navier { .. } => return Err(Error::Domain("Navier potential is not a power law")),
    };
    let m = exponent;
    let cv = amplitude * m * (m + n - 2.0);
    let v2_exp = 2.0 * m - 4.0 + n;
    let f_exp = m * degree + n;
    if !(v2_exp > 0.0 && f_exp > 0.0) {
        return Err(Error::Domain("volume integrals of the power law diverge at the origin"));
    }
    let f_amp = nonlinearity.potential(amplitude);
    let cols = FieldColumns {
        radii: grid.to_vec(),
        u: grid.iter().map(|r| amplitude * r.powf(m)).collect(),
        du: grid.iter().map(|r| amplitude * m * r.powf(m - 1.0)).collect(),
        v: grid.iter().map(|r| cv * r.powf(m - 2.0)).collect(),
        dv: grid.iter().map(|r| cv * (m - 2.0) * r.powf(m - 3.0)).collect(),
    };
    let vol_v2 = grid.iter().map(|r| cv * cv * r.powf(v2_exp) / v2_exp).collect();
    let vol_f = grid.iter().map(|r| f_amp * r.powf(f_exp) / f_exp).collect();
    RadialField::with_integrals(params, nonlinearity, cols, vol_v2, vol_f, m >= 0.0, f64::EPSILON)
}

/// The singular solution `u_s = K0^{1/(p-1)} r^{-4/(p-1)}` sampled on `grid`.
pub fn singular_field(params: ProblemParams, grid: &[f64]) -> Result<RadialField> {
    params.require_supercritical()?;
    let c = params.derived();
    if !(c.k0 > 0.0) {
        return Err(Error::Domain("K0 must be positive"));
    }
    let amplitude = c.k0.powf(1.0 / (params.p() - 1.0));
    power_law_field(
        params,
        Nonlinearity::LaneEmden { p: params.p() },
        amplitude,
        -c.gamma,
        grid,
    )
}

/// Geometric grid of `count` radii spanning `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|k| (a + (b - a) * k as f64 / last).exp()).collect();
    out[0] = lo;
    out[count - 1] = hi;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub a: f64,
    /// Calibrated `Δu(0)`.
    pub b_star: f64,
    pub field: RadialField,
    /// Slope of `log|u|` against `log r` over the last decade of the grid.
    pub decay_exponent: f64,
    /// Final bisection interval (crossing side, blow-up side).
    pub bracket: (f64, f64),
    pub termination: Termination,
    /// `u(r) r^γ / K0^{1/(p-1)}` at the end of the grid. Reported only.
    pub tail_amplitude_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventClass {
    Crossing,
    BlowUp,
    Undecided,
}

fn classify(params: &ProblemParams, a: f64, b: f64, cfg: &IntegrationConfig) -> Result<(EventClass, f64)> {
    let nl = Nonlinearity::LaneEmden { p: params.p() };
    let t = run(params, &nl, a, b, cfg, cfg.shoot_horizon.max(cfg.r_max), |_, _| {})?;
    Ok(match t {
        Termination::Crossing { r } => (EventClass::Crossing, r),
        Termination::BlowUp { r } => (EventClass::BlowUp, r),
        Termination::ReachedEnd => (EventClass::Undecided, f64::INFINITY),
    })
}

/// Finds `b* = Δu(0)` such that the solution with `u(0) = a` is entire and
/// decays, by bisection between runs that cross zero and runs that blow up.
pub fn shoot_entire(params: ProblemParams, a: f64, cfg: &IntegrationConfig) -> Result<ShootingResult> {
    params.require_supercritical()?;
    cfg.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain("shooting requires u(0) = a > 0"));
    }
    // b* scales like a^{(p+1)/2}
    let scale = a.powf(0.5 * (params.p() + 1.0));
    let mut hi = 0.0;
    let (class_hi, mut r_hi) = classify(&params, a, hi, cfg)?;
    if class_hi != EventClass::BlowUp {
        return Err(Error::BracketNotFound { lo: hi, hi });
    }
    let mut lo = -scale;
    let mut r_lo;
    let mut doublings = 0;
    loop {
        let (class, r) = classify(&params, a, lo, cfg)?;
        match class {
            EventClass::Crossing => {
                r_lo = r;
                break;
            }
            EventClass::Undecided => {
                r_lo = r;
                hi = lo;
                r_hi = r;
                break;
            }
            EventClass::BlowUp => {
                hi = lo;
                r_hi = r;
                lo *= 2.0;
                doublings += 1;
                if doublings > 64 {
                    return Err(Error::BracketNotFound { lo, hi });
                }
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let (class, r) = classify(&params, a, mid, cfg)?;
        match class {
            EventClass::Crossing => {
                lo = mid;
                r_lo = r;
            }
            EventClass::BlowUp => {
                hi = mid;
                r_hi = r;
            }
            EventClass::Undecided => {
                lo = mid;
                hi = mid;
                r_lo = r;
                r_hi = r;
                break;
            }
        }
    }
    let b_star = if r_lo >= r_hi { lo } else { hi };
    let Integration { field, termination } = integrate(params, a, b_star, cfg)?;
    let decay_exponent = tail_slope(&field)?;
    let c = params.derived();
    let r_end = field.r_max();
    let u_end = field.u()[field.len() - 1];
    let tail_amplitude_ratio = u_end * r_end.powf(c.gamma) / c.k0.powf(1.0 / (params.p() - 1.0));
    Ok(ShootingResult {
        a,
        b_star,
        field,
        decay_exponent,
        bracket: (lo, hi),
        termination,
        tail_amplitude_ratio,
    })
}

/// Least-squares slope of `log|u|` vs `log r` on the last decade of the grid.
pub fn tail_slope(field: &RadialField) -> Result<f64> {
    let hi = field.r_max();
    let lo = (hi / 10.0).max(field.r_min());
    tail_slope_on(field, lo, hi)
}

pub fn tail_slope_on(field: &RadialField, lo: f64, hi: f64) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in log_grid(lo, hi, 41) {
        let u = field.sample(r)?.u;
        if u != 0.0 {
            xs.push(r.ln());
            ys.push(u.abs().ln());
        }
    }
    fit_line(&xs, &ys).map(|(_, slope)| slope).ok_or(Error::TooFewSamples {
        needed: 2,
        got: xs.len(),
    })
}

/// Pointwise `|Δ²u - f(u)|` with `Δ²u = (v')' + (n-1) v'/r` and `(v')'`
/// from five-point finite differences of the stored `v'` samples.
fn residual_terms(field: &RadialField) -> Result<Vec<(f64, f64, f64)>> {
    let len = field.len();
    if len < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: len });
    }
    let r = field.radii();
    let dv = field.dv();
    let u = field.u();
    let nl = field.nonlinearity();
    let nm1 = field.params().nf() - 1.0;
    Ok((2..len - 2)
        .map(|i| {
            let win = i - 2..i + 3;
            let w = fornberg_weights(r[i], &r[win.clone()], 1);
            let ddv: f64 = w[1].iter().zip(&dv[win]).map(|(c, y)| c * y).sum();
            let lhs = ddv + nm1 * dv[i] / r[i];
            let rhs = nl.f(u[i]);
            (r[i], (lhs - rhs).abs(), rhs.abs())
        })
        .collect())
}

/// Largest finite-difference residual of `Δ²u - f(u)` over interior points.
pub fn residual(field: &RadialField) -> Result<f64> {
    Ok(residual_terms(field)?.iter().map(|t| t.1).fold(0.0, f64::max))
}

/// Largest residual over interior points with `lo <= r <= hi`, divided by
/// the largest `|f(u)|` there (`0` for the zero field).
pub fn relative_residual_on(field: &RadialField, lo: f64, hi: f64) -> Result<f64> {
    let terms = residual_terms(field)?;
    let window = terms.iter().filter(|t| t.0 >= lo && t.0 <= hi);
    let (res, scale) = window.fold((0.0f64, 0.0f64), |(a, b), t| (a.max(t.1), b.max(t.2)));
    Ok(if scale == 0.0 { res } else { res / scale })
}

/// The second variation `Λ_u(φ) = ∫ |Δφ|² - ∫ f'(u) φ²` for a radial test
/// profile sampled on the field's grid.
///
/// `Δφ` comes from five-point finite differences on the grid and the
/// integrals use the trapezoidal rule with the measure `ω r^{n-1} dr`.
pub fn stability_form(field: &RadialField, phi: &[f64]) -> Result<f64> {
    let len = field.len();
    if phi.len() != len {
        return Err(Error::Domain("test profile length differs from the grid"));
    }
    if len < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: len });
    }
    if phi[..2].iter().chain(&phi[len - 2..]).any(|&x| x != 0.0) {
        return Err(Error::SupportViolation);
    }
    let r = field.radii();
    let nm1 = field.params().nf() - 1.0;
    let omega = field.params().derived().omega;
    let nl = field.nonlinearity();
    let integrand: Vec<f64> = (0..len)
        .map(|i| {
            let win = stencil_window(i, len, 5);
            let w = fornberg_weights(r[i], &r[win.clone()], 2);
            let (d1, d2) = w[1]
                .iter()
                .zip(&w[2])
                .zip(&phi[win])
                .fold((0.0, 0.0), |(a, b), ((c1, c2), y)| (a + c1 * y, b + c2 * y));
            let lap = d2 + nm1 * d1 / r[i];
            (lap * lap - nl.df(field.u()[i]) * phi[i] * phi[i]) * r[i].powf(nm1)
        })
        .collect();
    let total: f64 = (1..len)
        .map(|i| 0.5 * (r[i] - r[i - 1]) * (integrand[i] + integrand[i - 1]))
        .sum();
    Ok(omega * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, p: f64) -> ProblemParams {
        ProblemParams::new(n, p).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let cfg = IntegrationConfig {
            r_max: 10.0,
            ..Default::default()
        };
        let out = integrate(params(13, 3.0), 0.0, 0.0, &cfg).unwrap();
        assert_eq!(out.termination, Termination::ReachedEnd);
        assert!(out.field.u().iter().all(|&u| u == 0.0));
        assert_eq!(out.field.r_max(), 10.0);
        assert_eq!(residual(&out.field).unwrap(), 0.0);
    }

    #[test]
    fn large_positive_b_blows_up() {
        let cfg = IntegrationConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ..Default::default()
        };
        let out = integrate(params(13, 3.0), 1.0, 10.0, &cfg).unwrap();
        match out.termination {
            Termination::BlowUp { r } => assert!(r < cfg.r_max),
            other => panic!("expected blow-up, got {other:?}"),
        }
        let last = out.field.len() - 1;
        assert!(out.field.u()[last].abs().max(out.field.v()[last].abs()) > 1e6);
    }

    #[test]
    fn very_negative_b_crosses_zero() {
        let cfg = IntegrationConfig::default();
        let out = integrate(params(13, 3.0), 1.0, -1000.0, &cfg).unwrap();
        assert!(matches!(out.termination, Termination::Crossing { .. }));
    }

    #[test]
    fn singular_field_amplitude_and_homogeneity() {
        let p = params(16, 3.0);
        let grid = log_grid(0.05, 20.0, 201);
        let f = singular_field(p, &grid).unwrap();
        let s = f.sample(1.0).unwrap();
        assert_relative_eq!(s.u, 960f64.sqrt(), max_relative = 1e-14);
        for lambda in [0.5, 1.7, 3.0] {
            for r in [0.2, 1.0, 3.1] {
                let lhs = lambda.powf(2.0) * f.sample(lambda * r).unwrap().u;
                assert_relative_eq!(lhs, f.sample(r).unwrap().u, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn singular_field_rejects_subcritical() {
        assert!(singular_field(params(6, 3.0), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn singular_field_residual_is_tiny() {
        for (n, p) in [(13, 3.0), (16, 3.0), (13, 30.0)] {
            let f = singular_field(params(n, p), &log_grid(0.25, 4.0, 4001)).unwrap();
            let rel = relative_residual_on(&f, 0.5, 2.0).unwrap();
            assert!(rel < 1e-8, "(n={n}, p={p}) relative residual {rel}");
        }
    }

    #[test]
    fn corrupted_field_has_visible_residual() {
        let p = params(13, 3.0);
        let f = singular_field(p, &log_grid(0.25, 4.0, 2001)).unwrap();
        let mut cols = f.columns().clone();
        cols.u.iter_mut().for_each(|u| *u *= 1.01);
        let bad = RadialField::from_columns(p, f.nonlinearity(), cols, false, 1e-12).unwrap();
        let rel = relative_residual_on(&bad, 0.5, 2.0).unwrap();
        assert!(rel > 1e-2, "relative residual {rel}");
    }

    #[test]
    fn residual_needs_five_points() {
        let f = singular_field(params(13, 3.0), &[1.0, 2.0, 3.0]).unwrap();
        assert!(residual(&f).is_err());
    }

    #[test]
    fn stability_form_basic_properties() {
        let p = params(13, 3.0);
        let grid = log_grid(0.5, 2.0, 801);
        let zero = power_law_field(p, Nonlinearity::LaneEmden { p: 3.0 }, 0.0, 0.0, &grid).unwrap();
        let phi: Vec<f64> = grid
            .iter()
            .map(|&r| {
                let t = (r - 0.7) / 1.0;
                if (0.0..=1.0).contains(&t) {
                    (t * (1.0 - t)).powi(4)
                } else {
                    0.0
                }
            })
            .collect();
        let lam = stability_form(&zero, &phi).unwrap();
        assert!(lam > 0.0);
        let scaled: Vec<f64> = phi.iter().map(|x| 3.0 * x).collect();
        assert_relative_eq!(stability_form(&zero, &scaled).unwrap(), 9.0 * lam, max_relative = 1e-12);
        let mut bad = phi.clone();
        bad[0] = 1.0;
        assert_eq!(stability_form(&zero, &bad), Err(Error::SupportViolation));
        assert!(stability_form(&zero, &[0.0; 3]).is_err());
    }
}
