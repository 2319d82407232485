//! The radial Navier problem `Δ²u = λ(1+u)^p` in the unit ball with
//! `u = Δu = 0` on the boundary: Newton solves, pseudo-arclength
//! continuation of the minimal branch through its fold, and the smallest
//! eigenvalue of the linearization.
//!
//! The radial Laplacian is discretized by finite volumes on the uniform grid
//! `r_i = i/N`: cell `i` is the shell between `r_{i-1/2}` and `r_{i+1/2}`
//! (a ball of radius `h/2` for `i = 0`), so the symmetry condition at the
//! origin is built in and the scheme is second order. `u_N = v_N = 0`
//! closes the system, and `Δ²` is the square of the discrete Laplacian.
//!
//! Every converged point also carries a [`RadialField`] obtained by shooting
//! the ODE from the discrete `u(0)`, so downstream checks see a solution
//! that is accurate to integrator tolerance rather than to `O(h²)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponents::{min_stable_dimension, ProblemParams};
use crate::field::{FieldColumns, RadialField, Sample};
use crate::nonlinearity::Nonlinearity;
use crate::radialode::{integrate_with, IntegrationConfig};

/// Backward-error target for Newton and continuation corrector steps.
pub const NEWTON_TOL: f64 = 1e-12;

/// Largest relative boundary mismatch `max(|u(1)|/u(0), |Δu(1)|/|Δu(0)|)`
/// accepted from [`refine_by_shooting`].
pub const SHOOTING_TOL: f64 = 1e-10;

/// Largest relative gap between the requested `u(0)` and the amplitude of
/// a refined field built from the scaled profile.
pub const AMPLITUDE_RTOL: f64 = 1e-6;

/// Finite-volume radial Laplacian with `u_N = 0`, as a tridiagonal matrix
/// acting on `u_0, ..., u_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    dim: u32,
    cells: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    volumes: Vec<f64>,
}

impl Laplacian {
    pub fn new(dim: u32, cells: usize) -> Result<Self> {
        if cells < 4 {
            return Err(Error::TooFewSamples { needed: 4, got: cells });
        }
        let n = f64::from(dim);
        let h = 1.0 / cells as f64;
        let mut lower = vec![0.0; cells];
        let mut diag = vec![0.0; cells];
        let mut upper = vec![0.0; cells];
        let mut volumes = vec![0.0; cells];
        for i in 0..cells {
            let r_in = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
            let r_out = (i as f64 + 0.5) * h;
            let vol = (r_out.powf(n) - r_in.powf(n)) / n;
            volumes[i] = vol;
            let flux_in = r_in.powf(n - 1.0) / (h * vol);
            let flux_out = r_out.powf(n - 1.0) / (h * vol);
            lower[i] = flux_in;
            upper[i] = flux_out;
            diag[i] = -(flux_in + flux_out);
        }
        Ok(Self {
            dim,
            cells,
            lower,
            diag,
            upper,
            volumes,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn step(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Cell volumes divided by `ω`; `diag(volumes) · A` is symmetric.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.cells;
        (0..m)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < m {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let m = self.cells;
        DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                self.diag[i]
            } else if j + 1 == i {
                self.lower[i]
            } else if j == i + 1 {
                self.upper[i]
            } else {
                0.0
            }
        })
    }

    /// Solves `A x = b` by tridiagonal elimination.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.cells;
        let mut c = vec![0.0; m];
        let mut x = vec![0.0; m];
        let mut denom = self.diag[0];
        c[0] = self.upper[0] / denom;
        x[0] = b[0] / denom;
        for i in 1..m {
            denom = self.diag[i] - self.lower[i] * c[i - 1];
            c[i] = self.upper[i] / denom;
            x[i] = (b[i] - self.lower[i] * x[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    }

    fn norm_inf(&self) -> f64 {
        (0..self.cells)
            .map(|i| self.lower[i].abs() + self.diag[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }

    /// Grid radii `r_0 = 0, ..., r_N = 1`.
    pub fn radii(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| i as f64 * self.step()).collect()
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
}

/// Discrete Navier problem for fixed `n`, `p` and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NavierProblem {
    params: ProblemParams,
    lap: Laplacian,
    bilap: DMatrix<f64>,
}

impl NavierProblem {
    pub fn new(params: ProblemParams, cells: usize) -> Result<Self> {
        let lap = Laplacian::new(params.n(), cells)?;
        let a = lap.matrix();
        let bilap = &a * &a;
        Ok(Self { params, lap, bilap })
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.lap
    }

    fn check_state(&self, u: &[f64]) -> Result<()> {
        if u.iter().any(|&x| !(1.0 + x > 0.0)) {
            return Err(Error::Domain("1 + u must stay positive"));
        }
        Ok(())
    }

    fn forcing(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let p = self.params.p();
        u.iter().map(|x| lambda * (1.0 + x).powf(p)).collect()
    }

    /// `A(Au) - λ(1+u)^p`.
    pub fn residual(&self, lambda: f64, u: &[f64]) -> Vec<f64> {
        let v = self.lap.apply(u);
        let av = self.lap.apply(&v);
        let f = self.forcing(lambda, u);
        av.iter().zip(&f).map(|(a, b)| a - b).collect()
    }

    /// Normwise backward error of the split system `Au = v`, `Av = λ(1+u)^p`
    /// with `v` taken from the second equation:
    /// `|Au - v|_∞ / (|A|_∞ |u|_∞ + |v|_∞)`.
    pub fn backward_error(&self, lambda: f64, u: &[f64]) -> f64 {
        let f = self.forcing(lambda, u);
        let v = self.lap.solve(&f);
        let au = self.lap.apply(u);
        let num = au.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let u_norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let v_norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = self.lap.norm_inf() * u_norm + v_norm;
        if scale == 0.0 {
            0.0
        } else {
            num / scale
        }
    }

    /// `A² - λ p diag((1+u)^{p-1})`.
    pub fn jacobian(&self, lambda: f64, u: &[f64]) -> DMatrix<f64> {
        let p = self.params.p();
        let mut j = self.bilap.clone();
        for (i, x) in u.iter().enumerate() {
            j[(i, i)] -= lambda * p * (1.0 + x).powf(p - 1.0);
        }
        j
    }

    /// Newton iteration at fixed `λ`.
    pub fn newton(&self, lambda: f64, guess: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut u = guess.to_vec();
        self.check_state(&u)?;
        let mut err = self.backward_error(lambda, &u);
        for _ in 0..50 {
            if err <= NEWTON_TOL {
                return Ok((u, err));
            }
            let g = DVector::from_vec(self.residual(lambda, &u));
            let step = self.jacobian(lambda, &u).lu().solve(&g).ok_or(Error::Singular)?;
            for (x, d) in u.iter_mut().zip(step.iter()) {
                *x -= d;
            }
            if self.check_state(&u).is_err() || u.iter().any(|x| !x.is_finite()) {
                return Err(Error::NewtonDiverged { lambda, residual: err });
            }
            err = self.backward_error(lambda, &u);
        }
        if err <= NEWTON_TOL {
            Ok((u, err))
        } else {
            Err(Error::NewtonDiverged { lambda, residual: err })
        }
    }

    /// Smallest eigenvalue of `A² - λ p (1+u)^{p-1}` by shifted inverse
    /// iteration, measured by the Rayleigh quotient in the cell-volume inner
    /// product (where the operator is self-adjoint).
    pub fn smallest_eigenvalue(&self, lambda: f64, u: &[f64]) -> Result<f64> {
        let p = self.params.p();
        let m = self.lap.cells();
        let peak = u
            .iter()
            .map(|x| lambda * p * (1.0 + x).powf(p - 1.0))
            .fold(0.0, f64::max);
        let shift = -peak - 1.0;
        let jac = self.jacobian(lambda, u);
        let mut shifted = jac.clone();
        for i in 0..m {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let w = self.lap.volumes();
        let dot = |a: &DVector<f64>, b: &DVector<f64>| (0..m).map(|i| w[i] * a[i] * b[i]).sum::<f64>();
        let mut x = DVector::from_element(m, 1.0);
        let mut mu = f64::NAN;
        for _ in 0..500 {
            let y = lu.solve(&x).ok_or(Error::Singular)?;
            let norm = dot(&y, &y).sqrt();
            x = y / norm;
            let lx = &jac * &x;
            let next = dot(&x, &lx);
            if (next - mu).abs() <= 1e-13 * next.abs().max(1.0) {
                return Ok(next);
            }
            mu = next;
        }
        Ok(mu)
    }
}

/// One converged point of the branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub lambda: f64,
    /// Discrete solution `u_0, ..., u_N` on the uniform grid.
    pub profile: Vec<f64>,
    /// ODE solution through the same `u(0)`, with boundary values zero to
    /// integrator accuracy. Its nonlinearity carries the refined `λ`.
    pub field: RadialField,
    pub sup_norm: f64,
    pub eig_min: f64,
    pub arclength: f64,
    pub residual: f64,
}

impl BranchPoint {
    /// `λ` of the ODE-refined field.
    pub fn refined_lambda(&self) -> f64 {
        match self.field.nonlinearity() {
            Nonlinearity::Navier { lambda, .. } => lambda,
            _ => self.lambda,
        }
    }

    /// `(|u(1)|, |Δu(1)|)` of the refined field.
    pub fn boundary_values(&self) -> (f64, f64) {
        let last = self.field.len() - 1;
        (self.field.u()[last].abs(), self.field.v()[last].abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub params: ProblemParams,
    pub cells: usize,
    pub points: Vec<BranchPoint>,
    /// Fold location from a quadratic fit of `λ(s)`, or the largest `λ`
    /// reached when no fold was found.
    pub lambda_star: f64,
    /// Sup-norm at the fold, interpolated in arclength like `lambda_star`;
    /// the largest sup-norm reached when no fold was found.
    pub fold_sup_norm: f64,
    pub fold_index: Option<usize>,
    /// Continuation ended early because the next point could not be
    /// refined by shooting.
    pub unresolved: bool,
}

impl Branch {
    /// Points before the fold (all points when there is none).
    pub fn minimal(&self) -> &[BranchPoint] {
        match self.fold_index {
            Some(k) => &self.points[..k],
            None => &self.points,
        }
    }
}

/// Continuation settings for [`trace_branch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchControl {
    pub cells: usize,
    pub ds_initial: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_points: usize,
    /// Stop once the scaled arclength exceeds this.
    pub max_arclength: f64,
    /// After the fold, stop once `λ < (1 - past_fold) λ_max`.
    pub past_fold: f64,
    /// After the fold, also stop once the sup-norm exceeds `past_fold_growth`
    /// times its value at the fold.
    pub past_fold_growth: f64,
    /// Shoot an ODE solution for every point.
    pub refine: bool,
}

impl Default for BranchControl {
    fn default() -> Self {
        Self {
            cells: 100,
            ds_initial: 0.02,
            ds_min: 1e-7,
            ds_max: 0.05,
            max_points: 2000,
            max_arclength: 50.0,
            past_fold: 0.02,
            past_fold_growth: 1.5,
            refine: true,
        }
    }
}

impl BranchControl {
    fn validate(&self) -> Result<()> {
        let ok = self.ds_min > 0.0
            && self.ds_min <= self.ds_initial
            && self.ds_initial <= self.ds_max
            && self.max_points > 3
            && self.max_arclength > 0.0
            && self.past_fold > 0.0
            && self.past_fold < 1.0
            && self.past_fold_growth > 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("inconsistent continuation settings"))
        }
    }
}

/// `Δ²W = W^p` from `W(0) = 1`, `ΔW(0) = c < 0`, integrated up to the first
/// zero `ρ` of `ΔW`, provided `W` stays positive there.
struct ScaledProfile {
    field: RadialField,
    end: Sample,
}

impl ScaledProfile {
    fn new(params: ProblemParams, c: f64, reach: f64) -> Result<Self> {
        let nl = Nonlinearity::Navier {
            lambda: 1.0,
            p: params.p(),
        };
        let mut r_max = reach;
        for _ in 0..40 {
            let cfg = IntegrationConfig {
                r_max,
                stop_on_crossing: false,
                ..Default::default()
            };
            let field = integrate_with(params, nl, 0.0, c, &cfg)?.field;
            let (u, v, radii) = (field.u(), field.v(), field.radii());
            let hit = v.iter().position(|&x| x >= 0.0);
            let end = hit.unwrap_or(v.len());
            if u[..end].iter().any(|&x| !(x > -1.0)) {
                return Err(Error::Domain("scaled profile vanishes before its Laplacian"));
            }
            let Some(i) = hit else {
                if field.r_max() < r_max {
                    return Err(Error::Integration {
                        r: field.r_max(),
                        reason: "scaled profile stopped early",
                    });
                }
                r_max *= 2.0;
                continue;
            };
            if i == 0 {
                return Err(Error::Domain("scaled profile starts with a nonnegative Laplacian"));
            }
            let (mut r0, mut r1) = (radii[i - 1], radii[i]);
            let (mut v0, mut v1) = (v[i - 1], v[i]);
            for _ in 0..60 {
                if v1 == v0 {
                    break;
                }
                let r = (r0 - v0 * (r1 - r0) / (v1 - v0)).clamp(radii[i - 1], radii[i]);
                let vr = field.sample(r)?.v;
                if vr == 0.0 || (r - r1).abs() <= 1e-16 * r {
                    r1 = r;
                    break;
                }
                (r0, v0, r1, v1) = (r1, v1, r, vr);
            }
            let end = field.sample(r1)?;
            if !(1.0 + end.u > 0.0) {
                return Err(Error::Domain("scaled profile vanishes before its Laplacian"));
            }
            return Ok(Self { field, end });
        }
        Err(Error::Integration {
            r: r_max,
            reason: "Laplacian of the scaled profile never vanished",
        })
    }

    fn rho(&self) -> f64 {
        self.end.r
    }

    /// `W(ρ)`, the reciprocal of `1 + u(0)`.
    fn w(&self) -> f64 {
        1.0 + self.end.u
    }

    /// The Navier solution `1 + u(r) = W(ρ r) / W(ρ)` on the unit ball.
    fn navier_field(&self, params: ProblemParams) -> Result<RadialField> {
        let (rho, k) = (self.rho(), 1.0 / self.w());
        let p = params.p();
        let lambda = rho.powi(4) * self.w().powf(p - 1.0);
        let vol = k * k * rho.powf(4.0 - params.nf());
        let mut cols = FieldColumns::default();
        let (mut vol_v2, mut vol_f) = (Vec::new(), Vec::new());
        let mut push = |t: f64, u: f64, du: f64, v: f64, dv: f64, v2: f64, f: f64| {
            cols.radii.push(t / rho);
            cols.u.push(k * (1.0 + u) - 1.0);
            cols.du.push(k * rho * du);
            cols.v.push(k * rho * rho * v);
            cols.dv.push(k * rho * rho * rho * dv);
            vol_v2.push(vol * v2);
            vol_f.push(vol * f);
        };
        let w = &self.field;
        for i in 0..w.len() {
            let t = w.radii()[i];
            if t >= rho * (1.0 - 1e-9) {
                break;
            }
            push(t, w.u()[i], w.du()[i], w.v()[i], w.dv()[i], w.vol_v2()[i], w.vol_f()[i]);
        }
        let e = self.end;
        push(rho, e.u, e.du, 0.0, e.dv, e.vol_v2, e.vol_f);
        let nl = Nonlinearity::Navier { lambda, p };
        let start = w.taylor_start().map(|r0| r0 / rho);
        let field = RadialField::with_integrals(params, nl, cols, vol_v2, vol_f, true, w.tolerance())?;
        Ok(match start {
            Some(r0) => field.with_taylor_start(r0),
            None => field,
        })
    }
}

/// Navier solution with `u(0) = a` from the scaling of the pure-power
/// problem, bracketing `ΔW(0)` from the grid values `(Δu(0), λ)`.
fn scaled_solution(params: ProblemParams, a: f64, b_guess: f64, lambda_guess: f64) -> Result<ScaledProfile> {
    let p = params.p();
    let k = 1.0 + a;
    let rho = (lambda_guess * k.powf(p - 1.0)).powf(0.25);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain("no scaled guess"));
    }
    let reach = 2.0 * rho;
    // W(ρ) = 1 / (1 + u(0)), taken as zero past the admissible range
    let target = 1.0 / k;
    let excess = |c: f64| ScaledProfile::new(params, c, reach).map_or(target, |s| target - s.w());
    let start = b_guess / (k * rho * rho);
    if !(start < 0.0) || !start.is_finite() {
        return Err(Error::Domain("no scaled guess"));
    }
    // a(c) grows as c decreases: `near` keeps excess < 0, `far` excess > 0
    let (mut near, mut far) = (start, start);
    let (mut g_near, mut g_far) = (excess(start), 0.0);
    let mut offset = 1e-4;
    for _ in 0..60 {
        if g_near <= 0.0 && g_far > 0.0 {
            break;
        }
        if g_near > 0.0 {
            (far, g_far) = (near, g_near);
            near = start / (1.0 + offset);
            g_near = excess(near);
        } else {
            (near, g_near) = (far, g_far);
            far = start * (1.0 + offset);
            g_far = excess(far);
        }
        offset *= 2.0;
    }
    if !(g_near <= 0.0 && g_far > 0.0) {
        return Err(Error::Domain("no bracket for the scaled amplitude"));
    }
    let mut side = 0;
    let mut resolved = g_near.abs();
    for _ in 0..100 {
        if resolved <= 1e-3 * AMPLITUDE_RTOL * target * a || (far - near).abs() <= 4.0 * f64::EPSILON * near.abs() {
            break;
        }
        let c = near - g_near * (far - near) / (g_far - g_near);
        let c = if c == near || c == far { 0.5 * (near + far) } else { c };
        let g = excess(c);
        if g > 0.0 {
            far = c;
            g_far = g;
            if side == -1 {
                g_near *= 0.5;
            }
            side = -1;
        } else {
            near = c;
            g_near = g;
            resolved = g.abs();
            if side == 1 {
                g_far *= 0.5;
            }
            side = 1;
        }
    }
    ScaledProfile::new(params, near, reach)
}

/// Shoots `u(0) = a` with unknown `Δu(0)` and `λ` so that `u(1) = Δu(1) = 0`.
pub fn refine_by_shooting(params: ProblemParams, a: f64, b_guess: f64, lambda_guess: f64) -> Result<RadialField> {
    let cfg = IntegrationConfig {
        r_max: 1.0,
        blowup_threshold: Some(1e12),
        stop_on_crossing: false,
        rel_tol: 1e-14,
        abs_tol: 1e-16,
        ..Default::default()
    };
    let p = params.p();
    let ends = |b: f64, lambda: f64| -> Result<(f64, f64, RadialField)> {
        let field = integrate_with(params, Nonlinearity::Navier { lambda, p }, a, b, &cfg)?.field;
        if field.r_max() < 1.0 {
            return Err(Error::Integration {
                r: field.r_max(),
                reason: "Navier shooting left the admissible range",
            });
        }
        let last = field.len() - 1;
        Ok((field.u()[last], field.v()[last], field))
    };
    let scaled = scaled_solution(params, a, b_guess, lambda_guess).and_then(|s| {
        let field = s.navier_field(params)?;
        Ok((1.0 / s.w() - 1.0, field))
    });
    let (b0, l0) = match scaled {
        Ok((amplitude, field)) if (amplitude - a).abs() <= AMPLITUDE_RTOL * a.abs() => return Ok(field),
        // the amplitude is not resolved: polish by shooting from the scaled data
        Ok((_, field)) => shooting_data(&field),
        Err(_) => (b_guess, lambda_guess),
    };
    let (mut b, mut lambda) = (b0, l0);
    let (mut fu, mut fv, mut field) = ends(b, lambda)?;
    let scale_u = a.abs().max(f64::MIN_POSITIVE);
    let mismatch = |u1: f64, v1: f64, b: f64| (u1 / scale_u).abs().max((v1 / b.abs().max(f64::MIN_POSITIVE)).abs());
    for _ in 0..60 {
        if mismatch(fu, fv, b) <= 1e-13 {
            break;
        }
        let db = 1e-9 * b.abs().max(1e-300);
        let dl = 1e-9 * lambda.abs().max(1e-300);
        let (ub, vb, _) = ends(b + db, lambda)?;
        let (ul, vl, _) = ends(b, lambda + dl)?;
        let (j11, j12) = ((ub - fu) / db, (ul - fu) / dl);
        let (j21, j22) = ((vb - fv) / db, (vl - fv) / dl);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let solve = |ru: f64, rv: f64| ((ru * j22 - rv * j12) / det, (j11 * rv - j21 * ru) / det);
        let scaled = |sb: f64, sl: f64| (sb / b.abs().max(f64::MIN_POSITIVE)).abs().max((sl / lambda).abs());
        let (step_b, step_l) = solve(fu, fv);
        let step = scaled(step_b, step_l);
        if step <= 1e-15 {
            break;
        }
        // damp until the simplified Newton step contracts
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (nb, nl) = (b - t * step_b, lambda - t * step_l);
            if let Ok((u1, v1, f)) = ends(nb, nl) {
                let (sb, sl) = solve(u1, v1);
                if scaled(sb, sl) < (1.0 - t / 4.0) * step || scaled(sb, sl) <= 1e-15 {
                    b = nb;
                    lambda = nl;
                    fu = u1;
                    fv = v1;
                    field = f;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let size = mismatch(fu, fv, b);
    if size <= SHOOTING_TOL {
        Ok(field)
    } else {
        Err(Error::NewtonDiverged { lambda, residual: size })
    }
}

/// `(Δu(0), λ)` of a Navier field.
fn shooting_data(field: &RadialField) -> (f64, f64) {
    let lambda = match field.nonlinearity() {
        Nonlinearity::Navier { lambda, .. } => lambda,
        _ => 0.0,
    };
    (field.v()[0], lambda)
}

fn make_point(problem: &NavierProblem, lambda: f64, u: Vec<f64>, arclength: f64, refine: bool) -> Result<BranchPoint> {
    let residual = problem.backward_error(lambda, &u);
    let eig_min = problem.smallest_eigenvalue(lambda, &u)?;
    let lap = problem.laplacian();
    let v0 = lap.apply(&u)[0];
    let sup_norm = u[0];
    let field = if refine && lambda > 0.0 && sup_norm > 0.0 {
        refine_by_shooting(problem.params(), sup_norm, v0, lambda)?
    } else {
        let cfg = IntegrationConfig {
            r_max: 1.0,
            stop_on_crossing: false,
            ..Default::default()
        };
        let nl = Nonlinearity::Navier {
            lambda,
            p: problem.params().p(),
        };
        integrate_with(problem.params(), nl, sup_norm, v0, &cfg)?.field
    };
    let mut profile = u;
    profile.push(0.0);
    Ok(BranchPoint {
        lambda,
        profile,
        field,
        sup_norm,
        eig_min,
        arclength,
        residual,
    })
}

/// Newton solve at fixed `λ` from `guess` (zero when `None`).
pub fn solve_at(params: ProblemParams, cells: usize, lambda: f64, guess: Option<&[f64]>) -> Result<BranchPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain("lambda must be a finite positive real"));
    }
    let problem = NavierProblem::new(params, cells)?;
    let start = match guess {
        Some(g) if g.len() == cells + 1 => g[..cells].to_vec(),
        Some(g) if g.len() == cells => g.to_vec(),
        Some(_) => return Err(Error::Domain("guess does not match the grid")),
        None => vec![0.0; cells],
    };
    let (u, _) = problem.newton(lambda, &start)?;
    make_point(&problem, lambda, u, 0.0, true)
}

struct Scaled {
    cells: f64,
    lambda_scale: f64,
}

impl Scaled {
    fn dot(&self, a: &[f64], al: f64, b: &[f64], bl: f64) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / self.cells
            + al * bl / (self.lambda_scale * self.lambda_scale)
    }
}

fn tangent(
    problem: &NavierProblem,
    scaled: &Scaled,
    lambda: f64,
    u: &[f64],
    prev: (&[f64], f64),
) -> Result<(Vec<f64>, f64)> {
    let m = u.len();
    let p = problem.params().p();
    let mut mat = DMatrix::zeros(m + 1, m + 1);
    mat.view_mut((0, 0), (m, m)).copy_from(&problem.jacobian(lambda, u));
    for i in 0..m {
        mat[(i, m)] = -(1.0 + u[i]).powf(p);
        mat[(m, i)] = prev.0[i] / scaled.cells;
    }
    mat[(m, m)] = prev.1 / (scaled.lambda_scale * scaled.lambda_scale);
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let z = mat.lu().solve(&rhs).ok_or(Error::Singular)?;
    let (tu, tl): (Vec<f64>, f64) = (z.iter().take(m).copied().collect(), z[m]);
    let norm = scaled.dot(&tu, tl, &tu, tl).sqrt();
    Ok((tu.iter().map(|x| x / norm).collect(), tl / norm))
}

/// Bordered Newton corrector on the hyperplane orthogonal to the tangent.
fn correct(
    problem: &NavierProblem,
    scaled: &Scaled,
    pred: (&[f64], f64),
    t: (&[f64], f64),
) -> Option<(Vec<f64>, f64, usize)> {
    let m = pred.0.len();
    let p = problem.params().p();
    let (mut u, mut lambda) = (pred.0.to_vec(), pred.1);
    for iter in 1..=12 {
        if u.iter().any(|x| !(1.0 + x > 0.0) || !x.is_finite()) {
            return None;
        }
        let g = problem.residual(lambda, &u);
        let du: Vec<f64> = u.iter().zip(pred.0).map(|(a, b)| a - b).collect();
        let constraint = scaled.dot(t.0, t.1, &du, lambda - pred.1);
        let mut mat = DMatrix::zeros(m + 1, m + 1);
        mat.view_mut((0, 0), (m, m)).copy_from(&problem.jacobian(lambda, &u));
        for i in 0..m {
            mat[(i, m)] = -(1.0 + u[i]).powf(p);
            mat[(m, i)] = t.0[i] / scaled.cells;
        }
        mat[(m, m)] = t.1 / (scaled.lambda_scale * scaled.lambda_scale);
        let mut rhs = DVector::from_vec(g);
        rhs = rhs.push(constraint);
        let step = mat.lu().solve(&rhs)?;
        for i in 0..m {
            u[i] -= step[i];
        }
        lambda -= step[m];
        let step_norm = scaled
            .dot(&step.as_slice()[..m], step[m], &step.as_slice()[..m], step[m])
            .sqrt();
        let small = step_norm <= 1e-11;
        if small && problem.backward_error(lambda, &u) <= NEWTON_TOL {
            return Some((u, lambda, iter));
        }
    }
    None
}

/// Pseudo-arclength continuation from `λ = 0, u = 0` through the first fold.
///
/// The arclength uses the scaled norm `ds² = mean(Δu²) + (Δλ/λ₁)²` with `λ₁`
/// the first eigenvalue of the discrete `Δ²`.
pub fn trace_branch(params: ProblemParams, control: &BranchControl) -> Result<Branch> {
    control.validate()?;
    let problem = NavierProblem::new(params, control.cells)?;
    let m = control.cells;
    let zero = vec![0.0; m];
    let lambda_scale = problem.smallest_eigenvalue(0.0, &zero)?;
    let scaled = Scaled {
        cells: m as f64,
        lambda_scale,
    };
    let mut u = zero.clone();
    let mut lambda = 0.0;
    let (mut tu, mut tl) = tangent(&problem, &scaled, 0.0, &zero, (&zero, 1.0))?;
    let mut ds = control.ds_initial;
    let mut s = 0.0;
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut lambda_max = 0.0f64;
    let mut fold = None;
    let mut unresolved = false;
    while points.len() < control.max_points && s < control.max_arclength {
        let pred_u: Vec<f64> = u.iter().zip(&tu).map(|(x, t)| x + ds * t).collect();
        let pred_l = lambda + ds * tl;
        match correct(&problem, &scaled, (&pred_u, pred_l), (&tu, tl)) {
            Some((nu, nl, iters)) if nl > 0.0 => {
                let du: Vec<f64> = nu.iter().zip(&u).map(|(a, b)| a - b).collect();
                s += scaled.dot(&du, nl - lambda, &du, nl - lambda).sqrt();
                let (ntu, ntl) = tangent(&problem, &scaled, nl, &nu, (&tu, tl))?;
                u = nu;
                lambda = nl;
                tu = ntu;
                tl = ntl;
                let pt = match make_point(&problem, lambda, u.clone(), s, control.refine) {
                    Ok(made) => made,
                    // the profile has concentrated below the grid resolution
                    Err(_) if !points.is_empty() => {
                        unresolved = true;
                        break;
                    }
                    Err(e) => return Err(e),
                };
                points.push(pt);
                if lambda > lambda_max {
                    lambda_max = lambda;
                } else if fold.is_none() {
                    fold = Some(points.len() - 2);
                }
                let grown = fold.is_some_and(|k: usize| {
                    points[points.len() - 1].sup_norm > control.past_fold_growth * points[k].sup_norm
                });
                if fold.is_some() && lambda < (1.0 - control.past_fold) * lambda_max || grown {
                    break;
                }
                if iters <= 3 {
                    ds = (ds * 1.5).min(control.ds_max);
                }
            }
            _ => {
                ds *= 0.5;
                if ds < control.ds_min {
                    return Err(Error::ContinuationStall {
                        points: points.len(),
                        lambda,
                    });
                }
            }
        }
    }
    let (lambda_star, fold_sup_norm) = match fold {
        Some(k) if k > 0 && k + 1 < points.len() => {
            let pts = &points[k - 1..=k + 1];
            match fold_vertex(pts) {
                Some((s_star, l_star)) => (l_star, quadratic_at(pts, |p| p.sup_norm, s_star)),
                None => (points[k].lambda, points[k].sup_norm),
            }
        }
        Some(k) => (points[k].lambda, points[k].sup_norm),
        None => (lambda_max, points.iter().map(|p| p.sup_norm).fold(0.0, f64::max)),
    };
    Ok(Branch {
        params,
        cells: m,
        points,
        lambda_star,
        fold_sup_norm,
        fold_index: fold,
        unresolved,
    })
}

/// Vertex `(s*, λ*)` of the parabola `λ(s)` through three points.
fn fold_vertex(pts: &[BranchPoint]) -> Option<(f64, f64)> {
    let (s0, s1, s2) = (pts[0].arclength, pts[1].arclength, pts[2].arclength);
    let (l0, l1, l2) = (pts[0].lambda, pts[1].lambda, pts[2].lambda);
    let d01 = (l1 - l0) / (s1 - s0);
    let d12 = (l2 - l1) / (s2 - s1);
    let a = (d12 - d01) / (s2 - s0);
    if !(a < 0.0) {
        return None;
    }
    // λ(s) = l1 + d (s - s1) + a (s - s1)², with d the derivative at s1
    let d = d01 + a * (s1 - s0);
    Some((s1 - d / (2.0 * a), l1 - d * d / (4.0 * a)))
}

/// Lagrange interpolation of `value` through three points, in arclength.
fn quadratic_at(pts: &[BranchPoint], value: impl Fn(&BranchPoint) -> f64, s: f64) -> f64 {
    let x: [f64; 3] = [pts[0].arclength, pts[1].arclength, pts[2].arclength];
    (0..3)
        .map(|i| {
            let w: f64 = (0..3).filter(|&j| j != i).map(|j| (s - x[j]) / (x[i] - x[j])).product();
            w * value(&pts[i])
        })
        .sum()
}

/// Whether the extremal solution is expected to be bounded, by comparing
/// `n` with the smallest dimension where the singular solution is stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtremalRegime {
    /// `n < n_p(p)`: fold sup-norm asserted bounded and grid-converged.
    Bounded,
    /// `n ≥ n_p(p)`: only the trend is reported.
    TrendOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalReport {
    pub regime: ExtremalRegime,
    pub critical_dimension: u32,
    pub coarse: Branch,
    pub fine: Branch,
    /// Sup-norm at the fold on each grid.
    pub sup_norm_coarse: f64,
    pub sup_norm_fine: f64,
    pub relative_change: f64,
}

impl ExtremalReport {
    /// True when the bounded regime applies and both grids found a fold
    /// with sup-norms within `rel_tol`. Always false in the trend regime.
    pub fn is_bounded_and_converged(&self, rel_tol: f64) -> bool {
        self.regime == ExtremalRegime::Bounded
            && self.coarse.fold_index.is_some()
            && self.fine.fold_index.is_some()
            && self.sup_norm_fine.is_finite()
            && self.relative_change <= rel_tol
    }
}

/// Traces the branch on `control.cells` and twice as many cells and
/// compares the sup-norms at the fold.
pub fn extremal_regularity_probe(params: ProblemParams, control: &BranchControl) -> Result<ExtremalReport> {
    let critical_dimension = min_stable_dimension(params.p())?;
    let regime = if params.n() < critical_dimension {
        ExtremalRegime::Bounded
    } else {
        ExtremalRegime::TrendOnly
    };
    let coarse = trace_branch(params, control)?;
    let fine_control = BranchControl {
        cells: 2 * control.cells,
        ..*control
    };
    let fine = trace_branch(params, &fine_control)?;
    let sup_norm_coarse = coarse.fold_sup_norm;
    let sup_norm_fine = fine.fold_sup_norm;
    let relative_change = (sup_norm_fine - sup_norm_coarse).abs() / sup_norm_fine.abs().max(f64::MIN_POSITIVE);
    Ok(ExtremalReport {
        regime,
        critical_dimension,
        coarse,
        fine,
        sup_norm_coarse,
        sup_norm_fine,
        relative_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, p: f64) -> ProblemParams {
        ProblemParams::new(n, p).unwrap()
    }

    #[test]
    fn volume_weighted_laplacian_is_symmetric() {
        let lap = Laplacian::new(6, 20).unwrap();
        let a = lap.matrix();
        for i in 0..20 {
            for j in 0..20 {
                let lhs = lap.volumes()[i] * a[(i, j)];
                let rhs = lap.volumes()[j] * a[(j, i)];
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn tridiagonal_solve_inverts_apply() {
        let lap = Laplacian::new(16, 50).unwrap();
        let x: Vec<f64> = (0..50).map(|i| (0.3 * i as f64).sin() + 1.0).collect();
        let y = lap.solve(&lap.apply(&x));
        for (a, b) in x.iter().zip(&y) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn scaled_field_solves_the_navier_problem() {
        let pr = params(6, 3.0);
        for a in [0.2, 1.0, 1.4] {
            let guess = solve_at(pr, 60, 40.0, None).unwrap();
            let field = refine_by_shooting(pr, a, guess.field.v()[0], 40.0).unwrap();
            let (b, lambda) = shooting_data(&field);
            assert_relative_eq!(field.u()[0], a, max_relative = 1e-6);
            assert_relative_eq!(field.r_max(), 1.0, max_relative = 1e-14);
            let cfg = IntegrationConfig {
                r_max: 1.0,
                stop_on_crossing: false,
                ..Default::default()
            };
            let forward = integrate_with(pr, Nonlinearity::Navier { lambda, p: 3.0 }, a, b, &cfg)
                .unwrap()
                .field;
            let last = forward.len() - 1;
            assert!(forward.u()[last].abs() <= 1e-8 * a, "{}", forward.u()[last]);
            assert!(forward.v()[last].abs() <= 1e-8 * b.abs(), "{}", forward.v()[last]);
        }
    }

    #[test]
    fn laplacian_is_second_order() {
        // Δ(1 - r²) = -2n
        for cells in [20, 40] {
            let lap = Laplacian::new(6, cells).unwrap();
            let r = lap.radii();
            let u: Vec<f64> = r[..cells].iter().map(|x| 1.0 - x * x).collect();
            let au = lap.apply(&u);
            for x in au {
                assert_relative_eq!(x, -12.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn first_navier_eigenvalue_converges() {
        // (j_{2,1})⁴ for n = 6
        let exact = 5.135_622_301_840_683f64.powi(4);
        let mut errs = Vec::new();
        for cells in [50, 100] {
            let prob = NavierProblem::new(params(6, 3.0), cells).unwrap();
            let mu = prob.smallest_eigenvalue(0.0, &vec![0.0; cells]).unwrap();
            errs.push((mu - exact).abs() / exact);
        }
        assert!(errs[1] < 1e-3, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn small_lambda_solution_is_positive_and_stable() {
        let pt = solve_at(params(6, 3.0), 60, 50.0, None).unwrap();
        assert!(pt.residual <= NEWTON_TOL);
        assert!(pt.profile[..60].iter().all(|&u| u > 0.0));
        assert!(pt.eig_min > 0.0);
        let (bu, bv) = pt.boundary_values();
        assert!(bu < 1e-10 && bv < 1e-10, "{bu} {bv}");
        assert!(solve_at(params(6, 3.0), 60, -1.0, None).is_err());
    }
}
