//! Sampled radial fields and their continuous reconstruction.
//!
//! A [`RadialField`] stores `u`, `u'`, `v = Δu` and `v'` on an increasing grid
//! of positive radii together with the running volume integrals
//!
//! ```text
//! V2(r) = ∫_0^r v(s)² s^{n-1} ds,    VF(r) = ∫_0^r F(u(s)) s^{n-1} ds
//! ```
//!
//! Between grid points every quantity is reconstructed by quintic Hermite
//! interpolation. The second and third radial derivatives needed for that
//! come from the radial Laplacian (`u'' = v - (n-1)u'/r`) and from the
//! equation (`v'' = f(u) - (n-1)v'/r`), so the reconstruction is the dense
//! output of the underlying ODE and is sixth-order accurate in the step.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{quintic_hermite, quintic_hermite_integral, Jet};

/// Raw column data of a field: `r, u, u', v, v'`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldColumns {
    pub radii: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

impl FieldColumns {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let n = self.radii.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        if [self.u.len(), self.du.len(), self.v.len(), self.dv.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Domain("field columns have different lengths"));
        }
        if !(self.radii[0] > 0.0) || self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("radii must be positive and strictly increasing"));
        }
        let all = [&self.radii, &self.u, &self.du, &self.v, &self.dv];
        if all.iter().any(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Domain("field contains non-finite samples"));
        }
        Ok(())
    }
}

/// Everything known about a field at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub v: f64,
    pub dv: f64,
    pub vol_v2: f64,
    pub vol_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    params: ProblemParams,
    nonlinearity: Nonlinearity,
    cols: FieldColumns,
    vol_v2: Vec<f64>,
    vol_f: Vec<f64>,
    regular_at_origin: bool,
    tolerance: f64,
    taylor_start: Option<f64>,
}

impl RadialField {
    /// Builds a field from columns, computing the volume integrals by
    /// quadrature of the Hermite reconstruction.
    ///
    /// The integral over `[0, r_0]` assumes the integrand behaves like a
    /// power of `r` below the first sample, with the power read off the
    /// logarithmic derivative there. For fields regular at the origin this
    /// is the `r^{n-1}` behaviour.
    pub fn from_columns(
        params: ProblemParams,
        nonlinearity: Nonlinearity,
        cols: FieldColumns,
        regular_at_origin: bool,
        tolerance: f64,
    ) -> Result<Self> {
        cols.validate()?;
        let mut field = Self {
            params,
            nonlinearity,
            vol_v2: Vec::new(),
            vol_f: Vec::new(),
            cols,
            regular_at_origin,
            tolerance,
            taylor_start: None,
        };
        field.vol_v2 = field.accumulate(|f, i| f.v2_jet(i));
        field.vol_f = field.accumulate(|f, i| f.potential_jet(i));
        Ok(field)
    }

    /// Builds a field whose volume integrals are already known.
    #[allow(clippy::too_many_arguments)]
    pub fn with_integrals(
        params: ProblemParams,
        nonlinearity: Nonlinearity,
        cols: FieldColumns,
        vol_v2: Vec<f64>,
        vol_f: Vec<f64>,
        regular_at_origin: bool,
        tolerance: f64,
    ) -> Result<Self> {
        cols.validate()?;
        if vol_v2.len() != cols.len() || vol_f.len() != cols.len() {
            return Err(Error::Domain("volume integrals do not match the grid"));
        }
        Ok(Self {
            params,
            nonlinearity,
            cols,
            vol_v2,
            vol_f,
            regular_at_origin,
            tolerance,
            taylor_start: None,
        })
    }

    fn accumulate(&self, jet: impl Fn(&Self, usize) -> Jet) -> Vec<f64> {
        let r = &self.cols.radii;
        let first = jet(self, 0);
        let start = if first.y == 0.0 {
            0.0
        } else {
            let k = r[0] * first.d1 / first.y;
            if k > -1.0 {
                first.y * r[0] / (k + 1.0)
            } else {
                0.0
            }
        };
        let mut out = Vec::with_capacity(r.len());
        out.push(start);
        let mut left = first;
        for i in 1..r.len() {
            let right = jet(self, i);
            let acc = out[i - 1] + quintic_hermite_integral(left, right, r[i] - r[i - 1], 1.0);
            out.push(acc);
            left = right;
        }
        out
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn columns(&self) -> &FieldColumns {
        &self.cols
    }

    pub fn radii(&self) -> &[f64] {
        &self.cols.radii
    }

    pub fn u(&self) -> &[f64] {
        &self.cols.u
    }

    pub fn du(&self) -> &[f64] {
        &self.cols.du
    }

    pub fn v(&self) -> &[f64] {
        &self.cols.v
    }

    pub fn dv(&self) -> &[f64] {
        &self.cols.dv
    }

    pub fn vol_v2(&self) -> &[f64] {
        &self.vol_v2
    }

    pub fn vol_f(&self) -> &[f64] {
        &self.vol_f
    }

    /// Running integral `∫_0^r (v²/2 - F(u)) s^{n-1} ds` at each grid point.
    pub fn vol_int(&self) -> Vec<f64> {
        self.vol_v2.iter().zip(&self.vol_f).map(|(a, b)| 0.5 * a - b).collect()
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.cols.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        self.cols.radii[self.len() - 1]
    }

    /// Whether the field extends smoothly to `r = 0`.
    pub fn is_regular_at_origin(&self) -> bool {
        self.regular_at_origin
    }

    /// Relative accuracy the samples were produced with.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Marks the first sample as a Taylor-series start at radius `r0`.
    pub fn with_taylor_start(mut self, r0: f64) -> Self {
        self.taylor_start = Some(r0);
        self
    }

    /// Radius of the series start, for fields integrated from the origin.
    pub fn taylor_start(&self) -> Option<f64> {
        self.taylor_start
    }

    fn nm1(&self) -> f64 {
        self.params.nf() - 1.0
    }

    fn u_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let du = self.cols.du[i];
        Jet::new(self.cols.u[i], du, self.cols.v[i] - self.nm1() * du / r)
    }

    fn du_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let du = self.cols.du[i];
        let d2u = self.cols.v[i] - self.nm1() * du / r;
        let d3u = self.cols.dv[i] - self.nm1() * (d2u / r - du / (r * r));
        Jet::new(du, d2u, d3u)
    }

    fn v_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let dv = self.cols.dv[i];
        Jet::new(
            self.cols.v[i],
            dv,
            self.nonlinearity.f(self.cols.u[i]) - self.nm1() * dv / r,
        )
    }

    fn dv_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let u = self.cols.u[i];
        let du = self.cols.du[i];
        let dv = self.cols.dv[i];
        let d2v = self.nonlinearity.f(u) - self.nm1() * dv / r;
        let d3v = self.nonlinearity.df(u) * du - self.nm1() * (d2v / r - dv / (r * r));
        Jet::new(dv, d2v, d3v)
    }

    /// Jet of `g = v² r^{n-1}`.
    fn v2_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let v = self.v_jet(i);
        let m = self.nm1();
        let w = r.powf(m);
        let g = v.y * v.y * w;
        let g1 = 2.0 * v.y * v.d1 * w + m * v.y * v.y * w / r;
        let g2 = 2.0 * (v.d1 * v.d1 + v.y * v.d2) * w
            + 4.0 * m * v.y * v.d1 * w / r
            + m * (m - 1.0) * v.y * v.y * w / (r * r);
        Jet::new(g, g1, g2)
    }

    /// Jet of `g = F(u) r^{n-1}`.
    fn potential_jet(&self, i: usize) -> Jet {
        let r = self.cols.radii[i];
        let u = self.u_jet(i);
        let nl = &self.nonlinearity;
        let m = self.nm1();
        let w = r.powf(m);
        let big_f = nl.potential(u.y);
        let f = nl.f(u.y);
        let g = big_f * w;
        let g1 = f * u.d1 * w + m * big_f * w / r;
        let g2 = (nl.df(u.y) * u.d1 * u.d1 + f * u.d2) * w
            + 2.0 * m * f * u.d1 * w / r
            + m * (m - 1.0) * big_f * w / (r * r);
        Jet::new(g, g1, g2)
    }

    /// Index `i` with `radii[i] <= r <= radii[i+1]`.
    fn locate(&self, r: f64) -> Result<usize> {
        let radii = &self.cols.radii;
        let (lo, hi) = (radii[0], radii[radii.len() - 1]);
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfGrid { r, lo, hi });
        }
        let i = radii.partition_point(|&x| x <= r);
        Ok(i.saturating_sub(1).min(radii.len() - 2))
    }

    /// Reconstructs the field at any radius inside the grid.
    pub fn sample(&self, r: f64) -> Result<Sample> {
        let i = self.locate(r)?;
        let r0 = self.cols.radii[i];
        let h = self.cols.radii[i + 1] - r0;
        let t = (r - r0) / h;
        let interp = |jet: fn(&Self, usize) -> Jet| quintic_hermite(jet(self, i), jet(self, i + 1), h, t);
        let integral = |jet: fn(&Self, usize) -> Jet, base: f64| {
            base + quintic_hermite_integral(jet(self, i), jet(self, i + 1), h, t)
        };
        let u = interp(Self::u_jet);
        let du = interp(Self::du_jet);
        let v = interp(Self::v_jet);
        let dv = interp(Self::dv_jet);
        Ok(Sample {
            r,
            u,
            du,
            d2u: v - self.nm1() * du / r,
            v,
            dv,
            vol_v2: integral(Self::v2_jet, self.vol_v2[i]),
            vol_f: integral(Self::potential_jet, self.vol_f[i]),
        })
    }
}
