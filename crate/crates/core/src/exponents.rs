//! Closed-form constants of the problem `Δ²u = |u|^{p-1}u` and the
//! stability / criticality predicates built from them.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// Relative tolerance used at the stability boundary `p K0 = n²(n-4)²/16`.
///
/// The closed form for the Joseph-Lundgren exponent loses a few digits to
/// cancellation near `n = 13`, so both sides of the equivalence are compared
/// with the same slack.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Upper limit for the dimension scan in [`min_stable_dimension`].
const MAX_SCAN_DIMENSION: u32 = 1 << 24;

/// Dimension `n` and exponent `p` of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    n: u32,
    p: f64,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("dimension n must be at least 1"));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain("exponent p must be a finite real > 1"));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `n` as a float, for the formulas.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `4/(p-1)`, the homogeneity degree of the singular solution.
    pub fn gamma(&self) -> f64 {
        4.0 / (self.p - 1.0)
    }

    /// `n ≥ 5` and `p > (n+4)/(n-4)`.
    pub fn is_supercritical(&self) -> bool {
        self.n >= 5 && !sobolev_exponent(self.n).ge_f64(self.p)
    }

    pub fn require_supercritical(&self) -> Result<()> {
        if self.is_supercritical() {
            Ok(())
        } else {
            Err(Error::Domain("requires n >= 5 and p > (n+4)/(n-4)"))
        }
    }

    /// `n - 4(p+1)/(p-1)`: the scaling exponent of `∫_{B_R} (Δu)² + |u|^{p+1}`.
    pub fn energy_scaling_exponent(&self) -> f64 {
        self.nf() - 4.0 * (self.p + 1.0) / (self.p - 1.0)
    }

    pub fn derived(&self) -> DerivedConstants {
        derive_constants(*self)
    }
}

/// Every scalar constant attached to `(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub gamma: f64,
    /// Amplitude constant of the singular solution, `u_s = K0^{1/(p-1)} r^{-γ}`.
    pub k0: f64,
    pub p_s: ExtReal,
    pub p_c: ExtReal,
    /// Best Hardy-Rellich constant `n²(n-4)²/16`.
    pub hardy_rellich: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `2α - 2β - 2`, the constant in the derivative lower bound of the energy.
    pub c_np: f64,
    pub j1: f64,
    pub j2: f64,
    /// Surface area of the unit sphere `S^{n-1}`.
    pub omega: f64,
}

impl DerivedConstants {
    /// `α - β - 1`; positive throughout the supercritical range.
    pub fn alpha_beta_margin(&self) -> f64 {
        self.alpha - self.beta - 1.0
    }
}

fn k0_of(n: f64, gamma: f64) -> f64 {
    gamma * (gamma + 2.0) * (gamma - n + 4.0) * (gamma - n + 2.0)
}

fn hardy_rellich_of(n: f64) -> f64 {
    n * n * (n - 4.0) * (n - 4.0) / 16.0
}

pub fn derive_constants(params: ProblemParams) -> DerivedConstants {
    let n = params.nf();
    let g = params.gamma();
    let alpha = n - 1.0 - 2.0 * g;
    let beta = g * (g - n + 2.0);
    DerivedConstants {
        gamma: g,
        k0: k0_of(n, g),
        p_s: sobolev_exponent(params.n),
        p_c: joseph_lundgren_exponent(params.n),
        hardy_rellich: hardy_rellich_of(n),
        alpha,
        beta,
        c_np: 2.0 * alpha - 2.0 * beta - 2.0,
        j1: (g + 2.0) * (n - 4.0 - g) + g * (n - 2.0 - g),
        j2: g * (g + 2.0) * (n - 4.0 - g) * (n - 2.0 - g),
        omega: sphere_area(params.n),
    }
}

/// `+inf` for `n ≤ 4`, `(n+4)/(n-4)` otherwise.
pub fn sobolev_exponent(n: u32) -> ExtReal {
    if n <= 4 {
        ExtReal::PosInf
    } else {
        let n = f64::from(n);
        ExtReal::Finite((n + 4.0) / (n - 4.0))
    }
}

/// Fourth-order Joseph-Lundgren exponent: `+inf` for `n ≤ 12`.
pub fn joseph_lundgren_exponent(n: u32) -> ExtReal {
    if n <= 12 {
        return ExtReal::PosInf;
    }
    let n = f64::from(n);
    let inner = (n * n - 8.0 * n + 32.0).sqrt();
    let root = (n * n + 4.0 - n * inner).sqrt();
    ExtReal::Finite((n + 2.0 - root) / (n - 6.0 - root))
}

/// Surface area `2 π^{n/2} / Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let half = 0.5 * f64::from(n);
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// The quartic test `p K0 ≤ n²(n-4)²/16` with no range check.
fn quartic_stable(n: f64, p: f64) -> bool {
    let pk0 = p * k0_of(n, 4.0 / (p - 1.0));
    let hr = hardy_rellich_of(n);
    pk0 <= hr + BOUNDARY_RTOL * hr.max(pk0.abs())
}

/// Whether the singular solution `u_s` is stable.
pub fn is_singular_solution_stable(params: ProblemParams) -> Result<bool> {
    params.require_supercritical()?;
    Ok(quartic_stable(params.nf(), params.p))
}

/// `p ≥ p_c(n)` with the same boundary slack as the quartic test.
pub fn exceeds_joseph_lundgren(params: ProblemParams) -> bool {
    match joseph_lundgren_exponent(params.n) {
        ExtReal::PosInf => false,
        ExtReal::Finite(pc) => params.p >= pc * (1.0 - BOUNDARY_RTOL),
    }
}

/// Smallest `n ≥ 5` with `p > (n+4)/(n-4)` for which `u_s` is stable.
pub fn min_stable_dimension(p: f64) -> Result<u32> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain("exponent p must be a finite real > 1"));
    }
    (5..MAX_SCAN_DIMENSION)
        .find(|&n| {
            let nf = f64::from(n);
            p > (nf + 4.0) / (nf - 4.0) && quartic_stable(nf, p)
        })
        .ok_or(Error::Domain("exponent too close to 1 for the dimension scan"))
}

/// `(p - 1, p J1 - n(n-4)/2, p J2 - n²(n-4)²/16)`.
///
/// All three are positive when `(n+4)/(n-4) < p < p_c(n)`, the range where
/// homogeneous stable solutions must vanish.
pub fn homogeneous_triviality_margins(params: ProblemParams) -> Result<(f64, f64, f64)> {
    if params.n < 5 {
        return Err(Error::Domain("requires n >= 5"));
    }
    let c = params.derived();
    let n = params.nf();
    let p = params.p;
    Ok((p - 1.0, p * c.j1 - n * (n - 4.0) / 2.0, p * c.j2 - c.hardy_rellich))
}

/// Admissibility of the monotonicity formula for `Δ²u = -u^{-p}`:
/// `n - 2 + 8/(p+1) > 4/(p+1) (4/(p+1) + n - 2)`.
pub fn negative_exponent_condition(n: u32, p: f64) -> Result<bool> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain("exponent p must be a finite real > 0"));
    }
    let n = f64::from(n);
    let q = 4.0 / (p + 1.0);
    Ok(n - 2.0 + 2.0 * q > q * (q + n - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, p: f64) -> ProblemParams {
        ProblemParams::new(n, p).unwrap()
    }

    #[test]
    fn k0_for_n16_p3() {
        let c = params(16, 3.0).derived();
        assert_eq!(c.gamma, 2.0);
        assert_eq!(c.k0, 960.0);
        assert_eq!(c.j2, c.k0);
    }

    #[test]
    fn sobolev_and_gamma_for_n5_p2() {
        let c = params(5, 2.0).derived();
        assert_eq!(c.gamma, 4.0);
        assert_eq!(c.p_s, ExtReal::Finite(9.0));
    }

    #[test]
    fn sobolev_exponent_values() {
        assert_eq!(sobolev_exponent(4), ExtReal::PosInf);
        assert_eq!(sobolev_exponent(1), ExtReal::PosInf);
        assert_eq!(sobolev_exponent(5), ExtReal::Finite(9.0));
        assert_relative_eq!(sobolev_exponent(13).to_f64(), 17.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn joseph_lundgren_infinite_up_to_twelve() {
        for n in 1..=12 {
            assert_eq!(joseph_lundgren_exponent(n), ExtReal::PosInf);
        }
        assert_eq!(params(12, 10.0).derived().p_c, ExtReal::PosInf);
    }

    /// Bisection on the quartic predicate, independent of the closed form.
    fn bisect_pc(n: u32) -> f64 {
        let nf = f64::from(n);
        let g = |p: f64| p * k0_of(nf, 4.0 / (p - 1.0)) - hardy_rellich_of(nf);
        // unstable just above p_S, stable for p large
        let (mut lo, mut hi) = ((nf + 4.0) / (nf - 4.0) * 1.000_001, 1.0e6);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn joseph_lundgren_matches_bisection() {
        let pc13 = joseph_lundgren_exponent(13).to_f64();
        assert!((pc13 - 28.17).abs() < 0.01, "pc(13) = {pc13}");
        for n in [13, 14, 20, 31, 60, 200] {
            let closed = joseph_lundgren_exponent(n).to_f64();
            assert_relative_eq!(closed, bisect_pc(n), max_relative = 1e-10);
            assert!(closed > sobolev_exponent(n).to_f64());
        }
    }

    #[test]
    fn boundary_value_at_pc13() {
        let pc = joseph_lundgren_exponent(13).to_f64();
        let c = params(13, pc).derived();
        assert_relative_eq!(pc * c.k0, 855.5625, max_relative = 1e-12);
        assert!(is_singular_solution_stable(params(13, pc)).unwrap());
        let (_, _, third) = homogeneous_triviality_margins(params(13, pc)).unwrap();
        assert!(third.abs() < 1e-9 * c.hardy_rellich);
    }

    #[test]
    fn n13_p3_is_unstable() {
        let c = params(13, 3.0).derived();
        assert_eq!(3.0 * c.k0, 1512.0);
        assert_eq!(c.hardy_rellich, 855.5625);
        assert!(!is_singular_solution_stable(params(13, 3.0)).unwrap());
        assert!(!exceeds_joseph_lundgren(params(13, 3.0)));
    }

    #[test]
    fn n19_p3_is_stable() {
        assert!(is_singular_solution_stable(params(19, 3.0)).unwrap());
        assert!(exceeds_joseph_lundgren(params(19, 3.0)));
    }

    #[test]
    fn n12_p10_is_unstable() {
        assert!(!is_singular_solution_stable(params(12, 10.0)).unwrap());
    }

    #[test]
    fn stability_rejects_subcritical_input() {
        assert!(is_singular_solution_stable(params(6, 3.0)).is_err());
        assert!(is_singular_solution_stable(params(4, 30.0)).is_err());
    }

    #[test]
    fn min_stable_dimension_for_p3() {
        // For γ = 2 the test reads 384(n-6) ≤ n²(n-4); p = 3 is supercritical from n = 9.
        let first = (9i64..).find(|&n| 384 * (n - 6) <= n * n * (n - 4)).unwrap();
        assert_eq!(first, 19);
        assert_eq!(min_stable_dimension(3.0).unwrap(), 19);
    }

    #[test]
    fn min_stable_dimension_cross_check_p9() {
        let np = min_stable_dimension(9.0).unwrap();
        for n in 5..=200 {
            let pr = params(n, 9.0);
            if !pr.is_supercritical() {
                assert!(n < np);
                continue;
            }
            assert_eq!(is_singular_solution_stable(pr).unwrap(), n >= np, "n = {n}");
        }
    }

    #[test]
    fn triviality_margins() {
        let (a, b, c) = homogeneous_triviality_margins(params(13, 3.0)).unwrap();
        assert!(a > 0.0 && b > 0.0 && c > 0.0);
        // 3·J1 - 58.5 with J1 = 4·7 + 2·9 = 46
        assert_relative_eq!(b, 3.0 * 46.0 - 58.5);
        assert_relative_eq!(c, 1512.0 - 855.5625);
        let (a, b, c) = homogeneous_triviality_margins(params(20, 1000.0)).unwrap();
        assert!(!(a > 0.0 && b > 0.0 && c > 0.0));
    }

    #[test]
    fn negative_exponent_condition_examples() {
        assert!(!negative_exponent_condition(10, 2.0).unwrap());
        assert!(!negative_exponent_condition(20, 2.0).unwrap());
        assert!(negative_exponent_condition(3, 1e9).unwrap());
        assert!(negative_exponent_condition(40, 1e9).unwrap());
        assert!(negative_exponent_condition(10, 0.0).is_err());
    }

    #[test]
    fn negative_exponent_condition_flips_in_p() {
        // For n = 20 the condition reads 18 - 16q - q² > 0 with q = 4/(p+1),
        // so it switches on at q = √82 - 8.
        let q = 82f64.sqrt() - 8.0;
        let p_star = 4.0 / q - 1.0;
        assert!(!negative_exponent_condition(20, p_star * 0.999).unwrap());
        assert!(negative_exponent_condition(20, p_star * 1.001).unwrap());
    }

    #[test]
    fn sphere_area_matches_exact_values() {
        // Γ at integers and half-integers against factorials and √π.
        assert_relative_eq!(libm::tgamma(5.0), 24.0, max_relative = 1e-14);
        assert_relative_eq!(libm::tgamma(0.5), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(libm::tgamma(3.5), 15.0 / 8.0 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        // ω_{15} (sphere in R^16) = 2π^8 / 7!
        assert_relative_eq!(sphere_area(16), 2.0 * PI.powi(8) / 5040.0, max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::new(0, 3.0).is_err());
        assert!(ProblemParams::new(5, 1.0).is_err());
        assert!(ProblemParams::new(5, f64::NAN).is_err());
    }

    #[test]
    fn alpha_beta_margin_positive_when_supercritical() {
        for n in 5..40 {
            let ps = sobolev_exponent(n).to_f64();
            for k in 1..20 {
                let above = params(n, ps * (1.0 + 0.05 * f64::from(k)));
                assert!(above.derived().alpha_beta_margin() > 0.0);
                assert!(above.derived().c_np > 0.0);
                assert!(above.derived().k0 > 0.0);
            }
        }
    }

    #[test]
    fn alpha_beta_margin_sign_change_lies_below_sobolev() {
        // α - β - 1 = (1+γ)(n-2) - γ(γ+2) vanishes at the positive root of
        // γ² - (n-4)γ - (n-2) = 0, which is larger than γ_S = (n-4)/2.
        for n in 5..40u32 {
            let nf = f64::from(n);
            let g0 = 0.5 * ((nf - 4.0) + ((nf - 4.0).powi(2) + 4.0 * (nf - 2.0)).sqrt());
            assert!(g0 > 0.5 * (nf - 4.0));
            let p0 = 1.0 + 4.0 / g0;
            assert!(p0 < sobolev_exponent(n).to_f64());
            assert!(params(n, p0 * 1.001).derived().alpha_beta_margin() > 0.0);
            if p0 * 0.999 > 1.0 {
                assert!(params(n, p0 * 0.999).derived().alpha_beta_margin() < 0.0);
            }
        }
    }
}
