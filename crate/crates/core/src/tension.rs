//! Tension field `τ(φ) = Tr_g ∇dφ` of a map between warped surfaces.
//!
//! Two routes are provided: the closed form for coordinate-linear maps and
//! the general coordinate formula
//! `τˢ = gⁱʲ(φˢᵢⱼ − Γᵏᵢⱼ φˢₖ + Γ̄ˢₐᵦ φᵃᵢ φᵝⱼ)`, which accepts any [`SurfaceMap`].

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel, WarpedSurface, POLE_TOLERANCE};
use crate::grid::GridSpec;
use crate::maps::{LinearMap, MapJet, SurfaceMap};

/// Components `(τ¹, τ²)` in the coordinate frame `(∂/∂ρ, ∂/∂φ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TensionVector {
    pub t1: f64,
    pub t2: f64,
}

impl TensionVector {
    /// Euclidean norm of the coordinate components.
    pub fn norm(&self) -> f64 {
        self.t1.hypot(self.t2)
    }

    pub fn get(&self, alpha: usize) -> f64 {
        match alpha {
            0 => self.t1,
            1 => self.t2,
            _ => panic!("tension index out of range: {alpha}"),
        }
    }

    /// `|τ|²_h = (τ¹)² + λ² (τ²)²` with `λ` evaluated at the image point.
    pub fn norm_sq_in(&self, lambda: f64) -> f64 {
        self.t1 * self.t1 + lambda * lambda * self.t2 * self.t2
    }
}

/// Closed-form tension of `φ = (ar + bθ + c, mr + nθ + l)`:
///
/// `τ¹ = a σ′/σ − (m² + n²/σ²) λλ′(ρ)`,
/// `τ² = m σ′/σ + 2(am + bn/σ²) λ′(ρ)/λ`.
pub fn tension_linear(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    (r, theta): (f64, f64),
) -> Result<TensionVector> {
    let sigma = domain.checked_jet(r)?;
    let lambda = target.checked_jet(map.rho(r, theta))?;
    let LinearMap { a, b, m, n, .. } = *map;
    let log_sigma = sigma.d1 / sigma.value;
    let inv_sigma_sq = 1.0 / (sigma.value * sigma.value);
    Ok(TensionVector {
        t1: a * log_sigma - (m * m + n * n * inv_sigma_sq) * lambda.value * lambda.d1,
        t2: m * log_sigma + 2.0 * (a * m + b * n * inv_sigma_sq) * lambda.d1 / lambda.value,
    })
}

/// Inverse of the domain metric `diag(1, σ²)`.
pub(crate) fn inverse_metric(sigma: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0 / (sigma * sigma)]]
}

/// Evaluates the general harmonic-map operator from a precomputed jet.
pub(crate) fn tension_from_jet(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    r: f64,
    jet: &MapJet,
) -> Result<TensionVector> {
    let sigma = domain.checked_jet(r)?;
    let g_inv = inverse_metric(sigma.value);
    let gamma = christoffel(domain, r)?;
    let gamma_bar = christoffel(target, jet.rho.value)?;
    let grads = [jet.rho.gradient(), jet.phi.gradient()];

    let mut tau = [0.0; 2];
    for (s, out) in tau.iter_mut().enumerate() {
        let hess = jet.component(s).hessian();
        let grad = grads[s];
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                if g_inv[i][j] == 0.0 {
                    continue;
                }
                let mut term = hess[i][j];
                for (k, gk) in grad.iter().enumerate() {
                    term -= gamma.get(k, i, j) * gk;
                }
                for alpha in 0..2 {
                    for beta in 0..2 {
                        term += gamma_bar.get(s, alpha, beta) * grads[alpha][i] * grads[beta][j];
                    }
                }
                acc += g_inv[i][j] * term;
            }
        }
        *out = acc;
    }
    Ok(TensionVector {
        t1: tau[0],
        t2: tau[1],
    })
}

/// Fails with [`Error::Stencil`] when a finite-difference stencil of
/// half-width `reach` around `(r, θ)` meets or straddles a pole.
pub(crate) fn check_stencil<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    (r, theta): (f64, f64),
    reach: f64,
) -> Result<()> {
    let sigma0 = domain.warp.value(r);
    let lambda0 = target.warp.value(map.eval(r, theta).0);
    let offsets = [
        (reach, 0.0),
        (-reach, 0.0),
        (0.0, reach),
        (0.0, -reach),
        (reach, reach),
        (reach, -reach),
        (-reach, reach),
        (-reach, -reach),
    ];
    let stencil_error = Error::Stencil { r, theta };
    for (dr, dt) in offsets {
        let sigma = domain.warp.value(r + dr);
        let lambda = target.warp.value(map.eval(r + dr, theta + dt).0);
        if sigma.abs() < POLE_TOLERANCE
            || lambda.abs() < POLE_TOLERANCE
            || sigma.signum() != sigma0.signum()
            || lambda.signum() != lambda0.signum()
        {
            return Err(stencil_error);
        }
    }
    Ok(())
}

/// Tension from the general coordinate formula, with partials supplied by the
/// map (analytic or finite differences).
pub fn tension_generic<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    (r, theta): (f64, f64),
) -> Result<TensionVector> {
    let jet = map.jet(r, theta);
    domain.checked_jet(r)?;
    target.checked_jet(jet.rho.value)?;
    if let Some(reach) = map.stencil_reach() {
        check_stencil(domain, target, map, (r, theta), reach)?;
    }
    tension_from_jet(domain, target, r, &jet)
}

/// Closed form for linear maps, general formula otherwise.
pub fn tension<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    point: (f64, f64),
) -> Result<TensionVector> {
    match map.as_linear() {
        Some(linear) => tension_linear(domain, target, linear, point),
        None => tension_generic(domain, target, map, point),
    }
}

/// Whether the point is dropped from grid scans by pole exclusion.
pub(crate) fn near_pole<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    r: f64,
    theta: f64,
    margin: f64,
) -> bool {
    domain.warp.value(r).abs() < margin || target.warp.value(map.eval(r, theta).0).abs() < margin
}

/// Largest `‖τ‖` over the non-excluded grid points (see [`GridSpec::max_over`]
/// for the meaning of `cutoff`).
pub fn max_tension_norm<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    grid: &GridSpec,
    cutoff: f64,
) -> Result<f64> {
    grid.max_over(domain, cutoff, |r, theta| {
        if near_pole(domain, target, map, r, theta, grid.pole_margin) {
            return Ok(None);
        }
        Ok(Some(tension(domain, target, map, (r, theta))?.norm()))
    })
}

/// `true` iff the closed-form tension stays below `grid.tolerance_harmonic`
/// at every non-excluded grid point.
pub fn is_harmonic(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    grid: &GridSpec,
) -> Result<bool> {
    let tol = grid.tolerance_harmonic;
    Ok(max_tension_norm(domain, target, map, grid, tol)? < tol)
}

/// Advisory check whether a linear map on the universal cover descends to
/// the torus. Never blocks evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descent {
    /// `ρ` shifts by whole periods of the target's warp across the lattice.
    pub rho: bool,
    /// `φ` shifts by whole fiber periods across the lattice.
    pub phi: bool,
}

impl Descent {
    pub fn descends(&self) -> bool {
        self.rho && self.phi
    }
}

pub fn descent_check(domain: &WarpedSurface, target: &WarpedSurface, map: &LinearMap) -> Descent {
    fn multiple_of(x: f64, period: f64) -> bool {
        let q = x / period;
        (q - q.round()).abs() < 1e-9
    }
    let (pt, ps) = (
        domain.period_t.unwrap_or(TAU),
        domain.period_s.unwrap_or(TAU),
    );
    let rho_period = target.warp.period().unwrap_or(TAU);
    let phi_period = target.period_s.unwrap_or(TAU);
    Descent {
        rho: multiple_of(map.a * pt, rho_period) && multiple_of(map.b * ps, rho_period),
        phi: multiple_of(map.m * pt, phi_period) && multiple_of(map.n * ps, phi_period),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FdSteps, Jet2, SmoothMap};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn flat() -> WarpedSurface {
        WarpedSurface::flat_torus()
    }

    fn sine() -> WarpedSurface {
        WarpedSurface::sphere_sine()
    }

    #[test]
    fn equatorial_map_is_harmonic() {
        let map = LinearMap::new(0.0, 0.0, FRAC_PI_2, 1.0, 2.0, 0.0);
        for p in [(0.1, 0.2), (3.0, -1.0)] {
            let t = tension_linear(&flat(), &sine(), &map, p).unwrap();
            assert_abs_diff_eq!(t.t1, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(t.t2, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn quarter_latitude_map_has_constant_tension() {
        let map = LinearMap::new(0.0, 0.0, FRAC_PI_4, 1.0, 0.0, 0.0);
        let t = tension_linear(&flat(), &sine(), &map, (1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(t.t1, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.t2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_maps_have_zero_tension() {
        let pairs = [
            (flat(), sine()),
            (WarpedSurface::nonflat_torus(2.0).unwrap(), WarpedSurface::sphere_cosine()),
            (WarpedSurface::nonflat_torus(1.5).unwrap(), sine()),
        ];
        let map = LinearMap::constant(0.8, 2.0);
        for (d, t) in &pairs {
            for p in [(0.0, 0.0), (2.0, 5.0)] {
                assert_eq!(tension_linear(d, t, &map, p).unwrap().norm(), 0.0);
                assert_eq!(tension_generic(d, t, &map.to_smooth(), p).unwrap().norm(), 0.0);
            }
        }
    }

    #[test]
    fn linear_and_generic_routes_agree() {
        let map = LinearMap::new(1.0, 2.0, 1.0, 3.0, 4.0, 0.0);
        let p = (0.3, 0.7);
        let closed = tension_linear(&flat(), &sine(), &map, p).unwrap();
        let lifted = tension_generic(&flat(), &sine(), &map.to_smooth(), p).unwrap();
        assert_abs_diff_eq!(closed.t1, lifted.t1, epsilon = 1e-12);
        assert_abs_diff_eq!(closed.t2, lifted.t2, epsilon = 1e-12);

        let fd = SmoothMap::finite_difference(
            move |r, t| map.rho(r, t),
            move |r, t| map.phi(r, t),
            FdSteps::default(),
        );
        let numeric = tension_generic(&flat(), &sine(), &fd, p).unwrap();
        assert!((closed.t1 - numeric.t1).abs() < 1e-6);
        assert!((closed.t2 - numeric.t2).abs() < 1e-6);
    }

    // Map with ρ = r, φ = r − θ, written as a smooth profile map.
    #[test]
    fn profile_map_matches_linear_coefficients() {
        let smooth = SmoothMap::finite_difference(|r, _| r, |r, t| r - t, FdSteps::default());
        let linear = LinearMap::new(1.0, 0.0, 0.0, 1.0, -1.0, 0.0);
        let p = (FRAC_PI_2, 0.0);
        let a = tension_generic(&flat(), &sine(), &smooth, p).unwrap();
        let b = tension_linear(&flat(), &sine(), &linear, p).unwrap();
        assert!((a.t1 - b.t1).abs() < 1e-6);
        assert!((a.t2 - b.t2).abs() < 1e-6);
    }

    #[test]
    fn generic_route_handles_nonflat_domain() {
        let domain = WarpedSurface::nonflat_torus(2.5).unwrap();
        let target = WarpedSurface::sphere_cosine();
        let map = LinearMap::new(0.3, -0.7, 0.2, 1.1, 0.4, 0.0);
        let p = (1.2, 0.4);
        let a = tension_linear(&domain, &target, &map, p).unwrap();
        let b = tension_generic(&domain, &target, &map.to_smooth(), p).unwrap();
        assert_abs_diff_eq!(a.t1, b.t1, epsilon = 1e-12);
        assert_abs_diff_eq!(a.t2, b.t2, epsilon = 1e-12);
    }

    #[test]
    fn pole_and_stencil_errors() {
        let map = LinearMap::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        assert!(matches!(
            tension_linear(&flat(), &sine(), &map, (0.0, 0.0)),
            Err(Error::Pole { .. })
        ));
        let fd = SmoothMap::finite_difference(|r, _| r, |_, t| t, FdSteps::default());
        assert!(matches!(
            tension_generic(&flat(), &sine(), &fd, (5e-4, 0.0)),
            Err(Error::Stencil { .. })
        ));
        assert!(tension_generic(&flat(), &sine(), &fd, (0.5, 0.0)).is_ok());
    }

    #[test]
    fn harmonicity_on_grid() {
        let grid = GridSpec::new(32, 32).unwrap();
        let h = |m: LinearMap| is_harmonic(&flat(), &sine(), &m, &grid).unwrap();
        assert!(h(LinearMap::new(0.0, 0.0, FRAC_PI_2, 5.0, 7.0, 0.0)));
        assert!(h(LinearMap::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)));
        assert!(!h(LinearMap::new(0.0, 0.0, FRAC_PI_4, 1.0, 0.0, 0.0)));
    }

    #[test]
    fn harmonicity_on_polar_constant_map_has_empty_grid() {
        let grid = GridSpec::new(16, 16).unwrap();
        let map = LinearMap::constant(0.0, 0.0);
        assert_eq!(
            is_harmonic(&flat(), &sine(), &map, &grid),
            Err(Error::EmptyGrid)
        );
    }

    #[test]
    fn tension_ignores_fiber_offset_and_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let map = LinearMap::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.5..2.5),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let (r, t) = (rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1));
            if sine().warp.value(map.rho(r, t)).abs() < 0.1 {
                continue;
            }
            let shifted_l = LinearMap { l: map.l + 1.7, ..map };
            let s = 0.4;
            // Shift θ by s and compensate in c and l.
            let shifted_theta = LinearMap {
                c: map.c - map.b * s,
                l: map.l - map.n * s,
                ..map
            };
            let base = tension_linear(&flat(), &sine(), &map, (r, t)).unwrap();
            let a = tension_linear(&flat(), &sine(), &shifted_l, (r, t)).unwrap();
            let b = tension_linear(&flat(), &sine(), &shifted_theta, (r, t + s)).unwrap();
            assert_eq!(base, a);
            assert_abs_diff_eq!(base.t1, b.t1, epsilon = 1e-10);
            assert_abs_diff_eq!(base.t2, b.t2, epsilon = 1e-10);
        }
    }

    // Central differences are exact on linear coordinate functions, so for
    // linear maps the two routes differ only by roundoff.
    #[test]
    fn fd_route_on_linear_maps_is_roundoff_limited() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 20 {
            let map = LinearMap::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..PI),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                0.0,
            );
            let p = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            if sine().warp.value(map.rho(p.0, p.1)).abs() < 0.1 {
                continue;
            }
            let exact = tension_linear(&flat(), &sine(), &map, p).unwrap();
            let fd = SmoothMap::finite_difference(
                move |r, t| map.rho(r, t),
                move |r, t| map.phi(r, t),
                FdSteps::default(),
            );
            let v = tension_generic(&flat(), &sine(), &fd, p).unwrap();
            let gap = (v.t1 - exact.t1).hypot(v.t2 - exact.t2);
            assert!(gap < 1e-6, "{map:?} {p:?}: {gap}");
            checked += 1;
        }
    }

    #[test]
    fn fd_route_converges_at_second_order_on_curved_maps() {
        let domain = WarpedSurface::nonflat_torus(2.0).unwrap();
        let target = sine();
        let analytic = SmoothMap::analytic(
            |r, t| {
                let (s, c) = (r + 2.0 * t).sin_cos();
                Jet2 {
                    value: 1.2 + 0.3 * s,
                    d_r: 0.3 * c,
                    d_t: 0.6 * c,
                    d_rr: -0.3 * s,
                    d_rt: -0.6 * s,
                    d_tt: -1.2 * s,
                }
            },
            |r, t| Jet2 {
                value: 2.0 * r - t + 0.2 * r.cos(),
                d_r: 2.0 - 0.2 * r.sin(),
                d_t: -1.0,
                d_rr: -0.2 * r.cos(),
                ..Jet2::default()
            },
        );
        let p = (0.8, 0.3);
        let exact = tension_generic(&domain, &target, &analytic, p).unwrap();
        let gap = |h: f64| {
            let fd = SmoothMap::finite_difference(
                |r, t| 1.2 + 0.3 * (r + 2.0 * t).sin(),
                |r, t| 2.0 * r - t + 0.2 * r.cos(),
                FdSteps { first: h, second: h },
            );
            let v = tension_generic(&domain, &target, &fd, p).unwrap();
            (v.t1 - exact.t1).hypot(v.t2 - exact.t2)
        };
        for h in [1e-2, 5e-3] {
            let ratio = gap(h) / gap(h / 2.0);
            assert!((3.5..=4.5).contains(&ratio), "h = {h}: ratio {ratio}");
        }
    }

    #[test]
    fn descent_flags() {
        let d = descent_check(&flat(), &sine(), &LinearMap::new(0.0, 0.0, 1.0, 1.0, -1.0, 0.0));
        assert!(d.descends());
        let d = descent_check(&flat(), &sine(), &LinearMap::new(0.5, 0.0, 1.0, 1.0, 0.3, 0.0));
        assert!(!d.rho && !d.phi);
    }
}
