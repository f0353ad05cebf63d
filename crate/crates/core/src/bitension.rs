//! Biharmonicity residuals.
//!
//! For coordinate-linear maps `φ = (ar + bθ + c, mr + nθ + l)` between warped
//! surfaces the biharmonic equation reduces to two scalar equations in
//! `x = τ¹`, `y = τ²` and their partials:
//!
//! ```text
//! x_θθ/σ² + x_rr + (σ′/σ) x_r − (m² + n²/σ²)(λλ′)′ x − (2m y_r + 2n y_θ/σ² + y²) λλ′ = 0
//! y_θθ/σ² + y_rr + (σ′/σ) y_r + 2(a y_r + m x_r + b y_θ/σ² + n x_θ/σ²) λ′/λ
//!     + 2(m σ′λ′/(σλ) + (am + bn/σ²)(λλ′)′/λ²) x = 0
//! ```
//!
//! [`bitension_residual_linear`] evaluates these with hand-derived partials of
//! `x, y`. [`bitension_generic`] evaluates the general operator
//! `Δτˢ + 2g(∇τᵃ, ∇φᵝ)Γ̄ˢₐᵦ + τᵃΔφᵝΓ̄ˢₐᵦ + τᵃg(∇φᵝ, ∇φᵖ)(∂ₚΓ̄ˢₐᵦ + Γ̄ᵛₐᵦΓ̄ˢᵥₚ)
//! − τᵛg(∇φᵃ, ∇φᵝ)R̄ˢᵦₐᵥ` with finite differences of the tension, and works
//! for any [`SurfaceMap`]. Both return the components of `τ₂(φ)` in the frame
//! `(∂/∂ρ, ∂/∂φ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{christoffel, christoffel_derivative, curvature, WarpedSurface};
use crate::grid::GridSpec;
use crate::maps::{LinearMap, SurfaceMap};
use crate::tension::{check_stencil, inverse_metric, near_pole, tension_generic};

/// Default step for the finite-difference route.
pub const DEFAULT_BITENSION_STEP: f64 = 1e-3;

/// The two biharmonic-equation residuals at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BitensionResidual {
    pub r1: f64,
    pub r2: f64,
}

impl BitensionResidual {
    pub fn norm(&self) -> f64 {
        self.r1.hypot(self.r2)
    }

    pub fn get(&self, alpha: usize) -> f64 {
        match alpha {
            0 => self.r1,
            1 => self.r2,
            _ => panic!("residual index out of range: {alpha}"),
        }
    }
}

/// `x = τ¹`, `y = τ²` of a linear map and the partials the residual needs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TensionPartials {
    pub x: f64,
    pub x_r: f64,
    pub x_t: f64,
    pub x_rr: f64,
    pub x_tt: f64,
    pub y: f64,
    pub y_r: f64,
    pub y_t: f64,
    pub y_rr: f64,
    pub y_tt: f64,
}

/// Closed-form partials of the tension of a linear map.
///
/// With `S = σ′/σ`, `P = 1/σ²`, `F = λλ′`, `G = λ′/λ`, `Q = m² + n²P` and
/// `W = am + bnP` the tension reads `x = aS − QF(ρ)`, `y = mS + 2WG(ρ)`, and
/// since `ρ_r = a`, `ρ_θ = b` every partial follows from the chain rule.
pub fn tension_partials_linear(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    (r, theta): (f64, f64),
) -> Result<TensionPartials> {
    let sg = domain.checked_jet(r)?;
    let lm = target.checked_jet(map.rho(r, theta))?;
    let LinearMap { a, b, m, n, .. } = *map;

    let (s0, s1, s2, s3) = (sg.value, sg.d1, sg.d2, sg.d3);
    let log_d = s1 / s0;
    let log_d1 = (s2 * s0 - s1 * s1) / (s0 * s0);
    let log_d2 = (s3 * s0 * s0 - 3.0 * s0 * s1 * s2 + 2.0 * s1 * s1 * s1) / (s0 * s0 * s0);
    let p = 1.0 / (s0 * s0);
    let p1 = -2.0 * s1 / (s0 * s0 * s0);
    let p2 = -2.0 * s2 / (s0 * s0 * s0) + 6.0 * s1 * s1 / (s0 * s0 * s0 * s0);

    let (l0, l1, l2, l3) = (lm.value, lm.d1, lm.d2, lm.d3);
    let f = l0 * l1;
    let f1 = l1 * l1 + l0 * l2;
    let f2 = 3.0 * l1 * l2 + l0 * l3;
    let g = l1 / l0;
    let g1 = (l2 * l0 - l1 * l1) / (l0 * l0);
    let g2 = (l3 * l0 * l0 - 3.0 * l0 * l1 * l2 + 2.0 * l1 * l1 * l1) / (l0 * l0 * l0);

    let q = m * m + n * n * p;
    let q1 = n * n * p1;
    let q2 = n * n * p2;
    let w = a * m + b * n * p;
    let w1 = b * n * p1;
    let w2 = b * n * p2;

    Ok(TensionPartials {
        x: a * log_d - q * f,
        x_r: a * log_d1 - q1 * f - q * f1 * a,
        x_t: -q * f1 * b,
        x_rr: a * log_d2 - q2 * f - 2.0 * q1 * f1 * a - q * f2 * a * a,
        x_tt: -q * f2 * b * b,
        y: m * log_d + 2.0 * w * g,
        y_r: m * log_d1 + 2.0 * w1 * g + 2.0 * w * g1 * a,
        y_t: 2.0 * w * g1 * b,
        y_rr: m * log_d2 + 2.0 * w2 * g + 4.0 * w1 * g1 * a + 2.0 * w * g2 * a * a,
        y_tt: 2.0 * w * g2 * b * b,
    })
}

/// Residuals of the reduced biharmonic system for a linear map.
pub fn bitension_residual_linear(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    point: (f64, f64),
) -> Result<BitensionResidual> {
    let d = tension_partials_linear(domain, target, map, point)?;
    let sg = domain.warp.jet(point.0);
    let lm = target.warp.jet(map.rho(point.0, point.1));
    let LinearMap { a, b, m, n, .. } = *map;

    let log_d = sg.d1 / sg.value;
    let p = 1.0 / (sg.value * sg.value);
    let f = lm.value * lm.d1;
    let f1 = lm.d1 * lm.d1 + lm.value * lm.d2;
    let g = lm.d1 / lm.value;
    let q = m * m + n * n * p;
    let w = a * m + b * n * p;

    let r1 = d.x_tt * p + d.x_rr + log_d * d.x_r
        - q * f1 * d.x
        - (2.0 * m * d.y_r + 2.0 * n * p * d.y_t + d.y * d.y) * f;
    let r2 = d.y_tt * p
        + d.y_rr
        + log_d * d.y_r
        + 2.0 * (a * d.y_r + m * d.x_r + b * p * d.y_t + n * p * d.x_t) * g
        + 2.0 * (m * log_d * g + w * f1 / (lm.value * lm.value)) * d.x;
    Ok(BitensionResidual { r1, r2 })
}

/// The general fourth-order operator, with the Laplacian and gradient of the
/// tension taken by central differences of step `h`.
pub fn bitension_generic<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    (r, theta): (f64, f64),
    h: f64,
) -> Result<BitensionResidual> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let jet = map.jet(r, theta);
    let sigma = domain.checked_jet(r)?;
    target.checked_jet(jet.rho.value)?;
    check_stencil(domain, target, map, (r, theta), h + map.stencil_reach().unwrap_or(0.0))?;

    let tau = |dr: f64, dt: f64| tension_generic(domain, target, map, (r + dr, theta + dt));
    let t0 = tau(0.0, 0.0)?;
    let t_rp = tau(h, 0.0)?;
    let t_rm = tau(-h, 0.0)?;
    let t_tp = tau(0.0, h)?;
    let t_tm = tau(0.0, -h)?;

    // Partials of τ^s: [∂_r, ∂_θ] and the diagonal second partials.
    let grad_tau = |s: usize| {
        [
            (t_rp.get(s) - t_rm.get(s)) / (2.0 * h),
            (t_tp.get(s) - t_tm.get(s)) / (2.0 * h),
        ]
    };
    let hess_diag_tau = |s: usize| {
        [
            (t_rp.get(s) - 2.0 * t0.get(s) + t_rm.get(s)) / (h * h),
            (t_tp.get(s) - 2.0 * t0.get(s) + t_tm.get(s)) / (h * h),
        ]
    };

    let g_inv = inverse_metric(sigma.value);
    let gamma = christoffel(domain, r)?;
    let gamma_bar = christoffel(target, jet.rho.value)?;
    let d_gamma_bar = christoffel_derivative(target, jet.rho.value)?;
    let riem = curvature(target, jet.rho.value)?;

    let inner = |u: [f64; 2], v: [f64; 2]| {
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += g_inv[i][j] * u[i] * v[j];
            }
        }
        acc
    };
    // Laplace-Beltrami of a function from its gradient and diagonal Hessian;
    // the domain metric is diagonal, so mixed partials never enter.
    let laplacian = |grad: [f64; 2], hess_diag: [f64; 2]| {
        let mut acc = 0.0;
        for i in 0..2 {
            let mut term = hess_diag[i];
            for (k, gk) in grad.iter().enumerate() {
                term -= gamma.get(k, i, i) * gk;
            }
            acc += g_inv[i][i] * term;
        }
        acc
    };
    // ∂_ρ Γ̄ˢₐᵦ: the target symbols depend on the first coordinate only.
    let d_gamma_bar_at = |s: usize, alpha: usize, beta: usize, rho_idx: usize| {
        if rho_idx == 0 {
            d_gamma_bar.get(s, alpha, beta)
        } else {
            0.0
        }
    };

    let grad_phi = [jet.rho.gradient(), jet.phi.gradient()];
    let lap_phi = [
        laplacian(grad_phi[0], [jet.rho.d_rr, jet.rho.d_tt]),
        laplacian(grad_phi[1], [jet.phi.d_rr, jet.phi.d_tt]),
    ];
    let tau0 = [t0.t1, t0.t2];
    let grad_tau_all = [grad_tau(0), grad_tau(1)];

    let mut out = [0.0; 2];
    for (s, slot) in out.iter_mut().enumerate() {
        let mut acc = laplacian(grad_tau(s), hess_diag_tau(s));
        for alpha in 0..2 {
            for beta in 0..2 {
                let gb = gamma_bar.get(s, alpha, beta);
                acc += 2.0 * inner(grad_tau_all[alpha], grad_phi[beta]) * gb;
                acc += tau0[alpha] * lap_phi[beta] * gb;
                for rho_idx in 0..2 {
                    let mut conn = d_gamma_bar_at(s, alpha, beta, rho_idx);
                    for nu in 0..2 {
                        conn += gamma_bar.get(nu, alpha, beta) * gamma_bar.get(s, nu, rho_idx);
                    }
                    acc += tau0[alpha] * inner(grad_phi[beta], grad_phi[rho_idx]) * conn;
                }
            }
        }
        for nu in 0..2 {
            for alpha in 0..2 {
                for beta in 0..2 {
                    acc -= tau0[nu]
                        * inner(grad_phi[alpha], grad_phi[beta])
                        * riem.get(s, beta, alpha, nu);
                }
            }
        }
        *slot = acc;
    }
    Ok(BitensionResidual {
        r1: out[0],
        r2: out[1],
    })
}

/// Closed form for linear maps; the finite-difference route with
/// [`DEFAULT_BITENSION_STEP`] otherwise.
pub fn bitension<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    point: (f64, f64),
) -> Result<BitensionResidual> {
    match map.as_linear() {
        Some(linear) => bitension_residual_linear(domain, target, linear, point),
        None => bitension_generic(domain, target, map, point, DEFAULT_BITENSION_STEP),
    }
}

/// Reduced conditions for flat torus → `(S², dρ² + sin²ρ dφ²)`:
///
/// `g1 = [4(m²+n²)(a²+b²) + (m²+n²)² cos 2ρ + 4(am+bn)²] cos ρ`,
/// `g2 = 4(m²+n²)(am+bn) cos ρ cos 2ρ`.
///
/// The residuals of [`bitension_residual_linear`] for this pair are
/// `(g1 sin ρ, −g2 / sin ρ)`.
pub fn flat_condition_residual(map: &LinearMap, rho: f64) -> Result<(f64, f64)> {
    let sin = rho.sin();
    if sin.abs() < crate::geometry::POLE_TOLERANCE {
        return Err(Error::Pole { t: rho, value: sin });
    }
    let LinearMap { a, b, m, n, .. } = *map;
    let q = m * m + n * n;
    let w = a * m + b * n;
    let cos = rho.cos();
    let cos2 = (2.0 * rho).cos();
    let g1 = (4.0 * q * (a * a + b * b) + q * q * cos2 + 4.0 * w * w) * cos;
    let g2 = 4.0 * q * w * cos * cos2;
    Ok((g1, g2))
}

/// Largest residual norm over the non-excluded grid points (see
/// [`GridSpec::max_over`] for `cutoff`).
pub fn max_bitension_norm<M: SurfaceMap + ?Sized>(
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
        Ok(Some(bitension(domain, target, map, (r, theta))?.norm()))
    })
}

pub fn is_biharmonic(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    grid: &GridSpec,
) -> Result<bool> {
    let tol = grid.tolerance_biharmonic;
    Ok(max_bitension_norm(domain, target, map, grid, tol)? < tol)
}
