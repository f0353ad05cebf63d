//! Energy `E = ½∫|dφ|²`, bienergy `E₂ = ½∫|τ|²`, their first variations and
//! the mapping degree, all by midpoint quadrature over one period square.

use std::f64::consts::PI;

use crate::bitension::bitension;
use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;
use crate::grid::GridSpec;
use crate::maps::{Jet2, MapJet, ScalarField, SurfaceMap};
use crate::tension::{near_pole, tension};

/// A vector field `V = V¹ ∂ρ + V² ∂φ` along a map, given in target
/// coordinates. Both components must share the domain's periods.
#[derive(Clone, Debug)]
pub struct Variation {
    pub v1: ScalarField,
    pub v2: ScalarField,
}

impl Variation {
    pub fn new(v1: ScalarField, v2: ScalarField) -> Self {
        Self { v1, v2 }
    }
}

/// `φ + tV`, formed in target coordinates.
pub struct Perturbed<'a, M: SurfaceMap + ?Sized> {
    pub base: &'a M,
    pub variation: &'a Variation,
    pub t: f64,
}

impl<M: SurfaceMap + ?Sized> SurfaceMap for Perturbed<'_, M> {
    fn jet(&self, r: f64, theta: f64) -> MapJet {
        let base = self.base.jet(r, theta);
        MapJet {
            rho: base.rho + self.variation.v1.jet(r, theta) * self.t,
            phi: base.phi + self.variation.v2.jet(r, theta) * self.t,
        }
    }

    fn eval(&self, r: f64, theta: f64) -> (f64, f64) {
        let (rho, phi) = self.base.eval(r, theta);
        (
            rho + self.t * self.variation.v1.value(r, theta),
            phi + self.t * self.variation.v2.value(r, theta),
        )
    }

    fn stencil_reach(&self) -> Option<f64> {
        [
            self.base.stencil_reach(),
            self.variation.v1.reach(),
            self.variation.v2.reach(),
        ]
        .into_iter()
        .flatten()
        .reduce(f64::max)
    }
}

fn pole_guard<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    grid: &GridSpec,
    r: f64,
    theta: f64,
) -> Result<()> {
    if near_pole(domain, target, map, r, theta, grid.pole_margin) {
        Err(Error::PoleOnDomain { r, theta })
    } else {
        Ok(())
    }
}

/// `|dφ|² = ρ_r² + λ²φ_r² + (ρ_θ² + λ²φ_θ²)/σ²`.
pub fn energy_density(sigma: f64, lambda: f64, rho: &Jet2, phi: &Jet2) -> f64 {
    let l2 = lambda * lambda;
    rho.d_r * rho.d_r + l2 * phi.d_r * phi.d_r
        + (rho.d_t * rho.d_t + l2 * phi.d_t * phi.d_t) / (sigma * sigma)
}

/// `E(φ) = ½ ∫ |dφ|² σ dr dθ`. Fails with [`Error::PoleOnDomain`] if any grid
/// point comes within `pole_margin` of a pole.
pub fn energy<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    grid: &GridSpec,
) -> Result<f64> {
    grid.integrate(domain, |r, theta| {
        pole_guard(domain, target, map, grid, r, theta)?;
        let jet = map.jet(r, theta);
        let sigma = domain.warp.value(r);
        let lambda = target.warp.value(jet.rho.value);
        Ok(0.5 * energy_density(sigma, lambda, &jet.rho, &jet.phi) * sigma)
    })
}

/// `E₂(φ) = ½ ∫ ((τ¹)² + λ²(τ²)²) σ dr dθ`.
pub fn bienergy<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    grid: &GridSpec,
) -> Result<f64> {
    grid.integrate(domain, |r, theta| {
        pole_guard(domain, target, map, grid, r, theta)?;
        let tau = tension(domain, target, map, (r, theta))?;
        let lambda = target.warp.value(map.eval(r, theta).0);
        Ok(0.5 * tau.norm_sq_in(lambda) * domain.warp.value(r))
    })
}

/// `∫ ⟨F, V⟩_h σ` for a field `F` along the map given pointwise.
fn pairing<M, F>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    variation: &Variation,
    grid: &GridSpec,
    field: F,
) -> Result<f64>
where
    M: SurfaceMap + ?Sized,
    F: Fn(f64, f64) -> Result<[f64; 2]> + Sync,
{
    grid.integrate(domain, |r, theta| {
        pole_guard(domain, target, map, grid, r, theta)?;
        let [f1, f2] = field(r, theta)?;
        let lambda = target.warp.value(map.eval(r, theta).0);
        let v1 = variation.v1.value(r, theta);
        let v2 = variation.v2.value(r, theta);
        Ok((v1 * f1 + lambda * lambda * v2 * f2) * domain.warp.value(r))
    })
}

fn central_difference<M, F>(map: &M, variation: &Variation, eps: f64, functional: F) -> Result<f64>
where
    M: SurfaceMap + ?Sized,
    F: Fn(&Perturbed<'_, M>) -> Result<f64>,
{
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("variation step must be positive, got {eps}")));
    }
    let plus = functional(&Perturbed {
        base: map,
        variation,
        t: eps,
    })?;
    let minus = functional(&Perturbed {
        base: map,
        variation,
        t: -eps,
    })?;
    Ok((plus - minus) / (2.0 * eps))
}

/// `(d/dt E(φ + tV)` by central difference at `eps`, `−∫⟨τ, V⟩σ)`.
/// The tension is the negative gradient of the energy.
pub fn first_variation_energy<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    variation: &Variation,
    eps: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let lhs = central_difference(map, variation, eps, |p| energy(domain, target, p, grid))?;
    let rhs = pairing(domain, target, map, variation, grid, |r, theta| {
        let tau = tension(domain, target, map, (r, theta))?;
        Ok([tau.t1, tau.t2])
    })?;
    Ok((lhs, -rhs))
}

/// `(d/dt E₂(φ + tV)` by central difference at `eps`, `∫⟨τ₂, V⟩σ)`.
///
/// With `τ₂ = Tr(∇∇ − ∇_∇)τ − Tr R(dφ, τ)dφ` the bitension is the positive
/// gradient of the bienergy, so the pairing enters with a plus sign, unlike
/// the energy identity.
pub fn first_variation_bienergy<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    variation: &Variation,
    eps: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let lhs = central_difference(map, variation, eps, |p| bienergy(domain, target, p, grid))?;
    let rhs = pairing(domain, target, map, variation, grid, |r, theta| {
        let tau2 = bitension(domain, target, map, (r, theta))?;
        Ok([tau2.r1, tau2.r2])
    })?;
    Ok((lhs, rhs))
}

/// `(1/4π) ∫ λ(ρ)(ρ_r φ_θ − ρ_θ φ_r) dr dθ`, the pulled-back area form over
/// the area of the unit sphere. Returns the raw value; poles are not
/// excluded because the integrand stays bounded there.
pub fn degree<M: SurfaceMap + ?Sized>(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &M,
    grid: &GridSpec,
) -> Result<f64> {
    if !target.is_sphere_model() {
        return Err(Error::invalid("degree needs a sphere-model target"));
    }
    let integral = grid.integrate(domain, |r, theta| {
        let jet = map.jet(r, theta);
        let lambda = target.warp.value(jet.rho.value);
        Ok(lambda * (jet.rho.d_r * jet.phi.d_t - jet.rho.d_t * jet.phi.d_r))
    })?;
    Ok(integral / (4.0 * PI))
}
