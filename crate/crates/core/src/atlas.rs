//! Worked example maps from tori into the round sphere, and the three
//! constructions behind them: the Hopf fibration, radial projection and the
//! Gauss map of the embedded torus.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_8, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;
use crate::maps::{FdSteps, Jet2, LinearMap, MapJet, SmoothMap, SurfaceMap};

/// Tolerance on `|z|² + |w|² − 1` accepted by [`hopf`].
pub const SPHERE_TOLERANCE: f64 = 1e-9;

/// `H(z, w) = (|z|² − |w|², 2 z w̄)` as `(x, Re y, Im y)`.
pub fn hopf(z1re: f64, z1im: f64, z2re: f64, z2im: f64) -> Result<(f64, f64, f64)> {
    let zz = z1re * z1re + z1im * z1im;
    let ww = z2re * z2re + z2im * z2im;
    let norm_sq = zz + ww;
    if (norm_sq - 1.0).abs() > SPHERE_TOLERANCE {
        return Err(Error::NotOnSphere { norm_sq });
    }
    // z w̄ = (z1re + i z1im)(z2re − i z2im)
    let re = z1re * z2re + z1im * z2im;
    let im = z1im * z2re - z1re * z2im;
    Ok((zz - ww, 2.0 * re, 2.0 * im))
}

/// `P(x) = x/|x|`.
pub fn radial_projection(x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok([x / norm, y / norm, z / norm])
}

/// `X(r, θ) = (a sin r, (b + a cos r) cos θ, (b + a cos r) sin θ)`.
pub fn torus_embedding(a: f64, b: f64, r: f64, theta: f64) -> [f64; 3] {
    let radius = b + a * r.cos();
    [a * r.sin(), radius * theta.cos(), radius * theta.sin()]
}

/// Point of the unit sphere in the model `dρ² + sin²ρ dφ²`:
/// `(cos ρ, sin ρ cos φ, sin ρ sin φ)`.
pub fn sine_model_point(rho: f64, phi: f64) -> [f64; 3] {
    [rho.cos(), rho.sin() * phi.cos(), rho.sin() * phi.sin()]
}

/// Point of the unit sphere in the model `dρ² + cos²ρ dφ²`:
/// `(sin ρ, cos ρ cos φ, cos ρ sin φ)`.
pub fn cosine_model_point(rho: f64, phi: f64) -> [f64; 3] {
    [rho.sin(), rho.cos() * phi.cos(), rho.cos() * phi.sin()]
}

fn check_torus_radii(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > a && b.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("torus radii need b > a > 0, got a = {a}, b = {b}")))
    }
}

/// The Gauss map of the embedded torus in the cosine model is the identity
/// in coordinates: `(ρ, φ) = (r, θ)`.
pub fn gauss_map_torus(a: f64, b: f64, r: f64, theta: f64) -> Result<(f64, f64)> {
    check_torus_radii(a, b)?;
    Ok((r, theta))
}

/// Polar angle of `P∘X(r)`, i.e. `cos α = a sin r / √(a² + b² + 2ab cos r)`,
/// with its first two derivatives.
pub fn radial_profile(a: f64, b: f64, r: f64) -> (f64, f64, f64) {
    let (sin, cos) = r.sin_cos();
    let d = a * a + b * b + 2.0 * a * b * cos;
    let value = (b + a * cos).atan2(a * sin);
    let d1 = -(a * a + a * b * cos) / d;
    let d2 = a * b * sin * (b * b - a * a) / (d * d);
    (value, d1, d2)
}

/// The literal reading `α = cos(a sin r / √(a² + b² + 2ab cos r))`.
pub fn radial_profile_raw(a: f64, b: f64, r: f64) -> f64 {
    let d = a * a + b * b + 2.0 * a * b * r.cos();
    (a * r.sin() / d.sqrt()).cos()
}

/// Either kind of map an atlas entry can carry.
#[derive(Clone, Debug)]
pub enum AtlasMap {
    Linear(LinearMap),
    Smooth(SmoothMap),
}

impl AtlasMap {
    pub fn linear(&self) -> Option<&LinearMap> {
        match self {
            AtlasMap::Linear(m) => Some(m),
            AtlasMap::Smooth(_) => None,
        }
    }
}

impl SurfaceMap for AtlasMap {
    fn jet(&self, r: f64, theta: f64) -> MapJet {
        match self {
            AtlasMap::Linear(m) => m.jet(r, theta),
            AtlasMap::Smooth(m) => m.jet(r, theta),
        }
    }

    fn eval(&self, r: f64, theta: f64) -> (f64, f64) {
        match self {
            AtlasMap::Linear(m) => m.eval(r, theta),
            AtlasMap::Smooth(m) => m.eval(r, theta),
        }
    }

    fn stencil_reach(&self) -> Option<f64> {
        match self {
            AtlasMap::Linear(m) => m.stencil_reach(),
            AtlasMap::Smooth(m) => m.stencil_reach(),
        }
    }

    fn as_linear(&self) -> Option<&LinearMap> {
        self.linear()
    }
}

/// An example map together with the metrics it is studied for.
#[derive(Clone, Debug)]
pub struct MapSpec {
    pub domain: WarpedSurface,
    pub target: WarpedSurface,
    pub map: AtlasMap,
    pub label: String,
    pub params: BTreeMap<String, f64>,
}

/// Serializable summary of a [`MapSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub id: u8,
    pub label: String,
    pub domain: String,
    pub target: String,
    pub params: BTreeMap<String, f64>,
    pub linear: Option<LinearMap>,
}

impl MapSpec {
    pub fn summary(&self, id: u8) -> MapSummary {
        MapSummary {
            id,
            label: self.label.clone(),
            domain: self.domain.warp.label(),
            target: self.target.warp.label(),
            params: self.params.clone(),
            linear: self.map.linear().copied(),
        }
    }
}

/// Default parameters of each example, in the order they are documented.
pub fn example_defaults(id: u8) -> Result<Vec<(&'static str, f64)>> {
    Ok(match id {
        1 => vec![("k", 1.0), ("m", 1.0), ("n", 0.0)],
        2 => vec![("s", FRAC_PI_8)],
        3 => vec![("s", FRAC_PI_8), ("amp", 0.0), ("freq", 1.0)],
        4 => vec![("c0", PI)],
        5 => vec![("a", 1.0), ("b", 2.0)],
        6 => vec![("a", 1.0), ("b", 2.0), ("raw", 0.0)],
        _ => return Err(Error::invalid(format!("example id must be 1..6, got {id}"))),
    })
}

pub const EXAMPLE_LABELS: [&str; 6] = [
    "lawson-hopf",
    "clifford-hopf",
    "brendle-hopf",
    "biharmonic-hopf",
    "torus-gauss-map",
    "torus-radial-projection",
];

/// Looks up an example by its label.
pub fn example_id(label: &str) -> Option<u8> {
    EXAMPLE_LABELS
        .iter()
        .position(|l| *l == label)
        .map(|i| i as u8 + 1)
}

/// Builds example `id` (1..6). Missing parameters take their defaults from
/// [`example_defaults`]; unknown names are rejected.
pub fn example_map(id: u8, params: &BTreeMap<String, f64>) -> Result<MapSpec> {
    let defaults = example_defaults(id)?;
    let mut merged: BTreeMap<String, f64> =
        defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (name, value) in params {
        if !merged.contains_key(name) {
            return Err(Error::invalid(format!("example {id} has no parameter {name:?}")));
        }
        if !value.is_finite() {
            return Err(Error::invalid(format!("parameter {name} must be finite")));
        }
        merged.insert(name.clone(), *value);
    }
    let p = |name: &str| merged[name];
    let flat = WarpedSurface::flat_torus();
    let sine = WarpedSurface::sphere_sine();
    let (domain, target, map) = match id {
        1 => {
            let (k, m, n) = (p("k"), p("m"), p("n"));
            (flat, sine, AtlasMap::Linear(LinearMap::new(2.0 * k, 0.0, 0.0, 0.0, m - n, 0.0)))
        }
        2 => {
            let s = p("s");
            (flat, sine, AtlasMap::Linear(LinearMap::new(0.0, 0.0, 2.0 * s, 1.0, -1.0, 0.0)))
        }
        3 => {
            let (s, amp, freq) = (p("s"), p("amp"), p("freq"));
            let rho = move |x: f64, _y: f64| {
                let (sin, cos) = (freq * x).sin_cos();
                Jet2 {
                    value: 2.0 * (s + amp * sin),
                    d_r: 2.0 * amp * freq * cos,
                    d_rr: -2.0 * amp * freq * freq * sin,
                    ..Jet2::default()
                }
            };
            let phi = |x: f64, y: f64| Jet2 {
                value: x - y,
                d_r: 1.0,
                d_t: -1.0,
                ..Jet2::default()
            };
            (flat, sine, AtlasMap::Smooth(SmoothMap::analytic(rho, phi)))
        }
        4 => (
            flat,
            sine,
            AtlasMap::Linear(LinearMap::new(-1.0, -1.0, p("c0"), 0.0, 1.0, 0.0)),
        ),
        5 => {
            let (a, b) = (p("a"), p("b"));
            check_torus_radii(a, b)?;
            (
                WarpedSurface::nonflat_torus(b / a)?,
                WarpedSurface::sphere_cosine(),
                AtlasMap::Linear(LinearMap::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)),
            )
        }
        6 => {
            let (a, b) = (p("a"), p("b"));
            check_torus_radii(a, b)?;
            let phi = |_r: f64, t: f64| Jet2 {
                value: t,
                d_t: 1.0,
                ..Jet2::default()
            };
            let map = if p("raw") != 0.0 {
                SmoothMap::finite_difference(
                    move |r, _| radial_profile_raw(a, b, r),
                    |_, t| t,
                    FdSteps::default(),
                )
            } else {
                let rho = move |r: f64, _t: f64| {
                    let (value, d_r, d_rr) = radial_profile(a, b, r);
                    Jet2 {
                        value,
                        d_r,
                        d_rr,
                        ..Jet2::default()
                    }
                };
                SmoothMap::analytic(rho, phi)
            };
            (WarpedSurface::nonflat_torus(b / a)?, sine, AtlasMap::Smooth(map))
        }
        _ => unreachable!("validated by example_defaults"),
    };
    Ok(MapSpec {
        domain,
        target,
        map,
        label: EXAMPLE_LABELS[id as usize - 1].to_string(),
        params: merged,
    })
}

/// Sphere point of an atlas entry at `(r, θ)`, using the target's model.
pub fn image_point(spec: &MapSpec, r: f64, theta: f64) -> [f64; 3] {
    let (rho, phi) = spec.map.eval(r, theta);
    match spec.target.warp {
        crate::geometry::WarpFunction::Cosine => cosine_model_point(rho, phi),
        _ => sine_model_point(rho, phi),
    }
}
