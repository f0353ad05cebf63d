//! Coordinate maps `(r, θ) ↦ (ρ, φ)` between surfaces.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A scalar function's value with its partials up to second order in `(r, θ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d_r: f64,
    pub d_t: f64,
    pub d_rr: f64,
    pub d_rt: f64,
    pub d_tt: f64,
}

impl Jet2 {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }

    /// First partials as `[∂_r, ∂_θ]`.
    pub fn gradient(&self) -> [f64; 2] {
        [self.d_r, self.d_t]
    }

    /// Second partials as a symmetric 2×2 matrix.
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.d_rr, self.d_rt], [self.d_rt, self.d_tt]]
    }
}

impl Add for Jet2 {
    type Output = Jet2;

    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            d_r: self.d_r + o.d_r,
            d_t: self.d_t + o.d_t,
            d_rr: self.d_rr + o.d_rr,
            d_rt: self.d_rt + o.d_rt,
            d_tt: self.d_tt + o.d_tt,
        }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;

    fn mul(self, s: f64) -> Jet2 {
        Jet2 {
            value: self.value * s,
            d_r: self.d_r * s,
            d_t: self.d_t * s,
            d_rr: self.d_rr * s,
            d_rt: self.d_rt * s,
            d_tt: self.d_tt * s,
        }
    }
}

/// Jets of both target coordinates at one domain point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MapJet {
    pub rho: Jet2,
    pub phi: Jet2,
}

impl MapJet {
    pub fn component(&self, alpha: usize) -> &Jet2 {
        match alpha {
            0 => &self.rho,
            1 => &self.phi,
            _ => panic!("target index out of range: {alpha}"),
        }
    }
}

/// Anything that can report the 2-jet of its coordinate expression.
pub trait SurfaceMap: Send + Sync {
    fn jet(&self, r: f64, theta: f64) -> MapJet;

    fn eval(&self, r: f64, theta: f64) -> (f64, f64) {
        let j = self.jet(r, theta);
        (j.rho.value, j.phi.value)
    }

    /// Half-width of the finite-difference stencil used by [`Self::jet`], if any.
    fn stencil_reach(&self) -> Option<f64> {
        None
    }

    /// Coordinate-linear maps expose themselves so closed forms can be used.
    fn as_linear(&self) -> Option<&LinearMap> {
        None
    }
}

/// `φ(r, θ) = (a r + b θ + c, m r + n θ + l)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub m: f64,
    pub n: f64,
    pub l: f64,
}

impl LinearMap {
    pub fn new(a: f64, b: f64, c: f64, m: f64, n: f64, l: f64) -> Self {
        Self { a, b, c, m, n, l }
    }

    pub fn constant(c: f64, l: f64) -> Self {
        Self::new(0.0, 0.0, c, 0.0, 0.0, l)
    }

    pub fn rho(&self, r: f64, theta: f64) -> f64 {
        self.a * r + self.b * theta + self.c
    }

    pub fn phi(&self, r: f64, theta: f64) -> f64 {
        self.m * r + self.n * theta + self.l
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.m, self.n, self.l]
    }

    pub fn from_coefficients(c: [f64; 6]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    /// The same map as a [`SmoothMap`] with analytic partials.
    pub fn to_smooth(&self) -> SmoothMap {
        let (a, b, c, m, n, l) = (self.a, self.b, self.c, self.m, self.n, self.l);
        SmoothMap::analytic(
            move |r, t| Jet2 {
                value: a * r + b * t + c,
                d_r: a,
                d_t: b,
                ..Jet2::default()
            },
            move |r, t| Jet2 {
                value: m * r + n * t + l,
                d_r: m,
                d_t: n,
                ..Jet2::default()
            },
        )
    }
}

impl SurfaceMap for LinearMap {
    fn jet(&self, r: f64, theta: f64) -> MapJet {
        MapJet {
            rho: Jet2 {
                value: self.rho(r, theta),
                d_r: self.a,
                d_t: self.b,
                ..Jet2::default()
            },
            phi: Jet2 {
                value: self.phi(r, theta),
                d_r: self.m,
                d_t: self.n,
                ..Jet2::default()
            },
        }
    }

    fn as_linear(&self) -> Option<&LinearMap> {
        Some(self)
    }
}

/// Central-difference steps for first and second partials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            first: 1e-4,
            second: 1e-3,
        }
    }
}

pub type JetFn = Arc<dyn Fn(f64, f64) -> Jet2 + Send + Sync>;
pub type ValueFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A scalar function of `(r, θ)`, either with analytic partials or sampled
/// and differentiated by central differences.
#[derive(Clone)]
pub enum ScalarField {
    Analytic(JetFn),
    Sampled { f: ValueFn, steps: FdSteps },
}

impl ScalarField {
    pub fn analytic<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    {
        ScalarField::Analytic(Arc::new(f))
    }

    pub fn sampled<F>(f: F, steps: FdSteps) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        ScalarField::Sampled {
            f: Arc::new(f),
            steps,
        }
    }

    pub fn value(&self, r: f64, t: f64) -> f64 {
        match self {
            ScalarField::Analytic(j) => j(r, t).value,
            ScalarField::Sampled { f, .. } => f(r, t),
        }
    }

    pub fn jet(&self, r: f64, t: f64) -> Jet2 {
        match self {
            ScalarField::Analytic(j) => j(r, t),
            ScalarField::Sampled { f, steps } => {
                let h1 = steps.first;
                let h2 = steps.second;
                let v = f(r, t);
                let d_r = (f(r + h1, t) - f(r - h1, t)) / (2.0 * h1);
                let d_t = (f(r, t + h1) - f(r, t - h1)) / (2.0 * h1);
                let d_rr = (f(r + h2, t) - 2.0 * v + f(r - h2, t)) / (h2 * h2);
                let d_tt = (f(r, t + h2) - 2.0 * v + f(r, t - h2)) / (h2 * h2);
                let d_rt = (f(r + h2, t + h2) - f(r + h2, t - h2) - f(r - h2, t + h2)
                    + f(r - h2, t - h2))
                    / (4.0 * h2 * h2);
                Jet2 {
                    value: v,
                    d_r,
                    d_t,
                    d_rr,
                    d_rt,
                    d_tt,
                }
            }
        }
    }

    pub(crate) fn reach(&self) -> Option<f64> {
        match self {
            ScalarField::Analytic(_) => None,
            ScalarField::Sampled { steps, .. } => Some(steps.first.max(steps.second)),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Analytic(_) => f.write_str("ScalarField::Analytic"),
            ScalarField::Sampled { steps, .. } => f
                .debug_struct("ScalarField::Sampled")
                .field("steps", steps)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference(FdSteps),
}

/// A general smooth map given by its two coordinate functions.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    pub rho: ScalarField,
    pub phi: ScalarField,
}

impl SmoothMap {
    pub fn new(rho: ScalarField, phi: ScalarField) -> Self {
        Self { rho, phi }
    }

    pub fn analytic<F, G>(rho: F, phi: G) -> Self
    where
        F: Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
        G: Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    {
        Self::new(ScalarField::analytic(rho), ScalarField::analytic(phi))
    }

    pub fn finite_difference<F, G>(rho: F, phi: G, steps: FdSteps) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            ScalarField::sampled(rho, steps),
            ScalarField::sampled(phi, steps),
        )
    }

    /// Analytic only when both components are.
    pub fn mode(&self) -> DerivativeMode {
        match (&self.rho, &self.phi) {
            (ScalarField::Analytic(_), ScalarField::Analytic(_)) => DerivativeMode::Analytic,
            (ScalarField::Sampled { steps, .. }, _) | (_, ScalarField::Sampled { steps, .. }) => {
                DerivativeMode::FiniteDifference(*steps)
            }
        }
    }
}

impl SurfaceMap for SmoothMap {
    fn jet(&self, r: f64, theta: f64) -> MapJet {
        MapJet {
            rho: self.rho.jet(r, theta),
            phi: self.phi.jet(r, theta),
        }
    }

    fn stencil_reach(&self) -> Option<f64> {
        match (self.rho.reach(), self.phi.reach()) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(0.0).max(b.unwrap_or(0.0))),
        }
    }
}
