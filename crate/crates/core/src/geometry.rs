//! Warped-product surfaces `dt² + w(t)² ds²` and their connection and curvature.
//!
//! Coordinates are ordered `(t, s)`: the first is the profile coordinate
//! (`r` on a torus, `ρ` on a sphere model), the second the fiber coordinate
//! (`θ` or `φ`). Tensor accessors use 0-based indices in that order.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Below this magnitude a warp value is treated as a pole.
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Value of a warp function together with its first three derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WarpJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

type JetFn = Arc<dyn Fn(f64) -> WarpJet + Send + Sync>;

/// A user-supplied warp profile. Derivatives must be analytic; nothing in
/// this module differentiates numerically.
#[derive(Clone)]
pub struct CustomWarp {
    name: String,
    period: Option<f64>,
    jet: JetFn,
}

impl CustomWarp {
    pub fn new<F>(name: impl Into<String>, period: Option<f64>, jet: F) -> Self
    where
        F: Fn(f64) -> WarpJet + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            period,
            jet: Arc::new(jet),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomWarp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomWarp")
            .field("name", &self.name)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

/// The profile `w` of a warped metric `dt² + w(t)² ds²`.
#[derive(Clone, Debug)]
pub enum WarpFunction {
    /// `w ≡ 1`, the flat metric.
    Unit,
    /// `w = sin t`, the round sphere in geodesic polar coordinates.
    Sine,
    /// `w = cos t`, the round sphere with latitude-based polar coordinates.
    Cosine,
    /// `w = k + cos t`, homothetic to the metric of a torus of revolution.
    OffsetCosine(f64),
    Custom(CustomWarp),
}

impl WarpFunction {
    pub fn jet(&self, t: f64) -> WarpJet {
        match self {
            WarpFunction::Unit => WarpJet {
                value: 1.0,
                ..WarpJet::default()
            },
            WarpFunction::Sine => {
                let (s, c) = t.sin_cos();
                WarpJet {
                    value: s,
                    d1: c,
                    d2: -s,
                    d3: -c,
                }
            }
            WarpFunction::Cosine => {
                let (s, c) = t.sin_cos();
                WarpJet {
                    value: c,
                    d1: -s,
                    d2: -c,
                    d3: s,
                }
            }
            WarpFunction::OffsetCosine(k) => {
                let (s, c) = t.sin_cos();
                WarpJet {
                    value: k + c,
                    d1: -s,
                    d2: -c,
                    d3: s,
                }
            }
            WarpFunction::Custom(custom) => (custom.jet)(t),
        }
    }

    /// `(w, w′, w″)` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let j = self.jet(t);
        (j.value, j.d1, j.d2)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value
    }

    /// Smallest positive period of `w`, if it is periodic.
    pub fn period(&self) -> Option<f64> {
        match self {
            WarpFunction::Unit => None,
            WarpFunction::Sine | WarpFunction::Cosine | WarpFunction::OffsetCosine(_) => Some(TAU),
            WarpFunction::Custom(c) => c.period,
        }
    }

    pub fn is_sphere_model(&self) -> bool {
        matches!(self, WarpFunction::Sine | WarpFunction::Cosine)
    }

    pub fn label(&self) -> String {
        match self {
            WarpFunction::Unit => "unit".into(),
            WarpFunction::Sine => "sine".into(),
            WarpFunction::Cosine => "cosine".into(),
            WarpFunction::OffsetCosine(k) => format!("offset-cosine({k})"),
            WarpFunction::Custom(c) => format!("custom({})", c.name),
        }
    }
}

/// A coordinate patch carrying the metric `dt² + w(t)² ds²`.
#[derive(Clone, Debug)]
pub struct WarpedSurface {
    pub warp: WarpFunction,
    pub period_t: Option<f64>,
    pub period_s: Option<f64>,
    /// Values of `t` in one period where `w` vanishes.
    pub pole_zeros: Vec<f64>,
}

impl WarpedSurface {
    pub fn new(
        warp: WarpFunction,
        period_t: Option<f64>,
        period_s: Option<f64>,
        pole_zeros: Vec<f64>,
    ) -> Result<Self> {
        for p in [period_t, period_s].into_iter().flatten() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("period must be positive, got {p}")));
            }
        }
        Ok(Self {
            warp,
            period_t,
            period_s,
            pole_zeros,
        })
    }

    /// `dr² + dθ²` on `[0, 2π)²`.
    pub fn flat_torus() -> Self {
        Self {
            warp: WarpFunction::Unit,
            period_t: Some(TAU),
            period_s: Some(TAU),
            pole_zeros: Vec::new(),
        }
    }

    /// `dr² + (k + cos r)² dθ²` on `[0, 2π)²`; requires `k > 1`.
    pub fn nonflat_torus(k: f64) -> Result<Self> {
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::invalid(format!(
                "non-flat torus needs k > 1, got {k}"
            )));
        }
        Ok(Self {
            warp: WarpFunction::OffsetCosine(k),
            period_t: Some(TAU),
            period_s: Some(TAU),
            pole_zeros: Vec::new(),
        })
    }

    /// `dρ² + sin²ρ dφ²`, with `ρ ∈ (0, π)`.
    pub fn sphere_sine() -> Self {
        Self {
            warp: WarpFunction::Sine,
            period_t: None,
            period_s: Some(TAU),
            pole_zeros: vec![0.0, PI],
        }
    }

    /// `dρ² + cos²ρ dφ²`, with `ρ ∈ (−π/2, π/2)`.
    pub fn sphere_cosine() -> Self {
        Self {
            warp: WarpFunction::Cosine,
            period_t: None,
            period_s: Some(TAU),
            pole_zeros: vec![-FRAC_PI_2, FRAC_PI_2],
        }
    }

    pub fn warp_jet(&self, t: f64) -> WarpJet {
        self.warp.jet(t)
    }

    /// `w(t)`, failing at poles.
    pub fn checked_jet(&self, t: f64) -> Result<WarpJet> {
        let jet = self.warp.jet(t);
        if jet.value.abs() < POLE_TOLERANCE || !jet.value.is_finite() {
            return Err(Error::Pole {
                t,
                value: jet.value,
            });
        }
        Ok(jet)
    }

    pub fn is_sphere_model(&self) -> bool {
        self.warp.is_sphere_model()
    }

    pub fn periods(&self) -> Result<(f64, f64)> {
        match (self.period_t, self.period_s) {
            (Some(pt), Some(ps)) => Ok((pt, ps)),
            _ => Err(Error::invalid(format!(
                "surface with warp {} is not doubly periodic",
                self.warp.label()
            ))),
        }
    }
}

/// Christoffel symbols `Γᵏᵢⱼ` of a surface, stored as the six independent
/// components (`gKIJ` is `Γᴷᵢⱼ` with 1-based indices).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChristoffelSymbols {
    pub g111: f64,
    pub g112: f64,
    pub g122: f64,
    pub g211: f64,
    pub g212: f64,
    pub g222: f64,
}

impl ChristoffelSymbols {
    /// `Γᵏᵢⱼ` with 0-based indices, symmetric in `i, j`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        match (k, i.min(j), i.max(j)) {
            (0, 0, 0) => self.g111,
            (0, 0, 1) => self.g112,
            (0, 1, 1) => self.g122,
            (1, 0, 0) => self.g211,
            (1, 0, 1) => self.g212,
            (1, 1, 1) => self.g222,
            _ => panic!("Christoffel index out of range: ({k}, {i}, {j})"),
        }
    }
}

/// Curvature components `Rˡₖᵢⱼ` with `R(∂ᵢ, ∂ⱼ)∂ₖ = Rˡₖᵢⱼ ∂ₗ`; only the four
/// possibly nonzero ones are stored.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurvatureComponents {
    pub r1_221: f64,
    pub r1_212: f64,
    pub r2_112: f64,
    pub r2_121: f64,
}

impl CurvatureComponents {
    /// `Rˡₖᵢⱼ` with 0-based indices.
    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        match (l, k, i, j) {
            (0, 1, 1, 0) => self.r1_221,
            (0, 1, 0, 1) => self.r1_212,
            (1, 0, 0, 1) => self.r2_112,
            (1, 0, 1, 0) => self.r2_121,
            _ => 0.0,
        }
    }

    /// Gauss curvature `K = −w″/w`.
    pub fn gauss_curvature(&self) -> f64 {
        -self.r2_112
    }
}

/// Connection coefficients of `surface` at profile coordinate `t`.
pub fn christoffel(surface: &WarpedSurface, t: f64) -> Result<ChristoffelSymbols> {
    let w = surface.checked_jet(t)?;
    Ok(ChristoffelSymbols {
        g122: -w.value * w.d1,
        g212: w.d1 / w.value,
        ..ChristoffelSymbols::default()
    })
}

/// `∂Γᵏᵢⱼ/∂t`. The symbols do not depend on the fiber coordinate.
pub fn christoffel_derivative(surface: &WarpedSurface, t: f64) -> Result<ChristoffelSymbols> {
    let w = surface.checked_jet(t)?;
    Ok(ChristoffelSymbols {
        g122: -(w.d1 * w.d1 + w.value * w.d2),
        g212: (w.d2 * w.value - w.d1 * w.d1) / (w.value * w.value),
        ..ChristoffelSymbols::default()
    })
}

pub fn curvature(surface: &WarpedSurface, t: f64) -> Result<CurvatureComponents> {
    let w = surface.checked_jet(t)?;
    let ww2 = w.value * w.d2;
    let ratio = w.d2 / w.value;
    Ok(CurvatureComponents {
        r1_221: ww2,
        r1_212: -ww2,
        r2_112: ratio,
        r2_121: -ratio,
    })
}
