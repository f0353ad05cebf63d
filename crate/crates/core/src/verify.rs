//! Named verification suites. Each returns a [`VerifyReport`] whose
//! `failures` list is empty exactly when the suite passes.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitension::{bitension_generic, bitension_residual_linear};
use crate::classify::{expansion_check, verify_theorem, Family, Lattice};
use crate::error::{Error, Result};
use crate::functionals::{first_variation_bienergy, first_variation_energy, Variation};
use crate::geometry::WarpedSurface;
use crate::grid::GridSpec;
use crate::maps::{FdSteps, Jet2, LinearMap, ScalarField, SmoothMap};
use crate::report::{input_of, Failure, VerifyReport};
use crate::tension::{tension_generic, tension_linear};

pub const EXPANSION_TOLERANCE: f64 = 1e-8;
pub const ORDER_RANGE: (f64, f64) = (1.7, 2.3);
pub const ORACLE_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
pub const ENERGY_VARIATION_TOLERANCE: f64 = 1e-5;
pub const BIENERGY_VARIATION_TOLERANCE: f64 = 1e-4;
pub const VARIATION_EPS: f64 = 1e-3;
/// Sample points closer than this to a pole of the target (in `|λ|`) are
/// redrawn, so truncation error dominates roundoff.
pub const ORACLE_POLE_CLEARANCE: f64 = 0.3;
/// Maps with `a² + b²` below the square of this are redrawn: when `ρ` is
/// (nearly) constant the stencil is exact up to roundoff and no order can be
/// measured.
pub const ORACLE_MIN_RHO_SLOPE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    TheoremFlat,
    TheoremNonFlat,
    Expansion,
    Oracle,
    Variation,
    TensionOracle,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::TheoremFlat,
        Suite::TheoremNonFlat,
        Suite::Expansion,
        Suite::Oracle,
        Suite::Variation,
        Suite::TensionOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TheoremFlat => "theorem-flat",
            Suite::TheoremNonFlat => "theorem-nonflat",
            Suite::Expansion => "expansion",
            Suite::Oracle => "oracle",
            Suite::Variation => "variation",
            Suite::TensionOracle => "tension-oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

/// Inputs shared by the suites. `None` fields take per-suite defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: Option<GridSpec>,
    /// Offsets `k` of the non-flat family.
    pub k: Vec<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            grid: None,
            k: vec![1.5, 2.0, 3.0],
            samples: None,
            seed: 7,
        }
    }
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<VerifyReport> {
    let grid = |default: usize| config.grid.map_or_else(|| GridSpec::new(default, default), Ok);
    match suite {
        Suite::TheoremFlat => verify_theorem(Family::Flat, &Lattice::theorem_flat(), &grid(64)?),
        Suite::TheoremNonFlat => verify_theorem(
            Family::NonFlat,
            &Lattice::theorem_nonflat(config.k.clone()),
            &grid(64)?,
        ),
        Suite::Expansion => expansion_suite(config.samples.unwrap_or(256), config.seed),
        Suite::Oracle => oracle_suite(config.samples.unwrap_or(200), config.seed),
        Suite::Variation => variation_suite(config.samples.unwrap_or(20), config.seed, &grid(128)?),
        Suite::TensionOracle => tension_oracle_suite(config.samples.unwrap_or(200), config.seed),
    }
}

/// `(k + cos r)⁴ × reduced equation` against its trigonometric expansion for
/// random `b = 0` maps with parameters in `[−3, 3]` and `k ∈ (1, 4]`.
pub fn expansion_suite(samples: usize, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerifyReport::new(Suite::Expansion.name());
    while report.cases < samples {
        let (a, m, n, c) = (
            rng.gen_range(-3.0..=3.0),
            rng.gen_range(-3.0..=3.0),
            rng.gen_range(-3.0..=3.0),
            rng.gen_range(-3.0..=3.0),
        );
        let k = 4.0 - rng.gen_range(0.0..3.0);
        let r = rng.gen_range(-3.0..=3.0);
        let map = LinearMap::new(a, 0.0, c, m, n, 0.0);
        let residual = match expansion_check(&map, k, r) {
            Err(Error::Pole { .. }) => continue,
            other => other?,
        };
        report.cases += 1;
        report.record_residual(residual);
        if !(residual < EXPANSION_TOLERANCE) {
            report.failures.push(Failure {
                input: input_of([("a", a), ("c", c), ("m", m), ("n", n), ("k", k), ("r", r)]),
                expected: format!("< {EXPANSION_TOLERANCE:e}"),
                got: format!("{residual:e}"),
                residual,
            });
        }
    }
    Ok(report)
}

/// Random metric pair: flat torus into the sine model, or a non-flat torus
/// with random `k` into the cosine model.
fn random_pair(rng: &mut ChaCha8Rng, family: Family) -> Result<(WarpedSurface, WarpedSurface, f64)> {
    Ok(match family {
        Family::Flat => (WarpedSurface::flat_torus(), WarpedSurface::sphere_sine(), 0.0),
        Family::NonFlat => {
            let k = rng.gen_range(1.2..4.0);
            (WarpedSurface::nonflat_torus(k)?, WarpedSurface::sphere_cosine(), k)
        }
    })
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

struct OracleCase {
    family: Family,
    domain: WarpedSurface,
    target: WarpedSurface,
    k: f64,
    map: LinearMap,
    point: (f64, f64),
}

fn oracle_cases(per_family: usize, seed: u64) -> Result<Vec<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for family in [Family::Flat, Family::NonFlat] {
        let mut drawn = 0;
        while drawn < per_family {
            let (domain, target, k) = random_pair(&mut rng, family)?;
            let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let map = LinearMap::from_coefficients(c);
            let point = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            if target.warp.value(map.rho(point.0, point.1)).abs() < ORACLE_POLE_CLEARANCE
                || map.a.hypot(map.b) < ORACLE_MIN_RHO_SLOPE
            {
                continue;
            }
            drawn += 1;
            cases.push(OracleCase {
                family,
                domain,
                target,
                k,
                map,
                point,
            });
        }
    }
    Ok(cases)
}

fn case_input(case: &OracleCase) -> std::collections::BTreeMap<String, f64> {
    let m = case.map;
    let mut input = input_of([
        ("a", m.a),
        ("b", m.b),
        ("c", m.c),
        ("m", m.m),
        ("n", m.n),
        ("l", m.l),
        ("r", case.point.0),
        ("theta", case.point.1),
    ]);
    if case.family == Family::NonFlat {
        input.insert("k".into(), case.k);
    }
    input
}

/// Finite-difference bitension against the closed form at the three steps of
/// [`ORACLE_STEPS`]; the fitted order must lie in [`ORDER_RANGE`].
pub fn oracle_suite(per_family: usize, seed: u64) -> Result<VerifyReport> {
    let cases = oracle_cases(per_family, seed)?;
    let results = cases
        .par_iter()
        .map(|case| -> Result<([f64; 3], f64)> {
            let exact = bitension_residual_linear(&case.domain, &case.target, &case.map, case.point)?;
            let smooth = case.map.to_smooth();
            let mut errors = [0.0; 3];
            for (e, h) in errors.iter_mut().zip(ORACLE_STEPS) {
                let fd = bitension_generic(&case.domain, &case.target, &smooth, case.point, h)?;
                *e = (fd.r1 - exact.r1).hypot(fd.r2 - exact.r2);
            }
            Ok((errors, fitted_order(&ORACLE_STEPS, &errors)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerifyReport::new(Suite::Oracle.name());
    report.cases = cases.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (case, (errors, order)) in cases.iter().zip(results) {
        report.record_residual(errors[2]);
        lo = lo.min(order);
        hi = hi.max(order);
        if !(ORDER_RANGE.0..=ORDER_RANGE.1).contains(&order) {
            report.failures.push(Failure {
                input: case_input(case),
                expected: format!("order in [{}, {}]", ORDER_RANGE.0, ORDER_RANGE.1),
                got: format!("order {order:.3}, errors {errors:?}"),
                residual: errors[2],
            });
        }
    }
    if !cases.is_empty() {
        report.set_metric("min_order", lo);
        report.set_metric("max_order", hi);
    }
    Ok(report)
}

/// Trigonometric polynomial `c₀ + Σ cᵢ sin(pᵢ r + qᵢ θ + δᵢ)` with analytic
/// partials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub offset: f64,
    pub terms: Vec<(f64, f64, f64, f64)>,
}

impl TrigPolynomial {
    /// The offset has magnitude at least `amplitude / 3`, so the pairing with
    /// a constant field never vanishes trivially.
    pub fn random(rng: &mut ChaCha8Rng, terms: usize, amplitude: f64) -> Self {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let offset = sign * rng.gen_range(amplitude / 3.0..amplitude);
        let terms = (0..terms)
            .map(|_| {
                (
                    rng.gen_range(-amplitude..amplitude),
                    rng.gen_range(-2i32..=2) as f64,
                    rng.gen_range(-2i32..=2) as f64,
                    rng.gen_range(0.0..TAU),
                )
            })
            .collect();
        Self { offset, terms }
    }

    pub fn jet(&self, r: f64, t: f64) -> Jet2 {
        let mut out = Jet2 {
            value: self.offset,
            ..Jet2::default()
        };
        for &(c, p, q, delta) in &self.terms {
            let (s, co) = (p * r + q * t + delta).sin_cos();
            out.value += c * s;
            out.d_r += c * p * co;
            out.d_t += c * q * co;
            out.d_rr -= c * p * p * s;
            out.d_rt -= c * p * q * s;
            out.d_tt -= c * q * q * s;
        }
        out
    }

    pub fn field(&self) -> ScalarField {
        let me = self.clone();
        ScalarField::analytic(move |r, t| me.jet(r, t))
    }
}

struct VariationCase {
    family: Family,
    domain: WarpedSurface,
    target: WarpedSurface,
    k: f64,
    map: LinearMap,
    variation: Variation,
}

fn variation_cases(per_family: usize, seed: u64) -> Result<Vec<VariationCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for family in [Family::Flat, Family::NonFlat] {
        for _ in 0..per_family {
            let (domain, target, k) = random_pair(&mut rng, family)?;
            // ρ must stay constant and off the poles for the functionals to
            // be integrals of periodic functions.
            let c = match family {
                Family::Flat => rng.gen_range(0.4..PI - 0.4),
                Family::NonFlat => rng.gen_range(-1.1..1.1),
            };
            let map = LinearMap::new(
                0.0,
                0.0,
                c,
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..TAU),
            );
            let v1 = TrigPolynomial::random(&mut rng, 3, 0.3);
            let v2 = TrigPolynomial::random(&mut rng, 3, 0.3);
            cases.push(VariationCase {
                family,
                domain,
                target,
                k,
                map,
                variation: Variation::new(v1.field(), v2.field()),
            });
        }
    }
    Ok(cases)
}

/// First-variation identities `dE/dt = −∫⟨τ, V⟩` and `dE₂/dt = ∫⟨τ₂, V⟩`
/// for random constant-latitude maps and trigonometric variations.
pub fn variation_suite(per_family: usize, seed: u64, grid: &GridSpec) -> Result<VerifyReport> {
    let cases = variation_cases(per_family, seed)?;
    let results = cases
        .par_iter()
        .map(|c| -> Result<[(f64, f64); 2]> {
            Ok([
                first_variation_energy(&c.domain, &c.target, &c.map, &c.variation, VARIATION_EPS, grid)?,
                first_variation_bienergy(&c.domain, &c.target, &c.map, &c.variation, VARIATION_EPS, grid)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerifyReport::new(Suite::Variation.name());
    report.cases = cases.len();
    let (mut energy_gap, mut bienergy_gap) = (0.0_f64, 0.0_f64);
    let mut opposite_sign_gap = f64::INFINITY;
    for (case, [(e_lhs, e_rhs), (b_lhs, b_rhs)]) in cases.iter().zip(results) {
        let eg = (e_lhs - e_rhs).abs();
        let bg = (b_lhs - b_rhs).abs();
        energy_gap = energy_gap.max(eg);
        bienergy_gap = bienergy_gap.max(bg);
        opposite_sign_gap = opposite_sign_gap.min((b_lhs + b_rhs).abs());
        report.record_residual(eg.max(bg));
        let mut input = input_of([
            ("c", case.map.c),
            ("m", case.map.m),
            ("n", case.map.n),
            ("l", case.map.l),
        ]);
        if case.family == Family::NonFlat {
            input.insert("k".into(), case.k);
        }
        if !(eg < ENERGY_VARIATION_TOLERANCE) {
            report.failures.push(Failure {
                input: input.clone(),
                expected: format!("energy identity within {ENERGY_VARIATION_TOLERANCE:e}"),
                got: format!("dE/dt = {e_lhs}, -<tau, V> = {e_rhs}"),
                residual: eg,
            });
        }
        if !(bg < BIENERGY_VARIATION_TOLERANCE) {
            report.failures.push(Failure {
                input,
                expected: format!("bienergy identity within {BIENERGY_VARIATION_TOLERANCE:e}"),
                got: format!("dE2/dt = {b_lhs}, <tau2, V> = {b_rhs}"),
                residual: bg,
            });
        }
    }
    if !cases.is_empty() {
        report.set_metric("max_energy_gap", energy_gap);
        report.set_metric("max_bienergy_gap", bienergy_gap);
        report.set_metric("min_opposite_sign_gap", opposite_sign_gap);
    }
    Ok(report)
}

/// Closed-form tension against the general formula, with analytic partials
/// (roundoff agreement) and with sampled partials (finite-difference
/// agreement).
pub fn tension_oracle_suite(per_family: usize, seed: u64) -> Result<VerifyReport> {
    const ANALYTIC_TOL: f64 = 1e-10;
    const SAMPLED_TOL: f64 = 1e-6;
    let cases = oracle_cases(per_family, seed)?;
    let mut report = VerifyReport::new(Suite::TensionOracle.name());
    report.cases = cases.len();
    for case in &cases {
        let exact = tension_linear(&case.domain, &case.target, &case.map, case.point)?;
        let analytic = tension_generic(&case.domain, &case.target, &case.map.to_smooth(), case.point)?;
        let m = case.map;
        let sampled_map = SmoothMap::finite_difference(
            move |r, t| m.rho(r, t),
            move |r, t| m.phi(r, t),
            FdSteps::default(),
        );
        let sampled = tension_generic(&case.domain, &case.target, &sampled_map, case.point)?;
        let scale = 1.0 + exact.norm();
        let gaps = [
            ((analytic.t1 - exact.t1).hypot(analytic.t2 - exact.t2) / scale, ANALYTIC_TOL, "analytic"),
            ((sampled.t1 - exact.t1).hypot(sampled.t2 - exact.t2) / scale, SAMPLED_TOL, "sampled"),
        ];
        for (gap, tol, route) in gaps {
            report.record_residual(gap);
            if !(gap < tol) {
                report.failures.push(Failure {
                    input: case_input(case),
                    expected: format!("{route} route within {tol:e}"),
                    got: format!("{gap:e}"),
                    residual: gap,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("theorem".parse::<Suite>().is_err());
    }

    #[test]
    fn fitted_order_of_exact_powers() {
        let errors: Vec<f64> = ORACLE_STEPS.iter().map(|h| 3.0 * h * h).collect();
        assert!((fitted_order(&ORACLE_STEPS, &errors) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trig_polynomial_partials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = TrigPolynomial::random(&mut rng, 4, 1.0);
        let sampled = ScalarField::sampled(
            {
                let p = p.clone();
                move |r, t| p.jet(r, t).value
            },
            FdSteps::default(),
        );
        let (a, b) = (p.jet(0.4, 1.3), sampled.jet(0.4, 1.3));
        for (x, y) in [(a.d_r, b.d_r), (a.d_t, b.d_t), (a.d_rr, b.d_rr), (a.d_rt, b.d_rt), (a.d_tt, b.d_tt)] {
            assert!((x - y).abs() < 1e-5, "{x} vs {y}");
        }
    }

    #[test]
    fn small_suites_pass_and_are_deterministic() {
        let expansion = expansion_suite(32, 3).unwrap();
        assert!(expansion.passed() && expansion.cases == 32);
        assert_eq!(expansion, expansion_suite(32, 3).unwrap());
        let oracle = oracle_suite(10, 3).unwrap();
        assert!(oracle.passed(), "{:?}", oracle.failures);
        let tension = tension_oracle_suite(10, 3).unwrap();
        assert!(tension.passed(), "{:?}", tension.failures);
        let variation = variation_suite(2, 3, &GridSpec::new(64, 64).unwrap()).unwrap();
        assert!(variation.passed(), "{:?}", variation.failures);
    }
}
