//! Case classification of linear maps from flat and non-flat tori into the
//! round sphere, and the trigonometric expansion of the reduced bitension
//! equation for the non-flat family.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitension::max_bitension_norm;
use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;
use crate::grid::GridSpec;
use crate::maps::LinearMap;
use crate::report::{input_of, Failure, VerifyReport};
use crate::tension::max_tension_norm;

/// Tolerance for matching user-given constants against case boundaries.
pub const EXACT_MATCH_TOLERANCE: f64 = 1e-12;

/// Grid used to decide harmonicity of non-flat maps: 256 points in `r` and 32
/// in `θ`. The tension is a low-degree trigonometric expression in `r`.
pub const NONFLAT_SCAN_NR: usize = 256;
pub const NONFLAT_SCAN_NTHETA: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Harmonic,
    ProperBiharmonic,
    NotBiharmonic,
}

impl Verdict {
    pub fn is_biharmonic(self) -> bool {
        matches!(self, Verdict::Harmonic | Verdict::ProperBiharmonic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    A,
    B,
    C,
    NonFlatHarmonic,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    pub case_tag: CaseTag,
    /// Which condition decided the verdict.
    pub witness: Option<String>,
}

impl ClassificationResult {
    fn new(verdict: Verdict, case_tag: CaseTag, witness: &str) -> Self {
        Self {
            verdict,
            case_tag,
            witness: Some(witness.to_string()),
        }
    }

    /// `"ProperBiharmonic (case C)"`, `"Harmonic (case A)"`, `"NotBiharmonic"`.
    pub fn summary(&self) -> String {
        let verdict = format!("{:?}", self.verdict);
        match self.case_tag {
            CaseTag::A | CaseTag::B | CaseTag::C => {
                format!("{verdict} (case {:?})", self.case_tag)
            }
            CaseTag::NonFlatHarmonic | CaseTag::None => verdict,
        }
    }
}

fn is_zero(x: f64) -> bool {
    x.abs() <= EXACT_MATCH_TOLERANCE
}

/// Distance from `x` to the nearest point of `target + πℤ`.
fn distance_mod_pi(x: f64, target: f64) -> f64 {
    let d = (x - target).rem_euclid(PI);
    d.min(PI - d)
}

/// Classification for the flat torus `dr² + dθ²` into `dρ² + sin²ρ dφ²`.
///
/// Case A: `a = b = 0`, `c ≡ π/2`. Case B: `m = n = 0`. Case C: `a = b = 0`,
/// `m² + n² ≠ 0`, `c ≡ π/4` or `3π/4` (proper biharmonic). Constants are
/// compared modulo `π`, since `c` and `c + π` give the same residuals.
pub fn classify_flat(map: &LinearMap) -> ClassificationResult {
    let LinearMap { a, b, c, m, n, .. } = *map;
    let rho_constant = is_zero(a) && is_zero(b);
    if rho_constant && distance_mod_pi(c, FRAC_PI_2) <= EXACT_MATCH_TOLERANCE {
        return ClassificationResult::new(
            Verdict::Harmonic,
            CaseTag::A,
            "a = b = 0 and the image is the equator",
        );
    }
    if is_zero(m) && is_zero(n) {
        return ClassificationResult::new(
            Verdict::Harmonic,
            CaseTag::B,
            "m = n = 0: the map runs along a meridian",
        );
    }
    if !is_zero(a * m + b * n) {
        return ClassificationResult::new(
            Verdict::NotBiharmonic,
            CaseTag::None,
            "am + bn != 0 leaves the cos 2rho condition unsolvable",
        );
    }
    if !rho_constant {
        return ClassificationResult::new(
            Verdict::NotBiharmonic,
            CaseTag::None,
            "am + bn = 0 with a^2 + b^2 != 0 would force cos 2rho to be constant",
        );
    }
    if distance_mod_pi(c, 0.0) <= EXACT_MATCH_TOLERANCE {
        return ClassificationResult::new(
            Verdict::Harmonic,
            CaseTag::None,
            "a = b = 0 and the image is a pole: the map is constant",
        );
    }
    if distance_mod_pi(c, FRAC_PI_4) <= EXACT_MATCH_TOLERANCE
        || distance_mod_pi(c, 3.0 * FRAC_PI_4) <= EXACT_MATCH_TOLERANCE
    {
        return ClassificationResult::new(
            Verdict::ProperBiharmonic,
            CaseTag::C,
            "a = b = 0, m^2 + n^2 != 0 and cos 2c = 0",
        );
    }
    ClassificationResult::new(
        Verdict::NotBiharmonic,
        CaseTag::None,
        "a = b = 0, m^2 + n^2 != 0 and cos 2c != 0",
    )
}

/// Classification for `dr² + (k + cos r)² dθ²` into `dρ² + cos²ρ dφ²`.
/// Such a map is biharmonic only when it is harmonic, which is decided by
/// scanning the closed-form tension against `tolerance_harmonic`.
pub fn classify_nonflat(map: &LinearMap, k: f64) -> Result<ClassificationResult> {
    classify_nonflat_with(map, k, GridSpec::default().tolerance_harmonic)
}

pub fn classify_nonflat_with(
    map: &LinearMap,
    k: f64,
    tolerance_harmonic: f64,
) -> Result<ClassificationResult> {
    let domain = WarpedSurface::nonflat_torus(k)?;
    let target = WarpedSurface::sphere_cosine();
    let grid = GridSpec::new(NONFLAT_SCAN_NR, NONFLAT_SCAN_NTHETA)?
        .with_tolerances(tolerance_harmonic, GridSpec::default().tolerance_biharmonic)?;
    match max_tension_norm(&domain, &target, map, &grid, tolerance_harmonic) {
        Ok(max) if max < tolerance_harmonic => Ok(ClassificationResult::new(
            Verdict::Harmonic,
            CaseTag::NonFlatHarmonic,
            "tension vanishes on the scan grid",
        )),
        Ok(_) => Ok(ClassificationResult::new(
            Verdict::NotBiharmonic,
            CaseTag::None,
            "tension does not vanish, and only harmonic maps are biharmonic here",
        )),
        Err(Error::EmptyGrid) => Ok(ClassificationResult::new(
            Verdict::Harmonic,
            CaseTag::NonFlatHarmonic,
            "the image is a pole: the map is constant",
        )),
        Err(e) => Err(e),
    }
}

/// Coefficients of `(k + cos r)⁴` times the reduced first equation, for
/// `b = 0`. `b[0]` and `d[0]` are unused and kept at zero so indices match.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigCoefficients {
    pub a: [f64; 5],
    pub b: [f64; 5],
    pub c: [f64; 5],
    pub d: [f64; 5],
}

pub fn trig_coefficients(map: &LinearMap, k: f64) -> Result<TrigCoefficients> {
    if map.b != 0.0 {
        return Err(Error::invalid(format!(
            "trigonometric expansion needs b = 0, got b = {}",
            map.b
        )));
    }
    if !(k > 1.0) {
        return Err(Error::invalid(format!("need k > 1, got {k}")));
    }
    let LinearMap { a, m, n, .. } = *map;
    let (a2, m2, n2) = (a * a, m * m, n * n);
    let (k2, k3, k4) = (k * k, k * k * k, k * k * k * k);
    let m4 = m2 * m2;
    let a0 = -7.0 * m2 * k2 / 4.0 - 2.0 * a2 * n2 * k2 - a2 * n2 - 7.0 * m2 / 16.0
        - 4.0 * a2 * m2 * k4
        - 12.0 * a2 * m2 * k2
        - 3.0 * a2 * m2 / 2.0
        + 3.0 * n2 / 2.0;
    let a1 = -5.0 * m2 * k / 2.0 - m2 * k3 - 4.0 * a2 * n2 * k - 16.0 * a2 * m2 * k3
        - 12.0 * a2 * m2 * k
        + n2 * k;
    let a2c = -5.0 * m2 * k2 / 4.0 - a2 * n2 - m2 / 2.0 - 12.0 * a2 * m2 * k2 - 2.0 * a2 * m2
        - n2 / 2.0;
    let a3 = -m2 * k / 2.0 - 4.0 * a2 * m2 * k;
    let a4 = -m2 / 16.0 - a2 * m2 / 2.0;
    let b1 = -4.0 * a * m2 * k3 - 3.0 * a * m2 * k + 2.0 * a * n2 * k;
    let b2 = -6.0 * a * m2 * k2 - a * m2 + a * n2;
    let b3 = -3.0 * a * m2 * k;
    let b4 = -a * m2 / 2.0;
    let c0 = m4 * k4 / 4.0 + 3.0 * m4 * k2 / 4.0 + 3.0 * m4 / 32.0 + m2 * n2 * k2 / 2.0
        + m2 * n2 / 4.0
        + n2 * n2 / 4.0;
    let c1 = m4 * k3 + 3.0 * m4 * k / 4.0 + m2 * n2 * k;
    let c2 = 3.0 * m4 * k2 / 4.0 + m2 * n2 / 4.0 + m4 / 8.0;
    let c3 = m4 * k / 4.0;
    let c4 = m4 / 32.0;
    let d1 = a * (k2 - 1.0) * k + a * m2 * (2.0 * k3 + 3.0 * k / 2.0);
    let d2 = a * (k2 - 1.0) / 2.0 + a * m2 * (3.0 * k2 + 0.5);
    let d3 = 3.0 * a * m2 * k / 2.0;
    let d4 = a * m2 / 4.0;
    Ok(TrigCoefficients {
        a: [a0, a1, a2c, a3, a4],
        b: [0.0, b1, b2, b3, b4],
        c: [c0, c1, c2, c3, c4],
        d: [0.0, d1, d2, d3, d4],
    })
}

impl TrigCoefficients {
    /// Evaluates the expansion at `r` for `ρ = a r + c`.
    pub fn evaluate(&self, a: f64, c: f64, r: f64) -> f64 {
        let two = 2.0 * a * r + 2.0 * c;
        let four = 4.0 * a * r + 4.0 * c;
        let mut sum = self.a[0] * two.sin() + self.c[0] * four.sin();
        for i in 1..=4 {
            let ir = i as f64 * r;
            sum += (self.a[i] + self.b[i]) / 2.0 * (two + ir).sin()
                + (self.a[i] - self.b[i]) / 2.0 * (two - ir).sin()
                + self.c[i] / 2.0 * ((four + ir).sin() + (four - ir).sin())
                + self.d[i] * ir.sin();
        }
        sum
    }
}

/// First reduced bitension equation for the non-flat family, evaluated
/// directly at `(r, θ)`.
pub fn reduced_first_equation(map: &LinearMap, k: f64, (r, theta): (f64, f64)) -> Result<f64> {
    let domain = WarpedSurface::nonflat_torus(k)?;
    let sigma = domain.checked_jet(r)?.value;
    let rho = map.rho(r, theta);
    WarpedSurface::sphere_cosine().checked_jet(rho)?;
    let LinearMap { a, b, m, n, .. } = *map;
    let (sin_r, cos_r) = r.sin_cos();
    let (s2, s3, s4) = (sigma * sigma, sigma.powi(3), sigma.powi(4));
    let q = m * m + n * n / s2;
    let w = a * m + b * n / s2;
    let constant = (a * (k * k - 1.0) - 2.0 * b * m * n) * sin_r / s3 + 2.0 * a * m * m * sin_r / sigma;
    let sin2 = n * n * (k * cos_r + sin_r * sin_r + 1.0) / s4
        + (m * m / 2.0 * sin_r * sin_r - m * m * k * cos_r - m * m) / s2
        - 2.0 * w * w
        - 2.0 * q * (a * a + b * b / s2);
    let cos2 = 2.0 * a * n * n * sin_r / s3 - 4.0 * a * m * m * sin_r / sigma
        + 2.0 * b * m * n * sin_r / s3;
    Ok(constant
        + sin2 * (2.0 * rho).sin()
        + cos2 * (2.0 * rho).cos()
        + q * q / 4.0 * (4.0 * rho).sin())
}

/// `|expansion − (k + cos r)⁴ · reduced first equation|` at `r`, for `b = 0`.
pub fn expansion_check(map: &LinearMap, k: f64, r: f64) -> Result<f64> {
    let coefficients = trig_coefficients(map, k)?;
    let direct = (k + r.cos()).powi(4) * reduced_first_equation(map, k, (r, 0.0))?;
    Ok((coefficients.evaluate(map.a, map.c, r) - direct).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Flat,
    NonFlat,
}

/// Cartesian parameter lattice. `k` is only used by the non-flat family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub l: Vec<f64>,
    pub k: Vec<f64>,
}

/// `±j, ±(2j−1)/2, ±(2j−1)/4` for `j = 1..4`: the values of `a` where terms
/// of the expansion collide.
pub fn special_a_values() -> Vec<f64> {
    let mut out = Vec::new();
    for j in 1..=4 {
        let j = j as f64;
        for v in [j, (2.0 * j - 1.0) / 2.0, (2.0 * j - 1.0) / 4.0] {
            out.push(v);
            out.push(-v);
        }
    }
    out
}

fn sorted_union(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Lattice {
    /// `a, b ∈ {0, ±½, ±1, ±2}`, `c = jπ/16` (`j = 1..15`), `m, n ∈ {0, ±1, ±2}`.
    pub fn theorem_flat() -> Self {
        Self {
            a: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            b: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
            c: (1..=15).map(|j| j as f64 * PI / 16.0).collect(),
            m: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            n: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            l: vec![0.0],
            k: vec![],
        }
    }

    /// `a` over quarter steps up to 2 joined with [`special_a_values`],
    /// `b, m, n ∈ {0, ±1, ±2}`, `c = 0.2 j` (`j = 1..15`).
    pub fn theorem_nonflat(k: Vec<f64>) -> Self {
        let base = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
        let a = sorted_union(
            base.iter()
                .flat_map(|&v| [v, -v])
                .chain(special_a_values()),
        );
        Self {
            a,
            b: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            c: (1..=15).map(|j| 0.2 * j as f64).collect(),
            m: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            n: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            l: vec![0.0],
            k,
        }
    }

    pub fn maps(&self) -> Vec<LinearMap> {
        let mut out = Vec::new();
        for &a in &self.a {
            for &b in &self.b {
                for &c in &self.c {
                    for &m in &self.m {
                        for &n in &self.n {
                            for &l in &self.l {
                                out.push(LinearMap::new(a, b, c, m, n, l));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn map_input(map: &LinearMap, k: Option<f64>) -> std::collections::BTreeMap<String, f64> {
    let mut input = input_of([
        ("a", map.a),
        ("b", map.b),
        ("c", map.c),
        ("m", map.m),
        ("n", map.n),
        ("l", map.l),
    ]);
    if let Some(k) = k {
        input.insert("k".to_string(), k);
    }
    input
}

/// Grid maxima of `‖τ‖` and `‖τ₂‖` with harmonic and biharmonic verdicts.
/// Returns `None` when every grid point is excluded (the image is a pole, so
/// the map is constant and both verdicts hold vacuously).
#[derive(Clone, Copy, Debug, PartialEq)]
struct GridVerdict {
    tension: f64,
    bitension: f64,
}

fn grid_verdict(
    domain: &WarpedSurface,
    target: &WarpedSurface,
    map: &LinearMap,
    grid: &GridSpec,
    bitension_cutoff: f64,
) -> Result<Option<GridVerdict>> {
    let tension = match max_tension_norm(domain, target, map, grid, grid.tolerance_harmonic) {
        Ok(v) => v,
        Err(Error::EmptyGrid) => return Ok(None),
        Err(e) => return Err(e),
    };
    let cutoff = bitension_cutoff.max(grid.tolerance_biharmonic);
    let bitension = max_bitension_norm(domain, target, map, grid, cutoff)?;
    Ok(Some(GridVerdict { tension, bitension }))
}

/// Residual floor probe: non-harmonic tuples are scanned until the bitension
/// reaches this value.
pub const RESIDUAL_FLOOR: f64 = 1e-3;

/// Checks a lattice against the theorem for `family`.
///
/// Flat: `classify_flat` must agree with grid-evaluated harmonicity and
/// biharmonicity for every tuple. Non-flat: no tuple may be biharmonic on the
/// grid without being harmonic, and the classification must agree with the
/// grid. Metrics record the smallest bitension maximum among non-harmonic
/// tuples (scanned up to [`RESIDUAL_FLOOR`]), the number of proper
/// biharmonic hits, and the number of harmonic maps that fail the
/// biharmonic tolerance.
pub fn verify_theorem(family: Family, lattice: &Lattice, grid: &GridSpec) -> Result<VerifyReport> {
    grid.validate()?;
    let maps = lattice.maps();
    let jobs: Vec<(LinearMap, Option<f64>)> = match family {
        Family::Flat => maps.into_iter().map(|m| (m, None)).collect(),
        Family::NonFlat => {
            for &k in &lattice.k {
                WarpedSurface::nonflat_torus(k)?;
            }
            lattice
                .k
                .iter()
                .flat_map(|&k| maps.iter().map(move |m| (*m, Some(k))))
                .collect()
        }
    };
    let target = match family {
        Family::Flat => WarpedSurface::sphere_sine(),
        Family::NonFlat => WarpedSurface::sphere_cosine(),
    };

    let outcomes = jobs
        .par_iter()
        .map(|(map, k)| -> Result<(Option<GridVerdict>, ClassificationResult)> {
            let (domain, classified) = match k {
                None => (WarpedSurface::flat_torus(), classify_flat(map)),
                Some(k) => (
                    WarpedSurface::nonflat_torus(*k)?,
                    classify_nonflat_with(map, *k, grid.tolerance_harmonic)?,
                ),
            };
            let verdict = grid_verdict(&domain, &target, map, grid, RESIDUAL_FLOOR)?;
            Ok((verdict, classified))
        })
        .collect::<Result<Vec<_>>>()?;

    let suite = match family {
        Family::Flat => "theorem-flat",
        Family::NonFlat => "theorem-nonflat",
    };
    let mut report = VerifyReport::new(suite);
    report.cases = jobs.len();
    let mut floor = f64::INFINITY;
    let mut proper_hits = 0usize;
    let mut harmonic_not_biharmonic = 0usize;
    for ((map, k), (grid_result, classified)) in jobs.iter().zip(outcomes) {
        let (harmonic, biharmonic, residual) = match grid_result {
            None => (true, true, 0.0),
            Some(v) => (
                v.tension < grid.tolerance_harmonic,
                v.bitension < grid.tolerance_biharmonic,
                v.bitension,
            ),
        };
        if harmonic && !biharmonic {
            harmonic_not_biharmonic += 1;
        }
        if !harmonic {
            floor = floor.min(residual);
        }
        if biharmonic {
            report.record_residual(residual);
        }
        let grid_verdict = match (harmonic, biharmonic) {
            (true, _) => Verdict::Harmonic,
            (false, true) => Verdict::ProperBiharmonic,
            (false, false) => Verdict::NotBiharmonic,
        };
        if grid_verdict == Verdict::ProperBiharmonic {
            proper_hits += 1;
        }
        let mut mismatch = grid_verdict != classified.verdict;
        if family == Family::Flat && grid_verdict == Verdict::ProperBiharmonic {
            let shape = is_zero(map.a)
                && is_zero(map.b)
                && (distance_mod_pi(map.c, FRAC_PI_4) <= EXACT_MATCH_TOLERANCE
                    || distance_mod_pi(map.c, 3.0 * FRAC_PI_4) <= EXACT_MATCH_TOLERANCE)
                && map.m * map.m + map.n * map.n != 0.0;
            mismatch |= !shape;
        }
        if family == Family::NonFlat && grid_verdict == Verdict::ProperBiharmonic {
            mismatch = true;
        }
        if mismatch {
            report.failures.push(Failure {
                input: map_input(map, *k),
                expected: classified.summary(),
                got: format!("{grid_verdict:?} (grid)"),
                residual,
            });
        }
    }
    report.set_metric("proper_biharmonic_hits", proper_hits as f64);
    report.set_metric("harmonic_not_biharmonic", harmonic_not_biharmonic as f64);
    if floor.is_finite() {
        report.set_metric("min_nonharmonic_residual", floor);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitension::{bitension_residual_linear, is_biharmonic};
    use crate::tension::is_harmonic;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn lm(a: f64, b: f64, c: f64, m: f64, n: f64, l: f64) -> LinearMap {
        LinearMap::new(a, b, c, m, n, l)
    }

    #[test]
    fn flat_examples() {
        let r = classify_flat(&lm(0.0, 0.0, FRAC_PI_2, 3.0, 4.0, 1.0));
        assert_eq!((r.verdict, r.case_tag), (Verdict::Harmonic, CaseTag::A));
        let r = classify_flat(&lm(2.0, -1.0, 0.3, 0.0, 0.0, 5.0));
        assert_eq!((r.verdict, r.case_tag), (Verdict::Harmonic, CaseTag::B));
        let r = classify_flat(&lm(0.0, 0.0, FRAC_PI_4, 1.0, 1.0, 0.0));
        assert_eq!((r.verdict, r.case_tag), (Verdict::ProperBiharmonic, CaseTag::C));
        assert_eq!(r.summary(), "ProperBiharmonic (case C)");
        let r = classify_flat(&lm(0.0, 0.0, PI / 3.0, 1.0, 0.0, 0.0));
        assert_eq!(r.verdict, Verdict::NotBiharmonic);
        assert_eq!(r.summary(), "NotBiharmonic");
        let r = classify_flat(&lm(1.0, -1.0, 0.5, 1.0, 1.0, 0.0));
        assert_eq!(r.verdict, Verdict::NotBiharmonic);
        assert!(r.witness.unwrap().contains("a^2 + b^2"));
        let r = classify_flat(&lm(1.0, 0.0, 0.5, 1.0, 0.0, 0.0));
        assert!(r.witness.unwrap().contains("am + bn"));
    }

    #[test]
    fn flat_case_boundaries_are_matched_modulo_pi() {
        let r = classify_flat(&lm(0.0, 0.0, 3.0 * FRAC_PI_4, 0.0, 2.0, 0.0));
        assert_eq!(r.case_tag, CaseTag::C);
        let r = classify_flat(&lm(0.0, 0.0, FRAC_PI_4 + PI, 1.0, 0.0, 0.0));
        assert_eq!(r.case_tag, CaseTag::C);
        let r = classify_flat(&lm(0.0, 0.0, FRAC_PI_4 + 1e-9, 1.0, 0.0, 0.0));
        assert_eq!(r.verdict, Verdict::NotBiharmonic);
        let r = classify_flat(&lm(0.0, 0.0, 0.0, 1.0, 2.0, 0.0));
        assert_eq!((r.verdict, r.case_tag), (Verdict::Harmonic, CaseTag::None));
    }

    #[test]
    fn nonflat_examples() {
        let r = classify_nonflat(&lm(0.0, 0.0, 0.4, 0.0, 0.0, 2.0), 2.0).unwrap();
        assert_eq!((r.verdict, r.case_tag), (Verdict::Harmonic, CaseTag::NonFlatHarmonic));
        let r = classify_nonflat(&lm(0.0, 1.0, 0.4, 0.0, 0.0, 2.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Harmonic);
        let r = classify_nonflat(&lm(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::NotBiharmonic);
        let r = classify_nonflat(&lm(0.0, 0.0, 0.0, 1.0, 0.0, 0.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::NotBiharmonic);
        let r = classify_nonflat(&lm(0.0, 0.0, 0.0, 0.0, 2.0, 0.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Harmonic);
        let r = classify_nonflat(&lm(0.0, 0.0, FRAC_PI_2, 1.0, 1.0, 0.0), 2.0).unwrap();
        assert_eq!(r.verdict, Verdict::Harmonic);
        assert!(matches!(
            classify_nonflat(&lm(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn coefficient_examples() {
        let t = trig_coefficients(&lm(0.7, 0.0, 0.0, 2.0, -1.3, 0.0), 2.5).unwrap();
        assert_abs_diff_eq!(t.c[4], 0.5, epsilon = 1e-15);
        let t = trig_coefficients(&lm(1.0, 0.0, 0.0, 2.0, 0.0, 0.0), 3.0).unwrap();
        assert_abs_diff_eq!(t.d[4], 1.0, epsilon = 1e-15);
        let t = trig_coefficients(&lm(1.3, 0.0, 0.0, 0.0, 3.0, 0.0), 2.0).unwrap();
        assert_abs_diff_eq!(t.c[0], 81.0 / 4.0, epsilon = 1e-12);
        for v in [t.a[3], t.a[4], t.b[3], t.b[4], t.c[1], t.c[2], t.c[3], t.c[4], t.d[3], t.d[4]] {
            assert_eq!(v, 0.0);
        }
        assert!(trig_coefficients(&lm(1.0, 0.5, 0.0, 1.0, 1.0, 0.0), 2.0).is_err());
    }

    #[test]
    fn reduced_block_for_vanishing_m() {
        let (a, n, k) = (0.6_f64, 1.7_f64, 2.2_f64);
        let t = trig_coefficients(&lm(a, 0.0, 0.0, 0.0, n, 0.0), k).unwrap();
        let (a2, n2) = (a * a, n * n);
        assert_abs_diff_eq!(t.a[0], -2.0 * a2 * n2 * k * k - a2 * n2 + 1.5 * n2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.a[1], -4.0 * a2 * n2 * k + n2 * k, epsilon = 1e-12);
        assert_abs_diff_eq!(t.a[2], -a2 * n2 - n2 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.b[1], 2.0 * a * n2 * k, epsilon = 1e-12);
        assert_abs_diff_eq!(t.b[2], a * n2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d[1], a * (k * k - 1.0) * k, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d[2], a * (k * k - 1.0) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn expansion_examples() {
        assert!(expansion_check(&lm(1.0, 0.0, 0.3, 1.0, 1.0, 0.0), 2.0, 0.7).unwrap() < 1e-8);
        let zero = lm(0.0, 0.0, 0.4, 0.0, 0.0, 0.0);
        assert_eq!(expansion_check(&zero, 2.0, 1.1).unwrap(), 0.0);
        assert_eq!(reduced_first_equation(&zero, 2.0, (1.1, 0.0)).unwrap(), 0.0);
        let map = lm(1.0, 0.0, 0.0, 0.0, 2.0, 0.0);
        let worst = (0..64)
            .map(|i| expansion_check(&map, 3.0, (i as f64 + 0.5) * TAU / 64.0).unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn expansion_rejects_poles() {
        let map = lm(0.0, 0.0, FRAC_PI_2, 1.0, 1.0, 0.0);
        assert!(matches!(expansion_check(&map, 2.0, 0.3), Err(Error::Pole { .. })));
    }

    #[test]
    fn reduced_equation_is_the_first_bitension_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let target = WarpedSurface::sphere_cosine();
        for _ in 0..200 {
            let k = rng.gen_range(1.2..4.0);
            let domain = WarpedSurface::nonflat_torus(k).unwrap();
            let mut c = || rng.gen_range(-2.0..2.0);
            let map = lm(c(), c(), c(), c(), c(), c());
            let p = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            if map.rho(p.0, p.1).cos().abs() < 0.2 {
                continue;
            }
            let direct = reduced_first_equation(&map, k, p).unwrap();
            let r1 = bitension_residual_linear(&domain, &target, &map, p).unwrap().r1;
            assert!((direct - r1).abs() < 1e-9 * (1.0 + r1.abs()), "{direct} vs {r1}");
        }
    }

    #[test]
    fn special_values_and_lattices() {
        let v = special_a_values();
        assert_eq!(v.len(), 24);
        assert!(v.contains(&1.75) && v.contains(&-3.5) && v.contains(&4.0));
        let lattice = Lattice::theorem_nonflat(vec![2.0]);
        assert_eq!(lattice.a.len(), 25);
        assert_eq!(Lattice::theorem_flat().maps().len(), 7 * 7 * 15 * 5 * 5);
    }

    #[test]
    fn small_flat_lattice_agrees_with_grid() {
        let lattice = Lattice {
            a: vec![0.0],
            b: vec![0.0],
            c: (1..=7).map(|j| j as f64 * PI / 8.0).collect(),
            m: vec![0.0, 1.0, 2.0],
            n: vec![0.0, 1.0, 2.0],
            l: vec![0.0],
            k: vec![],
        };
        let report = verify_theorem(Family::Flat, &lattice, &GridSpec::new(64, 64).unwrap()).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.cases, 63);
        assert_eq!(report.metrics["proper_biharmonic_hits"], 16.0);
    }

    #[test]
    fn small_nonflat_lattice_has_no_proper_hits() {
        let lattice = Lattice {
            a: vec![-1.0, 0.0, 1.0],
            b: vec![-1.0, 0.0, 1.0],
            c: (1..=15).map(|j| 0.2 * j as f64).collect(),
            m: vec![-1.0, 0.0, 1.0],
            n: vec![-1.0, 0.0, 1.0],
            l: vec![0.0],
            k: vec![2.0],
        };
        let grid = GridSpec::new(64, 32).unwrap();
        let report = verify_theorem(Family::NonFlat, &lattice, &grid).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.metrics["proper_biharmonic_hits"], 0.0);
        assert!(report.metrics["min_nonharmonic_residual"] >= RESIDUAL_FLOOR);
    }

    #[test]
    fn empty_lattice_passes() {
        let report = verify_theorem(Family::Flat, &Lattice::default(), &GridSpec::default()).unwrap();
        assert!(report.passed());
        assert_eq!(report.cases, 0);
    }

    #[test]
    fn sphere_models_give_matching_verdicts() {
        let grid = GridSpec::new(32, 32).unwrap();
        let flat = WarpedSurface::flat_torus();
        let (sine, cosine) = (WarpedSurface::sphere_sine(), WarpedSurface::sphere_cosine());
        for j in 1..8 {
            let c = j as f64 * PI / 8.0;
            for (m, n) in [(1.0, 0.0), (0.0, 2.0), (1.0, -1.0)] {
                let s = lm(0.0, 0.0, c, m, n, 0.3);
                let co = lm(0.0, 0.0, FRAC_PI_2 - c, m, n, 0.3);
                assert_eq!(
                    is_harmonic(&flat, &sine, &s, &grid).unwrap(),
                    is_harmonic(&flat, &cosine, &co, &grid).unwrap()
                );
                assert_eq!(
                    is_biharmonic(&flat, &sine, &s, &grid).unwrap(),
                    is_biharmonic(&flat, &cosine, &co, &grid).unwrap()
                );
            }
        }
    }

    fn coefficient() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), Just(0.5), Just(-1.0), Just(2.0), -3.0..3.0]
    }

    fn angle() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(FRAC_PI_4),
            Just(FRAC_PI_2),
            Just(3.0 * FRAC_PI_4),
            0.01..3.13
        ]
    }

    proptest! {
        #[test]
        fn flat_classification_is_symmetric_under_swap(
            a in coefficient(), b in coefficient(), c in angle(),
            m in coefficient(), n in coefficient(), l in -3.0..3.0f64,
        ) {
            let left = classify_flat(&lm(a, b, c, m, n, l));
            let right = classify_flat(&lm(b, a, c, n, m, l));
            prop_assert_eq!(left.verdict, right.verdict);
            prop_assert_eq!(left.case_tag, right.case_tag);
        }

        #[test]
        fn flat_classification_ignores_l_and_reflection(
            a in coefficient(), b in coefficient(), c in angle(),
            m in coefficient(), n in coefficient(), l in -3.0..3.0f64,
        ) {
            let base = classify_flat(&lm(a, b, c, m, n, 0.0));
            prop_assert_eq!(&base, &classify_flat(&lm(a, b, c, m, n, l)));
            if a == 0.0 && b == 0.0 {
                let reflected = classify_flat(&lm(a, b, PI - c, m, n, l));
                prop_assert_eq!(base.verdict, reflected.verdict);
            }
        }

        #[test]
        fn nonflat_never_returns_proper_biharmonic(
            a in coefficient(), b in coefficient(), c in -3.0..3.0f64,
            m in coefficient(), n in coefficient(), k in 1.01..4.0f64,
        ) {
            let r = classify_nonflat(&lm(a, b, c, m, n, 0.0), k).unwrap();
            prop_assert_ne!(r.verdict, Verdict::ProperBiharmonic);
        }

        #[test]
        fn expansion_identity_holds(
            a in -3.0..3.0f64, c in -3.0..3.0f64, m in -3.0..3.0f64,
            n in -3.0..3.0f64, k in 1.01..4.0f64, r in 0.0..TAU,
        ) {
            let map = lm(a, 0.0, c, m, n, 0.0);
            prop_assume!(map.rho(r, 0.0).cos().abs() > 1e-6);
            prop_assert!(expansion_check(&map, k, r).unwrap() < 1e-8);
        }
    }
}
