//! One-parameter sweeps over map families, with CSV output and
//! golden-section refinement of residual minima.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::MapSpec;
use crate::bitension::max_bitension_norm;
use crate::error::{Error, Result};
use crate::functionals::{bienergy, energy};
use crate::grid::GridSpec;
use crate::tension::max_tension_norm;

pub const CSV_HEADER: &str = "param,max_residual_biharmonic,max_residual_harmonic,energy,bienergy";

/// A closed or open interval of sample positions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub include_lo: bool,
    pub include_hi: bool,
}

impl SweepRange {
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn new(lo: f64, hi: f64, include_lo: bool, include_hi: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid("range bounds must be finite"));
        }
        if !(hi > lo) {
            return Err(Error::invalid(format!("empty range: {lo} .. {hi}")));
        }
        Ok(Self {
            lo,
            hi,
            include_lo,
            include_hi,
        })
    }

    /// `steps` equally spaced samples. Excluded endpoints are replaced by the
    /// points one spacing inside them.
    pub fn samples(&self, steps: usize) -> Result<Vec<f64>> {
        if steps == 0 {
            return Err(Error::invalid("a sweep needs at least one sample"));
        }
        let gaps = steps - 1 + usize::from(!self.include_lo) + usize::from(!self.include_hi);
        if gaps == 0 {
            return Ok(vec![self.lo]);
        }
        let dx = (self.hi - self.lo) / gaps as f64;
        let first = if self.include_lo { 0 } else { 1 };
        Ok((0..steps)
            .map(|i| self.lo + (first + i) as f64 * dx)
            .collect())
    }
}

/// Parses `lo:hi`, `[lo,hi]`, `(lo,hi)` and the half-open mixtures, using
/// `number` for each bound.
pub fn parse_range(text: &str, number: impl Fn(&str) -> Result<f64>) -> Result<SweepRange> {
    let t = text.trim();
    let bad = || Error::invalid(format!("malformed range {text:?}"));
    let (include_lo, include_hi, body) = match (t.chars().next(), t.chars().last()) {
        (Some(open @ ('(' | '[')), Some(close @ (')' | ']'))) if t.len() >= 2 => {
            (open == '[', close == ']', &t[1..t.len() - 1])
        }
        _ => (true, true, t),
    };
    let (lo, hi) = body
        .split_once(',')
        .or_else(|| body.split_once(':'))
        .ok_or_else(bad)?;
    SweepRange::new(number(lo.trim())?, number(hi.trim())?, include_lo, include_hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub max_residual_biharmonic: f64,
    pub max_residual_harmonic: f64,
    pub energy: f64,
    pub bienergy: f64,
}

fn or_nan(value: Result<f64>) -> Result<f64> {
    match value {
        Ok(v) => Ok(v),
        Err(Error::EmptyGrid | Error::PoleOnDomain { .. } | Error::Pole { .. } | Error::Stencil { .. }) => {
            Ok(f64::NAN)
        }
        Err(e) => Err(e),
    }
}

/// Full-grid residual maxima and functionals of one map. Quantities that
/// cannot be evaluated because of poles are NaN.
pub fn evaluate_row(spec: &MapSpec, param: f64, grid: &GridSpec) -> Result<SweepRow> {
    let (d, t, m) = (&spec.domain, &spec.target, &spec.map);
    Ok(SweepRow {
        param,
        max_residual_biharmonic: or_nan(max_bitension_norm(d, t, m, grid, f64::INFINITY))?,
        max_residual_harmonic: or_nan(max_tension_norm(d, t, m, grid, f64::INFINITY))?,
        energy: or_nan(energy(d, t, m, grid))?,
        bienergy: or_nan(bienergy(d, t, m, grid))?,
    })
}

/// Evaluates `build(p)` at each parameter value. Rows come back in input order.
pub fn sweep<F>(build: F, params: &[f64], grid: &GridSpec) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<MapSpec> + Sync,
{
    grid.validate()?;
    params
        .par_iter()
        .map(|&p| evaluate_row(&build(p)?, p, grid))
        .collect()
}

fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:e}")
    }
}

/// CSV with [`CSV_HEADER`] and `\n` line endings.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            row.param,
            row.max_residual_biharmonic,
            row.max_residual_harmonic,
            row.energy,
            row.bienergy,
        ];
        out.push_str(&fields.map(csv_number).join(","));
        out.push('\n');
    }
    out
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))` once the bracket is narrower than `tol`.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// A refined local minimum of the biharmonic residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub param: f64,
    pub max_residual_biharmonic: f64,
    pub max_residual_harmonic: f64,
}

/// Interior local minima of the biharmonic column, each refined by golden
/// section over the bracket formed by its neighbours.
pub fn refine_minima<F>(build: F, rows: &[SweepRow], grid: &GridSpec, tol: f64) -> Result<Vec<Minimum>>
where
    F: Fn(f64) -> Result<MapSpec> + Sync,
{
    let residual = |p: f64| -> Result<f64> {
        let spec = build(p)?;
        let v = or_nan(max_bitension_norm(&spec.domain, &spec.target, &spec.map, grid, f64::INFINITY))?;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };
    let brackets: Vec<(f64, f64)> = rows
        .windows(3)
        .filter(|w| {
            let mid = w[1].max_residual_biharmonic;
            mid <= w[0].max_residual_biharmonic && mid <= w[2].max_residual_biharmonic
        })
        .map(|w| (w[0].param, w[2].param))
        .collect();
    brackets
        .par_iter()
        .map(|&(lo, hi)| {
            let (param, max_residual_biharmonic) = golden_section_min(residual, lo, hi, tol)?;
            let spec = build(param)?;
            let harmonic = or_nan(max_tension_norm(
                &spec.domain,
                &spec.target,
                &spec.map,
                grid,
                f64::INFINITY,
            ))?;
            Ok(Minimum {
                param,
                max_residual_biharmonic,
                max_residual_harmonic: harmonic,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::example_map;
    use std::collections::BTreeMap;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

    fn plain(s: &str) -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::invalid(s))
    }

    #[test]
    fn range_syntax() {
        let r = parse_range("0.01:1.55", plain).unwrap();
        assert_eq!((r.lo, r.hi, r.include_lo, r.include_hi), (0.01, 1.55, true, true));
        let r = parse_range("(0, 3)", plain).unwrap();
        assert!(!r.include_lo && !r.include_hi);
        let r = parse_range("[0,3)", plain).unwrap();
        assert!(r.include_lo && !r.include_hi);
        assert!(parse_range("2:1", plain).is_err());
        assert!(parse_range("1:1", plain).is_err());
        assert!(parse_range("1;2", plain).is_err());
        assert!(parse_range("(1,x)", plain).is_err());
    }

    #[test]
    fn samples_cover_the_range() {
        let r = SweepRange::closed(0.01, 1.55).unwrap();
        let s = r.samples(155).unwrap();
        assert_eq!(s.len(), 155);
        assert!((s[1] - s[0] - 0.01).abs() < 1e-15);
        assert!((s[154] - 1.55).abs() < 1e-14);
        let open = SweepRange::new(0.0, PI, false, false).unwrap().samples(3).unwrap();
        assert!((open[1] - PI / 2.0).abs() < 1e-15 && open[0] > 0.0 && open[2] < PI);
        assert!(r.samples(0).is_err());
    }

    #[test]
    fn golden_section_finds_kinks() {
        let (x, fx) = golden_section_min(|x: f64| Ok((x - 0.3).abs()), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-11 && fx < 1e-11);
    }

    fn family(s: f64) -> Result<MapSpec> {
        let mut p = BTreeMap::new();
        p.insert("s".to_string(), s);
        example_map(2, &p)
    }

    #[test]
    fn csv_rows_are_stable() {
        let grid = GridSpec::new(16, 16).unwrap();
        let rows = sweep(family, &[0.2, FRAC_PI_8], &grid).unwrap();
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv, rows_to_csv(&sweep(family, &[0.2, FRAC_PI_8], &grid).unwrap()));
        assert!(rows[1].max_residual_biharmonic < 1e-12);
        assert!((rows[1].max_residual_harmonic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poles_become_nan() {
        let grid = GridSpec::new(16, 16).unwrap();
        let row = evaluate_row(&family(0.0).unwrap(), 0.0, &grid).unwrap();
        assert!(row.max_residual_biharmonic.is_nan() && row.energy.is_nan());
        assert!(rows_to_csv(&[row]).contains("NaN"));
    }

    #[test]
    fn eigenmap_family_minima() {
        let grid = GridSpec::new(16, 16).unwrap();
        let params = SweepRange::closed(0.01, 1.55).unwrap().samples(155).unwrap();
        let rows = sweep(family, &params, &grid).unwrap();
        let minima = refine_minima(family, &rows, &grid, 1e-12).unwrap();
        let zeros: Vec<&Minimum> = minima.iter().filter(|m| m.max_residual_biharmonic < 1e-8).collect();
        assert_eq!(zeros.len(), 3);
        for (m, expected) in zeros.iter().zip([FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8]) {
            assert!((m.param - expected).abs() < 1e-6, "{m:?}");
        }
        assert!(zeros[1].max_residual_harmonic < 1e-9);
        assert!(zeros[0].max_residual_harmonic > 0.5 && zeros[2].max_residual_harmonic > 0.5);
    }
}
