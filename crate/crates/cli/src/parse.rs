use std::f64::consts::PI;

/// Reads a real number, accepting `pi`-multiples such as `pi/4`, `3pi/4`,
/// `-pi/2`, `2*pi` and `pi` as exact radian values.
pub fn number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not a finite number: {text:?}"))
        };
    }
    let bad = || format!("not a number or pi multiple: {text:?}");
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (head, denom) = match body.split_once('/') {
        Some((h, d)) => (h, d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let coeff = head.trim().strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff).trim();
    let coeff = if coeff.is_empty() {
        1.0
    } else {
        coeff.parse::<f64>().map_err(|_| bad())?
    };
    if denom == 0.0 || !denom.is_finite() {
        return Err(bad());
    }
    Ok(sign * coeff * PI / denom)
}

/// `NxM` grid sizes.
pub fn grid_size(text: &str) -> Result<(usize, usize), String> {
    let bad = || format!("grid must look like 128x128, got {text:?}");
    let (n, m) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let n = n.trim().parse().map_err(|_| bad())?;
    let m = m.trim().parse().map_err(|_| bad())?;
    Ok((n, m))
}

/// `name=value` assignments for example parameters.
pub fn assignment(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {text:?}"))?;
    Ok((name.trim().to_string(), number(value)?))
}
