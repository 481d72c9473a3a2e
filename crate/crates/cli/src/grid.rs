//! Grid specifications: `start:step:stop` ranges or comma-separated lists.

/// Number of decimal places written in a plain decimal literal, `None` for exponent notation.
fn decimals(s: &str) -> Option<u32> {
    if s.contains(['e', 'E']) {
        return None;
    }
    Some(s.split_once('.').map_or(0, |(_, frac)| frac.len() as u32))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// Parses `start:step:stop` (inclusive) or `a,b,c`.
///
/// Ranges written with plain decimals are generated on an integer lattice
/// scaled by the largest number of decimals, so `0.001:0.001:0.999` yields
/// exactly the doubles nearest `i / 1000`.
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("grid is empty".into());
    }
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [single] => single
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_f64)
            .collect::<Result<Vec<_>, _>>()
            .and_then(|v| {
                if v.is_empty() {
                    Err("grid is empty".into())
                } else {
                    Ok(v)
                }
            }),
        [start, step, stop] => {
            let (a, h, b) = (parse_f64(start)?, parse_f64(step)?, parse_f64(stop)?);
            if h <= 0.0 {
                return Err(format!("grid step {h} must be positive"));
            }
            if b < a {
                return Err(format!("grid stop {b} is below start {a}"));
            }
            let count = ((b - a) / h + 1e-9).floor() as u64 + 1;
            if count > 50_000_000 {
                return Err(format!("grid has {count} points; refusing to allocate"));
            }
            let places = [start, step]
                .iter()
                .map(|s| decimals(s))
                .collect::<Option<Vec<_>>>();
            Ok(match places.map(|d| d.into_iter().max().unwrap_or(0)) {
                Some(d) if d <= 15 => {
                    let scale = 10f64.powi(d as i32);
                    let (ia, ih) = ((a * scale).round(), (h * scale).round());
                    (0..count).map(|i| (ia + i as f64 * ih) / scale).collect()
                }
                _ => (0..count).map(|i| a + i as f64 * h).collect(),
            })
        }
        _ => Err(format!(
            "cannot parse grid '{spec}'; use start:step:stop or a,b,c"
        )),
    }
}

/// Integer grid in the same syntax.
pub fn parse_int_grid(spec: &str) -> Result<Vec<u64>, String> {
    parse_real_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 {
                Ok(v as u64)
            } else {
                Err(format!("grid value {v} is not a non-negative integer"))
            }
        })
        .collect()
}
