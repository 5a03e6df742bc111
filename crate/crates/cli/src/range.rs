//! Sweep syntax: `lo:hi:logN`, `lo:hi:linN`, a comma-separated list, or a
//! single value.

use rskcap::capacity::{linear_grid, log_grid};

fn number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| format!("'{t}' is not a number"))
}

/// Expand a sweep specification into its points.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(number).collect(),
        [lo, hi, steps] => {
            let (lo, hi) = (number(lo)?, number(hi)?);
            let steps = steps.trim();
            let (log, count) = if let Some(n) = steps.strip_prefix("log") {
                (true, n)
            } else if let Some(n) = steps.strip_prefix("lin") {
                (false, n)
            } else {
                return Err(format!("'{steps}' should be logN or linN"));
            };
            let n: usize = count
                .parse()
                .map_err(|_| format!("'{count}' is not a point count"))?;
            if n == 0 {
                return Err("a range needs at least one point".into());
            }
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(format!("range bounds must be finite with lo <= hi, got {lo}:{hi}"));
            }
            if n == 1 && lo != hi {
                return Err("a one-point range needs lo = hi".into());
            }
            if log {
                if !(lo > 0.0) {
                    return Err(format!("a log range needs lo > 0, got {lo}"));
                }
                Ok(log_grid(lo, hi, n))
            } else {
                Ok(linear_grid(lo, hi, n))
            }
        }
        _ => Err(format!("'{text}' is neither lo:hi:logN, lo:hi:linN nor a list")),
    }
}

/// As [`parse_range`], rounded to positive integers with repeats removed.
pub fn parse_counts(text: &str) -> Result<Vec<u64>, String> {
    let mut out: Vec<u64> = Vec::new();
    for v in parse_range(text)? {
        let r = v.round();
        if !(r >= 1.0 && r < u64::MAX as f64) {
            return Err(format!("{v} is not a positive count"));
        }
        let r = r as u64;
        if out.last() != Some(&r) {
            out.push(r);
        }
    }
    Ok(out)
}
