//! Parsing of `a:b`, `a:b:step` and comma-list arguments.

use std::str::FromStr;

use pcgraph::{Error, Result};

fn parse_one<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("cannot parse '{s}'")))
}

/// Inclusive integer range or list.
pub fn usize_list(spec: &str) -> Result<Vec<usize>> {
    if spec.contains(':') {
        let parts: Vec<usize> = spec.split(':').map(parse_one).collect::<Result<_>>()?;
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (*lo, *hi, 1),
            [lo, hi, step] => (*lo, *hi, *step),
            _ => return Err(Error::config(format!("bad range '{spec}'"))),
        };
        if step == 0 || lo > hi {
            return Err(Error::config(format!("bad range '{spec}'")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    spec.split(',').map(parse_one).collect()
}

/// Inclusive real range `a:b:step` or comma list.
pub fn f64_list(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<f64> = spec.split(':').map(parse_one).collect::<Result<_>>()?;
        let [lo, hi, step] = parts.as_slice() else {
            return Err(Error::config(format!("real ranges need a step: '{spec}'")));
        };
        if !(*step > 0.0) || lo > hi {
            return Err(Error::config(format!("bad range '{spec}'")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| lo + i as f64 * step).collect());
    }
    spec.split(',').map(parse_one).collect()
}
