//! Grids of exact rationals: `start:stop:count` or a comma-separated list.

use aon_core::numeric::{parse_rational, rational_to_f64};
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::config::ConfigError;

pub const MAX_GRID_POINTS: usize = 10_000;

fn err(message: String) -> ConfigError {
    ConfigError { line: None, message }
}

fn value(s: &str) -> Result<BigRational, ConfigError> {
    parse_rational(s).map_err(|e| err(e.to_string()))
}

/// Parses `"0:1:21"` (21 evenly spaced points, both ends included) or
/// `"0, 1/4, 0.5"`.
pub fn parse_rational_grid(text: &str) -> Result<Vec<BigRational>, ConfigError> {
    let t = text.trim();
    if t.is_empty() {
        return Err(err("empty grid".into()));
    }
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(err(format!("range grid must be start:stop:count, got {t:?}")));
        };
        let (start, stop) = (value(a)?, value(b)?);
        let count: usize = c
            .trim()
            .parse()
            .map_err(|_| err(format!("grid count is not an integer: {c:?}")))?;
        if count == 0 || count > MAX_GRID_POINTS {
            return Err(err(format!("grid count must be between 1 and {MAX_GRID_POINTS}, got {count}")));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (&stop - &start) / BigRational::from_integer((count - 1).into());
        return Ok((0..count)
            .map(|i| &start + &step * BigRational::from_integer(i.into()))
            .collect());
    }
    let points: Vec<BigRational> = t.split(',').map(value).collect::<Result<_, _>>()?;
    if points.len() > MAX_GRID_POINTS {
        return Err(err(format!("grid has more than {MAX_GRID_POINTS} points")));
    }
    Ok(points)
}

/// Rational grid restricted to `[0, 1]`.
pub fn parse_unit_grid(text: &str) -> Result<Vec<BigRational>, ConfigError> {
    let g = parse_rational_grid(text)?;
    if let Some(x) = g.iter().find(|x| x.is_negative() || **x > BigRational::one()) {
        return Err(err(format!("grid point {x} lies outside [0, 1]")));
    }
    Ok(g)
}

/// Probability grid, as floats rounded from exact rationals.
pub fn parse_p_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    Ok(parse_unit_grid(text)?.iter().map(rational_to_f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use aon_core::numeric::format_rational;

    #[test]
    fn ranges_and_lists() {
        let g = parse_rational_grid("0:1:5").unwrap();
        let s: Vec<String> = g.iter().map(format_rational).collect();
        assert_eq!(s, ["0/1", "1/4", "1/2", "3/4", "1/1"]);
        let g = parse_rational_grid(" 0.1, 2/3 ,1").unwrap();
        assert_eq!(format_rational(&g[1]), "2/3");
        assert_eq!(parse_rational_grid("1/3:1/3:1").unwrap().len(), 1);
        let p = parse_p_grid("0:1:21").unwrap();
        assert_eq!((p[0], p[10], p[20]), (0.0, 0.5, 1.0));
        assert_eq!(p[3], 0.15);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in ["", "0:1", "0:1:0", "0:1:x", "a,b", "0:1:100000", "1/0", ",", "0:1:2:3"] {
            assert!(parse_rational_grid(bad).is_err(), "{bad}");
        }
        assert!(parse_p_grid("0,1.5").is_err());
        assert!(parse_unit_grid("-1/2").is_err());
    }
}
