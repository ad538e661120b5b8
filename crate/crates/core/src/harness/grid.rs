use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Strictly increasing, non-empty list of sweep values.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    values: Vec<f64>,
}

impl Grid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::argument("grid must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("grid values must be finite"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::argument("grid must be strictly increasing"));
        }
        Ok(Self { values })
    }

    /// `points` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        match points {
            0 => Err(Error::argument("grid needs at least one point")),
            1 => Self::new(vec![start]),
            _ => {
                let last = (points - 1) as f64;
                Self::new(
                    (0..points)
                        .map(|i| {
                            if i + 1 == points {
                                stop
                            } else {
                                start + (stop - start) * (i as f64 / last)
                            }
                        })
                        .collect(),
                )
            }
        }
    }

    /// θ ∈ [0, π/2], 65 points.
    pub fn default_theta() -> Self {
        Self::linspace(0.0, PI / 2.0, 65).expect("valid default grid")
    }

    /// ε ∈ [0, π], 33 points.
    pub fn default_epsilon() -> Self {
        Self::linspace(0.0, PI, 33).expect("valid default grid")
    }

    /// p ∈ [0, 1], 21 points.
    pub fn default_probability() -> Self {
        Self::linspace(0.0, 1.0, 21).expect("valid default grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parses a real number, also accepting multiples and fractions of pi
/// such as `pi`, `pi/2`, `3pi/4`, `2*pi` or `0.5pi`.
pub fn parse_real(text: &str) -> Result<f64> {
    let s = text.trim().to_ascii_lowercase();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let bad = || Error::argument(format!("cannot parse '{text}' as a number"));
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let coef = num
        .strip_suffix("pi")
        .ok_or_else(bad)?
        .trim()
        .trim_end_matches('*')
        .trim();
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coef * PI / den)
}

impl FromStr for Grid {
    type Err = Error;

    /// `start:stop:points`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Self::new(vec![parse_real(v)?]),
            [a, b, n] => {
                let points = n
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::argument(format!("bad point count in grid '{s}'")))?;
                Self::linspace(parse_real(a)?, parse_real(b)?, points)
            }
            _ => Err(Error::argument(format!(
                "grid '{s}' is not start:stop:points"
            ))),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let first = self.values[0];
        let last = self.values[self.values.len() - 1];
        write!(f, "{first}:{last}:{}", self.values.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn default_grids_hit_the_landmarks() {
        assert_eq!(Grid::default_theta().values()[32], FRAC_PI_4);
        assert_eq!(Grid::default_probability().values()[10], 0.5);
        assert_eq!(Grid::default_epsilon().values()[32], PI);
    }

    #[test]
    fn parses_pi_expressions() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_real("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_real("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert!(parse_real("tau").is_err());
    }

    #[test]
    fn parses_grids() {
        let g: Grid = "0:pi/2:65".parse().unwrap();
        assert_eq!(g, Grid::default_theta());
        let g: Grid = "2".parse().unwrap();
        assert_eq!(g.values(), &[2.0]);
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
    }
}
