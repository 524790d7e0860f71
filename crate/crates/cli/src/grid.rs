use std::str::FromStr;

use crate::error::{input, CliError};

/// A list of values given either as `start:stop:step` (both ends included)
/// or as comma-separated numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| input(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(input(format!("not finite: {s:?}")))
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => {
                let (a, b, h) = (number(start)?, number(stop)?, number(step)?);
                if h <= 0.0 || b < a {
                    return Err(input(format!("range {s:?} needs start <= stop and step > 0")));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                if n > 10_000_000 {
                    return Err(input(format!("range {s:?} has too many points")));
                }
                Ok(Grid((0..=n).map(|k| (a + k as f64 * h).min(b)).collect()))
            }
            [_] => {
                let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
                if v.is_empty() {
                    return Err(input("empty grid"));
                }
                Ok(Grid(v))
            }
            _ => Err(input(format!("grid {s:?} is neither start:stop:step nor a list"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_both_ends() {
        let g: Grid = "0:1:0.25".parse().unwrap();
        assert_eq!(g.0, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g: Grid = "0:0.3:0.1".parse().unwrap();
        assert_eq!(g.0.len(), 4);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!("0.1, 0.2".parse::<Grid>().unwrap().0, vec![0.1, 0.2]);
        assert!("1:0:0.1".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("a,b".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
    }
}
