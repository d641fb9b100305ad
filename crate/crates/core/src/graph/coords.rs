use std::fmt::Write as _;

use crate::error::{Error, Result};

/// One `d`-dimensional point per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl CoordinateSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::param(
                "coordinates need at least one point of dimension >= 1",
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::param(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(CoordinateSet { dim, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Parses comma-separated rows. A first row whose first field is not
    /// numeric is treated as a header and skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut first_data = true;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if first_data && points.is_empty() && fields[0].parse::<f64>().is_err() {
                first_data = false;
                continue;
            }
            first_data = false;
            let row = fields
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(i + 1, format!("invalid coordinate `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(prev) = points.first().map(Vec::len) {
                if prev != row.len() {
                    return Err(Error::parse(
                        i + 1,
                        format!("expected {prev} columns, found {}", row.len()),
                    ));
                }
            }
            points.push(row);
        }
        CoordinateSet::new(points)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_row_is_skipped() {
        let c = CoordinateSet::parse_csv("x,y\n0,0\n1,0.5\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.dim(), 2);
        assert_eq!(c.point(1), &[1.0, 0.5]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = CoordinateSet::parse_csv("0,0\n1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn non_finite_rejected() {
        assert!(CoordinateSet::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let c = CoordinateSet::new(vec![vec![0.1, -2.5], vec![3.0, 1e-9]]).unwrap();
        let back = CoordinateSet::parse_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
    }
}
