//! Empirical flow-size distributions.

use std::path::Path;

use rand::Rng;

use crate::error::ParseError;

/// Step CDF over flow sizes in packets.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeCdf {
    points: Vec<(u64, f64)>,
}

impl SizeCdf {
    /// Points must have strictly increasing sizes ≥ 1, non-decreasing
    /// probabilities in `[0, 1]`, and end at probability 1.
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self, String> {
        if points.is_empty() {
            return Err("distribution has no points".into());
        }
        let mut prev: Option<(u64, f64)> = None;
        for &(size, p) in &points {
            if size == 0 {
                return Err("sizes must be at least 1 packet".into());
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("probability {p} outside [0, 1]"));
            }
            if let Some((ps, pp)) = prev {
                if size <= ps {
                    return Err(format!("size {size} does not increase after {ps}"));
                }
                if p < pp {
                    return Err(format!("probability {p} decreases after {pp}"));
                }
            }
            prev = Some((size, p));
        }
        let last = points[points.len() - 1].1;
        if (last - 1.0).abs() > 1e-9 {
            return Err(format!("last probability is {last}, expected 1"));
        }
        Ok(SizeCdf { points })
    }

    /// A small web-search-like distribution: most flows are a few packets,
    /// most bytes are in flows of hundreds to thousands of packets.
    pub fn synthetic_default() -> Self {
        SizeCdf::new(vec![
            (1, 0.15),
            (2, 0.2),
            (3, 0.3),
            (7, 0.4),
            (27, 0.53),
            (67, 0.6),
            (133, 0.7),
            (267, 0.8),
            (667, 0.9),
            (2000, 0.97),
            (6667, 1.0),
        ])
        .expect("built-in distribution is valid")
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        let mut m = 0.0;
        for &(s, p) in &self.points {
            m += s as f64 * (p - prev);
            prev = p;
        }
        m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.points
            .iter()
            .find(|&&(_, p)| u < p)
            .map_or(self.points[self.points.len() - 1].0, |&(s, _)| s)
    }
}

/// Parse a two-column text CDF: `size probability` per line, separated by
/// whitespace or a comma. Blank lines and `#` comments are ignored.
pub fn parse_cdf(text: &str) -> Result<SizeCdf, ParseError> {
    let mut points = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        last_line = line_no;
        let err = |message: String| ParseError::Line {
            line: line_no,
            message,
        };
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 2 {
            return Err(err(format!("expected 2 columns, found {}", cols.len())));
        }
        let size: u64 = cols[0]
            .parse()
            .map_err(|e| err(format!("size {:?}: {e}", cols[0])))?;
        let p: f64 = cols[1]
            .parse()
            .map_err(|e| err(format!("probability {:?}: {e}", cols[1])))?;
        if !p.is_finite() {
            return Err(err(format!("probability {p} is not finite")));
        }
        points.push((size, p));
    }
    SizeCdf::new(points).map_err(|message| ParseError::Line {
        line: last_line,
        message,
    })
}

pub fn load_cdf(path: &Path) -> Result<SizeCdf, ParseError> {
    parse_cdf(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_both_separators() {
        let cdf = parse_cdf("# size p\n1 0.5\n\n10,1.0\n").unwrap();
        assert_eq!(cdf.points(), &[(1, 0.5), (10, 1.0)]);
        assert_eq!(cdf.mean(), 5.5);
    }

    #[test]
    fn reports_offending_line() {
        match parse_cdf("1 0.5\n2 x\n") {
            Err(ParseError::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_cdf("5 0.5\n3 1.0\n").is_err());
        assert!(parse_cdf("1 0.5\n").is_err());
        assert!(parse_cdf("").is_err());
    }

    #[test]
    fn samples_stay_in_support() {
        let cdf = SizeCdf::synthetic_default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = cdf.sample(&mut rng);
            assert!(cdf.points().iter().any(|&(x, _)| x == s));
        }
    }
}
