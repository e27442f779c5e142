//! Flag-value parsers: complex numbers as `a+bi` strings and grids as
//! `name=start:stop:step`.

use num_complex::Complex64;

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i` style complex literals.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if !t.ends_with('i') && !t.ends_with('I') {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|e| format!("bad real literal {s:?}: {e}"));
    }
    let body = &t[..t.len() - 1];
    // Split at the last +/− that is not an exponent sign and not leading.
    let mut split_at = None;
    for (i, c) in body.char_indices().skip(1) {
        if (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E') {
            split_at = Some(i);
        }
    }
    match split_at {
        Some(i) => {
            let re: f64 = body[..i]
                .parse()
                .map_err(|e| format!("bad real part in {s:?}: {e}"))?;
            let im_str = &body[i..];
            let im: f64 = match im_str {
                "+" => 1.0,
                "-" => -1.0,
                _ => im_str
                    .parse()
                    .map_err(|e| format!("bad imaginary part in {s:?}: {e}"))?,
            };
            Ok(Complex64::new(re, im))
        }
        None => {
            let im: f64 = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => body
                    .parse()
                    .map_err(|e| format!("bad imaginary literal {s:?}: {e}"))?,
            };
            Ok(Complex64::new(0.0, im))
        }
    }
}

/// A named arithmetic grid `name=start:stop:step` (stop inclusive up to
/// rounding slack).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let v = self.start + self.step * k as f64;
            if v > self.stop + 1e-12 * self.step.abs().max(1.0) {
                break;
            }
            out.push(v);
            k += 1;
            if k > 10_000_000 {
                break;
            }
        }
        out
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let (name, rest) = s
        .split_once('=')
        .ok_or_else(|| format!("grid {s:?} must look like name=start:stop:step"))?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid {s:?} must have start:stop:step"));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    let nums = nums.map_err(|e| format!("bad grid bound in {s:?}: {e}"))?;
    if nums[2] <= 0.0 {
        return Err(format!("grid step must be positive in {s:?}"));
    }
    if nums[1] < nums[0] {
        return Err(format!("grid stop must be ≥ start in {s:?}"));
    }
    Ok(Grid {
        name: name.trim().to_string(),
        start: nums[0],
        stop: nums[1],
        step: nums[2],
    })
}

/// Strictly increasing list of matrix sizes (newtype so clap treats the
/// comma-separated flag value as one argument).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

/// Comma-separated strictly increasing list of sizes, e.g. `50,100,200`.
pub fn parse_n_list(s: &str) -> Result<SizeList, String> {
    let out: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let out = out.map_err(|e| format!("bad N list {s:?}: {e}"))?;
    if out.is_empty() || !out.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("N list {s:?} must be strictly increasing"));
    }
    Ok(SizeList(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(parse_complex("0.3+0.4i").unwrap(), Complex64::new(0.3, 0.4));
        assert_eq!(parse_complex("0.3-0.4i").unwrap(), Complex64::new(0.3, -0.4));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-2+3e1i").unwrap(), Complex64::new(0.01, 30.0));
        assert!(parse_complex("nonsense+i").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("r=0:1:0.25").unwrap();
        assert_eq!(g.name, "r");
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("r=0:1:-1").is_err());
        assert!(parse_grid("r=0:1").is_err());
        assert!(parse_grid("0:1:0.5").is_err());
    }

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("50,100,200").unwrap(), SizeList(vec![50, 100, 200]));
        assert!(parse_n_list("100,50").is_err());
        assert!(parse_n_list("").is_err());
    }
}
