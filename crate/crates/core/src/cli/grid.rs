//! Sweep descriptors: `start:stop:count` axes and `name=axis,…` lists.

use std::fmt;
use std::str::FromStr;

/// Inclusive linspace `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn single(v: f64) -> Self {
        Self {
            start: v,
            stop: v,
            count: 1,
        }
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.start.min(self.stop)
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |t: &str| -> Result<f64, String> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{t}' is not a finite number"))
        };
        let count: usize = n.trim().parse().map_err(|_| format!("count '{n}' is not a positive integer"))?;
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        Ok(Self {
            start: num(a)?,
            stop: num(b)?,
            count,
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Parses `name=start:stop:count[,name=…]`, accepting only `names`.
pub fn parse_sweep(s: &str, names: &[&str]) -> Result<Vec<(String, Axis)>, String> {
    let mut out: Vec<(String, Axis)> = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (name, axis) = item
            .split_once('=')
            .ok_or_else(|| format!("expected name=start:stop:count, got '{item}'"))?;
        let name = name.trim().replace('-', "_");
        if !names.contains(&name.as_str()) {
            return Err(format!("unknown axis '{name}' (expected one of {})", names.join(", ")));
        }
        if out.iter().any(|(n, _)| *n == name) {
            return Err(format!("axis '{name}' given twice"));
        }
        out.push((name, axis.parse()?));
    }
    if out.is_empty() {
        return Err("empty sweep".into());
    }
    Ok(out)
}

/// Start:stop pair for energy windows.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("'{a}' is not a number"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("'{b}' is not a number"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need finite lo < hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_is_inclusive() {
        let a: Axis = "0:1:5".parse().unwrap();
        assert_eq!(a.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let a: Axis = "0.1:0.7:7".parse().unwrap();
        assert_eq!(*a.values().last().unwrap(), 0.7);
        assert_eq!("2:3:1".parse::<Axis>().unwrap().values(), vec![2.0]);
    }

    #[test]
    fn bad_axes() {
        for s in ["0:1", "0:1:0", "a:1:2", "0:inf:3", "0:1:-2"] {
            assert!(s.parse::<Axis>().is_err(), "{s}");
        }
    }

    #[test]
    fn sweep_lists() {
        let v = parse_sweep("rate=0:1:3,beta=1:2:2", &["rate", "beta"]).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].0, "beta");
        assert!(parse_sweep("gamma=0:1:2", &["rate"]).is_err());
        assert!(parse_sweep("rate=0:1:2,rate=0:1:2", &["rate"]).is_err());
        let v = parse_sweep("rate-x=0:1:2", &["rate_x"]).unwrap();
        assert_eq!(v[0].0, "rate_x");
    }
}
