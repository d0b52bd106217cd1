use std::path::Path;
use std::str::FromStr;

use anyhow::Result;
use balkit::quadrature;

/// Logarithmic grid given on the command line as `lo:hi:count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn nodes(&self) -> Result<Vec<f64>> {
        Ok(quadrature::log_nodes(self.lo, self.hi, self.count)?)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("'{count}' is not a node count"))?;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(format!("need 0 < lo < hi, got {lo} and {hi}"));
        }
        if count < 2 {
            return Err(format!("need at least 2 nodes, got {count}"));
        }
        Ok(Grid { lo, hi, count })
    }
}

/// Comma-separated list such as `100,400,1600`.
pub fn list<T: FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("bad list entry '{x}'")))
        .collect()
}

/// Short label for a file: its stem.
pub fn label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| balkit::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses() {
        let g: Grid = "1e-3:1e3:40".parse().unwrap();
        assert_eq!(g, Grid { lo: 1e-3, hi: 1e3, count: 40 });
        assert!("1:2".parse::<Grid>().is_err());
        assert!("2:1:10".parse::<Grid>().is_err());
        assert!("0:1:10".parse::<Grid>().is_err());
        assert!("1:2:1".parse::<Grid>().is_err());
    }

    #[test]
    fn lists_parse() {
        assert_eq!(list::<usize>("100, 400,1600").unwrap(), vec![100, 400, 1600]);
        assert!(list::<usize>("1,x").is_err());
    }
}
