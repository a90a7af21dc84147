//! Run configuration shared by the subcommands.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Radius grid `start:stop:count`, log-spaced when `log` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl RGrid {
    pub fn points(&self) -> Vec<f64> {
        kacrice_core::kacrice::grid(self.start, self.stop, self.count, self.log)
    }
}

impl FromStr for RGrid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected start:stop:count, got {s:?}");
        let [a, b, c] = parts.as_slice() else { return Err(bad()) };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let stop: f64 = b.trim().parse().map_err(|_| bad())?;
        let count: usize = parse_count(c).map_err(|_| bad())? as usize;
        if !(start > 0.0 && stop >= start && count >= 1) || (count > 1 && stop == start) {
            return Err(format!("need 0 < start < stop and count >= 1, got {s:?}"));
        }
        Ok(RGrid { start, stop, count, log: false })
    }
}

impl fmt::Display for RGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// Counts written as integers or in float notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("not a count: {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: String,
    pub r_grid: Option<RGrid>,
    pub samples: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        let g: RGrid = "0.01:0.5:20".parse().unwrap();
        assert_eq!((g.start, g.stop, g.count, g.log), (0.01, 0.5, 20, false));
        assert_eq!(g.to_string(), "0.01:0.5:20");
        assert!("0.5:0.1:3".parse::<RGrid>().is_err());
        assert!("1:2".parse::<RGrid>().is_err());
        assert_eq!("0.1:0.1:1".parse::<RGrid>().unwrap().points(), vec![0.1]);
    }

    #[test]
    fn counts_accept_float_notation() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("250").unwrap(), 250);
        assert!(parse_count("1.5").is_err());
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig {
            model: "mix:0.5".into(),
            r_grid: Some(RGrid { start: 0.05, stop: 0.4, count: 8, log: true }),
            samples: 1_000_000,
            seed: 7,
            out: Some("k2.csv".into()),
            format: Format::Json,
            threads: Some(3),
        };
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
