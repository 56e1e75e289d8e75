//! Run configuration: defaults, then an optional `key = value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use colombeau_kit::electrodynamics::UnitMode;
use colombeau_kit::mollifier::MOMENT_TOL;
use colombeau_kit::radial::DEFAULT_FIT_TOL;
use colombeau_kit::upsilon::{DEFAULT_ASSOC_TOL, DEFAULT_RATIO_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => bail!("unknown format {s:?}; expected text, json or csv"),
        }
    }
}

pub fn parse_unit_mode(s: &str) -> anyhow::Result<UnitMode> {
    match s {
        "gaussian" => Ok(UnitMode::Gaussian),
        "natural" => Ok(UnitMode::Natural),
        _ => bail!("unknown unit mode {s:?}; expected gaussian or natural"),
    }
}

/// Geometric grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let ratio = (self.stop / self.start).ln() / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start * (ratio * k as f64).exp()).collect()
    }

    pub fn min(&self) -> f64 {
        self.start.min(self.stop)
    }

    pub fn max(&self) -> f64 {
        self.start.max(self.stop)
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else { bail!("grid {s:?} is not start:stop:count") };
        let start: f64 = start.trim().parse().with_context(|| format!("grid start in {s:?}"))?;
        let stop: f64 = stop.trim().parse().with_context(|| format!("grid stop in {s:?}"))?;
        let count: usize = count.trim().parse().with_context(|| format!("grid count in {s:?}"))?;
        if count == 0 {
            bail!("grid {s:?} is empty");
        }
        if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
            bail!("geometric grid {s:?} needs positive finite endpoints");
        }
        Ok(Grid { start, stop, count })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub q: i64,
    pub unit_mode: UnitMode,
    pub eps: f64,
    pub a: f64,
    pub eps_grid: Grid,
    pub a_grid: Grid,
    pub moment_tol: f64,
    pub assoc_tol: f64,
    pub fit_tol: f64,
    pub ratio_max: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 2,
            unit_mode: UnitMode::Gaussian,
            eps: 1e-3,
            a: 1e-1,
            eps_grid: Grid { start: 1e-4, stop: 1e-7, count: 4 },
            a_grid: Grid { start: 1e-1, stop: 1e-3, count: 3 },
            moment_tol: MOMENT_TOL,
            assoc_tol: DEFAULT_ASSOC_TOL,
            fit_tol: DEFAULT_FIT_TOL,
            ratio_max: DEFAULT_RATIO_MAX,
            format: Format::Text,
            output: None,
        }
    }
}

fn positive(key: &str, v: f64) -> anyhow::Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!("{key} must be positive, got {v}")
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let num = |v: &str| -> anyhow::Result<f64> { v.parse::<f64>().with_context(|| format!("{key} = {v:?}")) };
        match key {
            "q" => self.q = value.parse().with_context(|| format!("q = {value:?}"))?,
            "unit_mode" => self.unit_mode = parse_unit_mode(value)?,
            "eps" => self.eps = positive(key, num(value)?)?,
            "a" => self.a = positive(key, num(value)?)?,
            "eps_grid" => self.eps_grid = value.parse()?,
            "a_grid" => self.a_grid = value.parse()?,
            "moment_tol" => self.moment_tol = positive(key, num(value)?)?,
            "assoc_tol" => self.assoc_tol = positive(key, num(value)?)?,
            "fit_tol" => self.fit_tol = positive(key, num(value)?)?,
            "ratio_max" => self.ratio_max = positive(key, num(value)?)?,
            "format" => self.format = value.parse()?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply_text(&mut self, text: &str) -> anyhow::Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else { bail!("line {}: expected key = value", n + 1) };
            self.set(k.trim(), v.trim()).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.eps_grid.max() >= self.a_grid.min() {
            bail!("eps grid max {} must lie below a grid min {}", self.eps_grid.max(), self.a_grid.min());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g: Grid = "1e-1:1e-3:3".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 1e-2).abs() < 1e-15 && (v[2] - 1e-3).abs() < 1e-17);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:2:0".parse::<Grid>().is_err());
        assert!("-1:2:3".parse::<Grid>().is_err());
    }

    #[test]
    fn file_settings() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nq = 4\nunit_mode = natural  # comment\neps_grid = 1e-4:1e-6:3\n").unwrap();
        assert_eq!(c.q, 4);
        assert_eq!(c.unit_mode, UnitMode::Natural);
        assert_eq!(c.eps_grid.count, 3);
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("q").is_err());
    }

    #[test]
    fn grids_must_not_overlap() {
        let mut c = RunConfig::default();
        c.validate().unwrap();
        c.set("eps_grid", "1e-1:1e-2:2").unwrap();
        assert!(c.validate().is_err());
    }
}
