//! Run configuration and the small parsers behind the command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use gegenopt_core::DiffusionOcp;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Polynomial initial condition `f(y) = Σ c_k y^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    /// The text it was parsed from.
    pub source: String,
    pub coeffs: Vec<f64>,
}

impl InitialCondition {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
        Self {
            source: format!("poly:{}", list.join(",")),
            coeffs,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// `∫_0^L f(y)² dy`, exact.
    pub fn square_integral(&self, length: f64) -> f64 {
        let n = self.coeffs.len();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let k = (i + j + 1) as f64;
                total += self.coeffs[i] * self.coeffs[j] * length.powf(k) / k;
            }
        }
        total
    }
}

fn parse_floats(list: &str) -> Result<Vec<f64>, ConfigError> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ConfigError(format!("not a finite number: {s:?}")))
        })
        .collect()
}

impl FromStr for InitialCondition {
    type Err = ConfigError;

    /// `affine:a,b` for `a + b y`, or `poly:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = match s.split_once(':') {
            Some(parts) => parts,
            None => return err(format!("initial condition {s:?}: expected affine:a,b or poly:c0,...")),
        };
        let coeffs = parse_floats(rest)?;
        match kind.trim() {
            "affine" if coeffs.len() == 2 => {}
            "affine" => return err(format!("affine needs exactly two coefficients, got {}", coeffs.len())),
            "poly" if !coeffs.is_empty() => {}
            other => return err(format!("unknown initial condition kind {other:?}")),
        }
        Ok(Self {
            source: s.to_string(),
            coeffs,
        })
    }
}

/// Expands `a:b` or `a:b:step` (inclusive) or a comma list into integers.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, ConfigError> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| ConfigError(format!("not a non-negative integer: {t:?}")))
    };
    if let Some((a, rest)) = s.split_once(':') {
        let (b, step) = match rest.split_once(':') {
            Some((b, step)) => (parse(b)?, parse(step)?),
            None => (parse(rest)?, 1),
        };
        let a = parse(a)?;
        if step == 0 || b < a {
            return err(format!("empty or invalid range {s:?}"));
        }
        return Ok((a..=b).step_by(step).collect());
    }
    s.split(',').map(parse).collect()
}

/// Expands `a:b:step` (inclusive, snapped to 12 decimals) or a comma list.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => parse_floats(s),
        3 => {
            let v = parse_floats(&parts.join(","))?;
            let (a, b, step) = (v[0], v[1], v[2]);
            if !(step > 0.0) || b < a {
                return err(format!("empty or invalid range {s:?}"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => err(format!("range {s:?}: expected a:b:step")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub length: f64,
    pub final_time: f64,
    pub r1: f64,
    pub r2: f64,
    pub initial: InitialCondition,
    pub ny: Vec<usize>,
    /// Empty means `N_t = N_y` for every cell.
    pub nt: Vec<usize>,
    pub alpha: Vec<f64>,
    pub eval_grid: usize,
    pub out: Option<PathBuf>,
    pub dump_matrices: bool,
    /// Accepted for interface stability; every computation is deterministic.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            length: 4.0,
            final_time: 1.0,
            r1: 0.5,
            r2: 0.5,
            initial: InitialCondition {
                source: "affine:1,1".into(),
                coeffs: vec![1.0, 1.0],
            },
            ny: vec![12],
            nt: Vec::new(),
            alpha: vec![-0.2],
            eval_grid: 101,
            out: None,
            dump_matrices: false,
            seed: None,
        }
    }
}

impl RunConfig {
    /// Grid sizes: `N_t` pairs with `N_y` element-wise, is broadcast when it
    /// has one entry, and copies `N_y` when empty.
    pub fn grids(&self) -> Result<Vec<(usize, usize)>, ConfigError> {
        let nt: Vec<usize> = match self.nt.len() {
            0 => self.ny.clone(),
            1 => vec![self.nt[0]; self.ny.len()],
            n if n == self.ny.len() => self.nt.clone(),
            n => return err(format!("{} N_t values cannot pair with {} N_y values", n, self.ny.len())),
        };
        Ok(self.ny.iter().copied().zip(nt).collect())
    }

    /// Every `(N_y, N_t, α)` cell, sorted by grid then `α`.
    pub fn cells(&self) -> Result<Vec<(usize, usize, f64)>, ConfigError> {
        let mut cells: Vec<(usize, usize, f64)> = self
            .grids()?
            .into_iter()
            .flat_map(|(ny, nt)| self.alpha.iter().map(move |&a| (ny, nt, a)))
            .collect();
        cells.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        cells.dedup();
        Ok(cells)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ny.is_empty() || self.alpha.is_empty() {
            return err("N_y and alpha lists must be nonempty");
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > -0.5 && a.is_finite())) {
            return err(format!("alpha must exceed -1/2, got {a}"));
        }
        if self.ny.iter().chain(&self.nt).any(|n| *n == 0) {
            return err("grid sizes must be at least 1");
        }
        if self.eval_grid < 2 {
            return err(format!("eval grid needs at least 2 points, got {}", self.eval_grid));
        }
        self.grids()?;
        self.ocp().map(|_| ())
    }

    pub fn ocp(&self) -> Result<DiffusionOcp, ConfigError> {
        let f = self.initial.clone();
        let integral = f.square_integral(self.length);
        DiffusionOcp::new(self.length, self.final_time, self.r1, self.r2, move |y| f.eval(y))
            .map(|ocp| ocp.with_square_integral(integral))
            .map_err(|e| ConfigError(e.to_string()))
    }
}
