//! Barycentric Lagrange interpolation on shifted Gegenbauer–Gauss nodes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::nodes::QuadratureRule;
use crate::polycore::DOMAIN_TOLERANCE;

/// Relative distance (in units of the interval length) under which an
/// evaluation point is treated as coinciding with a node.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-14;

/// Values of every Lagrange basis polynomial of `rule` at `x`, in barycentric
/// form. `x` is assumed to lie in `[0, l]`.
pub fn basis_at(rule: &QuadratureRule, x: f64) -> Vec<f64> {
    let tol = COINCIDENCE_TOLERANCE * rule.length();
    let mut out = vec![0.0; rule.len()];
    if let Some(i) = rule.nodes.iter().position(|&xi| (x - xi).abs() <= tol) {
        out[i] = 1.0;
        return out;
    }
    let mut denom = 0.0;
    for ((o, &xi), &w) in out.iter_mut().zip(&rule.nodes).zip(&rule.bary_weights) {
        *o = w / (x - xi);
        denom += *o;
    }
    out.iter_mut().for_each(|o| *o /= denom);
    out
}

fn check_domain(x: f64, l: f64) -> Result<f64> {
    let slack = DOMAIN_TOLERANCE * l;
    if !x.is_finite() || x < -slack || x > l + slack {
        return Err(Error::Domain {
            value: x,
            lo: 0.0,
            hi: l,
        });
    }
    Ok(x.clamp(0.0, l))
}

/// Univariate interpolant through samples at the nodes of a rule.
#[derive(Debug, Clone)]
pub struct Interpolant1D<'a> {
    rule: &'a QuadratureRule,
    values: Vec<f64>,
}

impl<'a> Interpolant1D<'a> {
    pub fn new(rule: &'a QuadratureRule, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Dimension {
                context: "1-D interpolant samples",
                expected: rule.len(),
                found: values.len(),
            });
        }
        Ok(Self { rule, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let x = check_domain(x, self.rule.length())?;
        let tol = COINCIDENCE_TOLERANCE * self.rule.length();
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xi, &w), &v) in self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.bary_weights)
            .zip(&self.values)
        {
            let d = x - xi;
            if d.abs() <= tol {
                return Ok(v);
            }
            let t = w / d;
            num += t * v;
            den += t;
        }
        Ok(num / den)
    }
}

/// Tensor-product interpolant; `values[(i, j)]` is the sample at `(y_i, t_j)`.
#[derive(Debug, Clone)]
pub struct Interpolant2D<'a> {
    rule_y: &'a QuadratureRule,
    rule_t: &'a QuadratureRule,
    values: DMatrix<f64>,
}

impl<'a> Interpolant2D<'a> {
    pub fn new(
        rule_y: &'a QuadratureRule,
        rule_t: &'a QuadratureRule,
        values: DMatrix<f64>,
    ) -> Result<Self> {
        if values.nrows() != rule_y.len() {
            return Err(Error::Dimension {
                context: "2-D interpolant rows",
                expected: rule_y.len(),
                found: values.nrows(),
            });
        }
        if values.ncols() != rule_t.len() {
            return Err(Error::Dimension {
                context: "2-D interpolant columns",
                expected: rule_t.len(),
                found: values.ncols(),
            });
        }
        Ok(Self {
            rule_y,
            rule_t,
            values,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn eval(&self, y: f64, t: f64) -> Result<f64> {
        let y = check_domain(y, self.rule_y.length())?;
        let t = check_domain(t, self.rule_t.length())?;
        let by = basis_at(self.rule_y, y);
        let bt = basis_at(self.rule_t, t);
        let mut acc = 0.0;
        for (i, wy) in by.iter().enumerate() {
            if *wy == 0.0 {
                continue;
            }
            let row: f64 = bt
                .iter()
                .enumerate()
                .map(|(j, wt)| wt * self.values[(i, j)])
                .sum();
            acc += wy * row;
        }
        Ok(acc)
    }
}
