//! Barycentric integration matrices on shifted Gegenbauer–Gauss nodes.
//!
//! Row `i` of the first-order matrix holds `∫_0^{x_i} L_j(x) dx` for every
//! Lagrange basis polynomial `L_j`. Each `L_j` has degree `n`, so a
//! Gauss–Legendre sub-rule with `⌈(n+1)/2⌉ + 1` points on `[0, x_i]`
//! integrates it to round-off. Higher orders follow from Cauchy's formula for
//! repeated integration:
//!
//! ```text
//! P^{(q)}_{ij} = P^{(1)}_{ij} (x_i − x_j)^{q−1} / (q−1)!
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interp::basis_at;
use crate::nodes::{sgg_rule, QuadratureRule};
use crate::polycore::BasisSpec;
use crate::special::ln_factorial;

/// q-th order integration matrix of a rule on `[0, l]`.
#[derive(Debug, Clone)]
pub struct IntegrationOperator {
    pub rule: QuadratureRule,
    pub order: usize,
    pub matrix: DMatrix<f64>,
    /// `∫_0^l L_j`, kept for first-order operators only.
    pub full_interval_row: Option<Vec<f64>>,
}

impl IntegrationOperator {
    pub fn size(&self) -> usize {
        self.rule.len()
    }

    /// Approximates the `order`-fold integral from 0 to every node.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.size() {
            return Err(Error::Dimension {
                context: "integration operator samples",
                expected: self.size(),
                found: samples.len(),
            });
        }
        let v = &self.matrix * DVector::from_column_slice(samples);
        Ok(v.iter().copied().collect())
    }

    /// Approximates `∫_0^l` of the sampled function.
    pub fn integrate_full(&self, samples: &[f64]) -> Option<f64> {
        let row = self.full_interval_row.as_ref()?;
        (row.len() == samples.len()).then(|| row.iter().zip(samples).map(|(w, s)| w * s).sum())
    }

    /// `(x_i − x_j)^{q−1} / (q−1)!` scaled copy of this first-order operator.
    pub fn higher_order(&self, q: usize) -> Result<IntegrationOperator> {
        higher_order_matrix(self, q)
    }
}

/// Gauss–Legendre points/weights on `[−1, 1]` with `m` points.
fn legendre_subrule(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let gl = sgg_rule(BasisSpec::standard(0.5, m - 1)?)?;
    Ok((gl.nodes.iter().map(|x| x - 1.0).collect(), gl.christoffel))
}

fn subrule_size(rule: &QuadratureRule) -> usize {
    rule.len().div_ceil(2) + 1
}

/// `∫_0^b L_j(x) dx` for every `j`.
fn integrate_basis(rule: &QuadratureRule, b: f64, sub: &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
    let half = 0.5 * b;
    let mut acc = vec![0.0; rule.len()];
    for (z, w) in sub.0.iter().zip(&sub.1) {
        let basis = basis_at(rule, half * (z + 1.0));
        for (a, v) in acc.iter_mut().zip(basis) {
            *a += half * w * v;
        }
    }
    acc
}

/// First-order matrix on the rule's own interval, together with the
/// full-interval integration vector.
pub fn first_order_matrix(rule: &QuadratureRule) -> Result<IntegrationOperator> {
    let n1 = rule.len();
    let sub = legendre_subrule(subrule_size(rule))?;
    let mut matrix = DMatrix::zeros(n1, n1);
    for (i, &x) in rule.nodes.iter().enumerate() {
        for (j, v) in integrate_basis(rule, x, &sub).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Ok(IntegrationOperator {
        rule: rule.clone(),
        order: 1,
        matrix,
        full_interval_row: Some(integrate_basis(rule, rule.length(), &sub)),
    })
}

/// Maps an operator built on an interval of length 2 to `[0, length]` by
/// scaling with `(length/2)^q`.
pub fn shift_matrix(standard: &IntegrationOperator, length: f64) -> Result<IntegrationOperator> {
    if standard.rule.length() != 2.0 {
        return Err(Error::InvalidParameter {
            name: "standard",
            reason: format!(
                "operator must live on an interval of length 2, found {}",
                standard.rule.length()
            ),
        });
    }
    let scale = (0.5 * length).powi(standard.order as i32);
    Ok(IntegrationOperator {
        rule: standard.rule.rescaled(length)?,
        order: standard.order,
        matrix: &standard.matrix * scale,
        full_interval_row: standard
            .full_interval_row
            .as_ref()
            .map(|row| row.iter().map(|w| w * 0.5 * length).collect()),
    })
}

/// q-th order matrix from a first-order one.
pub fn higher_order_matrix(first: &IntegrationOperator, q: usize) -> Result<IntegrationOperator> {
    if first.order != 1 {
        return Err(Error::InvalidParameter {
            name: "first",
            reason: format!("expected a first-order operator, found order {}", first.order),
        });
    }
    if q == 0 {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: "integration order must be at least 1".into(),
        });
    }
    if q == 1 {
        return Ok(first.clone());
    }
    let x = &first.rule.nodes;
    let inv_fact = (-ln_factorial(q - 1)).exp();
    let p = (q - 1) as i32;
    let matrix = DMatrix::from_fn(x.len(), x.len(), |i, j| {
        first.matrix[(i, j)] * (x[i] - x[j]).powi(p) * inv_fact
    });
    Ok(IntegrationOperator {
        rule: first.rule.clone(),
        order: q,
        matrix,
        full_interval_row: None,
    })
}

/// `∫_0^l L_j` computed directly on the rule's interval.
pub fn full_interval_vector(rule: &QuadratureRule) -> Result<Vec<f64>> {
    let sub = legendre_subrule(subrule_size(rule))?;
    Ok(integrate_basis(rule, rule.length(), &sub))
}

/// The same vector obtained from the length-2 rule and the factor `l/2`.
pub fn full_interval_vector_via_standard(rule: &QuadratureRule) -> Result<Vec<f64>> {
    let standard = rule.rescaled(2.0)?;
    let half = 0.5 * rule.length();
    Ok(full_interval_vector(&standard)?
        .into_iter()
        .map(|w| w * half)
        .collect())
}
