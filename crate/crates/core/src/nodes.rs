//! Shifted Gegenbauer–Gauss rules.
//!
//! Nodes come from the eigenvalues of the symmetric Jacobi matrix of the
//! Gegenbauer recurrence and are then polished by Newton steps on
//! `G_{n+1}`. Christoffel numbers belong to the weight `(1 − z²)^{α−½}` on
//! `[−1, 1]` and are reused unchanged for the shifted nodes; the interval
//! length enters only through the barycentric weights
//!
//! ```text
//! ξ_i = 2 (−1)^i sqrt(4^α l^{−2(1+α)} (l − x_i) x_i ϖ_i).
//! ```

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::polycore::{eval_with_derivative, recurrence_beta, BasisSpec};
use crate::special::ln_gamma_abs;

const NEWTON_STEPS: usize = 2;

/// Nodes, Christoffel numbers and barycentric weights for one `(α, l, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub spec: BasisSpec,
    /// `n + 1` ascending points strictly inside `(0, l)`.
    pub nodes: Vec<f64>,
    /// Gauss weights for `(1 − z²)^{α−½}` on `[−1, 1]`.
    pub christoffel: Vec<f64>,
    pub bary_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.spec.length()
    }

    /// Same rule mapped onto `[0, length]`.
    pub fn rescaled(&self, length: f64) -> Result<QuadratureRule> {
        let spec = self.spec.with_length(length)?;
        let factor = length / self.spec.length();
        let mut rule = QuadratureRule {
            spec,
            nodes: self.nodes.iter().map(|x| x * factor).collect(),
            christoffel: self.christoffel.clone(),
            bary_weights: Vec::new(),
        };
        rule.bary_weights = barycentric_weights(&rule)?;
        Ok(rule)
    }

    /// `Σ ϖ_i g(z_i)` with `z_i` the nodes mapped back to `[−1, 1]`.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let l = self.spec.length();
        self.nodes
            .iter()
            .zip(&self.christoffel)
            .map(|(x, w)| w * g(2.0 * x / l - 1.0))
            .sum()
    }
}

/// `∫_{−1}^{1} (1 − z²)^{α−½} dz = √π Γ(α+½) / Γ(α+1)`.
pub fn weight_mass(alpha: f64) -> f64 {
    (0.5 * std::f64::consts::PI.ln() + ln_gamma_abs(alpha + 0.5) - ln_gamma_abs(alpha + 1.0))
        .exp()
}

/// Gauss nodes on `[−1, 1]` for `n + 1` points, ascending and exactly symmetric.
fn standard_nodes(alpha: f64, n: usize) -> Result<Vec<f64>> {
    let m = n + 1;
    let jacobi = DMatrix::from_fn(m, m, |r, c| {
        if r == c + 1 {
            recurrence_beta(alpha, r).sqrt()
        } else if c == r + 1 {
            recurrence_beta(alpha, c).sqrt()
        } else {
            0.0
        }
    });
    let mut z: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    z.sort_by(|a, b| a.total_cmp(b));

    for (index, zi) in z.iter_mut().enumerate() {
        for _ in 0..NEWTON_STEPS {
            let (g, dg) = eval_with_derivative(alpha, m, *zi);
            if dg == 0.0 || !dg.is_finite() {
                return Err(Error::RootSolver { index });
            }
            *zi -= g / dg;
        }
        if !zi.is_finite() || zi.abs() >= 1.0 {
            return Err(Error::RootSolver { index });
        }
    }
    for i in 0..m / 2 {
        let s = 0.5 * (z[m - 1 - i] - z[i]);
        z[i] = -s;
        z[m - 1 - i] = s;
    }
    if m % 2 == 1 {
        z[m / 2] = 0.0;
    }
    for i in 1..m {
        if z[i] <= z[i - 1] {
            return Err(Error::RootSolver { index: i });
        }
    }
    Ok(z)
}

/// Christoffel numbers `ϖ_i = μ₀ / Σ_k p̃_k(z_i)²` over the orthonormal family.
fn christoffel_numbers(alpha: f64, z: &[f64]) -> Vec<f64> {
    let m = z.len();
    let mass = weight_mass(alpha);
    let b: Vec<f64> = (1..m).map(|k| recurrence_beta(alpha, k).sqrt()).collect();
    z.iter()
        .map(|&x| {
            let (mut prev, mut cur) = (0.0, 1.0);
            let mut sum = 1.0;
            for k in 0..m.saturating_sub(1) {
                let back = if k == 0 { 0.0 } else { b[k - 1] };
                let next = (x * cur - back * prev) / b[k];
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            mass / sum
        })
        .collect()
}

/// Shifted Gegenbauer–Gauss rule with `n + 1` nodes, the zeros of `G_{l,n+1}`.
pub fn sgg_rule(spec: BasisSpec) -> Result<QuadratureRule> {
    let alpha = spec.alpha();
    let n = spec.degree();
    let l = spec.length();
    let z = standard_nodes(alpha, n)?;
    let mut christoffel = christoffel_numbers(alpha, &z);
    let m = christoffel.len();
    for i in 0..m / 2 {
        let w = 0.5 * (christoffel[i] + christoffel[m - 1 - i]);
        christoffel[i] = w;
        christoffel[m - 1 - i] = w;
    }
    let mut rule = QuadratureRule {
        spec,
        nodes: z.iter().map(|zi| 0.5 * (zi + 1.0) * l).collect(),
        christoffel,
        bary_weights: Vec::new(),
    };
    rule.bary_weights = barycentric_weights(&rule)?;
    Ok(rule)
}

/// Explicit barycentric weights of the shifted nodes.
pub fn barycentric_weights(rule: &QuadratureRule) -> Result<Vec<f64>> {
    let alpha = rule.spec.alpha();
    let l = rule.spec.length();
    let scale = 4f64.powf(alpha) * l.powf(-2.0 * (1.0 + alpha));
    rule.nodes
        .iter()
        .zip(&rule.christoffel)
        .enumerate()
        .map(|(index, (&x, &w))| {
            let radicand = scale * (l - x) * x * w;
            if !(radicand >= 0.0) {
                return Err(Error::NegativeRadicand {
                    index,
                    value: radicand,
                });
            }
            let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
            Ok(2.0 * sign * radicand.sqrt())
        })
        .collect()
}
