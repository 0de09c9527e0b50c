//! Truncation-error bounds for the barycentric shifted Gegenbauer quadratures.
//!
//! Every bound is evaluated in the log domain. Which closed form applies
//! depends on the sign of `α` and, for `−1/2 < α < 0`, on the parity of `n`;
//! see [`Branch`]. The negative-`α` forms involve `Γ(α)` and `Γ(2α)`, which
//! are negative there; their magnitudes are used so the bounds stay positive.
//!
//! The asymptotic forms whose constants are not known are exposed only as
//! shape functions ([`shape_function`]) together with a fitted constant
//! ([`fit_shape_constant`]).

use crate::error::{Error, Result};
use crate::intmat::IntegrationOperator;
use crate::polycore::BasisSpec;
use crate::special::{ln_abs_binomial, ln_factorial, ln_gamma_abs};

use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `α ≥ 0`, any `n`.
    NonNegative,
    /// `−1/2 < α < 0` with `(n + 1)/2` a positive integer.
    NegativeOdd,
    /// `−1/2 < α < 0` with `n/2` a non-negative integer.
    NegativeEven,
}

impl Branch {
    pub fn select(alpha: f64, n: usize) -> Self {
        if alpha >= 0.0 {
            Branch::NonNegative
        } else if n % 2 == 1 {
            Branch::NegativeOdd
        } else {
            Branch::NegativeEven
        }
    }

    fn name(self) -> &'static str {
        match self {
            Branch::NonNegative => "alpha >= 0",
            Branch::NegativeOdd => "alpha < 0, n odd",
            Branch::NegativeEven => "alpha < 0, n even",
        }
    }

    fn check(self, alpha: f64, n: usize) -> Result<()> {
        if Branch::select(alpha, n) == self {
            Ok(())
        } else {
            Err(Error::Branch {
                branch: self.name(),
                alpha,
                degree: n,
            })
        }
    }
}

/// Sup-norm inputs to the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// `α`, interval length `l` and degree `n`.
    pub spec: BasisSpec,
    pub q: usize,
    /// Bound on the relevant `(n+1)`-th derivative.
    pub a: f64,
    /// Bound on all derivatives of order `0..=n+1`.
    pub a_max: f64,
    pub n_max: f64,
    /// Bound on the temporal `(N_t+1)`-th derivative.
    pub b_max: f64,
}

impl BoundInputs {
    /// First-order inputs with every sup bound equal to `a` and `n_max = 1`.
    pub fn new(spec: BasisSpec, a: f64) -> Result<Self> {
        let inputs = Self {
            spec,
            q: 1,
            a,
            a_max: a,
            n_max: 1.0,
            b_max: a,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_order(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn with_a_max(mut self, a_max: f64, n_max: f64) -> Self {
        self.a_max = a_max;
        self.n_max = n_max;
        self
    }

    pub fn with_b_max(mut self, b_max: f64) -> Self {
        self.b_max = b_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("a_max", self.a_max),
            ("n_max", self.n_max),
            ("b_max", self.b_max),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and non-negative, found {v}"),
                });
            }
        }
        if self.q == 0 {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: "integration order must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    fn n(&self) -> usize {
        self.spec.degree()
    }

    fn l(&self) -> f64 {
        self.spec.length()
    }
}

fn check_node(x: f64, l: f64) -> Result<()> {
    if x.is_finite() && (0.0..=l).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x,
            lo: 0.0,
            hi: l,
        })
    }
}

/// `scale · exp(ln_rest)`, treating `scale = 0` as exactly zero.
fn assemble(scale: f64, ln_rest: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        (scale.ln() + ln_rest).exp()
    }
}

/// `Γ(1 + α) / (2 Γ(1 + 2α))`.
pub fn dynamics_prefactor(alpha: f64) -> f64 {
    (ln_gamma_abs(1.0 + alpha) - ln_gamma_abs(1.0 + 2.0 * alpha)).exp() / 2.0
}

/// Log of the first-order bound without the factor `A x_i`, on a given branch.
fn ln_q1(alpha: f64, n: usize, l: f64, branch: Branch) -> f64 {
    let nf = n as f64;
    let ln_pow = -(2.0 * nf + 1.0) * LN_2 + (nf + 1.0) * l.ln();
    match branch {
        Branch::NonNegative | Branch::NegativeOdd => {
            let mut v = ln_pow + ln_gamma_abs(alpha + 1.0) + ln_gamma_abs(nf + 2.0 * alpha + 1.0)
                - ln_gamma_abs(2.0 * alpha + 1.0)
                - ln_gamma_abs(nf + 2.0)
                - ln_gamma_abs(nf + alpha + 1.0);
            if branch == Branch::NegativeOdd {
                let h = (nf + 1.0) / 2.0;
                v += ln_factorial(n + 1) + ln_gamma_abs(2.0 * alpha)
                    - ln_gamma_abs(nf + 2.0 * alpha + 1.0)
                    + ln_abs_binomial(h + alpha - 1.0, h);
            }
            v
        }
        Branch::NegativeEven => {
            let h = nf / 2.0;
            ln_pow + ln_gamma_abs(alpha) + alpha.abs().ln()
                - 0.5 * ((nf + 1.0) * (2.0 * alpha + nf + 1.0)).ln()
                - ln_gamma_abs(nf + alpha + 1.0)
                + ln_abs_binomial(h + alpha, h)
        }
    }
}

/// First-order quadrature bound at node `x_i`, on an explicit branch.
pub fn quadrature_error_bound_q1_on(inputs: &BoundInputs, x_i: f64, branch: Branch) -> Result<f64> {
    inputs.validate()?;
    check_node(x_i, inputs.l())?;
    branch.check(inputs.alpha(), inputs.n())?;
    Ok(assemble(
        inputs.a * x_i,
        ln_q1(inputs.alpha(), inputs.n(), inputs.l(), branch),
    ))
}

/// First-order quadrature bound at node `x_i`.
pub fn quadrature_error_bound_q1(inputs: &BoundInputs, x_i: f64) -> Result<f64> {
    let branch = Branch::select(inputs.alpha(), inputs.n());
    quadrature_error_bound_q1_on(inputs, x_i, branch)
}

/// q-th order bound; `a` bounds the `(n+1)`-th derivative of `(x_i − x)^{q−1} f`.
pub fn quadrature_error_bound_qk(inputs: &BoundInputs, x_i: f64, q: usize) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: "integration order must be at least 1".into(),
        });
    }
    let first = quadrature_error_bound_q1(inputs, x_i)?;
    if q == 1 {
        return Ok(first);
    }
    Ok(first / ln_factorial(q - 1).exp())
}

fn ln_corollary(alpha: f64, n: usize, l: f64, q: usize, branch: Branch) -> f64 {
    let nf = n as f64;
    let base = -nf * LN_2 + (1.0 + nf) * l.ln() + ln_gamma_abs(1.0 + alpha)
        + ln_gamma_abs(1.0 + nf + 2.0 * alpha)
        - ln_factorial(n + 1)
        - ln_factorial(q - 1)
        - ln_gamma_abs(1.0 + nf + alpha)
        - ln_gamma_abs(1.0 + 2.0 * alpha);
    base + match branch {
        Branch::NonNegative => 0.0,
        Branch::NegativeEven => {
            let h = nf / 2.0;
            (2.0 * alpha.abs()).ln() + ln_abs_binomial(h + alpha, h) + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
                - 0.5 * ((1.0 + nf) * (1.0 + nf + 2.0 * alpha)).ln()
                - ln_gamma_abs(1.0 + nf + 2.0 * alpha)
        }
        Branch::NegativeOdd => {
            ln_abs_binomial((nf - 1.0) / 2.0 + alpha, (nf + 1.0) / 2.0) + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
                - ln_gamma_abs(1.0 + nf + 2.0 * alpha)
        }
    }
}

/// Bound in terms of `a_max` (all derivatives up to `n+1`) and `n_max`.
pub fn corollary_bound(inputs: &BoundInputs, x_i: f64) -> Result<f64> {
    inputs.validate()?;
    check_node(x_i, inputs.l())?;
    let branch = Branch::select(inputs.alpha(), inputs.n());
    Ok(assemble(
        inputs.a_max * inputs.n_max * x_i,
        ln_corollary(inputs.alpha(), inputs.n(), inputs.l(), inputs.q, branch),
    ))
}

/// Temporal part `ε_{1,j}` of the dynamics bound.
pub fn epsilon_time(inputs_t: &BoundInputs, t_j: f64) -> Result<f64> {
    inputs_t.validate()?;
    check_node(t_j, inputs_t.l())?;
    let (alpha, n) = (inputs_t.alpha(), inputs_t.n());
    let nf = n as f64;
    let base = -nf * 2.0 * LN_2 + (nf + 1.0) * inputs_t.l().ln()
        - ln_factorial(n + 1)
        - ln_gamma_abs(nf + alpha + 1.0);
    let tail = match Branch::select(alpha, n) {
        Branch::NonNegative => ln_gamma_abs(nf + 2.0 * alpha + 1.0),
        Branch::NegativeEven => {
            let h = nf / 2.0;
            (2.0 * alpha.abs()).ln() + ln_abs_binomial(h + alpha, h) + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
                - 0.5 * ((nf + 1.0) * (nf + 2.0 * alpha + 1.0)).ln()
        }
        Branch::NegativeOdd => {
            ln_abs_binomial((nf - 1.0) / 2.0 + alpha, (nf + 1.0) / 2.0)
                + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
        }
    };
    Ok(assemble(inputs_t.b_max * t_j, base + tail))
}

/// Spatial part `ε_{2,i}` of the dynamics bound.
pub fn epsilon_space(inputs_y: &BoundInputs, y_i: f64) -> Result<f64> {
    inputs_y.validate()?;
    check_node(y_i, inputs_y.l())?;
    let (alpha, n) = (inputs_y.alpha(), inputs_y.n());
    let nf = n as f64;
    let base = (1.0 - nf) * LN_2 + (nf + 1.0) * inputs_y.l().ln()
        + ln_gamma_abs(nf + 2.0 * alpha + 1.0)
        - ln_factorial(n + 1)
        - ln_gamma_abs(1.0 + nf + alpha);
    let tail = match Branch::select(alpha, n) {
        Branch::NonNegative => 0.0,
        Branch::NegativeEven => {
            let h = nf / 2.0;
            (2.0 * alpha.abs()).ln() + ln_abs_binomial(h + alpha, h) + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
                - 0.5 * ((nf + 1.0) * (nf + 2.0 * alpha + 1.0)).ln()
                - ln_gamma_abs(nf + 2.0 * alpha + 1.0)
        }
        Branch::NegativeOdd => {
            ln_abs_binomial((nf - 1.0) / 2.0 + alpha, (nf + 1.0) / 2.0)
                + ln_factorial(n + 1)
                + ln_gamma_abs(2.0 * alpha)
                - ln_gamma_abs(nf + 2.0 * alpha + 1.0)
        }
    };
    Ok(assemble(inputs_y.a_max * inputs_y.n_max * y_i, base + tail))
}

/// `D^{(α)} (ε_{1,j} + ε_{2,i})` at the collocation point `(y_i, t_j)`.
pub fn total_dynamics_error_bound(
    inputs_y: &BoundInputs,
    inputs_t: &BoundInputs,
    node: (f64, f64),
) -> Result<f64> {
    let alpha = inputs_y.alpha();
    if inputs_t.alpha() != alpha {
        return Err(Error::InvalidParameter {
            name: "inputs_t",
            reason: format!(
                "spatial and temporal alpha differ ({alpha} vs {})",
                inputs_t.alpha()
            ),
        });
    }
    let (y_i, t_j) = node;
    Ok(dynamics_prefactor(alpha) * (epsilon_time(inputs_t, t_j)? + epsilon_space(inputs_y, y_i)?))
}

/// `e^n l^{n+1} x_i / (2^{2n+1} n^{n+3/2−β} (q−1)!)` with `β = α` for
/// `α ≥ 0` and `β = 0` otherwise. Carries no constant.
pub fn shape_function(spec: &BasisSpec, x_i: f64, q: usize) -> f64 {
    let n = spec.degree().max(1) as f64;
    let beta = spec.alpha().max(0.0);
    let ln = n + (n + 1.0) * spec.length().ln() - (2.0 * n + 1.0) * LN_2
        - (n + 1.5 - beta) * n.ln()
        - ln_factorial(q.saturating_sub(1));
    assemble(x_i, ln)
}

/// Largest observed `error / shape` ratio: the smallest constant for which
/// the shape function dominates every sample. This is fitted from data and
/// is not a proven bound.
pub fn fit_shape_constant(samples: &[(f64, f64)]) -> Option<f64> {
    samples
        .iter()
        .filter(|(_, shape)| *shape > 0.0)
        .map(|(err, shape)| err.abs() / shape)
        .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
}

/// Estimate of `sup |f^{(k)}|` on `[lo, hi]` from k-th forward differences on
/// `windows` evenly spaced stencils of width `k h`. Only an estimate: it
/// samples finitely many points and carries round-off of order `ε / h^k`.
pub fn estimate_derivative_sup<F: Fn(f64) -> f64>(
    f: F,
    k: usize,
    lo: f64,
    hi: f64,
    windows: usize,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidParameter {
            name: "interval",
            reason: format!("need a finite interval with lo < hi, found [{lo}, {hi}]"),
        });
    }
    if k == 0 {
        return Ok((0..=windows.max(1))
            .map(|s| f(lo + (hi - lo) * s as f64 / windows.max(1) as f64).abs())
            .fold(0.0, f64::max));
    }
    let windows = windows.max(1);
    let h = ((hi - lo) / (16.0 * k as f64)).min(0.25);
    let span = h * k as f64;
    let binom: Vec<f64> = (0..=k)
        .map(|j| (ln_factorial(k) - ln_factorial(j) - ln_factorial(k - j)).exp().round())
        .collect();
    let mut best: f64 = 0.0;
    for w in 0..=windows {
        let start = lo + (hi - lo - span) * w as f64 / windows as f64;
        let mut diff = 0.0;
        for (j, c) in binom.iter().enumerate() {
            let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            diff += sign * c * f(start + j as f64 * h);
        }
        best = best.max((diff / h.powi(k as i32)).abs());
    }
    Ok(best)
}

/// Nodewise errors of `op` applied to `g(x) = Σ_k c_k x^k`, measured on the
/// Taylor tail only. The operator integrates the degree-`≤ n` head exactly
/// (up to round-off), so `P g − I g` equals `P R − I R` with
/// `R = Σ_{k>n} c_k x^k`, and evaluating the latter avoids cancellation
/// against the much larger head. `coeff(k)` must decay fast enough that
/// `terms` coefficients past `n` suffice.
pub fn taylor_tail_errors<C: Fn(usize) -> f64>(
    op: &IntegrationOperator,
    coeff: C,
    terms: usize,
) -> Vec<f64> {
    let n = op.rule.spec.degree();
    let q = op.order;
    let x = &op.rule.nodes;
    let tail: Vec<f64> = x
        .iter()
        .map(|&xi| (n + 1..=n + terms).map(|k| coeff(k) * xi.powi(k as i32)).sum())
        .collect();
    // q-fold integral of x^k from 0 is x^{k+q} k! / (k+q)!.
    let exact: Vec<f64> = x
        .iter()
        .map(|&xi| {
            (n + 1..=n + terms)
                .map(|k| {
                    let ratio = (ln_factorial(k) - ln_factorial(k + q)).exp();
                    coeff(k) * xi.powi((k + q) as i32) * ratio
                })
                .sum()
        })
        .collect();
    (0..x.len())
        .map(|i| {
            let approx: f64 = (0..x.len()).map(|j| op.matrix[(i, j)] * tail[j]).sum();
            approx - exact[i]
        })
        .collect()
}
