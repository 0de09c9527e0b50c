//! Gegenbauer polynomials normalised by `G_n(1) = 1`.
//!
//! `G_n^{(α)}(x) = P_n^{(α−½, α−½)}(x) / P_n^{(α−½, α−½)}(1)`, so `α = 0` gives
//! the Chebyshev polynomials of the first kind and `α = ½` the Legendre
//! polynomials. The shifted family on `[0, l]` is `G_{l,n}(x) = G_n(2x/l − 1)`.
//!
//! Evaluation runs the three-term recurrence of the monic family rescaled so
//! that every iterate is already normalised at `x = 1`.

use crate::error::{Error, Result};
use crate::special::ln_gamma_abs;

/// Slack allowed when checking that a point lies in the closed domain.
pub const DOMAIN_TOLERANCE: f64 = 1e-14;

/// Parameter `α`, interval length `l` and degree `n` of one shifted family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    alpha: f64,
    length: f64,
    degree: usize,
}

impl BasisSpec {
    pub fn new(alpha: f64, length: f64, degree: usize) -> Result<Self> {
        if !(alpha > -0.5) || !alpha.is_finite() {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("must be positive and finite, got {length}"),
            });
        }
        Ok(Self {
            alpha,
            length,
            degree,
        })
    }

    /// Family on an interval of length 2, i.e. `[−1, 1]` up to translation.
    pub fn standard(alpha: f64, degree: usize) -> Result<Self> {
        Self::new(alpha, 2.0, degree)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn with_degree(self, degree: usize) -> Self {
        Self { degree, ..self }
    }

    pub fn with_length(self, length: f64) -> Result<Self> {
        Self::new(self.alpha, length, self.degree)
    }

    /// Coefficient of `x^n` in the shifted polynomial `G_{l,n}`.
    pub fn leading_coefficient(&self) -> f64 {
        leading_coefficient(self)
    }
}

/// Recurrence coefficient `β_k` of the monic Gegenbauer family,
/// `p_{k+1} = x p_k − β_k p_{k−1}`. Only meaningful for `k ≥ 1`.
pub(crate) fn recurrence_beta(alpha: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        // k(k+2α−1) / (4(k+α)(k+α−1)) with the α factor cancelled.
        return 1.0 / (2.0 * (1.0 + alpha));
    }
    let k = k as f64;
    k * (k + 2.0 * alpha - 1.0) / (4.0 * (k + alpha) * (k + alpha - 1.0))
}

/// `G_n(x)` and `G_n'(x)` for any real `x`; no domain checks.
pub(crate) fn eval_with_derivative(alpha: f64, n: usize, x: f64) -> (f64, f64) {
    let (mut g_prev, mut g) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    // ρ_k = p_{k+1}(1) / p_k(1)
    let mut rho_prev = 1.0;
    for k in 0..n {
        let (shrink, rho) = if k == 0 {
            (0.0, 1.0)
        } else {
            let c = recurrence_beta(alpha, k) / rho_prev;
            (c, 1.0 - c)
        };
        let g_next = (x * g - shrink * g_prev) / rho;
        let d_next = (g + x * d - shrink * d_prev) / rho;
        g_prev = g;
        g = g_next;
        d_prev = d;
        d = d_next;
        rho_prev = rho;
    }
    (g, d)
}

fn check_interval(x: f64, lo: f64, hi: f64, scale: f64) -> Result<f64> {
    let slack = DOMAIN_TOLERANCE * scale;
    if !x.is_finite() || x < lo - slack || x > hi + slack {
        return Err(Error::Domain { value: x, lo, hi });
    }
    Ok(x.clamp(lo, hi))
}

/// `G_n^{(α)}(x)` for `x ∈ [−1, 1]`; the interval length in `spec` is ignored.
pub fn gegenbauer(spec: &BasisSpec, x: f64) -> Result<f64> {
    let x = check_interval(x, -1.0, 1.0, 1.0)?;
    Ok(eval_with_derivative(spec.alpha, spec.degree, x).0)
}

/// `G_{l,n}^{(α)}(x)` for `x ∈ [0, l]`.
pub fn shifted_gegenbauer(spec: &BasisSpec, x: f64) -> Result<f64> {
    let l = spec.length;
    let x = check_interval(x, 0.0, l, l)?;
    Ok(eval_with_derivative(spec.alpha, spec.degree, 2.0 * x / l - 1.0).0)
}

/// `ln K_{l,n}`, the log of the leading coefficient of the shifted polynomial.
///
/// On `[−1, 1]`: `K_n = 2^{n−1} Γ(n+α) Γ(2α+1) / (Γ(α+1) Γ(n+2α))` for `n ≥ 1`;
/// the shift multiplies by `(2/l)^n`.
pub fn ln_leading_coefficient(spec: &BasisSpec) -> f64 {
    let n = spec.degree;
    if n == 0 {
        return 0.0;
    }
    let a = spec.alpha;
    let nf = n as f64;
    let standard = (nf - 1.0) * std::f64::consts::LN_2 + ln_gamma_abs(nf + a)
        + ln_gamma_abs(2.0 * a + 1.0)
        - ln_gamma_abs(a + 1.0)
        - ln_gamma_abs(nf + 2.0 * a);
    standard + nf * (2.0 / spec.length).ln()
}

/// Leading coefficient `K_{l,n}`; `+∞` when it is not representable.
pub fn leading_coefficient(spec: &BasisSpec) -> f64 {
    let v = ln_leading_coefficient(spec).exp();
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(alpha: f64, l: f64, n: usize) -> BasisSpec {
        BasisSpec::new(alpha, l, n).unwrap()
    }

    /// Generalised binomial `binom(r, k)` by direct product.
    fn binom(r: f64, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (r - i as f64) / (i as f64 + 1.0))
    }

    /// Explicit Jacobi sum divided by `P_n(1)`, with the sum of term
    /// magnitudes (the scale of its own round-off).
    fn jacobi_ratio(alpha: f64, n: usize, x: f64) -> (f64, f64) {
        let a = alpha - 0.5;
        let nf = n as f64;
        let terms: Vec<f64> = (0..=n)
            .map(|s| {
                binom(nf + a, n - s)
                    * binom(nf + a, s)
                    * ((x - 1.0) / 2.0).powi(s as i32)
                    * ((x + 1.0) / 2.0).powi((n - s) as i32)
            })
            .collect();
        let norm = binom(nf + a, n);
        let sum: f64 = terms.iter().sum();
        let mass: f64 = terms.iter().map(|t| t.abs()).sum();
        (sum / norm, mass / norm.abs())
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            BasisSpec::new(-0.5, 1.0, 3),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(BasisSpec::new(0.0, 0.0, 3).is_err());
        assert!(BasisSpec::new(f64::NAN, 1.0, 3).is_err());
    }

    #[test]
    fn degree_zero_is_one() {
        for alpha in [-0.4, 0.0, 0.7, 2.0] {
            assert_eq!(gegenbauer(&spec(alpha, 2.0, 0), 0.37).unwrap(), 1.0);
        }
    }

    #[test]
    fn chebyshev_and_legendre_examples() {
        let t3 = gegenbauer(&spec(0.0, 2.0, 3), 0.5).unwrap();
        assert!((t3 - (3.0 * 0.5f64.acos()).cos()).abs() < 1e-15);
        assert!((t3 + 1.0).abs() < 1e-15);
        let p2 = gegenbauer(&spec(0.5, 2.0, 2), 0.3).unwrap();
        assert!((p2 + 0.365).abs() < 1e-15);
    }

    #[test]
    fn shifted_examples() {
        assert!((shifted_gegenbauer(&spec(0.3, 3.0, 5), 3.0).unwrap() - 1.0).abs() < 1e-14);
        let v = shifted_gegenbauer(&spec(0.0, 4.0, 2), 1.0).unwrap();
        assert!((v - (2.0 * (-0.5f64).acos()).cos()).abs() < 1e-15);
        assert!((v + 0.5).abs() < 1e-15);
        assert_eq!(shifted_gegenbauer(&spec(0.5, 2.0, 1), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        let s = spec(0.2, 2.0, 4);
        assert!(matches!(gegenbauer(&s, 1.1), Err(Error::Domain { .. })));
        assert!(gegenbauer(&s, 1.0 + 1e-15).is_ok());
        assert!(shifted_gegenbauer(&s, -0.01).is_err());
        assert!(shifted_gegenbauer(&s, f64::NAN).is_err());
    }

    #[test]
    fn leading_coefficient_examples() {
        assert_eq!(leading_coefficient(&spec(0.3, 1.7, 0)), 1.0);
        assert!((leading_coefficient(&spec(0.0, 2.0, 3)) - 4.0).abs() < 1e-12);
        assert!((leading_coefficient(&spec(0.5, 1.0, 2)) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn leading_coefficient_matches_recurrence_product() {
        // K_n = 1 / p_n(1) = 1 / Π ρ_k, with ρ from the monic recurrence.
        for alpha in [-0.45, -0.2, 0.0, 0.5, 1.3] {
            let mut rho_prev: f64 = 1.0;
            let mut ln_p1 = 0.0;
            for n in 1..=60usize {
                let rho = if n == 1 {
                    1.0
                } else {
                    1.0 - recurrence_beta(alpha, n - 1) / rho_prev
                };
                ln_p1 += rho.ln();
                rho_prev = rho;
                let k = ln_leading_coefficient(&spec(alpha, 2.0, n));
                assert!(
                    (k + ln_p1).abs() < 1e-11 * (1.0 + ln_p1.abs()),
                    "alpha={alpha} n={n}"
                );
            }
        }
    }

    #[test]
    fn leading_coefficient_ratio_test() {
        // G(x) / x^n -> K for large x on small n.
        for alpha in [-0.3, 0.0, 0.8] {
            for n in 1..=5usize {
                let x = 1e5;
                let (g, _) = eval_with_derivative(alpha, n, x);
                let k = leading_coefficient(&spec(alpha, 2.0, n));
                assert!(((g / x.powi(n as i32)) / k - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn leading_coefficient_is_finite_for_large_degree() {
        let v = ln_leading_coefficient(&spec(0.9, 4.0, 400));
        assert!(v.is_finite());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for alpha in [-0.4, 0.0, 0.5, 1.2] {
            for n in [1usize, 4, 9] {
                for x in [-0.8, 0.1, 0.63] {
                    let h = 1e-6;
                    let fd = (eval_with_derivative(alpha, n, x + h).0
                        - eval_with_derivative(alpha, n, x - h).0)
                        / (2.0 * h);
                    let d = eval_with_derivative(alpha, n, x).1;
                    assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()));
                }
            }
        }
    }

    #[test]
    fn reductions_at_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let n: usize = rng.random_range(0..15);
            let theta = x.acos();
            let t = (n as f64 * theta).cos();
            let u = ((n + 1) as f64 * theta).sin() / theta.sin() / (n + 1) as f64;
            let cheb = gegenbauer(&spec(0.0, 2.0, n), x).unwrap();
            let cheb_u = gegenbauer(&spec(1.0, 2.0, n), x).unwrap();
            assert!((cheb - t).abs() < 1e-12 * t.abs().max(1.0));
            assert!((cheb_u - u).abs() < 1e-12 * u.abs().max(1.0));
            let leg = gegenbauer(&spec(0.5, 2.0, n), x).unwrap();
            // Bonnet recurrence
            let (mut p0, mut p1) = (1.0, x);
            let p = if n == 0 {
                1.0
            } else {
                for k in 1..n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                p1
            };
            assert!((leg - p).abs() < 1e-12 * p.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_jacobi_sum(
            alpha in -0.49f64..3.0,
            n in 0usize..=20,
            x in -1.0f64..=1.0,
        ) {
            let r = gegenbauer(&spec(alpha, 2.0, n), x).unwrap();
            let (o, mass) = jacobi_ratio(alpha, n, x);
            prop_assert!((r - o).abs() <= 1e-12 * o.abs().max(1.0) + 1e-14 * mass, "{} vs {}", r, o);
        }

        #[test]
        fn parity(alpha in -0.49f64..3.0, n in 0usize..=30, x in -1.0f64..=1.0) {
            let s = spec(alpha, 2.0, n);
            let a = gegenbauer(&s, x).unwrap();
            let b = gegenbauer(&s, -x).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(b, sign * a);
        }

        #[test]
        fn shift_is_affine_map(alpha in -0.49f64..2.0, n in 0usize..=12, l in 0.1f64..10.0, s in 0.0f64..=1.0) {
            let sp = spec(alpha, l, n);
            let x = s * l;
            let shifted = shifted_gegenbauer(&sp, x).unwrap();
            let direct = gegenbauer(&sp, 2.0 * x / l - 1.0).unwrap();
            prop_assert_eq!(shifted, direct);
        }
    }
}
