//! Log-domain Gamma helpers.

#[cfg(test)]
/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
pub(crate) fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (value, sign) = libm::lgamma_r(x);
    (value, if sign < 0 { -1.0 } else { 1.0 })
}

/// `ln |Γ(x)|`.
pub(crate) fn ln_gamma_abs(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln |binom(a, k)|` for real `a` and non-negative `k`, via
/// `Γ(a + 1) / (Γ(k + 1) Γ(a − k + 1))`.
pub(crate) fn ln_abs_binomial(a: f64, k: f64) -> f64 {
    ln_gamma_abs(a + 1.0) - ln_gamma_abs(k + 1.0) - ln_gamma_abs(a - k + 1.0)
}

/// `ln n!`.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    ln_gamma_abs(n as f64 + 1.0)
}
