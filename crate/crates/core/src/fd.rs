//! Central finite differences.

/// Step used by every finite-difference check in the crate.
pub const FD_STEP: f64 = 1e-6;

/// Central-difference Jacobian `J[r][c] = d f_r / d x_c`.
pub fn jacobian<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], x: &[f64; N], step: f64) -> [[f64; N]; N] {
    let mut jac = [[0.0; N]; N];
    for c in 0..N {
        let mut plus = *x;
        let mut minus = *x;
        plus[c] += step;
        minus[c] -= step;
        let (fp, fm) = (f(&plus), f(&minus));
        for r in 0..N {
            jac[r][c] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    jac
}

/// Central-difference gradient of a scalar function.
pub fn gradient<const N: usize>(f: impl Fn(&[f64; N]) -> f64, x: &[f64; N], step: f64) -> [f64; N] {
    std::array::from_fn(|c| {
        let mut plus = *x;
        let mut minus = *x;
        plus[c] += step;
        minus[c] -= step;
        (f(&plus) - f(&minus)) / (2.0 * step)
    })
}

/// `max |analytic - fd| / (1 + |analytic|)` over all entries.
pub fn max_relative_error<const N: usize>(
    analytic: &[[f64; N]; N],
    f: impl Fn(&[f64; N]) -> [f64; N],
    x: &[f64; N],
    step: f64,
) -> f64 {
    let numeric = jacobian(f, x, step);
    analytic
        .iter()
        .flatten()
        .zip(numeric.iter().flatten())
        .map(|(a, n)| (a - n).abs() / (1.0 + a.abs()))
        .fold(0.0, f64::max)
}
