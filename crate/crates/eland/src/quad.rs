//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::Numeric(format!(
            "quadrature: non-finite integrand on [{a}, {b}]"
        )));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + a.abs()) {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "quadrature did not converge on subinterval [{a}, {b}] (error {err:.3e})"
        )));
    }
    Ok(adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Integrate `f` over `[a, b]` to absolute tolerance roughly `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    if !fa.is_finite() || !fb.is_finite() || !fm.is_finite() {
        return Err(Error::Numeric(format!(
            "quadrature: non-finite integrand on [{a}, {b}]"
        )));
    }
    let whole = simpson(a, b, fa, fm, fb);
    adapt(&mut f, a, b, fa, fm, fb, whole, tol, 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|t| t * t * t - t, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn handles_steep_integrand() {
        // int_0^0.999 sqrt(2)/(1-t^2) dt = sqrt(2) atanh(0.999)
        let v = integrate(|t| 2f64.sqrt() / (1.0 - t * t), 0.0, 0.999, 1e-13).unwrap();
        let exact = 2f64.sqrt() * 0.999f64.atanh();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }
}
