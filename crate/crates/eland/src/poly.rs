//! Dense univariate polynomials with f64 coefficients, ascending order.

/// Evaluate `coeffs[0] + coeffs[1] t + ...` by compensated Horner.
///
/// The compensation term carries the rounding error of every product
/// and sum, so values near a root come out accurate relative to the
/// result rather than to the coefficient magnitudes. Plain Horner's
/// cancellation noise there is fatal downstream: 1/sqrt(2W) must be
/// smooth enough for adaptive quadrature to converge.
pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    let mut s = 0.0f64;
    let mut comp = 0.0f64;
    for &a in coeffs.iter().rev() {
        let p = s * t;
        let ep = s.mul_add(t, -p);
        let sum = p + a;
        let z = sum - p;
        let es = (p - (sum - z)) + (a - z);
        s = sum;
        comp = comp * t + (ep + es);
    }
    s + comp
}

/// Coefficients of the derivative.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Coefficients of the antiderivative with zero constant term.
pub fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    for (k, &c) in coeffs.iter().enumerate() {
        out.push(c / (k + 1) as f64);
    }
    out
}

/// Product of two polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Expand `c * prod_k (t - roots[k])`.
pub fn from_roots(c: f64, roots: &[f64]) -> Vec<f64> {
    let mut out = vec![c];
    for &r in roots {
        out = mul(&out, &[-r, 1.0]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_naive() {
        let c = [2.0, -1.0, 0.5, 3.0];
        let t = 1.7;
        let naive = 2.0 - t + 0.5 * t * t + 3.0 * t * t * t;
        assert!((eval(&c, t) - naive).abs() < 1e-12);
    }

    #[test]
    fn derivative_and_antiderivative_roundtrip() {
        let c = [1.0, 2.0, 3.0, 4.0];
        let d = derivative(&antiderivative(&c));
        for (a, b) in c.iter().zip(d.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_expansion() {
        // (t-1)(t-2) = t^2 - 3t + 2
        let p = from_roots(1.0, &[1.0, 2.0]);
        assert_eq!(p, vec![2.0, -3.0, 1.0]);
    }
}
