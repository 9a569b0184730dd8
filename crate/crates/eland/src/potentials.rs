//! Evaluable potentials W with exact first and second derivatives, well
//! locations, and machine-checkable verdicts for the structural assumptions
//! the solvers rely on.
//!
//! All builtins are extended linearly in W' outside a compact window around
//! the wells, so W'' vanishes far from the region the solutions live in and
//! the energy functional stays well defined for any iterate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::poly;

/// Grid step used by the sampling-based assumption checks.
pub const CHECK_RESOLUTION: f64 = 1e-4;

#[derive(Clone, Debug)]
enum Kind {
    /// W(t) = (t^2 - mu^2)^2 / (4 mu^2); the Allen-Cahn prototype for mu = 1.
    DoubleWell,
    /// W(t) = |t - mu|^{p+1}, p > 1.
    PurePower { p: f64 },
    /// W'(t) = t (t - a) (t - mu), 0 < a < mu/2.
    CubicGenetics { a: f64, w: Vec<f64>, w1: Vec<f64>, w2: Vec<f64> },
    /// Product-form polynomial with prescribed well depths.
    MultiWell { wells: Vec<(f64, f64)>, w: Vec<f64>, w1: Vec<f64>, w2: Vec<f64> },
    /// User-supplied polynomial coefficients.
    Polynomial { w: Vec<f64>, w1: Vec<f64>, w2: Vec<f64> },
    /// Result of `truncate_to_wells`: base polynomial shifted by the well
    /// depth on (-inf, well] and glued to a quadratic-growth C^2 tail.
    TruncatedWell {
        w: Vec<f64>,
        w1: Vec<f64>,
        w2: Vec<f64>,
        well: f64,
        depth: f64,
        wpp_well: f64,
    },
}

/// An immutable potential; safe to share and send between threads.
#[derive(Clone, Debug)]
pub struct Potential {
    kind: Kind,
    mu: f64,
    mu_minus: f64,
    extension_radius: f64,
}

/// Verdicts from `check_assumptions`; advisory only, never gating solver
/// execution.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    /// Hypothesis (a'): W vanishes exactly at mu, is positive on [0, mu),
    /// nonnegative elsewhere, and either reflection-dominated or decreasing
    /// for t < 0.
    pub a_prime: bool,
    /// Hypothesis (a''): same with the left reference point mu_minus <= 0.
    pub a_double_prime: bool,
    /// W''(t) >= 0 for mu - t > 0 small.
    pub wpp_nonneg_near_mu: bool,
    /// (b)-style monotonicity: W'(t) <= 0 on (0, mu).
    pub b_monotone: bool,
    /// Fitted (c, p) for the lower bound -W'(t) >= c (mu - t)^p near mu,
    /// when -W' is positive there and the log-log fit is clean.
    pub power_lower_bound: Option<PowerBound>,
    /// Krasnoselskii uniqueness condition: W'(t)/t strictly increasing on
    /// (0, infinity) (inspected up to mu + 1).
    pub krasnoselskii: bool,
    pub grid_resolution: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerBound {
    pub c: f64,
    pub p: f64,
    pub r2: f64,
}

/// JSON wire format: `{kind, mu, mu_minus, p, a, wells, coeffs,
/// extension_radius}`; unknown fields rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wells: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension_radius: Option<f64>,
}

const DEFAULT_EXTENSION_RADIUS: f64 = 2.0;

impl Potential {
    pub fn double_well(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("double_well: mu must be positive, got {mu}")));
        }
        Ok(Self { kind: Kind::DoubleWell, mu, mu_minus: -mu, extension_radius: DEFAULT_EXTENSION_RADIUS })
    }

    pub fn pure_power(mu: f64, p: f64) -> Result<Self> {
        if !(mu > 0.0) || !(p > 1.0) {
            return Err(Error::Domain(format!("pure_power: need mu > 0 and p > 1, got mu={mu}, p={p}")));
        }
        Ok(Self { kind: Kind::PurePower { p }, mu, mu_minus: 0.0, extension_radius: DEFAULT_EXTENSION_RADIUS })
    }

    pub fn cubic_genetics(mu: f64, a: f64) -> Result<Self> {
        if !(mu > 0.0) || !(a > 0.0 && a < mu / 2.0) {
            return Err(Error::Domain(format!(
                "cubic_genetics: need 0 < a < mu/2, got a={a}, mu={mu}"
            )));
        }
        // W' = t (t - a) (t - mu); W is its antiderivative pinned to W(mu) = 0.
        let w1 = poly::from_roots(1.0, &[0.0, a, mu]);
        let mut w = poly::antiderivative(&w1);
        w[0] -= poly::eval(&w, mu);
        let w2 = poly::derivative(&w1);
        Ok(Self { kind: Kind::CubicGenetics { a, w, w1, w2 }, mu, mu_minus: 0.0, extension_radius: DEFAULT_EXTENSION_RADIUS })
    }

    /// Multi-well potential through the given `(mu_i, W(mu_i))` pairs.
    ///
    /// Realized as W'(t) = c prod_i (t - mu_i) prod_j (t - nu_j) with one
    /// local maximum nu_j per gap; c and the interior nu_j are solved so the
    /// prescribed depth differences come out exactly. Wells must be strictly
    /// increasing with strictly decreasing depths and the last depth 0.
    pub fn multi_well(wells: Vec<(f64, f64)>) -> Result<Self> {
        let m = wells.len();
        if m < 2 {
            return Err(Error::Domain("multi_well: need at least two wells".into()));
        }
        for k in 1..m {
            if wells[k].0 <= wells[k - 1].0 {
                return Err(Error::Domain("multi_well: well locations must be strictly increasing".into()));
            }
            if wells[k].1 >= wells[k - 1].1 {
                return Err(Error::Domain("multi_well: well depths must be strictly decreasing".into()));
            }
        }
        if wells[0].0 <= 0.0 {
            return Err(Error::Domain("multi_well: well locations must be positive".into()));
        }
        if wells[m - 1].1 != 0.0 {
            return Err(Error::Domain("multi_well: depth at the last well must be 0".into()));
        }
        let mu = wells[m - 1].0;
        let (w, w1, w2) = solve_multiwell_coeffs(&wells)?;
        Ok(Self { kind: Kind::MultiWell { wells, w, w1, w2 }, mu, mu_minus: 0.0, extension_radius: DEFAULT_EXTENSION_RADIUS })
    }

    pub fn polynomial(coeffs: Vec<f64>, mu: f64, mu_minus: f64) -> Result<Self> {
        if !(mu > 0.0) || mu_minus > 0.0 {
            return Err(Error::Domain("polynomial: need mu > 0 and mu_minus <= 0".into()));
        }
        let w1 = poly::derivative(&coeffs);
        let w2 = poly::derivative(&w1);
        if poly::eval(&coeffs, mu).abs() > 1e-12 || poly::eval(&w1, mu).abs() > 1e-12 {
            return Err(Error::Domain(
                "polynomial: W(mu) and W'(mu) must vanish to 1e-12".into(),
            ));
        }
        Ok(Self { kind: Kind::Polynomial { w: coeffs, w1, w2 }, mu, mu_minus, extension_radius: DEFAULT_EXTENSION_RADIUS })
    }

    pub fn with_extension_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Domain("extension_radius must be positive".into()));
        }
        self.extension_radius = r;
        Ok(self)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu_minus(&self) -> f64 {
        self.mu_minus
    }

    /// Linear-extension window; outside `[lo, hi]` the potential continues
    /// with constant W'.
    pub fn extension_window(&self) -> (f64, f64) {
        (self.mu_minus - self.extension_radius, self.mu + self.extension_radius)
    }

    /// Evaluate W (order 0), W' (order 1) or W'' (order 2).
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("eval: non-finite argument {t}")));
        }
        if order > 2 {
            return Err(Error::Domain(format!("eval: order must be 0, 1 or 2, got {order}")));
        }
        let (lo, hi) = self.extension_window();
        if t > hi {
            return Ok(match order {
                0 => self.eval_core(hi, 0) + self.eval_core(hi, 1) * (t - hi),
                1 => self.eval_core(hi, 1),
                _ => 0.0,
            });
        }
        if t < lo {
            return Ok(match order {
                0 => self.eval_core(lo, 0) + self.eval_core(lo, 1) * (t - lo),
                1 => self.eval_core(lo, 1),
                _ => 0.0,
            });
        }
        Ok(self.eval_core(t, order))
    }

    /// Convenience wrappers; arguments are always finite inside the solvers.
    pub fn w(&self, t: f64) -> f64 {
        self.eval(t, 0).expect("finite argument")
    }

    pub fn wp(&self, t: f64) -> f64 {
        self.eval(t, 1).expect("finite argument")
    }

    pub fn wpp(&self, t: f64) -> f64 {
        self.eval(t, 2).expect("finite argument")
    }

    fn eval_core(&self, t: f64, order: u8) -> f64 {
        let mu = self.mu;
        match &self.kind {
            Kind::DoubleWell => {
                let q = t * t - mu * mu;
                match order {
                    0 => q * q / (4.0 * mu * mu),
                    1 => t * q / (mu * mu),
                    _ => (3.0 * t * t - mu * mu) / (mu * mu),
                }
            }
            Kind::PurePower { p } => {
                let d = t - mu;
                let ad = d.abs();
                match order {
                    0 => ad.powf(p + 1.0),
                    1 => (p + 1.0) * ad.powf(p - 1.0) * d,
                    _ => p * (p + 1.0) * ad.powf(p - 1.0),
                }
            }
            Kind::CubicGenetics { w, w1, w2, .. }
            | Kind::MultiWell { w, w1, w2, .. }
            | Kind::Polynomial { w, w1, w2 } => match order {
                0 => poly::eval(w, t),
                1 => poly::eval(w1, t),
                _ => poly::eval(w2, t),
            },
            Kind::TruncatedWell { w, w1, w2, well, wpp_well, .. } => {
                if t <= *well {
                    match order {
                        0 => poly::eval(w, t),
                        1 => poly::eval(w1, t),
                        _ => poly::eval(w2, t),
                    }
                } else {
                    // C^2 tail with quadratic growth:
                    // q(tau) = wpp/2 tau^2 + tau^4 / (1 + tau^2).
                    let tau = t - well;
                    let d = 1.0 + tau * tau;
                    match order {
                        0 => 0.5 * wpp_well * tau * tau + tau.powi(4) / d,
                        1 => wpp_well * tau + (4.0 * tau.powi(3) + 2.0 * tau.powi(5)) / (d * d),
                        _ => {
                            wpp_well
                                + ((12.0 * tau * tau + 10.0 * tau.powi(4)) * d
                                    - 16.0 * tau.powi(4)
                                    - 8.0 * tau.powi(6))
                                    / (d * d * d)
                        }
                    }
                }
            }
        }
    }

    /// Well list: `(location, depth)` pairs, ordered.
    pub fn wells(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            Kind::MultiWell { wells, .. } => wells.clone(),
            _ => vec![(self.mu, 0.0)],
        }
    }

    /// Restriction to the i-th well (1-based): equals W - W(mu_i) on
    /// [0, mu_i] and continues with a C^2 quadratic-growth tail so that (a')
    /// holds with the single well mu_i.
    pub fn truncate_to_wells(&self, i: usize) -> Result<Potential> {
        let Kind::MultiWell { wells, w, w1, w2 } = &self.kind else {
            return Err(Error::Domain("truncate_to_wells: not a multi_well potential".into()));
        };
        if i == 0 || i > wells.len() {
            return Err(Error::Domain(format!(
                "truncate_to_wells: well index {i} out of range 1..={}",
                wells.len()
            )));
        }
        let (well, depth) = wells[i - 1];
        let wpp_well = poly::eval(w2, well);
        // Fold the depth shift into the constant term; subtracting it
        // at evaluation time would wreck the relative accuracy of W
        // near the well, where the shifted value crosses zero.
        let mut w = w.clone();
        w[0] -= depth;
        Ok(Potential {
            kind: Kind::TruncatedWell {
                w,
                w1: w1.clone(),
                w2: w2.clone(),
                well,
                depth,
                wpp_well,
            },
            mu: well,
            mu_minus: 0.0,
            extension_radius: self.extension_radius,
        })
    }

    /// Sampling-based verdicts for the structural assumptions.
    pub fn check_assumptions(&self) -> AssumptionReport {
        let res = CHECK_RESOLUTION;
        let mu = self.mu;
        let mm = self.mu_minus;
        let tol = 1e-10;

        let sample = |lo: f64, hi: f64| -> Vec<f64> {
            let n = ((hi - lo) / res).ceil().max(2.0) as usize;
            (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
        };

        let at_mu_ok = self.w(mu).abs() <= tol && self.wp(mu).abs() <= tol;
        let positive_on = |lo: f64| -> bool {
            sample(lo, mu - res).iter().all(|&t| self.w(t) > 0.0)
        };
        let nonneg_everywhere =
            sample(mm - 1.0, mu + 1.0).iter().all(|&t| self.w(t) >= -tol);

        // Reflection alternative of (a'): W(-t) >= W(t) on [0, mu], or W'
        // negative left of 0.
        let reflect_or_decreasing = |pivot: f64| -> bool {
            let refl = sample(pivot.max(0.0), mu)
                .iter()
                .all(|&t| self.w(2.0 * pivot - t) >= self.w(t) - tol);
            let dec = sample(mm - 1.0, pivot - res).iter().all(|&t| self.wp(t) < 0.0);
            refl || dec
        };

        let a_prime = at_mu_ok && positive_on(0.0) && nonneg_everywhere && reflect_or_decreasing(0.0);
        let a_double_prime =
            at_mu_ok && mm <= 0.0 && positive_on(mm) && nonneg_everywhere && reflect_or_decreasing(mm);

        let near = 0.1 * mu;
        let wpp_nonneg_near_mu = sample(mu - near, mu).iter().all(|&t| self.wpp(t) >= -tol);

        let b_monotone = sample(res, mu - res).iter().all(|&t| self.wp(t) <= tol);

        // Power lower bound fit on the approach window (mu - 0.2 mu, mu).
        let power_lower_bound = match &self.kind {
            Kind::PurePower { p } => Some(PowerBound { c: p + 1.0, p: *p, r2: 1.0 }),
            _ => {
                let ts = sample(mu - 0.2 * mu, mu - res);
                if ts.iter().all(|&t| -self.wp(t) > 0.0) {
                    let xs: Vec<f64> = ts.iter().map(|&t| (mu - t).ln()).collect();
                    let ys: Vec<f64> = ts.iter().map(|&t| (-self.wp(t)).ln()).collect();
                    line_fit(&xs, &ys).filter(|f| f.r2 > 0.999).map(|f| PowerBound {
                        c: f.intercept.exp(),
                        p: f.slope,
                        r2: f.r2,
                    })
                } else {
                    None
                }
            }
        };

        // W'(t)/t strictly increasing on (0, mu + 1].
        let ks = sample(res, mu + 1.0);
        let mut krasnoselskii = true;
        let mut prev = f64::NEG_INFINITY;
        for &t in &ks {
            let v = self.wp(t) / t;
            if v <= prev {
                krasnoselskii = false;
                break;
            }
            prev = v;
        }

        AssumptionReport {
            a_prime,
            a_double_prime,
            wpp_nonneg_near_mu,
            b_monotone,
            power_lower_bound,
            krasnoselskii,
            grid_resolution: res,
        }
    }

    pub fn to_spec(&self) -> PotentialSpec {
        let mut spec = PotentialSpec {
            kind: String::new(),
            mu: Some(self.mu),
            mu_minus: Some(self.mu_minus),
            p: None,
            a: None,
            wells: None,
            coeffs: None,
            extension_radius: Some(self.extension_radius),
        };
        match &self.kind {
            Kind::DoubleWell => spec.kind = "double_well".into(),
            Kind::PurePower { p } => {
                spec.kind = "pure_power".into();
                spec.p = Some(*p);
            }
            Kind::CubicGenetics { a, .. } => {
                spec.kind = "cubic_genetics".into();
                spec.a = Some(*a);
            }
            Kind::MultiWell { wells, .. } => {
                spec.kind = "multi_well".into();
                spec.wells = Some(wells.clone());
            }
            Kind::Polynomial { w, .. } => {
                spec.kind = "polynomial".into();
                spec.coeffs = Some(w.clone());
            }
            Kind::TruncatedWell { .. } => spec.kind = "truncated_well".into(),
        }
        spec
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Potential> {
        let mu = spec.mu;
        let built = match spec.kind.as_str() {
            "double_well" => Self::double_well(mu.unwrap_or(1.0))?,
            "pure_power" => Self::pure_power(
                mu.unwrap_or(1.0),
                spec.p.ok_or_else(|| Error::Config("pure_power requires `p`".into()))?,
            )?,
            "cubic_genetics" => Self::cubic_genetics(
                mu.unwrap_or(1.0),
                spec.a.ok_or_else(|| Error::Config("cubic_genetics requires `a`".into()))?,
            )?,
            "multi_well" => Self::multi_well(
                spec.wells
                    .clone()
                    .ok_or_else(|| Error::Config("multi_well requires `wells`".into()))?,
            )?,
            "polynomial" => Self::polynomial(
                spec.coeffs
                    .clone()
                    .ok_or_else(|| Error::Config("polynomial requires `coeffs`".into()))?,
                mu.ok_or_else(|| Error::Config("polynomial requires `mu`".into()))?,
                spec.mu_minus.unwrap_or(0.0),
            )?,
            other => return Err(Error::Config(format!("unknown potential kind `{other}`"))),
        };
        match spec.extension_radius {
            Some(r) => built.with_extension_radius(r),
            None => Ok(built),
        }
    }

    pub fn from_json(json: &str) -> Result<Potential> {
        let spec: PotentialSpec =
            serde_json::from_str(json).map_err(|e| Error::Config(format!("potential JSON: {e}")))?;
        Self::from_spec(&spec)
    }
}

/// Solve for the scale c and interior maxima nu_j of the product-form W'.
///
/// The first maximum is pinned at mu_1 + (mu_2 - mu_1)/4; the remaining
/// unknowns are found by damped Newton on the depth-difference residuals
/// (exact polynomial integration throughout).
fn solve_multiwell_coeffs(wells: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = wells.len();
    let mus: Vec<f64> = wells.iter().map(|w| w.0).collect();
    let depths: Vec<f64> = wells.iter().map(|w| w.1).collect();

    // Unknowns: z = [ln c, nu_2, ..., nu_{m-1}]; nu_1 is pinned.
    let nu1 = mus[0] + 0.25 * (mus[1] - mus[0]);
    let residual = |z: &[f64]| -> Result<Vec<f64>> {
        let c = z[0].exp();
        let mut nus = vec![nu1];
        nus.extend_from_slice(&z[1..]);
        let mut roots = mus.clone();
        roots.extend_from_slice(&nus);
        let w1 = poly::from_roots(c, &roots);
        let w = poly::antiderivative(&w1);
        Ok((0..m - 1)
            .map(|j| {
                let gap = poly::eval(&w, mus[j]) - poly::eval(&w, mus[j + 1]);
                gap - (depths[j] - depths[j + 1])
            })
            .collect())
    };

    let mut z = vec![0.0];
    for j in 1..m - 1 {
        z.push(mus[j] + 0.25 * (mus[j + 1] - mus[j]));
    }
    let nvars = z.len();
    let mut converged = false;
    for _ in 0..100 {
        let r = residual(&z)?;
        let rnorm = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if rnorm < 1e-12 {
            converged = true;
            break;
        }
        // Finite-difference Jacobian; the system is tiny.
        let mut jac = vec![vec![0.0; nvars]; m - 1];
        for v in 0..nvars {
            let mut zp = z.clone();
            let dh = 1e-7 * (1.0 + z[v].abs());
            zp[v] += dh;
            let rp = residual(&zp)?;
            for (row, jrow) in jac.iter_mut().enumerate() {
                jrow[v] = (rp[row] - r[row]) / dh;
            }
        }
        let step = solve_dense(&mut jac, &r)
            .ok_or_else(|| Error::Numeric("multi_well: singular Newton system".into()))?;
        let mut lambda = 1.0;
        loop {
            let mut zt = z.clone();
            for v in 0..nvars {
                zt[v] -= lambda * step[v];
            }
            // Keep interior maxima inside their gaps.
            let feasible = (1..nvars).all(|v| zt[v] > mus[v] && zt[v] < mus[v + 1]);
            if feasible {
                let rt = residual(&zt)?;
                let rtn = rt.iter().map(|v| v.abs()).fold(0.0, f64::max);
                if rtn < rnorm || lambda < 1e-6 {
                    z = zt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::Numeric("multi_well: Newton line search failed".into()));
            }
        }
    }
    if !converged {
        return Err(Error::Numeric("multi_well: depth solve did not converge".into()));
    }

    let c = z[0].exp();
    let mut roots = mus.clone();
    roots.push(nu1);
    roots.extend_from_slice(&z[1..]);
    let w1 = poly::from_roots(c, &roots);
    let mut w = poly::antiderivative(&w1);
    w[0] -= poly::eval(&w, mus[m - 1]); // pin W(mu_m) = 0
    let w2 = poly::derivative(&w1);

    // Sanity: each well must be the running minimum left of it.
    for (j, &(muj, dj)) in wells.iter().enumerate() {
        if (poly::eval(&w, muj) - dj).abs() > 1e-8 {
            return Err(Error::Numeric(format!(
                "multi_well: depth mismatch at well {}",
                j + 1
            )));
        }
        let n = (muj / CHECK_RESOLUTION) as usize;
        for k in 0..n {
            let t = muj * k as f64 / n as f64;
            if poly::eval(&w, t) <= dj - 1e-10 {
                return Err(Error::Numeric(format!(
                    "multi_well: W dips below depth of well {} at t={t}",
                    j + 1
                )));
            }
        }
    }
    Ok((w, w1, w2))
}

/// Gaussian elimination with partial pivoting; consumes the matrix.
fn solve_dense(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        for k in col + 1..n {
            let xk = x[k];
            x[col] -= a[col][k] * xk;
        }
        x[col] /= a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_values() {
        let w = Potential::double_well(1.0).unwrap();
        assert!((w.eval(0.0, 0).unwrap() - 0.25).abs() < 1e-15);
        assert!((w.eval(1.0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!(w.w(1.0).abs() < 1e-15 && w.wp(1.0).abs() < 1e-15);
    }

    #[test]
    fn double_well_even_bit_identical() {
        let w = Potential::double_well(1.0).unwrap();
        for &t in &[0.3, 0.9, 1.4, 2.7, 5.0] {
            assert_eq!(w.w(t).to_bits(), w.w(-t).to_bits());
        }
    }

    #[test]
    fn pure_power_derivative_at_zero() {
        let w = Potential::pure_power(1.0, 3.0).unwrap();
        assert!((w.eval(0.0, 1).unwrap() - (-4.0)).abs() < 1e-15);
        assert!(w.w(1.0).abs() < 1e-15 && w.wp(1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_extension_outside_window() {
        let w = Potential::double_well(1.0).unwrap();
        let (lo, hi) = w.extension_window();
        assert_eq!(w.wpp(hi + 1.0), 0.0);
        assert_eq!(w.wpp(lo - 1.0), 0.0);
        assert!((w.wp(hi + 5.0) - w.wp(hi)).abs() < 1e-15);
        assert!((w.w(hi + 1.0) - (w.w(hi) + w.wp(hi))).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_non_finite() {
        let w = Potential::double_well(1.0).unwrap();
        assert!(w.eval(f64::NAN, 0).is_err());
        assert!(w.eval(f64::INFINITY, 1).is_err());
        assert!(w.eval(0.0, 3).is_err());
    }

    #[test]
    fn assumption_verdicts_double_well() {
        let rep = Potential::double_well(1.0).unwrap().check_assumptions();
        assert!(rep.a_prime);
        assert!(rep.wpp_nonneg_near_mu);
        assert!(rep.krasnoselskii);
        assert!(rep.b_monotone);
    }

    #[test]
    fn assumption_verdicts_cubic_genetics() {
        let rep = Potential::cubic_genetics(1.0, 0.3).unwrap().check_assumptions();
        assert!(rep.a_prime);
        assert!(!rep.b_monotone);
        assert!(!rep.krasnoselskii);
    }

    #[test]
    fn pure_power_power_bound() {
        let rep = Potential::pure_power(1.0, 3.0).unwrap().check_assumptions();
        let pb = rep.power_lower_bound.unwrap();
        assert!((pb.c - 4.0).abs() < 1e-12);
        assert!((pb.p - 3.0).abs() < 1e-12);
    }

    #[test]
    fn multi_well_depths_and_truncation() {
        let w = Potential::multi_well(vec![(1.0, 0.5), (2.0, 0.0)]).unwrap();
        assert!(w.w(1.0) - 0.5 < 1e-10 && (w.w(1.0) - 0.5).abs() < 1e-10);
        assert!(w.w(2.0).abs() < 1e-10);
        assert!(w.wp(1.0).abs() < 1e-10 && w.wp(2.0).abs() < 1e-10);

        for i in 1..=2 {
            let ti = w.truncate_to_wells(i).unwrap();
            let rep = ti.check_assumptions();
            assert!(rep.a_prime, "truncation {i} must satisfy (a')");
            // Minimum over a dense grid is 0, attained at the well.
            let mut best = (f64::INFINITY, 0.0);
            let n = 4000;
            for k in 0..=n {
                let t = -1.0 + 4.0 * k as f64 / n as f64;
                let v = ti.w(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            assert!(best.0.abs() < 1e-9);
            assert!((best.1 - ti.mu()).abs() < 2e-3);
        }
        assert!(w.truncate_to_wells(3).is_err());
        assert!(w.truncate_to_wells(0).is_err());
    }

    #[test]
    fn multi_well_three_wells() {
        let w = Potential::multi_well(vec![(1.0, 0.8), (2.0, 0.3), (3.0, 0.0)]).unwrap();
        for (mu_i, d_i) in w.wells() {
            assert!((w.w(mu_i) - d_i).abs() < 1e-8);
            assert!(w.wp(mu_i).abs() < 1e-8);
        }
    }

    #[test]
    fn json_roundtrip_and_unknown_fields() {
        let w = Potential::pure_power(1.0, 3.0).unwrap();
        let json = serde_json::to_string(&w.to_spec()).unwrap();
        let back = Potential::from_json(&json).unwrap();
        assert_eq!(back.mu(), 1.0);
        assert!(Potential::from_json(r#"{"kind":"double_well","mu":1.0,"bogus":3}"#).is_err());
        assert!(Potential::from_json(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn derivative_consistency_finite_differences() {
        let pots = [
            Potential::double_well(1.0).unwrap(),
            Potential::pure_power(1.0, 3.0).unwrap(),
            Potential::cubic_genetics(1.0, 0.3).unwrap(),
            Potential::multi_well(vec![(1.0, 0.5), (2.0, 0.0)]).unwrap(),
        ];
        let h = 1e-5;
        for w in &pots {
            let mut t = -1.3;
            while t < w.mu() + 1.3 {
                let fd1 = (w.w(t + h) - w.w(t - h)) / (2.0 * h);
                let fd2 = (w.wp(t + h) - w.wp(t - h)) / (2.0 * h);
                assert!(
                    (w.wp(t) - fd1).abs() <= 1e-6 * (1.0 + w.wp(t).abs()),
                    "W' mismatch at t={t}"
                );
                assert!(
                    (w.wpp(t) - fd2).abs() <= 1e-5 * (1.0 + w.wpp(t).abs()),
                    "W'' mismatch at t={t}"
                );
                t += 0.037;
            }
        }
    }
}
