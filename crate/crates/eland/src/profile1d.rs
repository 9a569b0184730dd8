//! The 1-D connecting profile U with U'' = W'(U), U(0) = 0, U -> mu.
//!
//! U is recovered from its first integral: on the heteroclinic the energy
//! (1/2) U'^2 - W(U) vanishes identically, so the arclength at height u is
//! s(u) = int_0^u dt / sqrt(2 W(t)) and U' = sqrt(2 W(U)). Quadrature makes
//! the construction exact up to tolerance and avoids the saddle at mu that
//! plagues shooting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::potentials::Potential;
use crate::quad;

/// Quadrature tolerance used throughout the profile construction.
const QUAD_TOL: f64 = 1e-13;
/// Cap on how close the sampled range may approach mu (degenerate wells make
/// s(u) blow up super-logarithmically there).
const U_MAX_CAP: f64 = 1e-9;
/// Default acceptance bound on the finite-difference first-integral residual.
pub const FIRST_INTEGRAL_TOL: f64 = 1e-3;

/// Sampled connecting profile.
#[derive(Clone, Debug)]
pub struct ProfileU {
    /// Arclength grid, s[0] = 0.
    pub s: Vec<f64>,
    /// U(s) in [0, mu).
    pub u: Vec<f64>,
    /// U'(0) = sqrt(2 W(0)).
    pub slope0: f64,
    /// The asymptote mu.
    pub mu: f64,
    /// max_k |(1/2) U'_fd(s_k)^2 - W(U(s_k))| with U'_fd from centered
    /// differences on the grid; a genuine cross-check, not a tautology.
    pub first_integral_residual: f64,
    potential: Potential,
}

/// Outcome of `fit_profile_decay`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// "exp" for mu - U ~ C e^{-rate s}, "alg" for mu - U ~ C s^{-rate}.
    pub model: String,
    pub rate: f64,
    pub constant: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

fn integrand(w: &Potential) -> impl Fn(f64) -> f64 + '_ {
    move |t| {
        let v = 2.0 * w.w(t);
        if v > 0.0 {
            1.0 / v.sqrt()
        } else {
            f64::NAN
        }
    }
}

/// Arclength at which U reaches mu - epsilon: D' = int_0^{mu-eps} dt/sqrt(2W).
pub fn compute_dprime(potential: &Potential, epsilon: f64) -> Result<f64> {
    let mu = potential.mu();
    if !(epsilon > 0.0 && epsilon < mu) {
        return Err(Error::Domain(format!(
            "compute_dprime: need 0 < epsilon < mu, got epsilon={epsilon}, mu={mu}"
        )));
    }
    check_positive_well(potential, mu - epsilon)?;
    let f = integrand(potential);
    quad::integrate(&f, 0.0, mu - epsilon, QUAD_TOL)
}

fn check_positive_well(potential: &Potential, upto: f64) -> Result<()> {
    // W must be positive on [0, upto); sample cheaply and fail loudly.
    let n = 2000;
    for k in 0..n {
        let t = upto * k as f64 / n as f64;
        if potential.w(t) <= 0.0 {
            return Err(Error::Assumption(format!(
                "W(t) <= 0 at t={t}; the first integral is undefined"
            )));
        }
    }
    if potential.mu_minus() < 0.0 {
        // (a'') case: flag if W vanishes on (mu_minus, 0); the quadrature
        // from 0 is still used but the profile may not be the minimizing one.
        let mm = potential.mu_minus();
        for k in 1..200 {
            let t = mm * k as f64 / 200.0;
            if potential.w(t) <= 0.0 {
                return Err(Error::Assumption(format!(
                    "W vanishes at t={t} in (mu_minus, 0)"
                )));
            }
        }
    }
    Ok(())
}

/// Compute U by inverting s(u) on a grid of u-values Chebyshev-clustered
/// toward `u_max` (the integrand blows up as W(u) -> 0).
pub fn compute_profile(potential: &Potential, u_max: f64, n_points: usize) -> Result<ProfileU> {
    let mu = potential.mu();
    if !(u_max > 0.0 && u_max < mu) {
        return Err(Error::Domain(format!(
            "compute_profile: need 0 < u_max < mu, got u_max={u_max}, mu={mu}"
        )));
    }
    if n_points < 16 {
        return Err(Error::Domain("compute_profile: n_points must be >= 16".into()));
    }
    let u_max = u_max.min(mu - U_MAX_CAP);
    check_positive_well(potential, u_max)?;

    let n = n_points;
    let f = integrand(potential);
    let mut s = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    s.push(0.0);
    u.push(0.0);
    for j in 1..n {
        let theta = std::f64::consts::FRAC_PI_2 * j as f64 / (n - 1) as f64;
        let uj = u_max * theta.sin();
        let ds = quad::integrate(&f, u[j - 1], uj, QUAD_TOL)?;
        s.push(s[j - 1] + ds);
        u.push(uj);
    }

    let slope0 = (2.0 * potential.w(0.0)).sqrt();
    let mut residual: f64 = 0.0;
    for k in 1..n - 1 {
        let du = (u[k + 1] - u[k - 1]) / (s[k + 1] - s[k - 1]);
        residual = residual.max((0.5 * du * du - potential.w(u[k])).abs());
    }

    Ok(ProfileU {
        s,
        u,
        slope0,
        mu,
        first_integral_residual: residual,
        potential: potential.clone(),
    })
}

impl ProfileU {
    /// Largest arclength covered by the sampled range.
    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// Achieved upper value of the profile range.
    pub fn u_max(&self) -> f64 {
        *self.u.last().unwrap()
    }

    /// Evaluate U at arbitrary arclength by cubic Hermite interpolation of the
    /// sampled table; the first integral U' = sqrt(2 W(U)) supplies exact node
    /// slopes, so the interpolant inherits the quadrature accuracy of the
    /// table. Arguments beyond the sampled range clamp to the endpoint values.
    pub fn eval(&self, s_query: f64) -> f64 {
        if s_query <= 0.0 {
            return 0.0;
        }
        if s_query >= self.s_max() {
            return self.u_max();
        }
        let j = match self.s.binary_search_by(|v| v.total_cmp(&s_query)) {
            Ok(j) => return self.u[j],
            Err(j) => j - 1,
        };
        let (s0, s1) = (self.s[j], self.s[j + 1]);
        let (u0, u1) = (self.u[j], self.u[j + 1]);
        let h = s1 - s0;
        let t = (s_query - s0) / h;
        let m0 = (2.0 * self.potential.w(u0)).max(0.0).sqrt();
        let m1 = (2.0 * self.potential.w(u1)).max(0.0).sqrt();
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let v = h00 * u0 + h01 * u1 + h * (h10 * m0 + h11 * m1);
        // U is monotone between nodes; clamping guards against overshoot.
        v.clamp(u0.min(u1), u0.max(u1))
    }

    /// Arclength at which U attains the value `u_query` (inverse of `eval`).
    pub fn s_of(&self, u_query: f64) -> Result<f64> {
        if !(0.0..self.mu).contains(&u_query) {
            return Err(Error::Domain(format!(
                "s_of: need 0 <= u < mu, got {u_query}"
            )));
        }
        if u_query == 0.0 {
            return Ok(0.0);
        }
        quad::integrate(&integrand(&self.potential), 0.0, u_query, QUAD_TOL)
    }

    /// U'(s) from the first integral.
    pub fn eval_slope(&self, s_query: f64) -> f64 {
        (2.0 * self.potential.w(self.eval(s_query))).max(0.0).sqrt()
    }

    /// Least-squares decay fit of mu - U on the window, exponential versus
    /// algebraic; returns whichever model has the better r^2.
    pub fn fit_decay(&self, window: (f64, f64)) -> Result<DecayFit> {
        let (lo, hi) = window;
        if !(lo >= 0.0 && hi > lo && hi <= self.s_max()) {
            return Err(Error::Domain(format!(
                "fit window ({lo}, {hi}) outside grid range [0, {}]",
                self.s_max()
            )));
        }
        let mut ss = Vec::new();
        let mut gaps = Vec::new();
        for (sk, uk) in self.s.iter().zip(self.u.iter()) {
            let gap = self.mu - uk;
            if *sk >= lo && *sk <= hi && gap > 0.0 && gap.ln().is_finite() && *sk > 0.0 {
                ss.push(*sk);
                gaps.push(gap);
            }
        }
        if ss.len() < 8 {
            return Err(Error::InsufficientData(format!(
                "decay fit needs >= 8 usable points in window, found {}",
                ss.len()
            )));
        }
        let ln_gap: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
        let exp_fit = line_fit(&ss, &ln_gap);
        let ln_s: Vec<f64> = ss.iter().map(|s| s.ln()).collect();
        let alg_fit = line_fit(&ln_s, &ln_gap);
        match (exp_fit, alg_fit) {
            (Some(e), Some(a)) if a.r2 > e.r2 => Ok(DecayFit {
                model: "alg".into(),
                rate: -a.slope,
                constant: a.intercept.exp(),
                r2: a.r2,
                window,
            }),
            (Some(e), _) => Ok(DecayFit {
                model: "exp".into(),
                rate: -e.slope,
                constant: e.intercept.exp(),
                r2: e.r2,
                window,
            }),
            (None, Some(a)) => Ok(DecayFit {
                model: "alg".into(),
                rate: -a.slope,
                constant: a.intercept.exp(),
                r2: a.r2,
                window,
            }),
            (None, None) => Err(Error::InsufficientData("degenerate decay fit".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_well() -> Potential {
        Potential::double_well(1.0).unwrap()
    }

    #[test]
    fn profile_starts_at_zero_and_increases() {
        let prof = compute_profile(&double_well(), 0.999, 512).unwrap();
        assert_eq!(prof.u[0], 0.0);
        assert!(prof.u.windows(2).all(|w| w[1] > w[0]));
        assert!(prof.s.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn double_well_profile_is_tanh() {
        let prof = compute_profile(&double_well(), 0.999, 1024).unwrap();
        let mut worst: f64 = 0.0;
        let mut s = 0.0;
        while s < prof.s_max() {
            let exact = (s / 2f64.sqrt()).tanh();
            worst = worst.max((prof.eval(s) - exact).abs());
            s += 0.37;
        }
        assert!(worst < 1e-9, "sup error {worst}");
    }

    #[test]
    fn slope_identity_at_origin() {
        let prof = compute_profile(&double_well(), 0.999, 256).unwrap();
        assert!((prof.slope0 * prof.slope0 - 2.0 * double_well().w(0.0)).abs() < 1e-10);
        assert!(prof.first_integral_residual < FIRST_INTEGRAL_TOL);
    }

    #[test]
    fn pure_power_closed_form() {
        // v(s) = mu - U(s) = 1/(1 + sqrt(2) s) for W = |t-1|^4.
        let w = Potential::pure_power(1.0, 3.0).unwrap();
        let prof = compute_profile(&w, 0.99999, 2048).unwrap();
        for &s in &[0.1, 0.5, 1.0, 3.0, 10.0] {
            let exact = 1.0 - 1.0 / (1.0 + 2f64.sqrt() * s);
            assert!(
                (prof.eval(s) - exact).abs() < 1e-8,
                "s={s}: {} vs {exact}",
                prof.eval(s)
            );
        }
    }

    #[test]
    fn dprime_matches_atanh() {
        let d = compute_dprime(&double_well(), 0.1).unwrap();
        let exact = 2f64.sqrt() * 0.9f64.atanh();
        assert!((d - exact).abs() < 1e-9, "{d} vs {exact}");
    }

    #[test]
    fn dprime_edge_cases() {
        let w = double_well();
        assert!(compute_dprime(&w, 0.999999).unwrap() < 2e-3);
        assert!(compute_dprime(&w, 0.0).is_err());
        assert!(compute_dprime(&w, 1.0).is_err());
        // pure_power closed form at eps = 0.5.
        let pp = Potential::pure_power(1.0, 3.0).unwrap();
        let d = compute_dprime(&pp, 0.5).unwrap();
        assert!((d - 1.0 / 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dprime_strictly_decreasing_in_epsilon() {
        let w = double_well();
        let mut prev = f64::INFINITY;
        for k in 1..=10 {
            let eps = 0.09 * k as f64;
            let d = compute_dprime(&w, eps).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn profile_hits_dprime() {
        let w = double_well();
        let prof = compute_profile(&w, 1.0 - 1e-9, 2048).unwrap();
        let eps = 0.1;
        let d = compute_dprime(&w, eps).unwrap();
        assert!((prof.eval(d) - (1.0 - eps)).abs() < 1e-8);
    }

    #[test]
    fn rk4_cross_check() {
        // Integrating U' = sqrt(2 W(U)) from the origin reproduces the
        // quadrature profile.
        let w = double_well();
        let prof = compute_profile(&w, 0.999, 1024).unwrap();
        let mut u = 0.0f64;
        let h = 1e-3;
        let s_end = prof.s_max().min(5.0);
        let f = |u: f64| (2.0 * w.w(u)).max(0.0).sqrt();
        let mut s = 0.0;
        let mut worst: f64 = 0.0;
        while s < s_end {
            let k1 = f(u);
            let k2 = f(u + 0.5 * h * k1);
            let k3 = f(u + 0.5 * h * k2);
            let k4 = f(u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
            worst = worst.max((u - prof.eval(s)).abs());
        }
        assert!(worst < 1e-6, "RK4 vs quadrature gap {worst}");
    }

    #[test]
    fn decay_fit_double_well_exponential() {
        let w = double_well();
        let prof = compute_profile(&w, 1.0 - 1e-9, 2048).unwrap();
        let fit = prof.fit_decay((3.0, 8.0)).unwrap();
        assert_eq!(fit.model, "exp");
        let rate = 2f64.sqrt(); // sqrt(W''(1))
        assert!((fit.rate - rate).abs() < 0.02 * rate, "rate {}", fit.rate);
    }

    #[test]
    fn decay_fit_pure_power_algebraic() {
        let w = Potential::pure_power(1.0, 3.0).unwrap();
        let prof = compute_profile(&w, 1.0 - 1e-9, 4096).unwrap();
        // The fitted slope sees ln(1 + 1/(sqrt(2) s)) curvature, so the
        // window starts deep in the tail.
        let fit = prof.fit_decay((50.0, 5000.0)).unwrap();
        assert_eq!(fit.model, "alg");
        assert!((fit.rate - 1.0).abs() < 0.02, "exponent {}", fit.rate);
    }

    #[test]
    fn decay_fit_insufficient_data() {
        let w = double_well();
        let prof = compute_profile(&w, 0.999, 64).unwrap();
        assert!(matches!(
            prof.fit_decay((prof.s_max() * 0.999, prof.s_max())),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = double_well();
        assert!(compute_profile(&w, 1.5, 256).is_err());
        assert!(compute_profile(&w, 0.5, 4).is_err());
    }
}
