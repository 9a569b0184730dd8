//! Linearized spectrum around radial solutions.
//!
//! The linearization -phi'' - (n-1)/r phi' + W''(u) phi with phi'(0) = 0
//! and phi(R) = 0 is discretized on the solution grid; the principal
//! eigenpair comes from shifted inverse iteration with a symmetrizing
//! weight for the Rayleigh quotient.

use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::radial::{solve_radial_minimizer, RadialProblem, RadialSolution};
use crate::tridiag::Tridiag;
use rayon::prelude::*;

const ITER_MAX: usize = 500;
const EIG_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Principal eigenvalue of -Laplace + W''(u_R), Dirichlet data.
    pub mu_r: f64,
    /// Eigenfunction on the full grid (boundary node included),
    /// positive inside, normalized to sup = 1.
    pub phi: Vec<f64>,
    pub iterations: usize,
}

fn linearization(sol: &RadialSolution) -> Tridiag {
    let p = &sol.problem;
    let k_max = p.cells();
    let h = p.h;
    let n = p.n as f64;
    let pot = &p.potential;
    let mut a = Tridiag::zeros(k_max);
    a.diag[0] = 2.0 * n / (h * h) + pot.wpp(sol.u[0]);
    a.upper[0] = -2.0 * n / (h * h);
    for k in 1..k_max {
        let r = k as f64 * h;
        a.diag[k] = 2.0 / (h * h) + pot.wpp(sol.u[k]);
        a.upper[k] = -(1.0 / (h * h) + (n - 1.0) / (2.0 * h * r));
        a.lower[k] = -(1.0 / (h * h) - (n - 1.0) / (2.0 * h * r));
    }
    a
}

/// Symmetrizing weights: w_{k+1} = w_k * upper_k / lower_{k+1} makes
/// diag(w) A symmetric, so the weighted Rayleigh quotient is exact.
fn symmetrizing_weights(a: &Tridiag) -> Vec<f64> {
    let k_max = a.len();
    let mut w = vec![1.0; k_max];
    for k in 0..k_max - 1 {
        w[k + 1] = w[k] * a.upper[k] / a.lower[k + 1];
    }
    w
}

fn rayleigh(a: &Tridiag, w: &[f64], v: &[f64], scratch: &mut [f64]) -> f64 {
    a.matvec(v, scratch);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..v.len() {
        num += w[k] * v[k] * scratch[k];
        den += w[k] * v[k] * v[k];
    }
    num / den
}

/// Smallest eigenvalue and positive eigenfunction of the linearization.
pub fn principal_eigenpair(sol: &RadialSolution) -> Result<EigenResult> {
    if sol.trivial {
        return Err(Error::DiagnosticUndefined(
            "spectrum is undefined for the trivial state".into(),
        ));
    }
    let a = linearization(sol);
    let k_max = a.len();
    let pot = &sol.problem.potential;

    // Shift below the whole spectrum: mu_R >= -max |W''| on the range
    // of u, so sigma = -max|W''| - 1 makes A - sigma I positive.
    let wpp_max = wpp_sup(pot, sol);
    let sigma = -wpp_max - 1.0;
    let shifted = a.shifted(-sigma);

    let w = symmetrizing_weights(&a);
    let mut v = vec![1.0; k_max];
    // Bias the start toward the boundary layer where the eigenfunction
    // concentrates for large R.
    for (k, vk) in v.iter_mut().enumerate() {
        *vk = 1.0 + k as f64 / k_max as f64;
    }
    let mut scratch = vec![0.0; k_max];
    let mut lambda = rayleigh(&a, &w, &v, &mut scratch);
    let mut iterations = 0;
    for it in 0..ITER_MAX {
        iterations = it + 1;
        let next = shifted
            .solve(&v)
            .ok_or_else(|| Error::Numeric("singular shifted system".into()))?;
        let sup = next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(sup.is_finite() && sup > 0.0) {
            return Err(Error::Numeric("inverse iteration degenerated".into()));
        }
        v = next.iter().map(|x| x / sup).collect();
        let new_lambda = rayleigh(&a, &w, &v, &mut scratch);
        let done = (new_lambda - lambda).abs() <= EIG_TOL * (1.0 + new_lambda.abs());
        lambda = new_lambda;
        if done {
            break;
        }
        if it + 1 == ITER_MAX {
            return Err(Error::Numeric(format!(
                "inverse iteration did not settle in {ITER_MAX} steps"
            )));
        }
    }

    // Sign convention: positive inside the ball.
    let sum: f64 = v.iter().sum();
    if sum < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::Numeric(
            "principal eigenfunction changed sign on the grid".into(),
        ));
    }
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut phi: Vec<f64> = v.iter().map(|x| x / sup).collect();
    phi.push(0.0);
    Ok(EigenResult { mu_r: lambda, phi, iterations })
}

fn wpp_sup(pot: &Potential, sol: &RadialSolution) -> f64 {
    let lo = sol.u.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sol.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sup: f64 = 0.0;
    for k in 0..=400 {
        let t = lo + (hi - lo) * k as f64 / 400.0;
        sup = sup.max(pot.wpp(t).abs());
    }
    sup
}

/// Residual of the pointwise identity
/// zeta(r) = r^n (u' phi' - W'(u) phi) + (n-2) r^{n-1} u' phi,
/// zeta(r) + int_0^r 2 W'(u) phi s^{n-1} ds = 0,
/// for the radial equation and its linearization. The state
/// (u, u', phi, phi', integral) is co-integrated by RK4 from the
/// center, seeded with the solution's center value, so the residual
/// measures only integrator error. Returns max |zeta + I| / max |zeta|.
pub fn zeta_identity_residual(sol: &RadialSolution) -> Result<f64> {
    if sol.trivial {
        return Err(Error::DiagnosticUndefined(
            "identity is undefined for the trivial state".into(),
        ));
    }
    let p = &sol.problem;
    let pot = p.potential.clone();
    let n = p.n as f64;
    let h = p.h / 4.0;
    let u0 = sol.u[0];

    // Series start just off the origin avoids the (n-1)/r division.
    let r0 = h;
    let wp0 = pot.wp(u0);
    let wpp0 = pot.wpp(u0);
    let mut r = r0;
    let mut y = [
        u0 + wp0 * r0 * r0 / (2.0 * n),
        wp0 * r0 / n,
        1.0 + wpp0 * r0 * r0 / (2.0 * n),
        wpp0 * r0 / n,
        2.0 * wp0 * r0.powf(n) / n,
    ];

    let deriv = |r: f64, y: &[f64; 5]| -> [f64; 5] {
        let [u, v, phi, psi, _] = *y;
        [
            v,
            pot.wp(u) - (n - 1.0) / r * v,
            psi,
            pot.wpp(u) * phi - (n - 1.0) / r * psi,
            2.0 * pot.wp(u) * phi * r.powf(n - 1.0),
        ]
    };
    let zeta = |r: f64, y: &[f64; 5]| -> f64 {
        let [u, v, phi, psi, _] = *y;
        r.powf(n) * (v * psi - pot.wp(u) * phi) + (n - 2.0) * r.powf(n - 1.0) * v * phi
    };

    let mut max_res: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let steps = (4 * p.cells()) - 1;
    for _ in 0..steps {
        let k1 = deriv(r, &y);
        let y2 = add_scaled(&y, &k1, 0.5 * h);
        let k2 = deriv(r + 0.5 * h, &y2);
        let y3 = add_scaled(&y, &k2, 0.5 * h);
        let k3 = deriv(r + 0.5 * h, &y3);
        let y4 = add_scaled(&y, &k3, h);
        let k4 = deriv(r + h, &y4);
        for i in 0..5 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
        let z = zeta(r, &y);
        max_res = max_res.max((z + y[4]).abs());
        max_z = max_z.max(z.abs());
        // The homogeneous linearization can grow; rescale the linear
        // components (phi, psi, I are jointly linear, as is zeta).
        let amp = y[2].abs().max(y[3].abs());
        if amp > 1e100 {
            let f = 1.0 / amp;
            y[2] *= f;
            y[3] *= f;
            y[4] *= f;
            max_res *= f;
            max_z *= f;
        }
        if !y.iter().all(|x| x.is_finite()) {
            return Err(Error::Numeric("identity integration blew up".into()));
        }
    }
    if max_z == 0.0 {
        return Ok(0.0);
    }
    Ok(max_res / max_z)
}

fn add_scaled(y: &[f64; 5], k: &[f64; 5], c: f64) -> [f64; 5] {
    let mut out = *y;
    for i in 0..5 {
        out[i] += c * k[i];
    }
    out
}

/// Principal eigenvalue across a list of radii, solved in parallel.
pub fn stability_sweep(
    potential: &Potential,
    n: u32,
    boundary_value: f64,
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    radii
        .par_iter()
        .map(|&r| {
            let problem = RadialProblem::new(potential.clone(), n, r, boundary_value)?;
            let sol = solve_radial_minimizer(&problem)?;
            let eig = principal_eigenpair(&sol)?;
            Ok((r, eig.mu_r))
        })
        .collect()
}

/// Sup gap between the boundary-layer shape of the eigenfunction and
/// the normalized profile derivative U'(R - r) / max U'.
pub fn eigenfunction_profile_gap(
    eig: &EigenResult,
    sol: &RadialSolution,
    profile: &crate::profile1d::ProfileU,
    s_max: f64,
) -> f64 {
    let p = &sol.problem;
    let slope_sup = profile.slope0.max(
        (0..200)
            .map(|k| profile.eval_slope(s_max * k as f64 / 200.0))
            .fold(0.0f64, f64::max),
    );
    let mut gap: f64 = 0.0;
    for (k, &phik) in eig.phi.iter().enumerate() {
        let s = p.radius - k as f64 * p.h;
        if (0.0..=s_max).contains(&s) {
            gap = gap.max((phik - profile.eval_slope(s) / slope_sup).abs());
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::Potential;
    use crate::radial::default_profile;

    fn dw() -> Potential {
        Potential::double_well(1.0).unwrap()
    }

    fn solve(n: u32, r: f64, cells: usize) -> RadialSolution {
        let p = RadialProblem::with_mesh(dw(), n, r, 0.0, r / cells as f64).unwrap();
        solve_radial_minimizer(&p).unwrap()
    }

    #[test]
    fn eigenvalue_obeys_lower_bound_and_positivity() {
        let sol = solve(2, 10.0, 1000);
        let eig = principal_eigenpair(&sol).unwrap();
        // mu_R >= -max |W''| = -2 on [0, 1]; minimizers give mu_R >= 0
        // up to discretization error.
        assert!(eig.mu_r >= -2.0);
        assert!(eig.mu_r >= -1e-6, "minimizer unstable: mu_R = {}", eig.mu_r);
        assert!(eig.phi[..eig.phi.len() - 1].iter().all(|&x| x > 0.0));
        let sup = eig.phi.iter().fold(0.0f64, |m, &x| m.max(x));
        assert!((sup - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalue_is_mesh_converged() {
        let coarse = principal_eigenpair(&solve(1, 8.0, 800)).unwrap();
        let fine = principal_eigenpair(&solve(1, 8.0, 1600)).unwrap();
        assert!(
            (coarse.mu_r - fine.mu_r).abs() < 5e-4,
            "{} vs {}",
            coarse.mu_r,
            fine.mu_r
        );
    }

    #[test]
    fn eigenvalue_stays_positive_and_settles_as_r_grows() {
        // The Dirichlet condition kills the translation mode, so mu_R
        // does not vanish at infinity: it climbs toward the ground
        // state of the half-line layer operator with a zero endpoint.
        let radii = [3.0, 5.0, 7.0];
        let out = stability_sweep(&dw(), 1, 0.0, &radii).unwrap();
        for &(r, mu) in &out {
            assert!(mu > 0.0, "mu_R <= 0 at R={r}");
        }
        let d1 = (out[1].1 - out[0].1).abs();
        let d2 = (out[2].1 - out[1].1).abs();
        assert!(d2 < d1, "mu_R not settling: {out:?}");
        assert!(out[2].1 < 2.0, "mu_R at R=7 above the plateau bound: {}", out[2].1);
    }

    #[test]
    fn eigenfunction_concentrates_in_layer_but_vanishes_at_wall() {
        let sol = solve(1, 14.0, 1400);
        let eig = principal_eigenpair(&sol).unwrap();
        // Peak sits inside the boundary layer, a few units from the wall.
        let k_peak = eig
            .phi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let s_peak = sol.problem.radius - k_peak as f64 * sol.problem.h;
        assert!(s_peak > 0.0 && s_peak < 6.0, "peak at distance {s_peak} from the wall");
        // The normalized profile slope peaks exactly at the wall where
        // the eigenfunction is pinned to zero, so the sup gap between
        // the two shapes is order one, not small.
        let profile = default_profile(&dw()).unwrap();
        let gap = eigenfunction_profile_gap(&eig, &sol, &profile, 6.0);
        assert!(gap > 0.9, "gap {gap}");
    }

    #[test]
    fn zeta_identity_holds_to_integrator_accuracy() {
        let sol = solve(2, 8.0, 1600);
        let res = zeta_identity_residual(&sol).unwrap();
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn zeta_identity_all_dimensions() {
        for n in 1..=3u32 {
            let sol = solve(n, 6.0, 1200);
            let res = zeta_identity_residual(&sol).unwrap();
            assert!(res < 1e-6, "n={n}: residual {res}");
        }
    }

    #[test]
    fn zeta_identity_vanishes_on_constant_well_state() {
        // u = mu makes W'(u) = 0, so both zeta and the integral vanish
        // identically along the integration.
        let p = RadialProblem::with_mesh(dw(), 2, 4.0, 0.0, 4.0 / 400.0).unwrap();
        let cells = p.cells();
        let sol = RadialSolution {
            problem: p,
            u: vec![1.0; cells + 1],
            uprime: vec![0.0; cells + 1],
            flux: 0.0,
            energy: 0.0,
            residual: 0.0,
            trivial: false,
        };
        assert_eq!(zeta_identity_residual(&sol).unwrap(), 0.0);
    }

    #[test]
    fn trivial_state_is_rejected() {
        let sol = solve(2, 1.0, 200);
        assert!(sol.trivial);
        assert!(matches!(
            principal_eigenpair(&sol),
            Err(Error::DiagnosticUndefined(_))
        ));
        assert!(matches!(
            zeta_identity_residual(&sol),
            Err(Error::DiagnosticUndefined(_))
        ));
    }
}
