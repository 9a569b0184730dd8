//! 2-D discretization and solvers: monotone (Sattinger) iteration and
//! projected energy minimization, both on the 5-point Laplacian.

use crate::domain2d::geometry::Domain2D;
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::radial::RadialSolution;

const CG_TOL: f64 = 1e-12;
const CG_MAX: usize = 20_000;
const MONOTONE_INCREMENT: f64 = 1e-8;
const MONOTONE_MAX_ITERS: usize = 50_000;
// The flow only globalizes; Newton takes over well before full
// convergence, so the handoff threshold is loose.
const FLOW_TOL: f64 = 1e-3;
const FLOW_MAX_STEPS: usize = 1_000;
const NEWTON_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    DirichletZero,
    /// Dirichlet zeros on the axes, mirror ghosts on the far edges.
    OddSymmetry,
}

#[derive(Clone, Debug)]
pub struct GridField2D {
    pub domain: Domain2D,
    /// Values on the full grid; zero outside the mask.
    pub values: Vec<f64>,
    pub bc: BoundaryKind,
    /// Sup of the interior FD residual |Lap u - W'(u)|.
    pub residual: f64,
    /// Energy comparison chose the zero state.
    pub trivial: bool,
}

impl GridField2D {
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        self.domain.node_at(x, y).map(|p| self.values[p]).unwrap_or(0.0)
    }

    pub fn interior_min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (p, &b) in self.domain.inside.iter().enumerate() {
            if b {
                lo = lo.min(self.values[p]);
                hi = hi.max(self.values[p]);
            }
        }
        (lo, hi)
    }
}

/// Packed unknown layout with a 4-point neighbor stencil. Entries are
/// unknown indices; NONE marks a zero ghost. Mirror neighbors of the
/// odd-symmetry square point back at the reflected unknown.
pub struct Discretization {
    pub nodes: Vec<usize>,
    pub index: Vec<isize>,
    stencil: Vec<[isize; 4]>,
    /// Inner-product weights symmetrizing the mirror rows.
    weight: Vec<f64>,
    pub h: f64,
    bc: BoundaryKind,
}

const NONE: isize = -1;

pub fn discretize(domain: &Domain2D) -> Discretization {
    let bc = if domain.is_odd_symmetry() {
        BoundaryKind::OddSymmetry
    } else {
        BoundaryKind::DirichletZero
    };
    let (nx, ny) = (domain.nx, domain.ny);
    let mut nodes = Vec::new();
    let mut index = vec![NONE; nx * ny];
    for (p, &b) in domain.inside.iter().enumerate() {
        if b {
            index[p] = nodes.len() as isize;
            nodes.push(p);
        }
    }
    let mut stencil = Vec::with_capacity(nodes.len());
    let mut weight = vec![1.0; nodes.len()];
    for (k, &p) in nodes.iter().enumerate() {
        let i = p % nx;
        let j = p / nx;
        let mut row = [NONE; 4];
        let neighbors = [
            (i.wrapping_sub(1), j, 0usize, 1usize),
            (i + 1, j, 1, 0),
            (i, j.wrapping_sub(1), 2, 3),
            (i, j + 1, 3, 2),
        ];
        let mut w = 1.0;
        for &(ni, nj, slot, opposite) in &neighbors {
            if ni < nx && nj < ny {
                let q = nj * nx + ni;
                if index[q] >= 0 {
                    row[slot] = index[q];
                    continue;
                }
                if bc == BoundaryKind::OddSymmetry && (ni + 1 == nx || nj + 1 == ny) {
                    // Mirror ghost: reflect to the opposite neighbor.
                    let (mi, mj) = match opposite {
                        0 => (i - 1, j),
                        1 => (i + 1, j),
                        2 => (i, j - 1),
                        _ => (i, j + 1),
                    };
                    let m = mj * nx + mi;
                    row[slot] = index[m];
                    w *= 0.5;
                    continue;
                }
            }
            // Zero ghost (Dirichlet).
        }
        stencil.push(row);
        weight[k] = w;
    }
    Discretization { nodes, index, stencil, weight, h: domain.h, bc }
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pack(&self, full: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&p| full[p]).collect()
    }

    pub fn unpack(&self, packed: &[f64], grid_len: usize) -> Vec<f64> {
        let mut full = vec![0.0; grid_len];
        for (k, &p) in self.nodes.iter().enumerate() {
            full[p] = packed[k];
        }
        full
    }

    /// out = Laplacian of u (5-point).
    pub fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        let h2 = self.h * self.h;
        for k in 0..u.len() {
            let mut s = -4.0 * u[k];
            for &q in &self.stencil[k] {
                if q >= 0 {
                    s += u[q as usize];
                }
            }
            out[k] = s / h2;
        }
    }

    /// Sup norm of Lap u - W'(u).
    pub fn residual(&self, pot: &Potential, u: &[f64]) -> f64 {
        let mut lap = vec![0.0; u.len()];
        self.laplacian(u, &mut lap);
        let mut sup: f64 = 0.0;
        for k in 0..u.len() {
            sup = sup.max((lap[k] - pot.wp(u[k])).abs());
        }
        sup
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..a.len() {
            s += self.weight[k] * a[k] * b[k];
        }
        s
    }

    /// Solve (sigma I - Lap + diag(extra)) x = b by conjugate
    /// gradients in the weighted inner product; x holds the warm start.
    pub fn cg_solve(
        &self,
        sigma: f64,
        extra: Option<&[f64]>,
        b: &[f64],
        x: &mut [f64],
    ) -> Result<usize> {
        let n = b.len();
        let mut ax = vec![0.0; n];
        let apply = |v: &[f64], out: &mut [f64], disc: &Discretization| {
            disc.laplacian(v, out);
            for k in 0..n {
                out[k] = sigma * v[k] - out[k];
                if let Some(e) = extra {
                    out[k] += e[k] * v[k];
                }
            }
        };
        apply(x, &mut ax, self);
        let mut r: Vec<f64> = (0..n).map(|k| b[k] - ax[k]).collect();
        let b_norm = self.dot(b, b).sqrt().max(1e-300);
        let mut p = r.clone();
        let mut rs = self.dot(&r, &r);
        if rs.sqrt() <= CG_TOL * b_norm {
            return Ok(0);
        }
        let mut ap = vec![0.0; n];
        for it in 1..=CG_MAX {
            apply(&p, &mut ap, self);
            let pap = self.dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Numeric(
                    "conjugate gradients met non-positive curvature".into(),
                ));
            }
            let alpha = rs / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rs_new = self.dot(&r, &r);
            if rs_new.sqrt() <= CG_TOL * b_norm {
                return Ok(it);
            }
            let beta = rs_new / rs;
            rs = rs_new;
            for k in 0..n {
                p[k] = r[k] + beta * p[k];
            }
        }
        Err(Error::Numeric("conjugate gradients did not converge".into()))
    }

    /// Discrete energy: sum over edges of half squared differences plus
    /// cell potential terms. Ghost edges contribute with value zero;
    /// mirror edges contribute nothing (zero normal difference).
    pub fn energy(&self, pot: &Potential, u: &[f64], domain: &Domain2D) -> f64 {
        let h = self.h;
        let (nx, ny) = (domain.nx, domain.ny);
        let mut grad = 0.0;
        let mut bulk = 0.0;
        for (k, &p) in self.nodes.iter().enumerate() {
            let i = p % nx;
            let j = p / nx;
            bulk += self.weight[k] * pot.w(u[k]);
            // +x and +y edges, plus ghost edges on the -x/-y side.
            let mut edge = |ni: usize, nj: usize, ghostable: bool| {
                if ni >= nx || nj >= ny {
                    return;
                }
                let q = self.index[nj * nx + ni];
                if q >= 0 {
                    let d = u[q as usize] - u[k];
                    grad += 0.5 * d * d;
                } else if ghostable {
                    let mirror = self.bc == BoundaryKind::OddSymmetry
                        && (ni + 1 == nx || nj + 1 == ny);
                    if !mirror {
                        grad += 0.5 * u[k] * u[k];
                    }
                }
            };
            edge(i + 1, j, true);
            edge(i, j + 1, true);
            if i > 0 && self.index[j * nx + i - 1] < 0 {
                grad += 0.5 * u[k] * u[k];
            }
            if j > 0 && self.index[(j - 1) * nx + i] < 0 {
                grad += 0.5 * u[k] * u[k];
            }
        }
        grad + h * h * bulk
    }
}

fn wpp_sup(pot: &Potential) -> f64 {
    let lo = pot.mu_minus().min(0.0);
    let hi = pot.mu();
    let mut sup: f64 = 0.0;
    for k in 0..=800 {
        let t = lo + (hi - lo) * k as f64 / 800.0;
        sup = sup.max(pot.wpp(t).abs());
    }
    sup
}

/// Ball-supported lower solution: the radial solution transplanted to
/// the ball B_R(P), zero outside.
pub fn lower_solution_field(
    domain: &Domain2D,
    radial: &RadialSolution,
    center: (f64, f64),
) -> Result<GridField2D> {
    let r_ball = radial.problem.radius;
    let d_center = domain.dist_at(center.0, center.1);
    if d_center <= r_ball {
        return Err(Error::Domain(format!(
            "ball of radius {r_ball} at distance {d_center} does not fit in the domain"
        )));
    }
    let mut values = vec![0.0; domain.inside.len()];
    for (p, &b) in domain.inside.iter().enumerate() {
        if !b {
            continue;
        }
        let (x, y) = domain.node_xy(p);
        let rho = (x - center.0).hypot(y - center.1);
        if rho < r_ball {
            values[p] = radial.u_at(rho).max(0.0);
        }
    }
    Ok(GridField2D {
        domain: domain.clone(),
        values,
        bc: BoundaryKind::DirichletZero,
        residual: f64::NAN,
        trivial: false,
    })
}

#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub iterations_minimal: usize,
    pub iterations_maximal: usize,
    /// Sup distance between the maximal and minimal solutions.
    pub extremal_gap: f64,
    pub maximal: GridField2D,
}

/// Monotone (Sattinger) iteration u <- (Lambda - Lap)^{-1}(Lambda u - W'(u))
/// from the given lower solution; also runs downward from the constant
/// mu to bracket with the maximal solution.
pub fn solve_monotone(
    domain: &Domain2D,
    pot: &Potential,
    lower: &GridField2D,
) -> Result<(GridField2D, MonotoneReport)> {
    let disc = discretize(domain);
    let lambda = wpp_sup(pot) + 1.0;
    let mu = pot.mu();

    let run = |start: Vec<f64>, upward: bool| -> Result<(Vec<f64>, usize)> {
        let mut u = start;
        let n = u.len();
        let mut next = u.clone();
        for it in 1..=MONOTONE_MAX_ITERS {
            let rhs: Vec<f64> = (0..n).map(|k| lambda * u[k] - pot.wp(u[k])).collect();
            disc.cg_solve(lambda, None, &rhs, &mut next)?;
            // The starting field is a sub/supersolution only up to
            // interpolation error, O(h^2), plus linear-solver error,
            // so small dips are tolerated and clamped away; anything
            // larger means the bracket is genuinely invalid.
            let slack = (1.0 + mu.abs()) * (1e-6 + 0.05 * domain.h * domain.h);
            let mut inc: f64 = 0.0;
            for k in 0..n {
                let step = next[k] - u[k];
                if upward && step < -slack {
                    return Err(Error::Numeric(format!(
                        "monotone iteration decreased by {:.2e} at step {it}",
                        -step
                    )));
                }
                if !upward && step > slack {
                    return Err(Error::Numeric(format!(
                        "downward iteration increased by {:.2e} at step {it}",
                        step
                    )));
                }
                if upward {
                    next[k] = next[k].max(u[k]);
                } else {
                    next[k] = next[k].min(u[k]);
                }
                inc = inc.max(step.abs());
            }
            u.copy_from_slice(&next);
            for v in &mut u {
                *v = v.clamp(0.0_f64.min(pot.mu_minus()), mu);
            }
            if inc < MONOTONE_INCREMENT {
                return Ok((u, it));
            }
        }
        Err(Error::Numeric("monotone iteration did not converge".into()))
    };

    let start_lo = disc.pack(&lower.values);
    let (u_min, it_min) = run(start_lo, true)?;
    let (u_max, it_max) = run(vec![mu; disc.len()], false)?;

    let mut gap: f64 = 0.0;
    for k in 0..disc.len() {
        if u_max[k] < u_min[k] - 1e-8 {
            return Err(Error::Numeric(
                "extremal solutions lost their ordering".into(),
            ));
        }
        gap = gap.max(u_max[k] - u_min[k]);
    }

    let make = |u: &[f64]| GridField2D {
        domain: domain.clone(),
        values: disc.unpack(u, domain.inside.len()),
        bc: BoundaryKind::DirichletZero,
        residual: disc.residual(pot, u),
        trivial: false,
    };
    let minimal = make(&u_min);
    let report = MonotoneReport {
        iterations_minimal: it_min,
        iterations_maximal: it_max,
        extremal_gap: gap,
        maximal: make(&u_max),
    };
    Ok((minimal, report))
}

/// Monotone solve seeded with a radial lower solution on the largest
/// inscribed ball, planted at the deepest interior point.
pub fn solve_monotone_from_ball(
    domain: &Domain2D,
    pot: &Potential,
) -> Result<(GridField2D, MonotoneReport)> {
    let center_node = (0..domain.dist.len())
        .max_by(|&a, &b| domain.dist[a].total_cmp(&domain.dist[b]))
        .ok_or_else(|| Error::Domain("empty domain".into()))?;
    let center = domain.node_xy(center_node);
    let r_ball = domain.max_dist() - 2.0 * domain.h;
    if r_ball <= 1.0 {
        return Err(Error::Domain("domain cannot host a lower-solution ball".into()));
    }
    let problem =
        crate::radial::RadialProblem::with_mesh(pot.clone(), 2, r_ball, 0.0, r_ball / 2000.0)?;
    let ball = crate::radial::solve_radial_minimizer(&problem)?;
    if ball.trivial {
        return Err(Error::Domain(
            "ball lower solution is trivial; domain too small".into(),
        ));
    }
    let lower = lower_solution_field(domain, &ball, center)?;
    solve_monotone(domain, pot, &lower)
}

/// Global-minimizer route: projected semi-implicit gradient flow from
/// the profile-of-distance barrier, Newton polish, then an energy
/// comparison against the zero state.
pub fn solve_minimizer_2d(domain: &Domain2D, pot: &Potential) -> Result<GridField2D> {
    let disc = discretize(domain);
    let profile = crate::radial::default_profile(pot)?;
    let mu = pot.mu();
    let lo = pot.mu_minus().min(0.0);
    let n = disc.len();

    let mut u: Vec<f64> = disc
        .nodes
        .iter()
        .map(|&p| profile.eval(domain.dist[p]).min(mu))
        .collect();

    let tau = 0.5;
    let mut res = disc.residual(pot, &u);
    let mut steps = 0;
    let mut next = u.clone();
    while res > FLOW_TOL && steps < FLOW_MAX_STEPS {
        let rhs: Vec<f64> = (0..n).map(|k| u[k] / tau - pot.wp(u[k])).collect();
        disc.cg_solve(1.0 / tau, None, &rhs, &mut next)?;
        for k in 0..n {
            u[k] = next[k].clamp(lo, mu);
        }
        res = disc.residual(pot, &u);
        steps += 1;
    }

    // Newton polish on -Lap u + W'(u) = 0 with CG inner solves; fall
    // back to the flow iterate if curvature turns non-positive.
    let mut best = u.clone();
    let mut best_res = res;
    for _ in 0..40 {
        if best_res <= NEWTON_RESIDUAL {
            break;
        }
        let mut lap = vec![0.0; n];
        disc.laplacian(&u, &mut lap);
        let g: Vec<f64> = (0..n).map(|k| lap[k] - pot.wp(u[k])).collect();
        let wpp: Vec<f64> = u.iter().map(|&v| pot.wpp(v)).collect();
        let mut delta = vec![0.0; n];
        match disc.cg_solve(0.0, Some(&wpp), &g, &mut delta) {
            Ok(_) => {}
            Err(_) => break,
        }
        let mut lambda_step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..n).map(|k| u[k] + lambda_step * delta[k]).collect();
            let trial_res = disc.residual(pot, &trial);
            if trial_res < best_res {
                u = trial;
                best = u.clone();
                best_res = trial_res;
                improved = true;
                break;
            }
            lambda_step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let u = best;
    let res = best_res;

    let energy_u = disc.energy(pot, &u, domain);
    let zero = vec![0.0; n];
    let energy_zero = disc.energy(pot, &zero, domain);
    if energy_zero <= energy_u + 1e-12 * (1.0 + energy_u.abs()) {
        return Ok(GridField2D {
            domain: domain.clone(),
            values: vec![0.0; domain.inside.len()],
            bc: disc_bc(&disc),
            residual: pot.wp(0.0).abs(),
            trivial: true,
        });
    }
    if res > 1e-6 {
        return Err(Error::Numeric(format!(
            "2-D solve stalled at residual {res:.3e}"
        )));
    }
    Ok(GridField2D {
        domain: domain.clone(),
        values: disc.unpack(&u, domain.inside.len()),
        bc: disc_bc(&disc),
        residual: res,
        trivial: false,
    })
}

fn disc_bc(disc: &Discretization) -> BoundaryKind {
    disc.bc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain2d::geometry::{DiskSpec, Shape};
    use crate::radial::{solve_radial_minimizer, RadialProblem};

    fn dw() -> Potential {
        Potential::double_well(1.0).unwrap()
    }

    fn square(side: f64, h: f64) -> Domain2D {
        Domain2D::build(Shape::Rectangle { width: side, height: side }, h).unwrap()
    }

    #[test]
    fn laplacian_of_poisson_mode_matches_eigenvalue() {
        // sin(pi x / a) sin(pi y / a) is an eigenfunction of the
        // discrete Laplacian with a known eigenvalue.
        let a = 4.0;
        let h = 0.05;
        let dom = square(a, h);
        let disc = discretize(&dom);
        let pi = std::f64::consts::PI;
        let u: Vec<f64> = disc
            .nodes
            .iter()
            .map(|&p| {
                let (x, y) = dom.node_xy(p);
                (pi * x / a).sin() * (pi * y / a).sin()
            })
            .collect();
        let mut lap = vec![0.0; u.len()];
        disc.laplacian(&u, &mut lap);
        let lam = 2.0 * (2.0 - 2.0 * (pi * h / a).cos()) / (h * h);
        for k in 0..u.len() {
            assert!((lap[k] + lam * u[k]).abs() < 1e-9, "node {k}");
        }
    }

    #[test]
    fn cg_inverts_shifted_laplacian() {
        let dom = square(3.0, 0.1);
        let disc = discretize(&dom);
        let n = disc.len();
        let b: Vec<f64> = (0..n).map(|k| ((k * 37) % 11) as f64 - 5.0).collect();
        let mut x = vec![0.0; n];
        disc.cg_solve(2.0, None, &b, &mut x).unwrap();
        let mut lap = vec![0.0; n];
        disc.laplacian(&x, &mut lap);
        for k in 0..n {
            assert!((2.0 * x[k] - lap[k] - b[k]).abs() < 1e-7);
        }
    }

    #[test]
    fn lower_solution_requires_contained_ball() {
        let dom = square(30.0, 0.25);
        let p = RadialProblem::with_mesh(dw(), 2, 12.0, 0.0, 12.0 / 1200.0).unwrap();
        let sol = solve_radial_minimizer(&p).unwrap();
        let ok = lower_solution_field(&dom, &sol, (15.0, 15.0)).unwrap();
        let (_, hi) = ok.interior_min_max();
        assert!((hi - sol.u_center()).abs() < 1e-2);
        assert!(hi <= 1.0);
        assert!(lower_solution_field(&dom, &sol, (3.0, 15.0)).is_err());
    }

    #[test]
    fn monotone_iteration_brackets_solution_on_square() {
        let dom = square(30.0, 0.25);
        let p = RadialProblem::with_mesh(dw(), 2, 12.0, 0.0, 12.0 / 1200.0).unwrap();
        let sol = solve_radial_minimizer(&p).unwrap();
        let lower = lower_solution_field(&dom, &sol, (15.0, 15.0)).unwrap();
        let (minimal, report) = solve_monotone(&dom, &dw(), &lower).unwrap();
        let (lo, hi) = minimal.interior_min_max();
        assert!(lo > 0.0 && hi < 1.0, "range ({lo}, {hi})");
        assert!(minimal.value_at(15.0, 15.0) > 0.99);
        assert!(minimal.residual < 1e-6, "residual {}", minimal.residual);
        // Lower solution stays below, maximal above.
        for (p, &b) in dom.inside.iter().enumerate() {
            if b {
                assert!(minimal.values[p] >= lower.values[p] - 1e-9);
                assert!(report.maximal.values[p] >= minimal.values[p] - 1e-8);
            }
        }
    }

    #[test]
    fn minimizer_finds_plateau_and_beats_zero() {
        let dom = square(30.0, 0.25);
        let field = solve_minimizer_2d(&dom, &dw()).unwrap();
        assert!(!field.trivial);
        assert!(field.value_at(15.0, 15.0) > 0.99);
        let disc = discretize(&dom);
        let u = disc.pack(&field.values);
        let zero = vec![0.0; disc.len()];
        assert!(disc.energy(&dw(), &u, &dom) < disc.energy(&dw(), &zero, &dom));
    }

    #[test]
    fn small_square_gives_trivial_minimizer() {
        let dom = square(2.0, 0.05);
        let field = solve_minimizer_2d(&dom, &dw()).unwrap();
        assert!(field.trivial);
        assert!(field.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dumbbell_has_two_plateaus() {
        let shape = Shape::UnionOfDisks(vec![
            DiskSpec { cx: 0.0, cy: 0.0, r: 12.0 },
            DiskSpec { cx: 20.0, cy: 0.0, r: 12.0 },
        ]);
        let dom = Domain2D::build(shape, 0.25).unwrap();
        let field = solve_minimizer_2d(&dom, &dw()).unwrap();
        assert!(!field.trivial);
        assert!(field.value_at(0.0, 0.0) > 0.99);
        assert!(field.value_at(20.0, 0.0) > 0.99);
    }

    #[test]
    fn mesh_refinement_order() {
        let mut probes = Vec::new();
        for h in [0.4, 0.2, 0.1] {
            let dom = square(12.0, h);
            let f = solve_minimizer_2d(&dom, &dw()).unwrap();
            probes.push(f.value_at(3.0, 6.0));
        }
        let e1 = (probes[0] - probes[1]).abs();
        let e2 = (probes[1] - probes[2]).abs();
        let order = (e1 / e2).log2();
        assert!(order >= 1.5, "observed order {order}");
    }
}
