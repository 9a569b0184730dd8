//! Ordered stable solutions for multi-well potentials: one solution
//! per well, built inductively by monotone iteration between the
//! previous solution and the next well level.

use crate::domain2d::geometry::Domain2D;
use crate::domain2d::solve::{lower_solution_field, solve_monotone, GridField2D};
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::radial::{solve_with_profile, RadialProblem};

#[derive(Debug)]
pub struct MultiwellOutcome {
    /// Ordered solutions u_1 < u_2 < ... (one per well reached).
    pub solutions: Vec<GridField2D>,
    /// Index of the first well whose ordering check failed, if any.
    pub failure_index: Option<usize>,
    /// min over the interior of u_{i+1} - u_i for consecutive pairs.
    pub interior_gaps: Vec<f64>,
}

pub fn multiwell_ordered(
    domain: &Domain2D,
    pot: &Potential,
    epsilon: f64,
) -> Result<MultiwellOutcome> {
    let wells = pot.wells();
    if wells.is_empty() {
        return Err(Error::Domain("potential has no well list".into()));
    }
    if !(epsilon > 0.0 && epsilon < wells[0].0) {
        return Err(Error::Domain("epsilon must lie in (0, mu_1)".into()));
    }
    // Largest inscribed ball hosts the lower solution for every well.
    let dist_max = domain.max_dist();
    let center_node = (0..domain.dist.len())
        .max_by(|&a, &b| domain.dist[a].total_cmp(&domain.dist[b]))
        .unwrap();
    let center = domain.node_xy(center_node);
    let r_ball = dist_max - 2.0 * domain.h;
    if r_ball <= 1.0 {
        return Err(Error::Domain("domain cannot host a lower-solution ball".into()));
    }

    let mut solutions: Vec<GridField2D> = Vec::new();
    let mut interior_gaps = Vec::new();
    let mut failure_index = None;

    for i in 1..=wells.len() {
        // A single-well potential degenerates to one monotone solve.
        let trunc = if wells.len() == 1 {
            pot.clone()
        } else {
            pot.truncate_to_wells(i)?
        };
        let profile = crate::radial::default_profile(&trunc)?;
        let problem =
            RadialProblem::with_mesh(trunc.clone(), 2, r_ball, 0.0, r_ball / 2000.0)?;
        let ball = solve_with_profile(&problem, &profile)?;
        if ball.trivial {
            return Err(Error::Domain(format!(
                "ball solution for well {i} is trivial; domain too small"
            )));
        }
        let mut lower = lower_solution_field(domain, &ball, center)?;
        if let Some(prev) = solutions.last() {
            for (v, &p) in lower.values.iter_mut().zip(prev.values.iter()) {
                *v = v.max(p);
            }
        }
        let (u_i, _report) = solve_monotone(domain, &trunc, &lower)?;

        if let Some(prev) = solutions.last() {
            let mut gap = f64::INFINITY;
            for (p, &b) in domain.inside.iter().enumerate() {
                if b {
                    gap = gap.min(u_i.values[p] - prev.values[p]);
                }
            }
            interior_gaps.push(gap);
            if gap <= 0.0 {
                failure_index = Some(i);
                solutions.push(u_i);
                break;
            }
        }
        solutions.push(u_i);
    }

    Ok(MultiwellOutcome { solutions, failure_index, interior_gaps })
}

/// Plateau check for the i-th solution: u_i exceeds mu_i - epsilon
/// somewhere deep inside (fraction of the deep region covered).
pub fn plateau_level_ok(
    outcome: &MultiwellOutcome,
    domain: &Domain2D,
    pot: &Potential,
    epsilon: f64,
    depth: f64,
) -> Vec<bool> {
    let wells = pot.wells();
    outcome
        .solutions
        .iter()
        .zip(wells.iter())
        .map(|(u, &(mu_i, _))| {
            let mut ok = true;
            for (p, &b) in domain.inside.iter().enumerate() {
                if b && domain.dist[p] >= depth && u.values[p] < mu_i - epsilon {
                    ok = false;
                    break;
                }
            }
            ok
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain2d::geometry::Shape;

    fn two_well() -> Potential {
        Potential::multi_well(vec![(1.0, 0.5), (2.0, 0.0)]).unwrap()
    }

    #[test]
    fn two_well_square_gives_ordered_pair() {
        let dom =
            Domain2D::build(Shape::Rectangle { width: 40.0, height: 40.0 }, 0.4).unwrap();
        let out = multiwell_ordered(&dom, &two_well(), 0.1).unwrap();
        assert_eq!(out.solutions.len(), 2);
        assert!(out.failure_index.is_none());
        assert!(out.interior_gaps[0] > 0.0, "gap {}", out.interior_gaps[0]);
        let levels = plateau_level_ok(&out, &dom, &two_well(), 0.1, 10.0);
        assert!(levels.iter().all(|&b| b), "plateaus {levels:?}");
        // u_1 plateaus near 1, u_2 near 2.
        assert!(out.solutions[0].value_at(20.0, 20.0) > 0.9);
        assert!(out.solutions[0].value_at(20.0, 20.0) < 1.0);
        assert!(out.solutions[1].value_at(20.0, 20.0) > 1.9);
    }

    #[test]
    fn single_well_reduces_to_monotone_solve() {
        let pot = Potential::double_well(1.0).unwrap();
        let dom =
            Domain2D::build(Shape::Rectangle { width: 30.0, height: 30.0 }, 0.4).unwrap();
        let out = multiwell_ordered(&dom, &pot, 0.1).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert!(out.failure_index.is_none());
        assert!(out.solutions[0].value_at(15.0, 15.0) > 0.99);
    }
}
