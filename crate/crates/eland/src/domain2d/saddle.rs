//! Saddle-type solution on a quadrant: zero on the coordinate axes,
//! mirror conditions on the far edges, positive inside. Odd reflection
//! across the axes extends it to the plane cross pattern.

use serde::Serialize;

use crate::domain2d::geometry::{Domain2D, Shape};
use crate::domain2d::solve::{solve_minimizer_2d, GridField2D};
use crate::error::{Error, Result};
use crate::potentials::Potential;

#[derive(Clone, Debug, Serialize)]
pub struct FluxSample {
    pub y: f64,
    /// One-sided second-order du/dx at the axis x = 0.
    pub flux: f64,
}

pub fn saddle_demo(l: f64, pot: &Potential) -> Result<(GridField2D, Vec<FluxSample>)> {
    if l < 20.0 {
        return Err(Error::Domain("saddle demo needs L >= 20".into()));
    }
    // Evenness of W about 0 keeps the odd reflection a solution.
    let mut asym: f64 = 0.0;
    for k in 0..=100 {
        let t = pot.mu() * k as f64 / 100.0;
        asym = asym.max((pot.w(t) - pot.w(-t)).abs());
    }
    if asym > 1e-10 {
        return Err(Error::Assumption("saddle demo needs an even potential".into()));
    }

    let h = 0.1;
    let dom = Domain2D::build(Shape::SquareOddSymmetry { l }, h)?;
    let field = solve_minimizer_2d(&dom, pot)?;
    if field.trivial || field.interior_min_max().1 < 0.5 * pot.mu() {
        return Err(Error::Domain(
            "saddle demo came out trivial; the square is too small".into(),
        ));
    }

    let mut profile = Vec::new();
    let mut y = h;
    while y < l - 0.5 * h {
        let u1 = field.value_at(h, y);
        let u2 = field.value_at(2.0 * h, y);
        profile.push(FluxSample { y, flux: (4.0 * u1 - u2) / (2.0 * h) });
        y += h;
    }
    Ok((field, profile))
}

/// Flux at a given height, interpolated from the sampled profile.
pub fn flux_at(profile: &[FluxSample], y: f64) -> Option<f64> {
    profile
        .iter()
        .min_by(|a, b| (a.y - y).abs().total_cmp(&(b.y - y).abs()))
        .map(|s| s.flux)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dw() -> Potential {
        Potential::double_well(1.0).unwrap()
    }

    #[test]
    fn quadrant_solution_is_positive_with_unit_flux() {
        let (field, profile) = saddle_demo(30.0, &dw()).unwrap();
        // Positive strictly inside the quadrant.
        for (p, &b) in field.domain.inside.iter().enumerate() {
            if b {
                let (x, y) = field.domain.node_xy(p);
                assert!(
                    field.values[p] > 0.0,
                    "u({x}, {y}) = {} not positive",
                    field.values[p]
                );
            }
        }
        // Away from the corner the axis flux approaches the profile
        // slope sqrt(2 W(0)) = 1/sqrt(2).
        let f = flux_at(&profile, 25.0).unwrap();
        let target = (0.5f64).sqrt();
        assert!((f - target).abs() < 0.05 * target, "flux {f} vs {target}");
    }

    #[test]
    fn rejects_uneven_potential_and_small_square() {
        let skew = Potential::multi_well(vec![(1.0, 0.5), (2.0, 0.0)]).unwrap();
        assert!(saddle_demo(30.0, &skew).is_err());
        assert!(saddle_demo(10.0, &dw()).is_err());
    }
}
