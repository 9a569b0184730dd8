//! Singular-perturbation boundary layers: width of the transition
//! region of Delta u = lambda^2 W'(u) as lambda grows.

use rayon::prelude::*;
use serde::Serialize;

use crate::domain2d::geometry::{Domain2D, Shape};
use crate::domain2d::solve::solve_minimizer_2d;
use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::radial::{solve_radial_minimizer, RadialProblem};

#[derive(Clone, Debug, Serialize)]
pub struct LayerRow {
    pub lambda: f64,
    /// inf{d: u >= mu - eps whenever dist >= d} on the 2-D domain.
    pub width: f64,
    pub width_times_lambda: f64,
    /// Same quantity for the 1-D interval analog.
    pub width_1d_times_lambda: f64,
}

pub type LayerTable = Vec<LayerRow>;

/// Solve the lambda-scaled problem by stretching the domain by lambda,
/// where the equation reverts to Delta u = W'(u) and the layer width
/// scales back by 1/lambda.
pub fn layer_experiment(
    shape: &Shape,
    pot: &Potential,
    lambdas: &[f64],
    epsilon: f64,
) -> Result<LayerTable> {
    if !(epsilon > 0.0 && epsilon < pot.mu()) {
        return Err(Error::Domain("epsilon must lie in (0, mu)".into()));
    }
    if lambdas.iter().any(|&l| l < 10.0) {
        return Err(Error::Domain("lambda values must be at least 10".into()));
    }
    lambdas
        .par_iter()
        .map(|&lambda| {
            let stretched = shape.scaled(lambda);
            let h = 0.2;
            let dom = Domain2D::build(stretched, h)?;
            if dom.nx * dom.ny > 4_000_000 {
                return Err(Error::Domain(format!(
                    "lambda = {lambda} needs more than 4e6 grid nodes; reduce lambda"
                )));
            }
            let field = solve_minimizer_2d(&dom, pot)?;
            if field.trivial {
                return Err(Error::Domain(format!(
                    "trivial state at lambda = {lambda}; domain too small"
                )));
            }
            let mu_eps = pot.mu() - epsilon;
            let mut width_stretched: f64 = 0.0;
            for (p, &b) in dom.inside.iter().enumerate() {
                if b && field.values[p] < mu_eps {
                    width_stretched = width_stretched.max(dom.dist[p]);
                }
            }
            width_stretched += h;
            Ok(LayerRow {
                lambda,
                width: width_stretched / lambda,
                width_times_lambda: width_stretched,
                width_1d_times_lambda: width_1d(pot, lambda, epsilon)?,
            })
        })
        .collect()
}

/// 1-D analog on the unit interval: u'' = lambda^2 W'(u) with zero
/// endpoints, via the radial solver (n = 1) on the stretched interval.
pub fn width_1d(pot: &Potential, lambda: f64, epsilon: f64) -> Result<f64> {
    let r = 0.5 * lambda;
    let problem = RadialProblem::with_mesh(pot.clone(), 1, r, 0.0, r / 4000.0)?;
    let sol = solve_radial_minimizer(&problem)?;
    if sol.trivial {
        return Err(Error::Domain(format!(
            "trivial 1-D state at lambda = {lambda}"
        )));
    }
    let d = crate::radial::diagnostics(&sol, epsilon)?;
    Ok(r - d.plateau_width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dw() -> Potential {
        Potential::double_well(1.0).unwrap()
    }

    #[test]
    fn one_dimensional_width_matches_layer_constant() {
        // width * lambda -> D'(0.1) = sqrt(2) atanh(0.9).
        let d = crate::profile1d::compute_dprime(&dw(), 0.1).unwrap();
        for &lambda in &[50.0, 100.0, 200.0] {
            let w = width_1d(&dw(), lambda, 0.1).unwrap();
            assert!(
                (w - d).abs() < 0.1 * d,
                "lambda {lambda}: width {w} vs {d}"
            );
        }
    }

    #[test]
    fn disk_width_is_dimension_independent() {
        let d = crate::profile1d::compute_dprime(&dw(), 0.1).unwrap();
        let shape = Shape::Disk(crate::domain2d::geometry::DiskSpec {
            cx: 0.0,
            cy: 0.0,
            r: 1.0,
        });
        let table = layer_experiment(&shape, &dw(), &[50.0], 0.1).unwrap();
        let row = &table[0];
        assert!(
            (row.width_times_lambda - d).abs() < 0.15 * d,
            "width*lambda {} vs {}",
            row.width_times_lambda,
            d
        );
        assert!((row.width_1d_times_lambda - d).abs() < 0.1 * d);
    }

    #[test]
    fn rejects_small_lambda() {
        let shape = Shape::Rectangle { width: 1.0, height: 1.0 };
        assert!(layer_experiment(&shape, &dw(), &[5.0], 0.1).is_err());
    }
}
