//! Numerical toolkit for the Dirichlet problem Delta u = W'(u) with
//! potential-type nonlinearities: the 1-D connecting profile and its layer
//! constant, energy-minimizing radial solutions on balls with their
//! diagnostics, linearized spectra, and 2-D solutions built by monotone
//! iteration or energy minimization.

pub mod cli;
pub mod domain2d;
pub mod error;
pub mod fit;
pub mod poly;
pub mod potentials;
pub mod profile1d;
pub mod quad;
pub mod radial;
pub mod spectrum;
pub mod suite;
pub mod tridiag;

pub use error::{Error, Result};
pub use potentials::Potential;
pub use profile1d::{compute_dprime, compute_profile, ProfileU};
pub use radial::{solve_radial_minimizer, RadialProblem, RadialSolution};
