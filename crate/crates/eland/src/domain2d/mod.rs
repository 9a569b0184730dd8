//! Two-dimensional Dirichlet problems on gridded domains: geometry and
//! distance fields, monotone and minimizing solvers, plateau verification,
//! thin-layer scaling, ordered multi-well families, and the quadrant
//! saddle construction.

pub mod geometry;
pub mod layer;
pub mod multiwell;
pub mod saddle;
pub mod solve;
pub mod verify;

pub use geometry::{DiskSpec, Domain2D, DomainSpec, Shape};
pub use layer::{layer_experiment, width_1d, LayerRow, LayerTable};
pub use multiwell::{multiwell_ordered, plateau_level_ok, MultiwellOutcome};
pub use saddle::{flux_at, saddle_demo, FluxSample};
pub use solve::{
    lower_solution_field, solve_minimizer_2d, solve_monotone, solve_monotone_from_ball,
    BoundaryKind, GridField2D, MonotoneReport,
};
pub use verify::{verify_main_theorem, Solve2DReport};
