//! Experiment driver: configs, parameter sweeps, error metrics and output.

mod config;
mod experiment;
mod io;
mod metrics;

pub use config::{ExperimentConfig, TestKind, DEFAULT_TRACTION, RANDOM_FIBER_TABLE};
pub use experiment::{
    boundary_conditions, generate_network, reference_material, run_experiment, solve_network, solve_one,
    PointSolution, SweepRecord,
};
pub use io::{csv_string, parse_csv, parse_vtk, read_csv, vtk_string, write_csv, write_vtk, VtkGrid, CSV_HEADER};
pub use metrics::{convergence_slope, l2_error, Slopes};
