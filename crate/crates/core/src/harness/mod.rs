//! Experiment runner for the three-burst heat-type fixture: configuration,
//! sweeps, scoring and CSV/SVG output.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod report;

pub use config::{Algorithm, AlgorithmChoice, BackgroundKind, BurstSet, ExperimentConfig, Sweep, SweepVar};
pub use experiment::{build_scenario, detect_events, evaluate, match_events, run_experiment, Estimate, SweepPoint};
pub use figures::{reproduce_figure, FigureOutcome, Panel};
pub use report::{emit_csv, emit_svg_plot, format_csv, format_estimates_csv, format_shapes_csv, parse_csv, sweep_plot, Plot, Quantity, Series};
