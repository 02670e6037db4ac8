//! Topography of multivariate normal mixtures through the ridgeline manifold.
//!
//! Every critical point of a K-component Gaussian mixture lies on the image
//! of the unit simplex under the ridgeline map `x*(α)`. This crate evaluates
//! that map and the density along it, solves the pi-equation and curvature
//! zeroes for pairs of components, enumerates modes and saddles, builds the
//! pairwise linkage graph, and cross-checks everything against a brute-force
//! oracle. A small EM fitter turns raw data into mixtures to analyze.

pub mod curvature;
pub mod em;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod numeric;
pub mod oracle;
mod pair;
pub mod piplot;
pub mod ridgeline;
pub mod topo;
pub mod write;

pub use curvature::{
    curvature_eval, q_zeroes, special_case_analysis, CurvatureEval, QZeroes, SpecialCase, SpecialCaseReport,
};
pub use em::{fit_em, load_csv, DataMatrix, EmFit, EmOptions};
pub use error::{Error, Result};
pub use model::{load_model, validate_mixture, Component, Mixture, ModelFile, SimplexPoint};
pub use oracle::{grid_modes, multistart_ascent, verify_report, GridSpec, OracleMode, VerifyReport};
pub use piplot::{
    critical_points_for_pi, modality_bands, mode_count, pi_curve, pi_of_alpha, solve_pi_equation, Band, Crossing,
    Direction, ModalityBands, PiCurve,
};
pub use ridgeline::{
    arclength, classify_critical, elevation, elevation_profile, ridgeline_point, simplex_grid_elevation, tangent_frame,
    CriticalKind, CriticalPoint, ProfileAxis, ProfileSample, RidgelineEval, SimplexGrid, TangentFrame,
};
pub use topo::{
    analyze_pair, analyze_pair_at, full_topography, full_topography_with, linkage_graph, linkage_graph_with,
    supercomponents, LinkReason, LinkageEdge, LinkageGraph, Method, PairReport, TopoOptions, TopographyReport,
};
