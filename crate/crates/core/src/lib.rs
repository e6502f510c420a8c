//! Weighted volumes, growth exponents and drift-Laplacian spectrum bottoms on
//! rotationally symmetric weighted manifolds `dr^2 + g(r)^2 dtheta^2` with
//! density `e^{-f(r)}`, plus mean-curvature bound calculators.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod manifold;
pub mod profile;
pub mod quadrature;
pub mod spectrum;
pub mod tridiag;
pub mod verify;
pub mod volume;

pub use bounds::{
    cross_check_with_spectrum, lemma_split, mean_curvature_bounds, nonexistence_verdict,
    CrossCheckReport, CurvatureBounds, GrowthRegime, HypersurfaceData,
};
pub use config::ConfigFile;
pub use error::{Error, Result};
pub use manifold::{make_model, unit_sphere_volume, ManifoldSpec, ModelFamily};
pub use profile::{Formula, RadialProfile};
pub use quadrature::{integrate, QuadratureConfig};
pub use spectrum::{
    barrier_lower_bound, ess_spectrum_bottom, lambda1_exterior_fd, oscillation_probe,
    oscillation_threshold, test_function_bound, SolverConfig, SpectrumEstimate, TestFunction,
};
pub use volume::{
    annulus_volume, ball_volume, mu_delta, mu_v, mu_w, total_volume, volume_report, TotalVolume,
};
