//! Bump test functions, quadrature, and integral checks of the weighted
//! inequalities.

pub mod bump;
pub mod checks;
pub mod quadrature;

pub use bump::{default_suite, make_bump, BumpDomain, BumpKind, BumpSpec, Modulation, TestFunction};
pub use checks::{
    carleman_sweep, check_energy_identity, check_prop21, check_prop23, check_prop23_shifted, prop23_log_shift,
    summarize_sweep, CarlemanSweep, EnergyIdentityReport, InequalityReport, SweepRow, CARLEMAN_CONSTANT, RATIO_SLACK,
};
pub use quadrature::{
    gauss_legendre, integrate, integrate_adaptive, AdaptiveSettings, QuadratureResult, VectorQuadrature,
};
