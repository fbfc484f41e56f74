//! Equilibrium engine: elastic energy and gradient, constrained solves, the
//! forming/actuation protocol, and bistability metrics.

pub mod energy;
pub mod landscape;
pub mod protocol;
pub mod solver;

pub use energy::{
    dihedral_angle, max_bar_strain, reflect_through_plane, stress_proxy, total_energy,
    Configuration, EnergyError,
};
pub use landscape::{
    extract_metrics, trapezoid_integral, BistabilityMetrics, EnergyLandscape, MetricsError,
};
pub use protocol::{actuation_sweep, forming, protocol_freedoms, reaction_force};
pub use solver::{solve_equilibrium, HiddenFailure, NodeFreedom, SweepOptions};
