//! Derivative-free design optimization of bistable waterbomb origami on a
//! fast bar-and-hinge structural surrogate.
//!
//! The crate couples three pieces:
//! * a parameterized bar-and-hinge mesh of one 1/(2n) waterbomb sector
//!   ([`mesh`]) plus a reduced torsion-spring variant ([`spring`]),
//! * a displacement-controlled equilibrium engine running the two-step
//!   forming/actuation protocol and extracting the bistability ratio
//!   phi = dU / U_max ([`engine`]),
//! * a Mesh Adaptive Direct Search optimizer with extreme-barrier
//!   constraints and hidden-failure tolerance ([`mads`]), wired together by
//!   the scenario front end ([`scenario`]).

pub mod design;
pub mod engine;
pub mod mads;
pub mod mesh;
pub mod scenario;
pub mod spring;

pub use design::{
    build_layout, validate_design, DesignBounds, DesignError, DesignVector, GeometryParams,
    MaterialPair, Region, SectorLayout,
};
pub use engine::{
    actuation_sweep, extract_metrics, forming, solve_equilibrium, total_energy,
    BistabilityMetrics, Configuration, EnergyLandscape, HiddenFailure, SweepOptions,
};
pub use mesh::{build_mesh, crease_hinge_stiffness, MeshError, WaterbombMesh};
