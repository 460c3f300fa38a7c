//! Ligon-Schaaf regularization of the Kepler problem.
//!
//! The crate maps Kepler phase space to the cotangent bundle of the 3-sphere
//! (and of the hyperboloid for unbound orbits), propagates bound orbits with
//! the closed-form Delaunay flow, and evaluates the tangential curvature of
//! restricted three-body energy surfaces pulled back through the
//! Levi-Civita / stereographic / Ligon-Schaaf chain.
//!
//! All numerics are generic over [`Real`]; `f64` aliases are provided at the
//! crate root for the common case.

pub mod curvature;
pub mod error;
pub mod hamiltonians;
pub mod identities;
pub mod kepler_eq;
pub mod linalg;
pub mod ls_map;
pub mod orbit;
pub mod projections;
pub mod scan;
pub mod scalar;
pub mod simplex;
pub mod state;

pub use curvature::{tangential_curvature, CurvatureEval, DerivativeMode, Hamiltonian};
pub use error::{Error, Result};
pub use hamiltonians::{eval_hx, locate_l1, LagrangePointL1, MassRatio, RestrictedProblem};
pub use identities::{verify_chain, verify_identities, IdentityReport};
pub use kepler_eq::{kepler_function_grid, solve_elliptic, solve_hyperbolic, GridReport, KeplerRoot};
pub use ls_map::{forward, inverse};
pub use orbit::{delaunay_flow, elements, period, propagate, DelaunayElements, ElementSet, OrbitalElements};
pub use projections::{ComplexPair, PlanarCotangent};
pub use scalar::Real;
pub use scan::{
    constrained_minimize, grid_scan, threshold_estimate, Constraints, CurvatureSample, GridSpec, MinimizeResult,
    ScanReport,
};
pub use state::{CartesianState, ConservedQuantities, EnergySign, RsState, SphereState};

pub type CartesianState64 = CartesianState<f64>;
pub type SphereState64 = SphereState<f64>;
pub type RsState64 = RsState<f64>;
pub type ComplexPair64 = ComplexPair<f64>;
pub type RestrictedProblem64 = RestrictedProblem<f64>;
pub type ElementSet64 = ElementSet<f64>;
pub type ScanReport64 = ScanReport<f64>;
pub type CurvatureSample64 = CurvatureSample<f64>;
