//! Analysis of finite-dimensional heterogeneous SIS models
//! `u' = φ(u)·Tu − γ·u` with a general incidence function `φ`.
//!
//! The transmission graph splits into atoms (strongly connected
//! components). Equilibria are in one-to-one correspondence with antichains
//! of supercritical atoms, the support of each equilibrium is the future of
//! its antichain, and a trajectory started from `h` converges to the maximal
//! equilibrium of the future of `supp(h)`. This crate computes all of these
//! objects and checks them against direct integration, including the model
//! with an external disease reservoir.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod graph;
pub mod incidence;
pub mod model;
pub mod ode;
pub mod reservoir;
pub mod spectral;
pub mod structure;
pub mod tolerances;

pub use dynamics::{EquilibriumRecord, TerminalReason, Trajectory};
pub use error::{Error, Result};
pub use incidence::Incidence;
pub use model::{FeatureSpace, SisModel, StateVector, SubsetMask};
pub use reservoir::ReservoirModel;
pub use structure::{Antichain, AtomClass, AtomDecomposition};
pub use tolerances::Tolerances;

pub use nalgebra::DMatrix;
