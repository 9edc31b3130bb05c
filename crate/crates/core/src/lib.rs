//! Retraction-based, constraint-preserving integrators for left-invariant
//! nonholonomic systems on Lie groups, instantiated for the Suslov problem
//! on SO(3).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod check;
pub mod cli;
pub mod constraint;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod integrators;
pub mod oracle;
pub mod retraction;
pub mod suslov;

pub use algebra::{GroupElement, InertiaTensor};
pub use constraint::ConstraintSubspace;
pub use error::{Error, Result};
pub use integrators::{Method, StepperConfig};
pub use retraction::RetractionKind;
pub use suslov::{FullState, SuslovState, SuslovSystem};
