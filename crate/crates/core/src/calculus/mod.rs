//! Pointwise tensors and compatibility residuals of a frame with connection.
//!
//! Every function here takes a [`PointJets`](crate::model::PointJets), the
//! spec evaluated at one point. Order 1 suffices for everything except the
//! curvature of the induced connection on `TM`, which needs order 2.

mod checks;
mod connection;
mod flat;
mod metric;
mod tensor;

use thiserror::Error;

use crate::exprjet::DomainError;

pub use checks::*;
pub use connection::{
    a_curvature, a_torsion, a_torsion_jets, christoffel, compatibility_tensor_covariant, compatibility_tensor_frame,
    connection_curvature, dual_a_connection, dual_coefficient_jets, tau_coefficient_jets, tau_intertwine_residual,
    DualConnection, InducedConnection,
};
pub use flat::{
    connection_values, flat_frame_probe, transport_rate, transport_segment, FlatFrameProbe, Frame, FrameSample,
    ProbeConfig,
};
pub use metric::{
    generalized_residuals, killing_residual_frame, killing_residual_sym, koszul_delta_residual, rho_bar_derivative,
    structure_residual, GeneralizedResiduals, StructureKind,
};
pub use tensor::{Slot, TensorSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalcError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("spec has no {0} block")]
    Missing(&'static str),
    #[error("metric is not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("{0}")]
    Shape(String),
    #[error("connection is not flat: curvature {max:e} exceeds {tolerance:e} at {point:?}")]
    NotFlat { max: f64, tolerance: f64, point: Vec<f64> },
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("check requires a spec in lie mode")]
    NotLie,
}
