//! Reference-element integral tensors and their contraction with element
//! geometry.
//!
//! Every integral the time stepper needs is a polynomial integral over a
//! reference triangle, a reference dual half, a reference side or the unit
//! time interval. Those are computed once per [`DiscretizationOrder`] (by
//! Gauss rules that are exact for the integrands); physical matrices are
//! linear combinations of them with Jacobian, normal and length coefficients.
//!
//! A dual half of kind `Lower` or `Upper` sitting on local edge `e` of its
//! primary triangle occupies a fixed sub-triangle of `T_std` (barycenter plus
//! the two endpoints of reference edge `e`), so the coupling between the
//! triangle basis and the split-square basis only needs six reference
//! configurations.

mod assemble;
mod dump;
mod flux;
mod reference;

pub use assemble::{
    assemble_element_matrices, assemble_with_penalty, ElementMatrices, GradientBlock,
    HalfCoefficients, SegmentFlux, DEFAULT_PENALTY,
};
pub use dump::{load_tensors, read_tensors, save_tensors, write_tensors, DumpError};
pub use flux::{contract_flux_terms, convective_residual, rusanov_flux, segment_speed};
pub use reference::{reference_half_map, side_parameter_point, ReferenceTensors};

pub use crate::basis::DiscretizationOrder;
