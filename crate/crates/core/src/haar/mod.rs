//! Haar averages: Weingarten moments up to degree three, the single-qubit
//! Clifford 3-design, the frame operator, the Ω operator and the
//! inequalities built from its isotypic structure.

pub mod appendix_d;
pub mod clifford;
pub mod frame;
pub mod isotypic;
pub mod weingarten;

pub use appendix_d::{
    appendix_d_inequality_d2, appendix_d_inequality_d3, appendix_d_inequality_isotypic,
    IsotypicInequalityReport, QubitInequalityReport,
};
pub use clifford::{single_qubit_clifford_group, UnitaryDesign};
pub use frame::{
    frame_operator, frame_operator_closed_form, omega_operator, omega_symmetry, TwirlMethod,
};
pub use isotypic::{isotypic_projectors, IsotypicProjectors};
pub use weingarten::{
    haar_moment, monte_carlo_moments, MomentSpec, MonteCarloEstimate, Weingarten,
};
