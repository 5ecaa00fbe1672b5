//! Numerical laboratory for a Hong-Ou-Mandel sensor built from two
//! evanescently coupled optical cavities.
//!
//! * [`closed_form`]: analytic coincidence probability G²(τ) and dG²/dg.
//! * [`oracle`]: brute-force G² from integrated single-photon responses.
//! * [`metrics`]: responsivity, noise-equivalent coupling, dynamic range, ridges.
//! * [`tmm`]: 1-D transfer-matrix model of the cavity stack and the
//!   exponential coupling model g(x, n).
//! * [`apps`]: force and refractive-index sensing maps, Fisher-information trial counts.
//!
//! Grid evaluations run on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise; results are identical.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod closed_form;
pub mod dual;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod point;
pub mod quadrature;
pub mod tmm;

pub use closed_form::{dg2_dg, g2_closed_form, g2_dip_curve, ClosedFormTerms, CoincidenceResult, Method};
pub use error::{Error, Result};
pub use point::OperatingPoint;
