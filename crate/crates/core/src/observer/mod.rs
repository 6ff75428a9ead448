//! Dynamic contact estimation.
//!
//! Two complementary estimators recover the generalized contact force from
//! proprioception: a windowed generalized-momentum observer ([`GmoState`])
//! that needs no acceleration signal, and a direct dynamic-balance deviation
//! ([`deviation`]) that does. Either residual feeds the constrained
//! minimum-norm wrench recovery ([`estimate_wrench`]) and the
//! sensitivity-derived detection thresholds ([`detection_thresholds`]).

mod detect;
mod jfd;
mod momentum;
mod sensitivity;
mod wrench;

pub use detect::{
    detect, detected_spans, detection_thresholds, ContactDecision, DEFAULT_STATE_ERROR_BOUND,
};
pub use jfd::{deviation, deviation_with_eval};
pub use momentum::{GmoConfig, GmoState};
pub use sensitivity::residual_sensitivity;
pub use wrench::{estimate_wrench, WrenchEstimate, WrenchProblem};
