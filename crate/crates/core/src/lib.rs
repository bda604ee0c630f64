//! Transitionless driving of a quantum parametric oscillator, computed
//! through its classical counterpart.
//!
//! A [`FrequencySchedule`] drives two classical solutions `μ`, `ν`
//! ([`cpo::integrate`]); from them come the energies and adiabaticity
//! parameters ([`adiabaticity`]), and from `Q` the exact transition
//! probabilities ([`transition`]). [`oracle`] recomputes the probabilities
//! from the propagator on a grid as an independent check.

// NaN must fail range checks, hence the negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adiabaticity;
pub mod closed_form;
pub mod cpo;
pub mod error;
pub mod ode;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod schedule;
pub mod transition;

pub use cpo::{CpoState, CpoTrajectory, OscillatorVariant};
pub use error::{Error, Result};
pub use schedule::{make_cubic_schedule, EffectiveFrequencies, FrequencySchedule};
pub use transition::{QParameter, TransitionTable};
