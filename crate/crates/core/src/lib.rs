//! Dykstra's cyclic projections with exact rate functions and trace
//! diagnostics.

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod expbound;
mod expr;
pub mod engine;
pub mod rates;
pub mod regularity;
pub mod sets;
pub mod vector;

pub use engine::{dykstra_run, dykstra_step, map_run, map_run_with_order, DykstraState, Method, SweepOrder, Trace};
pub use error::{DiagnosticsError, EngineError, RateError, SetError};
pub use exact::{ExactNat, ExactPos};
pub use rates::{Calculus, Caps, Counterfunction, NatThreshold, RateBound, ThresholdFunction};
pub use sets::{ConvexSet, SetDescription, SetFamily};
pub use vector::Vector;
