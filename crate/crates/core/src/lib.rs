//! Adaptive single-index kernel estimation on the Gaussian white noise model.
//!
//! The observation `Y(dt) = F(t)dt + ε W(dt)` is simulated on a cell grid over a square
//! domain. Estimators are kernel averages under linear transforms of the domain: a single
//! direction `θ` with bandwidth `h`, or a pair `(θ, ν)`. The selector picks `(θ̂, ĥ)` by
//! comparing pair and single estimates against a noise threshold.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod exec;
pub mod kernels;
pub mod lower_bound;
pub mod noise_field;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod risk;
pub mod selector;
pub mod signals;

pub use error::{LabError, Result};
pub use estimator::{direction_grid, Direction, TransformMatrix};
pub use exec::Execution;
pub use kernels::{make_default_kernel, make_order_kernel, Kernel1D, ProductKernel, Weighting};
pub use noise_field::{simulate, simulate_deterministic, Field, GridSpec, Observation};
pub use selector::{select_estimate, SelectionTables, SelectorConfig};
pub use signals::{make_hoelder, make_inhomogeneous, HoelderSpec, Link, NikolskiiSpec};
