//! Exact symbolic tensor calculus on explicit charts, with a focus on
//! cotangent-bundle metric extensions and Ricci-flow identity verification.
//!
//! The crate is organized as a pipeline:
//!
//! * [`expr`] — exact scalar expressions (rationals, variables, sums,
//!   products, integer powers, `exp`) with canonical normal forms,
//!   differentiation, and randomized zero-testing;
//! * [`tensor`] — dense indexed tensors of expressions over a chart;
//! * [`geometry`] — metric inversion, Christoffel symbols, curvature,
//!   covariant derivatives, and tensor Laplacians;
//! * [`curvature`] — concircular, conharmonic, and Weyl tensors and the
//!   linear relation among them;
//! * [`extension`] — modified Riemann extensions of base geometries and the
//!   block-structure identities they satisfy;
//! * [`flow`] — Ricci-flow right-hand sides, exact solution families, and
//!   symbolic residual verifiers for the evolution equations;
//! * [`manifold`] — the file format for chart/metric/connection input;
//! * [`suites`] — named verification suites with JSON reports.

pub mod expr;
pub mod symbol;
pub(crate) mod ratfun;

pub use expr::{EvalError, EvalValue, Expression, ZeroParams, ZeroVerdict};
pub use symbol::Symbol;

pub mod curvature;
pub mod extension;
pub mod flow;
pub mod geometry;
pub mod report;
pub mod tensor;

#[cfg(test)]
pub(crate) mod testutil;

pub use geometry::{MetricStructure, Connection, RicciConvention};
pub use tensor::{Chart, IndexedTensor, Variance};
