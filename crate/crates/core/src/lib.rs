//! Local (occupation) time statistics of discrete-time random walks on finite
//! directed graphs.
//!
//! The walker starts at `va` and takes `n` steps; the local time `L(v)` counts
//! the steps `1..=n` at which it sits on `v` (the starting position is never
//! counted). Averages come in two flavours:
//!
//! * fixed endpoint (`Endpoint::Fixed(vb)`): unnormalized sums over paths ending
//!   at `vb`, so `<1> = P^n[va, vb]`;
//! * free endpoint (`Endpoint::Free`): ordinary expectations, `<1> = 1`.
//!
//! Every quantity is available from several independent engines:
//!
//! * [`exact`]: time-domain matrix-power sums and an augmented
//!   (vertex, count) chain;
//! * [`zdomain`]: resolvent formulas, either evaluated at a real `z > 1` or
//!   expanded as truncated power series in `w = 1/z` ([`zseries`]) whose
//!   coefficients are the time-domain values;
//! * [`closed_forms`]: analytic results for the complete graph, the star graph
//!   and the discrete line;
//! * [`montecarlo`]: seeded, parallel, bit-reproducible sampling.
//!
//! [`asymptotics`] covers the stationary distribution and large-`n` limits via
//! the final value theorem.

pub mod asymptotics;
pub mod cli;
pub mod closed_forms;
mod error;
pub mod exact;
pub mod graph;
pub mod montecarlo;
pub mod zdomain;
pub mod zseries;

pub use error::{Error, Result};
pub use graph::{Endpoint, EnsembleSpec, Graph, TransitionMatrix};
pub use zseries::ZSeries;
